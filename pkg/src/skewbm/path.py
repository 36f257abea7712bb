"""Container for equispaced observations of a path and its CSV form."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_int, check_positive, n_observations
from .exceptions import ValidationError


@dataclass(frozen=True)
class SbmPath:
    """Observations ``values[i]`` of a path at times ``i / n`` on ``[0, T]``.

    ``values`` has ``floor(n T) + 1`` entries and starts at 0.
    """

    n: int
    T: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = check_int(self.n, "n", minimum=1)
        T = check_positive(self.T, "T")
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise ValidationError("values must be one-dimensional", ["values"])
        expected = n_observations(n, T)
        if values.size != expected:
            raise ValidationError(
                f"expected {expected} observations for n={n}, T={T}, got {values.size}",
                ["values"],
            )
        if values[0] != 0.0:
            raise ValidationError("path must start at 0", ["values"])
        if not np.all(np.isfinite(values)):
            raise ValidationError("path contains non-finite values", ["values"])
        values.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "values", values)

    @property
    def dt(self) -> float:
        return 1.0 / self.n

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) / self.n

    def __len__(self) -> int:
        return self.values.size

    def negated(self) -> "SbmPath":
        return SbmPath(self.n, self.T, -self.values)


def path_to_csv(path: SbmPath) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["t", "x"])
    for t, x in zip(path.times, path.values):
        writer.writerow([f"{t:.17g}", f"{x:.17g}"])
    return buf.getvalue()


def write_path_csv(path: SbmPath, file: str | os.PathLike) -> None:
    with open(file, "w", newline="", encoding="utf-8") as fh:
        fh.write(path_to_csv(path))


def read_path_csv(file: str | os.PathLike) -> SbmPath:
    """Read a ``t,x`` CSV; ``n`` is recovered from the time step."""
    try:
        with open(file, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ValidationError(f"cannot read path CSV {file}: {exc}", ["path"]) from exc
    if not rows or [c.strip() for c in rows[0]] != ["t", "x"]:
        raise ValidationError("path CSV must have header 't,x'", ["header"])
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ValidationError(f"malformed path CSV: {exc}", ["rows"]) from exc
    if data.shape[0] < 2:
        raise ValidationError("path CSV needs at least two rows", ["rows"])
    t, x = data[:, 0], data[:, 1]
    n = int(round(1.0 / (t[1] - t[0])))
    if not np.allclose(t, np.arange(t.size) / n, rtol=0, atol=1e-9):
        raise ValidationError("times must be equispaced from 0", ["t"])
    return SbmPath(n=n, T=(t.size - 1) / n, values=x)
