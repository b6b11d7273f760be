"""Subject-level data records and array conversion helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class SubjectRecord:
    """One observation: follow-up time, event indicator, covariates, outcome.

    ``t`` is the observed value min(true covariate, censoring value);
    ``delta`` is 1 when the true value was observed and 0 when censored.
    ``z`` holds the fully observed covariates (may be empty) and ``y`` the
    regression outcome (None when survival fitting is the only consumer).
    """

    t: float
    delta: int
    z: tuple[float, ...] = field(default=())
    y: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.t) or self.t < 0:
            raise InvalidInputError(f"t must be finite and >= 0, got {self.t}")
        if self.delta not in (0, 1):
            raise InvalidInputError(f"delta must be 0 or 1, got {self.delta}")
        if any(not math.isfinite(v) for v in self.z):
            raise InvalidInputError("covariate vector contains non-finite values")
        if self.y is not None and not math.isfinite(self.y):
            raise InvalidInputError(f"y must be finite, got {self.y}")


def as_arrays(records) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray | None]:
    """Convert a sequence of SubjectRecord to (t, delta, z, y) arrays.

    ``z`` has shape (n, p); ``y`` is None if any record lacks an outcome.
    """
    records = list(records)
    if not records:
        raise InvalidInputError("empty record list")
    p = len(records[0].z)
    if any(len(r.z) != p for r in records):
        raise InvalidInputError("inconsistent covariate lengths across records")
    t = np.array([r.t for r in records], dtype=float)
    delta = np.array([r.delta for r in records], dtype=int)
    z = np.array([r.z for r in records], dtype=float).reshape(len(records), p)
    if all(r.y is not None for r in records):
        y = np.array([r.y for r in records], dtype=float)
    else:
        y = None
    return t, delta, z, y


def from_arrays(t, delta, z=None, y=None) -> list[SubjectRecord]:
    """Build SubjectRecord list from parallel arrays (inverse of as_arrays)."""
    t = np.asarray(t, dtype=float)
    n = len(t)
    delta = np.asarray(delta, dtype=int)
    if z is None:
        z = np.empty((n, 0))
    z = np.asarray(z, dtype=float).reshape(n, -1)
    return [
        SubjectRecord(
            t=float(t[i]),
            delta=int(delta[i]),
            z=tuple(float(v) for v in z[i]),
            y=None if y is None else float(y[i]),
        )
        for i in range(n)
    ]
