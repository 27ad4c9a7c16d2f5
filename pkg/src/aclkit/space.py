"""Bounded continuous task-parameter spaces.

All teachers reason in the normalized unit cube; raw parameter vectors exist
only at the environment boundary. Distances between tasks and every Gaussian
fitted over tasks use normalized coordinates, so dimensions with very
different ranges (say heights in [0, 3] against spacings in [0, 6]) carry
equal weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = ["TaskSpace"]


def _as_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError(f"{name} must be a non-empty 1-D sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} must be finite, got {arr}")
    return arr


@dataclass(frozen=True)
class TaskSpace:
    """Axis-aligned box of valid task parameters.

    Attributes:
        lower: per-dimension lower bounds.
        upper: per-dimension upper bounds, strictly above ``lower``.
    """

    lower: np.ndarray
    upper: np.ndarray
    d: int = field(init=False)

    def __post_init__(self) -> None:
        lower = _as_vector(self.lower, "lower")
        upper = _as_vector(self.upper, "upper")
        if lower.shape != upper.shape:
            raise ConfigError(
                f"bound shapes differ: lower {lower.shape} vs upper {upper.shape}"
            )
        if not np.all(lower < upper):
            raise ConfigError("every dimension needs lower < upper (no degenerate widths)")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "d", lower.size)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def _check_dim(self, p: np.ndarray) -> np.ndarray:
        arr = np.asarray(p, dtype=float)
        if arr.shape != (self.d,):
            raise ConfigError(f"expected a {self.d}-vector, got shape {arr.shape}")
        return arr

    def normalize(self, p) -> np.ndarray:
        """Map an in-bounds point affinely onto [0, 1]^d."""
        arr = self._check_dim(p)
        return (arr - self.lower) / self.width

    def denormalize(self, u) -> np.ndarray:
        """Inverse of :meth:`normalize`."""
        arr = self._check_dim(u)
        return self.lower + arr * self.width

    def clip(self, p) -> np.ndarray:
        """Coordinate-wise clamp into the box."""
        arr = self._check_dim(p)
        return np.clip(arr, self.lower, self.upper)

    def contains(self, p, atol: float = 0.0) -> bool:
        arr = self._check_dim(p)
        return bool(np.all(arr >= self.lower - atol) and np.all(arr <= self.upper + atol))

    def sample_uniform(self, rng: np.random.Generator) -> np.ndarray:
        """Draw each coordinate i.i.d. uniform within its bounds."""
        return rng.uniform(self.lower, self.upper)
