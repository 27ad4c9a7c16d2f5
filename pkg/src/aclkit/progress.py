"""Per-task absolute learning progress over a growing episode history.

Every episode is stored twice: the full history keeps (normalized params,
reward) forever and serves nearest-neighbor lookups, while a FIFO window of
the most recent (params, progress) rows feeds the periodic mixture refits.
A task's progress is the absolute reward difference against the single
closest previously seen task, normalized by the declared reward span.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .space import TaskSpace

__all__ = ["RewardSpan", "EpisodeRecord", "HistoryDb", "AlpWindow", "AlpTracker", "compute_alp"]


@dataclass(frozen=True)
class RewardSpan:
    """Approximate range of achievable episodic rewards."""

    min: float
    max: float

    def __post_init__(self) -> None:
        if not (self.max > self.min):
            raise ConfigError(f"reward span needs max > min, got [{self.min}, {self.max}]")

    @property
    def width(self) -> float:
        return self.max - self.min

    def clamp(self, reward: float) -> float:
        return min(max(reward, self.min), self.max)


@dataclass(frozen=True)
class EpisodeRecord:
    """One training episode: where it was, what it paid, how much it taught."""

    params_norm: np.ndarray
    reward: float
    alp_norm: float


class HistoryDb:
    """Append-only store of (normalized params, reward), never pruned."""

    def __init__(self, d: int, capacity: int = 1024):
        self._params = np.empty((capacity, d), dtype=float)
        self._rewards = np.empty(capacity, dtype=float)
        self._n = 0

    def __len__(self) -> int:
        return self._n

    @property
    def params(self) -> np.ndarray:
        return self._params[: self._n]

    @property
    def rewards(self) -> np.ndarray:
        return self._rewards[: self._n]

    def append(self, p_norm: np.ndarray, reward: float) -> None:
        if self._n == self._params.shape[0]:
            self._params = np.concatenate([self._params, np.empty_like(self._params)])
            self._rewards = np.concatenate([self._rewards, np.empty_like(self._rewards)])
        self._params[self._n] = p_norm
        self._rewards[self._n] = reward
        self._n += 1

    def nearest(self, p_norm: np.ndarray) -> int:
        """Index of the closest stored point; earliest record wins ties."""
        if self._n == 0:
            raise ConfigError("history is empty")
        diffs = self._params[: self._n] - p_norm
        # Accumulate squared distances dimension by dimension: the float
        # operation order then matches a scalar left-to-right scan, so results
        # are bit-identical to a brute-force reference loop.
        d2 = diffs[:, 0] * diffs[:, 0]
        for j in range(1, diffs.shape[1]):
            d2 += diffs[:, j] * diffs[:, j]
        return int(np.argmin(d2))


class AlpWindow:
    """FIFO of the most recent (params_norm, alp_norm) rows, capacity N."""

    def __init__(self, d: int, capacity: int):
        if capacity < 1:
            raise ConfigError(f"window capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._rows = np.empty((capacity, d + 1), dtype=float)
        self._n = 0
        self._head = 0

    def __len__(self) -> int:
        return self._n

    def push(self, p_norm: np.ndarray, alp_norm: float) -> None:
        self._rows[self._head, :-1] = p_norm
        self._rows[self._head, -1] = alp_norm
        self._head = (self._head + 1) % self.capacity
        self._n = min(self._n + 1, self.capacity)

    def as_array(self) -> np.ndarray:
        """Rows oldest-first, shape (len, d + 1)."""
        if self._n < self.capacity:
            return self._rows[: self._n].copy()
        return np.roll(self._rows, -self._head, axis=0).copy()


def compute_alp(p_norm, r_new: float, db: HistoryDb, span: RewardSpan) -> float:
    """Absolute learning progress of a fresh episode against the history.

    Finds the single nearest prior record by Euclidean distance in normalized
    parameter space (ties resolved toward the earliest record) and returns
    |r_new - r_old| normalized by the span width, clamped into [0, 1].
    Rewards are clamped into the span before differencing. An empty history
    yields 0: with nothing to compare against there is no measured progress.
    """
    if len(db) == 0:
        return 0.0
    p = np.asarray(p_norm, dtype=float)
    r_old = float(db.rewards[db.nearest(p)])
    alp = abs(span.clamp(r_new) - span.clamp(r_old)) / span.width
    return min(max(alp, 0.0), 1.0)


class AlpTracker:
    """Owns the history database and refit window for one teacher run."""

    def __init__(self, d: int, window_capacity: int, span: RewardSpan):
        self.span = span
        self.db = HistoryDb(d)
        self.window = AlpWindow(d, window_capacity)
        self.out_of_span_count = 0
        self._episodes: list[EpisodeRecord] = []

    def __len__(self) -> int:
        return len(self.db)

    def record(self, p_norm, reward: float) -> EpisodeRecord:
        """Compute this episode's progress, then append it to both stores.

        The progress is computed against the history as it stood before the
        new episode is inserted.
        """
        p = np.asarray(p_norm, dtype=float).copy()
        if self.span.clamp(reward) != reward:
            self.out_of_span_count += 1
        alp = compute_alp(p, reward, self.db, self.span)
        self.db.append(p, reward)
        self.window.push(p, alp)
        rec = EpisodeRecord(params_norm=p, reward=float(reward), alp_norm=alp)
        self._episodes.append(rec)
        return rec

    def export_csv(self, path, space: TaskSpace) -> None:
        """Write the full episode history as CSV for post-hoc plotting."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["episode"] + [f"param_{i}" for i in range(space.d)] + ["reward", "alp_norm"])
            for i, rec in enumerate(self._episodes):
                raw = space.denormalize(rec.params_norm)
                writer.writerow([i] + [repr(float(v)) for v in raw] + [repr(rec.reward), repr(rec.alp_norm)])
