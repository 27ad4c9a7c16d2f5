"""Learning-progress-driven mixture teacher.

The teacher bootstraps with uniform task sampling while the refit window
fills, then alternates between occasional uniform exploration and sampling
from the component of the current mixture chosen proportionally to its mean
learning progress. Every ``fit_rate`` observations the mixture is refitted on
the window with AIC-selected component count, and the fitted sequence is kept
as a curriculum trace.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..mixture import GmmSnapshot, sample_component_by_lp, sample_task_from, select_best_k
from ..progress import AlpTracker, RewardSpan
from ..space import TaskSpace
from ..trace import REWARD_MEAN_MEMORY, CurriculumTrace, TraceMeta, record_reward_mean
from .base import Teacher

__all__ = ["AlpGmmConfig", "AlpGmmTeacher"]


@dataclass(frozen=True)
class AlpGmmConfig:
    """Hyperparameters of the mixture teacher.

    Attributes:
        fit_rate: refit cadence N; also the capacity of the refit window.
        k_max: largest candidate component count for AIC selection.
        rho_rnd: probability of a uniform exploration episode after bootstrap.
        reward_span: approximate reward range used to normalize progress.
        bootstrap: when False, skip the initial uniform phase (the mixture
            still cannot exist before ``fit_rate`` observations, so pre-fit
            proposals fall back to uniform).
    """

    fit_rate: int = 250
    k_max: int = 10
    rho_rnd: float = 0.10
    reward_span: RewardSpan = RewardSpan(-150.0, 350.0)
    bootstrap: bool = True

    def __post_init__(self) -> None:
        if self.fit_rate < 1:
            raise ConfigError(f"fit_rate must be positive, got {self.fit_rate}")
        if self.k_max < 2:
            raise ConfigError(f"k_max must be at least 2, got {self.k_max}")
        if self.fit_rate < self.k_max:
            raise ConfigError(f"fit_rate {self.fit_rate} must be >= k_max {self.k_max}")
        if not 0.0 <= self.rho_rnd <= 1.0:
            raise ConfigError(f"rho_rnd must be in [0, 1], got {self.rho_rnd}")

    def hash(self) -> str:
        blob = json.dumps(
            {
                "fit_rate": self.fit_rate,
                "k_max": self.k_max,
                "rho_rnd": self.rho_rnd,
                "reward_span": [self.reward_span.min, self.reward_span.max],
                "bootstrap": self.bootstrap,
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


class AlpGmmTeacher(Teacher):
    """Mixture teacher plus recorder of the curriculum it generated."""

    def __init__(
        self,
        space: TaskSpace,
        config: AlpGmmConfig,
        rng: np.random.Generator,
        *,
        seed_label: int = 0,
    ):
        super().__init__(space, rng)
        self.config = config
        self.tracker = AlpTracker(space.d, config.fit_rate, config.reward_span)
        self._mixture: GmmSnapshot | None = None
        self._trace_snapshots: list[GmmSnapshot] = []
        self._trace_means: list[float] = []
        self._ring: deque[float] = deque(maxlen=REWARD_MEAN_MEMORY)
        self._seed_label = seed_label

    @property
    def current_components(self):
        return self._mixture.components if self._mixture is not None else ()

    def snapshot(self) -> GmmSnapshot | None:
        return self._mixture

    def _propose(self) -> np.ndarray:
        if self.config.bootstrap and self._mixture is None:
            return self.space.sample_uniform(self.rng)
        if self.rng.random() < self.config.rho_rnd or self._mixture is None:
            return self.space.sample_uniform(self.rng)
        component = sample_component_by_lp(self._mixture.components, self.rng)
        return sample_task_from(component, self.space, self.rng)

    def _observe(self, params: np.ndarray, reward: float) -> None:
        self.ingest(params, reward)

    def ingest(self, params, reward: float) -> None:
        """Record one episode and refit when the cadence comes due.

        This is the contract-free entry point used when another teacher owns
        the propose/observe alternation and merely forwards episodes here.
        """
        p_norm = self.space.normalize(self.space.clip(params))
        self.tracker.record(p_norm, reward)
        self._ring.append(float(reward))
        if len(self.tracker) % self.config.fit_rate == 0:
            self._refit()

    def _refit(self) -> None:
        points = self.tracker.window.as_array()
        fitted = select_best_k(
            points, self.config.k_max, self.rng, fit_episode=len(self.tracker)
        )
        if self._trace_snapshots:
            # Close out the outgoing mixture: mean reward over (at most) the
            # last 50 episodes it served.
            self._trace_means.append(record_reward_mean(self._ring))
        self._trace_snapshots.append(fitted)
        self._ring.clear()
        self._mixture = fitted

    def trace(self) -> CurriculumTrace:
        """Finalized curriculum trace of everything fitted so far."""
        means = list(self._trace_means)
        if len(means) < len(self._trace_snapshots):
            if self._ring:
                means.append(record_reward_mean(self._ring))
            elif means:
                # The last mixture served no episodes; reuse its predecessor's
                # threshold rather than inventing one.
                means.append(means[-1])
            else:
                means.append(record_reward_mean(self.tracker.db.rewards[-REWARD_MEAN_MEMORY:]))
        meta = TraceMeta(
            space_lower=tuple(float(v) for v in self.space.lower),
            space_upper=tuple(float(v) for v in self.space.upper),
            reward_min=self.config.reward_span.min,
            reward_max=self.config.reward_span.max,
            config_hash=self.config.hash(),
            seed=self._seed_label,
        )
        return CurriculumTrace(
            snapshots=tuple(self._trace_snapshots), reward_means=tuple(means), meta=meta
        )
