"""Expert teachers replaying a filtered curriculum from a preliminary run.

Three replay policies over the surviving mixtures:

* pool: ignore ordering, sample from one big mixture of every component;
* time: advance to the next mixture every ``step_rate`` episodes;
* reward: advance once the mean reward over a full 50-episode window reaches
  the threshold recorded for the current mixture in the preliminary run.

The index over mixtures only moves forward and saturates at the last one.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from ..errors import ConfigError, EmptyCurriculumError
from ..mixture import GmmSnapshot, sample_component_by_lp, sample_task_from
from ..space import TaskSpace
from ..trace import FilteredCurriculum
from .base import Teacher

__all__ = ["NicheTeacher", "VARIANTS"]

VARIANTS = ("pool", "time", "reward")


class NicheTeacher(Teacher):
    """Replays a filtered curriculum with pool, time, or reward stepping."""

    def __init__(
        self,
        space: TaskSpace,
        curriculum: FilteredCurriculum,
        variant: str,
        rng: np.random.Generator,
        *,
        step_rate: int = 250,
        reward_window: int = 50,
    ):
        super().__init__(space, rng)
        if variant not in VARIANTS:
            raise ConfigError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
        if curriculum.is_empty:
            raise EmptyCurriculumError(
                "filtered curriculum has no snapshots; the expert teacher cannot run"
            )
        if step_rate < 1:
            raise ConfigError(f"step_rate must be positive, got {step_rate}")
        self.curriculum = curriculum
        self.variant = variant
        self.step_rate = step_rate
        self._episodes_stepped = 0
        self._reward_idx = 0
        self._window: deque[float] = deque(maxlen=reward_window)
        self._pool: GmmSnapshot | None = None
        if variant == "pool":
            comps = curriculum.pooled_components()
            total = sum(c.mixture_weight for c in comps)
            self._pool = GmmSnapshot(
                components=tuple(
                    type(c)(mean=c.mean, covariance=c.covariance, mixture_weight=c.mixture_weight / total)
                    for c in comps
                ),
                fit_episode=0,
            )

    @property
    def current_index(self) -> int:
        """Position in the curriculum (always 0 for the pool variant)."""
        if self.variant == "pool":
            return 0
        if self.variant == "time":
            return min(self._episodes_stepped // self.step_rate, len(self.curriculum) - 1)
        return self._reward_idx

    def current_mixture(self) -> GmmSnapshot:
        if self._pool is not None:
            return self._pool
        return self.curriculum.snapshots[self.current_index]

    def _propose(self) -> np.ndarray:
        component = sample_component_by_lp(self.current_mixture().components, self.rng)
        return sample_task_from(component, self.space, self.rng)

    def _observe(self, params: np.ndarray, reward: float) -> None:
        self.step(reward)

    def step(self, reward: float) -> None:
        """Advance the replay state by one observed episode.

        Contract-free entry point so a composite teacher can forward episodes
        it proposed itself. Time stepping counts every episode; reward
        stepping pushes into its window and, once the window is full, advances
        past the current threshold (>= comparison) and clears the window.
        The pool variant ignores feedback entirely.
        """
        self._episodes_stepped += 1
        if self.variant == "reward":
            self._window.append(float(reward))
            if len(self._window) == self._window.maxlen:
                if float(np.mean(self._window)) >= self.curriculum.thresholds[self._reward_idx]:
                    self._reward_idx = min(self._reward_idx + 1, len(self.curriculum) - 1)
                    self._window.clear()
