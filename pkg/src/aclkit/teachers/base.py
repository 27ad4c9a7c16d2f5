"""Teacher contract shared by every curriculum generator.

A teacher is a sequential proposer: ``propose()`` returns raw task parameters,
``observe(params, reward)`` feeds back the episodic reward for exactly that
proposal, and the two must alternate strictly. ``snapshot()`` exposes the
current mixture when the teacher has one.
"""

from __future__ import annotations

import abc

import numpy as np

from ..errors import ContractViolation
from ..mixture import GmmSnapshot
from ..space import TaskSpace

__all__ = ["Teacher", "RandomTeacher"]


class Teacher(abc.ABC):
    """Base class enforcing the propose/observe alternation contract."""

    def __init__(self, space: TaskSpace, rng: np.random.Generator):
        self.space = space
        self.rng = rng
        self._pending: np.ndarray | None = None
        self.episodes_observed = 0

    def propose(self) -> np.ndarray:
        """Pick raw task parameters for the next training episode."""
        if self._pending is not None:
            raise ContractViolation("propose() called again before observe()")
        params = np.array(self._propose(), dtype=float, copy=True)
        self._pending = params
        return params.copy()

    def observe(self, params, reward: float) -> None:
        """Report the episodic reward obtained on the last proposed task."""
        if self._pending is None:
            raise ContractViolation("observe() called before propose()")
        arr = np.asarray(params, dtype=float)
        if arr.shape != self._pending.shape or not np.array_equal(arr, self._pending):
            raise ContractViolation(
                f"observe() got {arr!r} but the last proposal was {self._pending!r}"
            )
        self._pending = None
        self._observe(arr, float(reward))
        self.episodes_observed += 1

    def snapshot(self) -> GmmSnapshot | None:
        """Current mixture, or None for teachers without one."""
        return None

    @abc.abstractmethod
    def _propose(self) -> np.ndarray: ...

    def _observe(self, params: np.ndarray, reward: float) -> None:
        pass


class RandomTeacher(Teacher):
    """Uniform task sampling over the whole space; ignores all feedback."""

    def _propose(self) -> np.ndarray:
        return self.space.sample_uniform(self.rng)
