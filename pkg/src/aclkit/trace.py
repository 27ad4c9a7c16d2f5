"""Curriculum traces: the artifact handed from a preliminary run to a second run.

A trace is the ordered sequence of mixtures fitted during a teacher run plus
one mean-reward threshold per mixture. Filtering drops components whose
learning-progress utility falls below a threshold (and any mixture emptied by
that), yielding the expert curriculum replayed by the niche teachers.

Traces persist as versioned JSON with every float written in C99 hex notation,
so save -> load -> save is byte-identical and a second process reproduces the
first run's mixtures bit-exactly. A SHA-256 checksum over the canonical
payload guards against corruption. The schema is documented in
``docs/trace_format.md``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, TraceFormatError
from .mixture import GmmSnapshot, WeightedGaussian
from .space import TaskSpace

__all__ = [
    "TraceMeta",
    "CurriculumTrace",
    "FilteredCurriculum",
    "record_reward_mean",
    "filter_curriculum",
    "dumps_trace",
    "loads_trace",
    "save_trace",
    "load_trace",
]

FORMAT_NAME = "acl-curriculum-trace"
FORMAT_VERSION = 1
REWARD_MEAN_MEMORY = 50


@dataclass(frozen=True)
class TraceMeta:
    """Provenance needed to replay a trace in another process."""

    space_lower: tuple[float, ...]
    space_upper: tuple[float, ...]
    reward_min: float
    reward_max: float
    config_hash: str = ""
    seed: int = 0

    def space(self) -> TaskSpace:
        return TaskSpace(lower=np.array(self.space_lower), upper=np.array(self.space_upper))


@dataclass(frozen=True)
class CurriculumTrace:
    """Ordered fitted mixtures plus per-mixture mean-reward thresholds."""

    snapshots: tuple[GmmSnapshot, ...]
    reward_means: tuple[float, ...]
    meta: TraceMeta

    def __post_init__(self) -> None:
        snaps = tuple(self.snapshots)
        means = tuple(float(m) for m in self.reward_means)
        if len(snaps) != len(means):
            raise ConfigError(
                f"{len(snaps)} snapshots but {len(means)} reward means; they must pair up"
            )
        episodes = [s.fit_episode for s in snaps]
        if any(b <= a for a, b in zip(episodes, episodes[1:])):
            raise ConfigError(f"fit episodes must strictly increase, got {episodes}")
        object.__setattr__(self, "snapshots", snaps)
        object.__setattr__(self, "reward_means", means)

    def __len__(self) -> int:
        return len(self.snapshots)


@dataclass(frozen=True)
class FilteredCurriculum:
    """A trace after low-progress components and emptied mixtures are dropped."""

    snapshots: tuple[GmmSnapshot, ...]
    thresholds: tuple[float, ...]
    delta_lp: float

    def __post_init__(self) -> None:
        if len(self.snapshots) != len(self.thresholds):
            raise ConfigError("snapshots and thresholds must pair up")
        for snap in self.snapshots:
            if any(c.lp < self.delta_lp for c in snap.components):
                raise ConfigError("a surviving component sits below the filter threshold")

    def __len__(self) -> int:
        return len(self.snapshots)

    @property
    def is_empty(self) -> bool:
        return len(self.snapshots) == 0

    def pooled_components(self) -> tuple[WeightedGaussian, ...]:
        """Every surviving component across all snapshots, in order."""
        return tuple(c for snap in self.snapshots for c in snap.components)


def record_reward_mean(rewards) -> float:
    """Mean of at most the last 50 rewards observed under one mixture."""
    tail = list(rewards)[-REWARD_MEAN_MEMORY:]
    if not tail:
        raise ConfigError("no rewards observed under this snapshot")
    return float(np.mean(tail))


def _renormalized(components) -> tuple[WeightedGaussian, ...]:
    total = sum(c.mixture_weight for c in components)
    return tuple(
        WeightedGaussian(mean=c.mean, covariance=c.covariance, mixture_weight=c.mixture_weight / total)
        for c in components
    )


def filter_curriculum(trace: CurriculumTrace, delta_lp: float) -> FilteredCurriculum:
    """Drop components with utility below ``delta_lp``; drop emptied snapshots.

    Surviving snapshots keep their original relative order and their paired
    reward thresholds. Mixture weights are renormalized so each surviving
    snapshot remains a proper mixture (component selection is LP-proportional,
    so this does not change teacher behavior).
    """
    kept_snaps: list[GmmSnapshot] = []
    kept_thresholds: list[float] = []
    for snap, mean in zip(trace.snapshots, trace.reward_means):
        survivors = [c for c in snap.components if c.lp >= delta_lp]
        if not survivors:
            continue
        kept_snaps.append(
            GmmSnapshot(
                components=_renormalized(survivors),
                fit_episode=snap.fit_episode,
                degenerate=snap.degenerate,
            )
        )
        kept_thresholds.append(mean)
    return FilteredCurriculum(
        snapshots=tuple(kept_snaps), thresholds=tuple(kept_thresholds), delta_lp=delta_lp
    )


def _hex(value: float) -> str:
    return float(value).hex()


def _unhex(text, what: str) -> float:
    try:
        return float.fromhex(text)
    except (TypeError, ValueError) as exc:
        raise TraceFormatError(f"bad float encoding for {what}: {text!r}") from exc


def _payload_dict(trace: CurriculumTrace) -> dict:
    meta = trace.meta
    return {
        "meta": {
            "space_lower": [_hex(v) for v in meta.space_lower],
            "space_upper": [_hex(v) for v in meta.space_upper],
            "reward_min": _hex(meta.reward_min),
            "reward_max": _hex(meta.reward_max),
            "config_hash": meta.config_hash,
            "seed": meta.seed,
        },
        "snapshots": [
            {
                "fit_episode": snap.fit_episode,
                "degenerate": snap.degenerate,
                "components": [
                    {
                        "mean": [_hex(v) for v in comp.mean],
                        "covariance": [[_hex(v) for v in row] for row in comp.covariance],
                        "weight": _hex(comp.mixture_weight),
                    }
                    for comp in snap.components
                ],
            }
            for snap in trace.snapshots
        ],
        "reward_means": [_hex(v) for v in trace.reward_means],
    }


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def dumps_trace(trace: CurriculumTrace) -> str:
    """Serialize to the canonical on-disk text (including trailing newline)."""
    payload = _payload_dict(trace)
    checksum = hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "checksum": checksum,
        "payload": payload,
    }
    return _canonical(doc) + "\n"


def loads_trace(text: str, expected_space: TaskSpace | None = None) -> CurriculumTrace:
    """Parse and validate a serialized trace.

    Raises:
        TraceFormatError: on unknown format or version, checksum mismatch,
            malformed floats, or a task-space mismatch against
            ``expected_space``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise TraceFormatError(f"unrecognized trace format: {doc.get('format')!r}")
    if doc.get("version") != FORMAT_VERSION:
        raise TraceFormatError(
            f"unsupported trace version {doc.get('version')!r}, expected {FORMAT_VERSION}"
        )
    payload = doc.get("payload")
    if not isinstance(payload, dict):
        raise TraceFormatError("missing payload")
    checksum = hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()
    if checksum != doc.get("checksum"):
        raise TraceFormatError("checksum mismatch: file corrupted or edited")

    try:
        raw_meta = payload["meta"]
        meta = TraceMeta(
            space_lower=tuple(_unhex(v, "space_lower") for v in raw_meta["space_lower"]),
            space_upper=tuple(_unhex(v, "space_upper") for v in raw_meta["space_upper"]),
            reward_min=_unhex(raw_meta["reward_min"], "reward_min"),
            reward_max=_unhex(raw_meta["reward_max"], "reward_max"),
            config_hash=str(raw_meta.get("config_hash", "")),
            seed=int(raw_meta.get("seed", 0)),
        )
        snapshots = []
        for raw_snap in payload["snapshots"]:
            comps = tuple(
                WeightedGaussian(
                    mean=np.array([_unhex(v, "mean") for v in rc["mean"]]),
                    covariance=np.array([[_unhex(v, "covariance") for v in row] for row in rc["covariance"]]),
                    mixture_weight=_unhex(rc["weight"], "weight"),
                )
                for rc in raw_snap["components"]
            )
            snapshots.append(
                GmmSnapshot(
                    components=comps,
                    fit_episode=int(raw_snap["fit_episode"]),
                    degenerate=bool(raw_snap.get("degenerate", False)),
                )
            )
        reward_means = tuple(_unhex(v, "reward_means") for v in payload["reward_means"])
    except (KeyError, TypeError) as exc:
        raise TraceFormatError(f"malformed payload: {exc!r}") from exc
    except ConfigError as exc:
        raise TraceFormatError(f"inconsistent trace contents: {exc}") from exc

    trace = CurriculumTrace(snapshots=tuple(snapshots), reward_means=reward_means, meta=meta)

    expected_d = len(meta.space_lower)
    for snap in trace.snapshots:
        if snap.dim != expected_d + 1:
            raise TraceFormatError(
                f"snapshot dimension {snap.dim} does not match space dimension {expected_d} + 1"
            )
    if expected_space is not None:
        if expected_space.d != expected_d:
            raise TraceFormatError(
                f"trace was recorded over a {expected_d}-D space, loader expects {expected_space.d}-D"
            )
        if tuple(expected_space.lower) != meta.space_lower or tuple(expected_space.upper) != meta.space_upper:
            raise TraceFormatError("trace task-space bounds differ from the loading run's bounds")
    return trace


def save_trace(trace: CurriculumTrace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_trace(trace))


def load_trace(path, expected_space: TaskSpace | None = None) -> CurriculumTrace:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_trace(fh.read(), expected_space=expected_space)
