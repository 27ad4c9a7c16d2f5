"""Full-covariance Gaussian mixtures over (task parameters, learning progress).

Mixtures are fitted by EM on points living in the normalized unit cube whose
last coordinate is the normalized learning-progress value. The number of
components is selected by refitting for every candidate count from 2 up to a
maximum and keeping the fit with the lowest Akaike Information Criterion.
The mean's last coordinate doubles as the component's sampling utility.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConfigError
from .space import TaskSpace

__all__ = [
    "WeightedGaussian",
    "GmmSnapshot",
    "fit_em",
    "aic",
    "log_likelihood",
    "select_best_k",
    "sample_component_index_by_lp",
    "sample_component_by_lp",
    "sample_task_from",
]

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class WeightedGaussian:
    """One mixture component with its learning-progress utility.

    The mean spans the task parameters plus a trailing learning-progress
    coordinate; that trailing coordinate is the component's sampling utility.
    """

    mean: np.ndarray
    covariance: np.ndarray
    mixture_weight: float

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if mean.ndim != 1:
            raise ConfigError(f"mean must be 1-D, got shape {mean.shape}")
        if cov.shape != (mean.size, mean.size):
            raise ConfigError(f"covariance shape {cov.shape} does not match mean {mean.shape}")
        if not np.allclose(cov, cov.T, atol=1e-10):
            raise ConfigError("covariance must be symmetric")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def lp(self) -> float:
        """Learning-progress utility: the mean's last coordinate."""
        return float(self.mean[-1])

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class GmmSnapshot:
    """A fitted mixture together with the episode index of its fit."""

    components: tuple[WeightedGaussian, ...]
    fit_episode: int
    degenerate: bool = False
    ll_path: tuple[float, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise ConfigError("a snapshot needs at least one component")
        dims = {c.dim for c in comps}
        if len(dims) != 1:
            raise ConfigError(f"components disagree on dimension: {sorted(dims)}")
        total = sum(c.mixture_weight for c in comps)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"mixture weights sum to {total!r}, expected 1")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "ll_path", tuple(self.ll_path))

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def lps(self) -> np.ndarray:
        return np.array([c.lp for c in self.components])


def _component_log_densities(points: np.ndarray, means: np.ndarray, covs: np.ndarray) -> np.ndarray:
    """Log N(x | mean_k, cov_k) for every point and component, shape (n, k)."""
    n, dim = points.shape
    k = means.shape[0]
    out = np.empty((n, k))
    for j in range(k):
        chol = np.linalg.cholesky(covs[j])
        sol = solve_triangular(chol, (points - means[j]).T, lower=True, check_finite=False)
        log_det = 2.0 * np.sum(np.log(np.diag(chol)))
        out[:, j] = -0.5 * (dim * LOG_2PI + log_det + np.sum(sol * sol, axis=0))
    return out


def _mixture_log_prob(points: np.ndarray, means, covs, weights) -> np.ndarray:
    log_dens = _component_log_densities(points, means, covs) + np.log(weights)[None, :]
    peak = log_dens.max(axis=1, keepdims=True)
    return peak[:, 0] + np.log(np.exp(log_dens - peak).sum(axis=1))


def _kmeanspp_seeds(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pick k seed means from the data, spreading them k-means++ style."""
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # All remaining mass collapsed onto the chosen seeds; fall back to
            # a uniform pick so duplicated data still yields k seeds.
            idx = int(rng.integers(n))
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((points - points[idx]) ** 2, axis=1))
    return points[chosen].copy()


def _snapshot_from_arrays(means, covs, weights, fit_episode, degenerate=False, ll_path=()) -> GmmSnapshot:
    comps = tuple(
        WeightedGaussian(mean=m.copy(), covariance=c.copy(), mixture_weight=float(w))
        for m, c, w in zip(means, covs, weights)
    )
    return GmmSnapshot(components=comps, fit_episode=fit_episode, degenerate=degenerate, ll_path=ll_path)


def fit_em(
    points,
    k: int,
    rng: np.random.Generator,
    *,
    fit_episode: int = 0,
    max_iter: int = 100,
    tol_per_point: float = 1e-4,
    reg_covar: float = 1e-6,
) -> GmmSnapshot:
    """Fit a k-component full-covariance mixture with EM.

    Means are seeded k-means++ style from the data, covariances start at the
    data covariance, and every M-step adds ``reg_covar`` to the covariance
    diagonals so components cannot collapse. Iteration stops once the mean
    log-likelihood gain per point drops below ``tol_per_point`` or after
    ``max_iter`` rounds. The per-iteration log-likelihood path is kept on the
    returned snapshot.

    Args:
        points: (n, dim) array of points, n >= k.
        k: number of components, at least 1.
        rng: random stream controlling the seeding.

    Returns:
        The fitted :class:`GmmSnapshot`.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ConfigError(f"points must be 2-D, got shape {pts.shape}")
    n, dim = pts.shape
    if k < 1:
        raise ConfigError(f"need k >= 1, got {k}")
    if n < k:
        raise ConfigError(f"cannot fit {k} components on {n} points")

    if np.ptp(pts, axis=0).max(initial=0.0) == 0.0:
        # Degenerate data: every point identical. Return k copies of the
        # single point with floor covariance rather than letting EM divide by
        # zero responsibilities.
        warnings.warn("all points identical; returning floor-covariance mixture", RuntimeWarning)
        means = np.repeat(pts[:1], k, axis=0)
        covs = np.repeat(reg_covar * np.eye(dim)[None], k, axis=0)
        weights = np.full(k, 1.0 / k)
        return _snapshot_from_arrays(means, covs, weights, fit_episode, degenerate=True)

    means = _kmeanspp_seeds(pts, k, rng)
    data_cov = np.atleast_2d(np.cov(pts, rowvar=False)) + reg_covar * np.eye(dim)
    covs = np.repeat(data_cov[None], k, axis=0)
    weights = np.full(k, 1.0 / k)

    ll_path: list[float] = []
    prev_ll = -np.inf
    for _ in range(max_iter):
        log_dens = _component_log_densities(pts, means, covs) + np.log(weights)[None, :]
        peak = log_dens.max(axis=1, keepdims=True)
        log_norm = peak[:, 0] + np.log(np.exp(log_dens - peak).sum(axis=1))
        ll = float(log_norm.sum())
        ll_path.append(ll)
        if ll - prev_ll < tol_per_point * n and len(ll_path) > 1:
            break
        prev_ll = ll

        resp = np.exp(log_dens - log_norm[:, None])
        mass = resp.sum(axis=0)
        mass = np.maximum(mass, 1e-300)
        weights = mass / n
        means = (resp.T @ pts) / mass[:, None]
        for j in range(k):
            diff = pts - means[j]
            cov = (resp[:, j, None] * diff).T @ diff / mass[j]
            cov = 0.5 * (cov + cov.T) + reg_covar * np.eye(dim)
            covs[j] = cov

    return _snapshot_from_arrays(means, covs, weights, fit_episode, ll_path=tuple(ll_path))


def log_likelihood(model: GmmSnapshot, points) -> float:
    """Total data log-likelihood of ``points`` under the mixture."""
    pts = np.asarray(points, dtype=float)
    means = np.stack([c.mean for c in model.components])
    covs = np.stack([c.covariance for c in model.components])
    weights = np.array([c.mixture_weight for c in model.components])
    return float(_mixture_log_prob(pts, means, covs, weights).sum())


def n_free_parameters(k: int, dim: int) -> int:
    """Free parameters of a k-component full-covariance mixture in ``dim`` dims."""
    return k * (dim + dim * (dim + 1) // 2) + (k - 1)


def aic(model: GmmSnapshot, points) -> float:
    """Akaike Information Criterion: 2 * n_params - 2 * log-likelihood."""
    return 2.0 * n_free_parameters(model.n_components, model.dim) - 2.0 * log_likelihood(model, points)


def select_best_k(
    points,
    k_max: int,
    rng: np.random.Generator,
    *,
    k_min: int = 2,
    fit_episode: int = 0,
    max_iter: int = 100,
    tol_per_point: float = 1e-4,
    reg_covar: float = 1e-6,
) -> GmmSnapshot:
    """Fit candidates with ``k_min`` to ``k_max`` components, keep the lowest AIC.

    Candidate counts exceeding the number of points are skipped; at least one
    candidate must remain.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < k_min:
        raise ConfigError(f"need at least {k_min} points, got shape {pts.shape}")
    best: GmmSnapshot | None = None
    best_aic = np.inf
    for k in range(k_min, k_max + 1):
        if k > pts.shape[0]:
            break
        candidate = fit_em(
            pts, k, rng,
            fit_episode=fit_episode, max_iter=max_iter,
            tol_per_point=tol_per_point, reg_covar=reg_covar,
        )
        score = aic(candidate, pts)
        if score < best_aic:
            best = candidate
            best_aic = score
    assert best is not None
    return best


def sample_component_index_by_lp(lps, rng: np.random.Generator) -> int:
    """Pick a component index with probability proportional to its utility.

    Negative utilities count as zero; when everything is zero the choice is
    uniform.
    """
    weights = np.maximum(np.asarray(lps, dtype=float), 0.0)
    if weights.size == 0:
        raise ConfigError("cannot sample from an empty mixture")
    total = weights.sum()
    if total <= 0.0:
        return int(rng.integers(weights.size))
    return int(np.searchsorted(np.cumsum(weights / total), rng.random(), side="right").clip(max=weights.size - 1))


def sample_component_by_lp(components, rng: np.random.Generator) -> WeightedGaussian:
    """LP-proportional choice among mixture components."""
    comps = list(components)
    idx = sample_component_index_by_lp([c.lp for c in comps], rng)
    return comps[idx]


def sample_task_from(g: WeightedGaussian, space: TaskSpace, rng: np.random.Generator) -> np.ndarray:
    """Draw raw task parameters from a component's task-space marginal.

    The trailing learning-progress coordinate is dropped, the draw happens in
    normalized space, and the result is denormalized then clipped into bounds.
    """
    d = space.d
    if g.dim < d:
        raise ConfigError(f"component dim {g.dim} smaller than space dim {d}")
    mean = g.mean[:d]
    cov = g.covariance[:d, :d]
    chol = np.linalg.cholesky(cov)
    u = mean + chol @ rng.standard_normal(d)
    return space.clip(space.denormalize(u))
