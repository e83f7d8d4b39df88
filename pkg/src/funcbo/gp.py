"""Gaussian-process regression with incremental conditioning.

Given observations D = {(x_i, y_i)}, y_i = f(x_i) + eps, eps ~ N(0, s2),
the posterior of f ~ GP(0, K) at a query x is

    mean(x) = k(x, D) (K(D, D) + s2 I)^-1 y
    var(x)  = K(x, x) - k(x, D) (K(D, D) + s2 I)^-1 k(D, x)

A ``GPModel`` is an immutable snapshot holding the Cholesky factor L of
the regularised Gram matrix, so queries cost one triangular solve and
``condition`` extends L by one row instead of refactorising.  Points may
be grid functions (functional kernels) or coordinate vectors (scalar
kernels, used by the line-search baseline); the distance bookkeeping for
both lives in the private helpers below.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_triangular

from . import kernels
from .errors import InputError, NumericalError, ShapeError
from .gridfn import GridFunction, GridSpec, grid_coordinates
from .kernels import FunctionalKernelSpec, ScalarKernelSpec

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True, eq=False)
class Observation:
    """One (point, noisy value) pair; point is a GridFunction or coordinates."""

    point: object
    y: float

    def __post_init__(self):
        if not np.isfinite(self.y):
            raise InputError(f"observation value must be finite, got {self.y}")


@dataclass(eq=False)
class GPModel:
    """Immutable GP posterior snapshot (do not mutate fields after build)."""

    kernel: object
    noise_sq: float
    points: tuple
    y: np.ndarray
    L: np.ndarray
    alpha: np.ndarray
    # internal caches for fast cross-covariances
    mode: str
    grid: GridSpec | None
    V: np.ndarray | None
    row_q: np.ndarray | None
    GV: np.ndarray | None

    @property
    def n(self) -> int:
        return len(self.points)


def _mode_of(kernel) -> str:
    if isinstance(kernel, FunctionalKernelSpec):
        return kernel.metric
    if isinstance(kernel, ScalarKernelSpec):
        return "coord_linear" if kernel.kind == "linear" else "coord"
    raise InputError(f"unsupported kernel spec {type(kernel).__name__}")


def _base_of(kernel) -> ScalarKernelSpec:
    return kernel.base if isinstance(kernel, FunctionalKernelSpec) else kernel


def _rep(kernel, point, grid: GridSpec | None) -> tuple[np.ndarray, GridSpec | None]:
    """Flatten a point to its 1-d representation, checking grid consistency."""
    if isinstance(kernel, FunctionalKernelSpec):
        if not isinstance(point, GridFunction):
            raise InputError("functional kernels take GridFunction points")
        if grid is not None and point.spec != grid:
            raise ShapeError(f"grid mismatch: {point.spec} vs {grid}")
        return point.values, point.spec
    x = np.atleast_1d(np.asarray(point, dtype=float))
    if x.ndim != 1:
        raise ShapeError(f"coordinate points must be 1-d, got shape {x.shape}")
    return x, None


def _caches(kernel, V: np.ndarray, grid: GridSpec | None):
    """Per-row quantities needed to expand squared distances quickly."""
    mode = _mode_of(kernel)
    if mode == "rkhs":
        GV = V @ kernel.rkhs_gram
        return np.einsum("ij,ij->i", V, GV), GV
    if mode == "coord_linear":
        return None, None
    return np.einsum("ij,ij->i", V, V), None


def _weight(mode: str, grid: GridSpec | None) -> float:
    return grid.weight if mode == "l2grid" else 1.0


def _cross_sq(model_mode, kernel, grid, V, row_q, GV, Q: np.ndarray) -> np.ndarray:
    """Squared metric distances (or inner products for linear), shape (q, n)."""
    if model_mode == "coord_linear":
        return Q @ V.T
    if model_mode == "rkhs":
        QG = Q @ kernel.rkhs_gram
        q_sq = np.einsum("ij,ij->i", QG, Q)
        cross = Q @ GV.T
    else:
        q_sq = np.einsum("ij,ij->i", Q, Q)
        cross = Q @ V.T
    r2 = (q_sq[:, None] + row_q[None, :] - 2.0 * cross) * _weight(model_mode, grid)
    return np.maximum(r2, 0.0)


def _pairwise_raw(mode, grid, V, row_q, GV) -> np.ndarray:
    """Pairwise squared distances (inner products for the linear kind)."""
    if mode == "coord_linear":
        return V @ V.T
    cross = V @ (GV if mode == "rkhs" else V).T
    r2 = (row_q[:, None] + row_q[None, :] - 2.0 * cross) * _weight(mode, grid)
    return np.maximum(r2, 0.0)


def _gram_from_raw(base: ScalarKernelSpec, mode, raw) -> np.ndarray:
    k = base.variance * raw if mode == "coord_linear" else kernels.value_from_sqdist(base, raw)
    return (k + k.T) / 2.0


def _pairwise_gram(kernel, grid, V, row_q, GV) -> np.ndarray:
    mode = _mode_of(kernel)
    return _gram_from_raw(_base_of(kernel), mode, _pairwise_raw(mode, grid, V, row_q, GV))


def _prior_var(kernel, Q: np.ndarray) -> np.ndarray:
    base = _base_of(kernel)
    if _mode_of(kernel) == "coord_linear":
        return base.variance * np.einsum("ij,ij->i", Q, Q)
    return np.full(Q.shape[0], base.variance)


def _cross_k(model: GPModel, Q: np.ndarray) -> np.ndarray:
    raw = _cross_sq(model.mode, model.kernel, model.grid, model.V, model.row_q, model.GV, Q)
    if model.mode == "coord_linear":
        return _base_of(model.kernel).variance * raw
    return kernels.value_from_sqdist(_base_of(model.kernel), raw)


def empty_model(kernel, noise_sq: float) -> GPModel:
    if not noise_sq > 0:
        raise InputError(f"noise variance must be positive, got {noise_sq}")
    _mode_of(kernel)  # rejects unsupported kernel objects early
    return GPModel(
        kernel=kernel,
        noise_sq=float(noise_sq),
        points=(),
        y=np.zeros(0),
        L=np.zeros((0, 0)),
        alpha=np.zeros(0),
        mode=_mode_of(kernel),
        grid=None,
        V=None,
        row_q=None,
        GV=None,
    )


def rebuild_model(kernel, noise_sq: float, observations) -> GPModel:
    """Build a model from scratch on the full dataset."""
    observations = list(observations)
    if not observations:
        return empty_model(kernel, noise_sq)
    if not noise_sq > 0:
        raise InputError(f"noise variance must be positive, got {noise_sq}")
    grid = None
    rows = []
    for obs in observations:
        x, grid_i = _rep(kernel, obs.point, grid)
        grid = grid_i if grid is None else grid
        rows.append(x)
    V = np.array(rows)
    row_q, GV = _caches(kernel, V, grid)
    k = _pairwise_gram(kernel, grid, V, row_q, GV)
    k[np.diag_indices_from(k)] += noise_sq
    try:
        L = np.linalg.cholesky(k)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Cholesky of the regularised Gram matrix failed") from exc
    y = np.array([obs.y for obs in observations])
    alpha = solve_triangular(L.T, solve_triangular(L, y, lower=True), lower=False)
    return GPModel(
        kernel=kernel,
        noise_sq=float(noise_sq),
        points=tuple(obs.point for obs in observations),
        y=y,
        L=L,
        alpha=alpha,
        mode=_mode_of(kernel),
        grid=grid,
        V=V,
        row_q=row_q,
        GV=GV,
    )


def condition(model: GPModel, obs: Observation) -> GPModel:
    """Return a new model with obs appended (rank-1 Cholesky extension)."""
    x, grid = _rep(model.kernel, obs.point, model.grid)
    n = model.n
    x_row = x[None, :]
    k_nn = float(_prior_var(model.kernel, x_row)[0]) + model.noise_sq
    if n == 0:
        ell = np.zeros(0)
        s_sq = k_nn
        V = x_row.copy()
    else:
        k_vec = _cross_k(model, x_row)[0]
        ell = solve_triangular(model.L, k_vec, lower=True)
        s_sq = k_nn - float(ell @ ell)
        V = np.vstack([model.V, x_row])
    if s_sq <= 0.0:
        raise NumericalError(
            "conditioning broke positive definiteness; add jitter and rebuild"
        )
    L = np.zeros((n + 1, n + 1))
    L[:n, :n] = model.L
    L[n, :n] = ell
    L[n, n] = np.sqrt(s_sq)
    y = np.append(model.y, obs.y)
    alpha = solve_triangular(L.T, solve_triangular(L, y, lower=True), lower=False)
    row_q, GV = _caches(model.kernel, V, grid)
    return GPModel(
        kernel=model.kernel,
        noise_sq=model.noise_sq,
        points=model.points + (obs.point,),
        y=y,
        L=L,
        alpha=alpha,
        mode=model.mode,
        grid=model.grid if model.grid is not None else grid,
        V=V,
        row_q=row_q,
        GV=GV,
    )


def posterior_batch(model: GPModel, Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means and variances at a batch of raw query rows.

    Query rows are grid values for functional kernels (coefficient
    vectors under the rkhs metric) or coordinate vectors for scalar
    kernels.  Variances are clamped at zero.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    prior = _prior_var(model.kernel, Q)
    if model.n == 0:
        return np.zeros(Q.shape[0]), prior
    k = _cross_k(model, Q)
    mean = k @ model.alpha
    w = solve_triangular(model.L, k.T, lower=True)
    var = prior - np.einsum("ij,ij->j", w, w)
    return mean, np.maximum(var, 0.0)


def posterior(model: GPModel, point) -> tuple[float, float]:
    """Posterior (mean, variance) at one point."""
    x, _ = _rep(model.kernel, point, model.grid)
    mean, var = posterior_batch(model, x[None, :])
    return float(mean[0]), float(var[0])


# --- prior sampling on a grid ------------------------------------------

_JITTERS = (1e-10, 1e-8, 1e-6)


@lru_cache(maxsize=32)
def _prior_chol(kernel: ScalarKernelSpec, spec: GridSpec) -> np.ndarray:
    gram = kernels.scalar_gram(kernel, grid_coordinates(spec))
    eye = np.eye(spec.size)
    for jitter in _JITTERS:
        try:
            L = np.linalg.cholesky(gram + jitter * kernel.variance * eye)
        except np.linalg.LinAlgError:
            continue
        L.setflags(write=False)
        return L
    raise NumericalError(
        f"prior covariance on the grid is not PD even with jitter {_JITTERS[-1]}"
    )


def sample_on_grid(kernel: ScalarKernelSpec, spec: GridSpec, rng) -> GridFunction:
    """Draw one GP(0, kernel) sample path on the grid (deterministic per rng)."""
    L = _prior_chol(kernel, spec)
    return GridFunction(spec, L @ rng.standard_normal(spec.size))


# --- marginal likelihood and lengthscale tuning ------------------------


def log_marginal_likelihood(model: GPModel) -> float:
    if model.n == 0:
        raise InputError("log marginal likelihood needs at least one observation")
    return float(
        -0.5 * model.y @ model.alpha
        - np.sum(np.log(np.diag(model.L)))
        - 0.5 * model.n * _LOG_2PI
    )


def _with_lengthscale(template, lengthscale: float):
    if isinstance(template, FunctionalKernelSpec):
        return replace(template, base=replace(template.base, lengthscale=lengthscale))
    return replace(template, lengthscale=lengthscale)


def tune_and_rebuild(observations, template, candidates, noise_sq: float):
    """Pick the max-likelihood lengthscale from `candidates` and return
    (tuned spec, model built with it).  Ties go to the larger lengthscale.

    The pairwise distance matrix does not depend on the lengthscale, so
    it is shared across candidates; only the kernel transform, Cholesky
    factor and likelihood are recomputed per candidate.
    """
    observations = list(observations)
    if not observations:
        raise InputError("lengthscale tuning needs data")
    if not noise_sq > 0:
        raise InputError(f"noise variance must be positive, got {noise_sq}")
    candidates = sorted(float(c) for c in candidates)
    if not candidates:
        raise InputError("no candidate lengthscales")
    grid = None
    rows = []
    for obs in observations:
        x, grid_i = _rep(template, obs.point, grid)
        grid = grid_i if grid is None else grid
        rows.append(x)
    V = np.array(rows)
    row_q, GV = _caches(template, V, grid)
    mode = _mode_of(template)
    raw = _pairwise_raw(mode, grid, V, row_q, GV)
    y = np.array([obs.y for obs in observations])
    n = len(observations)
    best = None
    for gamma in candidates:
        base = replace(_base_of(template), lengthscale=gamma)
        k = _gram_from_raw(base, mode, raw)
        k[np.diag_indices_from(k)] += noise_sq
        try:
            L = np.linalg.cholesky(k)
        except np.linalg.LinAlgError:
            continue
        alpha = solve_triangular(L.T, solve_triangular(L, y, lower=True), lower=False)
        lml = float(-0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * _LOG_2PI)
        if best is None or lml >= best[0]:
            best = (lml, gamma, L, alpha)
    if best is None:
        raise NumericalError("every candidate lengthscale failed to factorise")
    _, gamma, L, alpha = best
    spec = _with_lengthscale(template, gamma)
    model = GPModel(
        kernel=spec,
        noise_sq=float(noise_sq),
        points=tuple(obs.point for obs in observations),
        y=y,
        L=L,
        alpha=alpha,
        mode=mode,
        grid=grid,
        V=V,
        row_q=row_q,
        GV=GV,
    )
    return spec, model


def tune_lengthscale(observations, template, candidates, noise_sq: float):
    """As tune_and_rebuild, returning only the tuned kernel spec."""
    spec, _ = tune_and_rebuild(observations, template, candidates, noise_sq)
    return spec


# --- posterior identity used to validate subspace chaining -------------


def _cross_gram(kernel, pts_a, pts_b) -> np.ndarray:
    grid = None
    rows_a, rows_b = [], []
    for p in pts_a:
        x, g = _rep(kernel, p, grid)
        grid = g if grid is None else grid
        rows_a.append(x)
    for p in pts_b:
        x, _ = _rep(kernel, p, grid)
        rows_b.append(x)
    A, B = np.array(rows_a), np.array(rows_b)
    row_q, GV = _caches(kernel, B, grid)
    raw = _cross_sq(_mode_of(kernel), kernel, grid, B, row_q, GV, A)
    if _mode_of(kernel) == "coord_linear":
        return _base_of(kernel).variance * raw
    return kernels.value_from_sqdist(_base_of(kernel), raw)


def biased_posterior_equivalence_check(
    kernel, noise_sq: float, obs_prev, obs_new, probes, tol: float = 1e-6
) -> bool:
    """Check that conditioning on all data at once equals conditioning a
    prior already biased by the earlier data on the new data only.

    Side one is the plain posterior given obs_prev + obs_new.  Side two
    treats the posterior given obs_prev as a new (non-zero-mean) prior
    and conditions it on obs_new.  Returns True when posterior mean and
    variance agree at every probe within tol.  Diagnostic utility.
    """
    obs_prev, obs_new, probes = list(obs_prev), list(obs_new), list(probes)
    joint = rebuild_model(kernel, noise_sq, obs_prev + obs_new)
    mean1 = np.array([posterior(joint, p)[0] for p in probes])
    var1 = np.array([posterior(joint, p)[1] for p in probes])

    if not obs_prev:
        prior_mean_new = np.zeros(len(obs_new))
        prior_mean_q = np.zeros(len(probes))

        def post_cov(pa, pb):
            return _cross_gram(kernel, pa, pb)

    else:
        pts_prev = [o.point for o in obs_prev]
        y_prev = np.array([o.y for o in obs_prev])
        k_pp = _cross_gram(kernel, pts_prev, pts_prev)
        k_pp[np.diag_indices_from(k_pp)] += noise_sq
        k_pp_inv = np.linalg.inv(k_pp)

        def prior_mean(pts):
            return _cross_gram(kernel, pts, pts_prev) @ k_pp_inv @ y_prev

        def post_cov(pa, pb):
            kab = _cross_gram(kernel, pa, pb)
            ka = _cross_gram(kernel, pa, pts_prev)
            kb = _cross_gram(kernel, pb, pts_prev)
            return kab - ka @ k_pp_inv @ kb.T

        pts_new = [o.point for o in obs_new]
        prior_mean_new = prior_mean(pts_new)
        prior_mean_q = prior_mean(probes)

    pts_new = [o.point for o in obs_new]
    y_new = np.array([o.y for o in obs_new])
    c_nn = post_cov(pts_new, pts_new)
    c_nn[np.diag_indices_from(c_nn)] += noise_sq
    c_qn = post_cov(probes, pts_new)
    w = np.linalg.solve(c_nn, y_new - prior_mean_new)
    mean2 = prior_mean_q + c_qn @ w
    var2 = np.array(
        [post_cov([p], [p])[0, 0] for p in probes]
    ) - np.einsum("ij,ij->i", c_qn, np.linalg.solve(c_nn, c_qn.T).T)

    return bool(
        np.max(np.abs(mean1 - mean2)) <= tol and np.max(np.abs(var1 - var2)) <= tol
    )
