"""Covariance functions.

Two distinct roles, two spec types:

* ``ScalarKernelSpec`` -- a covariance kappa on the grid domain [0,1]^m,
  used to draw the random basis functions that span each search subspace.
* ``FunctionalKernelSpec`` -- a covariance K between whole functions,
  used to model the objective.  A stationary scalar form is evaluated on
  a squared distance between functions: either the histogram L2 distance
  on the grid, or the quadratic-form distance between coefficient
  vectors under a fixed PSD gram matrix.

Closed forms (r = distance, gamma = lengthscale, v = variance):

    se        v * exp(-r^2 / (2 gamma^2))
    matern12  v * exp(-r / gamma)
    matern32  v * (1 + sqrt(3) r / gamma) * exp(-sqrt(3) r / gamma)
    linear    v * <x, y>           (scalar kernels only)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gridfn
from .errors import InputError, NumericalError, ShapeError
from .gridfn import GridFunction

SCALAR_KINDS = ("se", "matern12", "matern32", "linear")
DISTANCE_KINDS = ("se", "matern12", "matern32")
METRICS = ("l2grid", "rkhs")

_SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class ScalarKernelSpec:
    """Covariance on [0,1]^m points."""

    kind: str
    lengthscale: float
    variance: float = 1.0

    def __post_init__(self):
        if self.kind not in SCALAR_KINDS:
            raise InputError(f"unknown scalar kernel kind {self.kind!r}")
        if not self.lengthscale > 0:
            raise InputError(f"lengthscale must be positive, got {self.lengthscale}")
        if not self.variance > 0:
            raise InputError(f"variance must be positive, got {self.variance}")


@dataclass(frozen=True, eq=False)
class FunctionalKernelSpec:
    """Covariance between functions: a distance-based scalar form applied
    to the l2grid or rkhs metric."""

    base: ScalarKernelSpec
    metric: str
    rkhs_gram: np.ndarray | None = None

    def __post_init__(self):
        if self.base.kind not in DISTANCE_KINDS:
            raise InputError(
                f"functional kernels need a distance-based kind, got {self.base.kind!r}"
            )
        if self.metric not in METRICS:
            raise InputError(f"unknown metric {self.metric!r}")
        if self.metric == "rkhs":
            if self.rkhs_gram is None:
                raise InputError("metric 'rkhs' requires rkhs_gram")
            gram = np.asarray(self.rkhs_gram, dtype=float)
            if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
                raise ShapeError(f"rkhs_gram must be square, got {gram.shape}")
            _validate_psd(gram)
            gram = gram.copy()
            gram.setflags(write=False)
            object.__setattr__(self, "rkhs_gram", gram)
        elif self.rkhs_gram is not None:
            raise InputError("rkhs_gram only applies to metric 'rkhs'")


def _validate_psd(gram: np.ndarray) -> None:
    jitter = 1e-10 * max(float(np.mean(np.diag(gram))), 1.0)
    try:
        np.linalg.cholesky(gram + jitter * np.eye(gram.shape[0]))
    except np.linalg.LinAlgError as exc:
        raise InputError("rkhs_gram is not positive semidefinite") from exc


def value_from_sqdist(base: ScalarKernelSpec, r_sq) -> np.ndarray:
    """Evaluate a distance-based kernel on squared distances (vectorised)."""
    if base.kind not in DISTANCE_KINDS:
        raise InputError(f"{base.kind!r} is not distance-based")
    r_sq = np.maximum(np.asarray(r_sq, dtype=float), 0.0)
    g = base.lengthscale
    if base.kind == "se":
        return base.variance * np.exp(-r_sq / (2.0 * g * g))
    r = np.sqrt(r_sq)
    if base.kind == "matern12":
        return base.variance * np.exp(-r / g)
    a = _SQRT3 * r / g
    return base.variance * (1.0 + a) * np.exp(-a)


def scalar_eval(spec: ScalarKernelSpec, x, y) -> float:
    """kappa(x, y) for points in [0,1]^m."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise ShapeError(f"point shape mismatch: {x.shape} vs {y.shape}")
    if spec.kind == "linear":
        return float(spec.variance * np.dot(x, y))
    d = x - y
    return float(value_from_sqdist(spec, np.dot(d, d)))


def functional_eval(spec: FunctionalKernelSpec, g: GridFunction, h: GridFunction) -> float:
    """K(g, h) with the squared distance taken under the configured metric."""
    if spec.metric == "l2grid":
        r_sq = gridfn.l2_dist_sq(g, h)
    else:
        # values are read as coefficient vectors of the gram's basis
        if g.spec != h.spec:
            raise ShapeError(f"grid mismatch: {g.spec} vs {h.spec}")
        r_sq = gridfn.rkhs_dist_sq(g.values, h.values, spec.rkhs_gram)
    return float(value_from_sqdist(spec.base, r_sq))


def scalar_gram(spec: ScalarKernelSpec, coords) -> np.ndarray:
    """Vectorised gram of a scalar kernel at coordinate rows (n, m)."""
    x = np.atleast_2d(np.asarray(coords, dtype=float))
    if spec.kind == "linear":
        gram = spec.variance * (x @ x.T)
    else:
        sq = np.einsum("ij,ij->i", x, x)
        r2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * x @ x.T, 0.0)
        gram = value_from_sqdist(spec, r2)
    return (gram + gram.T) / 2.0


def gram_matrix(spec, points) -> np.ndarray:
    """Pairwise covariance matrix; upper triangle evaluated, mirrored down."""
    points = list(points)
    if not points:
        raise InputError("gram_matrix needs at least one point")
    evaluate = functional_eval if isinstance(spec, FunctionalKernelSpec) else scalar_eval
    n = len(points)
    m = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            m[i, j] = evaluate(spec, points[i], points[j])
            m[j, i] = m[i, j]
    return m
