"""Grid-sampled functions on the unit hypercube.

A function g: [0,1]^m -> R is stored as its values on a uniform grid of
cell centers, rho points per axis, so every point carries the same
histogram quadrature weight tau^m (tau = 1/rho).  All L2 quantities are
midpoint sums under that weight.  Values are immutable after
construction; arithmetic returns fresh instances, which makes cached
basis evaluations safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import InputError, ShapeError

MAX_DIM = 3


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-center grid on [0,1]^dim with points_per_axis per axis."""

    dim: int
    points_per_axis: int

    def __post_init__(self):
        if not 1 <= self.dim <= MAX_DIM:
            raise InputError(f"grid dim must be in 1..{MAX_DIM}, got {self.dim}")
        if self.points_per_axis < 1:
            raise InputError(f"points_per_axis must be >= 1, got {self.points_per_axis}")

    @property
    def spacing(self) -> float:
        return 1.0 / self.points_per_axis

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def weight(self) -> float:
        """Quadrature weight of one grid point: spacing**dim."""
        return self.spacing**self.dim


@lru_cache(maxsize=16)
def grid_coordinates(spec: GridSpec) -> np.ndarray:
    """Cell-center coordinates, shape (size, dim), C-ordered (last axis fastest)."""
    axis = (np.arange(spec.points_per_axis) + 0.5) * spec.spacing
    if spec.dim == 1:
        coords = axis[:, None]
    else:
        mesh = np.meshgrid(*([axis] * spec.dim), indexing="ij")
        coords = np.stack([m.ravel() for m in mesh], axis=1)
    coords.setflags(write=False)
    return coords


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A function represented by its values at the grid points of `spec`."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.spec.size,):
            raise ShapeError(
                f"expected {self.spec.size} values for {self.spec}, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise InputError("grid function values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def zeros(spec: GridSpec) -> GridFunction:
    return GridFunction(spec, np.zeros(spec.size))


def constant(spec: GridSpec, value: float) -> GridFunction:
    return GridFunction(spec, np.full(spec.size, float(value)))


def from_callable(spec: GridSpec, fn) -> GridFunction:
    """Sample fn at the grid points; fn takes an (N, dim) coordinate array."""
    return GridFunction(spec, np.asarray(fn(grid_coordinates(spec)), dtype=float))


def _check_same_spec(a: GridFunction, b: GridFunction) -> None:
    if a.spec != b.spec:
        raise ShapeError(f"grid mismatch: {a.spec} vs {b.spec}")


def linear_combine(
    bias: GridFunction, basis: list[GridFunction], lam: np.ndarray
) -> GridFunction:
    """Return bias + sum_j lam[j] * basis[j]."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (len(basis),):
        raise ShapeError(f"{len(basis)} basis functions but {lam.shape} coordinates")
    if not np.all(np.isfinite(lam)):
        raise InputError("coordinates must be finite")
    out = bias.values.copy()
    for coeff, h in zip(lam, basis):
        _check_same_spec(bias, h)
        out += coeff * h.values
    return GridFunction(bias.spec, out)


def l2_dist_sq(g: GridFunction, h: GridFunction) -> float:
    """Squared L2 distance by midpoint quadrature: sum (g-h)^2 * tau^m."""
    _check_same_spec(g, h)
    diff = g.values - h.values
    return float(np.dot(diff, diff) * g.spec.weight)


def l2_norm(g: GridFunction) -> float:
    return float(np.sqrt(np.dot(g.values, g.values) * g.spec.weight))


def l2_inner(g: GridFunction, h: GridFunction) -> float:
    """Quadrature inner product sum g*h * tau^m."""
    _check_same_spec(g, h)
    return float(np.dot(g.values, h.values) * g.spec.weight)


def rkhs_dist_sq(
    alpha: np.ndarray, alpha_prime: np.ndarray, gram: np.ndarray
) -> float:
    """Squared RKHS distance (a - a')^T G (a - a') between coefficient vectors."""
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(alpha_prime, dtype=float)
    gram = np.asarray(gram, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError(f"coefficient shape mismatch: {a.shape} vs {b.shape}")
    if gram.shape != (a.size, a.size):
        raise ShapeError(f"gram shape {gram.shape} does not match {a.size} coefficients")
    d = a - b
    return max(float(d @ gram @ d), 0.0)


# --- CSV serialisation -------------------------------------------------
# One grid value per row; coordinates written explicitly so the file is
# plottable without knowing the GridSpec.  Floats use repr() so a
# round-trip is bit exact.


def write_function_csv(g: GridFunction, path) -> None:
    coords = grid_coordinates(g.spec)
    header = ",".join(f"x{k}" for k in range(g.spec.dim)) + ",value"
    lines = [header]
    for row, val in zip(coords, g.values):
        lines.append(",".join(repr(float(c)) for c in row) + "," + repr(float(val)))
    Path(path).write_text("\n".join(lines) + "\n")


def read_function_csv(path) -> GridFunction:
    lines = Path(path).read_text().strip().splitlines()
    if not lines:
        raise InputError(f"empty function file: {path}")
    header = lines[0].split(",")
    if header[-1] != "value" or any(h != f"x{k}" for k, h in enumerate(header[:-1])):
        raise InputError(f"bad function CSV header: {lines[0]!r}")
    dim = len(header) - 1
    n = len(lines) - 1
    rho = round(n ** (1.0 / dim))
    if rho**dim != n:
        raise InputError(f"{n} rows is not a full {dim}-d grid")
    spec = GridSpec(dim, rho)
    values = np.empty(n)
    coords = grid_coordinates(spec)
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != dim + 1:
            raise InputError(f"bad row in function CSV: {line!r}")
        if not np.allclose([float(p) for p in parts[:-1]], coords[i], atol=1e-9):
            raise InputError(f"row {i} coordinates do not match the cell-center grid")
        values[i] = float(parts[-1])
    return GridFunction(spec, values)
