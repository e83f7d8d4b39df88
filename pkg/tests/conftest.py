import numpy as np

from funcbo.gridfn import GridFunction, GridSpec

GRID_1D = GridSpec(1, 100)


def random_grid_function(rng, spec=GRID_1D, scale=1.0) -> GridFunction:
    return GridFunction(spec, scale * rng.standard_normal(spec.size))


def smooth_grid_function(rng, spec=GRID_1D, waves=3) -> GridFunction:
    """Random low-frequency function; nicer-conditioned than white noise."""
    from funcbo.gridfn import grid_coordinates

    x = grid_coordinates(spec)[:, 0] if spec.dim == 1 else grid_coordinates(spec).sum(axis=1)
    values = np.zeros(spec.size)
    for k in range(1, waves + 1):
        values += rng.standard_normal() / k * np.sin(2 * np.pi * k * x)
        values += rng.standard_normal() / k * np.cos(2 * np.pi * k * x)
    return GridFunction(spec, values)
