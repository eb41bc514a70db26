"""Input checks shared by the estimators and the experiment harness."""

import numpy as np

from .spectral import Grid, SpectralField, forward_transform


def check_grid(grid):
    if not isinstance(grid, Grid):
        raise TypeError(f"expected a Grid, got {type(grid).__name__}")
    return grid


def check_nodal(X, grid, allow_batch=False):
    """Complex nodal array whose trailing axes match ``grid.shape``.

    With ``allow_batch`` any number of leading (sample) axes is accepted.
    """
    X = np.asarray(X)
    if not np.issubdtype(X.dtype, np.number):
        raise TypeError(f"nodal data must be numeric, got dtype {X.dtype}")
    X = X.astype(complex, copy=False)
    trailing = X.shape[X.ndim - grid.dim:] if X.ndim >= grid.dim else X.shape
    if trailing != grid.shape or (X.ndim != grid.dim and not allow_batch):
        raise ValueError(f"nodal array of shape {X.shape} does not fit grid shape {grid.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("nodal data contains NaN or Inf")
    return X


def check_field(X, grid):
    """Accept a :class:`SpectralField` on ``grid`` or nodal values on it."""
    if isinstance(X, SpectralField):
        if X.grid != grid:
            raise ValueError("field lives on a different grid than the estimator")
        return X
    return forward_transform(check_nodal(X, grid), grid)


def check_positive(name, value):
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value
