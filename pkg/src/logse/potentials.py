"""Real potentials: zero, square well, seeded random-Fourier disorder, tabulated.

Disorder stream
---------------
The random coefficients ``xi_l = U(-1, 1) + i U(-1, 1)`` are drawn from
``numpy.random.Generator(PCG64(seed))`` with a single call
``rng.uniform(-1, 1, size=(N_ref, 2))``: row ``k`` holds (real, imaginary)
for ``l = -N_ref/2 + k``, i.e. in increasing ``l``.
"""

from dataclasses import dataclass, field

import numpy as np

from .spectral import Grid, to_nodal

KINDS = ("zero", "square_well", "disorder", "tabulated")


def zero(grid):
    return np.zeros(grid.shape)


SAMPLINGS = ("nodal", "projected")


def _on_basis(periodic_values, grid):
    """Map nodal values of a periodic grid onto ``grid``'s node set."""
    if grid.basis == "neumann":
        return np.append(periodic_values, periodic_values[0])
    if grid.basis == "dirichlet":
        return periodic_values[1:]
    return periodic_values


def square_well(grid, depth=4.0, half_width=2.0, sampling="nodal"):
    """``-depth`` on the open interval ``(-half_width, half_width)``, 0 elsewhere.

    ``sampling="nodal"`` samples the indicator at the nodes (nodes exactly on
    the edge get 0).  ``sampling="projected"`` evaluates the exact Fourier
    series of the well truncated to the grid's modes, i.e. the nodal values
    of ``P_N V``; the edges then sit exactly at ``+-half_width`` on every grid.
    """
    if grid.dim != 1:
        raise ValueError("square_well is a 1D potential")
    if sampling not in SAMPLINGS:
        raise ValueError(f"unknown sampling {sampling!r}")
    if sampling == "nodal":
        x = grid.nodes(0)
        return np.where(np.abs(x) < half_width, -float(depth), 0.0)
    (a, b), = grid.bounds
    n = grid.n[0]
    mu = 2.0 * np.pi * np.arange(-n // 2, n // 2) / (b - a)
    # (1/L) int_{-w}^{w} e^{-i mu (x - a)} dx = e^{i mu a} 2 w sinc(mu w) / L
    coeffs = -depth * np.exp(1j * mu * a) * 2.0 * half_width * np.sinc(mu * half_width / np.pi) / (b - a)
    periodic = Grid(grid.bounds, grid.n, "periodic")
    return _on_basis(to_nodal(coeffs, periodic).real, grid)


def disorder_coefficients(n_ref, length, alpha, seed):
    """Natural-order coefficients ``(1 + mu_l^2)^(-alpha/2 - 1/4) xi_l`` over ``l in T_{n_ref}``."""
    if n_ref < 2 or n_ref % 2:
        raise ValueError("N_ref must be a positive even integer")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.uniform(-1.0, 1.0, size=(n_ref, 2))
    xi = u[:, 0] + 1j * u[:, 1]
    mu = 2.0 * np.pi * np.arange(-n_ref // 2, n_ref // 2) / length
    return (1.0 + mu ** 2) ** (-alpha / 2 - 0.25) * xi


def disorder(grid, alpha=0.0, seed=0, n_ref=2 ** 18):
    """Random low-regularity potential, truncated to the modes the grid resolves."""
    if grid.dim != 1:
        raise ValueError("disorder is a 1D potential")
    (a, b), = grid.bounds
    n = grid.n[0]
    full = disorder_coefficients(n_ref, b - a, alpha, seed)
    # keep l in T_N (or all of T_{n_ref} if the grid is finer)
    coeffs = np.zeros(n, dtype=complex)
    m = min(n, n_ref)
    coeffs[n // 2 - m // 2: n // 2 + m // 2] = full[n_ref // 2 - m // 2: n_ref // 2 + m // 2]
    periodic = Grid(grid.bounds, grid.n, "periodic")
    return _on_basis(to_nodal(coeffs, periodic).real, grid)


@dataclass
class PotentialSpec:
    """Declarative potential; :meth:`evaluate` returns nodal values on a grid."""

    kind: str = "zero"
    depth: float = 4.0
    half_width: float = 2.0
    sampling: str = "nodal"
    alpha: float = 0.0
    seed: int = 0
    n_ref: int = 2 ** 18
    values: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "tabulated":
            if self.values is None:
                raise ValueError("a tabulated potential needs nodal values")
            self.values = np.asarray(self.values, dtype=float)
        if self.sampling not in SAMPLINGS:
            raise ValueError(f"unknown sampling {self.sampling!r}")
        if self.kind == "disorder" and (self.n_ref <= 0 or self.n_ref % 2):
            raise ValueError("N_ref must be a positive even integer")

    def evaluate(self, grid):
        if self.kind == "zero":
            return zero(grid)
        if self.kind == "square_well":
            return square_well(grid, self.depth, self.half_width, self.sampling)
        if self.kind == "disorder":
            return disorder(grid, self.alpha, self.seed, self.n_ref)
        if self.values.shape != grid.shape:
            raise ValueError(f"tabulated potential has shape {self.values.shape}, grid needs {grid.shape}")
        return self.values

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "square_well":
            d.update(depth=self.depth, half_width=self.half_width, sampling=self.sampling)
        elif self.kind == "disorder":
            d.update(alpha=self.alpha, seed=self.seed, n_ref=self.n_ref)
        return d


def resolve(V, grid):
    """Nodal potential from ``None``, a :class:`PotentialSpec`, a dict, or an array."""
    if V is None:
        return zero(grid)
    if isinstance(V, PotentialSpec):
        return V.evaluate(grid)
    if isinstance(V, dict):
        return PotentialSpec(**V).evaluate(grid)
    V = np.asarray(V, dtype=float)
    if V.ndim == 0:
        return np.full(grid.shape, float(V))
    if V.shape != grid.shape:
        raise ValueError(f"potential has shape {V.shape}, grid needs {grid.shape}")
    return V
