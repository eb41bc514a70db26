"""Tensor grids, spectral transforms and diagonal propagators.

Three bases are supported on a rectangular domain, one per boundary
condition:

* ``periodic``  -- Fourier modes ``exp(i mu_l (x - a))``, ``l = -N/2 .. N/2-1``,
  ``mu_l = 2 pi l / (b - a)``, nodes ``x_j = a + j h`` for ``j = 0 .. N-1``.
* ``dirichlet`` -- sine modes ``sin(mu_l (x - a))``, ``l = 1 .. N-1``,
  ``mu_l = pi l / (b - a)``, interior nodes ``j = 1 .. N-1``.
* ``neumann``   -- cosine modes ``cos(mu_l (x - a))``, ``l = 0 .. N``,
  ``mu_l = pi l / (b - a)``, nodes ``j = 0 .. N`` including both endpoints.

Coefficients are kept in natural index order.  The sine and cosine
transforms are computed through the odd / even extension of the data to a
periodic grid of doubled length.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

BASES = ("periodic", "dirichlet", "neumann")

# Taylor branch of phi1 below this modulus
_PHI1_SWITCH = 1e-4
_PHI1_TERMS = 10


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid on ``prod_j (a_j, b_j)`` with a spectral basis.

    Parameters
    ----------
    bounds : sequence of (a, b) pairs, one per axis (1 or 2 axes).
    n : sequence of even node counts ``N`` per axis, ``N >= 4``.
    basis : one of ``"periodic"``, ``"dirichlet"``, ``"neumann"``.
    """

    bounds: tuple
    n: tuple
    basis: str = "periodic"

    def __post_init__(self):
        bounds = tuple((float(a), float(b)) for a, b in self.bounds)
        n = tuple(int(m) for m in np.atleast_1d(self.n))
        if len(bounds) not in (1, 2):
            raise ValueError("only 1D and 2D grids are supported")
        if len(n) == 1 and len(bounds) == 2:
            n = n * 2
        if len(n) != len(bounds):
            raise ValueError("one node count per axis is required")
        for (a, b), m in zip(bounds, n):
            if not b > a:
                raise ValueError(f"empty interval ({a}, {b})")
            if m < 4 or m % 2:
                raise ValueError(f"node count must be even and >= 4, got {m}")
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}; expected one of {BASES}")
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "n", n)

    @classmethod
    def line(cls, a, b, n, basis="periodic"):
        return cls(((a, b),), (n,), basis)

    @classmethod
    def square(cls, a, b, n, basis="periodic"):
        return cls(((a, b), (a, b)), (n, n), basis)

    @classmethod
    def from_mesh_size(cls, bounds, h, basis="periodic"):
        """Grid whose per-axis node count is ``(b - a) / h`` (must be an even integer)."""
        n = []
        for a, b in bounds:
            m = (b - a) / h
            if abs(m - round(m)) > 1e-9 * m:
                raise ValueError(f"mesh size {h} does not divide ({a}, {b})")
            n.append(int(round(m)))
        return cls(tuple(bounds), tuple(n), basis)

    def with_n(self, n):
        return Grid(self.bounds, n, self.basis)

    @property
    def dim(self):
        return len(self.n)

    @property
    def lengths(self):
        return tuple(b - a for a, b in self.bounds)

    @property
    def h(self):
        return tuple(L / m for L, m in zip(self.lengths, self.n))

    @property
    def measure(self):
        return float(np.prod(self.lengths))

    @property
    def shape(self):
        """Nodal (and coefficient) array shape."""
        extra = {"periodic": 0, "dirichlet": -1, "neumann": 1}[self.basis]
        return tuple(m + extra for m in self.n)

    # -- per-axis quantities -------------------------------------------
    def indices(self, axis=0):
        m = self.n[axis]
        if self.basis == "periodic":
            return np.arange(-m // 2, m // 2)
        if self.basis == "dirichlet":
            return np.arange(1, m)
        return np.arange(0, m + 1)

    def nodes(self, axis=0):
        a = self.bounds[axis][0]
        h = self.h[axis]
        m = self.n[axis]
        j = {"periodic": np.arange(m), "dirichlet": np.arange(1, m),
             "neumann": np.arange(m + 1)}[self.basis]
        return a + j * h

    def mu(self, axis=0):
        scale = 2.0 if self.basis == "periodic" else 1.0
        return scale * np.pi * self.indices(axis) / self.lengths[axis]

    def parseval_weights(self, axis=0):
        """Weights ``w_l`` with ``||phi||^2 = |Omega| sum_l w_l |c_l|^2``."""
        size = self.shape[axis]
        if self.basis == "periodic":
            return np.ones(size)
        w = np.full(size, 0.5)
        if self.basis == "neumann":
            w[0] = w[-1] = 1.0
        return w

    def quadrature_weights(self, axis=0):
        """Trapezoidal weights on the nodes (exact Parseval partner)."""
        w = np.full(self.shape[axis], self.h[axis])
        if self.basis == "neumann":
            w[0] = w[-1] = 0.5 * self.h[axis]
        return w

    # -- broadcast tensors ---------------------------------------------
    def _outer(self, vectors, op):
        if self.dim == 1:
            return vectors[0]
        return op.outer(vectors[0], vectors[1])

    @cached_property
    def mu2(self):
        """``|mu|^2`` on the coefficient array (eigenvalues of ``-Laplacian``)."""
        return self._outer([self.mu(k) ** 2 for k in range(self.dim)], np.add)

    @cached_property
    def weights(self):
        return self._outer([self.parseval_weights(k) for k in range(self.dim)], np.multiply)

    @cached_property
    def quad(self):
        return self._outer([self.quadrature_weights(k) for k in range(self.dim)], np.multiply)

    def mesh(self):
        """Nodal coordinate arrays, ``indexing="ij"`` (axis 0 is x)."""
        return np.meshgrid(*[self.nodes(k) for k in range(self.dim)], indexing="ij")

    def compatible(self, other):
        return self.bounds == other.bounds and self.basis == other.basis


# ---------------------------------------------------------------------------
# one-axis transforms (array-level)

def _fwd_axis(x, basis, axis):
    x = np.moveaxis(np.asarray(x, dtype=complex), axis, -1)
    if basis == "periodic":
        m = x.shape[-1]
        c = np.fft.fftshift(scipy.fft.fft(x, axis=-1), axes=-1) / m
    elif basis == "neumann":
        m = x.shape[-1] - 1
        ext = np.concatenate([x, x[..., m - 1:0:-1]], axis=-1)
        f = scipy.fft.fft(ext, axis=-1) / (2 * m)
        c = f[..., : m + 1].copy()
        c[..., 1:m] *= 2.0
    else:
        m = x.shape[-1] + 1
        z = np.zeros(x.shape[:-1] + (1,), dtype=complex)
        ext = np.concatenate([z, x, z, -x[..., ::-1]], axis=-1)
        f = scipy.fft.fft(ext, axis=-1) / (2 * m)
        c = 2j * f[..., 1:m]
    return np.moveaxis(c, -1, axis)


def _inv_axis(c, basis, axis):
    c = np.moveaxis(np.asarray(c, dtype=complex), axis, -1)
    if basis == "periodic":
        m = c.shape[-1]
        x = scipy.fft.ifft(np.fft.ifftshift(c, axes=-1), axis=-1) * m
    elif basis == "neumann":
        m = c.shape[-1] - 1
        half = 0.5 * c[..., 1:m]
        f = np.concatenate([c[..., :1], half, c[..., m:], half[..., ::-1]], axis=-1)
        x = scipy.fft.ifft(f, axis=-1)[..., : m + 1] * (2 * m)
    else:
        m = c.shape[-1] + 1
        half = c / 2j
        z = np.zeros(c.shape[:-1] + (1,), dtype=complex)
        f = np.concatenate([z, half, z, -half[..., ::-1]], axis=-1)
        x = scipy.fft.ifft(f, axis=-1)[..., 1:m] * (2 * m)
    return np.moveaxis(x, -1, axis)


def to_coeffs(nodal, grid):
    """Forward transform of a raw nodal array; trailing axes must match ``grid.shape``."""
    nodal = np.asarray(nodal)
    if nodal.shape[nodal.ndim - grid.dim:] != grid.shape:
        raise ValueError(f"nodal array shape {nodal.shape} does not match grid shape {grid.shape}")
    out = nodal
    for k in range(grid.dim):
        out = _fwd_axis(out, grid.basis, nodal.ndim - grid.dim + k)
    return out


def to_nodal(coeffs, grid):
    """Inverse transform of a raw coefficient array."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape[coeffs.ndim - grid.dim:] != grid.shape:
        raise ValueError(f"coefficient shape {coeffs.shape} does not match grid shape {grid.shape}")
    out = coeffs
    for k in range(grid.dim):
        out = _inv_axis(out, grid.basis, coeffs.ndim - grid.dim + k)
    return out


# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SpectralField:
    """A field in ``X_N`` stored through its spectral coefficients."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != self.grid.shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid shape {self.grid.shape}")

    @property
    def basis(self):
        return self.grid.basis

    @property
    def nodal(self):
        return to_nodal(self.coeffs, self.grid)

    def copy(self):
        return SpectralField(self.grid, self.coeffs.copy())

    def _check(self, other):
        if not isinstance(other, SpectralField):
            return NotImplemented
        if other.grid != self.grid:
            raise ValueError("fields live on different grids; project or pad first")
        return other

    def __add__(self, other):
        other = self._check(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        other = self._check(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)


def forward_transform(nodal, grid):
    """Spectral coefficients of the trigonometric interpolant of ``nodal``."""
    nodal = np.asarray(nodal)
    if nodal.shape != grid.shape:
        raise ValueError(f"expected nodal array of shape {grid.shape}, got {nodal.shape}")
    return SpectralField(grid, to_coeffs(nodal, grid))


def inverse_transform(field):
    return field.nodal


def _slices(fine, coarse):
    out = []
    for k in range(fine.dim):
        nf, nc = fine.n[k], coarse.n[k]
        if fine.basis == "periodic":
            out.append(slice(nf // 2 - nc // 2, nf // 2 + nc // 2))
        elif fine.basis == "dirichlet":
            out.append(slice(0, nc - 1))
        else:
            out.append(slice(0, nc + 1))
    return tuple(out)


def project(field, n):
    """L2 projection onto the coarser space ``X_n`` (coefficient truncation)."""
    coarse = field.grid.with_n(n)
    if any(c > f for c, f in zip(coarse.n, field.grid.n)):
        raise ValueError(f"cannot project N={field.grid.n} onto finer N={coarse.n}")
    return SpectralField(coarse, field.coeffs[_slices(field.grid, coarse)])


def zero_pad(field, n):
    """Embed ``field`` into the finer space ``X_n``; exact, no interpolation."""
    fine = field.grid.with_n(n)
    if any(c > f for c, f in zip(field.grid.n, fine.n)):
        raise ValueError(f"cannot pad N={field.grid.n} onto coarser N={fine.n}")
    coeffs = np.zeros(fine.shape, dtype=complex)
    coeffs[_slices(fine, field.grid)] = field.coeffs
    return SpectralField(fine, coeffs)


def free_propagator(field, t):
    """``exp(i t Laplacian)`` applied mode by mode."""
    return SpectralField(field.grid, field.coeffs * np.exp(-1j * t * field.grid.mu2))


def phi1(z):
    """Vectorised ``(exp(z) - 1) / z`` with ``phi1(0) = 1``."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) <= _PHI1_SWITCH
    big = ~small
    out[big] = np.expm1(z[big]) / z[big]
    zs = z[small]
    # Horner form of sum_k z^k / (k+1)!
    acc = np.ones_like(zs)
    for k in range(_PHI1_TERMS, 0, -1):
        acc = 1.0 + acc * zs / (k + 1)
    out[small] = acc
    return out


def phi1_scalar(z):
    return complex(phi1(np.array([z]))[0])


def phi1_apply(field, t):
    """``phi1(i t Laplacian)``: multiply coefficient ``l`` by ``phi1(-i t mu_l^2)``."""
    if t < 0:
        raise ValueError("phi1_apply requires t >= 0")
    return SpectralField(field.grid, field.coeffs * phi1(-1j * t * field.grid.mu2))


def laplacian(field):
    return SpectralField(field.grid, -field.grid.mu2 * field.coeffs)


def sobolev_norm(field, alpha=0.0):
    """``H^alpha`` norm with symbol ``(1 + |mu|^2)^(alpha/2)`` and the domain measure."""
    if alpha < 0:
        raise ValueError("Sobolev order must be >= 0")
    g = field.grid
    s = np.sum(g.weights * (1.0 + g.mu2) ** alpha * np.abs(field.coeffs) ** 2)
    return float(np.sqrt(g.measure * s))


def basis_matrix(grid, axis, x):
    """Basis functions of ``axis`` evaluated at points ``x``: shape ``(len(x), n_modes)``."""
    arg = np.outer(np.asarray(x, dtype=float) - grid.bounds[axis][0], grid.mu(axis))
    if grid.basis == "periodic":
        return np.exp(1j * arg)
    if grid.basis == "dirichlet":
        return np.sin(arg)
    return np.cos(arg)


def interpolate(field, points):
    """Evaluate the spectral interpolant on the tensor product of 1D ``points`` arrays."""
    if field.grid.dim == 1 and np.ndim(points[0]) == 0:
        points = (points,)
    out = field.coeffs
    for k in range(field.grid.dim):
        mat = basis_matrix(field.grid, k, points[k])
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [k])), 0, k)
    return out
