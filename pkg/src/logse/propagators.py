"""Time steppers for ``i psi_t = -Laplacian psi + V psi + lam ln(|psi|^2) psi``.

``ewi_fs`` is the first-order exponential wave integrator: in coefficient
space

    c^{n+1}_l = exp(-i tau mu_l^2) c^n_l - i tau phi1(-i tau mu_l^2) B(psi^n)^_l

with ``B(psi) = V psi + lam ln(|psi|^2) psi`` transformed from nodal values.
``strang`` is the Strang splitting used as the reference solver: half a free
step, the exact phase flow ``psi exp(-i tau (V + lam ln|psi|^2))``, half a
free step.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from scipy.optimize import brentq

from . import diagnostics
from .nonlinearity import apply_B
from .potentials import resolve
from .spectral import SpectralField, phi1, sobolev_norm, to_coeffs, to_nodal

SCHEMES = ("ewi_fs", "strang")
CFL_POLICIES = ("enforce", "warn", "off")


class StepSizeError(ValueError):
    """The time step violates the CFL-type guard under ``cfl_policy="enforce"``."""

    def __init__(self, tau, admissible, h):
        self.tau = tau
        self.admissible = admissible
        self.h = h
        super().__init__(
            f"tau={tau:g} violates tau|ln tau| <= C h^2/|ln h| at h={h:g}; "
            f"largest admissible tau is {admissible:.6g}")


class CFLWarning(UserWarning):
    pass


class BlowUpError(FloatingPointError):
    """Non-finite coefficients appeared during an evolution."""

    def __init__(self, step, t):
        self.step = step
        self.t = t
        super().__init__(f"numerical blow-up (NaN/Inf) at step {step}, t={t:g}")


def admissible_tau(h, constant=1.0):
    """Largest ``tau <= 1/e`` with ``tau |ln tau| <= constant h^2 / |ln h|``."""
    if h >= 1.0:
        return 1.0 / math.e
    rhs = constant * h * h / abs(math.log(h))
    if rhs >= 1.0 / math.e:
        return 1.0 / math.e
    return brentq(lambda t: t * abs(math.log(t)) - rhs, 1e-300, 1.0 / math.e, xtol=1e-300, rtol=1e-14)


@dataclass
class SolverConfig:
    lam: float
    tau: float
    T: float
    scheme: str = "ewi_fs"
    cfl_policy: str = "warn"
    cfl_constant: float = 1.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.cfl_policy not in CFL_POLICIES:
            raise ValueError(f"unknown CFL policy {self.cfl_policy!r}")
        if not (self.tau > 0 and self.T > 0):
            raise ValueError("tau and T must be positive")
        if self.tau > self.T * (1 + 1e-12):
            raise ValueError("tau must not exceed T")
        if not math.isfinite(self.lam):
            raise ValueError("lam must be finite")
        if abs(self.T - self.n_steps * self.tau) > 1e-12 * self.T:
            raise ValueError(f"T={self.T} is not an integer multiple of tau={self.tau}")

    @property
    def n_steps(self):
        return int(round(self.T / self.tau))

    def check_cfl(self, grid):
        if self.cfl_policy == "off":
            return True
        h = min(grid.h)
        limit = admissible_tau(h, self.cfl_constant)
        if self.tau <= limit:
            return True
        if self.cfl_policy == "enforce":
            raise StepSizeError(self.tau, limit, h)
        warnings.warn(f"tau={self.tau:g} exceeds the CFL-type limit {limit:.3g} at h={h:g}",
                      CFLWarning, stacklevel=3)
        return False


class _Kernel:
    """Precomputed multipliers for repeated steps on one grid.

    On periodic grids the state is the raw (unnormalised, FFT-ordered)
    transform ``fft(psi)``; :meth:`pack` and :meth:`unpack` convert from and
    to natural-order coefficients.  Other bases step natural coefficients.
    """

    def __init__(self, grid, V, lam, tau, scheme):
        self.grid = grid
        self.V = resolve(V, grid)
        self.lam = float(lam)
        self.tau = float(tau)
        self.scheme = scheme
        self.raw = grid.basis == "periodic"
        mu2 = grid.mu2
        if self.raw:
            mu2 = np.fft.ifftshift(mu2)
            self._axes = tuple(range(grid.dim))
            self._scale = float(np.prod(grid.n))
        if scheme == "ewi_fs":
            self.E = np.exp(-1j * tau * mu2)
            self.P = -1j * tau * phi1(-1j * tau * mu2)
        else:
            self.half = np.exp(-0.5j * tau * mu2)

    def pack(self, coeffs):
        if self.raw:
            return np.fft.ifftshift(coeffs) * self._scale
        return coeffs.copy()

    def unpack(self, state):
        if self.raw:
            return np.fft.fftshift(state) / self._scale
        return state.copy()

    def _nodal(self, s):
        return scipy.fft.ifftn(s, axes=self._axes) if self.raw else to_nodal(s, self.grid)

    def _coeffs(self, psi):
        return scipy.fft.fftn(psi, axes=self._axes) if self.raw else to_coeffs(psi, self.grid)

    def step(self, s):
        if self.scheme == "ewi_fs":
            b = self._coeffs(apply_B(self._nodal(s), self.V, self.lam))
            return self.E * s + self.P * b
        psi = self._nodal(self.half * s)
        return self.half * self._coeffs(nonlinear_flow(psi, self.V, self.lam, self.tau))


def nonlinear_flow(psi, V, lam, t):
    """Exact solution of ``i psi_t = V psi + lam ln(|psi|^2) psi`` after time ``t``.

    ``|psi|`` is invariant, so the flow is a pointwise phase rotation; zero
    nodes stay zero.
    """
    a = np.abs(psi)
    logs = np.log(a, out=np.zeros_like(a), where=a > 0)
    theta = t * (V + 2.0 * lam * logs)
    return psi * (np.cos(theta) - 1j * np.sin(theta))


def ewi_fs_step(state, V, cfg):
    """One EWI-FS step of size ``cfg.tau``."""
    cfg.check_cfl(state.grid)
    k = _Kernel(state.grid, V, cfg.lam, cfg.tau, "ewi_fs")
    return SpectralField(state.grid, k.unpack(k.step(k.pack(state.coeffs))))


def strang_step(state, V, cfg):
    """One Strang splitting step of size ``cfg.tau``."""
    cfg.check_cfl(state.grid)
    k = _Kernel(state.grid, V, cfg.lam, cfg.tau, "strang")
    return SpectralField(state.grid, k.unpack(k.step(k.pack(state.coeffs))))


@dataclass
class EvolutionTrace:
    times: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    l2_norm: list = field(default_factory=list)
    h1_norm: list = field(default_factory=list)
    h2_norm: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)
    final: SpectralField = None
    n_steps: int = 0

    COLUMNS = ("t", "mass", "energy", "l2_norm", "h1_norm", "h2_norm")

    def record(self, t, psi, V, lam):
        self.times.append(float(t))
        m = diagnostics.mass(psi)
        self.mass.append(m)
        self.energy.append(diagnostics.energy(psi, V, lam))
        self.l2_norm.append(math.sqrt(m))
        self.h1_norm.append(sobolev_norm(psi, 1.0))
        self.h2_norm.append(sobolev_norm(psi, 2.0))

    def rows(self):
        return list(zip(self.times, self.mass, self.energy, self.l2_norm, self.h1_norm, self.h2_norm))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.COLUMNS)
            for row in self.rows():
                w.writerow([repr(float(v)) for v in row])


def _step_index(t, tau, n_steps):
    k = int(round(t / tau))
    if not 0 <= k <= n_steps or abs(k * tau - t) > 1e-9 * max(tau, abs(t)):
        raise ValueError(f"requested time {t} is not a step time t_n = n tau in [0, T]")
    return k


def evolve(initial, V, cfg, sample_every=None, snapshot_times=(), record=True):
    """Run ``cfg.n_steps`` steps of ``cfg.scheme`` from ``initial``.

    Diagnostics are sampled at ``t = 0``, ``t = T`` and every
    ``sample_every`` steps; fields are stored for each of
    ``snapshot_times``.  Raises :class:`BlowUpError` on non-finite values.
    """
    grid = initial.grid
    cfg.check_cfl(grid)
    kernel = _Kernel(grid, V, cfg.lam, cfg.tau, cfg.scheme)
    n = cfg.n_steps
    diag_steps = {0, n}
    if sample_every:
        diag_steps.update(range(0, n + 1, int(sample_every)))
    snap_steps = {_step_index(t, cfg.tau, n): float(t) for t in snapshot_times}

    trace = EvolutionTrace(n_steps=n)
    c = kernel.pack(initial.coeffs)

    def visit(k):
        if not (record and k in diag_steps) and k not in snap_steps:
            return
        psi = SpectralField(grid, kernel.unpack(c))
        if record and k in diag_steps:
            trace.record(k * cfg.tau, psi, kernel.V, cfg.lam)
        if k in snap_steps:
            trace.snapshots[snap_steps[k]] = psi.copy()

    visit(0)
    # overflow is reported as BlowUpError, not as floating point warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n + 1):
            c = kernel.step(c)
            if not np.isfinite(c).all():
                raise BlowUpError(k, k * cfg.tau)
            visit(k)
    trace.final = SpectralField(grid, kernel.unpack(c))
    return trace
