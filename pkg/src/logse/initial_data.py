"""Initial conditions: H^2 odd datum, Gausson pair, tanh, vortex dipole."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from .spectral import forward_transform

_LOG_FLOOR = 1e-300
_RESIDUAL_TOL = 1e-8


def h2_datum(grid):
    """``x |x|^0.51 exp(-x^2/2)``: odd, and only just ``H^2`` at the origin."""
    x = grid.nodes(0)
    return forward_transform(x * np.abs(x) ** 0.51 * np.exp(-x ** 2 / 2), grid)


@dataclass
class GaussonPairParams:
    x0: float = 4.0
    v: float = 2.0
    k1: float = 1.0
    k2: float = 1.0
    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("Gausson widths k1, k2 must be positive")


def two_gaussons(grid, params=None):
    """Gaussons at ``+x0`` (velocity parameter ``-v``) and ``-x0`` (``+v``)."""
    p = params or GaussonPairParams()
    x = grid.nodes(0)
    psi = (p.c1 * np.exp(-p.k1 * (x - p.x0) ** 2 / 2 - 1j * p.v * x)
           + p.c2 * np.exp(-p.k2 * (x + p.x0) ** 2 / 2 + 1j * p.v * x))
    return forward_transform(psi, grid)


def gaussian(grid, center=0.0, k=1.0, amplitude=1.0):
    x = grid.nodes(0)
    return forward_transform(amplitude * np.exp(-k * (x - center) ** 2 / 2) + 0j, grid)


def tanh_datum(grid):
    """Non-decaying odd datum ``tanh(x)``; meant for the cosine basis."""
    if grid.basis != "neumann":
        raise ValueError("the tanh datum is posed with Neumann boundary conditions")
    return forward_transform(np.tanh(grid.nodes(0)) + 0j, grid)


# ---------------------------------------------------------------------------
# radial vortex profile

class ProfileConvergenceError(RuntimeError):
    def __init__(self, message, history):
        self.history = history
        super().__init__(f"{message}; residual history: {[f'{r:.3e}' for r in history]}")


@dataclass
class VortexProfile:
    """Solution ``u`` of the radial vortex equation on ``(0, R0)``; ``u = 1`` beyond."""

    R0: float
    lam: float
    r: np.ndarray
    u: np.ndarray
    residual: float = np.nan

    def __post_init__(self):
        rr = np.concatenate([[0.0], self.r, [self.R0]])
        uu = np.concatenate([[0.0], self.u, [1.0]])
        self._spline = CubicSpline(rr, uu)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r >= self.R0, 1.0, self._spline(np.minimum(r, self.R0)))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "u"])
            for r, u in zip(self.r, self.u):
                w.writerow([repr(float(r)), repr(float(u))])
            w.writerow([repr(float(self.R0)), repr(1.0)])


def _profile_system(u, r, dr, lam):
    """Residual and tridiagonal Jacobian (banded storage) of the radial problem."""
    m = r.size
    rp = r + 0.5 * dr
    rm = r - 0.5 * dr
    up = np.append(u[1:], 1.0)
    um = np.concatenate([[0.0], u[:-1]])
    a = np.abs(u)
    logu = np.log(np.maximum(a, _LOG_FLOOR))
    flux = (rp * (up - u) - rm * (u - um)) / (r * dr * dr)
    res = -flux + u / r ** 2 + 2.0 * lam * logu * u
    ab = np.zeros((3, m))
    ab[1] = (rp + rm) / (r * dr * dr) + 1.0 / r ** 2 + lam * (2.0 * logu + 2.0)
    ab[0, 1:] = -rp[:-1] / (r[:-1] * dr * dr)
    ab[2, :-1] = -rm[1:] / (r[1:] * dr * dr)
    return res, ab


def _newton(u, r, dr, lam, tol, max_iter):
    history = []
    for _ in range(max_iter):
        res, ab = _profile_system(u, r, dr, lam)
        rn = float(np.max(np.abs(res)))
        history.append(rn)
        if rn <= tol:
            return u, history, True
        du = solve_banded((1, 1), ab, -res)
        if np.max(np.abs(du)) < 1e-14:
            # rounding floor of the residual reached
            return u, history, rn <= _RESIDUAL_TOL
        # damping: halve until the residual decreases
        step = 1.0
        for _ in range(30):
            trial = u + step * du
            if np.max(np.abs(_profile_system(trial, r, dr, lam)[0])) < rn:
                break
            step *= 0.5
        u = trial
    return u, history, False


def solve_vortex_profile(lam, R0=8.0, n=2000, tol=1e-10, max_iter=50):
    """Solve ``-(r u')'/r + u/r^2 + lam ln(u^2) u = 0``, ``u(0) = 0``, ``u(R0) = 1``.

    Second-order finite differences on the cell-centred mesh
    ``r_i = (i - 1/2) dr``, ``i = 1..n``, ``dr = R0 / (n + 1/2)`` so that the
    last ghost node sits on ``R0``; the zero flux at ``r = 0`` encodes the
    regular (vanishing) solution.  Damped Newton with continuation in ``lam``
    starting from the linear problem ``lam = 0``.
    """
    if lam == 0:
        raise ValueError("lam must be nonzero")
    if R0 <= 0:
        raise ValueError("R0 must be positive")
    dr = R0 / (n + 0.5)
    r = (np.arange(1, n + 1) - 0.5) * dr
    u = r / R0
    u, history, ok = _newton(u, r, dr, 0.0, tol, max_iter)
    current, dl = 0.0, np.sign(lam) * min(abs(lam), 0.25)
    while current != lam:
        target = current + dl
        if abs(target) >= abs(lam):
            target = lam
        trial, hist, ok = _newton(u.copy(), r, dr, target, tol, max_iter)
        history.extend(hist)
        if ok:
            u, current = trial, target
            dl *= 1.5
        else:
            dl *= 0.5
            if abs(dl) < 1e-8:
                raise ProfileConvergenceError(f"continuation stalled at lam={current:g}", history)
    res, _ = _profile_system(u, r, dr, lam)
    if np.max(np.abs(res)) > _RESIDUAL_TOL:
        raise ProfileConvergenceError("residual above tolerance", history)
    return VortexProfile(float(R0), float(lam), r, u, float(np.max(np.abs(res))))


def vortex_dipole(grid, profile, x0):
    """``phi_+(x - x0, y) phi_-(x + x0, y)`` with ``phi_pm = u(|x|) exp(+-i theta)``."""
    if grid.dim != 2:
        raise ValueError("the vortex dipole is a 2D datum")
    X, Y = grid.mesh()

    def unit_phase(z):
        r = np.abs(z)
        out = np.zeros_like(z)
        nz = r > 0
        out[nz] = z[nz] / r[nz]
        return r, out

    r1, e1 = unit_phase((X - x0) + 1j * Y)
    r2, e2 = unit_phase((X + x0) + 1j * Y)
    psi = profile(r1) * e1 * profile(r2) * np.conj(e2)
    return forward_transform(psi, grid)
