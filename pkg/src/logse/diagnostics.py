"""Conserved quantities, error norms, order fits and field probes."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .spectral import sobolev_norm, zero_pad, interpolate, basis_matrix

NORMS = ("e_l2", "e_h1")
SPECTRAL_DECAY = 8.0


def mass(field):
    """``int |psi|^2`` through the coefficient Parseval sum."""
    return sobolev_norm(field, 0.0) ** 2


def _F(rho, lam):
    rho = np.asarray(rho, dtype=float)
    logs = np.log(rho, out=np.zeros_like(rho), where=rho > 0)
    return lam * (rho * logs - rho)


def energy(field, V, lam):
    """``int |grad psi|^2 + V |psi|^2 + F(|psi|^2)``, ``F(rho) = lam (rho ln rho - rho)``.

    The kinetic part is spectral; the potential and ``F`` parts use nodal
    trapezoidal quadrature because ``F(|psi|^2)`` is not band limited.
    """
    g = field.grid
    kinetic = g.measure * np.sum(g.weights * g.mu2 * np.abs(field.coeffs) ** 2)
    rho = np.abs(field.nodal) ** 2
    V = np.broadcast_to(np.asarray(V, dtype=float), rho.shape)
    local = np.sum(g.quad * (V * rho + _F(rho, lam)))
    return float(kinetic + local)


def common_grid(a, b):
    if not a.grid.compatible(b.grid):
        raise ValueError("fields are defined on incompatible domains or bases")
    n = tuple(max(p, q) for p, q in zip(a.grid.n, b.grid.n))
    return zero_pad(a, n), zero_pad(b, n)


def error_norms(numeric, reference):
    """``(||ref - num||_{L2}, ||ref - num||_{H1})`` after zero padding to the finer grid."""
    num, ref = common_grid(numeric, reference)
    diff = ref - num
    return sobolev_norm(diff, 0.0), sobolev_norm(diff, 1.0)


def _fit(params, errors, drop_coarse):
    params = np.asarray(params, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if params.size < 3 or params.size != errors.size:
        raise ValueError("an order fit needs at least 3 (parameter, error) pairs")
    order = np.argsort(params)[::-1]
    params, errors = params[order], errors[order]
    if np.any(np.diff(params) >= 0):
        raise ValueError("step parameters must be distinct")
    if drop_coarse is None:
        drop_coarse = 2 if params.size >= 6 else 0
    params, errors = params[drop_coarse:], errors[drop_coarse:]
    if params.size < 3:
        raise ValueError("fewer than 3 points remain after dropping coarse ones")
    if np.any(errors <= 0) or not np.all(np.isfinite(errors)):
        raise ValueError("errors must be positive and finite")
    slope, _ = np.polyfit(np.log(params), np.log(errors), 1)
    return float(slope), (float(params.min()), float(params.max()))


def fit_order(params, errors, drop_coarse=None):
    """Least-squares slope of ``log(error)`` against ``log(param)``.

    With six or more points the two coarsest (largest parameter) are left
    out unless ``drop_coarse`` says otherwise.
    """
    return _fit(params, errors, drop_coarse)[0]


@dataclass
class ConvergenceReport:
    """Rows of ``(tau, h, e_l2, e_h1)`` plus fitted slopes."""

    axis: str
    rows: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)
    fit_ranges: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def add(self, tau, h, e_l2, e_h1, **extra):
        row = {"tau": float(tau), "h": float(h), "e_l2": float(e_l2), "e_h1": float(e_h1)}
        row.update(extra)
        self.rows.append(row)

    def sort(self):
        self.rows.sort(key=lambda r: (r["h"], r["tau"]))
        return self

    def select(self, **match):
        return [r for r in self.rows
                if all(np.isclose(r.get(k), v, rtol=1e-12, atol=0) for k, v in match.items())]

    def fit(self, name, rows, param, norm, drop_coarse=None):
        slope, window = _fit([r[param] for r in rows], [r[norm] for r in rows], drop_coarse)
        self.slopes[name] = slope
        self.fit_ranges[name] = {"param": param, "norm": norm, "range": list(window)}
        return slope

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["tau", "h", "e_l2", "e_h1"])
            for r in self.rows:
                w.writerow([repr(r["tau"]), repr(r["h"]), repr(r["e_l2"]), repr(r["e_h1"])])

    def sidecar(self):
        return {"axis": self.axis, "slopes": self.slopes,
                "fit_ranges": self.fit_ranges, "flags": self.flags}

    def write(self, stem):
        self.to_csv(f"{stem}.csv")
        with open(f"{stem}.json", "w") as fh:
            json.dump(self.sidecar(), fh, indent=2, sort_keys=True)
            fh.write("\n")


@dataclass
class RegularityEstimate:
    decay: float
    sobolev_index: float
    spectral: bool
    l_range: tuple


def estimate_regularity(field, l_range=None, floor=1e-12):
    """Fit ``|c_l| ~ l^-p`` to the cosine coefficients of a 1D Neumann field.

    Coefficients below ``floor * max|c|`` are ignored (for odd data every
    other mode vanishes).  The implied Sobolev index is ``p - 1/2``.  The
    window is split in thirds; the field is flagged as spectrally resolved
    when the middle third decays faster than ``SPECTRAL_DECAY`` and at least
    twice as fast as the leading third.  The trailing third is ignored since
    aliasing and round-off bend it for algebraic tails too.
    """
    if field.grid.dim != 1 or field.grid.basis != "neumann":
        raise ValueError("regularity estimation expects a 1D cosine (Neumann) field")
    c = np.abs(field.coeffs)
    l = np.arange(c.size)
    keep = (l >= 1) & (c > floor * c.max())
    if l_range is not None:
        keep &= (l >= l_range[0]) & (l <= l_range[1])
    if keep.sum() < 4:
        raise ValueError("coefficient tail is degenerate (fewer than 4 usable modes)")
    ll, cc = np.log(l[keep]), np.log(c[keep])
    p = -np.polyfit(ll, cc, 1)[0]
    third = ll.size // 3
    p_lo = -np.polyfit(ll[:third], cc[:third], 1)[0] if third >= 2 else 0.0
    p_mid = -np.polyfit(ll[third:2 * third], cc[third:2 * third], 1)[0] if third >= 2 else p
    spectral = bool(p_mid > max(SPECTRAL_DECAY, 2.0 * p_lo))
    return RegularityEstimate(float(p), float(p - 0.5), spectral,
                              (int(l[keep].min()), int(l[keep].max())))


# -- probes ----------------------------------------------------------------

def evaluate_points(field, *coords):
    """Evaluate the interpolant at scattered points (one coordinate array per axis)."""
    if field.grid.dim == 1:
        return basis_matrix(field.grid, 0, coords[0]) @ field.coeffs
    mx = basis_matrix(field.grid, 0, coords[0])
    my = basis_matrix(field.grid, 1, coords[1])
    return np.einsum("pi,ij,pj->p", mx, field.coeffs, my)


def winding_number(field, center, radius, n_points=64):
    """Phase winding of ``field`` along a discrete circle, as an integer."""
    th = 2 * np.pi * np.arange(n_points + 1) / n_points
    x = center[0] + radius * np.cos(th)
    y = center[1] + radius * np.sin(th)
    vals = evaluate_points(field, x, y)
    dphi = np.angle(vals[1:] / vals[:-1])
    return int(np.rint(dphi.sum() / (2 * np.pi)))


def vortex_census(field):
    """Phase singularities as ``(x, y, charge)`` tuples.

    The field is resampled spectrally at cell centres, so zeros sitting on
    grid nodes fall strictly inside a plaquette; each plaquette's winding is
    summed from wrapped phase increments.
    """
    g = field.grid
    if g.dim != 2:
        raise ValueError("vortex census needs a 2D field")
    centres = []
    for k in range(2):
        xk = g.nodes(k)
        centres.append(0.5 * (xk[1:] + xk[:-1]))
    psi = interpolate(field, centres)
    ph = np.angle(psi)

    def wrap(d):
        return (d + np.pi) % (2 * np.pi) - np.pi

    w = (wrap(ph[1:, :-1] - ph[:-1, :-1]) + wrap(ph[1:, 1:] - ph[1:, :-1])
         + wrap(ph[:-1, 1:] - ph[1:, 1:]) + wrap(ph[:-1, :-1] - ph[:-1, 1:]))
    charge = np.rint(w / (2 * np.pi)).astype(int)
    ii, jj = np.nonzero(charge)
    # plaquette (i, j) of the centre grid is centred on original node (i+1, j+1)
    xs = 0.5 * (centres[0][ii] + centres[0][ii + 1])
    ys = 0.5 * (centres[1][jj] + centres[1][jj + 1])
    return [(float(x), float(y), int(q)) for x, y, q in zip(xs, ys, charge[ii, jj])]


def core_radius(field, level=0.5):
    """Equivalent radius of the region ``|psi| < level`` per vortex of a dipole."""
    area = np.sum(field.grid.quad * (np.abs(field.nodal) < level))
    return float(np.sqrt(area / (2 * np.pi)))


def split_centroids(field):
    """Centroids of ``|psi|^2`` over ``x < 0`` and ``x > 0`` (1D)."""
    g = field.grid
    x = g.nodes(0)
    rho = g.quad * np.abs(field.nodal) ** 2
    left, right = x < 0, x > 0
    return (float(np.sum(x[left] * rho[left]) / np.sum(rho[left])),
            float(np.sum(x[right] * rho[right]) / np.sum(rho[right])))
