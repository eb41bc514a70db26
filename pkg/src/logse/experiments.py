"""Experiment harness: convergence sweeps, CFL rays, soliton and vortex runs.

Every run is driven by an :class:`ExperimentConfig`, usually a preset
(``desk`` or ``paper``) overlaid with a JSON file.  Errors are measured
against a Strang reference at ``(tau_ref, h_ref)`` on the same domain.
Outputs are CSV files with ``repr`` floats, a JSON sidecar and a
``manifest.json``, so equal configs give byte-identical files.
"""

from __future__ import annotations

import copy
import csv
import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import io
from .diagnostics import (ConvergenceReport, core_radius, error_norms, split_centroids,
                          vortex_census)
from .initial_data import (GaussonPairParams, gaussian, h2_datum, solve_vortex_profile,
                           tanh_datum, two_gaussons, vortex_dipole)
from .potentials import PotentialSpec
from .propagators import SCHEMES, SolverConfig, evolve
from .spectral import BASES, Grid, SpectralField

KINDS = ("temporal", "spatial", "cfl", "soliton", "vortex", "profile")
INITIAL_KINDS = ("h2", "two_gaussons", "gaussian", "tanh")
SPECTRAL_SLOPE = 8.0
RELIABILITY_FRACTION = 0.1


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    domain: list = field(default_factory=lambda: [[-16.0, 16.0]])
    basis: str = "periodic"
    lam: float = -1.0
    T: float = 1.0
    potential: dict = field(default_factory=lambda: {"kind": "zero"})
    initial: dict = field(default_factory=lambda: {"kind": "h2"})
    scheme: str = "ewi_fs"
    # sweeps
    taus: list = field(default_factory=list)
    hs: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    violating: list = field(default_factory=list)   # [c, p] rays tau = c h^p
    control: bool = False
    control_potential: dict = field(default_factory=lambda: {"kind": "disorder", "alpha": 40.0})
    tau_ref: float = 1e-5
    h_ref: float = 2.0 ** -8
    check_reference: bool = True
    # single runs
    h: float = 2.0 ** -5
    n: int = 256
    tau: float = 1e-3
    velocities: list = field(default_factory=lambda: [2.0])
    compare_free: bool = True
    x0: float = 0.5
    R0: float = 8.0
    profile_n: int = 2000
    snapshot_times: list = None
    raster_every: int = 100
    raster_stride: int = 4
    # bookkeeping
    seed: int = 0
    workers: int = 1
    preset: str = "desk"

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "kind" not in data:
            raise ConfigError("config needs a 'kind'")
        try:
            cfg = cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    def to_dict(self):
        return dataclasses.asdict(self)

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.basis not in BASES:
            raise ConfigError(f"unknown basis {self.basis!r}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64):
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.T <= 0 or not math.isfinite(self.lam):
            raise ConfigError("T must be positive and lam finite")
        try:
            for a, b in self.domain:
                if not b > a:
                    raise ConfigError("domain endpoints must satisfy b > a")
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed domain {self.domain!r}") from exc
        try:
            self.potential_spec()
            PotentialSpec(**self.control_potential)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad potential: {exc}") from exc
        if self.initial.get("kind") not in INITIAL_KINDS:
            raise ConfigError(f"unknown initial datum {self.initial.get('kind')!r}")
        if self.kind in ("temporal", "cfl"):
            if not self.hs:
                raise ConfigError("a temporal sweep needs an h list")
            taus = [t for _, t in self.sweep_points()]
            if len(taus) < 3:
                raise ConfigError("a temporal sweep needs at least 3 points")
            if self.tau_ref > min(taus) / 10 * (1 + 1e-12):
                raise ConfigError(f"tau_ref={self.tau_ref:g} must be <= min tau / 10 = {min(taus) / 10:g}")
        if self.kind == "spatial" and len(self.hs) < 3:
            raise ConfigError("a spatial sweep needs at least 3 mesh sizes")
        if self.kind in ("temporal", "cfl", "spatial"):
            if self.h_ref > min(self.hs) / 4 * (1 + 1e-12):
                raise ConfigError(f"h_ref={self.h_ref:g} must be <= min h / 4 = {min(self.hs) / 4:g}")
        if self.kind == "vortex" and (len(self.domain) != 2 or self.basis != "neumann"):
            raise ConfigError("vortex runs use a 2D Neumann domain")
        if self.kind == "soliton" and len(self.domain) != 1:
            raise ConfigError("soliton runs are 1D")

    def potential_spec(self):
        spec = dict(self.potential)
        if spec.get("kind") == "disorder":
            spec.setdefault("seed", self.seed)
        return PotentialSpec(**spec)

    def sweep_points(self):
        """Sorted unique ``(h, tau)`` pairs for temporal and CFL sweeps."""
        pts = set()
        if self.kind == "temporal":
            pts.update((h, snap_tau(self.T, t)) for h in self.hs for t in self.taus)
        for c in self.ratios:
            pts.update((h, snap_tau(self.T, c * h * h)) for h in self.hs)
        for c, p in self.violating:
            pts.update((h, snap_tau(self.T, c * h ** p)) for h in self.hs)
        return sorted(pts)


def snap_tau(T, tau):
    """Nearest step ``T / n`` to ``tau`` (at most ``T``)."""
    return T / max(1, int(round(T / tau)))


# -- presets -----------------------------------------------------------------

_DESK = {
    "temporal": dict(hs=[2.0 ** -k for k in range(3, 7)], ratios=[1.0],
                     taus=[1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3],
                     tau_ref=5e-6, h_ref=2.0 ** -8),
    "spatial": dict(hs=[2.0 ** -k for k in range(1, 6)], tau_ref=1e-5, h_ref=2.0 ** -7),
    "cfl": dict(hs=[2.0 ** -k for k in range(3, 6)], ratios=[0.1, 1.0, 10.0],
                violating=[[0.1, 0.5]], control=True, tau_ref=5e-6, h_ref=2.0 ** -7),
    "soliton": dict(domain=[[-32.0, 32.0]], initial={"kind": "two_gaussons"},
                    potential={"kind": "disorder", "alpha": 0.0}, velocities=[1.0, 2.0, 4.0, 8.0],
                    h=2.0 ** -3, tau=5e-4, T=4.0, raster_every=100, raster_stride=2),
    "vortex": dict(domain=[[-16.0, 16.0], [-16.0, 16.0]], basis="neumann", lam=16.0,
                   n=256, tau=1e-3, T=0.5, x0=0.5),
    "profile": dict(lam=16.0, R0=8.0, profile_n=2000),
}

# reference steps keep tau_ref * mu_max^2 below 2 pi, where Strang splitting resonates
_FULL = {
    "temporal": dict(hs=[2.0 ** -k for k in range(2, 8)], ratios=[1.0],
                     taus=[1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4, 5e-5, 2e-5, 1e-5],
                     tau_ref=1e-6, h_ref=2.0 ** -9),
    "spatial": dict(hs=[2.0 ** -k for k in range(1, 6)], tau_ref=1e-6, h_ref=2.0 ** -9),
    "cfl": dict(hs=[2.0 ** -k for k in range(2, 8)], ratios=[0.1, 1.0, 10.0],
                violating=[[0.1, 0.5]], control=True, tau_ref=5e-7, h_ref=2.0 ** -9),
    "soliton": dict(domain=[[-32.0, 32.0]], initial={"kind": "two_gaussons"},
                    potential={"kind": "disorder", "alpha": 0.0}, velocities=[1.0, 2.0, 4.0, 8.0],
                    h=2.0 ** -5, tau=1e-5, T=4.0, raster_every=2000, raster_stride=8),
    "vortex": dict(domain=[[-32.0, 32.0], [-32.0, 32.0]], basis="neumann", lam=16.0,
                   n=2048, tau=1e-5, T=1.0, x0=0.5),
    "profile": dict(lam=16.0, R0=8.0, profile_n=8000),
}

PRESETS = {"desk": _DESK, "paper": _FULL}


def load_config(kind, preset="desk", overrides=None, seed=None):
    """Preset defaults, then ``overrides`` (a dict or a JSON path), then ``seed``."""
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}")
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    data = {"kind": kind, "preset": preset}
    data.update(copy.deepcopy(PRESETS[preset][kind]))
    if isinstance(overrides, (str, os.PathLike)):
        try:
            with open(overrides) as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {overrides}: {exc}") from exc
    if overrides:
        if not isinstance(overrides, dict):
            raise ConfigError("config file must hold a JSON object")
        if overrides.get("kind", kind) != kind:
            raise ConfigError(f"config is for {overrides['kind']!r}, not {kind!r}")
        data.update(overrides)
    if seed is not None:
        data["seed"] = seed
    return ExperimentConfig.from_dict(data)


# -- building blocks -----------------------------------------------------------

def make_grid(cfg, h=None, n=None):
    if n is not None:
        return Grid(tuple(tuple(map(float, d)) for d in cfg.domain), n, cfg.basis)
    return Grid.from_mesh_size([tuple(map(float, d)) for d in cfg.domain], h, cfg.basis)


def make_initial(spec, grid):
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind == "h2":
        return h2_datum(grid)
    if kind == "two_gaussons":
        return two_gaussons(grid, GaussonPairParams(**spec))
    if kind == "gaussian":
        return gaussian(grid, **spec)
    return tanh_datum(grid)


def _run(domain, basis, initial, potential, lam, T, tau, h, scheme):
    grid = Grid.from_mesh_size([tuple(d) for d in domain], h, basis)
    psi0 = make_initial(initial, grid)
    cfg = SolverConfig(lam, tau, T, scheme, cfl_policy="off")
    return evolve(psi0, PotentialSpec(**potential), cfg, record=False).final


def _job(args):
    (tau, h), params = args
    return (tau, h), _run(h=h, tau=tau, **params).coeffs


_REFERENCES = {}


def reference_solution(cfg, lam=None, potential=None, tau=None, h=None):
    """Strang solution at ``(tau_ref, h_ref)``; memoised per process."""
    params = dict(domain=cfg.domain, basis=cfg.basis, initial=cfg.initial,
                  potential=potential or cfg.potential_spec().to_dict(),
                  lam=cfg.lam if lam is None else lam, T=cfg.T,
                  tau=tau or cfg.tau_ref, h=h or cfg.h_ref, scheme="strang")
    key = json.dumps(params, sort_keys=True)
    if key not in _REFERENCES:
        _REFERENCES[key] = _run(**params)
    return _REFERENCES[key]


def clear_reference_cache():
    _REFERENCES.clear()


def _sweep(cfg, points, lam, potential):
    params = dict(domain=cfg.domain, basis=cfg.basis, initial=cfg.initial, potential=potential,
                  lam=lam, T=cfg.T, scheme=cfg.scheme)
    jobs = [((tau, h), params) for h, tau in points]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            out = dict(pool.map(_job, jobs))
    else:
        out = dict(map(_job, jobs))
    return {k: SpectralField(Grid.from_mesh_size([tuple(d) for d in cfg.domain], k[1], cfg.basis), c)
            for k, c in out.items()}


def _fill(report, cfg, points, lam=None, potential=None, tag=None):
    lam = cfg.lam if lam is None else lam
    potential = potential or cfg.potential_spec().to_dict()
    ref = reference_solution(cfg, lam, potential)
    finals = _sweep(cfg, points, lam, potential)
    for (tau, h), psi in sorted(finals.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        e2, e1 = error_norms(psi, ref)
        extra = {"tag": tag} if tag else {}
        report.add(tau, h, e2, e1, **extra)
    if cfg.check_reference:
        # Richardson estimate of the reference error from a run with the swept
        # step doubled, assuming second order: err ~ gap / 3
        if cfg.kind == "spatial":
            coarse = reference_solution(cfg, lam, potential, h=2 * cfg.h_ref)
        else:
            coarse = reference_solution(cfg, lam, potential, tau=snap_tau(cfg.T, 2 * cfg.tau_ref))
        gap = error_norms(coarse, ref)[0]
        smallest = min(r["e_l2"] for r in report.rows if r.get("tag") == tag)
        key = "reference_reliable" if tag is None else f"reference_reliable[{tag}]"
        report.flags[key] = bool(gap / 3 < RELIABILITY_FRACTION * smallest)
        report.flags[key.replace("reliable", "gap")] = gap
    return report


def _ray_rows(report, rows_of, name, param="tau"):
    for norm in ("e_l2", "e_h1"):
        rows = rows_of()
        if len(rows) >= 3:
            report.fit(f"{name}/{norm}", rows, param, norm)


# -- experiments -------------------------------------------------------------------

def run_temporal_convergence(cfg):
    """Errors on the ``(tau, h)`` lattice; fits per ``h`` and per ray ``tau = c h^2``."""
    report = _fill(ConvergenceReport("temporal"), cfg, cfg.sweep_points())
    for h in cfg.hs:
        taus = {snap_tau(cfg.T, t) for t in cfg.taus}
        _ray_rows(report, lambda: [r for r in report.select(h=h) if r["tau"] in taus], f"h={h:g}")
    for c in cfg.ratios:
        pts = {(h, snap_tau(cfg.T, c * h * h)) for h in cfg.hs}
        _ray_rows(report, lambda: [r for r in report.rows if (r["h"], r["tau"]) in pts], f"c={c:g}")
    return report


def run_cfl_study(cfg):
    """Rays ``tau = c h^2``, restriction-violating rays ``tau = c h^p`` and a linear control."""
    report = ConvergenceReport("fixed_ratio")
    rays = [(f"c={c:g}", {(h, snap_tau(cfg.T, c * h * h)) for h in cfg.hs}) for c in cfg.ratios]
    rays += [(f"c={c:g},p={p:g}", {(h, snap_tau(cfg.T, c * h ** p)) for h in cfg.hs})
             for c, p in cfg.violating]
    runs = [(None, None, None)]
    if cfg.control:
        runs.append(("control", 0.0, dict(cfg.control_potential, seed=cfg.seed)))
    for tag, lam, pot in runs:
        pts = sorted(set().union(*(p for _, p in rays)))
        _fill(report, cfg, pts, lam, pot, tag)
        for name, ray in rays:
            label = name if tag is None else f"{tag}:{name}"
            _ray_rows(report, lambda: [r for r in report.rows
                                       if r.get("tag") == tag and (r["h"], r["tau"]) in ray], label)
    return report


def spectral_flag(hs, errors):
    """True when some local slope exceeds ``SPECTRAL_SLOPE`` (super-algebraic decay)."""
    hs, errors = np.asarray(hs, float), np.asarray(errors, float)
    order = np.argsort(hs)[::-1]
    hs, errors = hs[order], np.maximum(errors[order], 1e-300)
    local = np.diff(np.log(errors)) / np.diff(np.log(hs))
    return bool(np.any(local > SPECTRAL_SLOPE))


def run_spatial_convergence(cfg):
    """Errors at ``tau = tau_ref`` over the ``h`` list; L2 and H1 slopes in ``h``."""
    tau = snap_tau(cfg.T, cfg.tau_ref)
    report = _fill(ConvergenceReport("spatial"), cfg, [(h, tau) for h in sorted(cfg.hs)])
    report.sort()
    for norm in ("e_l2", "e_h1"):
        rows = report.rows
        report.flags[f"spectral/{norm}"] = spectral_flag([r["h"] for r in rows], [r[norm] for r in rows])
        if all(r[norm] > 0 for r in rows):
            report.fit(norm, rows, "h", norm)
    return report


@dataclass
class SolitonRun:
    velocity: float
    potential: str
    trace: object
    centroids: list        # (t, left, right)
    raster: list           # (t, x, sqrt|psi|)


def run_soliton_collision(cfg):
    """Gausson pair runs for each velocity, with the configured potential and (optionally) V = 0."""
    grid = make_grid(cfg, h=cfg.h)
    pots = [cfg.potential_spec().to_dict()]
    if cfg.compare_free and pots[0]["kind"] != "zero":
        pots.insert(0, {"kind": "zero"})
    scfg = SolverConfig(cfg.lam, snap_tau(cfg.T, cfg.tau), cfg.T, cfg.scheme, cfl_policy="off")
    every = max(1, int(cfg.raster_every))
    times = [k * scfg.tau for k in range(0, scfg.n_steps + 1, every)]
    if times[-1] != cfg.T:
        times.append(cfg.T)
    x = grid.nodes(0)[::cfg.raster_stride]
    runs = []
    for v in cfg.velocities:
        params = dict(cfg.initial)
        params.pop("kind", None)
        params["v"] = float(v)
        psi0 = two_gaussons(grid, GaussonPairParams(**params))
        for pot in pots:
            trace = evolve(psi0, PotentialSpec(**pot), scfg, sample_every=every, snapshot_times=times)
            cents, raster = [], []
            for t in sorted(trace.snapshots):
                snap = trace.snapshots[t]
                cents.append((t,) + split_centroids(snap))
                amp = np.sqrt(np.abs(snap.nodal))[::cfg.raster_stride]
                raster.extend((t, xi, a) for xi, a in zip(x, amp))
            trace.snapshots = {}
            runs.append(SolitonRun(float(v), pot["kind"], trace, cents, raster))
    return runs


def default_snapshot_times(T):
    """Documented default ladder: ``0, T/8, T/4, T/2, 3T/4, T``."""
    return [0.0, T / 8, T / 4, T / 2, 3 * T / 4, T]


@dataclass
class VortexRun:
    profile: object
    trace: object
    census: list           # (t, [(x, y, q), ...], core radius)

    def zero_counts(self):
        return [len(c[1]) for c in self.census]


def run_vortex_dipole(cfg, profile=None):
    grid = make_grid(cfg, n=cfg.n)
    profile = profile or solve_vortex_profile(cfg.lam, cfg.R0, cfg.profile_n)
    psi0 = vortex_dipole(grid, profile, cfg.x0)
    vcfg = SolverConfig(cfg.lam, snap_tau(cfg.T, cfg.tau), cfg.T, cfg.scheme, cfl_policy="off")
    times = cfg.snapshot_times or default_snapshot_times(cfg.T)
    times = sorted({vcfg.tau * round(t / vcfg.tau) for t in times})
    sample = max(1, vcfg.n_steps // 50)
    trace = evolve(psi0, None, vcfg, sample_every=sample, snapshot_times=times)
    census = [(t, vortex_census(s), core_radius(s)) for t, s in sorted(trace.snapshots.items())]
    return VortexRun(profile, trace, census)


def run_profile(cfg):
    return solve_vortex_profile(cfg.lam, cfg.R0, cfg.profile_n)


# -- output --------------------------------------------------------------------------

def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def write_manifest(out, cfg, outputs, extra=None):
    from . import __version__
    manifest = {"kind": cfg.kind, "version": __version__, "seed": cfg.seed,
                "config": cfg.to_dict(), "outputs": sorted(outputs)}
    if extra:
        manifest.update(extra)
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(cfg, out):
    """Run ``cfg`` and write its outputs into directory ``out``; returns the result."""
    os.makedirs(out, exist_ok=True)
    outputs, extra = [], {}
    if cfg.kind in ("temporal", "spatial", "cfl"):
        fn = {"temporal": run_temporal_convergence, "spatial": run_spatial_convergence,
              "cfl": run_cfl_study}[cfg.kind]
        result = fn(cfg)
        result.write(os.path.join(out, cfg.kind))
        outputs += [f"{cfg.kind}.csv", f"{cfg.kind}.json"]
        if cfg.kind == "cfl" and cfg.control:
            _write_rows(os.path.join(out, "cfl_rows.csv"), ["tag", "tau", "h", "e_l2", "e_h1"],
                        [(r.get("tag") or "main", r["tau"], r["h"], r["e_l2"], r["e_h1"])
                         for r in result.rows])
            outputs.append("cfl_rows.csv")
    elif cfg.kind == "soliton":
        result = run_soliton_collision(cfg)
        grid = make_grid(cfg, h=cfg.h)
        if cfg.potential_spec().kind != "zero":
            V = cfg.potential_spec().evaluate(grid)
            io.write_potential_csv(os.path.join(out, "potential.csv"), grid, V)
            io.write_real_snapshot(os.path.join(out, "potential.bin"), grid, V)
            outputs += ["potential.csv", "potential.bin"]
        for run in result:
            stem = f"soliton_v{run.velocity:g}_{run.potential}"
            run.trace.to_csv(os.path.join(out, f"{stem}_trace.csv"))
            _write_rows(os.path.join(out, f"{stem}_centroids.csv"), ["t", "left", "right"], run.centroids)
            _write_rows(os.path.join(out, f"{stem}_raster.csv"), ["t", "x", "sqrt_abs_psi"], run.raster)
            io.write_snapshot(os.path.join(out, f"{stem}_final.bin"), run.trace.final)
            outputs += [f"{stem}_{s}" for s in ("trace.csv", "centroids.csv", "raster.csv", "final.bin")]
    elif cfg.kind == "vortex":
        result = run_vortex_dipole(cfg)
        result.trace.to_csv(os.path.join(out, "vortex_trace.csv"))
        result.profile.to_csv(os.path.join(out, "profile.csv"))
        rows = []
        for t, zeros, rc in result.census:
            xs = sorted(z[0] for z in zeros)
            sep = xs[-1] - xs[0] if len(xs) >= 2 else float("nan")
            ymean = float(np.mean([z[1] for z in zeros])) if zeros else float("nan")
            rows.append((t, len(zeros), sum(z[2] > 0 for z in zeros), sum(z[2] < 0 for z in zeros),
                         sep, ymean, rc))
        _write_rows(os.path.join(out, "vortex_census.csv"),
                    ["t", "n_zeros", "n_plus", "n_minus", "x_separation", "y_mean", "core_radius"], rows)
        outputs += ["vortex_trace.csv", "profile.csv", "vortex_census.csv"]
        for t, s in sorted(result.trace.snapshots.items()):
            name = f"vortex_t{t:.6f}.bin"
            io.write_snapshot(os.path.join(out, name), s)
            outputs.append(name)
    else:
        result = run_profile(cfg)
        result.to_csv(os.path.join(out, "profile.csv"))
        outputs.append("profile.csv")
        extra["residual"] = result.residual
    write_manifest(out, cfg, outputs, extra)
    return result
