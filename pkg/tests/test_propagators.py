import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logse import (BlowUpError, CFLWarning, Grid, SolverConfig, SpectralField, StepSizeError,
                   admissible_tau, evolve, ewi_fs_step, free_propagator, gaussian, h2_datum,
                   mass, square_well, strang_step, two_gaussons, error_norms, sobolev_norm)
from logse.propagators import nonlinear_flow
from logse.spectral import BASES, forward_transform, phi1


def cfg(lam=-1.0, tau=1e-3, T=None, scheme="ewi_fs", **kw):
    kw.setdefault("cfl_policy", "off")
    return SolverConfig(lam, tau, T or tau, scheme, **kw)


def random_state(grid, seed=0):
    rng = np.random.default_rng(seed)
    c = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)) * (1 + grid.mu2) ** -1.5
    return SpectralField(grid, c)


# -- configuration -----------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(-1, 0.3, 1.0)
    with pytest.raises(ValueError):
        SolverConfig(-1, 2.0, 1.0)
    with pytest.raises(ValueError):
        SolverConfig(-1, -1e-3, 1.0)
    with pytest.raises(ValueError):
        SolverConfig(-1, 1e-3, 1.0, scheme="rk4")
    with pytest.raises(ValueError):
        SolverConfig(-1, 1e-3, 1.0, cfl_policy="maybe")
    with pytest.raises(ValueError):
        SolverConfig(float("nan"), 1e-3, 1.0)
    assert SolverConfig(-1, 1e-3, 1.0).n_steps == 1000
    assert SolverConfig(-1, 0.1, 1.0).n_steps == 10


def test_admissible_tau():
    for h in (2.0 ** -3, 2.0 ** -6):
        t = admissible_tau(h)
        assert np.isclose(t * abs(np.log(t)), h * h / abs(np.log(h)), rtol=1e-10)
    assert admissible_tau(2.0) == 1 / np.e


def test_cfl_policies():
    g = Grid.line(-16, 16, 512)
    psi = h2_datum(g)
    bad = SolverConfig(-1, 0.1, 0.1, cfl_policy="enforce")
    with pytest.raises(StepSizeError) as info:
        ewi_fs_step(psi, None, bad)
    assert np.isclose(info.value.admissible, admissible_tau(1 / 16))
    with pytest.warns(CFLWarning):
        ewi_fs_step(psi, None, SolverConfig(-1, 0.1, 0.1))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ewi_fs_step(psi, None, SolverConfig(-1, 0.1, 0.1, cfl_policy="off"))
        ewi_fs_step(psi, None, SolverConfig(-1, 1e-4, 1e-4, cfl_policy="enforce"))


# -- single steps -------------------------------------------------------------------

@pytest.mark.parametrize("basis", BASES)
@pytest.mark.parametrize("step", [ewi_fs_step, strang_step])
def test_linear_free_step_is_free_propagator(basis, step):
    psi = random_state(Grid.line(-4, 4, 64, basis))
    out = step(psi, None, cfg(lam=0.0, tau=0.05))
    assert np.allclose(out.coeffs, free_propagator(psi, 0.05).coeffs, atol=1e-15)


def test_2d_linear_step():
    psi = random_state(Grid.square(-2, 2, 16, "neumann"))
    out = ewi_fs_step(psi, None, cfg(lam=0.0, tau=0.01))
    assert np.allclose(out.coeffs, free_propagator(psi, 0.01).coeffs, atol=1e-15)


def test_constant_state_hand_update():
    g = Grid.line(-16, 16, 32)
    c0, lam, tau = 0.7 - 0.2j, -1.0, 1e-2
    psi = forward_transform(np.full(32, c0), g)
    out = ewi_fs_step(psi, None, cfg(lam, tau)).coeffs
    expected = c0 - 1j * tau * lam * c0 * np.log(abs(c0) ** 2)
    assert abs(out[16] - expected) < 1e-15
    assert np.abs(np.delete(out, 16)).max() < 1e-15


def test_single_mode_potential_hand_update():
    # V = 2 cos(mu_m (x - a)) couples mode k to k +- m with unit weight
    g = Grid.line(-16, 16, 64)
    x = g.nodes(0)
    mid, k, m, tau = 32, 3, 5, 0.02
    mu = g.mu(0)
    V = 2 * np.cos(mu[mid + m] * (x + 16))
    c = np.zeros(64, complex)
    c[mid + k] = 1.0
    out = ewi_fs_step(SpectralField(g, c), V, cfg(lam=0.0, tau=tau)).coeffs
    expected = np.zeros(64, complex)
    expected[mid + k] = np.exp(-1j * tau * mu[mid + k] ** 2)
    for j in (k + m, k - m):
        expected[mid + j] = -1j * tau * phi1(-1j * tau * mu[mid + j] ** 2)
    assert np.allclose(out, expected, atol=1e-14)


def test_nonlinear_flow_keeps_modulus():
    rng = np.random.default_rng(3)
    psi = rng.standard_normal(200) + 1j * rng.standard_normal(200)
    psi[::7] = 0
    V = rng.standard_normal(200)
    out = nonlinear_flow(psi, V, 2.5, 0.3)
    assert np.allclose(np.abs(out), np.abs(psi), rtol=1e-13, atol=0)
    assert np.all(out[::7] == 0)


# -- evolution ------------------------------------------------------------------------

def test_one_step_evolution_equals_step():
    g = Grid.line(-16, 16, 128)
    psi = h2_datum(g)
    c = cfg(tau=1e-3, T=1e-3)
    tr = evolve(psi, square_well(g), c)
    assert np.array_equal(tr.final.coeffs, ewi_fs_step(psi, square_well(g), c).coeffs)
    assert tr.times == [0.0, 1e-3]


def test_trace_sampling_and_snapshots(tmp_path):
    g = Grid.line(-16, 16, 64)
    tr = evolve(h2_datum(g), None, cfg(tau=0.01, T=0.1), sample_every=3, snapshot_times=[0.05, 0.1])
    assert tr.times == sorted(tr.times) and tr.times[0] == 0 and np.isclose(tr.times[-1], 0.1)
    assert len(tr.times) == len(set(tr.times)) == 5
    assert set(tr.snapshots) == {0.05, 0.1}
    assert np.array_equal(tr.snapshots[0.1].coeffs, tr.final.coeffs)
    tr.to_csv(tmp_path / "trace.csv")
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0] == "t,mass,energy,l2_norm,h1_norm,h2_norm" and len(lines) == 6
    with pytest.raises(ValueError):
        evolve(h2_datum(g), None, cfg(tau=0.01, T=0.1), snapshot_times=[0.055])


def test_blow_up_detection():
    g = Grid.line(-16, 16, 32)
    c = h2_datum(g).coeffs.copy()
    c[3] = np.nan
    with pytest.raises(BlowUpError) as info:
        evolve(SpectralField(g, c), None, cfg(tau=0.1, T=1.0))
    assert info.value.step == 1


def test_strang_mass_conservation():
    g = Grid.line(-16, 16, 512)
    tr = evolve(two_gaussons(g), square_well(g), cfg(tau=1e-3, T=1.0, scheme="strang"))
    assert abs(tr.mass[-1] - tr.mass[0]) <= 1e-10 * tr.mass[0]


def test_ewi_mass_drift_first_order():
    g = Grid.line(-16, 16, 256)
    psi = h2_datum(g)
    taus = [2e-3, 1e-3, 5e-4, 2.5e-4]
    drift = []
    for tau in taus:
        m = evolve(psi, None, cfg(tau=tau, T=0.5), record=False).final
        drift.append(abs(mass(m) - mass(psi)))
    slope = np.polyfit(np.log(taus), np.log(drift), 1)[0]
    assert abs(slope - 1) < 0.3


@settings(max_examples=10, deadline=None)
@given(phase=st.floats(0, 2 * np.pi), seed=st.integers(0, 1000))
def test_gauge_covariance_unit_modulus(phase, seed):
    g = Grid.line(-8, 8, 64)
    psi = random_state(g, seed)
    k = np.exp(1j * phase)
    a = evolve(psi, None, cfg(tau=1e-3, T=0.1), record=False).final
    b = evolve(SpectralField(g, k * psi.coeffs), None, cfg(tau=1e-3, T=0.1), record=False).final
    assert np.abs(b.coeffs - k * a.coeffs).max() <= 1e-11


def test_gauge_covariance_general_kappa():
    # psi0 -> kappa psi0 maps psi(t) to kappa psi(t) exp(-i t lam ln|kappa|^2)
    g = Grid.line(-8, 8, 64)
    psi = random_state(g, 4)
    lam, tau, n = -1.0, 1e-3, 100
    kappa = 1.7 * np.exp(0.4j)
    comp = kappa * np.exp(-1j * n * tau * lam * np.log(abs(kappa) ** 2))
    a = evolve(psi, None, cfg(lam, tau, n * tau, "strang"), record=False).final
    b = evolve(SpectralField(g, kappa * psi.coeffs), None, cfg(lam, tau, n * tau, "strang"), record=False).final
    assert np.abs(b.coeffs - comp * a.coeffs).max() <= 1e-11 * abs(kappa)
    # the explicit scheme sees the compensating phase as a constant potential: O(tau) defect
    gaps = []
    for t in (2e-3, 1e-3, 5e-4):
        a = evolve(psi, None, cfg(lam, t, 0.1), record=False).final
        b = evolve(SpectralField(g, kappa * psi.coeffs), None, cfg(lam, t, 0.1), record=False).final
        phase = kappa * np.exp(-1j * 0.1 * lam * np.log(abs(kappa) ** 2))
        gaps.append(np.abs(b.coeffs - phase * a.coeffs).max())
    rates = np.log2(np.array(gaps[:-1]) / np.array(gaps[1:]))
    assert np.all(np.abs(rates - 1) < 0.1)


def test_local_truncation_error_scaling():
    # one step from the reference state versus the reference one step later
    g = Grid.line(-16, 16, 256)
    psi = h2_datum(g)
    taus = 2.0 ** -np.arange(9, 14)
    errs = []
    for tau in taus:
        one = ewi_fs_step(psi, None, cfg(tau=tau))
        ref = evolve(psi, None, cfg(tau=tau / 64, T=tau, scheme="strang"), record=False).final
        errs.append(sobolev_norm(one - ref, 0))
    slope = np.polyfit(np.log(taus), np.log(errs), 1)[0]
    assert 1.7 < slope < 2.3


def test_stability_of_flow_map_difference():
    g = Grid.line(-16, 16, 256)
    psi = gaussian(g, 0.0, 1.0)
    bump = gaussian(g, 1.0, 2.0, 1e-3)
    phi = psi + bump
    V = square_well(g)
    Cs = 2 * 1.0 + 4.0
    growth = []
    for tau in (4e-3, 2e-3, 1e-3, 5e-4):
        c = cfg(-1.0, tau)
        d1 = sobolev_norm(ewi_fs_step(psi, V, c) - ewi_fs_step(phi, V, c), 0)
        growth.append(d1 / sobolev_norm(bump, 0))
        assert growth[-1] <= np.exp(Cs * tau)


def test_ewi_close_to_strang_desk():
    g = Grid.line(-16, 16, 1024)
    V = square_well(g, sampling="projected")
    a = evolve(two_gaussons(g), V, cfg(tau=1e-4, T=0.2), record=False).final
    b = evolve(two_gaussons(g), V, cfg(tau=1e-4, T=0.2, scheme="strang"), record=False).final
    assert error_norms(a, b)[0] < 1e-3


@pytest.mark.slow
def test_ewi_self_convergence_against_fine_reference():
    # tau = 1e-5, h = 2^-7 against Strang at tau = 5e-6, h = 2^-8
    V = {"kind": "square_well", "sampling": "projected"}
    g = Grid.from_mesh_size([(-16, 16)], 2.0 ** -7)
    ge = Grid.from_mesh_size([(-16, 16)], 2.0 ** -8)
    num = evolve(two_gaussons(g), V, cfg(tau=1e-5, T=1.0), record=False).final
    ref = evolve(two_gaussons(ge), V, cfg(tau=5e-6, T=1.0, scheme="strang"), record=False).final
    assert error_norms(num, ref)[0] < 1e-3
