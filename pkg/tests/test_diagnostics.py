import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logse import ConvergenceReport, Grid, energy, error_norms, fit_order, mass
from logse.diagnostics import (core_radius, estimate_regularity, split_centroids,
                               vortex_census)
from logse.initial_data import gaussian, solve_vortex_profile, tanh_datum, vortex_dipole
from logse.spectral import SpectralField, forward_transform


def test_mass_and_energy_of_gaussian():
    # for exp(-x^2/2) the kinetic and the rho ln rho terms cancel, leaving -sqrt(pi)
    g = Grid.line(-16, 16, 512)
    psi = gaussian(g)
    assert abs(mass(psi) - np.sqrt(np.pi)) < 1e-12
    assert abs(energy(psi, 0.0, 1.0) + np.sqrt(np.pi)) < 1e-10
    assert abs(energy(psi, 2.0, 0.0) - (np.sqrt(np.pi) / 2 + 2 * np.sqrt(np.pi))) < 1e-10


def test_energy_handles_zeros():
    g = Grid.line(-4, 4, 32)
    zero = SpectralField(g, np.zeros(32, complex))
    assert mass(zero) == 0 and energy(zero, 1.0, -1.0) == 0


def test_error_norms_examples():
    g = Grid.line(-np.pi, np.pi, 16)
    a = SpectralField(g, np.zeros(16, complex))
    b = a.copy()
    b.coeffs[8 + 3] = 1.0
    l2, h1 = error_norms(a, b)
    assert np.isclose(l2, np.sqrt(2 * np.pi))
    assert np.isclose(h1, np.sqrt(2 * np.pi * 10))
    fine = SpectralField(Grid.line(-np.pi, np.pi, 64), np.zeros(64, complex))
    assert np.allclose(error_norms(fine, b), (l2, h1))
    with pytest.raises(ValueError):
        error_norms(a, SpectralField(Grid.line(-1, 1, 16), a.coeffs))


def _random_field(seed, n=32):
    rng = np.random.default_rng(seed)
    return SpectralField(Grid.line(-2, 2, n), rng.standard_normal(n) + 1j * rng.standard_normal(n))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_error_norms_metric(seed):
    a, b, c = (_random_field(seed + k) for k in range(3))
    ab, ba = np.array(error_norms(a, b)), np.array(error_norms(b, a))
    assert np.allclose(ab, ba)
    ac, cb = np.array(error_norms(a, c)), np.array(error_norms(c, b))
    assert np.all(ab <= ac + cb + 1e-12)
    assert np.all(ab[0] <= ab[1] + 1e-12)


def test_fit_order_synthetic():
    taus = 0.1 * 2.0 ** -np.arange(6)
    assert np.isclose(fit_order(taus, 3 * taus ** 2), 2.0)
    bent = np.where(taus > 0.04, 50 * taus ** 0.5, 3 * taus ** 2)
    assert np.isclose(fit_order(taus, bent), 2.0)
    assert abs(fit_order(taus, bent, drop_coarse=0) - 2.0) > 0.5
    rng = np.random.default_rng(0)
    for _ in range(20):
        noisy = taus ** 1.5 * np.exp(rng.uniform(-0.05, 0.05, taus.size))
        assert abs(fit_order(taus, noisy) - 1.5) < 0.1
    with pytest.raises(ValueError):
        fit_order(taus[:2], taus[:2])
    with pytest.raises(ValueError):
        fit_order([1, 1, 0.5], [1, 2, 3])
    with pytest.raises(ValueError):
        fit_order(taus[:3], [1, 0, 1])


def test_regularity_synthetic_tail():
    n = 1024
    g = Grid.line(-16, 16, n, "neumann")
    l = np.arange(n + 1)
    c = np.where(l % 2 == 1, np.maximum(l, 1.0) ** -4.0, 0) + 0j
    est = estimate_regularity(SpectralField(g, c))
    assert abs(est.decay - 4) < 1e-10 and abs(est.sobolev_index - 3.5) < 1e-10
    assert not est.spectral
    with pytest.raises(ValueError):
        estimate_regularity(SpectralField(Grid.line(-1, 1, 8), np.zeros(8, complex)))


def test_regularity_flags_smooth_data():
    g = Grid.line(-16, 16, 256, "neumann")
    gauss = forward_transform(np.exp(-g.nodes(0) ** 2 / 8) + 0j, g)
    assert estimate_regularity(gauss).spectral
    # tanh is flat to 1e-13 at the walls, so the datum itself is spectrally resolved
    assert estimate_regularity(tanh_datum(Grid.line(-16, 16, 2048, "neumann"))).spectral
    x = Grid.line(-16, 16, 2048, "neumann").nodes(0)
    kink = forward_transform(x * np.abs(x) * np.exp(-x ** 2) + 0j, Grid.line(-16, 16, 2048, "neumann"))
    est = estimate_regularity(kink)
    assert not est.spectral and abs(est.decay - 3) < 0.3


def test_report_roundtrip(tmp_path):
    rep = ConvergenceReport("tau")
    for tau in (0.1, 0.05, 0.025):
        rep.add(tau, 0.1, tau ** 2, tau, ray="ini1")
    assert np.isclose(rep.fit("ini1", rep.rows, "tau", "e_l2"), 2.0)
    assert len(rep.select(tau=0.05)) == 1
    rep.write(tmp_path / "r")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "tau,h,e_l2,e_h1" and len(lines) == 4
    assert float(lines[2].split(",")[2]) == 0.05 ** 2
    side = json.loads((tmp_path / "r.json").read_text())
    assert side["fit_ranges"]["ini1"] == {"param": "tau", "norm": "e_l2", "range": [0.025, 0.1]}
    assert rep.sort().rows[0]["tau"] == 0.025


def test_vortex_probes():
    g = Grid.square(-16, 16, 64, "neumann")
    psi = vortex_dipole(g, solve_vortex_profile(16.0), 1.0)
    census = sorted(vortex_census(psi))
    assert [q for *_, q in census] == [-1, 1]
    assert np.allclose([c[:2] for c in census], [(-1, 0), (1, 0)], atol=0.5)
    assert 0 < core_radius(psi) < 2
    with pytest.raises(ValueError):
        vortex_census(gaussian(Grid.line(-1, 1, 8)))


def test_split_centroids():
    g = Grid.line(-16, 16, 512)
    x = g.nodes(0)
    psi = forward_transform(np.exp(-(x - 3) ** 2) + np.exp(-(x + 5) ** 2) + 0j, g)
    left, right = split_centroids(psi)
    assert np.isclose(left, -5, atol=1e-6) and np.isclose(right, 3, atol=1e-6)
