import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from debyewave.grid import ScalarField, SpaceTimeField, make_grid
from debyewave.heat import (duhamel, duhamel_weights, heat_multiplier, heat_propagate, phi1,
                            phi2, smoothing_probe)
from debyewave.littlewood_paley import build_filter_bank, norm_equivalence, psi, random_bandlimited

G = make_grid(1, 128, 32.0)
BANK = build_filter_bank(G)
XI1 = 2 * np.pi / 32


def mode(k, grid=G):
    return grid.field(lambda x: np.cos(2 * np.pi * k * x / grid.length))


def test_multiplier_range_and_semigroup():
    m = heat_multiplier(G, 0.7)
    assert m.values[0] == 1.0 and np.all((m.values > 0) & (m.values <= 1))
    prod = heat_multiplier(G, 0.3) * heat_multiplier(G, 0.4)
    assert prod.t == pytest.approx(0.7)
    assert np.abs(prod.values - m.values).max() < 1e-14
    with pytest.raises(ValueError):
        heat_multiplier(G, -1e-3)


def test_identity_mode_and_constant():
    f = random_bandlimited(G, np.random.default_rng(0))
    assert np.abs(heat_propagate(f, 0.0).samples - f.samples).max() < 1e-12
    out = heat_propagate(mode(1), 1.0)
    assert np.abs(out.samples - np.exp(-XI1**2) * mode(1).samples).max() < 1e-12
    c = G.field(lambda x: 3.0 + 0 * x)
    assert np.abs(heat_propagate(c, 5.0).samples - 3.0).max() < 1e-12
    with pytest.raises(ValueError):
        heat_propagate(c, -1.0)


@given(a=st.floats(0, 3), b=st.floats(0, 3), seed=st.integers(0, 1000))
def test_semigroup_on_fields(a, b, seed):
    f = random_bandlimited(G, np.random.default_rng(seed))
    two = heat_propagate(heat_propagate(f, a), b)
    one = heat_propagate(f, a + b)
    assert np.abs(two.samples - one.samples).max() <= 1e-12 * max(one.max_abs(), 1e-300) + 1e-15


def test_mass_preserved(rng):
    f = ScalarField(G, rng.standard_normal(G.shape))
    assert heat_propagate(f, 2.0).mean() == pytest.approx(f.mean(), abs=1e-14)


@pytest.mark.parametrize("kind", ["gaussian", "trig"])
@pytest.mark.parametrize("t", [0.01, 0.5, 4.0])
def test_maximum_principle(kind, t):
    if kind == "gaussian":
        f = G.field(lambda x: np.exp(-((x - 16) ** 2) / 4))
    else:
        f = G.field(lambda x: 2 + np.cos(2 * np.pi * x / 32) + 0.5 * np.sin(6 * np.pi * x / 32))
    out = heat_propagate(f, t).samples
    eps = 1e-9 * f.max_abs()
    assert out.min() >= f.samples.min() - eps and out.max() <= f.samples.max() + eps


@pytest.mark.parametrize("z", [0.0, -1e-8, -0.05, -0.099, -0.101, -0.5, -3.0, -40.0, 0.07])
def test_phi_functions_match_quadrature(z):
    p1, _ = integrate.quad(lambda th: np.exp(z * (1 - th)), 0, 1, epsabs=0, epsrel=1e-13)
    p2, _ = integrate.quad(lambda th: np.exp(z * (1 - th)) * th, 0, 1, epsabs=0, epsrel=1e-13)
    assert phi1(z) == pytest.approx(p1, rel=1e-12)
    assert phi2(z) == pytest.approx(p2, rel=1e-12)


def test_duhamel_weights_limits():
    E, w0, w1 = duhamel_weights(np.array([0.0]), 0.2)
    assert (E[0], w0[0], w1[0]) == pytest.approx((1.0, 0.1, 0.1))


def test_duhamel_without_source_is_heat():
    f = random_bandlimited(G, np.random.default_rng(2))
    times = np.linspace(0, 1, 21)
    out = duhamel(f, SpaceTimeField.constant(G.zeros(), times))
    for k in (0, 7, 20):
        ref = heat_propagate(f, times[k]).samples
        assert np.abs(out.frame(k).samples - ref).max() < 1e-12


def test_duhamel_constant_mode_source():
    k = 3
    xi2 = (k * XI1) ** 2
    times = np.linspace(0, 2, 41)
    out = duhamel(G.zeros(), SpaceTimeField.constant(mode(k), times))
    for n, t in enumerate(times):
        expect = (1 - np.exp(-xi2 * t)) / xi2 * mode(k).samples
        assert np.abs(out.frame(n).samples - expect).max() < 1e-8


def test_duhamel_dc_source():
    times = np.linspace(0, 1, 11)
    c = G.field(lambda x: 0.7 + 0 * x)
    out = duhamel(G.zeros(), SpaceTimeField.constant(c, times))
    assert np.abs(out.values - 0.7 * times[:, None]).max() < 1e-10


def test_duhamel_mass_linearity(rng):
    times = np.linspace(0, 1, 26)
    vals = rng.standard_normal((26,) + G.shape)
    src = SpaceTimeField(G, times, vals)
    u0 = ScalarField(G, rng.standard_normal(G.shape))
    out = duhamel(u0, src)
    means = vals.mean(axis=1)
    for k in range(26):
        expect = u0.mean() + np.trapezoid(means[: k + 1], times[: k + 1])
        assert out.frame(k).mean() == pytest.approx(expect, abs=1e-10)


def _time_source(nt):
    times = np.linspace(0, 1, nt)
    x = G.x
    vals = (np.sin(3 * times)[:, None] * np.cos(2 * np.pi * 4 * x / 32)
            + np.cos(5 * times)[:, None] * np.cos(2 * np.pi * 9 * x / 32)
            + times[:, None] ** 2)
    return SpaceTimeField(G, times, vals)


def test_duhamel_order_two():
    u0 = mode(2)
    ref = duhamel(u0, _time_source(8 * 40 + 1)).frame(-1).samples
    e1 = np.abs(duhamel(u0, _time_source(41)).frame(-1).samples - ref).max()
    e2 = np.abs(duhamel(u0, _time_source(81)).frame(-1).samples - ref).max()
    assert 3.5 <= e1 / e2 <= 4.5


def test_duhamel_grid_mismatch():
    other = make_grid(1, 64, 32.0)
    with pytest.raises(ValueError):
        duhamel(other.zeros(), SpaceTimeField.constant(G.zeros(), [0.0, 0.1]))


def test_smoothing_single_mode_sup_bounded():
    for k in (1, 5, 30):
        assert smoothing_probe(mode(k), 0.0, 1.0, np.inf, BANK) <= 1 + 1e-12


@pytest.mark.parametrize("q", [1, 2])
@pytest.mark.parametrize("sigma", [0.0, 0.5])
def test_smoothing_single_mode_closed_form(q, sigma):
    k, T = 6, 0.8
    xi = k * XI1
    decay = (1 - np.exp(-q * xi**2 * T)) / (q * xi**2)
    blocks = np.array([psi(xi * 2.0**-j) for j in BANK.js]) * decay ** (1 / q)
    weights = 2.0 ** (BANK.js * (sigma + 2 / q))
    expect = np.linalg.norm(weights * blocks) / xi**sigma
    assert smoothing_probe(mode(k), sigma, T, q, BANK) == pytest.approx(expect, rel=1e-9)


def test_smoothing_saturates_in_time():
    k = 4
    T = 10 / (k * XI1) ** 2
    r1 = smoothing_probe(mode(k), 0.0, T, 1, BANK)
    r2 = smoothing_probe(mode(k), 0.0, 2 * T, 1, BANK)
    assert r1 <= r2 < 1.05 * r1


@pytest.mark.parametrize("q", [1, 2, np.inf])
def test_smoothing_bounded_uniformly_in_time(q):
    # per block |Delta_j e^{tD} f| <= exp(-(3/4 2^j)^2 t) |Delta_j f|, which gives a T-free bound
    sigma = 0.0
    c_low = (3 / 4) ** 2
    factor = {1: 1 / c_low, 2: np.sqrt(1 / (2 * c_low)), np.inf: 1.0}[q]
    bound = factor * norm_equivalence(BANK, sigma)[1]
    rng = np.random.default_rng(11)
    fields = [random_bandlimited(G, rng) for _ in range(50)]
    for T in (0.1, 1.0, 10.0):
        worst = max(smoothing_probe(f, sigma, T, q, BANK) for f in fields)
        assert worst <= bound * (1 + 1e-9)


def test_smoothing_rejects_bad_input():
    with pytest.raises(ValueError):
        smoothing_probe(mode(1), 0.0, 1.0, 3, BANK)
    with pytest.raises(ValueError):
        smoothing_probe(mode(1), 0.0, 0.0, 1, BANK)
    with pytest.raises(ValueError):
        smoothing_probe(G.zeros(), 0.0, 1.0, 1, BANK)
