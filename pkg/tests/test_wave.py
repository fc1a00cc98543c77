import warnings

import numpy as np
import pytest
from scipy import integrate

from debyewave.grid import ScalarField, SpaceTimeField, make_grid
from debyewave.littlewood_paley import build_filter_bank, random_bandlimited
from debyewave.wave import (WaveState, WrapWarning, characteristic_gradient, pde_residual,
                            propagate, spectral_shift, strichartz_energy_probe, support_width,
                            wave_energy, wave_gradient, wave_solve, wave_weights, wraps)

G = make_grid(1, 512, 64.0)


def gauss(x, c=32.0, w=2.0):
    return np.exp(-((x - c) ** 2) / (2 * w**2))


def zeros_in_time(grid, T, nt):
    return SpaceTimeField.constant(grid.zeros(), np.linspace(0, T, nt))


@pytest.mark.parametrize("w", [0.0, 1e-4, 0.5, 1.9, 2.1, 7.0, 80.0])
def test_step_weights_match_quadrature(w):
    h = 0.1
    ww = wave_weights(np.array([w]), h)

    def kern(s):  # sin(w s)/w and its time derivative
        return (np.sin(w * s) / w if w else s), np.cos(w * s)

    def q(f):
        return integrate.quad(f, 0, h, epsabs=1e-17, epsrel=1e-12, limit=200)[0]

    a_start = q(lambda tau: kern(h - tau)[0] * (1 - tau / h))
    a_end = q(lambda tau: kern(h - tau)[0] * tau / h)
    b_start = q(lambda tau: kern(h - tau)[1] * (1 - tau / h))
    b_end = q(lambda tau: kern(h - tau)[1] * tau / h)
    got = (ww.a_start[0], ww.a_end[0], ww.b_start[0], ww.b_end[0])
    assert got == pytest.approx((a_start, a_end, b_start, b_end), rel=1e-10, abs=1e-16)
    assert ww.c[0] == pytest.approx(np.cos(w * h))
    assert ww.sw[0] == pytest.approx(np.sin(w * h) / w if w else h)


def test_free_wave_splits_in_two():
    T = 10.0
    V0 = G.field(gauss)
    u = zeros_in_time(G, T, 101)
    S = wave_solve(u, V0, G.zeros())
    for k, t in enumerate(u.times):
        expect = 0.5 * (gauss(G.x + t) + gauss(G.x - t))
        assert np.abs(S.frame(k).samples - expect).max() < 1e-8


def test_constant_velocity_gives_linear_growth():
    u = zeros_in_time(G, 1.0, 11)
    with pytest.warns(WrapWarning):
        S = wave_solve(u, G.zeros(), G.field(lambda x: 1.0 + 0 * x))
    assert np.abs(S.values - u.times[:, None]).max() < 1e-10


def test_constant_source_carries_one_half():
    times = np.linspace(0, 1.5, 31)
    u = SpaceTimeField.constant(G.field(lambda x: 1.0 + 0 * x), times)
    with pytest.warns(WrapWarning):
        S = wave_solve(u, G.zeros(), G.zeros())
    assert np.abs(S.values - 0.5 * times[:, None] ** 2).max() < 1e-8


def test_gradient_of_even_data_is_odd():
    u = zeros_in_time(G, 5.0, 51)
    (dS,) = wave_gradient(u, G.field(gauss), G.zeros())
    # reflect about x = 32: index i -> 512 - i (mod n)
    refl = np.roll(dS.values[:, ::-1], 1, axis=1)
    assert np.abs(dS.values + refl).max() < 1e-9


def test_zero_data_zero_solution():
    (dS,) = wave_gradient(zeros_in_time(G, 1.0, 5), G.zeros(), G.zeros())
    assert np.abs(dS.values).max() == 0


def test_right_moving_wave():
    g = G.field(gauss)
    dg = G.field(lambda x: -(x - 32) / 4 * gauss(x))
    u = zeros_in_time(G, 8.0, 41)
    S = wave_solve(u, g, -dg)
    (dS,) = wave_gradient(u, g, -dg)
    for k, t in enumerate(u.times):
        assert np.abs(S.frame(k).samples - gauss(G.x - t)).max() < 1e-8
        expect = -(G.x - t - 32) / 4 * gauss(G.x - t)
        assert np.abs(dS.frame(k).samples - expect).max() < 1e-8


def test_wrap_detection():
    assert not wraps(10.0, 5.0, 64.0) and wraps(10.0, 27.0, 64.0)
    assert support_width(G.field(lambda x: ((x > 10) & (x < 20)).astype(float))) == \
        pytest.approx(9.875)
    u = zeros_in_time(G, 40.0, 11)
    with pytest.warns(WrapWarning):
        wave_solve(u, G.field(gauss), G.zeros())
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        wave_solve(zeros_in_time(G, 10.0, 11), G.field(gauss), G.zeros())


@pytest.mark.parametrize("dim", [1, 2])
def test_free_energy_conserved(dim):
    g = make_grid(dim, 64, 16.0)
    rng = np.random.default_rng(5)
    state = WaveState(random_bandlimited(g, rng), random_bandlimited(g, rng))
    e0 = wave_energy(state)
    for _ in range(200):
        state = propagate(state, 0.01)
        assert abs(state.energy() - e0) <= 1e-10 * e0
    assert state.t == pytest.approx(2.0)


def test_time_reversal():
    rng = np.random.default_rng(6)
    V0, V1 = random_bandlimited(G, rng), random_bandlimited(G, rng)
    u = zeros_in_time(G, 3.0, 31)
    with pytest.warns(WrapWarning):
        S, St = wave_solve(u, V0, V1, return_velocity=True)
    with pytest.warns(WrapWarning):
        R, Rt = wave_solve(u, S.frame(-1), -St.frame(-1), return_velocity=True)
    assert np.abs(R.frame(-1).samples - V0.samples).max() < 1e-9
    assert np.abs(Rt.frame(-1).samples + V1.samples).max() < 1e-9


def _smooth_source(grid, nt, T=1.0):
    times = np.linspace(0, T, nt)
    x = grid.x
    vals = np.cos(2 * times)[:, None] * gauss(x, w=3.0) + times[:, None] * gauss(x, c=28.0)
    return SpaceTimeField(grid, times, vals)


def test_pde_residual_second_order():
    g = make_grid(1, 256, 64.0)
    V0 = g.field(lambda x: 0.3 * gauss(x))
    res = []
    for nt in (41, 81):
        u = _smooth_source(g, nt)
        res.append(pde_residual(wave_solve(u, V0, g.zeros()), u))
    assert 3.5 <= res[0] / res[1] <= 4.5


def test_spectral_shift_is_translation():
    f = G.field(gauss)
    assert np.abs(spectral_shift(f.samples, G, 3.3) - gauss(G.x + 3.3)).max() < 1e-12


def test_characteristic_form_agrees():
    g = make_grid(1, 256, 64.0)
    u = _smooth_source(g, 401)
    V0 = g.field(lambda x: 0.5 * gauss(x, w=2.5))
    V1 = g.field(lambda x: 0.2 * gauss(x, c=30.0))
    (spec,) = wave_gradient(u, V0, V1)
    char = characteristic_gradient(u, V0, V1)
    assert np.abs(spec.values - char.values).max() < 1e-6


BANK2 = build_filter_bank(make_grid(2, 32, 16.0))


def test_strichartz_free_single_mode():
    g = BANK2.grid
    x, y = g.coords
    V0 = ScalarField(g, np.cos(2 * np.pi * (2 * x + y) / 16))
    u = zeros_in_time(g, 2.0, 21)
    assert strichartz_energy_probe(u, V0, g.zeros(), 0.0, BANK2) <= 1 + 1e-9


def test_strichartz_constant_mode_closed_form():
    g = BANK2.grid
    x, y = g.coords
    T = 1.3
    times = np.linspace(0, T, 27)
    u = SpaceTimeField.constant(ScalarField(g, np.cos(2 * np.pi * 3 * x / 16)), times)
    w = 2 * np.pi * 3 / 16
    # |grad S_hat| = (1 - cos w t)/w |u_hat|; the source norm is T |u_hat|
    expect = np.max(1 - np.cos(w * times)) / w / T
    got = strichartz_energy_probe(u, g.zeros(), g.zeros(), 0.0, BANK2)
    assert got == pytest.approx(expect, rel=1e-9)


def test_strichartz_homogeneous_and_degenerate():
    g = BANK2.grid
    rng = np.random.default_rng(8)
    u = SpaceTimeField(g, np.linspace(0, 1, 11), rng.standard_normal((11,) + g.shape))
    V0, V1 = random_bandlimited(g, rng), random_bandlimited(g, rng)
    r = strichartz_energy_probe(u, V0, V1, 0.0, BANK2)
    r7 = strichartz_energy_probe(u * 7.0, V0 * 7.0, V1 * 7.0, 0.0, BANK2)
    assert r7 == pytest.approx(r, rel=1e-12)
    with pytest.raises(ValueError):
        strichartz_energy_probe(u * 0.0, g.zeros(), g.zeros(), 0.0, BANK2)


def test_strichartz_ratio_bounded():
    # each mode conserves |xi V|^2 + |V_t|^2 and the source enters by Minkowski,
    # so the ratio cannot exceed 1
    g = BANK2.grid
    rng = np.random.default_rng(9)
    worst = {}
    for T in (0.5, 1.0, 2.0):
        times = np.linspace(0, T, int(round(T / 0.05)) + 1)
        ratios = []
        for _ in range(50):
            u = SpaceTimeField(g, times, np.cos(rng.uniform(0, 6) * times)[:, None, None]
                               * random_bandlimited(g, rng).samples)
            V0, V1 = random_bandlimited(g, rng), random_bandlimited(g, rng)
            ratios.append(strichartz_energy_probe(u, V0, V1, 0.0, BANK2))
        worst[T] = max(ratios)
    assert max(worst.values()) <= 1 + 1e-9
    assert min(worst.values()) > 0.1
