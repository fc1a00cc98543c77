import numpy as np
import pytest
from hypothesis import given, strategies as st

from debyewave.grid import ScalarField, SpaceTimeField, make_grid
from debyewave.littlewood_paley import (BesovProfile, block_norms, block_profile,
                                        build_filter_bank, chemin_lerner_norm, cutoff,
                                        dyadic_block, minkowski_check, norm_equivalence,
                                        product_estimate_probe, product_ratio, psi,
                                        random_bandlimited, sobolev_norm,
                                        sobolev_norm_inhomogeneous)

G1 = make_grid(1, 256, 64.0)
G2 = make_grid(2, 64, 32.0)
BANK1 = build_filter_bank(G1)
BANK2 = build_filter_bank(G2)


def test_cutoff_plateaus_and_support():
    r = np.linspace(0, 4, 4001)
    c = cutoff(r)
    assert np.all(c[r <= 0.75] == 1.0) and np.all(c[r >= 4 / 3] == 0.0)
    assert np.all(np.diff(c) <= 0)
    p = psi(r)
    assert np.all(p[(r < 0.75) | (r > 8 / 3)] == 0.0)
    assert np.all(p >= 0)


def test_bank_shells_and_partition():
    assert len(BANK1) >= 5
    assert BANK1.partition_residual() < 1e-10
    assert BANK2.partition_residual() < 1e-10
    assert BANK1.psi_hat[:, 0].sum() == 0.0  # zero mode excluded


@pytest.mark.parametrize("length", [0.1, 1.0, 1000.0])
def test_smallest_grid_hosts_three_shells(length):
    # k = 1..8 spans three octaves for any period
    bank = build_filter_bank(make_grid(1, 16, length))
    assert len(bank) >= 3 and bank.partition_residual() < 1e-10


def test_bank_depends_only_on_frequency():
    coarse = build_filter_bank(make_grid(1, 64, 20.0))
    fine = build_filter_bank(make_grid(1, 128, 20.0))
    for j in coarse.js:
        a = coarse.multiplier(j)
        b = fine.multiplier(j)
        shared = np.r_[0:32, -32:0]
        assert np.array_equal(a, b[shared])


def test_multiplier_index_range():
    with pytest.raises(ValueError):
        BANK1.multiplier(BANK1.j_max + 1)


def test_block_of_mode_inside_flat_region():
    # xi = 2 pi 14 / 64 = 1.374 lies in [4/3, 3/2], where psi_0 == 1
    f = G1.field(lambda x: np.cos(2 * np.pi * 14 * x / 64))
    assert np.abs(dyadic_block(f, BANK1, 0).samples - f.samples).max() < 1e-10
    assert dyadic_block(G1.zeros(), BANK1, 0).max_abs() == 0


@given(seed=st.integers(0, 2**32 - 1))
def test_blocks_sum_to_mean_free_part(seed):
    f = ScalarField(G1, np.random.default_rng(seed).standard_normal(G1.shape))
    total = sum(dyadic_block(f, BANK1, j).samples for j in BANK1.js)
    assert np.abs(total - (f.samples - f.mean())).max() <= 1e-9 * f.max_abs()


def test_blocks_two_apart_are_orthogonal(rng):
    f = ScalarField(G2, rng.standard_normal(G2.shape))
    for j in BANK2.js[:-2]:
        for jj in range(j + 2, BANK2.j_max + 1):
            twice = dyadic_block(dyadic_block(f, BANK2, j), BANK2, jj)
            assert twice.max_abs() < 1e-12


@pytest.mark.parametrize("s,expect", [(0.0, np.sqrt(32.0)),
                                      (1.0, 2 * np.pi / 64 * np.sqrt(32.0))])
def test_sobolev_norm_single_mode(s, expect):
    f = G1.field(lambda x: np.cos(2 * np.pi * x / 64))
    assert sobolev_norm(f, s) == pytest.approx(expect, rel=1e-12)
    assert sobolev_norm(G1.zeros(), s) == 0


def test_sobolev_norm_rejects_low_index():
    with pytest.raises(ValueError, match="dim/2"):
        sobolev_norm(G1.zeros(), -0.5)
    with pytest.raises(ValueError):
        sobolev_norm(G2.zeros(), -1.0)


def test_inhomogeneous_norm_counts_mean():
    f = G1.field(lambda x: 2.0 + 0 * x)
    assert sobolev_norm_inhomogeneous(f, 1.0) == pytest.approx(2 * np.sqrt(64.0))


def test_equivalence_constants_at_s0_are_exact():
    # two overlapping multipliers summing to 1: 1/2 <= a^2 + b^2 <= 1
    c, C = norm_equivalence(BANK1, 0.0)
    assert c == pytest.approx(1 / np.sqrt(2), rel=1e-6)
    assert C == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("bank", [BANK1, BANK2], ids=["1d", "2d"])
@pytest.mark.parametrize("s", [-0.25, 0.0, 0.5, 1.0])
def test_direct_and_block_norms_within_constants(bank, s, rng):
    c, C = norm_equivalence(bank, s)
    assert 0 < c <= C
    for _ in range(10):
        f = ScalarField(bank.grid, rng.standard_normal(bank.grid.shape))
        direct = sobolev_norm(f, s)
        blocks = block_profile(f, s, bank).norm
        assert c * direct * (1 - 1e-12) <= blocks <= C * direct * (1 + 1e-12)


def test_profile_csv_round_trip(rng):
    f = random_bandlimited(G1, rng)
    prof = block_profile(f, 0.5, BANK1)
    text = prof.to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "j,weighted_block_norm" and lines[-1].startswith("TOTAL,")
    back = BesovProfile.from_csv(text, s=0.5)
    assert np.array_equal(back.values, prof.values) and back.norm == pytest.approx(prof.norm)
    with pytest.raises(ValueError):
        BesovProfile(0.0, [0], [-1.0])


def test_chemin_lerner_constant_in_time(rng):
    f = random_bandlimited(G1, rng)
    times = np.linspace(0, 2.5, 26)
    u = SpaceTimeField.constant(f, times)
    ref = block_profile(f, 0.3, BANK1)
    sup = chemin_lerner_norm(u, np.inf, 0.3, BANK1)
    one = chemin_lerner_norm(u, 1, 0.3, BANK1)
    assert np.allclose(sup.values, ref.values, rtol=1e-12, atol=0)
    assert np.allclose(one.values, 2.5 * sup.values, rtol=1e-10, atol=0)
    zero = chemin_lerner_norm(SpaceTimeField.constant(G1.zeros(), times), 2, 0.0, BANK1)
    assert zero.norm == 0
    with pytest.raises(ValueError):
        chemin_lerner_norm(u, 3, 0.0, BANK1)


def test_block_norms_batched_matches_single(rng):
    frames = rng.standard_normal((3,) + G2.shape)
    batched = block_norms(frames, BANK2)
    for k in range(3):
        assert np.allclose(batched[k], block_norms(frames[k], BANK2), rtol=1e-13)


def test_minkowski_equality_and_zero(rng):
    times = np.linspace(0, 1, 11)
    f = random_bandlimited(G1, rng)
    tilde, plain = minkowski_check(SpaceTimeField.constant(f, times), 0.0, BANK1)
    assert tilde == pytest.approx(plain, rel=1e-10)
    assert minkowski_check(SpaceTimeField.constant(G1.zeros(), times), 0.0, BANK1) == (0.0, 0.0)


def test_minkowski_strict_for_disjoint_frequencies():
    times = np.linspace(0, 1, 3)
    x = G1.x
    low = np.cos(2 * np.pi * 2 * x / 64)
    high = np.cos(2 * np.pi * 40 * x / 64)
    u = SpaceTimeField(G1, times, np.stack([low, high, low]))
    tilde, plain = minkowski_check(u, 0.0, BANK1)
    assert tilde < plain * (1 - 1e-3)


def test_minkowski_on_random_fields(rng):
    times = np.linspace(0, 1, 9)
    for _ in range(100):
        u = SpaceTimeField(G1, times, rng.standard_normal((9,) + G1.shape))
        tilde, plain = minkowski_check(u, rng.uniform(-0.4, 1.0), BANK1)
        assert tilde <= plain * (1 + 1e-10)


def test_product_ratio_two_mode_closed_form():
    # f = g = cos(k.x): f g = 1/2 + cos(2 k.x)/2, so the ratio is 1/(2 sqrt(2) |xi| L)
    g = make_grid(2, 64, 32.0)
    x, y = g.coords
    f = ScalarField(g, np.cos(2 * np.pi * (3 * x + 4 * y) / 32))
    xi = 2 * np.pi * 5 / 32
    assert product_ratio(f, f, 0.0) == pytest.approx(1 / (2 * np.sqrt(2) * xi * 32), rel=1e-12)


def test_product_ratio_homogeneous(rng):
    f, h = random_bandlimited(G2, rng), random_bandlimited(G2, rng)
    assert product_ratio(2 * f, h, 0.3) == pytest.approx(product_ratio(f, h, 0.3), rel=1e-12)


def test_product_ratio_resolution_independent(rng):
    coarse = make_grid(2, 32, 16.0)
    fine = make_grid(2, 64, 16.0)
    f, h = random_bandlimited(coarse, rng), random_bandlimited(coarse, rng)

    def refine(a):
        ah = np.fft.fftn(a.samples)
        big = np.zeros(fine.shape, complex)
        idx = np.r_[0:16, -16:0]
        big[np.ix_(idx, idx)] = ah
        return ScalarField(fine, np.fft.ifftn(big).real * 4)

    r0 = product_ratio(f, h, 0.4)
    r1 = product_ratio(refine(f), refine(h), 0.4)
    assert abs(r1 - r0) < 1e-6 * r0


def test_product_probe_deterministic_and_range():
    a = product_estimate_probe(BANK2, 0.5, 5, seed=3)
    assert a > 0 and a == product_estimate_probe(BANK2, 0.5, 5, seed=3)
    for bad in (-1.0, 1.0):
        with pytest.raises(ValueError):
            product_estimate_probe(BANK2, bad, 5, 0)
    with pytest.raises(ValueError):
        product_estimate_probe(BANK2, 0.0, 0, 0)


def test_random_bandlimited_support(rng):
    f = random_bandlimited(G1, rng, kmin=8, kmax=20, stride=4)
    k = np.nonzero(np.abs(np.fft.fft(f.samples)) > 1e-12 * G1.n)[0]
    k = np.minimum(k, G1.n - k)
    assert np.all((k >= 8) & (k <= 20) & (k % 4 == 0))
    assert f.max_abs() == pytest.approx(1.0)
