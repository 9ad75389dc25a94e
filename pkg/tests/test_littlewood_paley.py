import numpy as np
import pytest
from scipy.special import gamma

from conftest import random_modes, random_solenoidal_oracle
from qhmhd.errors import DegenerateInputError, MeanViolationError, ResolutionError
from qhmhd.littlewood_paley import (
    BesovIndex,
    DyadicDecomposition,
    bernstein_check,
    besov_norm,
    block_norms,
    bony_decompose,
    chi,
    commutator_check,
    dyadic_block,
    gn_check,
    low_pass,
    max_block_index,
    phi,
    sobolev_norm,
)
from qhmhd.spectral import ScalarField, TorusGrid, norm


def chi_oracle(r):
    """Scalar re-derivation of the cutoff used by the blocks."""
    if r <= 1:
        return 1.0
    if r >= 2:
        return 0.0
    a = np.exp(1.0 / (r - 2.0))
    b = np.exp(-1.0 / (r - 1.0))
    return a / (a + b)


def cos_lp(p):
    """||cos(k x1)||_{L^p} over the torus, from the Beta integral of |cos|^p."""
    if np.isinf(p):
        return 1.0
    one_d = 2.0 * np.sqrt(np.pi) * gamma((p + 1) / 2) / gamma(p / 2 + 1)
    return (2 * np.pi * one_d) ** (1 / p)


@pytest.fixture
def dec64(grid64):
    return DyadicDecomposition(grid64)


def test_profile_shape():
    r = np.linspace(0, 3, 3001)
    c = chi(r)
    assert np.all(np.diff(c) <= 1e-15)
    assert np.all(c[r <= 1] == 1) and np.all(c[r >= 2] == 0)
    f = phi(r)
    assert np.all(f >= 0)
    assert np.all(f[(r < 0.5) | (r > 2)] == 0)
    for x in (1.1, 1.5, 1.9):
        assert chi(np.array([x]))[0] == pytest.approx(chi_oracle(x), abs=1e-15)
    assert chi_oracle(1.5) == pytest.approx(0.5, abs=1e-15)


def test_jmax():
    assert max_block_index(64) == 4
    assert max_block_index(128) == 5
    assert max_block_index(16) == 2
    for n in (8, 16, 32, 64, 128):
        j = max_block_index(n)
        assert 2 ** (j + 1) <= n / 2 < 2 ** (j + 2)


def test_partition_of_unity_on_resolved_radii(dec64):
    r = np.linspace(0, dec64.resolved_radius, 20001)
    total = chi(2 * r) + sum(phi(r / 2.0**j) for j in range(dec64.jmax + 1))
    assert np.max(np.abs(total - 1)) <= 1e-10


def test_constant_field_blocks(grid64, dec64):
    f = ScalarField.from_physical(grid64, 2.0)
    np.testing.assert_allclose(dyadic_block(f, -1, dec64).coeffs, f.coeffs, atol=0)
    for j in range(dec64.jmax + 1):
        assert np.max(np.abs(dyadic_block(f, j, dec64).coeffs)) == 0


def test_single_mode_blocks(grid64, dec64):
    x1, x2 = grid64.x
    f = ScalarField.from_physical(grid64, np.cos(3 * x1) + 0 * x2)
    w1, w2 = chi_oracle(1.5), 1 - chi_oracle(1.5)
    for j in dec64.indices:
        blk = dyadic_block(f, j, dec64)
        expect = {1: w1, 2: w2}.get(j, 0.0)
        np.testing.assert_allclose(blk.coeffs, expect * f.coeffs, atol=1e-15)
    assert w1 + w2 == pytest.approx(1.0, abs=1e-15)


def test_block_resolution_error(grid64, dec64):
    f = ScalarField.zeros(grid64)
    with pytest.raises(ResolutionError):
        dyadic_block(f, dec64.jmax + 1, dec64)
    with pytest.raises(ResolutionError):
        low_pass(f, dec64.jmax + 2, dec64)


def test_reconstruction_band_limited(grid64, dec64, rng):
    f = random_modes(rng, grid64, dec64.resolved_radius, k_lo=0)
    f = f + ScalarField.from_physical(grid64, 0.7)
    total = sum((dyadic_block(f, j, dec64) for j in dec64.indices), ScalarField.zeros(grid64))
    assert norm(total - f) <= 1e-10 * norm(f)
    assert norm(low_pass(f, dec64.jmax + 1, dec64) - f) <= 1e-10 * norm(f)


def test_low_pass_examples(grid64, dec64, rng):
    x1, x2 = grid64.x
    f8 = ScalarField.from_physical(grid64, np.cos(8 * x2) + 0 * x1)
    assert norm(low_pass(f8, 0, dec64)) < 1e-15
    f = random_modes(rng, grid64, 20)
    for j in range(dec64.jmax + 2):
        telescoped = sum((dyadic_block(f, k, dec64) for k in range(-1, j)), ScalarField.zeros(grid64))
        assert norm(low_pass(f, j, dec64) - telescoped) <= 1e-10 * norm(f)


def test_almost_orthogonality(grid64, dec64, rng):
    f = random_modes(rng, grid64, 20)
    for j in dec64.indices:
        for jp in dec64.indices:
            if abs(j - jp) >= 2:
                both = dyadic_block(dyadic_block(f, j, dec64), jp, dec64)
                assert np.max(np.abs(both.coeffs)) == 0


def test_besov_index():
    assert BesovIndex(2.1, 2, 2).lipschitz
    assert not BesovIndex(2.0, 2, 2).lipschitz
    assert BesovIndex(2.0, 2, 1).lipschitz
    assert BesovIndex(1.0, np.inf, 1).lipschitz
    with pytest.raises(ValueError):
        BesovIndex(1.0, 0.5, 2)
    with pytest.raises(ValueError):
        BesovIndex(1.0, 2, 0.9)


def test_besov_zero(grid64, dec64):
    assert besov_norm(ScalarField.zeros(grid64), BesovIndex(1.5, 2, 2), dec64) == 0


@pytest.mark.parametrize("s,p,r", [(1.0, 2, 2), (2.5, 4, 1), (-0.5, np.inf, 3), (0.0, 6, np.inf)])
def test_besov_single_mode_closed_form(grid64, dec64, s, p, r):
    x1, x2 = grid64.x
    f = ScalarField.from_physical(grid64, np.cos(3 * x1) + 0 * x2)
    c = {1: chi_oracle(1.5), 2: 1 - chi_oracle(1.5)}
    terms = np.array([2 ** (j * s) * c[j] * cos_lp(p) for j in (1, 2)])
    expect = terms.max() if np.isinf(r) else np.sum(terms**r) ** (1 / r)
    assert besov_norm(f, BesovIndex(s, p, r), dec64) == pytest.approx(expect, rel=1e-10)


def test_besov_shift_scales_blocks(grid64, dec64):
    x1, x2 = grid64.x
    f = ScalarField.from_physical(grid64, np.cos(3 * x1) + 0 * x2)
    raw = block_norms(f, dec64, 2)
    js = np.arange(-1, dec64.jmax + 1)
    a = 2.0 ** (js * 1.0) * raw
    b = 2.0 ** (js * 2.0) * raw
    nz = raw > 0
    np.testing.assert_allclose(b[nz] / a[nz], 2.0 ** js[nz], rtol=1e-14)


@pytest.mark.parametrize("s", [-1.0, 0.0, 0.5, 1.0, 2.0])
def test_besov_equivalent_to_sobolev(grid64, dec64, rng, s):
    for _ in range(3):
        f = random_modes(rng, grid64, dec64.resolved_radius)
        ratio = besov_norm(f, BesovIndex(s, 2, 2), dec64) / sobolev_norm(f, s)
        assert 0.25 <= ratio <= 4


def test_besov_monotone_in_s(grid64, dec64, rng):
    for _ in range(5):
        f = random_modes(rng, grid64, 18)
        for p, r in ((2, 2), (4, 1), (np.inf, np.inf)):
            vals = [besov_norm(f, BesovIndex(s, p, r), dec64) for s in (-1, 0, 0.5, 1, 2)]
            assert np.all(np.diff(vals) >= 0)


def test_bony_constant_factor(grid64, dec64, rng):
    u = ScalarField.from_physical(grid64, 1.7)
    v = random_modes(rng, grid64, dec64.resolved_radius)
    t_uv, t_vu, rem = bony_decompose(u, v, dec64)
    assert norm(t_uv + t_vu + rem - 1.7 * v) <= 1e-12 * norm(v)
    # the constant sits in Delta_{-1}, so it only multiplies blocks j >= 1 through T_u v
    expect = 1.7 * (v - dyadic_block(v, 0, dec64) - dyadic_block(v, -1, dec64))
    assert norm(t_uv - expect) <= 1e-12 * norm(v)


def test_bony_single_mode_square(grid64, dec64):
    x1, x2 = grid64.x
    u = ScalarField.from_physical(grid64, np.cos(3 * x1 + 2 * x2))
    parts = bony_decompose(u, u, dec64)
    direct = np.cos(3 * x1 + 2 * x2) ** 2
    np.testing.assert_allclose((parts[0] + parts[1] + parts[2]).physical(), direct, atol=1e-12)


def test_bony_random_pairs(grid64, dec64, rng):
    for _ in range(10):
        u = random_modes(rng, grid64, dec64.resolved_radius, k_lo=0)
        v = random_modes(rng, grid64, dec64.resolved_radius, k_lo=0)
        parts = bony_decompose(u, v, dec64)
        prod = ScalarField(grid64, grid64.fft(u.physical() * v.physical()) * grid64.dealias_mask)
        assert norm(parts[0] + parts[1] + parts[2] - prod) <= 1e-8 * norm(prod)


def test_bernstein_single_mode(grid64):
    x1, x2 = grid64.x
    for lam in (2, 5, 9):
        f = ScalarField.from_physical(grid64, np.cos(lam * x1) + 0 * x2)
        for k in (1, 2, 3):
            rep = bernstein_check(f, 2, 2, k)
            assert rep.lam == lam
            assert rep.annulus_ratio == pytest.approx(1.0, rel=1e-12)


def test_bernstein_annulus_mode_bound(grid64, rng):
    lam = 8.0
    for _ in range(5):
        f = random_modes(rng, grid64, 2 * lam, k_lo=lam / 2)
        rep = bernstein_check(f, 2, 2, 1, lam=lam)
        assert 0.5 <= rep.annulus_ratio <= 2.0


def test_bernstein_empty_spectrum(grid64):
    with pytest.raises(DegenerateInputError):
        bernstein_check(ScalarField.zeros(grid64), 2, 2, 1)
    with pytest.raises(ValueError):
        bernstein_check(ScalarField.from_physical(grid64, 1.0), 4, 2, 0, lam=1)


def test_gn_examples(grid64):
    x1, x2 = grid64.x
    u = ScalarField.from_physical(grid64, np.sin(x1) + 0 * x2)
    assert gn_check(u, 2) == pytest.approx(1.0, rel=1e-12)
    l4 = (2 * np.pi * (3 / 8) * 2 * np.pi) ** 0.25
    l2 = np.sqrt(2 * np.pi**2)
    assert gn_check(u, 4) == pytest.approx(l4 / (l2**0.5 * l2**0.5), rel=1e-12)


def test_gn_errors(grid64):
    with pytest.raises(DegenerateInputError):
        gn_check(ScalarField.zeros(grid64), 4)
    with pytest.raises(DegenerateInputError):
        gn_check(ScalarField.from_physical(grid64, 3.0), 4)
    x1, _ = grid64.x
    with pytest.raises(MeanViolationError):
        gn_check(ScalarField.from_physical(grid64, 1 + np.sin(x1)), 4)


def test_gn_stable_across_resolutions():
    maxima = []
    for n in (32, 64, 128):
        rng = np.random.default_rng(99)
        g = TorusGrid(n)
        vals = [gn_check(random_modes(rng, g, 6), p) for _ in range(30) for p in (4, 6)]
        assert np.all(np.isfinite(vals))
        maxima.append(max(vals))
    assert max(maxima) / min(maxima) - 1 < 1e-10


def test_commutator_bound_small_sample(grid64, dec64, rng):
    for _ in range(3):
        v = random_solenoidal_oracle(rng, grid64, 8)
        f = random_modes(rng, grid64, 8)
        lhs, rhs = commutator_check(v, f, BesovIndex(2, 2, 2), dec64)
        assert 0 < lhs <= 1e3 * rhs
