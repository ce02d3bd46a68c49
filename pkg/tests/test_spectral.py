"""Tests for the radial spectral core: transforms, bands, derivatives, norms."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from radnlw.errors import DivergentWeight
from radnlw.spectral import (
    BandSpec,
    RadialField,
    RadialGrid,
    SpectralField,
    apply_band,
    forward_transform,
    fourier_values,
    fractional_derivative,
    inverse_transform,
    sobolev_norm,
    weighted_norm,
)


def smooth_random_field(grid, rho_max, seed, decay=2.0):
    """Band-limited random field with smoothly decaying mode amplitudes."""
    rng = np.random.default_rng(seed)
    rho = grid.frequencies
    c = rng.standard_normal(len(rho)) * np.exp(-decay * rho)
    c[rho > rho_max] = 0.0
    return SpectralField(grid, c)


# ---------------------------------------------------------------------------
# grid and type invariants


def test_grid_validation():
    with pytest.raises(ValueError):
        RadialGrid(10.0, 7)
    with pytest.raises(ValueError):
        RadialGrid(10.0, 48)
    with pytest.raises(ValueError):
        RadialGrid(-1.0, 16)
    g = RadialGrid(16.0, 32)
    assert g.spacing == 0.5
    assert len(g.nodes) == 31
    assert np.isclose(g.frequencies[0], np.pi / 16.0)


def test_field_rejects_nonfinite():
    g = RadialGrid(8.0, 16)
    vals = np.zeros(15)
    vals[3] = np.nan
    with pytest.raises(ValueError):
        RadialField(g, vals)


# ---------------------------------------------------------------------------
# transform pair


def test_forward_zero_field():
    g = RadialGrid(8.0, 32)
    c = forward_transform(RadialField.zero(g))
    assert np.all(c.coefficients == 0.0)


def test_forward_first_mode():
    # u = sin(pi r / R)/r is the first sine mode of w.
    g = RadialGrid(8.0, 32)
    u = RadialField(g, np.sin(np.pi * g.nodes / 8.0) / g.nodes)
    c = forward_transform(u).coefficients
    assert abs(c[0] - 1.0) < 1e-13
    assert np.max(np.abs(c[1:])) < 1e-13


def test_inverse_single_mode():
    g = RadialGrid(8.0, 32)
    c = np.zeros(31)
    c[2] = 1.0  # mode m = 3
    u = inverse_transform(SpectralField(g, c))
    expected = np.sin(3.0 * np.pi * g.nodes / 8.0) / g.nodes
    assert np.max(np.abs(u.values - expected)) < 1e-13


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_round_trip(seed):
    g = RadialGrid(16.0, 64)
    c = smooth_random_field(g, rho_max=8.0, seed=seed)
    u = inverse_transform(c)
    back = inverse_transform(forward_transform(u))
    scale = np.max(np.abs(u.values)) or 1.0
    assert np.max(np.abs(back.values - u.values)) < 1e-12 * scale


def test_gaussian_transform_against_quadrature_oracle():
    # u = exp(-r^2) on R = 20, N_r = 4096.  The oracle is the truncated radial
    # Fourier integral uhat(rho) = sqrt(2/pi) rho^{-1} int_0^R sin(r rho) r u dr
    # evaluated by adaptive quadrature; its closed form is 2^{-3/2} e^{-rho^2/4}.
    g = RadialGrid(20.0, 4096)
    u = RadialField(g, np.exp(-(g.nodes**2)))
    uhat = fourier_values(forward_transform(u))

    rho_all = g.frequencies
    sel = rho_all <= 10.0
    probe = np.unique(np.concatenate([np.where(sel)[0][::7], [np.sum(sel) - 1]]))
    oracle = np.empty(len(probe))
    for i, m in enumerate(probe):
        rho = rho_all[m]
        val, _ = quad(lambda r, rho=rho: np.sin(r * rho) * r * np.exp(-r * r),
                      0.0, 20.0, limit=400)
        oracle[i] = np.sqrt(2.0 / np.pi) * val / rho
    closed = 2.0**-1.5 * np.exp(-rho_all[probe] ** 2 / 4.0)
    assert np.max(np.abs(oracle - closed)) < 1e-13  # oracle sanity

    peak = np.max(np.abs(oracle))
    # sup-relative over the band; float64 cannot express 1e-8 pointwise
    # relative accuracy where uhat has decayed below ~1e-12 of its peak
    assert np.max(np.abs(uhat[probe] - oracle)) < 1e-8 * peak
    good = np.abs(oracle) > 1e-4 * peak
    rel = np.abs(uhat[probe][good] - oracle[good]) / np.abs(oracle[good])
    assert np.max(rel) < 1e-8


# ---------------------------------------------------------------------------
# bands


def test_band_containing_support_is_identity():
    g = RadialGrid(16.0, 64)
    c = smooth_random_field(g, rho_max=4.0, seed=1)
    out = apply_band(c, BandSpec.annulus(0.0, 5.0))
    assert np.array_equal(out.coefficients, c.coefficients)


def test_band_disjoint_from_support_is_zero():
    g = RadialGrid(16.0, 64)
    c = smooth_random_field(g, rho_max=4.0, seed=2)
    out = apply_band(c, BandSpec.annulus(5.0, 9.0))
    assert np.all(out.coefficients == 0.0)


def test_sharp_band_half_open_edges():
    g = RadialGrid(np.pi * 16, 64)  # rho_m = m/16, so rho_16 = 1 exactly
    c = SpectralField(g, np.ones(63))
    kept = apply_band(c, BandSpec.annulus(0.5, 1.0)).coefficients
    rho = g.frequencies
    assert kept[np.argmin(np.abs(rho - 1.0))] == 0.0  # mode at a2 excluded
    assert kept[np.argmin(np.abs(rho - 0.5))] == 1.0  # mode at a1 included


def test_sharp_bands_idempotent_and_disjoint():
    g = RadialGrid(16.0, 64)
    c = smooth_random_field(g, rho_max=12.0, seed=3)
    band = BandSpec.annulus(1.0, 3.0)
    once = apply_band(c, band)
    twice = apply_band(once, band)
    assert np.array_equal(once.coefficients, twice.coefficients)
    other = apply_band(once, BandSpec.annulus(3.0, 8.0))
    assert np.all(other.coefficients == 0.0)


def test_dyadic_partition_of_unity():
    g = RadialGrid(16.0, 128)
    c = smooth_random_field(g, rho_max=np.inf, seed=4, decay=0.2)
    top = 1
    while top < g.nyquist:
        top *= 2
    shells = [1] + [2**j for j in range(1, int(np.log2(top)) + 1)]
    total = np.zeros_like(c.coefficients)
    for L in shells:
        total += apply_band(c, BandSpec.dyadic(L)).coefficients
    assert np.max(np.abs(total - c.coefficients)) < 1e-14 * np.max(np.abs(c.coefficients))


def test_low_high_split_complementary():
    g = RadialGrid(16.0, 64)
    c = smooth_random_field(g, rho_max=np.inf, seed=5, decay=0.3)
    low = apply_band(c, BandSpec.low(2))
    high = apply_band(c, BandSpec.high(2))
    assert np.array_equal(low.coefficients + high.coefficients, c.coefficients)
    rho = g.frequencies
    m_edge = np.where(rho <= 2.0)[0][-1]
    assert low.coefficients[m_edge] == c.coefficients[m_edge]


# ---------------------------------------------------------------------------
# fractional derivative


def test_fractional_derivative_identity_and_group():
    g = RadialGrid(16.0, 64)
    c = smooth_random_field(g, rho_max=10.0, seed=6)
    assert np.array_equal(fractional_derivative(c, 0.0).coefficients, c.coefficients)
    back = fractional_derivative(fractional_derivative(c, 1.0), -1.0)
    assert np.max(np.abs(back.coefficients - c.coefficients)) < 1e-14


def test_bernstein_ratio_on_shell():
    g = RadialGrid(16.0, 256)
    for L in (2, 4, 8):
        c = apply_band(smooth_random_field(g, np.inf, seed=L, decay=0.05),
                       BandSpec.dyadic(L))
        for s in (0.5, 1.0, -1.0):
            num = sobolev_norm(fractional_derivative(c, s), 0.0)
            den = sobolev_norm(c, 0.0)
            ratio = num / den
            lo = min((L / 2.0) ** s, (2.0 * L) ** s)
            hi = max((L / 2.0) ** s, (2.0 * L) ** s)
            assert lo * (1 - 1e-12) <= ratio <= hi * (1 + 1e-12)


# ---------------------------------------------------------------------------
# norms


def test_weighted_norm_zero():
    g = RadialGrid(8.0, 32)
    assert weighted_norm(RadialField.zero(g), 0.0, 2.0) == 0.0


def test_weighted_norm_single_mode_l2():
    # ||u||_{L^2}^2 = 2 pi R c_m^2 for a unit single mode.
    g = RadialGrid(8.0, 64)
    c = np.zeros(63)
    c[4] = 1.0
    u = inverse_transform(SpectralField(g, c))
    expected = np.sqrt(2.0 * np.pi * 8.0)
    assert abs(weighted_norm(u, 0.0, 2.0) - expected) < 1e-10 * expected


def test_weighted_norm_gaussian_against_quadrature_oracle():
    # alpha = -1/6, p = 6, u = exp(-r^2):
    # int |x|^{-1} u^6 dx = 4 pi int r exp(-6 r^2) dr = pi/3, frozen below.
    g = RadialGrid(20.0, 4096)
    u = RadialField(g, np.exp(-(g.nodes**2)))
    oracle = (np.pi / 3.0) ** (1.0 / 6.0)
    got = weighted_norm(u, -1.0 / 6.0, 6.0)
    assert abs(got - oracle) / oracle < 1e-6


def test_weighted_norm_sup():
    g = RadialGrid(8.0, 64)
    u = RadialField(g, np.exp(-g.nodes))
    expected = np.max(g.nodes**0.5 * np.exp(-g.nodes))
    assert abs(weighted_norm(u, 0.5, np.inf) - expected) < 1e-14


def test_weighted_norm_divergent_weight():
    g = RadialGrid(8.0, 32)
    u = RadialField(g, np.exp(-g.nodes))
    with pytest.raises(DivergentWeight):
        weighted_norm(u, -2.0, 2.0)
    with pytest.raises(DivergentWeight):
        weighted_norm(u, -0.5, np.inf)


def test_hardy_style_norm_matches_oracle():
    # alpha*p + 2 = 0 exercises the origin-limit branch: ||u/|x|||_{L^2}.
    g = RadialGrid(20.0, 2048)
    u = RadialField(g, np.exp(-(g.nodes**2)))
    val, _ = quad(lambda r: np.exp(-2.0 * r * r), 0.0, 20.0, limit=200)
    oracle = np.sqrt(4.0 * np.pi * val)
    got = weighted_norm(u, -1.0, 2.0)
    assert abs(got - oracle) / oracle < 1e-8


def test_sobolev_zero_and_parseval():
    g = RadialGrid(16.0, 128)
    assert sobolev_norm(SpectralField.zero(g), 1.0) == 0.0
    c = smooth_random_field(g, rho_max=np.inf, seed=7, decay=0.1)
    u = inverse_transform(c)
    a = sobolev_norm(c, 0.0, homogeneous=True)
    b = weighted_norm(u, 0.0, 2.0)
    assert abs(a * a - b * b) < 1e-10 * b * b


def test_sobolev_shell_ratio():
    g = RadialGrid(16.0, 256)
    L = 4
    c = apply_band(smooth_random_field(g, np.inf, seed=8, decay=0.05),
                   BandSpec.dyadic(L))
    for s in (0.75, 1.5):
        ratio = sobolev_norm(c, s) / sobolev_norm(c, 0.0)
        assert (L / 2.0) ** s <= ratio * (1 + 1e-12)
        assert ratio <= (2.0 * L) ** s * (1 + 1e-12)


def test_radial_sobolev_embedding_constant():
    # sup r^{1/2}|u| <= C ||u||_{L^6}^{3/4} ||grad u||_{L^2}^{1/4} with one
    # C < 5 across a 200-field band-limited corpus.
    g = RadialGrid(16.0, 256)
    worst = 0.0
    for seed in range(200):
        c = smooth_random_field(g, rho_max=20.0, seed=seed, decay=0.3)
        u = inverse_transform(c)
        denom = (weighted_norm(u, 0.0, 6.0) ** 0.75
                 * sobolev_norm(c, 1.0) ** 0.25)
        if denom == 0.0:
            continue
        worst = max(worst, weighted_norm(u, 0.5, np.inf) / denom)
    assert 0.0 < worst < 5.0
