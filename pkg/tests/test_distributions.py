import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import jamlab as jl
from jamlab.errors import MomentOverflow, NonZeroMean

FAMILIES = {
    "gaussian": jl.gaussian,
    "laplace": jl.laplace,
    "uniform": jl.uniform,
}


def variances():
    return st.floats(0.25, 4.0, allow_nan=False)


# -- construction and invariants --------------------------------------------


@given(st.sampled_from(sorted(FAMILIES)), variances())
def test_variance_matches_parameters(name, v):
    d = FAMILIES[name](v)
    assert d.variance == pytest.approx(v, rel=1e-9)


def test_mixture_must_be_zero_mean():
    with pytest.raises(NonZeroMean):
        jl.gaussian_mixture([0.5, 0.5], [1.0, 0.5], [1.0, 1.0])


def test_mixture_variance_bookkeeping():
    d = jl.gaussian_mixture([0.25, 0.75], [3.0, -1.0], [0.5, 1.0])
    assert d.mean() == 0.0
    assert d.variance == pytest.approx(0.25 * (9 + 0.25) + 0.75 * (1 + 1))


def test_tabulated_rejects_bad_mass():
    g = jl.GridSpec(4.0, 64)
    f = np.ones(64)  # integrates to 8
    with pytest.raises(ValueError):
        jl.tabulated(g, f)


def test_tabulated_rejects_shifted_mean():
    g = jl.GridSpec(8.0, 256)
    f = jl.gaussian(1.0).pdf_at(g.x - 0.5)
    f = f / (f.sum() * g.dx)
    with pytest.raises(NonZeroMean):
        jl.tabulated(g, f)


# -- cell-averaged tables ------------------------------------------------------


@given(st.sampled_from(sorted(FAMILIES)), variances())
@settings(max_examples=30)
def test_pdf_table_mass_is_exact(name, v):
    # mass is exact by construction; moments carry the O(dx^2) bias of any
    # piecewise-constant density representation
    d = FAMILIES[name](v)
    g = jl.default_grid(d, num_points=1024)
    f = d.pdf_on(g)
    assert np.all(f >= 0)
    assert f.sum() * g.dx == pytest.approx(1.0, abs=1e-10)
    assert np.sum(g.x * f) * g.dx == pytest.approx(0.0, abs=1e-11 * (1 + d.sigma))
    assert np.sum(g.x**2 * f) * g.dx == pytest.approx(v, rel=2e-3)


def test_uniform_table_exact_even_with_offgrid_edge():
    # support edge falls strictly inside a cell; overlap weighting keeps the
    # mass exact where sampled indicator values would be off at O(dx)
    d = jl.uniform(1.0)
    g = jl.GridSpec(10.0, 512)
    f = d.pdf_on(g)
    assert f.sum() * g.dx == pytest.approx(1.0, abs=1e-14)


def test_rademacher_table_is_two_atoms():
    d = jl.rademacher_scaled(1.0)
    g = jl.default_grid(d)
    f = d.pdf_on(g)
    hits = np.nonzero(f)[0]
    assert len(hits) == 2
    np.testing.assert_allclose(g.x[hits], [-1.0, 1.0], atol=1e-12)
    assert f.sum() * g.dx == pytest.approx(1.0)


def test_default_grid_snaps_rademacher_atoms():
    d = jl.rademacher_scaled(0.7)
    g = jl.default_grid(d)
    k = 0.7 / g.dx
    assert k == pytest.approx(round(k), abs=1e-9)


# -- moments -----------------------------------------------------------------


def test_gaussian_moments():
    np.testing.assert_allclose(jl.moments(jl.gaussian(1.0), 4), [1, 0, 1, 0, 3])


def test_uniform_moments():
    np.testing.assert_allclose(jl.moments(jl.uniform(1.0), 4), [1, 0, 1, 0, 9 / 5])


def test_laplace_moments_quadrature_vs_closed_form():
    d = jl.laplace(1.0)
    g = jl.default_grid(d)
    tab = jl.tabulated(g, d.pdf_on(g))
    got = jl.moments(tab, 4)
    np.testing.assert_allclose(got, [1, 0, 1, 0, 6], rtol=1e-5, atol=1e-9)


def test_mixture_moments_match_quadrature():
    d = jl.gaussian_mixture([0.3, 0.7], [1.4, -0.6], [0.8, 1.1])
    g = jl.default_grid(d)
    tab = jl.tabulated(g, d.pdf_on(g))
    np.testing.assert_allclose(jl.moments(d, 8), jl.moments(tab, 8), rtol=5e-5, atol=1e-8)


def test_moment_order_cap():
    with pytest.raises(ValueError):
        jl.moments(jl.gaussian(1.0), 25)


def test_moment_overflow_on_narrow_grid():
    d = jl.laplace(1.0)
    g = jl.GridSpec(6.0, 256)  # heavy tail chopped at the grid edge
    f = d.pdf_on(g)
    f[0] = 0.0  # drop the unpaired leftmost cell so the mean stays zero
    tab = jl.tabulated(g, f / (f.sum() * g.dx))
    with pytest.raises(MomentOverflow):
        jl.moments(tab, 12)


# -- sampling and scaling ------------------------------------------------------


@pytest.mark.parametrize("make", [
    lambda: jl.gaussian(1.3),
    lambda: jl.laplace(0.8),
    lambda: jl.uniform(2.0),
    lambda: jl.rademacher_scaled(1.1),
    lambda: jl.gaussian_mixture([0.4, 0.6], [0.9, -0.6], [0.5, 1.0]),
])
def test_sampling_matches_first_two_moments(make):
    d = make()
    rng = np.random.default_rng(42)
    s = d.sample(rng, 200_000)
    assert s.mean() == pytest.approx(0.0, abs=5 * d.sigma / np.sqrt(len(s)))
    assert s.var() == pytest.approx(d.variance, rel=0.02)


def test_tabulated_sampling():
    d = jl.laplace(1.0)
    g = jl.default_grid(d)
    tab = jl.tabulated(g, d.pdf_on(g))
    rng = np.random.default_rng(7)
    s = tab.sample(rng, 400_000)
    assert s.var() == pytest.approx(1.0, rel=0.02)
    assert np.mean(np.abs(s) < 0.2) == pytest.approx(
        d.cdf_at(0.2) - d.cdf_at(-0.2), abs=0.01)


@given(st.sampled_from(sorted(FAMILIES)), variances(), st.floats(0.5, 2.0))
def test_scaled_model(name, v, c):
    d = FAMILIES[name](v).scaled(c)
    assert d.variance == pytest.approx(v * c * c, rel=1e-12)


def test_scaled_tabulated_preserves_shape():
    d = jl.gaussian(1.0)
    g = jl.default_grid(jl.gaussian(4.0))
    tab = jl.tabulated(g, d.pdf_on(g)).scaled(1.5)
    assert tab.variance == pytest.approx(2.25, rel=1e-4)


# -- tails and grid defaults ----------------------------------------------------


def test_default_grid_floor_is_twelve_sigma():
    g = jl.default_grid(jl.gaussian(1.0), jl.gaussian(0.25))
    assert g.half_width == pytest.approx(12.0)


def test_default_grid_widens_for_heavy_tails():
    d = jl.laplace(2.0)
    g = jl.default_grid(d)
    assert g.half_width > 12 * d.sigma
    assert d.tail_mass_outside(g.half_width) < 1e-10


@given(st.sampled_from(sorted(FAMILIES)), variances())
@settings(max_examples=30)
def test_required_half_width_honours_tail_target(name, v):
    d = FAMILIES[name](v)
    L = d.required_half_width(1e-12)
    assert d.tail_mass_outside(L) <= 1.01e-12
