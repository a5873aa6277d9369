import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lingering.grid import (Field, GridError, LandscapeError, LandscapeSpec, constant, gaussian,
                            integrate, make_grid, sample_landscape, sharp_gaussian)


def test_grid_spacing_and_centres():
    g = make_grid(5, 10)
    assert g.h == 1.0
    np.testing.assert_allclose(g.centers, np.arange(-4.5, 5.0, 1.0), atol=1e-15)
    assert make_grid(5, 512).h == pytest.approx(10 / 512)
    assert make_grid(1, 8).centers[0] == pytest.approx(-0.875)


def test_centres_read_only():
    g = make_grid(1, 8)
    with pytest.raises(ValueError):
        g.centers[0] = 3.0


@pytest.mark.parametrize("ell,n", [(0, 10), (-1, 10), (math.inf, 10), (1, 7), (1, 10.5)])
def test_bad_grid(ell, n):
    with pytest.raises(GridError):
        make_grid(ell, n)


def test_field_shape_and_sign():
    g = make_grid(1, 8)
    with pytest.raises(GridError):
        Field(g, np.ones(9))
    with pytest.raises(GridError):
        Field(g, -np.ones(8), nonnegative=True)


def test_landscape_values():
    g = make_grid(5, 64)
    assert np.all(sample_landscape(constant(1), g).values == 1.0)
    assert gaussian()(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi) + 0.1, abs=1e-12)
    assert gaussian()(0.0) == pytest.approx(0.49894, abs=1e-5)


def test_integrals():
    assert integrate(sample_landscape(constant(2), make_grid(5, 40))) == pytest.approx(20.0)
    tot = integrate(sample_landscape(sharp_gaussian(), make_grid(5, 1024)))
    assert abs(tot - 1.3162) < 1e-3


def test_integrate_rejects_nonfinite():
    g = make_grid(1, 8)
    with pytest.raises(GridError):
        integrate((g, np.full(8, np.nan)))


def test_landscape_errors():
    g = make_grid(5, 16)
    with pytest.raises(LandscapeError):
        sample_landscape(constant(0.0), g)
    with pytest.raises(LandscapeError):
        sample_landscape(gaussian(offset=-1.0), g)
    with pytest.raises(LandscapeError):
        LandscapeSpec("gaussian", {"bogus": 1.0})
    with pytest.raises(LandscapeError):
        sample_landscape(LandscapeSpec("custom", table=(1.0,) * 5), g)


def test_refinement_second_order():
    spec = gaussian()
    exact = 1 / math.sqrt(2 * math.pi) * math.sqrt(2 * math.pi) * math.erf(5 / math.sqrt(2)) + 1.0
    errs = [abs(integrate(sample_landscape(spec, make_grid(5, n))) - exact) for n in (32, 64, 128)]
    rates = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(1.8 < r < 2.2 for r in rates), rates


@given(a=st.floats(-10, 10), b=st.floats(-10, 10), n=st.integers(8, 200),
       seed=st.integers(0, 2**31))
def test_integrate_linear(a, b, n, seed):
    g = make_grid(2.0, n)
    r = np.random.default_rng(seed)
    f, h = r.normal(size=n), r.normal(size=n)
    lhs = integrate((g, a * f + b * h))
    rhs = a * integrate((g, f)) + b * integrate((g, h))
    scale = (abs(a) + abs(b) + 1) * g.h * np.sum(np.abs(f) + np.abs(h))
    assert abs(lhs - rhs) <= 1e-13 * scale


@given(kind=st.sampled_from(["constant", "gaussian", "sharp_gaussian"]), n=st.integers(8, 400),
       ell=st.floats(0.5, 20))
def test_symmetric_landscapes_even(kind, n, ell):
    v = sample_landscape(LandscapeSpec(kind), make_grid(ell, n)).values
    np.testing.assert_allclose(v, v[::-1], rtol=1e-14, atol=0)
