import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastoalr.errors import ConvexityError
from elastoalr.params import ALT_FAMILY, SHEAR_FAMILY, LameParameters, RadialProfile, check_convexity, plasmon_constant


@pytest.mark.parametrize(
    "lam, mu, dim, expected",
    [(1, 1, 2, True), (-3, 1, 2, False), (-0.5, 1, 3, True), (1, 0, 2, False), (1, -1, 2, False), (-0.8, 1, 3, False)],
)
def test_check_convexity(lam, mu, dim, expected):
    assert check_convexity(LameParameters(lam, mu), dim) is expected


@pytest.mark.parametrize(
    "lam, mu, family, expected",
    [(1, 1, SHEAR_FAMILY, -0.5), (1, 1, ALT_FAMILY, -2.0), (0, 1, SHEAR_FAMILY, -1 / 3)],
)
def test_plasmon_constant_examples(lam, mu, family, expected):
    assert plasmon_constant(LameParameters(lam, mu), family) == pytest.approx(expected, rel=1e-15)


def test_plasmon_constant_rejects_nonconvex():
    with pytest.raises(ConvexityError):
        plasmon_constant(LameParameters(1, -1))


@settings(max_examples=50, deadline=None)
@given(mu=st.floats(0.05, 20), t=st.floats(0.02, 20))
def test_constants_negative_and_reciprocal(mu, t):
    lam = -mu + t  # 2 lam + 2 mu = 2 t > 0
    p = LameParameters(lam, mu)
    c, alt = plasmon_constant(p, SHEAR_FAMILY), plasmon_constant(p, ALT_FAMILY)
    assert c < 0 and alt < 0
    assert c * alt == pytest.approx(1.0, rel=1e-12)
    assert 0 < p.alpha < 1


def test_profile_regions_and_factors():
    p = LameParameters(1, 1)
    prof = RadialProfile.plasmonic(p, 2.0, 0.1, core_radius=1.0)
    assert prof.amplitudes == (1.0, -0.5, 1.0)
    assert prof.interfaces == (1.0, 2.0)
    assert prof.region_index(0.5) == 0 and prof.region_index(1.0) == 0 and prof.region_index(1.0, "outer") == 1
    assert prof.region_index(3.0) == 2
    assert prof.factor(1.5) == complex(-0.5, 0.1)
    nc = RadialProfile.plasmonic(p, 2.0, 0.1)
    assert not nc.has_core and nc.region_index(0.3) == 1


def test_profile_validation():
    with pytest.raises(ValueError):
        RadialProfile(2.0, 1.0, (1, -0.5, 1), 0.1)
    with pytest.raises(ValueError):
        RadialProfile(0.0, 1.0, (1, -0.5, 1), math.inf)
