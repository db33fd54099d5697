import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastoalr.params import LameParameters
from elastoalr.threed_check import (
    M_GROW,
    N_DECAY,
    conormal_first_component,
    eval_B,
    fit_proportionality,
    pooled_proportionality_test,
    proportionality_test,
    radial_constant,
    solid_harmonic,
    sphere_samples,
    spherical_field,
    traction_fd,
)

P11 = LameParameters(1.0, 1.0)


def _poly_eval(poly, x):
    x = np.atleast_2d(x)
    return sum(c * x[:, 0] ** a * x[:, 1] ** b * x[:, 2] ** d for (a, b, d), c in poly.items())


def _sphere_rule(nt=24, nphi=48):
    t, w = np.polynomial.legendre.leggauss(nt)
    phi = np.linspace(0, 2 * np.pi, nphi, endpoint=False)
    T, P = np.meshgrid(t, phi, indexing="ij")
    s = np.sqrt(1 - T**2)
    pts = np.stack([s * np.cos(P), s * np.sin(P), T], axis=-1).reshape(-1, 3)
    wts = (w[:, None] * np.full(nphi, 2 * np.pi / nphi)[None, :]).ravel()
    return pts, wts


def test_harmonics_orthonormal_by_quadrature():
    pts, wts = _sphere_rule()
    keys = [(n, m) for n in range(0, 5) for m in range(-n, n + 1)]
    vals = np.array([_poly_eval(solid_harmonic(n, m), pts) for n, m in keys])
    gram = (vals * wts) @ vals.T
    assert np.max(np.abs(gram - np.eye(len(keys)))) < 1e-12


@pytest.mark.parametrize("n, m", [(2, 0), (3, -2), (4, 3)])
def test_solid_harmonic_is_harmonic(n, m):
    H = solid_harmonic(n, m)
    x0 = np.array([[0.3, -0.7, 0.5]])
    h = 1e-3
    lap = sum(
        (_poly_eval(H, x0 + h * e) - 2 * _poly_eval(H, x0) + _poly_eval(H, x0 - h * e)) / h**2 for e in np.eye(3)
    )
    assert abs(lap[0]) < 1e-6


def test_zero_order_field_vanishes():
    x = sphere_samples(5)
    assert np.all(eval_B(0, 0, x) == 0)
    assert np.all(conormal_first_component(P11, M_GROW, 0, 0, x) == 0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_B_tangential(n):
    x = sphere_samples(30, seed=n)
    for m in range(-n, n + 1):
        assert np.max(np.abs(np.sum(eval_B(n, m, x) * x, axis=1))) < 1e-12


@pytest.mark.parametrize("theta", [0.3, 1.1, 2.4])
def test_B_matches_fd_surface_gradient(theta):
    Y = lambda x: _poly_eval(solid_harmonic(1, 0), x / np.linalg.norm(x))[0]
    p = np.array([math.sin(theta), 0.0, math.cos(theta)])
    h = 1e-6
    grad = np.array([(Y(p + h * e) - Y(p - h * e)) / (2 * h) for e in np.eye(3)])
    assert np.max(np.abs(eval_B(1, 0, p) - np.cross(grad, p))) < 1e-6


@pytest.mark.parametrize("n", [1, 2, 3])
def test_addition_theorem(n):
    # sum over the m-multiplet of |B|^2 is n (n + 1) (2 n + 1) / (4 pi) everywhere
    x = sphere_samples(20, seed=7)
    tot = sum(np.sum(eval_B(n, m, x) ** 2, axis=1) for m in range(-n, n + 1))
    assert np.allclose(tot, n * (n + 1) * (2 * n + 1) / (4 * math.pi), rtol=1e-12)


def test_radial_homogeneity():
    x = sphere_samples(6, seed=2)
    for kind, p in ((M_GROW, 3), (N_DECAY, -4)):
        a = spherical_field(kind, 3, 1, x)
        b = spherical_field(kind, 3, 1, 2.5 * x)
        assert np.allclose(b, 2.5**p * a, rtol=1e-12)
    with pytest.raises(ValueError):
        spherical_field("Q", 2, 0, x)
    with pytest.raises(ValueError):
        spherical_field(M_GROW, 2, 0, np.zeros((1, 3)))


@pytest.mark.parametrize("kind", [M_GROW, N_DECAY])
@pytest.mark.parametrize("n, m", [(1, 0), (1, 1), (2, -1), (3, 2), (4, 0)])
@pytest.mark.parametrize("lam, mu", [(1.0, 1.0), (0.3, 2.0)])
def test_first_component_matches_fd_traction(kind, n, m, lam, mu):
    p = LameParameters(lam, mu)
    x = sphere_samples(25, seed=n + 10 * abs(m))
    got = conormal_first_component(p, kind, n, m, x)
    ref = traction_fd(p, kind, n, m, x)[:, 0]
    assert np.max(np.abs(got - ref)) <= 1e-6 * max(1.0, np.max(np.abs(ref)))


def test_rejects_non_unit_points():
    with pytest.raises(ValueError):
        eval_B(2, 0, [1.0, 1e-5, 0.0])
    with pytest.raises(ValueError):
        conormal_first_component(P11, M_GROW, 2, 0, [[0.5, 0.0, 0.0]])


def test_planted_proportionality():
    x = sphere_samples(50)
    tm = conormal_first_component(P11, M_GROW, 3, 1, x)
    rep = fit_proportionality(tm, 3 * tm)
    assert rep.best_fit_c == pytest.approx(3.0, rel=1e-14) and rep.relative_residual < 1e-12
    deg = fit_proportionality(np.zeros(5), np.zeros(5))
    assert deg.degenerate and math.isnan(deg.relative_residual)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_each_multiplet_member_is_radially_proportional(n):
    # T(N) = -(n + 2)/(n - 1) T(M) at fixed (n, m): a single c exists per order
    for m in range(-n, n + 1):
        rep = proportionality_test(P11, n, m)
        assert rep.best_fit_c == pytest.approx(radial_constant(n), rel=1e-12)
        assert rep.relative_residual < 1e-12


def test_no_common_constant_across_orders():
    rep = pooled_proportionality_test(P11, [2, 3, 4])
    assert rep.relative_residual > 0.1
    assert len({radial_constant(n) for n in (2, 3, 4)}) == 3


@settings(max_examples=20, deadline=None)
@given(s=st.floats(0.01, 100), lam=st.floats(-0.5, 5))
def test_residual_invariant_under_moduli(s, lam):
    base = pooled_proportionality_test(P11, [2, 3])
    other = pooled_proportionality_test(LameParameters(lam, s), [2, 3])
    assert other.relative_residual == pytest.approx(base.relative_residual, rel=1e-10)
    assert other.best_fit_c == pytest.approx(base.best_fit_c, rel=1e-10)


def test_sample_count_precondition():
    with pytest.raises(ValueError):
        proportionality_test(P11, 2, 0, sample_count=10)
    with pytest.raises(ValueError):
        proportionality_test(P11, 0, 0)
