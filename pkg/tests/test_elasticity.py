import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastoalr.elasticity import (
    bilinear_P,
    conormal,
    dissipated_energy,
    energy_norm_sq,
    green_identity_residual,
    kelvin_matrix,
    lame_apply,
    lame_residual_norm,
)
from elastoalr.errors import DivergentIntegralError
from elastoalr.fields import FieldPiece, PiecewiseModeField, TrigPoly, pattern_poly
from elastoalr.params import LameParameters, plasmon_constant
from elastoalr.plasmon_waves import perfect_wave

from oracles import energy_quadrature, lame_fd

P11 = LameParameters(1.0, 1.0)


def _single_piece(parts):
    """One polynomial piece on the whole plane; integrals restrict it to a disk."""
    ux, uy = TrigPoly(), TrigPoly()
    for fam, m, p, c in parts:
        a, b = pattern_poly(fam, m, p, c)
        ux, uy = ux + a, uy + b
    return PiecewiseModeField([FieldPiece(0.0, math.inf, ux, uy, 1.0)])


def _translation():
    return _single_piece([("F2", 0, 0, 1.0)])


def test_kelvin_2d_examples():
    K = kelvin_matrix(P11, [1.0, 0.0], 2)
    assert K[0, 0] == pytest.approx(-1 / (6 * math.pi), rel=1e-14)
    assert K[0, 1] == 0.0
    assert kelvin_matrix(P11, [0.0, 1.0], 2)[0, 1] == 0.0


def test_kelvin_3d_standard_and_printed():
    std = kelvin_matrix(P11, [1.0, 0.0, 0.0], 3)
    assert std[0, 0] == pytest.approx(-1 / (4 * math.pi), rel=1e-14)
    printed = kelvin_matrix(P11, [1.0, 0.0, 0.0], 3, variant="as_printed")
    assert printed[0, 0] == pytest.approx(-1 / (3 * math.pi), rel=1e-14)
    assert printed[0, 0] == pytest.approx(-0.1061, abs=5e-5)


def _kelvin_fd_residual(params, dim, variant, h=1e-3):
    x0 = np.array([0.8, -0.5, 0.4][:dim])
    eye = np.eye(dim)
    worst = 0.0
    for col in range(dim):
        u = lambda x: kelvin_matrix(params, x, dim, variant)[:, col]
        lap = sum((u(x0 + h * e) - 2 * u(x0) + u(x0 - h * e)) / h**2 for e in eye)
        gd = np.zeros(dim)
        for i in range(dim):
            for j in range(dim):
                d = (u(x0 + h * eye[i] + h * eye[j]) - u(x0 + h * eye[i] - h * eye[j])
                     - u(x0 - h * eye[i] + h * eye[j]) + u(x0 - h * eye[i] - h * eye[j]))[j]
                gd[i] += d / (4 * h * h)
        res = params.mu * lap + (params.lam + params.mu) * gd
        worst = max(worst, np.linalg.norm(res) / (params.mu * np.linalg.norm(lap)))
    return worst


@pytest.mark.parametrize("lam, mu", [(1.0, 1.0), (0.3, 2.0), (-0.5, 1.0)])
def test_kelvin_solves_lame_off_origin(lam, mu):
    p = LameParameters(lam, mu)
    assert _kelvin_fd_residual(p, 2, "standard") < 1e-4
    assert _kelvin_fd_residual(p, 3, "standard") < 1e-4
    # the printed 3-D weight does not give a homogeneous solution
    assert _kelvin_fd_residual(p, 3, "as_printed") > 1e-2


def test_kelvin_rejects_origin_and_bad_dim():
    with pytest.raises(ValueError):
        kelvin_matrix(P11, [0.0, 0.0], 2)
    with pytest.raises(ValueError):
        kelvin_matrix(P11, [1.0, 0.0], 3)


def test_lame_apply_rigid_and_wave_pieces():
    assert lame_residual_norm(P11, _translation()) == 0.0
    psi = perfect_wave(4, 1.5, P11)
    assert lame_apply(P11, psi).pieces[0].max_abs() == 0.0
    assert lame_residual_norm(P11, psi) < 1e-13


def test_lame_apply_matches_fd_on_nonharmonic_term():
    p = LameParameters(0.7, 1.3)
    fld = _single_piece([("F1", 1, 2, 1.0), ("F3", 2, 3, -0.4)])
    lu = lame_apply(p, fld)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1.5, 1.5, size=(100, 2))
    exact = np.array(lu.evaluate_xy(pts[:, 0], pts[:, 1]))
    fd = np.array(lame_fd(p, lambda x, y: fld.evaluate_xy(x, y), pts[:, 0], pts[:, 1], h=1e-4))
    assert np.max(np.abs(exact)) > 0.1
    assert np.max(np.abs(fd - exact)) / np.max(np.abs(exact)) < 1e-6


def test_energy_of_first_wave():
    psi = perfect_wave(1, 1.0, P11)
    assert energy_norm_sq(P11, psi) == pytest.approx(6 * math.pi, rel=1e-14)
    assert energy_norm_sq(P11, psi) == pytest.approx(18.84956, abs=1e-5)


def test_rigid_motion_has_no_energy_coupling():
    psi = perfect_wave(2, 1.0, P11)
    assert abs(bilinear_P(P11, psi, _translation(), (0.0, 1.0))) == 0.0


def test_distinct_orders_are_orthogonal_and_quadrature():
    a = perfect_wave(2, 1.2, P11)
    b = perfect_wave(5, 1.2, P11)
    assert bilinear_P(P11, a, b) == 0.0
    # quadrature of the sum's energy equals the sum of energies (cross term zero)
    q = energy_quadrature(P11, a + b)
    assert abs(q - energy_norm_sq(P11, a) - energy_norm_sq(P11, b)) < 1e-8 * q


def test_divergent_energy_rejected():
    with pytest.raises(DivergentIntegralError):
        energy_norm_sq(P11, _single_piece([("F1", 2, 1, 1.0)]))


def test_dissipated_energy_example():
    psi = perfect_wave(2, 1.0, P11)
    assert dissipated_energy(0.1, psi, P11) == pytest.approx(0.05 * 12 * math.pi, rel=1e-14)
    assert dissipated_energy(0.1, PiecewiseModeField.zero(), P11) == 0.0
    with pytest.raises(ValueError):
        dissipated_energy(0.0, psi, P11)


@settings(max_examples=25, deadline=None)
@given(
    t=st.floats(0.05, 5.0),
    mu=st.floats(0.2, 5.0),
    k1=st.integers(1, 6),
    k2=st.integers(1, 6),
    s=st.floats(-2, 2),
)
def test_energy_form_symmetric_and_positive(t, mu, k1, k2, s):
    p = LameParameters(t - mu, mu)
    u = perfect_wave(k1, 1.3, p) + perfect_wave(k2, 1.3, p) * s
    v = perfect_wave(k2, 1.3, p)
    assert bilinear_P(p, u, v) == pytest.approx(bilinear_P(p, v, u), rel=1e-12, abs=1e-9)
    assert energy_norm_sq(p, u) >= 0


def test_energy_matches_quadrature_for_general_pieces():
    p = LameParameters(0.4, 1.7)
    fld = PiecewiseModeField(
        [
            FieldPiece(0.0, 1.0, *pattern_poly("F1", 2, 2, 1.0), 1.0),
            FieldPiece(1.0, 2.0, *pattern_poly("F3", 3, -1, 0.5), 1.0),
            FieldPiece(2.0, math.inf, TrigPoly(), TrigPoly(), 2.0),
        ]
    )
    assert energy_norm_sq(p, fld, (0.0, 2.0)) == pytest.approx(energy_quadrature(p, fld), rel=1e-9)


def test_green_identity():
    assert green_identity_residual(P11, _translation(), _translation(), 1.0) < 1e-14
    psi = perfect_wave(3, 1.0, P11)
    pc = psi.pieces[0]
    inner = PiecewiseModeField([FieldPiece(0.0, math.inf, pc.ux, pc.uy, pc.rho)])
    assert green_identity_residual(P11, inner, inner, 1.0) < 1e-9
    rng = np.random.default_rng(5)
    for _ in range(5):
        parts = [(fam, int(m), int(pw), float(c)) for fam, m, pw, c in zip(
            rng.choice(["F1", "F2", "F3", "F4"], 3), rng.integers(0, 4, 3), rng.integers(0, 4, 3), rng.normal(size=3))]
        u = _single_piece(parts)
        v = _single_piece(parts[::-1])
        assert green_identity_residual(P11, u, v, 0.8) < 1e-8


def test_conormal_rigid_and_wave_ratio():
    assert conormal(P11, _translation(), 0.5).norm() == 0.0
    psi = perfect_wave(3, 2.0, P11)
    c = plasmon_constant(P11)
    t_in = conormal(P11, psi, 2.0, "inner")
    t_out = conormal(P11, psi, 2.0, "outer")
    assert (t_out - t_in * c).norm() <= 1e-12 * t_out.norm()
