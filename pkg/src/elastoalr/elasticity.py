"""Lamé operator, energy form, tractions and the Kelvin matrix on closed-form fields."""

from __future__ import annotations

import math

import numpy as np

from .errors import DivergentIntegralError
from .fields import (
    AngularFunction,
    FieldPiece,
    PiecewiseModeField,
    TrigPoly,
    aligned,
    natural_rho,
)
from .params import LameParameters

# relative size below which a divergent monomial product is treated as round-off
_DIVERGENCE_RTOL = 1e-9


def _radial_moment(s: int, a: float, b: float, rho: float) -> float | None:
    """``int_a^b (r/rho)**s r dr``; ``None`` when the integral diverges."""
    e = s + 2
    lo, hi = a / rho, b / rho
    if math.isinf(b):
        if e >= 0 or a == 0:
            return None
        return -(lo**e) / e * rho * rho
    if a == 0:
        if e <= 0:
            return None
        return hi**e / e * rho * rho
    if e == 0:
        return math.log(hi / lo) * rho * rho
    return (hi**e - lo**e) / e * rho * rho


def integrate_product(f: TrigPoly, g: TrigPoly, a: float, b: float, rho: float) -> complex:
    """``int_{a<r<b} f * conj(g) dA`` for two components sharing reference radius ``rho``."""
    by_angle: dict[tuple[int, str], list[tuple[int, complex]]] = {}
    for (p, m, t), c in g.terms.items():
        by_angle.setdefault((m, t), []).append((p, complex(c).conjugate()))
    total = 0.0
    biggest = 0.0
    bad = 0.0
    for (p, m, t), c in f.terms.items():
        partners = by_angle.get((m, t))
        if not partners:
            continue
        w = 2 * math.pi if (m == 0 and t == "c") else math.pi
        for p2, c2 in partners:
            prod = c * c2 * w
            mag = abs(prod)
            biggest = max(biggest, mag)
            mom = _radial_moment(p + p2, a, b, rho)
            if mom is None:
                bad = max(bad, mag)
                continue
            total += prod * mom
    if bad > _DIVERGENCE_RTOL * biggest and bad > 0:
        raise DivergentIntegralError(
            f"energy integral over [{a}, {b}) diverges (non-decaying or singular term)"
        )
    return total


def _piece_pairs(u: PiecewiseModeField, v: PiecewiseModeField, region):
    ua, va = aligned(u, v)
    lo, hi = (0.0, math.inf) if region is None else region
    for pu, pv in zip(ua.pieces, va.pieces):
        a, b = max(pu.r_in, lo), min(pu.r_out, hi)
        if b <= a:
            continue
        rho = natural_rho(a, b)
        yield a, b, pu.rescaled(rho), pv.rescaled(rho)


def strain(piece: FieldPiece) -> tuple[TrigPoly, TrigPoly, TrigPoly, TrigPoly]:
    """``(div u, e11, e12, e22)`` of a piece."""
    g = piece.gradient()
    div = g[0][0] + g[1][1]
    e12 = (g[0][1] + g[1][0]) * 0.5
    return div, g[0][0], e12, g[1][1]


def bilinear_P(
    params: LameParameters,
    u: PiecewiseModeField,
    v: PiecewiseModeField,
    region: tuple[float, float] | None = None,
) -> complex:
    """``int lambda div u conj(div v) + 2 mu e(u) : conj(e(v))`` over ``region`` (default: plane).

    Computed exactly from the monomial representation.
    """
    lam, mu = params.lam, params.mu
    total = 0.0
    for a, b, pu, pv in _piece_pairs(u, v, region):
        du, u11, u12, u22 = strain(pu)
        dv, v11, v12, v22 = strain(pv)
        rho = pu.rho
        total += lam * integrate_product(du, dv, a, b, rho)
        total += 2 * mu * (
            integrate_product(u11, v11, a, b, rho)
            + 2 * integrate_product(u12, v12, a, b, rho)
            + integrate_product(u22, v22, a, b, rho)
        )
    return total


def energy_norm_sq(params: LameParameters, u: PiecewiseModeField, region=None) -> float:
    return float(np.real(bilinear_P(params, u, u, region)))


def area_inner(u: PiecewiseModeField, v: PiecewiseModeField, region=None) -> complex:
    """``int u . conj(v) dA`` over ``region``."""
    total = 0.0
    for a, b, pu, pv in _piece_pairs(u, v, region):
        total += integrate_product(pu.ux, pv.ux, a, b, pu.rho)
        total += integrate_product(pu.uy, pv.uy, a, b, pu.rho)
    return total


def lame_apply_piece(params: LameParameters, piece: FieldPiece) -> FieldPiece:
    lam, mu = params.lam, params.mu
    rho = piece.rho
    g = piece.gradient()
    div = g[0][0] + g[1][1]
    lap_x = g[0][0].d_dx(rho) + g[0][1].d_dy(rho)
    lap_y = g[1][0].d_dx(rho) + g[1][1].d_dy(rho)
    ref = piece.max_abs()
    rx = (lap_x * mu + div.d_dx(rho) * (lam + mu)).cleaned(1e-15, ref)
    ry = (lap_y * mu + div.d_dy(rho) * (lam + mu)).cleaned(1e-15, ref)
    return FieldPiece(piece.r_in, piece.r_out, rx, ry, rho)


def lame_apply(params: LameParameters, field: PiecewiseModeField) -> PiecewiseModeField:
    """``mu Lap u + (lambda + mu) grad div u`` piece by piece, in closed form.

    Interface (distributional) contributions are not included; see
    :func:`interface_jump`.
    """
    return PiecewiseModeField([lame_apply_piece(params, pc) for pc in field.pieces], field.k, field.family)


def lame_residual_norm(params: LameParameters, field: PiecewiseModeField) -> float:
    """Largest coefficient of the piecewise Lamé residual, relative to the field scale.

    Coefficients are compared after re-expressing each piece at its natural
    reference radius, so the number is meaningful across radii.
    """
    worst = 0.0
    for pc in field.with_natural_scales().pieces:
        res = lame_apply_piece(params, pc)
        scale = max(pc.max_abs(), 1e-300) / pc.rho**2
        worst = max(worst, res.max_abs() / scale)
    return worst


def traction_polys(params: LameParameters, piece: FieldPiece) -> tuple[TrigPoly, TrigPoly]:
    lam, mu = params.lam, params.mu
    g = piece.gradient()
    div = g[0][0] + g[1][1]
    shear = g[0][1] + g[1][0]
    tx = (div * lam + g[0][0] * (2 * mu)).times_cos() + (shear * mu).times_sin()
    ty = (shear * mu).times_cos() + (div * lam + g[1][1] * (2 * mu)).times_sin()
    return tx, ty


def conormal(
    params: LameParameters,
    field: PiecewiseModeField,
    radius: float,
    side: str | None = None,
    factor: complex = 1.0,
) -> AngularFunction:
    """Traction ``factor*(lambda div u nu + mu (grad u + grad u^T) nu)`` on the circle ``r = radius``.

    ``nu`` is the outward radial normal. At a piece boundary ``side`` selects the
    inner or outer trace.
    """
    pc = field.piece_at(radius, side)
    tx, ty = traction_polys(params, pc)
    out = AngularFunction(tx.at_radius(radius, pc.rho), ty.at_radius(radius, pc.rho))
    return out * factor if factor != 1.0 else out


def traction_jump(params, field, radius, inner_factor=1.0, outer_factor=1.0) -> AngularFunction:
    """``[factor * traction]`` across ``r = radius`` as (outer - inner)."""
    if radius in field.breakpoints:
        t_in = conormal(params, field, radius, "inner", inner_factor)
        t_out = conormal(params, field, radius, "outer", outer_factor)
    else:
        t = conormal(params, field, radius)
        t_in, t_out = t * inner_factor, t * outer_factor
    return t_out - t_in


def displacement_jump(field: PiecewiseModeField, radius: float) -> AngularFunction:
    if radius not in field.breakpoints:
        return AngularFunction()
    return field.trace(radius, "outer") - field.trace(radius, "inner")


def dissipated_energy(delta: float, u: PiecewiseModeField, params: LameParameters) -> float:
    """Heat dissipation ``(delta/2) P(u, u)`` with the real base moduli."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return 0.5 * delta * energy_norm_sq(params, u)


def green_identity_residual(
    params: LameParameters, u: PiecewiseModeField, v: PiecewiseModeField, radius: float
) -> float:
    """``|oint conj(v).T(u) ds - int_D conj(v).Lu - P_D(u, v)|`` on the disk of given radius."""
    side = "inner" if radius in u.breakpoints else None
    t = conormal(params, u, radius, side)
    vside = "inner" if radius in v.breakpoints else None
    trace = v.trace(radius, vside)
    boundary = radius * t.inner(trace, conjugate=True)
    volume = area_inner(lame_apply(params, u), v, (0.0, radius))
    energy = bilinear_P(params, u, v, (0.0, radius))
    return float(abs(boundary - volume - energy))


def kelvin_matrix(params: LameParameters, x, dim: int | None = None, variant: str = "standard") -> np.ndarray:
    """Kelvin fundamental solution of the constant-coefficient Lamé operator.

    In 3-D the off-diagonal kernel weight is ``beta/(4 pi)``; ``variant="as_printed"``
    uses ``beta/(2 pi)`` instead, which does not solve the homogeneous system and is
    kept only for comparison with the literature display.
    """
    x = np.asarray(x, dtype=float)
    dim = x.size if dim is None else dim
    if x.size != dim or dim not in (2, 3):
        raise ValueError("point dimension must match dim in {2, 3}")
    nrm = float(np.linalg.norm(x))
    if nrm == 0:
        raise ValueError("Kelvin matrix is singular at x = 0")
    a, b = params.kelvin_alpha, params.kelvin_beta
    outer = np.outer(x, x)
    if dim == 2:
        return a / (2 * math.pi) * math.log(nrm) * np.eye(2) - b / (2 * math.pi) * outer / nrm**2
    if variant not in ("standard", "as_printed"):
        raise ValueError(f"unknown Kelvin variant {variant!r}")
    wb = 2 * math.pi if variant == "as_printed" else 4 * math.pi
    return -a / (4 * math.pi) * np.eye(3) / nrm - b / wb * outer / nrm**3
