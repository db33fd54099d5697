"""Closed-form special fields of the layered plasmonic structure.

All constructors return :class:`~elastoalr.fields.PiecewiseModeField` values.
Angular patterns follow the source families (see :mod:`elastoalr.fields`):
``F1(k) = (cos k th, sin k th)`` and ``F2(k) = (cos k th, -sin k th)``.

Jump convention: ``[g]`` across a circle is the outer trace minus the inner trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fields import FieldPiece, PiecewiseModeField, TrigPoly, pattern_poly
from .params import ALT_FAMILY, SHEAR_FAMILY, LameParameters, plasmon_constant

SHELL_OUTSIDE = "shell-outside"
SHELL_INSIDE = "shell-inside"


def plasmon_alpha(params: LameParameters) -> float:
    """``alpha_2 / alpha_1 = (lambda + mu) / (lambda + 3 mu)``, in (0, 1) for convex pairs."""
    params.require_convex(2)
    return params.alpha


def _terms(*parts):
    """Sum ``(coef, family, m, p)`` monomials into an ``(ux, uy)`` pair of TrigPolys."""
    ux, uy = TrigPoly(), TrigPoly()
    for coef, fam, m, p in parts:
        if coef == 0:
            continue
        a, b = pattern_poly(fam, m, p, coef)
        ux, uy = ux + a, uy + b
    return ux, uy


def _scaled(parts, rho):
    """Re-express ``coef * r**p`` monomials as ``coef * rho**p * (r/rho)**p``."""
    return [(c * rho**p, fam, m, p) for c, fam, m, p in parts]


def _piece(a, b, parts, rho):
    ux, uy = _terms(*_scaled(parts, rho))
    return FieldPiece(a, b, ux, uy, rho)


def _interior_profile(k, alpha, s, scale=1.0):
    """``scale * [r^k F1(k) - k alpha (r^2 - s^2) r^(k-2) F2(k-2)]`` as monomials."""
    return [
        (scale, "F1", k, k),
        (-scale * k * alpha, "F2", k - 2, k),
        (scale * k * alpha * s * s, "F2", k - 2, k - 2),
    ]


def perfect_wave(k: int, R: float, params: LameParameters, variant: str = SHELL_OUTSIDE) -> PiecewiseModeField:
    """Perfect plasmon wave for the shell boundary ``r = R``.

    ``SHELL_OUTSIDE``: profile ``A = c`` in ``r < R`` and ``A = 1`` outside (no core),
    ``c`` the shear-family constant. Inside the field is ``r^k F2(k)``; the outer
    traction equals ``c`` times the inner one.

    ``SHELL_INSIDE`` (``k >= 2``): profile ``A = 1`` in ``r <= R`` and ``A = c``
    outside. Outside the field is ``R^{2k} r^{-k} F1(k)``; the outer traction equals
    the alternative constant ``1/c`` times the inner one.
    """
    if k < 1 or int(k) != k:
        raise ValueError("k must be a positive integer")
    if R <= 0:
        raise ValueError("R must be positive")
    k = int(k)
    alpha = plasmon_alpha(params)
    if variant == SHELL_OUTSIDE:
        inner = [(1.0, "F2", k, k)]
        # R^{2k} [ r^{-k} F2(k) + k alpha (r^2 - R^2) r^{-k-2} F1(k+2) ]
        outer = [
            (R ** (2 * k), "F2", k, -k),
            (R ** (2 * k) * k * alpha, "F1", k + 2, -k),
            (-(R ** (2 * k + 2)) * k * alpha, "F1", k + 2, -k - 2),
        ]
        fam = "F2"
    elif variant == SHELL_INSIDE:
        if k < 2:
            raise ValueError("the shell-inside wave is defined for k >= 2")
        inner = _interior_profile(k, alpha, R)
        outer = [(R ** (2 * k), "F1", k, -k)]
        fam = "F1"
    else:
        raise ValueError(f"unknown profile variant {variant!r}")
    pieces = [_piece(0.0, R, inner, R), _piece(R, math.inf, outer, R)]
    return PiecewiseModeField(pieces, k=k, family=fam, label=f"psi_hat[{variant}]")


def wave_constant(params: LameParameters, variant: str = SHELL_OUTSIDE) -> float:
    """Ratio outer/inner traction across ``r = R`` carried by :func:`perfect_wave`."""
    if variant == SHELL_OUTSIDE:
        return plasmon_constant(params, SHEAR_FAMILY)
    if variant == SHELL_INSIDE:
        return plasmon_constant(params, ALT_FAMILY)
    raise ValueError(f"unknown profile variant {variant!r}")


def perfect_wave_energy(k: int, R: float, params: LameParameters) -> float:
    """``P(psi_k, psi_k) = 8 k pi mu (lambda + 2 mu) / (lambda + 3 mu) R^{2k}``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if R <= 0:
        raise ValueError("R must be positive")
    lam, mu = params.lam, params.mu
    return 8 * k * math.pi * mu * (lam + 2 * mu) / (lam + 3 * mu) * R ** (2 * k)


@dataclass(frozen=True)
class JumpConstants:
    """Geometry constants of the non-resonance construction (functions of lambda, mu, q, R)."""

    c1: float
    c2: float
    c3: float
    c4: float
    c5: float


def jump_constants(params: LameParameters, q: float, R: float) -> JumpConstants:
    lam, mu = params.lam, params.mu
    alpha = plasmon_alpha(params)
    return JumpConstants(
        c1=alpha * (R * R - q * q) / q**4,
        c2=4 * mu * (lam + 2 * mu) / (q**3 * (lam + 3 * mu) ** 2),
        c3=-(lam + 3 * mu),
        c4=(lam + mu) * (q * q - R * R),
        c5=-4 * mu * (lam + 2 * mu) / (q**3 * (lam + 3 * mu)),
    )


def _require_high_k(k):
    if k < 3 or int(k) != k:
        raise ValueError("this construction is defined for integer k >= 3")
    return int(k)


def base_v_hat(k: int, R: float, q: float, params: LameParameters) -> PiecewiseModeField:
    """Four-piece primal base field for core ``B_1``, shell ``1 < r < R``, source radius ``q``.

    Continuous on the plane, solves ``A L v = 0`` off ``r = q`` for the profile
    (1, c, 1), and carries a traction jump of the ``F1(k)``/``F2(k-2)`` type at ``q``.
    """
    k = _require_high_k(k)
    if not 1.0 < R < q:
        raise ValueError("need 1 < R < q")
    alpha = plasmon_alpha(params)
    c1 = jump_constants(params, q, R).c1
    core = _interior_profile(k, alpha, 1.0)
    shell = [(1.0, "F1", k, -k)]
    # R^{-2k} [ r^k F1(k) - k alpha (r^2 - R^2) r^{k-2} F2(k-2) ]
    mid = _interior_profile(k, alpha, R, R ** (-2 * k))
    s = (q / R) ** (2 * k)
    # (q/R)^{2k} ( r^{-k} F1(k) + c1 k [ (k-2) alpha (r^2 - q^2) r^{-k} F1(k) + r^{-(k-2)} F2(k-2) ] )
    ext = [
        (s, "F1", k, -k),
        (s * c1 * k * (k - 2) * alpha, "F1", k, 2 - k),
        (-s * c1 * k * (k - 2) * alpha * q * q, "F1", k, -k),
        (s * c1 * k, "F2", k - 2, 2 - k),
    ]
    pieces = [
        _piece(0.0, 1.0, core, 1.0),
        _piece(1.0, R, shell, 1.0),
        _piece(R, q, mid, q),
        _piece(q, math.inf, ext, q),
    ]
    return PiecewiseModeField(pieces, k=k, family="F1", label="v_hat")


def v_hat_jump_amplitudes(k: int, R: float, q: float, params: LameParameters) -> tuple[float, float]:
    """Displayed traction jump of ``v_hat_k`` at ``q``: amplitudes on ``(F1(k), F2(k-2))``."""
    k = _require_high_k(k)
    lam, mu = params.lam, params.mu
    c2 = jump_constants(params, q, R).c2
    base = c2 * k * q**k * R ** (-2 * k)
    return -base * q * q * (lam + 3 * mu), base * (k - 2) * (lam + mu) * (q * q - R * R)


def base_V_hat(k: int, R: float, q: float, params: LameParameters) -> PiecewiseModeField:
    """Two-piece high-frequency base field (split at ``q`` only).

    Solves the constant-coefficient system off ``r = q``; it is not traction-matched
    at the shell interfaces ``r = 1`` and ``r = R``.
    """
    k = _require_high_k(k)
    if not q > R:
        raise ValueError("need q > R")
    alpha = plasmon_alpha(params)
    jc = jump_constants(params, q, R)
    c3, c4 = jc.c3, jc.c4
    inner = _interior_profile(k, alpha, q, c3 / k) + [(c4, "F2", k - 2, k - 2)]
    a = c4 * q ** (2 * (k - 2))
    # c4 q^{2(k-2)} [ r^{-(k-2)} F2(k-2) + (k-2) alpha (r^2 - q^2) r^{-k} F1(k) ] + (c3/k) q^{2k} r^{-k} F1(k)
    outer = [
        (a, "F2", k - 2, 2 - k),
        (a * (k - 2) * alpha, "F1", k, 2 - k),
        (-a * (k - 2) * alpha * q * q, "F1", k, -k),
        (c3 / k * q ** (2 * k), "F1", k, -k),
    ]
    pieces = [_piece(0.0, q, inner, q), _piece(q, math.inf, outer, q)]
    return PiecewiseModeField(pieces, k=k, family="F1", label="V_hat")


def V_hat_jump_amplitudes(k: int, R: float, q: float, params: LameParameters) -> tuple[float, float]:
    """Displayed traction jump of ``V_hat_k`` at ``q``: amplitudes on ``(F1(k), F2(k-2))``."""
    k = _require_high_k(k)
    lam, mu = params.lam, params.mu
    c5 = jump_constants(params, q, R).c5
    return -c5 * q**k * q * q * (lam + 3 * mu), c5 * q**k * (k - 2) * (lam + mu) * (q * q - R * R)


def source_coefficient_relation(params: LameParameters, q: float, R: float, k: int) -> float:
    """Ratio ``beta_k / gamma_{k-2}`` that lets one scaled base field carry both modes."""
    k = _require_high_k(k)
    if not q > R:
        raise ValueError("need q > R")
    lam, mu = params.lam, params.mu
    return -q * q * (lam + 3 * mu) / ((k - 2) * (lam + mu) * (q * q - R * R))


def tau_k_primal(beta_k: float, params: LameParameters, q: float, R: float, k: int) -> float:
    """Multiplier of ``v_hat_k`` reproducing the ``beta_k`` mode at ``q``."""
    k = _require_high_k(k)
    lam, mu = params.lam, params.mu
    c2 = jump_constants(params, q, R).c2
    return beta_k * q ** (-k) * R ** (2 * k) / (-c2 * k * q * q * (lam + 3 * mu))


def tau_k_high(beta_k: float, params: LameParameters, q: float, R: float, k: int) -> float:
    """Multiplier of ``V_hat_k`` reproducing the ``beta_k`` mode at ``q``."""
    k = _require_high_k(k)
    lam, mu = params.lam, params.mu
    c5 = jump_constants(params, q, R).c5
    return beta_k * q ** (-k) / (-c5 * q * q * (lam + 3 * mu))
