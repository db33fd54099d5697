"""Primal and dual energy functionals, their constraints and explicit trial pairs.

With the real base moduli ``(lambda, mu)`` and the real amplitude profile ``A``:

* primal: ``I(v, w) = (delta/2) P(v, v) + (1/(2 delta)) P(w, w)`` subject to
  ``A L v - L w = f``; every admissible pair gives ``E <= I``.
* dual: ``J(v, psi) = int f.psi - (delta/2) P(v, v) - (delta/2) P(psi, psi)``
  subject to ``A L psi + delta L v = 0``; every admissible pair gives ``E >= J``.

For the closed-form fields used here ``L`` acts only through traction jumps on
circles, so each constraint is checked circle by circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .elasticity import bilinear_P, conormal, energy_norm_sq, lame_residual_norm, traction_jump
from .errors import BoundViolationError
from .fields import AngularFunction, PiecewiseModeField, sum_fields
from .mode_solver import SourceSpectrum, freespace_traction_solve, real_imag_split
from .params import SHEAR_FAMILY, LameParameters, RadialProfile, plasmon_constant
from .plasmon_waves import (
    SHELL_OUTSIDE,
    base_v_hat,
    base_V_hat,
    perfect_wave,
    perfect_wave_energy,
    source_coefficient_relation,
    tau_k_high,
    tau_k_primal,
)

CONSTRAINT_TOL = 1e-9


@dataclass
class PrimalPair:
    v: PiecewiseModeField
    w: PiecewiseModeField
    constraint_residual: float = float("nan")
    info: dict = field(default_factory=dict)

    def admissible(self, tol: float = CONSTRAINT_TOL) -> bool:
        return self.constraint_residual < tol


@dataclass
class DualPair:
    v: PiecewiseModeField
    psi: PiecewiseModeField
    constraint_residual: float = float("nan")
    info: dict = field(default_factory=dict)

    def admissible(self, tol: float = CONSTRAINT_TOL) -> bool:
        return self.constraint_residual < tol


def primal_I(delta: float, pair: PrimalPair, params: LameParameters) -> float:
    if delta <= 0:
        raise ValueError("delta must be positive")
    return 0.5 * delta * energy_norm_sq(params, pair.v) + 0.5 / delta * energy_norm_sq(params, pair.w)


def dual_J(delta: float, source: SourceSpectrum, pair: DualPair, params: LameParameters) -> float:
    if delta <= 0:
        raise ValueError("delta must be positive")
    work = source.pairing(pair.psi) if not source.is_empty else 0.0
    return work - 0.5 * delta * energy_norm_sq(params, pair.v) - 0.5 * delta * energy_norm_sq(params, pair.psi)


# ---------------------------------------------------------------------------
# constraint residuals


def _circles(profile: RadialProfile, q: float | None, *fields):
    pts = set(profile.interfaces)
    if q is not None:
        pts.add(q)
    for f in fields:
        pts |= set(f.breakpoints)
    return sorted(pts)


def _amp_jump(params, fld, s, profile, weight=None):
    """``[a T(fld)]`` across ``r = s`` with ``a`` the amplitude (or a 0/1 weight)."""
    a_in = profile.amplitude(s, "inner") if weight is None else weight
    a_out = profile.amplitude(s, "outer") if weight is None else weight
    return traction_jump(params, fld, s, a_in, a_out)


def _trace_scale(params, fld, s, factor=1.0):
    if s in fld.breakpoints:
        return max(conormal(params, fld, s, "inner").norm(), conormal(params, fld, s, "outer").norm()) * abs(factor)
    return conormal(params, fld, s).norm() * abs(factor)


def primal_constraint_residual(params, profile, source: SourceSpectrum, v, w) -> float:
    """Relative mismatch of ``A L v - L w = f`` summed over circles (weight 1 each)."""
    total = 0.0
    scale = 0.0
    fsrc = AngularFunction()
    for af in source.blocks().values():
        fsrc = fsrc + af
    for s in _circles(profile, source.q, v, w):
        res = _amp_jump(params, v, s, profile) - _amp_jump(params, w, s, profile, 1.0)
        if s == source.q:
            res = res - fsrc
        total += res.norm()
        scale = max(scale, _trace_scale(params, v, s, max(map(abs, profile.amplitudes))), _trace_scale(params, w, s))
    scale = max(scale, fsrc.norm(), 1e-300)
    interior = max(lame_residual_norm(params, v), lame_residual_norm(params, w))
    return total / scale + interior


def dual_constraint_residual(params, profile, delta, v, psi) -> float:
    """Relative mismatch of ``A L psi + delta L v = 0`` summed over circles."""
    total = 0.0
    scale = 0.0
    for s in _circles(profile, None, v, psi):
        res = _amp_jump(params, psi, s, profile) + _amp_jump(params, v, s, profile, 1.0) * delta
        total += res.norm()
        scale = max(scale, _trace_scale(params, psi, s, max(map(abs, profile.amplitudes))), _trace_scale(params, v, s, delta))
    if scale == 0:
        return 0.0
    interior = max(lame_residual_norm(params, v), lame_residual_norm(params, psi))
    return total / scale + interior


# ---------------------------------------------------------------------------
# sandwich


@dataclass
class SandwichReport:
    energy: float
    upper: float
    lower: float
    tol: float
    ok: bool
    upper_margin: float
    lower_margin: float


def sandwich_check(E_solver: float, I_value: float | None, J_value: float | None, tol: float, strict: bool = True):
    """Check ``J - tol <= E <= I + tol``; ``None`` skips a side."""
    upper = math.inf if I_value is None else float(I_value)
    lower = -math.inf if J_value is None else float(J_value)
    ok = (lower - tol <= E_solver) and (E_solver <= upper + tol)
    rep = SandwichReport(E_solver, upper, lower, tol, ok, upper - E_solver, E_solver - lower)
    if strict and not ok:
        raise BoundViolationError(
            f"bounds do not bracket the energy: J={lower!r}, E={E_solver!r}, I={upper!r} (tol={tol:g})",
            energy=E_solver,
            upper=upper,
            lower=lower,
        )
    return rep


# ---------------------------------------------------------------------------
# frequency selection


def _check_R_delta(R, delta):
    if not R > 1:
        raise ValueError("R must exceed 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")


def select_k_delta(R: float, delta: float) -> int:
    """Smallest ``k`` with ``R^{-k} < delta`` (then also ``R^{-k+1} >= delta``)."""
    _check_R_delta(R, delta)
    k = max(1, math.floor(math.log(1 / delta) / math.log(R)) - 1)
    while R ** (-k) >= delta:
        k += 1
    while k > 1 and R ** (-(k - 1)) < delta:
        k -= 1
    assert R ** (-k) < delta and R ** (-k + 1) >= delta
    return k


def select_k_star(R: float, delta: float) -> int:
    """Smallest ``k*`` with ``R^{k*} >= 1/delta``; it also meets ``delta <= R^{-k*+1}``."""
    _check_R_delta(R, delta)
    k = 1
    while R**k * delta < 1:
        k += 1
    assert delta <= R ** (-k + 1)
    return k


# ---------------------------------------------------------------------------
# dual trials


def nocore_dual_trial(k: int, tau: float, params: LameParameters, R: float) -> DualPair:
    """``(0, tau psi_k)`` for the core-free profile; admissible for every ``delta``."""
    psi = perfect_wave(k, R, params, SHELL_OUTSIDE) * tau
    return DualPair(PiecewiseModeField.zero(), psi, 0.0, {"k": k, "tau": tau})


def nocore_dual_value(delta, gamma_k, tau, params, R, q, k) -> float:
    """Closed form of ``J`` for the core-free trial against ``gamma_k F2(k)``."""
    lam, mu = params.lam, params.mu
    return 2 * math.pi * q * gamma_k * tau * q ** (-k) * R ** (2 * k) - delta * tau**2 * 4 * k * math.pi * mu * (
        lam + 2 * mu
    ) / (lam + 3 * mu) * R ** (2 * k)


def nocore_optimal_tau(delta, gamma_k, params, q, k) -> float:
    """Maximizer of :func:`nocore_dual_value` over ``tau``."""
    lam, mu = params.lam, params.mu
    return 2 * math.pi * q * gamma_k * q ** (-k) / (2 * delta * 4 * k * math.pi * mu * (lam + 2 * mu) / (lam + 3 * mu))


def nocore_tau_sequence(delta: float) -> float:
    """``delta^{-1/2} / log(1/delta)``: grows while ``delta tau^2 -> 0``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return delta**-0.5 / math.log(1 / delta)


def core_tau(C: float, c0: float, gamma_k: float, R: float, q: float, k: int) -> float:
    """``tau = c0 gamma_k (R/q)^k / (2 C k)``."""
    return c0 * gamma_k * (R / q) ** k / (2 * C * k)


def core_lower_bound(C: float, c0: float, gamma_k: float, R: float, q: float, k: int) -> float:
    """``(c0 gamma_k)^2 (R^3/q^2)^k / (4 C k)``."""
    return (c0 * gamma_k) ** 2 * (R**3 / q**2) ** k / (4 * C * k)


def _coef(seq, k):
    if callable(seq):
        return float(seq(k))
    if isinstance(seq, dict):
        return float(seq.get(k, 0.0))
    return float(seq[k - 1]) if 1 <= k <= len(seq) else 0.0


@dataclass
class CoreDualTrial:
    pair: DualPair
    k: int
    tau: float
    C: float
    c0: float
    bound: float
    growth: float


def core_dual_trial(
    delta: float,
    params: LameParameters,
    R: float,
    q: float,
    gamma,
    core_radius: float = 1.0,
    k: int | None = None,
) -> CoreDualTrial:
    """Dual witness ``(v, tau psi_k)`` for a core ``B_{core_radius}`` inside the shell.

    ``psi_k`` is the core-free perfect wave, which fails the constraint only on
    the core boundary; ``v`` is the free-space field cancelling that mismatch.
    ``C`` is calibrated so the displayed quadratic bound is the exact value of
    ``J`` at the displayed ``tau``; ``c0 = 2 pi q``.
    """
    if not 0 < core_radius < R < q:
        raise ValueError("need 0 < core radius < R < q")
    k = select_k_delta(R, delta) if k is None else int(k)
    g = _coef(gamma, k)
    if g == 0:
        raise ValueError(f"degenerate trial: gamma_{k} = 0")
    c = plasmon_constant(params, SHEAR_FAMILY)
    psi1 = perfect_wave(k, R, params, SHELL_OUTSIDE)
    flux = conormal(params, psi1, core_radius)
    v1 = freespace_traction_solve(params, [(core_radius, flux * (-(c - 1.0) / delta))])
    quad = 0.5 * delta * (energy_norm_sq(params, v1) + perfect_wave_energy(k, R, params))
    C = quad / (k * R**k)
    c0 = 2 * math.pi * q
    tau = core_tau(C, c0, g, R, q, k)
    pair = DualPair(v1 * tau, psi1 * tau, info={"k": k, "tau": tau})
    prof = RadialProfile.plasmonic(params, R, delta, core_radius=core_radius)
    pair.constraint_residual = dual_constraint_residual(params, prof, delta, pair.v, pair.psi)
    return CoreDualTrial(pair, k, tau, C, c0, core_lower_bound(C, c0, g, R, q, k), (R**3 / q**2) ** k / k)


# ---------------------------------------------------------------------------
# primal trials


def make_nonresonant_source(params: LameParameters, q: float, R: float, beta) -> SourceSpectrum:
    """Source ``sum beta_k F1(k) + gamma_{k-2} F2(k-2)`` with the tuned ratio.

    ``beta`` is a dict ``{k: beta_k}`` or a sequence starting at ``k = 1``.
    """
    if isinstance(beta, dict):
        items = dict(beta)
    else:
        items = {i + 1: float(b) for i, b in enumerate(beta)}
    for k in (1, 2):
        if items.get(k, 0.0) != 0:
            raise ValueError("beta_1 and beta_2 must vanish for the tuned source")
    bdict, gdict = {}, {}
    for k, b in sorted(items.items()):
        if k < 3 or b == 0:
            continue
        bdict[k] = b
        gdict[k - 2] = b / source_coefficient_relation(params, q, R, k)
    return SourceSpectrum(q, beta=bdict, gamma=gdict)


def check_tuned_source(params, source: SourceSpectrum, R: float, rtol: float = 1e-12) -> None:
    if source.xi or source.eta:
        raise ValueError("tuned source carries only F1/F2 modes")
    if any(k < 3 for k in source.beta):
        raise ValueError("beta_1 and beta_2 must vanish")
    for k, b in source.beta.items():
        g = source.gamma.get(k - 2, 0.0)
        want = b / source_coefficient_relation(params, source.q, R, k)
        if abs(g - want) > rtol * max(abs(want), 1e-300):
            raise ValueError(f"coefficient relation violated at k={k}: gamma_{k - 2}={g}, expected {want}")
    for k in source.gamma:
        if k + 2 not in source.beta:
            raise ValueError(f"gamma_{k} has no partner beta_{k + 2}")


@dataclass
class NonresonantTrial:
    pair: PrimalPair
    k_star: int
    value: float
    low_energy: float
    high_energy: float
    w_energy: float


def nonresonant_primal_trial(
    delta: float,
    params: LameParameters,
    R: float,
    q: float,
    source: SourceSpectrum,
    k_star: int | None = None,
) -> NonresonantTrial:
    """Primal witness for the core ``B_1`` profile and a tuned source.

    Modes up to ``k*`` use the exact base fields ``v_hat``; higher modes use
    ``V_hat`` and the free-space field ``w`` absorbs their traction mismatch at
    ``r = 1`` and ``r = R``.
    """
    if not 1.0 < R < q:
        raise ValueError("need 1 < R < q")
    if source.q != q:
        raise ValueError("source radius differs from q")
    check_tuned_source(params, source, R)
    k_star = select_k_star(R, delta) if k_star is None else int(k_star)
    c = plasmon_constant(params, SHEAR_FAMILY)
    low, high, jumps1, jumpsR = [], [], AngularFunction(), AngularFunction()
    for k, b in sorted(source.beta.items()):
        if k <= k_star:
            low.append(base_v_hat(k, R, q, params) * tau_k_primal(b, params, q, R, k))
        else:
            t = tau_k_high(b, params, q, R, k)
            V = base_V_hat(k, R, q, params) * t
            high.append(V)
            jumps1 = jumps1 + conormal(params, V, 1.0) * (c - 1.0)
            jumpsR = jumpsR + conormal(params, V, R) * (1.0 - c)
    v_low = sum_fields(low) if low else PiecewiseModeField.zero()
    v_high = sum_fields(high) if high else PiecewiseModeField.zero()
    v = v_low + v_high
    w = freespace_traction_solve(params, [(1.0, jumps1), (R, jumpsR)]) if high else PiecewiseModeField.zero()
    pair = PrimalPair(v, w, info={"k_star": k_star})
    prof = RadialProfile.plasmonic(params, R, delta, core_radius=1.0)
    pair.constraint_residual = primal_constraint_residual(params, prof, source, v, w)
    e_low = 0.5 * delta * energy_norm_sq(params, v_low)
    e_high = 0.5 * delta * energy_norm_sq(params, v_high)
    e_w = 0.5 / delta * energy_norm_sq(params, w)
    return NonresonantTrial(pair, k_star, primal_I(delta, pair, params), e_low, e_high, e_w)


def solution_primal_pair(solution, delta: float, perturbation: PiecewiseModeField | None = None) -> PrimalPair:
    """``(Re u, delta Im u)`` from a solver field, optionally shifted by ``v += perturbation``.

    The perturbation must satisfy ``A L p = 0`` (for example a perfect wave of the
    core-free profile) so the shifted pair stays admissible.
    """
    v, w = real_imag_split(solution, delta)
    if perturbation is not None:
        v = v + perturbation
    return PrimalPair(v, w)


def solution_dual_pair(solution, delta: float) -> DualPair:
    """``(Re u, Im u)``: the maximizer of ``J``."""
    fld = solution.field if hasattr(solution, "field") else solution
    return DualPair(fld.real(), fld.imag())


def pair_cross_energy(params, a: PiecewiseModeField, b: PiecewiseModeField) -> float:
    return float(np.real(bilinear_P(params, a, b)))


# ---------------------------------------------------------------------------
# bounds across a loss grid


@dataclass
class BoundsRow:
    delta: float
    J: float
    E: float
    I: float
    lower_trial: str
    upper_trial: str
    lower_residual: float
    upper_residual: float

    def tol(self) -> float:
        return 1e-8 * max(1.0, self.E)

    @property
    def ok(self) -> bool:
        t = self.tol()
        return self.J - t <= self.E <= self.I + t


def _single_gamma(source: SourceSpectrum):
    if source.beta or source.xi or source.eta or len(source.gamma) != 1:
        return None
    (k, g), = source.gamma.items()
    return k, g


def duality_row(delta: float, profile: RadialProfile, params: LameParameters, source: SourceSpectrum) -> BoundsRow:
    """Solver energy bracketed by explicit trials.

    * no core, single ``gamma_k`` source: ``J`` from the perfect-wave trial at
      its optimal multiplier; ``I`` from the exact split pair shifted by a
      multiple of the same wave (admissible, so ``I >= E``);
    * core ``B_1`` with a tuned source: ``J`` from the core trial, ``I`` from the
      high/low-frequency primal trial (``J = 0`` from the zero pair once
      ``k_delta`` leaves the source support);
    * otherwise both sides come from the exact pairs.
    """
    from .mode_solver import configuration_field, solve_configuration

    prof = profile.with_delta(delta)
    E = solve_configuration(prof, params, source).total_energy
    fld = configuration_field(prof, params, source)
    R, q = profile.shell_radius, source.q
    single = _single_gamma(source)
    tuned = False
    if profile.has_core and profile.core_radius == 1.0 and source.beta:
        try:
            check_tuned_source(params, source, R)
            tuned = True
        except ValueError:
            tuned = False
    if not profile.has_core and single is not None:
        k, g = single
        tau = nocore_optimal_tau(delta, g, params, q, k)
        dual = nocore_dual_trial(k, tau, params, R)
        J = dual_J(delta, source, dual, params)
        psi = perfect_wave(k, R, params, SHELL_OUTSIDE)
        s = math.sqrt(max(E, 1e-300) / (delta * perfect_wave_energy(k, R, params)))
        primal = solution_primal_pair(fld, delta, psi * s)
        primal.constraint_residual = primal_constraint_residual(params, prof, source, primal.v, primal.w)
        return BoundsRow(delta, J, E, primal_I(delta, primal, params), "perfect-wave", "exact+wave",
                         dual.constraint_residual, primal.constraint_residual)
    if tuned:
        nt = nonresonant_primal_trial(delta, params, R, q, source)
        if source.gamma.get(select_k_delta(R, delta), 0.0) != 0.0:
            ct = core_dual_trial(delta, params, R, q, source.gamma, core_radius=1.0)
            J, lower, lres = dual_J(delta, source, ct.pair, params), "core-wave", ct.pair.constraint_residual
        else:
            # k_delta lies outside the source support: fall back to the zero pair
            J, lower, lres = 0.0, "zero", 0.0
        return BoundsRow(delta, J, E, nt.value, lower, "tuned-primal", lres, nt.pair.constraint_residual)
    dual = solution_dual_pair(fld, delta)
    primal = solution_primal_pair(fld, delta)
    J = dual_J(delta, source, dual, params)
    return BoundsRow(delta, J, E, primal_I(delta, primal, params), "exact", "exact", 0.0, 0.0)


def duality_table(profile, params, source, delta_grid) -> list[BoundsRow]:
    return [duality_row(float(d), profile, params, source) for d in delta_grid]
