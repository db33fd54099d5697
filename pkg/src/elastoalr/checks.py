"""Invariant suite behind the ``verify`` command.

Each check is cheap and returns a :class:`CheckResult`; the suite never raises
for a failed check, only for programming errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elasticity import (
    bilinear_P,
    conormal,
    displacement_jump,
    energy_norm_sq,
    green_identity_residual,
    kelvin_matrix,
    lame_residual_norm,
)
from .fields import AngularFunction
from .mode_solver import (
    SourceSpectrum,
    configuration_field,
    coupled_system_residuals,
    real_imag_split,
    solve_configuration,
    solve_source_blocks,
)
from .params import LameParameters, RadialProfile, check_convexity
from .plasmon_waves import (
    SHELL_INSIDE,
    SHELL_OUTSIDE,
    V_hat_jump_amplitudes,
    base_V_hat,
    base_v_hat,
    perfect_wave,
    perfect_wave_energy,
    v_hat_jump_amplitudes,
    wave_constant,
)
from .resonance_lab import EnergySweep, NON_RESONANT, RESONANT, classify, default_delta_grid, sweep
from .threed_check import eval_B, fit_proportionality, sphere_samples
from .variational import (
    nocore_dual_trial,
    dual_J,
    nocore_optimal_tau,
    select_k_delta,
    select_k_star,
    solution_primal_pair,
    primal_I,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _kelvin_residual(params: LameParameters, dim: int, h: float = 1e-3) -> float:
    """Relative FD Lamé residual of the Kelvin matrix columns away from the origin."""
    lam, mu = params.lam, params.mu
    x0 = np.array([0.7, -0.4, 0.5][:dim])
    G = lambda x: kelvin_matrix(params, x, dim)
    eye = np.eye(dim)
    worst = 0.0
    for col in range(dim):
        u = lambda x: G(x)[:, col]
        lap = sum((u(x0 + h * e) - 2 * u(x0) + u(x0 - h * e)) / h**2 for e in eye)
        gd = np.zeros(dim)
        for i in range(dim):
            for j in range(dim):
                ei, ej = eye[i] * h, eye[j] * h
                d2 = (u(x0 + ei + ej) - u(x0 + ei - ej) - u(x0 - ei + ej) + u(x0 - ei - ej))[j] / (4 * h * h)
                gd[i] += d2
        res = mu * lap + (lam + mu) * gd
        worst = max(worst, float(np.linalg.norm(res)) / float(np.linalg.norm(lap) * mu + 1e-300))
    return worst


def run_checks(cfg) -> list[CheckResult]:
    """Run the invariant suite for a :class:`~elastoalr.config.RunConfig`."""
    out: list[CheckResult] = []

    def add(name, ok, detail=""):
        out.append(CheckResult(name, bool(ok), detail))

    params = cfg.params
    R, q = cfg.R, cfg.q
    add("lame pair strongly convex (2-D)", check_convexity(params, 2), f"lambda={params.lam}, mu={params.mu}")

    for k in range(1, 9):
        val = energy_norm_sq(params, perfect_wave(k, R, params))
        ref = perfect_wave_energy(k, R, params)
        add(f"plasmon energy closed form k={k}", _rel(val, ref) <= 1e-10, f"rel err {_rel(val, ref):.2e}")

    for variant in (SHELL_OUTSIDE, SHELL_INSIDE):
        psi = perfect_wave(3, R, params, variant)
        cont = displacement_jump(psi, R).norm() / max(psi.trace(R, "inner").norm(), 1e-300)
        add(f"perfect wave continuity [{variant}]", cont <= 1e-12, f"{cont:.2e}")
        res = lame_residual_norm(params, psi)
        add(f"perfect wave Lame residual [{variant}]", res <= 1e-10, f"{res:.2e}")
        c = wave_constant(params, variant)
        t_in = conormal(params, psi, R, "inner")
        t_out = conormal(params, psi, R, "outer")
        mis = (t_out - t_in * c).norm() / max(t_out.norm(), 1e-300)
        add(f"perfect wave traction ratio [{variant}]", mis <= 1e-10, f"{mis:.2e}")

    for dim in (2, 3):
        r = _kelvin_residual(params, dim)
        add(f"Kelvin matrix solves the Lame system ({dim}-D)", r <= 1e-4, f"FD residual {r:.2e}")

    psi = perfect_wave(3, R, params)
    g = green_identity_residual(params, psi, psi, 0.5 * R)
    scale = energy_norm_sq(params, psi, (0.0, 0.5 * R))
    add("Green identity on the interior disk", g <= 1e-9 * max(scale, 1.0), f"{g:.2e}")

    s1 = perfect_wave(2, R, params)
    s2 = perfect_wave(4, R, params)
    cross = abs(bilinear_P(params, s1, s2))
    add("angular orthogonality of the energy form", cross <= 1e-12 * energy_norm_sq(params, s2), f"{cross:.2e}")

    if q > R and R > 1:
        k = 3
        jv = conormal(params, base_v_hat(k, R, q, params), q, "outer") - conormal(
            params, base_v_hat(k, R, q, params), q, "inner"
        )
        a1, a2 = v_hat_jump_amplitudes(k, R, q, params)
        ref = AngularFunction.from_patterns({("F1", k): a1, ("F2", k - 2): a2})
        add("v_hat jump matches displayed amplitudes", (jv - ref).norm() <= 1e-10 * ref.norm(), "")
        Vh = base_V_hat(k, R, q, params)
        jV = conormal(params, Vh, q, "outer") - conormal(params, Vh, q, "inner")
        b1, b2 = V_hat_jump_amplitudes(k, R, q, params)
        ref = AngularFunction.from_patterns({("F1", k): b1, ("F2", k - 2): b2})
        add("V_hat jump matches displayed amplitudes", (jV - ref).norm() <= 1e-10 * ref.norm(), "")

    delta = 1e-2
    prof = cfg.profile(delta)
    src = cfg.source()
    sols = solve_source_blocks(prof, params, src)
    worst_d = max((s.displacement_residual for s in sols), default=0.0)
    worst_t = max((s.traction_residual for s in sols), default=0.0)
    add("solver displacement continuity", worst_d <= 1e-10, f"{worst_d:.2e}")
    add("solver traction matching", worst_t <= 1e-10, f"{worst_t:.2e}")
    worst_l = max((lame_residual_norm(params, s.field) for s in sols), default=0.0)
    add("solver field solves the Lame system piecewise", worst_l <= 1e-10, f"{worst_l:.2e}")
    res = solve_configuration(prof, params, src)
    add("dissipated energy finite and nonnegative", math.isfinite(res.total_energy) and res.total_energy >= 0, f"{res.total_energy:.6g}")
    res2 = solve_configuration(prof, params, src.scaled(2.0))
    add("energy quadratic in the source", _rel(res2.total_energy, 4 * res.total_energy) <= 1e-12, "")

    fld = configuration_field(prof, params, src)
    v, w = real_imag_split(fld, delta)
    jump = AngularFunction()
    for af in src.blocks().values():
        jump = jump + af
    r1, r2 = coupled_system_residuals(params, prof, v, w, src.q, jump)
    add("coupled real system residuals", max(r1, r2) <= 1e-9, f"{r1:.2e}, {r2:.2e}")
    split = 0.5 * delta * energy_norm_sq(params, v) + 0.5 / delta * energy_norm_sq(params, w)
    add("energy split identity", _rel(split, res.total_energy) <= 1e-12, f"{_rel(split, res.total_energy):.2e}")
    I = primal_I(delta, solution_primal_pair(fld, delta), params)
    add("primal functional at the exact pair equals the energy", _rel(I, res.total_energy) <= 1e-10, "")

    nc = RadialProfile.plasmonic(params, R, delta)
    single = SourceSpectrum.single(q, "F2", 3)
    Enc = solve_configuration(nc, params, single).total_energy
    tau = nocore_optimal_tau(delta, 1.0, params, q, 3)
    J = dual_J(delta, single, nocore_dual_trial(3, tau, params, R), params)
    add("dual lower bound below the energy (no core)", J <= Enc * (1 + 1e-8), f"J={J:.6g}, E={Enc:.6g}")

    e_f1 = solve_configuration(nc, params, SourceSpectrum.single(q, "F1", 3)).total_energy
    e_f3 = solve_configuration(nc, params, SourceSpectrum.single(q, "F3", 3)).total_energy
    add("rotation reciprocity F1/F3", _rel(e_f3, e_f1) <= 1e-10, "")

    if R > 1:
        kd = select_k_delta(R, 1e-4)
        add("k_delta selection", R ** (-kd) < 1e-4 <= R ** (-kd + 1), f"k={kd}")
        ks = select_k_star(R, 1e-4)
        add("k_star selection", R**ks >= 1e4 and 1e-4 <= R ** (-ks + 1), f"k={ks}")

    grid = default_delta_grid()
    c1 = classify(EnergySweep.synthetic(grid, lambda d: 1 / d))
    add("classify power law", c1.verdict == RESONANT and abs(c1.p - 1) <= 0.01, f"p={c1.p:.4f}")
    c2 = classify(EnergySweep.synthetic(grid, lambda d: 7.0))
    add("classify constant energy", c2.verdict == NON_RESONANT, c2.verdict)
    c3 = classify(EnergySweep.synthetic(grid, lambda d: 5e3 / d))
    add("classify scale invariance", c3.verdict == c1.verdict and abs(c3.p - c1.p) <= 1e-9, "")

    pts = sphere_samples(20, seed=1)
    tang = float(np.max(np.abs(np.sum(eval_B(3, 1, pts) * pts, axis=1))))
    add("3-D tangential field is tangent", tang <= 1e-12, f"{tang:.2e}")
    rng = np.random.default_rng(3)
    tm = rng.normal(size=60)
    rep = fit_proportionality(tm, 3 * tm)
    add("3-D planted proportionality", abs(rep.best_fit_c - 3) <= 1e-12 and rep.relative_residual < 1e-12, "")

    small = default_delta_grid(1e-1, 1e-4, 4)
    a = sweep(nc, params, single, small).to_csv()
    b = sweep(nc, params, single, small, workers=2).to_csv()
    add("sweep determinism", a == b, "")
    return out
