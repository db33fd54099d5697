"""Acceptance criteria, one test each.

Every test records a single ``criterion N: PASS|FAIL ...`` line with the measured
values at the stated tolerance; the lines are also printed in the terminal
summary. Criteria that the mathematics does not support are checked literally
and stay red.
"""

import math
import time

import numpy as np
import pytest

from elastoalr.elasticity import (
    conormal,
    displacement_jump,
    energy_norm_sq,
    lame_apply,
)
from elastoalr.fields import AngularFunction
from elastoalr.mode_solver import (
    SourceSpectrum,
    configuration_field,
    coupled_system_residuals,
    real_imag_split,
    solve_configuration,
)
from elastoalr.params import LameParameters, RadialProfile
from elastoalr.plasmon_waves import SHELL_INSIDE, SHELL_OUTSIDE, perfect_wave, perfect_wave_energy, wave_constant
from elastoalr.resonance_lab import (
    NON_RESONANT,
    RESONANT,
    classify,
    critical_radius_scan,
    default_delta_grid,
    log_variation,
    scan_truncation,
    sweep,
    tuned_source,
    unit_gamma_source,
)
from elastoalr.threed_check import (
    M_GROW,
    conormal_first_component,
    fit_proportionality,
    pooled_proportionality_test,
    proportionality_test,
    sphere_samples,
)
from elastoalr.variational import core_dual_trial, duality_table, nonresonant_primal_trial

from conftest import ACCEPTANCE_LINES
from oracles import energy_quadrature

P11 = LameParameters(1.0, 1.0)
R = 2.0
R_STAR = R**1.5


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _random_convex(rng, count):
    out = []
    for _ in range(count):
        mu = float(rng.uniform(0.2, 5.0))
        lam = float(rng.uniform(-mu + 0.05, 5.0))
        out.append(LameParameters(lam, mu))
    return out


def test_criterion_1_plasmon_energy():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst_closed = worst_quad = 0.0
    for p in _random_convex(rng, 20):
        for k in range(1, 9):
            for Rs in (0.5, 1.0, 2.0):
                ref = 8 * k * math.pi * p.mu * (p.lam + 2 * p.mu) / (p.lam + 3 * p.mu) * Rs ** (2 * k)
                psi = perfect_wave(k, Rs, p)
                worst_closed = max(worst_closed, abs(energy_norm_sq(p, psi) - ref) / ref,
                                   abs(perfect_wave_energy(k, Rs, p) - ref) / ref)
                worst_quad = max(worst_quad, abs(energy_quadrature(p, psi) - ref) / ref)
    dt = time.perf_counter() - t0
    ok = worst_closed <= 1e-10 and worst_quad <= 1e-7 and dt < 5
    record(1, ok, f"closed-form rel err {worst_closed:.2e} (<=1e-10), quadrature rel err {worst_quad:.2e} "
                  f"(<=1e-7), 480 cases, {dt:.2f}s (<5s)")


def test_criterion_2_perfect_wave_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    th = rng.uniform(0, 2 * np.pi, 200)
    worst_cont = worst_lame = worst_ratio = 0.0
    for variant in (SHELL_OUTSIDE, SHELL_INSIDE):
        c = wave_constant(P11, variant)
        for k in range(2 if variant == SHELL_INSIDE else 1, 13):
            Rs = 1.3
            psi = perfect_wave(k, Rs, P11, variant)
            scale = psi.trace(Rs, "inner").norm()
            worst_cont = max(worst_cont, displacement_jump(psi, Rs).norm() / scale)
            lu = lame_apply(P11, psi)
            for pc, lpc in zip(psi.pieces, lu.pieces):
                hi = pc.r_out if math.isfinite(pc.r_out) else 3 * Rs
                r = rng.uniform(max(pc.r_in, 1e-3), hi, 200)
                ref = np.max(np.abs(np.array(pc(r, th)))) * k * k / max(r.min(), 1e-3) ** 2
                worst_lame = max(worst_lame, np.max(np.abs(np.array(lpc(r, th)))) / ref)
            t_in, t_out = conormal(P11, psi, Rs, "inner"), conormal(P11, psi, Rs, "outer")
            a, b = np.array(t_in(th)), np.array(t_out(th))
            worst_ratio = max(worst_ratio, np.max(np.abs(b - c * a)) / np.max(np.abs(b)))
    dt = time.perf_counter() - t0
    ok = worst_cont <= 1e-12 and worst_lame <= 1e-10 and worst_ratio <= 1e-10 and dt < 5
    record(2, ok, f"continuity {worst_cont:.2e} (<=1e-12), Lame residual {worst_lame:.2e} (<=1e-10), "
                  f"traction ratio err {worst_ratio:.2e} (<=1e-10), k<=12 both variants, {dt:.2f}s (<5s)")


def _nocore_sweep():
    prof = RadialProfile.plasmonic(P11, R, 0.1)
    return sweep(prof, P11, SourceSpectrum.single(3.0, "F2", 3), default_delta_grid(1e-1, 1e-7, 7))


def test_criterion_3_nocore_resonance():
    t0 = time.perf_counter()
    sw = _nocore_sweep()
    e = sw.energies
    cls = classify(sw)
    dt = time.perf_counter() - t0
    increasing = bool(np.all(np.diff(e) > 0))
    ratio = e[-1] / e[0]
    ok = increasing and ratio >= 1e3 and cls.verdict == RESONANT and cls.p >= 0.5 and dt < 10
    record(3, ok, f"strictly increasing={increasing}, E(1e-7)/E(1e-1)={ratio:.3e} (>=1e3), "
                  f"verdict={cls.verdict}, p={cls.p:.3f} (>=0.5), {dt:.2f}s (<10s)")


def _tuned_config():
    grid = default_delta_grid(1e-1, 1e-6, 6)
    prof = RadialProfile.plasmonic(P11, R, 0.1, core_radius=1.0)
    K = scan_truncation(R, float(grid[-1]))
    return prof, tuned_source(P11, 3.5, R, K), grid


def test_criterion_4_duality_sandwich():
    t0 = time.perf_counter()
    rows = duality_table(RadialProfile.plasmonic(P11, R, 0.1), P11, SourceSpectrum.single(3.0, "F2", 3),
                         default_delta_grid(1e-1, 1e-7, 7))
    prof, src, grid = _tuned_config()
    rows += duality_table(prof, P11, src, grid)
    dt = time.perf_counter() - t0
    bad = [r for r in rows if not r.ok]
    resid = max(max(r.lower_residual, r.upper_residual) for r in rows)
    trials = sorted({f"{r.lower_trial}/{r.upper_trial}" for r in rows})
    worst_lo = min((r.E - r.J) / max(1.0, r.E) for r in rows)
    worst_hi = min((r.I - r.E) / max(1.0, r.E) for r in rows)
    ok = not bad and resid < 1e-9 and dt < 30
    record(4, ok, f"{len(rows) - len(bad)}/{len(rows)} rows with J-tol<=E<=I+tol (tol=1e-8*max(1,E)), "
                  f"min (E-J)/max(1,E)={worst_lo:.2e}, min (I-E)/max(1,E)={worst_hi:.2e}, "
                  f"trial residual<= {resid:.1e}, trials {trials}, {dt:.2f}s (<30s)")


def test_criterion_5_alr_inside_critical_radius():
    t0 = time.perf_counter()
    q = 2.5
    grid = default_delta_grid()
    K = scan_truncation(R, float(grid[-1]))
    prof = RadialProfile.plasmonic(P11, R, 0.1, core_radius=1.0)
    src = unit_gamma_source(q, K)
    cls = classify(sweep(prof, P11, src, grid))
    growth = [core_dual_trial(float(d), P11, R, q, src.gamma).growth for d in grid]
    mono = bool(np.all(np.diff(growth) > 0))
    dt = time.perf_counter() - t0
    ok = cls.verdict == RESONANT and mono and dt < 60
    record(5, ok, f"q=2.5 verdict={cls.verdict} (p={cls.p:.3f}), (R^3/q^2)^k/k over grid "
                  f"{growth[0]:.3f}->{growth[-1]:.3f} monotone={mono}, {dt:.2f}s (<60s)")


def test_criterion_6_nonresonance_outside_critical_radius():
    t0 = time.perf_counter()
    prof, src, grid = _tuned_config()
    sw = sweep(prof, P11, src, grid)
    cls = classify(sw)
    tv = log_variation(sw.energies, "total")
    I = [nonresonant_primal_trial(float(d), P11, R, 3.5, src).value for d in grid]
    spread = max(I) / min(I)
    dt = time.perf_counter() - t0
    ok = cls.verdict == NON_RESONANT and tv < 0.2 and spread < 2 and dt < 60
    record(6, ok, f"verdict={cls.verdict}, total variation of log E over [1e-6,1e-1]={tv:.3f} (<0.2), "
                  f"I sup/inf={spread:.3e} (<2), E {sw.energies[0]:.3e}->{sw.energies[-1]:.3e}, "
                  f"I {max(I):.3e}->{min(I):.3e}, {dt:.2f}s (<60s)")


def test_criterion_7_critical_radius_scan():
    t0 = time.perf_counter()
    prof = RadialProfile.plasmonic(P11, R, 0.1, core_radius=1.0)
    res = critical_radius_scan(prof, P11, workers=4)
    dt = time.perf_counter() - t0
    err = res.relative_error
    verdicts = " ".join(f"{r.q:.1f}:{r.verdict[0]}" for r in res.rows)
    ok = res.transition is not None and err <= 0.15 and dt < 300
    record(7, ok, f"transition={res.transition} vs R*={R_STAR:.4f}, rel err {err:.3f} (<=0.15), "
                  f"rows [{verdicts}], {dt:.1f}s (<300s)")


def test_criterion_8_coupled_split():
    rng = np.random.default_rng(11)
    worst_res = worst_split = 0.0
    for p in _random_convex(rng, 10):
        Rs = float(rng.uniform(1.3, 3.0))
        core = float(rng.choice([0.0, rng.uniform(0.3, 0.9) * Rs]))
        q = Rs * float(rng.uniform(1.1, 2.0))
        delta = 10.0 ** float(rng.uniform(-6, -1))
        fams = {n: {int(k): float(rng.normal()) for k in rng.choice(np.arange(1, 8), 2, replace=False)}
                for n in ("beta", "gamma", "xi", "eta")}
        src = SourceSpectrum(q, **fams)
        prof = RadialProfile.plasmonic(p, Rs, delta, core_radius=core)
        E = solve_configuration(prof, p, src).total_energy
        v, w = real_imag_split(configuration_field(prof, p, src), delta)
        jump = AngularFunction()
        for af in src.blocks().values():
            jump = jump + af
        worst_res = max(worst_res, *coupled_system_residuals(p, prof, v, w, q, jump))
        split = 0.5 * delta * energy_norm_sq(p, v) + 0.5 / delta * energy_norm_sq(p, w)
        worst_split = max(worst_split, abs(split - E) / E)
    ok = worst_res <= 1e-9 and worst_split <= 1e-12
    record(8, ok, f"coupled-system residual {worst_res:.2e} (<=1e-9), energy split rel err "
                  f"{worst_split:.2e} (<=1e-12), 10 random configs")


def test_criterion_9_threed_nonexistence():
    t0 = time.perf_counter()
    reps = [proportionality_test(P11, n, m, 50) for n in (2, 3, 4) for m in range(-n, n + 1)]
    min_res = min(r.relative_residual for r in reps)
    cs = sorted({round(r.best_fit_c, 9) for r in reps})
    tm = conormal_first_component(P11, M_GROW, 3, 1, sphere_samples(50))
    planted = fit_proportionality(tm, 3 * tm)
    pooled = pooled_proportionality_test(P11, [2, 3, 4])
    dt = time.perf_counter() - t0
    ok = min_res > 0.1 and planted.relative_residual < 1e-12 and abs(planted.best_fit_c - 3) < 1e-12 and dt < 10
    record(9, ok, f"per-(n,m) min residual {min_res:.2e} (>0.1) with per-order c {cs}; "
                  f"planted c={planted.best_fit_c:.12g} residual {planted.relative_residual:.1e} (<1e-12); "
                  f"pooled n=2..4 single-c residual {pooled.relative_residual:.3f}; {dt:.2f}s (<10s)")


def test_criterion_10_determinism():
    a = _nocore_sweep().to_csv()
    b = _nocore_sweep().to_csv()
    prof, src, grid = _tuned_config()
    c = sweep(prof, P11, src, grid, workers=1).to_csv()
    d = sweep(prof, P11, src, grid, workers=4).to_csv()
    ok = a == b and c == d
    record(10, ok, f"repeated no-core sweep identical={a == b}, tuned sweep workers 1 vs 4 identical={c == d} "
                   f"({len(a)} and {len(c)} bytes)")
