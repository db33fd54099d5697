import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastoalr.errors import NearSingularError
from elastoalr.mode_solver import SourceSpectrum
from elastoalr.params import LameParameters, RadialProfile
from elastoalr.resonance_lab import (
    NON_RESONANT,
    RESONANT,
    SWEEP_COLUMNS,
    UNDETERMINED,
    WEAKLY_RESONANT,
    EnergySweep,
    ScanRow,
    Thresholds,
    classify,
    critical_radius,
    critical_radius_scan,
    default_delta_grid,
    fit_exponent,
    log_variation,
    sweep,
    transition_estimate,
    tuned_source,
    unit_gamma_source,
)

P11 = LameParameters(1.0, 1.0)
GRID = default_delta_grid(1e-1, 1e-7, 7)


def test_default_grid():
    g = default_delta_grid()
    assert g.size == 8 and g[0] == pytest.approx(1e-1) and g[-1] == pytest.approx(1e-8)
    assert np.all(np.diff(g) < 0)


def test_power_law_is_resonant():
    c = classify(EnergySweep.synthetic(default_delta_grid(), lambda d: 1 / d))
    assert c.verdict == RESONANT and c.p == pytest.approx(1.0, abs=0.01)


def test_constant_is_nonresonant():
    c = classify(EnergySweep.synthetic(default_delta_grid(), lambda d: 7.0))
    assert c.verdict == NON_RESONANT and c.p == pytest.approx(0.0, abs=1e-12)


def test_oscillating_limsup_is_weakly_resonant():
    grid = np.logspace(-1, -8, 40)
    c = classify(EnergySweep.synthetic(grid, lambda d: abs(math.sin(math.log(1 / d))) / d + 1))
    assert c.verdict == WEAKLY_RESONANT
    assert c.diagnostics["running_max_growth"] > 1.0 and not c.diagnostics["monotone_final"]


def test_decaying_energy_is_nonresonant():
    assert classify(EnergySweep.synthetic(GRID, lambda d: d)).verdict == NON_RESONANT


def test_total_variation_rule_is_selectable():
    sw = EnergySweep.synthetic(GRID, lambda d: d)
    c = classify(sw, Thresholds(variation="total"))
    assert c.verdict == UNDETERMINED
    assert c.diagnostics["total_variation"] == pytest.approx(math.log(1e3), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(p=st.floats(-1.0, 2.0), scale=st.floats(1e-6, 1e6), wiggle=st.floats(0.0, 0.5))
def test_scale_invariance(p, scale, wiggle):
    f = lambda d: d**-p * (1 + wiggle * math.sin(7 * math.log(d)) ** 2)
    a = classify(EnergySweep.synthetic(GRID, f))
    b = classify(EnergySweep.synthetic(GRID, lambda d: scale * f(d)))
    assert a.verdict == b.verdict
    assert b.p == pytest.approx(a.p, abs=1e-9)


@pytest.mark.parametrize("p", [0.3, 1.0, 1.7])
def test_subsampling_stability(p):
    grid = np.logspace(-1, -8, 15)
    full = classify(EnergySweep.synthetic(grid, lambda d: 3 * d**-p))
    half = classify(EnergySweep.synthetic(grid[::2], lambda d: 3 * d**-p))
    assert half.p == pytest.approx(full.p, rel=0.05)


def test_fit_and_variation_helpers():
    d = np.array([1e-1, 1e-2, 1e-3])
    assert fit_exponent(d, 5 / d**2) == pytest.approx(2.0)
    assert log_variation([1.0, math.e, 1.0]) == pytest.approx(2.0)
    assert log_variation([1.0, math.e, 1.0], "upward") == pytest.approx(1.0)
    with pytest.raises(ValueError):
        log_variation([1.0, 2.0], "sideways")


def test_nonfinite_energies_undetermined():
    sw = EnergySweep.synthetic(GRID, lambda d: float("inf") if d < 1e-5 else 1.0)
    assert classify(sw).verdict == UNDETERMINED


def test_classify_needs_four_rows():
    with pytest.raises(ValueError):
        classify(EnergySweep.synthetic([0.1, 0.01, 0.001], lambda d: 1.0))


def test_empty_source_sweep():
    sw = sweep(RadialProfile.plasmonic(P11, 2.0, 0.1), P11, SourceSpectrum(3.0), GRID)
    assert len(sw.rows) == GRID.size and np.all(sw.energies == 0)
    assert classify(sw).verdict == NON_RESONANT


def test_sweep_grid_validation():
    prof = RadialProfile.plasmonic(P11, 2.0, 0.1)
    src = SourceSpectrum.single(3.0, "F2", 3)
    with pytest.raises(ValueError):
        sweep(prof, P11, src, [0.1, 0.01, 0.001])
    with pytest.raises(ValueError):
        sweep(prof, P11, src, [1.5, 0.1, 0.01, 0.001])


@pytest.mark.parametrize("k", range(1, 7))
def test_nocore_single_mode_resonant(k):
    prof = RadialProfile.plasmonic(P11, 2.0, 0.1)
    sw = sweep(prof, P11, SourceSpectrum.single(3.0, "F2", k), GRID)
    assert np.all(np.diff(sw.energies) > 0)
    c = classify(sw)
    assert c.verdict == RESONANT and c.p >= 0.5


def test_sweep_deterministic_across_workers():
    prof = RadialProfile.plasmonic(P11, 2.0, 0.1, core_radius=1.0)
    src = unit_gamma_source(2.5, 12)
    a = sweep(prof, P11, src, GRID).to_csv()
    b = sweep(prof, P11, src, GRID, workers=4).to_csv()
    c = sweep(prof, P11, src, GRID).to_csv()
    assert a == b == c


def test_csv_roundtrip():
    prof = RadialProfile.plasmonic(P11, 2.0, 0.1)
    sw = sweep(prof, P11, SourceSpectrum.single(3.0, "F2", 3), GRID)
    text = sw.to_csv()
    assert text.splitlines()[0] == ",".join(SWEEP_COLUMNS)
    back = EnergySweep.from_csv(text)
    assert np.array_equal(back.deltas, sw.deltas) and np.array_equal(back.energies, sw.energies)
    assert back.to_csv() == text


def test_from_csv_sorts_and_rejects_bad_rows():
    back = EnergySweep.from_csv("delta,energy\n0.01,2\n0.1,1\n")
    assert list(back.deltas) == [0.1, 0.01] and list(back.energies) == [1.0, 2.0]
    with pytest.raises(ValueError):
        EnergySweep.from_csv("delta,energy,dominant_k,trunc_bound\n0.01,1,3,1\n0.01,1,3,1\n")
    with pytest.raises(ValueError):
        EnergySweep.from_csv("delta,power\n0.1,1\n")


def test_near_singular_carries_delta():
    prof = RadialProfile.plasmonic(P11, 2.0, 0.1)
    src = SourceSpectrum.single(3.0, "F2", 3)
    with pytest.raises(NearSingularError) as info:
        sweep(prof, P11, src, [1e-1, 1e-2, 1e-3, 1e-300])
    assert info.value.delta == 1e-300


def test_scan_sources():
    g = unit_gamma_source(2.5, 6)
    assert g.gamma == {k: 1.0 for k in range(1, 7)} and not g.beta
    t = tuned_source(P11, 3.5, 2.0, 8)
    assert set(t.beta) == set(range(3, 9)) and t.beta[4] == pytest.approx(1 / 16)


def test_transition_estimate_rules():
    mk = lambda q, v: ScanRow(q, v, 0.0, v, 0.0, v, 0.0)
    rows = [mk(2.1, RESONANT), mk(2.2, RESONANT), mk(2.3, UNDETERMINED), mk(2.4, NON_RESONANT)]
    assert transition_estimate(rows) == pytest.approx(2.3)
    assert transition_estimate([mk(2.1, UNDETERMINED), mk(2.2, NON_RESONANT)]) is None
    assert critical_radius(2.0) == pytest.approx(2.828427, abs=1e-6)


def test_scan_endpoint_rows():
    prof = RadialProfile.plasmonic(P11, 2.0, 0.1, core_radius=1.0)
    res = critical_radius_scan(prof, P11, q_grid=[2.2, 3.5])
    assert [r.verdict for r in res.rows] == [RESONANT, NON_RESONANT]
    assert res.transition == pytest.approx(2.85)
    with pytest.raises(ValueError):
        critical_radius_scan(prof, P11, q_grid=[2.2, 2.5])
    with pytest.raises(ValueError):
        critical_radius_scan(RadialProfile.plasmonic(P11, 2.0, 0.1), P11, q_grid=[2.2, 3.5])
