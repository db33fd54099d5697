"""Loss sweeps, resonance classification and the critical-radius scan."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NearSingularError
from .mode_solver import SourceSpectrum, solve_configuration
from .params import LameParameters, RadialProfile
from .variational import make_nonresonant_source, select_k_delta

RESONANT = "Resonant"
WEAKLY_RESONANT = "WeaklyResonant"
NON_RESONANT = "NonResonant"
UNDETERMINED = "Undetermined"

SWEEP_COLUMNS = ("delta", "energy", "dominant_k", "trunc_bound")


def default_delta_grid(delta_max: float = 1e-1, delta_min: float = 1e-8, points: int = 8) -> np.ndarray:
    """Logarithmically spaced, strictly decreasing loss grid."""
    if not 0 < delta_min < delta_max < 1:
        raise ValueError("need 0 < delta_min < delta_max < 1")
    if points < 2:
        raise ValueError("need at least 2 points")
    return np.logspace(math.log10(delta_max), math.log10(delta_min), points)


@dataclass(frozen=True)
class SweepRow:
    delta: float
    energy: float
    dominant_k: int
    trunc_bound: float


@dataclass
class EnergySweep:
    """Energy rows sorted by strictly decreasing ``delta``."""

    rows: list[SweepRow]
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: -r.delta)
        d = [r.delta for r in self.rows]
        if any(b >= a for a, b in zip(d, d[1:])):
            raise ValueError("deltas must be distinct")

    @property
    def deltas(self) -> np.ndarray:
        return np.array([r.delta for r in self.rows])

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in self.rows:
            w.writerow([repr(float(r.delta)), repr(float(r.energy)), int(r.dominant_k), repr(float(r.trunc_bound))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, config: dict | None = None) -> "EnergySweep":
        reader = csv.DictReader(io.StringIO(text))
        missing = [c for c in ("delta", "energy") if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"sweep CSV lacks columns {missing}")
        rows = []
        for rec in reader:
            e = float(rec["energy"])
            rows.append(
                SweepRow(
                    float(rec["delta"]),
                    e,
                    int(float(rec.get("dominant_k") or 0)),
                    float(rec.get("trunc_bound") or e),
                )
            )
        return cls(rows, dict(config or {}))

    @classmethod
    def synthetic(cls, deltas, energy_fn) -> "EnergySweep":
        return cls([SweepRow(float(d), float(energy_fn(d)), 0, float(energy_fn(d))) for d in deltas], {"synthetic": True})


def _solve_point(profile: RadialProfile, params, source, delta, tail_tol):
    try:
        res = solve_configuration(profile.with_delta(delta), params, source, tail_tol)
    except NearSingularError as exc:
        raise exc.with_delta(delta) from exc
    return SweepRow(float(delta), float(res.total_energy), int(res.dominant_k), float(res.truncation_bound))


def sweep(
    profile: RadialProfile,
    params: LameParameters,
    source: SourceSpectrum,
    delta_grid=None,
    workers: int = 1,
    tail_tol: float = 1e-10,
    config: dict | None = None,
) -> EnergySweep:
    """Solve the configuration once per loss value.

    Points are solved independently (in a thread pool when ``workers > 1``) and
    assembled in grid order, so the result does not depend on ``workers``.
    """
    grid = default_delta_grid() if delta_grid is None else np.asarray(delta_grid, dtype=float)
    if grid.size < 4:
        raise ValueError("sweep needs at least 4 loss values")
    if np.any(grid <= 0) or np.any(grid >= 1):
        raise ValueError("loss values must lie in (0, 1)")
    if source.is_empty:
        rows = [SweepRow(float(d), 0.0, 0, 0.0) for d in grid]
        return EnergySweep(rows, dict(config or {}))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(lambda d: _solve_point(profile, params, source, d, tail_tol), grid))
    else:
        rows = [_solve_point(profile, params, source, d, tail_tol) for d in grid]
    return EnergySweep(rows, dict(config or {}))


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class Thresholds:
    """Finite-sweep surrogates of the asymptotic verdicts.

    ``variation="upward"`` measures only increases of ``log E`` as ``delta``
    decreases; ``"total"`` uses the total variation.
    """

    p_min: float = 0.5
    variation_max: float = 0.2
    variation: str = "upward"
    monotone_decades: float = 3.0
    weak_growth: float = 1.0

    def as_dict(self) -> dict:
        return {
            "p_min": self.p_min,
            "variation_max": self.variation_max,
            "variation": self.variation,
            "monotone_decades": self.monotone_decades,
            "weak_growth": self.weak_growth,
        }


@dataclass
class Classification:
    verdict: str
    p: float
    diagnostics: dict = field(default_factory=dict)


def fit_exponent(deltas, energies) -> float:
    """Least-squares slope of ``log E`` against ``log(1/delta)``."""
    x = np.log(1.0 / np.asarray(deltas, dtype=float))
    y = np.log(np.asarray(energies, dtype=float))
    if x.size < 2:
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])


def log_variation(energies, kind: str = "total") -> float:
    """Variation of ``log E`` along the rows (``"total"`` or ``"upward"``)."""
    steps = np.diff(np.log(np.asarray(energies, dtype=float)))
    if kind == "total":
        return float(np.sum(np.abs(steps)))
    if kind == "upward":
        return float(np.sum(np.clip(steps, 0.0, None)))
    raise ValueError(f"unknown variation kind {kind!r}")


def classify(sweep: EnergySweep, thresholds: Thresholds | None = None) -> Classification:
    """Verdict from the rows of a sweep.

    The exponent ``p`` is fitted over the smallest-``delta`` half. Resonant needs
    ``p >= p_min`` and strictly increasing energy over the final
    ``monotone_decades`` decades. NonResonant needs the variation of ``log E``
    over the final half below ``variation_max``. WeaklyResonant needs
    non-monotone rows whose running maximum grows by more than ``weak_growth``
    (natural-log units) across the final half.
    """
    th = thresholds or Thresholds()
    rows = sweep.rows
    if len(rows) < 4:
        raise ValueError("classification needs at least 4 rows")
    d = sweep.deltas
    e = sweep.energies
    diag = {"thresholds": th.as_dict(), "rows": len(rows)}
    if not np.all(np.isfinite(e)):
        diag["reason"] = "non-finite energy"
        return Classification(UNDETERMINED, float("nan"), diag)
    if np.all(e == 0):
        diag["reason"] = "zero energy"
        return Classification(NON_RESONANT, 0.0, diag)
    if np.any(e <= 0):
        diag["reason"] = "non-positive energy"
        return Classification(UNDETERMINED, float("nan"), diag)
    half = len(rows) // 2
    tail = slice(len(rows) - half - (len(rows) % 2), None)
    p = fit_exponent(d[tail], e[tail])
    final = d <= d[-1] * 10**th.monotone_decades * (1 + 1e-12)
    if final.sum() < 2:
        final = np.zeros_like(final)
        final[tail] = True
    ef = e[final]
    monotone = bool(np.all(np.diff(ef) > 0))
    var = log_variation(e[tail], th.variation)
    runmax = np.maximum.accumulate(e)
    start = len(rows) - len(e[tail])
    ref = runmax[start - 1] if start > 0 else runmax[0]
    growth = float(math.log(runmax[-1] / ref))
    diag.update(
        {
            "monotone_final": monotone,
            "variation": var,
            "total_variation": log_variation(e[tail], "total"),
            "running_max_growth": growth,
        }
    )
    if p >= th.p_min and monotone:
        verdict = RESONANT
    elif var < th.variation_max:
        verdict = NON_RESONANT
    elif not bool(np.all(np.diff(e) > 0)) and growth > th.weak_growth:
        verdict = WEAKLY_RESONANT
    else:
        verdict = UNDETERMINED
    return Classification(verdict, p, diag)


# ---------------------------------------------------------------------------
# sources for the scan


def scan_truncation(R: float, delta_min: float) -> int:
    """Highest stored mode of the scan sources: ``select_k_delta(R, delta_min) + 4``."""
    return select_k_delta(R, delta_min) + 4


def unit_gamma_source(q: float, K: int, gamma=None) -> SourceSpectrum:
    """``sum_{k <= K} gamma_k F2(k)`` with ``gamma_k = 1`` unless ``gamma`` (callable) is given."""
    if K < 1:
        raise ValueError("K must be >= 1")
    g = (lambda k: 1.0) if gamma is None else gamma
    return SourceSpectrum(q, gamma={k: float(g(k)) for k in range(1, K + 1)})


def tuned_source(params: LameParameters, q: float, R: float, K: int, beta=None) -> SourceSpectrum:
    """Tuned source with ``beta_k = k^{-2}`` (or ``beta(k)``) for ``3 <= k <= K``."""
    b = (lambda k: k**-2.0) if beta is None else beta
    return make_nonresonant_source(params, q, R, {k: float(b(k)) for k in range(3, K + 1)})


@dataclass
class ScanRow:
    q: float
    verdict: str
    p: float
    gamma_verdict: str
    gamma_p: float
    tuned_verdict: str
    tuned_p: float


@dataclass
class ScanResult:
    rows: list[ScanRow]
    transition: float | None
    r_star: float

    @property
    def relative_error(self) -> float:
        if self.transition is None:
            return float("nan")
        return abs(self.transition - self.r_star) / self.r_star


def critical_radius(R: float) -> float:
    return R**1.5


def _row_verdict(gv: Classification, tv: Classification) -> tuple[str, float]:
    if gv.verdict == RESONANT:
        return RESONANT, gv.p
    if tv.verdict == NON_RESONANT:
        return NON_RESONANT, tv.p
    return UNDETERMINED, gv.p


def transition_estimate(rows: list[ScanRow]) -> float | None:
    """Midpoint of the last Resonant ``q`` and the first NonResonant ``q`` after it."""
    res = [i for i, r in enumerate(rows) if r.verdict == RESONANT]
    if not res:
        return None
    last = res[-1]
    for r in rows[last + 1 :]:
        if r.verdict == NON_RESONANT:
            return 0.5 * (rows[last].q + r.q)
    return None


def critical_radius_scan(
    profile: RadialProfile,
    params: LameParameters,
    gamma_spec=None,
    q_grid=None,
    delta_grid=None,
    beta_spec=None,
    thresholds: Thresholds | None = None,
    workers: int = 1,
) -> ScanResult:
    """Classify source radii on both sides of ``R^{3/2}``.

    Each ``q`` is swept twice: with the unit-gamma source (the resonant side) and
    with the tuned source (the non-resonant side). A row is Resonant when the
    unit-gamma sweep is, NonResonant when the tuned sweep is, else Undetermined.
    """
    R = profile.shell_radius
    if not profile.has_core:
        raise ValueError("the scan needs a core inside the shell")
    grid = default_delta_grid() if delta_grid is None else np.asarray(delta_grid, dtype=float)
    qs = [round(float(q), 10) for q in (np.arange(2.1, 3.5 + 1e-9, 0.1) if q_grid is None else q_grid)]
    rs = critical_radius(R)
    if not (min(qs) < rs < max(qs)):
        raise ValueError("q grid must straddle R^{3/2}")
    if min(qs) <= R:
        raise ValueError("every q must exceed R")
    K = scan_truncation(R, float(np.min(grid)))

    def one(q):
        gs = sweep(profile, params, unit_gamma_source(q, K, gamma_spec), grid)
        ts = sweep(profile, params, tuned_source(params, q, R, K, beta_spec), grid)
        gv, tv = classify(gs, thresholds), classify(ts, thresholds)
        v, p = _row_verdict(gv, tv)
        return ScanRow(q, v, p, gv.verdict, gv.p, tv.verdict, tv.p)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(one, qs))
    else:
        rows = [one(q) for q in qs]
    return ScanResult(rows, transition_estimate(rows), rs)
