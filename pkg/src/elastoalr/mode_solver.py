"""Exact per-mode solution of the concentric transmission problem.

Rotations split every field into independent *blocks*. Block ``n`` with even
parity is spanned by the angular patterns ``F1(n)`` and ``F2(n-2)``; odd parity
uses ``F3(n)`` and ``F4(n-2)``. A source mode lands in exactly one block::

    beta_k  F1(k) -> (k, even)      gamma_k F2(k) -> (k + 2, even)
    xi_k    F3(k) -> (k, odd)       eta_k   F4(k) -> (k + 2, odd)

Blocks are orthogonal for the energy form, so energies add block by block.

Inside each region the field is a combination of the closed-form homogeneous
solutions of the block (two growing, two decaying; fewer for ``n <= 2``).
Interface rows impose continuity of displacement and the prescribed jump of the
factor-weighted traction ``(A + i delta) T(u)``, outer minus inner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .elasticity import energy_norm_sq, traction_polys
from .errors import NearSingularError
from .fields import AngularFunction, FieldPiece, PiecewiseModeField, TrigPoly, pattern_poly, sum_fields
from .params import LameParameters, RadialProfile

EVEN, ODD = "even", "odd"
SOURCE_FAMILIES = {"beta": "F1", "gamma": "F2", "xi": "F3", "eta": "F4"}

# reciprocal condition number below which the matching system is reported singular
RCOND_THRESHOLD = 1e-13


def block_of(family: str, k: int) -> tuple[int, str]:
    """Block ``(n, parity)`` holding the pattern ``family(k)``."""
    if k < 0:
        raise ValueError("angular order must be >= 0")
    if family == "F1":
        return k, EVEN
    if family == "F2":
        return k + 2, EVEN
    if family == "F3":
        return k, ODD
    if family == "F4":
        return k + 2, ODD
    raise ValueError(f"unknown family {family!r}")


def block_patterns(n: int, parity: str) -> list[tuple[str, int]]:
    if n < 1:
        raise ValueError("block index must be >= 1")
    main, partner = ("F1", "F2") if parity == EVEN else ("F3", "F4")
    if n == 1:
        return [(main, 1)]
    return [(main, n), (partner, n - 2)]


def _even_basis(n: int, kappa: float):
    """Homogeneous Lamé solutions of even block ``n`` as ``(kind, [(coef, fam, m, p)])``."""
    if n == 1:
        return [("grow", [(1.0, "F1", 1, 1)]), ("decay", [(1.0, "F1", 1, -1)])]
    grow = [
        ("grow", [(1.0, "F2", n - 2, n - 2)]),
        ("grow", [(kappa, "F1", n, n), (-float(n), "F2", n - 2, n)]),
    ]
    decay = [("decay", [(1.0, "F1", n, -n)])]
    if n >= 3:
        decay.append(("decay", [(kappa, "F2", n - 2, 2 - n), (float(n - 2), "F1", n, 2 - n)]))
    # n == 2: the second decaying partner is the logarithmic (net-force) solution,
    # which never appears because sources carry no net force.
    return grow + decay


def block_basis(n: int, parity: str, params: LameParameters):
    basis = _even_basis(n, params.kappa)
    if parity == EVEN:
        return basis
    if n == 1:
        return [("grow", [(1.0, "F3", 1, 1)]), ("decay", [(1.0, "F3", 1, -1)])]
    # a rigid rotation of the plane maps F1 -> F3 and F2 -> -F4 inside a block
    swap = {"F1": ("F3", 1.0), "F2": ("F4", -1.0)}
    out = []
    for kind, parts in basis:
        out.append((kind, [(c * swap[f][1], swap[f][0], m, p) for c, f, m, p in parts]))
    return out


def _basis_piece(parts, a: float, b: float, rho: float) -> FieldPiece:
    ux, uy = TrigPoly(), TrigPoly()
    for c, fam, m, p in parts:
        x, y = pattern_poly(fam, m, p, c)
        ux, uy = ux + x, uy + y
    return FieldPiece(a, b, ux, uy, rho)


def _pattern_vector(af: AngularFunction, patterns) -> np.ndarray:
    coefs = af.pattern_coefficients()
    return np.array([coefs.get(pt, 0.0) for pt in patterns], dtype=complex)


def _leftover(af: AngularFunction, patterns) -> float:
    return max((abs(v) for key, v in af.pattern_coefficients().items() if key not in patterns), default=0.0)


@dataclass
class BlockSolution:
    n: int
    parity: str
    radii: tuple[float, ...]
    factors: tuple[complex, ...]
    coefficients: list[np.ndarray]
    field: PiecewiseModeField
    rcond: float


def solve_block(
    params: LameParameters,
    n: int,
    parity: str,
    radii,
    factors,
    jumps,
) -> BlockSolution:
    """Solve one block for interfaces ``radii`` with region factors and traction jumps.

    ``factors`` has one entry per region (``len(radii) + 1``); ``jumps`` maps
    interface index to an :class:`AngularFunction` (missing entries mean no source).
    """
    radii = tuple(float(r) for r in radii)
    if any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("interface radii must be positive and strictly increasing")
    if len(factors) != len(radii) + 1:
        raise ValueError("need one factor per region")
    patterns = block_patterns(n, parity)
    basis = block_basis(n, parity, params)
    edges = (0.0,) + radii + (math.inf,)
    nreg = len(edges) - 1

    # per region: list of (basis piece) normalized at its natural radius
    columns = []  # (region index, FieldPiece)
    for i in range(nreg):
        a, b = edges[i], edges[i + 1]
        for kind, parts in basis:
            if kind == "grow" and math.isinf(b):
                continue
            if kind == "decay" and a == 0.0:
                continue
            rho = b if kind == "grow" else a
            columns.append((i, _basis_piece(parts, a, b, rho)))

    npat = len(patterns)
    rows = []
    rhs = []
    for j, s in enumerate(radii):
        disp = np.zeros((npat, len(columns)), dtype=complex)
        trac = np.zeros((npat, len(columns)), dtype=complex)
        for col, (i, pc) in enumerate(columns):
            if i not in (j, j + 1):
                continue
            sign = 1.0 if i == j + 1 else -1.0
            d = AngularFunction(pc.ux.at_radius(s, pc.rho), pc.uy.at_radius(s, pc.rho))
            tx, ty = traction_polys(params, pc)
            t = AngularFunction(tx.at_radius(s, pc.rho), ty.at_radius(s, pc.rho))
            disp[:, col] = sign * _pattern_vector(d, patterns)
            trac[:, col] = sign * factors[i] * _pattern_vector(t, patterns)
        src = jumps.get(j) if jumps else None
        if src is not None and _leftover(src, patterns) > 0:
            raise ValueError(f"jump at r={s} has content outside block ({n}, {parity})")
        g = np.zeros(npat, dtype=complex) if src is None else _pattern_vector(src, patterns)
        for r in range(npat):
            rows.append(disp[r])
            rhs.append(0.0)
        for r in range(npat):
            rows.append(trac[r])
            rhs.append(g[r])
    M = np.array(rows)
    b = np.array(rhs, dtype=complex)

    scale = np.max(np.abs(M), axis=1)
    big = float(np.max(scale)) if scale.size else 0.0
    keep = scale > 1e-13 * big
    if np.any(np.abs(b[~keep]) > 0):
        raise ValueError("prescribed jump carries a net force; no decaying solution exists")
    M, b, scale = M[keep], b[keep], scale[keep]
    M = M / scale[:, None]
    b = b / scale
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matching system is {M.shape[0]}x{M.shape[1]}; basis/row mismatch")

    sv = np.linalg.svd(M, compute_uv=False)
    rcond = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
    if rcond < RCOND_THRESHOLD:
        raise NearSingularError(
            f"matching matrix of block ({n}, {parity}) is numerically singular (rcond={rcond:.3e})",
            block=(n, parity),
            rcond=rcond,
        )
    x = np.linalg.solve(M, b)

    coefficients = [[] for _ in range(nreg)]
    pieces = []
    for i in range(nreg):
        a, bb = edges[i], edges[i + 1]
        rho = bb if not math.isinf(bb) else (a if a > 0 else 1.0)
        ux, uy = TrigPoly(), TrigPoly()
        for col, (ri, pc) in enumerate(columns):
            if ri != i:
                continue
            coefficients[i].append(x[col])
            if x[col] == 0:
                continue
            q = pc.rescaled(rho)
            ux = ux + q.ux * x[col]
            uy = uy + q.uy * x[col]
        pieces.append(FieldPiece(a, bb, ux, uy, rho))
    fld = PiecewiseModeField(pieces, label=f"block({n},{parity})")
    return BlockSolution(n, parity, radii, tuple(factors), [np.array(c) for c in coefficients], fld, rcond)


def interface_residuals(params, fld: PiecewiseModeField, radii, factors, jumps) -> tuple[float, float]:
    """Relative displacement and traction-jump mismatches over all interfaces."""
    dmax = tmax = 0.0
    scale_d = scale_t = 0.0
    for j, s in enumerate(radii):
        din, dout = fld.trace(s, "inner"), fld.trace(s, "outer")
        pin, pout = fld.piece_at(s, "inner"), fld.piece_at(s, "outer")
        tin = AngularFunction(*[p.at_radius(s, pin.rho) for p in traction_polys(params, pin)])
        tout = AngularFunction(*[p.at_radius(s, pout.rho) for p in traction_polys(params, pout)])
        jump = tout * factors[j + 1] - tin * factors[j]
        target = jumps.get(j, AngularFunction()) if jumps else AngularFunction()
        dmax = max(dmax, (dout - din).norm())
        tmax = max(tmax, (jump - target).norm())
        scale_d = max(scale_d, din.norm(), dout.norm())
        scale_t = max(scale_t, (tin * factors[j]).norm(), (tout * factors[j + 1]).norm(), target.norm())
    return dmax / max(scale_d, 1e-300), tmax / max(scale_t, 1e-300)


# ---------------------------------------------------------------------------
# sources


@dataclass(frozen=True)
class SourceSpectrum:
    """Traction source on the circle ``r = q`` as amplitudes of unnormalized modes.

    ``f = sum_k beta_k F1(k) + gamma_k F2(k) + xi_k F3(k) + eta_k F4(k)`` (per unit
    length of the circle). Indices start at ``k = 1``; there is no constant mode,
    so the source has zero mean.
    """

    q: float
    beta: dict = field(default_factory=dict)
    gamma: dict = field(default_factory=dict)
    xi: dict = field(default_factory=dict)
    eta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.q > 0 and math.isfinite(self.q)):
            raise ValueError("source radius q must be positive and finite")
        for name in SOURCE_FAMILIES:
            coefs = getattr(self, name)
            for k, v in coefs.items():
                if int(k) != k or k < 1:
                    raise ValueError(f"{name}: mode index must be an integer >= 1 (got {k})")
                if not math.isfinite(v):
                    raise ValueError(f"{name}_{k} is not finite")
            object.__setattr__(self, name, {int(k): float(v) for k, v in coefs.items() if v != 0})

    @classmethod
    def from_lists(cls, q, beta=(), gamma=(), xi=(), eta=()):
        """Coefficient lists start at ``k = 1``."""
        as_dict = lambda seq: {i + 1: float(v) for i, v in enumerate(seq)}
        return cls(q, as_dict(beta), as_dict(gamma), as_dict(xi), as_dict(eta))

    @classmethod
    def single(cls, q, family: str, k: int, amplitude: float = 1.0):
        names = {v: n for n, v in SOURCE_FAMILIES.items()}
        if family not in names:
            raise ValueError(f"unknown family {family!r}")
        return cls(q, **{names[family]: {k: amplitude}})

    @property
    def max_k(self) -> int:
        return max((k for name in SOURCE_FAMILIES for k in getattr(self, name)), default=0)

    @property
    def is_empty(self) -> bool:
        return self.max_k == 0

    def modes(self):
        """``(family, k, amplitude)`` in ascending ``k`` then family order."""
        out = []
        for name, fam in SOURCE_FAMILIES.items():
            for k, v in getattr(self, name).items():
                out.append((fam, k, v))
        return sorted(out, key=lambda t: (t[1], t[0]))

    def scaled(self, s: float) -> "SourceSpectrum":
        return SourceSpectrum(
            self.q, *[{k: s * v for k, v in getattr(self, n).items()} for n in SOURCE_FAMILIES]
        )

    def blocks(self) -> dict[tuple[int, str], AngularFunction]:
        """Angular jump data grouped by block, in ascending block order."""
        grouped: dict[tuple[int, str], dict] = {}
        for fam, k, v in self.modes():
            grouped.setdefault(block_of(fam, k), {})[(fam, k)] = v
        return {key: AngularFunction.from_patterns(grouped[key]) for key in sorted(grouped)}

    def pairing(self, fld: PiecewiseModeField) -> float:
        """``int_{r=q} f . psi ds`` for a real-valued field (closed form)."""
        tr = fld.trace(self.q, "inner") if self.q in fld.breakpoints else fld.trace(self.q)
        f = AngularFunction()
        for key, af in self.blocks().items():
            f = f + af
        return float(np.real(self.q * f.inner(tr)))

    def l2_norm_sq(self) -> float:
        """``int_{r=q} |f|^2 ds``; each mode has squared norm ``2 pi q``."""
        return 2 * math.pi * self.q * sum(v * v for _, _, v in self.modes())


# ---------------------------------------------------------------------------
# layered solutions


def _profile_layout(profile: RadialProfile, q: float):
    if not q > profile.shell_radius:
        raise ValueError(f"source radius q={q} must exceed the shell radius R={profile.shell_radius}")
    radii = tuple(profile.interfaces) + (q,)
    edges = (0.0,) + radii + (math.inf,)
    factors = []
    for a, b in zip(edges, edges[1:]):
        mid = 0.5 * (a + b) if math.isfinite(b) else a + 1.0
        factors.append(profile.factor(mid))
    return radii, tuple(factors)


@dataclass
class LayeredModeSolution:
    """Solution of one block of the layered problem driven at ``r = q``."""

    block: int
    parity: str
    modes: tuple
    delta: float
    radii: tuple[float, ...]
    factors: tuple[complex, ...]
    coefficients: list[np.ndarray]
    field: PiecewiseModeField
    rcond: float
    displacement_residual: float
    traction_residual: float
    jump: AngularFunction

    @property
    def k(self) -> int:
        return self.modes[0][1] if self.modes else 0

    @property
    def family(self) -> str | None:
        return self.modes[0][0] if self.modes else None

    def energy(self, params: LameParameters) -> float:
        return 0.5 * self.delta * energy_norm_sq(params, self.field)


def _solve_layered_block(profile, params, key, jump, q, modes) -> LayeredModeSolution:
    radii, factors = _profile_layout(profile, q)
    jumps = {len(radii) - 1: jump}
    try:
        sol = solve_block(params, key[0], key[1], radii, factors, jumps)
    except NearSingularError as exc:
        raise exc.with_delta(profile.delta) from None
    dres, tres = interface_residuals(params, sol.field, radii, factors, jumps)
    fld = sol.field
    fld.k, fld.family = (modes[0][1], modes[0][0]) if modes else (None, None)
    return LayeredModeSolution(
        key[0], key[1], tuple(modes), profile.delta, radii, factors, sol.coefficients, fld, sol.rcond, dres, tres, jump
    )


def solve_mode(
    profile: RadialProfile,
    params: LameParameters,
    k: int,
    family: str,
    amplitude: complex,
    q: float,
) -> LayeredModeSolution:
    """Field driven by the single source mode ``amplitude * family(k)`` on ``r = q``."""
    params.require_convex(2)
    if k < 1:
        raise ValueError("k must be >= 1")
    if not np.isfinite(amplitude):
        raise ValueError("amplitude must be finite")
    key = block_of(family, k)
    jump = AngularFunction.from_patterns({(family, k): amplitude})
    return _solve_layered_block(profile, params, key, jump, q, [(family, k, amplitude)])


def solve_source_blocks(profile, params, source: SourceSpectrum) -> list[LayeredModeSolution]:
    params.require_convex(2)
    grouped: dict = {}
    for fam, k, v in source.modes():
        grouped.setdefault(block_of(fam, k), []).append((fam, k, v))
    out = []
    for key, jump in source.blocks().items():
        out.append(_solve_layered_block(profile, params, key, jump, source.q, grouped[key]))
    return out


@dataclass
class ModeEnergy:
    block: int
    parity: str
    modes: tuple
    energy: float

    @property
    def k(self) -> int:
        return self.modes[0][1]

    @property
    def family(self) -> str:
        return self.modes[0][0]


@dataclass
class EnergyResult:
    """Dissipated energy of a configuration, summed block by block in ascending order."""

    delta: float
    total_energy: float
    per_mode: list[ModeEnergy]
    truncation_bound: float
    tail_estimate: float
    tail_ok: bool

    @property
    def dominant_k(self) -> int:
        if not self.per_mode:
            return 0
        return max(self.per_mode, key=lambda m: m.energy).k


def solve_configuration(
    profile: RadialProfile,
    params: LameParameters,
    source: SourceSpectrum,
    tail_tol: float = 1e-10,
) -> EnergyResult:
    """Solve every stored mode of ``source`` and sum the dissipated energies.

    The truncation bound adds to the computed total a tail estimate that assumes
    the top stored block repeats with the geometric energy ratio ``(R/q)^2`` per
    order. ``tail_ok`` reports whether that estimate is below ``tail_tol`` times
    the total.
    """
    if profile.delta <= 0:
        raise ValueError("delta must be positive")
    sols = solve_source_blocks(profile, params, source)
    per = []
    total = 0.0
    for s in sols:
        e = s.energy(params)
        per.append(ModeEnergy(s.block, s.parity, s.modes, e))
        total += e
    ratio = (profile.shell_radius / source.q) ** 2
    tail = per[-1].energy * ratio / (1 - ratio) if per else 0.0
    return EnergyResult(profile.delta, total, per, total + tail, tail, tail <= tail_tol * max(total, 1e-300))


def configuration_field(profile, params, source: SourceSpectrum) -> PiecewiseModeField:
    """Full complex displacement (sum over blocks)."""
    sols = solve_source_blocks(profile, params, source)
    return sum_fields([s.field for s in sols]) if sols else PiecewiseModeField.zero()


def freespace_traction_solve(params: LameParameters, jumps) -> PiecewiseModeField:
    """Field of the homogeneous plane with prescribed traction jumps on circles.

    ``jumps`` is a list of ``(radius, AngularFunction)``; the result is continuous,
    regular at the origin and decaying, with ``[T(u)] = jump`` on each circle.
    """
    params.require_convex(2)
    items = sorted(((float(r), af) for r, af in jumps), key=lambda t: t[0])
    radii = [r for r, _ in items]
    if len(set(radii)) != len(radii):
        raise ValueError("jump radii must be distinct")
    if any(r <= 0 for r in radii):
        raise ValueError("jump radii must be positive")
    by_block: dict = {}
    for j, (r, af) in enumerate(items):
        for (fam, m), v in af.pattern_coefficients().items():
            if v == 0:
                continue
            if m == 0:
                raise ValueError("net-force (k = 0) jump violates the decay condition")
            key = block_of(fam, m)
            by_block.setdefault(key, {}).setdefault(j, {})[(fam, m)] = v
    if not by_block:
        return PiecewiseModeField.zero()
    factors = (1.0,) * (len(radii) + 1)
    fields = []
    for key in sorted(by_block):
        jmap = {j: AngularFunction.from_patterns(p) for j, p in by_block[key].items()}
        fields.append(solve_block(params, key[0], key[1], radii, factors, jmap).field)
    return sum_fields(fields)


def real_imag_split(solution, delta: float) -> tuple[PiecewiseModeField, PiecewiseModeField]:
    """``u = v + i w / delta`` with real ``v``, ``w``."""
    fld = solution.field if hasattr(solution, "field") else solution
    if delta <= 0:
        raise ValueError("delta must be positive")
    return fld.real(), fld.imag() * delta


def coupled_system_residuals(
    params: LameParameters,
    profile: RadialProfile,
    v: PiecewiseModeField,
    w: PiecewiseModeField,
    q: float,
    jump: AngularFunction,
) -> tuple[float, float]:
    """Relative interface residuals of ``A L v - l L w = f`` and ``A L w + delta^2 l L v = 0``.

    ``l`` is 1 in lossy regions and 0 elsewhere.
    """
    radii, _ = _profile_layout(profile, q)
    edges = (0.0,) + radii + (math.inf,)
    amps, loss = [], []
    for a, b in zip(edges, edges[1:]):
        mid = 0.5 * (a + b) if math.isfinite(b) else a + 1.0
        i = profile.region_index(mid)
        amps.append(profile.amplitudes[i])
        loss.append(1.0 if profile.lossy[i] else 0.0)
    d2 = profile.delta**2
    r1 = r2 = 0.0
    s1 = s2 = 0.0
    for j, s in enumerate(radii):
        tv = [AngularFunction(*[p.at_radius(s, pc.rho) for p in traction_polys(params, pc)])
              for pc in (v.piece_at(s, "inner"), v.piece_at(s, "outer"))]
        tw = [AngularFunction(*[p.at_radius(s, pc.rho) for p in traction_polys(params, pc)])
              for pc in (w.piece_at(s, "inner"), w.piece_at(s, "outer"))]
        e1 = tv[1] * amps[j + 1] - tv[0] * amps[j] - (tw[1] * loss[j + 1] - tw[0] * loss[j])
        e2 = tw[1] * amps[j + 1] - tw[0] * amps[j] + (tv[1] * loss[j + 1] - tv[0] * loss[j]) * d2
        if s == q:
            e1 = e1 - jump
        r1 = max(r1, e1.norm())
        r2 = max(r2, e2.norm())
        s1 = max(s1, *(t.norm() for t in tv), *(t.norm() for t in tw), jump.norm())
        s2 = max(s2, *(t.norm() for t in tw), *(d2 * t.norm() for t in tv))
    return r1 / max(s1, 1e-300), r2 / max(s2, 1e-300)
