"""Closed-form piecewise fields built from radial monomials times trig factors.

A scalar component is a finite sum of terms ``c * (r/rho)**p * cos(m*theta)`` or
``c * (r/rho)**p * sin(m*theta)`` with integer ``p``, ``m >= 0``. ``rho`` is a
per-piece reference radius; keeping ``(r/rho)`` near one on the piece keeps the
coefficients of high-order modes in floating-point range.

Vector angular patterns used throughout (they are the traction patterns of the
four source families)::

    F1(m) = ( cos m.th,  sin m.th)      F2(m) = ( cos m.th, -sin m.th)
    F3(m) = (-sin m.th,  cos m.th)      F4(m) = ( sin m.th,  cos m.th)

At m = 0 the pairs collapse: F1(0) = F2(0) = (1, 0) and F3(0) = F4(0) = (0, 1);
the canonical names there are F2(0) and F4(0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

COS, SIN = "c", "s"
FAMILIES = ("F1", "F2", "F3", "F4")

# (x-component trig, x sign, y-component trig, y sign) for each family
_PATTERN = {
    "F1": (COS, 1.0, SIN, 1.0),
    "F2": (COS, 1.0, SIN, -1.0),
    "F3": (SIN, -1.0, COS, 1.0),
    "F4": (SIN, 1.0, COS, 1.0),
}


def canonical_pattern(family: str, m: int) -> tuple[str, int]:
    if family not in _PATTERN:
        raise ValueError(f"unknown family {family!r}")
    if m < 0:
        raise ValueError("angular order must be >= 0")
    if m == 0:
        return ("F2", 0) if family in ("F1", "F2") else ("F4", 0)
    return family, m


class TrigPoly:
    """Sum of ``coef * (r/rho)**p * trig(m theta)`` terms keyed by ``(p, m, trig)``.

    ``rho`` is not stored here; it belongs to the enclosing :class:`FieldPiece`.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int, str], complex] | None = None):
        self.terms: dict[tuple[int, int, str], complex] = {}
        if terms:
            for key, c in terms.items():
                self._add(key, c)

    def _add(self, key, c):
        p, m, t = key
        if m < 0:
            m = -m
            if t == SIN:
                c = -c
        if t == SIN and m == 0:
            return
        if c == 0:
            return
        key = (int(p), int(m), t)
        self.terms[key] = self.terms.get(key, 0.0) + c

    @classmethod
    def monomial(cls, coef, p, m, trig):
        return cls({(p, m, trig): coef})

    def copy(self):
        out = TrigPoly()
        out.terms = dict(self.terms)
        return out

    def __bool__(self):
        return any(c != 0 for c in self.terms.values())

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        out = self.copy()
        for key, c in other.terms.items():
            out._add(key, c)
        return out

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + other * -1.0

    def __mul__(self, s) -> "TrigPoly":
        out = TrigPoly()
        if s == 0:
            return out
        out.terms = {k: c * s for k, c in self.terms.items()}
        return out

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def map_coefficients(self, fn) -> "TrigPoly":
        return TrigPoly({k: fn(c) for k, c in self.terms.items()})

    def real(self):
        return self.map_coefficients(lambda c: complex(c).real)

    def imag(self):
        return self.map_coefficients(lambda c: complex(c).imag)

    def conj(self):
        return self.map_coefficients(lambda c: complex(c).conjugate())

    def max_abs(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def cleaned(self, rtol: float = 1e-14, ref: float | None = None) -> "TrigPoly":
        ref = self.max_abs() if ref is None else ref
        return TrigPoly({k: c for k, c in self.terms.items() if abs(c) > rtol * ref})

    def rescaled(self, old_rho: float, new_rho: float) -> "TrigPoly":
        """Same function re-expressed with reference radius ``new_rho``."""
        if old_rho == new_rho:
            return self.copy()
        ratio = new_rho / old_rho
        return TrigPoly({(p, m, t): c * ratio**p for (p, m, t), c in self.terms.items()})

    # ---- calculus -----------------------------------------------------------
    def d_dx(self, rho: float) -> "TrigPoly":
        out = TrigPoly()
        for (p, m, t), c in self.terms.items():
            a, b = 0.5 * (p + m) * c / rho, 0.5 * (p - m) * c / rho
            out._add((p - 1, m - 1, t), a)
            out._add((p - 1, m + 1, t), b)
        return out

    def d_dy(self, rho: float) -> "TrigPoly":
        out = TrigPoly()
        for (p, m, t), c in self.terms.items():
            a, b = 0.5 * (p + m) * c / rho, 0.5 * (p - m) * c / rho
            if t == COS:
                out._add((p - 1, m + 1, SIN), b)
                out._add((p - 1, m - 1, SIN), -a)
            else:
                out._add((p - 1, m - 1, COS), a)
                out._add((p - 1, m + 1, COS), -b)
        return out

    def times_cos(self) -> "TrigPoly":
        """Multiply by cos(theta)."""
        out = TrigPoly()
        for (p, m, t), c in self.terms.items():
            out._add((p, m - 1, t), 0.5 * c)
            out._add((p, m + 1, t), 0.5 * c)
        return out

    def times_sin(self) -> "TrigPoly":
        """Multiply by sin(theta)."""
        out = TrigPoly()
        for (p, m, t), c in self.terms.items():
            if t == COS:
                out._add((p, m + 1, SIN), 0.5 * c)
                out._add((p, m - 1, SIN), -0.5 * c)
            else:
                out._add((p, m - 1, COS), 0.5 * c)
                out._add((p, m + 1, COS), -0.5 * c)
        return out

    # ---- evaluation ---------------------------------------------------------
    def __call__(self, r, theta, rho: float = 1.0):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(np.broadcast(r, theta).shape, dtype=complex)
        x = r / rho
        for (p, m, t), c in self.terms.items():
            ang = np.cos(m * theta) if t == COS else np.sin(m * theta)
            out = out + c * x**p * ang
        return out

    def at_radius(self, r: float, rho: float = 1.0) -> dict[tuple[int, str], complex]:
        """Collapse the radial dependence at fixed ``r``: ``(m, trig) -> coef``."""
        out: dict[tuple[int, str], complex] = {}
        x = r / rho
        for (p, m, t), c in self.terms.items():
            out[(m, t)] = out.get((m, t), 0.0) + c * x**p
        return out

    def orders(self) -> set[int]:
        return {m for (_, m, _) in self.terms}

    def powers(self) -> set[int]:
        return {p for (p, m, t), c in self.terms.items() if c != 0}

    def __repr__(self):
        items = ", ".join(f"{c:.4g}*r^{p}*{t}{m}" for (p, m, t), c in sorted(self.terms.items()))
        return f"TrigPoly({items})"


def pattern_poly(family: str, m: int, p: int, coef=1.0) -> tuple[TrigPoly, TrigPoly]:
    """Components of ``coef * r**p * F_family(m)``."""
    tx, sx, ty, sy = _PATTERN[family]
    return (TrigPoly.monomial(coef * sx, p, m, tx), TrigPoly.monomial(coef * sy, p, m, ty))


@dataclass
class FieldPiece:
    """Vector field on the annulus ``r_in <= r < r_out`` (``r_out`` may be inf)."""

    r_in: float
    r_out: float
    ux: TrigPoly
    uy: TrigPoly
    rho: float = 1.0

    def __post_init__(self):
        if not (0 <= self.r_in < self.r_out):
            raise ValueError(f"bad piece interval [{self.r_in}, {self.r_out})")
        if self.rho <= 0:
            raise ValueError("reference radius must be positive")

    @property
    def is_exterior(self) -> bool:
        return math.isinf(self.r_out)

    def contains(self, r: float) -> bool:
        return self.r_in <= r <= self.r_out

    def rescaled(self, rho: float) -> "FieldPiece":
        return FieldPiece(self.r_in, self.r_out, self.ux.rescaled(self.rho, rho), self.uy.rescaled(self.rho, rho), rho)

    def restricted(self, a: float, b: float) -> "FieldPiece":
        return FieldPiece(max(a, self.r_in), min(b, self.r_out), self.ux, self.uy, self.rho)

    def map(self, fn) -> "FieldPiece":
        return FieldPiece(self.r_in, self.r_out, fn(self.ux), fn(self.uy), self.rho)

    def gradient(self) -> list[list[TrigPoly]]:
        """``G[i][j] = d u_i / d x_j``."""
        return [
            [self.ux.d_dx(self.rho), self.ux.d_dy(self.rho)],
            [self.uy.d_dx(self.rho), self.uy.d_dy(self.rho)],
        ]

    def __call__(self, r, theta):
        return self.ux(r, theta, self.rho), self.uy(r, theta, self.rho)

    def max_abs(self) -> float:
        return max(self.ux.max_abs(), self.uy.max_abs())


def natural_rho(a: float, b: float) -> float:
    if math.isinf(b):
        return a if a > 0 else 1.0
    return b


@dataclass
class PiecewiseModeField:
    """Piecewise closed-form field: ordered pieces covering ``[0, inf)``.

    ``k`` and ``family`` are descriptive tags (the source mode a constructor was
    built for); ``None`` for sums and generic fields.
    """

    pieces: list[FieldPiece]
    k: int | None = None
    family: str | None = None
    label: str = ""

    def __post_init__(self):
        self.pieces = sorted(self.pieces, key=lambda pc: pc.r_in)
        if not self.pieces:
            raise ValueError("field needs at least one piece")
        if self.pieces[0].r_in != 0:
            raise ValueError("pieces must start at r = 0")
        for a, b in zip(self.pieces, self.pieces[1:]):
            if a.r_out != b.r_in:
                raise ValueError("pieces must tile [0, inf) without gaps")
        if not self.pieces[-1].is_exterior:
            raise ValueError("last piece must extend to infinity")

    # ---- constructors ---------------------------------------------------------
    @classmethod
    def zero(cls) -> "PiecewiseModeField":
        return cls([FieldPiece(0.0, math.inf, TrigPoly(), TrigPoly())])

    @classmethod
    def from_pieces(cls, spec: Iterable[tuple[float, float, TrigPoly, TrigPoly]], rho=None, **kw):
        pieces = []
        for a, b, ux, uy in spec:
            pieces.append(FieldPiece(a, b, ux, uy, 1.0 if rho is None else rho))
        return cls(pieces, **kw)

    # ---- structure ------------------------------------------------------------
    @property
    def breakpoints(self) -> list[float]:
        return [pc.r_out for pc in self.pieces[:-1]]

    def piece_at(self, r: float, side: str | None = None) -> FieldPiece:
        """Piece containing radius ``r``; ``side`` disambiguates at a breakpoint."""
        if r < 0:
            raise ValueError("radius must be >= 0")
        if r in self.breakpoints:
            if side is None:
                raise ValueError(f"radius {r} is a piece boundary; specify side='inner' or 'outer'")
            for i, pc in enumerate(self.pieces):
                if pc.r_out == r:
                    return pc if side == "inner" else self.pieces[i + 1]
        for pc in self.pieces:
            if pc.r_in <= r < pc.r_out:
                return pc
        return self.pieces[-1]

    def refined(self, points: Iterable[float]) -> "PiecewiseModeField":
        """Split pieces at extra radii (the represented function is unchanged)."""
        pts = sorted({float(p) for p in points if p > 0 and math.isfinite(p)})
        out = []
        for pc in self.pieces:
            cuts = [pc.r_in] + [p for p in pts if pc.r_in < p < pc.r_out] + [pc.r_out]
            for a, b in zip(cuts, cuts[1:]):
                out.append(FieldPiece(a, b, pc.ux, pc.uy, pc.rho))
        return PiecewiseModeField(out, self.k, self.family, self.label)

    def map(self, fn) -> "PiecewiseModeField":
        return PiecewiseModeField([pc.map(fn) for pc in self.pieces], self.k, self.family, self.label)

    def with_natural_scales(self) -> "PiecewiseModeField":
        return PiecewiseModeField(
            [pc.rescaled(natural_rho(pc.r_in, pc.r_out)) for pc in self.pieces], self.k, self.family, self.label
        )

    # ---- algebra --------------------------------------------------------------
    def __add__(self, other: "PiecewiseModeField") -> "PiecewiseModeField":
        a, b = aligned(self, other)
        pieces = []
        for pa, pb in zip(a.pieces, b.pieces):
            rho = natural_rho(pa.r_in, pa.r_out)
            qa, qb = pa.rescaled(rho), pb.rescaled(rho)
            pieces.append(FieldPiece(pa.r_in, pa.r_out, qa.ux + qb.ux, qa.uy + qb.uy, rho))
        return PiecewiseModeField(pieces)

    def __sub__(self, other):
        return self + other * -1.0

    def __mul__(self, s) -> "PiecewiseModeField":
        return PiecewiseModeField([pc.map(lambda p: p * s) for pc in self.pieces], self.k, self.family, self.label)

    __rmul__ = __mul__

    def real(self):
        return self.map(TrigPoly.real)

    def imag(self):
        return self.map(TrigPoly.imag)

    def conj(self):
        return self.map(TrigPoly.conj)

    # ---- properties -------------------------------------------------------------
    def orders(self) -> set[int]:
        out = set()
        for pc in self.pieces:
            out |= pc.ux.orders() | pc.uy.orders()
        return out

    def decays(self) -> bool:
        ext = self.pieces[-1]
        return all(p < 0 for p in ext.ux.powers() | ext.uy.powers())

    def regular_at_origin(self) -> bool:
        inner = self.pieces[0]
        return all(p >= 0 for p in inner.ux.powers() | inner.uy.powers())

    def __call__(self, r, theta):
        """Evaluate at polar points (broadcasting); returns ``(u1, u2)`` complex arrays."""
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        shape = np.broadcast(r, theta).shape
        rb, tb = np.broadcast_to(r, shape), np.broadcast_to(theta, shape)
        u1 = np.zeros(shape, dtype=complex)
        u2 = np.zeros(shape, dtype=complex)
        for pc in self.pieces:
            mask = (rb >= pc.r_in) & (rb < pc.r_out)
            if np.any(mask):
                a, b = pc(rb[mask], tb[mask])
                u1[mask], u2[mask] = a, b
        return u1, u2

    def evaluate_xy(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self(np.hypot(x, y), np.mod(np.arctan2(y, x), 2 * np.pi))

    def trace(self, r: float, side: str | None = None) -> "AngularFunction":
        pc = self.piece_at(r, side)
        return AngularFunction(pc.ux.at_radius(r, pc.rho), pc.uy.at_radius(r, pc.rho))

    def max_abs(self) -> float:
        return max(pc.max_abs() for pc in self.pieces)


def aligned(*fields: PiecewiseModeField) -> list[PiecewiseModeField]:
    """Refine fields onto the union of their breakpoints."""
    pts = set()
    for f in fields:
        pts |= set(f.breakpoints)
    return [f.refined(pts) for f in fields]


def sum_fields(fields: Iterable[PiecewiseModeField]) -> PiecewiseModeField:
    """Sum with a fixed left-to-right order."""
    fields = list(fields)
    if not fields:
        return PiecewiseModeField.zero()
    al = aligned(*fields)
    pieces = []
    for group in zip(*[f.pieces for f in al]):
        a, b = group[0].r_in, group[0].r_out
        rho = natural_rho(a, b)
        ux, uy = TrigPoly(), TrigPoly()
        for pc in group:
            q = pc.rescaled(rho)
            ux = ux + q.ux
            uy = uy + q.uy
        pieces.append(FieldPiece(a, b, ux, uy, rho))
    return PiecewiseModeField(pieces)


@dataclass
class AngularFunction:
    """Vector function on a circle: Cartesian components as ``(m, trig) -> coef``."""

    x: dict[tuple[int, str], complex] = field(default_factory=dict)
    y: dict[tuple[int, str], complex] = field(default_factory=dict)

    @classmethod
    def from_patterns(cls, amplitudes: Mapping[tuple[str, int], complex]) -> "AngularFunction":
        out = cls()
        for (fam, m), a in amplitudes.items():
            fam, m = canonical_pattern(fam, m)
            tx, sx, ty, sy = _PATTERN[fam]
            if not (tx == SIN and m == 0):
                out.x[(m, tx)] = out.x.get((m, tx), 0.0) + sx * a
            if not (ty == SIN and m == 0):
                out.y[(m, ty)] = out.y.get((m, ty), 0.0) + sy * a
        return out

    def pattern_coefficients(self) -> dict[tuple[str, int], complex]:
        """Amplitudes over the F1..F4 patterns (canonical names at m = 0)."""
        orders = {m for m, _ in self.x} | {m for m, _ in self.y}
        out: dict[tuple[str, int], complex] = {}
        for m in sorted(orders):
            a = self.x.get((m, COS), 0.0)
            b = self.x.get((m, SIN), 0.0)
            c = self.y.get((m, COS), 0.0)
            d = self.y.get((m, SIN), 0.0)
            if m == 0:
                vals = {("F2", 0): a, ("F4", 0): c}
            else:
                vals = {
                    ("F1", m): 0.5 * (a + d),
                    ("F2", m): 0.5 * (a - d),
                    ("F3", m): 0.5 * (c - b),
                    ("F4", m): 0.5 * (c + b),
                }
            for key, v in vals.items():
                if v != 0:
                    out[key] = v
        return out

    def _combine(self, other, s):
        out = AngularFunction(dict(self.x), dict(self.y))
        for src, dst in ((other.x, out.x), (other.y, out.y)):
            for key, c in src.items():
                dst[key] = dst.get(key, 0.0) + s * c
        return out

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, s):
        return AngularFunction({k: s * c for k, c in self.x.items()}, {k: s * c for k, c in self.y.items()})

    __rmul__ = __mul__

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        vals = []
        for comp in (self.x, self.y):
            v = np.zeros(theta.shape, dtype=complex)
            for (m, t), c in comp.items():
                v = v + c * (np.cos(m * theta) if t == COS else np.sin(m * theta))
            vals.append(v)
        return vals[0], vals[1]

    def inner(self, other: "AngularFunction", conjugate: bool = False) -> complex:
        """``int_0^{2 pi} self . other d theta`` (``other`` conjugated if asked)."""
        total = 0.0
        for a, b in ((self.x, other.x), (self.y, other.y)):
            for key, c in a.items():
                d = b.get(key)
                if d is None:
                    continue
                m, t = key
                w = 2 * math.pi if (m == 0 and t == COS) else math.pi
                total += c * (np.conj(d) if conjugate else d) * w
        return total

    def norm(self) -> float:
        """Plain coefficient norm (root-sum-square over pattern amplitudes)."""
        return math.sqrt(sum(abs(v) ** 2 for v in self.pattern_coefficients().values()))

    def l2_norm(self) -> float:
        return math.sqrt(abs(self.inner(self, conjugate=True)))

    def orders(self) -> set[int]:
        return {m for m, _ in self.x} | {m for m, _ in self.y}
