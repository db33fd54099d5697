"""Tangential vector spherical fields in 3-D and the plasmon-constant proportionality test.

Real spherical harmonics are orthonormal on the unit sphere, without the
Condon-Shortley phase: ``m > 0`` carries ``cos(m phi)`` and ``m < 0`` carries
``sin(|m| phi)``. ``H_nm(x) = r^n Y_nm(x/r)`` is kept as an exact polynomial.

``B = Grad Y x x_hat`` is extended off the sphere as a degree-0 homogeneous
function, ``B(x) = r^{-n} grad H(x) x x``; then ``M_n = r^n B`` and
``N_n = r^{-n-1} B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg

from .params import LameParameters

M_GROW = "M"
N_DECAY = "N"

Poly = dict  # {(a, b, c): coef} for x^a y^b z^c


def _pmul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for (a1, b1, c1), u in p.items():
        for (a2, b2, c2), v in q.items():
            key = (a1 + a2, b1 + b2, c1 + c2)
            out[key] = out.get(key, 0.0) + u * v
    return {k: v for k, v in out.items() if v != 0}


def _padd(p: Poly, q: Poly, s: float = 1.0) -> Poly:
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0.0) + s * v
    return {k: v for k, v in out.items() if v != 0}


def _pscale(p: Poly, s: float) -> Poly:
    return {k: s * v for k, v in p.items()}


def _pdiff(p: Poly, axis: int) -> Poly:
    out: Poly = {}
    for key, v in p.items():
        e = key[axis]
        if e == 0:
            continue
        nk = list(key)
        nk[axis] -= 1
        out[tuple(nk)] = out.get(tuple(nk), 0.0) + e * v
    return out


def _ppow(p: Poly, e: int) -> Poly:
    out: Poly = {(0, 0, 0): 1.0}
    for _ in range(e):
        out = _pmul(out, p)
    return out


def _peval(p: Poly, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    out = np.zeros(x.shape[0])
    for (a, b, c), v in p.items():
        out = out + v * x[:, 0] ** a * x[:, 1] ** b * x[:, 2] ** c
    return out


_X, _Y, _Z = {(1, 0, 0): 1.0}, {(0, 1, 0): 1.0}, {(0, 0, 1): 1.0}
_R2 = {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0}


def solid_harmonic(n: int, m: int) -> Poly:
    """Polynomial ``r^n Y_nm(x/r)`` for the orthonormal real harmonic ``Y_nm``."""
    if n < 0 or abs(m) > n:
        raise ValueError("need n >= 0 and |m| <= n")
    am = abs(m)
    # d^m/dt^m P_n(t) in the power basis
    coeffs = npleg.leg2poly([0] * n + [1])
    for _ in range(am):
        coeffs = np.polynomial.polynomial.polyder(coeffs)
    radial: Poly = {}
    for i, a in enumerate(np.atleast_1d(coeffs)):
        if a == 0 or (n - am - i) % 2:
            continue
        term = _pmul(_ppow(_Z, i), _ppow(_R2, (n - am - i) // 2))
        radial = _padd(radial, term, float(a))
    # Re / Im of (x + i y)^|m|
    re: Poly = {}
    im: Poly = {}
    for j in range(am + 1):
        c = math.comb(am, j)
        key = (am - j, j, 0)
        part = j % 4
        if part == 0:
            re[key] = re.get(key, 0.0) + c
        elif part == 1:
            im[key] = im.get(key, 0.0) + c
        elif part == 2:
            re[key] = re.get(key, 0.0) - c
        else:
            im[key] = im.get(key, 0.0) - c
    ang = re if m >= 0 else im
    norm = math.sqrt((2 * n + 1) / (4 * math.pi) * math.factorial(n - am) / math.factorial(n + am))
    if m != 0:
        norm *= math.sqrt(2.0)
    return _pscale(_pmul(ang, radial), norm)


class _TangentialField:
    """Polynomial pieces of ``grad H x x`` and their first-coordinate derivatives."""

    def __init__(self, n: int, m: int):
        self.n, self.m = n, m
        H = solid_harmonic(n, m)
        g = [_pdiff(H, i) for i in range(3)]
        xs = [_X, _Y, _Z]
        # (grad H) x x
        self.cross = [
            _padd(_pmul(g[1], xs[2]), _pmul(g[2], xs[1]), -1.0),
            _padd(_pmul(g[2], xs[0]), _pmul(g[0], xs[2]), -1.0),
            _padd(_pmul(g[0], xs[1]), _pmul(g[1], xs[0]), -1.0),
        ]
        self.dcross = [[_pdiff(c, a) for a in range(3)] for c in self.cross]

    def B(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        r = np.linalg.norm(x, axis=1)
        return np.stack([_peval(c, x) for c in self.cross], axis=1) * (r ** -self.n)[:, None]

    def dB(self, x: np.ndarray, axis: int) -> np.ndarray:
        """``d B_j / d x_axis`` for all ``j``."""
        x = np.atleast_2d(x)
        r = np.linalg.norm(x, axis=1)
        vals = np.stack([_peval(c, x) for c in self.cross], axis=1)
        dvals = np.stack([_peval(d[axis], x) for d in self.dcross], axis=1)
        return (-self.n * r ** (-self.n - 2) * x[:, axis])[:, None] * vals + (r ** -self.n)[:, None] * dvals


_CACHE: dict = {}


def _field(n, m) -> _TangentialField:
    key = (n, m)
    if key not in _CACHE:
        _CACHE[key] = _TangentialField(n, m)
    return _CACHE[key]


def _unit_points(points) -> np.ndarray:
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if x.shape[1] != 3:
        raise ValueError("points must be 3-vectors")
    if np.any(np.abs(np.linalg.norm(x, axis=1) - 1.0) > 1e-12):
        raise ValueError("points must lie on the unit sphere (|x| = 1 within 1e-12)")
    return x


def eval_B(n: int, m: int, point) -> np.ndarray:
    """``Grad Y_nm(x) x x`` at unit point(s); tangential to the sphere."""
    x = _unit_points(point)
    out = _field(n, m).B(x) if n > 0 else np.zeros_like(x)
    return out[0] if np.ndim(point) == 1 else out


def spherical_field(kind: str, n: int, m: int, x) -> np.ndarray:
    """``M_n = r^n B`` or ``N_n = r^{-n-1} B`` at arbitrary nonzero points."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r = np.linalg.norm(x, axis=1)
    if np.any(r == 0):
        raise ValueError("fields are evaluated away from the origin")
    if n == 0:
        return np.zeros_like(x)
    B = _field(n, m).B(x)
    p = n if kind == M_GROW else -n - 1
    if kind not in (M_GROW, N_DECAY):
        raise ValueError(f"unknown kind {kind!r}")
    return B * (r**p)[:, None]


def conormal_first_component(params: LameParameters, kind: str, n: int, m: int, point) -> np.ndarray:
    """First traction component on the unit sphere from the displayed formula (``r = 1``, ``nu = x``)."""
    x = _unit_points(point)
    if n == 0:
        return np.zeros(x.shape[0])
    fld = _field(n, m)
    B = fld.B(x)
    dB1 = fld.dB(x, 0)
    mu = params.mu
    p = n if kind == M_GROW else -n - 1
    if kind not in (M_GROW, N_DECAY):
        raise ValueError(f"unknown kind {kind!r}")
    # r = 1: p r^{p-2} x_1 B_j + r^p dB_j/dx_1, plus p r^{p-1} B_1
    s = np.sum(x * (p * x[:, [0]] * B + dB1), axis=1)
    return mu * s + mu * p * B[:, 0]


def traction_fd(params: LameParameters, kind: str, n: int, m: int, point, h: float = 1e-5) -> np.ndarray:
    """Full traction ``lambda div u nu + mu (grad u + grad u^T) nu`` by central differences."""
    x = _unit_points(point)
    G = np.zeros((x.shape[0], 3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        G[:, :, j] = (spherical_field(kind, n, m, x + e) - spherical_field(kind, n, m, x - e)) / (2 * h)
    div = np.trace(G, axis1=1, axis2=2)
    sym = G + np.transpose(G, (0, 2, 1))
    return params.lam * div[:, None] * x + params.mu * np.einsum("pij,pj->pi", sym, x)


def sphere_samples(count: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


@dataclass
class ProportionalityReport:
    n: int | None
    m: int | None
    best_fit_c: float
    relative_residual: float
    sample_count: int
    degenerate: bool = False


def fit_proportionality(tm: np.ndarray, tn: np.ndarray, n=None, m=None) -> ProportionalityReport:
    """Least-squares ``c`` with ``tn ~ c tm``; residual ``|tn - c tm| / |tn|``."""
    tm = np.ravel(tm)
    tn = np.ravel(tn)
    nm = float(tm @ tm)
    nn = float(np.linalg.norm(tn))
    if nm == 0 or nn == 0:
        return ProportionalityReport(n, m, float("nan"), float("nan"), tm.size, True)
    c = float(tm @ tn) / nm
    res = float(np.linalg.norm(tn - c * tm)) / nn
    return ProportionalityReport(n, m, c, min(max(res, 0.0), 1.0), tm.size, False)


def proportionality_test(params: LameParameters, n: int, m: int, sample_count: int = 50, seed: int = 0):
    """Best single ``c`` with ``c dM/dnu = dN/dnu`` (first components) over sample points."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if sample_count < 20:
        raise ValueError("need at least 20 samples")
    x = sphere_samples(sample_count, seed)
    tm = conormal_first_component(params, M_GROW, n, m, x)
    tn = conormal_first_component(params, N_DECAY, n, m, x)
    return fit_proportionality(tm, tn, n, m)


def pooled_proportionality_test(params: LameParameters, ns, sample_count: int = 50, seed: int = 0):
    """One ``c`` for every ``(n, m)`` with ``n`` in ``ns`` at once."""
    tms, tns = [], []
    x = sphere_samples(sample_count, seed)
    for n in ns:
        for m in range(-n, n + 1):
            tms.append(conormal_first_component(params, M_GROW, n, m, x))
            tns.append(conormal_first_component(params, N_DECAY, n, m, x))
    return fit_proportionality(np.concatenate(tms), np.concatenate(tns))


def radial_constant(n: int) -> float:
    """Ratio of the N and M tractions at fixed ``(n, m)``: ``-(n + 2)/(n - 1)``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return -(n + 2) / (n - 1)
