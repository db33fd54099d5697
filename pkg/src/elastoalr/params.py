"""Material parameters and the concentric core/shell/matrix profile."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvexityError

SHEAR_FAMILY = "shear"
ALT_FAMILY = "alt"


@dataclass(frozen=True)
class LameParameters:
    """Real base Lamé pair (lambda, mu) of the regular material."""

    lam: float
    mu: float

    def is_convex(self, dim: int = 2) -> bool:
        return check_convexity(self, dim)

    def require_convex(self, dim: int = 2) -> "LameParameters":
        if not check_convexity(self, dim):
            raise ConvexityError(
                f"strong convexity violated for dim={dim}: need mu > 0 and "
                f"{dim}*lambda + 2*mu > 0 (got lambda={self.lam}, mu={self.mu})"
            )
        return self

    @property
    def kelvin_alpha(self) -> float:
        return 0.5 * (1.0 / self.mu + 1.0 / (2.0 * self.mu + self.lam))

    @property
    def kelvin_beta(self) -> float:
        return 0.5 * (1.0 / self.mu - 1.0 / (2.0 * self.mu + self.lam))

    @property
    def alpha(self) -> float:
        """Ratio kelvin_beta / kelvin_alpha = (lambda + mu) / (lambda + 3 mu)."""
        return self.kelvin_beta / self.kelvin_alpha

    @property
    def kappa(self) -> float:
        """Kolosov constant (lambda + 3 mu) / (lambda + mu) = 1 / alpha."""
        return (self.lam + 3.0 * self.mu) / (self.lam + self.mu)

    def scaled(self, factor: float) -> "LameParameters":
        return LameParameters(self.lam * factor, self.mu * factor)


def check_convexity(params: LameParameters, dim: int = 2) -> bool:
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    return params.mu > 0 and dim * params.lam + 2 * params.mu > 0


def plasmon_constant(params: LameParameters, family: str = SHEAR_FAMILY) -> float:
    """Negative shell amplitude that supports perfect plasmon waves.

    ``"shear"`` gives -(lambda+mu)/(lambda+3mu), the constant for waves driven by
    the f2 source patterns; ``"alt"`` gives its reciprocal -(lambda+3mu)/(lambda+mu),
    used for the f1 patterns.
    """
    params.require_convex(2)
    lam, mu = params.lam, params.mu
    if family == SHEAR_FAMILY:
        return -(lam + mu) / (lam + 3 * mu)
    if family == ALT_FAMILY:
        return -(lam + 3 * mu) / (lam + mu)
    raise ValueError(f"unknown plasmon family {family!r}")


@dataclass(frozen=True)
class RadialProfile:
    """Concentric amplitude profile A(x) with loss delta.

    ``core_radius == 0`` encodes an empty core. The complex modulus factor in
    each region is ``A + 1j*delta``; the ``lossy`` flags choose per region whether
    the loss is applied (all on by default, matching the formulation where the
    whole plane carries the loss).
    """

    core_radius: float
    shell_radius: float
    amplitudes: tuple[float, float, float]
    delta: float
    lossy: tuple[bool, bool, bool] = (True, True, True)

    def __post_init__(self):
        if self.core_radius < 0:
            raise ValueError("core_radius must be >= 0")
        if not self.shell_radius > self.core_radius:
            raise ValueError("shell radius must exceed core radius")
        if self.delta < 0 or not math.isfinite(self.delta):
            raise ValueError("delta must be finite and >= 0")
        if len(self.amplitudes) != 3:
            raise ValueError("amplitudes must be (A_core, A_shell, A_matrix)")

    @classmethod
    def plasmonic(
        cls,
        params: LameParameters,
        shell_radius: float,
        delta: float,
        core_radius: float = 0.0,
        family: str = SHEAR_FAMILY,
        c: float | None = None,
    ) -> "RadialProfile":
        if c is None:
            c = plasmon_constant(params, family)
        return cls(core_radius, shell_radius, (1.0, c, 1.0), delta)

    @classmethod
    def homogeneous(cls, delta: float, shell_radius: float = 1.0) -> "RadialProfile":
        return cls(0.0, shell_radius, (1.0, 1.0, 1.0), delta)

    @property
    def has_core(self) -> bool:
        return self.core_radius > 0

    @property
    def interfaces(self) -> tuple[float, ...]:
        if self.has_core:
            return (self.core_radius, self.shell_radius)
        return (self.shell_radius,)

    def with_delta(self, delta: float) -> "RadialProfile":
        return RadialProfile(self.core_radius, self.shell_radius, self.amplitudes, delta, self.lossy)

    def region_index(self, r: float, side: str = "inner") -> int:
        """0 = core, 1 = shell, 2 = matrix. At an interface ``side`` picks the region."""
        bounds = (self.core_radius, self.shell_radius)
        idx = 0
        for b in bounds:
            if r > b or (r == b and side == "outer"):
                idx += 1
        if not self.has_core and idx == 0:
            idx = 1
        return idx

    def amplitude(self, r: float, side: str = "inner") -> float:
        return self.amplitudes[self.region_index(r, side)]

    def factor(self, r: float, side: str = "inner") -> complex:
        i = self.region_index(r, side)
        return complex(self.amplitudes[i], self.delta if self.lossy[i] else 0.0)
