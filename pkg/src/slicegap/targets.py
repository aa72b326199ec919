"""Rotationally invariant target densities and their slice factorizations.

A target is described entirely by its radial potential ``phi``: the
unnormalized density is ``exp(-phi(||x||))`` on the ball ``||x|| < kappa``.
The factorization splits the density into a radial power weight
``||x||^{-alpha}`` and the remaining profile ``||x||^{alpha} exp(-phi)``;
``alpha = 0`` gives uniform slice sampling (USS) and ``alpha = d - 1``
polar slice sampling (PSS).  All profile evaluations stay in log domain so
that nothing overflows even for dimensions in the thousands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

__all__ = [
    "RadialTarget",
    "RadialFactorization",
    "log_h",
    "surface_area",
    "log_surface_area",
    "exponential",
    "volcano",
    "gaussian",
    "radial_weighted_exponential",
    "make_builtin",
    "validate_target",
    "BUILTIN_TAGS",
]


def _finite_difference(phi: Callable[[float], float]) -> Callable[[float], float]:
    def dphi(r: float) -> float:
        h = max(1e-6, 1e-6 * abs(r))
        return (phi(r + h) - phi(r - h)) / (2.0 * h)

    return dphi


@dataclass(frozen=True)
class RadialTarget:
    """Radial potential ``phi``, its derivative, support cutoff and dimension.

    The unnormalized density on R^dim is ``exp(-phi(||x||))`` for
    ``||x|| < kappa`` and zero outside.  ``dphi`` may be omitted, in which
    case a central finite difference of ``phi`` is used.
    """

    phi: Callable[[float], float]
    dphi: Optional[Callable[[float], float]] = None
    kappa: float = math.inf
    dim: int = 1
    tag: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1 or self.dim != int(self.dim):
            raise DomainError(f"dim must be a positive integer, got {self.dim}")
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if self.dphi is None:
            object.__setattr__(self, "dphi", _finite_difference(self.phi))

    def phi_vec(self, r: np.ndarray) -> np.ndarray:
        """Vectorized potential evaluation (phi may be scalar-only)."""
        try:
            return np.asarray(self.phi(np.asarray(r, dtype=float)), dtype=float)
        except (TypeError, ValueError):
            return np.array([self.phi(float(ri)) for ri in np.atleast_1d(r)])


@dataclass(frozen=True)
class RadialFactorization:
    """Radial power weight exponent ``alpha`` in [0, d-1]."""

    alpha: float

    def __post_init__(self):
        if self.alpha < 0:
            raise DomainError(f"alpha must be nonnegative, got {self.alpha}")

    @staticmethod
    def uss() -> "RadialFactorization":
        return RadialFactorization(0.0)

    @staticmethod
    def pss(dim: int) -> "RadialFactorization":
        # PSS coincides with USS in one dimension.
        return RadialFactorization(float(max(dim - 1, 0)))

    def validate_for(self, target: RadialTarget) -> None:
        if self.alpha > target.dim - 1 + 1e-12:
            raise DomainError(
                f"alpha={self.alpha} exceeds d-1={target.dim - 1} for this target"
            )


def log_h(target: RadialTarget, fac: RadialFactorization, r):
    """Log of the slice profile ``h_alpha(r) = r^alpha exp(-phi(r))``.

    Works on scalars and arrays; requires ``0 < r < kappa``.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0.0) or np.any(r_arr >= target.kappa):
        raise DomainError("r must lie strictly inside (0, kappa)")
    out = fac.alpha * np.log(r_arr) - target.phi_vec(r_arr)
    if np.isscalar(r) or r_arr.ndim == 0:
        return float(out)
    return out


def surface_area(d: int) -> float:
    """Surface measure of the unit sphere S^{d-1} in R^d."""
    return math.exp(log_surface_area(d))


def log_surface_area(d: int) -> float:
    """Log of the surface measure of S^{d-1}; safe for large d."""
    if d < 1 or d != int(d):
        raise DomainError(f"d must be a positive integer, got {d}")
    return math.log(2.0) + 0.5 * d * math.log(math.pi) - gammaln(0.5 * d)


# ---------------------------------------------------------------------------
# Builtin targets
# ---------------------------------------------------------------------------

def exponential(dim: int) -> RadialTarget:
    """phi(r) = r: the density exp(-||x||)."""
    return RadialTarget(
        phi=lambda r: r, dphi=lambda r: np.ones_like(np.asarray(r, dtype=float)) if np.ndim(r) else 1.0,
        kappa=math.inf, dim=dim, tag="exponential",
    )


def volcano(dim: int, c: float = 2.0) -> RadialTarget:
    """phi(r) = (r - c)^2: a ridge of mass at radius c."""
    if c <= 0:
        raise DomainError(f"volcano offset must be positive, got {c}")
    return RadialTarget(
        phi=lambda r: (r - c) ** 2, dphi=lambda r: 2.0 * (r - c),
        kappa=math.inf, dim=dim, tag="volcano", params={"c": c},
    )


def gaussian(dim: int) -> RadialTarget:
    """phi(r) = r^2 / 2: the standard Gaussian shape."""
    return RadialTarget(
        phi=lambda r: 0.5 * r * r, dphi=lambda r: r,
        kappa=math.inf, dim=dim, tag="gaussian",
    )


def radial_weighted_exponential(dim: int) -> RadialTarget:
    """phi(r) = r + (d-1) log r, i.e. the density ||x||^{1-d} exp(-||x||).

    The potential is not convex, so this target lies outside the class
    certified by the convexity checker; it exists because its PSS profile
    is exactly exp(-r), which makes the level-set function linear in
    log(1/t).
    """
    dm1 = dim - 1
    return RadialTarget(
        phi=lambda r: r + dm1 * np.log(r) if np.ndim(r) else r + dm1 * math.log(r),
        dphi=lambda r: 1.0 + dm1 / r,
        kappa=math.inf, dim=dim, tag="radial_weighted_exponential",
    )


BUILTIN_TAGS = {
    "exponential": exponential,
    "volcano": volcano,
    "gaussian": gaussian,
    "radial_weighted_exponential": radial_weighted_exponential,
}


def make_builtin(tag: str, dim: int, **params) -> RadialTarget:
    """Resolve a builtin target by tag name."""
    key = tag.lower()
    if key not in BUILTIN_TAGS:
        raise DomainError(f"unknown builtin target {tag!r}; known: {sorted(BUILTIN_TAGS)}")
    return BUILTIN_TAGS[key](dim, **params)


def validate_target(target: RadialTarget, n_probe: int = 64) -> None:
    """Numerical consistency checks on a target.

    Verifies that phi is finite on a probe grid inside the support, that
    phi blows up at a finite cutoff, and that dphi matches a central
    finite difference of phi to 1e-6 relative error.
    """
    hi = target.kappa if math.isfinite(target.kappa) else 50.0
    probe = np.linspace(hi * 1e-3, hi * 0.99, n_probe)
    vals = target.phi_vec(probe)
    if not np.all(np.isfinite(vals)):
        raise DomainError("phi is not finite on the interior probe grid")
    if math.isfinite(target.kappa):
        # phi must diverge toward the cutoff.
        deltas = target.kappa * np.array([1e-2, 1e-4, 1e-6, 1e-8])
        edge = target.phi_vec(target.kappa - deltas)
        if not (np.all(np.diff(edge) > 0) and edge[-1] > vals.mean() + 10.0):
            raise DomainError("phi does not diverge at the finite cutoff kappa")
    fd = _finite_difference(target.phi)
    for r in probe:
        a = target.dphi(float(r))
        b = fd(float(r))
        if abs(a - b) > 1e-6 * (1.0 + abs(b)):
            raise DomainError(
                f"dphi inconsistent with finite difference at r={r}: {a} vs {b}"
            )
