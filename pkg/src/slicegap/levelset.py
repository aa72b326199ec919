"""Level intervals, the generalized level-set function and class membership.

The slice profile ``h_alpha(r) = r^alpha exp(-phi(r))`` of an in-class
target is unimodal, so every super level set ``{r : h_alpha(r) > t}`` is an
interval.  This module locates the interval endpoints by bisection on the
two monotone branches, evaluates the generalized level-set function

    ell(t) = sigma_{d-1} / (d - alpha) * (r_hi^{d-alpha} - r_lo^{d-alpha}),

and checks the decreasing-function class whose k-th member certifies a
spectral gap of at least 1/(k+1) for the associated sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, EmptyLevelError, NoRootError
from .targets import RadialFactorization, RadialTarget, log_h, log_surface_area

__all__ = [
    "LevelInterval",
    "LevelSetFunction",
    "MembershipReport",
    "mode_radius",
    "log_h_sup",
    "level_interval",
    "level_bounds",
    "ell_eval",
    "log_ell_eval",
    "level_set_function",
    "lambda_k_check",
    "default_probe",
    "canonical_inverse_phi",
    "canonical_potential",
]

_MAX_EXPANSIONS = 200
_VEC_BISECT_ITERS = 110
_REL_TOL = 1e-13


@dataclass(frozen=True)
class LevelInterval:
    """Endpoints of a radial super level set ``{r : h_alpha(r) > t}``."""

    r_lo: float
    r_hi: float


# ---------------------------------------------------------------------------
# Mode of the profile
# ---------------------------------------------------------------------------

def _tiny_radius(target: RadialTarget) -> float:
    return min(1e-100, target.kappa * 0.5)


def mode_radius(target: RadialTarget, fac: RadialFactorization) -> float:
    """Radius maximizing ``h_alpha``; 0 if the profile is non-increasing.

    For ``alpha > 0`` solves ``r * phi'(r) = alpha`` on the two sides of a
    bracket found by geometric expansion; for ``alpha = 0`` returns the
    minimizer of phi.
    """
    fac.validate_for(target)
    kappa = target.kappa
    if fac.alpha == 0.0:
        g = lambda r: target.dphi(r)
    else:
        g = lambda r: r * target.dphi(r) - fac.alpha

    r0 = 1.0 if not math.isfinite(kappa) else 0.5 * kappa
    # Shrink toward zero looking for g < 0 (profile still increasing there).
    a = r0
    found_neg = False
    for _ in range(_MAX_EXPANSIONS):
        if g(a) < 0.0:
            found_neg = True
            break
        a *= 0.5
    if not found_neg:
        # h_alpha is non-increasing on all of (0, kappa).
        return 0.0
    # Expand upward looking for g >= 0.
    if math.isfinite(kappa):
        b = a
        gap = kappa - a
        ok = False
        for j in range(1, _MAX_EXPANSIONS):
            b = kappa - gap * 0.5**j
            if g(b) >= 0.0:
                ok = True
                break
    else:
        b = max(2.0 * a, 1.0)
        ok = False
        for _ in range(_MAX_EXPANSIONS):
            if g(b) >= 0.0:
                ok = True
                break
            b *= 2.0
    if not ok:
        raise NoRootError(
            "could not bracket the profile mode; target outside the supported class"
        )
    for _ in range(_MAX_EXPANSIONS):
        m = 0.5 * (a + b)
        if g(m) < 0.0:
            a = m
        else:
            b = m
        if b - a <= _REL_TOL * max(b, 1.0):
            break
    return 0.5 * (a + b)


def log_h_sup(target: RadialTarget, fac: RadialFactorization,
              r_mode: Optional[float] = None) -> float:
    """Log of ``sup_r h_alpha(r)``; +inf when the profile diverges at 0."""
    if r_mode is None:
        r_mode = mode_radius(target, fac)
    if r_mode > 0.0:
        return log_h(target, fac, r_mode)
    eps = _tiny_radius(target)
    v1 = log_h(target, fac, eps)
    v2 = log_h(target, fac, eps * 1e-50)
    if v2 > v1 + 1e-6 * (1.0 + abs(v1)):
        return math.inf
    return v1


# ---------------------------------------------------------------------------
# Level intervals: scalar and vectorized bisection
# ---------------------------------------------------------------------------

def _log_h_scalar(target: RadialTarget, alpha: float, r: float) -> float:
    return alpha * math.log(r) - target.phi(r)


def level_interval(target: RadialTarget, fac: RadialFactorization,
                   log_t: float,
                   r_mode: Optional[float] = None,
                   log_sup: Optional[float] = None) -> LevelInterval:
    """Solve ``log_h(r) = log_t`` on both monotone branches by bisection."""
    if r_mode is None:
        r_mode = mode_radius(target, fac)
    if log_sup is None:
        log_sup = log_h_sup(target, fac, r_mode)
    if not log_t < log_sup:
        raise EmptyLevelError(
            f"log_t={log_t} is not below the profile supremum {log_sup}"
        )
    phi = target.phi
    alpha = fac.alpha
    kappa = target.kappa

    def lh(r: float) -> float:
        return alpha * math.log(r) - phi(r)

    # --- lower endpoint --------------------------------------------------
    if r_mode == 0.0:
        r_lo = 0.0
        anchor = min(1.0, 0.5 * kappa)
        while lh(anchor) < log_t:
            anchor *= 0.5
    else:
        anchor = r_mode
        a = 0.5 * r_mode
        hit = False
        for _ in range(_MAX_EXPANSIONS):
            if lh(a) <= log_t:
                hit = True
                break
            a *= 0.5
        if not hit:
            # The profile limit at 0 already exceeds the level.
            r_lo = 0.0
        else:
            b = r_mode
            while b - a > _REL_TOL * max(b, 1.0):
                m = 0.5 * (a + b)
                if lh(m) > log_t:
                    b = m
                else:
                    a = m
            r_lo = 0.5 * (a + b)

    # --- upper endpoint --------------------------------------------------
    lo = anchor
    if math.isfinite(kappa):
        gap = kappa - lo
        hi = lo
        ok = False
        for j in range(1, _MAX_EXPANSIONS):
            hi = kappa - gap * 0.5**j
            if lh(hi) <= log_t:
                ok = True
                break
    else:
        hi = max(2.0 * lo, 1.0)
        ok = False
        for _ in range(_MAX_EXPANSIONS):
            if lh(hi) <= log_t:
                ok = True
                break
            hi *= 2.0
    if not ok:
        raise NoRootError("upper bracket expansion failed; profile does not decay")
    while hi - lo > _REL_TOL * max(hi, 1.0):
        m = 0.5 * (lo + hi)
        if lh(m) > log_t:
            lo = m
        else:
            hi = m
    r_hi = 0.5 * (lo + hi)
    return LevelInterval(r_lo=r_lo, r_hi=r_hi)


def level_bounds(target: RadialTarget, fac: RadialFactorization,
                 log_t: np.ndarray,
                 r_mode: Optional[float] = None,
                 log_sup: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`level_interval` over an array of log levels."""
    log_t = np.asarray(log_t, dtype=float)
    if r_mode is None:
        r_mode = mode_radius(target, fac)
    if log_sup is None:
        log_sup = log_h_sup(target, fac, r_mode)
    if np.any(log_t >= log_sup):
        raise EmptyLevelError("some levels are not below the profile supremum")
    alpha = fac.alpha
    kappa = target.kappa
    n = log_t.size

    def lh(r: np.ndarray) -> np.ndarray:
        return alpha * np.log(r) - target.phi_vec(r)

    # --- lower endpoint and anchor for the upper branch ------------------
    if r_mode == 0.0:
        r_lo = np.zeros(n)
        anchor = np.full(n, min(1.0, 0.5 * kappa))
        for _ in range(_MAX_EXPANSIONS):
            bad = lh(anchor) < log_t
            if not np.any(bad):
                break
            anchor[bad] *= 0.5
    else:
        anchor = np.full(n, r_mode)
        a = np.full(n, 0.5 * r_mode)
        active = np.ones(n, dtype=bool)
        for _ in range(_MAX_EXPANSIONS):
            active &= lh(a) > log_t
            if not np.any(active):
                break
            a[active] *= 0.5
        r_lo = np.zeros(n)
        solve = ~active  # bracketed elements
        if np.any(solve):
            lo = a[solve]
            hi = np.full(lo.shape, r_mode)
            lt = log_t[solve]
            for _ in range(_VEC_BISECT_ITERS):
                m = 0.5 * (lo + hi)
                above = lh(m) > lt
                hi = np.where(above, m, hi)
                lo = np.where(above, lo, m)
            r_lo[solve] = 0.5 * (lo + hi)

    # --- upper endpoint ---------------------------------------------------
    lo = anchor.copy()
    if math.isfinite(kappa):
        gap = kappa - lo
        hi = lo.copy()
        active = np.ones(n, dtype=bool)
        scale = 0.5
        for _ in range(_MAX_EXPANSIONS):
            hi[active] = kappa - gap[active] * scale
            active &= lh(hi) > log_t
            if not np.any(active):
                break
            scale *= 0.5
        if np.any(active):
            raise NoRootError("upper bracket expansion failed at finite cutoff")
    else:
        hi = np.maximum(2.0 * lo, 1.0)
        active = np.ones(n, dtype=bool)
        for _ in range(_MAX_EXPANSIONS):
            active &= lh(hi) > log_t
            if not np.any(active):
                break
            hi[active] *= 2.0
        if np.any(active):
            raise NoRootError("upper bracket expansion failed; profile does not decay")
    for _ in range(_VEC_BISECT_ITERS):
        m = 0.5 * (lo + hi)
        above = lh(m) > log_t
        lo = np.where(above, m, lo)
        hi = np.where(above, hi, m)
    r_hi = 0.5 * (lo + hi)
    return r_lo, r_hi


# ---------------------------------------------------------------------------
# Generalized level-set function
# ---------------------------------------------------------------------------

def log_ell_eval(target: RadialTarget, fac: RadialFactorization, log_t,
                 r_mode: Optional[float] = None,
                 log_sup: Optional[float] = None):
    """Log of the generalized level-set value; -inf above the supremum."""
    if r_mode is None:
        r_mode = mode_radius(target, fac)
    if log_sup is None:
        log_sup = log_h_sup(target, fac, r_mode)
    lt = np.atleast_1d(np.asarray(log_t, dtype=float))
    out = np.full(lt.shape, -math.inf)
    inside = lt < log_sup
    if np.any(inside):
        r_lo, r_hi = level_bounds(target, fac, lt[inside], r_mode, log_sup)
        beta = target.dim - fac.alpha
        log_sigma = log_surface_area(target.dim)
        vals = log_sigma - math.log(beta) + beta * np.log(r_hi)
        pos = r_lo > 0.0
        if np.any(pos):
            expo = beta * (np.log(r_lo[pos]) - np.log(r_hi[pos]))
            with np.errstate(divide="ignore"):
                vals[pos] += np.log1p(-np.exp(expo))
        out[inside] = vals
    if np.isscalar(log_t) or np.ndim(log_t) == 0:
        return float(out[0])
    return out


def ell_eval(target: RadialTarget, fac: RadialFactorization, log_t, **kw):
    """Generalized level-set value; 0 at or above the profile supremum."""
    return np.exp(log_ell_eval(target, fac, log_t, **kw))


@dataclass(frozen=True)
class LevelSetFunction:
    """A decreasing level-set function, evaluated in log domain.

    ``log_eval`` maps an array of natural-log levels to log values
    (``-inf`` where the level set is empty), ``log_support_sup`` is the log
    of ``sup{t : ell(t) > 0}`` and ``limit_L`` is ``lim_{t -> 0} ell(t)``.
    """

    log_eval: Callable[[np.ndarray], np.ndarray]
    log_support_sup: float
    limit_L: float = math.inf
    label: str = ""

    def log(self, log_t):
        lt = np.atleast_1d(np.asarray(log_t, dtype=float))
        out = np.asarray(self.log_eval(lt), dtype=float)
        if np.ndim(log_t) == 0:
            return float(out[0])
        return out

    def eval(self, log_t):
        return np.exp(self.log(log_t))


def level_set_function(target: RadialTarget, fac: RadialFactorization) -> LevelSetFunction:
    """Build the level-set function of a target/factorization pair."""
    fac.validate_for(target)
    r_mode = mode_radius(target, fac)
    log_sup = log_h_sup(target, fac, r_mode)
    beta = target.dim - fac.alpha
    if math.isfinite(target.kappa):
        limit = math.exp(
            log_surface_area(target.dim) - math.log(beta) + beta * math.log(target.kappa)
        )
    else:
        limit = math.inf

    def _eval(lt: np.ndarray) -> np.ndarray:
        return log_ell_eval(target, fac, lt, r_mode=r_mode, log_sup=log_sup)

    label = f"{target.tag}/alpha={fac.alpha}/d={target.dim}"
    return LevelSetFunction(log_eval=_eval, log_support_sup=log_sup,
                           limit_L=limit, label=label)


# ---------------------------------------------------------------------------
# Class membership
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MembershipReport:
    """Outcome of the decreasing-class check at index k."""

    k: int
    passed: bool
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "passed": self.passed,
            "violations": [
                {"location": loc, "check": name, "magnitude": mag}
                for loc, name, mag in self.violations
            ],
        }


def default_probe(ell: LevelSetFunction, n: int = 200, depth: float = 40.0) -> np.ndarray:
    """Uniform probe grid in ``s = -log t`` inside the open support."""
    s0 = -ell.log_support_sup
    if not math.isfinite(s0):
        raise DomainError("default probe needs a finite support supremum")
    return s0 + np.linspace(depth / n, depth, n)


def lambda_k_check(ell: LevelSetFunction, k: int,
                   probe: Optional[Sequence[float]] = None) -> MembershipReport:
    """Check boundary limits, strict decrease and k-th-root concavity.

    The third condition tests nonpositive second differences of
    ``s -> ell(exp(-s))^{1/k}``, the transformed statement of log-concavity
    of the inverse.
    """
    if k < 1 or k != int(k):
        raise DomainError(f"k must be a positive integer, got {k}")
    k = int(k)
    if probe is None:
        probe = default_probe(ell)
    s = np.asarray(probe, dtype=float)
    if s.size < 100:
        raise DomainError("probe grid must contain at least 100 points")
    s0 = -ell.log_support_sup
    if np.any(s <= s0):
        raise DomainError("probe grid extends outside the open support")

    logf = ell.log(-s)
    if np.any(~np.isfinite(logf)):
        raise DomainError("level-set function vanished inside its claimed support")
    scale = np.max(logf)
    f = np.exp(logf - scale)  # common factor drops out of all relative checks

    violations: list = []

    # (i) boundary: ell must vanish continuously at the support supremum
    # and stay positive deep inside.
    span = s[-1] - s0
    edge = float(np.exp(ell.log(-(s0 + 1e-8 * span)) - scale))
    if edge > 1e-3 * np.max(f):
        violations.append((s0, "boundary_limit", edge))
    if f[-1] <= 0.0:
        violations.append((float(s[-1]), "positive_limit", 0.0))

    # (ii) strict decrease in t, i.e. strict increase in s.
    slack = 1e-10 * np.maximum(f[:-1], f[1:])
    diffs = f[1:] - f[:-1]
    bad = diffs <= slack
    for i in np.nonzero(bad)[0]:
        violations.append((float(s[i]), "strict_decrease", float(diffs[i])))

    # (iii) concavity of the k-th root along s.
    q = np.exp((logf - scale) / k)
    d2 = q[2:] - 2.0 * q[1:-1] + q[:-2]
    qslack = 1e-8 * np.max(q)
    bad = d2 > qslack
    for i in np.nonzero(bad)[0]:
        violations.append((float(s[i + 1]), "root_concavity", float(d2[i])))

    return MembershipReport(k=k, passed=not violations, violations=violations)


# ---------------------------------------------------------------------------
# Canonical comparator density
# ---------------------------------------------------------------------------

def canonical_inverse_phi(ell: LevelSetFunction, k: int, s: float) -> float:
    """Radius of the canonical k-dimensional comparator at potential level s.

    Computes ``(k * ell(exp(-s)) / sigma_{k-1})^{1/k}``; returns 0 where the
    level set is empty.
    """
    if k < 1 or k != int(k):
        raise DomainError(f"k must be a positive integer, got {k}")
    s0 = -ell.log_support_sup
    if not s > s0:
        raise DomainError(f"s={s} is outside the domain (s must exceed {s0})")
    lv = ell.log(-s)
    if not math.isfinite(lv):
        return 0.0
    return math.exp((math.log(k) + lv - log_surface_area(int(k))) / k)


def canonical_potential(ell: LevelSetFunction, k: int, r: float,
                        max_depth: float = 700.0) -> float:
    """Numeric inverse of :func:`canonical_inverse_phi` in its s argument."""
    if r <= 0.0:
        raise DomainError("r must be positive")
    s0 = -ell.log_support_sup
    lo = s0 + 1e-12 * max(1.0, abs(s0))
    hi = max(s0 + 1.0, 1.0)
    for _ in range(_MAX_EXPANSIONS):
        if canonical_inverse_phi(ell, k, hi) >= r:
            break
        hi = s0 + 2.0 * (hi - s0)
        if hi - s0 > max_depth:
            raise NoRootError(f"radius {r} is beyond the comparator's support")
    for _ in range(_MAX_EXPANSIONS):
        m = 0.5 * (lo + hi)
        if canonical_inverse_phi(ell, k, m) < r:
            lo = m
        else:
            hi = m
        if hi - lo <= 1e-14 * max(abs(hi), 1.0):
            break
    return 0.5 * (lo + hi)
