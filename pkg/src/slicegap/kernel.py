"""Discretization of the auxiliary level-chain kernel and gap certification.

The level chain depends on the target only through the generalized
level-set function ``ell``: its transition kernel is

    P(t, B) = (1/ell(t)) * int_t^inf  lambda(B cap (0,s)) / s  d(-ell)(s),

a Lebesgue-Stieltjes integral against the decreasing ``ell``.  Writing
``G(a) = int_a^inf s^{-1} d(-ell)(s)``, the stationary flux density of the
chain is ``G(max(t, u))`` -- symmetric in (t, u) -- so the discrete kernel
is assembled as a symmetric flux matrix over grid cells and then row
normalized.  This keeps detailed balance and stationarity of the cell
weights exact up to rounding, while each entry still approximates
``P(node_i, cell_j)`` of the formula above.  ``d(-ell)`` is realized as
first differences of ``ell`` on a refinement grid, so only evaluations of
``ell`` are ever needed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import DegenerateSupportError, DomainError, InvalidLevelSetError
from .levelset import LevelSetFunction

__all__ = [
    "TGrid",
    "DiscreteKernel",
    "GapEstimate",
    "build_tgrid",
    "stationary_weights",
    "discretize_pt",
    "spectral_gap",
    "certify_gap",
    "duality_gap_compare",
    "DualityReport",
    "transition_cdf",
    "adjointness_check",
]


@dataclass(frozen=True)
class TGrid:
    """Log-level grid: n+1 increasing boundaries with cell log-midpoints."""

    boundaries: np.ndarray  # log-t values, strictly increasing
    truncation_mass: float = 0.0

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        if b.ndim != 1 or b.size < 2 or np.any(np.diff(b) <= 0):
            raise DomainError("grid boundaries must be strictly increasing, size >= 2")
        object.__setattr__(self, "boundaries", b)

    @property
    def n(self) -> int:
        return self.boundaries.size - 1

    @property
    def nodes(self) -> np.ndarray:
        b = self.boundaries
        return 0.5 * (b[:-1] + b[1:])


def build_tgrid(ell: LevelSetFunction, n: int = 2048,
                mass_tol: float = 1e-8) -> TGrid:
    """Log-spaced grid from a mass-truncated lower level up to the support sup.

    The lower boundary is found by bisection so that the stationary mass
    below it is at most ``mass_tol`` of the total.
    """
    s_sup = ell.log_support_sup
    if not math.isfinite(s_sup):
        raise DomainError("grid construction requires a finite support supremum")

    def tail_mass(s_lo: float, m: int = 4096) -> float:
        # integral of ell(e^s) e^s below s_lo, relative units
        depth_grid = np.linspace(s_lo - 200.0, s_lo, m)
        return _log_mass(ell, depth_grid)

    def _log_mass(e, grid):
        lm = e.log(grid) + grid
        finite = np.isfinite(lm)
        if not np.any(finite):
            return -math.inf
        top = np.max(lm[finite])
        vals = np.zeros(grid.shape)
        vals[finite] = np.exp(lm[finite] - top)
        h = grid[1] - grid[0]
        return top + math.log(np.trapezoid(vals, dx=h) + 1e-300)

    # total mass over a generous window below the supremum
    depth = 64.0
    total = _log_mass(ell, np.linspace(s_sup - depth, s_sup, 1 << 15))
    while True:
        wider = _log_mass(ell, np.linspace(s_sup - 2 * depth, s_sup, 1 << 15))
        if wider - total < 1e-12:
            break
        total, depth = wider, 2 * depth
        if depth > 1e5:
            raise DomainError("stationary mass does not concentrate; cannot build grid")

    target_log = total + math.log(mass_tol)
    lo, hi = s_sup - 4 * depth, s_sup - 1e-9
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if tail_mass(mid) < target_log:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10 * max(1.0, abs(hi)):
            break
    s_min = 0.5 * (lo + hi)
    trunc = math.exp(tail_mass(s_min) - total)
    return TGrid(boundaries=np.linspace(s_min, s_sup, n + 1),
                 truncation_mass=trunc)


@dataclass(frozen=True)
class DiscreteKernel:
    """Row-stochastic discretization of the level-chain kernel."""

    matrix: np.ndarray           # n x n, rows sum to 1
    weights: np.ndarray          # stationary cell probabilities
    grid: TGrid
    flux: np.ndarray             # symmetric flux matrix the kernel came from
    row_defect: float            # TV mismatch vs. independent quadrature weights

    @property
    def n(self) -> int:
        return self.weights.size


def stationary_weights(ell: LevelSetFunction, grid: TGrid) -> np.ndarray:
    """Cell masses of the stationary level density, normalized to sum 1.

    Composite Simpson with 8 subintervals per cell applied to
    ``ell(e^s) e^s`` in the log-level variable.
    """
    b = grid.boundaries
    n = grid.n
    sub = 8
    s = np.linspace(0.0, 1.0, sub + 1)
    pts = b[:-1, None] + np.diff(b)[:, None] * s[None, :]  # (n, sub+1)
    lm = ell.log(pts.ravel()).reshape(n, sub + 1) + pts
    finite = np.isfinite(lm)
    if not np.any(finite):
        raise DegenerateSupportError("level-set function vanishes on the whole grid")
    top = np.max(lm[finite])
    vals = np.zeros(lm.shape)
    vals[finite] = np.exp(lm[finite] - top)
    w_simpson = np.array([1, 4, 2, 4, 2, 4, 2, 4, 1], dtype=float)
    h = np.diff(b) / sub
    masses = (vals @ w_simpson) * h / 3.0
    total = masses.sum()
    if total <= 0.0:
        raise DegenerateSupportError("all stationary cell masses are zero")
    return masses / total


def discretize_pt(ell: LevelSetFunction, grid: TGrid,
                  refine: int = 16) -> DiscreteKernel:
    """Assemble the discrete level-chain kernel from ``ell`` alone.

    Each grid cell is refined into ``refine`` log-uniform subintervals; the
    Stieltjes measure is realized as differences of ``ell`` across the
    refinement and placed at geometric midpoints.  The lowest cell is
    extended to level 0 so that the kernel's image measure is not
    truncated.
    """
    b = grid.boundaries
    n = grid.n
    # global refinement boundaries in log t
    fine = np.concatenate(
        [np.linspace(b[i], b[i + 1], refine + 1)[:-1] for i in range(n)] + [b[-1:]]
    )
    lv_log = ell.log(fine)
    top = np.max(lv_log[np.isfinite(lv_log)])
    lv = np.where(np.isfinite(lv_log), np.exp(lv_log - top), 0.0)
    if np.any(np.diff(lv) > 1e-12 * lv.max()):
        raise InvalidLevelSetError("level-set function increases on the refinement grid")

    tau = np.exp(fine - b[-1])          # scaled levels, top boundary = 1
    # prepend the interval (0, tau_0) carrying no Stieltjes mass
    tau_full = np.concatenate([[0.0], tau])
    lv_full = np.concatenate([lv[:1], lv])

    delta = np.clip(lv_full[:-1] - lv_full[1:], 0.0, None)  # d(-ell) per subinterval
    mu = np.sqrt(tau_full[:-1] * tau_full[1:])              # geometric midpoints
    mu[0] = tau_full[1]                                     # unused (delta[0] = 0)
    rate = np.where(mu > 0.0, delta / np.where(mu > 0.0, mu, 1.0), 0.0)
    tail = np.concatenate([np.cumsum(rate[::-1])[::-1][1:], [0.0]])
    g_mid = tail + 0.5 * rate                               # G at subinterval midpoints

    lengths = np.diff(tau_full)
    mids = 0.5 * (tau_full[:-1] + tau_full[1:])

    # cell index of each subinterval; the prepended one belongs to cell 0
    cell_of = np.concatenate([[0], np.repeat(np.arange(n), refine)])
    a_cell = np.concatenate([[0.0], np.exp(b[1:-1] - b[-1])])  # lower t of each cell

    A = np.bincount(cell_of, weights=g_mid * lengths, minlength=n)
    B = np.bincount(cell_of, weights=g_mid * (mids - a_cell[cell_of]) * lengths,
                    minlength=n)
    len_cell = np.bincount(cell_of, weights=lengths, minlength=n)

    F = np.triu(np.outer(len_cell, A), k=1)
    F = F + F.T
    np.fill_diagonal(F, 2.0 * B)

    w = F.sum(axis=1)
    if np.any(w <= 0.0):
        raise DegenerateSupportError("a grid cell carries no flux")
    matrix = F / w[:, None]
    weights = w / w.sum()

    # quadrature defect: total-variation distance between the kernel's
    # implied stationary cell masses and an independent Simpson quadrature
    # of the stationary density (the lowest cell additionally absorbs the
    # truncated (0, t_min) tail, which the Simpson reference cannot see)
    ref_weights = stationary_weights(ell, grid)
    row_defect = float(0.5 * np.abs(weights - ref_weights).sum())
    return DiscreteKernel(matrix=matrix, weights=weights, grid=grid,
                          flux=F / w.sum(), row_defect=row_defect)


@dataclass(frozen=True)
class GapEstimate:
    """Spectral gap of a discretized kernel plus self-description."""

    gap: float
    lambda2: float
    grid_size: int
    truncation_mass: float
    refinement_delta: Optional[float] = None
    converged: Optional[bool] = None

    def to_dict(self) -> dict:
        out = {
            "gap": self.gap,
            "lambda2": self.lambda2,
            "grid_size": self.grid_size,
            "truncation_mass": self.truncation_mass,
        }
        if self.refinement_delta is not None:
            out["refinement_delta"] = self.refinement_delta
            out["converged"] = self.converged
        return out


def spectral_gap(kernel: DiscreteKernel) -> GapEstimate:
    """1 minus the second-largest eigenvalue of the symmetrized kernel."""
    w = kernel.weights
    sq = np.sqrt(w)
    A = kernel.flux / np.outer(sq, sq)
    n = A.shape[0]
    top2 = scipy.linalg.eigh(A, eigvals_only=True, subset_by_index=[n - 2, n - 1])
    lam2, lam1 = float(top2[0]), float(top2[1])
    if abs(lam1 - 1.0) > 1e-8:
        warnings.warn(f"leading eigenvalue {lam1} deviates from 1", stacklevel=2)
    if lam2 < -1e-8:
        warnings.warn(
            f"second eigenvalue {lam2} is negative beyond tolerance; "
            "the kernel should be positive semidefinite up to discretization error",
            stacklevel=2,
        )
    return GapEstimate(gap=1.0 - lam2, lambda2=lam2, grid_size=kernel.n,
                       truncation_mass=kernel.grid.truncation_mass)


def certify_gap(ell: LevelSetFunction, n: int = 2048, mass_tol: float = 1e-8,
                refine: int = 16, refinement_tol: float = 0.005) -> GapEstimate:
    """Gap at grid size n with a grid-doubling convergence diagnostic."""
    est = spectral_gap(discretize_pt(ell, build_tgrid(ell, n, mass_tol), refine))
    est2 = spectral_gap(discretize_pt(ell, build_tgrid(ell, 2 * n, mass_tol), refine))
    delta = abs(est.gap - est2.gap)
    return GapEstimate(gap=est.gap, lambda2=est.lambda2, grid_size=n,
                       truncation_mass=est.truncation_mass,
                       refinement_delta=delta,
                       converged=delta <= refinement_tol)


@dataclass(frozen=True)
class DualityReport:
    """Pointwise level-set agreement and gap agreement of two samplers."""

    max_ell_abs_diff: float
    max_ell_rel_diff: float
    gap_a: float
    gap_b: float

    @property
    def gap_diff(self) -> float:
        return abs(self.gap_a - self.gap_b)


def duality_gap_compare(ell_a: LevelSetFunction, ell_b: LevelSetFunction,
                        n: int = 1024, mass_tol: float = 1e-8,
                        n_probe: int = 50) -> DualityReport:
    """Compare two level-set functions and the gaps of their level chains."""
    grid = build_tgrid(ell_a, n, mass_tol)
    probes = np.linspace(grid.boundaries[0], grid.boundaries[-1], n_probe + 2)[1:-1]
    va = ell_a.eval(probes)
    vb = ell_b.eval(probes)
    abs_diff = float(np.max(np.abs(va - vb)))
    rel_diff = float(np.max(np.abs(va - vb) / np.maximum(np.abs(va), 1e-300)))
    gap_a = spectral_gap(discretize_pt(ell_a, grid)).gap
    gap_b = spectral_gap(discretize_pt(ell_b, grid)).gap
    return DualityReport(max_ell_abs_diff=abs_diff, max_ell_rel_diff=rel_diff,
                         gap_a=gap_a, gap_b=gap_b)


def transition_cdf(ell: LevelSetFunction, log_t: float, log_b: float,
                   refine_total: int = 1 << 16, depth: float = 0.0) -> float:
    """P(next level < b | current level t), by quadrature of the kernel.

    Evaluates ``(1/ell(t)) int_t^sup min(b, s)/s d(-ell)(s)`` with the
    Stieltjes measure realized as differences of ``ell`` on a log-uniform
    refinement of (t, sup).
    """
    s_sup = ell.log_support_sup
    if not log_t < s_sup:
        raise DomainError("current level is outside the support")
    s = np.linspace(log_t, s_sup, refine_total + 1)
    lv_log = ell.log(s)
    top = lv_log[0]
    lv = np.where(np.isfinite(lv_log), np.exp(lv_log - top), 0.0)
    delta = np.clip(lv[:-1] - lv[1:], 0.0, None)
    # work relative to the current level to avoid overflow
    mu = np.exp(0.5 * (s[:-1] + s[1:]) - log_t)
    bb = math.exp(min(log_b - log_t, 700.0)) if log_b - log_t < 700 else math.inf
    frac = np.minimum(bb, mu) / mu
    return float(np.sum(frac * delta) / lv[0])


# ---------------------------------------------------------------------------
# Adjointness of the two update kernels
# ---------------------------------------------------------------------------

def _t_moment(tag: str, b: np.ndarray) -> np.ndarray:
    """Closed-form ``int_0^b g(t) dt`` for the level test functions."""
    if tag == "one":
        return b
    if tag == "t":
        return 0.5 * b * b
    if tag == "t2":
        return b**3 / 3.0
    if tag == "sin":
        return 1.0 - np.cos(b)
    raise DomainError(f"unknown test function {tag}")


def _g_eval(tag: str, t: np.ndarray) -> np.ndarray:
    if tag == "one":
        return np.ones_like(t)
    if tag == "t":
        return t
    if tag == "t2":
        return t * t
    if tag == "sin":
        return np.sin(t)
    raise DomainError(f"unknown test function {tag}")


def _h_eval(tag: str, r: np.ndarray) -> np.ndarray:
    if tag == "one":
        return np.ones_like(r)
    if tag == "r":
        return r
    if tag == "r2":
        return r * r
    if tag == "exp":
        return np.exp(-r)
    raise DomainError(f"unknown test function {tag}")


def adjointness_check(target, fac, n_r: int = 4096, n_t: int = 4096,
                      g_tags=("one", "t", "t2", "sin"),
                      h_tags=("one", "r", "r2", "exp")) -> float:
    """Max normalized residual of the update-kernel adjointness identity.

    Both sides of ``<U_T g, h>_pi = <g, U_X h>_pi-tilde`` are evaluated by
    independent quadratures over the radial and level variables for every
    (g, h) pair; the residual is normalized by the product of the function
    norms.
    """
    from scipy.integrate import simpson

    from .levelset import level_bounds, level_set_function, level_interval, \
        log_h_sup, mode_radius
    from .targets import RadialFactorization, log_h

    d = target.dim
    alpha = fac.alpha
    beta = d - alpha
    fac_rad = RadialFactorization(float(d - 1))
    r_mode_rad = mode_radius(target, fac_rad)
    sup_rad = log_h_sup(target, fac_rad, r_mode_rad)
    iv = level_interval(target, fac_rad, sup_rad - 60.0,
                        r_mode=r_mode_rad, log_sup=sup_rad)
    r_a = max(iv.r_lo, 1e-12)
    r_b = iv.r_hi

    # dense radial grid for all quadratures
    m = 1 << 17
    r = np.linspace(r_a, r_b, m + 1)
    log_rho = (d - 1) * np.log(r) - target.phi_vec(r)
    shift = np.max(log_rho)
    rho = np.exp(log_rho - shift)                     # scaled radial density
    c_norm = simpson(rho, x=r)                        # scaled normalization

    p1_log = alpha * np.log(r) - target.phi_vec(r)    # log of the slice profile
    p1 = np.exp(p1_log)

    ell = level_set_function(target, fac)
    s_sup = ell.log_support_sup
    # substitute s = s_sup - v^2: the level-set function vanishes like
    # sqrt(s_sup - s) at the top level, and the substitution removes the
    # square-root endpoint singularity from the quadrature
    v_grid = np.linspace(math.sqrt(1e-12), math.sqrt(40.0), n_t + 1)
    s_grid = s_sup - v_grid[::-1] ** 2
    t_grid = np.exp(s_grid)
    r_lo_t, r_hi_t = level_bounds(target, fac, s_grid)
    ell_log = ell.log(s_grid)
    ell_scaled = np.where(np.isfinite(ell_log),
                          np.exp(ell_log - np.max(ell_log[np.isfinite(ell_log)])), 0.0)
    jac = 2.0 * v_grid[::-1]                          # |ds/dv| on the s grid
    pi_t_weight = ell_scaled * t_grid * jac           # log-level law times ds/dv
    pi_t_norm = simpson(pi_t_weight, x=-v_grid[::-1])

    # cumulative integrals of r^{beta-1} h(r) for the set-update averages
    from scipy.integrate import cumulative_trapezoid
    base = r ** (beta - 1.0)

    worst = 0.0
    for h_tag in h_tags:
        h_vals = _h_eval(h_tag, r)
        cum = np.concatenate([[0.0], cumulative_trapezoid(base * h_vals, r)])
        num = np.interp(r_hi_t, r, cum) - np.interp(np.maximum(r_lo_t, r_a), r, cum)
        den = (r_hi_t**beta - r_lo_t**beta) / beta
        ux_h = num / den                               # (U_X h)(t) on the level grid

        norm_h = math.sqrt(max(simpson(rho * h_vals**2, x=r) / c_norm, 0.0))
        for g_tag in g_tags:
            # LHS: pi-average of h(r) times the mean of g under Unif(0, p1(r))
            mean_g = _t_moment(g_tag, p1) / p1
            lhs = simpson(rho * h_vals * mean_g, x=r) / c_norm
            # RHS: level-law average of g(t) (U_X h)(t)
            x_var = -v_grid[::-1]
            rhs = simpson(pi_t_weight * _g_eval(g_tag, t_grid) * ux_h, x=x_var) / pi_t_norm
            norm_g = math.sqrt(
                max(simpson(pi_t_weight * _g_eval(g_tag, t_grid) ** 2, x=x_var)
                    / pi_t_norm, 0.0))
            denom = norm_g * norm_h
            if denom == 0.0:
                continue
            worst = max(worst, abs(lhs - rhs) / denom)
    return worst
