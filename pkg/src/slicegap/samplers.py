"""Slice-sampling chains for radial targets, simulated in (log t, r).

For rotationally invariant targets and radial summary functions the radius
process is itself a Markov chain with the same law as the radius of the
full-space chain, so the default simulation never materializes direction
vectors.  A full-vector mode exists to validate that reduction at small
dimension.  The level draw ``t ~ Unif(0, h(x))`` is performed as
``log t = log h(x) + log u`` and the set draw is an exact inverse-CDF
sample of the radial density ``r^{d-1-alpha}`` on the level interval.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .levelset import (
    LevelSetFunction,
    level_bounds,
    level_interval,
    log_h_sup,
    mode_radius,
)
from .targets import RadialFactorization, RadialTarget, log_h

__all__ = [
    "Trace",
    "make_rng",
    "t_update",
    "x_update_radius",
    "sample_direction",
    "run_x_chain",
    "run_t_chain",
    "x_step_radii",
    "t_step_levels",
    "RadialStationarySampler",
    "sample_radial_stationary",
    "PiTildeSampler",
]


@dataclass
class Trace:
    """Chain output: summary values, the seed and run metadata."""

    values: np.ndarray
    seed: int
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.values)

    def to_csv(self, path: str) -> None:
        """Write (step, value) rows plus a JSON metadata sidecar."""
        with open(path, "w") as fh:
            fh.write("step,value\n")
            for i, v in enumerate(self.values):
                fh.write(f"{i},{v!r}\n")
        sidecar = dict(self.meta)
        sidecar["seed"] = int(self.seed)
        sidecar["n"] = len(self.values) - 1
        with open(str(path) + ".json", "w") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)


def make_rng(base_seed: int, chain_index: int = 0) -> np.random.Generator:
    """Independent stream for chain ``chain_index`` of a seeded experiment."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=int(base_seed) & (2**64 - 1),
                               spawn_key=(int(chain_index),))
    )


def _open_uniform(rng: np.random.Generator) -> float:
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return u


def _open_uniforms(rng: np.random.Generator, size) -> np.ndarray:
    u = rng.random(size)
    zero = u == 0.0
    while np.any(zero):
        u[zero] = rng.random(int(zero.sum()))
        zero = u == 0.0
    return u


def t_update(log_h_x, u):
    """Log level of a uniform draw on (0, h(x)): ``log h(x) + log u``."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise DomainError("u must lie strictly inside (0, 1)")
    out = np.asarray(log_h_x, dtype=float) + np.log(u_arr)
    if np.ndim(u) == 0 and np.ndim(log_h_x) == 0:
        return float(out)
    return out


def x_update_radius(target: RadialTarget, fac: RadialFactorization,
                    log_t, u,
                    r_mode: Optional[float] = None,
                    log_sup: Optional[float] = None):
    """Inverse-CDF draw of the radial density ``r^{d-1-alpha}`` on the level.

    For PSS (``alpha = d-1``) this is uniform on the interval; otherwise the
    power-law inverse CDF is evaluated in log domain so that large
    dimensions never overflow.
    """
    beta = target.dim - fac.alpha
    if np.ndim(log_t) == 0 and np.ndim(u) == 0:
        iv = level_interval(target, fac, float(log_t), r_mode=r_mode, log_sup=log_sup)
        return _inverse_cdf_radius(iv.r_lo, iv.r_hi, float(u), beta)
    log_t = np.asarray(log_t, dtype=float)
    u = np.broadcast_to(np.asarray(u, dtype=float), log_t.shape).copy()
    r_lo, r_hi = level_bounds(target, fac, log_t, r_mode=r_mode, log_sup=log_sup)
    return _inverse_cdf_radius_vec(r_lo, r_hi, u, beta)


def _inverse_cdf_radius(r_lo: float, r_hi: float, u: float, beta: float) -> float:
    if beta == 1.0:
        return r_lo + u * (r_hi - r_lo)
    if r_lo <= 0.0:
        q = 0.0
    else:
        q = math.exp(beta * (math.log(r_lo) - math.log(r_hi)))
    inner = q + u * (1.0 - q)
    if inner <= 0.0:
        return r_lo
    return r_hi * math.exp(math.log(inner) / beta)


def _inverse_cdf_radius_vec(r_lo, r_hi, u, beta: float) -> np.ndarray:
    if beta == 1.0:
        return r_lo + u * (r_hi - r_lo)
    q = np.zeros_like(r_hi)
    pos = r_lo > 0.0
    q[pos] = np.exp(beta * (np.log(r_lo[pos]) - np.log(r_hi[pos])))
    inner = q + u * (1.0 - q)
    out = np.where(inner > 0.0,
                   r_hi * np.exp(np.log(np.where(inner > 0.0, inner, 1.0)) / beta),
                   r_lo)
    return out


def sample_direction(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform unit vector in R^d (normalized standard Gaussian)."""
    if d < 1:
        raise DomainError(f"d must be positive, got {d}")
    while True:
        v = rng.standard_normal(d)
        norm = float(np.linalg.norm(v))
        if norm > 1e-12:
            return v / norm


def run_x_chain(target: RadialTarget, fac: RadialFactorization,
                n: int, init_radius: float, seed: int,
                summary: Optional[Callable] = None,
                full_vector: bool = False) -> Trace:
    """Alternate level and set updates for ``n`` steps; length-(n+1) trace.

    The default summary is the radius itself, i.e. ``g(x) = ||x||``.  The
    uniform variates and the direction draws (full-vector mode) come from
    separate seeded streams, so the radius sequence is identical in both
    modes under the same seed.
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    fac.validate_for(target)
    r_mode = mode_radius(target, fac)
    log_sup = log_h_sup(target, fac, r_mode)
    if not (0.0 < init_radius < target.kappa):
        raise DomainError(f"init_radius={init_radius} outside (0, kappa)")

    rng_u = make_rng(seed, 0)
    rng_dir = make_rng(seed, 1)
    phi = target.phi
    alpha = fac.alpha
    beta = target.dim - alpha

    if summary is None:
        g = (lambda x: float(np.linalg.norm(x))) if full_vector else (lambda r: r)
    else:
        g = summary

    values = np.empty(n + 1)
    r = float(init_radius)
    theta = sample_direction(target.dim, rng_dir) if full_vector else None
    values[0] = g(r * theta) if full_vector else g(r)
    for i in range(1, n + 1):
        lh = alpha * math.log(r) - phi(r)
        log_t = lh + math.log(_open_uniform(rng_u))
        u = rng_u.random()
        iv = level_interval(target, fac, log_t, r_mode=r_mode, log_sup=log_sup)
        r = _inverse_cdf_radius(iv.r_lo, iv.r_hi, u, beta)
        if full_vector:
            theta = sample_direction(target.dim, rng_dir)
            values[i] = g(r * theta)
        else:
            values[i] = g(r)
    meta = {
        "chain": "x",
        "target": target.tag,
        "alpha": fac.alpha,
        "d": target.dim,
        "n": n,
        "init_radius": init_radius,
        "full_vector": full_vector,
    }
    return Trace(values=values, seed=seed, meta=meta)


def run_t_chain(target: RadialTarget, fac: RadialFactorization,
                n: int, init_log_t: float, seed: int) -> Trace:
    """Auxiliary level chain: set update then level update; records log t."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    fac.validate_for(target)
    r_mode = mode_radius(target, fac)
    log_sup = log_h_sup(target, fac, r_mode)
    if not init_log_t < log_sup:
        raise DomainError("init_log_t is not inside the support of the level chain")

    rng_u = make_rng(seed, 0)
    phi = target.phi
    alpha = fac.alpha
    beta = target.dim - alpha

    values = np.empty(n + 1)
    log_t = float(init_log_t)
    values[0] = log_t
    for i in range(1, n + 1):
        u = rng_u.random()
        iv = level_interval(target, fac, log_t, r_mode=r_mode, log_sup=log_sup)
        r = _inverse_cdf_radius(iv.r_lo, iv.r_hi, u, beta)
        lh = alpha * math.log(r) - phi(r)
        log_t = lh + math.log(_open_uniform(rng_u))
        values[i] = log_t
    meta = {
        "chain": "t",
        "target": target.tag,
        "alpha": fac.alpha,
        "d": target.dim,
        "n": n,
        "init_log_t": init_log_t,
    }
    return Trace(values=values, seed=seed, meta=meta)


# ---------------------------------------------------------------------------
# Vectorized one-step transitions (used by stationarity checks)
# ---------------------------------------------------------------------------

def x_step_radii(target: RadialTarget, fac: RadialFactorization,
                 radii: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One full slice step applied independently to an array of radii."""
    radii = np.asarray(radii, dtype=float)
    lh = log_h(target, fac, radii)
    log_t = lh + np.log(_open_uniforms(rng, radii.shape))
    u = rng.random(radii.shape)
    return x_update_radius(target, fac, log_t, u)


def t_step_levels(target: RadialTarget, fac: RadialFactorization,
                  log_t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One auxiliary-chain step applied independently to an array of levels."""
    log_t = np.asarray(log_t, dtype=float)
    u = rng.random(log_t.shape)
    r = x_update_radius(target, fac, log_t, u)
    lh = log_h(target, fac, r)
    return lh + np.log(_open_uniforms(rng, log_t.shape))


# ---------------------------------------------------------------------------
# Independent oracles: stationary radial law and the level-chain law
# ---------------------------------------------------------------------------

class RadialStationarySampler:
    """I.i.d. radii with density proportional to ``r^{d-1} exp(-phi(r))``.

    Grid inverse CDF with 2^14 cells over the effective support and a
    trapezoidal cumulative; used as a test oracle for chain stationarity.
    """

    def __init__(self, target: RadialTarget, n_cells: int = 2**14,
                 tail_log_depth: float = 80.0):
        fac_rad = RadialFactorization(float(target.dim - 1))
        r_mode = mode_radius(target, fac_rad)
        log_sup = log_h_sup(target, fac_rad, r_mode)
        iv = level_interval(target, fac_rad, log_sup - tail_log_depth,
                            r_mode=r_mode, log_sup=log_sup)
        grid = np.linspace(iv.r_lo, iv.r_hi, n_cells + 1)
        logpdf = np.full(grid.shape, -math.inf)
        pos = grid > 0.0
        logpdf[pos] = (target.dim - 1) * np.log(grid[pos]) - target.phi_vec(grid[pos])
        pdf = np.exp(logpdf - np.max(logpdf[np.isfinite(logpdf)]))
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[:-1] + pdf[1:]) * np.diff(grid))])
        self.grid = grid
        self.cdf = cdf / cdf[-1]

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        u = rng.random(size)
        return np.interp(u, self.cdf, self.grid)


def sample_radial_stationary(target: RadialTarget, rng: np.random.Generator,
                             size=None) -> np.ndarray:
    """One-shot convenience wrapper around :class:`RadialStationarySampler`."""
    return RadialStationarySampler(target).sample(rng, size)


class PiTildeSampler:
    """I.i.d. log levels from the stationary law of the auxiliary chain.

    The stationary density in ``s = log t`` is proportional to
    ``ell(e^s) e^s``; sampling is grid inverse CDF on an adaptively
    bracketed s-range.
    """

    def __init__(self, ell: LevelSetFunction, n_cells: int = 2**14,
                 tail: float = 34.0):
        s_sup = ell.log_support_sup
        s_ref = (s_sup - 1.0) if math.isfinite(s_sup) else 0.0

        def log_m(s):
            return ell.log(np.asarray(s, dtype=float)) + np.asarray(s, dtype=float)

        m_ref = float(log_m(np.array([s_ref]))[0])
        if not math.isfinite(m_ref):
            raise DomainError("reference level has no stationary mass")
        # Expand downward (and upward when the support is unbounded).
        depth = 1.0
        while float(log_m(np.array([s_ref - depth]))[0]) > m_ref - tail:
            depth *= 2.0
            if depth > 1e6:
                raise DomainError("could not bracket the lower stationary tail")
        s_lo = s_ref - depth
        if math.isfinite(s_sup):
            s_hi = s_sup
        else:
            up = 1.0
            while float(log_m(np.array([s_ref + up]))[0]) > m_ref - tail:
                up *= 2.0
                if up > 1e6:
                    raise DomainError("could not bracket the upper stationary tail")
            s_hi = s_ref + up
        grid = np.linspace(s_lo, s_hi, n_cells + 1)
        lm = log_m(grid)
        finite = np.isfinite(lm)
        m = np.zeros(grid.shape)
        m[finite] = np.exp(lm[finite] - np.max(lm[finite]))
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (m[:-1] + m[1:]) * np.diff(grid))])
        self.grid = grid
        self.cdf = cdf / cdf[-1]

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        u = rng.random(size)
        return np.interp(u, self.cdf, self.grid)
