"""Autocorrelation and integrated autocorrelation time (IAT) estimation.

The IAT of a trace is 1 + 2 * sum of autocorrelations up to a truncation
lag chosen by the initial-positive-pair rule: summation stops at the first
odd lag K where rho(K) + rho(K+1) < 0.  For a reversible chain the pair
sums are guaranteed positive in expectation, so this rule adapts the
truncation to the noise level of the estimated autocorrelations.  The IAT
of any square-integrable test function is bounded by 2/gap, which is what
ties the sweep experiments to the certified spectral gaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError, ZeroVarianceError

__all__ = [
    "AcfSeries",
    "IatEstimate",
    "autocorr",
    "iat",
    "iat_bound_from_gap",
]

_MIN_LEN = 10
_FFT_THRESHOLD = 512
_DEFAULT_MAX_LAG = 10_000


@dataclass(frozen=True)
class AcfSeries:
    """Empirical autocorrelations rho(0..max_lag), rho(0) = 1."""

    rho: np.ndarray
    n: int

    @property
    def max_lag(self) -> int:
        return self.rho.size - 1


@dataclass(frozen=True)
class IatEstimate:
    """IAT value with the truncation lag that produced it."""

    iat: float
    truncation_lag: int
    n: int

    def to_dict(self) -> dict:
        return {"iat": self.iat, "truncation_lag": self.truncation_lag, "n": self.n}


def autocorr(values: np.ndarray, max_lag: int) -> AcfSeries:
    """Empirical autocorrelation function with denominator-n normalization.

    gamma(k) = (1/n) sum_{i<n-k} (x_i - mean)(x_{i+k} - mean); rho = gamma/gamma(0).
    Uses the direct sum for short lag ranges and an FFT for long ones.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise DomainError("trace must be one-dimensional")
    n = x.size
    if n < _MIN_LEN:
        raise InsufficientDataError(f"trace of length {n} is too short (need >= {_MIN_LEN})")
    if max_lag < 0 or max_lag >= n:
        raise DomainError(f"max_lag must be in [0, {n - 1}], got {max_lag}")
    xc = x - x.mean()
    var = float(np.dot(xc, xc)) / n
    if var <= 0.0 or not math.isfinite(var):
        raise ZeroVarianceError("trace has zero variance")
    if max_lag > _FFT_THRESHOLD:
        m = 1 << int(np.ceil(np.log2(2 * n)))
        f = np.fft.rfft(xc, m)
        gamma = np.fft.irfft(f * np.conj(f), m)[: max_lag + 1] / n
    else:
        gamma = np.array(
            [np.dot(xc[: n - k], xc[k:]) / n for k in range(max_lag + 1)]
        )
    return AcfSeries(rho=gamma / gamma[0], n=n)


def iat(values: np.ndarray, max_lag: int | None = None) -> IatEstimate:
    """IAT via the initial-positive-pair truncation rule.

    Finds the smallest odd K with rho(K) + rho(K+1) < 0 and returns
    1 + 2 * sum_{k=1}^{K-1} rho(k).  If no such pair occurs before the lag
    cap, the whole window is summed.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    if max_lag is None:
        max_lag = min(n // 2, _DEFAULT_MAX_LAG)
    max_lag = min(max_lag, n - 1)
    acf = autocorr(x, max_lag)
    rho = acf.rho
    trunc = max_lag
    k = 1
    while k + 1 <= max_lag:
        if rho[k] + rho[k + 1] < 0.0:
            trunc = k
            break
        k += 2
    value = 1.0 + 2.0 * float(np.sum(rho[1:trunc]))
    return IatEstimate(iat=value, truncation_lag=trunc, n=n)


def iat_bound_from_gap(gap: float) -> float:
    """Upper bound 2/gap on the IAT of any L2 test function."""
    if not gap > 0.0:
        raise DomainError(f"gap must be positive, got {gap}")
    return 2.0 / gap
