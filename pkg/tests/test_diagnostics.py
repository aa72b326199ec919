"""Tests for autocorrelation and IAT estimation."""

import math

import numpy as np
import pytest

from slicegap.diagnostics import autocorr, iat, iat_bound_from_gap
from slicegap.errors import (
    DomainError,
    InsufficientDataError,
    ZeroVarianceError,
)


def ar1(n, rho, seed):
    rng = np.random.default_rng(seed)
    e = rng.normal(size=n)
    y = np.empty(n)
    y[0] = e[0] / math.sqrt(1.0 - rho * rho)
    for i in range(1, n):
        y[i] = rho * y[i - 1] + e[i]
    return y


class TestAutocorr:
    def test_alternating_trace(self):
        n = 1000
        x = np.tile([1.0, -1.0], n // 2)
        acf = autocorr(x, 1)
        assert abs(acf.rho[1] + 1.0) <= 2.0 / n
        assert acf.rho[0] == 1.0

    def test_white_noise_band(self):
        rng = np.random.default_rng(314)
        x = rng.normal(size=100_000)
        acf = autocorr(x, 20)
        assert np.all(np.abs(acf.rho[1:]) <= 4.0 / math.sqrt(100_000))

    def test_constant_trace(self):
        with pytest.raises(ZeroVarianceError):
            autocorr(np.full(100, 3.0), 5)

    def test_short_trace(self):
        with pytest.raises(InsufficientDataError):
            autocorr(np.arange(5.0), 2)

    def test_bad_max_lag(self):
        with pytest.raises(DomainError):
            autocorr(np.arange(20.0), 25)

    def test_fft_matches_direct(self):
        rng = np.random.default_rng(99)
        x = rng.normal(size=3000)
        direct = autocorr(x, 500).rho          # direct path
        fast = autocorr(x, 600).rho            # FFT path
        assert np.max(np.abs(direct - fast[:501])) < 1e-10

    def test_time_reversal_symmetry(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=400).cumsum()
        a = autocorr(x, 50).rho
        b = autocorr(x[::-1], 50).rho
        assert np.allclose(a, b, rtol=0, atol=1e-12)


class TestIat:
    def test_iid_trace_near_one(self):
        rng = np.random.default_rng(11)
        est = iat(rng.normal(size=100_000))
        assert 0.9 <= est.iat <= 1.1

    def test_ar1_analytic_value(self):
        # (1 + rho) / (1 - rho) = 3 at rho = 1/2
        est = iat(ar1(100_000, 0.5, seed=21))
        assert 2.7 <= est.iat <= 3.3
        assert est.truncation_lag >= 3

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            iat(np.arange(5.0))

    def test_consistency_doubling_n(self):
        # median error over replications shrinks when n doubles
        errs_small = [abs(iat(ar1(2000, 0.5, seed=s)).iat - 3.0)
                      for s in range(40)]
        errs_large = [abs(iat(ar1(8000, 0.5, seed=1000 + s)).iat - 3.0)
                      for s in range(40)]
        assert np.median(errs_large) < np.median(errs_small)

    def test_truncation_cap(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=64)
        est = iat(x)
        assert est.truncation_lag <= 32


class TestGapBound:
    def test_values(self):
        assert iat_bound_from_gap(0.5) == pytest.approx(4.0)
        assert iat_bound_from_gap(1.0) == pytest.approx(2.0)

    def test_zero_gap_rejected(self):
        with pytest.raises(DomainError):
            iat_bound_from_gap(0.0)
        with pytest.raises(DomainError):
            iat_bound_from_gap(-0.1)

    def test_truncation_sanity_on_pss_trace(self):
        # IAT of a stationary-start PSS radius trace respects 2/gap + slack
        from slicegap.kernel import build_tgrid, discretize_pt, spectral_gap
        from slicegap.levelset import level_set_function
        from slicegap.samplers import run_x_chain
        from slicegap.targets import RadialFactorization, exponential

        d = 5
        target = exponential(d)
        fac = RadialFactorization.pss(d)
        ell = level_set_function(target, fac)
        gap = spectral_gap(discretize_pt(ell, build_tgrid(ell, 512))).gap
        trace = run_x_chain(target, fac, 100_000, float(d - 1), seed=77)
        est = iat(trace.values)
        assert est.iat <= 2.0 / gap + 0.5
