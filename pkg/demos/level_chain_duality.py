"""Duality of slice sampling with its auxiliary level chain.

Two samplers whose generalized level-set functions coincide share a
spectral gap, no matter how different their state spaces are.  This script
shows the cleanest instance: polar slice sampling on the d-dimensional
density ||x||^{1-d} e^{-||x||} versus uniform slice sampling on a 1-D
double-exponential — identical ell, identical gap, for every d.

Usage: python demos/level_chain_duality.py
"""

from slicegap.kernel import duality_gap_compare
from slicegap.levelset import level_set_function
from slicegap.targets import (
    RadialFactorization,
    RadialTarget,
    radial_weighted_exponential,
    surface_area,
)

print(f"{'d':>4} {'max |ell diff|':>15} {'gap (PSS, d-dim)':>17} "
      f"{'gap (USS, 1-D)':>15}")

for d in (2, 5, 10, 25):
    ell_pss = level_set_function(radial_weighted_exponential(d),
                                 RadialFactorization.pss(d))
    c = 2.0 / surface_area(d)
    oned = RadialTarget(phi=lambda r, c=c: c * r, dphi=lambda r, c=c: c,
                        dim=1, tag="double-exponential")
    ell_uss = level_set_function(oned, RadialFactorization.uss())
    rep = duality_gap_compare(ell_pss, ell_uss, n=512)
    print(f"{d:>4} {rep.max_ell_abs_diff:>15.2e} {rep.gap_a:>17.6f} "
          f"{rep.gap_b:>15.6f}")

print("\nBoth chains sit exactly at the Lambda_1 boundary value 1/2.")
