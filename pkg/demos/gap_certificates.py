"""Spectral-gap certificates for the auxiliary level chain.

Builds the generalized level-set function for a few targets, discretizes
the level-chain kernel on a log grid, and reports the certified gap with
its refinement diagnostic.  For convex radial potentials under the polar
factorization the gap always clears the theoretical 1/2 floor; the uniform
factorization on the exponential target instead sits at the much weaker
1/(d+1) value.

Usage: python demos/gap_certificates.py
"""

from slicegap.kernel import certify_gap
from slicegap.levelset import level_set_function
from slicegap.targets import RadialFactorization, exponential, gaussian, volcano

print(f"{'target':>12} {'alpha':>6} {'d':>4} {'gap':>8} {'refine delta':>13}")

for target, d in [(exponential(2), 2), (exponential(30), 30),
                  (volcano(10, 2.0), 10), (gaussian(10), 10)]:
    fac = RadialFactorization.pss(d)
    est = certify_gap(level_set_function(target, fac), n=1024)
    print(f"{target.tag:>12} {fac.alpha:>6.0f} {d:>4} {est.gap:>8.4f} "
          f"{est.refinement_delta:>13.2e}")

for d in (3, 10):
    est = certify_gap(level_set_function(exponential(d),
                                         RadialFactorization.uss()), n=1024)
    print(f"{'exponential':>12} {0:>6} {d:>4} {est.gap:>8.4f} "
          f"{est.refinement_delta:>13.2e}  (USS: ~ 1/(d+1))")
