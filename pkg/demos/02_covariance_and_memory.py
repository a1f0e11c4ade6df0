"""Covariance quadrature and the short- vs long-memory contrast.

The lag covariance of the exponential kernel decays geometrically; the
fractional-noise kernel decays like h^(2d-1), slowly enough that the absolute
lag sums blow up while the squared ones stay finite -- the regime where the
quadratic-form limit theory earns its keep.
"""

import math

import numpy as np

from cmaqf import ExponentialOU, FiniteSupport, FractionalNoise, autocovariance, b_star_gamma

print("== Exponential kernel, sigma2 = 2: gamma(h) = e^{-|h|}")
ou = ExponentialOU(1.0)
for h in (0.0, 1.0, 2.0, 5.0):
    print(f"   gamma({h:3.1f}) = {autocovariance(ou, 2.0, h):.8f}   exact {math.exp(-h):.8f}")

print("\n== Fractional noise, d = 0.1: gamma(h) ~ c h^(2d-1)")
fn = FractionalNoise(0.1)
for h in (1.0, 10.0, 100.0, 400.0):
    g = autocovariance(fn, 1.0, h)
    print(f"   gamma({h:5.0f}) = {g:.6f}   gamma/h^(2d-1) = {g / h**(-0.8):.6f}")

print("\n== Lag sums: absolute sums keep growing, squared sums settle")
gam = np.array([autocovariance(fn, 1.0, float(s)) for s in (1, 10, 100, 1000)])
print(f"   sampled lag covariances: {np.round(gam, 5)}")
g0 = autocovariance(fn, 1.0, 0.0)
a = 1.2  # 2d + 1
for stop in (100, 1000, 10000):
    s = np.arange(1, stop + 1, dtype=float)
    vals = g0 * ((s + 1) ** a - 2 * s**a + np.abs(s - 1) ** a) / 2
    print(
        f"   up to {stop:5d}: sum|gamma| = {g0 + 2*np.sum(np.abs(vals)):.4f}   "
        f"sum gamma^2 = {g0**2 + 2*np.sum(vals**2):.6f}"
    )

print("\n== Coefficient-convolved covariance sequence (enters the quadratic-form variance)")
res = b_star_gamma(FiniteSupport(values=(0.0, 1.0, 0.5)), ou, 2.0, 1.0)
print(f"   radius {res.radius}, squared l2 norm {res.l2_sq:.6f} (tail bound {res.l2_sq_tail:.2e})")
