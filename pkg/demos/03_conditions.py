"""Checking the Gaussian-limit assumptions with honest three-valued verdicts.

The checker never claims proof: "supported" means every truncated norm is
finite with tails resolved below tolerance, "refuted" means closed-form decay
arithmetic rules the condition out, anything else stays "indeterminate".
"""

import numpy as np

from cmaqf import ExponentialOU, FiniteSupport, FractionalNoise, TabulatedKernel, check_conditions
from cmaqf.levy import BrownianMotion


def show(rep):
    print(f"   overall: {rep.overall}   exponents: {rep.exponents}")
    for a in rep.assumptions:
        print(f"     [{a.verdict:>13}] {a.name}" + (f" ({a.note})" if a.note else ""))
    for note in rep.skipped:
        print(f"     skipped: {note}")


print("== Exponential kernel + finite-support weights: coefficient summability is all it takes")
show(check_conditions("qn_exponent", ExponentialOU(1.0), b=FiniteSupport(values=(1.0, 0.5)), Delta=1.0))

print("\n== Fractional pair at d = 0.1: decay-style conditions hold with exponent 0.9")
fn = FractionalNoise(0.1)
show(check_conditions("sn_decay", (fn, fn), Delta=1.0))

print("\n== A tabulated kernel with tail exponent 0.7 cannot reach the required 3/2")
step = 1.0 / 16.0
ts = np.arange(0, 1025) * step
tk = TabulatedKernel(t0=0.0, step=step, values=np.where(ts >= 1.0, np.maximum(ts, 1.0) ** -0.7, 1.0))
show(check_conditions("sn_decay", (tk, tk), Delta=1.0))

print("\n== Brownian driver: the period-square assumption is dropped (no fourth cumulant)")
show(check_conditions("sn_general", ExponentialOU(1.0), Delta=1.0, model=BrownianMotion(2.0)))
