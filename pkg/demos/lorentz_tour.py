"""Lorentz norms of step functions, the Holder inequality in Lorentz spaces
and a Hausdorff-Young check on random sums of indicators.

Run:  python3 demos/lorentz_tour.py
"""
import numpy as np

from conelab.norms import (HY_RECORDED_MAX, StepFunction, hausdorff_young_check,
                           hausdorff_young_corpus, holder_corpus, lorentz_norm, lp_norm)

f = StepFunction(((1.0, 2.0), (3.0, 1.0)))  # value 2 on a set of measure 1, value 1 on measure 3
for p, q in ((2, 2), (2, 1), (2, 4), (2, np.inf)):
    print(f"||f||_L^({p},{q}) = {lorentz_norm(f, (p, q)):.6f}")
print(f"||f||_L^2        = {lp_norm(f, 2):.6f}  (same as L^(2,2))")

ratios = holder_corpus(0, trials=500)
print(f"Holder ratio over 500 random pairs: max {ratios.max():.5f}, median {np.median(ratios):.5f}")

rep = hausdorff_young_check([0.0, 1.0], [1.0], 1.5)
print(f"indicator of [0,1], p = 1.5: Fourier L^3 / Lorentz L^(3/2,3) = {rep.ratio:.6f}")
hy = np.concatenate([hausdorff_young_corpus(seed) for seed in range(5)])
print(f"random indicator sums: max ratio {hy.max():.5f} <= recorded {HY_RECORDED_MAX:.5f}")
