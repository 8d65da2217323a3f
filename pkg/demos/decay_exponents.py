"""Measure how the extension of F = 1 on [1, 2] spreads out in space-time.

For n = 3 and q = 4 the L^4 norm over the annulus R/2 <= |x| <= R grows like
R^{3/4} near the origin and decays like R^{-1/4} far away. The main term of
the Bessel split carries the far-field behaviour; the error term vanishes
identically in three dimensions and decays fast in five.

Run:  python3 demos/decay_exponents.py
"""
from conelab.experiments import ExponentTriple, dyadic_range, dyadic_sweep, fit_slope
from conelab.profiles import RadialProfile


def show(label, sweep, expected):
    fit = fit_slope(sweep)
    print(f"{label:<28} slope {fit.slope:+.4f}  (expected {expected:+.4f}, "
          f"residual {fit.max_residual:.1e})")
    for p in sweep:
        print(f"    R = {p.R:<10g} norm = {p.value:.6g}")


F = RadialProfile.constant()
e3 = ExponentTriple(3, 2, 4)
show("near field, n=3 q=4", dyadic_sweep(F, e3, dyadic_range(-8, -1)), 0.75)
show("far field, n=3 q=4", dyadic_sweep(F, e3, dyadic_range(3, 9)), -0.25)
show("main term only, n=3 q=4", dyadic_sweep(F, e3, dyadic_range(3, 9), "main"), -0.25)
show("error term, n=5 q=4", dyadic_sweep(F, ExponentTriple(5, 2, 4), dyadic_range(3, 8), "error"), -1.75)
zero = dyadic_sweep(F, e3, dyadic_range(1, 6), "error")
print("error term, n=3:", [p.value for p in zero])
