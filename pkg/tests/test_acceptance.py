"""Acceptance suite: one test per criterion, each with its tolerance and
runtime budget. The terminal summary prints a PASS/FAIL line per criterion."""
import csv
import io
import json
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conelab.bessel import ErrorKernelSign, verify_error_bound
from conelab.cli import main, parse_config, run
from conelab.experiments import (ExponentTriple, dyadic_range, dyadic_sweep, fit_loglog,
                                 fit_slope, schur_sum)
from conelab.extension import (SpacetimePoint, error_term, extension_direct, main_term,
                               rescale_profile)
from conelab.norms import (HY_RECORDED_MAX, hausdorff_young_corpus, holder_corpus,
                           lorentz_norm, lp_norm, random_step_function, weighted_bessel_norm)
from conelab.profiles import RadialProfile

from oracles import extension_2d

CONST = RadialProfile.constant()
PROFILES = [
    CONST,
    RadialProfile.power(-1.0),
    RadialProfile.power(2.0),
    RadialProfile.smooth_bump(),
    RadialProfile.band_indicator(0.25),
    RadialProfile.sampled([1.0, 1.3, 1.7, 2.0], [0.5, 1.0, -0.2, 0.3]),
]


@contextmanager
def budget(seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed <= seconds, f"took {elapsed:.1f} s, budget {seconds} s"


FAR_FIELD = """
[run]
seed = 1

[experiment:far-n3]
command = dyadic-sweep
n = 3
p = 2
q = 4
R = 2^3..2^9
profile = constant

[experiment:far-n2]
command = dyadic-sweep
n = 2
p = 2
q = 6
R = 2^3..2^9
profile = constant
"""


@pytest.mark.criterion(1, "far-field decay exponent, n=3 q=4 and n=2 q=6")
def test_far_field_decay(tmp_path):
    with budget(300):
        assert run(parse_config(FAR_FIELD), tmp_path) == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "report.csv").read_text())))
    summary = {s["experiment"]: s for s in json.loads((tmp_path / "summary.json").read_text())["experiments"]}
    for eid, expected in (("far-n3", -0.25), ("far-n2", -1 / 6)):
        mine = [r for r in rows if r["experiment"] == eid]
        assert len(mine) == 7 and not any(r["flags"] for r in mine)
        fit = fit_loglog([float(r["R"]) for r in mine], [float(r["norm_value"]) for r in mine])
        assert abs(fit.slope - expected) <= 0.05
        assert summary[eid]["slope"] == pytest.approx(fit.slope, abs=1e-12)
        assert summary[eid]["pass"]


@pytest.mark.criterion(2, "near-field growth exponent, n=3 q=4")
def test_near_field_growth():
    with budget(120):
        sweep = dyadic_sweep(CONST, ExponentTriple(3, 2, 4), dyadic_range(-8, -1))
    assert all(p.usable for p in sweep)
    assert abs(fit_slope(sweep).slope - 0.75) <= 0.05


@pytest.mark.criterion(3, "error-term decay n=5 q=4, vanishing error term n=3")
def test_error_term_decay():
    with budget(300):
        sweep = dyadic_sweep(CONST, ExponentTriple(5, 2, 4), dyadic_range(3, 8), "error")
        zero = dyadic_sweep(CONST, ExponentTriple(3, 2, 4), dyadic_range(1, 9), "error")
    slope = fit_slope(sweep).slope
    assert slope <= -1.25 + 0.1
    # the estimate's exponent -(n+1)/2 + n/q evaluates to -7/4 at n = 5, q = 4
    assert slope <= -1.75 + 0.1
    assert all(p.result.value == 0.0 for p in zero)
    rng = np.random.default_rng(31)
    for _ in range(20):
        pt = SpacetimePoint(rng.uniform(-100, 100), rng.uniform(1, 100), 3)
        assert error_term(CONST, pt).value == 0


@pytest.mark.criterion(4, "decomposition identity, 50 points per n")
def test_decomposition_identity():
    rng = np.random.default_rng(2026)
    with budget(120):
        for n in (2, 3, 4, 5):
            for i in range(50):
                F = PROFILES[i % len(PROFILES)]
                pt = SpacetimePoint(rng.uniform(-60, 60), rng.uniform(1, 60), n)
                d = extension_direct(F, pt).value
                s = main_term(F, pt).value + error_term(F, pt).value
                assert abs(d - s) <= 1e-7 * (1 + abs(d)), (n, pt)


@pytest.mark.criterion(5, "Bessel error-kernel bound, finite and refinement-stable")
def test_bessel_error_bound():
    grid = dyadic_range(0, 10)
    with budget(60):
        for n in (2, 4, 5):
            for sign in ErrorKernelSign:
                a = max(v for _, v in verify_error_bound(n, grid, sign, refine=0))
                b = max(v for _, v in verify_error_bound(n, grid, sign, refine=1))
                assert math.isfinite(a) and a > 0
                assert abs(a - b) < 0.01 * b


@pytest.mark.criterion(6, "scaling identity for M in 2^-3..2^3")
def test_scaling_identity():
    rng = np.random.default_rng(6)
    with budget(60):
        for k in range(-3, 4):
            M = 2.0 ** k
            for i in range(20):
                F = PROFILES[i % len(PROFILES)]
                n = 2 + i % 4
                t, r = rng.uniform(-10, 10), rng.uniform(0, 10)
                a = extension_direct(rescale_profile(F, M), SpacetimePoint(t, r, n)).value
                b = M ** (n - 1) * extension_direct(F, SpacetimePoint(M * t, M * r, n)).value
                assert abs(a - b) <= 1e-8 * abs(a), (M, n, t, r)


@pytest.mark.criterion(7, "weighted Bessel criticality and s-scaling, n=3")
def test_weighted_bessel_criticality():
    with budget(120):
        for q in (3.2, 3.4):
            assert not weighted_bessel_norm(3, q, 1.0).truncation_report["divergent"]
        for q in (2.8, 3.0):
            assert weighted_bessel_norm(3, q, 1.0).truncation_report["divergent"]
        a = weighted_bessel_norm(3, 4.0, 1.0).truncation_report["extrapolated"]
        b = weighted_bessel_norm(3, 4.0, 2.0).truncation_report["extrapolated"]
    assert abs(b / a - 2 ** -0.25) <= 1e-3


@pytest.mark.criterion(8, "Schur sums: (3,4), (2,5) convergent, (3,3) divergent")
def test_schur_sums():
    with budget(1):
        good = [schur_sum(ExponentTriple(n, 2, q)) for n, q in ((3, 4), (2, 5))]
        bad = schur_sum(ExponentTriple(3, 2, 3))
    for (n, q), res in zip(((3, 4), (2, 5)), good):
        assert res.convergent
        # each side is geometric: 2^{alpha} for K >= 2 and 2^{-(n-1)/q} for K <= 1
        far = 2 ** (-(n - 1) / 2 * (1 - 2 * n / (q * (n - 1))))
        assert res.ratios == pytest.approx((far, 2 ** (-(n - 1) / q)), rel=1e-12)
        inc = np.array(res.increments[1:])
        assert np.all(np.diff(inc) < 0)
        # a sum of two geometric sequences decays at a ratio between theirs
        step = inc[1:] / inc[:-1]
        assert np.all(step >= min(res.ratios) - 1e-12) and np.all(step <= max(res.ratios) + 1e-12)
    assert not bad.convergent and bad.flags == ("divergent",)


@pytest.mark.criterion(9, "Lorentz suite: identity, dilation, Holder, Hausdorff-Young")
def test_lorentz_suite():
    rng = np.random.default_rng(9)
    with budget(120):
        for _ in range(1000):
            f = random_step_function(rng, int(rng.integers(1, 21)))
            p = float(rng.uniform(0.5, 8.0))
            assert abs(lorentz_norm(f, (p, p)) - lp_norm(f, p)) <= 1e-12 * lp_norm(f, p)
            lam = float(2.0 ** rng.integers(-10, 11))
            q = float(rng.uniform(0.5, 8.0))
            scaled = lorentz_norm(f.dilate(lam), (p, q))
            assert abs(scaled - lam ** (1 / p) * lorentz_norm(f, (p, q))) <= 1e-12 * scaled
        m1 = holder_corpus(101, trials=500).max()
        m2 = holder_corpus(202, trials=500).max()
        hy = np.concatenate([hausdorff_young_corpus(seed) for seed in range(20)])
    assert math.isfinite(m1) and math.isfinite(m2)
    assert abs(m1 - m2) <= 0.01 * max(m1, m2)
    assert hy.max() <= HY_RECORDED_MAX


@pytest.mark.criterion(10, "direct evaluation matches brute-force 2-D quadrature")
def test_oracle_equivalence():
    rng = np.random.default_rng(10)
    with budget(180):
        for _ in range(20):
            t = rng.uniform(-25, 25)
            x = rng.uniform(-20, 20, size=2)
            v = extension_direct(CONST, SpacetimePoint(t, float(np.hypot(*x)), 2)).value
            ref = extension_2d(CONST, t, x)
            assert abs(v - ref) <= 1e-6 * abs(ref)


DETERMINISM = """
[run]
seed = 42

[experiment:near]
command = dyadic-sweep
n = 3
q = 4
R = 2^-4..2^-1

[experiment:holder]
command = lorentz-check
trials = 100

[experiment:hy]
command = hy-check
trials = 20

[experiment:schur]
command = schur
n = 2
q = 5
"""


@pytest.mark.criterion(11, "byte-identical CSV for identical config and seed")
def test_determinism(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(DETERMINISM)
    with budget(60):
        assert main(["--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
        assert main(["--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "report.csv").read_bytes()
    assert a == (tmp_path / "b" / "report.csv").read_bytes()
    assert a.count(b"\n") > 100
