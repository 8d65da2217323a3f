import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conelab.profiles import RadialProfile
from conelab.quadrature import (OscillationSpec, QuadratureResult, TruncationError,
                                adaptive_time_truncation, integrate_oscillatory,
                                integrate_power, oscillatory_edges, panel_nodes)


def test_spec_validation():
    with pytest.raises(ValueError):
        OscillationSpec(1.0, (0.0, 1.0))
    with pytest.raises(ValueError):
        OscillationSpec(1.0, (2.0, 1.0))
    with pytest.raises(ValueError):
        OscillationSpec(2e9, (1.0, 2.0))
    with pytest.raises(ValueError):
        QuadratureResult(0.0, -1.0)


def test_plain_length():
    r = integrate_oscillatory(RadialProfile.constant(), 0.0, OscillationSpec(0.0, (1.0, 2.0)))
    assert r.value == pytest.approx(1.0, abs=1e-15)


def test_full_period_cancels():
    r = integrate_oscillatory(RadialProfile.constant(), 0.0, OscillationSpec(2 * math.pi, (1.0, 2.0)))
    assert abs(r.value) < 1e-14


def test_linear_profile_by_parts():
    # int_1^2 s * s * e^{i w s} ds with w = 3.7, antiderivative of s^2 e^{iws}
    w = 3.7
    F = RadialProfile.power(1.0)

    def anti(s):
        return cmath.exp(1j * w * s) * (s * s / (1j * w) + 2 * s / w ** 2 - 2 / (1j * w ** 3))

    r = integrate_oscillatory(F, 1.0, OscillationSpec(w, (1.0, 2.0)))
    ref = anti(2.0) - anti(1.0)
    assert abs(r.value - ref) <= 1e-9 * abs(ref)


@given(st.floats(-1e4, 1e4), st.integers(-1, 2))
@settings(max_examples=60, deadline=None)
def test_power_profiles_against_closed_form(w, k):
    # int_1^2 s^k e^{i w s} ds, by mpmath-free recursion-free formula via incomplete gamma
    # is awkward; use a very fine independent Simpson rule as reference instead
    F = RadialProfile.power(float(k))
    r = integrate_oscillatory(F, 0.0, OscillationSpec(w, (1.0, 2.0)))
    s = np.linspace(1.0, 2.0, 400001)
    f = s ** k * np.exp(1j * w * s)
    h = s[1] - s[0]
    ref = h / 3 * (f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum())
    assert abs(r.value - ref) <= 1e-7 * max(abs(ref), 1e-6)


def test_band_indicator_aligned_to_jump():
    F = RadialProfile.band_indicator(0.25)
    w = 123.4
    r = integrate_oscillatory(F, 0.0, OscillationSpec(w, (1.0, 2.0)))
    ref = (cmath.exp(1j * w * 1.25) - cmath.exp(1j * w)) / (1j * w)
    assert abs(r.value - ref) <= 1e-7 * abs(ref)


def test_polynomial_exactness():
    s, w = panel_nodes(np.array([1.0, 1.5, 2.0]), 8)
    for k in range(16):
        assert np.sum(w * s ** k) == pytest.approx((2 ** (k + 1) - 1) / (k + 1), rel=1e-14)


def test_support_outside_interval_rejected():
    with pytest.raises(ValueError):
        integrate_oscillatory(RadialProfile.constant(), 0.0, OscillationSpec(1.0, (1.0, 1.5)))


@given(st.floats(0.1, 1e4))
@settings(max_examples=40, deadline=None)
def test_panel_width_contract(w):
    edges = oscillatory_edges(1.0, 2.0, w, (1.3,))
    assert np.max(np.diff(edges)) <= math.pi / (2 * w) * (1 + 1e-12)
    assert 1.3 in edges


def test_refinement_error_monotone():
    F = RadialProfile.smooth_bump()
    errs = []
    for tol in (1e-6, 1e-9, 1e-12):
        errs.append(integrate_oscillatory(F, 0.5, OscillationSpec(40.0, (1.0, 2.0)), tol=tol).abs_error)
    assert errs[1] <= 2 * errs[0] and errs[2] <= 2 * errs[1]


def test_truncation_compact_support():
    g = lambda t: np.where(np.abs(t) <= 1, 1.0, 0.0)
    tr = adaptive_time_truncation(g, 2.0, [0.0], 1e-4, support=(-1.0, 1.0))
    assert tr.tail_bound == 0
    assert tr.windows == ((-1.0, 1.0),)
    assert tr.mass == pytest.approx(2.0, rel=1e-12)


def test_truncation_rational_decay():
    # int_R (1+|t|)^{-4} dt = 2/3
    g = lambda t: 1.0 / (1.0 + np.abs(t))
    tr = adaptive_time_truncation(g, 4.0, [0.0], 1e-4)
    assert abs(tr.mass - 2 / 3) <= 1e-4 * (2 / 3)
    assert tr.tail_bound <= 1e-4 * tr.mass
    T = tr.windows[0][1]
    omitted = 2 / (3 * (1 + T) ** 3)
    assert omitted <= tr.tail_bound


def test_truncation_extension_trace_windows():
    from conelab.extension import ExtensionField
    u = ExtensionField(RadialProfile.constant(), 3)
    g = lambda t: u(t, 64.0)
    tr = adaptive_time_truncation(g, 4.0, u.centers(64.0), 1e-4, T0=u.T0,
                                  panel_width=u.t_panel_width(4.0))
    mids = sorted(0.5 * (a + b) for a, b in tr.windows)
    assert mids == [-64.0, 64.0]
    assert tr.tail_bound <= 1e-4 * tr.mass


def test_truncation_heavy_tail_raises():
    g = lambda t: 1.0 / (1.0 + np.abs(t)) ** 0.55
    with pytest.raises(TruncationError):
        adaptive_time_truncation(g, 2.0, [0.0], 1e-4)


def test_truncation_requires_q_above_one():
    with pytest.raises(ValueError):
        adaptive_time_truncation(lambda t: t, 1.0, [0.0])


def test_integrate_power_constant():
    mass, t, ag = integrate_power(lambda t: np.full_like(t, 2.0), 3.0, ((0.0, 1.5),))
    assert mass == pytest.approx(12.0, rel=1e-14)
