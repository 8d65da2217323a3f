import math

import numpy as np
import pytest

from conelab.profiles import RadialProfile, is_dyadic, sphere_area


def test_is_dyadic():
    assert all(is_dyadic(2.0 ** k) for k in range(-10, 11))
    assert not any(is_dyadic(x) for x in (3.0, 0.0, -2.0, 0.3, math.inf, math.nan))


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(4) == pytest.approx(2 * math.pi ** 2)


def test_support_must_sit_in_dyadic_shell():
    with pytest.raises(ValueError):
        RadialProfile.constant(support=(0.0, 1.0))
    with pytest.raises(ValueError):
        RadialProfile.constant(support=(1.0, 3.0))
    with pytest.raises(ValueError):
        RadialProfile.constant(support=(2.0, 4.0), dyadic_level=3.0)
    RadialProfile.constant(support=(2.0, 4.0), dyadic_level=2.0)


def test_band_indicator():
    F = RadialProfile.band_indicator(0.125)
    assert F.support == (1.0, 1.125)
    assert F.rescale(2.0).support == (2.0, 2.25)
    with pytest.raises(ValueError):
        RadialProfile.band_indicator(0.0)
    with pytest.raises(ValueError):
        RadialProfile.band_indicator(1.5)


def test_sampled_validation():
    with pytest.raises(ValueError):
        RadialProfile.sampled([1.0, 1.5, 1.4, 2.0], [0, 1, 1, 0])
    with pytest.raises(ValueError):
        RadialProfile.sampled([1.0, 2.0], [0.0, math.inf])
    F = RadialProfile.sampled([1.0, 1.5, 2.0], [0.0, 2.0, 0.0])
    assert F(np.array([1.25, 1.75]))[0] == pytest.approx(1.0)
    assert F.breakpoints == (1.0, 1.5, 2.0)


def test_evaluation_outside_support_is_zero():
    for F in (RadialProfile.constant(), RadialProfile.power(2.0), RadialProfile.smooth_bump()):
        assert np.all(F(np.array([0.5, 0.99, 2.01, 3.0])) == 0)


def test_smooth_bump_peak_and_ends():
    F = RadialProfile.smooth_bump()
    assert F(np.array([1.5]))[0] == pytest.approx(math.exp(-1.0))
    assert F(np.array([1.0, 2.0])).tolist() == [0.0, 0.0]


def test_lp_norm_constant():
    # F = 1 on [1, 2], n = 3: (4 pi * int_1^2 s ds)^{1/p}
    F = RadialProfile.constant()
    assert F.lp_norm(2.0, 3) == pytest.approx(math.sqrt(6 * math.pi), rel=1e-14)
    assert F.lp_norm(math.inf, 3) == 1.0


def test_rescale_scales_norm_by_level():
    F = RadialProfile.power(1.0)
    for M in (0.25, 2.0, 8.0):
        G = F.rescale(M)
        assert G.dyadic_level == M
        assert G.lp_norm(3.0, 4) == pytest.approx(M ** (3 / 3) * F.lp_norm(3.0, 4), rel=1e-12)
        s = np.linspace(1.0, 2.0, 7)
        assert np.allclose(G(M * s), F(s))
    with pytest.raises(ValueError):
        F.rescale(3.0)


def test_total_variation():
    assert RadialProfile.constant().total_variation() == pytest.approx(2.0)
    assert RadialProfile.power(1.0).total_variation() == pytest.approx(1 + 1 + 2)


def test_with_amplitude():
    F = RadialProfile.constant().with_amplitude(3.0)
    assert F(np.array([1.5]))[0] == 3.0
    S = RadialProfile.sampled([1.0, 2.0], [1.0, 1.0]).with_amplitude(2.0)
    assert S(np.array([1.5]))[0] == 2.0
