"""Bessel functions J_m of order m = (n-2)/2 and their two-exponential
main term / integral remainder split.

Deforming the Poisson integral

    J_m(r) = (r/2)**m / (Gamma(m+1/2) sqrt(pi)) * int_{-1}^{1} exp(i r t) (1-t**2)**(m-1/2) dt

onto the vertical rays t = -1 + i y and t = 1 + i y gives, with a = m - 1/2,

    J_m(r) = 2**-m pi**-1/2 r**-1/2 [i (2i)**a e^{-ir} - i (-2i)**a e^{ir}]
             + (r/2)**m / (Gamma(m+1/2) sqrt(pi)) [i e^{-ir} E_+(r) - i e^{ir} E_-(r)],

    E_pm(r) = int_0^inf e^{-ry} y**a [(y +- 2i)**a - (+-2i)**a] dy,

all complex powers on the principal branch. For m = 1/2 the remainder
vanishes identically.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special

from .quadrature import gauss_rule, panel_nodes

__all__ = [
    "BesselOrder",
    "BesselValue",
    "ErrorKernelSign",
    "bessel_j",
    "bessel_main_term",
    "bessel_error_part",
    "bessel_ratio",
    "error_kernel",
    "error_kernel_values",
    "main_term_coefficients",
    "verify_error_bound",
    "SERIES_SWITCH",
]

SERIES_SWITCH = 12.0
KERNEL_CUTOFF = 40.0
KERNEL_PANELS = 8
KERNEL_ORDER = 16


@dataclass(frozen=True)
class BesselOrder:
    m: float

    def __post_init__(self):
        if not self.m >= 0:
            raise ValueError(f"Bessel order must be nonnegative, got {self.m}")

    @classmethod
    def from_dimension(cls, n: int) -> "BesselOrder":
        if n < 2:
            raise ValueError("ambient dimension must be at least 2")
        return cls((n - 2) / 2)

    @property
    def is_half_integer(self) -> bool:
        return (2 * self.m) % 2 == 1


class ErrorKernelSign(enum.Enum):
    PLUS = 1
    MINUS = -1

    @property
    def z(self) -> complex:
        return 2j * self.value


@dataclass(frozen=True)
class BesselValue:
    value: complex
    abs_error: float

    def __post_init__(self):
        if not self.abs_error >= 0:
            raise ValueError("abs_error must be nonnegative")

    def __abs__(self):
        return abs(self.value)


def _as_order(order) -> BesselOrder:
    return order if isinstance(order, BesselOrder) else BesselOrder(float(order))


# -- error kernel -------------------------------------------------------------

def _kernel_rule(cutoff, refine):
    edges = np.linspace(0.0, math.sqrt(cutoff), KERNEL_PANELS * 2 ** refine + 1)
    return panel_nodes(edges, KERNEL_ORDER)


def error_kernel_values(a: float, r, sign: ErrorKernelSign | int,
                        refine: int = 0, cutoff: float = KERNEL_CUTOFF):
    """Vectorized ``E_pm(r)`` for exponent ``a = (n-3)/2`` and any ``r > 0``.

    Substituting ``y = v**2 / r`` gives the smooth integrand
    ``2 v**(2a+1) r**(-a-1) exp(-v**2) z**a expm1(a log1p(v**2/(r z)))``
    with ``z = +-2i``; for ``a = -1/2`` the endpoint singularity disappears.
    The integral is truncated at ``v**2 = cutoff``.
    """
    z = ErrorKernelSign(sign).z if not isinstance(sign, ErrorKernelSign) else sign.z
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if a == 0:
        return np.zeros(r.shape, dtype=complex)
    v, w = _kernel_rule(cutoff, refine)
    v2 = v * v
    base = w * 2.0 * v ** (2 * a + 1) * np.exp(-v2)
    bracket = np.expm1(a * np.log1p(v2[None, :] / (r[:, None] * z)))
    return (z ** a) * r ** (-a - 1) * (bracket @ base)


def _kernel_tail(a, r, cutoff):
    # |integrand| <= 2 v^(2a+1) r^(-a-1) e^(-v^2) (|v^2/r + z|^a + 2^a) past the cutoff
    grow = (cutoff / r + 2.0) ** max(a, 0.0) + 2.0 ** a
    return 2.0 * r ** (-a - 1) * math.exp(-cutoff) * cutoff ** a * grow


def error_kernel(n: int, r: float, sign: ErrorKernelSign = ErrorKernelSign.PLUS,
                 rel_tol: float = 1e-9) -> BesselValue:
    """``E(r)`` for ambient dimension ``n`` and ``r >= 1``.

    Exactly zero for ``n = 3``. The reported error is the nested-rule
    difference plus the analytic truncation tail.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not r >= 1:
        raise ValueError("error_kernel is only defined here for r >= 1; "
                         "use bessel_j for smaller arguments")
    sign = ErrorKernelSign(sign)
    a = (n - 3) / 2
    if a == 0:
        return BesselValue(0j, 0.0)
    cutoff = KERNEL_CUTOFF
    coarse = error_kernel_values(a, r, sign, 0, cutoff)[0]
    while True:
        fine = error_kernel_values(a, r, sign, 1, cutoff)[0]
        tail = _kernel_tail(a, r, cutoff)
        if tail <= 1e-12 * abs(fine):
            break
        cutoff += 20.0
        coarse = error_kernel_values(a, r, sign, 0, cutoff)[0]
    err = abs(fine - coarse) + tail
    if err > rel_tol * abs(fine):
        for refine in (2, 3, 4):
            finer = error_kernel_values(a, r, sign, refine, cutoff)[0]
            err = abs(finer - fine) + tail
            fine = finer
            if err <= rel_tol * abs(fine):
                break
    return BesselValue(complex(fine), float(err))


def verify_error_bound(n: int, r_grid, sign: ErrorKernelSign = ErrorKernelSign.PLUS,
                       refine: int = 0) -> list[tuple[float, float]]:
    """Normalized products ``(r, |E(r)| r**((n+1)/2))`` on an increasing grid in [1, inf)."""
    r_grid = np.asarray(list(r_grid), dtype=float)
    if r_grid.size == 0:
        raise ValueError("grid must be nonempty")
    if np.any(r_grid < 1) or np.any(np.diff(r_grid) <= 0):
        raise ValueError("grid must be increasing with entries >= 1")
    a = (n - 3) / 2
    vals = error_kernel_values(a, r_grid, sign, refine)
    return [(float(r), float(abs(e) * r ** ((n + 1) / 2))) for r, e in zip(r_grid, vals)]


# -- J_m ------------------------------------------------------------------------

def main_term_coefficients(m: float) -> tuple[complex, complex]:
    """``(c_minus, c_plus)`` with main term ``r**-1/2 (c_minus e^{-ir} + c_plus e^{ir})``."""
    a = m - 0.5
    pre = 1.0 / (2.0 ** m * math.sqrt(math.pi))
    if a == 0:
        return pre * 1j, -pre * 1j
    return pre * 1j * (2j) ** a, -pre * 1j * (-2j) ** a


def bessel_main_term(order, r: float) -> complex:
    """Two-exponential leading term of ``J_m(r)``; equals ``J_{1/2}`` exactly."""
    m = _as_order(order).m
    if not r > 0:
        raise ValueError("main term needs r > 0")
    cm, cp = main_term_coefficients(m)
    return complex(r ** -0.5 * (cm * np.exp(-1j * r) + cp * np.exp(1j * r)))


def bessel_error_part(order, r: float, refine: int = 0) -> BesselValue:
    """``J_m(r) - bessel_main_term(m, r)`` through the error kernels, any ``r > 0``."""
    m = _as_order(order).m
    if not r > 0:
        raise ValueError("error part needs r > 0")
    a = m - 0.5
    if a == 0:
        return BesselValue(0j, 0.0)
    pre = (r / 2) ** m / (special.gamma(m + 0.5) * math.sqrt(math.pi))
    vals = []
    for k in (refine, refine + 1):
        ep = error_kernel_values(a, r, 1, k)[0]
        em = error_kernel_values(a, r, -1, k)[0]
        vals.append(pre * (1j * np.exp(-1j * r) * ep - 1j * np.exp(1j * r) * em))
    err = abs(vals[1] - vals[0]) + 2 * abs(pre) * _kernel_tail(a, r, KERNEL_CUTOFF)
    return BesselValue(complex(vals[1]), float(err))


def _series(m: float, r: float) -> BesselValue:
    # exact rational partial sums; only the final scaling is rounded
    x = Fraction(r)
    mq = Fraction(m).limit_denominator(1000)
    u = x * x / 4
    term = Fraction(1)
    total = term
    k = 0
    while True:
        k += 1
        term = -term * u / (k * (k + mq))
        total += term
        if k > r / 2 and abs(term) < Fraction(1, 10 ** 20) * max(abs(total), Fraction(1, 10 ** 20)):
            break
    scale = (r / 2) ** m / special.gamma(m + 1)
    value = scale * float(total)
    err = 4 * np.finfo(float).eps * abs(value) + abs(scale) * float(abs(term))
    return BesselValue(complex(value, 0.0), float(err))


def _closed_half_integer(m: float, r: float) -> BesselValue:
    l = int(round(m - 0.5))
    if l == 0:
        value = 2.0 * math.sin(r) / math.sqrt(2.0 * math.pi * r)
        return BesselValue(complex(value, 0.0), 2 * np.finfo(float).eps * max(1.0, abs(value)))
    j_prev = math.sin(r) / r
    j_cur = math.sin(r) / r ** 2 - math.cos(r) / r
    for k in range(1, l):
        j_prev, j_cur = j_cur, (2 * k + 1) / r * j_cur - j_prev
    value = math.sqrt(2.0 * r / math.pi) * j_cur
    return BesselValue(complex(value, 0.0), 8 * l * np.finfo(float).eps * max(1.0, abs(value)))


def _asymptotic(m: float, r: float) -> BesselValue:
    main = bessel_main_term(m, r)
    rest = bessel_error_part(m, r)
    value = main + rest.value
    err = rest.abs_error + 4 * np.finfo(float).eps * abs(main)
    # imaginary part cancels analytically for real arguments
    return BesselValue(complex(value.real, 0.0), float(err + abs(value.imag)))


def bessel_j(order, r: float, method: str = "auto") -> BesselValue:
    """``J_m(r)`` for ``m >= 0``, ``r >= 0``.

    ``method`` is ``"auto"`` (closed forms for half-integer orders once
    ``r`` exceeds the order, the series below ``SERIES_SWITCH``, the
    main+error representation above it), or one of ``"series"``,
    ``"closed"``, ``"asymptotic"`` to force a path.
    """
    order = _as_order(order)
    m = order.m
    if not r >= 0:
        raise ValueError("bessel_j needs r >= 0")
    if r == 0:
        return BesselValue(1.0 + 0j if m == 0 else 0j, 0.0)
    if method == "auto":
        if order.is_half_integer and r >= max(1.0, m):
            method = "closed"
        elif r < SERIES_SWITCH:
            method = "series"
        else:
            method = "asymptotic"
    if method == "series":
        if r > 100:
            raise ValueError("series path is limited to r <= 100")
        return _series(m, r)
    if method == "closed":
        if not order.is_half_integer:
            raise ValueError("closed form exists only for half-integer orders")
        return _closed_half_integer(m, r)
    if method == "asymptotic":
        return _asymptotic(m, r)
    raise ValueError(f"unknown method {method!r}")


def bessel_ratio(m: float, x):
    """``J_m(x) / x**m`` on arrays, with the removable singularity at 0.

    Below ``x = 1e-3`` the leading series term with its quadratic correction
    is used.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 1e-3
    lead = 1.0 / (2.0 ** m * special.gamma(m + 1))
    xs = x[small]
    out[small] = lead * (1.0 - xs * xs / (4.0 * (m + 1)))
    xb = x[~small]
    out[~small] = special.jv(m, xb) / xb ** m
    return out
