"""Composite Gauss-Legendre quadrature for finite oscillatory integrals and
for time integrals of ``|g(t)|**q`` over adaptively truncated windows.

Panels are kept narrower than a quarter of the local oscillation period and
are split at every discontinuity of the integrand, so a fixed low-order rule
per panel is enough. Error estimates are nested-rule differences obtained by
halving every panel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "QuadratureResult",
    "OscillationSpec",
    "TimeTruncation",
    "TruncationError",
    "gauss_rule",
    "oscillatory_edges",
    "panel_nodes",
    "integrate_oscillatory",
    "integrate_power",
    "adaptive_time_truncation",
]

DEFAULT_ORDER = 8


class TruncationError(RuntimeError):
    """Raised when a semi-infinite time integral cannot be truncated to the
    requested tolerance (tails too heavy, typically ``q`` close to 1)."""


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    abs_error: float

    def __post_init__(self):
        if not self.abs_error >= 0:
            raise ValueError("abs_error must be nonnegative")


@dataclass(frozen=True)
class OscillationSpec:
    """Phase ``exp(i*omega*s)`` on the interval ``[a, b]``, ``0 < a <= b``."""

    omega: float
    interval: tuple[float, float]

    def __post_init__(self):
        a, b = self.interval
        if not a > 0:
            raise ValueError("oscillatory interval must stay away from 0")
        if b < a:
            raise ValueError("interval must satisfy b >= a")
        if not abs(self.omega) < 1e9:
            raise ValueError("|omega| must be below 1e9")


@lru_cache(maxsize=None)
def gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def oscillatory_edges(a: float, b: float, omega_max: float = 0.0,
                      breakpoints: Iterable[float] = (),
                      min_panels: int = 1, refine: int = 0) -> np.ndarray:
    """Panel edges on [a, b].

    Every breakpoint strictly inside (a, b) becomes an edge, each resulting
    piece gets at least ``min_panels`` equal panels, and no panel is wider
    than a quarter period ``pi / (2 |omega_max|)``. ``refine`` halves every
    panel that many times.
    """
    cuts = sorted({a, b, *[x for x in breakpoints if a < x < b]})
    qp = math.pi / (2.0 * abs(omega_max)) if omega_max else math.inf
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        k = max(min_panels, math.ceil((hi - lo) / qp) if qp < math.inf else 1)
        k <<= refine
        pieces.append(np.linspace(lo, hi, k + 1)[:-1])
    pieces.append(np.array([cuts[-1]]))
    return np.concatenate(pieces)


def panel_nodes(edges: np.ndarray, order: int = DEFAULT_ORDER):
    """Nodes and weights of the composite rule on the given panel edges."""
    x, w = gauss_rule(order)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate_oscillatory(F, beta: float, spec: OscillationSpec,
                          tol: float = 1e-12, order: int = DEFAULT_ORDER,
                          max_refine: int = 8) -> QuadratureResult:
    """Integrate ``F(s) * s**beta * exp(i*omega*s)`` over ``spec.interval``.

    ``F`` is a radial profile (anything with ``__call__``, and optionally
    ``breakpoints``, ``sup_norm()`` and ``min_panels``) or a plain vectorized
    callable. Panels are halved until the nested difference drops below
    ``tol`` relative to the value (or to the integral of ``|integrand|``
    when the value cancels to zero).
    """
    a, b = spec.interval
    support = getattr(F, "support", None)
    if support is not None and (support[0] < a - 1e-12 or support[1] > b + 1e-12):
        raise ValueError("profile support must lie inside the integration interval")
    if hasattr(F, "sup_norm") and not math.isfinite(F.sup_norm()):
        raise ValueError("profile is unbounded")
    if a == b:
        return QuadratureResult(0j, 0.0)
    bps = tuple(getattr(F, "breakpoints", ()))
    min_panels = getattr(F, "min_panels", 2)

    def rule(refine):
        edges = oscillatory_edges(a, b, spec.omega, bps, min_panels, refine)
        s, w = panel_nodes(edges, order)
        f = np.asarray(F(s), dtype=complex) * s ** beta
        return np.sum(w * f * np.exp(1j * spec.omega * s)), np.sum(w * np.abs(f))

    coarse, _ = rule(0)
    for level in range(1, max_refine + 1):
        fine, scale = rule(level)
        err = abs(fine - coarse)
        if err <= tol * max(abs(fine), 1e-8 * scale, 1e-300):
            break
        coarse = fine
    return QuadratureResult(complex(fine), float(err))


@dataclass(frozen=True)
class TimeTruncation:
    """Time windows ``[c - T, c + T]`` kept around each center, the captured
    mass of ``|g|**q`` on their union, and a bound on the omitted mass."""

    windows: tuple[tuple[float, float], ...]
    intervals: tuple[tuple[float, float], ...]
    mass: float
    tail_bound: float
    doublings: int = 0
    decay_constant: float = 0.0
    history: tuple[float, ...] = field(default=(), repr=False)


def _merge(intervals: Sequence[tuple[float, float]]):
    out: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def _time_nodes(intervals, panel_width, breakpoints=(), order=DEFAULT_ORDER):
    ts, ws = [], []
    for lo, hi in intervals:
        # a quarter period of this frequency equals panel_width
        edges = oscillatory_edges(lo, hi, math.pi / (2.0 * panel_width), breakpoints)
        t, w = panel_nodes(edges, order)
        ts.append(t)
        ws.append(w)
    return np.concatenate(ts), np.concatenate(ws)


def integrate_power(g: Callable, q: float, intervals, panel_width: float = 0.25,
                    breakpoints: Iterable[float] = (), order: int = DEFAULT_ORDER):
    """Return ``(integral of |g|**q over the intervals, t nodes, |g| at nodes)``."""
    t, w = _time_nodes(intervals, panel_width, tuple(breakpoints), order)
    ag = np.abs(np.asarray(g(t)))
    return float(np.sum(w * ag ** q)), t, ag


def adaptive_time_truncation(g: Callable, q: float, centers, tol: float = 1e-4, *,
                             support: tuple[float, float] | None = None,
                             T0: float = 8.0, panel_width: float = 0.25,
                             decay_constant: float | None = None,
                             max_doublings: int = 4, safety: float = 1.25,
                             order: int = DEFAULT_ORDER) -> TimeTruncation:
    """Choose time windows around ``centers`` capturing ``int |g|**q dt``.

    Outside the windows ``g`` is modelled as ``|g(t)| <= K / dist(t, centers)``
    (integration by parts for profiles of bounded variation), which bounds the
    omitted mass by ``sum_c 2 K**q T**(1-q) / (q-1)``. ``K`` is either given
    or estimated from the outer half of the current windows, inflated by
    ``safety``. Windows double until the bound is below ``tol`` times the
    captured mass; after ``max_doublings`` doublings a ``TruncationError`` is
    raised.
    """
    if not q > 1:
        raise ValueError("q must exceed 1")
    centers = tuple(sorted(set(float(c) for c in centers)))
    if support is not None:
        iv = ((float(support[0]), float(support[1])),)
        mass, _, _ = integrate_power(g, q, iv, panel_width, centers, order)
        return TimeTruncation(iv, iv, mass, 0.0)

    T = float(T0)
    history = []
    for doubling in range(max_doublings + 1):
        windows = tuple((c - T, c + T) for c in centers)
        intervals = _merge(windows)
        mass, t, ag = integrate_power(g, q, intervals, panel_width, centers, order)
        history.append(mass)
        if decay_constant is None:
            dist = np.min(np.abs(t[:, None] - np.asarray(centers)[None, :]), axis=1)
            ring = dist >= 0.5 * T
            K = safety * float(np.max(ag[ring] * dist[ring])) if ring.any() else 0.0
        else:
            K = float(decay_constant)
        tail = len(centers) * 2.0 * K ** q * T ** (1.0 - q) / (q - 1.0)
        if tail <= tol * mass or mass == 0.0:
            return TimeTruncation(windows, intervals, mass, tail, doubling, K,
                                  tuple(history))
        T *= 2.0
    raise TruncationError(
        f"time truncation did not converge after {max_doublings} doublings "
        f"(tail bound {tail:.3e} vs captured mass {mass:.3e}, q={q})")
