"""Radial traces F(s) = f(|xi|, xi) of cylindrically symmetric functions on
the cone, dyadically supported in frequency."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .quadrature import oscillatory_edges, panel_nodes

__all__ = ["RadialProfile", "is_dyadic", "sphere_area", "SHAPES"]

SHAPES = ("constant", "power", "smooth_bump", "band_indicator", "sampled")


def is_dyadic(x: float) -> bool:
    """True when ``x`` is an exact integer power of two."""
    if not (x > 0 and math.isfinite(x)):
        return False
    mant, _ = math.frexp(x)
    return mant == 0.5


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


@dataclass(frozen=True)
class RadialProfile:
    """An immutable radial profile.

    ``shape`` selects the formula, evaluated in base coordinates ``s / scale``;
    :func:`rescale` multiplies ``scale``, ``support`` and ``dyadic_level`` by
    the same dyadic factor. Use the classmethod constructors.
    """

    shape: str
    support: tuple[float, float]
    dyadic_level: float = 1.0
    amplitude: float = 1.0
    exponent: float = 0.0
    delta: float | None = None
    grid: tuple[float, ...] | None = None
    values: tuple[float, ...] | None = None
    scale: float = 1.0

    def __post_init__(self):
        a, b = self.support
        if self.shape not in SHAPES:
            raise ValueError(f"unknown profile shape {self.shape!r}")
        if not 0 < a < b:
            raise ValueError("support must be an interval [a, b] with 0 < a < b")
        if not is_dyadic(self.dyadic_level):
            raise ValueError("dyadic_level must be a power of two")
        M = self.dyadic_level
        if a < M * (1 - 1e-12) or b > 2 * M * (1 + 1e-12):
            raise ValueError(f"support {self.support} is not inside [{M}, {2 * M}]")
        if self.shape == "band_indicator" and not (self.delta is not None and 0 < self.delta <= 1):
            raise ValueError("band_indicator needs 0 < delta <= 1")
        if self.shape == "sampled":
            g = np.asarray(self.grid, dtype=float)
            if g.size < 2 or np.any(np.diff(g) <= 0):
                raise ValueError("sampled grid must be strictly increasing")
            if len(self.values) != g.size:
                raise ValueError("grid and values differ in length")
            if not np.all(np.isfinite(self.values)):
                raise ValueError("profile is unbounded")
            if abs(g[0] * self.scale - a) > 1e-12 * b or abs(g[-1] * self.scale - b) > 1e-12 * b:
                raise ValueError("sampled grid must span the support")
        if not math.isfinite(self.amplitude):
            raise ValueError("profile is unbounded")

    # -- constructors ------------------------------------------------------
    @classmethod
    def constant(cls, value: float = 1.0, support=(1.0, 2.0), dyadic_level: float = 1.0):
        return cls("constant", tuple(map(float, support)), dyadic_level, amplitude=value)

    @classmethod
    def power(cls, exponent: float, support=(1.0, 2.0), dyadic_level: float = 1.0,
              amplitude: float = 1.0):
        return cls("power", tuple(map(float, support)), dyadic_level,
                   amplitude=amplitude, exponent=float(exponent))

    @classmethod
    def smooth_bump(cls, support=(1.0, 2.0), dyadic_level: float = 1.0, amplitude: float = 1.0):
        return cls("smooth_bump", tuple(map(float, support)), dyadic_level, amplitude=amplitude)

    @classmethod
    def band_indicator(cls, delta: float, amplitude: float = 1.0):
        return cls("band_indicator", (1.0, 1.0 + float(delta)), 1.0,
                   amplitude=amplitude, delta=float(delta))

    @classmethod
    def sampled(cls, grid, values, dyadic_level: float = 1.0):
        grid = tuple(float(x) for x in grid)
        return cls("sampled", (grid[0], grid[-1]), dyadic_level,
                   grid=grid, values=tuple(float(v) for v in values))

    # -- evaluation --------------------------------------------------------
    def _base(self, u):
        if self.shape in ("constant", "band_indicator"):
            return np.full_like(u, self.amplitude)
        if self.shape == "power":
            return self.amplitude * u ** self.exponent
        if self.shape == "smooth_bump":
            a, b = (x / self.scale for x in self.support)
            v = (2.0 * u - a - b) / (b - a)
            out = np.zeros_like(u)
            inside = np.abs(v) < 1
            out[inside] = self.amplitude * np.exp(-1.0 / (1.0 - v[inside] ** 2))
            return out
        return np.interp(u, self.grid, self.values)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        a, b = self.support
        out = np.zeros(s.shape)
        inside = (s >= a) & (s <= b)
        out[inside] = self._base(s[inside] / self.scale)
        return out

    @property
    def breakpoints(self) -> tuple[float, ...]:
        if self.shape == "sampled":
            return tuple(g * self.scale for g in self.grid)
        return self.support

    @property
    def min_panels(self) -> int:
        # the bump is flat to all orders at its ends; give Gauss enough panels
        return 24 if self.shape == "smooth_bump" else 2

    def quadrature(self, refine: int = 2, order: int = 8):
        """Nodes and weights covering the support, split at breakpoints."""
        a, b = self.support
        edges = oscillatory_edges(a, b, 0.0, self.breakpoints, self.min_panels, refine)
        return panel_nodes(edges, order)

    def sup_norm(self) -> float:
        s, _ = self.quadrature()
        s = np.concatenate([s, self.breakpoints])
        return float(np.max(np.abs(self(s))))

    def lp_norm(self, p: float, n: int) -> float:
        """``||f||_{L^p(S, d sigma)}``; ``d sigma = d xi / |xi|`` pulled back to the cone,
        i.e. ``(|S^{n-1}| int |F(s)|**p s**(n-2) ds)**(1/p)``."""
        if math.isinf(p):
            return self.sup_norm()
        s, w = self.quadrature(refine=3)
        return float((sphere_area(n) * np.sum(w * np.abs(self(s)) ** p * s ** (n - 2))) ** (1 / p))

    def total_variation(self) -> float:
        """Variation of F over the real line, jumps at the support ends included."""
        s, _ = self.quadrature(refine=4)
        a, b = self.support
        vals = np.concatenate([[0.0], self(np.concatenate([[a], s, [b]])), [0.0]])
        return float(np.sum(np.abs(np.diff(vals))))

    def rescale(self, M: float) -> "RadialProfile":
        """``F_M(s) = F(s / M)``, supported on ``M`` times the support."""
        if not is_dyadic(M):
            raise ValueError(f"rescaling factor must be dyadic, got {M}")
        a, b = self.support
        return replace(self, support=(a * M, b * M), dyadic_level=self.dyadic_level * M,
                       scale=self.scale * M)

    def with_amplitude(self, amplitude: float) -> "RadialProfile":
        if self.shape == "sampled":
            k = amplitude / self.amplitude
            return replace(self, values=tuple(v * k for v in self.values), amplitude=amplitude)
        return replace(self, amplitude=amplitude)
