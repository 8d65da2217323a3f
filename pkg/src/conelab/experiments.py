"""Dyadic sweeps of annulus norms, log-log slope fits, Schur sums,
feasibility classification of exponent triples, the multi-band global
check and the band sharpness experiment.

Every sweep is a list of independent cells (one annulus each) evaluated by
module-level functions, so callers may hand any ``map``-like callable (for
instance ``ProcessPoolExecutor.map``) to distribute them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np

from .extension import TERMS, ExtensionField
from .norms import AnnulusRegion, NormResult, lq_annulus_norm
from .profiles import RadialProfile, is_dyadic
from .quadrature import TruncationError

__all__ = [
    "ExponentTriple",
    "Feasibility",
    "feasibility_classify",
    "alpha_exponent",
    "schur_kernel",
    "SweepPoint",
    "annulus_cell",
    "dyadic_sweep",
    "dyadic_range",
    "SlopeFit",
    "fit_slope",
    "fit_loglog",
    "InsufficientPointsError",
    "SchurResult",
    "schur_sum",
    "multi_band",
    "GlobalCheck",
    "global_restriction_check",
    "BandResult",
    "band_sharpness",
    "FLAGS",
]

FLAGS = ("divergent", "truncation-unstable", "excluded-from-fit")


def _exact(x) -> Fraction | float:
    """Exact rational for finite input; floats go through their shortest repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if math.isinf(x):
            return math.inf
        return Fraction(repr(x))
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity"):
        return math.inf
    return Fraction(x)


def _inv(x) -> Fraction:
    return Fraction(0) if x == math.inf else 1 / Fraction(x)


@dataclass(frozen=True)
class ExponentTriple:
    """``(n, p, q)`` held as exact rationals (``math.inf`` allowed for p, q)."""

    n: int
    p: Fraction | float
    q: Fraction | float

    def __post_init__(self):
        object.__setattr__(self, "p", _exact(self.p))
        object.__setattr__(self, "q", _exact(self.q))
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("n must be an integer >= 2")
        object.__setattr__(self, "n", int(self.n))
        if not self.p >= 1:
            raise ValueError("p must lie in [1, inf]")
        if not self.q > 0:
            raise ValueError("q must be positive")

    @property
    def p_conj(self) -> Fraction | float:
        inv = 1 - _inv(self.p)
        return math.inf if inv == 0 else 1 / inv

    @property
    def qf(self) -> float:
        return float(self.q)

    @property
    def pf(self) -> float:
        return float(self.p)

    @property
    def critical_q(self) -> Fraction:
        """``2n/(n-1)``, the endpoint of the admissible q range."""
        return Fraction(2 * self.n, self.n - 1)

    def __str__(self):
        return f"(n={self.n}, p={self.p}, q={self.q})"


@dataclass(frozen=True)
class Feasibility:
    conjecture_region: bool
    scaling_critical_line: bool
    dyadic_extended_region: bool
    cordoba_stein_region: bool


def feasibility_classify(exps: ExponentTriple) -> Feasibility:
    """Exact-arithmetic classification of an exponent triple."""
    n = exps.n
    inv_q = _inv(exps.q)
    inv_pc = _inv(exps.p_conj)
    above = exps.q > exps.critical_q
    lhs = (n + 1) * inv_q
    rhs = (n - 1) * inv_pc
    return Feasibility(
        conjecture_region=bool(above and lhs <= rhs),
        scaling_critical_line=bool(lhs == rhs),
        dyadic_extended_region=bool(above and exps.q >= max(2, exps.p_conj)),
        cordoba_stein_region=bool(exps.p == 2 and exps.q >= Fraction(2 * (n + 1), n - 1)),
    )


def alpha_exponent(n: int, q: float, K: float) -> float:
    """Decay exponent of the dyadic bound: ``(n-1)/q`` for ``K <= 1`` and
    ``-(n-1)/2 (1 - 2n/(q(n-1)))`` for ``K >= 2``; only dyadic ``K``."""
    if not is_dyadic(K):
        raise ValueError(f"K must be dyadic, got {K}")
    q = float(q)
    if K <= 1:
        return (n - 1) / q
    return -(n - 1) / 2 * (1 - 2 * n / (q * (n - 1)))


def schur_kernel(n: int, q: float, R: float, M: float) -> float:
    """``(RM)**alpha(RM)``; a function of the product only."""
    K = R * M
    return K ** alpha_exponent(n, q, K)


# -- sweeps ---------------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    R: float
    result: NormResult | None
    flags: tuple[str, ...] = ()
    term: str = "full"

    @property
    def value(self) -> float:
        return math.nan if self.result is None else self.result.value

    @property
    def usable(self) -> bool:
        return self.result is not None and not self.flags and self.result.value > 0


def dyadic_range(lo_exp: int, hi_exp: int) -> tuple[float, ...]:
    """``(2**lo_exp, ..., 2**hi_exp)``."""
    if hi_exp < lo_exp:
        raise ValueError("empty dyadic range")
    return tuple(2.0 ** k for k in range(lo_exp, hi_exp + 1))


def annulus_cell(profiles, n: int, q: float, R: float, term: str = "full",
                 tol: float = 1e-3) -> SweepPoint:
    """Norm of one term of the extension over ``R x A_R``; a sweep cell."""
    if term not in TERMS:
        raise ValueError(f"term must be one of {TERMS}")
    if term != "full" and R < 2:
        raise ValueError("main/error terms are only swept for R >= 2")
    field_ = ExtensionField(profiles, n, term)
    try:
        res = lq_annulus_norm(field_, float(q), AnnulusRegion(R, n), tol)
    except TruncationError:
        return SweepPoint(R, None, ("truncation-unstable",), term)
    return SweepPoint(R, res, (), term)


def dyadic_sweep(F: RadialProfile | Sequence[RadialProfile], exps: ExponentTriple,
                 R_range: Iterable[float], term: str = "full", tol: float = 1e-3,
                 mapper: Callable = map) -> list[SweepPoint]:
    """Annulus norms of one term of the extension for each ``R`` in ``R_range``.

    A truncation failure flags that annulus and the sweep continues.
    """
    Rs = [float(R) for R in R_range]
    for R in Rs:
        if not is_dyadic(R):
            raise ValueError(f"R must be dyadic, got {R}")
    cell = partial(annulus_cell, F, exps.n, exps.qf, term=term, tol=tol)
    return list(mapper(cell, Rs))


class InsufficientPointsError(ValueError):
    """Fewer than four usable points for a slope fit."""


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    max_residual: float
    window: tuple[float, float]
    stderr: float = 0.0
    confidence: float = 0.0
    points: int = 0
    residuals: tuple[float, ...] = field(default=(), compare=False)


def fit_loglog(x: Sequence[float], y: Sequence[float], min_points: int = 4) -> SlopeFit:
    """Least-squares line through ``(log2 x, log2 y)``.

    ``confidence`` is the larger of twice the standard error and the slope
    change when either end point is dropped.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < min_points:
        raise InsufficientPointsError(f"need at least {min_points} points, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    order = np.argsort(x)
    lx, ly = np.log2(x[order]), np.log2(y[order])
    slope, intercept = np.polyfit(lx, ly, 1)
    res = ly - (slope * lx + intercept)
    dof = lx.size - 2
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    stderr = math.sqrt(float(np.sum(res ** 2)) / dof / sxx) if dof > 0 and sxx > 0 else 0.0
    shifts = [0.0]
    if lx.size > 3:
        for sl in (slice(1, None), slice(None, -1)):
            shifts.append(abs(np.polyfit(lx[sl], ly[sl], 1)[0] - slope))
    return SlopeFit(float(slope), float(intercept), float(np.max(np.abs(res))),
                    (float(x[order][0]), float(x[order][-1])), stderr,
                    max(2 * stderr, max(shifts)), int(lx.size), tuple(float(r) for r in res))


def fit_slope(sweep: Sequence) -> SlopeFit:
    """Slope of log2(norm) against log2(R), skipping flagged or zero annuli.

    Accepts :class:`SweepPoint` items or ``(R, NormResult | float)`` pairs.
    """
    xs, ys = [], []
    for item in sweep:
        if isinstance(item, SweepPoint):
            if not item.usable:
                continue
            R, v = item.R, item.result.value
        else:
            R, v = item
            v = v.value if isinstance(v, NormResult) else float(v)
            if not v > 0:
                continue
        xs.append(R)
        ys.append(v)
    return fit_loglog(xs, ys)


# -- Schur sums -----------------------------------------------------------------

@dataclass(frozen=True)
class SchurResult:
    partial_sums: tuple[float, ...]
    increments: tuple[float, ...]
    total: float
    ratios: tuple[float, float]
    convergent: bool
    limit: float | None

    @property
    def ratio(self) -> float:
        """The slower of the two tail ratios."""
        return max(self.ratios)

    @property
    def flags(self) -> tuple[str, ...]:
        return () if self.convergent else ("divergent",)


def schur_sum(exps: ExponentTriple, K_range: int = 40, window: int = 5) -> SchurResult:
    """``sum_{|log2 K| <= L} K**alpha(K)`` for ``L = 0..K_range``.

    The increment at level ``L`` is the sum of the terms at ``K = 2**L`` and
    ``K = 2**-L``. Each side is tested on its own: over the last ``window``
    levels its term ratios must be constant to 1e-9 (a geometric tail) and
    below ``1 - 1e-9``. ``limit`` adds both geometric tails when they are.
    """
    n, q = exps.n, exps.qf
    if K_range < window + 1:
        raise ValueError("K_range too small for tail detection")
    levels = np.arange(1, K_range + 1)
    big = np.array([schur_kernel(n, q, 2.0 ** L, 1.0) for L in levels])
    small = np.array([schur_kernel(n, q, 2.0 ** -L, 1.0) for L in levels])
    incs = np.concatenate([[1.0], big + small])  # K = 1 first
    sums = np.cumsum(incs)
    ratios, tails, ok = [], [], True
    for side in (big, small):
        r = side[-window:] / side[-window - 1:-1]
        rho = float(r[-1])
        ratios.append(rho)
        geometric = bool(np.ptp(r) <= 1e-9 and rho < 1 - 1e-9)
        ok = ok and geometric
        tails.append(float(side[-1] * rho / (1 - rho)) if geometric else math.inf)
    limit = float(sums[-1] + sum(tails)) if ok else None
    return SchurResult(tuple(float(x) for x in sums), tuple(float(i) for i in incs),
                       float(sums[-1]), (ratios[0], ratios[1]), ok, limit)


# -- global check over several dyadic levels --------------------------------------

def multi_band(base: RadialProfile, levels: Sequence[float], n: int, p: float,
               masses: Sequence[float] | None = None) -> tuple[RadialProfile, ...]:
    """Copies of a level-1 ``base`` at dyadic ``levels`` with prescribed
    ``L^p(d sigma)`` norms (default: all equal to the base norm)."""
    if base.dyadic_level != 1:
        raise ValueError("base profile must sit at dyadic level 1")
    ref = base.lp_norm(p, n)
    masses = [ref] * len(levels) if masses is None else list(masses)
    if len(masses) != len(levels):
        raise ValueError("one mass per level")
    out = []
    for M, mass in zip(levels, masses):
        piece = base.rescale(M) if M != 1 else base
        out.append(piece.with_amplitude(base.amplitude * mass / piece.lp_norm(p, n)))
    return tuple(out)


@dataclass(frozen=True)
class GlobalCheck:
    ratio: float
    lhs: float
    rhs: float
    annuli: tuple[SweepPoint, ...]
    tail_fraction: float
    flags: tuple[str, ...] = ()


def global_restriction_check(profiles: Sequence[RadialProfile], exps: ExponentTriple,
                             margin: int = 6, near: int = 4, tol: float = 1e-3,
                             mapper: Callable = map) -> GlobalCheck:
    """``||(f dsigma)^vee||_{L^q(R^{1+n})} / ||f||_{L^p(dsigma)}`` for a
    sum of dyadic pieces on the scaling-critical line.

    The extension is the literal sum of the per-piece extensions. Its
    ``q``-th power is summed over the annuli ``R`` from ``2**-near / M_max``
    to ``2**margin / M_min``; both omitted ends are added as geometric
    tails: the far-field exponent outward and ``R**(n/q)`` growth inward.
    """
    feas = feasibility_classify(exps)
    if not feas.scaling_critical_line:
        raise ValueError(f"{exps} is not on the scaling-critical line")
    if not exps.q > exps.critical_q:
        raise ValueError("need q > 2n/(n-1)")
    profiles = tuple(profiles)
    n, q, p = exps.n, exps.qf, exps.pf
    levels = [P.dyadic_level for P in profiles]
    lo = int(round(math.log2(min(levels))))
    hi = int(round(math.log2(max(levels))))
    Rs = dyadic_range(-hi - near, -lo + margin)
    cells = dyadic_sweep(profiles, exps, Rs, "full", tol, mapper)
    flags = ("truncation-unstable",) if any(c.flags for c in cells) else ()
    qs = np.array([c.value ** q if c.result is not None else 0.0 for c in cells])
    far = 2.0 ** (q * alpha_exponent(n, q, 2.0))  # q-th power ratio per outward step
    inner = 2.0 ** -n  # near the origin the field is flat, so the norm goes like R**(n/q)
    tail = qs[-1] * far / (1 - far) + qs[0] * inner / (1 - inner)
    total = float(qs.sum() + tail)
    lhs = total ** (1 / q)
    rhs = float(sum(P.lp_norm(p, n) ** p for P in profiles) ** (1 / p))
    return GlobalCheck(lhs / rhs, lhs, rhs, tuple(cells), float(tail / total), flags)


# -- band sharpness ----------------------------------------------------------------

@dataclass(frozen=True)
class BandResult:
    deltas: tuple[float, ...]
    lhs: tuple[float, ...]
    rhs: tuple[float, ...]
    lhs_fit: SlopeFit
    rhs_fit: SlopeFit
    flags: tuple[tuple[str, ...], ...]
    last_shell_fraction: tuple[float, ...]


def _band_lhs(delta: float, exps: ExponentTriple, extra: int, tol: float,
              shell_gate: float):
    F = RadialProfile.band_indicator(delta)
    j_max = int(math.ceil(math.log2(1 / delta))) + extra
    cells = [annulus_cell(F, exps.n, exps.qf, R, "full", tol) for R in dyadic_range(0, j_max)]
    flags = set()
    if any(c.flags for c in cells):
        flags.add("truncation-unstable")
    qs = np.array([c.value ** exps.qf if c.result is not None else 0.0 for c in cells])
    total = float(qs.sum())
    frac = float(qs[-1] / total) if total else 0.0
    if frac > shell_gate:
        flags.add("truncation-unstable")
    return total ** (1 / exps.qf), tuple(sorted(flags)), frac


def band_sharpness(deltas: Sequence[float], exps: ExponentTriple, extra: int = 4,
                   tol: float = 1e-3, shell_gate: float = 0.02,
                   mapper: Callable = map) -> BandResult:
    """``delta``-exponents of both sides of the extension inequality for
    band indicators of width ``delta``.

    The left side sums annuli ``R = 2**0 .. 2**j_max`` with
    ``j_max = ceil(log2(1/delta)) + extra``; a band is flagged when the last
    shell still carries more than ``shell_gate`` of the total. ``delta = 1``
    and flagged bands are kept in the output but left out of both fits.
    """
    if not exps.q > exps.critical_q:
        raise ValueError("need q > 2n/(n-1)")
    deltas = tuple(float(d) for d in deltas)
    if any(not 0 < d <= 1 for d in deltas):
        raise ValueError("band widths must lie in (0, 1]")
    runs = list(mapper(partial(_band_lhs, exps=exps, extra=extra, tol=tol,
                               shell_gate=shell_gate), deltas))
    lhs = tuple(r[0] for r in runs)
    flags = []
    for d, r in zip(deltas, runs):
        f = set(r[1])
        if d == 1.0 or f:
            f.add("excluded-from-fit")
        flags.append(tuple(sorted(f)))
    rhs = tuple(RadialProfile.band_indicator(d).lp_norm(exps.pf, exps.n) for d in deltas)
    use = [i for i, f in enumerate(flags) if not f]
    lhs_fit = fit_loglog([deltas[i] for i in use], [lhs[i] for i in use])
    rhs_fit = fit_loglog([deltas[i] for i in use], [rhs[i] for i in use])
    return BandResult(deltas, lhs, rhs, lhs_fit, rhs_fit, tuple(flags),
                      tuple(r[2] for r in runs))
