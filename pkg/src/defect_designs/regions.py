"""Trade-off region boundaries and curve files.

A region collects the achievable (wiring complexity, redundancy) pairs for
some regime; all regions here are convex and closed upward/rightward, so a
boundary is a convex polyline sorted by wiring complexity.  Exact
closed-form boundaries keep Fraction coordinates; numerically bounded ones
carry floats.  Curves serialize to a flat CSV (``epsilon,rho,kind,label``)
consumed by plotting scripts.
"""

from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from ._parallel import parallel_map
from .designs import TradePoint
from .errors import DesignError, RegionUnknownError
from .finite_k import SizeDistribution, correction_rate_finite, integer_compositions
from .lp import solve_lp

#: Default number of sampled vertices for curves without closed form.
DEFAULT_CURVE_POINTS = 200

#: Collinearity tolerance for hulls over float-valued points.
FLOAT_HULL_TOL = 1e-9


@dataclass
class RegionCurve:
    kind: str  # "achievable" | "converse" | "exact"
    label: str
    points: list[TradePoint]
    metadata: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Polyline utilities
# ---------------------------------------------------------------------------

def _cross(o: TradePoint, a: TradePoint, b: TradePoint):
    return (a.epsilon - o.epsilon) * (b.rho - o.rho) - (a.rho - o.rho) * (
        b.epsilon - o.epsilon
    )


def is_sorted_by_epsilon(points: Sequence[TradePoint]) -> bool:
    return all(points[i].epsilon <= points[i + 1].epsilon for i in range(len(points) - 1))


def is_convex_polyline(points: Sequence[TradePoint], tol: float = FLOAT_HULL_TOL) -> bool:
    """All turns share one orientation (collinear segments allowed)."""
    sign = 0
    for o, a, b in zip(points, points[1:], points[2:]):
        c = _cross(o, a, b)
        cf = float(c)
        if abs(cf) <= tol:
            continue
        s = 1 if cf > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
    return True


def pareto_lower_left(points: Iterable[TradePoint]) -> list[TradePoint]:
    """Non-dominated points: no other point is <= in both coordinates."""
    ordered = sorted(set(points), key=lambda p: (p.epsilon, p.rho))
    out: list[TradePoint] = []
    best_rho = None
    for p in ordered:
        if best_rho is None or p.rho < best_rho:
            out.append(p)
            best_rho = p.rho
    return out


def lower_hull(points: Sequence[TradePoint], exact: bool = True) -> list[TradePoint]:
    """Lower convex hull vertices (collinear interior points dropped).

    With ``exact`` the cross products are taken over the given coordinates
    (Fractions stay exact); otherwise a float tolerance decides collinearity.
    """
    pts = sorted(set(points), key=lambda p: (p.epsilon, p.rho))
    hull: list[TradePoint] = []
    for p in pts:
        while len(hull) >= 2:
            c = _cross(hull[-2], hull[-1], p)
            drop = (c <= 0) if exact else (float(c) <= FLOAT_HULL_TOL)
            if drop:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def interpolate_rho(points: Sequence[TradePoint], epsilon: float) -> float | None:
    """Piecewise-linear redundancy of a polyline at a wiring value, or None."""
    pts = sorted(((float(p.epsilon), float(p.rho)) for p in points))
    if not pts or epsilon < pts[0][0] or epsilon > pts[-1][0]:
        return None
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x0 <= epsilon <= x1:
            if x1 == x0:
                return min(y0, y1)
            w = (epsilon - x0) / (x1 - x0)
            return y0 + w * (y1 - y0)
    return pts[-1][1]


# ---------------------------------------------------------------------------
# Closed-form regions
# ---------------------------------------------------------------------------

def interpolation_region(q: int, rho_cap=Fraction(2)) -> RegionCurve:
    """Boundary achieved by mixing bare replication with complete blocks.

    The segment from (1,1) to (q,0) plus the vertical ray above (1,1).
    """
    if q < 2:
        raise DesignError(f"alphabet size must be at least 2, got q={q}")
    pts = [
        TradePoint(Fraction(1), Fraction(rho_cap)),
        TradePoint(Fraction(1), Fraction(1)),
        TradePoint(Fraction(q), Fraction(0)),
    ]
    return RegionCurve("achievable", f"interp-q{q}", pts, {"q": q})


def finite_t_region_binary(t: int, rho_cap=Fraction(2)) -> RegionCurve:
    """Exact binary-alphabet region boundary for one or two corrected defects.

    For larger t the region is an open problem and this raises
    :class:`RegionUnknownError`.
    """
    if t not in (1, 2):
        raise RegionUnknownError(
            f"region unknown for t={t} defects over the binary alphabet"
        )
    pts = [
        TradePoint(Fraction(1), Fraction(rho_cap)),
        TradePoint(Fraction(1), Fraction(1)),
        TradePoint(Fraction(2), Fraction(0)),
    ]
    return RegionCurve("exact", f"finite-t{t}-q2", pts, {"q": 2, "t": t})


def ternary_t1_region(rho_cap=Fraction(2)) -> RegionCurve:
    """Exact single-defect region for the ternary alphabet: max(1, 3 - 2 rho)."""
    pts = [
        TradePoint(Fraction(1), Fraction(rho_cap)),
        TradePoint(Fraction(1), Fraction(1)),
        TradePoint(Fraction(3), Fraction(0)),
    ]
    return RegionCurve("exact", "q3-t1", pts, {"q": 3, "t": 1})


def adaptivity_comparison(q: int, rho_cap=Fraction(2)) -> list[RegionCurve]:
    """Three regimes: graph chosen after labels, this package's setting, and
    spare labels chosen before primary labels."""
    if q < 2:
        raise DesignError(f"alphabet size must be at least 2, got q={q}")
    adaptive = RegionCurve(
        "exact",
        f"adaptive-q{q}",
        [TradePoint(Fraction(1), Fraction(rho_cap)), TradePoint(Fraction(1), Fraction(0))],
        {"q": q},
    )
    if q == 2:
        mid = finite_t_region_binary(1, rho_cap)
        mid.label = "intermediate-q2"
    else:
        mid = interpolation_region(q, rho_cap)
        mid.label = f"intermediate-q{q}"
    nonadaptive = RegionCurve(
        "exact",
        f"non-adaptive-q{q}",
        [TradePoint(Fraction(q), Fraction(rho_cap)), TradePoint(Fraction(q), Fraction(0))],
        {"q": q},
    )
    return [adaptive, mid, nonadaptive]


# ---------------------------------------------------------------------------
# Covering bound (finite t converse)
# ---------------------------------------------------------------------------

def _log_floor_ratio(q: int, value: int) -> Fraction:
    """log base q of an integer, as a rational accurate to 1e-12."""
    if value <= 0:
        raise DesignError("logarithm of a nonpositive value")
    if value == 1:
        return Fraction(0)
    exact = math.log2(value) if q == 2 else math.log(value) / math.log(q)
    return Fraction(exact).limit_denominator(10**12)


def covering_bound(q: int, t: int, rho, *, log_shift: Fraction = Fraction(0)) -> Fraction:
    """LP lower bound on wiring complexity at redundancy rho.

    Counts how many primary labelings one spare labeling can serve, by
    primary degree: fractions pi_j of degree-j primaries must cover all
    q^k labelings, which forces the edge count from below.  ``log_shift``
    perturbs the rationalized logarithm constants for sensitivity reports.
    """
    if t < 1 or q < 2:
        raise DesignError(f"need t>=1 and q>=2, got (t={t}, q={q})")
    rho = Fraction(rho)
    if rho < 0:
        raise DesignError(f"redundancy must be nonnegative, got {rho}")
    degrees = list(range(t, q * t + 1))
    n = len(degrees)
    c = [Fraction(j, t) for j in degrees]
    A_eq = [[Fraction(1)] * n]
    b_eq = [Fraction(1)]
    cov_row = [Fraction(0)] * n
    for idx, j in enumerate(degrees):
        if j > t:
            w = _log_floor_ratio(q, j // t) + log_shift
            cov_row[idx] = -w
    cov_row[0] += Fraction(t - 1)
    rhs = -(1 - rho * t)
    res = solve_lp(c, [cov_row], [rhs], A_eq, b_eq)
    assert res.status == "optimal", "covering LP is always feasible (all mass on qt)"
    return res.value


def covering_sensitivity(q: int, t: int, rho, delta: Fraction = Fraction(1, 10**12)) -> float:
    """Spread of the covering bound under +-delta shifts of the log constants."""
    lo = covering_bound(q, t, rho, log_shift=delta)
    hi = covering_bound(q, t, rho, log_shift=-delta)
    return abs(float(hi) - float(lo))


def covering_curve(
    q: int, t: int, rho_values: Sequence | None = None, workers: int = 1
) -> RegionCurve:
    if rho_values is None:
        rho_values = [Fraction(i, DEFAULT_CURVE_POINTS - 1) * Fraction(3, 2)
                      for i in range(DEFAULT_CURVE_POINTS)]
    fn = functools.partial(_covering_point, q, t)
    pts = parallel_map(fn, list(rho_values), workers)
    pts.sort(key=lambda p: (p.epsilon, -p.rho))
    meta = {
        "q": q,
        "t": t,
        "log_rounding_sensitivity": covering_sensitivity(q, t, rho_values[0]),
    }
    return RegionCurve("converse", f"covering-q{q}-t{t}", pts, meta)


def _covering_point(q: int, t: int, rho) -> TradePoint:
    return TradePoint(covering_bound(q, t, rho), Fraction(rho))


# ---------------------------------------------------------------------------
# Finite-k region for unbounded defect counts
# ---------------------------------------------------------------------------

def _rate_point(args) -> TradePoint:
    k, q, d, comp = args
    ps = SizeDistribution(range(1, k + 1), [Fraction(c, d) for c in comp])
    rate = correction_rate_finite(ps, k, q)
    return TradePoint(ps.mean() / rate, 1 / rate)


def finite_k_region(
    k: int,
    q: int,
    ps_grid: Fraction = Fraction(1, 84),
    rho_cap=None,
    workers: int = 1,
) -> RegionCurve:
    """Region boundary for k primaries as defects grow without bound.

    Sweeps spare-degree distributions on a simplex grid over degrees
    1..k, maps each exactly to (E[S]/rate, 1/rate), and keeps the lower
    convex hull of the non-dominated points; hull vertices are the region's
    corner points and are exact rationals.
    """
    ps_grid = Fraction(ps_grid)
    if ps_grid.numerator != 1:
        raise DesignError(f"ps_grid must be a unit fraction, got {ps_grid}")
    d = ps_grid.denominator
    comps = [(k, q, d, comp) for comp in integer_compositions(d, k)]
    points = parallel_map(_rate_point, comps, workers)

    frontier = pareto_lower_left(points)
    hull = lower_hull(frontier, exact=True)
    eps_cap = max(p.epsilon for p in points)
    if rho_cap is None:
        rho_cap = 2 * hull[0].rho
    curve_pts = [TradePoint(hull[0].epsilon, Fraction(rho_cap))] + hull
    if eps_cap > hull[-1].epsilon:
        curve_pts.append(TradePoint(eps_cap, hull[-1].rho))
    return RegionCurve(
        "exact",
        f"rinfty-k{k}-q{q}",
        curve_pts,
        {"k": k, "q": q, "ps_grid": str(ps_grid), "corners": hull},
    )


# ---------------------------------------------------------------------------
# Closed-form check value for the k=3 binary region
# ---------------------------------------------------------------------------

def _k3_rate_from_splits(c: float, x11: float, x21: float) -> float | None:
    """Equalized k=3 binary rate for boundary splits, or None when the
    implied degree distribution leaves the simplex."""
    denom = 6.0 * x21 - 6.0 * x11 - 1.0
    if abs(denom) < 1e-12:
        return None
    p3 = (c - 1.0) * (1.0 - 3.0 * x11) / denom
    p2 = (c - 1.0) - 2.0 * p3
    p1 = (2.0 - c) + p3
    if min(p1, p2, p3) < -1e-12:
        return None
    return p3 * (3.0 * x21 - 2.0 * x11 - 1.0) + (c - 1.0) * x11 + 1.0


def max_rate_k3_binary(c: float, grid: int = 4000) -> float:
    """Largest k=3 binary rate over degree mixes with mean c, in closed form.

    The optimal spare labeling fixes all but the two boundary ratio
    classes; their split weights are the only free variables, one of which
    sits at its endpoint.  Scans both endpoint families on a dense grid.
    """
    if not 1.0 <= c <= 3.0:
        raise DesignError(f"mean degree must lie in [1,3], got {c}")
    best = 1.0  # mixing in zero-rate mass never beats pure replication
    for i in range(grid + 1):
        x = i / grid
        for val in (_k3_rate_from_splits(c, 0.0, x), _k3_rate_from_splits(c, x, 1.0)):
            if val is not None and val > best:
                best = val
    return best


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def write_region_csv(curves: Sequence[RegionCurve], path: str | os.PathLike) -> None:
    """Write polyline vertices as ``epsilon,rho,kind,label`` rows, atomically."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epsilon,rho,kind,label\n")
        for curve in curves:
            for p in curve.points:
                fh.write(
                    f"{float(p.epsilon):.12g},{float(p.rho):.12g},"
                    f"{curve.kind},{curve.label}\n"
                )
    os.replace(tmp, path)
