"""Asymptotic correction rates and numerical bounds on the limiting region.

As the corrected defect count grows, the best achievable (wiring,
redundancy) pairs are parameterized by a spare-degree distribution P_S:
the achievable point is (E[S]/F, 1/F) where F is a min-max-min rate - an
adversarial primary-label split, an optimal threshold labeling of spares
by neighbor-type ratio, and the worst per-label average.  This module
evaluates F for the binary alphabet exactly in the inner problem (the
threshold structure collapses it to a 1-D sweep over candidate ratio
cutoffs) and by exact LPs on a label-frequency grid for general alphabets;
the outer minimization is non-convex, so it runs on a dense grid with
local refinement and the resolution is reported alongside the value.

The converse side bounds max. F over all P_S with a fixed mean c by a
small dual LP whose variables weight the peak-probability envelope
``phi(s, l) = (s/2)(1 + psi(s, l))``, with ``psi`` the largest binomial
pmf.  Feasibility of a returned dual certificate is re-checked explicitly
up to a horizon and analytically beyond it via a square-root decay bound
on ``psi``, so the emitted curve is a genuine outer bound up to float
round-off.

All floating computations use binary64; feasibility slack is 1e-9.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .designs import TradePoint
from .errors import DesignError
from .finite_k import (
    SizeDistribution,
    integer_compositions,
    label_compositions,
    multinomial_pmf,
    optimal_split_value,
)

logger = logging.getLogger(__name__)

FEASIBILITY_SLACK = 1e-9

#: Best known achievable spare-degree mixes at selected integer means,
#: with the (wiring, redundancy) point each one attains (2-decimal
#: reference values).  Used as warm starts for the achievable search and
#: by the reproduction checks.
KNOWN_GOOD_MIXES: dict[int, tuple[tuple[int, ...], tuple[float, ...], tuple[float, float]]] = {
    2: ((1, 3, 4, 5), (0.62, 0.21, 0.10, 0.07), (1.24, 0.61)),
    3: ((1, 3, 4, 5), (0.24, 0.41, 0.20, 0.14), (1.35, 0.45)),
    4: ((3, 4, 5, 6, 7), (0.52, 0.21, 0.13, 0.02, 0.12), (1.42, 0.35)),
    5: ((3, 4, 5, 7), (0.31, 0.23, 0.28, 0.18), (1.40, 0.29)),
    6: ((5, 6, 7, 9), (0.45, 0.31, 0.14, 0.10), (1.47, 0.29)),
    7: ((5, 6, 7, 8, 9), (0.35, 0.01, 0.13, 0.32, 0.19), (1.53, 0.22)),
    8: ((7, 8, 9, 11), (0.40, 0.36, 0.16, 0.08), (1.56, 0.19)),
}


# ---------------------------------------------------------------------------
# Peak binomial pmf and its envelope
# ---------------------------------------------------------------------------

def _binom_logpmf(n: int, p: float, j: int) -> float:
    if p <= 0.0:
        return 0.0 if j == 0 else -math.inf
    if p >= 1.0:
        return 0.0 if j == n else -math.inf
    return (
        math.lgamma(n + 1)
        - math.lgamma(j + 1)
        - math.lgamma(n - j + 1)
        + j * math.log(p)
        + (n - j) * math.log1p(-p)
    )


def peak_binomial_pmf(s: int, lam: float) -> float:
    """Largest pmf value of a Binomial(s-1, lam) draw (the spare's own edge
    to its primary is excluded, hence s-1)."""
    if s < 1:
        raise DesignError(f"degree must be positive, got s={s}")
    n = s - 1
    if n == 0:
        return 1.0
    mode = int(math.floor((n + 1) * lam))
    best = 0.0
    for j in (mode - 1, mode, mode + 1):
        if 0 <= j <= n:
            best = max(best, math.exp(_binom_logpmf(n, lam, j)))
    return best


def degree_rate_bound(s: int, lam: float) -> float:
    """Upper envelope (s/2)(1 + peak pmf) on the per-spare correction rate."""
    return 0.5 * s * (1.0 + peak_binomial_pmf(s, lam))


def peak_pmf_decay_bound(s: int, lam: float) -> float:
    """Square-root decay bound on the peak pmf, used for tail feasibility.

    For s >= 2 the peak of Binomial(s-1, lam) is at most
    1/sqrt(2 (s-1) lam (1-lam)); verified on a wide grid by the test suite.
    """
    if s <= 1:
        return 1.0
    return min(1.0, 1.0 / math.sqrt(2.0 * (s - 1) * lam * (1.0 - lam)))


def threshold_lambdas(n: int) -> list[Fraction]:
    """The n candidate adversarial label frequencies 1/2, 1/3, 2/5, ...

    These are the minimizers of the degree-rate envelope over individual
    degrees: floor(s/2)/s for s up to 2n, deduplicated.
    """
    if n < 1:
        raise DesignError(f"grid size must be positive, got n={n}")
    out = [Fraction(1, 2)]
    out.extend(Fraction(i - 1, 2 * i - 1) for i in range(2, n + 1))
    return out


# ---------------------------------------------------------------------------
# Binary-alphabet rate via the threshold structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdPolicy:
    """Spare labeling rule: label 0 iff the neighbor-type ratio l0/s exceeds
    ``gamma``; the boundary ratio class is split with weight ``mu``."""

    gamma: Fraction | None
    mu: float
    assignment: dict[tuple[int, int], float]  # (s, l0) -> mass on label 0


@dataclass(frozen=True)
class BinaryRateResult:
    value: float
    lam: float
    resolution: float  # outer grid step; the outer min is exact only up to this
    policy: ThresholdPolicy


def _binary_inner(items: Sequence[tuple[int, float]], lam: float) -> tuple[float, ThresholdPolicy]:
    """Exact inner max for fixed adversarial frequency lam in (0, 1).

    Sweeps every candidate threshold ratio; within the boundary class the
    equalizing split is solved in closed form.
    """
    groups: dict[Fraction, list] = {}
    for s, p in items:
        for l0 in range(s + 1):
            w = p * math.exp(_binom_logpmf(s, lam, l0))
            if w == 0.0:
                continue
            a = w * l0 / lam
            b = w * (s - l0) / (1.0 - lam)
            g = groups.setdefault(Fraction(l0, s), [0.0, 0.0, []])
            g[0] += a
            g[1] += b
            g[2].append((s, l0))
    ratios = sorted(groups, reverse=True)
    a_vals = [groups[r][0] for r in ratios]
    b_vals = [groups[r][1] for r in ratios]
    n = len(ratios)
    suffix_b = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_b[i] = suffix_b[i + 1] + b_vals[i]

    best = -1.0
    best_c = 0
    best_mu = 0.0
    prefix_a = 0.0
    for c in range(n):
        a0, b0 = prefix_a, suffix_b[c + 1]
        ac, bc = a_vals[c], b_vals[c]
        for mu, val in (
            (1.0, min(a0 + ac, b0)),
            (0.0, min(a0, b0 + bc)),
        ):
            if val > best:
                best, best_c, best_mu = val, c, mu
        if ac + bc > 0:
            mu = (b0 + bc - a0) / (ac + bc)
            if 0.0 <= mu <= 1.0:
                val = a0 + mu * ac
                if val > best:
                    best, best_c, best_mu = val, c, mu
        prefix_a += ac

    assignment: dict[tuple[int, int], float] = {}
    for i, r in enumerate(ratios):
        f = 1.0 if i < best_c else (best_mu if i == best_c else 0.0)
        for key in groups[r][2]:
            assignment[key] = f
    return best, ThresholdPolicy(ratios[best_c], best_mu, assignment)


def binary_inner_value(ps: SizeDistribution, lam: float) -> float:
    """Inner max for one lam; exposed for audits and independent cross-checks."""
    items = [(s, float(p)) for s, p in ps.items()]
    return _binary_inner(items, lam)[0]


def binary_correction_rate(
    ps: SizeDistribution, lambda_tol: float = 1e-4
) -> BinaryRateResult:
    """Asymptotic binary-alphabet rate F for a spare-degree distribution.

    The outer minimization over the adversarial frequency is a dense grid
    on (0, 1/2] (the two labels are symmetric) plus golden-section
    refinement; ``resolution`` records the grid step.  At the endpoints
    only one label is present and the rate degenerates to E[S], never the
    minimum, so the open interval suffices.
    """
    if not 0 < lambda_tol <= 0.25:
        raise DesignError(f"lambda_tol out of range: {lambda_tol}")
    items = [(s, float(p)) for s, p in ps.items()]

    def f(lam: float) -> float:
        return _binary_inner(items, lam)[0]

    steps = int(math.ceil(0.5 / lambda_tol))
    best_lam, best_val = None, math.inf
    for i in range(1, steps + 1):
        lam = min(0.5, i * lambda_tol)
        v = f(lam)
        if v < best_val:
            best_lam, best_val = lam, v

    lo = max(lambda_tol / 4, best_lam - lambda_tol)
    hi = min(0.5, best_lam + lambda_tol)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(60):
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        if f1 < best_val:
            best_val, best_lam = f1, x1
        if f2 < best_val:
            best_val, best_lam = f2, x2

    value, policy = _binary_inner(items, best_lam)
    return BinaryRateResult(value, best_lam, lambda_tol, policy)


def audit_threshold_policy(ps: SizeDistribution, result: BinaryRateResult) -> bool:
    """Flipping any fully assigned type must not improve the inner value."""
    items = [(s, float(p)) for s, p in ps.items()]
    lam = result.lam
    base = result.value
    for key, fval in result.policy.assignment.items():
        if 0.0 < fval < 1.0:
            continue
        flipped = dict(result.policy.assignment)
        flipped[key] = 1.0 - fval
        a = b = 0.0
        for s, p in items:
            for l0 in range(s + 1):
                w = p * math.exp(_binom_logpmf(s, lam, l0))
                fv = flipped.get((s, l0), 0.0)
                a += w * l0 / lam * fv
                b += w * (s - l0) / (1.0 - lam) * (1.0 - fv)
        if min(a, b) > base + 1e-12:
            return False
    return True


def achievable_point(ps: SizeDistribution, rate: float) -> TradePoint:
    """The (wiring, redundancy) point a degree mix attains at rate F."""
    return TradePoint(float(ps.mean()) / rate, 1.0 / rate)


# ---------------------------------------------------------------------------
# General alphabet via exact grid LPs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneralRateResult:
    value: float
    px: tuple[Fraction, ...]  # minimizing label frequencies found
    resolution: Fraction  # final grid step; the outer min is a grid upper bound


def _general_composition_rate(
    ps: SizeDistribution, comp: tuple[int, ...], denom: int
) -> Fraction:
    if len(comp) == 1:
        return ps.mean()
    qq = len(comp)
    px = [Fraction(c, denom) for c in comp]
    gains: list[list[Fraction]] = []
    for s, p in ps.items():
        for lt in integer_compositions(s, qq):
            pmf = multinomial_pmf(lt, s, px)
            if pmf == 0:
                continue
            w = p * pmf
            gains.append([w * lt[j] / px[j] for j in range(qq)])
    value, _ = optimal_split_value(gains)
    return value


def general_correction_rate(
    ps: SizeDistribution,
    q: int,
    px_grid: Fraction = Fraction(1, 200),
    refine_rounds: int = 2,
) -> GeneralRateResult:
    """Asymptotic rate for alphabet size q by exact LPs on a frequency grid.

    The outer problem is non-convex, so the returned value is the minimum
    over the sampled grid (an upper bound on the true rate), improved by
    local descent and grid halving around the best point.  The inner LP is
    exact at every sampled frequency because grid points are rational.
    """
    if q < 2:
        raise DesignError(f"alphabet size must be at least 2, got q={q}")
    px_grid = Fraction(px_grid)
    if px_grid.numerator != 1:
        raise DesignError(f"px_grid must be a unit fraction, got {px_grid}")
    denom = px_grid.denominator

    cache: dict[tuple[int, tuple[int, ...]], Fraction] = {}

    def rate(comp: tuple[int, ...], d: int) -> Fraction:
        comp = tuple(sorted((c for c in comp if c), reverse=True))
        key = (d, comp)
        if key not in cache:
            cache[key] = _general_composition_rate(ps, comp, d)
        return cache[key]

    best_comp = None
    best_val = None
    for comp in label_compositions(denom, q):
        v = rate(comp, denom)
        if best_val is None or v < best_val:
            best_comp, best_val = comp, v

    d = denom

    def descend() -> None:
        nonlocal best_comp, best_val
        improved = True
        while improved:
            improved = False
            base = list(best_comp) + [0] * (q - len(best_comp))
            for i in range(q):
                for j in range(q):
                    if i == j or base[j] == 0:
                        continue
                    cand = list(base)
                    cand[i] += 1
                    cand[j] -= 1
                    v = rate(tuple(cand), d)
                    if v < best_val:
                        best_val = v
                        best_comp = tuple(sorted((c for c in cand if c), reverse=True))
                        improved = True

    descend()
    for _ in range(refine_rounds):
        d *= 2
        best_comp = tuple(c * 2 for c in best_comp)
        descend()
    return GeneralRateResult(
        float(best_val), tuple(Fraction(c, d) for c in best_comp), Fraction(1, d)
    )


# ---------------------------------------------------------------------------
# Dual-LP converse bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DualCertificate:
    """Feasible dual weights certifying max F <= Z at mean degree c.

    Feasibility means (1/2) sum_i pi_i psi(s, lam_i) <= eta + mu/s for all
    degrees s; the curve point it certifies is (c/Z, 1/Z).
    """

    c: float
    n: int
    s0: int
    pis: tuple[float, ...]
    eta: float
    mu: float
    z: float

    def point(self) -> TradePoint:
        return TradePoint(self.c / self.z, 1.0 / self.z)

    def constraint_value(self, s: int) -> float:
        lams = [float(l) for l in threshold_lambdas(self.n)]
        lhs = 0.5 * sum(p * peak_binomial_pmf(s, l) for p, l in zip(self.pis, lams))
        return lhs - self.eta - self.mu / s

    def max_violation(self, up_to: int) -> float:
        return max(self.constraint_value(s) for s in range(1, up_to + 1))

    def to_json_dict(self) -> dict:
        return {
            "c": self.c,
            "pi": list(self.pis),
            "eta": self.eta,
            "mu": self.mu,
            "Z": self.z,
            "n": self.n,
            "s0": self.s0,
        }


def dual_certificate(c: float, n: int = 10, s0: int | None = None) -> DualCertificate:
    """Solve the dual LP at mean degree c and harden it into a checked certificate.

    The LP enforces the envelope constraints for s up to the horizon s0;
    the solution is then audited out to the analytic tail cutoff implied by
    the square-root decay of the peak pmf, and eta is bumped by any
    violation found, which keeps feasibility while growing Z only
    marginally.  Raises when the tail cannot be closed (eta at zero).
    """
    if c < 1:
        raise DesignError(f"mean degree must be at least 1, got c={c}")
    lams = [float(l) for l in threshold_lambdas(n)]
    horizon0 = int(s0) if s0 is not None else int(10 * max(c, 2 * n))
    nv = n + 2  # pi_1..pi_n, eta, mu
    A_ub = []
    for s in range(1, horizon0 + 1):
        row = [0.5 * peak_binomial_pmf(s, l) for l in lams] + [-1.0, -1.0 / s]
        A_ub.append(row)
    b_ub = [0.0] * horizon0
    A_eq = [[1.0] * n + [0.0, 0.0]]
    b_eq = [1.0]
    obj = [0.0] * n + [c, 1.0]
    res = linprog(
        obj, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
        bounds=(0, None), method="highs",
    )
    if not res.success:
        raise DesignError(
            f"dual LP failed at c={c} (s0={horizon0}): {res.message}; "
            "the constraint horizon may be too small"
        )
    pis = tuple(max(0.0, v) for v in res.x[:n])
    eta = float(res.x[n])
    mu = float(res.x[n + 1])

    a_min = min(l * (1.0 - l) for l in lams)

    def tail_cutoff(eta_val: float) -> int:
        if eta_val <= 1e-12:
            raise DesignError(
                f"tail feasibility cannot be closed at c={c}: eta={eta_val}"
            )
        return max(horizon0, int(math.ceil(1.0 + 1.0 / (8.0 * eta_val**2 * a_min))))

    cutoff = tail_cutoff(eta)
    cert = DualCertificate(float(c), n, horizon0, pis, eta, mu, 0.0)
    viol = cert.max_violation(cutoff)
    if viol > 0:
        eta += viol + FEASIBILITY_SLACK
        cutoff = tail_cutoff(eta)
    z = 0.5 * c + eta * c + mu
    cert = DualCertificate(float(c), n, horizon0, pis, eta, mu, z)
    assert cert.max_violation(cutoff) <= 0.0, "certificate hardening failed"
    return cert


def converse_bound_curve(
    c_values: Sequence[float], n: int = 10, s0: int | None = None
) -> tuple[list[TradePoint], list[DualCertificate]]:
    """Outer-bound points (c/Z, 1/Z) of the limiting region along a mean grid."""
    certs = [dual_certificate(c, n=n, s0=s0) for c in c_values]
    return [cert.point() for cert in certs], certs


# ---------------------------------------------------------------------------
# Achievable-point search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchOutcome:
    dist: SizeDistribution
    point: TradePoint
    rate: float


def _project_mean_simplex(p: np.ndarray, svec: np.ndarray, c: float) -> np.ndarray | None:
    """Scale to sum 1 and repair the mean using the extreme-degree weights."""
    p = np.maximum(p, 0.0)
    if p.sum() <= 0:
        return None
    p = p / p.sum()
    lo, hi = 0, len(svec) - 1
    if lo == hi:
        return p if abs(svec[0] - c) < 1e-9 else None
    others = [i for i in range(len(svec)) if i not in (lo, hi)]
    for _ in range(20):
        r = 1.0 - sum(p[i] for i in others)
        cc = c - sum(p[i] * svec[i] for i in others)
        denom = svec[hi] - svec[lo]
        p_hi = (cc - svec[lo] * r) / denom
        p_lo = r - p_hi
        if p_lo >= -1e-12 and p_hi >= -1e-12:
            p[lo], p[hi] = max(p_lo, 0.0), max(p_hi, 0.0)
            return p
        for i in others:
            p[i] *= 0.5  # pull mass back toward the anchors and retry
    return None


def search_achievable_point(
    c: float,
    support_width: int = 2,
    restarts: int = 6,
    seed: int = 0,
    lambda_tol: float = 1e-4,
) -> SearchOutcome:
    """Best spare-degree mix of mean c found by seeded local search.

    Hill-climbs the binary rate over the mean-c probability simplex on
    supports clustered around c (near-optimal mixes concentrate within two
    or three degrees of their mean).  Warm-started from the bundled known
    mixes when c matches one.  Deterministic for a fixed seed; always
    returns a feasible point.
    """
    if c < 1:
        raise DesignError(f"mean degree must be at least 1, got c={c}")
    rng = np.random.default_rng(seed)
    hi = int(math.ceil(c))
    support = [s for s in range(max(1, hi - support_width), hi + support_width + 1)]
    if support[0] > c:
        support.insert(0, 1)
    svec = np.array(support, dtype=float)

    starts: list[np.ndarray] = []
    key = int(round(c))
    if abs(c - key) < 1e-9 and key in KNOWN_GOOD_MIXES:
        ksup, kpr, _ = KNOWN_GOOD_MIXES[key]
        merged = sorted(set(support) | set(ksup))
        support = merged
        svec = np.array(support, dtype=float)
        warm = np.zeros(len(support))
        for s, p in zip(ksup, kpr):
            warm[support.index(s)] = p
        starts.append(warm)
    base = np.zeros(len(support))
    flo = int(math.floor(c))
    if flo in support and flo + 1 in support and flo != c:
        base[support.index(flo)] = flo + 1 - c
        base[support.index(flo + 1)] = c - flo
    elif int(c) in support:
        base[support.index(int(c))] = 1.0
    starts.append(base)
    for _ in range(max(0, restarts - len(starts))):
        cand = _project_mean_simplex(rng.random(len(support)), svec, c)
        if cand is not None:
            starts.append(cand)

    def evaluate(p: np.ndarray, tol: float) -> float:
        dist = SizeDistribution.from_floats(
            [s for s, w in zip(support, p) if w > 1e-12],
            [w for w in p if w > 1e-12],
        )
        return binary_correction_rate(dist, lambda_tol=tol).value

    coarse = max(lambda_tol, 1e-3)
    best_p, best_rate = None, -math.inf
    for start in starts:
        p = start.copy()
        rate = evaluate(p, coarse)
        step = 0.08
        while step > 5e-4:
            improved = False
            for _ in range(24):
                if len(support) < 3:
                    break
                i, j, l = rng.choice(len(support), size=3, replace=False)
                direction = np.zeros(len(support))
                direction[i] = svec[j] - svec[l]
                direction[j] = svec[l] - svec[i]
                direction[l] = svec[i] - svec[j]
                nrm = np.linalg.norm(direction)
                if nrm == 0:
                    continue
                cand = p + step * direction / nrm
                if cand.min() < 0:
                    continue
                cand_rate = evaluate(cand, coarse)
                if cand_rate > rate + 1e-12:
                    p, rate, improved = cand, cand_rate, True
            if not improved:
                step *= 0.5
        if rate > best_rate:
            best_p, best_rate = p, rate

    assert best_p is not None
    final_support = [s for s, w in zip(support, best_p) if w > 1e-12]
    final_probs = [w for w in best_p if w > 1e-12]
    dist = SizeDistribution.from_floats(final_support, final_probs)
    result = binary_correction_rate(dist, lambda_tol=lambda_tol)
    top = sorted(zip(dist.support, dist.probs), key=lambda t: -t[1])[:5]
    logger.info(
        "achievable search at c=%.3g: rate %.5f, dominant degrees %s",
        c, result.value, [(s, float(p)) for s, p in top],
    )
    return SearchOutcome(dist, achievable_point(dist, result.value), result.value)
