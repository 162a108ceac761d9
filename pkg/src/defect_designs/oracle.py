"""Exact ground-truth verification of defect-correcting designs.

``best_redundant_labeling`` maximizes, over all q^m labelings of the
spares, the minimum over primaries of same-label neighbors; the max over
labelings is explored depth-first with a sound optimistic bound
(remaining spares adjacent to a primary can all still match it), so the
result is exact.  ``max_correctable_defects`` minimizes that over primary
labelings, enumerated up to alphabet-symbol permutation.

Determinism: spare labelings are scanned in lexicographic order and ties
broken by the first maximizer.  Spares with identical neighborhoods are
interchangeable, so their labels may be forced non-decreasing in index
order without losing the lexicographically first maximizer (swapping two
out-of-order labels of interchangeable spares preserves the value and
lowers the labeling lexicographically - the first maximizer is already in
that form).

Searches never return an approximate answer: exceeding the evaluation
budget raises :class:`~defect_designs.errors.BudgetExceededError`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .designs import BipartiteDesign, Labeling, make_complete, validate_labeling
from .errors import BudgetExceededError, DesignError, InfeasibleDesignError

#: Default cap on search-tree expansions for a single oracle invocation.
DEFAULT_BUDGET = 20_000_000


@dataclass(frozen=True)
class CorrectionCertificate:
    """Achieved defect count plus one witness spare labeling per primary labeling."""

    t: int
    witnesses: dict[Labeling, Labeling]


class _Budget:
    __slots__ = ("limit", "used")

    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise BudgetExceededError(
                f"oracle budget exceeded ({self.used} > {self.limit} evaluations)"
            )


def check_labeling(
    design: BipartiteDesign,
    primary: Labeling,
    redundant_labels: Labeling,
    q: int,
    t: int,
) -> bool:
    """Does this spare labeling give every primary >= t same-label neighbors?"""
    primary = validate_labeling(primary, q, design.k)
    redundant_labels = validate_labeling(redundant_labels, q, design.m)
    counts = [0] * design.k
    for j, nodes in enumerate(design.redundant):
        y = redundant_labels[j]
        for i in nodes:
            if primary[i] == y:
                counts[i] += 1
    return min(counts, default=0) >= t


def _search(
    design: BipartiteDesign,
    primary: Labeling,
    q: int,
    budget: _Budget,
    stop_at: int | None = None,
) -> tuple[int, Labeling | None]:
    """Maximize min same-label neighbors over spare labelings.

    Returns ``(value, witness)``.  The value is exact unless ``stop_at`` is
    given and the search found ``value >= stop_at``, in which case it stops
    early (the witness still achieves the returned value).
    """
    m, k = design.m, design.k
    sets = design.redundant
    counts = [0] * k
    if m == 0:
        return (min(counts) if k else 0), ()

    # incr[j][y]: primaries that gain a match when spare j takes label y.
    incr = [
        [[i for i in nodes if primary[i] == y] for y in range(q)] for nodes in sets
    ]
    # suffix[j][i]: spares with index >= j adjacent to primary i.
    suffix = [[0] * k for _ in range(m + 1)]
    for j in range(m - 1, -1, -1):
        row = list(suffix[j + 1])
        for i in sets[j]:
            row[i] += 1
        suffix[j] = row
    same_as_prev = [j > 0 and sets[j] == sets[j - 1] for j in range(m)]

    labels = [0] * m
    best = -1
    best_wit: tuple[int, ...] | None = None
    stopped = False

    def rec(j: int) -> None:
        nonlocal best, best_wit, stopped
        if j == m:
            v = min(counts)
            if v > best:
                best = v
                best_wit = tuple(labels)
                if stop_at is not None and best >= stop_at:
                    stopped = True
            return
        sj = suffix[j]
        bound = min(c + s for c, s in zip(counts, sj))
        if bound <= best:
            return
        lower = labels[j - 1] if same_as_prev[j] else 0
        budget.spend(q - lower)
        for y in range(lower, q):
            inc = incr[j][y]
            for i in inc:
                counts[i] += 1
            labels[j] = y
            rec(j + 1)
            for i in inc:
                counts[i] -= 1
            if stopped:
                return

    rec(0)
    return best, best_wit


def best_redundant_labeling(
    design: BipartiteDesign, primary, q: int, budget: int | None = None
) -> tuple[int, Labeling]:
    """Exact best spare labeling for one primary labeling.

    Returns the maximal achievable min same-label neighbor count together
    with its lexicographically first maximizer.
    """
    primary = validate_labeling(primary, q, design.k)
    b = _Budget(DEFAULT_BUDGET if budget is None else budget)
    value, witness = _search(design, primary, q, b)
    assert witness is not None
    return value, witness


def _canonical_primary_labelings(k: int, q: int) -> list[Labeling]:
    """Primary labelings up to alphabet-symbol permutation.

    Restricted growth strings with fewer than q distinct values; the
    correction value is invariant under relabeling the alphabet, so these
    representatives suffice for the min over all q^k labelings.  Ordered
    with many-symbol labelings first: they are the likeliest to fail, which
    lets callers short-circuit sooner.
    """
    out: list[tuple[int, ...]] = []

    def rec(prefix: list[int], mx: int) -> None:
        if len(prefix) == k:
            out.append(tuple(prefix))
            return
        for v in range(min(mx + 1, q - 1) + 1):
            prefix.append(v)
            rec(prefix, max(mx, v))
            prefix.pop()

    rec([], -1)
    out.sort(key=lambda w: (-len(set(w)), w))
    return out


def max_correctable_defects(
    design: BipartiteDesign, q: int, budget: int | None = None
) -> int:
    """Exact maximum t such that the design corrects t defects; 0 if none."""
    if q < 2:
        raise DesignError(f"alphabet size must be at least 2, got q={q}")
    b = _Budget(DEFAULT_BUDGET if budget is None else budget)
    cur: int | None = None
    for w in _canonical_primary_labelings(design.k, q):
        value, _ = _search(design, w, q, b, stop_at=cur)
        if cur is None or value < cur:
            cur = value
        if cur == 0:
            break
    assert cur is not None
    return cur


def is_defect_correcting(
    design: BipartiteDesign, q: int, t: int, budget: int | None = None
) -> bool:
    """Whether the design corrects t defects; stops at the first failing labeling."""
    if t < 1:
        raise DesignError(f"defect count must be positive, got t={t}")
    if q < 2:
        raise DesignError(f"alphabet size must be at least 2, got q={q}")
    b = _Budget(DEFAULT_BUDGET if budget is None else budget)
    for w in _canonical_primary_labelings(design.k, q):
        value, _ = _search(design, w, q, b, stop_at=t)
        if value < t:
            return False
    return True


def certify(
    design: BipartiteDesign, q: int, budget: int | None = None
) -> CorrectionCertificate:
    """Full certificate: the exact t plus a witness for every primary labeling."""
    t = max_correctable_defects(design, q, budget=budget)
    b = _Budget(DEFAULT_BUDGET if budget is None else budget)
    witnesses: dict[Labeling, Labeling] = {}
    for w in itertools.product(range(q), repeat=design.k):
        value, wit = _search(design, w, q, b)
        assert wit is not None and value >= t
        witnesses[w] = wit
    return CorrectionCertificate(t, witnesses)


# ---------------------------------------------------------------------------
# Minimal-edge search
# ---------------------------------------------------------------------------

def canonical_form(design: BipartiteDesign) -> BipartiteDesign:
    """Lexicographically minimal primary relabeling; equal iff isomorphic."""
    k = design.k
    best = None
    for perm in itertools.permutations(range(k)):
        cand = tuple(sorted(tuple(sorted(perm[i] for i in s)) for s in design.redundant))
        if best is None or cand < best:
            best = cand
    return BipartiteDesign(k, best if best is not None else ())


@dataclass
class MinEdgeSearchResult:
    min_edges: int
    witnesses: list[BipartiteDesign]  # canonical representatives; first is lex-least
    examined: int  # designs that reached the oracle


def _mask_setup(k: int):
    """Nonempty subsets of [k] as bitmasks ordered by (size, mask)."""
    masks = sorted(range(1, 1 << k), key=lambda x: (bin(x).count("1"), x))
    index_of = {x: i for i, x in enumerate(masks)}
    sizes = [bin(x).count("1") for x in masks]
    bits = [[i for i in range(k) if x >> i & 1] for x in masks]

    def permute_mask(mask: int, perm) -> int:
        out = 0
        for i in range(k):
            if mask >> i & 1:
                out |= 1 << perm[i]
        return out

    maps = []
    for perm in itertools.permutations(range(k)):
        if perm == tuple(range(k)):
            continue
        maps.append([index_of[permute_mask(x, perm)] for x in masks])
    ptable = np.array(maps, dtype=np.int32) if maps else np.empty((0, len(masks)), np.int32)
    return masks, sizes, bits, ptable


def _canonical_children(seq: list[int], start: int, n_masks: int, ptable) -> list[int]:
    """Candidates x >= start for which seq+[x] stays a lex-min orbit representative.

    Relies on prefixes of canonical (non-decreasing, lex-min in orbit)
    sequences being canonical themselves, so a rejected child prunes its
    whole subtree.
    """
    cands = np.arange(start, n_masks, dtype=np.int32)
    if ptable.shape[0] == 0:
        return list(range(start, n_masks))
    j = len(seq)
    P = ptable.shape[0]
    big = np.empty((len(cands), P, j + 1), dtype=np.int32)
    if j:
        big[:, :, :j] = ptable[:, seq][None, :, :]
    big[:, :, j] = ptable[:, cands].T[:, :]
    big.sort(axis=2)
    targets = np.empty((len(cands), j + 1), dtype=np.int32)
    targets[:, :j] = seq
    targets[:, j] = cands
    diff = big - targets[:, None, :]
    nz = diff != 0
    first = nz.argmax(axis=2)
    vals = np.take_along_axis(diff, first[..., None], axis=2)[..., 0]
    smaller = nz.any(axis=2) & (vals < 0)
    bad = smaller.any(axis=1)
    return [int(x) for x in cands[~bad]]


def _enumerate_canonical_designs(k: int, m: int, t: int):
    """All designs on (k, m) up to primary permutation, bucketed by edge count.

    Prunes branches where some primary can no longer reach degree t.
    """
    masks, sizes, bits, ptable = _mask_setup(k)
    n_masks = len(masks)
    buckets: dict[int, list[tuple[int, ...]]] = {}
    seq: list[int] = []
    deg = [0] * k

    def rec(start: int, cur_e: int) -> None:
        rem = m - len(seq)
        if any(d + rem < t for d in deg):
            return
        if rem == 0:
            buckets.setdefault(cur_e, []).append(tuple(seq))
            return
        for idx in _canonical_children(seq, start, n_masks, ptable):
            seq.append(idx)
            for i in bits[idx]:
                deg[i] += 1
            rec(idx, cur_e + sizes[idx])
            for i in bits[idx]:
                deg[i] -= 1
            seq.pop()

    rec(0, 0)
    return masks, bits, buckets


def _degree_t_spares_disjoint(design: BipartiteDesign, t: int) -> bool:
    """Any two primaries of degree exactly t must not share a spare."""
    deg = design.primary_degrees()
    for nodes in design.redundant:
        if sum(1 for i in nodes if deg[i] == t) > 1:
            return False
    return True


def search_min_edges(
    k: int,
    m: int,
    t: int,
    q: int,
    *,
    budget: int | None = None,
    all_witnesses: bool = False,
    max_k: int = 5,
    max_m: int = 8,
    max_q: int = 4,
) -> MinEdgeSearchResult:
    """Fewest edges of any t-defect correcting design on (k, m) for alphabet q.

    Enumerates neighbor-set multisets up to primary permutation in
    increasing edge count (adding edges never destroys correctability, so
    the first feasible count is minimal) and checks each survivor of the
    cheap necessary conditions with the exact oracle.  With
    ``all_witnesses`` the full bucket at the optimum is scanned and every
    non-isomorphic optimal design is returned.
    """
    if min(k, m, t) < 1 or q < 2:
        raise DesignError(f"bad search parameters (k={k}, m={m}, t={t}, q={q})")
    if k > max_k or m > max_m or q > max_q:
        raise DesignError(
            f"search parameters exceed the exhaustive budget "
            f"(k<={max_k}, m<={max_m}, q<={max_q}); pass larger limits to override"
        )
    if (k > q and m < q * t) or (k <= q and m < k * t):
        raise InfeasibleDesignError(
            f"infeasible: no design on k={k}, m={m} corrects t={t} for q={q}"
        )
    if not is_defect_correcting(make_complete(k, m), q, t, budget=budget):
        raise InfeasibleDesignError(
            f"infeasible: even the complete design on (k={k}, m={m}) "
            f"does not correct t={t} for q={q}"
        )

    masks, bits, buckets = _enumerate_canonical_designs(k, m, t)
    examined = 0
    for e in sorted(buckets):
        hits: list[BipartiteDesign] = []
        for seq in buckets[e]:
            design = BipartiteDesign(k, [bits[idx] for idx in seq])
            if not _degree_t_spares_disjoint(design, t):
                continue
            examined += 1
            if is_defect_correcting(design, q, t, budget=budget):
                hits.append(design)
                if not all_witnesses:
                    return MinEdgeSearchResult(e, hits, examined)
        if hits:
            return MinEdgeSearchResult(e, hits, examined)
    raise AssertionError("unreachable: the complete design is in the enumeration")
