"""Bipartite redundancy designs: data model, constructors, composition.

A design wires ``k`` primary nodes (functional elements that may turn out
defective) to ``m`` redundant nodes (spares).  Each spare is connected to a
subset of the primaries.  The design corrects ``t`` defects over a
``q``-symbol alphabet if, for every q-ary labeling of the primaries, the
spares can be labeled so that each primary sees at least ``t`` spares
carrying its own label.  Exhaustive verification of that property lives in
:mod:`defect_designs.oracle`; this module owns the graphs themselves.

Conventions
-----------
* Primaries are indexed ``0..k-1``; a redundant node is just its neighbor
  set, stored as a sorted tuple of primary indices.
* The list of neighbor sets is kept sorted, so two designs are equal
  exactly when their neighbor-set multisets agree.  Duplicate neighbor
  sets are allowed (merging produces them); duplicate indices inside one
  set are rejected.
* The alphabet size ``q`` is not part of a design: the same graph is
  evaluated against any alphabet.

All values are immutable and safe to share across threads.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, NamedTuple, Sequence

from .errors import DesignError

NeighborSet = tuple[int, ...]
#: A q-ary labeling is a plain tuple of symbols in ``[0, q)``.
Labeling = tuple[int, ...]


class TradePoint(NamedTuple):
    """A (wiring complexity, redundancy) pair.

    ``epsilon`` is edges per primary node per corrected defect, ``rho`` is
    redundant nodes per primary node per corrected defect.  Coordinates may
    be exact :class:`~fractions.Fraction` values or floats depending on how
    the point was produced.
    """

    epsilon: object
    rho: object


@dataclass(frozen=True)
class BipartiteDesign:
    """A bipartite design on ``k`` primaries with one tuple per spare."""

    k: int
    redundant: tuple[NeighborSet, ...]

    def __init__(self, k: int, redundant: Iterable[Iterable[int]]):
        if k < 1:
            raise DesignError(f"need at least one primary node, got k={k}")
        sets = []
        for raw in redundant:
            nodes = tuple(raw)
            if not nodes:
                raise DesignError("empty neighbor set")
            if len(set(nodes)) != len(nodes):
                raise DesignError(f"duplicate primary index in neighbor set {nodes}")
            if min(nodes) < 0 or max(nodes) >= k:
                raise DesignError(f"neighbor index out of range [0,{k}) in {nodes}")
            sets.append(tuple(sorted(nodes)))
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "redundant", tuple(sorted(sets)))

    @property
    def m(self) -> int:
        """Number of redundant nodes."""
        return len(self.redundant)

    @property
    def num_edges(self) -> int:
        return sum(len(s) for s in self.redundant)

    def primary_degrees(self) -> list[int]:
        deg = [0] * self.k
        for s in self.redundant:
            for i in s:
                deg[i] += 1
        return deg

    def primary_neighbors(self) -> list[list[int]]:
        """For each primary, the indices of redundant nodes adjacent to it."""
        nbrs: list[list[int]] = [[] for _ in range(self.k)]
        for j, s in enumerate(self.redundant):
            for i in s:
                nbrs[i].append(j)
        return nbrs

    def relabel_primaries(self, perm: Sequence[int]) -> "BipartiteDesign":
        """Design with primary ``i`` renamed to ``perm[i]``."""
        if sorted(perm) != list(range(self.k)):
            raise DesignError("perm must be a permutation of range(k)")
        return BipartiteDesign(self.k, [[perm[i] for i in s] for s in self.redundant])

    def to_json_dict(self) -> dict:
        return {"k": self.k, "redundant": [list(s) for s in self.redundant]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "BipartiteDesign":
        try:
            k = int(data["k"])
            redundant = data["redundant"]
        except (KeyError, TypeError) as exc:
            raise DesignError(f"malformed design data: {exc}") from exc
        return cls(k, redundant)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"BipartiteDesign(k={self.k}, m={self.m}, E={self.num_edges})"


def save_design(design: BipartiteDesign, path: str | os.PathLike) -> None:
    """Write a design to ``path`` atomically (tmp file + rename)."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(design.to_json_dict(), fh)
        fh.write("\n")
    os.replace(tmp, path)


def load_design(path: str | os.PathLike) -> BipartiteDesign:
    with open(path, "r", encoding="utf-8") as fh:
        return BipartiteDesign.from_json_dict(json.load(fh))


def validate_labeling(symbols: Sequence[int], q: int, length: int) -> Labeling:
    """Check a q-ary labeling of the given length and return it as a tuple."""
    if q < 2:
        raise DesignError(f"alphabet size must be at least 2, got q={q}")
    lab = tuple(int(x) for x in symbols)
    if len(lab) != length:
        raise DesignError(f"labeling has length {len(lab)}, expected {length}")
    if any(x < 0 or x >= q for x in lab):
        raise DesignError(f"labeling symbols must lie in [0,{q})")
    return lab


# ---------------------------------------------------------------------------
# Canonical constructors
# ---------------------------------------------------------------------------

def make_repetition(k: int, t: int) -> BipartiteDesign:
    """k disjoint stars: spare (i, j) is wired only to primary i.

    Corrects t defects over any alphabet and is the unique design shape with
    both metrics equal to 1.
    """
    if k < 1 or t < 1:
        raise DesignError(f"repetition design needs k>=1 and t>=1, got ({k},{t})")
    return BipartiteDesign(k, [[i] for i in range(k) for _ in range(t)])


def make_complete(k: int, r: int) -> BipartiteDesign:
    """Complete bipartite design: every one of r spares sees all k primaries."""
    if k < 1 or r < 1:
        raise DesignError(f"complete design needs k>=1 and r>=1, got ({k},{r})")
    return BipartiteDesign(k, [range(k) for _ in range(r)])


def make_subset(k: int, sizes: Iterable[int]) -> BipartiteDesign:
    """Merge of full subset blocks: one spare per s-subset, per entry of ``sizes``.

    ``sizes`` is a multiset; repeating a size repeats its block.
    """
    sizes = list(sizes)
    if not sizes:
        raise DesignError("subset design needs at least one block size")
    sets: list[tuple[int, ...]] = []
    for s in sizes:
        if s < 1 or s > k:
            raise DesignError(f"block size {s} outside [1,{k}]")
        sets.extend(itertools.combinations(range(k), s))
    return BipartiteDesign(k, sets)


def hamming_block() -> BipartiteDesign:
    """The 9-edge design on 3 primaries and 4 spares (subset sizes {2,3})."""
    return make_subset(3, [2, 3])


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------

def copy_designs(designs: Sequence[BipartiteDesign]) -> BipartiteDesign:
    """Disjoint union: k, m and E all add; per-design correction is kept."""
    if not designs:
        raise DesignError("copy of an empty design list is undefined")
    sets: list[list[int]] = []
    offset = 0
    for g in designs:
        sets.extend([i + offset for i in s] for s in g.redundant)
        offset += g.k
    return BipartiteDesign(offset, sets)


def merge_designs(designs: Sequence[BipartiteDesign]) -> BipartiteDesign:
    """Identify the primary nodes of designs with equal k; spares concatenate.

    Correction capability is super-additive: the merge corrects at least the
    sum of what its factors correct.
    """
    if not designs:
        raise DesignError("merge of an empty design list is undefined")
    k = designs[0].k
    if any(g.k != k for g in designs):
        raise DesignError("merge requires all designs to share the same k")
    sets: list[NeighborSet] = []
    for g in designs:
        sets.extend(g.redundant)
    return BipartiteDesign(k, sets)


def symmetrize(design: BipartiteDesign, max_nodes: int = 1_000_000) -> BipartiteDesign:
    """Merge all k! primary-permuted copies of a design.

    The result is permutation invariant with m*k! spares and E*k! edges, and
    corrects at least k! times as many defects.  Rejected when k!*m exceeds
    ``max_nodes`` (practical bound k <= 5).
    """
    total = factorial(design.k) * design.m
    if total > max_nodes:
        raise DesignError(
            f"symmetrize would create {total} redundant nodes (budget {max_nodes})"
        )
    copies = [
        design.relabel_primaries(perm)
        for perm in itertools.permutations(range(design.k))
    ]
    return merge_designs(copies)


def is_permutation_invariant(
    design: BipartiteDesign,
) -> tuple[bool, dict[int, int] | None]:
    """Whether every s-subset of primaries appears equally often per degree s.

    Returns ``(True, {s: n_s})`` with the per-degree multiplicities, or
    ``(False, None)``.  Permutation-invariant designs are exactly the merges
    of full subset blocks.
    """
    by_size: dict[int, dict[NeighborSet, int]] = {}
    for s in design.redundant:
        by_size.setdefault(len(s), {}).setdefault(s, 0)
        by_size[len(s)][s] += 1
    witness: dict[int, int] = {}
    for size, counts in sorted(by_size.items()):
        expected = comb(design.k, size)
        if len(counts) != expected:
            return False, None
        mults = set(counts.values())
        if len(mults) != 1:
            return False, None
        witness[size] = mults.pop()
    return True, witness


def metrics(design: BipartiteDesign, t: int) -> TradePoint:
    """Exact (E/(kt), m/(kt)) for a design treated as t-defect correcting."""
    if t < 1:
        raise DesignError(f"defect count must be positive, got t={t}")
    denom = design.k * t
    return TradePoint(Fraction(design.num_edges, denom), Fraction(design.m, denom))
