"""Enumeration of independent sets up to a level t, with the canonical
ordering and the union structure that defines moment-matrix entries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapExceeded, GraphFormatError
from .graphs import Graph

#: Default cap on the number of enumerated sets.
BASIS_CAP = 20000

#: Marker for a blocked union-table entry (the union spans an edge).
BLOCKED = -1


@dataclass(frozen=True)
class IndepSetBasis:
    """Ordered enumeration of all independent sets with at most t vertices.

    Sets are ordered by cardinality, then lexicographically on the sorted
    vertex lists; position 0 is always the empty set.  ``strata[k]`` is the
    half-open index range of the sets of size exactly k.
    """

    graph: Graph
    t: int
    sets: tuple          # tuple of sorted vertex tuples
    masks: tuple         # bitmask per set
    index_of: dict = field(repr=False)
    strata: tuple        # (start, end) per cardinality 0..t

    def __len__(self):
        return len(self.sets)

    def dump(self) -> str:
        """One set per line in canonical order, e.g. '{}' and '{0 2}'."""
        return "\n".join("{" + " ".join(map(str, s)) + "}" for s in self.sets)


@dataclass(frozen=True)
class UnionTable:
    """For level-t basis positions (J, J'): index of J | J' in the level-2t
    basis, or BLOCKED when the union is not independent."""

    basis_t: IndepSetBasis
    basis_2t: IndepSetBasis
    entries: np.ndarray  # (|I_t|, |I_t|) int array

    def entry(self, i: int, j: int) -> int:
        return int(self.entries[i, j])


def enumerate_independent_sets(g: Graph, t: int,
                               cap: int = BASIS_CAP) -> IndepSetBasis:
    """Enumerate I_t level by level.

    Each size-(k+1) set extends a size-k set by a vertex larger than its
    maximum, keeping independence via one bitmask intersection, so every
    set is produced exactly once and the ordering is cardinality-major,
    lexicographic within each stratum.
    """
    if t < 0:
        raise GraphFormatError(f"level must be >= 0, got {t}")
    sets = [()]
    masks = [0]
    strata = [(0, 1)]
    level = [((), 0)]  # (vertices, mask) of current cardinality
    for k in range(1, t + 1):
        start = len(sets)
        nxt = []
        for verts, mask in level:
            lo = verts[-1] + 1 if verts else 0
            for v in range(lo, g.n):
                if g.adj[v] & mask:
                    continue
                nxt.append((verts + (v,), mask | (1 << v)))
        nxt.sort(key=lambda e: e[0])
        for verts, mask in nxt:
            sets.append(verts)
            masks.append(mask)
            if len(sets) > cap:
                raise CapExceeded(
                    f"basis cap {cap} exceeded while enumerating sets of size {k}")
        strata.append((start, len(sets)))
        level = nxt
        if not nxt:
            strata.extend((len(sets), len(sets)) for _ in range(k + 1, t + 1))
            break
    index_of = {m: i for i, m in enumerate(masks)}
    return IndepSetBasis(graph=g, t=t, sets=tuple(sets), masks=tuple(masks),
                         index_of=index_of, strata=tuple(strata[:t + 1]))


def build_union_table(basis_t: IndepSetBasis,
                      basis_2t: IndepSetBasis) -> UnionTable:
    if basis_t.graph != basis_2t.graph:
        raise GraphFormatError("union table: bases come from different graphs")
    if basis_2t.t != 2 * basis_t.t:
        raise GraphFormatError(
            f"union table: levels {basis_t.t} and {basis_2t.t} are not t, 2t")
    size = len(basis_t)
    entries = np.full((size, size), BLOCKED, dtype=np.int64)
    masks = basis_t.masks
    lookup = basis_2t.index_of
    for i in range(size):
        for j in range(i, size):
            # |J u J'| <= 2t always; the union appears in the level-2t basis
            # exactly when it is independent.
            idx = lookup.get(masks[i] | masks[j], BLOCKED)
            entries[i, j] = idx
            entries[j, i] = idx
    return UnionTable(basis_t=basis_t, basis_2t=basis_2t, entries=entries)


def stratum_indicator(basis: IndepSetBasis, k: int) -> np.ndarray:
    """0/1 vector over the basis selecting the sets of size exactly k."""
    if k > basis.t or k < 0:
        raise GraphFormatError(f"stratum {k} outside level range 0..{basis.t}")
    vec = np.zeros(len(basis))
    start, end = basis.strata[k]
    vec[start:end] = 1.0
    return vec
