"""Finite packing-graph representation, instance generators, and exact
independence-number oracles.

Graphs are immutable: adjacency is stored as one bitmask per vertex, which
makes independence checks during enumeration and branch-and-bound O(1)
word operations.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .errors import CapExceeded, GraphFormatError

#: Relative tolerance for angular threshold comparisons.  Thresholds are
#: open intervals; a floating-point tie must not silently add an edge.
ANGLE_RTOL = 1e-12

#: Default cap on generated vertex counts.
VERTEX_CAP = 4096

#: Default guard for the exact branch-and-bound oracle.
ALPHA_GUARD = 64


def _strictly_less(x: float, threshold: float) -> bool:
    """x < threshold, treating a relative 1e-12 tie as equality."""
    if math.isclose(x, threshold, rel_tol=ANGLE_RTOL, abs_tol=0.0):
        return False
    return x < threshold


@dataclass(frozen=True)
class Graph:
    """Finite graph with per-vertex bitmask adjacency and nonnegative weights."""

    n: int
    adj: tuple  # adj[v] = bitmask of neighbours of v
    weights: tuple
    labels: Optional[tuple] = None

    def __post_init__(self):
        if self.n < 0:
            raise GraphFormatError("negative vertex count")
        if len(self.adj) != self.n or len(self.weights) != self.n:
            raise GraphFormatError("adjacency/weight length mismatch")
        for v in range(self.n):
            if self.adj[v] >> self.n:
                raise GraphFormatError(f"neighbour of {v} out of range")
            if self.adj[v] & (1 << v):
                raise GraphFormatError(f"self-loop at vertex {v}")
            if self.weights[v] < 0:
                raise GraphFormatError(f"negative weight at vertex {v}")
        for v in range(self.n):
            for u in _bits(self.adj[v]):
                if not self.adj[u] & (1 << v):
                    raise GraphFormatError(f"asymmetric adjacency {v},{u}")

    @staticmethod
    def from_edges(n: int, edges: Iterable[tuple],
                   weights: Optional[Sequence[float]] = None,
                   labels: Optional[Sequence[str]] = None) -> "Graph":
        adj = [0] * n
        for (i, j) in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise GraphFormatError(f"edge ({i},{j}) endpoint out of range")
            if i == j:
                raise GraphFormatError(f"self-loop ({i},{i})")
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        w = tuple(float(x) for x in weights) if weights is not None else (1.0,) * n
        lb = tuple(labels) if labels is not None else None
        return Graph(n, tuple(adj), w, lb)

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i] & (1 << j))

    def degree(self, v: int) -> int:
        return bin(self.adj[v]).count("1")

    def edges(self):
        for v in range(self.n):
            for u in _bits(self.adj[v]):
                if u > v:
                    yield (v, u)

    def num_edges(self) -> int:
        return sum(self.degree(v) for v in range(self.n)) // 2

    def is_independent_mask(self, mask: int) -> bool:
        m = mask
        while m:
            v = (m & -m).bit_length() - 1
            if self.adj[v] & mask:
                return False
            m &= m - 1
        return True

    def is_independent(self, vertices: Iterable[int]) -> bool:
        mask = 0
        for v in vertices:
            mask |= 1 << v
        return self.is_independent_mask(mask)

    def weight_of(self, vertices: Iterable[int]) -> float:
        return sum(self.weights[v] for v in vertices)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class AlphaResult:
    """Exact (weighted) independence number with an optimal witness."""

    value: float
    witness: tuple


_EDGE_PAIR = re.compile(r"\((\d+)\s*,\s*(\d+)\)")
_WEIGHT = re.compile(r"^w(\d+)=([-0-9.eE+]+)$")


def load_graph(text: str) -> Graph:
    """Parse an edge-list document.

    Statements are separated by newlines or ';'.  Accepted forms:
    ``n=<int>``, ``w<i>=<float>``, ``edge <i> <j>``, and
    ``edges: (i,j) (k,l) ...``.  ``#`` starts a comment.  Anything else is
    rejected with the offending line number.
    """
    n = None
    weights = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines() or [text], start=1):
        line = raw.split("#", 1)[0]
        for stmt in line.split(";"):
            stmt = stmt.strip()
            if not stmt:
                continue
            if stmt.startswith("n="):
                try:
                    n = int(stmt[2:])
                except ValueError:
                    raise GraphFormatError(f"bad vertex count {stmt!r}", lineno)
                if n < 0:
                    raise GraphFormatError("negative vertex count", lineno)
            elif _WEIGHT.match(stmt):
                m = _WEIGHT.match(stmt)
                i = int(m.group(1))
                w = float(m.group(2))
                if w < 0:
                    raise GraphFormatError(f"negative weight w{i}={w}", lineno)
                weights[i] = w
            elif stmt.startswith("edge "):
                parts = stmt.split()
                if len(parts) != 3:
                    raise GraphFormatError(f"bad edge statement {stmt!r}", lineno)
                try:
                    i, j = int(parts[1]), int(parts[2])
                except ValueError:
                    raise GraphFormatError(f"bad edge statement {stmt!r}", lineno)
                edges.append((i, j, lineno))
            elif stmt.startswith("edges:"):
                body = stmt[len("edges:"):]
                stripped = _EDGE_PAIR.sub("", body).strip()
                if stripped:
                    raise GraphFormatError(f"bad edge list {body!r}", lineno)
                for m in _EDGE_PAIR.finditer(body):
                    edges.append((int(m.group(1)), int(m.group(2)), lineno))
            else:
                raise GraphFormatError(f"unknown directive {stmt!r}", lineno)
    if n is None:
        raise GraphFormatError("missing 'n=<int>' declaration")
    for i in weights:
        if not 0 <= i < n:
            raise GraphFormatError(f"weight index {i} out of range")
    w = [weights.get(i, 1.0) for i in range(n)]
    plain = []
    for (i, j, lineno) in edges:
        if not (0 <= i < n and 0 <= j < n):
            raise GraphFormatError(f"edge ({i},{j}) endpoint out of range", lineno)
        if i == j:
            raise GraphFormatError(f"self-loop ({i},{i})", lineno)
        plain.append((i, j))
    return Graph.from_edges(n, plain, weights=w)


def generate_cycle(n: int) -> Graph:
    if n < 3:
        raise GraphFormatError(f"cycle needs n >= 3, got {n}")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def generate_complete(n: int) -> Graph:
    return Graph.from_edges(n, list(combinations(range(n), 2)))


def generate_empty(n: int) -> Graph:
    return Graph.from_edges(n, [])


def generate_petersen() -> Graph:
    """Petersen graph as the Kneser graph K(5,2)."""
    verts = list(combinations(range(5), 2))
    edges = []
    for a, b in combinations(range(10), 2):
        if not set(verts[a]) & set(verts[b]):
            edges.append((a, b))
    labels = ["".join(map(str, v)) for v in verts]
    return Graph.from_edges(10, edges, labels=labels)


def generate_code_graph(q: int, n: int, d: int, cap: int = VERTEX_CAP) -> Graph:
    """Words of F_q^n, adjacent iff Hamming distance lies in the open (0, d)."""
    if q < 2 or n < 1 or d < 1:
        raise GraphFormatError(f"bad code parameters q={q} n={n} d={d}")
    size = q ** n
    if size > cap:
        raise CapExceeded(f"q^n = {size} exceeds vertex cap {cap}")
    words = []

    def expand(word):
        if len(word) == n:
            words.append(tuple(word))
            return
        for a in range(q):
            expand(word + [a])

    expand([])
    edges = []
    for a, b in combinations(range(size), 2):
        dist = sum(x != y for x, y in zip(words[a], words[b]))
        if 0 < dist < d:  # exact integer comparison
            edges.append((a, b))
    labels = ["".join(map(str, w)) for w in words]
    return Graph.from_edges(size, edges, labels=labels)


def generate_circle_code(m: int, theta: float, cap: int = VERTEX_CAP) -> Graph:
    """m equally spaced points on the circle, adjacent iff angular distance
    is strictly inside (0, theta).  A finite induced subgraph of the
    spherical-code graph on S^1."""
    if m < 1:
        raise GraphFormatError(f"need m >= 1, got {m}")
    if m > cap:
        raise CapExceeded(f"m = {m} exceeds vertex cap {cap}")
    if not 0.0 < theta <= math.pi:
        raise GraphFormatError(f"theta must be in (0, pi], got {theta}")
    edges = []
    for a, b in combinations(range(m), 2):
        k = min((b - a) % m, (a - b) % m)
        dist = 2.0 * math.pi * k / m
        if k > 0 and _strictly_less(dist, theta):
            edges.append((a, b))
    return Graph.from_edges(m, edges)


def generate_cap_graph(m: int, theta1: float, theta2: float,
                       cap: int = VERTEX_CAP) -> Graph:
    """Two families of circular caps centred at m equally spaced points.

    Vertex (x, i) carries weight 2*theta_i (arc length of the cap); two
    caps are adjacent iff their centres are angularly closer than
    theta_i + theta_j (open interval), i.e. the open caps overlap.
    """
    if m < 1:
        raise GraphFormatError(f"need m >= 1, got {m}")
    if 2 * m > cap:
        raise CapExceeded(f"2m = {2 * m} exceeds vertex cap {cap}")
    if theta1 <= 0 or theta2 <= 0:
        raise GraphFormatError("cap angles must be positive")
    thetas = (theta1, theta2)
    verts = [(x, i) for x in range(m) for i in (0, 1)]
    edges = []
    for a, b in combinations(range(len(verts)), 2):
        (xa, ia), (xb, ib) = verts[a], verts[b]
        k = min((xb - xa) % m, (xa - xb) % m)
        dist = 2.0 * math.pi * k / m
        if _strictly_less(dist, thetas[ia] + thetas[ib]):
            edges.append((a, b))
    weights = [2.0 * thetas[i] for (_, i) in verts]
    labels = [f"p{x}t{i + 1}" for (x, i) in verts]
    return Graph.from_edges(len(verts), edges, weights=weights, labels=labels)


def generate_random(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p) with a fixed seed (reproducible test instances)."""
    rng = random.Random(seed)
    edges = [(i, j) for i, j in combinations(range(n), 2) if rng.random() < p]
    return Graph.from_edges(n, edges)


def alpha_exact(g: Graph, weighted: bool = False,
                guard: int = ALPHA_GUARD) -> AlphaResult:
    """Exact maximum (weighted) independent set by branch and bound.

    Branches on a maximum-degree vertex of the residual graph; prunes with
    the total remaining weight.  Guarded to n <= guard vertices.
    """
    if g.n > guard:
        raise CapExceeded(f"alpha_exact guard: n = {g.n} > {guard}")
    n = g.n
    w = g.weights if weighted else (1,) * n
    full = (1 << n) - 1

    # greedy start for a decent incumbent
    order = sorted(range(n), key=lambda v: -w[v])
    used = 0
    greedy = []
    for v in order:
        if not used & (1 << v):
            greedy.append(v)
            used |= g.adj[v] | (1 << v)
    best_w = sum(w[v] for v in greedy)
    best_set = greedy

    def residual_weight(mask):
        return sum(w[v] for v in _bits(mask))

    def branch(avail, cur_w, cur):
        nonlocal best_w, best_set
        if cur_w > best_w:
            best_w, best_set = cur_w, list(cur)
        if not avail or cur_w + residual_weight(avail) <= best_w:
            return
        # max-degree vertex within the residual graph
        pick, pick_deg = -1, -1
        for v in _bits(avail):
            deg = bin(g.adj[v] & avail).count("1")
            if deg > pick_deg or (deg == pick_deg and w[v] > w[pick]):
                pick, pick_deg = v, deg
        cur.append(pick)
        branch(avail & ~(g.adj[pick] | (1 << pick)), cur_w + w[pick], cur)
        cur.pop()
        branch(avail & ~(1 << pick), cur_w, cur)

    branch(full, 0, [])
    witness = tuple(sorted(best_set))
    value = best_w if weighted else int(best_w)
    assert g.is_independent(witness)
    return AlphaResult(value=value, witness=witness)


def local_subgraph(g: Graph, e: int):
    """Induced subgraph on the non-neighbours of e (excluding e itself).

    Returns (subgraph, mapping) where mapping[new_index] = old vertex.
    """
    if not 0 <= e < g.n:
        raise GraphFormatError(f"vertex {e} out of range")
    keep = [v for v in range(g.n) if v != e and not g.has_edge(e, v)]
    index = {v: i for i, v in enumerate(keep)}
    edges = [(index[a], index[b]) for a, b in g.edges()
             if a in index and b in index]
    weights = [g.weights[v] for v in keep]
    labels = [g.labels[v] for v in keep] if g.labels else None
    sub = Graph.from_edges(len(keep), edges, weights=weights, labels=labels)
    return sub, tuple(keep)
