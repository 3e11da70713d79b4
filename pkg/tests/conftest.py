"""Shared independent oracles for the test suite.

These deliberately avoid the library's own algorithms: independence is
re-derived from edge lists and maxima come from exhaustive subset
enumeration, so agreement with the package is a real cross-check.
"""

from itertools import combinations

import pytest


def edge_set(g):
    """Frozenset of frozenset edges recovered from the adjacency masks."""
    out = set()
    for i in range(g.n):
        for j in range(i + 1, g.n):
            if g.adj[i] >> j & 1:
                out.add(frozenset((i, j)))
    return out


def is_independent_bruteforce(g, vertices):
    vs = list(vertices)
    return all(frozenset((a, b)) not in edge_set(g)
               for a, b in combinations(vs, 2))


def all_independent_sets(g, max_size=None):
    """Every independent set, by exhaustive enumeration."""
    limit = g.n if max_size is None else max_size
    edges = edge_set(g)
    out = [frozenset()]
    for k in range(1, limit + 1):
        for combo in combinations(range(g.n), k):
            if all(frozenset(p) not in edges for p in combinations(combo, 2)):
                out.append(frozenset(combo))
    return out


def alpha_bruteforce(g, weighted=False):
    best = 0.0
    for s in all_independent_sets(g):
        val = sum(g.weights[v] for v in s) if weighted else len(s)
        best = max(best, val)
    return best


@pytest.fixture(scope="session")
def petersen():
    from packbound import generate_petersen
    return generate_petersen()


def make_random_sdp(seed, n=6, m=4):
    """Random strictly feasible SDP with a known optimum.

    Primal and dual optimizers are constructed to share an eigenbasis with
    complementary spectra, so (X*, y*, Z*) is feasible on both sides with
    zero duality gap and the optimal value equals b . y* exactly.
    Returns (problem, optimal_value).
    """
    import numpy as np
    from packbound import SdpProblem

    rng = np.random.default_rng(seed)
    A = []
    for _ in range(m):
        M = rng.standard_normal((n, n))
        M = (M + M.T) / 2
        rows, cols = np.triu_indices(n)
        A.append({0: (rows, cols, M[rows, cols])})
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    r = rng.integers(1, n)
    x = np.concatenate([rng.uniform(0.5, 2.0, r), np.zeros(n - r)])
    z = np.concatenate([np.zeros(r), rng.uniform(0.5, 2.0, n - r)])
    X = Q @ np.diag(x) @ Q.T
    Z = Q @ np.diag(z) @ Q.T
    y = rng.standard_normal(m)
    C = Z.copy()
    b = np.empty(m)
    for i in range(m):
        rows, cols, vals = A[i][0]
        Ai = np.zeros((n, n))
        Ai[rows, cols] = vals
        Ai[cols, rows] = vals
        C += y[i] * Ai
        b[i] = np.tensordot(Ai, X)
    problem = SdpProblem(block_sizes=[n], b=b, C=[C], A=A)
    return problem, float(b @ y)
