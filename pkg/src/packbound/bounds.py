"""Moment-matrix relaxations and two/three-point bounds for the weighted
independence number, with independent certificate verification and
inclusion-exclusion recovery of the optimal measure.

The level-t relaxation maximizes the singleton mass of a vector y indexed
by independent sets of size <= 2t, subject to y >= 0, y_empty = 1 and
positive semidefiniteness of the moment matrix M(y) indexed by sets of
size <= t.  Its conic dual is a kernel program whose feasible solutions
certify upper bounds, which is what ``verify_dual_certificate`` checks by
direct re-evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import sdp
from .errors import CertificateError, GraphFormatError, SolverFailure
from .graphs import Graph, alpha_exact, local_subgraph
from .indep import (BLOCKED, BASIS_CAP, IndepSetBasis, UnionTable,
                    build_union_table, enumerate_independent_sets)

#: Solver tolerance used by default for all bound computations.
SOLVER_TOL = 1e-8

#: Verification margin used when re-checking certificates.
VERIFY_TOL = 1e-6


@dataclass
class MomentProgram:
    """Assembled level-t moment relaxation of a graph."""

    graph: Graph
    t: int
    basis_t: IndepSetBasis
    basis_2t: IndepSetBasis
    table: UnionTable
    objective: np.ndarray        # c over I_{2t}; supported on singletons
    problem: Optional[sdp.SdpProblem]  # None for the degenerate empty graph

    def psd_dim(self):
        return len(self.basis_t)


@dataclass
class VerificationReport:
    """Outcome of re-checking a dual kernel against the certificate rules."""

    ok: bool
    bound: float
    min_eig: float
    worst_violation: float
    worst_set: Optional[tuple]


@dataclass
class BoundResult:
    value: float                 # certified upper bound (kernel side)
    dual_value: float            # relaxation optimum (moment side)
    gap: float
    status: str
    certificate: object          # kernel matrix K over I_t, or (a, F)
    verification: Optional[VerificationReport] = None
    moment_vector: Optional[np.ndarray] = None
    solution: Optional[sdp.SdpSolution] = None


def _singleton_objective(g: Graph, basis_2t: IndepSetBasis) -> np.ndarray:
    c = np.zeros(len(basis_2t))
    if g.n and basis_2t.t >= 1:
        start, end = basis_2t.strata[1]
        for pos in range(start, end):
            (v,) = basis_2t.sets[pos]
            c[pos] = g.weights[v]
    return c


def assemble_lasserre(g: Graph, t: int, cap: int = BASIS_CAP,
                      nonneg: bool = True) -> MomentProgram:
    """Build the level-t moment relaxation as a block-diagonal SDP.

    With ``nonneg=False`` the componentwise nonnegativity of y is dropped;
    at t = 1 that variant is the Lovasz theta number.
    """
    if t < 1:
        raise GraphFormatError(f"level must be >= 1, got {t}")
    basis_t = enumerate_independent_sets(g, t, cap=cap)
    basis_2t = enumerate_independent_sets(g, 2 * t, cap=cap)
    table = build_union_table(basis_t, basis_2t)
    c = _singleton_objective(g, basis_2t)
    nvars = len(basis_2t) - 1  # y_empty is fixed to 1
    if nvars == 0:
        return MomentProgram(g, t, basis_t, basis_2t, table, c, None)

    dim = len(basis_t)
    # group the (J, J') pairs of the union table by their union
    per_var = [[] for _ in range(nvars)]
    ent = table.entries
    for i in range(dim):
        for j in range(i, dim):
            s = ent[i, j]
            if s > 0:
                per_var[s - 1].append((i, j))

    C_psd = np.zeros((dim, dim))
    C_psd[0, 0] = 1.0  # the only pair with empty union is (empty, empty)
    block_sizes = [dim] + ([-nvars] if nonneg else [])
    A = []
    for var in range(nvars):
        pairs = per_var[var]
        r = np.array([p[0] for p in pairs], dtype=np.int64)
        cc = np.array([p[1] for p in pairs], dtype=np.int64)
        v = np.full(len(pairs), -1.0)
        ai = {0: (r, cc, v)}
        if nonneg:
            ai[1] = (np.array([var]), np.array([var]), np.array([-1.0]))
        A.append(ai)
    C = [C_psd] + ([np.zeros(nvars)] if nonneg else [])
    problem = sdp.SdpProblem(block_sizes=block_sizes, b=c[1:].copy(), C=C, A=A)
    return MomentProgram(g, t, basis_t, basis_2t, table, c, problem)


def _trivial_bound(value: float) -> BoundResult:
    return BoundResult(value=value, dual_value=value, gap=0.0,
                       status="optimal", certificate=np.array([[value]]),
                       moment_vector=np.array([1.0]))


def las_bound(g: Graph, t: int, tol: float = SOLVER_TOL,
              cap: int = BASIS_CAP, verify_tol: float = VERIFY_TOL,
              nonneg: bool = True) -> BoundResult:
    """Level-t bound with certified kernel.

    The reported ``value`` is the entry K(empty, empty) of the dual kernel
    returned by the solver, re-verified through
    :func:`verify_dual_certificate` before being trusted.
    """
    prog = assemble_lasserre(g, t, cap=cap, nonneg=nonneg)
    if prog.problem is None:
        return _trivial_bound(0.0)
    sol = sdp.solve(prog.problem, tol=tol)
    K = sol.X[0]
    y_full = np.concatenate([[1.0], sol.y])
    result = BoundResult(
        value=float(K[0, 0]), dual_value=sol.dual_objective,
        gap=abs(sol.primal_objective - sol.dual_objective),
        status=sol.status, certificate=K,
        moment_vector=y_full, solution=sol)
    if sol.status == "optimal":
        report = verify_dual_certificate(g, t, K, tol=verify_tol, prog=prog)
        result.verification = report
        if not report.ok:
            result.status = "numerical-trouble"
    return result


def indicator_solution(basis_2t: IndepSetBasis, S) -> np.ndarray:
    """Moment vector of the measure concentrated on an independent set S:
    y_R = 1 for R a subset of S, else 0."""
    g = basis_2t.graph
    mask = 0
    for v in S:
        mask |= 1 << v
    if not g.is_independent_mask(mask):
        raise GraphFormatError(f"set {tuple(sorted(S))} is not independent")
    y = np.zeros(len(basis_2t))
    for i, m in enumerate(basis_2t.masks):
        if m & mask == m:
            y[i] = 1.0
    return y


def moment_matrix(prog: MomentProgram, y: np.ndarray) -> np.ndarray:
    """M(y) from the union table; blocked entries are zero."""
    ent = prog.table.entries
    M = np.where(ent >= 0, y[np.maximum(ent, 0)], 0.0)
    return M


def verify_dual_certificate(g: Graph, t: int, K: np.ndarray,
                            tol: float = VERIFY_TOL,
                            prog: Optional[MomentProgram] = None) -> VerificationReport:
    """Re-check a kernel K over I_t against the dual feasibility rules.

    Requires min eig(K) >= -tol and, for every nonempty S in I_{2t},
    sum_{J u J' = S} K(J, J') <= -w(S) + tol, where w is the singleton
    weight extension.  On success K(empty, empty) is a certified upper
    bound on the weighted independence number.
    """
    if prog is None:
        prog = assemble_lasserre(g, t)
    K = np.asarray(K, dtype=float)
    dim = len(prog.basis_t)
    if K.shape != (dim, dim):
        raise CertificateError(f"kernel shape {K.shape}, expected {(dim, dim)}")
    if not np.allclose(K, K.T, atol=1e-9):
        raise CertificateError("kernel not symmetric")
    min_eig = float(np.linalg.eigvalsh(K)[0])
    ent = prog.table.entries
    nsets = len(prog.basis_2t)
    sums = np.zeros(nsets)
    np.add.at(sums, np.maximum(ent, 0).ravel(),
              np.where(ent.ravel() >= 0, K.ravel(), 0.0))
    worst = -np.inf
    worst_set = None
    for s in range(1, nsets):
        violation = sums[s] + prog.objective[s]  # requires sums[s] <= -w
        if violation > worst:
            worst = violation
            worst_set = prog.basis_2t.sets[s]
    ok = min_eig >= -tol and (nsets == 1 or worst <= tol)
    return VerificationReport(ok=ok, bound=float(K[0, 0]), min_eig=min_eig,
                              worst_violation=float(worst) if worst_set else 0.0,
                              worst_set=worst_set)


def _theta_common(g: Graph, prime: bool, tol: float) -> BoundResult:
    """Kernel form of the two-point bound: minimize a over PSD kernels F on
    V x V with F(x,x) <= a - 1, and F(x,y) <= -1 (prime) or F(x,y) = -1
    (plain theta) on independent pairs."""
    n = g.n
    if n == 0:
        return _trivial_bound(0.0)
    indep_pairs = [(x, y) for x in range(n) for y in range(x + 1, n)
                   if not g.has_edge(x, y)]
    # variable layout: 0 -> a, then F entries
    if prime:
        fvars = [(x, y) for x in range(n) for y in range(x, n)]
    else:
        fvars = [(x, x) for x in range(n)]
        fvars += [(x, y) for (x, y) in g.edges()]
    var_of = {p: 1 + k for k, p in enumerate(fvars)}
    m = 1 + len(fvars)
    b = np.zeros(m)
    b[0] = -1.0  # maximize -a

    C_F = np.zeros((n, n))
    if not prime:
        for (x, y) in indep_pairs:
            C_F[x, y] = C_F[y, x] = -1.0
    blocks = [n, -n] + ([-len(indep_pairs)] if prime and indep_pairs else [])
    C = [C_F, -np.ones(n)] + ([-np.ones(len(indep_pairs))]
                              if prime and indep_pairs else [])
    A = [dict() for _ in range(m)]
    # a appears in the diagonal slack block: z_x = a - 1 - F(x,x)
    A[0][1] = (np.arange(n), np.arange(n), -np.ones(n))
    for k, (x, y) in enumerate(fvars):
        var = 1 + k
        A[var][0] = (np.array([min(x, y)]), np.array([max(x, y)]),
                     np.array([-1.0]))
        if x == y:
            r, c, v = A[var].get(1, (np.array([], dtype=np.int64),) * 2 + (np.array([]),))
            A[var][1] = (np.append(r, x), np.append(c, x), np.append(v, 1.0))
    if prime and indep_pairs:
        pair_pos = {p: i for i, p in enumerate(indep_pairs)}
        for (x, y), i in pair_pos.items():
            var = var_of[(x, y)]
            r, c, v = A[var].get(2, (np.array([], dtype=np.int64),) * 2 + (np.array([]),))
            A[var][2] = (np.append(r, i), np.append(c, i), np.append(v, 1.0))
    problem = sdp.SdpProblem(block_sizes=blocks, b=b, C=C, A=A)
    sol = sdp.solve(problem, tol=tol)
    a = -sol.dual_objective
    F = np.zeros((n, n))
    if not prime:
        F += C_F
    for k, (x, y) in enumerate(fvars):
        F[x, y] = F[y, x] = sol.y[1 + k]
    # direct feasibility re-check of the returned pair (a, F)
    status = sol.status
    if status == "optimal":
        min_eig = float(np.linalg.eigvalsh(F)[0])
        diag_ok = np.all(np.diag(F) <= a - 1 + VERIFY_TOL)
        pair_ok = all(F[x, y] <= -1 + VERIFY_TOL for (x, y) in indep_pairs)
        if min_eig < -VERIFY_TOL or not diag_ok or not pair_ok:
            status = "numerical-trouble"
    return BoundResult(value=a, dual_value=-sol.primal_objective,
                       gap=abs(sol.gap), status=status, certificate=(a, F),
                       solution=sol)


def theta(g: Graph, tol: float = SOLVER_TOL) -> BoundResult:
    """Lovasz theta number via the V x V kernel program."""
    return _theta_common(g, prime=False, tol=tol)


def theta_prime(g: Graph, tol: float = SOLVER_TOL) -> BoundResult:
    """Schrijver's strengthening of the theta number (two-point bound)."""
    res = _theta_common(g, prime=True, tol=tol)
    if res.status == "optimal" and g.n > 0 and all(w == 1.0 for w in g.weights):
        a, F = res.certificate
        res.verification = verify_dual_certificate(
            g, 1, lift_theta_prime_solution(a, F))
        if not res.verification.ok:
            res.status = "numerical-trouble"
    return res


def lift_theta_prime_solution(a: float, F: np.ndarray) -> np.ndarray:
    """Lift a feasible two-point pair (a, F) to a kernel over I_1.

    K(empty, empty) = a, K(empty, {x}) = -1, K({x}, {y}) = (F(x,y) + 1)/a.
    Feasibility for the level-1 kernel program follows by the Schur
    complement; the objective value a is preserved.
    """
    if a < 1.0:
        raise CertificateError(f"need a >= 1 (got {a}); F(x,x) >= 0 forces it")
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    K = np.empty((n + 1, n + 1))
    K[0, 0] = a
    K[0, 1:] = -1.0
    K[1:, 0] = -1.0
    K[1:, 1:] = (F + 1.0) / a
    return K


def three_point_bound(g: Graph, e: int, t: int, tol: float = SOLVER_TOL,
                      cap: int = BASIS_CAP) -> BoundResult:
    """1 + las_t of the induced subgraph on the non-neighbours of e.

    This upper bounds 1 + alpha(G^e); it bounds alpha(G) itself only when
    the caller knows the graph to be vertex-transitive.
    """
    sub, _ = local_subgraph(g, e)
    inner = las_bound(sub, t, tol=tol, cap=cap)
    return BoundResult(value=1.0 + inner.value,
                       dual_value=1.0 + inner.dual_value,
                       gap=inner.gap, status=inner.status,
                       certificate=inner.certificate,
                       verification=inner.verification,
                       moment_vector=inner.moment_vector)


def moebius_recover_measure(g: Graph, basis: IndepSetBasis,
                            y: np.ndarray) -> np.ndarray:
    """Invert the subset-sum structure of a feasible moment vector at the
    final level: sigma_R = sum over independent supersets S of R of
    (-1)^{|S \\ R|} y_S.

    Requires the basis to contain every independent set, i.e. the level to
    be the independence number; then sum(sigma) = y_empty and, for feasible
    y, sigma is (numerically) a probability distribution over independent
    sets whose subset-indicator mixture reconstructs y.
    """
    alpha = alpha_exact(g).value
    if basis.t < alpha:
        raise GraphFormatError(
            f"measure recovery needs level >= alpha(G) = {alpha}, "
            f"basis has t = {basis.t}")
    y = np.asarray(y)
    if len(y) != len(basis):
        raise GraphFormatError("moment vector length does not match basis")
    masks = basis.masks
    sigma = np.zeros(len(basis), dtype=y.dtype)
    sizes = [bin(m).count("1") for m in masks]
    for r, rm in enumerate(masks):
        acc = y[r] * 0  # keep dtype (supports exact Fractions via object arrays)
        for s, sm in enumerate(masks):
            if sm & rm == rm:
                acc = acc + ((-1) ** (sizes[s] - sizes[r])) * y[s]
        sigma[r] = acc
    return sigma
