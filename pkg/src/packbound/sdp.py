"""Dense primal-dual interior-point solver for block-diagonal SDPs.

Problems are stored in the standard dual form

    maximize  b'y   subject to   Z = C - sum_i y_i A_i >= 0 (blockwise),

whose conic dual is  minimize <C, X>  s.t.  <A_i, X> = b_i, X >= 0.
Blocks follow the SDPA convention: a positive size is a dense PSD block,
a negative size is a diagonal (componentwise nonnegative) block.

The solver is a path-following method with Nesterov-Todd scaling and a
Mehrotra predictor-corrector step.  Constraint matrices are kept sparse
(upper-triangular coordinate lists); the Schur complement is assembled
blockwise from that sparsity and factored densely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import GraphFormatError, SolverFailure

#: Default cap on the total dimension of PSD blocks.
PSD_CAP = 3000

#: Fraction-to-boundary factor for step lengths.
STEP_FRACTION = 0.98


@dataclass
class SdpProblem:
    """Block-diagonal SDP in standard dual form.

    ``C[blk]`` is a dense symmetric matrix for PSD blocks and a 1-d array
    for diagonal blocks.  ``A[i][blk]`` is an upper-triangular coordinate
    triple ``(rows, cols, vals)``; an entry (r, c, v) with r < c stands for
    the symmetric pair of matrix entries (r, c) and (c, r), both equal v.
    Missing blocks mean zero.
    """

    block_sizes: list
    b: np.ndarray
    C: list
    A: list
    sense: str = "max"

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        m = len(self.b)
        if m < 1:
            raise GraphFormatError("SdpProblem needs at least one constraint")
        if len(self.A) != m:
            raise GraphFormatError("constraint count mismatch")
        if len(self.C) != len(self.block_sizes):
            raise GraphFormatError("objective block count mismatch")
        for blk, size in enumerate(self.block_sizes):
            cb = self.C[blk]
            if size > 0:
                cb = np.asarray(cb, dtype=float)
                if cb.shape != (size, size):
                    raise GraphFormatError(f"block {blk}: bad objective shape")
                if not np.allclose(cb, cb.T):
                    raise GraphFormatError(f"block {blk}: objective not symmetric")
                self.C[blk] = 0.5 * (cb + cb.T)
            else:
                cb = np.asarray(cb, dtype=float)
                if cb.shape != (-size,):
                    raise GraphFormatError(f"block {blk}: bad diagonal shape")
                self.C[blk] = cb
        for i, ai in enumerate(self.A):
            for blk, (r, c, v) in ai.items():
                size = abs(self.block_sizes[blk])
                r = np.asarray(r, dtype=np.int64)
                c = np.asarray(c, dtype=np.int64)
                v = np.asarray(v, dtype=float)
                if len(r) != len(c) or len(r) != len(v):
                    raise GraphFormatError(f"A[{i}] block {blk}: ragged entries")
                if np.any(r > c):
                    raise GraphFormatError(f"A[{i}] block {blk}: lower-tri entry")
                if len(r) and (r.min() < 0 or c.max() >= size):
                    raise GraphFormatError(f"A[{i}] block {blk}: index out of range")
                if self.block_sizes[blk] < 0 and np.any(r != c):
                    raise GraphFormatError(f"A[{i}] block {blk}: off-diagonal entry "
                                           "in a diagonal block")
                ai[blk] = (r, c, v)

    @property
    def m(self):
        return len(self.b)

    def dense_constraint(self, i, blk):
        """Constraint matrix as a dense symmetric array (diagonal blocks as
        1-d arrays)."""
        size = self.block_sizes[blk]
        if size > 0:
            out = np.zeros((size, size))
            if blk in self.A[i]:
                r, c, v = self.A[i][blk]
                out[r, c] += v
                off = r != c
                out[c[off], r[off]] += v[off]
            return out
        out = np.zeros(-size)
        if blk in self.A[i]:
            r, _, v = self.A[i][blk]
            np.add.at(out, r, v)
        return out

    def max_abs_entry(self):
        best = float(np.max(np.abs(self.b))) if self.m else 0.0
        for cb in self.C:
            if cb.size:
                best = max(best, float(np.max(np.abs(cb))))
        for ai in self.A:
            for (_, _, v) in ai.values():
                if len(v):
                    best = max(best, float(np.max(np.abs(v))))
        return best

    def same_as(self, other) -> bool:
        if self.block_sizes != other.block_sizes or self.m != other.m:
            return False
        if not np.array_equal(self.b, other.b):
            return False
        for cb, ob in zip(self.C, other.C):
            if not np.array_equal(cb, ob):
                return False
        for ai, oi in zip(self.A, other.A):
            if set(ai) != set(oi):
                return False
            for blk in ai:
                for x, y in zip(ai[blk], oi[blk]):
                    if not np.array_equal(x, y):
                        return False
        return True


@dataclass
class SdpSolution:
    X: list
    y: np.ndarray
    Z: list
    primal_objective: float   # <C, X>  (the certified minimization side)
    dual_objective: float     # b'y
    gap: float                # primal_objective - dual_objective
    primal_residual: float
    dual_residual: float
    iterations: int
    status: str
    log: list = field(default_factory=list)


@dataclass
class FeasibilityReport:
    constraint_residual: float  # max_i |<A_i, X> - b_i|
    dual_residual: float        # max-norm of C - Z - sum y_i A_i
    min_eig_X: float
    min_eig_Z: float
    gap: float

    def within(self, tol):
        return (self.constraint_residual <= tol and self.dual_residual <= tol
                and self.min_eig_X >= -tol and self.min_eig_Z >= -tol)


class _BlockData:
    """Per-block expanded constraint data for fast repeated contractions."""

    def __init__(self, problem, blk):
        self.size = problem.block_sizes[blk]
        m = problem.m
        cons, rows, cols, vals = [], [], [], []
        per_con = []
        for i in range(m):
            if blk not in problem.A[i]:
                per_con.append(None)
                continue
            r, c, v = problem.A[i][blk]
            if self.size > 0:
                off = r != c
                fr = np.concatenate([r, c[off]])
                fc = np.concatenate([c, r[off]])
                fv = np.concatenate([v, v[off]])
            else:
                fr, fc, fv = r, c, v
            per_con.append((fr, fc, fv))
            cons.append(np.full(len(fr), i, dtype=np.int64))
            rows.append(fr)
            cols.append(fc)
            vals.append(fv)
        self.per_con = per_con
        if cons:
            self.con = np.concatenate(cons)
            self.rows = np.concatenate(rows)
            self.cols = np.concatenate(cols)
            self.vals = np.concatenate(vals)
        else:
            self.con = np.zeros(0, dtype=np.int64)
            self.rows = self.cols = self.con
            self.vals = np.zeros(0)
        self.m = m
        if self.size < 0:
            s = -self.size
            self.P = sp.csr_matrix((self.vals, (self.con, self.rows)),
                                   shape=(m, s))

    def contract(self, M):
        """Vector of <A_i, M> over all constraints."""
        if self.size > 0:
            prods = self.vals * M[self.rows, self.cols]
        else:
            prods = self.vals * M[self.rows]
        return np.bincount(self.con, weights=prods, minlength=self.m)

    def combine(self, y):
        """Dense sum_i y_i A_i for this block."""
        if self.size > 0:
            out = np.zeros((self.size, self.size))
            np.add.at(out, (self.rows, self.cols), y[self.con] * self.vals)
            return out
        out = np.zeros(-self.size)
        np.add.at(out, self.rows, y[self.con] * self.vals)
        return out

    def schur(self, W):
        """Contribution <A_i, W A_j W> (PSD) or A' diag(w^2) A (diagonal)."""
        m = self.m
        if self.size < 0:
            Pw = self.P.multiply(W * W)
            return np.asarray((Pw @ self.P.T).todense())
        M = np.zeros((m, m))
        for j in range(m):
            entry = self.per_con[j]
            if entry is None:
                continue
            r, c, v = entry
            uniq, inv = np.unique(r, return_inverse=True)
            T = np.zeros((len(uniq), self.size))
            np.add.at(T, inv, v[:, None] * W[c, :])
            B = W[:, uniq] @ T                      # = W A_j W
            M[:, j] = np.bincount(self.con,
                                  weights=self.vals * B[self.rows, self.cols],
                                  minlength=m)
        return M


def _nt_scaling(X, Z):
    """NT scaling W = G G' with W Z W = X, plus Z^{-1} and the factor G."""
    Lx = sla.cholesky(X, lower=True)
    Lz = sla.cholesky(Z, lower=True)
    U, s, Vt = sla.svd(Lz.T @ Lx)
    G = Lx @ (Vt.T / np.sqrt(s))
    W = G @ G.T
    W = 0.5 * (W + W.T)
    Zi = sla.cho_solve((Lz, True), np.eye(len(Z)))
    return W, 0.5 * (Zi + Zi.T), sla.cholesky(W, lower=True)


def _max_step(M, dM):
    """Largest a with M + a*dM >= 0, times the fraction-to-boundary factor."""
    if M.ndim == 1:
        ratios = dM / M
        worst = ratios.min() if len(ratios) else 0.0
        if worst >= 0:
            return 1.0
        return min(1.0, -STEP_FRACTION / worst)
    L = sla.cholesky(M, lower=True)
    S = sla.solve_triangular(L, dM, lower=True)
    S = sla.solve_triangular(L, S.T, lower=True)
    lam = sla.eigvalsh(0.5 * (S + S.T))[0]
    if lam >= 0:
        return 1.0
    return min(1.0, -STEP_FRACTION / lam)


def solve(problem: SdpProblem, tol: float = 1e-8, max_iter: int = 200,
          psd_cap: int = PSD_CAP) -> SdpSolution:
    """Solve a block-diagonal SDP to relative tolerance tol.

    Deterministic: identical inputs produce bitwise-identical iteration
    logs.  Solver failure surfaces in ``status``; it never silently
    returns a wrong optimum as 'optimal'.
    """
    psd_total = sum(s for s in problem.block_sizes if s > 0)
    if psd_total > psd_cap:
        raise GraphFormatError(f"total PSD dimension {psd_total} exceeds cap {psd_cap}")
    m = problem.m
    blocks = [_BlockData(problem, blk) for blk in range(len(problem.block_sizes))]
    nu = sum(abs(s) for s in problem.block_sizes)

    tau = 1.0 + problem.max_abs_entry()
    X = [np.eye(s) * tau if s > 0 else np.full(-s, tau) for s in problem.block_sizes]
    Z = [np.eye(s) * tau if s > 0 else np.full(-s, tau) for s in problem.block_sizes]
    y = np.zeros(m)

    bnorm = 1.0 + float(np.linalg.norm(problem.b))
    cnorm = 1.0 + max(1.0, problem.max_abs_entry())
    log = []
    status = "max-iterations"
    iterations = 0
    divergent = 0

    def inner(Ms, Ns):
        total = 0.0
        for a, b in zip(Ms, Ns):
            total += float(np.sum(a * b))
        return total

    for it in range(max_iter):
        iterations = it
        rp = problem.b - np.sum([bd.contract(xb) for bd, xb in zip(blocks, X)], axis=0)
        Rd = [cb - zb - bd.combine(y)
              for cb, zb, bd in zip(problem.C, Z, blocks)]
        pobj = inner(problem.C, X)
        dobj = float(problem.b @ y)
        cgap = inner(X, Z)
        mu = cgap / nu
        pres = float(np.linalg.norm(rp)) / bnorm
        dres = max(float(np.max(np.abs(rd))) if rd.size else 0.0 for rd in Rd) / cnorm
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        log.append(f"iter {it:3d} pobj {pobj:+.12e} dobj {dobj:+.12e} "
                   f"gap {relgap:.3e} pres {pres:.3e} dres {dres:.3e} mu {mu:.3e}")
        if relgap <= tol and pres <= tol and dres <= tol:
            status = "optimal"
            break
        if not (np.isfinite(pobj) and np.isfinite(dobj) and np.isfinite(mu)):
            status = "infeasible" if divergent else "numerical-trouble"
            break
        if abs(dobj) > 1e10 and pres > 1e-4:
            divergent += 1
            if divergent >= 3:
                status = "infeasible"
                break
        try:
            scal = []
            for s, xb, zb in zip(problem.block_sizes, X, Z):
                if s > 0:
                    scal.append(_nt_scaling(xb, zb))
                else:
                    w = np.sqrt(xb / zb)
                    scal.append((w, 1.0 / zb, w))
        except (np.linalg.LinAlgError, ValueError):
            status = "numerical-trouble"
            break

        M = np.zeros((m, m))
        for bd, (W, _, _) in zip(blocks, scal):
            M += bd.schur(W)
        reg = 0.0
        cho = None
        for attempt in range(4):
            try:
                cho = sla.cho_factor(M + reg * np.eye(m), lower=True)
                break
            except (np.linalg.LinAlgError, ValueError):
                if not np.all(np.isfinite(M)):
                    break
                reg = 1e-12 * (1.0 + float(np.max(np.abs(M)))) * (100.0 ** attempt) \
                    if reg == 0.0 else reg * 100.0
        if cho is None:
            status = "numerical-trouble"
            break

        def directions(Hs):
            rhs = rp - np.sum([bd.contract(h) for bd, h in zip(blocks, Hs)], axis=0)
            dy = sla.cho_solve(cho, rhs)
            dZ = [rd - bd.combine(dy) for rd, bd in zip(Rd, blocks)]
            dX = []
            # dX = R_target - W dZ W with Hs = R_target - W Rd W, so the
            # residual term re-enters through Rd - dZ = sum_i dy_i A_i.
            for h, rd, dz, (W, _, _), s in zip(Hs, Rd, dZ, scal, problem.block_sizes):
                if s > 0:
                    step = h + W @ (rd - dz) @ W
                    dX.append(0.5 * (step + step.T))
                else:
                    dX.append(h + W * W * (rd - dz))
            return dy, dX, dZ

        # predictor (affine scaling)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                H_aff = []
                for xb, rd, (W, _, _), s in zip(X, Rd, scal,
                                                problem.block_sizes):
                    if s > 0:
                        H_aff.append(-xb - W @ rd @ W)
                    else:
                        H_aff.append(-xb - W * W * rd)
                dy_a, dX_a, dZ_a = directions(H_aff)
                ap_a = min(_max_step(xb, dxb) for xb, dxb in zip(X, dX_a))
                ad_a = min(_max_step(zb, dzb) for zb, dzb in zip(Z, dZ_a))
                gap_aff = inner(
                    [xb + ap_a * dxb for xb, dxb in zip(X, dX_a)],
                    [zb + ad_a * dzb for zb, dzb in zip(Z, dZ_a)])
                sigma = min(1.0, max(0.0, gap_aff / cgap) ** 3)
                # keep complementarity from running far ahead of
                # feasibility: when mu has collapsed but the primal residual
                # has not, lift the centering target back to the residual
                # scale so the iterate leaves the boundary and can keep
                # moving toward feasibility
                mu_target = sigma * mu
                if pres > tol and mu < pres * bnorm / nu:
                    mu_target = max(mu_target, 0.1 * pres * bnorm / nu)

                # corrector; second-order term formed in the NT-scaled space
                H = []
                for xb, dxa, dza, rd, (W, Zi, G), s in zip(
                        X, dX_a, dZ_a, Rd, scal, problem.block_sizes):
                    if s > 0:
                        E = sla.solve_triangular(G, dxa, lower=True)
                        E = sla.solve_triangular(G, E.T, lower=True).T
                        Fm = G.T @ dza @ G
                        corr = G @ (0.5 * (E @ Fm + (E @ Fm).T)) @ G.T
                        H.append(mu_target * Zi - xb - corr - W @ rd @ W)
                    else:
                        H.append(mu_target * Zi - xb
                                 - dxa * dza * Zi - W * W * rd)
                dy, dX, dZ = directions(H)
        except (np.linalg.LinAlgError, ValueError):
            status = "infeasible" if divergent else "numerical-trouble"
            break
        ap = min(_max_step(xb, dxb) for xb, dxb in zip(X, dX))
        ad = min(_max_step(zb, dzb) for zb, dzb in zip(Z, dZ))
        if ap < 1e-10 and ad < 1e-10:
            status = "numerical-trouble"
            break
        X = [xb + ap * dxb for xb, dxb in zip(X, dX)]
        Z = [zb + ad * dzb for zb, dzb in zip(Z, dZ)]
        y = y + ad * dy
        X = [0.5 * (xb + xb.T) if xb.ndim == 2 else xb for xb in X]
        Z = [0.5 * (zb + zb.T) if zb.ndim == 2 else zb for zb in Z]
    else:
        iterations = max_iter

    rp = problem.b - np.sum([bd.contract(xb) for bd, xb in zip(blocks, X)], axis=0)
    Rd = [cb - zb - bd.combine(y) for cb, zb, bd in zip(problem.C, Z, blocks)]
    pobj = inner(problem.C, X)
    dobj = float(problem.b @ y)
    return SdpSolution(
        X=X, y=y, Z=Z,
        primal_objective=pobj, dual_objective=dobj, gap=pobj - dobj,
        primal_residual=float(np.linalg.norm(rp)) / bnorm,
        dual_residual=max(float(np.max(np.abs(rd))) if rd.size else 0.0
                          for rd in Rd) / cnorm,
        iterations=iterations, status=status, log=log)


def check_feasibility(problem: SdpProblem, sol: SdpSolution,
                      tol: float = 1e-8) -> FeasibilityReport:
    """Recompute residuals and eigenvalue bounds from scratch.

    Uses dense constraint matrices and plain numpy throughout, independent
    of the solver's internal bookkeeping.
    """
    m = problem.m
    cres = 0.0
    for i in range(m):
        total = 0.0
        for blk, s in enumerate(problem.block_sizes):
            ai = problem.dense_constraint(i, blk)
            total += float(np.sum(ai * sol.X[blk]))
        cres = max(cres, abs(total - problem.b[i]))
    dres = 0.0
    for blk, s in enumerate(problem.block_sizes):
        acc = np.zeros_like(np.asarray(problem.C[blk], dtype=float))
        for i in range(m):
            acc += sol.y[i] * problem.dense_constraint(i, blk)
        resid = problem.C[blk] - sol.Z[blk] - acc
        if resid.size:
            dres = max(dres, float(np.max(np.abs(resid))))
    minx = minz = np.inf
    for blk, s in enumerate(problem.block_sizes):
        if s > 0:
            minx = min(minx, float(np.linalg.eigvalsh(sol.X[blk])[0]))
            minz = min(minz, float(np.linalg.eigvalsh(sol.Z[blk])[0]))
        else:
            if sol.X[blk].size:
                minx = min(minx, float(np.min(sol.X[blk])))
                minz = min(minz, float(np.min(sol.Z[blk])))
    gap = sum(float(np.sum(np.asarray(c, dtype=float) * x))
              for c, x in zip(problem.C, sol.X)) - float(problem.b @ sol.y)
    return FeasibilityReport(constraint_residual=cres, dual_residual=dres,
                             min_eig_X=minx if minx != np.inf else 0.0,
                             min_eig_Z=minz if minz != np.inf else 0.0,
                             gap=gap)


def export_sdpa(problem: SdpProblem) -> str:
    """Serialize in SDPA sparse format.

    Layout: line 1 ``m``; line 2 ``nblocks``; line 3 block sizes (negative
    for diagonal blocks); line 4 the b vector; then ``matno blkno i j value``
    entries with 1-based upper-triangular indices, matno 0 being the
    objective matrix.  Values carry 17 significant digits.
    """
    lines = [str(problem.m), str(len(problem.block_sizes)),
             " ".join(str(s) for s in problem.block_sizes),
             " ".join(f"{v:.17g}" for v in problem.b)]

    def emit(matno, blk, entries):
        for r, c, v in entries:
            if v != 0.0:
                lines.append(f"{matno} {blk + 1} {r + 1} {c + 1} {v:.17g}")

    for blk, s in enumerate(problem.block_sizes):
        cb = problem.C[blk]
        if s > 0:
            rr, cc = np.nonzero(np.triu(cb))
            emit(0, blk, zip(rr, cc, cb[rr, cc]))
        else:
            idx = np.nonzero(cb)[0]
            emit(0, blk, zip(idx, idx, cb[idx]))
    for i in range(problem.m):
        for blk in sorted(problem.A[i]):
            r, c, v = problem.A[i][blk]
            order = np.lexsort((c, r))
            emit(i + 1, blk, zip(r[order], c[order], v[order]))
    return "\n".join(lines) + "\n"


def parse_sdpa(text: str) -> SdpProblem:
    """Parse the SDPA sparse format produced by :func:`export_sdpa`."""
    lines = [ln for ln in text.splitlines()
             if ln.strip() and not ln.lstrip().startswith(('"', '*'))]
    m = int(lines[0].split()[0])
    nblocks = int(lines[1].split()[0])
    sizes = [int(tok.strip("{},()")) for tok in lines[2].replace(",", " ").split()]
    if len(sizes) != nblocks:
        raise GraphFormatError("SDPA: block size count mismatch")
    b = np.array([float(tok) for tok in lines[3].replace(",", " ").split()])
    if len(b) != m:
        raise GraphFormatError("SDPA: b vector length mismatch")
    C = [np.zeros((s, s)) if s > 0 else np.zeros(-s) for s in sizes]
    entries = [dict() for _ in range(m)]
    for ln in lines[4:]:
        matno, blkno, i, j, val = ln.split()
        matno, blkno = int(matno), int(blkno) - 1
        i, j, val = int(i) - 1, int(j) - 1, float(val)
        if i > j:
            i, j = j, i
        if matno == 0:
            if sizes[blkno] > 0:
                C[blkno][i, j] += val
                if i != j:
                    C[blkno][j, i] += val
            else:
                C[blkno][i] += val
        else:
            entries[matno - 1].setdefault(blkno, []).append((i, j, val))
    A = []
    for i in range(m):
        ai = {}
        for blk, ent in entries[i].items():
            r = np.array([e[0] for e in ent], dtype=np.int64)
            c = np.array([e[1] for e in ent], dtype=np.int64)
            v = np.array([e[2] for e in ent])
            ai[blk] = (r, c, v)
        A.append(ai)
    return SdpProblem(block_sizes=sizes, b=b, C=C, A=A)
