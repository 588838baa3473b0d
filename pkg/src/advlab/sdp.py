"""A small dense primal-dual interior-point solver for block SDPs.

Standard form (minimize sense)::

    minimize    <C, X>
    subject to  <A_k, X> = b_k      k = 1..m
                X = diag(X_1, ..., X_r) >= 0

with dual ``maximize b.y  s.t.  sum_k y_k A_k + Z = C, Z >= 0``.  Blocks of
size 1 model nonnegative scalars.

Constraint coefficients are stored sparsely as ``(block, i, j, c)`` terms,
each contributing ``c * X_block[i, j]`` to ``<A_k, X>`` (``X`` symmetric).
Off-diagonal terms are split evenly between ``(i, j)`` and ``(j, i)``.

The search direction is the HKM (XZ) direction with a Mehrotra
predictor-corrector; the Schur complement is dense and factored by
Cholesky.  There is no randomness, so identical inputs give identical
iterates.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .boolean_core import SizeError
from .linalg import NumericError

log = logging.getLogger(__name__)

MAX_TOTAL_DIM = 512
MAX_CONSTRAINTS = 2000


class Sense(str, enum.Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITERATIONS = "max-iterations"
    INFEASIBLE = "infeasible-detected"


Term = tuple[int, int, int, float]


@dataclass
class Constraint:
    terms: list[Term]
    rhs: float


@dataclass
class SdpProblem:
    """Block-structured SDP with sparse coefficient terms.

    ``objective`` holds terms ``(block, i, j, c)`` in the same convention as
    constraints.  Use :meth:`add_constraint` / :meth:`add_dense_constraint`
    to build incrementally.
    """

    blocks: list[int]
    objective: list[Term] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    sense: Sense = Sense.MINIMIZE

    def add_constraint(self, terms: Sequence[Term], rhs: float) -> int:
        self.constraints.append(Constraint(list(terms), float(rhs)))
        return len(self.constraints) - 1

    def add_dense_constraint(self, mats: Sequence[np.ndarray | None], rhs: float) -> int:
        """Constraint ``sum_b <A_b, X_b> = rhs`` from dense symmetric blocks."""
        return self.add_constraint(_dense_terms(mats), rhs)

    def set_dense_objective(self, mats: Sequence[np.ndarray | None]) -> None:
        self.objective = _dense_terms(mats)

    @property
    def total_dim(self) -> int:
        return int(sum(self.blocks))

    def validate(self) -> None:
        if not self.blocks or any(b < 1 for b in self.blocks):
            raise ValueError("block sizes must be positive")
        if not self.constraints:
            raise ValueError("at least one constraint is required")
        if self.total_dim > MAX_TOTAL_DIM:
            raise SizeError(f"total dimension {self.total_dim} exceeds {MAX_TOTAL_DIM}")
        if len(self.constraints) > MAX_CONSTRAINTS:
            raise SizeError(f"{len(self.constraints)} constraints exceed {MAX_CONSTRAINTS}")
        for terms in [self.objective] + [c.terms for c in self.constraints]:
            for blk, i, j, c in terms:
                if not 0 <= blk < len(self.blocks):
                    raise ValueError(f"term refers to missing block {blk}")
                if not (0 <= i < self.blocks[blk] and 0 <= j < self.blocks[blk]):
                    raise ValueError(f"term ({i}, {j}) outside block {blk}")
                if not np.isfinite(c):
                    raise ValueError("non-finite coefficient")
        if not all(np.isfinite(c.rhs) for c in self.constraints):
            raise ValueError("non-finite right-hand side")


def _dense_terms(mats: Sequence[np.ndarray | None]) -> list[Term]:
    terms: list[Term] = []
    for blk, A in enumerate(mats):
        if A is None:
            continue
        A = np.asarray(A, dtype=float)
        if not np.allclose(A, A.T, rtol=0, atol=1e-12 * (1 + np.abs(A).max(initial=0))):
            raise ValueError(f"coefficient block {blk} is not symmetric")
        for i, j in zip(*np.nonzero(np.triu(A))):
            c = A[i, j] if i == j else 2.0 * A[i, j]
            terms.append((blk, int(i), int(j), float(c)))
    return terms


@dataclass
class SdpSolution:
    primal: list[np.ndarray]
    dual: np.ndarray
    primal_value: float
    dual_value: float
    status: Status
    iterations: int
    primal_infeasibility: float
    dual_infeasibility: float
    gap: float
    slack: list[np.ndarray] = field(default_factory=list)
    history: list[dict] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def report(self) -> dict:
        return {
            "status": self.status.value,
            "iterations": self.iterations,
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "primal_infeasibility": self.primal_infeasibility,
            "dual_infeasibility": self.dual_infeasibility,
            "gap": self.gap,
        }


class _Operator:
    """The linear map ``X -> (<A_k, X>)_k`` and its adjoint on dense matrices."""

    def __init__(self, problem: SdpProblem):
        offsets = np.concatenate([[0], np.cumsum(problem.blocks)]).astype(np.int64)
        self.n = int(offsets[-1])
        self.m = len(problem.constraints)
        rows, cols, weights, owner = [], [], [], []
        for k, con in enumerate(problem.constraints):
            for blk, i, j, c in con.terms:
                gi, gj = offsets[blk] + i, offsets[blk] + j
                # symmetric split: c/2 at (i, j) and c/2 at (j, i)
                rows += [gi, gj]
                cols += [gj, gi]
                weights += [0.5 * c, 0.5 * c]
                owner += [k, k]
        order = np.argsort(np.array(owner, dtype=np.int64), kind="stable")
        self.P = np.array(rows, dtype=np.int64)[order]
        self.Q = np.array(cols, dtype=np.int64)[order]
        self.W = np.array(weights, dtype=float)[order]
        self.K = np.array(owner, dtype=np.int64)[order]
        counts = np.bincount(self.K, minlength=self.m)
        if np.any(counts == 0):
            raise ValueError("constraint with no terms")
        self.starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        # padded per-constraint layout for batched Schur assembly
        width = int(counts.max())
        self.pad_P = np.zeros((self.m, width), dtype=np.int64)
        self.pad_Q = np.zeros((self.m, width), dtype=np.int64)
        self.pad_W = np.zeros((self.m, width))
        slot = np.arange(len(self.K)) - self.starts[self.K]
        self.pad_P[self.K, slot] = self.P
        self.pad_Q[self.K, slot] = self.Q
        self.pad_W[self.K, slot] = self.W
        self.block_slices = [slice(int(offsets[b]), int(offsets[b + 1])) for b in range(len(problem.blocks))]
        self.norms = np.sqrt(np.bincount(self.K, weights=self.W**2, minlength=self.m))

    def apply(self, X: np.ndarray) -> np.ndarray:
        """``<A_k, sym(X)>`` for every ``k`` (also valid for non-symmetric ``X``)."""
        return np.add.reduceat(self.W * X[self.P, self.Q], self.starts)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        np.add.at(out, (self.P, self.Q), self.W * y[self.K])
        return out

    def schur(self, X: np.ndarray, Zi: np.ndarray, chunk_budget: int = 4_000_000) -> np.ndarray:
        """``M[k, l] = Tr(A_k X A_l Z^-1)``."""
        E = len(self.K)
        width = self.pad_P.shape[1]
        step = max(1, chunk_budget // max(1, E * width))
        M = np.empty((self.m, self.m))
        XQ = X[self.Q]  # rows q_e
        ZiP = Zi[:, self.P]  # columns p_e
        for lo in range(0, self.m, step):
            hi = min(self.m, lo + step)
            Pl, Ql, Wl = self.pad_P[lo:hi], self.pad_Q[lo:hi], self.pad_W[lo:hi]
            # term(e, e') = w_e w_e' X[q_e, p_e'] Zi[q_e', p_e]
            t = XQ[:, Pl] * ZiP[Ql, :].transpose(2, 0, 1)
            inner = np.einsum("elw,lw->el", t, Wl)
            M[:, lo:hi] = np.add.reduceat(self.W[:, None] * inner, self.starts, axis=0)
        return 0.5 * (M + M.T)


def _objective_matrix(problem: SdpProblem, n: int) -> np.ndarray:
    offsets = np.concatenate([[0], np.cumsum(problem.blocks)]).astype(np.int64)
    C = np.zeros((n, n))
    for blk, i, j, c in problem.objective:
        gi, gj = offsets[blk] + i, offsets[blk] + j
        C[gi, gj] += 0.5 * c
        C[gj, gi] += 0.5 * c
    return C


def _sym(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def _max_step(L: np.ndarray, D: np.ndarray) -> float:
    """Largest ``alpha`` with ``L L^T + alpha D >= 0`` (``inf`` if unbounded)."""
    T = solve_triangular(L, D, lower=True)
    T = solve_triangular(L, T.T, lower=True)
    lam = np.linalg.eigvalsh(_sym(T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _cholesky(A: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NumericError("iterate lost positive definiteness") from exc


def solve(problem: SdpProblem, tol: float = 1e-7, max_iter: int = 200) -> SdpSolution:
    """Solve ``problem`` to relative accuracy ``tol``.

    On breakdown or iteration exhaustion the best iterate so far is returned
    with status ``max-iterations``; no exception escapes for numerical trouble.
    """
    problem.validate()
    op = _Operator(problem)
    n, m = op.n, op.m
    sign = -1.0 if problem.sense is Sense.MAXIMIZE else 1.0
    C = sign * _objective_matrix(problem, n)
    b = np.array([c.rhs for c in problem.constraints])

    normC = np.linalg.norm(C)
    normb = np.linalg.norm(b)
    ratio = np.max((1.0 + np.abs(b)) / (1.0 + op.norms))
    xi = max(10.0, np.sqrt(n), n * ratio)
    eta = max(10.0, np.sqrt(n), op.norms.max(), normC)
    X = xi * np.eye(n)
    Z = eta * np.eye(n)
    y = np.zeros(m)

    # block-diagonal mask so that dense arithmetic never leaks across blocks
    mask = np.zeros((n, n), dtype=bool)
    for s in op.block_slices:
        mask[s, s] = True

    gamma = 0.95
    history: list[dict] = []
    status = Status.MAX_ITERATIONS
    best = None
    it = 0
    for it in range(max_iter + 1):
        rp = b - op.apply(X)
        Rd = C - op.adjoint(y) - Z
        pobj = float(np.sum(C * X))
        dobj = float(b @ y)
        mu = float(np.sum(X * Z)) / n
        pinf = float(np.linalg.norm(rp)) / (1.0 + normb)
        dinf = float(np.linalg.norm(Rd)) / (1.0 + normC)
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        history.append(
            {"iteration": it, "primal": sign * pobj, "dual": sign * dobj, "mu": mu, "pinf": pinf, "dinf": dinf}
        )
        merit = max(relgap, pinf, dinf, n * mu / (1.0 + abs(pobj) + abs(dobj)))
        if best is None or merit < best[0]:
            best = (merit, X.copy(), y.copy(), Z.copy(), it, pobj, dobj, pinf, dinf, relgap)
        if max(relgap, pinf, dinf) <= tol and n * mu / (1.0 + abs(pobj) + abs(dobj)) <= tol:
            status = Status.OPTIMAL
            break
        if np.abs(X).max() > 1e12 or np.abs(y).max(initial=0.0) > 1e12:
            status = Status.INFEASIBLE
            break
        if it == max_iter:
            break
        try:
            LX = _cholesky(X)
            LZ = _cholesky(Z)
            Zi = cho_solve((LZ, True), np.eye(n))
            Zi = _sym(Zi)
            M = op.schur(X, Zi)
            Mf = cho_factor(M + 1e-14 * np.trace(M) / m * np.eye(m), lower=True)
        except (NumericError, np.linalg.LinAlgError) as exc:
            log.warning("interior-point breakdown at iteration %d: %s", it, exc)
            break

        XRdZi = X @ Rd @ Zi
        base = op.apply(XRdZi)

        def direction(R: np.ndarray):
            dy = cho_solve(Mf, rp - op.apply(R) + base)
            dZ = Rd - op.adjoint(dy)
            dX = _sym(R - X @ dZ @ Zi)
            dX[~mask] = 0.0
            return dX, dy, dZ

        # predictor
        dXa, dya, dZa = direction(-X)
        ap = min(1.0, gamma * _max_step(LX, dXa))
        ad = min(1.0, gamma * _max_step(LZ, dZa))
        mu_aff = float(np.sum((X + ap * dXa) * (Z + ad * dZa))) / n
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3 if mu > 0 else 0.0
        # corrector
        R = sigma * mu * Zi - X - dXa @ dZa @ Zi
        dX, dy, dZ = direction(R)
        ap = min(1.0, gamma * _max_step(LX, dX))
        ad = min(1.0, gamma * _max_step(LZ, dZ))
        X = _sym(X + ap * dX)
        y = y + ad * dy
        Z = _sym(Z + ad * dZ)
        X[~mask] = 0.0
        Z[~mask] = 0.0
        if it > 10 and mu < 1e-3 * tol:
            gamma = 0.98

    if status is not Status.OPTIMAL:
        _, X, y, Z, it, pobj, dobj, pinf, dinf, relgap = best
    blocks = [X[s, s].copy() for s in op.block_slices]
    slack = [Z[s, s].copy() for s in op.block_slices]
    return SdpSolution(
        primal=blocks,
        dual=sign * y,
        primal_value=sign * pobj,
        dual_value=sign * dobj,
        status=status,
        iterations=it,
        primal_infeasibility=pinf,
        dual_infeasibility=dinf,
        gap=relgap,
        slack=slack,
        history=history,
    )


def gram_to_vectors(G, tol: float = 1e-9) -> np.ndarray:
    """Vectors whose pairwise inner products reproduce ``G``.

    Returns an array with one row per index.  Eigenvalues at or below
    ``tol * (1 + ||G||)`` are dropped; a more negative eigenvalue than
    ``-tol * (1 + ||G||)`` is a domain error.
    """
    G = np.asarray(G, dtype=float)
    w, Q = np.linalg.eigh(_sym(G))
    norm = max(abs(w[0]), abs(w[-1])) if w.size else 0.0
    cutoff = tol * (1.0 + norm)
    if w.size and w[0] < -cutoff:
        raise ValueError(f"Gram matrix is indefinite: lambda_min = {w[0]:.3e}")
    keep = w > cutoff
    # descending order so the leading coordinate carries the most weight
    w, Q = w[keep][::-1], Q[:, keep][:, ::-1]
    return Q * np.sqrt(w)
