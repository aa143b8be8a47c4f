"""Shifted linear solves and smallest eigenpairs for :class:`OperatorPair` objects.

Linear systems ``(K + shift M) u = b`` (``K`` = stiffness plus coupling plus
non-local block) are solved by preconditioned conjugate gradients.  The
constant vector is in the kernel of ``K``, so the mass of the solution is
known in closed form; it is used both for the initial guess and for a final
correction, which keeps mass balances exact to rounding.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import OperatorPair

__all__ = ["SolverError", "SolveStats", "EigenResult", "solve_system", "solve_shifted",
           "smallest_eigenpairs", "rayleigh_quotient", "Factorization"]


class SolverError(RuntimeError):
    def __init__(self, message: str, stats=None):
        super().__init__(message)
        self.stats = stats


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    residual: float
    wall_ms: float
    converged: bool = True


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    iterations: int = 0


class Factorization:
    """Sparse LU of ``K + shift M`` used as a preconditioner."""

    def __init__(self, op: OperatorPair, shift: float):
        mat = (op.stiffness() + shift * op.M).tocsc()
        self.lu = spla.splu(mat)
        self.shift = shift

    def __call__(self, r):
        return self.lu.solve(np.asarray(r, dtype=float))


def _system(op: OperatorPair, shift: float) -> spla.LinearOperator:
    M = op.M
    return spla.LinearOperator((op.n, op.n), matvec=lambda u: op.apply(u) + shift * (M @ u), dtype=float)


def solve_system(op: OperatorPair, rhs: np.ndarray, shift: float = 1.0, tol: float = 1e-10,
                 maxiter: int = 20000, precond: str | Factorization = "jacobi") -> tuple[np.ndarray, SolveStats]:
    """Solve ``(K + shift M) u = rhs`` by preconditioned CG.

    ``precond`` is ``"jacobi"``, ``"lu"`` or a prebuilt :class:`Factorization`.
    """
    if shift <= 0:
        raise ValueError("shift must be positive")
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (op.n,):
        raise ValueError(f"right-hand side has shape {rhs.shape}, expected ({op.n},)")
    t0 = time.perf_counter()
    one = np.ones(op.n)
    m1 = op.M @ one
    vol = float(one @ m1)
    c0 = float(one @ rhs) / (shift * vol)
    x0 = np.full(op.n, c0)
    if isinstance(precond, Factorization):
        pre = spla.LinearOperator((op.n, op.n), matvec=precond, dtype=float)
    elif precond == "lu":
        pre = spla.LinearOperator((op.n, op.n), matvec=Factorization(op, shift), dtype=float)
    elif precond == "jacobi":
        d = op.diagonal() + shift * op.M.diagonal()
        pre = sp.diags(1.0 / d)
    else:
        raise ValueError(f"unknown preconditioner {precond!r}")
    count = [0]

    def cb(_):
        count[0] += 1

    system = _system(op, shift)
    bnorm = float(np.linalg.norm(rhs))
    if bnorm == 0.0:
        return np.zeros(op.n), SolveStats(0, 0.0, 1e3 * (time.perf_counter() - t0))
    u, info = spla.cg(system, rhs, x0=x0, rtol=tol, atol=0.0, maxiter=maxiter, M=pre, callback=cb)
    # restore the exact mass balance 1^T (K + shift M) u = 1^T rhs
    u = u + (float(one @ rhs) - shift * float(m1 @ u)) / (shift * vol)
    res = float(np.linalg.norm(rhs - system @ u)) / bnorm
    stats = SolveStats(count[0], res, 1e3 * (time.perf_counter() - t0), info == 0 and res <= 10 * tol)
    if not stats.converged:
        raise SolverError(f"CG did not reach tolerance {tol:g} (residual {res:.2e}, {count[0]} iterations)", stats)
    return u, stats


def solve_shifted(op: OperatorPair, f: np.ndarray, shift: float = 1.0, **kw) -> tuple[np.ndarray, SolveStats]:
    """Resolvent solve ``(K + shift M) u = M f``."""
    f = np.asarray(f, dtype=float)
    if f.shape != (op.n,):
        raise ValueError(f"f has shape {f.shape}, expected ({op.n},)")
    return solve_system(op, op.M @ f, shift, **kw)


def rayleigh_quotient(op: OperatorPair, u: np.ndarray) -> float:
    u = np.asarray(u, dtype=float)
    mn = float(u @ (op.M @ u))
    if mn <= 0:
        raise ValueError("zero M-norm")
    return op.energy(u) / mn


def _residuals(op: OperatorPair, vals, vecs) -> np.ndarray:
    out = []
    for lam, v in zip(vals, vecs.T):
        mv = op.M @ v
        r = op.apply(v) - lam * mv
        out.append(np.linalg.norm(r) / (max(1.0, abs(lam)) * np.linalg.norm(mv)))
    return np.array(out)


def _finish(op, vals, vecs, iterations):
    order = np.argsort(vals, kind="stable")
    vals, vecs = np.asarray(vals)[order], vecs[:, order]
    # M-orthonormalise (eigh of the Gram matrix keeps the span)
    gram = vecs.T @ (op.M @ vecs)
    w, q = la.eigh(0.5 * (gram + gram.T))
    vecs = vecs @ (q / np.sqrt(w)) @ q.T
    return EigenResult(vals, vecs, _residuals(op, vals, vecs), iterations)


def smallest_eigenpairs(op: OperatorPair, k: int, tol: float = 1e-7, maxiter: int = 400,
                        precond: str = "lu", seed: int = 0, dense_limit: int = 400) -> EigenResult:
    """``k`` smallest eigenpairs of ``K u = lambda M u`` (the zero mode included).

    The constant vector is an exact eigenvector with eigenvalue 0; it is
    deflated and the remaining ``k - 1`` pairs are found by LOBPCG in its
    M-orthogonal complement.  Small problems are solved densely.
    """
    if k < 1 or k >= op.n:
        raise ValueError("need 1 <= k < dimension")
    one = np.ones((op.n, 1)) / np.sqrt(op.volume())
    if op.n <= dense_limit:
        S = op.stiffness().toarray()
        vals, vecs = la.eigh(0.5 * (S + S.T), op.M.toarray(), subset_by_index=[0, k - 1])
        return _finish(op, vals, vecs, 0)
    if k == 1:
        return _finish(op, np.zeros(1), one, 0)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((op.n, k - 1))
    A = spla.LinearOperator((op.n, op.n), matvec=op.apply, matmat=lambda U: np.column_stack(
        [op.apply(u) for u in U.T]), dtype=float)

    def run(kind, X, iters):
        if kind == "lu":
            fac = Factorization(op, 1.0)
            pre = spla.LinearOperator((op.n, op.n), matvec=fac, matmat=lambda R: np.column_stack(
                [fac(r) for r in R.T]), dtype=float)
        else:
            d = op.diagonal() + op.M.diagonal()
            pre = sp.diags(1.0 / d)
        with warnings.catch_warnings():
            # convergence is judged by the explicit residuals below
            warnings.simplefilter("ignore", UserWarning)
            vals, vecs, hist = spla.lobpcg(A, X, B=op.M, M=pre, Y=one, tol=tol * 1e-2, maxiter=iters,
                                           largest=False, retResidualNormsHistory=True)
        return vals, vecs, len(hist)

    vals, vecs, its = run(precond, X, maxiter)
    res = _finish(op, np.concatenate([[0.0], vals]), np.column_stack([one, vecs]), its)
    if np.all(res.residuals[1:] <= tol):
        return res
    # restart from the current block with the factorised preconditioner
    vals, vecs, its2 = run("lu", vecs, 4 * maxiter)
    res = _finish(op, np.concatenate([[0.0], vals]), np.column_stack([one, vecs]), its + its2)
    if np.all(res.residuals[1:] <= tol):
        return res
    raise SolverError(f"eigensolver did not converge: residuals {res.residuals}", res)
