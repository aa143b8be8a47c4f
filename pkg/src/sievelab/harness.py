"""Epsilon sweeps comparing sieve models with the limit operator.

A :class:`Case` bundles, for one ``eps``, the plan, the shared bulk mesh, the
limit operator and the sieve operator.  Because the bulk of the sieve mesh is
the limit mesh itself, ``J`` (restriction to the bulk) and ``L`` (extension by
zero into the passages) are index operations.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .assembly import (OperatorPair, assemble_p1, assemble_reduced_sieve, assemble_sieve_full,
                       limit_operator)
from .geometry import DLaw, LimitDomain, SievePlan, build_sieve_plan
from .kernel import InterfaceKernel
from .mesh import GluedMesh, Grading, LimitMesh, mesh_limit_domain, mesh_sieve
from .semigroup import heat_evolve
from .solvers import smallest_eigenpairs, solve_shifted

__all__ = [
    "HarnessError",
    "EpsilonSchedule",
    "Case",
    "ConvergenceRecord",
    "TrendResult",
    "identify_J",
    "lift_L",
    "l2_norm",
    "broken_h1_norm",
    "trend_ok",
    "source_vector",
    "build_cases",
    "run_resolvent_convergence",
    "run_eigen_convergence",
    "run_heat_convergence",
    "run_robin_convergence",
    "passage_energy_check",
    "cross_fidelity",
    "limit_mode_oracle",
]


class HarnessError(RuntimeError):
    pass


@dataclass(frozen=True)
class EpsilonSchedule:
    eps: tuple = (0.25, 0.125, 0.0625)
    d_law: DLaw = DLaw()
    fidelity: str = "reduced"
    h0: float = 1 / 32
    grading: Grading = Grading()
    passage_layers: int = 8
    aspect_cap: float = 500.0
    full_h0: float = 0.25

    def __post_init__(self):
        e = np.asarray(self.eps, dtype=float)
        if len(e) == 0 or np.any(e <= 0) or np.any(np.diff(e) >= 0):
            raise HarnessError("eps schedule must be positive and strictly decreasing")
        if self.fidelity not in ("reduced", "full"):
            raise HarnessError(f"unknown fidelity {self.fidelity!r}")


@dataclass(frozen=True, eq=False)
class Case:
    eps: float
    plan: SievePlan
    lmesh: LimitMesh
    limit: OperatorPair
    sieve: OperatorPair
    gmesh: GluedMesh | None = None

    @property
    def n_limit(self) -> int:
        return self.lmesh.n_dofs

    @property
    def fidelity(self) -> str:
        return "full" if self.gmesh is not None else "reduced"


@dataclass
class ConvergenceRecord:
    experiment: str
    eps: float
    model: str
    dofs_limit: int
    dofs_sieve: int
    err_l2: float = float("nan")
    err_h1b: float = float("nan")
    lam_err: list = field(default_factory=list)
    heat_sup_err: float = float("nan")
    passage_ratio: float = float("nan")
    cg_iters: int = 0
    wall_ms: float = 0.0


@dataclass(frozen=True)
class TrendResult:
    name: str
    values: tuple
    passed: bool
    skipped: bool = False


# ---------------------------------------------------------------- J and L

def identify_J(u: np.ndarray, case: Case) -> np.ndarray:
    """Sieve vector -> limit-mesh vector (drop passage DOFs)."""
    u = np.asarray(u)
    if u.shape[0] != case.sieve.n or case.sieve.n < case.n_limit:
        raise HarnessError("vector does not live on this sieve mesh")
    return u[: case.n_limit].copy()


def lift_L(f: np.ndarray, case: Case) -> np.ndarray:
    """Limit-mesh vector -> sieve vector, zero on passage interiors."""
    f = np.asarray(f, dtype=float)
    if f.shape[0] != case.n_limit:
        raise HarnessError("vector does not live on the limit mesh")
    out = np.zeros(case.sieve.n)
    out[: case.n_limit] = f
    return out


def l2_norm(op: OperatorPair, u: np.ndarray) -> float:
    return float(np.sqrt(max(u @ (op.M @ u), 0.0)))


def broken_h1_norm(op: OperatorPair, u: np.ndarray) -> float:
    """``sqrt(|grad u|^2 + |u|^2)`` on the bulk pieces (no interface terms)."""
    return float(np.sqrt(max(u @ (op.A @ u) + u @ (op.M @ u), 0.0)))


_ZERO = 1e-12


def trend_ok(values) -> bool:
    """Strictly decreasing and the last value at most half of the first.

    A sequence that is zero to rounding (``<= 1e-12``) also passes.
    """
    v = np.asarray(values, dtype=float)
    if len(v) < 2 or (np.all(np.isfinite(v)) and np.all(np.abs(v) <= _ZERO)):
        return True
    return bool(np.all(np.isfinite(v)) and np.all(np.diff(v) < 0) and v[-1] <= 0.5 * v[0])


def _decreasing(values) -> bool:
    v = np.asarray(values, dtype=float)
    if len(v) < 2 or (np.all(np.isfinite(v)) and np.all(np.abs(v) <= _ZERO)):
        return True
    return bool(np.all(np.isfinite(v)) and np.all(np.diff(v) < 0))


# ---------------------------------------------------------------- sources

def source_vector(lmesh: LimitMesh, kind) -> np.ndarray:
    """Nodal source on the limit mesh.

    ``"one"``: f = 1.  ``"sign"``: +1 on the plus side, -1 on the minus side.
    ``"x1sq"``: (x^1)^2 + 1.  A callable receives ``(x, y, side)``.
    """
    x, y = lmesh.vertices[:, 0], lmesh.vertices[:, 1]
    side = lmesh.side
    if callable(kind):
        return np.asarray(kind(x, y, side), dtype=float)
    if kind == "one":
        return np.ones(lmesh.n_dofs)
    if kind == "sign":
        if lmesh.domain.topology != "interface":
            raise HarnessError("sign source needs two sides")
        return side.astype(float)
    if kind == "x1sq":
        return x**2 + 1.0
    raise HarnessError(f"unknown source {kind!r}")


# ---------------------------------------------------------------- cases

def build_cases(domain: LimitDomain, kernel: InterfaceKernel, schedule: EpsilonSchedule,
                threads: int = 1, fidelity: str | None = None, quad_points: int = 2,
                plans: dict | None = None) -> list[Case]:
    """One :class:`Case` per eps.  Reduced cases share one uniform bulk mesh."""
    fidelity = fidelity or schedule.fidelity
    plans = plans or {}
    shared = {}
    if fidelity == "reduced":
        lm = mesh_limit_domain(domain, schedule.h0, Grading(min_angle=schedule.grading.min_angle))
        shared["lmesh"] = lm
        shared["limit"] = limit_operator(lm, kernel, quad_points)

    def make(eps):
        plan = plans.get(eps) or build_sieve_plan(domain, eps, schedule.d_law, kernel)
        if fidelity == "reduced":
            lm = shared["lmesh"]
            return Case(eps, plan, lm, shared["limit"], assemble_reduced_sieve(lm, plan))
        gm = mesh_sieve(plan, domain, schedule.full_h0, schedule.grading,
                        schedule.passage_layers, schedule.aspect_cap)
        return Case(eps, plan, gm.bulk, None, assemble_sieve_full(gm), gm)

    return _pool_map(make, schedule.eps, threads)


def _with_limit(case: Case, quad_points: int = 2) -> Case:
    if case.limit is not None:
        return case
    return Case(case.eps, case.plan, case.lmesh, limit_operator(case.lmesh, case.plan.kernel, quad_points),
                case.sieve, case.gmesh)


def _pool_map(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _precond(case: Case) -> str:
    return "lu" if case.gmesh is not None else "jacobi"


# ---------------------------------------------------------------- experiments

def run_resolvent_convergence(cases, f="sign", threads: int = 1, tol: float = 1e-10):
    """``e(eps) = |J (H_eps + 1)^-1 L f - (H + 1)^-1 f|`` per case, plus the trend verdict."""
    cases = [_with_limit(c) for c in cases]
    limit_cache = {}

    def one(case: Case):
        t0 = time.perf_counter()
        fl = source_vector(case.lmesh, f)
        key = id(case.limit)
        if key not in limit_cache:
            limit_cache[key] = solve_shifted(case.limit, fl, 1.0, tol=tol, precond=_precond(case))
        u, st0 = limit_cache[key]
        ue, st = solve_shifted(case.sieve, lift_L(fl, case), 1.0, tol=tol, precond=_precond(case))
        e = identify_J(ue, case) - u
        return ConvergenceRecord("resolvent", case.eps, case.fidelity, case.n_limit, case.sieve.n,
                                 err_l2=l2_norm(case.limit, e), err_h1b=broken_h1_norm(case.limit, e),
                                 cg_iters=st.iterations, wall_ms=1e3 * (time.perf_counter() - t0))

    for c in cases:   # solve the limit problems once, sequentially
        if id(c.limit) not in limit_cache:
            fl = source_vector(c.lmesh, f)
            limit_cache[id(c.limit)] = solve_shifted(c.limit, fl, 1.0, tol=tol, precond=_precond(c))
    recs = _pool_map(one, cases, threads)
    vals = [r.err_l2 for r in recs]
    return recs, TrendResult("resolvent", tuple(vals), trend_ok(vals), skipped=len(vals) < 2)


def run_eigen_convergence(cases, k: int = 5, threads: int = 1, tol: float = 1e-7):
    """Sorted comparison of ``lambda_1..lambda_k`` (the zero mode is index 0)."""
    if k > 8:
        raise HarnessError("k must be at most 8")
    cases = [_with_limit(c) for c in cases]
    limit_vals = {}
    for c in cases:
        if id(c.limit) not in limit_vals:
            limit_vals[id(c.limit)] = smallest_eigenpairs(c.limit, k + 1, tol=tol).values

    def one(case: Case):
        t0 = time.perf_counter()
        lam = smallest_eigenpairs(case.sieve, k + 1, tol=tol).values
        ref = limit_vals[id(case.limit)]
        err = list(np.abs(lam[1:] - ref[1:]))
        return ConvergenceRecord("eigen", case.eps, case.fidelity, case.n_limit, case.sieve.n,
                                 lam_err=err, wall_ms=1e3 * (time.perf_counter() - t0))

    recs = _pool_map(one, cases, threads)
    trends = []
    for i in range(k):
        vals = [r.lam_err[i] for r in recs]
        trends.append(TrendResult(f"lambda_{i + 1}", tuple(vals), _decreasing(vals), skipped=len(vals) < 2))
    return recs, trends


def run_heat_convergence(cases, f="sign", T: float = 0.5, steps: int = 128, samples: int = 16,
                         theta: float = 1.0, threads: int = 1, tol: float = 1e-10):
    """Max over ``samples`` uniform times of ``|J v_eps(t) - v(t)|``."""
    cases = [_with_limit(c) for c in cases]
    limit_traj = {}
    for c in cases:
        if id(c.limit) not in limit_traj:
            limit_traj[id(c.limit)] = heat_evolve(c.limit, source_vector(c.lmesh, f), T, steps, theta,
                                                  tol, "lu")

    def one(case: Case):
        t0 = time.perf_counter()
        ref = limit_traj[id(case.limit)]
        tr = heat_evolve(case.sieve, lift_L(source_vector(case.lmesh, f), case), T, steps, theta, tol, "lu")
        _, a = tr.sample(samples)
        _, b = ref.sample(samples)
        errs = [l2_norm(case.limit, case_j - bb) for case_j, bb in
                zip((identify_J(s, case) for s in a), b)]
        return ConvergenceRecord("heat", case.eps, case.fidelity, case.n_limit, case.sieve.n,
                                 heat_sup_err=float(max(errs)), cg_iters=tr.cg_iterations,
                                 wall_ms=1e3 * (time.perf_counter() - t0))

    recs = _pool_map(one, cases, threads)
    vals = [r.heat_sup_err for r in recs]
    return recs, TrendResult("heat", tuple(vals), _decreasing(vals), skipped=len(vals) < 2)


def run_robin_convergence(cases, f="x1sq", k: int = 5, T: float = 0.5, steps: int = 128,
                          samples: int = 16, threads: int = 1):
    """Resolvent, eigenvalue and heat sweeps for the boundary topology."""
    for c in cases:
        if c.plan.topology != "boundary":
            raise HarnessError("Robin sweep needs the boundary topology")
        ell = c.plan.pairing
        if np.any(ell[ell] != np.arange(len(ell))) or np.any(ell == np.arange(len(ell))):
            raise HarnessError("pairing is not a fixed-point-free involution")
    r1, t1 = run_resolvent_convergence(cases, f, threads)
    r2, t2 = run_eigen_convergence(cases, k, threads)
    r3, t3 = run_heat_convergence(cases, f, T, steps, samples, threads=threads)
    return r1 + r2 + r3, [t1, *t2, t3]


def passage_energy_check(cases, f="sign", tol: float = 1e-10):
    """``R(eps) = sum_T |u|^2_{L2(T)} / (h_eps |u|^2_{H1(M_eps)})`` for full-fidelity cases.

    ``u`` is the sieve resolvent solution for ``L f``.  Returns the ratios and
    the verdict ``max R / min R <= 10``; reduced cases are skipped.
    """
    ratios = []
    for case in cases:
        if case.gmesh is None:
            return [], TrendResult("passage_ratio", (), True, skipped=True)
        u, _ = solve_shifted(case.sieve, lift_L(source_vector(case.lmesh, f), case), 1.0, tol=tol,
                             precond="lu")
        ratios.append(passage_ratio(case, u))
    r = np.array(ratios)
    ok = bool(np.all(r > 0) and r.max() / r.min() <= 10.0) if len(r) > 1 else True
    return ratios, TrendResult("passage_ratio", tuple(ratios), ok, skipped=len(r) < 2)


def passage_ratio(case: Case, u: np.ndarray) -> float:
    gm = case.gmesh
    mass = 0.0
    for pm, g in zip(gm.passages, gm.dof_maps):
        _, m = assemble_p1(pm)
        up = u[g]
        mass += float(up @ (m @ up))
    h1 = float(u @ (case.sieve.A @ u) + u @ (case.sieve.M @ u))
    return mass / (case.plan.h_eps * h1)


def cross_fidelity(domain: LimitDomain, kernel: InterfaceKernel, schedule: EpsilonSchedule,
                   eps: float | None = None, tol: float = 1e-7) -> dict:
    """``lambda_1`` of the glued-mesh and reduced sieve models at one eps."""
    eps = schedule.eps[0] if eps is None else eps
    sched = EpsilonSchedule((eps,), schedule.d_law, "full", schedule.h0, schedule.grading,
                            schedule.passage_layers, schedule.aspect_cap, schedule.full_h0)
    full = build_cases(domain, kernel, sched, fidelity="full")[0]
    red = assemble_reduced_sieve(full.lmesh, full.plan)
    lf = smallest_eigenpairs(full.sieve, 2, tol=tol).values[1]
    lr = smallest_eigenpairs(red, 2, tol=tol).values[1]
    return {"eps": eps, "lambda1_full": float(lf), "lambda1_reduced": float(lr),
            "rel_diff": float(abs(lf - lr) / lr), "dofs_full": full.sieve.n, "dofs_reduced": red.n}


def limit_mode_oracle(half_height: float, coupling: float, tol: float = 1e-14) -> float:
    """Smallest positive root of the odd transverse mode: ``s tan(s H) = 2 c``, returns ``s^2``.

    For a constant kernel ``c = K |Gamma|``.
    """
    from scipy.optimize import brentq

    H = half_height
    g = lambda s: s * np.tan(s * H) - 2 * coupling
    s = brentq(g, 1e-12, (np.pi / 2 - 1e-12) / H, xtol=tol, rtol=4 * np.finfo(float).eps)
    return s * s
