"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Tolerances are fixed here and not tuned to the measured values.
"""
import time

import numpy as np
import pytest

from sievelab.assembly import OperatorPair, assemble_p1, assemble_reduced_sieve, assemble_sieve_full, limit_operator
from sievelab.cli import main
from sievelab.geometry import (DLaw, LimitDomain, audit_assumptions, build_sieve_plan, lattice_kernel_sum,
                               quadrature_convergence_check)
from sievelab.harness import (EpsilonSchedule, build_cases, cross_fidelity, limit_mode_oracle,
                              passage_energy_check, run_eigen_convergence, run_heat_convergence,
                              run_resolvent_convergence, run_robin_convergence, trend_ok)
from sievelab.kernel import constant_kernel, midpoint_rule
from sievelab.mesh import Grading, mesh_limit_domain, mesh_sieve
from sievelab.semigroup import heat_evolve
from sievelab.solvers import smallest_eigenpairs, solve_shifted

SCHEDULE = EpsilonSchedule((0.25, 0.125, 0.0625))


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail
    return emit


def _fmt(values):
    return "[" + ", ".join(f"{v:.4g}" for v in values) + "]"


@pytest.fixture(scope="module")
def interface_cases():
    dom = LimitDomain()
    return build_cases(dom, constant_kernel(1.0, dom.gamma), SCHEDULE)


@pytest.fixture(scope="module")
def robin_cases():
    dom = LimitDomain(topology="boundary")
    return build_cases(dom, constant_kernel(1.0, dom.gamma), SCHEDULE)


def _every_tag():
    dom, rdom = LimitDomain(), LimitDomain(topology="boundary")
    k, rk = constant_kernel(1.0, dom.gamma), constant_kernel(1.0, rdom.gamma)
    lm, rlm = mesh_limit_domain(dom, 1 / 8), mesh_limit_domain(rdom, 1 / 8)
    plan, rplan = build_sieve_plan(dom, 0.25, DLaw(), k), build_sieve_plan(rdom, 0.25, DLaw(), rk)
    return [limit_operator(lm, k), limit_operator(rlm, rk), assemble_reduced_sieve(lm, plan),
            assemble_reduced_sieve(rlm, rplan), assemble_sieve_full(mesh_sieve(plan, dom, 0.25, Grading(), 4)),
            assemble_sieve_full(mesh_sieve(rplan, rdom, 0.25, Grading(), 4))]


def test_criterion_1_exactness(verdict):
    t0 = time.perf_counter()
    worst = {"resolvent": 0.0, "kernel": 0.0, "heat": 0.0, "mass": 0.0}
    for op in _every_tag():
        one = np.ones(op.n)
        pre = "lu" if "full" in op.tag else "jacobi"
        u, _ = solve_shifted(op, one, precond=pre)
        worst["resolvent"] = max(worst["resolvent"], np.abs(u - 1).max())
        worst["kernel"] = max(worst["kernel"], np.abs(op.apply(one)).max())
        tr = heat_evolve(op, one, 0.5, 8, precond=pre)
        worst["heat"] = max(worst["heat"], np.abs(tr.states - 1).max())
        f = np.random.default_rng(0).standard_normal(op.n)
        tr = heat_evolve(op, f, 0.5, 64, precond="lu")
        worst["mass"] = max(worst["mass"], np.abs(tr.mass - tr.mass[0]).max() / max(1.0, abs(tr.mass[0])))
    wall = time.perf_counter() - t0
    ok = (worst["resolvent"] <= 1e-12 and worst["kernel"] <= 1e-10 and worst["heat"] <= 1e-12
          and worst["mass"] <= 1e-10 and wall < 1.0)
    verdict(1, ok, f"6 operator tags, |u-1|={worst['resolvent']:.1e}, |(A+B)1|={worst['kernel']:.1e}, "
                   f"heat drift={worst['heat']:.1e}, mass drift={worst['mass']:.1e}, {wall:.2f} s")


def test_criterion_2_oracle_eigenvalues(verdict):
    t0 = time.perf_counter()
    h0 = 1 / 64
    sq = mesh_limit_domain(LimitDomain(h_minus=1.0, topology="boundary"), h0)
    A, M = assemble_p1(sq.mesh)
    lam_sq = smallest_eigenpairs(OperatorPair(A, M, "bulk"), 2).values[1]
    # the 1.16 root and the pi^2 transverse mode belong to (-1/2,1/2) x (-1,1);
    # the unit square (H = 1/2) is checked against its own root s tan(s/2) = 2
    out = {}
    for H in (0.5, 1.0):
        dom = LimitDomain(h_minus=H, h_plus=H)
        lm = mesh_limit_domain(dom, h0)
        out[H] = smallest_eigenpairs(limit_operator(lm, constant_kernel(1.0, dom.gamma)), 6).values
    rel = lambda a, b: abs(a - b) / b
    checks = {
        "square pi^2": rel(lam_sq, np.pi**2),
        "H=1/2 odd mode": rel(out[0.5][1], limit_mode_oracle(0.5, 1.0)),
        "H=1 odd mode (1.16)": rel(out[1.0][1], limit_mode_oracle(1.0, 1.0)),
        "H=1 lambda_2 = pi^2": rel(out[1.0][2], np.pi**2),
    }
    wall = time.perf_counter() - t0
    ok = all(v <= 0.01 for v in checks.values()) and wall < 60
    verdict(2, ok, ", ".join(f"{k} rel={v:.1e}" for k, v in checks.items()) + f", {wall:.1f} s")


def test_criterion_3_resolvent(verdict, interface_cases):
    recs, trend = run_resolvent_convergence(interface_cases, "sign")
    e = [r.err_l2 for r in recs]
    ok = bool(np.all(np.diff(e) < 0) and e[-1] <= 0.5 * e[0])
    verdict(3, ok, f"e(eps) = {_fmt(e)} for eps = 1/4, 1/8, 1/16")


def test_criterion_4_eigenvalues(verdict, interface_cases):
    recs, trends = run_eigen_convergence(interface_cases, 5)
    errs = np.array([r.lam_err for r in recs])
    ok = bool(np.all(np.diff(errs, axis=0) < 0))
    verdict(4, ok, "; ".join(f"k={i + 1}: {_fmt(errs[:, i])}" for i in range(5)))


def test_criterion_5_heat(verdict, interface_cases):
    recs, _ = run_heat_convergence(interface_cases, "sign", T=0.5, steps=128, samples=16, theta=1.0)
    e = [r.heat_sup_err for r in recs]
    verdict(5, bool(np.all(np.diff(e) < 0)), f"sup error = {_fmt(e)}")


def test_criterion_6_robin(verdict, robin_cases):
    recs, _ = run_robin_convergence(robin_cases, "x1sq", k=5, T=0.5, steps=128, samples=16)
    res = [r.err_l2 for r in recs if r.experiment == "resolvent"]
    lam = np.array([r.lam_err for r in recs if r.experiment == "eigen"])
    heat = [r.heat_sup_err for r in recs if r.experiment == "heat"]
    ok = (trend_ok(res) and np.all(np.diff(res) < 0) and bool(np.all(np.diff(lam, axis=0) < 0))
          and bool(np.all(np.diff(heat) < 0)))
    verdict(6, ok, f"resolvent {_fmt(res)}, eigen k=1..5 max ratio last/first "
                   f"{np.max(lam[-1] / lam[0]):.3f}, heat {_fmt(heat)}")


def test_criterion_7_audit(verdict):
    dom = LimitDomain()
    k = constant_kernel(1.0, dom.gamma)
    plan = build_sieve_plan(dom, 0.125, DLaw(), k)
    default_ok = all(audit_assumptions(build_sieve_plan(dom, e, DLaw(), k)).passed for e in SCHEDULE.eps)
    linear = audit_assumptions(plan, DLaw(1.0, 1.0)).failed_ids
    eps = (0.25, 0.125, 0.0625, 0.03125)
    r = quadrature_convergence_check([build_sieve_plan(dom, e, DLaw(), k) for e in eps],
                                     lambda x, y: np.ones_like(x * y), k, midpoint_rule(dom.gamma, 64))
    r_lattice = [abs(lattice_kernel_sum(dom, e, k) - 1.0) for e in eps]
    ok = (default_ok and linear == ["d-law-5+"] and r[1] == 0.234375 and bool(np.all(np.diff(r) < 0))
          and np.allclose(r, r_lattice, atol=1e-14))
    verdict(7, ok, f"default plan passes={default_ok}, d=eps fails {linear}, r(eps) = {_fmt(r)}, "
                   f"r(1/8) = {r[1]!r}")


def test_criterion_8_cross_fidelity(verdict):
    dom = LimitDomain()
    k = constant_kernel(1.0, dom.gamma)
    cf = cross_fidelity(dom, k, SCHEDULE, 0.25)
    full = build_cases(dom, k, SCHEDULE, fidelity="full")
    ratios, trend = passage_energy_check(full, "sign")
    spread = max(ratios) / min(ratios)
    ok = cf["rel_diff"] <= 0.15 and spread <= 10 and not trend.skipped
    verdict(8, ok, f"lambda_1 full {cf['lambda1_full']:.4f} vs reduced {cf['lambda1_reduced']:.4f} "
                   f"(rel {cf['rel_diff']:.3f}), R(eps) = {_fmt(ratios)}, spread {spread:.2f}")


def test_criterion_9_solver_contract(verdict):
    import scipy.linalg as la

    rng = np.random.default_rng(2024)
    worst = 0.0
    for op in _every_tag():
        for _ in range(50):
            f = rng.standard_normal(op.n)
            u, _ = solve_shifted(op, f, precond="lu")
            worst = max(worst, np.sqrt(u @ op.M @ u) / np.sqrt(f @ op.M @ f))
    dom = LimitDomain()
    lm = mesh_limit_domain(dom, 1 / 8)
    op = limit_operator(lm, constant_kernel(1.0, dom.gamma))
    f = rng.standard_normal(op.n)
    u, _ = solve_shifted(op, f)
    ref = la.solve(op.stiffness().toarray() + op.M.toarray(), op.M @ f, assume_a="pos")
    dense = np.abs(u - ref).max() / np.abs(ref).max()
    ok = worst <= 1.0 + 1e-12 and dense <= 1e-8 and op.n <= 300
    verdict(9, ok, f"max |u|/|f| over 50 draws x 6 tags = {worst:.4f}, dense agreement {dense:.1e} "
                   f"on {op.n} DOFs")


def test_criterion_10_determinism(verdict, tmp_path):
    paths = []
    for run, threads in enumerate((2, 2)):
        out = tmp_path / f"run{run}"
        assert main(["converge", "--threads", str(threads), "--out", str(out)]) == 0
        paths.append(out / "converge.csv")
    same = paths[0].read_bytes() == paths[1].read_bytes()
    verdict(10, same, f"two converge runs with 2 threads byte-identical = {same} "
                      f"({len(paths[0].read_bytes())} bytes)")
