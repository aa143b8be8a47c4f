"""Sieve on the boundary: holes pair up across Gamma within the same side and
the limit carries a nonlocal Robin term.

    python3 demos/robin_sweep.py
"""
from sievelab import constant_kernel
from sievelab.geometry import LimitDomain
from sievelab.harness import EpsilonSchedule, build_cases, run_robin_convergence

dom = LimitDomain(topology="boundary")
cases = build_cases(dom, constant_kernel(1.0, dom.gamma), EpsilonSchedule((0.25, 0.125, 0.0625)))
for c in cases:
    print(f"eps={c.eps:<7g} holes={c.plan.n_holes:4d} passages={c.plan.n_passages:5d}")

recs, trends = run_robin_convergence(cases, "x1sq", k=3, T=0.5, steps=64, samples=8)
for r in recs:
    if r.experiment == "resolvent":
        print(f"resolvent eps={r.eps:<7g} L2 {r.err_l2:.3e}")
    elif r.experiment == "eigen":
        print(f"eigen     eps={r.eps:<7g} " + " ".join(f"{v:.2e}" for v in r.lam_err))
    else:
        print(f"heat      eps={r.eps:<7g} sup {r.heat_sup_err:.3e}")
print("all trends decreasing:", all(t.passed for t in trends))
