"""Resolvent, eigenvalue and heat errors of the reduced sieve model against the
nonlocal interface limit, for eps = 1/4, 1/8, 1/16.

    python3 demos/interface_sweep.py
"""
import numpy as np

from sievelab import constant_kernel
from sievelab.geometry import LimitDomain
from sievelab.harness import (EpsilonSchedule, build_cases, run_eigen_convergence, run_heat_convergence,
                              run_resolvent_convergence)

dom = LimitDomain()
kernel = constant_kernel(1.0, dom.gamma)
cases = build_cases(dom, kernel, EpsilonSchedule((0.25, 0.125, 0.0625)))

for c in cases:
    print(f"eps={c.eps:<7g} holes={c.plan.n_holes:4d} passages={c.plan.n_passages:5d} "
          f"h_eps={c.plan.h_eps:.3e} dofs={c.sieve.n}")

res, t_res = run_resolvent_convergence(cases, "sign")
eig, t_eig = run_eigen_convergence(cases, 5)
heat, t_heat = run_heat_convergence(cases, "sign", T=0.5, steps=128, samples=16)

print("\n   eps     L2 error   broken H1   heat sup")
for r, h in zip(res, heat):
    print(f"{r.eps:7.4f}  {r.err_l2:.3e}  {r.err_h1b:.3e}  {h.heat_sup_err:.3e}")

print("\nrelative eigenvalue errors (k = 1..5)")
for r in eig:
    print(f"{r.eps:7.4f}  " + "  ".join(f"{v:.2e}" for v in r.lam_err))

rates = np.log2(np.array([r.err_l2 for r in res[:-1]]) / [r.err_l2 for r in res[1:]])
print("\nobserved L2 rates per halving:", np.round(rates, 2))
for t in [t_res, *t_eig, t_heat]:
    print(f"{'ok ' if t.passed else 'BAD'} {t.name}")
