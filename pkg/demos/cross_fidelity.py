"""Glued-mesh model (every passage meshed as a thin strip) against the reduced
model at eps = 1/4, plus the passage energy share at 1/4 and 1/8.

    python3 demos/cross_fidelity.py
"""
from sievelab import constant_kernel
from sievelab.geometry import LimitDomain
from sievelab.harness import EpsilonSchedule, build_cases, cross_fidelity, passage_energy_check

dom = LimitDomain()
k = constant_kernel(1.0, dom.gamma)
sched = EpsilonSchedule((0.25, 0.125))

cf = cross_fidelity(dom, k, sched, 0.25)
print(f"lambda_1 full    {cf['lambda1_full']:.5f} ({cf['dofs_full']} dofs)")
print(f"lambda_1 reduced {cf['lambda1_reduced']:.5f} ({cf['dofs_reduced']} dofs)")
print(f"relative gap     {cf['rel_diff']:.3f}")

ratios, trend = passage_energy_check(build_cases(dom, k, sched, fidelity="full"), "sign")
for e, r in zip(sched.eps, ratios):
    print(f"eps={e:<6g} passage energy / total = {r:.4e}")
