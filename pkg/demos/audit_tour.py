"""What the assumption audit reports for the default plan, for a linear
hole-size law d = eps, and for holes inflated past their cells.

    python3 demos/audit_tour.py
"""
from sievelab import constant_kernel
from sievelab.geometry import DLaw, LimitDomain, audit_assumptions, build_sieve_plan

dom = LimitDomain()
k = constant_kernel(1.0, dom.gamma)
plan = build_sieve_plan(dom, 0.125, DLaw(), k)

print("default plan, d = eps^3")
for line in audit_assumptions(plan).lines():
    print("  " + line)

# d = eps cannot even be laid out (holes overlap), so audit the legal geometry
# under the linear law instead
print("\nsame plan audited under d = eps:", audit_assumptions(plan, DLaw(1.0, 1.0)).failed_ids)

print("holes scaled by 40:", audit_assumptions(plan.with_hole_scale(40.0)).failed_ids)
