import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sievelab.assembly import assemble_reduced_sieve, limit_operator
from sievelab.geometry import DLaw, LimitDomain, build_sieve_plan
from sievelab.kernel import constant_kernel, gaussian_kernel, separable_kernel
from sievelab.mesh import Grading, mesh_limit_domain

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def dom():
    return LimitDomain()


@pytest.fixture(scope="session")
def robin_dom():
    return LimitDomain(topology="boundary")


@pytest.fixture(scope="session")
def k1(dom):
    return constant_kernel(1.0, dom.gamma)


@pytest.fixture(scope="session")
def kernels(dom):
    g = dom.gamma
    return {"constant": constant_kernel(1.0, g), "gaussian": gaussian_kernel(g),
            "separable": separable_kernel(g)}


@pytest.fixture(scope="session")
def lmesh8(dom):
    return mesh_limit_domain(dom, 1 / 8, Grading())


@pytest.fixture(scope="session")
def robin_lmesh8(robin_dom):
    return mesh_limit_domain(robin_dom, 1 / 8, Grading())


@pytest.fixture(scope="session")
def small_ops(dom, robin_dom, k1, lmesh8, robin_lmesh8):
    """One operator per tag on coarse meshes (full-fidelity tags included)."""
    from sievelab.assembly import assemble_sieve_full
    from sievelab.mesh import mesh_sieve

    plan = build_sieve_plan(dom, 0.25, DLaw(), k1)
    rplan = build_sieve_plan(robin_dom, 0.25, DLaw(), constant_kernel(1.0, robin_dom.gamma))
    ops = {
        "limit": limit_operator(lmesh8, k1),
        "robin-limit": limit_operator(robin_lmesh8, constant_kernel(1.0, robin_dom.gamma)),
        "sieve-reduced": assemble_reduced_sieve(lmesh8, plan),
        "robin-sieve": assemble_reduced_sieve(robin_lmesh8, rplan),
        "sieve-full": assemble_sieve_full(mesh_sieve(plan, dom, 0.25, Grading(), 4)),
        "robin-sieve-full": assemble_sieve_full(mesh_sieve(rplan, robin_dom, 0.25, Grading(), 4)),
    }
    for tag, op in ops.items():
        assert op.tag == tag
    return ops


def rng(seed=0):
    return np.random.default_rng(seed)
