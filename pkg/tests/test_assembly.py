import numpy as np
import pytest
import scipy.io
from hypothesis import given, strategies as st

from sievelab.assembly import (AssemblyError, OperatorPair, assemble_nonlocal_interface, assemble_p1,
                               assemble_reduced_sieve, assemble_robin_nonlocal, dump_operator, hole_mean_rows,
                               limit_operator, trace_quadrature)
from sievelab.geometry import DLaw, LimitDomain, build_sieve_plan
from sievelab.kernel import constant_kernel, gaussian_kernel
from sievelab.mesh import MeshError, TriMesh, mesh_limit_domain

TAGS = ["limit", "robin-limit", "sieve-reduced", "robin-sieve", "sieve-full", "robin-sieve-full"]


def unit_square(h0):
    """Single-piece unit square, meshed as the one-sided boundary domain."""
    return mesh_limit_domain(LimitDomain(h_minus=1.0, topology="boundary"), h0)


def test_element_rows_sum_to_zero():
    m = TriMesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 2]]), {})
    A, M = assemble_p1(m)
    assert np.abs(A.toarray().sum(axis=1)).max() < 1e-15
    assert M.sum() == pytest.approx(0.5)


def test_degenerate_triangle_rejected():
    with pytest.raises((MeshError, AssemblyError)):
        TriMesh(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]), np.array([[0, 1, 2]]), {})


def test_unit_square_mass_and_cosine_quotient():
    lm = unit_square(1 / 32)
    A, M = assemble_p1(lm.mesh)
    one = np.ones(lm.n_dofs)
    assert one @ M @ one == pytest.approx(1.0, abs=1e-12)
    u = np.cos(np.pi * lm.vertices[:, 0])
    rq = (u @ A @ u) / (u @ M @ u)
    assert rq == pytest.approx(np.pi**2, rel=5e-3)


def test_trace_quadrature_integrates_linears():
    x = np.array([-0.5, -0.1, 0.2, 0.5])
    nodes, w, phi = trace_quadrature(x, 2)
    assert w.sum() == pytest.approx(1.0)
    assert np.allclose(phi @ x, nodes)


def test_interface_block_examples(lmesh8, k1):
    blk = assemble_nonlocal_interface(lmesh8, k1)
    n = lmesh8.n_dofs
    assert np.abs(blk.apply(np.full(n, 3.0))).max() < 1e-14
    jump = (lmesh8.side > 0).astype(float)
    assert blk.energy(jump) == pytest.approx(1.0, abs=1e-12)
    assert blk.energy(1 - jump) == pytest.approx(1.0, abs=1e-12)


def test_interface_block_sign_swap_invariance(lmesh8):
    blk = assemble_nonlocal_interface(lmesh8, gaussian_kernel(lmesh8.domain.gamma, 1.0, 0.3))
    u = np.random.default_rng(3).standard_normal(lmesh8.n_dofs)
    swapped = u.copy()
    swapped[lmesh8.trace_plus], swapped[lmesh8.trace_minus] = u[lmesh8.trace_minus], u[lmesh8.trace_plus]
    assert blk.energy(swapped) == pytest.approx(blk.energy(u), rel=1e-12)


def test_robin_block_examples(robin_lmesh8, robin_dom):
    k = constant_kernel(1.0, robin_dom.gamma)
    blk = assemble_robin_nonlocal(robin_lmesh8, k)
    x = robin_lmesh8.vertices[:, 0]
    assert np.abs(blk.apply(np.ones(robin_lmesh8.n_dofs))).max() < 1e-14
    assert blk.energy(x) == pytest.approx(1 / 6, abs=1e-6)
    blk2 = assemble_robin_nonlocal(robin_lmesh8, constant_kernel(2.0, robin_dom.gamma))
    assert blk2.energy(x) == pytest.approx(2 * blk.energy(x), rel=1e-14)


def test_topology_mismatch(lmesh8, robin_lmesh8, k1):
    with pytest.raises(AssemblyError):
        assemble_robin_nonlocal(lmesh8, k1)
    with pytest.raises(AssemblyError):
        assemble_nonlocal_interface(robin_lmesh8, k1)


def test_hole_means_exact_for_linears():
    x = np.linspace(-0.5, 0.5, 11)
    rows = hole_mean_rows(x, np.arange(11), np.array([0.03, -0.21]), np.array([0.07, 0.013]), 11)
    f = 2 * x + 1
    assert np.allclose(rows @ f, 2 * np.array([0.03, -0.21]) + 1, atol=1e-14)
    assert np.allclose(rows.sum(axis=1), 1.0)


def test_reduced_coupling_energy(lmesh8, dom, k1):
    from dataclasses import replace
    plan = build_sieve_plan(dom, 0.25, DLaw(), k1)
    jump = (lmesh8.side > 0).astype(float)
    op = assemble_reduced_sieve(lmesh8, plan)
    assert np.abs(op.apply(np.ones(op.n))).max() < 1e-14
    assert jump @ op.coupling @ jump == pytest.approx(plan.conductance.sum(), rel=1e-13)
    one = replace(plan, passages=plan.passages[:1], heights=plan.heights[:1], conductance=plan.conductance[:1])
    op1 = assemble_reduced_sieve(lmesh8, one)
    assert jump @ op1.coupling @ jump == pytest.approx(plan.conductance[0], rel=1e-14)


@pytest.mark.parametrize("tag", TAGS)
def test_constants_in_kernel_and_psd(tag, small_ops):
    op = small_ops[tag]
    assert np.abs(op.apply(np.ones(op.n))).max() < 1e-10
    S = op.stiffness()
    assert abs(S - S.T).max() < 1e-13 * max(1.0, abs(S).max())
    X = np.random.default_rng(7).standard_normal((op.n, 100))
    q = np.einsum("ij,ij->j", X, S @ X)
    assert np.all(q >= -1e-10 * np.einsum("ij,ij->j", X, X))
    # matrix-free and assembled forms agree
    u = X[:, 0]
    assert np.allclose(op.apply(u), S @ u, atol=1e-12)
    assert np.allclose(op.diagonal(), S.diagonal(), atol=1e-13)


def test_form_consistency_order():
    # u+ = x^2 + y on the upper half, u- = 0; K = 1 gives h[u,u] = 2/3 + 1/80
    exact = 2 / 3 + 1 / 80
    errs = []
    for h0 in (1 / 4, 1 / 8, 1 / 16, 1 / 32):
        dom = LimitDomain()
        lm = mesh_limit_domain(dom, h0)
        op = limit_operator(lm, constant_kernel(1.0, dom.gamma))
        x, y = lm.vertices.T
        u = np.where(lm.side > 0, x**2 + y, 0.0)
        errs.append(abs(op.energy(u) - exact))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.0)


@given(st.floats(0.2, 3.0), st.integers(0, 2**31))
def test_block_linear_in_kernel(c, seed):
    dom = LimitDomain()
    lm = mesh_limit_domain(dom, 0.25)
    u = np.random.default_rng(seed).standard_normal(lm.n_dofs)
    e1 = assemble_nonlocal_interface(lm, constant_kernel(1.0, dom.gamma)).energy(u)
    ec = assemble_nonlocal_interface(lm, constant_kernel(c, dom.gamma)).energy(u)
    assert ec == pytest.approx(c * e1, rel=1e-12, abs=1e-14)
    assert e1 >= -1e-14


def test_dump_operator_roundtrip(tmp_path, small_ops):
    op = small_ops["sieve-reduced"]
    files = dump_operator(op, tmp_path)
    A = scipy.io.mmread(str(tmp_path / "sieve-reduced_stiffness.mtx"))
    assert abs(A.tocsr() - op.A).max() < 1e-15
    assert {f.name for f in files} == {"sieve-reduced_stiffness.mtx", "sieve-reduced_mass.mtx",
                                       "sieve-reduced_coupling.mtx"}
    files = dump_operator(small_ops["limit"], tmp_path)
    g = np.loadtxt(tmp_path / "limit_cross.txt")
    assert np.array_equal(g, small_ops["limit"].block.cross)
