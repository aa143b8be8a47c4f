"""Finite element operators for the limit problems and for the sieve models.

All operators act on piecewise-linear nodal vectors.  The non-local interface
term is kept as a dense block over trace DOFs and applied directly; everything
else is sparse.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .geometry import SievePlan
from .kernel import InterfaceKernel
from .mesh import GluedMesh, LimitMesh, TriMesh, triangle_areas

__all__ = [
    "AssemblyError",
    "NonlocalBlock",
    "OperatorPair",
    "assemble_p1",
    "trace_quadrature",
    "assemble_nonlocal_interface",
    "assemble_robin_nonlocal",
    "hole_mean_rows",
    "assemble_reduced_sieve",
    "assemble_sieve_full",
    "limit_operator",
    "dump_operator",
]

_MAX_TRACE = 6000


class AssemblyError(ValueError):
    pass


def _p1_element_matrices(vertices: np.ndarray, triangles: np.ndarray):
    p = vertices[triangles]
    area = triangle_areas(vertices, triangles)
    if np.any(area <= 0):
        raise AssemblyError("degenerate or inverted triangle")
    # gradients of barycentric coordinates
    b = np.stack([p[:, 1, 1] - p[:, 2, 1], p[:, 2, 1] - p[:, 0, 1], p[:, 0, 1] - p[:, 1, 1]], axis=1)
    c = np.stack([p[:, 2, 0] - p[:, 1, 0], p[:, 0, 0] - p[:, 2, 0], p[:, 1, 0] - p[:, 0, 0]], axis=1)
    ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4 * area[:, None, None])
    me = area[:, None, None] / 12 * (np.ones((3, 3)) + np.eye(3))
    return ke, me


def _scatter(triangles: np.ndarray, local: np.ndarray, n: int, dof_map=None) -> sp.csr_matrix:
    t = triangles if dof_map is None else dof_map[triangles]
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def assemble_p1(mesh: TriMesh, n: int | None = None, dof_map=None) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """P1 stiffness and consistent mass of ``mesh``.

    ``dof_map`` sends local vertex numbers to global DOFs of size ``n``.
    """
    ke, me = _p1_element_matrices(mesh.vertices, mesh.triangles)
    n = mesh.n_vertices if n is None else n
    return _scatter(mesh.triangles, ke, n, dof_map), _scatter(mesh.triangles, me, n, dof_map)


# ---------------------------------------------------------------- interface quadrature

_GAUSS = {1: (np.array([0.5]), np.array([1.0])),
          2: (np.array([0.5 - 0.5 / np.sqrt(3), 0.5 + 0.5 / np.sqrt(3)]), np.array([0.5, 0.5])),
          3: (0.5 + 0.5 * np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)]), np.array([5, 8, 5]) / 18)}


def trace_quadrature(x: np.ndarray, points: int = 2) -> tuple[np.ndarray, np.ndarray, sp.csr_matrix]:
    """Gauss points on each trace edge, their weights and the P1 evaluation matrix.

    Returns ``(nodes, weights, Phi)`` with ``Phi[q, a] = phi_a(nodes[q])``.
    """
    if points not in _GAUSS:
        raise AssemblyError("points per edge must be 1, 2 or 3")
    x = np.asarray(x, dtype=float)
    if len(x) < 2 or np.any(np.diff(x) <= 0):
        raise AssemblyError("trace nodes must be strictly increasing and at least two")
    s, w = _GAUSS[points]
    h = np.diff(x)
    nodes = (x[:-1, None] + h[:, None] * s[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    e = np.repeat(np.arange(len(h)), points)
    ss = np.tile(s, len(h))
    rows = np.concatenate([np.arange(len(nodes))] * 2)
    cols = np.concatenate([e, e + 1])
    vals = np.concatenate([1 - ss, ss])
    phi = sp.csr_matrix((vals, (rows, cols)), shape=(len(nodes), len(x)))
    return nodes, weights, phi


def _kernel_blocks(kernel: InterfaceKernel, x: np.ndarray, points: int):
    if len(x) > _MAX_TRACE:
        raise AssemblyError(f"{len(x)} trace DOFs exceed the dense-block limit {_MAX_TRACE}")
    nodes, w, phi = trace_quadrature(x, points)
    kmat = kernel(nodes[:, None], nodes[None, :])
    kappa = kmat @ w
    kw = (w[:, None] * kmat) * w[None, :]
    g = np.asarray((phi.T @ (phi.T @ kw).T).T)
    g = 0.5 * (g + g.T)
    d = (phi.T @ sp.diags(w * kappa) @ phi).tocsr()
    return d, g


@dataclass(frozen=True, eq=False)
class NonlocalBlock:
    """Dense non-local coupling over trace DOFs.

    Interface form: ``v+^T D u+ - v+^T G u- - v-^T G^T u+ + v-^T D u-``, which is
    the quadrature of ``int int K (u+(x) - u-(y)) (v+(x) - v-(y))``.
    Single-trace form (``minus_dofs is None``): ``2 (v^T D u - v^T G u)``.
    """

    plus_dofs: np.ndarray
    minus_dofs: np.ndarray | None
    diag_plus: sp.csr_matrix
    diag_minus: sp.csr_matrix
    cross: np.ndarray

    @property
    def single(self) -> bool:
        return self.minus_dofs is None

    def apply(self, u: np.ndarray, scale: float = 1.0, out: np.ndarray | None = None) -> np.ndarray:
        out = np.zeros_like(u, dtype=float) if out is None else out
        up = u[self.plus_dofs]
        if self.single:
            out[self.plus_dofs] += 2 * scale * (self.diag_plus @ up - self.cross @ up)
            return out
        um = u[self.minus_dofs]
        out[self.plus_dofs] += scale * (self.diag_plus @ up - self.cross @ um)
        out[self.minus_dofs] += scale * (self.diag_minus @ um - self.cross.T @ up)
        return out

    def diagonal(self, n: int, scale: float = 1.0) -> np.ndarray:
        d = np.zeros(n)
        if self.single:
            d[self.plus_dofs] += 2 * scale * (self.diag_plus.diagonal() - np.diag(self.cross))
        else:
            d[self.plus_dofs] += scale * self.diag_plus.diagonal()
            d[self.minus_dofs] += scale * self.diag_minus.diagonal()
        return d

    def to_sparse(self, n: int, scale: float = 1.0) -> sp.csr_matrix:
        p = self.plus_dofs
        m = len(p)
        pp = sp.coo_matrix(self.diag_plus)
        if self.single:
            g = sp.coo_matrix(self.cross)
            rows = np.concatenate([p[pp.row], p[g.row]])
            cols = np.concatenate([p[pp.col], p[g.col]])
            vals = 2 * scale * np.concatenate([pp.data, -g.data])
            return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        q = self.minus_dofs
        mm = sp.coo_matrix(self.diag_minus)
        gi, gj = np.meshgrid(np.arange(m), np.arange(len(q)), indexing="ij")
        gv = self.cross.ravel()
        rows = np.concatenate([p[pp.row], q[mm.row], p[gi.ravel()], q[gj.ravel()]])
        cols = np.concatenate([p[pp.col], q[mm.col], q[gj.ravel()], p[gi.ravel()]])
        vals = scale * np.concatenate([pp.data, mm.data, -gv, -gv])
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    def energy(self, u: np.ndarray) -> float:
        return float(u @ self.apply(u))


def assemble_nonlocal_interface(lmesh: LimitMesh, kernel: InterfaceKernel, points: int = 2) -> NonlocalBlock:
    """Block for ``int int K(x, y) (u+(x) - u-(y)) (v+(x) - v-(y))`` on the two traces.

    The diagonal parts are boundary mass matrices weighted by the quadrature
    value of ``kappa(x) = int K(x, y) dy`` at the same nodes used for the
    cross matrix, which makes the block annihilate constants exactly.
    """
    if lmesh.domain.topology != "interface":
        raise AssemblyError("interface block needs the interface topology")
    xp = lmesh.vertices[lmesh.trace_plus, 0]
    xm = lmesh.vertices[lmesh.trace_minus, 0]
    if len(xp) == 0 or len(xp) != len(xm) or np.any(np.abs(xp - xm) > 1e-12 * lmesh.domain.L):
        raise AssemblyError("plus and minus traces do not match")
    d, g = _kernel_blocks(kernel, xp, points)
    return NonlocalBlock(lmesh.trace_plus.copy(), lmesh.trace_minus.copy(), d, d, g)


def assemble_robin_nonlocal(lmesh: LimitMesh, kernel: InterfaceKernel, points: int = 2) -> NonlocalBlock:
    """Single-trace block for ``int int K(x, y) (u(x) - u(y)) (v(x) - v(y))``."""
    if lmesh.domain.topology != "boundary":
        raise AssemblyError("Robin block needs the boundary topology")
    x = lmesh.vertices[lmesh.trace_plus, 0]
    d, g = _kernel_blocks(kernel, x, points)
    return NonlocalBlock(lmesh.trace_plus.copy(), None, d, d, g)


# ---------------------------------------------------------------- operator container

@dataclass(frozen=True, eq=False)
class OperatorPair:
    """Stiffness-like operator ``A + C + scale * B`` and mass ``M``.

    ``A`` is the bulk stiffness, ``C`` an optional sparse passage coupling and
    ``B`` an optional dense non-local block.
    """

    A: sp.csr_matrix
    M: sp.csr_matrix
    tag: str
    block: NonlocalBlock | None = None
    block_scale: float = 1.0
    coupling: sp.csr_matrix | None = None

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def apply(self, u: np.ndarray) -> np.ndarray:
        out = self.A @ u
        if self.coupling is not None:
            out = out + self.coupling @ u
        if self.block is not None:
            self.block.apply(u, self.block_scale, out)
        return out

    def energy(self, u: np.ndarray) -> float:
        return float(u @ self.apply(u))

    def diagonal(self) -> np.ndarray:
        d = self.A.diagonal().copy()
        if self.coupling is not None:
            d += self.coupling.diagonal()
        if self.block is not None:
            d += self.block.diagonal(self.n, self.block_scale)
        return d

    def stiffness(self) -> sp.csr_matrix:
        """Everything except the mass, as one sparse matrix (block densified)."""
        s = self.A
        if self.coupling is not None:
            s = s + self.coupling
        if self.block is not None:
            s = s + self.block.to_sparse(self.n, self.block_scale)
        return s.tocsr()

    def volume(self) -> float:
        one = np.ones(self.n)
        return float(one @ (self.M @ one))


def limit_operator(lmesh: LimitMesh, kernel: InterfaceKernel, points: int = 2) -> OperatorPair:
    """Limit operator on ``lmesh``: interface form, or the Robin form in the boundary topology.

    The Robin double integral enters with weight 1/2; this is the normalisation
    reached by the sieve with one passage per hole pair and agrees with the
    flux condition ``du/dn = -int K (u(x) - u(y)) dy``.
    """
    A, M = assemble_p1(lmesh.mesh)
    if lmesh.domain.topology == "interface":
        return OperatorPair(A, M, "limit", assemble_nonlocal_interface(lmesh, kernel, points))
    return OperatorPair(A, M, "robin-limit", assemble_robin_nonlocal(lmesh, kernel, points), 0.5)


# ---------------------------------------------------------------- reduced sieve

def hole_mean_rows(x: np.ndarray, dofs: np.ndarray, centers: np.ndarray, radii: np.ndarray,
                   n: int) -> sp.csr_matrix:
    """Rows computing the exact mean of the P1 trace over each interval ``c +- r``.

    ``x`` are the sorted trace coordinates and ``dofs`` the matching DOF numbers.
    """
    x = np.asarray(x, dtype=float)
    rows, cols, vals = [], [], []
    for k, (c, r) in enumerate(zip(centers, radii)):
        lo, hi = c - r, c + r
        e0 = max(int(np.searchsorted(x, lo, side="right")) - 1, 0)
        e1 = min(int(np.searchsorted(x, hi, side="left")), len(x) - 1)
        covered = 0.0
        for e in range(e0, e1):
            a, b = max(lo, x[e]), min(hi, x[e + 1])
            if b <= a:
                continue
            he = x[e + 1] - x[e]
            wl = ((x[e + 1] - a) ** 2 - (x[e + 1] - b) ** 2) / (2 * he)
            wr = ((b - x[e]) ** 2 - (a - x[e]) ** 2) / (2 * he)
            rows += [k, k]
            cols += [dofs[e], dofs[e + 1]]
            vals += [wl / (2 * r), wr / (2 * r)]
            covered += b - a
        if covered <= 0:
            raise AssemblyError(f"hole {k} is not covered by any trace DOF")
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(centers), n))


def assemble_reduced_sieve(lmesh: LimitMesh, plan: SievePlan) -> OperatorPair:
    """Bulk stiffness plus one rank-one conductance coupling per passage.

    The coupling energy is ``sum_p K_p (mean_{D_i} u+ - mean_{D_j} u-)^2``; the
    mass is the bulk mass.
    """
    A, M = assemble_p1(lmesh.mesh)
    n = lmesh.n_dofs
    x = lmesh.vertices[lmesh.trace_plus, 0]
    centers, radii = plan.centers[:, 0], plan.radii
    if np.any(centers - radii < x[0] - 1e-12) or np.any(centers + radii > x[-1] + 1e-12):
        raise AssemblyError("plan holes leave the meshed interface")
    plus = hole_mean_rows(x, lmesh.trace_plus, centers, radii, n)
    minus = plus if plan.topology == "boundary" else hole_mean_rows(x, lmesh.trace_minus, centers, radii, n)
    i, j = plan.passages[:, 0], plan.passages[:, 1]
    D = (plus[i] - minus[j]).tocsr()
    C = (D.T @ sp.diags(plan.conductance) @ D).tocsr()
    tag = "sieve-reduced" if plan.topology == "interface" else "robin-sieve"
    return OperatorPair(A, M, tag, coupling=C)


def assemble_sieve_full(gmesh: GluedMesh, topology: str | None = None) -> OperatorPair:
    """Neumann stiffness and mass on the glued DOFs (bulk plus meshed passages)."""
    n = gmesh.n_dofs
    A, M = assemble_p1(gmesh.bulk.mesh, n)
    for pm, g in zip(gmesh.passages, gmesh.dof_maps):
        a, m = assemble_p1(pm, n, g)
        A = A + a
        M = M + m
    topology = topology or gmesh.bulk.domain.topology
    tag = "sieve-full" if topology == "interface" else "robin-sieve-full"
    return OperatorPair(A.tocsr(), M.tocsr(), tag)


def dump_operator(op: OperatorPair, directory) -> list[Path]:
    """Matrix Market files for the sparse parts, plain text for the dense block."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for name, mat in (("stiffness", op.A), ("mass", op.M), ("coupling", op.coupling)):
        if mat is not None:
            f = out / f"{op.tag}_{name}.mtx"
            scipy.io.mmwrite(str(f), mat, symmetry="general")
            files.append(f)
    if op.block is not None:
        f = out / f"{op.tag}_cross.txt"
        np.savetxt(f, op.block.cross, fmt="%.17g")
        files.append(f)
    return files
