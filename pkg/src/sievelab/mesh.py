"""Triangulations of the limit domain and of the glued sieve manifold (n = 2).

The bulk mesh is a 2:1 balanced quadtree on a structured background grid,
graded toward hole footprints on the interface.  Leaves without hanging nodes
are split into two triangles, leaves with hanging nodes into a fan around
their centre.  Interface nodes near each hole are moved along the interface so
that the hole endpoints are mesh nodes; passages are structured rectangles
whose end rows coincide node-for-node with the hole faces.

The limit mesh and the bulk part of every sieve mesh are the same object, so
transferring a function between them is a re-indexing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import LimitDomain, SievePlan

__all__ = [
    "MeshError",
    "TriMesh",
    "LimitMesh",
    "GluedMesh",
    "Grading",
    "grading_for_plan",
    "mesh_limit_domain",
    "mesh_sieve",
    "glue",
    "triangle_areas",
    "min_angles",
    "boundary_edges",
    "dump_mesh",
]


class MeshError(ValueError):
    """Mesh cannot be generated or glued as requested."""


def triangle_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Signed areas, positive for counter-clockwise triangles."""
    p = vertices[triangles]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def min_angles(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Smallest interior angle of each triangle, in degrees."""
    p = vertices[triangles]
    out = np.full(len(triangles), np.inf)
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        cos = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        out = np.minimum(out, np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))
    return out


def boundary_edges(triangles: np.ndarray) -> np.ndarray:
    """Edges used by exactly one triangle, as sorted vertex pairs."""
    e = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    e = np.sort(e, axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    return uniq[counts == 1]


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Triangle mesh with named boundary edge groups.

    Attributes
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, counter-clockwise
    boundary_groups : dict mapping a group name to an (m, 2) array of sorted vertex pairs
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_groups: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.triangles.size and np.any(triangle_areas(self.vertices, self.triangles) <= 0):
            raise MeshError("inverted or degenerate triangle")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def area(self) -> float:
        return float(np.sum(triangle_areas(self.vertices, self.triangles)))

    def check_partition(self) -> bool:
        """True if the boundary groups partition the boundary edge set."""
        bnd = {tuple(e) for e in boundary_edges(self.triangles).tolist()}
        seen: list = []
        for edges in self.boundary_groups.values():
            seen.extend(tuple(e) for e in np.sort(np.asarray(edges).reshape(-1, 2), axis=1).tolist())
        return len(seen) == len(set(seen)) and set(seen) == bnd


@dataclass(frozen=True)
class Grading:
    """Local refinement toward hole footprints on the interface.

    ``footprints`` holds ``(center, radius)`` pairs.  Cells of width ``w`` are
    split while they lie within ``rings * w`` of a footprint and are coarser
    than the target width ``2 r / edges_per_hole``.
    """

    footprints: tuple = ()
    rings: int = 3
    edges_per_hole: int = 4
    max_level: int = 16
    min_angle: float = 15.0


def grading_for_plan(plan: SievePlan, rings: int = 3, edges_per_hole: int = 4,
                     max_level: int = 16, min_angle: float = 15.0) -> Grading:
    fp = tuple((float(c), float(r)) for c, r in zip(plan.centers[:, 0], plan.radii))
    return Grading(fp, rings, edges_per_hole, max_level, min_angle)


@dataclass(frozen=True, eq=False)
class LimitMesh:
    """Mesh of the limit domain with duplicated interface nodes.

    Plus-side nodes come first (``0 .. n_plus-1``), then minus-side nodes.  In
    the boundary topology there is one side only and ``trace_minus`` equals
    ``trace_plus``.  ``hole_plus[k]`` / ``hole_minus[k]`` list the interface
    nodes of hole ``k`` ordered by ``x``.
    """

    mesh: TriMesh
    domain: LimitDomain
    n_plus: int
    trace_plus: np.ndarray
    trace_minus: np.ndarray
    trace_weights: np.ndarray
    hole_plus: tuple = ()
    hole_minus: tuple = ()
    h0: float = 0.0

    @property
    def vertices(self) -> np.ndarray:
        return self.mesh.vertices

    @property
    def triangles(self) -> np.ndarray:
        return self.mesh.triangles

    @property
    def n_dofs(self) -> int:
        return self.mesh.n_vertices

    @property
    def trace_x(self) -> np.ndarray:
        return self.mesh.vertices[self.trace_plus, 0]

    @property
    def side(self) -> np.ndarray:
        """+1 for plus-side nodes, -1 for minus-side nodes."""
        s = -np.ones(self.n_dofs, dtype=int)
        s[: self.n_plus] = 1
        return s


# ---------------------------------------------------------------- quadtree

class _HalfQuadtree:
    """Balanced quadtree on ``[-L/2, L/2] x [0, H]`` refined toward the line y = 0."""

    def __init__(self, L, H, h0, centers, radii, grading: Grading):
        self.L, self.H = L, H
        self.nx = max(1, int(round(L / h0)))
        self.ny = max(1, int(round(H / h0)))
        self.hx, self.hy = L / self.nx, H / self.ny
        order = np.argsort(centers)
        self.c = np.asarray(centers, dtype=float)[order]
        self.r = np.asarray(radii, dtype=float)[order]
        self.rings = grading.rings
        self.level = 0
        if len(self.c):
            w_target = float(np.min(2 * self.r)) / grading.edges_per_hole
            if w_target < 1e-9 * L:
                raise MeshError(f"refinement to width {w_target:.3e} is below 1e-9 L")
            self.level = max(0, int(math.ceil(math.log2(self.hx / w_target) - 1e-12)))
            if self.level > grading.max_level:
                raise MeshError(f"holes need {self.level} refinement levels (cap {grading.max_level})")
        self.leaves = {(0, i, j) for i in range(self.nx) for j in range(self.ny)}
        self._refine()
        self._balance()

    def width(self, lvl):
        return self.hx / 2**lvl

    def _needs_split(self, cell):
        lvl, i, j = cell
        if lvl >= self.level or not len(self.c):
            return False
        w = self.width(lvl)
        y0 = j * self.hy / 2**lvl
        reach = self.rings * w
        if y0 >= reach:
            return False
        x0 = -self.L / 2 + i * w
        x1 = x0 + w
        lo = np.searchsorted(self.c + self.r, x0 - reach, side="left")
        hi = np.searchsorted(self.c - self.r, x1 + reach, side="right")
        return hi > lo

    def _split(self, cell):
        lvl, i, j = cell
        self.leaves.discard(cell)
        kids = [(lvl + 1, 2 * i + a, 2 * j + b) for a in (0, 1) for b in (0, 1)]
        self.leaves.update(kids)
        return kids

    def _refine(self):
        stack = sorted(self.leaves)
        while stack:
            cell = stack.pop()
            if cell in self.leaves and self._needs_split(cell):
                stack.extend(self._split(cell))

    def covering(self, lvl, i, j):
        while lvl >= 0:
            if (lvl, i, j) in self.leaves:
                return (lvl, i, j)
            lvl, i, j = lvl - 1, i // 2, j // 2
        return None

    def _inside(self, lvl, i, j):
        return 0 <= i < self.nx * 2**lvl and 0 <= j < self.ny * 2**lvl

    def _balance(self):
        work = sorted(self.leaves, reverse=True)
        while work:
            cell = work.pop()
            if cell not in self.leaves or cell[0] < 2:
                continue
            p, pi, pj = cell[0] - 1, cell[1] // 2, cell[2] // 2
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                if not self._inside(p, pi + di, pj + dj):
                    continue
                cov = self.covering(p, pi + di, pj + dj)
                if cov is not None and cov[0] < p:
                    work.extend(self._split(cov))
                    work.append(cell)

    def _refined(self, lvl, i, j):
        return self._inside(lvl, i, j) and self.covering(lvl, i, j) is None

    def triangulate(self):
        """Vertices (y >= 0) and counter-clockwise triangles."""
        R = max(c[0] for c in self.leaves) + 1
        keys: dict = {}
        tris = []

        def node(X, Y):
            k = (X, Y)
            if k not in keys:
                keys[k] = len(keys)
            return keys[k]

        for lvl, i, j in sorted(self.leaves):
            s = 2 ** (R - lvl)
            X0, Y0, h = i * s, j * s, s // 2
            c00, c10 = node(X0, Y0), node(X0 + s, Y0)
            c11, c01 = node(X0 + s, Y0 + s), node(X0, Y0 + s)
            ring = [c00]
            if self._refined(lvl, i, j - 1):
                ring.append(node(X0 + h, Y0))
            ring.append(c10)
            if self._refined(lvl, i + 1, j):
                ring.append(node(X0 + s, Y0 + h))
            ring.append(c11)
            if self._refined(lvl, i, j + 1):
                ring.append(node(X0 + h, Y0 + s))
            ring.append(c01)
            if self._refined(lvl, i - 1, j):
                ring.append(node(X0, Y0 + h))
            if len(ring) == 4:
                tris += [(c00, c10, c11), (c00, c11, c01)]
            else:
                ctr = node(X0 + h, Y0 + h)
                tris += [(ctr, ring[k], ring[(k + 1) % len(ring)]) for k in range(len(ring))]
        lattice = np.array(list(keys.keys()), dtype=np.int64)
        order = np.lexsort((lattice[:, 0], lattice[:, 1]))
        renum = np.empty(len(order), dtype=int)
        renum[order] = np.arange(len(order))
        lattice = lattice[order]
        scale = 2**R
        verts = np.column_stack([-self.L / 2 + lattice[:, 0] * (self.hx / scale),
                                 lattice[:, 1] * (self.hy / scale)])
        verts[lattice[:, 0] == self.nx * scale, 0] = self.L / 2
        verts[lattice[:, 1] == self.ny * scale, 1] = self.H
        return verts, renum[np.array(tris, dtype=int)]


def _snap_holes(xs: np.ndarray, centers, radii, ramp: int = 2):
    """Move interface nodes so every hole ``[c - r, c + r]`` ends on nodes.

    Returns the new coordinates and, per hole, the index range ``(ia, ib)``
    into ``xs``.  Nodes within ``ramp`` positions outside the hole are spread
    linearly to absorb the shift.
    """
    xs = xs.copy()
    spans = []
    if not len(centers):
        return xs, spans
    claimed = np.zeros(len(xs), dtype=bool)
    for c, r in zip(centers, radii):
        ic = int(np.argmin(np.abs(xs - c)))
        w = min(xs[min(ic + 1, len(xs) - 1)] - xs[ic], xs[ic] - xs[max(ic - 1, 0)]) if len(xs) > 2 else 0.0
        if w <= 0:
            raise MeshError("interface too coarse to resolve a hole")
        k = max(1, int(round(2 * r / w)))
        ia = int(np.argmin(np.abs(xs - (c - k * w / 2))))
        ib = ia + k
        lo, hi = ia - ramp, ib + ramp
        if lo < 0 or hi >= len(xs):
            raise MeshError("hole too close to the end of the interface")
        gaps = np.diff(xs[lo:hi + 1])
        if np.any(np.abs(gaps - w) > 1e-9 * w) or np.any(claimed[lo + 1:hi]):
            raise MeshError("holes too close together for the chosen grading")
        claimed[lo + 1:hi] = True
        a, b = c - r, c + r
        left = np.linspace(xs[lo], a, ramp + 1)
        right = np.linspace(b, xs[hi], ramp + 1)
        inner = a + (b - a) * np.arange(k + 1) / k
        inner[-1] = b
        xs[lo:ia + 1] = left
        xs[ia:ib + 1] = inner
        xs[ib:hi + 1] = right
        spans.append((ia, ib))
    return xs, spans


def _half(L, H, h0, grading: Grading, centers, radii):
    qt = _HalfQuadtree(L, H, h0, centers, radii, grading)
    verts, tris = qt.triangulate()
    on_gamma = np.flatnonzero(verts[:, 1] == 0.0)
    on_gamma = on_gamma[np.argsort(verts[on_gamma, 0])]
    xs, spans = _snap_holes(verts[on_gamma, 0], centers, radii)
    verts[on_gamma, 0] = xs
    holes = [on_gamma[ia:ib + 1] for ia, ib in spans]
    return verts, tris, on_gamma, holes


def _edges_in(edges: np.ndarray, nodes) -> np.ndarray:
    mask = np.isin(edges, np.asarray(nodes)).all(axis=1)
    return mask


def _trace_weights(x: np.ndarray) -> np.ndarray:
    d = np.diff(x)
    w = np.zeros(len(x))
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


def mesh_limit_domain(dom: LimitDomain, h0: float, grading: Grading | None = None) -> LimitMesh:
    """Triangulate the limit domain, split along the interface.

    Parameters
    ----------
    dom : LimitDomain
        Box domain; only ``n = 2`` is meshed.
    h0 : float
        Background grid spacing.
    grading : Grading, optional
        Hole footprints to resolve.  Without it the mesh is structured.
    """
    if dom.n != 2:
        raise MeshError("meshing is implemented for n = 2 only")
    if h0 <= 0:
        raise MeshError("h0 must be positive")
    grading = grading or Grading()
    fp = sorted(grading.footprints)
    centers = np.array([c for c, _ in fp], dtype=float)
    radii = np.array([r for _, r in fp], dtype=float)
    if len(fp):
        gaps = (centers[1:] - radii[1:]) - (centers[:-1] + radii[:-1])
        if np.any(gaps <= 0) or np.any(np.abs(centers) + radii >= dom.L / 2):
            raise MeshError("hole footprints overlap or leave the interface")

    L = dom.L
    vp, tp, gp, holes_p = _half(L, dom.h_minus if dom.topology == "boundary" else dom.h_plus,
                                h0, grading, centers, radii)
    if dom.topology == "boundary":
        verts = vp * np.array([1.0, -1.0])
        tris = tp[:, [0, 2, 1]]
        n_plus = len(verts)
        trace_p = trace_m = gp
        holes_m = holes_p
    else:
        vm, tm, gm, holes_m = _half(L, dom.h_minus, h0, grading, centers, radii)
        if len(gm) != len(gp) or np.any(np.abs(vm[gm, 0] - vp[gp, 0]) > 1e-12 * L):
            raise MeshError("interface nodes of the two halves do not match")
        vm = vm * np.array([1.0, -1.0])
        n_plus = len(vp)
        verts = np.vstack([vp, vm])
        tris = np.vstack([tp, tm[:, [0, 2, 1]] + n_plus])
        trace_p, trace_m = gp, gm + n_plus
        holes_m = [h + n_plus for h in holes_m]

    mins = min_angles(verts, tris)
    if mins.min() < grading.min_angle - 1e-9:
        raise MeshError(f"minimum angle {mins.min():.2f} below floor {grading.min_angle}")

    bnd = boundary_edges(tris)
    groups = {}
    plus_gamma = _edges_in(bnd, trace_p)
    minus_gamma = _edges_in(bnd, trace_m) & ~plus_gamma if dom.topology == "interface" else np.zeros(len(bnd), bool)
    hole_mask = np.zeros(len(bnd), dtype=bool)
    for k, nodes in enumerate(holes_p):
        m = _edges_in(bnd, nodes)
        groups[f"hole_{k}_plus" if dom.topology == "interface" else f"hole_{k}"] = bnd[m]
        hole_mask |= m
    if dom.topology == "interface":
        for k, nodes in enumerate(holes_m):
            m = _edges_in(bnd, nodes)
            groups[f"hole_{k}_minus"] = bnd[m]
            hole_mask |= m
    groups["gamma_plus_side"] = bnd[plus_gamma & ~hole_mask]
    if dom.topology == "interface":
        groups["gamma_minus_side"] = bnd[minus_gamma & ~hole_mask]
    groups["outer"] = bnd[~(plus_gamma | minus_gamma)]
    mesh = TriMesh(verts, tris, groups)
    return LimitMesh(mesh=mesh, domain=dom, n_plus=n_plus, trace_plus=trace_p, trace_minus=trace_m,
                     trace_weights=_trace_weights(verts[trace_p, 0]),
                     hole_plus=tuple(holes_p), hole_minus=tuple(holes_m), h0=h0)


# ---------------------------------------------------------------- gluing

@dataclass(frozen=True, eq=False)
class GluedMesh:
    """Bulk limit mesh plus passage rectangles glued along hole faces.

    Passage ``p`` lives in its own frame ``[a, b] x [0, h_p]``.  Its top row is
    identified with the bulk nodes ``top_targets[p]`` and its bottom row with
    ``bottom_targets[p]``; ``top_anchor`` / ``bottom_anchor`` are the hole
    centres defining the face-local coordinate ``x - anchor`` on each side.
    """

    bulk: LimitMesh
    passages: tuple
    top_nodes: tuple
    top_targets: tuple
    top_anchor: np.ndarray
    bottom_nodes: tuple
    bottom_targets: tuple
    bottom_anchor: np.ndarray
    heights: np.ndarray
    dof_maps: tuple = ()
    n_dofs: int = 0

    def __post_init__(self):
        tol = 1e-12 * self.bulk.domain.L
        bv = self.bulk.vertices
        for p, pm in enumerate(self.passages):
            for nodes, targets, anchor, y in (
                    (self.top_nodes[p], self.top_targets[p], self.top_anchor[p], self.heights[p]),
                    (self.bottom_nodes[p], self.bottom_targets[p], self.bottom_anchor[p], 0.0)):
                if len(nodes) != len(targets):
                    raise MeshError(f"passage {p}: face and hole node counts differ")
                face = np.sort(pm.vertices[nodes, 0] - self.top_anchor[p])
                hole = np.sort(bv[targets, 0] - anchor)
                if np.any(np.abs(face - hole) > tol) or np.any(np.abs(pm.vertices[nodes, 1] - y) > tol) \
                        or np.any(np.abs(bv[targets, 1]) > tol):
                    raise MeshError(f"passage {p}: identified nodes do not coincide")
        maps, count = [], self.bulk.n_dofs
        for p, pm in enumerate(self.passages):
            g = np.full(pm.n_vertices, -1, dtype=int)
            for nodes, targets in ((self.top_nodes[p], self.top_targets[p]),
                                   (self.bottom_nodes[p], self.bottom_targets[p])):
                order_f = np.argsort(pm.vertices[nodes, 0])
                order_h = np.argsort(bv[targets, 0])
                g[np.asarray(nodes)[order_f]] = np.asarray(targets)[order_h]
            free = np.flatnonzero(g < 0)
            g[free] = count + np.arange(len(free))
            count += len(free)
            maps.append(g)
        object.__setattr__(self, "dof_maps", tuple(maps))
        object.__setattr__(self, "n_dofs", count)

    @property
    def n_identified(self) -> int:
        return sum(len(t) + len(b) for t, b in zip(self.top_nodes, self.bottom_nodes))

    @property
    def total_nodes(self) -> int:
        return self.bulk.n_dofs + sum(p.n_vertices for p in self.passages)

    def passage_dofs(self) -> np.ndarray:
        """Global DOFs that belong to passage interiors."""
        return np.arange(self.bulk.n_dofs, self.n_dofs)

    def area(self) -> float:
        return self.bulk.mesh.area() + sum(p.area() for p in self.passages)


def _passage_mesh(xs: np.ndarray, h: float, layers: int) -> tuple[TriMesh, np.ndarray, np.ndarray]:
    k = len(xs) - 1
    ys = h * np.arange(layers + 1) / layers
    ys[-1] = h
    X, Y = np.meshgrid(xs, ys)
    verts = np.column_stack([X.ravel(), Y.ravel()])
    idx = np.arange(len(verts)).reshape(layers + 1, k + 1)
    a, b = idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel()
    c, d = idx[1:, 1:].ravel(), idx[1:, :-1].ravel()
    tris = np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])
    bottom, top = idx[0], idx[-1]
    groups = {"passage_bottom": np.sort(np.stack([bottom[:-1], bottom[1:]], 1), 1),
              "passage_top": np.sort(np.stack([top[:-1], top[1:]], 1), 1),
              "passage_side": np.sort(np.concatenate([np.stack([idx[:-1, 0], idx[1:, 0]], 1),
                                                      np.stack([idx[:-1, -1], idx[1:, -1]], 1)]), 1)}
    return TriMesh(verts, tris, groups), top, bottom


def glue(bulk: LimitMesh, plan: SievePlan, layers: int = 8, aspect_cap: float = 500.0) -> GluedMesh:
    """Attach one passage per plan passage to a hole-resolving bulk mesh."""
    if len(bulk.hole_plus) != plan.n_holes:
        raise MeshError("bulk mesh does not resolve the plan's holes")
    order = np.argsort(plan.centers[:, 0], kind="stable")
    slot = np.empty(plan.n_holes, dtype=int)
    slot[order] = np.arange(plan.n_holes)
    meshes, tn, tt, bn, bt = [], [], [], [], []
    top_anchor, bottom_anchor = [], []
    for (i, j), h in zip(plan.passages, plan.heights):
        r = plan.radii[i]
        if h / (2 * r) > aspect_cap:
            raise MeshError(f"passage aspect ratio {h / (2 * r):.1f} exceeds cap {aspect_cap}; "
                            "use the reduced model")
        top_t = bulk.hole_plus[slot[i]]
        bot_t = bulk.hole_minus[slot[j]]
        pm, top, bottom = _passage_mesh(bulk.vertices[top_t, 0], float(h), layers)
        meshes.append(pm)
        tn.append(top)
        tt.append(top_t)
        bn.append(bottom)
        bt.append(bot_t)
        top_anchor.append(plan.centers[i, 0])
        bottom_anchor.append(plan.centers[j, 0])
    return GluedMesh(bulk=bulk, passages=tuple(meshes), top_nodes=tuple(tn), top_targets=tuple(tt),
                     top_anchor=np.array(top_anchor), bottom_nodes=tuple(bn), bottom_targets=tuple(bt),
                     bottom_anchor=np.array(bottom_anchor), heights=np.asarray(plan.heights, dtype=float))


def mesh_sieve(plan: SievePlan, dom: LimitDomain, h0: float, grading: Grading | None = None,
               layers: int = 8, aspect_cap: float = 500.0) -> GluedMesh:
    """Glued sieve mesh whose bulk is the hole-resolving limit mesh.

    ``grading`` supplies rings, edge count per hole and angle floor; its
    footprints are replaced by the plan's holes.
    """
    if dom.n != 2:
        raise MeshError("full-fidelity sieve meshes exist for n = 2 only")
    g = grading or Grading()
    fp = grading_for_plan(plan, g.rings, g.edges_per_hole, g.max_level, g.min_angle)
    bulk = mesh_limit_domain(dom, h0, fp)
    return glue(bulk, plan, layers, aspect_cap)


# ---------------------------------------------------------------- text dump

def dump_mesh(mesh: TriMesh, path) -> None:
    """Write ``nv nt``, vertex lines, triangle lines, then ``group name m`` blocks."""
    lines = [f"{mesh.n_vertices} {mesh.n_triangles}"]
    lines += [f"{x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    lines += [f"{a} {b} {c}" for a, b, c in mesh.triangles.tolist()]
    for name in sorted(mesh.boundary_groups):
        edges = np.asarray(mesh.boundary_groups[name]).reshape(-1, 2)
        lines.append(f"group {name} {len(edges)}")
        lines += [f"{a} {b}" for a, b in edges.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")
