"""Limit domains, sieve plans and the numerical audit of their scaling assumptions.

A :class:`SievePlan` is the combinatorial and metric description of a sieve
manifold: admissible cells on the interface, the small holes placed in their
sub-cells, the pairing of holes, and passage heights and conductances.  The
builder implements the cube-lattice construction in which every pair of cells
``(s, t)`` is joined by exactly one passage, so that the passage conductances
``K_ij`` form a Riemann sum of the prescribed kernel.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .kernel import GammaBox, GammaQuadrature, InterfaceKernel, double_integral, kernel_from_spec

__all__ = [
    "LimitDomain",
    "DLaw",
    "SievePlan",
    "PlanError",
    "AuditEntry",
    "AuditReport",
    "Disk",
    "ConvexShape",
    "StarShaped",
    "ball_volume",
    "admissible_cells",
    "build_sieve_plan",
    "audit_assumptions",
    "lambda_N_lower_bound",
    "riemann_sum",
    "lattice_kernel_sum",
    "quadrature_convergence_check",
    "plan_to_json",
    "plan_from_json",
    "AUDIT_IDS",
]

AUDIT_IDS = ("shape1", "shape2", "a1", "a2", "a3", "a4", "a5", "main1", "main2",
             "drho", "2drho", "d-law-5+", "d-law-4+")

_REL = 1e-12


class PlanError(ValueError):
    """A sieve plan cannot be built from the requested parameters."""


def ball_volume(d: int, r: float = 1.0) -> float:
    """Volume of the ``d``-dimensional ball of radius ``r``."""
    exact = {0: 1.0, 1: 2.0, 2: math.pi}
    if d in exact:
        return exact[d] * r**d
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r**d


@dataclass(frozen=True)
class LimitDomain:
    """Box ``(-L/2, L/2)^{n-1} x (-h_minus, h_plus)`` cut by the interface ``x^n = 0``.

    With ``topology="boundary"`` the domain is ``(-L/2, L/2)^{n-1} x (-h_minus, 0)``
    and the interface is the top face.
    """

    n: int = 2
    L: float = 1.0
    h_minus: float = 0.5
    h_plus: float = 0.5
    topology: str = "interface"

    def __post_init__(self):
        if self.n not in (2, 3):
            raise PlanError("only n = 2 and n = 3 are supported")
        if self.topology not in ("interface", "boundary"):
            raise PlanError(f"unknown topology {self.topology!r}")
        if self.L <= 0 or self.h_minus <= 0 or (self.topology == "interface" and self.h_plus <= 0):
            raise PlanError("domain extents must be positive")

    @property
    def gamma(self) -> GammaBox:
        return GammaBox.centered(self.L, self.n - 1)

    @property
    def volume(self) -> float:
        height = self.h_minus + (self.h_plus if self.topology == "interface" else 0.0)
        return self.L ** (self.n - 1) * height


@dataclass(frozen=True)
class DLaw:
    """Hole scale law ``d_eps = c * eps**p``."""

    c: float = 1.0
    p: float = 3.0

    def __call__(self, eps):
        return self.c * np.asarray(eps, dtype=float) ** self.p

    @classmethod
    def default(cls, n: int) -> "DLaw":
        return cls(1.0, 3.0 if n == 2 else 2.5)


@dataclass(frozen=True, eq=False)
class SievePlan:
    """Holes, pairing and passages of one sieve manifold.

    Holes are indexed ``k = 0..len(radii)-1``; hole ``k`` is the ball centred at
    ``centers[k]`` built for the cell pair ``(cells[pairs[k, 0]], cells[pairs[k, 1]])``.
    In the interface topology every hole exists on both sides and passage ``p``
    joins plus-hole ``passages[p, 0]`` with minus-hole ``passages[p, 1]``.  In the
    boundary topology passage ``p`` joins two distinct holes of the same face.
    """

    eps: float
    domain: LimitDomain
    d_law: DLaw
    kernel: InterfaceKernel
    d_eps: float
    cells: np.ndarray          # (ncell, n-1) integer cell indices s
    pairs: np.ndarray         # (nhole, 2) indices into cells: hole k <-> (s, t)
    centers: np.ndarray       # (nhole, n-1)
    alpha: np.ndarray         # (nhole,)
    radii: np.ndarray         # (nhole,)
    rho: np.ndarray           # (nhole,) clearance radii
    pairing: np.ndarray       # (nhole,) ell: hole k -> partner hole
    passages: np.ndarray      # (npass, 2) hole indices
    heights: np.ndarray       # (npass,)
    conductance: np.ndarray   # (npass,) K_ij = vol(D) / h
    subcell_edge: float = field(default=0.0)

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def topology(self) -> str:
        return self.domain.topology

    @property
    def n_holes(self) -> int:
        return len(self.radii)

    @property
    def n_passages(self) -> int:
        return len(self.heights)

    @property
    def h_eps(self) -> float:
        return float(self.heights.max()) if self.n_passages else 0.0

    def hole_volumes(self) -> np.ndarray:
        return ball_volume(self.n - 1) * self.radii ** (self.n - 1)

    def q(self) -> np.ndarray:
        if self.n == 2:
            return -np.log(self.radii)
        return self.radii ** (2 - self.n)

    def ordered_pairs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """The ordered index set ``{(i, ell(i))}`` with conductances.

        In the boundary topology each physical passage appears twice.
        """
        if self.topology == "interface":
            return self.passages[:, 0], self.passages[:, 1], self.conductance
        i = np.concatenate([self.passages[:, 0], self.passages[:, 1]])
        j = np.concatenate([self.passages[:, 1], self.passages[:, 0]])
        return i, j, np.concatenate([self.conductance, self.conductance])

    def with_hole_scale(self, factor: float) -> "SievePlan":
        """Copy with every hole radius multiplied by ``factor`` (heights kept)."""
        radii = self.radii * factor
        vol = ball_volume(self.n - 1) * radii[self.passages[:, 0]] ** (self.n - 1)
        return replace(self, radii=radii, conductance=vol / self.heights)


def admissible_cells(domain: LimitDomain, eps: float) -> np.ndarray:
    """Integer indices ``s`` whose cell cylinder fits strictly inside the domain."""
    L = domain.L
    smax = int(math.floor(L / (2 * eps))) + 1
    tol = _REL * L
    vertical_ok = eps < domain.h_minus - tol and (domain.topology == "boundary" or eps < domain.h_plus - tol)
    if not vertical_ok:
        return np.zeros((0, domain.n - 1), dtype=int)
    one = [s for s in range(-smax, smax + 1) if abs(eps * s) + eps / 2 < L / 2 - tol]
    grids = np.meshgrid(*([np.array(one)] * (domain.n - 1)), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1).astype(int)


def _coords(a: np.ndarray) -> np.ndarray:
    """Interface points in the form kernels expect (scalars when n = 2)."""
    return a[:, 0] if a.shape[1] == 1 else a


def _pairing(pairs: np.ndarray, nc: int) -> np.ndarray:
    """Index of hole ``(t, s)`` for every hole ``(s, t)``."""
    slot = np.full(nc * nc, -1, dtype=int)
    slot[pairs[:, 0] * nc + pairs[:, 1]] = np.arange(len(pairs))
    out = slot[pairs[:, 1] * nc + pairs[:, 0]]
    if np.any(out < 0):
        raise PlanError("pairing is not closed under (s, t) -> (t, s)")
    return out


def lattice_kernel_sum(domain: LimitDomain, eps: float, kernel: InterfaceKernel,
                       chunk: int = 1 << 18) -> float:
    """``sum K_ij`` of the lattice plan at ``eps`` without materialising it.

    Equals ``eps^{2(n-1)} sum_{(s,t)} K(x_st, x_ts)`` over the ordered pairs.
    """
    cells = admissible_cells(domain, eps)
    nc = len(cells)
    edge = eps**2 / domain.L
    total = 0.0
    flat = np.arange(nc * nc)
    for start in range(0, nc * nc, chunk):
        idx = flat[start:start + chunk]
        s, t = idx // nc, idx % nc
        if domain.topology == "boundary":
            s, t = s[s != t], t[s != t]
        x = eps * cells[s] + edge * cells[t]
        y = eps * cells[t] + edge * cells[s]
        total += float(np.sum(kernel(_coords(x), _coords(y))))
    return total * eps ** (2 * (domain.n - 1))


def build_sieve_plan(domain: LimitDomain, eps: float, d_law: DLaw, kernel: InterfaceKernel,
                     hole_scale: float = 1.0) -> SievePlan:
    """Build the cube-lattice sieve plan at scale ``eps``.

    Every admissible cell ``s`` is split into sub-cells of edge ``eps^2 / L``
    indexed by ``t``; the hole ``(s, t)`` is a ball of radius
    ``K(x_st, x_ts)^{1/(n-1)} d_eps`` at the sub-cell centre ``x_st`` and is paired
    with hole ``(t, s)``.  ``hole_scale`` rescales the radii afterwards and only
    exists for constructing deliberately broken plans.
    """
    if not 0 < eps < 1:
        raise PlanError("eps must lie in (0, 1)")
    n, L = domain.n, domain.L
    if kernel.gamma != domain.gamma:
        raise PlanError("kernel is defined on a different interface")
    d_eps = float(d_law(eps))
    if d_eps >= eps**2:
        raise PlanError(f"d_eps = {d_eps:.3e} >= eps^2 = {eps**2:.3e}: law violates d-law-5+")
    cells = admissible_cells(domain, eps)
    nc = len(cells)
    if nc == 0:
        raise PlanError(f"no admissible cell at eps = {eps}")
    si, ti = np.meshgrid(np.arange(nc), np.arange(nc), indexing="ij")
    pairs = np.stack([si.ravel(), ti.ravel()], axis=-1)
    if domain.topology == "boundary":
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
        if len(pairs) == 0:
            raise PlanError(f"boundary topology needs two admissible cells, eps = {eps}")
    edge = eps**2 / L
    centers = eps * cells[pairs[:, 0]] + edge * cells[pairs[:, 1]]
    partner = eps * cells[pairs[:, 1]] + edge * cells[pairs[:, 0]]
    kvals = np.asarray(kernel(_coords(centers), _coords(partner)), dtype=float)
    alpha = kvals ** (1.0 / (n - 1))
    radii = alpha * d_eps * hole_scale
    if np.any(radii >= edge / 2):
        raise PlanError("hole radius reaches half the sub-cell edge: holes would touch")
    rho = np.full(len(radii), edge / 2)

    # hole (s, t) <-> (t, s)
    pairing = _pairing(pairs, nc)
    if domain.topology == "interface":
        passages = np.stack([np.arange(len(pairs)), pairing], axis=-1)
    else:
        keep = np.arange(len(pairs)) < pairing
        passages = np.stack([np.arange(len(pairs))[keep], pairing[keep]], axis=-1)
    vol_unit = ball_volume(n - 1)
    h = np.full(len(passages), vol_unit * d_eps ** (n - 1) * eps ** (2 * (1 - n)))
    conductance = vol_unit * radii[passages[:, 0]] ** (n - 1) / h
    return SievePlan(eps=float(eps), domain=domain, d_law=d_law, kernel=kernel, d_eps=d_eps,
                     cells=cells, pairs=pairs, centers=centers, alpha=alpha, radii=radii, rho=rho,
                     pairing=pairing, passages=passages, heights=h, conductance=conductance,
                     subcell_edge=edge)


# ---------------------------------------------------------------- Neumann bounds

@dataclass(frozen=True)
class Disk:
    """Ball of given radius in R^dim."""

    radius: float = 1.0
    dim: int = 2


@dataclass(frozen=True)
class ConvexShape:
    diameter: float


@dataclass(frozen=True)
class StarShaped:
    """Strictly star-shaped domain: boundary distances and support margin ``h``."""

    r_min: float
    r_max: float
    h: float
    dim: int = 2


def lambda_N_lower_bound(shape) -> float:
    """Lower bound on the first non-zero Neumann eigenvalue of ``shape``.

    Convex sets (balls included) use Payne-Weinberger ``pi^2 / diam^2``;
    star-shaped descriptors use the Bramble-Payne bound.
    """
    if isinstance(shape, Disk):
        return math.pi**2 / (2 * shape.radius) ** 2
    if isinstance(shape, ConvexShape):
        if shape.diameter <= 0:
            raise ValueError("diameter must be positive")
        return math.pi**2 / shape.diameter**2
    if isinstance(shape, StarShaped):
        if shape.h <= 0:
            raise ValueError("star-shaped descriptor needs h > 0")
        n, rmin, rmax, h = shape.dim, shape.r_min, shape.r_max, shape.h
        return n * rmin ** (n - 1) * h / (2 * rmax**2 * (rmax**n + 2 / n * rmin ** (n - 1) * h))
    raise TypeError(f"unsupported shape {shape!r}")


# ---------------------------------------------------------------- Riemann sums

def riemann_sum(plan: SievePlan, v) -> float:
    """``sum_{(i, j)} K_ij v(x_i, x_j)`` over the ordered pairing set."""
    i, j, k = plan.ordered_pairs()
    xi, xj = plan.centers[i], plan.centers[j]
    if plan.n == 2:
        xi, xj = xi[:, 0], xj[:, 0]
    return float(np.sum(k * np.asarray(v(xi, xj), dtype=float)))


def quadrature_convergence_check(plans, v, kernel: InterfaceKernel, quad: GammaQuadrature) -> list[float]:
    """Residuals ``|sum K_ij v(x_i, x_j) - int int K v|`` for each plan."""
    exact = double_integral(kernel, v, quad)
    return [abs(riemann_sum(p, v) - exact) for p in plans]


# ---------------------------------------------------------------- audit

@dataclass(frozen=True)
class AuditEntry:
    id: str
    passed: bool
    measured: float
    threshold: str
    gating: bool = True
    note: str = ""


@dataclass(frozen=True)
class AuditReport:
    eps: float
    entries: tuple[AuditEntry, ...]
    lambda_n_bounds: tuple[float, ...]

    def __getitem__(self, key: str) -> AuditEntry:
        for e in self.entries:
            if e.id == key:
                return e
        raise KeyError(key)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries if e.gating)

    @property
    def failed_ids(self) -> list[str]:
        return [e.id for e in self.entries if not e.passed]

    def lines(self) -> list[str]:
        out = []
        for e in self.entries:
            flag = "PASS" if e.passed else "FAIL"
            tag = "" if e.gating else " (advisory)"
            out.append(f"{flag} {e.id:<9} measured={e.measured:.6g} threshold: {e.threshold}{tag}")
        return out


def _tends_to_zero(values) -> bool:
    v = np.asarray(values, dtype=float)
    if np.any(~np.isfinite(v)) or np.any(v < 0):
        return False
    tail = v[len(v) // 2:]
    return bool(np.all(np.diff(tail) < 0) and v[-1] < v[0])


def _reference_eps(start: float, count: int = 40) -> np.ndarray:
    return start * 0.5 ** np.arange(count)


def _scalar_law(plan: SievePlan, eps):
    """Plan-level scalars from the construction laws, evaluated at ``eps``."""
    n, L = plan.n, plan.domain.L
    d = plan.d_law(eps)
    amax = plan.kernel.k_max ** (1.0 / (n - 1))
    rho = eps**2 / (2 * L)
    h = ball_volume(n - 1) * d ** (n - 1) * eps ** (2 * (1 - n))
    dmax = amax * d
    q = -np.log(dmax) if n == 2 else dmax ** (2 - n)
    kmax = ball_volume(n - 1) * dmax ** (n - 1) / h
    return dict(d=d, rho=rho, h=h, dmax=dmax, q=q, kmax=kmax)


def _near_pairs(points: np.ndarray, r: float) -> np.ndarray:
    if len(points) < 2:
        return np.zeros((0, 2), dtype=int)
    return cKDTree(points).query_pairs(r, output_type="ndarray")


def audit_assumptions(plan: SievePlan, d_law: DLaw | None = None,
                      main2_levels: int = 3) -> AuditReport:
    """Check the scaling assumptions numerically; failures are report entries.

    Limit-type assumptions are evaluated along a reference sequence
    ``eps * 2^-k`` using the plan's construction laws.  ``d_law`` overrides the
    law used for the two d-law entries only.
    """
    n, L = plan.n, plan.domain.L
    dl = d_law or plan.d_law
    ref = _reference_eps(plan.eps)
    law = _scalar_law(plan, ref)
    r, rho = plan.radii, plan.rho
    entries = []

    # shapes: every hole is a ball, so the upscaled hole is the unit ball
    entries.append(AuditEntry("shape1", True, 1.0, "inradius of upscaled hole > 0 (uniform)"))
    lam = [lambda_N_lower_bound(Disk(1.0, n - 1))] * plan.n_holes
    lam_min = min(lam) if lam else float("nan")
    entries.append(AuditEntry("shape2", bool(lam_min > 0), lam_min,
                              "Lambda_N(upscaled hole) bounded below (Payne-Weinberger)"))

    ok_a1 = bool(np.all((r < rho * (1 - _REL)) & (rho <= 1))) and _tends_to_zero(law["rho"])
    entries.append(AuditEntry("a1", ok_a1, float(rho.max()), "d_i < rho_i <= 1 and sup rho -> 0"))

    # clearance balls pairwise disjoint; holes pairwise disjoint
    margin = 0.0
    near = _near_pairs(plan.centers, 2 * rho.max() * (1 - _REL))
    if len(near):
        dist = np.linalg.norm(plan.centers[near[:, 0]] - plan.centers[near[:, 1]], axis=-1)
        margin = float(np.min(dist - rho[near[:, 0]] - rho[near[:, 1]]) / rho.max())
    near_h = _near_pairs(plan.centers, 2 * r.max())
    holes_ok = True
    if len(near_h):
        dist = np.linalg.norm(plan.centers[near_h[:, 0]] - plan.centers[near_h[:, 1]], axis=-1)
        holes_ok = bool(np.all(dist >= r[near_h[:, 0]] + r[near_h[:, 1]]))
    entries.append(AuditEntry("a2", margin >= -_REL and holes_ok, margin,
                              "clearance balls and holes pairwise disjoint (normalised margin >= 0)"))

    reach = float(np.max(np.abs(plan.centers).max(axis=-1) + rho))
    vertical = plan.domain.h_minus if plan.topology == "boundary" else min(plan.domain.h_minus, plan.domain.h_plus)
    ok_a3 = reach <= L / 2 * (1 + _REL) and float(rho.max()) <= vertical
    entries.append(AuditEntry("a3", ok_a3, reach, f"clearance half-balls inside the domain (reach <= {L / 2:g})"))

    a4_plan = float(np.max(rho ** (n - 1) * plan.q()))
    a4_ref = law["rho"] ** (n - 1) * law["q"]
    entries.append(AuditEntry("a4", _tends_to_zero(a4_ref), a4_plan, "sup rho^{n-1} q -> 0"))

    entries.append(AuditEntry("a5", plan.h_eps < 1 and _tends_to_zero(law["h"]), plan.h_eps, "h_eps < 1 and h_eps -> 0"))

    i, j, k = plan.ordered_pairs()
    c_plan = float(np.max(k / np.minimum(rho[i], rho[j]) ** (n - 1)))
    c_ref = law["kmax"] / law["rho"] ** (n - 1)
    no_growth = bool(np.all(np.diff(c_ref) <= 1e-9 * c_ref[:-1]))
    entries.append(AuditEntry("main1", no_growth, c_plan,
                              "sup K_ij / min(rho^{n-1}) does not grow along eps (constant reported)"))

    eps_seq = [plan.eps * 0.5**lvl for lvl in range(main2_levels)]
    resid = []
    total = _kernel_total(plan.kernel)
    for e in eps_seq:
        if e == plan.eps:
            approx = riemann_sum(plan, lambda x, y: 1.0)
        else:
            approx = lattice_kernel_sum(plan.domain, e, plan.kernel)
        resid.append(abs(approx - total))
    entries.append(AuditEntry("main2", bool(np.all(np.diff(resid) < 0)), resid[0],
                              "Riemann-sum residual of int int K decreases along eps, eps/2, ..."))

    drho = float(np.max(r / rho))
    bound = plan.h_eps ** (1.0 / (n - 1))
    entries.append(AuditEntry("drho", drho <= bound * (1 + _REL), drho,
                              f"sup d_i / rho_i <= h_eps^(1/(n-1)) = {bound:.6g}", gating=False,
                              note="derived bound; printed without its generic constant"))
    two = float(np.max(2 * r / rho))
    entries.append(AuditEntry("2drho", two <= 1 + _REL, two, "2 d_i <= rho_i"))

    law_eps = _reference_eps(0.25)
    dvals = dl(law_eps)
    g5 = dvals * law_eps**-2.0
    entries.append(AuditEntry("d-law-5+", _tends_to_zero(g5), float(g5[-1]), "d_eps eps^-2 -> 0"))
    if n == 2:
        g4 = law_eps**2 * np.abs(np.log(dvals))
        thr = "eps^2 |ln d_eps| -> 0"
    else:
        g4 = law_eps ** (2 * (n - 1)) * dvals ** (2.0 - n)
        thr = "eps^{2(n-1)} d_eps^{2-n} -> 0"
    entries.append(AuditEntry("d-law-4+", _tends_to_zero(g4), float(g4[-1]), thr))

    return AuditReport(plan.eps, tuple(entries), tuple(lam))


_TOTALS: dict = {}


def _kernel_total(kernel: InterfaceKernel) -> float:
    key = (kernel.kind, kernel.params, kernel.gamma)
    if kernel.kind == "tabulated" or key not in _TOTALS:
        from .kernel import gauss_rule
        quad = gauss_rule(kernel.gamma, 64 if kernel.dim == 1 else 16, 3)
        val = double_integral(kernel, lambda x, y: 1.0, quad)
        if kernel.kind == "tabulated":
            return val
        _TOTALS[key] = val
    return _TOTALS[key]


# ---------------------------------------------------------------- JSON dump

def plan_to_json(plan: SievePlan) -> str:
    """Serialise a plan; floats are written with round-trip precision."""
    holes = []
    sides = ("+", "-") if plan.topology == "interface" else ("boundary",)
    for k in range(plan.n_holes):
        for side in sides:
            holes.append({"id": k, "s": plan.cells[plan.pairs[k, 0]].tolist(),
                          "t": plan.cells[plan.pairs[k, 1]].tolist(),
                          "center": plan.centers[k].tolist(), "radius": float(plan.radii[k]),
                          "side": side})
    doc = {
        "eps": plan.eps,
        "domain": {"n": plan.n, "L": plan.domain.L, "h_minus": plan.domain.h_minus,
                   "h_plus": plan.domain.h_plus, "topology": plan.topology},
        "d_law": {"c": plan.d_law.c, "p": plan.d_law.p},
        "d_eps": plan.d_eps,
        "kernel": plan.kernel.spec(),
        "cells": plan.cells.tolist(),
        "holes": holes,
        "passages": [{"i": int(a), "j": int(b), "h": float(h), "K_ij": float(kk)}
                     for (a, b), h, kk in zip(plan.passages, plan.heights, plan.conductance)],
    }
    return json.dumps(doc, indent=1)


def plan_from_json(text_or_path) -> SievePlan:
    """Inverse of :func:`plan_to_json` (bit-exact for all stored arrays)."""
    text = text_or_path
    if isinstance(text_or_path, Path) or (isinstance(text_or_path, str) and not text_or_path.lstrip().startswith("{")):
        text = Path(text_or_path).read_text()
    doc = json.loads(text)
    domain = LimitDomain(**doc["domain"])
    kspec = dict(doc["kernel"])
    params = kspec.pop("params")
    kind = kspec["kind"]
    names = {"constant": ["value"], "gaussian": ["amplitude", "scale"],
             "separable": ["base", "amplitude", "omega"], "tabulated": []}[kind]
    kspec.update(dict(zip(names, params)))
    kernel = kernel_from_spec(kspec, domain.gamma)
    first = [h for h in doc["holes"] if h["side"] in ("+", "boundary")]
    cells = np.array(doc["cells"], dtype=int).reshape(-1, domain.n - 1)
    index = {tuple(c): m for m, c in enumerate(cells.tolist())}
    pairs = np.array([[index[tuple(h["s"])], index[tuple(h["t"])]] for h in first], dtype=int)
    centers = np.array([h["center"] for h in first], dtype=float)
    radii = np.array([h["radius"] for h in first], dtype=float)
    passages = np.array([[p["i"], p["j"]] for p in doc["passages"]], dtype=int)
    heights = np.array([p["h"] for p in doc["passages"]], dtype=float)
    cond = np.array([p["K_ij"] for p in doc["passages"]], dtype=float)
    pairing = _pairing(pairs, len(cells))
    eps = doc["eps"]
    edge = eps**2 / domain.L
    alpha = radii / doc["d_eps"]
    return SievePlan(eps=eps, domain=domain, d_law=DLaw(**doc["d_law"]), kernel=kernel,
                     d_eps=doc["d_eps"], cells=cells, pairs=pairs, centers=centers, alpha=alpha,
                     radii=radii, rho=np.full(len(radii), edge / 2), pairing=pairing,
                     passages=passages, heights=heights, conductance=cond, subcell_edge=edge)
