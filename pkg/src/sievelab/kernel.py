"""Interface kernels K(x, y) on the flat interface and quadrature over it.

A kernel lives on the closure of a box ``Gamma`` in R^{n-1}.  Points on
``Gamma`` are passed as arrays whose trailing axis has length ``n - 1``; for
a one-dimensional interface plain scalars / 1-D arrays are accepted and
callbacks receive squeezed coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

__all__ = [
    "GammaBox",
    "GammaQuadrature",
    "InterfaceKernel",
    "KernelError",
    "constant_kernel",
    "gaussian_kernel",
    "separable_kernel",
    "tabulated_kernel",
    "load_tabulated_kernel",
    "kernel_from_spec",
    "evaluate",
    "row_integral",
    "double_integral",
    "midpoint_rule",
    "gauss_rule",
]

_POINT_TOL = 1e-12


class KernelError(ValueError):
    """Invalid kernel definition or misuse of a kernel."""


@dataclass(frozen=True)
class GammaBox:
    """Axis-aligned box ``prod_k (lo_k, hi_k)`` in R^{n-1}."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or len(self.lo) == 0:
            raise KernelError("box bounds must have equal, non-zero length")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise KernelError("box must have positive extent in every direction")

    @classmethod
    def centered(cls, L: float, dim: int = 1) -> "GammaBox":
        return cls((-L / 2,) * dim, (L / 2,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))

    @property
    def edge(self) -> float:
        """Edge length of the smallest origin-centred cube containing the box."""
        return 2.0 * float(max(max(abs(v) for v in self.lo), max(abs(v) for v in self.hi)))

    def contains(self, pts: np.ndarray, tol: float = _POINT_TOL) -> np.ndarray:
        return self._inside(as_points(pts, self.dim), tol)

    def _inside(self, pts: np.ndarray, tol: float = _POINT_TOL) -> np.ndarray:
        scale = max(1.0, self.edge)
        lo = np.asarray(self.lo) - tol * scale
        hi = np.asarray(self.hi) + tol * scale
        return np.all((pts >= lo) & (pts <= hi), axis=-1)

    def grid(self, m: int) -> np.ndarray:
        """Uniform ``m**dim`` grid of points including the box corners."""
        axes = [np.linspace(l, h, m) for l, h in zip(self.lo, self.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)


def as_points(x, dim: int) -> np.ndarray:
    """Return ``x`` as an array with trailing axis ``dim``.

    Points of a one-dimensional interface are plain scalars, so any array
    shape is accepted and a trailing axis of length one is appended.
    """
    x = np.asarray(x, dtype=float)
    if dim == 1:
        return x[..., None]
    if x.shape[-1] != dim:
        raise KernelError(f"points must have trailing dimension {dim}, got shape {x.shape}")
    return x


def _squeeze(x: np.ndarray) -> np.ndarray:
    return x[..., 0] if x.shape[-1] == 1 else x


@dataclass(frozen=True)
class GammaQuadrature:
    """Positive-weight quadrature rule on a box ``Gamma``."""

    nodes: np.ndarray
    weights: np.ndarray
    box: GammaBox

    def __post_init__(self):
        if self.weights.size == 0:
            raise KernelError("empty quadrature")
        if np.any(self.weights <= 0):
            raise KernelError("quadrature weights must be positive")
        total = float(np.sum(self.weights))
        if abs(total - self.box.volume) > 1e-12 * self.box.volume:
            raise KernelError(f"weights sum to {total}, expected {self.box.volume}")

    def __len__(self):
        return self.weights.size


def _tensor_rule(box: GammaBox, pts_1d, wts_1d) -> GammaQuadrature:
    mesh = np.meshgrid(*pts_1d, indexing="ij")
    nodes = np.stack([g.ravel() for g in mesh], axis=-1)
    wmesh = np.meshgrid(*wts_1d, indexing="ij")
    weights = np.prod(np.stack([w.ravel() for w in wmesh], axis=-1), axis=-1)
    # renormalise roundoff so the weights sum to |Gamma| to machine precision
    weights = weights * (box.volume / weights.sum())
    return GammaQuadrature(nodes, weights, box)


def midpoint_rule(box: GammaBox, m: int) -> GammaQuadrature:
    """Composite midpoint rule with ``m`` cells per direction."""
    if m < 1:
        raise KernelError("need at least one cell per direction")
    pts, wts = [], []
    for l, h in zip(box.lo, box.hi):
        hcell = (h - l) / m
        pts.append(l + hcell * (np.arange(m) + 0.5))
        wts.append(np.full(m, hcell))
    return _tensor_rule(box, pts, wts)


def gauss_rule(box: GammaBox, cells: int, order: int = 2) -> GammaQuadrature:
    """Composite Gauss-Legendre rule, ``order`` points in each of ``cells`` cells per direction."""
    xi, wi = np.polynomial.legendre.leggauss(order)
    pts, wts = [], []
    for l, h in zip(box.lo, box.hi):
        edges = np.linspace(l, h, cells + 1)
        a, b = edges[:-1, None], edges[1:, None]
        pts.append((0.5 * (a + b) + 0.5 * (b - a) * xi).ravel())
        wts.append((0.5 * (b - a) * wi).ravel())
    return _tensor_rule(box, pts, wts)


@dataclass(frozen=True)
class InterfaceKernel:
    """Continuous, symmetric, strictly positive kernel on ``Gamma x Gamma``.

    Use the factory functions (:func:`constant_kernel`, :func:`gaussian_kernel`,
    ...) rather than calling the constructor directly; they validate symmetry
    and positivity on a sampling grid and record the sampled bounds.
    """

    kind: str
    params: tuple[float, ...]
    gamma: GammaBox
    k_min: float = field(default=np.nan)
    k_max: float = field(default=np.nan)
    table: np.ndarray | None = field(default=None, repr=False, compare=False)
    _interp: object = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.gamma.dim

    def __call__(self, x, y) -> np.ndarray:
        return evaluate(self, x, y)

    def _raw(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        # x, y: (..., dim), already validated
        if self.kind == "constant":
            return np.full(np.broadcast_shapes(x.shape, y.shape)[:-1], self.params[0])
        if self.kind == "gaussian":
            amp, scale = self.params
            return amp * np.exp(-np.sum((x - y) ** 2, axis=-1) / scale**2)
        if self.kind == "separable":
            base, amp, omega = self.params
            gx = np.prod(np.cos(omega * x), axis=-1)
            gy = np.prod(np.cos(omega * y), axis=-1)
            return base + amp * gx * gy
        if self.kind == "tabulated":
            xb, yb = np.broadcast_arrays(x[..., 0], y[..., 0])
            return self._interp(np.stack([xb, yb], axis=-1))
        raise KernelError(f"unknown kernel kind {self.kind!r}")

    def spec(self) -> dict:
        """JSON-friendly description (tabulated kernels carry their table)."""
        out = {"kind": self.kind, "params": list(self.params)}
        if self.table is not None:
            out["table"] = self.table.tolist()
        return out


def evaluate(kernel: InterfaceKernel, x, y) -> np.ndarray | float:
    """Evaluate ``K(x, y)``; ``x`` and ``y`` broadcast against each other."""
    xp = as_points(x, kernel.dim)
    yp = as_points(y, kernel.dim)
    if not (np.all(kernel.gamma._inside(xp)) and np.all(kernel.gamma._inside(yp))):
        raise KernelError("kernel evaluated at a point outside the closure of Gamma")
    val = kernel._raw(xp, yp)
    return float(val) if np.ndim(val) == 0 else val


def _validated(kernel: InterfaceKernel, samples: int | None = None) -> InterfaceKernel:
    dim = kernel.dim
    if samples is None:
        samples = 64 if dim == 1 else 24
    pts = kernel.gamma.grid(samples)
    kmin, kmax, asym = np.inf, -np.inf, 0.0
    for chunk in np.array_split(np.arange(len(pts)), max(1, len(pts) // 256)):
        a = pts[chunk][:, None, :]
        kxy = kernel._raw(a, pts[None, :, :])
        kyx = kernel._raw(pts[None, :, :], a)
        kmin = min(kmin, float(kxy.min()))
        kmax = max(kmax, float(kxy.max()))
        asym = max(asym, float(np.max(np.abs(kxy - kyx))))
    if not np.isfinite(kmin) or kmin <= 0:
        raise KernelError(f"kernel is not strictly positive (sampled minimum {kmin})")
    if asym > 1e-12 * max(1.0, kmax):
        raise KernelError(f"kernel is not symmetric (sampled defect {asym:.3e})")
    return InterfaceKernel(kernel.kind, kernel.params, kernel.gamma, kmin, kmax,
                           kernel.table, kernel._interp)


def constant_kernel(c: float, gamma: GammaBox) -> InterfaceKernel:
    return _validated(InterfaceKernel("constant", (float(c),), gamma))


def gaussian_kernel(gamma: GammaBox, amplitude: float = 1.0, scale: float = 1.0) -> InterfaceKernel:
    """``amplitude * exp(-|x - y|^2 / scale^2)``."""
    if scale <= 0:
        raise KernelError("gaussian scale must be positive")
    return _validated(InterfaceKernel("gaussian", (float(amplitude), float(scale)), gamma))


def separable_kernel(gamma: GammaBox, base: float = 1.0, amplitude: float = 0.5,
                     omega: float = np.pi) -> InterfaceKernel:
    """``base + amplitude * g(x) g(y)`` with ``g(x) = prod_k cos(omega x_k)``."""
    return _validated(InterfaceKernel("separable", (float(base), float(amplitude), float(omega)), gamma))


def tabulated_kernel(table, gamma: GammaBox) -> InterfaceKernel:
    """Bilinear interpolation of a uniform table over ``Gamma x Gamma`` (1-D interface only).

    The table is symmetrised as ``(T + T^T) / 2``.
    """
    if gamma.dim != 1:
        raise KernelError("tabulated kernels are supported for one-dimensional interfaces only")
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] < 2:
        raise KernelError(f"tabulated kernel needs a square table with >= 2 rows, got {table.shape}")
    table = 0.5 * (table + table.T)
    axis = np.linspace(gamma.lo[0], gamma.hi[0], table.shape[0])
    interp = RegularGridInterpolator((axis, axis), table, method="linear", bounds_error=True)
    return _validated(InterfaceKernel("tabulated", (), gamma, table=table, _interp=interp))


def load_tabulated_kernel(path, gamma: GammaBox) -> InterfaceKernel:
    """Read a kernel table: header ``n_x n_y`` then ``n_x * n_y`` reals in row-major order."""
    text = Path(path).read_text().split()
    if len(text) < 2:
        raise KernelError(f"{path}: missing header")
    nx, ny = int(text[0]), int(text[1])
    values = np.array([float(v) for v in text[2:]])
    if values.size != nx * ny:
        raise KernelError(f"{path}: expected {nx * ny} values, found {values.size}")
    return tabulated_kernel(values.reshape(nx, ny), gamma)


def kernel_from_spec(spec: dict | str, gamma: GammaBox) -> InterfaceKernel:
    """Build a kernel from a config entry such as ``{"kind": "gaussian", "scale": 0.5}``.

    Strings ``"constant"``, ``"gaussian"``, ``"separable"`` select defaults.
    """
    if isinstance(spec, str):
        spec = {"kind": spec}
    spec = dict(spec)
    kind = spec.pop("kind", "constant")
    if kind == "constant":
        return constant_kernel(spec.pop("value", 1.0), gamma)
    if kind == "gaussian":
        return gaussian_kernel(gamma, spec.pop("amplitude", 1.0), spec.pop("scale", 1.0))
    if kind in ("separable", "separable-product"):
        return separable_kernel(gamma, spec.pop("base", 1.0), spec.pop("amplitude", 0.5),
                                spec.pop("omega", np.pi))
    if kind == "tabulated":
        if "path" in spec:
            return load_tabulated_kernel(spec.pop("path"), gamma)
        return tabulated_kernel(spec.pop("table"), gamma)
    raise KernelError(f"unknown kernel kind {kind!r}")


def row_integral(kernel: InterfaceKernel, x, quad: GammaQuadrature) -> np.ndarray | float:
    """``sum_q w_q K(x, y_q)``, an approximation of ``int_Gamma K(x, y) ds_y``."""
    if len(quad) == 0:
        raise KernelError("empty quadrature")
    xp = as_points(x, kernel.dim)
    if not np.all(kernel.gamma._inside(xp)):
        raise KernelError("kernel evaluated at a point outside the closure of Gamma")
    vals = kernel._raw(xp[..., None, :], quad.nodes)
    out = np.asarray(vals) @ quad.weights
    return float(out) if np.ndim(out) == 0 else out


def double_integral(kernel: InterfaceKernel, v, quad: GammaQuadrature) -> float:
    """Tensor quadrature of ``int int K(x, y) v(x, y) ds_x ds_y``.

    ``v`` is called with two broadcastable coordinate arrays (squeezed for a
    one-dimensional interface) and must return their broadcast shape.
    """
    nodes, w = quad.nodes, quad.weights
    total = 0.0
    for chunk in np.array_split(np.arange(len(w)), max(1, len(w) // 512)):
        x = nodes[chunk][:, None, :]
        y = nodes[None, :, :]
        vals = kernel._raw(x, y) * np.broadcast_to(v(_squeeze(x), _squeeze(y)), (len(chunk), len(w)))
        total += float(w[chunk] @ vals @ w)
    return total
