"""Extrinsic geometry of graphs ``x_{n+1} = u(x)`` sampled on rectangular grids.

Derivatives are second-order central differences.  Every field keeps the
full grid shape; points where a stencil does not fit hold NaN, so composite
operators (a derivative of a derivative) lose one more layer of cells.  The
outer two layers are excluded from every reported quantity.

The normal is the upward one, ``nu = (-Du, 1)/W``, so convex graphs have
nonnegative principal curvatures and ``A_ij = u_ij / W``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from . import curvature as cc
from .errors import DegenerateGrid, DomainError

MIN_POINTS = 5
MARGIN = 2


class BoundaryPolicy(str, enum.Enum):
    EXACT = "Exact"
    CLAMPED = "Clamped"


class HeightSource(Protocol):
    """Analytic description of a graph, used for exact derivatives and boundary data."""

    def height(self, points: np.ndarray) -> np.ndarray: ...

    def gradient(self, points: np.ndarray) -> np.ndarray: ...

    def hessian(self, points: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class GraphPatch:
    """Heights ``u`` on the grid ``lower + spacing * index`` (``ij`` indexing)."""

    lower: np.ndarray
    spacing: np.ndarray
    u: np.ndarray
    boundary_policy: BoundaryPolicy = BoundaryPolicy.CLAMPED
    source: HeightSource | None = None

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        n = u.ndim
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        spacing = np.broadcast_to(np.asarray(self.spacing, dtype=float), (n,)).copy()
        if lower.shape != (n,):
            raise DomainError(f"lower corner has shape {lower.shape}, grid is {n}-dimensional")
        if np.any(spacing <= 0):
            raise DomainError("grid spacing must be positive")
        if any(s < MIN_POINTS for s in u.shape):
            raise DegenerateGrid(f"grid shape {u.shape}: need at least {MIN_POINTS} points per axis")
        policy = BoundaryPolicy(self.boundary_policy)
        if policy is BoundaryPolicy.EXACT and self.source is None:
            raise DomainError("Exact boundary policy needs an analytic source")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "boundary_policy", policy)

    @classmethod
    def from_box(cls, lower, upper, shape, height=None, source=None,
                 boundary_policy=None) -> GraphPatch:
        """Sample ``height`` (or ``source.height``) on a box with ``shape`` points."""
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        shape = tuple(int(s) for s in np.broadcast_to(shape, lower.shape))
        if any(s < MIN_POINTS for s in shape):
            raise DegenerateGrid(f"grid shape {shape}: need at least {MIN_POINTS} points per axis")
        spacing = (upper - lower) / (np.asarray(shape) - 1)
        pts = grid_points(lower, spacing, shape)
        fn = height if height is not None else source.height
        if boundary_policy is None:
            boundary_policy = BoundaryPolicy.EXACT if source is not None else BoundaryPolicy.CLAMPED
        return cls(lower, spacing, fn(pts), boundary_policy, source)

    @property
    def n(self) -> int:
        return self.u.ndim

    @property
    def shape(self) -> tuple:
        return self.u.shape

    @property
    def upper(self) -> np.ndarray:
        return self.lower + self.spacing * (np.asarray(self.shape) - 1)

    def axes(self) -> list[np.ndarray]:
        return [self.lower[i] + self.spacing[i] * np.arange(s) for i, s in enumerate(self.shape)]

    def points(self) -> np.ndarray:
        return grid_points(self.lower, self.spacing, self.shape)

    def with_u(self, u) -> GraphPatch:
        return GraphPatch(self.lower, self.spacing, u, self.boundary_policy, self.source)


def grid_points(lower, spacing, shape) -> np.ndarray:
    axes = [lower[i] + spacing[i] * np.arange(s) for i, s in enumerate(shape)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def interior_slices(n: int, margin: int = MARGIN) -> tuple:
    return (slice(margin, -margin),) * n


# ---------------------------------------------------------------------------
# finite differences on the leading grid axes; trailing axes are components


def _sl(ndim, **by_axis):
    out = [slice(None)] * ndim
    for axis, s in by_axis.items():
        out[int(axis[1:])] = s
    return tuple(out)


def gradient_fd(f, spacing, n: int | None = None) -> np.ndarray:
    """Central first differences; output has a new last axis of length ``n``."""
    f = np.asarray(f, dtype=float)
    n = len(spacing) if n is None else n
    out = np.full(f.shape + (n,), np.nan)
    for i in range(n):
        c = _sl(f.ndim, **{f"a{i}": slice(1, -1)})
        p = _sl(f.ndim, **{f"a{i}": slice(2, None)})
        m = _sl(f.ndim, **{f"a{i}": slice(None, -2)})
        out[c + (i,)] = (f[p] - f[m]) / (2.0 * spacing[i])
    return out


def hessian_fd(f, spacing, n: int | None = None) -> np.ndarray:
    """Central second differences; output has two new trailing axes."""
    f = np.asarray(f, dtype=float)
    n = len(spacing) if n is None else n
    out = np.full(f.shape + (n, n), np.nan)
    nd = f.ndim
    for i in range(n):
        c = _sl(nd, **{f"a{i}": slice(1, -1)})
        p = _sl(nd, **{f"a{i}": slice(2, None)})
        m = _sl(nd, **{f"a{i}": slice(None, -2)})
        out[c + (i, i)] = (f[p] - 2.0 * f[c] + f[m]) / spacing[i] ** 2
        for j in range(i + 1, n):
            def s(a, b):
                return _sl(nd, **{f"a{i}": a, f"a{j}": b})
            inner = slice(1, -1)
            hi, lo = slice(2, None), slice(None, -2)
            val = (f[s(hi, hi)] - f[s(hi, lo)] - f[s(lo, hi)] + f[s(lo, lo)]) / (
                4.0 * spacing[i] * spacing[j])
            out[s(inner, inner) + (i, j)] = val
            out[s(inner, inner) + (j, i)] = val
    return out


# ---------------------------------------------------------------------------
# shape field


@dataclass(frozen=True, eq=False)
class ShapeField:
    """Pointwise extrinsic geometry on a grid.

    ``lam`` is ascending; ``frame_coords[..., :, a]`` holds the coordinate
    components of the unit principal direction for ``lam[..., a]`` and
    ``frame[..., a, :]`` the same direction as an ambient vector.
    """

    lower: np.ndarray
    spacing: np.ndarray
    du: np.ndarray
    d2u: np.ndarray
    W: np.ndarray
    nu: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    A: np.ndarray
    shape_op: np.ndarray
    lam: np.ndarray
    frame_coords: np.ndarray
    frame: np.ndarray
    H: np.ndarray
    normA2: np.ndarray
    christoffel: np.ndarray
    margin: int = MARGIN
    u: np.ndarray | None = field(default=None)

    @property
    def n(self) -> int:
        return self.du.shape[-1]

    @property
    def grid_shape(self) -> tuple:
        return self.W.shape

    @property
    def interior(self) -> tuple:
        return interior_slices(self.n, self.margin)

    def points(self) -> np.ndarray:
        return grid_points(self.lower, self.spacing, self.grid_shape)

    def inner(self, values) -> np.ndarray:
        """Restrict a full-grid field to the reported interior."""
        return np.asarray(values)[self.interior]

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.W) & np.all(np.isfinite(self.lam), axis=-1)


def shape_from_derivatives(du, d2u, lower=None, spacing=None, u=None, margin=MARGIN) -> ShapeField:
    """Build every shape quantity from first and second derivatives of ``u``."""
    du = np.asarray(du, dtype=float)
    d2u = np.asarray(d2u, dtype=float)
    n = du.shape[-1]
    grid = du.shape[:-1]
    ok = np.all(np.isfinite(du), axis=-1) & np.all(np.isfinite(d2u), axis=(-2, -1))
    p = np.where(ok[..., None], du, 0.0)
    q = np.where(ok[..., None, None], 0.5 * (d2u + np.swapaxes(d2u, -1, -2)), 0.0)

    eye = np.eye(n)
    w2 = 1.0 + np.sum(p * p, axis=-1)
    W = np.sqrt(w2)
    nu = np.concatenate([-p, np.ones(grid + (1,))], axis=-1) / W[..., None]
    outer = p[..., :, None] * p[..., None, :]
    g = eye + outer
    g_inv = eye - outer / w2[..., None, None]
    A = q / W[..., None, None]
    shape_op = g_inv @ A

    # Generalized symmetric eigenproblem A v = lam g v via Cholesky of g.
    chol = np.linalg.cholesky(g)
    linv = np.linalg.inv(chol)
    B = linv @ A @ np.swapaxes(linv, -1, -2)
    B = 0.5 * (B + np.swapaxes(B, -1, -2))
    lam, w = np.linalg.eigh(B)
    V = np.swapaxes(linv, -1, -2) @ w
    frame = np.concatenate([np.swapaxes(V, -1, -2), (np.swapaxes(V, -1, -2) @ p[..., :, None])],
                           axis=-1)
    H = lam.sum(axis=-1)
    normA2 = np.sum(lam * lam, axis=-1)
    christoffel = (p / w2[..., None])[..., :, None, None] * q[..., None, :, :]

    def nan_out(x, extra):
        return np.where(ok.reshape(ok.shape + (1,) * extra), x, np.nan)

    if lower is None:
        lower = np.zeros(n)
    if spacing is None:
        spacing = np.ones(n)
    return ShapeField(
        lower=np.asarray(lower, dtype=float),
        spacing=np.asarray(spacing, dtype=float),
        du=nan_out(p, 1), d2u=nan_out(q, 2), W=nan_out(W, 0), nu=nan_out(nu, 1),
        g=nan_out(g, 2), g_inv=nan_out(g_inv, 2), A=nan_out(A, 2),
        shape_op=nan_out(shape_op, 2), lam=nan_out(lam, 1), frame_coords=nan_out(V, 2),
        frame=nan_out(frame, 2), H=nan_out(H, 0), normA2=nan_out(normA2, 0),
        christoffel=nan_out(christoffel, 3), margin=margin, u=u,
    )


def interior_curvatures(u, spacing, margin: int = MARGIN):
    """Ascending principal curvatures and ``W`` on the interior cells only.

    Same central differences as ``shape_field`` without the frame and
    auxiliary fields; used by the time stepper.
    """
    u = np.asarray(u, dtype=float)
    n = u.ndim
    core = tuple(slice(margin, s - margin) for s in u.shape)

    def shifted(offsets):
        return u[tuple(slice(margin + o, s - margin + o) for o, s in zip(offsets, u.shape))]

    du = np.empty(tuple(s - 2 * margin for s in u.shape) + (n,))
    d2u = np.empty(du.shape + (n,))
    centre = u[core]
    for i in range(n):
        e = [0] * n
        e[i] = 1
        plus, minus = shifted(e), shifted([-x for x in e])
        du[..., i] = (plus - minus) / (2.0 * spacing[i])
        d2u[..., i, i] = (plus - 2.0 * centre + minus) / spacing[i] ** 2
        for j in range(i + 1, n):
            def corner(a, b):
                off = [0] * n
                off[i], off[j] = a, b
                return shifted(off)
            val = (corner(1, 1) - corner(1, -1) - corner(-1, 1) + corner(-1, -1)) / (
                4.0 * spacing[i] * spacing[j])
            d2u[..., i, j] = d2u[..., j, i] = val
    w2 = 1.0 + np.sum(du * du, axis=-1)
    W = np.sqrt(w2)
    if n == 1:
        return (d2u[..., 0, :] / (W * w2)[..., None]), W
    g = np.eye(n) + du[..., :, None] * du[..., None, :]
    linv = np.linalg.inv(np.linalg.cholesky(g))
    B = linv @ (d2u / W[..., None, None]) @ np.swapaxes(linv, -1, -2)
    return np.linalg.eigvalsh(0.5 * (B + np.swapaxes(B, -1, -2))), W


def shape_field(patch: GraphPatch, derivatives: str = "fd") -> ShapeField:
    """Shape field of a patch.

    ``derivatives="fd"`` uses central differences (defined one cell in from
    the edge); ``"exact"`` takes derivatives from ``patch.source``.
    """
    if any(s < MIN_POINTS for s in patch.shape):
        raise DegenerateGrid(f"grid shape {patch.shape}: need at least {MIN_POINTS} points per axis")
    if derivatives == "fd":
        du = gradient_fd(patch.u, patch.spacing)
        d2u = hessian_fd(patch.u, patch.spacing)
    elif derivatives == "exact":
        if patch.source is None:
            raise DomainError("exact derivatives need a patch with an analytic source")
        pts = patch.points()
        du = patch.source.gradient(pts)
        d2u = patch.source.hessian(pts)
    else:
        raise DomainError(f"unknown derivative mode {derivatives!r}")
    return shape_from_derivatives(du, d2u, patch.lower, patch.spacing, u=patch.u)


# ---------------------------------------------------------------------------
# gamma-weighted quantities


@dataclass(frozen=True, eq=False)
class GammaField:
    gamma: np.ndarray
    dgamma: np.ndarray
    normA2_gamma: np.ndarray
    spec: cc.CurvatureSpec


def gamma_field(shape: ShapeField, spec: cc.CurvatureSpec) -> GammaField:
    """``gamma(lam)``, its eigenvalue gradient and ``|A|^2_gamma`` per grid point.

    The gradient uses the continuous extension on the cone boundary where it
    is finite and is NaN elsewhere on the boundary.
    """
    if spec.n != shape.n:
        raise DomainError(f"{spec.label()} does not match surface dimension {shape.n}")
    valid = shape.valid
    lam = shape.lam
    margin = cc.cone_margin(spec.cone, np.where(valid[..., None], lam, 1.0))
    bad = valid & (margin < -cc.CLOSURE_RTOL)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        x = shape.points()[idx]
        raise DomainError(
            f"principal curvatures {np.array2string(lam[idx], precision=8)} at grid index {idx} "
            f"(x = {np.array2string(x, precision=6)}) leave the closure of {spec.cone.label()}")
    safe = np.where(valid[..., None], lam, 1.0)
    gamma = np.where(valid, cc.eval_gamma(spec, safe), np.nan)
    dgamma = np.where(valid[..., None], cc.grad_gamma_closure(spec, safe), np.nan)
    flat = np.all(lam == 0.0, axis=-1)
    with np.errstate(invalid="ignore"):
        normA2_gamma = np.where(flat, 0.0, np.sum(dgamma * lam * lam, axis=-1))
    normA2_gamma = np.where(valid, normA2_gamma, np.nan)
    return GammaField(gamma=gamma, dgamma=dgamma, normA2_gamma=normA2_gamma, spec=spec)


def surface_hessian(patch: GraphPatch | None, shape: ShapeField, f) -> np.ndarray:
    """Covariant Hessian ``f_ij - Gamma^k_ij f_k`` in graph coordinates."""
    f = np.asarray(f, dtype=float)
    if f.shape != shape.grid_shape:
        raise DomainError(f"field shape {f.shape} does not match grid {shape.grid_shape}")
    if any(s < MIN_POINTS for s in f.shape):
        raise DegenerateGrid("grid too small for the Hessian stencil")
    df = gradient_fd(f, shape.spacing)
    d2f = hessian_fd(f, shape.spacing)
    return d2f - np.einsum("...kij,...k->...ij", shape.christoffel, df)


def frame_second_derivatives(shape: ShapeField, hess) -> np.ndarray:
    """``Hess f(tau_a, tau_a)`` for each principal direction ``a``."""
    V = shape.frame_coords
    return np.einsum("...ia,...ij,...ja->...a", V, hess, V)


def gamma_laplacian(shape: ShapeField, spec: cc.CurvatureSpec, f,
                    gfield: GammaField | None = None) -> np.ndarray:
    """``sum_a dgamma/dlam_a * Hess f(tau_a, tau_a)`` on the grid."""
    if gfield is None:
        gfield = gamma_field(shape, spec)
    hess = surface_hessian(None, shape, f)
    return np.sum(gfield.dgamma * frame_second_derivatives(shape, hess), axis=-1)


def directional_height_gradient(shape: ShapeField, f) -> np.ndarray:
    """``<grad f, (e_{n+1})^T> = g^{ij} f_i u_j = (Df . Du) / W^2``."""
    f = np.asarray(f, dtype=float)
    df = gradient_fd(f, shape.spacing)
    return np.sum(df * shape.du, axis=-1) / shape.W**2


def height_angle(shape: ShapeField) -> np.ndarray:
    """``<nu, e_{n+1}> = 1/W``."""
    return shape.nu[..., -1]
