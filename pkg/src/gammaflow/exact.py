"""Closed-form graphs: Grim Reaper cylinders, planes and quadratic graphs.

The Grim Reaper cylinder of width ``omega >= pi`` over the slab
``0 < x_1 < omega`` is

    u(x) = -(omega/pi)**2 * log(sin(pi x_1 / omega)) + a * x_n + h0,
    a = sqrt((omega/pi)**2 - 1),

with a single nonzero principal curvature ``(pi/omega) sin(pi x_1/omega)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import BoundaryPolicy, GraphPatch, ShapeField, shape_from_derivatives

# Widths this close to pi are taken to be pi (command-line input such as
# 3.14159265 would otherwise fall just below the admissible range).
_PI_SNAP = 1e-8
SLAB_MARGIN = 0.05


@dataclass(frozen=True)
class GrimSpec:
    """Grim Reaper cylinder of width ``omega`` in R^{n+1}, shifted up by ``h0``."""

    omega: float = math.pi
    n: int = 2
    h0: float = 0.0

    def __post_init__(self):
        omega = float(self.omega)
        if abs(omega - math.pi) <= _PI_SNAP * math.pi:
            omega = math.pi
        if not omega >= math.pi:
            raise DomainError(f"Grim Reaper width must be >= pi, got {self.omega}")
        if self.n < 1:
            raise DomainError("dimension must be >= 1")
        if self.n == 1 and omega != math.pi:
            raise DomainError("a tilted Grim Reaper needs n >= 2; for n = 1 the width is pi")
        object.__setattr__(self, "omega", omega)

    @property
    def b(self) -> float:
        """Width ratio ``omega / pi``."""
        return self.omega / math.pi

    @property
    def tilt(self) -> float:
        return math.sqrt(max(self.b**2 - 1.0, 0.0))

    def _x1(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.n:
            raise DomainError(f"expected points in R^{self.n}, got shape {pts.shape}")
        x1 = pts[..., 0]
        if np.any(~(x1 > 0.0)) or np.any(~(x1 < self.omega)):
            raise DomainError(f"x_1 must lie in (0, {self.omega}); got range "
                              f"[{np.min(x1)}, {np.max(x1)}]")
        return pts, x1

    # HeightSource protocol ------------------------------------------------
    def height(self, points) -> np.ndarray:
        pts, x1 = self._x1(points)
        u = -self.b**2 * np.log(np.sin(x1 / self.b)) + self.h0
        if self.n >= 2:
            u = u + self.tilt * pts[..., -1]
        return u

    def gradient(self, points) -> np.ndarray:
        pts, x1 = self._x1(points)
        out = np.zeros(pts.shape)
        out[..., 0] = -self.b / np.tan(x1 / self.b)
        if self.n >= 2:
            out[..., -1] += self.tilt
        return out

    def hessian(self, points) -> np.ndarray:
        pts, x1 = self._x1(points)
        out = np.zeros(pts.shape + (self.n,))
        out[..., 0, 0] = 1.0 / np.sin(x1 / self.b) ** 2
        return out

    def third(self, points) -> np.ndarray:
        """Third derivatives ``u_ijk``; only ``u_111`` is nonzero."""
        pts, x1 = self._x1(points)
        s = x1 / self.b
        out = np.zeros(pts.shape + (self.n, self.n))
        out[..., 0, 0, 0] = -2.0 * np.cos(s) / (self.b * np.sin(s) ** 3)
        return out

    def curvature(self, points) -> np.ndarray:
        """The nonzero principal curvature ``(pi/omega) sin(pi x_1/omega)``."""
        _, x1 = self._x1(points)
        return np.sin(x1 / self.b) / self.b


def grim_height(spec: GrimSpec, x):
    """Height of the Grim Reaper cylinder at ``x`` (a point or an array of points)."""
    u = spec.height(x)
    return float(u) if np.ndim(u) == 0 else u


def grim_shape(spec: GrimSpec, x) -> ShapeField:
    """Shape field from the analytic derivatives at the points ``x``."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    return shape_from_derivatives(spec.gradient(pts), spec.hessian(pts), margin=0)


def grim_sample_points(spec: GrimSpec, count: int, rng: np.random.Generator,
                       margin: float = SLAB_MARGIN) -> np.ndarray:
    """Random points of the slab, at least ``margin * omega`` from its edges."""
    pts = rng.uniform(-5.0, 5.0, size=(count, spec.n))
    pts[:, 0] = rng.uniform(margin * spec.omega, (1.0 - margin) * spec.omega, size=count)
    return pts


def grim_patch(spec: GrimSpec, resolution, x1_range=None, other_range=(0.0, 1.0)) -> GraphPatch:
    """Grid samples of the cylinder on a box inside the slab.

    ``resolution`` is the number of points per axis (an int or one per axis).
    The default ``x_1`` range is ``[0.1, 0.9] * omega``.
    """
    if x1_range is None:
        x1_range = (0.1 * spec.omega, 0.9 * spec.omega)
    lo, hi = float(x1_range[0]), float(x1_range[1])
    edge = SLAB_MARGIN * spec.omega * (1.0 - 1e-12)
    if lo < edge or hi > spec.omega - edge or not lo < hi:
        raise DomainError(f"x_1 range [{lo}, {hi}] must stay {SLAB_MARGIN} * omega inside "
                          f"(0, {spec.omega})")
    lower = [lo] + [other_range[0]] * (spec.n - 1)
    upper = [hi] + [other_range[1]] * (spec.n - 1)
    shape = np.broadcast_to(np.asarray(resolution, dtype=int), (spec.n,))
    return GraphPatch.from_box(lower, upper, shape, source=spec,
                               boundary_policy=BoundaryPolicy.EXACT)


@dataclass(frozen=True)
class PlaneSource:
    """The graph of an affine function ``c + slope . x``."""

    n: int
    c: float = 0.0
    slope: tuple = ()

    def _slope(self):
        return np.zeros(self.n) if not self.slope else np.asarray(self.slope, dtype=float)

    def height(self, points):
        pts = np.asarray(points, dtype=float)
        return self.c + pts @ self._slope()

    def gradient(self, points):
        pts = np.asarray(points, dtype=float)
        return np.broadcast_to(self._slope(), pts.shape).copy()

    def hessian(self, points):
        pts = np.asarray(points, dtype=float)
        return np.zeros(pts.shape + (self.n,))


def flat_patch(n: int, lower, upper, resolution, c: float = 0.0) -> GraphPatch:
    """A horizontal plane ``u = c``; all curvatures vanish."""
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (n,))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (n,))
    return GraphPatch.from_box(lower, upper, resolution, source=PlaneSource(n, c))


@dataclass(frozen=True, eq=False)
class QuadraticSource:
    """``u(x) = x^T M x / 2`` for a symmetric matrix ``M``."""

    matrix: np.ndarray

    def height(self, points):
        pts = np.asarray(points, dtype=float)
        return 0.5 * np.einsum("...i,ij,...j->...", pts, self.matrix, pts)

    def gradient(self, points):
        return np.asarray(points, dtype=float) @ np.asarray(self.matrix).T

    def hessian(self, points):
        pts = np.asarray(points, dtype=float)
        m = np.asarray(self.matrix, dtype=float)
        return np.broadcast_to(m, pts.shape + (m.shape[0],)).copy()


def paraboloid(n: int) -> QuadraticSource:
    return QuadraticSource(np.eye(n))


def saddle() -> QuadraticSource:
    return QuadraticSource(np.diag([1.0, -1.0]))
