"""One-dimensional translator profiles.

Two reductions of the translator equation ``gamma(lam) = <nu, e_{n+1}>``:

* the cylinder ``x_{n+1} = u(x_1) + a x_n`` gives
  ``(1 + a^2) u'' = 1 + a^2 + u'^2`` with ``u'(0) = 0``, whose solution is
  ``h0 - b^2 log cos(x / b)``, ``b^2 = 1 + a^2``;
* a radial graph ``u(|x|)`` in R^{n+1} gives
  ``gamma(k_rad, k_tan, ..., k_tan) = 1/sqrt(1 + u'^2)`` with
  ``k_rad = u''/(1 + u'^2)^{3/2}`` and ``k_tan = u'/(r sqrt(1 + u'^2))``.

Both are integrated with fixed-step classical RK4.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import curvature as cc
from .errors import (ConeExit, DegenerateGrid, DomainError, InterpolationRange,
                     RootBracketFailure, StepTooLarge)
from .geometry import MIN_POINTS, BoundaryPolicy, GraphPatch, grid_points

MAX_SLOPE = 1e6


class ProfileKind(str, enum.Enum):
    GRIM = "GrimProfile"
    BOWL = "BowlProfile"


@dataclass(frozen=True, eq=False)
class ProfileSolution:
    """A solved profile.

    ``lam[:, 0]`` is the curvature in the profile plane (radial for bowls),
    ``lam[:, 1]`` the curvature of the other directions (zero for Grim
    profiles, the tangential curvature of multiplicity ``n - 1`` for bowls).
    """

    kind: ProfileKind
    abscissa: np.ndarray
    u: np.ndarray
    du: np.ndarray
    ddu: np.ndarray
    lam: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def residual(self) -> np.ndarray:
        return np.asarray(self.metadata.get("residual", np.array([])))

    def curvature_vectors(self, n: int) -> np.ndarray:
        """Full eigenvalue vectors ``(lam_0, lam_1, ..., lam_1)`` of length ``n``."""
        out = np.repeat(self.lam[:, 1:2], n, axis=1)
        out[:, 0] = self.lam[:, 0]
        return out


def rk4_step(f, x, y, h):
    k1 = f(x, y)
    k2 = f(x + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(x + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(x + h, y + h * k3)
    return y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def _monitored_step(f, x, y, h):
    """One RK4 step plus a step-doubling estimate of its local error."""
    full = rk4_step(f, x, y, h)
    half = rk4_step(f, x, y, 0.5 * h)
    fine = rk4_step(f, x + 0.5 * h, half, 0.5 * h)
    err = np.abs(fine - full) / 15.0
    return fine, err


# ---------------------------------------------------------------------------
# Grim Reaper profile


def grim_closed_form(x, a: float = 0.0, h0: float = 0.0):
    """``(u, u')`` of the exact cylinder profile, valid for ``|x| < b pi/2``."""
    b = math.sqrt(1.0 + a * a)
    x = np.asarray(x, dtype=float)
    return h0 - b * b * np.log(np.cos(x / b)), b * np.tan(x / b)


def solve_grim_ivp(a: float, h0: float, step: float, x_max: float | None = None,
                   rtol: float = 1e-6) -> ProfileSolution:
    """Integrate ``(1 + a^2) u'' = 1 + a^2 + u'^2``, ``u(0) = h0``, ``u'(0) = 0``.

    With ``x_max`` given, raises ``StepTooLarge`` if the step-doubling error
    estimate (relative to ``max(1, |y|)``) exceeds ``rtol`` before reaching
    it.  Without ``x_max`` the integration runs toward the blow-up at
    ``b pi/2`` and halts at the first step that would exceed that error or
    push ``|u'|`` past 1e6.
    """
    if step <= 0:
        raise DomainError("step must be positive")
    if a < 0:
        raise DomainError("tilt a must be >= 0")
    b2 = 1.0 + a * a

    def rhs(_x, y):
        return np.array([y[1], (b2 + y[1] ** 2) / b2])

    limit = math.sqrt(b2) * math.pi / 2.0
    end = limit if x_max is None else float(x_max)
    if x_max is not None and end >= limit:
        raise DomainError(f"x_max must be below the blow-up point {limit}")
    xs = [0.0]
    ys = [np.array([h0, 0.0])]
    max_err = 0.0
    count = int(math.floor(end / step + 1e-9))
    for i in range(count):
        x = xs[-1]
        y_new, err = _monitored_step(rhs, x, ys[-1], step)
        rel = float(np.max(err / np.maximum(1.0, np.abs(y_new))))
        if not np.all(np.isfinite(y_new)) or abs(y_new[1]) > MAX_SLOPE or rel > rtol:
            if x_max is None:
                break
            raise StepTooLarge(f"local error estimate {rel:.3g} exceeds {rtol:g} at x = {x + step:.6g}")
        max_err = max(max_err, rel)
        xs.append((i + 1) * step)
        ys.append(y_new)
    xs = np.array(xs)
    ys = np.array(ys)
    u, du = ys[:, 0], ys[:, 1]
    ddu = (b2 + du**2) / b2
    w = np.sqrt(b2 + du**2)
    lam_main = ddu * b2 / w**3
    lam = np.stack([lam_main, np.zeros_like(lam_main)], axis=1)
    meta = {
        "a": a, "h0": h0, "step": step, "steps": len(xs) - 1,
        "max_local_error": max_err, "residual": lam_main - 1.0 / w,
    }
    return ProfileSolution(ProfileKind.GRIM, xs, u, du, ddu, lam, meta)


# ---------------------------------------------------------------------------
# bowl profile


def _profile_lams(n, k_rad, k_tan):
    lam = np.full(n, k_tan, dtype=float)
    lam[0] = k_rad
    return lam


def solve_radial_curvature(spec: cc.CurvatureSpec, k_tan: float, target: float,
                           guess: float | None = None, tol: float = 1e-12) -> float:
    """Solve ``gamma(k, k_tan, ..., k_tan) = target`` for ``k >= 0``.

    The bracket ``[0, B]`` doubles ``B`` until the sign changes; the root is
    then found by Newton iteration safeguarded by bisection.
    """
    n = spec.n

    def phi(k):
        return cc._eval_raw(spec, _profile_lams(n, k, k_tan)) - target

    lo, f_lo = 0.0, phi(0.0)
    if f_lo > 0:
        raise RootBracketFailure(
            f"gamma(0, k_tan={k_tan:.6g}, ...) already exceeds the target {target:.6g}",
            interval=(0.0, 0.0))
    hi = max(1.0, 2.0 * guess) if guess else 1.0
    f_hi = phi(hi)
    for _ in range(200):
        if f_hi >= 0:
            break
        lo, f_lo = hi, f_hi
        hi *= 2.0
        f_hi = phi(hi)
    else:
        raise RootBracketFailure("no sign change while doubling the bracket", interval=(0.0, hi))
    if f_lo == 0:
        return lo
    k = guess if guess is not None and lo < guess < hi else 0.5 * (lo + hi)
    for _ in range(100):
        val = phi(k)
        if val == 0.0:
            return k
        if val < 0:
            lo = k
        else:
            hi = k
        lam = _profile_lams(n, k, k_tan)
        with np.errstate(all="ignore"):
            slope = float(cc._grad_raw(spec, lam)[0])
        k_new = k - val / slope if np.isfinite(slope) and slope > 0 else np.nan
        if not lo < k_new < hi:
            k_new = 0.5 * (lo + hi)
        if abs(k_new - k) <= tol * max(1.0, abs(k)) or hi - lo <= tol:
            return k_new
        k = k_new
    return k


def tip_curvature(spec: cc.CurvatureSpec) -> float:
    """Umbilic curvature ``c = 1/gamma(1, ..., 1)`` at the tip of a bowl."""
    return 1.0 / cc.eval_gamma(spec, np.ones(spec.n))


def shoot_bowl(spec: cc.CurvatureSpec, n: int | None = None, r_max: float = 20.0,
               step: float = 1e-2, monitor: bool = True) -> ProfileSolution:
    """Integrate the radial translator profile from its tip out to ``r_max``."""
    n = spec.n if n is None else n
    if n < 2:
        raise DomainError("bowl profiles need n >= 2")
    if spec.n != n:
        spec = spec.with_dimension(n)
    if step <= 0 or r_max <= step:
        raise DomainError("need 0 < step < r_max")
    cls = cc.classify(spec, sample_count=64, seed=0)
    if not cls.monotone:
        raise DomainError(f"{spec.label()} is not monotone on its cone")
    if cc.cone_margin(spec.cone, np.ones(n)) <= 0:
        raise DomainError(f"cone of {spec.label()} misses the positive diagonal")
    c = tip_curvature(spec)
    guess = {"k": c}

    def k_rad_of(r, du):
        w = math.sqrt(1.0 + du * du)
        k_tan = du / (r * w)
        k = solve_radial_curvature(spec, k_tan, 1.0 / w, guess=guess["k"])
        guess["k"] = k
        return k, k_tan, w

    def rhs(r, y):
        k, _, w = k_rad_of(r, y[1])
        return np.array([y[1], k * w**3])

    count = int(round(r_max / step))
    rs = np.arange(count + 1) * step
    ys = np.empty((count + 1, 2))
    ys[0] = (0.0, 0.0)
    # Tip series u' = c r + e r^3; e follows from expanding gamma about the
    # umbilic point, where every dgamma/dlam_a equals 1/(n c).
    e = c**3 / (n + 2)
    ys[1] = (0.5 * c * step**2 + 0.25 * e * step**4, c * step + e * step**3)
    max_err = 0.0
    for i in range(1, count):
        if monitor:
            ys[i + 1], err = _monitored_step(rhs, rs[i], ys[i], step)
            max_err = max(max_err, float(np.max(err / np.maximum(1.0, np.abs(ys[i + 1])))))
        else:
            ys[i + 1] = rk4_step(rhs, rs[i], ys[i], step)
    k_rad = np.empty(count + 1)
    k_tan = np.empty(count + 1)
    w = np.sqrt(1.0 + ys[:, 1] ** 2)
    k_rad[0] = k_tan[0] = c
    guess["k"] = c
    for i in range(1, count + 1):
        k_rad[i], k_tan[i], _ = k_rad_of(rs[i], ys[i, 1])
    lam_full = np.repeat(k_tan[:, None], n, axis=1)
    lam_full[:, 0] = k_rad
    margins = cc.cone_margin(spec.cone, lam_full)
    if np.any(margins < -cc.CLOSURE_RTOL):
        i = int(np.argmax(margins < -cc.CLOSURE_RTOL))
        raise ConeExit(f"bowl profile leaves {spec.cone.label()} at r = {rs[i]:.6g}",
                       index=i, lam=lam_full[i])
    residual = cc._eval_raw(spec, lam_full) - 1.0 / w
    ddu = k_rad * w**3
    meta = {
        "spec": spec.to_dict(), "n": n, "step": step, "r_max": float(rs[-1]),
        "tip_curvature": c, "max_local_error": max_err, "residual": residual,
    }
    return ProfileSolution(ProfileKind.BOWL, rs, ys[:, 0], ys[:, 1], ddu,
                           np.stack([k_rad, k_tan], axis=1), meta)


# ---------------------------------------------------------------------------
# profiles to grid patches


@dataclass(frozen=True, eq=False)
class ProfileSource:
    """Height source built from a profile by cubic Hermite interpolation of ``(u, u')``.

    Bowl profiles are interpolated in ``s = r**2``: a radial graph is smooth
    at the axis only as a function of ``r**2``, and a cubic in ``r`` would
    leave an ``|x|**3`` kink at the tip.
    """

    solution: ProfileSolution
    n: int
    center: float = 0.0
    tilt: float = 0.0

    def __post_init__(self):
        sol = self.solution
        if sol.kind is ProfileKind.BOWL:
            r = sol.abscissa
            ds = np.empty_like(r)
            ds[0] = 0.5 * sol.ddu[0]
            ds[1:] = sol.du[1:] / (2.0 * r[1:])
            spline = CubicHermiteSpline(r * r, sol.u, ds)
        else:
            spline = CubicHermiteSpline(sol.abscissa, sol.u, sol.du)
        object.__setattr__(self, "_spline", spline)

    def _radius(self, points):
        pts = np.asarray(points, dtype=float)
        if self.solution.kind is ProfileKind.GRIM:
            r = np.abs(pts[..., 0] - self.center)
        else:
            r = np.linalg.norm(pts, axis=-1)
        if np.max(r) > self.solution.abscissa[-1] * (1 + 1e-12):
            raise InterpolationRange(
                f"patch reaches {np.max(r):.6g}, profile solved up to {self.solution.abscissa[-1]:.6g}")
        return pts, r

    def height(self, points):
        pts, r = self._radius(points)
        if self.solution.kind is ProfileKind.BOWL:
            return self._spline(r * r)
        u = self._spline(r)
        if self.n >= 2:
            u = u + self.tilt * pts[..., -1]
        return u


def profile_to_patch(sol: ProfileSolution, n: int, resolution, extent: float | None = None,
                     other_range=(0.0, 1.0)) -> GraphPatch:
    """Grid patch of the hypersurface generated by a profile.

    Grim profiles become cylinders ``u(x_1 - omega/2) + a x_n`` over
    ``|x_1 - omega/2| <= extent`` (same coordinates as the closed-form
    cylinder); bowl profiles are revolved over the cube ``[-extent, extent]^n``.
    """
    shape = tuple(int(s) for s in np.broadcast_to(np.asarray(resolution, dtype=int), (n,)))
    if any(s < MIN_POINTS for s in shape):
        raise DegenerateGrid(f"grid shape {shape}: need at least {MIN_POINTS} points per axis")
    r_end = float(sol.abscissa[-1])
    if sol.kind is ProfileKind.GRIM:
        a = float(sol.metadata.get("a", 0.0))
        if a > 0 and n < 2:
            raise DomainError("a tilted Grim profile needs n >= 2")
        center = math.sqrt(1.0 + a * a) * math.pi / 2.0
        extent = 0.9 * r_end if extent is None else float(extent)
        if extent > r_end:
            raise InterpolationRange(f"extent {extent} exceeds the solved range {r_end}")
        source = ProfileSource(sol, n, center=center, tilt=a)
        lower = np.array([center - extent] + [other_range[0]] * (n - 1))
        upper = np.array([center + extent] + [other_range[1]] * (n - 1))
    else:
        extent = r_end / math.sqrt(n) if extent is None else float(extent)
        if extent * math.sqrt(n) > r_end * (1 + 1e-12):
            raise InterpolationRange(
                f"cube half-width {extent} reaches radius {extent * math.sqrt(n):.6g} > {r_end}")
        source = ProfileSource(sol, n)
        lower = np.full(n, -extent)
        upper = np.full(n, extent)
    spacing = (upper - lower) / (np.asarray(shape) - 1)
    u = source.height(grid_points(lower, spacing, shape))
    return GraphPatch(lower, spacing, u, BoundaryPolicy.CLAMPED, source)
