"""Explicit Euler stepping of the graphical flow ``u_t = W * gamma(lam)``.

The speed is evaluated on the interior cells (two layers in from the edge);
the outer layers are either pinned to an exact translating solution or
frozen.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import curvature as cc
from .errors import ConeExit, DomainError, GammaFlowError, Instability
from .geometry import MARGIN, GraphPatch, interior_curvatures, interior_slices

GROWTH_LIMIT = 10.0
GROWTH_FLOOR = 1e-12


class Boundary(str, enum.Enum):
    PINNED = "PinnedToExactTranslate"
    FROZEN = "Frozen"


@dataclass(frozen=True)
class FixedStep:
    dt: float

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError("time step must be positive")


@dataclass(frozen=True)
class CFL:
    """``dt = safety * min(h)**2 / (4 * max sum_a dgamma/dlam_a)``."""

    safety: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.safety <= 1.0:
            raise DomainError("CFL safety factor must lie in (0, 1]")


@dataclass(frozen=True)
class FlowConfig:
    spec: cc.CurvatureSpec
    dt_policy: FixedStep | CFL = field(default_factory=CFL)
    T: float = 0.1
    boundary: Boundary = Boundary.PINNED
    record_every: int = 0
    trace_cones: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if not self.T > 0:
            raise DomainError("final time T must be positive")
        if self.record_every < 0:
            raise DomainError("record_every must be >= 0")


@dataclass(frozen=True, eq=False)
class Speed:
    """Interior speed ``W * gamma`` together with the data it came from."""

    speed: np.ndarray
    lam: np.ndarray
    gamma: np.ndarray
    W: np.ndarray
    dgamma_sum: np.ndarray


@dataclass(eq=False)
class FlowRun:
    initial: GraphPatch
    final: GraphPatch
    config: FlowConfig
    t: np.ndarray
    max_residual: np.ndarray
    min_cone_margin: np.ndarray
    max_abs_u: np.ndarray
    dt: np.ndarray
    cone_margins: dict = field(default_factory=dict)
    snapshots: list = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.t) - 1

    def series(self) -> np.ndarray:
        """Columns ``t, max_residual, min_cone_margin, max_abs_u``."""
        return np.column_stack([self.t, self.max_residual, self.min_cone_margin, self.max_abs_u])


def _interior_speed(patch: GraphPatch, spec: cc.CurvatureSpec) -> Speed:
    if spec.n != patch.n:
        raise DomainError(f"{spec.label()} does not match patch dimension {patch.n}")
    lam, W = interior_curvatures(patch.u, patch.spacing, MARGIN)
    margin = cc.cone_margin(spec.cone, lam)
    bad = (margin < -cc.CLOSURE_RTOL) | ~np.isfinite(margin)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        full = tuple(i + MARGIN for i in idx)
        x = patch.points()[full]
        raise ConeExit(
            f"principal curvatures {np.array2string(lam[idx], precision=8)} at grid index {full} "
            f"(x = {np.array2string(x, precision=6)}) left the closure of {spec.cone.label()}",
            index=full, lam=lam[idx])
    gamma = cc.eval_gamma(spec, lam)
    grad = cc.grad_gamma_closure(spec, lam)
    missing = ~np.all(np.isfinite(grad), axis=-1)
    if missing.any():
        # Unbounded gradient on the boundary: step just inside the cone.
        nudge = lam[missing] + 1e-8 * (1.0 + np.abs(lam[missing]))
        with np.errstate(all="ignore"):
            grad[missing] = cc._grad_raw(spec, nudge)
    return Speed(W * gamma, lam, gamma, W, np.sum(grad, axis=-1))


def cfl_dt(patch: GraphPatch, spec: cc.CurvatureSpec, safety: float = 0.5,
           speed: Speed | None = None) -> float:
    """Parabolic time-step restriction for the explicit scheme."""
    speed = _interior_speed(patch, spec) if speed is None else speed
    top = float(np.max(speed.dgamma_sum))
    if not np.isfinite(top):
        raise Instability("gamma has an unbounded gradient on the patch; no stable time step")
    if top <= 0:
        top = 1.0
    return safety * float(np.min(patch.spacing)) ** 2 / (4.0 * top)


@dataclass(frozen=True, eq=False)
class _Rim:
    """Boundary cells and, for pinned runs, their exact heights at ``t = 0``."""

    mask: np.ndarray
    exact: np.ndarray | None

    @classmethod
    def of(cls, patch: GraphPatch, config: FlowConfig) -> _Rim:
        mask = np.ones(patch.shape, dtype=bool)
        mask[interior_slices(patch.n, MARGIN)] = False
        exact = None
        if config.boundary is Boundary.PINNED:
            if patch.source is None:
                raise DomainError("pinned boundaries need a patch with an analytic source")
            exact = patch.source.height(patch.points()[mask])
        return cls(mask, exact)


def _advance(patch, config, t, dt, speed, rim=None):
    rim = _Rim.of(patch, config) if rim is None else rim
    u = patch.u
    new_u = u.copy()
    new_u[interior_slices(patch.n, MARGIN)] += dt * speed.speed
    if rim.exact is not None:
        new_u[rim.mask] = rim.exact + (t + dt)
    before = float(np.max(np.abs(u)))
    after = float(np.max(np.abs(new_u)))
    if not np.all(np.isfinite(new_u)) or (after > GROWTH_LIMIT * before and after > GROWTH_FLOOR):
        raise Instability(f"max |u| jumped from {before:.6g} to {after:.6g} in one step")
    return patch.with_u(new_u)


def step(patch: GraphPatch, config: FlowConfig, t: float = 0.0, dt: float | None = None) -> GraphPatch:
    """One explicit Euler step from time ``t``.

    ``dt`` defaults to the configured policy.  Pinned boundaries take the
    exact solution translated by ``t + dt``.
    """
    speed = _interior_speed(patch, config.spec)
    if dt is None:
        if isinstance(config.dt_policy, FixedStep):
            dt = config.dt_policy.dt
        else:
            dt = cfl_dt(patch, config.spec, config.dt_policy.safety, speed)
    return _advance(patch, config, t, dt, speed)


def _residual(speed: Speed) -> float:
    return float(np.max(np.abs(speed.gamma - 1.0 / speed.W)))


def run(patch: GraphPatch, config: FlowConfig) -> FlowRun:
    """Step from ``t = 0`` to ``config.T``; the last step is shortened to land on ``T``.

    Errors raised by a step carry the failure time in ``err.time``.
    """
    spec = config.spec
    cones = tuple(dict.fromkeys((spec.cone,) + tuple(config.trace_cones)))
    inner = interior_slices(patch.n, MARGIN)
    ts, res, margins, umax, dts = [], [], [], [], []
    traces = {c: [] for c in cones}
    snaps = []
    current = patch
    t = 0.0
    k = 0
    fixed = config.dt_policy.dt if isinstance(config.dt_policy, FixedStep) else None
    rim = _Rim.of(patch, config)
    while True:
        try:
            speed = _interior_speed(current, spec)
        except GammaFlowError as err:
            err.time = t
            raise
        ts.append(t)
        res.append(_residual(speed))
        for c in cones:
            traces[c].append(float(np.min(cc.cone_margin(c, speed.lam))))
        margins.append(traces[spec.cone][-1])
        umax.append(float(np.max(np.abs(current.u[inner]))))
        if config.record_every and k % config.record_every == 0:
            snaps.append((t, speed.lam.copy()))
        if t >= config.T * (1.0 - 1e-12):
            break
        try:
            dt = fixed if fixed is not None else cfl_dt(current, spec, config.dt_policy.safety, speed)
            remaining = config.T - t
            if dt >= remaining * (1.0 - 1e-9):
                dt = remaining
            current = _advance(current, config, t, dt, speed, rim)
        except GammaFlowError as err:
            err.time = t
            raise
        dts.append(dt)
        # Accumulating by index keeps times exact for fixed steps.
        t = config.T if dt == remaining else (fixed * (k + 1) if fixed is not None else t + dt)
        k += 1
    return FlowRun(
        initial=patch, final=current, config=config, t=np.array(ts),
        max_residual=np.array(res), min_cone_margin=np.array(margins),
        max_abs_u=np.array(umax), dt=np.array(dts),
        cone_margins={c: np.array(v) for c, v in traces.items()}, snapshots=snaps,
    )


def self_similarity_error(flow: FlowRun) -> float:
    """``max |u(T) - u(0) - T|`` over the interior."""
    inner = interior_slices(flow.initial.n, MARGIN)
    T = float(flow.t[-1])
    return float(np.max(np.abs(flow.final.u[inner] - flow.initial.u[inner] - T)))


def cone_trace(flow: FlowRun, cone: cc.ConeSpec) -> np.ndarray:
    """Minimum interior margin of ``cone`` at each recorded time.

    Per step for the cones traced during the run, otherwise per snapshot.
    """
    if cone in flow.cone_margins:
        return flow.cone_margins[cone]
    if not flow.snapshots:
        raise DomainError(f"{cone.label()} was not traced and the run kept no snapshots")
    return np.array([float(np.min(cc.cone_margin(cone, lam))) for _, lam in flow.snapshots])


def translate_exact(patch: GraphPatch, t: float) -> GraphPatch:
    """The exact translator advanced to time ``t`` (heights shifted by ``t``)."""
    if patch.source is None:
        raise DomainError("exact evolution needs an analytic source")
    return patch.with_u(patch.source.height(patch.points()) + t)


__all__ = [
    "Boundary", "CFL", "FixedStep", "FlowConfig", "FlowRun", "Speed", "cfl_dt", "cone_trace",
    "run", "self_similarity_error", "step", "translate_exact",
]
