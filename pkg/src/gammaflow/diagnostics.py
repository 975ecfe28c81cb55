"""Auxiliary fields on translator data and the convex-or-cylinder verdict.

All fields are full-grid arrays holding NaN where they are undefined or
where a stencil does not fit; summaries are taken over the interior.
Stored eigenvalues are ascending, so ``lam[..., 0]`` is the smallest and
``lam[..., -1]`` the largest principal curvature.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import curvature as cc
from .errors import DegenerateGrid, NotATranslator
from .geometry import (MARGIN, GammaField, GraphPatch, ShapeField, directional_height_gradient,
                       gamma_field, gamma_laplacian, gradient_fd, interior_slices)

# exp(-1/r^2) underflows to zero well before this; the cut-off is flat there.
CUTOFF_FLAT = 0.038
Q2_MARGIN = 3
DEFAULT_TOL = 0.05


def _interior(shape: ShapeField, margin: int = MARGIN) -> tuple:
    return interior_slices(shape.n, margin)


def _mask_outside(values, n, margin):
    out = np.full(np.shape(values), np.nan)
    sl = interior_slices(n, margin)
    out[sl] = np.asarray(values)[sl]
    return out


# ---------------------------------------------------------------------------
# translator residual


@dataclass(frozen=True, eq=False)
class Residual:
    field: np.ndarray
    max: float
    mean: float


def translator_residual(shape: ShapeField, gfield: GammaField) -> Residual:
    """``gamma(lam) - <nu, e_{n+1}>`` with its max and mean absolute value over the interior."""
    res = gfield.gamma - shape.nu[..., -1]
    vals = np.abs(res[_interior(shape)])
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return Residual(res, math.nan, math.nan)
    return Residual(res, float(vals.max()), float(vals.mean()))


def _require_translator(shape, gfield, tol):
    res = translator_residual(shape, gfield)
    if not res.max <= tol:
        raise NotATranslator(f"translator residual {res.max:.3g} exceeds tolerance {tol:g}")
    return res


# ---------------------------------------------------------------------------
# evolution identity


@dataclass(frozen=True, eq=False)
class IdentityCheck:
    field: np.ndarray
    max: float
    residual: Residual


def identity_field(shape: ShapeField, gfield: GammaField) -> np.ndarray:
    """Signed ``Delta_gamma gamma + grad_{n+1} gamma + |A|^2_gamma gamma`` (no translator check)."""
    gamma = gfield.gamma
    lap = gamma_laplacian(shape, gfield.spec, gamma, gfield)
    vert = directional_height_gradient(shape, gamma)
    return _mask_outside(lap + vert + gfield.normA2_gamma * gamma, shape.n, MARGIN)


def identity_check(patch: GraphPatch | None, shape: ShapeField, spec: cc.CurvatureSpec,
                   gfield: GammaField | None = None, tol: float = DEFAULT_TOL) -> IdentityCheck:
    """Absolute residual of the evolution identity satisfied by ``gamma`` on translators."""
    gfield = gamma_field(shape, spec) if gfield is None else gfield
    res = _require_translator(shape, gfield, tol)
    values = np.abs(identity_field(shape, gfield))
    inner = values[_interior(shape)]
    inner = inner[np.isfinite(inner)]
    return IdentityCheck(values, float(inner.max()) if inner.size else math.nan, res)


# ---------------------------------------------------------------------------
# convexity


@dataclass(frozen=True, eq=False)
class ConvexityScan:
    min_lambda: float
    negative_count: int
    cone_margins: dict
    alpha_star_min: float
    alpha_star: np.ndarray

    def to_dict(self) -> dict:
        return {
            "min_lambda": self.min_lambda,
            "negative_count": self.negative_count,
            "cone_margins": dict(self.cone_margins),
            "alpha_star_min": self.alpha_star_min,
        }


def default_cones(n: int) -> tuple:
    cones = [cc.ConeSpec.positive(), cc.ConeSpec.mean_positive(), cc.ConeSpec.alpha_cone(1.0)]
    if n >= 2:
        cones.append(cc.ConeSpec.two_convex())
    return tuple(cones)


def convexity_scan(shape: ShapeField, cones=None, region=None) -> ConvexityScan:
    """Smallest curvature, count of cells with a negative curvature, cone margins and ``H/|A|``.

    ``region`` is an optional boolean mask restricting the scan further.
    """
    cones = default_cones(shape.n) if cones is None else tuple(cones)
    keep = np.zeros(shape.grid_shape, dtype=bool)
    keep[_interior(shape)] = True
    keep &= shape.valid
    if region is not None:
        keep &= np.asarray(region, dtype=bool)
    lam = shape.lam[keep]
    norm = np.sqrt(shape.normA2)
    with np.errstate(invalid="ignore", divide="ignore"):
        alpha = np.where(keep & (norm > 0), shape.H / norm, np.nan)
    margins = {c.label(): float(np.min(cc.cone_margin(c, lam))) if lam.size else math.nan
               for c in cones}
    a_vals = alpha[np.isfinite(alpha)]
    return ConvexityScan(
        min_lambda=float(lam.min()) if lam.size else math.nan,
        negative_count=int(np.sum(lam[:, 0] < 0)) if lam.size else 0,
        cone_margins=margins,
        alpha_star_min=float(a_vals.min()) if a_vals.size else math.nan,
        alpha_star=alpha,
    )


# ---------------------------------------------------------------------------
# cut-off function and the ratio fields


def cutoff(r):
    """``-r**4 exp(-1/r**2)`` for ``r < 0`` and ``0`` otherwise."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    neg = r < -CUTOFF_FLAT
    rn = r[neg]
    out[neg] = -(rn**4) * np.exp(-1.0 / rn**2)
    out = np.where(np.isnan(r), np.nan, out)
    return float(out) if out.ndim == 0 else out


def cutoff_shifted(r):
    """``cutoff(r - 1)``."""
    return cutoff(np.asarray(r, dtype=float) - 1.0)


@dataclass(frozen=True, eq=False)
class DiagnosticsFields:
    h: np.ndarray | None
    j: np.ndarray
    g: np.ndarray
    gtilde: np.ndarray
    c_alpha: float | None = None
    extra: dict = field(default_factory=dict)


def sx_fields(shape: ShapeField, gfield: GammaField, alpha: float | None = None) -> DiagnosticsFields:
    """The ratio fields used in the non-convex analysis.

    ``h = gamma / lam_max`` (``n = 2`` only), ``j = lam_min / gamma``,
    ``g = cutoff(j)`` and ``gtilde = cutoff_shifted(gamma / (H - lam_min))``,
    each NaN where its denominator vanishes.  ``c_alpha`` is
    ``alpha**2 - 1`` when ``alpha`` is given.
    """
    lam = shape.lam
    gamma = gfield.gamma
    lo, hi = lam[..., 0], lam[..., -1]
    n = shape.n
    with np.errstate(invalid="ignore", divide="ignore"):
        h = np.where(hi != 0, gamma / hi, np.nan) if n == 2 else None
        j = np.where(gamma > 0, lo / gamma, np.nan)
        rest = shape.H - lo
        ratio = np.where(rest > 0, gamma / rest, np.nan)
    g = cutoff(j)
    gtilde = cutoff_shifted(ratio)
    if h is not None:
        h = _mask_outside(h, n, MARGIN)
    return DiagnosticsFields(
        h=h, j=_mask_outside(j, n, MARGIN), g=_mask_outside(g, n, MARGIN),
        gtilde=_mask_outside(gtilde, n, MARGIN),
        c_alpha=None if alpha is None else cc.alpha_constant(alpha),
    )


# ---------------------------------------------------------------------------
# |A|^2 / gamma^2 and its local maxima


@dataclass(frozen=True, eq=False)
class AwRatio:
    field: np.ndarray
    local_max: np.ndarray
    strict_max: np.ndarray

    @property
    def max_count(self) -> int:
        return int(self.local_max.sum())


def _neighbour_max(values, n):
    footprint = np.ones((3,) * n, dtype=bool)
    footprint[(1,) * n] = False
    filled = np.where(np.isfinite(values), values, -np.inf)
    return ndimage.maximum_filter(filled, footprint=footprint, mode="constant", cval=-np.inf)


def local_maxima(values, n: int, margin: int = MARGIN, atol: float = 0.0):
    """Weak and strict local maxima against all ``3**n - 1`` neighbours.

    Only cells ``margin`` layers in (whose neighbours are all reported) are
    candidates; weak maxima satisfy ``v >= max(neighbours) - atol``.
    """
    values = np.asarray(values, dtype=float)
    nb = _neighbour_max(values, n)
    cand = np.zeros(values.shape, dtype=bool)
    cand[interior_slices(n, margin + 1)] = True
    cand &= np.isfinite(values)
    with np.errstate(invalid="ignore"):
        weak = cand & (values >= nb - atol)
        strict = cand & (values > nb + atol)
    return weak, strict


def aw_ratio(shape: ShapeField, gfield: GammaField, atol: float = 0.0) -> AwRatio:
    """``|A|^2 / gamma^2`` with its local maxima (plateaus count as weak maxima)."""
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(gfield.gamma > 0, shape.normA2 / gfield.gamma**2, np.nan)
    ratio = _mask_outside(ratio, shape.n, MARGIN)
    weak, strict = local_maxima(ratio, shape.n, MARGIN, atol)
    return AwRatio(ratio, weak, strict)


# ---------------------------------------------------------------------------
# Q^2


@dataclass(frozen=True, eq=False)
class QSquared:
    field: np.ndarray
    squared_form: np.ndarray


def covariant_dA(shape: ShapeField) -> np.ndarray:
    """``(nabla_k A)_ij`` in graph coordinates, index order ``[..., k, i, j]``."""
    dA = np.moveaxis(gradient_fd(shape.A, shape.spacing), -1, -3)
    gam = shape.christoffel
    A = shape.A
    return (dA - np.einsum("...mki,...mj->...kij", gam, A)
            - np.einsum("...mkj,...im->...kij", gam, A))


def q_squared_field(patch: GraphPatch | None, shape: ShapeField, gfield: GammaField) -> QSquared:
    """``gamma^2 |nabla A|^2_g + |A|^2 |nabla gamma|^2_g - gamma <nabla |A|^2, nabla gamma>_g``.

    The weight ``dgamma/dlam_a`` sits on the differentiation slot in the
    principal frame.  ``squared_form`` evaluates the same quantity as the
    weighted square ``|gamma nabla A - nabla gamma (x) A|^2``.
    """
    n = shape.n
    if any(s < 2 * Q2_MARGIN + 1 for s in shape.grid_shape):
        raise DegenerateGrid(f"Q^2 needs at least {2 * Q2_MARGIN + 1} points per axis")
    V = shape.frame_coords
    T = np.einsum("...kij,...ka,...ib,...jc->...abc", covariant_dA(shape), V, V, V)
    A_frame = np.einsum("...ij,...ib,...jc->...bc", shape.A, V, V)
    gamma = gfield.gamma
    w = gfield.dgamma
    dgam = np.einsum("...k,...ka->...a", gradient_fd(gamma, shape.spacing), V)
    dA2 = np.einsum("...k,...ka->...a", gradient_fd(shape.normA2, shape.spacing), V)
    normA2 = shape.normA2
    term1 = gamma**2 * np.einsum("...a,...abc->...", w, T * T)
    term2 = normA2 * np.einsum("...a,...a->...", w, dgam * dgam)
    term3 = gamma * np.einsum("...a,...a->...", w, dA2 * dgam)
    expanded = term1 + term2 - term3
    diff = gamma[..., None, None, None] * T - dgam[..., :, None, None] * A_frame[..., None, :, :]
    squared = np.einsum("...a,...abc->...", w, diff * diff)
    return QSquared(_mask_outside(expanded, n, Q2_MARGIN), _mask_outside(squared, n, Q2_MARGIN))


# ---------------------------------------------------------------------------
# angles


def angle_fields(shape: ShapeField) -> np.ndarray:
    """``<nu, e_i>`` for the horizontal basis vectors, stacked on the last axis."""
    return shape.nu[..., :-1]


def common_tangent(shape: ShapeField, region=None):
    """Best unit vector ``v`` of R^{n+1} with ``<nu, v>`` small everywhere.

    Returns ``(v, rms)`` where ``rms`` is the root mean square of
    ``<nu, v>`` over the region.  Zero means every normal is orthogonal to a
    fixed direction, as on a cylinder.
    """
    keep = np.zeros(shape.grid_shape, dtype=bool)
    keep[_interior(shape)] = True
    keep &= shape.valid
    if region is not None:
        keep &= region
    N = shape.nu[keep]
    if N.shape[0] == 0:
        return np.full(shape.n + 1, np.nan), math.nan
    _, s, vt = np.linalg.svd(N, full_matrices=False)
    return vt[-1], float(s[-1] / math.sqrt(N.shape[0]))


# ---------------------------------------------------------------------------
# verdict


class Branch(str, enum.Enum):
    CONVEX = "strictly convex"
    GRIM = "grim-reaper-like"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Verdict:
    branch: Branch
    evidence: dict

    def to_dict(self) -> dict:
        return {"branch": self.branch.value, "evidence": self.evidence}


def _finite_stats(values):
    v = np.asarray(values)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return math.nan, math.nan
    return float(v.min()), float(v.max())


def dichotomy_report(patch: GraphPatch | None, shape: ShapeField, gfield: GammaField,
                     spec: cc.CurvatureSpec | None = None, tol: float = DEFAULT_TOL,
                     theta: float | None = None, aw_tol: float | None = None,
                     q2_tol: float | None = None, angle_tol: float | None = None) -> Verdict:
    """Decide which side of the convex-or-cylinder alternative the data supports.

    Thresholds default to multiples of ``h**2`` (largest spacing):
    ``theta = 10 h^2`` for curvatures, ``aw_tol = 10 h^2`` for the spread of
    ``|A|^2/gamma^2``, ``q2_tol = 100 h^2`` and ``angle_tol = 10 h^2``.
    """
    spec = gfield.spec if spec is None else spec
    res = _require_translator(shape, gfield, tol)
    h2 = float(np.max(shape.spacing)) ** 2
    theta = 10.0 * h2 if theta is None else theta
    aw_tol = 10.0 * h2 if aw_tol is None else aw_tol
    q2_tol = 100.0 * h2 if q2_tol is None else q2_tol
    angle_tol = 10.0 * h2 if angle_tol is None else angle_tol

    scan = convexity_scan(shape)
    inner = _interior(shape)
    lam = shape.lam[inner]
    lam = lam[np.all(np.isfinite(lam), axis=-1)]
    big = np.sum(np.abs(lam) > theta, axis=-1)
    aw = aw_ratio(shape, gfield)
    aw_lo, aw_hi = _finite_stats(aw.field)
    evidence = {
        "spec": spec.label(),
        "max_residual": res.max,
        "min_lambda": scan.min_lambda,
        "negative_count": scan.negative_count,
        "theta": theta,
        "one_nonzero_fraction": float(np.mean(big == 1)) if lam.size else math.nan,
        "aw_ratio_min": aw_lo,
        "aw_ratio_max": aw_hi,
    }
    if scan.min_lambda > theta:
        return Verdict(Branch.CONVEX, evidence)

    q2 = q_squared_field(patch, shape, gfield)
    q_lo, q_hi = _finite_stats(q2.field)
    _, rms = common_tangent(shape) if shape.n >= 2 else (None, 0.0)
    evidence.update({"q2_min": q_lo, "q2_max": q_hi, "tangent_rms": rms})
    grim = (
        lam.size > 0 and bool(np.all(big == 1))
        and aw_hi - aw_lo <= aw_tol
        and max(abs(q_lo), abs(q_hi)) <= q2_tol
        and rms <= angle_tol
    )
    return Verdict(Branch.GRIM if grim else Branch.INCONCLUSIVE, evidence)


# ---------------------------------------------------------------------------
# field dump


def dump_columns(n: int) -> list[str]:
    xs = [f"x{i + 1}" for i in range(n)]
    angles = [f"angle_{i}" for i in range(2, n + 1)]
    return xs + ["residual", "j", "g", "gtilde", "aw_ratio", "q2"] + angles + ["identity_residual"]


def dump_fields(patch: GraphPatch, shape: ShapeField, gfield: GammaField) -> dict:
    """Every per-point field of the dump, keyed by column name (full grid arrays)."""
    n = shape.n
    pts = shape.points()
    out = {f"x{i + 1}": pts[..., i] for i in range(n)}
    out["residual"] = _mask_outside(translator_residual(shape, gfield).field, n, MARGIN)
    sx = sx_fields(shape, gfield)
    out["j"], out["g"], out["gtilde"] = sx.j, sx.g, sx.gtilde
    out["aw_ratio"] = aw_ratio(shape, gfield).field
    small = any(s < 2 * Q2_MARGIN + 1 for s in shape.grid_shape)
    out["q2"] = np.full(shape.grid_shape, np.nan) if small else q_squared_field(patch, shape, gfield).field
    ang = angle_fields(shape)
    for i in range(2, n + 1):
        out[f"angle_{i}"] = _mask_outside(ang[..., i - 1], n, MARGIN)
    with np.errstate(invalid="ignore"):
        out["identity_residual"] = identity_field(shape, gfield)
    return out


__all__ = [
    "AwRatio", "Branch", "ConvexityScan", "DiagnosticsFields", "IdentityCheck", "QSquared",
    "Residual", "Verdict", "angle_fields", "aw_ratio", "common_tangent", "convexity_scan",
    "covariant_dA", "cutoff", "cutoff_shifted", "dichotomy_report", "dump_columns", "dump_fields",
    "identity_check", "identity_field", "local_maxima", "q_squared_field", "sx_fields",
    "translator_residual",
]
