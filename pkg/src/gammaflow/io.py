"""CSV and JSON artifacts.

Numbers are written with 17 significant digits so doubles round-trip
exactly.  Grid data is written one row per grid point in C order.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import curvature as cc
from .errors import DomainError
from .geometry import GraphPatch, ShapeField, gamma_field
from .profiles import ProfileKind, ProfileSolution

FMT = "%.17g"
PATCH_TAIL = ("H", "normA2", "gamma")
PROFILE_COLUMNS = ("r", "u", "du", "lambda_rad", "lambda_tan")
FLOW_COLUMNS = ("t", "max_residual", "min_cone_margin", "max_abs_u")


def _write(path, columns, data):
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[None, :]
    np.savetxt(path, data, fmt=FMT, delimiter=",", header=",".join(columns), comments="")


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Header and data rows of one of our CSV files."""
    path = Path(path)
    try:
        with path.open() as fh:
            header = fh.readline().strip().split(",")
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc}") from exc
    if not header or header == [""]:
        raise DomainError(f"{path} is empty")
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise DomainError(f"{path}: malformed CSV ({exc})") from exc
    if data.size and data.shape[1] != len(header):
        raise DomainError(f"{path}: {data.shape[1]} values per row, header has {len(header)}")
    return header, data


# ---------------------------------------------------------------------------
# patches


def patch_columns(n: int) -> list[str]:
    return ([f"x{i + 1}" for i in range(n)] + ["u"] + [f"lambda_{i + 1}" for i in range(n)]
            + list(PATCH_TAIL))


def write_patch(path, patch: GraphPatch, shape: ShapeField, spec: cc.CurvatureSpec | None = None):
    """Grid points, heights, ascending curvatures, ``H``, ``|A|^2`` and ``gamma``.

    ``gamma`` is NaN where the curvatures are unavailable or no spec is given.
    """
    n = patch.n
    pts = patch.points().reshape(-1, n)
    gamma = np.full(patch.shape, np.nan)
    if spec is not None:
        gamma = gamma_field(shape, spec).gamma
    cols = [pts, patch.u.reshape(-1, 1), shape.lam.reshape(-1, n), shape.H.reshape(-1, 1),
            shape.normA2.reshape(-1, 1), gamma.reshape(-1, 1)]
    _write(path, patch_columns(n), np.hstack(cols))


def patch_from_table(header, data) -> GraphPatch:
    """Rebuild a patch from grid rows; the points must form a full regular grid in C order."""
    xs = [c for c in header if c.startswith("x") and c[1:].isdigit()]
    n = len(xs)
    if n == 0 or "u" not in header:
        raise DomainError("patch CSV needs x1..xn and u columns")
    if xs != [f"x{i + 1}" for i in range(n)]:
        raise DomainError(f"unexpected coordinate columns {xs}")
    pts = data[:, :n]
    axes = [np.unique(pts[:, i]) for i in range(n)]
    shape = tuple(len(a) for a in axes)
    if int(np.prod(shape)) != data.shape[0]:
        raise DomainError("patch CSV rows do not form a full rectangular grid")
    lower = np.array([a[0] for a in axes])
    spacing = np.array([(a[-1] - a[0]) / (len(a) - 1) if len(a) > 1 else 1.0 for a in axes])
    for a, h in zip(axes, spacing):
        if len(a) > 1 and not np.allclose(np.diff(a), h, rtol=1e-9, atol=0.0):
            raise DomainError("patch CSV grid is not uniformly spaced")
    order = np.lexsort(tuple(pts[:, i] for i in reversed(range(n))))
    u = data[order, header.index("u")].reshape(shape)
    return GraphPatch(lower, spacing, u)


def read_patch(path) -> GraphPatch:
    header, data = read_table(path)
    return patch_from_table(header, data)


# ---------------------------------------------------------------------------
# profiles


def write_profile(path, sol: ProfileSolution):
    _write(path, PROFILE_COLUMNS,
           np.column_stack([sol.abscissa, sol.u, sol.du, sol.lam[:, 0], sol.lam[:, 1]]))


def profile_from_table(header, data, kind: ProfileKind = ProfileKind.BOWL) -> ProfileSolution:
    if tuple(header) != PROFILE_COLUMNS:
        raise DomainError(f"profile CSV header must be {','.join(PROFILE_COLUMNS)}")
    r, u, du, lam_rad, lam_tan = data.T
    if r.size < 2 or np.any(np.diff(r) <= 0):
        raise DomainError("profile abscissa must be increasing with at least two nodes")
    w = np.sqrt(1.0 + du**2)
    if kind is ProfileKind.BOWL:
        ddu = lam_rad * w**3
    else:
        ddu = np.gradient(du, r)
    return ProfileSolution(ProfileKind(kind), r, u, du, ddu, np.column_stack([lam_rad, lam_tan]),
                           {"source": "csv"})


def read_profile(path, kind: ProfileKind = ProfileKind.BOWL) -> ProfileSolution:
    header, data = read_table(path)
    return profile_from_table(header, data, kind)


# ---------------------------------------------------------------------------
# flow series, diagnostics dump and verdicts


def write_flow(path, series):
    _write(path, FLOW_COLUMNS, series)


def write_dump(path, columns, fields: dict):
    _write(path, columns, np.column_stack([np.asarray(fields[c]).reshape(-1) for c in columns]))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def to_json(obj) -> str:
    """Deterministic JSON (sorted keys, non-finite numbers as null)."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2)


def write_json(path, obj):
    Path(path).write_text(to_json(obj) + "\n")
