"""Curvature functions of the principal curvatures and their matrix calculus.

A curvature function ``gamma`` is a symmetric, positively 1-homogeneous,
increasing function on an open symmetric cone of R^n, extended continuously
to the closure of the cone.  Every function here accepts eigenvalue arrays of
shape ``(..., n)`` and broadcasts over the leading axes.
"""

from __future__ import annotations

import dataclasses
import enum
import itertools
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .errors import DomainError

# Relative slack under which a point slightly outside a cone counts as lying
# on its closure (finite-difference eigenvalues carry rounding noise).
CLOSURE_RTOL = 1e-9
# Eigenvalue pairs closer than this (relative to max(1, |lambda|)) use the
# limit of the divided difference.
DEGENERATE_GAP = 1e-7


class ConeKind(str, enum.Enum):
    POSITIVE = "Positive"
    ALPHA = "Alpha"
    TWO_CONVEX_TILDE = "TwoConvexTilde"
    GARDING = "Garding"
    MEAN_POSITIVE = "MeanPositive"


@dataclass(frozen=True)
class ConeSpec:
    """A symmetric open cone of R^n given by a family of inequalities."""

    kind: ConeKind
    alpha: float | None = None
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ConeKind(self.kind))
        if self.kind is ConeKind.ALPHA:
            if self.alpha is None or not 0.0 < self.alpha <= 1.0:
                raise DomainError(f"Alpha cone needs alpha in (0, 1], got {self.alpha}")
        if self.kind is ConeKind.GARDING:
            if self.k is None or self.k < 1:
                raise DomainError(f"Garding cone needs k >= 1, got {self.k}")

    @classmethod
    def positive(cls):
        return cls(ConeKind.POSITIVE)

    @classmethod
    def alpha_cone(cls, alpha):
        return cls(ConeKind.ALPHA, alpha=float(alpha))

    @classmethod
    def two_convex(cls):
        return cls(ConeKind.TWO_CONVEX_TILDE)

    @classmethod
    def garding(cls, k):
        return cls(ConeKind.GARDING, k=int(k))

    @classmethod
    def mean_positive(cls):
        return cls(ConeKind.MEAN_POSITIVE)

    def label(self) -> str:
        if self.kind is ConeKind.ALPHA:
            return f"Alpha({self.alpha:g})"
        if self.kind is ConeKind.GARDING:
            return f"Garding({self.k})"
        return self.kind.value


class Kind(str, enum.Enum):
    MEAN = "Mean"
    SIGMA_K_ROOT = "SigmaKRoot"
    GAUSS_ROOT = "GaussRoot"
    POWER_MEAN = "PowerMean"
    CONVEX_COMBO = "ConvexCombo"


@dataclass(frozen=True)
class CurvatureSpec:
    """A catalog entry: which curvature function, in which dimension.

    ``SigmaKRoot`` is ``S_k**(1/k)`` on the Garding cone, ``GaussRoot`` is
    ``(l_1 ... l_n)**(1/n)`` and ``PowerMean`` is ``(sum l_i**p)**(1/p)``,
    both on the positive cone, and ``ConvexCombo`` is ``t*H + (1-t)*inner``
    on the cone of ``inner``.
    """

    kind: Kind
    n: int
    k: int | None = None
    p: float | None = None
    t: float | None = None
    inner: CurvatureSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"dimension n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.kind is Kind.SIGMA_K_ROOT:
            if self.k is None or not 1 <= self.k <= self.n:
                raise DomainError(f"SigmaKRoot needs 1 <= k <= n, got k={self.k}, n={self.n}")
        elif self.kind is Kind.POWER_MEAN:
            if self.p is None or self.p < 1:
                raise DomainError(f"PowerMean needs p >= 1, got {self.p}")
        elif self.kind is Kind.CONVEX_COMBO:
            if self.t is None or not 0.0 < self.t <= 1.0:
                raise DomainError(f"ConvexCombo needs t in (0, 1], got {self.t}")
            if self.inner is None:
                raise DomainError("ConvexCombo needs an inner spec")
            if self.inner.n != self.n:
                raise DomainError("ConvexCombo inner spec has a different dimension")

    # constructors -------------------------------------------------------
    @classmethod
    def mean(cls, n):
        return cls(Kind.MEAN, n)

    @classmethod
    def sigma_k_root(cls, k, n):
        return cls(Kind.SIGMA_K_ROOT, n, k=int(k))

    @classmethod
    def gauss_root(cls, n):
        return cls(Kind.GAUSS_ROOT, n)

    @classmethod
    def power_mean(cls, p, n):
        return cls(Kind.POWER_MEAN, n, p=float(p))

    @classmethod
    def convex_combo(cls, t, inner):
        return cls(Kind.CONVEX_COMBO, inner.n, t=float(t), inner=inner)

    @property
    def cone(self) -> ConeSpec:
        if self.kind is Kind.MEAN:
            return ConeSpec.mean_positive()
        if self.kind is Kind.SIGMA_K_ROOT:
            return ConeSpec.garding(self.k)
        if self.kind is Kind.CONVEX_COMBO:
            return self.inner.cone
        return ConeSpec.positive()

    def with_dimension(self, n: int) -> CurvatureSpec:
        """Same kind and parameters in dimension ``n``."""
        inner = self.inner.with_dimension(n) if self.inner is not None else None
        return dataclasses.replace(self, n=n, inner=inner)

    def label(self) -> str:
        if self.kind is Kind.SIGMA_K_ROOT:
            return f"SigmaKRoot(k={self.k}, n={self.n})"
        if self.kind is Kind.POWER_MEAN:
            return f"PowerMean(p={self.p:g}, n={self.n})"
        if self.kind is Kind.CONVEX_COMBO:
            return f"ConvexCombo(t={self.t:g}, {self.inner.label()})"
        return f"{self.kind.value}(n={self.n})"

    # JSON ----------------------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind.value, "n": self.n}
        if self.k is not None:
            out["k"] = self.k
        if self.p is not None:
            out["p"] = self.p
        if self.t is not None:
            out["t"] = self.t
        if self.inner is not None:
            out["inner"] = self.inner.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], n: int | None = None) -> CurvatureSpec:
        """Build a spec from its JSON object form.

        ``n`` fills in the dimension when the object omits it; nested
        ``inner`` objects inherit the outer dimension.
        """
        if not isinstance(data, Mapping):
            raise DomainError("curvature spec must be a JSON object")
        unknown = set(data) - {"kind", "n", "k", "p", "t", "inner"}
        if unknown:
            raise DomainError(f"unknown curvature spec fields: {sorted(unknown)}")
        try:
            kind = Kind(data["kind"])
        except (KeyError, ValueError) as exc:
            raise DomainError(f"bad or missing curvature kind: {data.get('kind')!r}") from exc
        dim = data.get("n", n)
        if dim is None:
            raise DomainError("curvature spec needs a dimension 'n'")
        if isinstance(dim, bool) or not isinstance(dim, (int, float)):
            raise DomainError(f"dimension must be an integer, got {dim!r}")
        inner = None
        if kind is Kind.CONVEX_COMBO:
            if "inner" not in data:
                raise DomainError("ConvexCombo needs an 'inner' spec")
            inner = cls.from_dict(data["inner"], n=dim)
        k = data.get("k")
        if kind is Kind.SIGMA_K_ROOT and (isinstance(k, bool) or not isinstance(k, int)):
            raise DomainError(f"SigmaKRoot needs an integer k, got {k!r}")
        return cls(kind, dim, k=k, p=data.get("p"), t=data.get("t"), inner=inner)


@dataclass(frozen=True)
class ConeMembership:
    inside: bool
    margin: float


@dataclass(frozen=True)
class SpectralPoint:
    """A symmetric matrix together with its eigen-decomposition."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenframe: np.ndarray

    @classmethod
    def from_matrix(cls, matrix) -> SpectralPoint:
        a = np.asarray(matrix, dtype=float)
        if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
            raise DomainError("expected a square matrix")
        scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
        if np.max(np.abs(a - np.swapaxes(a, -1, -2))) > 1e-12 * scale:
            raise DomainError("matrix is not symmetric")
        a = 0.5 * (a + np.swapaxes(a, -1, -2))
        lam, q = np.linalg.eigh(a)
        return cls(a, lam, q)


# ---------------------------------------------------------------------------
# elementary symmetric polynomials and cone margins


def esym(lam, k: int) -> np.ndarray:
    """Elementary symmetric polynomials ``S_0 .. S_k`` of ``lam`` (last axis).

    Returns an array of shape ``(k + 1, ...)``.
    """
    lam = np.asarray(lam, dtype=float)
    out = np.zeros((k + 1,) + lam.shape[:-1])
    out[0] = 1.0
    for i in range(lam.shape[-1]):
        li = lam[..., i]
        for j in range(min(k, i + 1), 0, -1):
            out[j] = out[j] + li * out[j - 1]
    return out


def _norm(lam):
    return np.linalg.norm(lam, axis=-1)


def cone_margin(cone: ConeSpec, lam) -> np.ndarray:
    """Signed slack of the cone inequalities, normalized by ``|lam|``.

    Zero on the boundary (and at the origin), positive inside.  Degree-i
    inequalities such as ``S_i > 0`` are normalized by ``|lam|**i``.
    """
    lam = np.asarray(lam, dtype=float)
    norm = _norm(lam)
    safe = np.where(norm > 0, norm, 1.0)
    H = lam.sum(axis=-1)
    if cone.kind is ConeKind.POSITIVE:
        m = lam.min(axis=-1) / safe
    elif cone.kind is ConeKind.ALPHA:
        m = (H - cone.alpha * norm) / safe
    elif cone.kind is ConeKind.MEAN_POSITIVE:
        m = H / safe
    elif cone.kind is ConeKind.TWO_CONVEX_TILDE:
        if lam.shape[-1] >= 2:
            s = np.sort(lam, axis=-1)
            m = np.minimum(H, s[..., 0] + s[..., 1]) / safe
        else:
            m = H / safe
    else:
        e = esym(lam, min(cone.k, lam.shape[-1]))
        m = np.min(np.stack([e[i] / safe**i for i in range(1, e.shape[0])]), axis=0)
        if cone.k > lam.shape[-1]:
            # S_i vanishes identically for i > n: the cone is empty.
            m = np.minimum(m, 0.0)
    return np.where(norm > 0, m, 0.0)


def cone_contains(cone: ConeSpec, lam) -> ConeMembership:
    """Membership test with the normalized signed slack."""
    lam = np.asarray(lam, dtype=float)
    if lam.ndim != 1:
        raise DomainError("cone_contains expects a single eigenvalue vector")
    m = float(cone_margin(cone, lam))
    return ConeMembership(inside=m > 0.0, margin=m)


def alpha_constant(alpha: float) -> float:
    """``c(alpha) = alpha**2 - 1``, the lower bound for ``l_min/l_max`` on the
    non-convex part of a surface whose curvatures lie in ``Gamma_alpha``."""
    return alpha * alpha - 1.0


# ---------------------------------------------------------------------------
# evaluation


def _as_lam(spec: CurvatureSpec, lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.shape[-1:] != (spec.n,):
        raise DomainError(f"expected eigenvalues of length {spec.n}, got shape {lam.shape}")
    return lam


def _first_bad(mask) -> tuple:
    idx = np.argwhere(mask)
    return tuple(int(i) for i in idx[0]) if idx.size else ()


def _check(spec: CurvatureSpec, lam: np.ndarray, interior: bool):
    m = cone_margin(spec.cone, lam)
    bad = (m <= 0.0) if interior else (m < -CLOSURE_RTOL)
    bad = np.asarray(bad | ~np.isfinite(m))
    if bad.any():
        where = _first_bad(bad) if bad.ndim else ()
        point = lam[where] if where else lam
        region = "interior" if interior else "closure"
        raise DomainError(
            f"eigenvalues {np.array2string(np.asarray(point), precision=6)} at index {where} "
            f"outside the {region} of {spec.cone.label()} for {spec.label()}"
        )
    return m


def _eval_raw(spec: CurvatureSpec, lam: np.ndarray) -> np.ndarray:
    kind = spec.kind
    if kind is Kind.MEAN:
        return np.maximum(lam.sum(axis=-1), 0.0)
    if kind is Kind.SIGMA_K_ROOT:
        s = esym(lam, spec.k)[spec.k]
        return np.maximum(s, 0.0) ** (1.0 / spec.k)
    if kind is Kind.GAUSS_ROOT:
        return np.prod(np.maximum(lam, 0.0), axis=-1) ** (1.0 / spec.n)
    if kind is Kind.POWER_MEAN:
        return np.sum(np.maximum(lam, 0.0) ** spec.p, axis=-1) ** (1.0 / spec.p)
    return spec.t * lam.sum(axis=-1) + (1.0 - spec.t) * _eval_raw(spec.inner, lam)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def eval_gamma(spec: CurvatureSpec, lam):
    """Evaluate ``gamma`` on the closure of its cone.

    Points within ``CLOSURE_RTOL`` outside the cone are projected onto the
    boundary, where the continuous extension applies.
    """
    lam = _as_lam(spec, lam)
    _check(spec, lam, interior=False)
    return _scalar(_eval_raw(spec, lam))


def _grad_raw(spec: CurvatureSpec, lam: np.ndarray) -> np.ndarray:
    kind = spec.kind
    n = spec.n
    if kind is Kind.MEAN:
        return np.ones_like(lam)
    if kind is Kind.SIGMA_K_ROOT:
        k = spec.k
        s = esym(lam, k)[k]
        drop = np.stack([esym(np.delete(lam, i, axis=-1), k - 1)[k - 1] for i in range(n)], axis=-1)
        return (s ** (1.0 / k - 1.0) / k)[..., None] * drop
    if kind is Kind.GAUSS_ROOT:
        g = np.prod(lam, axis=-1) ** (1.0 / n)
        return g[..., None] / (n * lam)
    if kind is Kind.POWER_MEAN:
        g = np.sum(np.maximum(lam, 0.0) ** spec.p, axis=-1) ** (1.0 / spec.p)
        r = np.maximum(lam, 0.0) / g[..., None]
        return r ** (spec.p - 1.0)
    return spec.t + (1.0 - spec.t) * _grad_raw(spec.inner, lam)


def _hess_raw(spec: CurvatureSpec, lam: np.ndarray) -> np.ndarray:
    kind = spec.kind
    n = spec.n
    shape = lam.shape + (n,)
    if kind is Kind.MEAN:
        return np.zeros(shape)
    if kind is Kind.SIGMA_K_ROOT:
        k = spec.k
        s = esym(lam, k)[k]
        grad_s = np.stack([esym(np.delete(lam, i, axis=-1), k - 1)[k - 1] for i in range(n)], axis=-1)
        second = np.zeros(shape)
        if k >= 2:
            for i, j in itertools.combinations(range(n), 2):
                rest = np.delete(lam, [i, j], axis=-1)
                v = esym(rest, k - 2)[k - 2]
                second[..., i, j] = v
                second[..., j, i] = v
        a = (s ** (1.0 / k - 1.0) / k)[..., None, None]
        b = ((1.0 / k) * (1.0 / k - 1.0) * s ** (1.0 / k - 2.0))[..., None, None]
        return a * second + b * grad_s[..., :, None] * grad_s[..., None, :]
    if kind is Kind.GAUSS_ROOT:
        g = np.prod(lam, axis=-1) ** (1.0 / n)
        inv = 1.0 / lam
        out = (g / n**2)[..., None, None] * inv[..., :, None] * inv[..., None, :]
        idx = np.arange(n)
        out[..., idx, idx] -= (g / n)[..., None] * inv**2
        return out
    if kind is Kind.POWER_MEAN:
        p = spec.p
        g = np.sum(lam**p, axis=-1) ** (1.0 / p)
        r = lam / g[..., None]
        w = r ** (p - 1.0)
        out = -w[..., :, None] * w[..., None, :]
        idx = np.arange(n)
        out[..., idx, idx] += r ** (p - 2.0)
        return ((p - 1.0) / g)[..., None, None] * out
    return (1.0 - spec.t) * _hess_raw(spec.inner, lam)


def grad_gamma(spec: CurvatureSpec, lam) -> np.ndarray:
    """Gradient of ``gamma`` with respect to the eigenvalues (interior only)."""
    lam = _as_lam(spec, lam)
    _check(spec, lam, interior=True)
    return _grad_raw(spec, lam)


def grad_gamma_closure(spec: CurvatureSpec, lam) -> np.ndarray:
    """Gradient extended to the closure of the cone where the formula is finite.

    Entries are NaN where the extension does not exist (e.g. ``GaussRoot``
    on a face of the positive cone).  No domain check beyond closure.
    """
    lam = _as_lam(spec, lam)
    _check(spec, lam, interior=False)
    proj = lam
    if spec.cone.kind is ConeKind.POSITIVE:
        proj = np.maximum(lam, 0.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        g = _grad_raw(spec, proj)
    return np.where(np.isfinite(g), g, np.nan)


def hess_gamma(spec: CurvatureSpec, lam) -> np.ndarray:
    """Hessian matrix of ``gamma`` with respect to the eigenvalues."""
    lam = _as_lam(spec, lam)
    _check(spec, lam, interior=True)
    return _hess_raw(spec, lam)


def hess_quadform_eig(spec: CurvatureSpec, lam, xi) -> float:
    """``<Hess(gamma)(lam) xi, xi>``."""
    hess = hess_gamma(spec, lam)
    xi = np.asarray(xi, dtype=float)
    return _scalar(np.einsum("...i,...ij,...j->...", xi, hess, xi))


def euler_residual(spec: CurvatureSpec, lam):
    """``|gamma(lam) - <grad gamma(lam), lam>|``; zero for 1-homogeneous gamma."""
    lam = _as_lam(spec, lam)
    g = eval_gamma(spec, lam)
    return _scalar(np.abs(g - np.sum(grad_gamma(spec, lam) * lam, axis=-1)))


# ---------------------------------------------------------------------------
# matrix level


def _spectral(a) -> SpectralPoint:
    return a if isinstance(a, SpectralPoint) else SpectralPoint.from_matrix(a)


def matrix_grad(spec: CurvatureSpec, a) -> np.ndarray:
    """Derivative of ``A -> gamma(lambda(A))``, as a symmetric matrix."""
    sp = _spectral(a)
    g = grad_gamma(spec, sp.eigenvalues)
    q = sp.eigenframe
    return np.einsum("...ia,...a,...ja->...ij", q, g, q)


def divided_differences(spec: CurvatureSpec, lam) -> np.ndarray:
    """Matrix ``C_ab = (d_b gamma - d_a gamma) / (l_b - l_a)`` for ``a != b``.

    Nearly equal pairs use the limit ``(H_aa + H_bb)/2 - H_ab``, which is half
    the second derivative along ``e_a - e_b``.
    """
    lam = _as_lam(spec, lam)
    g = grad_gamma(spec, lam)
    hess = _hess_raw(spec, lam)
    gap = lam[..., None, :] - lam[..., :, None]
    dg = g[..., None, :] - g[..., :, None]
    diag = np.diagonal(hess, axis1=-2, axis2=-1)
    limit = 0.5 * (diag[..., :, None] + diag[..., None, :]) - hess
    scale = np.maximum(1.0, _norm(lam))[..., None, None]
    close = np.abs(gap) < DEGENERATE_GAP * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(close, limit, dg / np.where(close, 1.0, gap))
    idx = np.arange(spec.n)
    c[..., idx, idx] = 0.0
    return c


def matrix_hess_quadform(spec: CurvatureSpec, a, t) -> float:
    """Second derivative of ``A -> gamma(lambda(A))`` in direction ``T``."""
    sp = _spectral(a)
    t = np.asarray(t, dtype=float)
    q = sp.eigenframe
    tp = np.einsum("...ia,...ij,...jb->...ab", q, t, q)
    lam = sp.eigenvalues
    hess = hess_gamma(spec, lam)
    d = np.diagonal(tp, axis1=-2, axis2=-1)
    diag_part = np.einsum("...a,...ab,...b->...", d, hess, d)
    off_part = np.sum(divided_differences(spec, lam) * tp**2, axis=(-2, -1))
    return _scalar(diag_part + off_part)


# ---------------------------------------------------------------------------
# sampling and classification


def sample_cone(cone: ConeSpec, n: int, count: int, rng: np.random.Generator,
                min_margin: float = 1e-3) -> np.ndarray:
    """Random points of ``cone`` in R^n with normalized margin >= ``min_margin``."""
    out = []
    have = 0
    for _ in range(1000):
        z = rng.normal(size=(max(4 * count, 64), n))
        shift = rng.uniform(0.0, 3.0, size=(z.shape[0], 1))
        cand = z + shift
        cand = cand[cone_margin(cone, cand) >= min_margin]
        out.append(cand)
        have += len(cand)
        if have >= count:
            break
    pts = np.concatenate(out)
    if len(pts) < count:
        raise DomainError(f"could not sample {count} points of {cone.label()} in R^{n}")
    return pts[:count]


@dataclass(frozen=True)
class Classification:
    """Sampled evidence for the structural properties of a curvature function.

    Each flag comes with the worst-case margin seen over the samples.
    """

    symmetric: bool
    homogeneous: bool
    monotone: bool
    normalized: bool
    convex: bool
    concave: bool
    off_radial_strict: bool
    margins: dict
    sample_count: int
    seed: int
    caveat: str = "sampled, not proved"

    FLAGS = ("symmetric", "homogeneous", "monotone", "normalized", "convex", "concave",
             "off_radial_strict")

    def to_dict(self) -> dict:
        out = {name: getattr(self, name) for name in self.FLAGS}
        out["margins"] = dict(self.margins)
        out["sample_count"] = self.sample_count
        out["seed"] = self.seed
        out["caveat"] = self.caveat
        return out


def normalization_value(spec: CurvatureSpec) -> float:
    """``gamma(1, 0, ..., 0)`` through the continuous extension."""
    e1 = np.zeros(spec.n)
    e1[0] = 1.0
    return eval_gamma(spec, e1)


def classify(spec: CurvatureSpec, sample_count: int = 1000, seed: int = 0,
             rtol: float = 1e-12, sign_tol: float = 1e-10) -> Classification:
    """Decide the structural flags of ``spec`` by random sampling inside its cone."""
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    n = spec.n
    lam = sample_cone(spec.cone, n, sample_count, rng)
    g = eval_gamma(spec, lam)
    tiny = np.finfo(float).tiny

    perm = np.argsort(rng.random((sample_count, n)), axis=1)
    g_perm = eval_gamma(spec, np.take_along_axis(lam, perm, axis=1))
    sym_err = float(np.max(np.abs(g_perm - g) / np.maximum(np.abs(g), tiny)))

    hom_err = 0.0
    for c in (0.5, 2.0, 10.0):
        gc = eval_gamma(spec, c * lam)
        hom_err = max(hom_err, float(np.max(np.abs(gc - c * g) / np.maximum(np.abs(c * g), tiny))))

    grad = grad_gamma(spec, lam)
    min_grad = float(np.min(grad))

    try:
        norm_err = abs(normalization_value(spec) - 1.0)
    except DomainError:
        norm_err = float("inf")

    hess = hess_gamma(spec, lam)
    scale = _norm(lam)
    xi = rng.normal(size=(sample_count, n))
    q = np.einsum("si,sij,sj->s", xi, hess, xi) * scale / np.sum(xi**2, axis=1)
    q_min, q_max = float(np.min(q)), float(np.max(q))

    if n >= 2:
        unit = lam / scale[:, None]
        eta = xi - np.sum(xi * unit, axis=1)[:, None] * unit
        eta /= np.linalg.norm(eta, axis=1)[:, None]
        qo = np.einsum("si,sij,sj->s", eta, hess, eta) * scale
        strict = bool(np.all(qo > 1e-8) or np.all(qo < -1e-8))
        off_margin = float(np.min(np.abs(qo)))
    else:
        strict = False
        off_margin = 0.0

    margins = {
        "symmetric": sym_err,
        "homogeneous": hom_err,
        "monotone": min_grad,
        "normalized": norm_err,
        "convex": q_min,
        "concave": q_max,
        "off_radial_strict": off_margin,
        "min_gamma": float(np.min(g)),
    }
    return Classification(
        symmetric=sym_err < rtol,
        homogeneous=hom_err < rtol,
        monotone=min_grad > 0.0 and bool(np.all(g > 0)),
        normalized=norm_err < 1e-9,
        convex=q_min >= -sign_tol,
        concave=q_max <= sign_tol,
        off_radial_strict=strict,
        margins=margins,
        sample_count=sample_count,
        seed=seed,
    )


def catalog(n: int) -> list[CurvatureSpec]:
    """Representative members of every kind in dimension ``n``."""
    specs = [CurvatureSpec.mean(n), CurvatureSpec.gauss_root(n),
             CurvatureSpec.power_mean(2.0, n), CurvatureSpec.power_mean(3.0, n)]
    specs += [CurvatureSpec.sigma_k_root(k, n) for k in range(2, n + 1)]
    specs += [CurvatureSpec.convex_combo(0.5, CurvatureSpec.gauss_root(n)),
              CurvatureSpec.convex_combo(0.3, CurvatureSpec.power_mean(2.0, n))]
    if n >= 2:
        specs.append(CurvatureSpec.convex_combo(0.25, CurvatureSpec.sigma_k_root(2, n)))
    return specs


def is_normalized(spec: CurvatureSpec, tol: float = 1e-9) -> bool:
    try:
        return abs(normalization_value(spec) - 1.0) < tol
    except DomainError:
        return False
