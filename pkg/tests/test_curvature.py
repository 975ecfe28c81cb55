import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gammaflow import curvature as cc
from gammaflow.errors import DomainError

Spec = cc.CurvatureSpec


def brute_esym(lam, k):
    return sum(math.prod(c) for c in itertools.combinations(lam, k))


def gamma_of_matrix(spec, a):
    return cc.eval_gamma(spec, np.linalg.eigvalsh(a))


def second_difference(f, h=1e-3):
    """Richardson-extrapolated central second difference of ``f`` at 0."""
    def d2(step):
        return (f(step) - 2 * f(0.0) + f(-step)) / step**2
    return (4 * d2(h) - d2(2 * h)) / 3


def random_sym(rng, n, gap=1e-2):
    """A symmetric matrix with eigenvalues in the positive cone separated by ``gap``."""
    while True:
        lam = rng.uniform(0.5, 3.0, n)
        if np.min(np.diff(np.sort(lam))) > gap:
            break
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return q @ np.diag(lam) @ q.T


# -- evaluation ---------------------------------------------------------------

def test_eval_examples():
    assert cc.eval_gamma(Spec.mean(3), [1, 2, 3]) == pytest.approx(6.0, abs=1e-15)
    assert cc.eval_gamma(Spec.sigma_k_root(2, 2), [1, 1]) == pytest.approx(1.0, abs=1e-15)
    assert cc.eval_gamma(Spec.gauss_root(2), [4, 1]) == pytest.approx(2.0, abs=1e-15)


def test_convex_combo_value():
    # 0.5 * (4 + 1) + 0.5 * sqrt(4 * 1)
    spec = Spec.convex_combo(0.5, Spec.gauss_root(2))
    assert cc.eval_gamma(spec, [4, 1]) == pytest.approx(0.5 * 5 + 0.5 * 2, abs=1e-14)


def test_eval_outside_closure_raises():
    with pytest.raises(DomainError):
        cc.eval_gamma(Spec.sigma_k_root(2, 2), [1.0, -2.0])
    with pytest.raises(DomainError):
        cc.eval_gamma(Spec.gauss_root(2), [-1.0, 1.0])
    with pytest.raises(DomainError):
        cc.eval_gamma(Spec.mean(2), [1.0, 2.0, 3.0])


def test_boundary_extension_is_zero():
    assert cc.eval_gamma(Spec.gauss_root(3), [0.0, 1.0, 2.0]) == 0.0
    assert cc.eval_gamma(Spec.sigma_k_root(2, 2), [0.0, 5.0]) == 0.0
    assert cc.eval_gamma(Spec.mean(2), [-1.0, 1.0]) == 0.0
    for spec in cc.catalog(3):
        assert cc.eval_gamma(spec, np.zeros(3)) == 0.0


def test_esym_against_brute_force():
    rng = np.random.default_rng(1)
    lam = rng.normal(size=5)
    e = cc.esym(lam, 5)
    for k in range(6):
        assert e[k] == pytest.approx(brute_esym(lam, k), rel=1e-12, abs=1e-12)


def test_spec_validation():
    with pytest.raises(DomainError):
        Spec.sigma_k_root(3, 2)
    with pytest.raises(DomainError):
        Spec.power_mean(0.5, 2)
    with pytest.raises(DomainError):
        Spec.convex_combo(0.0, Spec.mean(2))
    with pytest.raises(DomainError):
        Spec(cc.Kind.CONVEX_COMBO, 2, t=0.5, inner=Spec.mean(3))


def test_spec_json_round_trip():
    for spec in cc.catalog(3):
        assert Spec.from_dict(spec.to_dict()) == spec
    nested = Spec.from_dict({"kind": "ConvexCombo", "t": 0.5, "inner": {"kind": "GaussRoot"}}, n=2)
    assert nested.inner == Spec.gauss_root(2)
    for bad in ({"kind": "Nope", "n": 2}, {"n": 2}, {"kind": "Mean"}, {"kind": "Mean", "n": 2, "q": 1},
                {"kind": "SigmaKRoot", "n": 2, "k": 1.5}, [1, 2]):
        with pytest.raises(DomainError):
            Spec.from_dict(bad)


def test_cones_of_kinds():
    assert Spec.mean(3).cone == cc.ConeSpec.mean_positive()
    assert Spec.sigma_k_root(2, 3).cone == cc.ConeSpec.garding(2)
    assert Spec.gauss_root(3).cone == cc.ConeSpec.positive()
    assert Spec.power_mean(2, 3).cone == cc.ConeSpec.positive()
    assert Spec.convex_combo(0.5, Spec.sigma_k_root(2, 3)).cone == cc.ConeSpec.garding(2)


# -- gradients ------------------------------------------------------------------

def test_grad_examples():
    np.testing.assert_allclose(cc.grad_gamma(Spec.mean(4), [0.3, 1, 2, -1]), np.ones(4))
    np.testing.assert_allclose(cc.grad_gamma(Spec.sigma_k_root(2, 2), [1, 1]), [0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(cc.grad_gamma(Spec.gauss_root(2), [4, 1]), [0.25, 1.0], atol=1e-15)


def test_grad_refused_on_boundary():
    with pytest.raises(DomainError):
        cc.grad_gamma(Spec.gauss_root(2), [0.0, 1.0])


def test_grad_matches_central_differences():
    rng = np.random.default_rng(2)
    for spec in cc.catalog(3):
        lam = cc.sample_cone(spec.cone, 3, 20, rng, min_margin=0.05)
        for x in lam:
            fd = np.empty(3)
            eps = 1e-6 * max(1.0, np.linalg.norm(x))
            for i in range(3):
                e = np.zeros(3)
                e[i] = eps
                fd[i] = (cc.eval_gamma(spec, x + e) - cc.eval_gamma(spec, x - e)) / (2 * eps)
            np.testing.assert_allclose(cc.grad_gamma(spec, x), fd, rtol=1e-6, atol=1e-8)


def test_euler_examples():
    assert cc.euler_residual(Spec.mean(3), [1, 2, 3]) == 0.0
    assert cc.euler_residual(Spec.gauss_root(2), [4, 1]) < 1e-12


# -- Hessians -------------------------------------------------------------------

def test_hess_quadform_mean_and_radial():
    rng = np.random.default_rng(3)
    assert cc.hess_quadform_eig(Spec.mean(3), [1, 2, 3], rng.normal(size=3)) == 0.0
    for spec in cc.catalog(3):
        lam = cc.sample_cone(spec.cone, 3, 1, rng, min_margin=0.05)[0]
        q = cc.hess_quadform_eig(spec, lam, lam)
        assert abs(q) < 1e-10 * max(1.0, np.linalg.norm(lam))


def test_hess_quadform_sigma2_matches_fd():
    spec = Spec.sigma_k_root(2, 2)
    lam = np.array([1.0, 2.0])
    xi = np.array([1.0, -1.0])
    q = cc.hess_quadform_eig(spec, lam, xi)
    h = 1e-5
    fd = (cc.eval_gamma(spec, lam + h * xi) - 2 * cc.eval_gamma(spec, lam)
          + cc.eval_gamma(spec, lam - h * xi)) / h**2
    assert q < 0
    assert q == pytest.approx(fd, rel=1e-5)


def test_hess_matches_gradient_differences():
    rng = np.random.default_rng(4)
    for spec in cc.catalog(3):
        for x in cc.sample_cone(spec.cone, 3, 10, rng, min_margin=0.05):
            eps = 1e-6 * max(1.0, np.linalg.norm(x))
            fd = np.empty((3, 3))
            for j in range(3):
                e = np.zeros(3)
                e[j] = eps
                fd[:, j] = (cc.grad_gamma(spec, x + e) - cc.grad_gamma(spec, x - e)) / (2 * eps)
            np.testing.assert_allclose(cc.hess_gamma(spec, x), fd, rtol=1e-5, atol=1e-6)


# -- matrix calculus --------------------------------------------------------------

def test_matrix_grad_examples():
    rng = np.random.default_rng(5)
    a = random_sym(rng, 3)
    np.testing.assert_allclose(cc.matrix_grad(Spec.mean(3), a), np.eye(3), atol=1e-12)
    np.testing.assert_allclose(cc.matrix_grad(Spec.gauss_root(2), np.diag([4.0, 1.0])),
                               np.diag([0.25, 1.0]), atol=1e-15)


def test_matrix_grad_equivariance():
    rng = np.random.default_rng(6)
    for spec in cc.catalog(3):
        d = np.diag(rng.uniform(0.5, 3.0, 3))
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        lhs = cc.matrix_grad(spec, q @ d @ q.T)
        rhs = q @ cc.matrix_grad(spec, d) @ q.T
        assert np.max(np.abs(lhs - rhs)) < 1e-10 * np.max(np.abs(rhs))


def test_matrix_hess_examples():
    rng = np.random.default_rng(7)
    a, t = random_sym(rng, 3), rng.normal(size=(3, 3))
    assert abs(cc.matrix_hess_quadform(Spec.mean(3), a, t + t.T)) < 1e-12
    off = np.array([[0.0, 1.0], [1.0, 0.0]])
    # 2 * (d2 - d1) / (l2 - l1) with grad (1/sqrt2, 1/(2 sqrt2)) at (1, 2)
    expected = 2 * (1 / (2 * math.sqrt(2)) - 1 / math.sqrt(2)) / (2 - 1)
    assert cc.matrix_hess_quadform(Spec.sigma_k_root(2, 2), np.diag([1.0, 2.0]), off) == \
        pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(-0.707107, abs=1e-6)


def test_matrix_hess_matches_fd_along_rays():
    rng = np.random.default_rng(8)
    for spec in cc.catalog(3):
        for _ in range(5):
            a = random_sym(rng, 3)
            t = rng.normal(size=(3, 3))
            t = 0.5 * (t + t.T)
            fd = second_difference(lambda s: gamma_of_matrix(spec, a + s * t))
            q = cc.matrix_hess_quadform(spec, a, t)
            assert abs(q - fd) <= 1e-5 * max(abs(fd), 1e-3)


def test_degenerate_gap_continuity():
    rng = np.random.default_rng(9)
    t = rng.normal(size=(3, 3))
    t = 0.5 * (t + t.T)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    for spec in [Spec.power_mean(3, 3), Spec.sigma_k_root(2, 3), Spec.gauss_root(3)]:
        vals = []
        for gap in (1e-3, 1e-9):
            a = q @ np.diag([1.0, 1.0 + gap, 2.0]) @ q.T
            vals.append(cc.matrix_hess_quadform(spec, a, t))
        assert abs(vals[0] - vals[1]) < 1e-3 * abs(vals[0])


def test_spectral_point_reconstruction():
    rng = np.random.default_rng(10)
    a = random_sym(rng, 4)
    sp = cc.SpectralPoint.from_matrix(a)
    rebuilt = sp.eigenframe @ np.diag(sp.eigenvalues) @ sp.eigenframe.T
    assert np.max(np.abs(rebuilt - a)) < 1e-12 * np.max(np.abs(a))
    with pytest.raises(DomainError):
        cc.SpectralPoint.from_matrix(np.array([[1.0, 2.0], [0.0, 1.0]]))


# -- cones ------------------------------------------------------------------------

def test_cone_examples():
    pos = cc.cone_contains(cc.ConeSpec.positive(), [1.0, 1.0])
    assert pos.inside and pos.margin == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert cc.cone_contains(cc.ConeSpec.two_convex(), [-0.1, 0.5, 0.5]).inside
    assert not cc.cone_contains(cc.ConeSpec.alpha_cone(0.5), [-0.5, 1.0]).inside


def test_cone_margins_on_boundaries():
    assert cc.cone_contains(cc.ConeSpec.positive(), [0.0, 1.0]).margin == 0.0
    assert cc.cone_contains(cc.ConeSpec.alpha_cone(1.0), [0.0, 1.0]).margin == pytest.approx(0.0, abs=1e-16)
    assert cc.cone_contains(cc.ConeSpec.garding(2), [0.0, 1.0]).margin == 0.0
    assert cc.cone_contains(cc.ConeSpec.mean_positive(), [0.0, 0.0]).margin == 0.0


def test_garding_cone_against_definition():
    rng = np.random.default_rng(11)
    lam = rng.normal(size=(500, 4))
    for k in (1, 2, 3, 4):
        inside = np.array([all(brute_esym(x, i) > 0 for i in range(1, k + 1)) for x in lam])
        margin = cc.cone_margin(cc.ConeSpec.garding(k), lam)
        np.testing.assert_array_equal(margin > 0, inside)


def test_alpha_constant():
    assert cc.alpha_constant(0.5) == -0.75


def test_sample_cone_stays_inside():
    rng = np.random.default_rng(12)
    for cone in (cc.ConeSpec.positive(), cc.ConeSpec.alpha_cone(0.7), cc.ConeSpec.two_convex(),
                 cc.ConeSpec.garding(2), cc.ConeSpec.mean_positive()):
        lam = cc.sample_cone(cone, 3, 200, rng)
        assert np.all(cc.cone_margin(cone, lam) >= 1e-3)


# -- classification -------------------------------------------------------------------

def test_classify_examples():
    mean = cc.classify(Spec.mean(3))
    for flag in ("symmetric", "homogeneous", "monotone", "normalized", "convex", "concave"):
        assert getattr(mean, flag), flag
    assert not mean.off_radial_strict
    assert not cc.classify(Spec.sigma_k_root(2, 2)).normalized
    pm = cc.classify(Spec.power_mean(2, 2))
    assert pm.convex and pm.normalized
    assert mean.caveat == "sampled, not proved"


def test_classify_is_seeded():
    a = cc.classify(Spec.sigma_k_root(2, 3), sample_count=50, seed=3).to_dict()
    b = cc.classify(Spec.sigma_k_root(2, 3), sample_count=50, seed=3).to_dict()
    assert a == b
    with pytest.raises(DomainError):
        cc.classify(Spec.mean(2), sample_count=0)


def test_convex_combo_normalization_is_linear():
    for inner in (Spec.gauss_root(2), Spec.sigma_k_root(2, 2), Spec.power_mean(2, 2)):
        for t in (0.25, 0.5, 0.75):
            combo = Spec.convex_combo(t, inner)
            assert cc.normalization_value(combo) == pytest.approx(
                t + (1 - t) * cc.normalization_value(inner), abs=1e-15)


# -- property suite (hypothesis) -------------------------------------------------------

SPECS = cc.catalog(3)
spec_idx = st.integers(0, len(SPECS) - 1)
seeds = st.integers(0, 2**32 - 1)


def _point(i, seed):
    spec = SPECS[i]
    lam = cc.sample_cone(spec.cone, 3, 1, np.random.default_rng(seed), min_margin=1e-2)[0]
    return spec, lam


@settings(max_examples=60, deadline=None)
@given(spec_idx, seeds, st.permutations([0, 1, 2]))
def test_property_symmetry(i, seed, perm):
    spec, lam = _point(i, seed)
    g = cc.eval_gamma(spec, lam)
    assert cc.eval_gamma(spec, lam[list(perm)]) == pytest.approx(g, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(spec_idx, seeds, st.sampled_from([0.5, 2.0, 10.0]))
def test_property_homogeneity(i, seed, c):
    spec, lam = _point(i, seed)
    assert cc.eval_gamma(spec, c * lam) == pytest.approx(c * cc.eval_gamma(spec, lam), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(spec_idx, seeds)
def test_property_euler_and_monotone(i, seed):
    spec, lam = _point(i, seed)
    g = cc.eval_gamma(spec, lam)
    assert cc.euler_residual(spec, lam) < 1e-10 * g
    assert np.all(cc.grad_gamma(spec, lam) > 0)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_property_hessian_signs(seed):
    rng = np.random.default_rng(seed)
    t = rng.normal(size=(3, 3))
    t = 0.5 * (t + t.T)
    for spec in SPECS:
        a = np.diag(cc.sample_cone(spec.cone, 3, 1, rng, min_margin=1e-2)[0])
        q = cc.matrix_hess_quadform(spec, a, t)
        if spec.kind is cc.Kind.POWER_MEAN:
            assert q >= -1e-10
        if spec.kind in (cc.Kind.SIGMA_K_ROOT, cc.Kind.GAUSS_ROOT):
            assert q <= 1e-10
        if spec.kind is cc.Kind.MEAN:
            assert abs(q) <= 1e-10
