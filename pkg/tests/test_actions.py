"""Action variants, their matrices, and the sampled certificates."""

import math

import numpy as np
import pytest
from scipy.linalg import expm as scipy_expm

from scaleflow import (
    Ball,
    DiagonalScaling,
    ExpSemigroup,
    LinearFamily,
    POSITIVE_MULTIPLICATIVE,
    RGroup,
    certify_absorption,
    certify_escape,
    certify_group_law,
    matrix_exponential,
    product,
)
from scaleflow.groups import INTEGER_ADDITIVE


def test_diagonal_apply():
    a = DiagonalScaling((1, 1))
    assert np.allclose(a.apply(0.5, np.array([1.0, 2.0])), [2.0, 4.0])
    x = np.array([0.3, -1.2])
    assert np.allclose(a.apply(1.0, x), x)  # identity parameter acts trivially
    assert np.allclose(a.apply_inverse(2.0, np.array([3.0, 3.0])), [6.0, 6.0])
    assert np.allclose(a.apply_inverse(0.5, a.apply(0.5, x)), x)


def test_diagonal_validation():
    with pytest.raises(ValueError):
        DiagonalScaling((0,))
    with pytest.raises(ValueError):
        DiagonalScaling((1,), group=RGroup("real-additive"))
    with pytest.raises(ValueError):
        DiagonalScaling((1, 2)).apply(0.5, np.zeros(3))


def test_matrix_exponential_against_scipy():
    rng = np.random.default_rng(7)
    for _ in range(12):
        n = rng.integers(1, 6)
        a = rng.normal(scale=2.0, size=(n, n))
        mine = matrix_exponential(a)
        ref = scipy_expm(a)
        assert np.linalg.norm(mine - ref) <= 1e-13 * max(1.0, np.linalg.norm(ref))


def test_exp_semigroup_closed_form():
    a = ExpSemigroup.from_matrix(1.0, np.zeros((1, 1)))
    out = a.apply(math.log(2.0), np.array([4.0]))
    assert out[0] == pytest.approx(2.0, rel=1e-14)  # exp(-k eps) x with k=1
    back = a.apply_inverse(math.log(2.0), np.array([2.0]))
    assert back[0] == pytest.approx(4.0, rel=1e-14)


def test_exp_semigroup_requires_dominant_decay():
    p = np.array([[0.0, 2.0], [-2.0, 0.0]])
    with pytest.raises(ValueError):
        ExpSemigroup.from_matrix(1.0, p)  # k must exceed the operator norm 2
    ExpSemigroup.from_matrix(2.5, p)


def test_centers():
    assert np.allclose(DiagonalScaling((1, 1, 1)).center(), np.zeros(3))
    a = ExpSemigroup.from_matrix(2.0, np.array([[0.5]]))
    assert np.allclose(a.center(), np.zeros(1))
    both = product([DiagonalScaling((1,)), DiagonalScaling((2,))])
    assert np.allclose(both.center(), np.zeros(2))
    for eps in (0.25, 1.0, 3.0):
        assert np.linalg.norm(both.apply(eps, both.center()) - both.center()) <= 1e-12


def test_product_action():
    both = product([DiagonalScaling((1,)), DiagonalScaling((2,))])
    out = both.apply(0.5, np.array([1.0, 1.0]))
    assert np.allclose(out, [2.0, 4.0])  # componentwise scaling formula
    single = product([DiagonalScaling((3,))])
    x = np.array([1.7])
    assert np.allclose(single.apply(0.3, x), DiagonalScaling((3,)).apply(0.3, x))
    with pytest.raises(ValueError):
        product([DiagonalScaling((1,)), ExpSemigroup.from_matrix(1.0, np.zeros((1, 1)))])


def test_group_law_certificates():
    assert certify_group_law(DiagonalScaling((1, 2))).passed
    rng = np.random.default_rng(3)
    p = rng.normal(size=(3, 3))
    semigroup = ExpSemigroup.from_matrix(np.linalg.norm(p, 2) + 1.0, p)
    report = certify_group_law(semigroup)
    assert report.passed and report.worst_violation <= 1e-9
    assert certify_group_law(product([DiagonalScaling((1,)), DiagonalScaling((2,))])).passed


def test_group_law_negative_control():
    # B(eps eps') != B(eps) B(eps'): an affine-in-eps family is not an action
    group = RGroup(POSITIVE_MULTIPLICATIVE)
    bad = LinearFamily(group=group, dimension=1, matrix_fn=lambda e: np.array([[1.0 + e]]))
    assert not certify_group_law(bad).passed


def test_linear_family_singular_inverse():
    group = RGroup(POSITIVE_MULTIPLICATIVE)
    singular = LinearFamily(group=group, dimension=2,
                            matrix_fn=lambda e: np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(ValueError):
        singular.apply_inverse(1.0, np.ones(2))


def test_integer_group_linear_family():
    group = RGroup(INTEGER_ADDITIVE, 0.5)
    act = LinearFamily(group=group, dimension=1,
                       matrix_fn=lambda n: np.array([[2.0**-n]]))
    assert certify_group_law(act).passed
    assert np.allclose(act.apply(-2, np.array([1.0])), [4.0])


def test_absorption_threshold_matches_closed_form():
    # image of ball(0, 10) under the inverse parameter has radius 10*eps,
    # so inclusion in ball(0, 1) starts at eps <= 0.1
    action = DiagonalScaling((1,))
    ladder = [2.0**-n for n in range(1, 21)]
    cert = certify_absorption(action, Ball((0.0,), 10.0), Ball((0.0,), 1.0), ladder)
    assert cert.passed
    assert cert.threshold == pytest.approx(2.0**-4)
    assert 0.05 <= cert.threshold <= 0.1
    # the one-step-coarser ladder entry must fail the closed-form bound
    assert cert.threshold * 2.0 > 0.1
    # exact operator bounds agree with the sampled evidence for pure scaling
    for (eps, sampled), (_, bound) in zip(cert.sample_evidence, cert.exact_bounds):
        assert sampled <= bound * (1 + 1e-12)
        assert sampled == pytest.approx(10.0 * eps, rel=1e-12)


def test_absorption_rejects_off_center_target():
    action = DiagonalScaling((1,))
    with pytest.raises(ValueError):
        certify_absorption(action, Ball((0.0,), 10.0), Ball((1.0,), 1.0), [0.5, 0.25])


def test_absorption_of_center_point():
    action = DiagonalScaling((1, 1))
    cert = certify_absorption(action, Ball((0.0, 0.0), 0.0), Ball((0.0, 0.0), 1.0),
                              [0.5, 0.25, 0.125])
    assert cert.passed and cert.threshold == 0.5  # center maps to itself


def test_absorption_exp_semigroup_closed_form():
    # pure decay: |H_(-eps)(x)| = exp(k eps)|x|, so inclusion needs
    # eps <= -ln(10)/k
    k = 1.0
    action = ExpSemigroup.from_matrix(k, np.zeros((2, 2)))
    ladder = [-float(n) for n in range(1, 21)]
    cert = certify_absorption(action, Ball((0.0, 0.0), 10.0), Ball((0.0, 0.0), 1.0), ladder)
    exact = -math.log(10.0) / k
    assert cert.passed
    assert cert.threshold <= exact < cert.threshold + 1.0


def test_absorption_product_uses_worst_factor():
    ladder = [2.0**-n for n in range(1, 21)]
    slow = DiagonalScaling((1,))
    fast = DiagonalScaling((2,))
    pair = product([slow, fast])
    k, v = 10.0, 1.0
    cert_slow = certify_absorption(slow, Ball((0.0,), k), Ball((0.0,), v), ladder)
    cert_fast = certify_absorption(fast, Ball((0.0,), k), Ball((0.0,), v), ladder)
    cert_pair = certify_absorption(pair, Ball((0.0, 0.0), k), Ball((0.0, 0.0), v), ladder)
    assert cert_pair.passed
    assert cert_pair.threshold <= min(cert_slow.threshold, cert_fast.threshold)


def test_balanced_ball_image_nesting():
    # for eps <= eps' the eps'-image of a centred ball nests inside the
    # eps-image: radii are monotone in the parameter
    action = DiagonalScaling((1, 2))
    eps_values = [0.25, 0.5, 1.0, 2.0]
    radii = [action.operator_norm(e) for e in eps_values]
    assert all(x >= y for x, y in zip(radii, radii[1:]))


def test_escape():
    action = DiagonalScaling((1,))
    report = certify_escape(action, [1.0], [2.0**-n for n in range(1, 21)], 1000.0)
    assert report.passed
    norm_at_tiny = dict(report.norms)[2.0**-20]
    assert norm_at_tiny == pytest.approx(2.0**20, rel=1e-12)
    assert abs(action.apply(1e-6, np.array([1.0]))[0]) == pytest.approx(1e6, rel=1e-12)
    with pytest.raises(ValueError):
        certify_escape(action, [0.0], [0.5], 10.0)


def test_escape_product_any_nonzero_coordinate():
    pair = product([DiagonalScaling((1,)), DiagonalScaling((2,))])
    ladder = [2.0**-n for n in range(1, 16)]
    assert certify_escape(pair, [0.0, 1.0], ladder, 100.0).passed
    assert certify_escape(pair, [1.0, 0.0], ladder, 100.0).passed
    with pytest.raises(ValueError):
        certify_escape(pair, [0.0, 0.0], ladder, 100.0)


def test_volume_factor_matches_determinant():
    rng = np.random.default_rng(11)
    p = rng.normal(size=(2, 2))
    action = ExpSemigroup.from_matrix(np.linalg.norm(p, 2) + 0.5, p)
    for eps in (-1.0, 0.3, 2.0):
        det = abs(np.linalg.det(action.matrix(eps)))
        assert action.volume_factor(eps) == pytest.approx(det, rel=1e-12)
