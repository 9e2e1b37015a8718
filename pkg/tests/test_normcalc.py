import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normpow.constants import constant_A_tilde
from normpow.errors import (
    ArgumentCountMismatch,
    DomainError,
    NonUnitDirection,
    NotPositiveDefinite,
    NotSymmetric,
    StencilHitsOrigin,
    UndefinedAtOrigin,
)
from normpow.normcalc import (
    DirectionalDerivative,
    Metric,
    deriv_diag,
    deriv_mixed,
    fd_oracle,
    make_metric,
    tau,
    tensor_diff_norm_lb,
    tensor_diff_norms_lb,
)

I2, I3 = Metric.identity(2), Metric.identity(3)
SKEW = make_metric([[2.0, 0.3, 0.0], [0.3, 1.0, 0.1], [0.0, 0.1, 0.5]])


def unit(metric, v):
    v = np.asarray(v, float)
    return v / metric.norm(v)


def random_pair(rng, metric, lo=0.5, hi=2.0):
    x = unit(metric, rng.standard_normal(metric.dim)) * rng.uniform(lo, hi)
    h = unit(metric, rng.standard_normal(metric.dim))
    return x, h


# -- metric -------------------------------------------------------------------


def test_metric_examples():
    assert I2.norm([3, 4]) == 5
    assert make_metric([[4, 0], [0, 1]]).norm([1, 0]) == 2
    with pytest.raises(NotPositiveDefinite) as err:
        make_metric([[1, 2], [2, 1]])
    assert err.value.eigenvalue == pytest.approx(-1)


def test_metric_rejects_bad_input():
    with pytest.raises(NotSymmetric):
        make_metric([[1, 0.5], [0.4, 1]])
    with pytest.raises(DomainError):
        make_metric([[1, 0, 0], [0, 1, 0]])


def test_whiten_round_trip():
    x = np.array([0.3, -1.2, 2.0])
    assert np.allclose(SKEW.unwhiten(SKEW.whiten(x)), x)
    assert SKEW.norm(x) == pytest.approx(math.sqrt(x @ SKEW.b_matrix @ x), rel=1e-14)


# -- tau ----------------------------------------------------------------------


def test_tau_examples():
    assert tau(I2, [3, 4], [1, 0]) == pytest.approx(0.6)
    h = unit(SKEW, [1, 2, 3])
    assert tau(SKEW, h, h) == pytest.approx(1.0, abs=1e-15)
    assert tau(I2, [0, 0], [0, 1]) == 0.0
    with pytest.raises(NonUnitDirection):
        tau(I2, [1, 1], [1, 1])


# -- closed form --------------------------------------------------------------


def test_deriv_examples():
    assert deriv_diag(I2, 1, 2, [3, 4], [1, 0]) == pytest.approx(6)
    x, h = random_pair(np.random.default_rng(1), I3)
    assert deriv_diag(I3, 2, 2, x, h) == pytest.approx(2)
    assert deriv_diag(I3, 3, 3, h, h) == pytest.approx(6)
    assert deriv_diag(I3, 2, 2.5, np.zeros(3), h) == 0.0
    with pytest.raises(UndefinedAtOrigin):
        deriv_diag(I3, 3, 3, np.zeros(3), h)


def test_hessian_of_square_is_2b():
    rng = np.random.default_rng(2)
    x, h = rng.standard_normal(3), rng.standard_normal(3)
    assert deriv_diag(SKEW, 2, 2, x, h) == pytest.approx(2 * h @ SKEW.b_matrix @ h, rel=1e-12)


def test_directional_derivative_object():
    d = DirectionalDerivative(SKEW, 2, 2.5, np.array([1.0, 0.0, 0.5]))
    h = unit(SKEW, [0, 1, 1])
    assert d(h) == deriv_diag(SKEW, 2, 2.5, [1.0, 0.0, 0.5], h)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 6), st.floats(0, 1), st.floats(0.05, 20), st.integers(0, 2 ** 31))
def test_homogeneity_in_x(p, nu, lam, seed):
    q = p + nu + 0.1
    x, h = random_pair(np.random.default_rng(seed), SKEW)
    a = deriv_diag(SKEW, p, q, lam * x, h)
    b = lam ** (q - p) * deriv_diag(SKEW, p, q, x, h)
    assert a == pytest.approx(b, rel=1e-10, abs=1e-300)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.floats(-4, 4).filter(lambda s: abs(s) > 1e-3), st.integers(0, 2 ** 31))
def test_homogeneity_in_h(p, s, seed):
    x, h = random_pair(np.random.default_rng(seed), SKEW)
    a = deriv_diag(SKEW, p, p + 0.5, x, s * h)
    assert a == pytest.approx(s ** p * deriv_diag(SKEW, p, p + 0.5, x, h), rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2 ** 31))
def test_rotation_invariance(p, seed):
    rng = np.random.default_rng(seed)
    rot, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    x, h = random_pair(rng, I3)
    a = deriv_diag(I3, p, p + 0.7, x, h)
    assert deriv_diag(I3, p, p + 0.7, rot @ x, rot @ h) == pytest.approx(a, rel=1e-10, abs=1e-12)


# -- polarization -------------------------------------------------------------


def test_mixed_hessian():
    rng = np.random.default_rng(3)
    x, h1, h2 = rng.standard_normal((3, 3))
    expect = 2 * h1 @ SKEW.b_matrix @ h2
    assert deriv_mixed(SKEW, 2, 2, x, h1, h2) == pytest.approx(expect, rel=1e-10)
    assert deriv_mixed(SKEW, 2, 2, x, h2, h1) == pytest.approx(expect, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2 ** 31))
def test_mixed_is_symmetric_and_consistent(p, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(3)
    hs = list(rng.standard_normal((p, 3)))
    base = deriv_mixed(SKEW, p, p + 0.5, x, *hs)
    perm = rng.permutation(p)
    other = deriv_mixed(SKEW, p, p + 0.5, x, *[hs[i] for i in perm])
    scale = max(1.0, abs(base))
    assert abs(other - base) <= 1e-10 * scale
    h = hs[0]
    same = deriv_mixed(SKEW, p, p + 0.5, x, *([h] * p))
    assert same == pytest.approx(deriv_diag(SKEW, p, p + 0.5, x, h), rel=1e-10, abs=1e-10)


def test_mixed_errors():
    with pytest.raises(ArgumentCountMismatch):
        deriv_mixed(I2, 2, 2.5, [1, 0], [1, 0])
    with pytest.raises(UndefinedAtOrigin):
        deriv_mixed(I2, 1, 2.5, [0, 0], [1, 0])


# -- finite differences -------------------------------------------------------


def test_fd_examples():
    assert fd_oracle(I2, 1, 2, [3, 4], [1, 0], step=1e-5) == pytest.approx(6, abs=1e-8)
    rng = np.random.default_rng(4)
    for _ in range(20):
        x, h = random_pair(rng, SKEW, 1.0, 1.0)
        ref = deriv_diag(SKEW, 2, 2.5, x, h)
        assert abs(fd_oracle(SKEW, 2, 2.5, x, h) - ref) <= 1e-6 * abs(ref)
        ref = deriv_diag(SKEW, 3, 3.5, x, h)
        assert abs(fd_oracle(SKEW, 3, 3.5, x, h, step=1e-3) - ref) <= 1e-3 * abs(ref)


@pytest.mark.parametrize("p,tol", [(1, 1e-4), (2, 1e-4), (3, 1e-3)])
@pytest.mark.parametrize("nu", [0.25, 0.5, 0.75, 1.0])
def test_fd_agreement(p, nu, tol):
    rng = np.random.default_rng(100 * p + int(100 * nu))
    for _ in range(100):
        x, h = random_pair(rng, SKEW)
        ref = deriv_diag(SKEW, p, p + nu, x, h)
        fd = fd_oracle(SKEW, p, p + nu, x, h)
        assert abs(ref - fd) <= tol * (1 + abs(ref))


def test_fd_errors():
    with pytest.raises(StencilHitsOrigin):
        fd_oracle(I2, 2, 2.5, [1e-6, 0], [1, 0], step=1e-5)
    with pytest.raises(NonUnitDirection):
        fd_oracle(I2, 2, 2.5, [1, 0], [2, 0])
    with pytest.raises(DomainError):
        fd_oracle(I2, 5, 5.5, [1, 0], [1, 0])


# -- tensor norm lower bound --------------------------------------------------


def test_tensor_norm_examples():
    x2 = np.array([0.3, -0.4, 1.1])
    assert tensor_diff_norm_lb(SKEW, 1, 1.0, np.zeros(3), x2) == pytest.approx(
        2 * SKEW.norm(x2), rel=1e-8)
    assert tensor_diff_norm_lb(SKEW, 3, 0.5, x2, x2) == 0.0
    h0 = unit(SKEW, [1, 2, -1])
    assert tensor_diff_norm_lb(SKEW, 3, 0.5, -h0, h0) == pytest.approx(26.25, rel=1e-9)


def test_tensor_norm_is_deterministic():
    rng = np.random.default_rng(5)
    x1, x2 = rng.standard_normal((2, 4, 3))
    a, _ = tensor_diff_norms_lb(SKEW, 2, 0.5, x1, x2)
    b, _ = tensor_diff_norms_lb(SKEW, 2, 0.5, x1, x2)
    assert np.array_equal(a, b)


def test_tensor_norm_is_attained_by_returned_direction():
    rng = np.random.default_rng(6)
    x1, x2 = rng.standard_normal((2, 10, 3))
    vals, dirs = tensor_diff_norms_lb(SKEW, 3, 0.5, x1, x2)
    for a, b, h, v in zip(x1, x2, dirs, vals):
        assert SKEW.norm(h) == pytest.approx(1, abs=1e-12)
        direct = abs(deriv_diag(SKEW, 3, 3.5, b, h) - deriv_diag(SKEW, 3, 3.5, a, h))
        assert direct == pytest.approx(v, rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.sampled_from([0.25, 0.5, 0.75, 1.0]), st.integers(0, 2 ** 31))
def test_tensor_norm_below_whole_space_constant(p, nu, seed):
    rng = np.random.default_rng(seed)
    x1, x2 = rng.standard_normal((2, 3)) * rng.uniform(0.1, 5, 2)[:, None]
    v = tensor_diff_norm_lb(SKEW, p, nu, x1, x2, starts=16)
    assert v <= constant_A_tilde(p, nu) * SKEW.norm(x2 - x1) ** nu * (1 + 1e-9)


def test_tensor_norm_domain():
    with pytest.raises(DomainError):
        tensor_diff_norm_lb(I2, 2, 1.5, [1, 0], [0, 1])
    with pytest.raises(UndefinedAtOrigin):
        tensor_diff_norm_lb(I2, 2, 0.0, [0, 0], [0, 1])
