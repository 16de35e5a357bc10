import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prwalk import core, homogeneous, randmat
from prwalk.core import W, Direction
from prwalk.errors import IndeterminateRatioError, NonPrimitiveError
from prwalk.homogeneous import Classification

from conftest import doubly_stochastic_matrices, positive_stochastic

BALLISTIC = core.rank_one((0.7, 0.1, 0.1, 0.1))
ZERO_DRIFT = core.rank_one((0.4, 0.1, 0.4, 0.1))


def exact_lambdas(rows):
    """The four ratios in exact rational arithmetic."""
    a = [[Fraction(v) for v in r] for r in rows]
    E, N, Wd, S = 0, 1, 2, 3
    return (
        (1 - a[E][E] - a[Wd][E]) / (a[N][E] + a[S][E]),
        (1 - a[E][Wd] - a[Wd][Wd]) / (a[N][Wd] + a[S][Wd]),
        (a[E][N] + a[Wd][N]) / (1 - a[N][N] - a[S][N]),
        (a[E][S] + a[Wd][S]) / (1 - a[N][S] - a[S][S]),
    )


def test_lambdas_of_w():
    assert homogeneous.lambda_expressions(W) == (1.0, 1.0, 1.0, 1.0)


def test_lambdas_rank_one_zero_drift():
    rows = [["0.4", "0.1", "0.4", "0.1"]] * 4
    assert exact_lambdas(rows) == (Fraction(1, 4),) * 4
    got = homogeneous.lambda_expressions(ZERO_DRIFT)
    assert np.allclose(got, 0.25, rtol=1e-12)


def test_lambda_infinite_and_indeterminate():
    # column E: no vertical inflow, so lambda_1 = positive / 0
    q = np.array([[0.5, 0.5, 0, 0], [0, 0.5, 0.5, 0], [0, 0, 0.5, 0.5], [0, 0.5, 0, 0.5]])
    lam = homogeneous.lambda_expressions(q)
    assert math.isinf(lam[0])
    straight = homogeneous.lambda_expressions(np.eye(4))
    assert all(math.isnan(v) for v in straight)
    assert homogeneous.lambda_criterion(straight) is None


@given(doubly_stochastic_matrices())
def test_isotropic_lambdas_equal_when_defined(q):
    lam = homogeneous.lambda_expressions(q)
    if not any(math.isnan(v) for v in lam):
        assert homogeneous.lambda_criterion(lam)


def test_ratios_equal_rules():
    assert homogeneous.ratios_equal(1.0, 1.0 + 1e-12)
    assert not homogeneous.ratios_equal(1.0, 1.0 + 1e-6)
    assert homogeneous.ratios_equal(math.inf, math.inf)
    assert not homogeneous.ratios_equal(math.inf, 1e300)
    assert not homogeneous.ratios_equal(math.nan, math.nan)


def test_velocity_examples():
    assert np.array_equal(homogeneous.asymptotic_velocity(W), [0.0, 0.0])
    assert np.allclose(homogeneous.asymptotic_velocity(BALLISTIC), [0.6, 0.0], atol=1e-12)
    assert np.array_equal(homogeneous.asymptotic_velocity(ZERO_DRIFT), [0.0, 0.0])
    with pytest.raises(NonPrimitiveError):
        homogeneous.asymptotic_velocity(np.eye(4))


def test_classify_examples():
    assert homogeneous.classify_homogeneous(W).classification is Classification.RECURRENT_CLT
    v = homogeneous.classify_homogeneous(BALLISTIC)
    assert v.classification is Classification.BALLISTIC
    assert np.allclose(v.velocity, [0.6, 0.0])
    assert v.lambda_criterion is False
    v = homogeneous.classify_homogeneous(np.eye(4))
    assert v.classification is Classification.INCONCLUSIVE and v.pi is None


def test_elliptic_isotropic_is_recurrent():
    rng = np.random.default_rng(5)
    for _ in range(100):
        q = 0.5 * randmat.random_balanced(rng, p1=0.25) + 0.125
        assert core.is_elliptic(q, 0.1) and core.is_isotropic(q)
        assert homogeneous.classify_homogeneous(q).classification is Classification.RECURRENT_CLT


@pytest.mark.parametrize(
    "lam,expected",
    [(1.0, (0.25, 0.25)), (0.25, (0.4, 0.1)), (math.inf, (0.0, 0.5)), (0.0, (0.5, 0.0))],
)
def test_p_from_lambda(lam, expected):
    p = homogeneous.p_from_lambda(lam)
    assert np.allclose(p, expected, atol=1e-15)


def test_p_from_lambda_errors():
    with pytest.raises(IndeterminateRatioError):
        homogeneous.p_from_lambda(math.nan)
    with pytest.raises(ValueError):
        homogeneous.p_from_lambda(-1.0)


@given(positive_stochastic())
def test_classification_matches_pi_form(q):
    v = homogeneous.classify_homogeneous(q)
    form = homogeneous.has_balanced_form(v.pi)
    assert (v.classification is Classification.RECURRENT_CLT) == form
    assert (v.classification is Classification.BALLISTIC) == (np.linalg.norm(v.velocity) > 1e-9)
    if v.lambda_criterion is not None:
        assert v.lambda_criterion == form


@given(st.integers(0, 2**32 - 1))
def test_balanced_matrices_satisfy_lambda_criterion(seed):
    q = randmat.random_balanced(np.random.default_rng(seed))
    v = homogeneous.classify_homogeneous(q)
    assert v.lambda_criterion is True
    assert v.classification is Classification.RECURRENT_CLT
    p1, p2 = homogeneous.p_from_lambda(v.lambdas[0])
    pi = np.array([p1, p2, p1, p2])
    assert np.max(np.abs(pi @ q - pi)) < 1e-9
    assert np.allclose(pi, v.pi, atol=1e-9)


def test_verdict_as_dict_marks_indeterminate():
    d = homogeneous.classify_homogeneous(np.eye(4)).as_dict()
    assert d["lambdas"] == ["indeterminate"] * 4
    assert d["classification"] == "Inconclusive"


def test_direction_order_in_velocity():
    # velocity is (piE - piW, piN - piS)
    q = core.rank_one((0.1, 0.6, 0.2, 0.1))
    v = homogeneous.asymptotic_velocity(q)
    assert np.allclose(v, [-0.1, 0.5])
    assert Direction.N.vector == (0, 1)
