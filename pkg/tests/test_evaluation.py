from fractions import Fraction

import pytest
from hypothesis import given

from howard_lb.dmdp import Dmdp, PolicyError
from howard_lb.evaluation import (
    Evaluation,
    LassoRun,
    decompose,
    evaluate,
    evaluate_by_lasso,
    format_rational,
    invariant_violations,
    parse_rational,
    values_equal,
)
from howard_lb.lowerbound import PnLayout, gen_pn, policy_pi, policy_sigma

from conftest import dmdp_and_policy

P3 = PnLayout(3)


def test_decompose_rotates_to_least_index_head():
    # a(0), b(1), c(2): c->b, b->a, a->b
    d = Dmdp.from_edges("abc", [(0, 1, 0), (1, 0, 0), (2, 1, 0)])
    lasso = decompose(d, (1, 0, 1), 2)
    assert lasso == LassoRun(path=(2, 1), cycle=(0, 1))
    assert lasso.head == 0


def test_decompose_pn3_pi2():
    d = gen_pn(3)
    pi2 = policy_pi(3, 2)
    assert decompose(d, pi2, P3.t(3)) == LassoRun((P3.t(3),), (P3.t(2),))
    assert decompose(d, pi2, P3.t(2)) == LassoRun((), (P3.t(2),))


@given(dmdp_and_policy())
def test_decompose_matches_simulation(case):
    d, policy = case
    for v in range(d.n):
        lasso = decompose(d, policy, v)
        run = [v]
        for _ in range(d.n + len(lasso.cycle)):
            run.append(policy[run[-1]])
        k = len(lasso.path)
        expected = lasso.path + lasso.cycle * (d.n + 2)
        assert tuple(run) == expected[: len(run)]
        assert lasso.head == min(lasso.cycle)
        assert lasso.head not in run[:k]
        assert len(set(lasso.path)) == len(lasso.path)


def test_evaluate_pn3_pi2_values():
    e = evaluate(gen_pn(3), policy_pi(3, 2))
    assert e.val[P3.t(1)] == 13
    assert e.val[P3.b(2)] == 14
    assert e.val[P3.t(3)] == 14
    assert e.pot[P3.b(2)] == -14
    assert e.pot[P3.t(2)] == 0


def test_evaluate_pn3_pi3_lane_entry_potential():
    e = evaluate(gen_pn(3), policy_pi(3, 3))
    assert e.pot[P3.t(1)] == 16 - 2 * 15 == -14


def test_evaluate_fractional_cycle():
    d = Dmdp.from_edges("abc", [(0, 1, 1), (1, 2, 0), (2, 0, 0)])
    e = evaluate(d, (1, 2, 0))
    assert e.val == (Fraction(1, 3),) * 3
    # b -> c -> a: two edges of weight 0
    assert e.pot == (0, Fraction(-2, 3), Fraction(-1, 3))


def test_evaluate_rejects_bad_policy(two_cycle):
    with pytest.raises(PolicyError):
        evaluate(two_cycle, (0, 0))
    with pytest.raises(PolicyError):
        evaluate(two_cycle, (1,))


@given(dmdp_and_policy())
def test_evaluate_agrees_with_lasso_sums(case):
    d, policy = case
    assert evaluate(d, policy) == evaluate_by_lasso(d, policy)


@given(dmdp_and_policy(max_n=10))
def test_harmonic_invariants(case):
    d, policy = case
    assert invariant_violations(d, policy, evaluate(d, policy)) == []


@given(dmdp_and_policy(max_n=10))
def test_denominators_bounded_by_n(case):
    d, policy = case
    e = evaluate(d, policy)
    assert all(x.denominator <= d.n for x in e.val + e.pot)


def test_invariant_check_detects_corruption():
    d = gen_pn(3)
    p = policy_pi(3, 2)
    e = evaluate(d, p)
    bad = Evaluation(e.val, e.pot[:1] + (e.pot[1] + 1,) + e.pot[2:])
    assert invariant_violations(d, p, bad)


def test_values_equal():
    d = gen_pn(3)
    a = evaluate(d, policy_pi(3, 2))
    assert values_equal(a, a)
    b = evaluate(d, policy_sigma(3, 2, 1))
    assert a.val[P3.t(1)] == 13 and b.val[P3.t(1)] == 14
    assert not values_equal(a, b)
    one = Evaluation((Fraction(2, 2),), (Fraction(0, 5),))
    assert values_equal(one, Evaluation((Fraction(1),), (Fraction(0),)))
    with pytest.raises(ValueError):
        values_equal(one, a)


@pytest.mark.parametrize("x, text", [(Fraction(3), "3"), (Fraction(-6, 4), "-3/2"), (Fraction(0), "0")])
def test_rational_format(x, text):
    assert format_rational(x) == text
    assert parse_rational(text) == x
