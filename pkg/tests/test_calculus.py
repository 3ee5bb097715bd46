"""Directed partials, the total derivative, Euler operators, and exactness."""

import random

from fractions import Fraction

import pytest

from varschouten import (
    Expression,
    JetVar,
    cos,
    euler,
    euler_blocks,
    exp,
    is_exact,
    iterated_derivative,
    jet,
    parity_of,
    parse_context,
    parse_density,
    partial,
    sin,
    total_derivative,
)
from varschouten.fuzz import FuzzParams, random_expression


def _samples(ctx, count, parity="any", seed=11):
    params = FuzzParams(seed=0, count=0, max_jet_order=2, max_degree=3)
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        want = rng.choice((0, 1)) if parity == "any" else parity
        e = random_expression(ctx, rng, params, want)
        if not e.is_zero():
            out.append(e)
    return out


class TestPartial:
    def test_power_rule(self, ctx):
        q = jet(ctx, "q")
        assert partial(q**3, JetVar(0, (0,)), "left") == q**2 * Fraction(3)

    def test_product_rule_even(self, ctx):
        q, q1 = jet(ctx, "q"), jet(ctx, "q", 1)
        e = q**2 * q1
        assert partial(e, JetVar(0, (1,)), "left") == q**2
        assert partial(e, JetVar(0, (0,)), "left") == q * q1 * Fraction(2)

    def test_chain_rule_through_function_argument(self, ctx):
        q1 = jet(ctx, "q", 1)
        e = exp(q1**2)
        assert partial(e, JetVar(0, (1,)), "left") == q1 * exp(q1**2) * Fraction(2)

    def test_directed_odd_strikes(self, ctx):
        p, p1, p2 = jet(ctx, "p"), jet(ctx, "p", 1), jet(ctx, "p", 2)
        e = p * p1 * p2
        # striking the middle factor crosses one odd factor from either side
        assert partial(e, JetVar(1, (1,)), "left") == -(p * p2)
        assert partial(e, JetVar(1, (1,)), "right") == -(p * p2)
        assert partial(e, JetVar(1, (0,)), "left") == p1 * p2
        assert partial(e, JetVar(1, (0,)), "right") == p1 * p2
        # on an even monomial the two directions disagree by a sign
        even = p * p1
        assert partial(even, JetVar(1, (0,)), "left") == p1
        assert partial(even, JetVar(1, (0,)), "right") == -p1

    def test_left_right_relation_on_homogeneous(self, ctx):
        # left and right odd partials differ by (-1)^(|f|-1)
        for e in _samples(ctx, 30, seed=5):
            sign = -1 if (parity_of(e) - 1) % 2 else 1
            for wrt in (JetVar(1, (0,)), JetVar(1, (1,))):
                left = partial(e, wrt, "left")
                right = partial(e, wrt, "right").scale(sign)
                assert left == right

    def test_absent_variable_gives_zero(self, ctx):
        assert partial(jet(ctx, "q"), JetVar(1, (0,)), "left").is_zero()


class TestTotalDerivative:
    def test_raises_jet_orders(self, ctx):
        q, q1, q2 = jet(ctx, "q"), jet(ctx, "q", 1), jet(ctx, "q", 2)
        assert total_derivative(q * q1) == q1**2 + q * q2

    def test_function_factors(self, ctx):
        q1, q2, q3 = jet(ctx, "q", 1), jet(ctx, "q", 2), jet(ctx, "q", 3)
        assert total_derivative(exp(q1)) == q2 * exp(q1)
        assert total_derivative(total_derivative(exp(q1))) == q2**2 * exp(q1) + q3 * exp(q1)
        assert total_derivative(sin(q1)) == q2 * cos(q1)
        assert total_derivative(cos(q1)) == -(q2 * sin(q1))

    def test_odd_factors(self, ctx):
        p, p1, p2 = jet(ctx, "p"), jet(ctx, "p", 1), jet(ctx, "p", 2)
        # p*p2 survives; p1*p1 annihilates
        assert total_derivative(p * p1) == p * p2
        assert total_derivative(p1 * p) == -(p * p2)

    def test_constants_vanish(self, ctx):
        assert total_derivative(Expression.const(ctx, Fraction(5, 3))).is_zero()

    def test_leibniz_rule(self, ctx):
        for a, b in zip(_samples(ctx, 12, seed=2), _samples(ctx, 12, seed=3)):
            lhs = total_derivative(a * b)
            rhs = total_derivative(a) * b + a * total_derivative(b)
            assert lhs == rhs

    def test_commutes_with_even_partial_up_to_shift(self, ctx):
        # d/dq_sigma o D = D o d/dq_sigma + d/dq_(sigma-1)
        wrt, below = JetVar(0, (1,)), JetVar(0, (0,))
        for e in _samples(ctx, 12, seed=7):
            lhs = partial(total_derivative(e), wrt, "left")
            rhs = total_derivative(partial(e, wrt, "left")) + partial(e, below, "left")
            assert lhs == rhs

    def test_direction_out_of_range(self, ctx):
        with pytest.raises(ValueError, match="direction"):
            total_derivative(jet(ctx, "q"), 1)

    def test_iterated_derivative_multi_index(self, ctx):
        e = jet(ctx, "q") ** 2
        assert iterated_derivative(e, (2,)) == total_derivative(total_derivative(e))
        assert iterated_derivative(e, 1) == total_derivative(e)

    def test_second_direction(self):
        ctx2 = parse_context("indep x y\nfield u even antifield v\n")
        u = jet(ctx2, "u")
        assert total_derivative(u, 1) == jet(ctx2, "u", (0, 1))
        assert iterated_derivative(u, (1, 1)) == jet(ctx2, "u", (1, 1))


class TestEuler:
    def test_frozen_values(self, ctx):
        cases = [
            ("p * exp(q[1])", "q", "-p[1]*exp(q[1]) - p*q[2]*exp(q[1])"),
            ("p * exp(q[1])", "p", "exp(q[1])"),
            ("p * cos(q)", "q", "-1 * p*sin(q)"),
            ("q * q[2]", "q", "2*q[2]"),
            ("p * p[1]", "p", "2*p[1]"),
        ]
        for dens, wrt, want in cases:
            got = euler(parse_density(dens, ctx), wrt, "left")
            assert got == parse_density(want, ctx), (dens, wrt)

    def test_blocks_sum_to_euler(self, ctx):
        for e in _samples(ctx, 15, seed=13):
            for wrt in ("q", "p"):
                for side in ("left", "right"):
                    total = Expression.zero(ctx)
                    for _, block in euler_blocks(e, wrt, side):
                        total = total + block
                    assert total == euler(e, wrt, side)

    def test_blocks_are_graded_ascending_and_nonzero(self, ctx):
        e = parse_density("q * q[2] + q[1]^2 * q[3]", ctx)
        blocks = euler_blocks(e, "q", "left")
        orders = [sigma for sigma, _ in blocks]
        assert orders == sorted(orders, key=lambda s: (sum(s), s))
        assert all(not b.is_zero() for _, b in blocks)

    def test_annihilates_total_derivatives(self, ctx):
        for e in _samples(ctx, 20, seed=17):
            d = total_derivative(e)
            assert euler(d, "q", "left").is_zero()
            assert euler(d, "p", "left").is_zero()

    def test_multi_direction_fold(self):
        ctx2 = parse_context("indep x y\nfield u even antifield v\n")
        e = parse_density("v * u[1,2] + u[2,0] * u[0,1] + v[1,1]^2 * u", ctx2)
        for wrt in ("u", "v"):
            total = Expression.zero(ctx2)
            for _, block in euler_blocks(e, wrt, "left"):
                total = total + block
            assert total == euler(e, wrt, "left")


class TestIsExact:
    def test_zero_and_divergences(self, ctx):
        assert is_exact(Expression.zero(ctx))
        assert is_exact(parse_density("q[1]", ctx))
        assert is_exact(total_derivative(parse_density("p * q * exp(q[1])", ctx)))

    def test_divergence_pair(self, ctx):
        assert is_exact(parse_density("p * q[2] - p[2] * q", ctx))

    def test_non_exact_densities(self, ctx):
        assert not is_exact(parse_density("q * q[2]", ctx))
        assert not is_exact(Expression.const(ctx, 1))

    def test_surviving_function_constant_is_not_exact(self, ctx):
        assert not is_exact(exp(Expression.const(ctx, 1)))
