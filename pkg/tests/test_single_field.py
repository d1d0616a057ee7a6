"""Closed-form layer: values, strategies, payoff evaluation, feasibility."""

import math

import numpy as np
import pytest

from lotto_scouts.single_field import (
    Atom,
    BlueStrategy,
    CallPolicy,
    Case,
    GameParams,
    MixedAllocation,
    Uniform,
    blue_budget_usage,
    classify_case,
    game_value,
    payoff_exact,
    solve,
)


# ---------------------------------------------------------------- parameters


def test_params_validation():
    with pytest.raises(ValueError):
        GameParams(1.0, 0.0, 0.0)  # Red needs a positive budget
    with pytest.raises(ValueError):
        GameParams(-0.1, 1.0, 0.0)
    with pytest.raises(ValueError):
        GameParams(1.0, 1.0, 1.5)
    with pytest.raises(ValueError):
        GameParams(1.0, 1.0, -0.01)
    GameParams(0.0, 1.0, 0.0)  # B = 0 is allowed


@pytest.mark.parametrize(
    "blue,red,u,expected",
    [
        (0.3, 1.0, 0.5, Case.INFO_RICH),
        (1.0, 1.0, 0.0, Case.CONTESTED),  # boundary B/R = 1 ties to the lower case
        (2.0, 1.0, 0.5, Case.BLUE_DOMINANT),
        (0.5, 1.0, 0.5, Case.INFO_RICH),  # boundary B/R = u ties to the lower case
        (0.6, 1.0, 0.4, Case.CONTESTED),
    ],
)
def test_classify_case(blue, red, u, expected):
    assert classify_case(GameParams(blue, red, u)) is expected


# --------------------------------------------------------------------- value


@pytest.mark.parametrize(
    "blue,red,u,expected",
    [
        (0.5, 1.0, 0.0, 0.25),
        (0.3, 1.0, 0.5, 0.3),
        (0.6, 1.0, 0.4, 0.5),
        (2.0, 1.0, 0.5, 11.0 / 12.0),
        (1.0, 1.0, 1.0, 1.0),
    ],
)
def test_game_value_spot_checks(blue, red, u, expected):
    assert game_value(GameParams(blue, red, u)) == pytest.approx(expected, abs=1e-12)


def test_value_continuous_across_case_boundaries():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        R = rng.uniform(0.2, 4.0)
        u = rng.uniform(0.0, 0.999)
        # At B = u R the info-rich and contested formulas must agree.
        assert u <= 1e-9 or abs((u * R) / R - 0.5 * (u + u)) <= 1e-9
        # At B = R the contested and blue-dominant formulas must agree.
        contested = 0.5 * (u + 1.0)
        dominant = 1.0 - (1.0 - u) ** 2 / (2.0 * (1.0 - u))
        assert abs(contested - dominant) <= 1e-9
        # And the dispatcher itself is continuous around both boundaries.
        for boundary in (u * R, R):
            if boundary <= 1e-12:
                continue
            lo = game_value(GameParams(boundary * (1 - 1e-12), R, u))
            hi = game_value(GameParams(boundary * (1 + 1e-12), R, u))
            assert abs(hi - lo) <= 1e-9


def test_hart_reduction_values():
    rng = np.random.default_rng(12)
    for _ in range(200):
        R = rng.uniform(0.2, 4.0)
        B = rng.uniform(1e-6, R)
        assert game_value(GameParams(B, R, 0.0)) == pytest.approx(B / (2 * R), abs=1e-12)
        B_big = rng.uniform(R, 5 * R)
        assert game_value(GameParams(B_big, R, 0.0)) == pytest.approx(
            1 - R / (2 * B_big), abs=1e-12
        )


def test_value_monotone_in_budget_and_information():
    bs = np.arange(0.0, 2.5, 1e-3)
    for u in (0.0, 0.3, 0.7, 1.0):
        vals = [game_value(GameParams(float(b), 1.0, u)) for b in bs]
        assert all(b <= a + 1e-15 for a, b in zip(vals[1:], vals))
    us = np.arange(0.0, 1.0 + 1e-9, 1e-3)
    for b in (0.2, 0.8, 1.5):
        vals = [game_value(GameParams(b, 1.0, float(u))) for u in us]
        assert all(b2 <= a2 + 1e-15 for a2, b2 in zip(vals[1:], vals))


# ------------------------------------------------------------------- solving


def test_solve_info_rich():
    sol = solve(GameParams(0.3, 1.0, 0.5))
    assert sol.case is Case.INFO_RICH
    assert sol.red.components == ((1.0, Atom(1.0)),)
    assert sol.blue.call.values == (0.6,)
    assert sol.blue.fallback.components == ((1.0, Atom(0.0)),)
    assert sol.value == pytest.approx(0.3, abs=1e-12)


def test_solve_contested():
    sol = solve(GameParams(0.6, 1.0, 0.4))
    assert sol.case is Case.CONTESTED
    assert sol.red.components == ((1.0, Uniform(0.0, 2.0)),)
    assert sol.blue.call.values == (1.0,)
    assert sol.p == pytest.approx(1.0 / 3.0, abs=1e-12)
    weights = {type(c): w for w, c in sol.blue.fallback.components}
    assert weights[Uniform] == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert weights[Atom] == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_solve_blue_dominant():
    sol = solve(GameParams(2.0, 1.0, 0.5))
    assert sol.case is Case.BLUE_DOMINANT
    assert sol.q == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert sol.big_c == pytest.approx(3.0, abs=1e-12)
    assert sol.blue.fallback.components == ((1.0, Uniform(0.0, 6.0)),)
    weights = {type(c): w for w, c in sol.red.components}
    assert weights[Uniform] == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert weights[Atom] == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_solve_degenerate_weights_collapse():
    # p = 1 at the contested/dominant boundary: the fallback is pure uniform.
    sol = solve(GameParams(1.0, 1.0, 0.3))
    assert sol.blue.fallback.components == ((1.0, Uniform(0.0, 2.0)),)
    # u = 0, B = 0: the only info-rich instance with no information.
    sol0 = solve(GameParams(0.0, 1.0, 0.0))
    assert sol0.case is Case.INFO_RICH
    assert sol0.blue.call.values == (0.0,)
    assert sol0.value == 0.0


def test_solve_perfect_information_surplus():
    # u = 1 with B > R: no finite mirrored interval exists; Blue just calls.
    sol = solve(GameParams(2.0, 1.0, 1.0))
    assert sol.value == 1.0
    assert sol.red.mean() == pytest.approx(1.0)
    assert payoff_exact(sol.blue, sol.red, 1.0) == pytest.approx(1.0, abs=1e-12)


def _random_params(rng, case):
    R = rng.uniform(0.2, 3.0)
    u = rng.uniform(0.01, 0.97)
    if case is Case.INFO_RICH:
        B = R * u * rng.uniform(0.05, 1.0)
    elif case is Case.CONTESTED:
        B = R * rng.uniform(u, 1.0)
    else:
        B = R * rng.uniform(1.0, 4.0)
    return GameParams(B, R, u)


@pytest.mark.parametrize("case", list(Case))
def test_solution_feasibility_and_equilibrium(case):
    rng = np.random.default_rng(hash(case.value) % 2**32)
    for _ in range(200):
        params = _random_params(rng, case)
        sol = solve(params)
        assert sol.red.mean() == pytest.approx(params.red_budget, abs=1e-9)
        usage = blue_budget_usage(sol.blue, sol.red, params.detect_prob)
        assert usage == pytest.approx(params.blue_budget, abs=1e-9)
        payoff = payoff_exact(sol.blue, sol.red, params.detect_prob)
        assert payoff == pytest.approx(game_value(params), abs=1e-9)
        assert sol.value == game_value(params)


def test_hart_reduction_strategies():
    rng = np.random.default_rng(13)
    for _ in range(50):
        R = rng.uniform(0.2, 4.0)
        B = rng.uniform(1e-3, R)
        sol = solve(GameParams(B, R, 0.0))
        # Red plays the classical uniform on [0, 2R] whenever B <= R.
        assert sol.red.components == ((1.0, Uniform(0.0, 2.0 * R)),)


# ------------------------------------------------------------------ mixtures


def test_mixture_mean_examples():
    assert MixedAllocation.atom(1.0).mean() == 1.0
    m = MixedAllocation.mix((1 / 3, Uniform(0.0, 6.0)), (2 / 3, Atom(0.0)))
    assert m.mean() == pytest.approx(1.0, abs=1e-12)
    m2 = MixedAllocation.mix((0.5, Uniform(0.0, 2.0)), (0.5, Atom(3.0)))
    assert m2.mean() == pytest.approx(2.0, abs=1e-12)


def test_mixture_cdf_examples():
    assert MixedAllocation.uniform(0.0, 2.0).cdf(1.0) == pytest.approx(0.5)
    m = MixedAllocation.mix((2 / 3, Atom(0.0)), (1 / 3, Uniform(0.0, 6.0)))
    assert m.cdf(0.0) == pytest.approx(2 / 3)  # the atom at 0 is included
    assert MixedAllocation.atom(1.0).cdf(0.999) == 0.0


def test_mixture_validation_and_normalisation():
    with pytest.raises(ValueError):
        MixedAllocation.mix((0.5, Atom(1.0)), (0.4, Atom(2.0)))  # sums to 0.9
    with pytest.raises(ValueError):
        MixedAllocation.mix((1.5, Atom(1.0)), (-0.5, Atom(2.0)))
    with pytest.raises(ValueError):
        Uniform(2.0, 2.0)
    with pytest.raises(ValueError):
        Atom(-1.0)
    # Sub-epsilon weights are dropped and the rest renormalised.
    m = MixedAllocation.mix((1.0 - 1e-13, Uniform(0.0, 2.0)), (1e-13, Atom(5.0)))
    assert m.components == ((1.0, Uniform(0.0, 2.0)),)


# --------------------------------------------------------------- call policy


def test_call_policy_is_right_continuous():
    t = CallPolicy((1.0, 2.0), (0.2, 0.7, 0.1))
    assert t(0.0) == 0.2
    assert t(1.0) == 0.7  # value at the breakpoint comes from the right piece
    assert t(1.999) == 0.7
    assert t(2.0) == 0.1
    np.testing.assert_allclose(t(np.array([0.5, 1.0, 3.0])), [0.2, 0.7, 0.1])


def test_call_policy_validation():
    with pytest.raises(ValueError):
        CallPolicy((), (1.2,))
    with pytest.raises(ValueError):
        CallPolicy((2.0, 1.0), (0.1, 0.2, 0.3))
    with pytest.raises(ValueError):
        CallPolicy((1.0,), (0.1,))


def test_call_policy_exact_integration():
    t = CallPolicy((1.0,), (1.0, 0.0))  # call anything below 1
    x = MixedAllocation.uniform(0.0, 2.0)
    assert t.expected_call(x) == pytest.approx(0.5, abs=1e-12)
    # E[t(X) X] over U[0,2] restricted to [0,1) is (1/2)*(1/2)*1 = 1/4... exactly
    # integral of x/2 over [0,1] = 1/4.
    assert t.expected_call_cost(x) == pytest.approx(0.25, abs=1e-12)
    atom = MixedAllocation.atom(1.0)
    assert t.expected_call(atom) == 0.0  # the breakpoint belongs to the right piece


# ------------------------------------------------------------ exact payoffs


def test_payoff_exact_examples():
    sol = solve(GameParams(0.6, 1.0, 0.4))
    assert payoff_exact(sol.blue, MixedAllocation.uniform(0.0, 2.0), 0.4) == pytest.approx(
        0.5, abs=1e-12
    )
    blue = BlueStrategy(CallPolicy.constant(1.0), MixedAllocation.atom(0.0))
    assert payoff_exact(blue, MixedAllocation.atom(0.0), 0.0) == 1.0  # Blue wins ties
    # Hand computation: u + (1-u) * (1 - 1/6) = 11/12 for the dominant blue
    # strategy against a red atom at 1.
    sol2 = solve(GameParams(2.0, 1.0, 0.5))
    assert payoff_exact(sol2.blue, MixedAllocation.atom(1.0), 0.5) == pytest.approx(
        11.0 / 12.0, abs=1e-12
    )


def test_payoff_uniform_vs_uniform_overlaps():
    # Independent oracle: dense numerical integration of P(Z >= x).
    cases = [((0.0, 2.0), (0.0, 2.0)), ((1.0, 3.0), (0.0, 2.0)), ((0.0, 1.0), (0.5, 4.0))]
    for (a, b), (c, d) in cases:
        blue = BlueStrategy(CallPolicy.constant(0.0), MixedAllocation.uniform(a, b))
        red = MixedAllocation.uniform(c, d)
        xs = np.linspace(c, d, 200001)
        expected = float(np.mean(np.clip((b - xs) / (b - a), 0.0, 1.0)))
        assert payoff_exact(blue, red, 0.0) == pytest.approx(expected, abs=1e-4)


def test_blue_budget_usage_examples():
    sol = solve(GameParams(0.6, 1.0, 0.4))
    assert blue_budget_usage(sol.blue, sol.red, 0.4) == pytest.approx(0.6, abs=1e-12)
    sol2 = solve(GameParams(0.3, 1.0, 0.5))
    assert blue_budget_usage(sol2.blue, sol2.red, 0.5) == pytest.approx(0.3, abs=1e-12)
    lazy = BlueStrategy(CallPolicy.constant(0.0), MixedAllocation.atom(0.0))
    assert blue_budget_usage(lazy, MixedAllocation.uniform(0.0, 5.0), 0.7) == 0.0
