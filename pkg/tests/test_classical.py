from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lssd.classical import (
    DeterministicStrategy,
    eval_deterministic,
    optimal_classical_3party_binary,
    optimal_classical_exhaustive,
    optimal_classical_symmetric,
    reduced_deterministic_strategies,
)
from lssd.errors import BudgetError, ShapeError
from lssd.game import Channel, GameTable, bsc_game, channel_game

from oracles import brute_force_classical, single_bsc, two_fold_classical


@st.composite
def rational_channel(draw, max_x=3, max_a=3):
    k = draw(st.integers(2, max_x))
    na = draw(st.integers(2, max_a))
    rows = []
    for _ in range(k):
        w = draw(st.lists(st.integers(0, 9), min_size=na, max_size=na).filter(lambda r: sum(r) > 0))
        s = sum(w)
        rows.append([Fraction(v, s) for v in w])
    return Channel(rows)


@pytest.mark.parametrize("alpha", [Fraction(0), Fraction(1, 10), Fraction(1, 5), Fraction(3, 10), Fraction(1, 2)])
def test_single_bsc_classical(alpha):
    g = bsc_game(alpha)
    assert optimal_classical_symmetric(g)[0] == single_bsc(alpha)
    assert optimal_classical_exhaustive(g)[0] == single_bsc(alpha)


def test_two_fold_strategies():
    val, s = optimal_classical_symmetric(bsc_game(Fraction(31, 100), 2))
    assert val == two_fold_classical(Fraction(31, 100))
    # input containing a zero -> 00, otherwise 11
    assert s.tables[0] == (0, 0, 0, 3)
    val, s = optimal_classical_symmetric(bsc_game(Fraction(7, 20), 2))
    assert val == Fraction(1, 4) and len(set(s.tables[0])) == 1


def test_eval_deterministic_matches_brute_force():
    g = bsc_game(Fraction(1, 5), 2)
    s = DeterministicStrategy.symmetric((0, 1, 2, 3), 2)
    assert eval_deterministic(g, s) == Fraction(4, 5) ** 4


def test_strategy_validation():
    g = bsc_game(Fraction(1, 5))
    with pytest.raises(ShapeError):
        DeterministicStrategy(((0, 1),)).validate(g)
    with pytest.raises(ShapeError):
        DeterministicStrategy(((0, 2), (0, 1))).validate(g)


def test_exhaustive_budget():
    with pytest.raises(BudgetError):
        optimal_classical_exhaustive(bsc_game(Fraction(1, 5), 2), budget=100)


@settings(max_examples=40, deadline=None)
@given(rational_channel(), st.integers(2, 3))
def test_symmetric_equals_exhaustive(ch, m):
    if m == 3 and ch.a_size * ch.x_size > 6:
        m = 2
    g = channel_game(ch, m)
    assert optimal_classical_symmetric(g)[0] == optimal_classical_exhaustive(g)[0]


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=16, max_size=16).filter(lambda w: sum(w) > 0))
def test_three_party_binary_formula(weights):
    total = sum(weights)
    g = GameTable(np.array([Fraction(w, total) for w in weights], dtype=object).reshape(2, 2, 2, 2))
    ref = brute_force_classical(g.probs)
    assert optimal_classical_3party_binary(g) == ref
    assert optimal_classical_exhaustive(g)[0] == ref
    best_reduced = max(eval_deterministic(g, s) for s in reduced_deterministic_strategies(2))
    assert best_reduced == ref


def test_reduced_strategy_count():
    assert len(reduced_deterministic_strategies(2)) == 10


def test_float_games():
    g = bsc_game(0.3, 2, "float")
    val, _ = optimal_classical_symmetric(g)
    assert abs(val - float(two_fold_classical(Fraction(3, 10)))) < 1e-15
