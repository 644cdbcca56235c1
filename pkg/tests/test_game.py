from fractions import Fraction
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lssd.errors import BudgetError, DomainError, GameFormatError, HypothesisError, ShapeError
from lssd.game import (
    Channel,
    GameTable,
    bsc_channel,
    bsc_game,
    channel_game,
    game_from_dict,
    game_to_dict,
    load_game,
    parallel_repetition,
    save_game,
    symmetric_channel,
)
from lssd.rational import FLOAT, RATIONAL

from oracles import bsc_table


def test_bsc_game_entries():
    g = bsc_game(Fraction(1, 5))
    assert g.probs.shape == (2, 2, 2)
    assert g.probs[0, 0, 0] == Fraction(1, 2) * Fraction(16, 25)
    assert g.probs[1, 0, 1] == Fraction(1, 2) * Fraction(4, 25)
    assert g.scalar == RATIONAL


@pytest.mark.parametrize("copies", [1, 2, 3])
def test_bsc_game_matches_loop_construction(copies):
    g = bsc_game(0.3, copies, FLOAT)
    assert np.allclose(g.probs, bsc_table(0.3, copies), atol=1e-15)


def test_repetition_is_little_endian():
    # a flip only in slot 0 of x = 00 gives a = 01 (integer 1)
    g = bsc_game(Fraction(1, 10), 2)
    assert g.probs[0, 1, 0] == Fraction(1, 4) * Fraction(1, 10) * Fraction(9, 10) * Fraction(81, 100)


def test_three_player_game():
    g = bsc_game(Fraction(1, 4), 1, num_players=3)
    assert g.probs.shape == (2, 2, 2, 2)
    assert g.probs.sum() == 1


def test_channel_power_rows_stochastic():
    ch = bsc_channel(Fraction(1, 3)).power(3)
    assert ch.cond_probs.shape == (8, 8)
    assert all(r == 1 for r in ch.cond_probs.sum(axis=1))


def test_validation_errors():
    with pytest.raises(DomainError):
        bsc_channel(Fraction(3, 4))
    with pytest.raises(DomainError):
        GameTable(np.full((2, 2, 2), Fraction(1, 4), dtype=object))
    with pytest.raises(ShapeError):
        GameTable(np.array([[0.5, 0.5]]), FLOAT)
    with pytest.raises(DomainError):
        Channel([[Fraction(1, 2), Fraction(1, 3)], [0, 1]])
    with pytest.raises(BudgetError):
        bsc_game(Fraction(1, 4), 5, budget=1000)


def test_table_is_immutable():
    g = bsc_game(Fraction(1, 4))
    with pytest.raises(ValueError):
        g.probs[0, 0, 0] = 0


def test_symmetric_channel_recovered():
    ch = bsc_channel(Fraction(2, 7))
    assert symmetric_channel(channel_game(ch, 3)) == ch


def test_symmetric_channel_rejects_correlated_inputs():
    p = np.zeros((2, 2, 2), dtype=object)
    p[0, 0, 1] = p[1, 1, 0] = Fraction(1, 2)
    p[p == 0] = Fraction(0)
    with pytest.raises(HypothesisError):
        symmetric_channel(GameTable(p))


def test_json_round_trip(tmp_path):
    g = bsc_game(Fraction(3, 10), 2)
    path = tmp_path / "g.json"
    save_game(g, path)
    assert load_game(path) == g
    data = game_to_dict(bsc_game(0.25, 1, FLOAT))
    assert game_from_dict(json.loads(json.dumps(data))).scalar == FLOAT


@pytest.mark.parametrize("payload", [
    "[1, 2]",
    '{"x_size": 2, "input_sizes": [2, 2]}',
    '{"x_size": 2, "input_sizes": [2, 2], "probs": ["1/8"]}',
    '{"x_size": 2, "input_sizes": [2, 2], "probs": [',
])
def test_malformed_files(tmp_path, payload):
    path = tmp_path / "bad.json"
    path.write_text(payload)
    with pytest.raises(GameFormatError):
        load_game(path)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 9), st.integers(1, 3))
def test_repetition_marginals(num, copies):
    alpha = Fraction(num, 20)
    g = bsc_game(alpha, copies)
    assert g.probs.sum() == 1
    px = g.x_marginal()
    assert all(v == Fraction(1, 2 ** copies) for v in px)


def test_parallel_repetition_of_product():
    g = bsc_game(Fraction(1, 5))
    g2 = parallel_repetition(g, 2)
    assert g2 == bsc_game(Fraction(1, 5), 2)
