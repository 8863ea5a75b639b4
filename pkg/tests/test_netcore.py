import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_game
from ffdin.netcore import (
    GameRecord,
    Layer,
    LayeredSequence,
    Role,
    build_negative,
    negative_for,
    slice_game,
)
from ffdin.synthetic import BehaviorConfig, generate_synthetic_game


def _single(w):
    arr = np.zeros((1, 2, 2))
    arr[0, 0, 1] = w
    return arr


@pytest.mark.parametrize("w, expected", [(1.0, 0.0), (0.0, 1.0), (0.3, 0.7)])
def test_negative_complements_each_edge(w, expected):
    neg = build_negative(_single(w))
    assert neg.weights[0, 0, 1] == pytest.approx(expected, abs=1e-15)


def test_negative_keeps_diagonal_zero():
    neg = build_negative(np.zeros((3, 4, 4)))
    for t in range(3):
        assert np.all(np.diag(neg.weights[t]) == 0.0)
        off = ~np.eye(4, dtype=bool)
        assert np.all(neg.weights[t][off] == 1.0)


@pytest.mark.parametrize("bad", [-0.1, 1.5, np.nan])
def test_negative_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        build_negative(_single(bad))


def test_negative_is_read_only():
    neg = build_negative(_single(0.2))
    with pytest.raises(ValueError):
        neg.weights[0, 0, 1] = 0.5


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_negative_is_an_involution_off_diagonal(T, n, seed):
    w = np.random.default_rng(seed).random((T, n, n))
    w[:, np.arange(n), np.arange(n)] = 0.0
    twice = build_negative(build_negative(w).weights).weights
    np.testing.assert_allclose(twice, w, atol=1e-15)


def test_negative_for_uses_requested_layer():
    game = generate_synthetic_game(BehaviorConfig(n_participants=4, n_deceivers=1, length=20), 1)
    for layer in Layer:
        expected = build_negative(game.sequence.layer(layer)).weights
        got = negative_for(game, layer)
        assert got.source_layer is layer
        np.testing.assert_array_equal(got.weights, expected)


def test_combined_layer_is_mean_of_sources():
    game = generate_synthetic_game(BehaviorConfig(n_participants=4, n_deceivers=1, length=20), 2)
    seq = game.sequence
    np.testing.assert_allclose(seq.layer("combined"),
                               (seq.look_at + seq.speak_to + seq.listen_to) / 3)


def test_sequence_validation():
    good = np.zeros((2, 3, 3))
    with pytest.raises(ValueError):
        LayeredSequence(good, good, np.zeros((3, 3, 3)))
    diag = good.copy()
    diag[0, 1, 1] = 0.5
    with pytest.raises(ValueError):
        LayeredSequence(diag, good, good)
    with pytest.raises(ValueError):
        LayeredSequence(good + 2.0, good, good)


def test_game_needs_both_roles_and_matching_count():
    seq = LayeredSequence(*(np.zeros((2, 3, 3)),) * 3)
    with pytest.raises(ValueError):
        GameRecord("g", (Role.DECEIVER,) * 3, "DW", seq)
    with pytest.raises(ValueError):
        GameRecord("g", (Role.DECEIVER, Role.NON_DECEIVER), "DW", seq)
    game = GameRecord("g", ("D", "ND", "ND"), "DL", seq)
    assert game.labels.tolist() == [1, 0, 0]


def _game(T=120):
    return generate_synthetic_game(BehaviorConfig(n_participants=5, n_deceivers=2, length=T), 3)


def test_slice_first_minute():
    part = slice_game(_game(), 0, 60)
    assert part.length == 60
    assert part.base_game == "synth-3"


def test_slices_partition_the_game():
    game = _game()
    a, b = slice_game(game, 0, 60), slice_game(game, 60, 60)
    for layer in ("look_at", "speak_to", "listen_to"):
        joined = np.concatenate([a.sequence.layer(layer), b.sequence.layer(layer)])
        np.testing.assert_array_equal(joined, game.sequence.layer(layer))
    assert (a.offset, b.offset) == (0, 60)
    assert a.game_id != b.game_id


@pytest.mark.parametrize("start, length", [(0, 60), (-1, 10), (50, 10), (0, 0)])
def test_slice_bounds(start, length):
    with pytest.raises(ValueError):
        slice_game(_game(59), start, length)


def test_slice_of_slice_tracks_origin():
    game = _game()
    inner = slice_game(slice_game(game, 30, 60), 10, 20)
    assert inner.base_game == game.game_id
    assert inner.offset == 40
    np.testing.assert_array_equal(inner.sequence.look_at, game.sequence.look_at[40:60])


def test_equality_is_by_value():
    g1 = make_game(np.zeros((2, 3, 3)))
    g2 = make_game(np.zeros((2, 3, 3)))
    assert g1 == g2
    look = np.zeros((2, 3, 3))
    look[0, 0, 1] = 0.5
    assert g1 != make_game(look)
