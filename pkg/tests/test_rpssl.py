import numpy as np
import pytest
from hypothesis import given, strategies as st

from latentcfr import rpssl
from latentcfr.efg import IllegalAction, NotChanceNode


def test_payoff_identity_and_edges():
    assert rpssl.payoff("Rock", "Rock") == 0
    assert rpssl.payoff("Spock", "Rock") == 1
    assert rpssl.payoff("Lizard", "Rock") == -1


@given(st.sampled_from(rpssl.ACTIONS), st.sampled_from(rpssl.ACTIONS))
def test_payoff_antisymmetric(a, b):
    assert rpssl.payoff(a, b) == -rpssl.payoff(b, a)


def test_every_action_beats_exactly_two():
    for a in rpssl.ACTIONS:
        wins = sum(rpssl.payoff(a, b) == 1 for b in rpssl.ACTIONS)
        losses = sum(rpssl.payoff(a, b) == -1 for b in rpssl.ACTIONS)
        assert wins == 2 and losses == 2


def test_exploitability_uniform_is_zero():
    assert rpssl.exploitability([0.2] * 5) == pytest.approx(0.0, abs=1e-12)


def test_exploitability_pure_rock():
    assert rpssl.exploitability([1, 0, 0, 0, 0]) == pytest.approx(1.0)


def test_exploitability_restricted_uniform():
    subset = ("Rock", "Paper", "Scissors")
    assert rpssl.exploitability([1 / 3] * 3, subset) == pytest.approx(0.0, abs=1e-12)


def test_exploitability_vs_brute_force_best_response():
    rng = np.random.default_rng(7)
    for _ in range(50):
        raw = rng.random(5)
        probs = raw / raw.sum()
        expected = max(
            sum(p * rpssl.payoff(a, b) for p, b in zip(probs, rpssl.ACTIONS))
            for a in rpssl.ACTIONS
        )
        assert rpssl.exploitability(probs) == pytest.approx(expected)
        assert rpssl.exploitability(probs) >= -1e-12


def test_invalid_strategy_rejected():
    with pytest.raises(rpssl.InvalidStrategy):
        rpssl.exploitability([0.5, 0.5, 0.5, -0.25, -0.25])
    with pytest.raises(rpssl.InvalidStrategy):
        rpssl.exploitability([0.3, 0.3, 0.3])


def test_restrict_variants():
    game = rpssl.RpsslGame()
    sub = game.restrict(("Rock", "Paper", "Scissors"))
    assert sub.actions == ("Rock", "Paper", "Scissors")
    assert rpssl.RpsslGame(rpssl.ACTIONS).actions == rpssl.ACTIONS
    solo = rpssl.RpsslGame(("Rock",))
    assert rpssl.exploitability([1.0], solo.actions) == pytest.approx(0.0)
    with pytest.raises(rpssl.EmptySubset):
        rpssl.RpsslGame(())


def test_efg_wrapper_roundtrip():
    game = rpssl.RpsslGame()
    state = game.initial_state()
    assert game.node_kind(state).is_decision and game.node_kind(state).player == 0
    with pytest.raises(NotChanceNode):
        game.chance_outcomes(state)
    mid = game.step(state, 0)
    assert game.node_kind(mid).player == 1
    # player 1's infoset must not depend on player 0's move
    assert game.infoset_key(mid) == game.infoset_key(game.step(state, 3))
    done = game.step(mid, 2)  # Rock vs Scissors
    assert game.node_kind(done).is_terminal
    assert game.utilities(done) == (1.0, -1.0)
    with pytest.raises(IllegalAction):
        game.step(done, 0)


def test_embed_in_full():
    full = rpssl.embed_in_full([1 / 3] * 3, ("Rock", "Paper", "Scissors"))
    assert full.tolist() == pytest.approx([1 / 3, 1 / 3, 1 / 3, 0.0, 0.0])
    assert rpssl.exploitability(full) == pytest.approx(1 / 3)
