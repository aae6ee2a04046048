import numpy as np
import pytest

from latentcfr import werewolf as ww


@pytest.fixture
def config7():
    return ww.GameConfig()


@pytest.fixture
def config4():
    return ww.four_player_config()


def random_playthrough(config, seed, collect=False):
    """Play a full game with uniform-random legal moves; optionally collect states."""
    rng = np.random.default_rng(seed)
    game = ww.WerewolfGame(config)
    state = game.initial_state()
    states = [state]
    while not game.node_kind(state).is_terminal:
        kind = game.node_kind(state)
        if kind.is_chance:
            outcomes = game.chance_outcomes(state)
            probs = [p for _, p in outcomes]
            idx = rng.choice(len(outcomes), p=probs)
            state = game.step(state, outcomes[idx][0])
        else:
            state = game.step(state, int(rng.integers(game.num_actions(state))))
        if collect:
            states.append(state)
    return (state, states) if collect else state
