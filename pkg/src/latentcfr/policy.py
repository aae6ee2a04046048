"""Playable agents on top of average-policy tables.

``PolicyAgent`` acts straight from a checkpoint's average policy.
``FoldedPolicyAgent`` lets a checkpoint trained with fewer discussion
strategies per role act in a game offering more: unfamiliar strategy
indices observed from other speakers are folded down onto the agent's own
highest index, and the agent's own picks inject unchanged (its indices are
a prefix of the larger menu). Everything else (night targets, votes) is a
shared vocabulary. Unknown infosets fall back to uniform play.
"""

from __future__ import annotations

import re

import numpy as np

from . import werewolf as ww
from .cfr import AveragePolicy, sample_index
from .efg import Game

_TALK_TOKEN = re.compile(r"^t(\d+):(\d+)>(\d+)$")


class Agent:
    def action_probs(self, game: Game, state) -> np.ndarray:
        raise NotImplementedError

    def act(self, game: Game, state, rng: np.random.Generator) -> int:
        return sample_index(rng, self.action_probs(game, state))


class UniformAgent(Agent):
    def action_probs(self, game: Game, state) -> np.ndarray:
        n = game.num_actions(state)
        return np.full(n, 1.0 / n)


class PolicyAgent(Agent):
    def __init__(self, policy: AveragePolicy):
        self.policy = policy

    def action_probs(self, game: Game, state) -> np.ndarray:
        return self.policy.probs(game.infoset_key(state), game.num_actions(state))


def fold_key(key: str, latent_cap: int) -> str:
    """Rewrite discussion tokens so strategy indices stay below ``latent_cap``."""
    parts = []
    for token in key.split("|"):
        m = _TALK_TOKEN.match(token)
        if m and int(m.group(3)) >= latent_cap:
            token = f"t{m.group(1)}:{m.group(2)}>{latent_cap - 1}"
        parts.append(token)
    return "|".join(parts)


class FoldedPolicyAgent(Agent):
    """Plays a smaller-catalog checkpoint inside a larger-catalog game.

    ``own_latent_counts`` are the per-role discussion menu sizes the
    checkpoint was trained with (indexed by role constant).
    """

    def __init__(self, policy: AveragePolicy, own_latent_counts: tuple[int, ...]):
        self.policy = policy
        self.own_latent_counts = tuple(own_latent_counts)
        self.cap = max(own_latent_counts)

    def action_probs(self, game: Game, state) -> np.ndarray:
        n_host = game.num_actions(state)
        key = fold_key(game.infoset_key(state), self.cap)
        if isinstance(state, ww.GameState) and state.phase == ww.DAY_SPEAK:
            actor = ww.node_kind(state).player
            own_k = self.own_latent_counts[state.roles[actor]]
            own = self.policy.probs(key, own_k)
            probs = np.zeros(n_host)
            probs[:own_k] = own
            return probs
        return self.policy.probs(key, n_host)


def sample_without_replacement(
    rng: np.random.Generator, probs: np.ndarray, count: int,
) -> list[int]:
    """Sequential probability-weighted draws without replacement.

    When the remaining probability mass runs out before ``count`` draws,
    the lowest-index remaining actions fill the quota deterministically.
    """
    if count > len(probs):
        raise ValueError("cannot draw more distinct actions than exist")
    remaining = np.array(probs, dtype=float)
    picks: list[int] = []
    for _ in range(count):
        total = remaining.sum()
        if total <= 0.0:
            fill = [i for i in range(len(probs)) if i not in picks]
            picks.extend(fill[: count - len(picks)])
            break
        picks.append(sample_index(rng, remaining / total))
        remaining[picks[-1]] = 0.0
    return picks


def play_game(
    game: Game,
    agents,
    rng: np.random.Generator,
    observer=None,
):
    """Roll one game to the end; ``agents`` maps acting player to Agent.

    ``observer(state, kind, actor, action)`` is called for every applied
    move (chance included, with actor ``None``). Returns the terminal state.
    """
    state = game.initial_state()
    while True:
        kind = game.node_kind(state)
        if kind.is_terminal:
            return state
        if kind.is_chance:
            outcomes = game.chance_outcomes(state)
            probs = np.array([p for _, p in outcomes])
            action = outcomes[sample_index(rng, probs)][0]
            if observer is not None:
                observer(state, kind, None, action)
            state = game.step(state, action)
            continue
        agent = agents[kind.player]
        action = agent.act(game, state, rng)
        if observer is not None:
            observer(state, kind, kind.player, action)
        state = game.step(state, action)
