"""Rock-Paper-Scissors-Spock-Lizard, optionally restricted to an action subset.

The one-shot simultaneous game is exposed as a two-level extensive-form
game (player 0 moves, player 1 moves inside a single infoset spanning all
of player 0's choices) so the generic CFR solver applies unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .efg import Game, GameError, NodeKind, NotTerminal

ACTIONS = ("Rock", "Paper", "Scissors", "Spock", "Lizard")

# beats[a] = the two actions a defeats
BEATS: dict[str, frozenset[str]] = {
    "Rock": frozenset({"Scissors", "Lizard"}),
    "Paper": frozenset({"Rock", "Spock"}),
    "Scissors": frozenset({"Paper", "Lizard"}),
    "Spock": frozenset({"Rock", "Scissors"}),
    "Lizard": frozenset({"Paper", "Spock"}),
}


class EmptySubset(GameError):
    pass


class InvalidStrategy(GameError):
    pass


def payoff(a: str, b: str) -> int:
    """+1 if a beats b, -1 if b beats a, 0 on a draw."""
    if a == b:
        return 0
    return 1 if b in BEATS[a] else -1


@dataclass(frozen=True)
class RpsslState:
    first: int | None = None   # player 0's action index into the game's subset
    second: int | None = None


class RpsslGame(Game):
    """Full or subset-restricted RPSSL as a tiny two-player EFG."""

    num_players = 2

    def __init__(self, actions: tuple[str, ...] = ACTIONS):
        if not actions:
            raise EmptySubset("action subset must be nonempty")
        unknown = [a for a in actions if a not in ACTIONS]
        if unknown:
            raise GameError(f"unknown actions: {unknown}")
        self.actions = tuple(actions)

    def restrict(self, actions: tuple[str, ...]) -> "RpsslGame":
        return RpsslGame(actions)

    def initial_state(self) -> RpsslState:
        return RpsslState()

    def node_kind(self, state: RpsslState) -> NodeKind:
        if state.first is None:
            return NodeKind.decision(0)
        if state.second is None:
            return NodeKind.decision(1)
        return NodeKind.terminal()

    def chance_outcomes(self, state: RpsslState):
        from .efg import NotChanceNode

        raise NotChanceNode("RPSSL has no chance nodes")

    def legal_actions(self, state: RpsslState) -> list[str]:
        return list(self.actions)

    def step(self, state: RpsslState, action: int) -> RpsslState:
        from .efg import IllegalAction

        if not 0 <= action < len(self.actions):
            raise IllegalAction(f"action index {action} out of range")
        if state.first is None:
            return RpsslState(first=action)
        if state.second is None:
            return RpsslState(first=state.first, second=action)
        raise IllegalAction("game already over")

    def utilities(self, state: RpsslState) -> tuple[float, float]:
        if state.first is None or state.second is None:
            raise NotTerminal("both actions must be submitted")
        u = float(payoff(self.actions[state.first], self.actions[state.second]))
        return (u, -u)

    def infoset_key(self, state: RpsslState) -> str:
        # Player 1 cannot observe player 0's choice: one infoset per player.
        player = 0 if state.first is None else 1
        return f"rpssl:{','.join(self.actions)}:p{player}"


def validate_strategy(probs, n_actions: int, tol: float = 1e-9) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if probs.shape != (n_actions,):
        raise InvalidStrategy(f"expected {n_actions} probabilities, got shape {probs.shape}")
    if np.any(probs < -tol) or abs(probs.sum() - 1.0) > tol:
        raise InvalidStrategy("probabilities must be nonnegative and sum to 1")
    return np.clip(probs, 0.0, None)


def exploitability(probs, actions: tuple[str, ...] = ACTIONS) -> float:
    """Best pure-action payoff an opponent can get against ``probs``.

    Zero exactly at a Nash equilibrium of the (restricted) symmetric game.
    """
    probs = validate_strategy(probs, len(actions))
    best = max(
        sum(p * payoff(a, b) for p, b in zip(probs, actions))
        for a in actions
    )
    return float(best)


def embed_in_full(probs, actions: tuple[str, ...]) -> np.ndarray:
    """Lift a subset strategy to the full five-action simplex (zeros elsewhere)."""
    probs = validate_strategy(probs, len(actions))
    full = np.zeros(len(ACTIONS))
    for p, a in zip(probs, actions):
        full[ACTIONS.index(a)] = p
    return full
