"""Extensive-form game interface shared by every concrete game.

A game exposes immutable state values and pure functions over them, so
solvers and evaluators can run any number of concurrent traversals without
coordination. States are opaque to the solver; it only interacts through
the methods below.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Sequence

State = Any
PlayerId = int
ActionId = int


class GameError(Exception):
    """Base class for rule/contract violations raised by game code."""


class NotChanceNode(GameError):
    pass


class NotDecisionNode(GameError):
    pass


class NotTerminal(GameError):
    pass


class IllegalAction(GameError):
    """Raised by ``step`` when an action violates a rule; names the rule."""


class Kind(enum.Enum):
    CHANCE = "chance"
    DECISION = "decision"
    TERMINAL = "terminal"


@dataclass(frozen=True)
class NodeKind:
    """Classification of a state: exactly one of chance/decision/terminal.

    ``player`` is set only for decision nodes.
    """

    kind: Kind
    player: PlayerId | None = None

    @staticmethod
    def chance() -> "NodeKind":
        return NodeKind(Kind.CHANCE)

    @staticmethod
    def decision(player: PlayerId) -> "NodeKind":
        return NodeKind(Kind.DECISION, player)

    @staticmethod
    def terminal() -> "NodeKind":
        return NodeKind(Kind.TERMINAL)

    @property
    def is_chance(self) -> bool:
        return self.kind is Kind.CHANCE

    @property
    def is_decision(self) -> bool:
        return self.kind is Kind.DECISION

    @property
    def is_terminal(self) -> bool:
        return self.kind is Kind.TERMINAL


class Game:
    """Base class for extensive-form games.

    Infoset keys are canonical strings: two states yield the same key for
    the acting player iff that player cannot tell them apart, and along any
    play path a player's successive keys strictly extend (perfect recall).
    """

    num_players: int

    def initial_state(self) -> State:
        raise NotImplementedError

    def node_kind(self, state: State) -> NodeKind:
        raise NotImplementedError

    def chance_outcomes(self, state: State) -> list[tuple[ActionId, float]]:
        """(action, probability) pairs at a chance node; probabilities sum to 1."""
        raise NotImplementedError

    def legal_actions(self, state: State) -> list[str]:
        """Semantic labels for the legal actions; ActionId is the list index."""
        raise NotImplementedError

    def step(self, state: State, action: ActionId) -> State:
        raise NotImplementedError

    def utilities(self, state: State) -> Sequence[float]:
        """Per-player payoffs at a terminal state."""
        raise NotImplementedError

    def infoset_key(self, state: State) -> str:
        """Key for the acting player's information set at a decision node."""
        raise NotImplementedError

    def num_actions(self, state: State) -> int:
        return len(self.legal_actions(state))
