"""Kuhn poker: three-card betting game bundled as a solver self-test.

Small enough for exact best response, yet its equilibrium is mixed and its
game value (-1/18 for the first player) is a classic cross-check for CFR.
"""

from __future__ import annotations

from dataclasses import dataclass

from .efg import Game, IllegalAction, NodeKind, NotChanceNode, NotTerminal

CARDS = ("J", "Q", "K")
DEALS = [(i, j) for i in range(3) for j in range(3) if i != j]


@dataclass(frozen=True)
class KuhnState:
    cards: tuple[int, int] | None = None
    history: str = ""  # sequence of 'c' (check/call) and 'b' (bet); 'f' folds


def _terminal(history: str) -> bool:
    return history in ("cc", "bc", "bf", "cbc", "cbf")


class KuhnGame(Game):
    num_players = 2

    def initial_state(self) -> KuhnState:
        return KuhnState()

    def node_kind(self, state: KuhnState) -> NodeKind:
        if state.cards is None:
            return NodeKind.chance()
        if _terminal(state.history):
            return NodeKind.terminal()
        return NodeKind.decision(len(state.history) % 2)

    def chance_outcomes(self, state: KuhnState):
        if state.cards is not None:
            raise NotChanceNode("cards already dealt")
        p = 1.0 / len(DEALS)
        return [(i, p) for i in range(len(DEALS))]

    def legal_actions(self, state: KuhnState) -> list[str]:
        if state.history.endswith("b"):
            return ["fold", "call"]
        return ["check", "bet"]

    def step(self, state: KuhnState, action: int) -> KuhnState:
        if state.cards is None:
            return KuhnState(cards=DEALS[action])
        labels = self.legal_actions(state)
        if not 0 <= action < len(labels):
            raise IllegalAction(f"action index {action} out of range")
        symbol = {"check": "c", "call": "c", "bet": "b", "fold": "f"}[labels[action]]
        return KuhnState(cards=state.cards, history=state.history + symbol)

    def utilities(self, state: KuhnState) -> tuple[float, float]:
        h = state.history
        if state.cards is None or not _terminal(h):
            raise NotTerminal(f"history {h!r} is not terminal")
        c0, c1 = state.cards
        if h == "bf":
            return (1.0, -1.0)
        if h == "cbf":
            return (-1.0, 1.0)
        pot = 2.0 if h == "cc" else 4.0
        stake = pot / 2.0 - 1.0 + 1.0  # ante plus any call: 1 for 'cc', 2 otherwise
        return (stake, -stake) if c0 > c1 else (-stake, stake)

    def infoset_key(self, state: KuhnState) -> str:
        kind = self.node_kind(state)
        card = state.cards[kind.player]
        return f"kuhn:{CARDS[card]}:{state.history}"
