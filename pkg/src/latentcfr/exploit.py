"""Exact best response and exploitability for games that fit in memory.

The full game tree is enumerated once into a flat index and reused across
responders and policy snapshots, which keeps repeated exploitability
measurements cheap. Games above the node cap are rejected rather than
silently approximated.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np

from .cfr import AveragePolicy
from .efg import Game, GameError, Kind


class GameTooLarge(GameError):
    pass


@dataclass
class _Node:
    __slots__ = ("state", "kind", "player", "key", "children", "probs", "utilities")
    state: object
    kind: Kind
    player: int | None
    key: str | None
    children: list[int] | None
    probs: list[float] | None
    utilities: np.ndarray | None


class TreeIndex:
    """Flat enumeration of a game tree (children listed after parents)."""

    def __init__(self, game: Game, node_cap: int = 2_000_000):
        self.game = game
        self.nodes: list[_Node] = []
        stack = [(game.initial_state(), None, None)]
        while stack:
            state, parent, slot = stack.pop()
            kind = game.node_kind(state)
            nid = len(self.nodes)
            if nid >= node_cap:
                raise GameTooLarge(
                    f"game exceeds the {node_cap}-node cap for exact traversal")
            if parent is not None:
                self.nodes[parent].children[slot] = nid
            if kind.is_terminal:
                node = _Node(state, kind.kind, None, None, None, None,
                             np.asarray(game.utilities(state), dtype=float))
            elif kind.is_chance:
                outcomes = game.chance_outcomes(state)
                node = _Node(state, kind.kind, None, None,
                             [-1] * len(outcomes), [p for _, p in outcomes], None)
                for i, (action, _) in enumerate(outcomes):
                    stack.append((game.step(state, action), nid, i))
            else:
                n = game.num_actions(state)
                node = _Node(state, kind.kind, kind.player, game.infoset_key(state),
                             [-1] * n, None, None)
                for a in range(n):
                    stack.append((game.step(state, a), nid, a))
            self.nodes.append(node)

    def __len__(self) -> int:
        return len(self.nodes)


def policy_values(tree: TreeIndex, policy: AveragePolicy) -> np.ndarray:
    """Expected utility vector when every player follows ``policy``."""
    values = [None] * len(tree.nodes)
    for nid in range(len(tree.nodes) - 1, -1, -1):
        node = tree.nodes[nid]
        if node.kind is Kind.TERMINAL:
            values[nid] = node.utilities
        elif node.kind is Kind.CHANCE:
            values[nid] = sum(p * values[c] for p, c in zip(node.probs, node.children))
        else:
            sigma = policy.probs(node.key, len(node.children))
            values[nid] = sum(s * values[c] for s, c in zip(sigma, node.children))
    return values[0]


def best_response(
    tree: TreeIndex, policy: AveragePolicy, responder: int,
) -> tuple[float, dict[str, int]]:
    """Exact best response for ``responder`` with everyone else on ``policy``.

    Returns the responder's value and the pure best-response action per
    reachable responder infoset.
    """
    nodes = tree.nodes
    # forward pass: counterfactual reach (chance and others only)
    reach = np.zeros(len(nodes))
    reach[0] = 1.0
    members: dict[str, list[int]] = {}
    for nid, node in enumerate(nodes):
        r = reach[nid]
        if node.kind is Kind.TERMINAL or r == 0.0:
            continue
        if node.kind is Kind.CHANCE:
            for p, c in zip(node.probs, node.children):
                reach[c] += r * p
        elif node.player == responder:
            members.setdefault(node.key, []).append(nid)
            for c in node.children:
                reach[c] += r
        else:
            sigma = policy.probs(node.key, len(node.children))
            for s, c in zip(sigma, node.children):
                reach[c] += r * s

    value_memo: dict[int, float] = {}
    action_memo: dict[str, int] = {}
    limit = max(sys.getrecursionlimit(), 10_000)
    sys.setrecursionlimit(limit)

    def node_value(nid: int) -> float:
        got = value_memo.get(nid)
        if got is not None:
            return got
        node = nodes[nid]
        if node.kind is Kind.TERMINAL:
            value = float(node.utilities[responder])
        elif node.kind is Kind.CHANCE:
            value = sum(p * node_value(c) for p, c in zip(node.probs, node.children))
        elif node.player == responder:
            value = node_value(node.children[best_action(node.key)])
        else:
            sigma = policy.probs(node.key, len(node.children))
            value = sum(s * node_value(c) for s, c in zip(sigma, node.children) if s > 0.0)
        value_memo[nid] = value
        return value

    def best_action(key: str) -> int:
        got = action_memo.get(key)
        if got is not None:
            return got
        group = members[key]
        n = len(nodes[group[0]].children)
        scores = [
            sum(reach[m] * node_value(nodes[m].children[a]) for m in group)
            for a in range(n)
        ]
        action = int(np.argmax(scores))
        action_memo[key] = action
        return action

    return node_value(0), action_memo


def exploitability_profile(
    game: Game, policy: AveragePolicy, tree: TreeIndex | None = None,
    node_cap: int = 2_000_000,
) -> dict:
    """Best-response gain per player plus the mean gain.

    Gains are clipped at tiny negatives (they are >= 0 up to float error).
    """
    tree = tree if tree is not None else TreeIndex(game, node_cap)
    base = policy_values(tree, policy)
    gains = []
    for player in range(game.num_players):
        br_value, _ = best_response(tree, policy, player)
        gain = br_value - float(base[player])
        if gain < -1e-9:
            raise GameError(f"best response below policy value for player {player}: {gain}")
        gains.append(max(gain, 0.0))
    return {
        "per_player": gains,
        "aggregate": float(np.mean(gains)),
        "policy_values": [float(v) for v in base],
    }
