"""Replay logs: one line-delimited record per played game.

A record carries the config, seed, role assignment, the ordered
(actor, phase, action) list including chance outcomes, the final reward
ledger, terminal utilities, and the winner, plus optional per-round
role-prediction blocks. The schema is versioned; readers reject files
written under a different version or with truncated records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import werewolf as ww
from .efg import GameError
from .policy import Agent, play_game

SCHEMA = "werewolf-replay/1"


class SchemaMismatch(GameError):
    pass


def config_spec(config: ww.GameConfig) -> dict:
    return {
        "num_players": config.num_players,
        "role_counts": list(config.role_counts),
        "max_rounds": config.max_rounds,
        "latent_counts": list(config.latent_counts),
    }


def config_from_spec(spec: dict) -> ww.GameConfig:
    return ww.GameConfig(
        num_players=spec["num_players"],
        role_counts=tuple(spec["role_counts"]),
        max_rounds=spec["max_rounds"],
        latent_counts=tuple(spec["latent_counts"]),
    )


@dataclass
class Replay:
    config: ww.GameConfig
    seed: int
    assignment: tuple[int, ...]
    actions: list[tuple[int, str, int]]  # (actor, phase, action); actor -1 = chance
    ledger: tuple[float, ...]
    utilities: tuple[float, ...]
    winner: int
    predictions: list[dict] = field(default_factory=list)

    def action_indices(self) -> list[int]:
        return [a for _, _, a in self.actions]

    def post_deal_actions(self) -> list[int]:
        """Action indices with the initial deal outcome stripped."""
        return [a for _, phase, a in self.actions if phase != ww.DEAL]

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "config": config_spec(self.config),
            "seed": self.seed,
            "assignment": list(self.assignment),
            "actions": [[actor, phase, action] for actor, phase, action in self.actions],
            "ledger": list(self.ledger),
            "utilities": list(self.utilities),
            "winner": self.winner,
            "predictions": self.predictions,
        }

    @staticmethod
    def from_json(obj: dict) -> "Replay":
        if obj.get("schema") != SCHEMA:
            raise SchemaMismatch(f"expected {SCHEMA}, got {obj.get('schema')!r}")
        try:
            return Replay(
                config=config_from_spec(obj["config"]),
                seed=obj["seed"],
                assignment=tuple(obj["assignment"]),
                actions=[(a, p, x) for a, p, x in obj["actions"]],
                ledger=tuple(obj["ledger"]),
                utilities=tuple(obj["utilities"]),
                winner=obj["winner"],
                predictions=obj.get("predictions", []),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaMismatch(f"malformed replay record: {exc}") from exc


def write_replays(path, replays) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for replay in replays:
            fh.write(json.dumps(replay.to_json()) + "\n")


def read_replays(path) -> list[Replay]:
    replays = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaMismatch(f"line {line_number}: truncated or invalid") from exc
            replays.append(Replay.from_json(obj))
    return replays


def play_recorded_game(config: ww.GameConfig, agents: dict[int, Agent] | list,
                       seed: int) -> Replay:
    """Run one game with per-seat agents and capture the full action record."""
    game = ww.WerewolfGame(config)
    rng = np.random.default_rng(seed)
    actions: list[tuple[int, str, int]] = []

    def observer(state, kind, actor, action):
        actions.append((actor if actor is not None else -1, state.phase, action))

    final = play_game(game, agents, rng, observer)
    return Replay(
        config=config,
        seed=seed,
        assignment=final.roles,
        actions=actions,
        ledger=final.ledger,
        utilities=ww.terminal_utilities(final),
        winner=final.winner,
    )


def replay_final_state(replay: Replay) -> ww.GameState:
    """Re-simulate a replay; raises if the record does not re-run cleanly."""
    game = ww.WerewolfGame(replay.config)
    state = game.initial_state()
    for _, _, action in replay.actions:
        state = game.step(state, action)
    if not game.node_kind(state).is_terminal:
        raise SchemaMismatch("replay does not reach a terminal state")
    return state
