"""Tabular counterfactual-regret minimization for any ``efg.Game``.

Regrets and average-strategy weights live in per-infoset tables keyed by
the game's canonical infoset strings. Two traversal modes:

- ``full``: exact tree walk; the traverser's regrets are weighted by the
  reach probability of chance and the other players.
- ``external_sampling``: chance and opponents are sampled, the traverser's
  actions are enumerated; regrets are added unweighted since sampling
  supplies the weighting in expectation.

An optional depth limit cuts traversals off after that many decision
levels and finishes the game by sampling every player's move from the
current average policy (the converging object), which keeps the value
estimate unbiased with respect to that policy.

The solver loop alternates the traversing player and is deterministic for
a fixed seed in single-threaded mode. ``solve_sharded`` runs independent
sampling shards and merges the tables additively; results depend only on
the (worker count, per-shard seed) pair.
"""

from __future__ import annotations

import gzip
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .efg import Game, GameError


class NoActions(GameError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    iterations: int
    seed: int = 0
    depth_limit: int | None = None
    traversal: str = "full"  # or "external_sampling"
    plus_variant: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.depth_limit is not None and self.depth_limit < 1:
            raise ValueError("depth_limit must be >= 1 when set")
        if self.traversal not in ("full", "external_sampling"):
            raise ValueError(f"unknown traversal mode {self.traversal!r}")


def regret_matching(regrets: np.ndarray) -> np.ndarray:
    """Distribution proportional to positive regrets; uniform if none."""
    if len(regrets) == 0:
        raise NoActions("regret matching needs at least one action")
    positive = np.clip(regrets, 0.0, None)
    total = positive.sum()
    if total <= 0.0:
        return np.full(len(regrets), 1.0 / len(regrets))
    return positive / total


class Tables:
    """Cumulative regrets and average-strategy weights per infoset."""

    def __init__(self):
        self.regrets: dict[str, np.ndarray] = {}
        self.strategy_sum: dict[str, np.ndarray] = {}
        self.iterations_done = 0

    def regret_row(self, key: str, n_actions: int) -> np.ndarray:
        row = self.regrets.get(key)
        if row is None:
            row = np.zeros(n_actions)
            self.regrets[key] = row
        return row

    def strategy_row(self, key: str, n_actions: int) -> np.ndarray:
        row = self.strategy_sum.get(key)
        if row is None:
            row = np.zeros(n_actions)
            self.strategy_sum[key] = row
        return row

    def current_strategy(self, key: str, n_actions: int) -> np.ndarray:
        row = self.regrets.get(key)
        if row is None:
            return np.full(n_actions, 1.0 / n_actions)
        return regret_matching(row)

    def average_strategy(self, key: str, n_actions: int) -> np.ndarray:
        row = self.strategy_sum.get(key)
        if row is None:
            return np.full(n_actions, 1.0 / n_actions)
        total = row.sum()
        if total <= 0.0:
            return np.full(n_actions, 1.0 / n_actions)
        return row / total


class AveragePolicy:
    """Read view of the accumulated average strategy; uniform where unvisited."""

    def __init__(self, strategy_sum: dict[str, np.ndarray]):
        self.strategy_sum = strategy_sum

    def probs(self, key: str, n_actions: int) -> np.ndarray:
        row = self.strategy_sum.get(key)
        if row is None or len(row) != n_actions or row.sum() <= 0.0:
            return np.full(n_actions, 1.0 / n_actions)
        return row / row.sum()


def sample_index(rng: np.random.Generator, probs: np.ndarray) -> int:
    cumulative = np.cumsum(probs)
    draw = rng.random() * cumulative[-1]
    return int(np.searchsorted(cumulative, draw, side="right").clip(0, len(probs) - 1))


def _rollout(game: Game, state, policy: AveragePolicy, rng: np.random.Generator) -> np.ndarray:
    while True:
        kind = game.node_kind(state)
        if kind.is_terminal:
            return np.asarray(game.utilities(state), dtype=float)
        if kind.is_chance:
            outcomes = game.chance_outcomes(state)
            probs = np.array([p for _, p in outcomes])
            state = game.step(state, outcomes[sample_index(rng, probs)][0])
            continue
        n = game.num_actions(state)
        probs = policy.probs(game.infoset_key(state), n)
        state = game.step(state, sample_index(rng, probs))


def cfr_iteration(
    game: Game,
    tables: Tables,
    config: SolverConfig,
    traverser: int,
    rng: np.random.Generator,
) -> float:
    """One traversal for ``traverser``; returns its root value estimate."""
    rollout_policy = AveragePolicy(tables.strategy_sum)
    if config.traversal == "full":
        return _traverse_full(
            game, game.initial_state(), traverser, 1.0, 1.0,
            tables, config, rollout_policy, rng, 0)
    return _traverse_es(
        game, game.initial_state(), traverser, 1.0,
        tables, config, rollout_policy, rng, 0)


def _traverse_full(game, state, traverser, reach_me, reach_other,
                   tables, config, rollout_policy, rng, depth) -> float:
    kind = game.node_kind(state)
    if kind.is_terminal:
        return float(game.utilities(state)[traverser])
    if kind.is_chance:
        total = 0.0
        for action, p in game.chance_outcomes(state):
            total += p * _traverse_full(
                game, game.step(state, action), traverser, reach_me,
                reach_other * p, tables, config, rollout_policy, rng, depth)
        return total
    if config.depth_limit is not None and depth >= config.depth_limit:
        return float(_rollout(game, state, rollout_policy, rng)[traverser])
    key = game.infoset_key(state)
    n = game.num_actions(state)
    regrets = tables.regret_row(key, n)
    sigma = regret_matching(regrets)
    if kind.player == traverser:
        values = np.empty(n)
        for a in range(n):
            values[a] = _traverse_full(
                game, game.step(state, a), traverser, reach_me * sigma[a],
                reach_other, tables, config, rollout_policy, rng, depth + 1)
        node_value = float(sigma @ values)
        regrets += reach_other * (values - node_value)
        if config.plus_variant:
            np.clip(regrets, 0.0, None, out=regrets)
        tables.strategy_row(key, n)[:] += reach_me * sigma
        return node_value
    value = 0.0
    for a in range(n):
        if sigma[a] == 0.0:
            continue
        value += sigma[a] * _traverse_full(
            game, game.step(state, a), traverser, reach_me,
            reach_other * sigma[a], tables, config, rollout_policy, rng, depth + 1)
    return value


def _traverse_es(game, state, traverser, reach_me,
                 tables, config, rollout_policy, rng, depth) -> float:
    kind = game.node_kind(state)
    if kind.is_terminal:
        return float(game.utilities(state)[traverser])
    if kind.is_chance:
        outcomes = game.chance_outcomes(state)
        probs = np.array([p for _, p in outcomes])
        action = outcomes[sample_index(rng, probs)][0]
        return _traverse_es(game, game.step(state, action), traverser, reach_me,
                            tables, config, rollout_policy, rng, depth)
    if config.depth_limit is not None and depth >= config.depth_limit:
        return float(_rollout(game, state, rollout_policy, rng)[traverser])
    key = game.infoset_key(state)
    n = game.num_actions(state)
    regrets = tables.regret_row(key, n)
    sigma = regret_matching(regrets)
    if kind.player == traverser:
        values = np.empty(n)
        for a in range(n):
            values[a] = _traverse_es(
                game, game.step(state, a), traverser, reach_me * sigma[a],
                tables, config, rollout_policy, rng, depth + 1)
        node_value = float(sigma @ values)
        regrets += values - node_value
        if config.plus_variant:
            np.clip(regrets, 0.0, None, out=regrets)
        tables.strategy_row(key, n)[:] += reach_me * sigma
        return node_value
    action = sample_index(rng, sigma)
    return _traverse_es(game, game.step(state, action), traverser, reach_me,
                        tables, config, rollout_policy, rng, depth + 1)


def depth_limited_value(
    game: Game,
    state,
    tables: Tables,
    depth: int,
    rollout_policy: AveragePolicy,
    seed: int,
    rollouts_per_leaf: int = 1,
) -> np.ndarray:
    """Per-player value estimate: exact expansion for ``depth`` decision
    levels under current regret-matching strategies, Monte-Carlo rollouts
    under ``rollout_policy`` beyond."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    rng = np.random.default_rng(seed)

    def recurse(node, remaining) -> np.ndarray:
        kind = game.node_kind(node)
        if kind.is_terminal:
            return np.asarray(game.utilities(node), dtype=float)
        if kind.is_chance:
            total = np.zeros(game.num_players)
            for action, p in game.chance_outcomes(node):
                total += p * recurse(game.step(node, action), remaining)
            return total
        if remaining <= 0:
            total = np.zeros(game.num_players)
            for _ in range(rollouts_per_leaf):
                total += _rollout(game, node, rollout_policy, rng)
            return total / rollouts_per_leaf
        sigma = tables.current_strategy(game.infoset_key(node), game.num_actions(node))
        total = np.zeros(game.num_players)
        for a in range(game.num_actions(node)):
            if sigma[a] > 0.0:
                total += sigma[a] * recurse(game.step(node, a), remaining - 1)
        return total

    return recurse(state, depth)


@dataclass
class Checkpoint:
    """Persistable solver snapshot; raw cumulative tables so runs resume exactly."""

    config: SolverConfig
    tables: Tables
    game_spec: dict = field(default_factory=dict)

    @property
    def policy(self) -> AveragePolicy:
        return AveragePolicy(self.tables.strategy_sum)

    def save(self, path) -> None:
        payload = {
            "format": "cfr-checkpoint/1",
            "solver": asdict(self.config),
            "game_spec": self.game_spec,
            "iterations_done": self.tables.iterations_done,
            "regrets": {k: list(v) for k, v in sorted(self.tables.regrets.items())},
            "strategy_sum": {k: list(v) for k, v in sorted(self.tables.strategy_sum.items())},
        }
        data = json.dumps(payload).encode()
        opener = gzip.open if str(path).endswith(".gz") else open
        with opener(path, "wb") as fh:
            fh.write(data)

    @staticmethod
    def load(path) -> "Checkpoint":
        opener = gzip.open if str(path).endswith(".gz") else open
        with opener(path, "rb") as fh:
            payload = json.loads(fh.read().decode())
        if payload.get("format") != "cfr-checkpoint/1":
            raise GameError(f"unsupported checkpoint format in {path}")
        tables = Tables()
        tables.iterations_done = payload["iterations_done"]
        tables.regrets = {k: np.array(v) for k, v in payload["regrets"].items()}
        tables.strategy_sum = {k: np.array(v) for k, v in payload["strategy_sum"].items()}
        return Checkpoint(SolverConfig(**payload["solver"]), tables, payload["game_spec"])


def solve(
    game: Game,
    config: SolverConfig,
    game_spec: dict | None = None,
    tables: Tables | None = None,
    callback=None,
) -> Checkpoint:
    """Run ``config.iterations`` alternating-traverser iterations.

    ``callback(iteration, tables)`` fires after each iteration when given,
    e.g. to snapshot intermediate checkpoints.
    """
    tables = tables if tables is not None else Tables()
    rng = np.random.default_rng(config.seed)
    for t in range(config.iterations):
        for traverser in range(game.num_players):
            cfr_iteration(game, tables, config, traverser, rng)
        tables.iterations_done += 1
        if callback is not None:
            callback(tables.iterations_done, tables)
    return Checkpoint(config, tables, game_spec or {})


def _run_shard(args):
    game, config, shard_seed = args
    shard_config = SolverConfig(
        iterations=config.iterations,
        seed=shard_seed,
        depth_limit=config.depth_limit,
        traversal=config.traversal,
        plus_variant=config.plus_variant,
    )
    checkpoint = solve(game, shard_config)
    return (
        {k: list(v) for k, v in checkpoint.tables.regrets.items()},
        {k: list(v) for k, v in checkpoint.tables.strategy_sum.items()},
    )


def solve_sharded(game: Game, config: SolverConfig, workers: int,
                  game_spec: dict | None = None) -> Checkpoint:
    """Merge ``workers`` independent sampling shards additively.

    Each shard runs ``config.iterations`` iterations under seed
    ``config.seed + shard_index``; the merge is order-independent.
    """
    if config.traversal != "external_sampling":
        raise ValueError("sharded solving is defined for sampled traversals only")
    shard_seeds = [config.seed + w for w in range(workers)]
    jobs = [(game, config, s) for s in shard_seeds]
    merged = Tables()
    merged.iterations_done = config.iterations
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for regrets, strategy_sum in pool.map(_run_shard, jobs):
            for key, row in regrets.items():
                acc = merged.regret_row(key, len(row))
                acc += np.array(row)
            for key, row in strategy_sum.items():
                acc = merged.strategy_row(key, len(row))
                acc += np.array(row)
    return Checkpoint(config, merged, game_spec or {})
