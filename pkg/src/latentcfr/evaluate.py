"""Self-play evaluation: head-to-head win rates and prediction accuracy.

A matchup assigns one checkpoint to the Werewolf side and one to the
Village side; whoever a seat's dealt role belongs to controls that seat.
Checkpoints trained with smaller discussion catalogs than the host game
play through index folding (see ``policy.FoldedPolicyAgent``); anything
structurally incompatible (player count, role layout, larger catalogs
than the host) is rejected. Win rates come with 95% Wilson score
intervals; round-cap draws are reported as their own outcome class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import belief as bf
from . import werewolf as ww
from .cfr import Checkpoint
from .efg import GameError
from .policy import Agent, FoldedPolicyAgent, PolicyAgent, sample_index
from .replay import Replay, config_spec


class IncompatibleCheckpoints(GameError):
    pass


class MissingPrivateInfo(GameError):
    pass


Z95 = 1.959963984540054


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """95% score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def agent_for(checkpoint: Checkpoint, host_config: ww.GameConfig) -> Agent:
    """Wrap a checkpoint for play inside ``host_config``'s game."""
    spec = checkpoint.game_spec
    if spec.get("game") != "werewolf":
        raise IncompatibleCheckpoints(f"checkpoint solves {spec.get('game')!r}")
    if (spec.get("num_players") != host_config.num_players
            or tuple(spec.get("role_counts", ())) != host_config.role_counts
            or spec.get("max_rounds") != host_config.max_rounds):
        raise IncompatibleCheckpoints(
            "checkpoint was trained on a different game layout")
    own_counts = tuple(spec.get("latent_counts", ()))
    if own_counts == host_config.latent_counts:
        return PolicyAgent(checkpoint.policy)
    if any(own > host for own, host in zip(own_counts, host_config.latent_counts)):
        raise IncompatibleCheckpoints(
            f"checkpoint catalogs {own_counts} exceed the host game's "
            f"{host_config.latent_counts}")
    return FoldedPolicyAgent(checkpoint.policy, own_counts)


@dataclass
class MatchupSpec:
    config: ww.GameConfig
    wolf_checkpoint: Checkpoint
    village_checkpoint: Checkpoint
    games: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.games < 1:
            raise ValueError("games must be >= 1")


def _play_sided_game(config: ww.GameConfig, wolf_agent: Agent,
                     village_agent: Agent, seed: int) -> Replay:
    game = ww.WerewolfGame(config)
    rng = np.random.default_rng(seed)
    state = game.initial_state()
    actions: list[tuple[int, str, int]] = []
    while not game.node_kind(state).is_terminal:
        kind = game.node_kind(state)
        if kind.is_chance:
            outcomes = game.chance_outcomes(state)
            probs = np.array([p for _, p in outcomes])
            action = outcomes[sample_index(rng, probs)][0]
            actions.append((-1, state.phase, action))
        else:
            actor = kind.player
            agent = wolf_agent if state.roles[actor] == ww.WEREWOLF else village_agent
            action = agent.act(game, state, rng)
            actions.append((actor, state.phase, action))
        state = game.step(state, action)
    return Replay(config, seed, state.roles, actions, state.ledger,
                  ww.terminal_utilities(state), state.winner)


def head_to_head(spec: MatchupSpec) -> dict:
    """Play ``spec.games`` games; returns rates, intervals, and replays."""
    wolf_agent = agent_for(spec.wolf_checkpoint, spec.config)
    village_agent = agent_for(spec.village_checkpoint, spec.config)
    counts = {ww.WOLF_WIN: 0, ww.VILLAGE_WIN: 0, ww.DRAW: 0}
    utility_by_role = {r: [] for r in range(4)}
    replays = []
    for index in range(spec.games):
        replay = _play_sided_game(spec.config, wolf_agent, village_agent,
                                  spec.seed * 1_000_003 + index)
        counts[replay.winner] += 1
        for player, role in enumerate(replay.assignment):
            utility_by_role[role].append(replay.utilities[player])
        replays.append(replay)
    games = spec.games
    report = {
        "games": games,
        "wolf_wins": counts[ww.WOLF_WIN],
        "village_wins": counts[ww.VILLAGE_WIN],
        "draws": counts[ww.DRAW],
        "wolf_win_rate": counts[ww.WOLF_WIN] / games,
        "village_win_rate": counts[ww.VILLAGE_WIN] / games,
        "draw_rate": counts[ww.DRAW] / games,
        "wolf_interval": wilson_interval(counts[ww.WOLF_WIN], games),
        "village_interval": wilson_interval(counts[ww.VILLAGE_WIN], games),
        "mean_utility_by_role": {
            ww.ROLE_NAMES[r]: (float(np.mean(v)) if v else None)
            for r, v in utility_by_role.items()
        },
    }
    return {"report": report, "replays": replays}


def cross_paired_rates(config: ww.GameConfig, checkpoint_a: Checkpoint,
                       checkpoint_b: Checkpoint, games: int, seed: int) -> dict:
    """Symmetric comparison: each checkpoint plays both sides, half the
    games each. Reports each checkpoint's share of decided-plus-drawn games
    it won, with Wilson intervals."""
    half = games // 2
    first = head_to_head(MatchupSpec(config, checkpoint_a, checkpoint_b,
                                     games=half, seed=seed))["report"]
    second = head_to_head(MatchupSpec(config, checkpoint_b, checkpoint_a,
                                      games=games - half, seed=seed + 1))["report"]
    a_wins = first["wolf_wins"] + second["village_wins"]
    b_wins = first["village_wins"] + second["wolf_wins"]
    total = games
    return {
        "games": total,
        "a_wins": a_wins,
        "b_wins": b_wins,
        "draws": first["draws"] + second["draws"],
        "a_rate": a_wins / total,
        "b_rate": b_wins / total,
        "a_interval": wilson_interval(a_wins, total),
        "b_interval": wilson_interval(b_wins, total),
        "as_wolves": first,
        "as_village": second,
    }


def ensure_replays_compatible(replays, checkpoint: Checkpoint) -> None:
    """Reject replays recorded under a different game layout than the
    checkpoint's (for example four-player logs against a seven-player model)."""
    spec = checkpoint.game_spec
    for index, r in enumerate(replays):
        if (r.config.num_players != spec.get("num_players")
                or tuple(r.config.role_counts) != tuple(spec.get("role_counts", ()))):
            raise IncompatibleCheckpoints(
                f"replay {index} was recorded in a "
                f"{r.config.num_players}-player game; the checkpoint expects "
                f"{spec.get('num_players')} players")


# ---------------------------------------------------------------------------
# prediction accuracy over replays


def prediction_report(replays, policies, max_particles: int | None = 20_000,
                      annotate: bool = False) -> dict:
    """Pre-voting role-prediction accuracy per viewer side and target role.

    For every replay, every alive viewer's belief is advanced through the
    public record; just before each day's votes the viewer's most-probable
    role per alive target is scored against the truth. ``policies`` is the
    behaviour model used for likelihoods; off-model events degrade to a
    hard-constraint reset rather than failing.
    """
    samples: dict[tuple[int, int], list[int]] = {}
    per_game_scores: list[float] = []
    for replay in replays:
        config = replay.config
        assignment = replay.assignment
        if assignment is None:
            raise MissingPrivateInfo("replay lacks the role assignment")
        streams = bf.events_for_viewers(config, assignment,
                                        replay.post_deal_actions())
        game_flags: list[int] = []
        annotations: list[dict] = []
        for viewer in range(config.num_players):
            mates = ()
            if assignment[viewer] == ww.WEREWOLF:
                mates = tuple(p for p in range(config.num_players)
                              if p != viewer and assignment[p] == ww.WEREWOLF)
            belief = bf.init_belief(config, viewer, assignment[viewer], mates)
            for event in streams[viewer]:
                if isinstance(event, bf.VoteResult):
                    state = belief.particles[0][0]
                    if state.alive[viewer]:
                        guesses = bf.predict(belief)
                        for target in range(config.num_players):
                            if target == viewer or not state.alive[target]:
                                continue
                            flag = int(guesses["argmax"][target] == assignment[target])
                            side_key = (ww.side(assignment[viewer]),
                                        assignment[target])
                            samples.setdefault(side_key, []).append(flag)
                            game_flags.append(flag)
                        if annotate:
                            annotations.append({
                                "round": state.round,
                                "viewer": viewer,
                                "marginals": guesses["marginals"].tolist(),
                                "argmax": guesses["argmax"],
                            })
                belief = bf.update(belief, event, policies, on_zero="reset",
                                   max_particles=max_particles)
        if annotate:
            replay.predictions = annotations
        if game_flags:
            per_game_scores.append(sum(game_flags) / len(game_flags))

    table = {}
    for (viewer_side, target_role), flags in sorted(samples.items()):
        n = len(flags)
        acc = sum(flags) / n
        table[(viewer_side, target_role)] = {
            "viewer_side": "Werewolf" if viewer_side == 0 else "Village",
            "target_role": ww.ROLE_NAMES[target_role],
            "accuracy": acc,
            "stderr": math.sqrt(acc * (1 - acc) / n) if n else float("nan"),
            "samples": n,
        }
    return {
        "by_side_and_role": table,
        "per_prediction_accuracy": (
            float(np.mean([f for flags in samples.values() for f in flags]))
            if samples else float("nan")),
        "per_game_accuracy": float(np.mean(per_game_scores)) if per_game_scores else float("nan"),
        "games": len(replays),
    }
