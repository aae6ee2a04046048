"""Iterative training pipeline: catalogs -> solver -> preference data.

One iteration builds per-role discussion catalogs from the corpus pool
(cluster count grows by one per iteration), solves the resulting game with
CFR, plays self-play games that record several candidate discussion
strategies per turn, and exports strict preference pairs ordered by the
candidates' cumulative regrets (lower regret preferred). The language
model that would produce fresh utterances between iterations is outside
this package; each iteration instead ingests a corpus file, real or
synthetic, through the same boundary.

A restricted-action variant of the same loop runs on the five-action
Rock-Paper-Scissors-Spock-Lizard game, growing the action subset by one
per iteration and measuring exploitability against the full game.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

import re

from . import latent, observations, rpssl
from . import werewolf as ww
from .cfr import AveragePolicy, Checkpoint, SolverConfig, Tables, solve
from .efg import GameError
from .exploit import GameTooLarge, TreeIndex, exploitability_profile
from .policy import PolicyAgent, sample_index, sample_without_replacement
from .replay import config_spec

DPO_SCHEMA = "dpo-dataset/1"
DPO_BETA = 0.1  # downstream fine-tuning hyperparameter, recorded as metadata


class EmptyDataset(GameError):
    pass


class CatalogSmallerThanN(UserWarning):
    pass


@dataclass
class TurnRecord:
    game_index: int
    round: int
    speaker: int
    role: int
    infoset_key: str
    prompt: str
    candidates: list[dict]  # {"latent", "exemplar_id", "text"}
    executed: int  # index into candidates


@dataclass
class IterationArtifacts:
    iteration: int
    catalogs: dict[int, latent.LatentCatalog]
    checkpoint: Checkpoint
    turns: list[TurnRecord]
    dataset_path: str | None
    metrics: dict


def _sample_exemplar(catalog: latent.LatentCatalog, cluster: int,
                     rng: np.random.Generator) -> dict:
    pool = catalog.exemplars[cluster]
    pick = pool[int(rng.integers(len(pool)))]
    return {"latent": cluster, "exemplar_id": pick["id"], "text": pick["text"]}


def collect_trajectories(
    config: ww.GameConfig,
    policy: AveragePolicy,
    catalogs: dict[int, latent.LatentCatalog],
    candidates_per_turn: int = 3,
    games: int = 1000,
    seed: int = 0,
) -> list[TurnRecord]:
    """Self-play games recording candidate discussion strategies per turn.

    Every discussion turn draws ``candidates_per_turn`` distinct strategies
    (policy-weighted, without replacement), executes one uniformly at
    random, and records the infoset plus the rendered prompt. All other
    decisions sample the policy directly.
    """
    if candidates_per_turn < 2:
        raise ValueError("need at least two candidates per turn")
    game = ww.WerewolfGame(config)
    agent = PolicyAgent(policy)
    records: list[TurnRecord] = []
    clipped = set()
    for index in range(games):
        rng = np.random.default_rng(seed * 1_000_003 + index)
        state = game.initial_state()
        spoken: dict[tuple[int, int], str] = {}
        while not game.node_kind(state).is_terminal:
            kind = game.node_kind(state)
            if kind.is_chance:
                outcomes = game.chance_outcomes(state)
                probs = np.array([p for _, p in outcomes])
                state = game.step(state, outcomes[sample_index(rng, probs)][0])
                continue
            if state.phase != ww.DAY_SPEAK:
                state = game.step(state, agent.act(game, state, rng))
                continue
            speaker = kind.player
            role = state.roles[speaker]
            catalog = catalogs[role]
            n_candidates = candidates_per_turn
            if catalog.k < n_candidates:
                if role not in clipped:
                    clipped.add(role)
                    warnings.warn(
                        f"{ww.ROLE_NAMES[role]} catalog has {catalog.k} strategies; "
                        f"clipping candidates to {catalog.k}", CatalogSmallerThanN)
                n_candidates = catalog.k
            key = game.infoset_key(state)
            probs = policy.probs(key, catalog.k)
            picks = sample_without_replacement(rng, probs, n_candidates)
            candidates = [_sample_exemplar(catalog, c, rng) for c in picks]
            executed = int(rng.integers(n_candidates))
            prompt = observations.render_text_observation(state, speaker, spoken)
            records.append(TurnRecord(
                game_index=index, round=state.round, speaker=speaker, role=role,
                infoset_key=key, prompt=prompt, candidates=candidates,
                executed=executed))
            chosen = candidates[executed]
            spoken[(state.round, speaker)] = chosen["text"]
            state = game.step(state, chosen["latent"])
    return records


def export_preferences(
    turns: list[TurnRecord],
    regrets: dict[str, np.ndarray],
    path,
    iteration: int,
    best_vs_rest: bool = False,
) -> dict:
    """Write strict preference pairs; a candidate with lower cumulative
    regret at the recorded infoset is preferred. Ties emit nothing."""
    rows = 0
    skipped = 0
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "format": DPO_SCHEMA,
            "iteration": iteration,
            "dpo_beta": DPO_BETA,
            "best_vs_rest": best_vs_rest,
        }
        fh.write(json.dumps(header) + "\n")
        for turn in turns:
            row = regrets.get(turn.infoset_key)
            if row is None:
                skipped += 1
                continue
            scored = [
                (float(row[c["latent"]]), i)
                for i, c in enumerate(turn.candidates)
            ]
            scored.sort()
            digest = hashlib.sha256(turn.infoset_key.encode()).hexdigest()[:16]

            def emit(lo, hi):
                nonlocal rows
                chosen = turn.candidates[lo]
                rejected = turn.candidates[hi]
                fh.write(json.dumps({
                    "prompt": turn.prompt,
                    "chosen_text": chosen["text"],
                    "rejected_text": rejected["text"],
                    "chosen_latent": chosen["latent"],
                    "rejected_latent": rejected["latent"],
                    "chosen_regret": float(row[chosen["latent"]]),
                    "rejected_regret": float(row[rejected["latent"]]),
                    "infoset_digest": digest,
                    "iteration": iteration,
                }) + "\n")
                rows += 1

            if best_vs_rest:
                best_regret, best_index = scored[0]
                for regret, index in scored[1:]:
                    if regret > best_regret:
                        emit(best_index, index)
            else:
                for a in range(len(scored)):
                    for b in range(a + 1, len(scored)):
                        if scored[a][0] < scored[b][0]:
                            emit(scored[a][1], scored[b][1])
    if rows == 0:
        raise EmptyDataset(
            f"no preference rows survived ({skipped} turns lacked regret entries)")
    return {"rows": rows, "skipped_turns": skipped}


def dataset_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


_ROLE_HEADER = re.compile(r"^me\d+\|role(\d)")
_TALK_MARKER = re.compile(r"\|@t\d+$")


def carry_tables(tables: Tables, latent_counts: tuple[int, ...]) -> Tables:
    """Seed a new solve from an earlier iteration's tables.

    Rows for discussion decisions are zero-padded out to the grown catalog
    (new strategies start with no regret and no average weight); all other
    rows transfer unchanged. Keys never clash across catalog sizes for
    night and vote decisions, so resuming is exact there.
    """
    out = Tables()

    def padded(key: str, row):
        if _TALK_MARKER.search(key):
            role = int(_ROLE_HEADER.match(key).group(1))
            k = latent_counts[role]
            if k > len(row):
                grown = np.zeros(k)
                grown[: len(row)] = row
                return grown
        return row.copy()

    for key, row in tables.regrets.items():
        out.regrets[key] = padded(key, row)
    for key, row in tables.strategy_sum.items():
        out.strategy_sum[key] = padded(key, row)
    return out


# ---------------------------------------------------------------------------
# full pipeline over the Werewolf game


@dataclass
class PipelineConfig:
    base_config: ww.GameConfig = field(default_factory=ww.four_player_config)
    schedule: latent.ClusterSchedule = field(default_factory=latent.ClusterSchedule)
    iterations: int = 3
    # one budget for every pass, or a per-iteration sequence (larger
    # abstractions usually warrant more traversals)
    solver_iterations: int | tuple[int, ...] = 300
    traversal: str = "external_sampling"
    # resume each solve from the previous iteration's tables (padded for the
    # grown catalog) so later iterations compound training
    warm_start: bool = True
    candidates_per_turn: int = 3
    games_per_iteration: int = 1000
    seed: int = 0
    exemplars_per_cluster: int = latent.DEFAULT_EXEMPLARS
    measure_exploitability: bool = True
    node_cap: int = 2_000_000
    out_dir: str | None = None
    # synthetic corpus settings, used when no corpus files are supplied
    corpus_paths: dict[int, str] = field(default_factory=dict)
    synthetic_per_role: int = 60
    synthetic_blobs: int = 6
    synthetic_dim: int = 12

    def present_roles(self) -> tuple[int, ...]:
        return tuple(r for r in range(4) if self.base_config.role_counts[r] > 0)


def corpus_for_iteration(config: PipelineConfig, iteration: int) -> list:
    """Union of corpora for iterations up to the given one."""
    records = []
    for i in range(1, iteration + 1):
        if i in config.corpus_paths:
            records.extend(latent.ingest_corpus(config.corpus_paths[i]))
        else:
            records.extend(latent.synthetic_corpus(
                config.present_roles(), i,
                per_role=config.synthetic_per_role,
                blobs_per_role=config.synthetic_blobs,
                dim=config.synthetic_dim,
                seed=config.seed * 7919 + i))
    return records


def run_iteration(
    config: PipelineConfig,
    iteration: int,
    prior: IterationArtifacts | None = None,
    records=None,
) -> IterationArtifacts:
    """One pipeline pass: catalogs, solve, collect, export, measure."""
    records = records if records is not None else corpus_for_iteration(config, iteration)
    catalogs = latent.build_catalogs(
        records, config.schedule, iteration, seed=config.seed,
        exemplars_per_cluster=config.exemplars_per_cluster,
        roles=config.present_roles())
    counts = latent.latent_counts_from(catalogs)
    game_config = ww.GameConfig(
        num_players=config.base_config.num_players,
        role_counts=config.base_config.role_counts,
        max_rounds=config.base_config.max_rounds,
        latent_counts=counts)
    game = ww.WerewolfGame(game_config)
    budget = config.solver_iterations
    if not isinstance(budget, int):
        budget = budget[min(iteration, len(budget)) - 1]
    solver_config = SolverConfig(
        iterations=budget,
        seed=config.seed + iteration,
        traversal=config.traversal)
    tables = None
    if config.warm_start and prior is not None:
        tables = carry_tables(prior.checkpoint.tables, counts)
    checkpoint = solve(game, solver_config, game_spec={
        "game": "werewolf", **config_spec(game_config), "iteration": iteration},
        tables=tables)
    turns = collect_trajectories(
        game_config, checkpoint.policy, catalogs,
        candidates_per_turn=config.candidates_per_turn,
        games=config.games_per_iteration,
        seed=config.seed + 31 * iteration)

    out_dir = None
    dataset_path = None
    if config.out_dir is not None:
        out_dir = Path(config.out_dir) / f"iter_{iteration}"
        out_dir.mkdir(parents=True, exist_ok=True)
        latent.save_catalogs(out_dir / "catalogs.json", catalogs)
        checkpoint.save(out_dir / "checkpoint.json.gz")
        dataset_path = str(out_dir / "dataset.jsonl")
    else:
        dataset_path = None

    metrics: dict = {"iteration": iteration, "latent_counts": list(counts)}
    if dataset_path is not None:
        stats = export_preferences(turns, checkpoint.tables.regrets,
                                   dataset_path, iteration)
        metrics["dataset"] = stats | {"digest": dataset_digest(dataset_path)}
    if config.measure_exploitability:
        try:
            tree = TreeIndex(game, node_cap=config.node_cap)
            metrics["exploitability"] = exploitability_profile(
                game, checkpoint.policy, tree)
        except GameTooLarge:
            metrics["exploitability"] = None
    if out_dir is not None:
        with open(out_dir / "metrics.json", "w", encoding="utf-8") as fh:
            json.dump(metrics, fh, indent=2)
    return IterationArtifacts(iteration, catalogs, checkpoint, turns,
                              dataset_path, metrics)


def run_pipeline(config: PipelineConfig) -> list[IterationArtifacts]:
    artifacts = []
    prior = None
    for iteration in range(1, config.iterations + 1):
        prior = run_iteration(config, iteration, prior=prior)
        artifacts.append(prior)
    return artifacts


# ---------------------------------------------------------------------------
# restricted-action expansion on the five-action game


def run_rpssl_expansion(
    subset_sizes=(3, 4, 5),
    iterations: int = 10_000,
    seed: int = 0,
    log_every: int | None = None,
) -> list[dict]:
    """Grow the action subset by one per iteration; report exploitability
    of each learned strategy measured against the full five-action game."""
    results = []
    for index, size in enumerate(subset_sizes, start=1):
        actions = rpssl.ACTIONS[:size]
        game = rpssl.RpsslGame(actions)
        history: list[dict] = []

        def snapshot(iteration, tables):
            if log_every is None or iteration % log_every:
                return
            policy = AveragePolicy(tables.strategy_sum)
            key = game.infoset_key(game.initial_state())
            probs = policy.probs(key, len(actions))
            full = rpssl.embed_in_full(probs, actions)
            history.append({
                "iteration": iteration,
                "strategy": full.tolist(),
                "full_game_exploitability": rpssl.exploitability(full),
            })

        checkpoint = solve(game, SolverConfig(iterations=iterations, seed=seed + index),
                           callback=snapshot if log_every else None)
        key = game.infoset_key(game.initial_state())
        probs = checkpoint.policy.probs(key, len(actions))
        full = rpssl.embed_in_full(probs, actions)
        results.append({
            "iteration": index,
            "actions": list(actions),
            "strategy_full": full.tolist(),
            "restricted_exploitability": rpssl.exploitability(probs, actions),
            "full_game_exploitability": rpssl.exploitability(full),
            "history": history,
        })
    return results
