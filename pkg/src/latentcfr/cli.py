"""Command-line entry points for solving, evaluating, and serving games."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path


from . import evaluate, latent, pipeline, rpssl
from . import werewolf as ww
from .cfr import AveragePolicy, Checkpoint, SolverConfig, solve
from .exploit import TreeIndex, exploitability_profile
from .kuhn import KuhnGame
from .replay import config_from_spec, config_spec, read_replays, write_replays
from .server import PlayService, serve

GAMES = ("rpssl", "kuhn", "werewolf4", "werewolf7")


def _werewolf_config(name: str, k: int) -> ww.GameConfig:
    if name == "werewolf4":
        return ww.four_player_config((k, k, k, k))
    return ww.GameConfig(latent_counts=(k, k, k, k))


def _build_game(name: str, k: int, catalog_path: str | None):
    if name == "rpssl":
        return rpssl.RpsslGame(), {"game": "rpssl", "actions": list(rpssl.ACTIONS)}
    if name == "kuhn":
        return KuhnGame(), {"game": "kuhn"}
    if catalog_path:
        catalogs = latent.load_catalogs(catalog_path)
        counts = latent.latent_counts_from(catalogs)
        base = _werewolf_config(name, 2)
        config = ww.GameConfig(base.num_players, base.role_counts,
                               base.max_rounds, counts)
    else:
        config = _werewolf_config(name, k)
    return ww.WerewolfGame(config), {"game": "werewolf", **config_spec(config)}


def cmd_solve(args) -> int:
    game, spec = _build_game(args.game, args.k, args.catalog)
    config = SolverConfig(iterations=args.iterations, seed=args.seed,
                          depth_limit=args.depth, traversal=args.traversal,
                          plus_variant=args.plus)
    checkpoint = solve(game, config, game_spec=spec)
    checkpoint.save(args.out)
    print(f"solved {args.game}: {args.iterations} iterations, "
          f"{len(checkpoint.tables.regrets)} infosets -> {args.out}")
    return 0


def _game_from_checkpoint(checkpoint: Checkpoint):
    spec = checkpoint.game_spec
    kind = spec.get("game")
    if kind == "rpssl":
        return rpssl.RpsslGame(tuple(spec["actions"]))
    if kind == "kuhn":
        return KuhnGame()
    if kind == "werewolf":
        return ww.WerewolfGame(config_from_spec(spec))
    raise SystemExit(f"checkpoint has unknown game spec {spec!r}")


def cmd_exploitability(args) -> int:
    checkpoint = Checkpoint.load(args.checkpoint)
    game = _game_from_checkpoint(checkpoint)
    tree = TreeIndex(game, node_cap=args.node_cap)
    profile = exploitability_profile(game, checkpoint.policy, tree)
    print(f"nodes: {len(tree)}")
    for player, gain in enumerate(profile["per_player"]):
        print(f"player {player}: best-response gain {gain:.6f} "
              f"(policy value {profile['policy_values'][player]:.6f})")
    print(f"aggregate exploitability: {profile['aggregate']:.6f}")
    return 0


def cmd_rpssl_demo(args) -> int:
    actions = tuple(args.restrict.split(",")) if args.restrict else rpssl.ACTIONS
    game = rpssl.RpsslGame(actions)
    rows = []

    def snapshot(iteration, tables):
        if iteration % args.log_every:
            return
        policy = AveragePolicy(tables.strategy_sum)
        probs = policy.probs(game.infoset_key(game.initial_state()), len(actions))
        full = rpssl.embed_in_full(probs, actions)
        rows.append([iteration] + [f"{p:.6f}" for p in full]
                    + [f"{rpssl.exploitability(full):.6f}"])

    solve(game, SolverConfig(iterations=args.iterations, seed=args.seed),
          callback=snapshot)
    header = ["iteration"] + [f"p_{a.lower()}" for a in rpssl.ACTIONS] + ["exploitability"]
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out)
    writer.writerow(header)
    writer.writerows(rows)
    if args.out:
        out.close()
        print(f"wrote {len(rows)} checkpoints -> {args.out}")
    return 0


def cmd_rpssl_expansion(args) -> int:
    results = pipeline.run_rpssl_expansion(
        subset_sizes=(3, 4, 5), iterations=args.iterations, seed=args.seed)
    for r in results:
        print(f"iteration {r['iteration']}: actions={','.join(r['actions'])} "
              f"full-game exploitability {r['full_game_exploitability']:.4f}")
    if args.out:
        Path(args.out).write_text(json.dumps(results, indent=2))
        print(f"wrote -> {args.out}")
    return 0


def cmd_pipeline(args) -> int:
    base = (ww.four_player_config() if args.game == "werewolf4"
            else ww.GameConfig())
    schedule = (latent.uniform_schedule(args.k_initial) if args.k_initial
                else latent.ClusterSchedule())
    corpus_paths = {}
    for item in args.corpus or ():
        index, _, path = item.partition("=")
        corpus_paths[int(index)] = path
    config = pipeline.PipelineConfig(
        base_config=base,
        schedule=schedule,
        iterations=args.iterations,
        solver_iterations=args.solver_iterations,
        candidates_per_turn=args.candidates,
        games_per_iteration=args.games,
        seed=args.seed,
        out_dir=args.out,
        corpus_paths=corpus_paths,
        measure_exploitability=not args.no_metrics,
    )
    artifacts = pipeline.run_pipeline(config)
    for a in artifacts:
        line = f"iteration {a.iteration}: k={a.metrics['latent_counts']}"
        if a.metrics.get("dataset"):
            line += f" dataset rows={a.metrics['dataset']['rows']}"
        if a.metrics.get("exploitability"):
            line += f" exploitability={a.metrics['exploitability']['aggregate']:.3f}"
        print(line)
    return 0


def cmd_head2head(args) -> int:
    wolf = Checkpoint.load(args.wolf)
    village = Checkpoint.load(args.village)
    counts = tuple(max(a, b) for a, b in zip(
        wolf.game_spec["latent_counts"], village.game_spec["latent_counts"]))
    host = ww.GameConfig(
        num_players=wolf.game_spec["num_players"],
        role_counts=tuple(wolf.game_spec["role_counts"]),
        max_rounds=wolf.game_spec["max_rounds"],
        latent_counts=counts)
    result = evaluate.head_to_head(evaluate.MatchupSpec(
        host, wolf, village, games=args.games, seed=args.seed))
    report = result["report"]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_replays(out_dir / "replays.jsonl", result["replays"])
    (out_dir / "report.json").write_text(json.dumps(report, indent=2))
    with open(out_dir / "report.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["side", "wins", "rate", "wilson_low", "wilson_high"])
        writer.writerow(["werewolves", report["wolf_wins"], report["wolf_win_rate"],
                         *report["wolf_interval"]])
        writer.writerow(["village", report["village_wins"], report["village_win_rate"],
                         *report["village_interval"]])
        writer.writerow(["draws", report["draws"], report["draw_rate"], "", ""])
    print(f"werewolf side: {report['wolf_win_rate']:.3f} "
          f"{tuple(round(x, 3) for x in report['wolf_interval'])}")
    print(f"village side:  {report['village_win_rate']:.3f} "
          f"{tuple(round(x, 3) for x in report['village_interval'])}")
    print(f"draws: {report['draw_rate']:.3f}; replays -> {out_dir}")
    return 0


def cmd_predict(args) -> int:
    replays = read_replays(args.replays)
    checkpoint = Checkpoint.load(args.checkpoint)
    evaluate.ensure_replays_compatible(replays, checkpoint)
    report = evaluate.prediction_report(replays, checkpoint.policy,
                                        max_particles=args.max_particles)
    writer = csv.writer(sys.stdout if not args.out else open(args.out, "w", newline=""))
    writer.writerow(["viewer_side", "target_role", "accuracy", "stderr", "samples"])
    for entry in report["by_side_and_role"].values():
        writer.writerow([entry["viewer_side"], entry["target_role"],
                         f"{entry['accuracy']:.4f}", f"{entry['stderr']:.4f}",
                         entry["samples"]])
    print(f"\nper-prediction accuracy: {report['per_prediction_accuracy']:.4f}")
    print(f"per-game accuracy:       {report['per_game_accuracy']:.4f}")
    return 0


def cmd_serve(args) -> int:
    checkpoint = Checkpoint.load(args.checkpoint)
    game = _game_from_checkpoint(checkpoint)
    if not isinstance(game, ww.WerewolfGame):
        raise SystemExit("the play server hosts Werewolf checkpoints only")
    catalogs = latent.load_catalogs(args.catalog) if args.catalog else None
    service = PlayService(checkpoint, game.config, args.sessions, catalogs)
    httpd = serve(service, host=args.host, port=args.port)
    print(f"serving on http://{args.host}:{httpd.server_address[1]} "
          f"(sessions in {args.sessions})")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="latentcfr",
        description="CFR over cluster-abstracted social-deduction games")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run CFR and write a checkpoint")
    p.add_argument("--game", choices=GAMES, required=True)
    p.add_argument("--iterations", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--traversal", choices=("full", "external_sampling"),
                   default="full")
    p.add_argument("--plus", action="store_true", help="floor regrets at zero")
    p.add_argument("--k", type=int, default=2,
                   help="uniform discussion strategies per role (werewolf games)")
    p.add_argument("--catalog", default=None,
                   help="catalog file fixing per-role strategy counts")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("exploitability", help="exact best-response gains")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--node-cap", type=int, default=2_000_000)
    p.set_defaults(func=cmd_exploitability)

    p = sub.add_parser("rpssl-demo",
                       help="average strategy and exploitability per iteration (CSV)")
    p.add_argument("--iterations", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restrict", default=None,
                   help="comma-separated action subset, e.g. Rock,Paper,Scissors")
    p.add_argument("--log-every", type=int, default=100)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rpssl_demo)

    p = sub.add_parser("rpssl-expansion",
                       help="grow the action subset 3->4->5 and measure "
                            "full-game exploitability")
    p.add_argument("--iterations", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rpssl_expansion)

    p = sub.add_parser("pipeline", help="catalogs -> CFR -> preference data, iterated")
    p.add_argument("--game", choices=("werewolf4", "werewolf7"), default="werewolf4")
    p.add_argument("--iterations", type=int, default=3)
    p.add_argument("--solver-iterations", type=int, default=300)
    p.add_argument("--candidates", type=int, default=3)
    p.add_argument("--games", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k-initial", type=int, default=None,
                   help="uniform initial cluster count (default: role schedule)")
    p.add_argument("--corpus", action="append",
                   help="iteration=path.jsonl (repeatable); synthetic otherwise")
    p.add_argument("--no-metrics", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pipeline)

    p_eval = sub.add_parser("eval", help="evaluation reports")
    eval_sub = p_eval.add_subparsers(dest="eval_command", required=True)

    p = eval_sub.add_parser("head2head", help="checkpoint vs checkpoint win rates")
    p.add_argument("--wolf", required=True, help="checkpoint playing the Werewolf side")
    p.add_argument("--village", required=True)
    p.add_argument("--games", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_head2head)

    p = eval_sub.add_parser("predict", help="role-prediction accuracy over replays")
    p.add_argument("--replays", required=True)
    p.add_argument("--checkpoint", required=True,
                   help="behaviour model for belief likelihoods")
    p.add_argument("--max-particles", type=int, default=20_000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="human-vs-agent play service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--catalog", default=None)
    p.add_argument("--sessions", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8710)
    p.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
