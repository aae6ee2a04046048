#!/usr/bin/env python3
"""Train a quick checkpoint (or load one), build discussion catalogs, and
serve the human-vs-agent play API plus the static web client."""

import argparse
from pathlib import Path

from latentcfr import cfr, latent, replay, server
from latentcfr import werewolf as ww


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--checkpoint", default=None,
                        help="existing checkpoint; trains a fresh one if absent")
    parser.add_argument("--train-iterations", type=int, default=500)
    parser.add_argument("--players", type=int, choices=(4, 7), default=7)
    parser.add_argument("--sessions", default="./play-sessions")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8710)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if args.checkpoint:
        checkpoint = cfr.Checkpoint.load(args.checkpoint)
        config = replay.config_from_spec(checkpoint.game_spec)
    else:
        config = ww.GameConfig() if args.players == 7 else ww.four_player_config()
        game = ww.WerewolfGame(config)
        print(f"training a fresh checkpoint ({args.train_iterations} sampled iterations)...")
        checkpoint = cfr.solve(
            game,
            cfr.SolverConfig(iterations=args.train_iterations, seed=args.seed,
                             traversal="external_sampling"),
            game_spec={"game": "werewolf", **replay.config_spec(config)})

    roles = tuple(r for r in range(4) if config.role_counts[r] > 0)
    records = latent.synthetic_corpus(roles, 1, per_role=40, blobs_per_role=5,
                                      dim=12, seed=args.seed)
    schedule = latent.ClusterSchedule(tuple(
        config.latent_counts[r] for r in range(4)))
    catalogs = latent.build_catalogs(records, schedule, 1, seed=args.seed,
                                     roles=roles)

    service = server.PlayService(checkpoint, config, args.sessions, catalogs)
    httpd = server.serve(service, host=args.host, port=args.port)
    ui = Path(__file__).resolve().parents[1] / "frontend" / "index.html"
    print(f"API on http://{args.host}:{httpd.server_address[1]}")
    print(f"web client: open {ui} (serve it from the same origin or a proxy)")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        print("bye")


if __name__ == "__main__":
    main()
