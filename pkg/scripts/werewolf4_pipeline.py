#!/usr/bin/env python3
"""Run the iterative pipeline on the four-player game with a synthetic
corpus, then compare the first and last checkpoints head-to-head."""

import argparse

from latentcfr import evaluate, latent, pipeline
from latentcfr import werewolf as ww


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iterations", type=int, default=3)
    parser.add_argument("--solver-iterations", type=int, nargs="+",
                        default=[300, 600, 900])
    parser.add_argument("--k-initial", type=int, default=2)
    parser.add_argument("--games", type=int, default=2000,
                        help="evaluation games for the checkpoint comparison")
    parser.add_argument("--collect-games", type=int, default=50)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--out", default=None, help="artifact directory")
    args = parser.parse_args()

    budgets = args.solver_iterations
    config = pipeline.PipelineConfig(
        base_config=ww.four_player_config(),
        schedule=latent.uniform_schedule(args.k_initial),
        iterations=args.iterations,
        solver_iterations=tuple(budgets) if len(budgets) > 1 else budgets[0],
        candidates_per_turn=2,
        games_per_iteration=args.collect_games,
        seed=args.seed,
        out_dir=args.out,
        measure_exploitability=False,
    )
    artifacts = pipeline.run_pipeline(config)
    for a in artifacts:
        print(f"iteration {a.iteration}: catalogs k={a.metrics['latent_counts']}, "
              f"{len(a.turns)} discussion turns collected")

    first, last = artifacts[0], artifacts[-1]
    host = ww.four_player_config(tuple(last.checkpoint.game_spec["latent_counts"]))
    result = evaluate.cross_paired_rates(
        host, last.checkpoint, first.checkpoint, games=args.games,
        seed=args.seed * 13)
    print(f"\nlast iteration:  win share {result['a_rate']:.3f} "
          f"Wilson {tuple(round(x, 3) for x in result['a_interval'])}")
    print(f"first iteration: win share {result['b_rate']:.3f} "
          f"Wilson {tuple(round(x, 3) for x in result['b_interval'])}")
    print(f"draws: {result['draws']} of {result['games']}")


if __name__ == "__main__":
    main()
