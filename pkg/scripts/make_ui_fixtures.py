#!/usr/bin/env python3
"""Capture deterministic server views as fixtures for the web client tests."""

import json
import sys
from pathlib import Path

from latentcfr import cfr, latent, replay, server
from latentcfr import werewolf as ww


def main(out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = ww.GameConfig()
    game = ww.WerewolfGame(config)
    checkpoint = cfr.solve(
        game,
        cfr.SolverConfig(iterations=3, seed=0, traversal="external_sampling"),
        game_spec={"game": "werewolf", **replay.config_spec(config)})
    records = latent.synthetic_corpus(
        (ww.WEREWOLF, ww.SEER, ww.DOCTOR, ww.VILLAGER), 1,
        per_role=30, blobs_per_role=4, dim=8, seed=0)
    catalogs = latent.build_catalogs(records, latent.ClusterSchedule(), 1, seed=0)
    service = server.PlayService(checkpoint, config, out / "_sessions", catalogs)

    captured = {}
    step = 0
    for seed in range(40):
        view = service.create_session(human_seat=seed % 7, seed=seed)
        while True:
            session = service.sessions[view["session_id"]]
            phase = session.state.phase
            if view["status"] == server.FINISHED:
                captured.setdefault("finished", view)
                break
            if phase in ww.NIGHT_PHASES:
                captured.setdefault("awaiting_night", view)
            elif phase == ww.DAY_SPEAK:
                captured.setdefault("awaiting_discussion", view)
            elif phase == ww.DAY_VOTE:
                captured.setdefault("awaiting_vote", view)
            view = service.submit_action(view["session_id"], 0, f"fixture-{step}")
            step += 1
        if len(captured) == 4:
            break

    if len(captured) < 4:
        raise SystemExit(f"only captured {sorted(captured)}")
    for name, view in captured.items():
        (out / f"{name}.json").write_text(json.dumps(view, indent=2))
        print(f"wrote {name}.json (status {view['status']})")
    for leftover in (out / "_sessions").glob("*.json"):
        leftover.unlink()
    (out / "_sessions").rmdir()


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "frontend/tests/fixtures")
