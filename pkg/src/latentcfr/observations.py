"""Player-view encodings of a Werewolf state.

Two formats: a fixed-length numeric vector (one-hot groups for id, role,
phase, per-round secret action / announcement / vote choices) and a plain
text transcript suitable for prompts and the play UI. Both show only what
the viewer is allowed to know: their own role and secret actions, the
Werewolf channel if they are a Werewolf, and everything public.
"""

from __future__ import annotations

import numpy as np

from . import werewolf as ww
from .werewolf import GameState, UnknownViewer


def vector_length(config: ww.GameConfig) -> int:
    n = config.num_players
    return n + 4 + 1 + 3 + n + config.max_rounds * (n + n + n * n)


def encode_observation(state: GameState, viewer: int) -> np.ndarray:
    """Numeric view for ``viewer``; length 211 for the seven-player game."""
    config = state.config
    n = config.num_players
    if state.roles is None or not 0 <= viewer < n:
        raise UnknownViewer(f"viewer {viewer} was not dealt into this game")
    out = np.zeros(vector_length(config))
    out[viewer] = 1.0
    base = n
    out[base + state.roles[viewer]] = 1.0
    base += 4
    out[base] = float(state.round)
    base += 1
    phase_slot = {
        ww.NIGHT_PROPOSE: 0, ww.NIGHT_KILL: 0, ww.NIGHT_SEER: 0, ww.NIGHT_DOCTOR: 0,
        ww.DAY_SPEAK: 1,
        ww.DAY_VOTE: 2, ww.TIE: 2,
    }.get(state.phase)
    if phase_slot is not None:
        out[base + phase_slot] = 1.0
    base += 3
    for p in range(n):
        out[base + p] = 1.0 if state.alive[p] else 0.0
    base += n

    for r in range(config.max_rounds):
        # viewer's own secret action that round
        if r < len(state.nights):
            rec = state.nights[r]
            target = -1
            if rec.proposer == viewer:
                target = rec.proposal
            if rec.killer == viewer:
                target = rec.kill
            if rec.seer == viewer:
                target = rec.seer_target
            if rec.doctor == viewer:
                target = rec.doctor_target
            if target >= 0:
                out[base + target] = 1.0
        base += n
        if r < len(state.announcements) and state.announcements[r] >= 0:
            out[base + state.announcements[r]] = 1.0
        base += n
        if r < len(state.votes):
            profile = state.votes[r]
            for p in range(n):
                if profile[p] >= 0:
                    out[base + p * n + profile[p]] = 1.0
        base += n * n
    return out


# ---------------------------------------------------------------------------
# text transcript


def _players(ids) -> str:
    return ", ".join(f"player_{p}" for p in ids)


def _phase_description(state: GameState) -> str:
    if state.phase == ww.END:
        return "game over"
    if state.phase in ww.NIGHT_PHASES:
        return f"night {state.round}"
    if state.phase == ww.DAY_SPEAK:
        return f"day {state.round} discussion"
    return f"day {state.round} voting"


def _night_lines(state: GameState, viewer: int, r: int) -> list[str]:
    rec = state.nights[r]
    role = state.roles[viewer]
    lines = []
    if role == ww.WEREWOLF:
        if rec.proposer >= 0:
            who = "you" if rec.proposer == viewer else "your teammate"
            lines.append(f"- night {r + 1}: {who} proposed to kill player_{rec.proposal}.")
        if rec.killer >= 0:
            who = "you" if rec.killer == viewer else "your teammate"
            lines.append(f"- night {r + 1}: {who} chose to kill player_{rec.kill}.")
    elif role == ww.SEER and rec.seer == viewer:
        verdict = "is a Werewolf" if rec.seer_saw_wolf else "is not a Werewolf"
        lines.append(
            f"- night {r + 1}: you chose to see player_{rec.seer_target}: "
            f"player_{rec.seer_target} {verdict}.")
    elif role == ww.DOCTOR and rec.doctor == viewer:
        lines.append(f"- night {r + 1}: you chose to save player_{rec.doctor_target}.")
    return lines


def _vote_lines(state: GameState, r: int) -> list[str]:
    profile = state.votes[r]
    eliminated = state.eliminated[r] if r < len(state.eliminated) else None
    if eliminated is None:
        return []
    if eliminated == -1:
        lines = [f"- day {r + 1} voting result: no player was eliminated."]
    else:
        lines = [f"- day {r + 1} voting result: player_{eliminated} had the most votes "
                 "and was eliminated."]
    targets = sorted({c for c in profile if c >= 0})
    for t in targets:
        voters = [p for p, c in enumerate(profile) if c == t]
        lines.append(f"  - voted for player_{t}: {_players(voters)}.")
    abstained = [p for p, c in enumerate(profile) if c == -1]
    if abstained:
        lines.append(f"  - choose not to vote: {_players(abstained)}.")
    return lines


def _action_prompt(state: GameState, viewer: int) -> list[str]:
    kind = ww.node_kind(state)
    if not kind.is_decision or kind.player != viewer:
        return []
    role = ww.ROLE_NAMES[state.roles[viewer]]
    article = f"player_{viewer} and " + ("the " if role in ("Seer", "Doctor") else "a ") + role
    menu = ", ".join(ww.legal_actions(state))
    if state.phase == ww.DAY_SPEAK:
        return [f"Now it is day {state.round} discussion phase and it is your turn to speak."]
    if state.phase == ww.DAY_VOTE:
        return [f"Now it is day {state.round} voting phase and you should vote for one "
                f"player or do not vote. As {article}, you should choose from the "
                f"following actions: {menu}."]
    verb = {
        ww.NIGHT_PROPOSE: "propose one player to kill",
        ww.NIGHT_KILL: "choose one player to kill",
        ww.NIGHT_SEER: "choose one player to see",
        ww.NIGHT_DOCTOR: "choose one player to save",
    }[state.phase]
    return [f"Now it is night {state.round} round and you should {verb}. As {article}, "
            f"you should choose from the following actions: {menu}."]


def render_text_observation(
    state: GameState,
    viewer: int,
    utterances: dict[tuple[int, int], str] | None = None,
) -> str:
    """Deterministic transcript of everything ``viewer`` has observed.

    ``utterances`` optionally maps (round, speaker) to display text for the
    abstract discussion actions; without it a neutral placeholder is shown.
    """
    config = state.config
    if state.roles is None or not 0 <= viewer < config.num_players:
        raise UnknownViewer(f"viewer {viewer} was not dealt into this game")
    role = state.roles[viewer]
    lines = [
        "Basic Information:",
        f"- you are player_{viewer}, your role is {ww.ROLE_NAMES[role]}.",
    ]
    if role == ww.WEREWOLF and config.role_counts[ww.WEREWOLF] > 1:
        mates = [p for p in range(config.num_players)
                 if p != viewer and state.roles[p] == ww.WEREWOLF]
        lines.append(f"- your teammate is {_players(mates)}.")
    lines.append(f"- current round and phase: {_phase_description(state)}.")
    lines.append(f"- remaining players: {_players(state.alive_players())}.")

    for r in range(len(state.nights)):
        section = [f"Round {r + 1}:"]
        section += _night_lines(state, viewer, r)
        if r < len(state.announcements):
            victim = state.announcements[r]
            text = (f"player_{victim} was killed last night"
                    if victim >= 0 else "no player was killed last night")
            section.append(f"- day {r + 1} announcement: {text}.")
        if r < len(state.discussion) and state.discussion[r]:
            section.append(f"- day {r + 1} discussion:")
            for speaker, latent in state.discussion[r]:
                said = None if utterances is None else utterances.get((r + 1, speaker))
                text = said if said is not None else f"[discussion strategy {latent}]"
                who = "you" if speaker == viewer else f"player_{speaker}"
                section.append(f"  - {who} said: {text}")
        if r < len(state.votes):
            section += _vote_lines(state, r)
        if len(section) > 1:
            lines += section

    if state.phase == ww.END:
        result = {
            ww.WOLF_WIN: "The Werewolves win the game.",
            ww.VILLAGE_WIN: "The Villagers win the game.",
            ww.DRAW: "The game ends in a draw.",
        }[state.winner]
        lines.append(result)
    else:
        lines += _action_prompt(state, viewer)
    return "\n".join(lines)
