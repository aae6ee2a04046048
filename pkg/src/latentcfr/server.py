"""Session service for human-vs-agent play over a local HTTP socket.

One human occupies a seat; every other seat samples its moves from a
checkpoint policy. The engine advances automatically until the human must
act or the game ends, so a session is always either awaiting the human,
or finished. Views contain only what the human seat may know: the
rendered transcript, the public log, and (when it is the human's turn)
the action menu with exemplar utterances for discussion strategies.

Endpoints (JSON bodies, schema version ``play-session/1``):
    POST /sessions                     create a session
    GET  /sessions/{id}                fetch the human's current view
    POST /sessions/{id}/actions        submit {"action": i, "token": "..."}

Sessions persist to a directory; a restarted server serves byte-identical
views for existing sessions. Duplicate submissions with the same token
return the stored result without advancing the game.
"""

from __future__ import annotations

import json
import re
import secrets
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from . import latent as latent_mod
from . import observations
from . import werewolf as ww
from .cfr import Checkpoint
from .efg import GameError, IllegalAction
from .evaluate import agent_for
from .policy import Agent, sample_index
from .replay import config_from_spec, config_spec

SCHEMA = "play-session/1"

AWAITING_HUMAN = "AwaitingHuman"
FINISHED = "Finished"


class SessionError(GameError):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code


def unknown_session(session_id: str) -> SessionError:
    return SessionError(404, "UnknownSession", f"no session {session_id!r}")


@dataclass
class Session:
    session_id: str
    config: ww.GameConfig
    human_seat: int
    seed: int
    state: ww.GameState
    rng_calls: int = 0
    status: str = AWAITING_HUMAN
    utterances: dict = field(default_factory=dict)  # (round, speaker) -> text
    tokens: dict = field(default_factory=dict)  # idempotency token -> view
    menu: list = field(default_factory=list)


class SessionStore:
    """Disk-backed sessions; single-writer per session via a lock map."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def path(self, session_id: str) -> Path:
        if not re.fullmatch(r"[A-Za-z0-9_-]+", session_id):
            raise unknown_session(session_id)
        return self.directory / f"{session_id}.json"

    def save(self, session: Session, engine: "PlayService") -> None:
        payload = {
            "schema": SCHEMA,
            "session_id": session.session_id,
            "config": config_spec(session.config),
            "human_seat": session.human_seat,
            "seed": session.seed,
            "rng_calls": session.rng_calls,
            "status": session.status,
            "actions": engine.actions_of(session.session_id),
            "utterances": [[r, s, text] for (r, s), text in session.utterances.items()],
            "tokens": session.tokens,
        }
        self.path(session.session_id).write_text(json.dumps(payload))

    def load_raw(self, session_id: str) -> dict:
        path = self.path(session_id)
        if not path.exists():
            raise unknown_session(session_id)
        return json.loads(path.read_text())


class PlayService:
    """Session lifecycle and engine driving, independent of HTTP."""

    def __init__(self, checkpoint: Checkpoint, config: ww.GameConfig,
                 store_dir, catalogs: dict[int, latent_mod.LatentCatalog] | None = None,
                 exemplar_choice: str = "first"):
        self.config = config
        self.checkpoint = checkpoint
        self.agent: Agent = agent_for(checkpoint, config)
        self.catalogs = catalogs or {}
        self.store = SessionStore(store_dir)
        self.sessions: dict[str, Session] = {}
        self._actions: dict[str, list[int]] = {}
        self.exemplar_choice = exemplar_choice

    # -- helpers

    def actions_of(self, session_id: str) -> list[int]:
        return self._actions[session_id]

    def _draw(self, session: Session, probs) -> int:
        # replaying the draw count keeps restarted sessions byte-identical
        rng = np.random.default_rng(session.seed)
        if session.rng_calls:
            rng.random(session.rng_calls)
        session.rng_calls += 1
        return sample_index(rng, np.asarray(probs, dtype=float))

    def _exemplar_text(self, session: Session, role: int, cluster: int) -> str | None:
        catalog = self.catalogs.get(role)
        if catalog is None or not catalog.exemplars[cluster]:
            return None
        pool = catalog.exemplars[cluster]
        if self.exemplar_choice == "first":
            return pool[0]["text"]
        pick = self._draw(session, np.full(len(pool), 1.0 / len(pool)))
        return pool[pick]["text"]

    def _advance_engine(self, session: Session) -> None:
        """Play chance and agent moves until the human acts or the game ends."""
        game = ww.WerewolfGame(session.config)
        state = session.state
        record = self._actions[session.session_id]
        while True:
            kind = game.node_kind(state)
            if kind.is_terminal:
                session.status = FINISHED
                session.menu = []
                break
            if kind.is_chance:
                outcomes = game.chance_outcomes(state)
                probs = [p for _, p in outcomes]
                action = outcomes[self._draw(session, probs)][0]
            elif kind.player == session.human_seat:
                session.status = AWAITING_HUMAN
                session.menu = game.legal_actions(state)
                break
            else:
                action = self._draw(session, self.agent.action_probs(game, state))
                if state.phase == ww.DAY_SPEAK:
                    speaker = kind.player
                    text = self._exemplar_text(session, state.roles[speaker], action)
                    if text is not None:
                        session.utterances[(state.round, speaker)] = text
            record.append(action)
            state = game.step(state, action)
        session.state = state

    # -- session API

    def create_session(self, human_seat: int | None = None,
                       seed: int | None = None) -> dict:
        n = self.config.num_players
        session_id = secrets.token_urlsafe(24)  # 192 bits
        seed = seed if seed is not None else secrets.randbits(32)
        session = Session(session_id, self.config, 0, seed,
                          ww.GameState(config=self.config))
        game = ww.WerewolfGame(self.config)
        outcomes = game.chance_outcomes(session.state)
        self._actions[session_id] = []
        deal = outcomes[self._draw(session, [p for _, p in outcomes])][0]
        if human_seat is None:
            human_seat = self._draw(session, np.full(n, 1.0 / n))
        if not 0 <= human_seat < n:
            raise SessionError(400, "BadSeat", f"seat {human_seat} out of range")
        session.human_seat = human_seat
        self._actions[session_id].append(deal)
        session.state = game.step(session.state, deal)
        self._advance_engine(session)
        self.sessions[session_id] = session
        self.store.save(session, self)
        return self.view(session_id)

    def _get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is not None:
            return session
        payload = self.store.load_raw(session_id)
        if payload.get("schema") != SCHEMA:
            raise SessionError(409, "SchemaMismatch",
                               f"session written under {payload.get('schema')!r}")
        config = config_from_spec(payload["config"])
        game = ww.WerewolfGame(config)
        state = game.initial_state()
        for action in payload["actions"]:
            state = game.step(state, action)
        session = Session(
            session_id=payload["session_id"],
            config=config,
            human_seat=payload["human_seat"],
            seed=payload["seed"],
            state=state,
            rng_calls=payload["rng_calls"],
            status=payload["status"],
            utterances={(r, s): text for r, s, text in payload["utterances"]},
            tokens=payload["tokens"],
        )
        if session.status == AWAITING_HUMAN:
            session.menu = game.legal_actions(state)
        self.sessions[session_id] = session
        self._actions[session_id] = list(payload["actions"])
        return session

    def view(self, session_id: str) -> dict:
        session = self._get(session_id)
        state = session.state
        human = session.human_seat
        out = {
            "schema": SCHEMA,
            "session_id": session.session_id,
            "status": session.status,
            "human_seat": human,
            "round": state.round,
            "phase": state.phase,
            "alive": list(state.alive),
            "transcript": observations.render_text_observation(
                state, human, session.utterances),
            "public_log": self._public_log(session),
            "menu": self._menu_entries(session) if session.status == AWAITING_HUMAN else [],
        }
        if session.status == FINISHED:
            out["reveal"] = {
                "roles": [ww.ROLE_NAMES[r] for r in state.roles],
                "winner": {ww.WOLF_WIN: "Werewolves", ww.VILLAGE_WIN: "Villagers",
                           ww.DRAW: "Draw"}[state.winner],
                "utilities": list(ww.terminal_utilities(state)),
            }
        return out

    def _menu_entries(self, session: Session) -> list[dict]:
        state = session.state
        entries = []
        for index, label in enumerate(session.menu):
            entry = {"action": index, "label": label}
            if state.phase == ww.DAY_SPEAK:
                role = state.roles[session.human_seat]
                catalog = self.catalogs.get(role)
                if catalog is not None:
                    entry["exemplars"] = [e["text"] for e in
                                          catalog.exemplars[index][:latent_mod.DEFAULT_EXEMPLARS]]
            entries.append(entry)
        return entries

    def _public_log(self, session: Session) -> list[str]:
        state = session.state
        lines = []
        for r in range(len(state.nights)):
            if r < len(state.announcements):
                victim = state.announcements[r]
                lines.append(
                    f"day {r + 1} announcement: "
                    + (f"player_{victim} was killed last night."
                       if victim >= 0 else "no player was killed last night."))
            if r < len(state.discussion):
                for speaker, latent in state.discussion[r]:
                    text = session.utterances.get((r + 1, speaker))
                    shown = text if text is not None else f"[discussion strategy {latent}]"
                    lines.append(f"day {r + 1}: player_{speaker} said: {shown}")
            if r < len(state.eliminated):
                out = state.eliminated[r]
                lines.append(
                    f"day {r + 1} voting result: "
                    + (f"player_{out} was eliminated." if out >= 0
                       else "no player was eliminated."))
        return lines

    def submit_action(self, session_id: str, action: int, token: str) -> dict:
        session = self._get(session_id)
        with self.store.lock(session_id):
            if token in session.tokens:
                return session.tokens[token]
            if session.status != AWAITING_HUMAN:
                raise SessionError(409, "NotYourTurn",
                                   "the session is not awaiting a human action")
            if not isinstance(action, int) or not 0 <= action < len(session.menu):
                raise SessionError(400, "IllegalAction",
                                   f"action {action!r} is not in the offered menu")
            game = ww.WerewolfGame(session.config)
            state = session.state
            try:
                if state.phase == ww.DAY_SPEAK:
                    role = state.roles[session.human_seat]
                    text = self._exemplar_text(session, role, action)
                    if text is not None:
                        session.utterances[(state.round, session.human_seat)] = text
                session.state = game.step(state, action)
            except IllegalAction as exc:
                raise SessionError(400, "IllegalAction", str(exc)) from exc
            self._actions[session_id].append(action)
            self._advance_engine(session)
            view = self.view(session_id)
            session.tokens[token] = view
            self.store.save(session, self)
            return view


# ---------------------------------------------------------------------------
# HTTP wiring


def make_handler(service: PlayService):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):
            pass

        def _send(self, status: int, payload: dict):
            body = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _error(self, exc: SessionError):
            self._send(exc.status, {"error": exc.code, "message": str(exc)})

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            if not length:
                return {}
            try:
                return json.loads(self.rfile.read(length).decode())
            except json.JSONDecodeError:
                raise SessionError(400, "BadRequest", "body must be JSON")

        def do_GET(self):
            match = re.fullmatch(r"/sessions/([A-Za-z0-9_-]+)", self.path)
            if not match:
                return self._send(404, {"error": "NotFound", "message": self.path})
            try:
                self._send(200, service.view(match.group(1)))
            except SessionError as exc:
                self._error(exc)

        def do_POST(self):
            try:
                body = self._body()
                if self.path == "/sessions":
                    view = service.create_session(
                        human_seat=body.get("human_seat"),
                        seed=body.get("seed"))
                    return self._send(201, view)
                match = re.fullmatch(r"/sessions/([A-Za-z0-9_-]+)/actions", self.path)
                if not match:
                    return self._send(404, {"error": "NotFound", "message": self.path})
                if "action" not in body or "token" not in body:
                    raise SessionError(400, "BadRequest",
                                       "body needs 'action' and 'token'")
                view = service.submit_action(match.group(1), body["action"],
                                             str(body["token"]))
                self._send(200, view)
            except SessionError as exc:
                self._error(exc)

    return Handler


def serve(service: PlayService, host: str = "127.0.0.1", port: int = 8710):
    server = ThreadingHTTPServer((host, port), make_handler(service))
    return server
