"""Exact posterior over hidden roles from one player's point of view.

The belief is a weighted set of particles. Each particle is a full engine
state replica: a role assignment consistent with the viewer's private
information plus one concrete choice of every hidden night action so far.
Observable events (the viewer's own actions, the Werewolf channel if the
viewer is a Werewolf, announcements, discussion strategies, vote tallies)
drive every replica forward through the real rules engine; hidden night
decisions branch a particle into one child per legal choice, weighted by
the supplied behaviour policy at that hypothetical player's infoset.
Pruning inconsistent branches and renormalizing yields the exact Bayes
posterior under that behaviour model.

Against off-model opponents every branch can die; ``on_zero="reset"``
rebuilds the belief from the prior using hard rule constraints only
(uniform behaviour likelihoods) and flags the result as degraded.
"""

from __future__ import annotations

from dataclasses import dataclass, replace as dc_replace

import numpy as np

from . import werewolf as ww
from .cfr import AveragePolicy
from .efg import GameError


class InconsistentPrivateInfo(GameError):
    pass


class ZeroPosterior(GameError):
    pass


# observable events, in the order the viewer experiences them


@dataclass(frozen=True)
class OwnNightChoice:
    target: int
    saw_wolf: bool | None = None  # set when the viewer is the Seer


@dataclass(frozen=True)
class MateNightChoice:
    actor: int
    target: int


@dataclass(frozen=True)
class Announcement:
    victim: int  # -1 when nobody died


@dataclass(frozen=True)
class DiscussionEvent:
    speaker: int
    latent: int


@dataclass(frozen=True)
class VoteResult:
    choices: tuple[int, ...]  # per player: target, -1 abstain, -2 absent
    eliminated: int  # -1 when no votes were cast


@dataclass(frozen=True)
class GameEnd:
    winner: int


Event = object


@dataclass
class Belief:
    viewer: int
    config: ww.GameConfig
    particles: list[tuple[ww.GameState, float]]
    events: tuple = ()
    degraded: bool = False
    # night actions awaiting the announcement; used only in capped mode,
    # where expanding the night early would defeat victim pinning
    queued_night: tuple = ()

    def assignment_posterior(self) -> dict[tuple[int, ...], float]:
        out: dict[tuple[int, ...], float] = {}
        for state, weight in self.particles:
            out[state.roles] = out.get(state.roles, 0.0) + weight
        return out

    @property
    def support(self) -> list[tuple[int, ...]]:
        return sorted(self.assignment_posterior())

    @property
    def weights(self) -> dict[tuple[int, ...], float]:
        return self.assignment_posterior()


def _policy_probs(policies, role: int, key: str, n: int) -> np.ndarray:
    if isinstance(policies, dict):
        return policies[role].probs(key, n)
    return policies.probs(key, n)


UNIFORM = AveragePolicy({})


def init_belief(
    config: ww.GameConfig,
    viewer: int,
    viewer_role: int,
    teammates: tuple[int, ...] = (),
) -> Belief:
    """Uniform prior over every deal consistent with the viewer's private info."""
    if not 0 <= viewer < config.num_players:
        raise InconsistentPrivateInfo(f"viewer {viewer} not in game")
    if viewer_role == ww.WEREWOLF and config.role_counts[ww.WEREWOLF] > 1:
        if len(set(teammates)) != config.role_counts[ww.WEREWOLF] - 1:
            raise InconsistentPrivateInfo("Werewolf viewer must know its teammates")
    particles = []
    for deal in config.deals():
        if deal[viewer] != viewer_role:
            continue
        if viewer_role == ww.WEREWOLF:
            mates = tuple(p for p in range(config.num_players)
                          if p != viewer and deal[p] == ww.WEREWOLF)
            if set(mates) != set(teammates):
                continue
        particles.append((ww.new_game(config, deal), 1.0))
    if not particles:
        raise InconsistentPrivateInfo("no deal matches the given private information")
    weight = 1.0 / len(particles)
    return Belief(viewer, config, [(s, weight) for s, _ in particles])


def _visible_night_actor(state: ww.GameState, viewer: int) -> bool:
    actor = ww.node_kind(state).player
    if actor == viewer:
        return True
    return (state.roles[viewer] == ww.WEREWOLF
            and state.roles[actor] == ww.WEREWOLF)


def _night_action_consistent(state: ww.GameState, target: int,
                             expecting: bool, victim: int) -> bool:
    """Early-prune test: can this hidden night choice still produce the
    awaited announcement? (Dropped branches would die at resolution anyway.)"""
    if not expecting:
        return True
    if state.phase == ww.NIGHT_KILL:
        # a announced death pins the kill; a quiet night allows any target
        return victim == -1 or target == victim
    if state.phase == ww.NIGHT_DOCTOR:
        kill = state.nights[-1].kill
        if victim == -1:
            return target == kill  # nobody died: the save matched the kill
        return target != victim
    return True


def _apply_queued(state: ww.GameState, actor: int, event, viewer: int):
    """Apply one queued visible night action; None when inconsistent."""
    if isinstance(event, OwnNightChoice):
        if actor != viewer:
            return None
        target, saw = event.target, event.saw_wolf
    elif isinstance(event, MateNightChoice):
        if actor != event.actor:
            return None
        target, saw = event.target, None
    else:
        return None
    targets = ww._night_targets(state)
    if target not in targets:
        return None
    nxt = ww.step(state, targets.index(target))
    if saw is not None:
        rec = nxt.nights[-1]
        if rec.seer != viewer or rec.seer_saw_wolf != saw:
            return None
    return nxt


def _expand_hidden(
    state: ww.GameState,
    weight: float,
    viewer: int,
    policies,
    expected_announcements: int | None = None,
    expected_victim: int = -1,
    queued: tuple = (),
) -> list[tuple[ww.GameState, float]]:
    """Branch through night decisions the viewer cannot see.

    Stops at the viewer's own (or wolf-channel) night decisions unless a
    queued action for that slot is supplied, and at public phases and
    terminal states. When the announcement being waited for is known,
    branches that cannot resolve the night consistently are dropped as
    soon as that is decidable.
    """
    out: list[tuple[ww.GameState, float]] = []
    stack = [(state, weight, 0)]
    while stack:
        s, w, qpos = stack.pop()
        if (expected_announcements is not None
                and len(s.announcements) >= expected_announcements):
            if s.announcements[expected_announcements - 1] != expected_victim:
                continue
            out.append((s, w))
            continue
        kind = ww.node_kind(s)
        if kind.is_decision and s.phase in ww.NIGHT_PHASES:
            expecting = expected_announcements == len(s.announcements) + 1
            if _visible_night_actor(s, viewer):
                if qpos >= len(queued):
                    out.append((s, w))
                    continue
                nxt = _apply_queued(s, kind.player, queued[qpos], viewer)
                if nxt is not None:
                    stack.append((nxt, w, qpos + 1))
                continue
            targets = ww._night_targets(s)
            key = ww.infoset_key(s)
            probs = _policy_probs(policies, s.roles[kind.player], key, len(targets))
            for a, target in enumerate(targets):
                if probs[a] > 0.0 and _night_action_consistent(
                        s, target, expecting, expected_victim):
                    stack.append((ww.step(s, a), w * probs[a], qpos))
            continue
        out.append((s, w))
    return out


def _truncate_diverse(particles, cap):
    """Keep the heaviest ``cap`` particles, but retain at least the single
    heaviest particle of every assignment so the support never collapses."""
    if len(particles) <= cap:
        return particles, False
    heaviest: dict[tuple, int] = {}
    for i, (state, weight) in enumerate(particles):
        at = heaviest.get(state.roles)
        if at is None or particles[at][1] < weight:
            heaviest[state.roles] = i
    protected = set(heaviest.values())
    if len(protected) >= cap:
        keep = sorted(protected, key=lambda i: particles[i][1], reverse=True)[:cap]
    else:
        rest = sorted((i for i in range(len(particles)) if i not in protected),
                      key=lambda i: particles[i][1], reverse=True)
        keep = list(protected) + rest[: cap - len(protected)]
    return [particles[i] for i in sorted(keep)], True


def _update_particle_stream(particles, handler, max_particles=None):
    """Apply ``handler`` to every particle, keeping memory bounded.

    With a cap, sources are processed heaviest-first and the result set is
    compacted whenever it doubles the budget; returns (particles, truncated).
    """
    out = []
    truncated = False
    source = particles
    if max_particles is not None:
        source = sorted(particles, key=lambda p: p[1], reverse=True)
    for state, weight in source:
        out.extend(handler(state, weight))
        if max_particles is not None and len(out) > 2 * max_particles:
            out, cut = _truncate_diverse(out, max_particles)
            truncated = truncated or cut
    if max_particles is not None:
        out, cut = _truncate_diverse(out, max_particles)
        truncated = truncated or cut
    return out, truncated


def update(
    belief: Belief,
    event: Event,
    policies,
    on_zero: str = "raise",
    max_particles: int | None = None,
) -> Belief:
    """Condition the belief on one observable event (pure; returns a new Belief)."""
    viewer = belief.viewer
    queued_after: tuple = ()

    def night_stop_handler(state, weight, actor_filter, apply):
        stops = _expand_hidden(state, weight, viewer, policies)
        results = []
        for s, w in stops:
            kind = ww.node_kind(s)
            if not (kind.is_decision and s.phase in ww.NIGHT_PHASES
                    and actor_filter(s, kind.player)):
                continue  # inconsistent schedule: impossible branch
            results.extend(apply(s, w))
        return results

    if isinstance(event, (OwnNightChoice, MateNightChoice)):
        if max_particles is not None:
            # capped mode: hold night actions until the announcement can
            # pin the kill, otherwise truncation may starve the support
            return dc_replace(belief, events=belief.events + (event,),
                              queued_night=belief.queued_night + (event,))
        if isinstance(event, OwnNightChoice):
            def apply(s, w):
                nxt = _apply_queued(s, ww.node_kind(s).player, event, viewer)
                return [] if nxt is None else [(nxt, w)]

            handler = lambda s, w: night_stop_handler(
                s, w, lambda st, actor: actor == viewer, apply)
        else:
            def apply(s, w):
                nxt = _apply_queued(s, ww.node_kind(s).player, event, viewer)
                return [] if nxt is None else [(nxt, w)]

            handler = lambda s, w: night_stop_handler(
                s, w, lambda st, actor: actor == event.actor, apply)

    elif isinstance(event, Announcement):
        queue = belief.queued_night

        def handler(s, w):
            expected = len(s.announcements) + 1 if s.phase in ww.NIGHT_PHASES else \
                len(s.announcements)
            if s.phase not in ww.NIGHT_PHASES:
                # night already resolved while applying the viewer's own action
                if not s.announcements or s.announcements[-1] != event.victim:
                    return []
                return [(s, w)]
            return _expand_hidden(s, w, viewer, policies,
                                  expected_announcements=expected,
                                  expected_victim=event.victim,
                                  queued=queue)

    elif isinstance(event, DiscussionEvent):
        def handler(s, w):
            if s.phase != ww.DAY_SPEAK or s.cursor != event.speaker:
                return []
            k = s.config.latent_counts[s.roles[event.speaker]]
            if event.latent >= k:
                return []
            if event.speaker != viewer:
                probs = _policy_probs(policies, s.roles[event.speaker],
                                      ww.infoset_key(s), k)
                w = w * probs[event.latent]
                if w == 0.0:
                    return []
            return [(ww.step(s, event.latent), w)]

    elif isinstance(event, VoteResult):
        def handler(s, w):
            while s.phase == ww.DAY_VOTE:
                voter = s.cursor
                choice = event.choices[voter]
                menu = ww.vote_targets(s)
                wanted = None if choice == -1 else choice
                if wanted not in menu:
                    return []
                index = menu.index(wanted)
                if voter != viewer:
                    probs = _policy_probs(policies, s.roles[voter],
                                          ww.infoset_key(s), len(menu))
                    w = w * probs[index]
                    if w == 0.0:
                        return []
                s = ww.step(s, index)
            if s.phase == ww.TIE:
                if event.eliminated not in s.tie_pool:
                    return []
                w = w / len(s.tie_pool)
                s = ww.step(s, s.tie_pool.index(event.eliminated))
            if not s.eliminated or s.eliminated[-1] != event.eliminated:
                return []
            return [(s, w)]

    elif isinstance(event, GameEnd):
        def handler(s, w):
            stops = _expand_hidden(s, w, viewer, policies)
            return [(st, wt) for st, wt in stops
                    if st.phase == ww.END and st.winner == event.winner]

    else:
        raise GameError(f"unknown belief event {event!r}")

    particles, truncated = _update_particle_stream(belief.particles, handler,
                                                   max_particles)
    degraded = belief.degraded or truncated
    if not particles:
        if on_zero == "reset":
            prior = init_belief(belief.config, viewer,
                                _viewer_role(belief), _viewer_mates(belief))
            rebuilt = prior
            for past in belief.events + (event,):
                rebuilt = update(rebuilt, past, UNIFORM, on_zero="raise",
                                 max_particles=max_particles)
            return dc_replace(rebuilt, degraded=True,
                              events=belief.events + (event,))
        raise ZeroPosterior(
            "every branch is inconsistent with the observed event; "
            "the behaviour model does not explain this opponent")
    total = sum(w for _, w in particles)
    particles = [(s, w / total) for s, w in particles]
    return Belief(viewer, belief.config, particles,
                  belief.events + (event,), degraded, queued_after)


def _viewer_role(belief: Belief) -> int:
    return belief.particles[0][0].roles[belief.viewer]


def _viewer_mates(belief: Belief) -> tuple[int, ...]:
    state = belief.particles[0][0]
    if state.roles[belief.viewer] != ww.WEREWOLF:
        return ()
    return tuple(p for p in range(belief.config.num_players)
                 if p != belief.viewer and state.roles[p] == ww.WEREWOLF)


def predict(belief: Belief) -> dict:
    """Per-player role marginals and most-probable roles.

    Ties pick the lowest role index in (Werewolf, Seer, Doctor, Villager)
    order.
    """
    n = belief.config.num_players
    marginals = np.zeros((n, 4))
    for state, weight in belief.particles:
        for p in range(n):
            marginals[p, state.roles[p]] += weight
    argmax = [int(np.argmax(marginals[p])) for p in range(n)]
    return {"marginals": marginals, "argmax": argmax}


def prediction_accuracy(belief: Belief, truth: tuple[int, ...],
                        players=None) -> float:
    """Fraction of the given players whose argmax role matches the truth."""
    players = list(players) if players is not None else [
        p for p in range(belief.config.num_players) if p != belief.viewer]
    if not players:
        return 1.0
    guesses = predict(belief)["argmax"]
    return sum(guesses[p] == truth[p] for p in players) / len(players)


# ---------------------------------------------------------------------------
# event extraction from played games


def events_for_viewers(config: ww.GameConfig, assignment: tuple[int, ...],
                       actions: list[int]) -> dict[int, list[Event]]:
    """Re-simulate a recorded game and split it into per-viewer event streams.

    ``actions`` is the flat list of applied action indices after the deal
    (tie-break chance outcomes included).
    """
    n = config.num_players
    streams: dict[int, list[Event]] = {v: [] for v in range(n)}
    state = ww.new_game(config, assignment)
    pending_votes: tuple[int, ...] | None = None
    for action in actions:
        kind = ww.node_kind(state)
        nxt = ww.step(state, action)
        if kind.is_decision:
            actor = kind.player
            if state.phase in ww.NIGHT_PHASES:
                rec = nxt.nights[-1]
                target = {ww.NIGHT_PROPOSE: rec.proposal, ww.NIGHT_KILL: rec.kill,
                          ww.NIGHT_SEER: rec.seer_target,
                          ww.NIGHT_DOCTOR: rec.doctor_target}[state.phase]
                saw = rec.seer_saw_wolf if state.phase == ww.NIGHT_SEER else None
                streams[actor].append(OwnNightChoice(target, saw))
                if assignment[actor] == ww.WEREWOLF:
                    for v in range(n):
                        if v != actor and assignment[v] == ww.WEREWOLF:
                            streams[v].append(MateNightChoice(actor, target))
            elif state.phase == ww.DAY_SPEAK:
                latent = nxt.discussion[-1][-1][1]
                for v in range(n):
                    streams[v].append(DiscussionEvent(actor, latent))
        if len(nxt.announcements) > len(state.announcements):
            for v in range(n):
                streams[v].append(Announcement(nxt.announcements[-1]))
        if len(nxt.votes) > len(state.votes):
            pending_votes = nxt.votes[-1]
        if pending_votes is not None and len(nxt.eliminated) > len(state.eliminated):
            for v in range(n):
                streams[v].append(VoteResult(pending_votes, nxt.eliminated[-1]))
            pending_votes = None
        if nxt.phase == ww.END:
            for v in range(n):
                streams[v].append(GameEnd(nxt.winner))
        state = nxt
    return streams
