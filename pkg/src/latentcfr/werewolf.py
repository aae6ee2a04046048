"""Werewolf rules engine with clustered discussion actions.

Supports the seven-player layout (two Werewolves, one Seer, one Doctor,
three Villagers) and a four-player variant (one Werewolf, one Seer, two
Villagers). Discussion is abstracted: instead of free text, a speaker picks
one of k per-role discussion strategies; k comes from the game config.

States are immutable values; ``step`` returns a new state, so traversals
can run in parallel without locks. Each player carries an append-only
observation log of ASCII tokens; the infoset key is that log joined with a
trailing act marker, which makes perfect recall a literal string-prefix
property.

Reward shaping is accrued into a per-player ledger as events happen:
+5 per round survived, +/-20 for village votes depending on whether the
target really is a Werewolf, -10 for being voted out, +/-5 to everyone
else when a vote eliminates an opponent/teammate, and +/-300 for the
decisive win/loss (0 on a round-cap draw). Night kills carry no
elimination bonuses; only vote results do.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from functools import lru_cache

from .efg import (
    Game,
    GameError,
    IllegalAction,
    NodeKind,
    NotChanceNode,
    NotDecisionNode,
    NotTerminal,
)

WEREWOLF, SEER, DOCTOR, VILLAGER = 0, 1, 2, 3
ROLE_NAMES = ("Werewolf", "Seer", "Doctor", "Villager")

# phases
DEAL = "deal"
NIGHT_PROPOSE = "night_propose"
NIGHT_KILL = "night_kill"
NIGHT_SEER = "night_seer"
NIGHT_DOCTOR = "night_doctor"
DAY_SPEAK = "day_speak"
DAY_VOTE = "day_vote"
TIE = "tie"
END = "end"

NIGHT_PHASES = (NIGHT_PROPOSE, NIGHT_KILL, NIGHT_SEER, NIGHT_DOCTOR)
ACT_CODE = {
    NIGHT_PROPOSE: "p",
    NIGHT_KILL: "k",
    NIGHT_SEER: "s",
    NIGHT_DOCTOR: "d",
    DAY_SPEAK: "t",
    DAY_VOTE: "v",
}

WOLF_WIN, VILLAGE_WIN, DRAW = 0, 1, 2

WIN_REWARD = 300.0
SURVIVE_REWARD = 5.0
VOTE_REWARD = 20.0
ELIMINATED_PENALTY = -10.0
SIDE_BONUS = 5.0


class InvalidAssignment(GameError):
    pass


class UnknownViewer(GameError):
    pass


def side(role: int) -> int:
    """0 for the Werewolf side, 1 for the Village side."""
    return 0 if role == WEREWOLF else 1


@dataclass(frozen=True)
class GameConfig:
    num_players: int = 7
    role_counts: tuple[int, int, int, int] = (2, 1, 1, 3)
    max_rounds: int = 3
    # discussion strategies per role, indexed by role constant
    latent_counts: tuple[int, int, int, int] = (3, 2, 2, 2)

    def __post_init__(self):
        if sum(self.role_counts) != self.num_players:
            raise InvalidAssignment("role counts must sum to the player count")
        if self.role_counts[WEREWOLF] < 1:
            raise InvalidAssignment("at least one Werewolf required")
        if self.role_counts[SEER] > 1 or self.role_counts[DOCTOR] > 1:
            raise InvalidAssignment("at most one Seer and one Doctor supported")
        if any(k < 1 for r, k in enumerate(self.latent_counts) if self.role_counts[r] > 0):
            raise InvalidAssignment("every present role needs at least one discussion strategy")

    def deals(self) -> tuple[tuple[int, ...], ...]:
        return _deals(self.role_counts)


def four_player_config(latent_counts: tuple[int, int, int, int] = (2, 2, 2, 2)) -> GameConfig:
    return GameConfig(num_players=4, role_counts=(1, 1, 0, 2), latent_counts=latent_counts)


@lru_cache(maxsize=None)
def _deals(role_counts: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    roles = []
    for role, count in enumerate(role_counts):
        roles.extend([role] * count)
    return tuple(sorted(set(itertools.permutations(roles))))


@dataclass(frozen=True)
class NightRecord:
    proposer: int = -1
    proposal: int = -1
    killer: int = -1
    kill: int = -1
    seer: int = -1
    seer_target: int = -1
    seer_saw_wolf: bool = False
    doctor: int = -1
    doctor_target: int = -1


@dataclass(frozen=True)
class GameState:
    config: GameConfig
    roles: tuple[int, ...] | None = None
    alive: tuple[bool, ...] = ()
    round: int = 0
    phase: str = DEAL
    cursor: int = -1  # acting player during DAY_SPEAK / DAY_VOTE
    nights: tuple[NightRecord, ...] = ()
    announcements: tuple[int, ...] = ()  # victim per completed night, -1 none
    discussion: tuple[tuple[tuple[int, int], ...], ...] = ()  # (speaker, latent) per round
    votes: tuple[tuple[int, ...], ...] = ()  # resolved: target, -1 abstain, -2 dead
    eliminated: tuple[int, ...] = ()  # vote elimination per completed round, -1 none
    pending_votes: tuple = ()
    tie_pool: tuple[int, ...] = ()
    ledger: tuple[float, ...] = ()
    winner: int = -1
    logs: tuple[str, ...] = ()

    def role_of(self, player: int) -> int:
        return self.roles[player]

    def wolves_alive(self) -> list[int]:
        return [p for p in range(self.config.num_players)
                if self.alive[p] and self.roles[p] == WEREWOLF]

    def alive_players(self) -> list[int]:
        return [p for p in range(self.config.num_players) if self.alive[p]]


def new_game(config: GameConfig, assignment: tuple[int, ...]) -> GameState:
    """Deal the given role assignment and enter night 1."""
    counts = [0, 0, 0, 0]
    for role in assignment:
        if role not in (WEREWOLF, SEER, DOCTOR, VILLAGER):
            raise InvalidAssignment(f"unknown role {role}")
        counts[role] += 1
    if tuple(counts) != config.role_counts:
        raise InvalidAssignment(
            f"assignment counts {tuple(counts)} do not match config {config.role_counts}")
    n = config.num_players
    if len(assignment) != n:
        raise InvalidAssignment("assignment length mismatch")
    wolves = [p for p in range(n) if assignment[p] == WEREWOLF]
    logs = []
    for p in range(n):
        header = f"me{p}|role{assignment[p]}"
        if assignment[p] == WEREWOLF and len(wolves) > 1:
            mates = [w for w in wolves if w != p]
            header += "|mate" + ",".join(str(w) for w in mates)
        logs.append(header)
    state = GameState(
        config=config,
        roles=tuple(assignment),
        alive=(True,) * n,
        round=1,
        nights=(NightRecord(),),
        ledger=(0.0,) * n,
        logs=tuple(logs),
        phase=DEAL,  # placeholder, replaced below
    )
    return _enter_night(state)


# ---------------------------------------------------------------------------
# node classification and legal actions


def node_kind(state: GameState) -> NodeKind:
    if state.phase == END:
        return NodeKind.terminal()
    if state.phase in (DEAL, TIE):
        return NodeKind.chance()
    return NodeKind.decision(_actor(state))


def _actor(state: GameState) -> int:
    phase = state.phase
    if phase in (DAY_SPEAK, DAY_VOTE):
        return state.cursor
    wolves = state.wolves_alive()
    if phase == NIGHT_PROPOSE:
        return wolves[0]
    if phase == NIGHT_KILL:
        return wolves[-1] if len(wolves) > 1 else wolves[0]
    if phase == NIGHT_SEER:
        return state.roles.index(SEER)
    if phase == NIGHT_DOCTOR:
        return state.roles.index(DOCTOR)
    raise NotDecisionNode(f"no actor in phase {phase}")


def chance_outcomes(state: GameState) -> list[tuple[int, float]]:
    if state.phase == DEAL:
        deals = state.config.deals()
        p = 1.0 / len(deals)
        return [(i, p) for i in range(len(deals))]
    if state.phase == TIE:
        p = 1.0 / len(state.tie_pool)
        return [(i, p) for i in range(len(state.tie_pool))]
    raise NotChanceNode(f"phase {state.phase} is not a chance node")


def legal_actions(state: GameState) -> list[str]:
    phase = state.phase
    if phase in (DEAL, TIE, END):
        raise NotDecisionNode(f"phase {phase} is not a decision node")
    actor = _actor(state)
    if phase == NIGHT_PROPOSE:
        return [f"propose to kill player_{t}" for t in _wolf_targets(state)]
    if phase == NIGHT_KILL:
        return [f"kill player_{t}" for t in _wolf_targets(state)]
    if phase == NIGHT_SEER:
        return [f"see player_{t}" for t in state.alive_players() if t != actor]
    if phase == NIGHT_DOCTOR:
        return [f"save player_{t}" for t in state.alive_players()]
    if phase == DAY_SPEAK:
        k = state.config.latent_counts[state.roles[actor]]
        return [f"discussion strategy {i}" for i in range(k)]
    if phase == DAY_VOTE:
        options = ["do not vote"]
        options += [f"vote for player_{t}" for t in state.alive_players() if t != actor]
        return options
    raise NotDecisionNode(phase)


def _wolf_targets(state: GameState) -> list[int]:
    return [p for p in state.alive_players() if state.roles[p] != WEREWOLF]


def _night_targets(state: GameState) -> list[int]:
    phase = state.phase
    actor = _actor(state)
    if phase in (NIGHT_PROPOSE, NIGHT_KILL):
        return _wolf_targets(state)
    if phase == NIGHT_SEER:
        return [t for t in state.alive_players() if t != actor]
    if phase == NIGHT_DOCTOR:
        return state.alive_players()
    raise NotDecisionNode(phase)


def vote_targets(state: GameState) -> list[int | None]:
    """Vote menu in action order; index 0 is abstain (None)."""
    actor = _actor(state)
    return [None] + [t for t in state.alive_players() if t != actor]


# ---------------------------------------------------------------------------
# transitions


def step(state: GameState, action: int) -> GameState:
    phase = state.phase
    if phase == END:
        raise IllegalAction("game is over")
    if phase == DEAL:
        deals = state.config.deals()
        if not 0 <= action < len(deals):
            raise IllegalAction("deal outcome out of range")
        return new_game(state.config, deals[action])
    if phase == TIE:
        if not 0 <= action < len(state.tie_pool):
            raise IllegalAction("tie outcome out of range")
        return _eliminate(state, state.tie_pool[action])

    actor = _actor(state)
    if phase in NIGHT_PHASES:
        targets = _night_targets(state)
        if not 0 <= action < len(targets):
            raise IllegalAction(
                f"night target index {action} out of range: targets must be alive, "
                "not the actor (Doctor excepted), and not a Werewolf teammate")
        return _apply_night(state, actor, targets[action])
    if phase == DAY_SPEAK:
        k = state.config.latent_counts[state.roles[actor]]
        if not 0 <= action < k:
            raise IllegalAction(f"discussion strategy {action} outside catalog of size {k}")
        return _apply_speak(state, actor, action)
    if phase == DAY_VOTE:
        menu = vote_targets(state)
        if not 0 <= action < len(menu):
            raise IllegalAction(
                "vote must be an abstain or target an alive player other than the voter")
        return _apply_vote(state, actor, menu[action])
    raise IllegalAction(f"no actions in phase {phase}")


def _append_logs(logs: tuple[str, ...], entries: dict[int, str]) -> tuple[str, ...]:
    return tuple(log + suffix for log, suffix in
                 ((logs[p], entries.get(p, "")) for p in range(len(logs))))


def _broadcast(state: GameState, token: str) -> dict[int, str]:
    return {p: f"|{token}" for p in range(state.config.num_players)}


def _apply_night(state: GameState, actor: int, target: int) -> GameState:
    mark = f"|@{ACT_CODE[state.phase]}{state.round}"
    rec = state.nights[-1]
    entries: dict[int, str] = {}
    if state.phase == NIGHT_PROPOSE:
        rec = replace(rec, proposer=actor, proposal=target)
        for w in state.wolves_alive():
            entries[w] = (mark if w == actor else "") + (
                f"|p{actor}>{target}")
        next_phase = NIGHT_KILL
    elif state.phase == NIGHT_KILL:
        rec = replace(rec, killer=actor, kill=target)
        for w in state.wolves_alive():
            entries[w] = (mark if w == actor else "") + f"|k{actor}>{target}"
        next_phase = NIGHT_SEER
    elif state.phase == NIGHT_SEER:
        saw_wolf = state.roles[target] == WEREWOLF
        rec = replace(rec, seer=actor, seer_target=target, seer_saw_wolf=saw_wolf)
        entries[actor] = mark + f"|s>{target}={'w' if saw_wolf else 'n'}"
        next_phase = NIGHT_DOCTOR
    else:  # NIGHT_DOCTOR
        rec = replace(rec, doctor=actor, doctor_target=target)
        entries[actor] = mark + f"|d>{target}"
        next_phase = None
    new = replace(
        state,
        nights=state.nights[:-1] + (rec,),
        logs=_append_logs(state.logs, entries),
    )
    while next_phase is not None and not _phase_has_actor(new, next_phase):
        next_phase = NIGHT_PHASES[NIGHT_PHASES.index(next_phase) + 1] \
            if NIGHT_PHASES.index(next_phase) + 1 < len(NIGHT_PHASES) else None
    if next_phase is None:
        return _resolve_night(new)
    return replace(new, phase=next_phase)


def _phase_has_actor(state: GameState, phase: str) -> bool:
    if phase == NIGHT_PROPOSE:
        return len(state.wolves_alive()) >= 2
    if phase == NIGHT_KILL:
        return len(state.wolves_alive()) >= 1
    if phase == NIGHT_SEER:
        return state.config.role_counts[SEER] > 0 and state.alive[state.roles.index(SEER)]
    if phase == NIGHT_DOCTOR:
        return state.config.role_counts[DOCTOR] > 0 and state.alive[state.roles.index(DOCTOR)]
    return False


def _enter_night(state: GameState) -> GameState:
    for phase in NIGHT_PHASES:
        if _phase_has_actor(state, phase):
            return replace(state, phase=phase, cursor=-1)
    # wolves always exist on a live state, so this is unreachable
    raise GameError("night with no actors")


def _resolve_night(state: GameState) -> GameState:
    rec = state.nights[-1]
    victim = rec.kill
    if rec.doctor_target == victim:
        victim = -1
    alive = state.alive
    if victim >= 0:
        alive = tuple(a and p != victim for p, a in enumerate(alive))
    token = f"a{state.round}>{victim if victim >= 0 else 'x'}"
    new = replace(
        state,
        alive=alive,
        announcements=state.announcements + (victim,),
        logs=_append_logs(state.logs, _broadcast(state, token)),
    )
    winner = _check_winner(new)
    if winner is not None:
        return _finish(new, winner, credit_survival=True)
    speaker = min(new.alive_players())
    return replace(
        new,
        phase=DAY_SPEAK,
        cursor=speaker,
        discussion=new.discussion + ((),),
        pending_votes=(None,) * new.config.num_players,
    )


def _apply_speak(state: GameState, actor: int, latent: int) -> GameState:
    mark_token = f"t{state.round}:{actor}>{latent}"
    entries = _broadcast(state, mark_token)
    entries[actor] = f"|@t{state.round}" + entries[actor]
    talks = state.discussion[:-1] + (state.discussion[-1] + ((actor, latent),),)
    later = [p for p in state.alive_players() if p > actor]
    if later:
        return replace(state, discussion=talks, cursor=later[0],
                       logs=_append_logs(state.logs, entries))
    voter = min(state.alive_players())
    return replace(state, discussion=talks, phase=DAY_VOTE, cursor=voter,
                   logs=_append_logs(state.logs, entries))


def _apply_vote(state: GameState, actor: int, target: int | None) -> GameState:
    choice = -1 if target is None else target
    pending = list(state.pending_votes)
    pending[actor] = choice
    entries = {actor: f"|@v{state.round}|v>{'x' if target is None else target}"}
    new = replace(state, pending_votes=tuple(pending),
                  logs=_append_logs(state.logs, entries))
    later = [p for p in new.alive_players() if p > actor]
    if later:
        return replace(new, cursor=later[0])
    return _resolve_votes(new)


def _resolve_votes(state: GameState) -> GameState:
    n = state.config.num_players
    profile = tuple(
        (-2 if not state.alive[p] else
         (state.pending_votes[p] if state.pending_votes[p] is not None else -2))
        for p in range(n))
    counts: dict[int, int] = {}
    for choice in profile:
        if choice >= 0:
            counts[choice] = counts.get(choice, 0) + 1

    # village voting reward: +/-20 depending on the target's true role
    ledger = list(state.ledger)
    for p in range(n):
        choice = profile[p]
        if choice >= 0 and state.roles[p] != WEREWOLF:
            ledger[p] += VOTE_REWARD if state.roles[choice] == WEREWOLF else -VOTE_REWARD

    tally = "".join(
        "." if profile[p] == -2 else ("x" if profile[p] == -1 else str(profile[p]))
        for p in range(n))
    new = replace(
        state,
        votes=state.votes + (profile,),
        pending_votes=(),
        ledger=tuple(ledger),
        logs=_append_logs(state.logs, _broadcast(state, f"V{state.round}:{tally}")),
    )
    if not counts:
        new = replace(
            new,
            eliminated=new.eliminated + (-1,),
            logs=_append_logs(new.logs, _broadcast(new, f"o{new.round}>x")),
        )
        return _after_day(new)
    top = max(counts.values())
    tied = sorted(p for p, c in counts.items() if c == top)
    if len(tied) > 1:
        return replace(new, phase=TIE, tie_pool=tuple(tied), cursor=-1)
    return _eliminate(new, tied[0])


def _eliminate(state: GameState, victim: int) -> GameState:
    n = state.config.num_players
    ledger = list(state.ledger)
    victim_side = side(state.roles[victim])
    for p in range(n):
        if p == victim:
            ledger[p] += ELIMINATED_PENALTY
        elif side(state.roles[p]) == victim_side:
            ledger[p] -= SIDE_BONUS
        else:
            ledger[p] += SIDE_BONUS
    alive = tuple(a and p != victim for p, a in enumerate(state.alive))
    new = replace(
        state,
        alive=alive,
        tie_pool=(),
        eliminated=state.eliminated + (victim,),
        ledger=tuple(ledger),
        logs=_append_logs(state.logs, _broadcast(state, f"o{state.round}>{victim}")),
    )
    winner = _check_winner(new)
    if winner is not None:
        return _finish(new, winner, credit_survival=True)
    return _after_day(new)


def _after_day(state: GameState) -> GameState:
    # round completed: everyone still alive survived it
    ledger = list(state.ledger)
    for p in state.alive_players():
        ledger[p] += SURVIVE_REWARD
    new = replace(state, ledger=tuple(ledger))
    if new.round >= new.config.max_rounds:
        return _finish(new, DRAW, credit_survival=False)
    new = replace(new, round=new.round + 1, nights=new.nights + (NightRecord(),))
    return _enter_night(new)


def _check_winner(state: GameState) -> int | None:
    wolves = sum(1 for p in state.alive_players() if state.roles[p] == WEREWOLF)
    others = len(state.alive_players()) - wolves
    if wolves == 0:
        return VILLAGE_WIN
    if wolves >= others:
        return WOLF_WIN
    return None


def _finish(state: GameState, winner: int, credit_survival: bool) -> GameState:
    ledger = list(state.ledger)
    if credit_survival:
        for p in state.alive_players():
            ledger[p] += SURVIVE_REWARD
    if winner != DRAW:
        winning_side = 0 if winner == WOLF_WIN else 1
        for p in range(state.config.num_players):
            ledger[p] += WIN_REWARD if side(state.roles[p]) == winning_side else -WIN_REWARD
    return replace(state, phase=END, winner=winner, ledger=tuple(ledger), cursor=-1)


def terminal_utilities(state: GameState) -> tuple[float, ...]:
    if state.phase != END:
        raise NotTerminal("game still in progress")
    return state.ledger


def infoset_key(state: GameState) -> str:
    kind = node_kind(state)
    if not kind.is_decision:
        raise NotDecisionNode(f"phase {state.phase} has no acting player")
    actor = kind.player
    return f"{state.logs[actor]}|@{ACT_CODE[state.phase]}{state.round}"


# ---------------------------------------------------------------------------
# Game adapter for the solver


class WerewolfGame(Game):
    def __init__(self, config: GameConfig):
        self.config = config
        self.num_players = config.num_players

    def initial_state(self) -> GameState:
        return GameState(config=self.config)

    def node_kind(self, state: GameState) -> NodeKind:
        return node_kind(state)

    def chance_outcomes(self, state: GameState):
        return chance_outcomes(state)

    def legal_actions(self, state: GameState) -> list[str]:
        return legal_actions(state)

    def step(self, state: GameState, action: int) -> GameState:
        return step(state, action)

    def utilities(self, state: GameState):
        return terminal_utilities(state)

    def infoset_key(self, state: GameState) -> str:
        return infoset_key(state)
