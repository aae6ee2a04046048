"""Belief-filter tests, checked against a from-scratch joint enumeration.

The oracle below never touches the incremental filter: for every candidate
assignment it walks the rules engine over all hidden-action completions,
multiplying behaviour probabilities and consistency checks, and normalizes
at the end. The filter must match it to 1e-9 after every update.
"""

from dataclasses import dataclass

import numpy as np
import pytest

from latentcfr import belief as bf
from latentcfr import cfr
from latentcfr import werewolf as ww

W, S, D, V = ww.WEREWOLF, ww.SEER, ww.DOCTOR, ww.VILLAGER


@dataclass(frozen=True)
class VoteCast:
    voter: int
    choice: int  # target or -1 abstain


@dataclass(frozen=True)
class DayOutcome:
    eliminated: int


def fine_stream(events):
    """Expand compound VoteResult events into per-voter casts plus outcome."""
    fine = []
    boundaries = []
    for event in events:
        if isinstance(event, bf.VoteResult):
            for voter, choice in enumerate(event.choices):
                if choice != -2:
                    fine.append(VoteCast(voter, choice))
            fine.append(DayOutcome(event.eliminated))
        else:
            fine.append(event)
        boundaries.append(len(fine))
    return fine, boundaries


def oracle_posterior(config, viewer, viewer_role, mates, fine, policies):
    """Posterior over assignments by exhaustive enumeration of hidden actions."""

    def policy_probs(role, key, n):
        if isinstance(policies, dict):
            return policies[role].probs(key, n)
        return policies.probs(key, n)

    def consume_transitions(state, nxt, i):
        """Match announcement / elimination / end markers produced by a step."""
        weight = 1.0
        if len(nxt.announcements) > len(state.announcements):
            if i == len(fine):
                return nxt, i, weight  # prefix ends mid-transition: unconstrained
            if not isinstance(fine[i], bf.Announcement) or \
                    fine[i].victim != nxt.announcements[-1]:
                return None
            i += 1
        if len(nxt.eliminated) > len(state.eliminated):
            if i == len(fine):
                return nxt, i, weight
            if not isinstance(fine[i], DayOutcome) or \
                    fine[i].eliminated != nxt.eliminated[-1]:
                return None
            i += 1
        if nxt.phase == ww.END:
            if i == len(fine):
                return nxt, i, weight
            if not isinstance(fine[i], bf.GameEnd) or fine[i].winner != nxt.winner:
                return None
            i += 1
        return nxt, i, weight

    def walk(state, i):
        if i >= len(fine):
            return 1.0
        kind = ww.node_kind(state)
        if kind.is_terminal:
            return 0.0  # events remain but the hypothetical game is over
        if kind.is_chance:  # tie break: outcome is dictated by the next DayOutcome
            event = fine[i]
            if not isinstance(event, DayOutcome) or event.eliminated not in state.tie_pool:
                return 0.0
            nxt = ww.step(state, state.tie_pool.index(event.eliminated))
            consumed = consume_transitions(state, nxt, i)
            # DayOutcome itself is consumed by consume_transitions (eliminated grew)
            if consumed is None:
                return 0.0
            nxt, j, _ = consumed
            return walk(nxt, j) / len(state.tie_pool)
        actor = kind.player
        phase = state.phase
        event = fine[i]
        if phase in ww.NIGHT_PHASES:
            visible = actor == viewer or (
                viewer_role == W and state.roles[actor] == W)
            if visible:
                if actor == viewer:
                    if not isinstance(event, bf.OwnNightChoice):
                        return 0.0
                    target, saw = event.target, event.saw_wolf
                else:
                    if not isinstance(event, bf.MateNightChoice) or event.actor != actor:
                        return 0.0
                    target, saw = event.target, None
                targets = ww._night_targets(state)
                if target not in targets:
                    return 0.0
                index = targets.index(target)
                nxt = ww.step(state, index)
                if saw is not None and nxt.nights[-1].seer_saw_wolf != saw:
                    return 0.0
                factor = 1.0
                if actor != viewer:
                    factor = policy_probs(state.roles[actor],
                                          ww.infoset_key(state), len(targets))[index]
                consumed = consume_transitions(state, nxt, i + 1)
                if consumed is None or factor == 0.0:
                    return 0.0
                nxt, j, _ = consumed
                return factor * walk(nxt, j)
            total = 0.0
            targets = ww._night_targets(state)
            probs = policy_probs(state.roles[actor], ww.infoset_key(state), len(targets))
            for a in range(len(targets)):
                if probs[a] == 0.0:
                    continue
                nxt = ww.step(state, a)
                consumed = consume_transitions(state, nxt, i)
                if consumed is None:
                    continue
                nxt2, j, _ = consumed
                total += probs[a] * walk(nxt2, j)
            return total
        if phase == ww.DAY_SPEAK:
            if not isinstance(event, bf.DiscussionEvent) or event.speaker != actor:
                return 0.0
            k = state.config.latent_counts[state.roles[actor]]
            if event.latent >= k:
                return 0.0
            factor = 1.0
            if actor != viewer:
                factor = policy_probs(state.roles[actor], ww.infoset_key(state), k)[event.latent]
            if factor == 0.0:
                return 0.0
            return factor * walk(ww.step(state, event.latent), i + 1)
        if phase == ww.DAY_VOTE:
            if not isinstance(event, VoteCast) or event.voter != actor:
                return 0.0
            menu = ww.vote_targets(state)
            wanted = None if event.choice == -1 else event.choice
            if wanted not in menu:
                return 0.0
            index = menu.index(wanted)
            factor = 1.0
            if actor != viewer:
                factor = policy_probs(state.roles[actor], ww.infoset_key(state),
                                      len(menu))[index]
            if factor == 0.0:
                return 0.0
            nxt = ww.step(state, index)
            consumed = consume_transitions(state, nxt, i + 1)
            if consumed is None:
                return 0.0
            nxt2, j, _ = consumed
            return factor * walk(nxt2, j)
        return 0.0

    posterior = {}
    for deal in config.deals():
        if deal[viewer] != viewer_role:
            continue
        if viewer_role == W:
            deal_mates = tuple(p for p in range(config.num_players)
                               if p != viewer and deal[p] == W)
            if set(deal_mates) != set(mates):
                continue
        like = walk(ww.new_game(config, deal), 0)
        if like > 0.0:
            posterior[deal] = like
    total = sum(posterior.values())
    return {deal: like / total for deal, like in posterior.items()} if total else {}


def run_game(config, seed, policy=None):
    """Play one game; decisions follow ``policy`` when given, else uniform."""
    rng = np.random.default_rng(seed)
    game = ww.WerewolfGame(config)
    state = game.initial_state()
    outcomes = game.chance_outcomes(state)
    deal_idx = int(rng.choice(len(outcomes), p=[p for _, p in outcomes]))
    assignment = config.deals()[deal_idx]
    state = game.step(state, deal_idx)
    actions = []
    while not game.node_kind(state).is_terminal:
        kind = game.node_kind(state)
        if kind.is_chance:
            outs = game.chance_outcomes(state)
            action = outs[int(rng.choice(len(outs), p=[p for _, p in outs]))][0]
        elif policy is None:
            action = int(rng.integers(game.num_actions(state)))
        else:
            probs = policy.probs(game.infoset_key(state), game.num_actions(state))
            action = int(rng.choice(len(probs), p=probs))
        actions.append(action)
        state = game.step(state, action)
    return assignment, actions


def trained_policy(config, iterations=30, seed=2):
    game = ww.WerewolfGame(config)
    ck = cfr.solve(game, cfr.SolverConfig(
        iterations=iterations, seed=seed, traversal="external_sampling"))
    return ck.policy


class TestPriors:
    def test_villager_prior_size_7p(self, config7):
        prior = bf.init_belief(config7, 0, V)
        assert len(prior.support) == 180
        for weight in prior.weights.values():
            assert weight == pytest.approx(1 / 180)

    def test_wolf_prior_knows_teammate(self, config7):
        prior = bf.init_belief(config7, 0, W, teammates=(3,))
        assert len(prior.support) == 20
        assert all(deal[3] == W for deal in prior.support)

    def test_wolf_without_teammate_rejected(self, config7):
        with pytest.raises(bf.InconsistentPrivateInfo):
            bf.init_belief(config7, 0, W)

    def test_seer_conditioning_on_check(self, config4):
        prior = bf.init_belief(config4, 1, S)
        belief = bf.update(prior, bf.OwnNightChoice(target=3, saw_wolf=False),
                           bf.UNIFORM)
        assert all(deal[3] != W for deal in belief.support)
        total = sum(belief.weights.values())
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_marginals_sum_to_role_counts(self, config7):
        prior = bf.init_belief(config7, 2, V)
        marginals = bf.predict(prior)["marginals"]
        for role, count in enumerate(config7.role_counts):
            assert marginals[:, role].sum() == pytest.approx(count, abs=1e-9)
        # villager viewer: every other player is a wolf with chance 2/6
        for p in range(7):
            if p != 2:
                assert marginals[p, W] == pytest.approx(2 / 6)


class TestUpdates:
    def test_constant_likelihood_leaves_belief_unchanged(self, config4):
        prior = bf.init_belief(config4, 2, V)
        # same k for every role, uniform policy: the speaker's strategy choice
        # carries no information
        event = bf.DiscussionEvent(speaker=2, latent=0)
        # viewer's own speech: likelihood exactly 1
        advanced = prior
        stream = [bf.OwnNightChoice, ]  # viewer is a villager: no night action
        belief = bf.update(prior, bf.Announcement(victim=3), bf.UNIFORM)
        before = belief.assignment_posterior()
        spoke = bf.update(belief, bf.DiscussionEvent(speaker=0, latent=1), bf.UNIFORM)
        after = spoke.assignment_posterior()
        assert set(before) == set(after)
        for deal in before:
            assert after[deal] == pytest.approx(before[deal], abs=1e-12)

    def test_impossible_event_prunes_assignment(self, config4):
        # wolf viewer knows wolves never self-target: an announcement killing
        # a hypothetical teammate is impossible -- 4p has one wolf, so instead
        # check the village viewer case: announced victim cannot be the wolf
        prior = bf.init_belief(config4, 2, V)
        belief = bf.update(prior, bf.Announcement(victim=3), bf.UNIFORM)
        assert all(deal[3] != W for deal in belief.support)

    def test_zero_posterior_raises_and_resets(self, config4):
        class SilentOnOne:
            def probs(self, key, n):
                row = np.zeros(n)
                row[0] = 1.0
                return row

        prior = bf.init_belief(config4, 2, V)
        belief = bf.update(prior, bf.Announcement(victim=3), bf.UNIFORM)
        with pytest.raises(bf.ZeroPosterior):
            bf.update(belief, bf.DiscussionEvent(speaker=0, latent=1), SilentOnOne())
        degraded = bf.update(belief, bf.DiscussionEvent(speaker=0, latent=1),
                             SilentOnOne(), on_zero="reset")
        assert degraded.degraded
        assert sum(degraded.weights.values()) == pytest.approx(1.0)

    def test_weights_remain_distribution_along_replays(self, config4):
        policy = trained_policy(config4)
        for seed in range(5):
            assignment, actions = run_game(config4, seed, policy)
            streams = bf.events_for_viewers(config4, assignment, actions)
            for viewer in range(4):
                mates = tuple(p for p in range(4)
                              if p != viewer and assignment[p] == W
                              ) if assignment[viewer] == W else ()
                belief = bf.init_belief(config4, viewer, assignment[viewer], mates)
                for event in streams[viewer]:
                    belief = bf.update(belief, event, policy)
                    total = sum(w for _, w in belief.particles)
                    assert total == pytest.approx(1.0, abs=1e-9)
                    marg = bf.predict(belief)["marginals"]
                    for role, count in enumerate(config4.role_counts):
                        assert marg[:, role].sum() == pytest.approx(count, abs=1e-9)
                # the true assignment never leaves the support
                assert assignment in belief.support


class TestOracleEquivalence:
    @pytest.mark.parametrize("policy_kind", ["uniform", "trained"])
    def test_filter_matches_enumeration(self, config4, policy_kind):
        policy = bf.UNIFORM if policy_kind == "uniform" else trained_policy(config4)
        for seed in range(6):
            # replays sampled from the same behaviour model the belief uses,
            # so the observed path always has positive likelihood
            assignment, actions = run_game(
                config4, seed + 100, None if policy_kind == "uniform" else policy)
            streams = bf.events_for_viewers(config4, assignment, actions)
            for viewer in range(4):
                mates = ()
                if assignment[viewer] == W:
                    mates = tuple(p for p in range(4)
                                  if p != viewer and assignment[p] == W)
                events = streams[viewer]
                fine, boundaries = fine_stream(events)
                belief = bf.init_belief(config4, viewer, assignment[viewer], mates)
                for idx, event in enumerate(events):
                    belief = bf.update(belief, event, policy)
                    expected = oracle_posterior(
                        config4, viewer, assignment[viewer], mates,
                        fine[:boundaries[idx]], policy)
                    got = belief.assignment_posterior()
                    assert set(got) == set(expected)
                    for deal, prob in expected.items():
                        assert got[deal] == pytest.approx(prob, abs=1e-9)


class TestPredict:
    def test_concentrated_posterior(self, config4):
        deal = (W, S, V, V)
        state = ww.new_game(config4, deal)
        belief = bf.Belief(1, config4, [(state, 1.0)])
        result = bf.predict(belief)
        assert result["argmax"] == list(deal)

    def test_tie_breaks_to_lower_role_index(self, config4):
        a = ww.new_game(config4, (W, S, V, V))
        b = ww.new_game(config4, (V, S, W, V))
        belief = bf.Belief(1, config4, [(a, 0.5), (b, 0.5)])
        result = bf.predict(belief)
        assert result["argmax"][0] == W  # 0.5 wolf vs 0.5 villager: wolf first

    def test_accuracy_scoring(self, config4):
        deal = (W, S, V, V)
        state = ww.new_game(config4, deal)
        belief = bf.Belief(1, config4, [(state, 1.0)])
        assert bf.prediction_accuracy(belief, deal) == 1.0
        assert bf.prediction_accuracy(belief, (V, S, W, V)) == pytest.approx(1 / 3)
