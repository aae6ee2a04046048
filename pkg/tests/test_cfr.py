import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latentcfr import cfr, kuhn, rpssl
from latentcfr.exploit import TreeIndex, best_response, exploitability_profile, policy_values


class TestRegretMatching:
    def test_worked_examples(self):
        assert cfr.regret_matching(np.array([2.0, -1.0, 3.0])).tolist() == [0.4, 0.0, 0.6]
        assert cfr.regret_matching(np.array([-5.0, -2.0])).tolist() == [0.5, 0.5]
        assert cfr.regret_matching(np.array([1.0, 1.0, 1.0, 1.0])).tolist() == [0.25] * 4

    def test_no_actions(self):
        with pytest.raises(cfr.NoActions):
            cfr.regret_matching(np.array([]))

    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6,
                              allow_nan=False), min_size=1, max_size=12))
    def test_always_a_distribution(self, values):
        probs = cfr.regret_matching(np.array(values))
        assert np.all(probs >= 0)
        assert probs.sum() == pytest.approx(1.0, abs=1e-9)


def solve_rpssl(actions=rpssl.ACTIONS, iterations=1000, **kwargs):
    game = rpssl.RpsslGame(actions)
    config = cfr.SolverConfig(iterations=iterations, seed=1, **kwargs)
    return game, cfr.solve(game, config)


class TestRpsslSolve:
    def test_full_game_reaches_uniform(self):
        game, checkpoint = solve_rpssl(iterations=200)
        state = game.initial_state()
        key0 = game.infoset_key(state)
        avg = checkpoint.policy.probs(key0, 5)
        assert np.abs(avg - 0.2).sum() <= 0.02
        assert rpssl.exploitability(avg) <= 0.01

    def test_restricted_rps_uniform(self):
        subset = ("Rock", "Paper", "Scissors")
        game, checkpoint = solve_rpssl(subset, iterations=2000)
        key = game.infoset_key(game.initial_state())
        avg = checkpoint.policy.probs(key, 3)
        assert np.abs(avg - 1 / 3).sum() <= 0.02

    def test_single_iteration_checkpoint_uniform_rows(self):
        game, checkpoint = solve_rpssl(iterations=1)
        assert checkpoint.policy.probs("never-visited", 4).tolist() == [0.25] * 4

    def test_determinism_bit_identical(self, tmp_path):
        _, a = solve_rpssl(iterations=50, traversal="external_sampling")
        _, b = solve_rpssl(iterations=50, traversal="external_sampling")
        a.save(tmp_path / "a.json")
        b.save(tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_plus_variant_no_negative_regrets(self):
        _, checkpoint = solve_rpssl(iterations=100, plus_variant=True)
        for row in checkpoint.tables.regrets.values():
            assert np.all(row >= 0.0)

    def test_sublinear_positive_regret(self):
        game = rpssl.RpsslGame(("Rock", "Paper", "Scissors", "Spock"))
        tables = cfr.Tables()
        config = cfr.SolverConfig(iterations=1, seed=0)
        rng = np.random.default_rng(0)
        ratios = []
        for t in range(1, 3001):
            for player in (0, 1):
                cfr.cfr_iteration(game, tables, config, player, rng)
            if t in (300, 1000, 3000):
                max_pos = max(float(np.max(np.clip(row, 0, None)))
                              for row in tables.regrets.values())
                ratios.append(max_pos / t)
        assert ratios[0] > ratios[1] > ratios[2]

    def test_checkpoint_roundtrip(self, tmp_path):
        game, checkpoint = solve_rpssl(iterations=20)
        checkpoint.game_spec = {"game": "rpssl", "actions": list(game.actions)}
        path = tmp_path / "ck.json.gz"
        checkpoint.save(path)
        loaded = cfr.Checkpoint.load(path)
        assert loaded.game_spec == checkpoint.game_spec
        assert loaded.config == checkpoint.config
        assert loaded.tables.iterations_done == checkpoint.tables.iterations_done
        for key, row in checkpoint.tables.regrets.items():
            assert np.array_equal(loaded.tables.regrets[key], row)


KUHN_TREE = TreeIndex(kuhn.KuhnGame())


class TestKuhn:
    def test_full_cfr_value_converges(self):
        game = kuhn.KuhnGame()
        checkpoint = cfr.solve(game, cfr.SolverConfig(iterations=2000, seed=3))
        values = policy_values(KUHN_TREE, checkpoint.policy)
        assert values[0] == pytest.approx(-1 / 18, abs=0.005)

    def test_es_mccfr_value_and_br_cross_check(self):
        game = kuhn.KuhnGame()
        config = cfr.SolverConfig(iterations=20_000, seed=5,
                                  traversal="external_sampling")
        checkpoint = cfr.solve(game, config)
        values = policy_values(KUHN_TREE, checkpoint.policy)
        assert values[0] == pytest.approx(-1 / 18, abs=0.01)
        profile = exploitability_profile(game, checkpoint.policy, KUHN_TREE)
        assert profile["aggregate"] < 0.05
        for gain in profile["per_player"]:
            assert gain >= 0.0

    def test_br_vs_uniform_matches_exhaustive_enumeration(self):
        # brute force: every deterministic responder strategy over its infosets
        game = kuhn.KuhnGame()
        uniform = cfr.AveragePolicy({})
        br_value, br_actions = best_response(KUHN_TREE, uniform, 0)

        keys = sorted({n.key for n in KUHN_TREE.nodes
                       if n.kind.value == "decision" and n.player == 0})
        best = -np.inf
        for mask in range(2 ** len(keys)):
            choice = {k: (mask >> i) & 1 for i, k in enumerate(keys)}

            def walk(state):
                kind = game.node_kind(state)
                if kind.is_terminal:
                    return game.utilities(state)[0]
                if kind.is_chance:
                    return sum(p * walk(game.step(state, a))
                               for a, p in game.chance_outcomes(state))
                n = game.num_actions(state)
                if kind.player == 0:
                    return walk(game.step(state, choice[game.infoset_key(state)]))
                return sum(walk(game.step(state, a)) / n for a in range(n))

            best = max(best, walk(game.initial_state()))
        assert br_value == pytest.approx(best, abs=1e-12)


class TestBestResponseRpssl:
    def test_br_vs_uniform_is_zero(self):
        game = rpssl.RpsslGame()
        tree = TreeIndex(game)
        value, _ = best_response(tree, cfr.AveragePolicy({}), 0)
        assert value == pytest.approx(0.0, abs=1e-12)

    def test_br_vs_pure_rock(self):
        game = rpssl.RpsslGame()
        tree = TreeIndex(game)
        key1 = game.infoset_key(game.step(game.initial_state(), 0))
        rock_policy = cfr.AveragePolicy({key1: np.array([1.0, 0, 0, 0, 0])})
        value, actions = best_response(tree, rock_policy, 0)
        assert value == pytest.approx(1.0)
        key0 = game.infoset_key(game.initial_state())
        assert rpssl.ACTIONS[actions[key0]] in ("Paper", "Spock")

    def test_pure_rock_profile_aggregate(self):
        game = rpssl.RpsslGame()
        rows = {}
        for state in (game.initial_state(), game.step(game.initial_state(), 0)):
            rows[game.infoset_key(state)] = np.array([1.0, 0, 0, 0, 0])
        profile = exploitability_profile(game, cfr.AveragePolicy(rows))
        assert profile["aggregate"] == pytest.approx(1.0)

    def test_exploitability_decreases_with_training(self):
        game = rpssl.RpsslGame(("Rock", "Paper", "Scissors", "Spock"))
        tree = TreeIndex(game)
        tables = cfr.Tables()
        config = cfr.SolverConfig(iterations=1, seed=0)
        rng = np.random.default_rng(0)
        snapshots = []
        for t in range(1, 1201):
            for player in (0, 1):
                cfr.cfr_iteration(game, tables, config, player, rng)
            if t in (120, 400, 1200):
                policy = cfr.AveragePolicy(dict(tables.strategy_sum))
                snapshots.append(exploitability_profile(game, policy, tree)["aggregate"])
        # beyond the noisy start, exploitability must not rise (5% headroom)
        assert snapshots[1] <= snapshots[0] * 1.05
        assert snapshots[2] <= snapshots[1] * 1.05


class TestDepthLimited:
    def test_depth_beyond_height_matches_exact(self):
        game = kuhn.KuhnGame()
        tables = cfr.Tables()
        exact = policy_values(KUHN_TREE, cfr.AveragePolicy({}))
        est = cfr.depth_limited_value(
            game, game.initial_state(), tables, depth=10,
            rollout_policy=cfr.AveragePolicy({}), seed=0)
        # with uniform regrets the current strategy is uniform = the policy
        assert np.allclose(est, exact, atol=1e-12)

    def test_depth_zero_terminal_exact(self):
        game = rpssl.RpsslGame()
        state = game.step(game.step(game.initial_state(), 0), 2)
        est = cfr.depth_limited_value(game, state, cfr.Tables(), 0,
                                      cfr.AveragePolicy({}), seed=0)
        assert tuple(est) == (1.0, -1.0)

    def test_rollout_estimate_unbiased_vs_brute_force(self):
        from latentcfr import werewolf as ww

        game = ww.WerewolfGame(ww.four_player_config())
        state = game.step(game.initial_state(), 0)
        tables = cfr.Tables()
        policy = cfr.AveragePolicy({})
        est = cfr.depth_limited_value(game, state, tables, depth=1,
                                      rollout_policy=policy, seed=11,
                                      rollouts_per_leaf=400)
        rng = np.random.default_rng(99)
        samples = []
        for _ in range(4000):
            samples.append(cfr._rollout(game, state, policy, rng))
        samples = np.array(samples)
        se = samples.std(axis=0) / np.sqrt(len(samples))
        diff = np.abs(est - samples.mean(axis=0))
        assert np.all(diff <= 3 * se + 1e-9)


class TestNodeCap:
    def test_oversized_game_rejected(self):
        from latentcfr import werewolf as ww
        from latentcfr.exploit import GameTooLarge

        game = ww.WerewolfGame(ww.GameConfig())  # 7-player tree is enormous
        with pytest.raises(GameTooLarge):
            TreeIndex(game, node_cap=10_000)


class TestSharded:
    def test_merge_matches_sequential_shards(self):
        game = kuhn.KuhnGame()
        config = cfr.SolverConfig(iterations=40, seed=9, traversal="external_sampling")
        merged = cfr.solve_sharded(game, config, workers=2)
        manual = cfr.Tables()
        for shard in range(2):
            shard_cfg = cfr.SolverConfig(iterations=40, seed=9 + shard,
                                         traversal="external_sampling")
            ck = cfr.solve(game, shard_cfg)
            for key, row in ck.tables.regrets.items():
                acc = manual.regret_row(key, len(row))
                acc += row
            for key, row in ck.tables.strategy_sum.items():
                acc = manual.strategy_row(key, len(row))
                acc += row
        assert set(merged.tables.regrets) == set(manual.regrets)
        for key, row in manual.regrets.items():
            assert np.allclose(merged.tables.regrets[key], row)
