# (C) Copyright 2026 emergelib contributors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# Created on Oct 13, 2026
import math
import os
import tempfile
import unittest
import warnings

import numpy as np

from emergelib.diffcore import Tape
from emergelib.env import EpisodeSpec, COMM, GAZE_VISIBLE, GOTO, LOOKAT, goal_prediction_targets
from emergelib.policy import PolicyParams, load_checkpoint
from emergelib.training import (TrainConfig, UtteranceCounts, goal_prediction_reward, vocab_reward_dp,
                                dirichlet_log_probs, count_active_symbols, OptimizerState, adam_step,
                                clip_by_global_norm, rollout_batch, BPTTTrainer, train, evaluate,
                                train_test_comparison, METRICS_FIELDS)
from emergelib.training.trainer import METRICS_FILE, USAGE_FILE, CHECKPOINT_FILE
from emergelib.utils.exceptions import ParameterError, ShapeMismatchError, SkippedStepWarning, ContractError
from emergelib.utils.general_tools import read_jsonl
from emergelib.utils.random_streams import RandomStreams


def tiny_config(**overrides):
    values = dict(spec=EpisodeSpec(n_agents=2, n_landmarks=1, vocab_size=4, horizon=3, mode=COMM),
                  batch_size=2, iterations=2, hidden=8, features=6, memory=3, seed=7)
    values.update(overrides)
    return TrainConfig(**values)


def initial_params(config):
    return PolicyParams.initialize(rng=RandomStreams(config.seed).generator("init"),
                                   **config.architecture)


def brute_force_vocab_reward(symbols, alpha):
    """Sum over utterances of log p(symbol) under the Chinese-restaurant predictive."""
    n = len(symbols)
    total = 0.0
    for symbol in symbols:
        n_k = symbols.count(symbol)
        total += math.log(min(1.0, n_k / (alpha + n - 1)))
    return total


class TestVocabularyReward(unittest.TestCase):
    def test_worked_example(self):
        # Symbols A, A, B.
        self.assertAlmostEqual(vocab_reward_dp(np.array([2.0, 1.0]), alpha=1.0), -1.9095, places=4)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for trial in range(20):
            symbols = list(rng.integers(1, 6, size=rng.integers(1, 15)))
            alpha = float(rng.uniform(0.1, 3.0))
            counts = np.bincount(symbols, minlength=6)[1:]
            with self.subTest(trial=trial):
                self.assertAlmostEqual(vocab_reward_dp(counts, alpha),
                                       brute_force_vocab_reward(symbols, alpha), places=10)

    def test_non_positive(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            counts = rng.uniform(0, 5, size=6) * (rng.random(6) > 0.3)
            self.assertLessEqual(vocab_reward_dp(counts, alpha=float(rng.uniform(0.01, 2))), 0.0)

    def test_probability_is_clipped(self):
        # A single fractional utterance with a tiny alpha would give p > 1.
        log_p = dirichlet_log_probs(np.array([0.5, 0.0]), alpha=0.1)
        np.testing.assert_array_equal(log_p, [0.0, 0.0])

    def test_nothing_said(self):
        self.assertEqual(vocab_reward_dp(np.zeros(4), alpha=1.0), 0.0)
        self.assertEqual(UtteranceCounts(np.zeros(3)).n, 0.0)

    def test_invalid_alpha(self):
        with self.assertRaises(ParameterError):
            vocab_reward_dp(np.ones(3), alpha=0.0)

    def test_counts_drop_silence(self):
        utterances = np.eye(4)[[[0, 1], [1, 3]]]
        counts = UtteranceCounts.from_utterances(utterances)
        np.testing.assert_array_equal(counts.counts, [2.0, 0.0, 1.0])

    def test_gradient_flows_through_counts_only(self):
        tape = Tape()
        counts = tape.parameter(np.array([2.0, 1.0]), name="counts")
        reward = vocab_reward_dp(counts, alpha=1.0)
        grads = tape.backward(reward)
        np.testing.assert_allclose(grads["counts"], np.log([2 / 3, 1 / 3]))

    def test_active_symbols(self):
        self.assertEqual(count_active_symbols(np.array([100, 50, 50, 0, 0])), 2)
        self.assertEqual(count_active_symbols(np.array([10, 0, 0])), 0)
        self.assertEqual(count_active_symbols(np.array([0, 995, 5]), threshold=0.01), 1)


class TestGoalPredictionReward(unittest.TestCase):
    def test_perfect_prediction(self):
        targets = np.random.default_rng(0).normal(size=(3, 2, 1, 8))
        np.testing.assert_array_equal(goal_prediction_reward(targets, targets), np.zeros(3))

    def test_squared_error(self):
        predictions = np.zeros((1, 2, 1, 8))
        targets = np.ones((1, 2, 1, 8))
        np.testing.assert_array_equal(goal_prediction_reward(predictions, targets), [-16.0])

    def test_tensor_matches_arrays(self):
        rng = np.random.default_rng(2)
        predictions, targets = rng.normal(size=(2, 3, 2, 8)), rng.normal(size=(2, 3, 2, 8))
        tape = Tape()
        on_tape = goal_prediction_reward(tape.constant(predictions), targets)
        np.testing.assert_allclose(on_tape.value, goal_prediction_reward(predictions, targets))


class TestOptimizer(unittest.TestCase):
    def test_zero_gradient_keeps_weights(self):
        params = {"w": np.array([1.0, -2.0])}
        updated, state, info = adam_step(params, {"w": np.zeros(2)}, OptimizerState())
        np.testing.assert_array_equal(updated["w"], params["w"])
        self.assertEqual(state.step, 1)
        self.assertEqual(info["grad_norm"], 0.0)

    def test_first_step_is_ascent_of_size_lr(self):
        params = {"w": np.zeros(3)}
        grads = {"w": np.array([2.0, -0.5, 1e-3])}
        updated, _, _ = adam_step(params, grads, OptimizerState(), lr=0.01)
        np.testing.assert_allclose(updated["w"], 0.01 * np.sign(grads["w"]), rtol=1e-4)

    def test_clipping(self):
        clipped, norm = clip_by_global_norm({"a": np.array([3.0]), "b": np.array([4.0])}, 1.0)
        self.assertEqual(norm, 5.0)
        np.testing.assert_allclose([clipped["a"][0], clipped["b"][0]], [0.6, 0.8])
        unchanged, _ = clip_by_global_norm({"a": np.array([0.3])}, 1.0)
        np.testing.assert_array_equal(unchanged["a"], [0.3])

    def test_non_finite_gradient_skips_the_step(self):
        params = {"w": np.ones(2)}
        state = OptimizerState.zeros_like(params)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            updated, new_state, info = adam_step(params, {"w": np.array([np.nan, 1.0])}, state)
        self.assertTrue(any(issubclass(w.category, SkippedStepWarning) for w in caught))
        self.assertTrue(info["skipped"])
        self.assertIs(new_state, state)
        np.testing.assert_array_equal(updated["w"], params["w"])

    def test_mismatched_gradients(self):
        with self.assertRaises(ShapeMismatchError):
            adam_step({"w": np.ones(2)}, {"w": np.ones(3)}, OptimizerState())
        with self.assertRaises(ShapeMismatchError):
            adam_step({"w": np.ones(2)}, {"v": np.ones(2)}, OptimizerState())

    def test_state_round_trip(self):
        params = {"w": np.array([0.1, 0.2])}
        _, state, _ = adam_step(params, {"w": np.array([0.3, -0.7])}, OptimizerState())
        restored = OptimizerState.from_dict(state.to_dict())
        self.assertEqual(restored.step, 1)
        np.testing.assert_array_equal(restored.second_moment["w"], state.second_moment["w"])


class TestTrainConfig(unittest.TestCase):
    def test_invalid_values(self):
        for kwargs in (dict(batch_size=0), dict(alpha=0.0), dict(tau=-1.0), dict(dropout=1.0),
                       dict(iterations=-1), dict(goal_weight=-0.1), dict(seed=-3)):
            with self.subTest(**kwargs):
                with self.assertRaises(ParameterError):
                    TrainConfig(**kwargs)

    def test_dict_round_trip(self):
        config = tiny_config(alpha=0.5)
        self.assertEqual(TrainConfig.from_dict(config.to_dict()), config)

    def test_full_scale(self):
        config = TrainConfig.full_scale(iterations=3)
        self.assertEqual((config.hidden, config.features, config.batch_size), (256, 256, 1024))


class TestRollout(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.config = tiny_config()
        cls.params = initial_params(cls.config)
        cls.result = rollout_batch(cls.params, cls.config, RandomStreams(cls.config.seed), iteration=0)

    def test_return_is_the_sum_of_its_components(self):
        c = self.result.components
        self.assertAlmostEqual(c["r_total"], c["r_phys"] + c["r_utt"] + c["r_g"] + c["r_c"], places=10)
        self.assertLessEqual(c["r_c"], 0.0)
        self.assertLessEqual(c["r_g"], 0.0)

    def test_return_weights_the_batch_vocabulary_reward_once(self):
        config = self.config.replace(goal_weight=0.3, vocab_weight=0.7)
        result = rollout_batch(self.params, config, RandomStreams(config.seed), iteration=0)
        self.assertGreater(result.batch.batch_size, 1)
        soft_counts = np.stack([u.value for u in result.trajectory.utterances]).sum(axis=(0, 1, 2))
        r_c = vocab_reward_dp(soft_counts[1:], config.alpha)
        logs = result.episode_logs
        expected = (np.mean(logs["r_phys"] + logs["r_utt"]) + 0.3 * np.mean(logs["r_g"]) + 0.7 * r_c)
        self.assertAlmostEqual(result.total.item(), expected, places=8)
        self.assertAlmostEqual(result.components["r_c"], 0.7 * r_c, places=8)

    def test_goal_targets_are_in_the_predictor_frame(self):
        trajectory = self.result.trajectory
        last_observed = trajectory.states[-2].position.value  # state the final step acted on
        np.testing.assert_array_equal(trajectory.final_goal_vectors,
                                      goal_prediction_targets(self.result.batch, last_observed))

    def test_shapes(self):
        arrays = self.result.trajectory.arrays()
        self.assertEqual(arrays["positions"].shape, (3, 2, 2, 2))
        self.assertEqual(arrays["utterances"].shape, (3, 2, 2, 4))
        self.assertEqual(len(self.result.episode_logs), 2)
        self.assertEqual(int(self.result.usage.sum()), 3 * 2 * 2)

    def test_reproducible(self):
        first_run = rollout_batch(self.params, self.config, RandomStreams(self.config.seed), iteration=0)
        again = rollout_batch(self.params, self.config, RandomStreams(self.config.seed), iteration=0)
        self.assertEqual(again.total.item(), self.result.total.item())
        first = first_run.tape.backward(first_run.total)
        second = again.tape.backward(again.total)
        for name in first:
            np.testing.assert_array_equal(first[name], second[name])

    def test_episode_keys_fix_the_worlds(self):
        streams = RandomStreams(self.config.seed)
        keys = [(5, 1), (5, 0)]
        swapped = rollout_batch(self.params, self.config, streams, episode_keys=keys)
        single = rollout_batch(self.params, self.config, streams, episode_keys=[(5, 0)])
        np.testing.assert_array_equal(swapped.batch.agent_positions[1], single.batch.agent_positions[0])

    def test_gradient_matches_finite_differences(self):
        # The goal-prediction target and the vocabulary probabilities are detached by
        # construction, so only the physical and utterance terms are checked numerically.
        config = self.config.replace(goal_weight=0.0, vocab_weight=0.0)
        streams = RandomStreams(config.seed)
        result = rollout_batch(self.params, config, streams, iteration=0)
        grads = result.tape.backward(result.total)
        rng = np.random.default_rng(11)
        step = 1e-6
        for name in ("phys_encoder.W1", "comm_encoder.W2", "output_module.W3", "output_module.b3",
                     "phys_default"):
            shape = self.params.arrays[name].shape
            index = tuple(int(rng.integers(s)) for s in shape)
            values = []
            for sign in (1.0, -1.0):
                array = self.params.arrays[name].copy()
                array[index] += sign * step
                shifted = rollout_batch(self.params.replace({name: array}), config, streams, iteration=0)
                values.append(shifted.total.item())
            numerical = (values[0] - values[1]) / (2 * step)
            analytic = grads[name][index]
            with self.subTest(name=name, index=index):
                self.assertLessEqual(abs(numerical - analytic),
                                     1e-4 * max(1.0, abs(numerical), abs(analytic)))

    def test_silent_mode_has_no_vocabulary_terms(self):
        config = tiny_config(spec=EpisodeSpec(n_agents=2, n_landmarks=2, vocab_size=4, horizon=3,
                                              mode=GAZE_VISIBLE, actions=(GOTO, LOOKAT)))
        result = rollout_batch(initial_params(config), config, RandomStreams(0))
        self.assertEqual(result.components["r_c"], 0.0)
        self.assertEqual(result.components["r_g"], 0.0)
        self.assertEqual(result.components["r_utt"], 0.0)
        self.assertEqual(int(result.usage[1:].sum()), 0)


class TestTrainer(unittest.TestCase):
    def test_zero_iterations(self):
        config = tiny_config(iterations=0)
        with tempfile.TemporaryDirectory() as tmp:
            params, history = train(config, out_dir=tmp)
            self.assertEqual(os.path.getsize(os.path.join(tmp, METRICS_FILE)), 0)
            self.assertEqual(os.path.getsize(os.path.join(tmp, USAGE_FILE)), 0)
            checkpoint = load_checkpoint(os.path.join(tmp, CHECKPOINT_FILE))
        self.assertTrue(params.equals(initial_params(config)))
        self.assertTrue(checkpoint["params"].equals(params))
        self.assertIsNone(checkpoint["iteration"])
        self.assertEqual(list(history.columns), list(METRICS_FIELDS))
        self.assertTrue(history.empty)

    def test_logs_and_determinism(self):
        config = tiny_config()
        with tempfile.TemporaryDirectory() as tmp:
            params, history = train(config, out_dir=tmp)
            rows = read_jsonl(os.path.join(tmp, METRICS_FILE))
            usage = read_jsonl(os.path.join(tmp, USAGE_FILE))
        again, _ = train(config)
        self.assertTrue(params.equals(again))
        self.assertFalse(params.equals(initial_params(config)))
        self.assertEqual([r["iter"] for r in rows], [0, 1])
        self.assertEqual(set(rows[0]), set(METRICS_FIELDS))
        self.assertIsNone(rows[0]["seconds"])
        self.assertEqual(sum(usage[0]["counts"]), 3 * 2 * 2)
        np.testing.assert_allclose(history["r_total"].to_numpy(), [r["r_total"] for r in rows])

    def test_resume_is_bit_exact(self):
        config = tiny_config(iterations=3)
        straight, _ = train(config)
        with tempfile.TemporaryDirectory() as tmp:
            train(config.replace(iterations=1), out_dir=tmp)
            trainer = BPTTTrainer(config, out_dir=tmp).fit(resume=os.path.join(tmp, CHECKPOINT_FILE))
            rows = read_jsonl(os.path.join(tmp, METRICS_FILE))
        self.assertTrue(trainer.params_.equals(straight))
        self.assertEqual(trainer.optimizer_state_.step, 3)
        self.assertEqual([r["iter"] for r in rows], [0, 1, 2])

    def test_architecture_mismatch(self):
        config = tiny_config()
        with self.assertRaises(ContractError):
            train(config, params=initial_params(config.replace(hidden=5)))


class TestEvaluate(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.config = tiny_config()
        cls.params = initial_params(cls.config)

    def test_zero_episodes(self):
        result = evaluate(self.params, self.config.spec, episodes=0, config=self.config)
        self.assertEqual(result.report["n_episodes"], 0)
        self.assertIsNone(result.report["goal_completion"])
        self.assertEqual(int(result.usage.sum()), 0)
        self.assertEqual(result.trajectories, [])

    def test_histogram_counts_every_utterance(self):
        spec = self.config.spec
        result = evaluate(self.params, spec, episodes=5, config=self.config, batch_size=2)
        self.assertEqual(int(result.usage.sum()), 5 * spec.horizon * spec.n_agents)
        self.assertEqual(result.report["total_utterances"], int(result.usage.iloc[1:].sum()))
        self.assertEqual(len(result.records), 5)
        self.assertEqual([r.episode for r in result.records], list(range(5)))

    def test_batching_does_not_change_episodes(self):
        spec = self.config.spec
        small = evaluate(self.params, spec, episodes=4, config=self.config, batch_size=1)
        large = evaluate(self.params, spec, episodes=4, config=self.config, batch_size=4)
        for a, b in zip(small.records, large.records):
            np.testing.assert_allclose(a.positions, b.positions, rtol=1e-12, atol=1e-12)
            np.testing.assert_array_equal(a.symbols, b.symbols)

    def test_evaluation_is_deterministic(self):
        spec = self.config.spec
        first = evaluate(self.params, spec, episodes=3, config=self.config)
        second = evaluate(self.params, spec, episodes=3, config=self.config)
        self.assertEqual(first.report.to_dict(), second.report.to_dict())

    def test_other_arity(self):
        spec = self.config.spec.replace(n_agents=3, n_landmarks=4)
        result = evaluate(self.params, spec, episodes=2, config=self.config)
        self.assertEqual(result.records[0].n_agents, 3)
        self.assertEqual(result.records[0].n_landmarks, 4)

    def test_vocabulary_mismatch(self):
        with self.assertRaises(ContractError):
            evaluate(self.params, self.config.spec.replace(vocab_size=9), episodes=1)

    def test_train_test_comparison(self):
        table = train_test_comparison(self.params, self.config.spec, episodes=2, config=self.config)
        self.assertEqual(list(table.index), ["train", "test"])
        self.assertEqual(list(table.columns), ["mean_r_phys", "goal_completion"])


if __name__ == "__main__":
    unittest.main()
