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

# Created on Oct 11, 2026
import os
import tempfile
import unittest

import numpy as np

from emergelib import diffcore as dc
from emergelib.diffcore import Tape
from emergelib.env import (EpisodeSpec, EntityState, Goal, WorldState, GOTO, LOOKAT, DONOTHING,
                           COMM, GAZE_VISIBLE, POSITION_VISIBLE, BLIND, SILENCE, GOAL_WIDTH,
                           sample_world, assign_goals, sample_episode, stack_worlds, rotation,
                           PhysicalState, interaction_forces, pair_forces, step_physics,
                           observe, goal_prediction_targets, physical_reward, utterance_cost, ENTITY_WIDTH,
                           trajectory_records, write_trajectories, read_trajectories,
                           TRAJECTORY_FIELDS, DEFAULT_PALETTE)
from emergelib.env.dynamics import FORCE_SCALE
from emergelib.utils.exceptions import SpecError, ShapeMismatchError, ContractError

PALETTE = np.array([rgb for _, rgb in DEFAULT_PALETTE])


def make_world(agent_positions, landmark_positions, goals, angles=None, velocities=None):
    agent_positions = np.asarray(agent_positions, dtype=float)
    landmark_positions = np.asarray(landmark_positions, dtype=float)
    n, m = len(agent_positions), len(landmark_positions)
    angles = np.zeros(n) if angles is None else np.asarray(angles, dtype=float)
    return WorldState(
        agent_positions=agent_positions,
        agent_velocities=np.zeros((n, 2)) if velocities is None else np.asarray(velocities, dtype=float),
        agent_gazes=agent_positions.copy(),
        agent_colors=PALETTE[:n],
        landmark_positions=landmark_positions,
        landmark_colors=PALETTE[n:n + m],
        frames=rotation(angles),
        goals=goals,
    )


class TestEpisodeSpec(unittest.TestCase):
    def test_presets(self):
        spec = EpisodeSpec.from_preset("1x2x3")
        self.assertEqual((spec.n_agents, spec.n_landmarks), (2, 3))
        self.assertEqual(spec.actions, (GOTO, LOOKAT))
        self.assertEqual(EpisodeSpec.from_preset("3x3x3").actions, (GOTO, LOOKAT, DONOTHING))
        with self.assertRaises(SpecError):
            EpisodeSpec.from_preset("9x9x9")

    def test_invalid_specs(self):
        for kwargs in (dict(vocab_size=1), dict(horizon=0), dict(n_landmarks=len(PALETTE) + 1),
                       dict(mode="telepathy"), dict(actions=("FLY",)), dict(n_agents=0)):
            with self.subTest(**{k: str(v) for k, v in kwargs.items()}):
                with self.assertRaises(SpecError):
                    EpisodeSpec(**kwargs)

    def test_dict_round_trip(self):
        spec = EpisodeSpec(n_agents=3, actions=(GOTO, LOOKAT), mode=GAZE_VISIBLE)
        self.assertEqual(EpisodeSpec.from_dict(spec.to_dict()), spec)

    def test_entity_state_invariants(self):
        with self.assertRaises(SpecError):
            EntityState(p=np.zeros(2), pdot=np.zeros(2), color=np.ones(3), radius=0.0, kind="agent")
        with self.assertRaises(SpecError):
            EntityState(p=np.zeros(2), pdot=np.ones(2), color=np.ones(3), radius=0.1, kind="landmark")
        with self.assertRaises(SpecError):
            EntityState(p=np.zeros(2), pdot=np.zeros(2), color=np.full(3, 2.0), radius=0.1, kind="agent")


class TestWorldSampling(unittest.TestCase):
    def test_sample_world_properties(self):
        spec = EpisodeSpec(n_agents=2, n_landmarks=3)
        rng = np.random.default_rng(0)
        for _ in range(1000):
            world = sample_world(spec, rng)
            self.assertEqual(len(world.entities), 5)
            self.assertEqual(world.frames.shape, (2, 2, 2))
            self.assertEqual(len({tuple(c) for c in world.landmark_colors}), 3)
            positions = np.vstack([world.agent_positions, world.landmark_positions])
            self.assertTrue(np.all(np.abs(positions) <= 1.0))
            np.testing.assert_array_equal(world.agent_velocities, 0.0)

    def test_frames_are_rotations(self):
        world = sample_world(EpisodeSpec(n_agents=4), np.random.default_rng(1))
        for frame in world.frames:
            np.testing.assert_allclose(frame @ frame.T, np.eye(2), atol=1e-12)
            self.assertAlmostEqual(np.linalg.det(frame), 1.0)

    def test_minimal_world(self):
        world = sample_world(EpisodeSpec(n_agents=1, n_landmarks=1), np.random.default_rng(0))
        self.assertEqual(len(world.entities), 2)

    def test_assign_goals_properties(self):
        spec = EpisodeSpec(n_agents=2, n_landmarks=3)
        rng = np.random.default_rng(2)
        for _ in range(1000):
            world = sample_world(spec, rng)
            goals = assign_goals(spec, world, rng)
            self.assertEqual(sorted(g.recipient for g in goals), [0, 1])
            for goal in goals:
                self.assertEqual(goal.action, GOTO)
                self.assertTrue(np.any(np.all(world.landmark_positions == goal.target, axis=1)))

    def test_donothing_targets_initial_position(self):
        spec = EpisodeSpec(n_agents=3, actions=(DONOTHING,))
        world = sample_episode(spec, np.random.default_rng(3))
        for goal in world.goals:
            np.testing.assert_array_equal(goal.target, world.agent_positions[goal.recipient])

    def test_same_key_same_world(self):
        spec = EpisodeSpec.from_preset("3x3x3")
        first = sample_episode(spec, np.random.default_rng(7))
        second = sample_episode(spec, np.random.default_rng(7))
        np.testing.assert_array_equal(first.agent_positions, second.agent_positions)
        self.assertEqual([g.to_dict() for g in first.goals], [g.to_dict() for g in second.goals])

    def test_stack_worlds(self):
        spec = EpisodeSpec(n_agents=2, n_landmarks=3)
        worlds = [sample_episode(spec, np.random.default_rng(s)) for s in range(4)]
        batch = stack_worlds(worlds)
        self.assertEqual(batch.batch_size, 4)
        self.assertEqual(batch.goal_targets.shape, (4, 2, 2))
        np.testing.assert_array_equal(batch.episode(2).agent_positions, worlds[2].agent_positions)
        with self.assertRaises(ShapeMismatchError):
            stack_worlds([])
        other = sample_episode(EpisodeSpec(n_agents=3), np.random.default_rng(0))
        with self.assertRaises(ShapeMismatchError):
            stack_worlds(worlds + [other])


class TestDynamics(unittest.TestCase):
    def test_far_apart_agents_barely_interact(self):
        forces = interaction_forces(np.array([[[-0.9, 0.0], [0.9, 0.0]]]), 0.08)
        self.assertLess(np.abs(forces.value).max(), 1e-3 * FORCE_SCALE)

    def test_forces_are_antisymmetric(self):
        positions = np.random.RandomState(0).uniform(-0.2, 0.2, size=(5, 4, 2))
        forces = interaction_forces(positions, 0.08).value
        np.testing.assert_allclose(forces.sum(axis=1), 0.0, atol=1e-12)
        pair = interaction_forces(positions[:, :2], 0.08).value
        np.testing.assert_array_equal(pair[:, 0], -pair[:, 1])

    def test_coincident_centres_use_fixed_direction(self):
        forces = pair_forces(Tape().constant(np.zeros((1, 2, 2))), 0.08).value
        self.assertGreater(forces[0, 0, 0], 0)
        self.assertEqual(forces[0, 0, 1], 0.0)
        self.assertTrue(np.all(np.isfinite(forces)))

    def test_single_agent_has_no_force(self):
        np.testing.assert_array_equal(interaction_forces(np.ones((2, 1, 2)), 0.08).value, 0.0)

    def test_force_gradient(self):
        inputs = {"p": np.array([[[0.0, 0.0], [0.1, 0.05], [-0.05, 0.12]]])}

        def build(tape, t):
            return dc.reduce("sum", dc.sqrt(dc.reduce("sqnorm", interaction_forces(t["p"], 0.08), axis=-1)))

        self.assertLess(dc.check_gradients(build, inputs).max(), 1e-5)

    def _state(self, p, pdot):
        tape = Tape()
        p, pdot = np.asarray(p, dtype=float), np.asarray(pdot, dtype=float)
        return PhysicalState(position=tape.constant(p), velocity=tape.constant(pdot),
                             gaze=tape.constant(p))

    def test_fixed_point(self):
        state = self._state([[[0.0, 0.0]]], [[[0.0, 0.0]]])
        nxt = step_physics(state, np.zeros((1, 1, 2)), np.zeros((1, 1, 2)), 0.08)
        np.testing.assert_array_equal(nxt.position.value, 0.0)
        np.testing.assert_array_equal(nxt.velocity.value, 0.0)

    def test_one_step(self):
        state = self._state([[[0.0, 0.0]]], [[[1.0, 0.0]]])
        nxt = step_physics(state, np.zeros((1, 1, 2)), np.array([[[0.3, 0.4]]]), 0.08)
        np.testing.assert_allclose(nxt.position.value, [[[0.1, 0.0]]])
        np.testing.assert_allclose(nxt.velocity.value, [[[0.5, 0.0]]])
        np.testing.assert_array_equal(nxt.gaze.value, [[[0.3, 0.4]]])

    def test_geometric_velocity_decay(self):
        state = self._state([[[0.0, 0.0]]], [[[0.8, -0.6]]])
        initial = np.linalg.norm(state.velocity.value)
        for t in range(1, 11):
            state = step_physics(state, np.zeros((1, 1, 2)), state.position, 0.08)
            self.assertEqual(np.linalg.norm(state.velocity.value), 0.5 ** t * initial)

    def test_reward_gradient_through_rollout(self):
        world = make_world([[0.3, -0.2], [-0.4, 0.1]], [[0.5, 0.5]],
                           [Goal(GOTO, np.array([0.5, 0.5]), 1), Goal(GOTO, np.array([0.5, 0.5]), 0)])
        batch = stack_worlds([world])
        inputs = {"u0": np.array([[[0.2, -0.1], [0.4, 0.3]]])}

        def build(tape, t):
            state = PhysicalState.from_batch(batch, tape)
            steps = []
            for step in range(5):
                u_p = t["u0"] if step == 0 else tape.constant(np.zeros((1, 2, 2)))
                state = step_physics(state, u_p, state.position, batch.agent_radius)
                steps.append((state, u_p))
            return dc.reduce("sum", physical_reward(steps, batch))

        self.assertLess(dc.check_gradients(build, inputs).max(), 1e-4)


class TestObservation(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.world = make_world([[0.2, 0.1], [-0.5, 0.4], [0.7, -0.3]], [[0.9, 0.9], [-0.8, -0.1]],
                               [Goal(GOTO, np.array([0.9, 0.9]), 1), Goal(LOOKAT, np.array([-0.8, -0.1]), 2),
                                Goal(DONOTHING, np.array([0.2, 0.1]), 0)],
                               angles=[0.3, 1.7, -2.2])

    def _observe(self, mode, world=None, k=5):
        world = self.world if world is None else world
        batch = stack_worlds([world])
        spec = EpisodeSpec(n_agents=batch.n_agents, n_landmarks=batch.n_landmarks,
                           actions=(GOTO, LOOKAT, DONOTHING), vocab_size=k, mode=mode)
        tape = Tape()
        state = PhysicalState.from_batch(batch, tape)
        utterances = tape.constant(np.random.RandomState(0).dirichlet(np.ones(k), size=(1, batch.n_agents)))
        return observe(spec, batch, state, utterances), batch

    def test_shapes_per_mode(self):
        for mode, visible_agents in ((COMM, 1), (GAZE_VISIBLE, 3), (POSITION_VISIBLE, 3), (BLIND, 1)):
            with self.subTest(mode=mode):
                obs, _ = self._observe(mode)
                self.assertEqual(obs.physical.shape, (1, 3, visible_agents + 2, ENTITY_WIDTH))
                self.assertEqual(obs.goal.shape, (1, 3, GOAL_WIDTH))
                if mode == COMM:
                    self.assertEqual(obs.streams.shape, (1, 3, 2, 5))
                else:
                    self.assertIsNone(obs.streams)

    def test_self_row_is_at_origin(self):
        obs, _ = self._observe(GAZE_VISIBLE)
        np.testing.assert_array_equal(obs.physical.value[0, :, 0, :2], 0.0)
        np.testing.assert_array_equal(obs.physical.value[0, :, 0, -1], 1.0)

    def test_rotation_preserves_distances(self):
        obs, batch = self._observe(GAZE_VISIBLE)
        for i in range(3):
            observed = np.linalg.norm(obs.physical.value[0, i, 3:, :2], axis=-1)
            true = np.linalg.norm(batch.landmark_positions[0] - batch.agent_positions[0, i], axis=-1)
            np.testing.assert_allclose(observed, true, atol=1e-12)

    def test_identity_frame(self):
        world = make_world([[0.2, 0.1], [-0.5, 0.4]], [[0.9, 0.9]],
                           [Goal(GOTO, np.array([0.9, 0.9]), 1), Goal(GOTO, np.array([0.9, 0.9]), 0)])
        obs, _ = self._observe(GAZE_VISIBLE, world)
        np.testing.assert_allclose(obs.physical.value[0, 0, 1, :2], [-0.7, 0.3], atol=1e-12)
        np.testing.assert_allclose(obs.physical.value[0, 0, 2, :2], [0.7, 0.8], atol=1e-12)

    def test_comm_mode_masks_other_agents(self):
        obs, _ = self._observe(COMM)
        moved = make_world([[0.2, 0.1], [0.6, 0.6], [-0.1, -0.9]], self.world.landmark_positions,
                           self.world.goals, angles=[0.3, 1.7, -2.2])
        moved_obs, _ = self._observe(COMM, moved)
        np.testing.assert_array_equal(obs.physical.value[0, 0], moved_obs.physical.value[0, 0])
        np.testing.assert_array_equal(obs.goal.value[0, 0], moved_obs.goal.value[0, 0])

    def test_position_visible_masks_gaze(self):
        obs, _ = self._observe(POSITION_VISIBLE)
        np.testing.assert_array_equal(obs.physical.value[0, :, 1:3, 4:6], 0.0)

    def test_goal_vector_layout(self):
        obs, batch = self._observe(COMM)
        goal = obs.goal.value[0]
        np.testing.assert_array_equal(goal[:, :3], np.eye(3))
        np.testing.assert_array_equal(goal[2, 3:5], 0.0)  # DONOTHING has no target offset
        np.testing.assert_array_equal(goal[0, 5:], batch.agent_colors[0, 1])
        self.assertAlmostEqual(np.linalg.norm(goal[0, 3:5]), np.linalg.norm([0.7, 0.8]))

    def test_prediction_targets_use_the_predictor_frame(self):
        obs, batch = self._observe(GAZE_VISIBLE)
        targets = goal_prediction_targets(batch, batch.agent_positions)
        self.assertEqual(targets.shape, (1, 3, 2, GOAL_WIDTH))
        landmark_rows = obs.physical.value[0, :, 3:, :2]  # rows after the three agents
        # Agent 0 predicts agent 1 (LOOKAT landmark 1) and agent 2 (DONOTHING).
        np.testing.assert_allclose(targets[0, 0, 0, 3:5], landmark_rows[0, 1], atol=1e-12)
        np.testing.assert_array_equal(targets[0, 0, 1, 3:5], 0.0)
        # Agent 1 predicts agent 0 (GOTO landmark 0).
        np.testing.assert_allclose(targets[0, 1, 0, 3:5], landmark_rows[1, 0], atol=1e-12)
        np.testing.assert_array_equal(targets[0, 0, 0, :3], [0.0, 1.0, 0.0])
        np.testing.assert_array_equal(targets[0, 1, 0, 5:], batch.agent_colors[0, 1])

        turned = make_world(self.world.agent_positions, self.world.landmark_positions, self.world.goals,
                            angles=[0.3, -0.4, 2.9])
        turned_targets = goal_prediction_targets(stack_worlds([turned]), batch.agent_positions)
        np.testing.assert_allclose(turned_targets[0, 0], targets[0, 0], atol=1e-12)

    def test_single_agent_view_and_arity_mismatch(self):
        obs, batch = self._observe(COMM)
        self.assertEqual(obs.agent(1).physical.shape, (1, 1, 3, ENTITY_WIDTH))
        with self.assertRaises(ContractError):
            obs.agent(3)
        tape = Tape()
        with self.assertRaises(ContractError):
            observe(EpisodeSpec(n_agents=2, n_landmarks=2), batch, PhysicalState.from_batch(batch, tape),
                    tape.constant(np.zeros((1, 3, 20))))


class TestRewards(unittest.TestCase):
    def _trajectory(self, positions, u_p=None, horizon=3):
        tape = Tape()
        positions = tape.constant(np.asarray(positions, dtype=float))
        state = PhysicalState(position=positions, velocity=positions * 0.0, gaze=positions)
        u_p = tape.constant(np.zeros(positions.shape)) if u_p is None else tape.constant(u_p)
        return [(state, u_p)] * horizon

    def test_recipient_on_target(self):
        world = make_world([[0.5, 0.5]], [[0.5, 0.5]], [Goal(GOTO, np.array([0.5, 0.5]), 0)])
        batch = stack_worlds([world])
        self.assertEqual(physical_reward(self._trajectory(batch.agent_positions), batch).value[0], 0.0)

    def test_unit_distance(self):
        world = make_world([[0.0, 0.0], [0.3, 0.3]], [[1.0, 0.0], [0.3, 1.3]],
                           [Goal(GOTO, np.array([1.0, 0.0]), 0), Goal(GOTO, np.array([0.3, 1.3]), 1)])
        batch = stack_worlds([world])
        np.testing.assert_allclose(physical_reward(self._trajectory(batch.agent_positions), batch).value, -1.0)

    def test_action_penalty(self):
        world = make_world([[0.5, 0.5]], [[0.5, 0.5]], [Goal(GOTO, np.array([0.5, 0.5]), 0)])
        batch = stack_worlds([world])
        trajectory = self._trajectory(batch.agent_positions, u_p=np.array([[[3.0, 4.0]]]))
        np.testing.assert_allclose(physical_reward(trajectory, batch, action_penalty=0.01).value, -0.25)

    def test_lookat_uses_gaze(self):
        world = make_world([[0.0, 0.0]], [[0.5, 0.5]], [Goal(LOOKAT, np.array([0.5, 0.5]), 0)])
        batch = stack_worlds([world])
        tape = Tape()
        position = tape.constant(np.zeros((1, 1, 2)))
        state = PhysicalState(position=position, velocity=position, gaze=tape.constant([[[0.5, 0.5]]]))
        self.assertEqual(physical_reward([(state, position)], batch).value[0], 0.0)

    def test_invariance_to_agent_relabeling_and_rigid_motion(self):
        positions = np.array([[0.1, 0.2], [-0.3, 0.5], [0.6, -0.4]])
        landmarks = np.array([[0.9, 0.1], [-0.7, -0.7]])
        goals = [Goal(GOTO, landmarks[0], 2), Goal(GOTO, landmarks[1], 0), Goal(GOTO, landmarks[0], 1)]
        batch = stack_worlds([make_world(positions, landmarks, goals)])
        reward = physical_reward(self._trajectory(batch.agent_positions), batch).value

        perm = np.array([2, 0, 1])  # new agent a is old agent perm[a]
        inverse = np.argsort(perm)
        relabeled = [Goal(goals[perm[h]].action, goals[perm[h]].target, int(inverse[goals[perm[h]].recipient]))
                     for h in range(3)]
        batch_relabeled = stack_worlds([make_world(positions[perm], landmarks, relabeled)])
        np.testing.assert_allclose(
            physical_reward(self._trajectory(batch_relabeled.agent_positions), batch_relabeled).value,
            reward, atol=1e-12)

        frame = rotation(0.9)
        shift = np.array([0.25, -0.4])
        moved = [Goal(g.action, g.target @ frame.T + shift, g.recipient) for g in goals]
        batch_moved = stack_worlds([make_world(positions @ frame.T + shift, landmarks @ frame.T + shift, moved)])
        np.testing.assert_allclose(
            physical_reward(self._trajectory(batch_moved.agent_positions), batch_moved).value,
            reward, atol=1e-12)

    def test_utterance_cost(self):
        tape = Tape()
        silence = np.zeros((1, 2, 4))
        silence[..., SILENCE] = 1.0
        self.assertEqual(utterance_cost([tape.constant(silence)] * 3).value[0], 0.0)
        spoken = silence.copy()
        spoken[0, 1] = [0.0, 0.0, 1.0, 0.0]
        np.testing.assert_allclose(utterance_cost([tape.constant(spoken)], 0.05).value, -0.05)
        soft = silence.copy()
        soft[0, 0] = [0.7, 0.1, 0.1, 0.1]
        np.testing.assert_allclose(utterance_cost([tape.constant(soft)], 0.05).value, -0.3 * 0.05)


class TestTrajectoryExport(unittest.TestCase):
    def test_round_trip_fields(self):
        spec = EpisodeSpec(n_agents=2, n_landmarks=3, horizon=2, vocab_size=4)
        batch = stack_worlds([sample_episode(spec, np.random.default_rng(s)) for s in range(2)])
        rng = np.random.RandomState(0)
        log = {key: rng.normal(size=(2, 2, 2, 2)) for key in ("positions", "velocities", "gazes")}
        log["utterances"] = np.eye(4)[rng.randint(4, size=(2, 2, 2))]
        records = trajectory_records(spec, batch, log, episode_ids=[10, 11])
        self.assertEqual(len(records), 4)
        self.assertEqual([(r["episode"], r["t"]) for r in records], [(10, 0), (10, 1), (11, 0), (11, 1)])
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "trajectories.jsonl")
            write_trajectories(path, records)
            rows = read_trajectories(path)
        self.assertEqual(len(rows), 4)
        self.assertEqual(set(rows[0]), set(TRAJECTORY_FIELDS))
        np.testing.assert_array_equal(rows[3]["positions"], log["positions"][1, 1])
        self.assertEqual(rows[1]["symbols"], log["utterances"][1, 0].argmax(axis=-1).tolist())
        self.assertEqual(rows[0]["goals"][0]["holder"], 0)

    def test_missing_field_is_rejected(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "bad.jsonl")
            with open(path, "w") as f:
                f.write('{"episode": 0, "t": 0}\n')
            with self.assertRaises(ValueError):
                read_trajectories(path)


if __name__ == "__main__":
    unittest.main()
