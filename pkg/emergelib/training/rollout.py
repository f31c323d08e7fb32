"""
(C) Copyright 2026 emergelib contributors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.

Created on Oct 11, 2026

Differentiable episode rollouts.

A whole batch of episodes is unrolled on one tape: observe -> act -> step, T times,
with the (soft) utterances of step t observed by the other agents at step t + 1.
Controllers decide the actions; the learned policy is one of them, scripted
baselines are others.
"""
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import pandas as pd

from .. import diffcore as dc
from ..diffcore import Tape, Tensor
from ..env.dynamics import PhysicalState, step_physics
from ..env.entities import SILENCE, COMM
from ..env.observation import observe, goal_prediction_targets
from ..env.rewards import physical_reward, utterance_cost
from ..env.world import sample_episode, stack_worlds
from ..policy.policy import policy_forward, MemoryBank
from .rewards import goal_prediction_reward, vocab_reward_dp

EVALUATION_STREAM = 2 ** 31


@dataclass
class Control:
    """World-frame actions of every agent for one step."""
    u_p: Tensor  # (B, N, 2) motor force
    gaze: Tensor  # (B, N, 2) gaze location
    utterance: Tensor  # (B, N, K)
    goal_predictions: Optional[Tensor] = None


@dataclass
class Trajectory:
    """Everything recorded while unrolling a batch."""
    states: List[PhysicalState]  # state after each step
    motor: List[Tensor]  # world-frame u_p of each step
    utterances: List[Tensor]  # utterances emitted at each step
    final_goal_predictions: Optional[Tensor]
    final_goal_vectors: Optional[np.ndarray]

    def steps(self):
        return list(zip(self.states, self.motor))

    def arrays(self):
        """Numpy view: ``positions``, ``velocities``, ``gazes``, ``u_p`` (T, B, N, 2) and
        ``utterances`` (T, B, N, K)."""
        return {"positions": np.stack([s.position.value for s in self.states]),
                "velocities": np.stack([s.velocity.value for s in self.states]),
                "gazes": np.stack([s.gaze.value for s in self.states]),
                "u_p": np.stack([u.value for u in self.motor]),
                "utterances": np.stack([c.value for c in self.utterances])}


def to_world_frame(vectors, frames):
    """Map (B, N, 2) agent-frame vectors to the world frame, ``R_i^T u``."""
    bsz, n = vectors.shape[:2]
    return dc.matmul(vectors.reshape(bsz, n, 1, 2), frames).reshape(bsz, n, 2)


class PolicyController:
    """Drives the agents with the shared policy.

    Args:
        weights (PolicyParams | dict[str, Tensor]): Policy weights.
        memory_width (int): Width of the memory modules.
        config (PolicyConfig): Noise levels and temperature.
        training (bool): Training-mode (soft, noisy) or evaluation-mode (hard, noiseless).
    """

    def __init__(self, weights, memory_width, config, training=True):
        self.weights = weights
        self.memory_width = memory_width
        self.config = config
        self.training = training
        self._memory = None

    def reset(self, spec, batch, tape):
        self._memory = MemoryBank.zeros(tape, batch.batch_size, batch.n_agents, self.memory_width,
                                        with_streams=spec.mode == COMM)

    def act(self, obs, state, batch, noise):
        sample, self._memory = policy_forward(obs, self._memory, self.weights, noise=noise,
                                              training=self.training, config=self.config)
        u_p = to_world_frame(sample.u_p, batch.frames)
        gaze = state.position + to_world_frame(sample.u_v, batch.frames)
        return Control(u_p=u_p, gaze=gaze, utterance=sample.c,
                       goal_predictions=sample.goal_predictions)


def silence(tape, batch_size, n_agents, vocab_size):
    return tape.constant(np.broadcast_to(np.eye(vocab_size)[SILENCE], (batch_size, n_agents, vocab_size)))


def simulate(spec, batch, controller, tape, noise=None):
    """Unroll `spec.horizon` steps of the batch under `controller`.

    Args:
        spec (EpisodeSpec): Arity, horizon and observability.
        batch (WorldBatch): Initial states.
        controller: Object with ``reset(spec, batch, tape)`` and
                    ``act(obs, state, batch, step_noise) -> Control``.
        tape (Tape): Tape recording the rollout.
        noise (EpisodeNoise | None): Per-episode random streams.

    Returns:
        Trajectory
    """
    state = PhysicalState.from_batch(batch, tape)
    utterances = silence(tape, batch.batch_size, batch.n_agents, spec.vocab_size)
    controller.reset(spec, batch, tape)
    states, motor, emitted = [], [], []
    control, observed = None, None
    for t in range(spec.horizon):
        tape.location["timestep"] = t
        obs = observe(spec, batch, state, utterances)
        observed = state
        control = controller.act(obs, state, batch, None if noise is None else noise.at(t))
        state = step_physics(state, control.u_p, control.gaze, batch.agent_radius)
        states.append(state)
        motor.append(tape.lift(control.u_p))
        emitted.append(control.utterance)
        utterances = control.utterance
    tape.location.pop("timestep", None)

    final_predictions, final_goals = None, None
    if control is not None and control.goal_predictions is not None:
        final_predictions = control.goal_predictions
        final_goals = goal_prediction_targets(batch, observed.position.value)
    return Trajectory(states=states, motor=motor, utterances=emitted,
                      final_goal_predictions=final_predictions, final_goal_vectors=final_goals)


def sample_batch(spec, streams, episode_keys):
    """Sample one world per episode key, each from its own stream."""
    return stack_worlds([sample_episode(spec, streams.generator(*key, "world"))
                         for key in episode_keys])


@dataclass
class RolloutResult:
    """Outcome of `rollout_batch`.

    Attributes:
        total (Tensor): The scalar return R on `tape`.
        components (dict[str, float]): Weighted terms summing to ``r_total``.
        episode_logs (pd.DataFrame): Per-episode ``r_phys``, ``r_utt``, ``r_g``.
        usage (np.ndarray): (K,) counts of the emitted argmax symbols.
        trajectory (Trajectory): Recorded rollout.
        batch (WorldBatch): Initial states.
        episode_keys (list[tuple]): Random-stream key of each episode.
        tape (Tape): The tape holding the graph.
    """
    total: Tensor
    components: dict
    episode_logs: pd.DataFrame
    usage: np.ndarray
    trajectory: Trajectory
    batch: object
    episode_keys: list
    tape: Tape


def rollout_batch(params, config, streams, iteration=0, episode_keys=None, training=True,
                  batch=None):
    """Unroll a batch of episodes and assemble the differentiable return.

    ``R = mean_b(R_phys + R_utt) + lambda_g * mean_b(r_g) + lambda_c * r_c`` where
    `r_c` is the vocabulary reward of the utterance counts of the whole batch.

    Args:
        params (PolicyParams): Policy weights, recorded as named tape parameters.
        config (TrainConfig): Spec, coefficients and noise levels.
        streams (RandomStreams): Root random streams.
        iteration (int): Training iteration, part of every stream key.
        episode_keys (list[tuple] | None): Explicit stream keys, one per episode;
                                           defaults to ``(iteration, b)`` for ``b < B``.
        training (bool): Policy mode.
        batch (WorldBatch | None): Use these initial states instead of sampling.

    Returns:
        RolloutResult

    Raises:
        NonFiniteError: at the first NaN/Inf, with iteration, batch index and timestep.
    """
    spec = config.spec
    if episode_keys is None:
        size = config.batch_size if batch is None else batch.batch_size
        episode_keys = streams.episode_keys(iteration, size)
    if batch is None:
        batch = sample_batch(spec, streams, episode_keys)
    tape = Tape(check_finite=config.check_finite, batch_axis=0)
    tape.location["iteration"] = int(iteration)
    controller = PolicyController(params.on_tape(tape), params.memory, config.policy_config,
                                  training=training)
    noise = streams.episode_noise(episode_keys, spec.horizon)
    trajectory = simulate(spec, batch, controller, tape, noise)

    bsz = batch.batch_size
    r_phys = physical_reward(trajectory.steps(), batch, config.action_penalty)
    r_utt = utterance_cost(trajectory.utterances, config.utterance_penalty)
    if trajectory.final_goal_predictions is not None:
        r_g = goal_prediction_reward(trajectory.final_goal_predictions, trajectory.final_goal_vectors)
    else:
        r_g = tape.constant(np.zeros(bsz))
    if spec.mode == COMM:
        totals = dc.reduce("sum", dc.reduce("sum", dc.stack(trajectory.utterances), axis=0), axis=(0, 1))
        r_c = vocab_reward_dp(totals[1:], config.alpha)
    else:
        r_c = tape.constant(0.0)

    physical_term = dc.reduce("mean", r_phys + r_utt)
    goal_term = config.goal_weight * dc.reduce("mean", r_g)
    vocab_term = config.vocab_weight * r_c
    total = physical_term + goal_term + vocab_term

    emitted = np.stack([c.value for c in trajectory.utterances])
    usage = np.bincount(emitted.argmax(axis=-1).ravel(), minlength=spec.vocab_size)
    components = {
        "r_total": total.item(),
        "r_phys": float(np.mean(r_phys.value)),
        "r_g": goal_term.item(),
        "r_c": vocab_term.item(),
        "r_utt": float(np.mean(r_utt.value)),
    }
    episode_logs = pd.DataFrame({
        "iteration": int(iteration),
        "episode_key": [tuple(k) for k in episode_keys],
        "r_phys": r_phys.value,
        "r_utt": r_utt.value,
        "r_g": r_g.value,
    })
    return RolloutResult(total=total, components=components, episode_logs=episode_logs,
                         usage=usage, trajectory=trajectory, batch=batch,
                         episode_keys=list(episode_keys), tape=tape)
