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

Created on Oct 14, 2026

Scripted controllers that use no communication, for comparison with trained policies.
Both run on the same episodes `training.evaluate` draws for the same seed.
"""
import numpy as np
from sklearn.utils import Bunch

from ..diffcore import Tape
from ..env.export import trajectory_records
from ..env.rewards import physical_reward, ACTION_PENALTY
from ..training.rollout import simulate, sample_batch, silence, Control, EVALUATION_STREAM
from ..utils.random_streams import RandomStreams
from .records import records_from_trajectories

CENTROID_GAIN = 10.0
RANDOM_WALK_SCALE = 1.0


class CentroidController:
    """Steers every agent to the centroid of all landmarks with a proportional controller.

    The gaze rests on the centroid and the agents stay silent.

    Args:
        gain (float): Force per unit of distance to the centroid.
    """

    def __init__(self, gain=CENTROID_GAIN):
        self.gain = gain
        self._silence = None

    def reset(self, spec, batch, tape):
        self._silence = silence(tape, batch.batch_size, batch.n_agents, spec.vocab_size)

    def act(self, obs, state, batch, noise):
        centroid = batch.landmark_positions.mean(axis=1, keepdims=True)  # (B, 1, 2)
        u_p = self.gain * (centroid - state.position)
        gaze = state.tape.constant(np.broadcast_to(centroid, state.position.shape))
        return Control(u_p=u_p, gaze=gaze, utterance=self._silence)


class RandomWalkController:
    """Gaussian random motor forces and gaze offsets, silent.

    Args:
        scale (float): Standard deviation of the forces and gaze offsets.
    """

    def __init__(self, scale=RANDOM_WALK_SCALE):
        self.scale = scale
        self._silence = None

    def reset(self, spec, batch, tape):
        self._silence = silence(tape, batch.batch_size, batch.n_agents, spec.vocab_size)

    def act(self, obs, state, batch, noise):
        draws = self.scale * noise.normal("scripted", (batch.n_agents, 4))
        return Control(u_p=state.tape.constant(draws[..., :2]),
                       gaze=state.position + draws[..., 2:],
                       utterance=self._silence)


def run_scripted(spec, controller, episodes, seed=0, batch_size=128,
                 action_penalty=ACTION_PENALTY, stream=EVALUATION_STREAM):
    """Roll out a scripted controller.

    Returns:
        Bunch: ``r_phys`` (np.ndarray, one reward per episode), ``trajectories`` and
               ``records``.
    """
    streams = RandomStreams(seed)
    rewards, trajectories = [], []
    for start in range(0, episodes, batch_size):
        chunk = list(range(start, min(start + batch_size, episodes)))
        keys = [(stream, e) for e in chunk]
        batch = sample_batch(spec, streams, keys)
        tape = Tape(batch_axis=0)
        trajectory = simulate(spec, batch, controller, tape,
                              streams.episode_noise(keys, spec.horizon))
        rewards.append(physical_reward(trajectory.steps(), batch, action_penalty).value)
        trajectories.extend(trajectory_records(spec, batch, trajectory.arrays(), episode_ids=chunk))
    r_phys = np.concatenate(rewards) if rewards else np.zeros(0)
    return Bunch(r_phys=r_phys, trajectories=trajectories,
                 records=records_from_trajectories(trajectories))


def centroid_baseline(spec, episodes, seed=0, gain=CENTROID_GAIN, return_records=False, **kwargs):
    """Mean physical reward of the no-communication centroid strategy.

    Args:
        spec (EpisodeSpec): Episodes to run.
        episodes (int): Number of episodes.
        seed (int): Root seed.
        gain (float): Controller gain.
        return_records (bool): Also return the `EpisodeRecord`s.

    Returns:
        float | tuple[float, list[EpisodeRecord]]: NaN for zero episodes.
    """
    result = run_scripted(spec, CentroidController(gain), episodes, seed=seed, **kwargs)
    mean = float(result.r_phys.mean()) if episodes else float("nan")
    return (mean, result.records) if return_records else mean


def random_walk_baseline(spec, episodes, seed=0, scale=RANDOM_WALK_SCALE, return_records=False,
                         **kwargs):
    """Mean physical reward of silent agents driven by random forces."""
    result = run_scripted(spec, RandomWalkController(scale), episodes, seed=seed, **kwargs)
    mean = float(result.r_phys.mean()) if episodes else float("nan")
    return (mean, result.records) if return_records else mean
