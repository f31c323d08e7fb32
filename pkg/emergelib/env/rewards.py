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

Created on Oct 07, 2026

Physically grounded reward terms, one value per episode of a batch.
"""
import numpy as np

from .. import diffcore as dc
from .entities import ACTION_INDEX, LOOKAT, SILENCE

ACTION_PENALTY = 0.01
UTTERANCE_PENALTY = 0.05


def goal_errors(batch, position, gaze):
    """Squared distance of every goal's recipient to the goal's target.

    GOTO and DONOTHING measure the recipient's position, LOOKAT its gaze. A DONOTHING
    target is the recipient's initial position.

    Args:
        batch (WorldBatch): Goals of the episodes.
        position (Tensor): (B, N, 2) agent positions.
        gaze (Tensor): (B, N, 2) agent gaze locations.

    Returns:
        Tensor: (B, G) squared errors.
    """
    recipient = np.eye(batch.n_agents)[batch.goal_recipients]  # (B, G, N)
    looks = (batch.goal_actions == ACTION_INDEX[LOOKAT]).astype(float)[..., None]
    point = dc.matmul(recipient * (1.0 - looks), position) + dc.matmul(recipient * looks, gaze)
    return dc.reduce("sqnorm", point - batch.goal_targets, axis=-1)


def physical_reward(trajectory, batch, action_penalty=ACTION_PENALTY):
    """Shared physical reward of each episode.

    The mean over timesteps and goals of the negative squared goal error, minus
    ``action_penalty`` times the mean squared motor force.

    Args:
        trajectory (list[tuple[PhysicalState, Tensor]]): Per timestep, the state after the
                                                         step and the (B, N, 2) motor force
                                                         that produced it.
        batch (WorldBatch): Goals of the episodes.
        action_penalty (float): Weight of the motor-force regulariser.

    Returns:
        Tensor: (B,) rewards.
    """
    errors = dc.stack([dc.reduce("mean", goal_errors(batch, state.position, state.gaze), axis=-1)
                       for state, _ in trajectory], axis=-1)  # (B, T)
    reward = -dc.reduce("mean", errors, axis=-1)
    if action_penalty:
        effort = dc.stack([dc.reduce("mean", dc.reduce("sqnorm", u_p, axis=-1), axis=-1)
                           for _, u_p in trajectory], axis=-1)
        reward = reward - action_penalty * dc.reduce("mean", effort, axis=-1)
    return reward


def utterance_cost(utterances, penalty=UTTERANCE_PENALTY):
    """Cost of vocalizing: ``-penalty * sum over agents and steps of (1 - c[silence])``.

    Args:
        utterances (list[Tensor]): Per timestep, (B, N, K) utterance vectors.
        penalty (float): Cost of one full non-silence utterance.

    Returns:
        Tensor: (B,) costs, zero for all-silence episodes.
    """
    spoken = dc.stack([dc.reduce("sum", 1.0 - c[..., SILENCE], axis=-1) for c in utterances],
                      axis=-1)
    return -penalty * dc.reduce("sum", spoken, axis=-1)
