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

Created on Oct 06, 2026

Per-agent observations in private, rotated reference frames.

Every visible entity is described by an 11-wide feature row::

    [R_i (p_j - p_i) | R_i pdot_j | R_i (v_j - p_i) | color_j | is_agent | is_self]

Landmarks have no velocity and no gaze, so those slots are zero for them.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import diffcore as dc
from ..diffcore import Tensor
from .entities import ACTION_INDEX, DONOTHING, COMM, GAZE_VISIBLE, POSITION_VISIBLE
from ..utils.exceptions import ContractError

ENTITY_WIDTH = 11


@dataclass
class Observation:
    """Observations of all agents of a batch (leading axes ``B, N``).

    Attributes:
        physical (Tensor): (B, N, J, 11) visible entities; row 0 is the agent itself.
        streams (Tensor | None): (B, N, N - 1, K) previous utterances of the other
                                 agents, ordered by agent index; None when no
                                 utterances are observed.
        goal (Tensor): (B, N, 8) private goal vector of each agent.
        mode (str): Observability mode the observation was built for.
    """
    physical: Tensor
    streams: Optional[Tensor]
    goal: Tensor
    mode: str

    @property
    def n_agents(self):
        return self.physical.shape[1]

    def agent(self, i):
        """Observation of agent `i` alone, keeping a singleton agent axis."""
        if not 0 <= i < self.n_agents:
            raise ContractError(f"agent index {i} outside [0, {self.n_agents})")
        pick = (slice(None), slice(i, i + 1))
        return Observation(physical=self.physical[pick],
                           streams=None if self.streams is None else self.streams[pick],
                           goal=self.goal[pick], mode=self.mode)


def others_index(n_agents):
    """(N, N - 1) indices of the other agents, in increasing order, for each agent."""
    return np.array([[j for j in range(n_agents) if j != i] for i in range(n_agents)],
                    dtype=int).reshape(n_agents, max(n_agents - 1, 0))


def _rotate(vectors, frames_t):
    """Rotate row vectors ``(B, N, J, 2)`` by each agent's frame (``frames_t`` is R transposed)."""
    return dc.matmul(vectors, frames_t)


def observe(spec, batch, state, utterances, agent=None):
    """Build the observations of every agent (or of one agent).

    Args:
        spec (EpisodeSpec): Observability mode and arity.
        batch (WorldBatch): Static part of the episodes (landmarks, colors, frames, goals).
        state (PhysicalState): Current dynamic state.
        utterances (Tensor): (B, N, K) utterances of the previous step.
        agent (int | None): If given, return only this agent's observation.

    Returns:
        Observation
    """
    if batch.n_agents != spec.n_agents or batch.n_landmarks != spec.n_landmarks:
        raise ContractError(f"world of arity ({batch.n_agents}, {batch.n_landmarks}) does not "
                            f"match spec ({spec.n_agents}, {spec.n_landmarks})")
    tape = state.tape
    bsz, n, m = batch.batch_size, batch.n_agents, batch.n_landmarks
    frames_t = np.swapaxes(batch.frames, -1, -2)  # (B, N, 2, 2)
    p, pdot, v = state.position, state.velocity, state.gaze

    # Agent-to-agent rows, (B, N_observer, N_observed, .)
    rel_pos = p.reshape(bsz, 1, n, 2) - p.reshape(bsz, n, 1, 2)
    rel_vel = dc.matmul(pdot.reshape(bsz, 1, n, 2), frames_t)
    rel_gaze = v.reshape(bsz, 1, n, 2) - p.reshape(bsz, n, 1, 2)
    if spec.mode == POSITION_VISIBLE:
        rel_gaze = rel_gaze * np.eye(n)[None, :, :, None]
    eye = np.broadcast_to(np.eye(n)[None, :, :, None], (bsz, n, n, 1))
    agent_rows = dc.concat([
        _rotate(rel_pos, frames_t),
        rel_vel,
        _rotate(rel_gaze, frames_t),
        np.broadcast_to(batch.agent_colors[:, None], (bsz, n, n, 3)),
        np.ones((bsz, n, n, 1)),
        eye,
    ], axis=-1)

    # Visible agents: the agent itself first, then the others when agents are observable.
    if spec.mode in (GAZE_VISIBLE, POSITION_VISIBLE):
        visible = np.concatenate([np.arange(n)[:, None], others_index(n)], axis=1)
    else:
        visible = np.arange(n)[:, None]
    flat_index = np.arange(n)[:, None] * n + visible  # (N, J_a)
    agent_rows = dc.take(agent_rows.reshape(bsz, n * n, ENTITY_WIDTH), flat_index, axis=1)

    landmark_pos = batch.landmark_positions.reshape(bsz, 1, m, 2) - p.reshape(bsz, n, 1, 2)
    landmark_rows = dc.concat([
        _rotate(landmark_pos, frames_t),
        np.zeros((bsz, n, m, 4)),
        np.broadcast_to(batch.landmark_colors[:, None], (bsz, n, m, 3)),
        np.zeros((bsz, n, m, 2)),
    ], axis=-1)
    physical = dc.concat([agent_rows, landmark_rows], axis=2)

    streams = None
    if spec.mode == COMM and n > 1:
        streams = dc.take(tape.lift(utterances), others_index(n), axis=1)

    observation = Observation(physical=physical, streams=streams,
                              goal=goal_vectors(batch, state), mode=spec.mode)
    return observation if agent is None else observation.agent(agent)


def goal_vectors(batch, state):
    """(B, N, 8) goal vectors ``[action one-hot | R_i (target - p_i) | recipient color]``.

    The target slot is zero for DONOTHING goals.
    """
    bsz, n = batch.batch_size, batch.n_agents
    one_hot, recipient_colors = batch.goal_vectors_static()
    has_target = (batch.goal_actions != ACTION_INDEX[DONOTHING]).astype(float)[..., None]
    offset = (batch.goal_targets - state.position) * has_target
    rotated = dc.matmul(offset.reshape(bsz, n, 1, 2), np.swapaxes(batch.frames, -1, -2))
    vector = dc.concat([one_hot, rotated.reshape(bsz, n, 2), recipient_colors], axis=-1)
    return vector


def goal_prediction_targets(batch, positions):
    """(B, N, N - 1, 8) goal vectors of the other agents, as seen by each predictor.

    Row ``[i, k]`` describes the goal held by agent ``others_index(N)[i, k]``. Its target
    slot is ``R_i (target - p_i)``: agent i's own frame and position, the only ones it
    can observe. The target slot is zero for DONOTHING goals.

    Args:
        batch (WorldBatch): Goals and private frames.
        positions (np.ndarray): (B, N, 2) agent positions the predictions are made at.
    """
    positions = np.asarray(positions, dtype=float)
    one_hot, recipient_colors = batch.goal_vectors_static()
    has_target = (batch.goal_actions != ACTION_INDEX[DONOTHING]).astype(float)[..., None]
    others = others_index(batch.n_agents)
    offset = (batch.goal_targets[:, others] - positions[:, :, None]) * has_target[:, others]
    rotated = np.einsum("bned,bnkd->bnke", batch.frames, offset)
    return np.concatenate([one_hot[:, others], rotated, recipient_colors[:, others]], axis=-1)
