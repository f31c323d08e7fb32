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

Differentiable transition dynamics of the agents.

All quantities are batched: positions, velocities and gazes are tensors of shape
``(B, N, 2)``. Landmarks never move, so they are not part of the dynamic state.
"""
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .. import diffcore as dc
from ..diffcore import Tape, Tensor

DT = 0.1
DAMPING = 0.5
FORCE_SCALE = 3.0
FORCE_WIDTH = 0.05


@dataclass
class PhysicalState:
    """Dynamic state of the agents of a batch of episodes."""
    position: Tensor  # (B, N, 2)
    velocity: Tensor  # (B, N, 2)
    gaze: Tensor  # (B, N, 2)

    @classmethod
    def from_batch(cls, batch, tape):
        return cls(position=tape.constant(batch.agent_positions),
                   velocity=tape.constant(batch.agent_velocities),
                   gaze=tape.constant(batch.agent_gazes))

    @property
    def tape(self):
        return self.position.tape


def _pairs(n_agents):
    """Index arrays of the unordered agent pairs ``i < j`` and their scatter matrix.

    The scatter matrix has ``+1`` at ``(i, pair)`` and ``-1`` at ``(j, pair)`` so that a
    force computed once per pair is applied with opposite signs to its two members.
    """
    pairs = list(combinations(range(n_agents), 2))
    first = np.array([i for i, _ in pairs], dtype=int)
    second = np.array([j for _, j in pairs], dtype=int)
    scatter = np.zeros((n_agents, len(pairs)))
    scatter[first, np.arange(len(pairs))] = 1.0
    scatter[second, np.arange(len(pairs))] = -1.0
    return first, second, scatter


def pair_forces(positions, radii, k=FORCE_SCALE, width=FORCE_WIDTH):
    """Soft repulsion for every agent pair ``i < j``: the force on ``i`` (``-`` of the force on ``j``).

    The magnitude is ``k * logistic((r_i + r_j - d_ij) / width)`` along the unit vector
    from ``j`` to ``i``. Coincident centers repel along ``(1, 0)``.

    Args:
        positions (Tensor): (B, N, 2) agent positions.
        radii (float | np.ndarray): Agent radius, scalar or per agent (N,).
        k (float): Force scale.
        width (float): Logistic smoothing width.

    Returns:
        Tensor | None: (B, P, 2) with ``P = N (N - 1) / 2``; None when ``N < 2``.
    """
    n = positions.shape[1]
    if n < 2:
        return None
    first, second, _ = _pairs(n)
    radii = np.broadcast_to(np.asarray(radii, dtype=float), (n,))
    diff = dc.take(positions, first, axis=1) - dc.take(positions, second, axis=1)
    sq = dc.reduce("sum", dc.square(diff), axis=-1, keepdims=True)  # (B, P, 1)
    coincident = (sq.value == 0).astype(float)
    # sqrt(0 + 1) - 1 = 0 keeps the distance exact while the derivative stays finite.
    distance = dc.sqrt(sq + coincident) - coincident
    direction = diff / (distance + coincident) + coincident * np.array([1.0, 0.0])
    overlap = (radii[first] + radii[second])[:, None] - distance
    magnitude = k * dc.sigmoid(overlap / width)
    return magnitude * direction


def interaction_forces(positions, radii, k=FORCE_SCALE, width=FORCE_WIDTH):
    """Net collision force on every agent.

    Args:
        positions (Tensor | np.ndarray): (B, N, 2) agent positions. Arrays are put on a
                                         fresh tape.
        radii (float | np.ndarray): Agent radius, scalar or per agent.
        k (float): Force scale.
        width (float): Logistic smoothing width.

    Returns:
        Tensor: (B, N, 2) forces; pair contributions are equal and opposite.
    """
    if not isinstance(positions, Tensor):
        positions = Tape().constant(positions)
    forces = pair_forces(positions, radii, k=k, width=width)
    if forces is None:
        return positions.tape.constant(np.zeros(positions.shape))
    _, _, scatter = _pairs(positions.shape[1])
    return dc.matmul(scatter, forces)


def step_physics(state, u_p, gaze, radii, dt=DT, damping=DAMPING, with_forces=True):
    """Advance the agents by one timestep.

    ``p' = p + pdot * dt``; ``pdot' = damping * pdot + (u_p + f) * dt``; ``v' = gaze``,
    with the collision forces `f` evaluated at the current positions.

    Args:
        state (PhysicalState): Current state.
        u_p (Tensor | np.ndarray): (B, N, 2) motor forces, world frame.
        gaze (Tensor | np.ndarray): (B, N, 2) gaze locations, world frame.
        radii (float | np.ndarray): Agent radii for the collision forces.
        dt (float): Timestep.
        damping (float): Velocity damping coefficient.
        with_forces (bool): Whether agents collide.

    Returns:
        PhysicalState: Next state.
    """
    tape = state.tape
    u_p, gaze = tape.lift(u_p), tape.lift(gaze)
    position = state.position + state.velocity * dt
    drive = u_p
    if with_forces and state.position.shape[1] > 1:
        drive = u_p + interaction_forces(state.position, radii)
    velocity = damping * state.velocity + drive * dt
    return PhysicalState(position=position, velocity=velocity, gaze=gaze)
