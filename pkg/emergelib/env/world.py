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

Created on Oct 05, 2026

Random episode instantiation: entity placement, colors, private frames and goals.
"""
import numpy as np

from .entities import (WorldState, WorldBatch, Goal, ACTION_INDEX, DONOTHING,
                       AGENT_RADIUS, LANDMARK_RADIUS)
from ..utils.exceptions import SpecError, ShapeMismatchError

WORLD_EXTENT = 1.0


def rotation(theta):
    """Planar rotation matrices for an array of angles, shape ``(*theta.shape, 2, 2)``."""
    theta = np.asarray(theta, dtype=float)
    cos, sin = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([cos, -sin], axis=-1),
                     np.stack([sin, cos], axis=-1)], axis=-2)


def sample_world(spec, rng):
    """Sample the initial physical state of an episode (no goals yet).

    Positions are i.i.d. uniform in the square ``[-1, 1]^2``, velocities are zero, gazes
    rest on the agent itself, and each agent gets a uniformly random private frame.
    Landmark colors are pairwise distinct, and so are agent colors.

    Args:
        spec (EpisodeSpec): Episode arity.
        rng (np.random.Generator): Source of randomness.

    Returns:
        WorldState
    """
    n, m = spec.n_agents, spec.n_landmarks
    palette = spec.palette_rgb
    if m > len(palette):
        raise SpecError(f"{m} landmarks exceed the palette size {len(palette)}")
    agent_positions = rng.uniform(-WORLD_EXTENT, WORLD_EXTENT, size=(n, 2))
    landmark_positions = rng.uniform(-WORLD_EXTENT, WORLD_EXTENT, size=(m, 2))
    agent_colors = palette[rng.permutation(len(palette))[:n]]
    landmark_colors = palette[rng.permutation(len(palette))[:m]]
    frames = rotation(rng.uniform(0, 2 * np.pi, size=n))
    return WorldState(agent_positions=agent_positions,
                      agent_velocities=np.zeros((n, 2)),
                      agent_gazes=agent_positions.copy(),
                      agent_colors=agent_colors,
                      landmark_positions=landmark_positions,
                      landmark_colors=landmark_colors,
                      frames=frames,
                      agent_radius=AGENT_RADIUS,
                      landmark_radius=LANDMARK_RADIUS,
                      utterances=None)


def assign_goals(spec, world, rng):
    """Draw one private goal per agent.

    Recipients are a random permutation of the agents, so nobody receives two goals.
    Targets are uniformly chosen landmark positions. A DONOTHING goal targets the
    recipient's initial position.

    Args:
        spec (EpisodeSpec): Enabled actions.
        world (WorldState): Sampled world.
        rng (np.random.Generator): Source of randomness.

    Returns:
        list[Goal]: ``goals[i]`` is held by agent ``i``.
    """
    n = world.n_agents
    recipients = rng.permutation(n)
    actions = rng.choice(len(spec.actions), size=n)
    landmarks = rng.choice(world.n_landmarks, size=n)
    goals = []
    for holder in range(n):
        action = spec.actions[actions[holder]]
        recipient = int(recipients[holder])
        if action == DONOTHING:
            target = world.agent_positions[recipient].copy()
        else:
            target = world.landmark_positions[landmarks[holder]].copy()
        goals.append(Goal(action=action, target=target, recipient=recipient))
    return goals


def sample_episode(spec, rng):
    """`sample_world` followed by `assign_goals` on the same generator."""
    world = sample_world(spec, rng)
    world.goals = assign_goals(spec, world, rng)
    return world


def stack_worlds(worlds):
    """Stack equally shaped worlds into a `WorldBatch`.

    Raises:
        ShapeMismatchError: if the worlds differ in arity.
    """
    if not worlds:
        raise ShapeMismatchError("cannot stack an empty list of worlds")
    shapes = {(w.n_agents, w.n_landmarks, len(w.goals)) for w in worlds}
    if len(shapes) != 1:
        raise ShapeMismatchError(f"worlds of different arity cannot be batched: {sorted(shapes)}")

    def stack(attr):
        return np.stack([getattr(w, attr) for w in worlds]).astype(float)

    return WorldBatch(
        agent_positions=stack("agent_positions"),
        agent_velocities=stack("agent_velocities"),
        agent_gazes=stack("agent_gazes"),
        agent_colors=stack("agent_colors"),
        landmark_positions=stack("landmark_positions"),
        landmark_colors=stack("landmark_colors"),
        frames=stack("frames"),
        goal_actions=np.array([[ACTION_INDEX[g.action] for g in w.goals] for w in worlds], dtype=int),
        goal_targets=np.array([[g.target for g in w.goals] for w in worlds], dtype=float),
        goal_recipients=np.array([[g.recipient for g in w.goals] for w in worlds], dtype=int),
        agent_radius=worlds[0].agent_radius,
        landmark_radius=worlds[0].landmark_radius,
    )
