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

Entities, goals and episode specifications of the grounded particle world.
"""
from dataclasses import dataclass, field, asdict
from typing import List, Optional, Tuple

import numpy as np

from ..utils.exceptions import SpecError

GOTO = "GOTO"
LOOKAT = "LOOKAT"
DONOTHING = "DONOTHING"
ACTIONS = (GOTO, LOOKAT, DONOTHING)
ACTION_INDEX = {name: i for i, name in enumerate(ACTIONS)}

COMM = "comm"
GAZE_VISIBLE = "gaze-visible"
POSITION_VISIBLE = "position-visible"
BLIND = "blind"
MODES = (COMM, GAZE_VISIBLE, POSITION_VISIBLE, BLIND)

AGENT = "agent"
LANDMARK = "landmark"

SILENCE = 0
GOAL_WIDTH = len(ACTIONS) + 2 + 3

AGENT_RADIUS = 0.08
LANDMARK_RADIUS = 0.04

# Named RGB colors; landmarks within one episode never share a color.
DEFAULT_PALETTE = (
    ("red", (0.90, 0.15, 0.15)),
    ("green", (0.15, 0.75, 0.25)),
    ("blue", (0.15, 0.30, 0.90)),
    ("yellow", (0.95, 0.85, 0.10)),
    ("magenta", (0.85, 0.20, 0.80)),
    ("cyan", (0.10, 0.80, 0.85)),
    ("orange", (0.95, 0.55, 0.10)),
    ("purple", (0.50, 0.25, 0.70)),
    ("gray", (0.55, 0.55, 0.55)),
    ("brown", (0.55, 0.35, 0.15)),
    ("black", (0.05, 0.05, 0.05)),
    ("pink", (0.98, 0.60, 0.70)),
)

# Named configurations: (agents, actions, landmarks).
PRESETS = {
    "1x1x3": dict(n_agents=2, actions=(GOTO,), n_landmarks=3),
    "1x2x3": dict(n_agents=2, actions=(GOTO, LOOKAT), n_landmarks=3),
    "3x3x3": dict(n_agents=3, actions=ACTIONS, n_landmarks=3),
}


def color_name(rgb, palette=DEFAULT_PALETTE):
    """Palette name of an RGB triple, or its hex code when it is not in the palette."""
    rgb = np.asarray(rgb, dtype=float)
    for name, value in palette:
        if np.allclose(rgb, value, atol=1e-9):
            return name
    return "#" + "".join(f"{int(round(255 * c)):02x}" for c in np.clip(rgb, 0, 1))


@dataclass
class EpisodeSpec:
    """Arity, goals and observability of an episode.

    Args:
        n_agents (int): Number of agents N.
        n_landmarks (int): Number of landmarks M.
        actions (tuple[str]): Enabled goal actions, a subset of `ACTIONS`.
        vocab_size (int): Number of symbols K, silence (index 0) included.
        horizon (int): Number of timesteps T.
        mode (str): One of `MODES`.
        palette (tuple): ``(name, rgb)`` pairs colors are drawn from.
    """
    n_agents: int = 2
    n_landmarks: int = 3
    actions: Tuple[str, ...] = (GOTO,)
    vocab_size: int = 20
    horizon: int = 16
    mode: str = COMM
    palette: Tuple = DEFAULT_PALETTE

    def __post_init__(self):
        self.actions = tuple(self.actions)
        self.palette = tuple((name, tuple(float(c) for c in rgb)) for name, rgb in self.palette)
        self.validate()

    @classmethod
    def from_preset(cls, name, **overrides):
        try:
            preset = dict(PRESETS[name])
        except KeyError:
            raise SpecError(f"Unknown preset {name!r}; available: {sorted(PRESETS)}") from None
        preset.update(overrides)
        return cls(**preset)

    def validate(self):
        if self.n_agents < 1:
            raise SpecError(f"n_agents must be at least 1, got {self.n_agents}")
        if self.n_landmarks < 1:
            raise SpecError(f"n_landmarks must be at least 1, got {self.n_landmarks}")
        if self.vocab_size < 2:
            raise SpecError(f"vocab_size must be at least 2, got {self.vocab_size}")
        if self.horizon < 1:
            raise SpecError(f"horizon must be at least 1, got {self.horizon}")
        if not self.actions or not set(self.actions) <= set(ACTIONS):
            raise SpecError(f"actions must be a non-empty subset of {ACTIONS}, got {self.actions}")
        if self.mode not in MODES:
            raise SpecError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n_landmarks > len(self.palette):
            raise SpecError(f"{self.n_landmarks} landmarks need distinct colors, "
                            f"but the palette has only {len(self.palette)}")
        if self.n_agents > len(self.palette):
            raise SpecError(f"{self.n_agents} agents need distinct colors, "
                            f"but the palette has only {len(self.palette)}")

    @property
    def palette_rgb(self):
        return np.array([rgb for _, rgb in self.palette], dtype=float)

    @property
    def communicates(self):
        return self.mode == COMM

    def replace(self, **changes):
        values = asdict(self)
        values.update(changes)
        return EpisodeSpec(**values)

    def to_dict(self):
        d = asdict(self)
        d["actions"] = list(self.actions)
        d["palette"] = [[name, list(rgb)] for name, rgb in self.palette]
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class EntityState:
    """Physical state of one agent or landmark."""
    p: np.ndarray
    pdot: np.ndarray
    color: np.ndarray
    radius: float
    kind: str
    v: Optional[np.ndarray] = None
    shape: str = "circle"

    def __post_init__(self):
        if self.radius <= 0:
            raise SpecError(f"entity radius must be positive, got {self.radius}")
        if np.any(np.asarray(self.color) < 0) or np.any(np.asarray(self.color) > 1):
            raise SpecError("color components must lie in [0, 1]")
        if self.kind == LANDMARK and (self.v is not None or np.any(self.pdot != 0)):
            raise SpecError("landmarks have zero velocity and no gaze")


@dataclass
class Goal:
    """A private goal: `recipient` should perform `action` on `target`."""
    action: str
    target: np.ndarray
    recipient: int

    def to_dict(self):
        return {"action": self.action, "target": [float(x) for x in self.target],
                "recipient": int(self.recipient)}

    @property
    def action_index(self):
        return ACTION_INDEX[self.action]


@dataclass
class WorldState:
    """Initial state of one episode.

    Agents come first: entity ``i < n_agents`` is agent ``i``; landmark ``j`` is entity
    ``n_agents + j``. Utterances start as silence and memories start at zero; both
    are owned by the rollout once the episode runs.
    """
    agent_positions: np.ndarray  # (N, 2)
    agent_velocities: np.ndarray  # (N, 2)
    agent_gazes: np.ndarray  # (N, 2)
    agent_colors: np.ndarray  # (N, 3)
    landmark_positions: np.ndarray  # (M, 2)
    landmark_colors: np.ndarray  # (M, 3)
    frames: np.ndarray  # (N, 2, 2)
    goals: List[Goal] = field(default_factory=list)
    agent_radius: float = AGENT_RADIUS
    landmark_radius: float = LANDMARK_RADIUS
    landmark_shapes: Tuple[str, ...] = ()
    utterances: Optional[np.ndarray] = None
    memories: Optional[dict] = None

    @property
    def n_agents(self):
        return self.agent_positions.shape[0]

    @property
    def n_landmarks(self):
        return self.landmark_positions.shape[0]

    @property
    def entities(self):
        agents = [EntityState(p=self.agent_positions[i], pdot=self.agent_velocities[i],
                              color=self.agent_colors[i], radius=self.agent_radius, kind=AGENT,
                              v=self.agent_gazes[i])
                  for i in range(self.n_agents)]
        shapes = self.landmark_shapes or ("circle",) * self.n_landmarks
        landmarks = [EntityState(p=self.landmark_positions[j], pdot=np.zeros(2),
                                 color=self.landmark_colors[j], radius=self.landmark_radius,
                                 kind=LANDMARK, shape=shapes[j])
                     for j in range(self.n_landmarks)]
        return agents + landmarks


@dataclass
class WorldBatch:
    """Initial states of B episodes of equal arity, stacked along a leading axis."""
    agent_positions: np.ndarray  # (B, N, 2)
    agent_velocities: np.ndarray  # (B, N, 2)
    agent_gazes: np.ndarray  # (B, N, 2)
    agent_colors: np.ndarray  # (B, N, 3)
    landmark_positions: np.ndarray  # (B, M, 2)
    landmark_colors: np.ndarray  # (B, M, 3)
    frames: np.ndarray  # (B, N, 2, 2)
    goal_actions: np.ndarray  # (B, G) ints into ACTIONS
    goal_targets: np.ndarray  # (B, G, 2)
    goal_recipients: np.ndarray  # (B, G) agent indices
    agent_radius: float = AGENT_RADIUS
    landmark_radius: float = LANDMARK_RADIUS

    @property
    def batch_size(self):
        return self.agent_positions.shape[0]

    @property
    def n_agents(self):
        return self.agent_positions.shape[1]

    @property
    def n_landmarks(self):
        return self.landmark_positions.shape[1]

    @property
    def n_goals(self):
        return self.goal_actions.shape[1]

    @property
    def recipient_colors(self):
        """(B, G, 3) color of each goal's recipient."""
        return np.take_along_axis(self.agent_colors, self.goal_recipients[..., None], axis=1)

    def goal_vectors_static(self):
        """Goal action one-hots and recipient colors, (B, G, 3) each."""
        one_hot = np.eye(len(ACTIONS))[self.goal_actions]
        return one_hot, self.recipient_colors

    def episode(self, b):
        goals = [Goal(ACTIONS[a], target.copy(), int(r)) for a, target, r in
                 zip(self.goal_actions[b], self.goal_targets[b], self.goal_recipients[b])]
        return WorldState(agent_positions=self.agent_positions[b].copy(),
                          agent_velocities=self.agent_velocities[b].copy(),
                          agent_gazes=self.agent_gazes[b].copy(),
                          agent_colors=self.agent_colors[b].copy(),
                          landmark_positions=self.landmark_positions[b].copy(),
                          landmark_colors=self.landmark_colors[b].copy(),
                          frames=self.frames[b].copy(), goals=goals,
                          agent_radius=self.agent_radius, landmark_radius=self.landmark_radius)
