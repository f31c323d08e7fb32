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

Created on Oct 13, 2026

Episode records rebuilt from trajectory files, and loaders for the training logs.
"""
import os
from dataclasses import dataclass, field
from itertools import groupby

import numpy as np
import pandas as pd

from ..env.entities import AGENT_RADIUS, color_name
from ..env.export import read_trajectories
from ..training.trainer import METRICS_FIELDS
from ..utils.general_tools import read_jsonl


@dataclass
class EpisodeRecord:
    """A finished episode, timestep-major.

    Row ``t`` of every per-step array is the state after step ``t``.
    """
    episode: int
    mode: str
    vocab_size: int
    positions: np.ndarray  # (T, N, 2)
    velocities: np.ndarray  # (T, N, 2)
    gazes: np.ndarray  # (T, N, 2)
    utterances: np.ndarray  # (T, N, K)
    symbols: np.ndarray  # (T, N), 0 is silence
    agent_colors: np.ndarray  # (N, 3)
    landmarks: np.ndarray  # (M, 2)
    landmark_colors: np.ndarray  # (M, 3)
    initial_positions: np.ndarray  # (N, 2)
    frames: np.ndarray  # (N, 2, 2)
    goals: list  # dicts: holder, action, target, recipient
    metrics: dict = field(default_factory=dict)
    agent_radius: float = AGENT_RADIUS

    @property
    def horizon(self):
        return self.positions.shape[0]

    @property
    def n_agents(self):
        return self.positions.shape[1]

    @property
    def n_landmarks(self):
        return self.landmarks.shape[0]

    def utterance_set(self, agent):
        """Non-silence symbols agent `agent` uttered during the episode."""
        return set(int(s) for s in self.symbols[:, agent] if s != 0)

    def target_landmark(self, goal):
        """Index of the landmark a goal targets, or None."""
        target = np.asarray(goal["target"], dtype=float)
        matches = np.flatnonzero(np.all(self.landmarks == target, axis=1))
        return int(matches[0]) if matches.size else None

    def goal_concepts(self, goal):
        """The concepts a goal conveys: ``action``, ``landmark_color`` and ``recipient_color``."""
        landmark = self.target_landmark(goal)
        return {"action": goal["action"],
                "landmark_color": None if landmark is None else color_name(self.landmark_colors[landmark]),
                "recipient_color": color_name(self.agent_colors[goal["recipient"]])}


def records_from_trajectories(rows):
    """Group trajectory rows (as written by `env.export`) into `EpisodeRecord`s.

    Raises:
        ValueError: if an episode's timesteps are not ``0 .. T - 1`` in order.
    """
    records = []
    for episode, steps in groupby(rows, key=lambda row: row["episode"]):
        steps = list(steps)
        if [s["t"] for s in steps] != list(range(len(steps))):
            raise ValueError(f"episode {episode} does not hold consecutive timesteps from 0")
        first = steps[0]

        def per_step(key, dtype=float):
            return np.array([s[key] for s in steps], dtype=dtype)

        records.append(EpisodeRecord(
            episode=int(episode), mode=first["mode"], vocab_size=int(first["vocab_size"]),
            positions=per_step("positions"), velocities=per_step("velocities"),
            gazes=per_step("gazes"), utterances=per_step("utterances"),
            symbols=per_step("symbols", dtype=int),
            agent_colors=np.array(first["agent_colors"], dtype=float),
            landmarks=np.array(first["landmarks"], dtype=float),
            landmark_colors=np.array(first["landmark_colors"], dtype=float),
            initial_positions=np.array(first["initial_positions"], dtype=float),
            frames=np.array(first["frames"], dtype=float),
            goals=[dict(g, target=np.array(g["target"], dtype=float)) for g in first["goals"]],
        ))
    return records


def load_records(path):
    """Episode records of a ``trajectories.jsonl`` file."""
    return records_from_trajectories(read_trajectories(path))


def load_metrics(path):
    """Training metrics log as a DataFrame indexed by iteration."""
    if os.path.getsize(path) == 0:
        return pd.DataFrame(columns=list(METRICS_FIELDS)).set_index("iter")
    return pd.read_json(path, lines=True).set_index("iter")


def load_usage(path, vocab_size=None):
    """Per-iteration symbol usage counts: rows are iterations, columns symbols."""
    rows = read_jsonl(path)
    if not rows:
        columns = pd.RangeIndex(vocab_size or 0, name="symbol")
        return pd.DataFrame(columns=columns, index=pd.Index([], name="iter"), dtype=float)
    counts = pd.DataFrame([row["counts"] for row in rows],
                          index=pd.Index([row["iter"] for row in rows], name="iter"))
    counts.columns.name = "symbol"
    return counts
