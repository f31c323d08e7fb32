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

Trajectory export: one JSON line per (episode, timestep).

Record ``t`` holds the state after step ``t`` was applied and the utterances emitted
during step ``t``. Field names are part of the file format and do not change.
"""
import numpy as np

from .entities import ACTIONS
from ..utils.general_tools import write_jsonl, read_jsonl

TRAJECTORY_FIELDS = (
    "episode",  # int, episode id
    "t",  # int, timestep in [0, T)
    "mode",  # str, observability mode
    "vocab_size",  # int, K
    "positions",  # N x 2, agent positions after the step
    "velocities",  # N x 2
    "gazes",  # N x 2, gaze locations
    "utterances",  # N x K, utterance vectors emitted at this step
    "symbols",  # N ints, argmax of the utterances (0 is silence)
    "agent_colors",  # N x 3
    "landmarks",  # M x 2
    "landmark_colors",  # M x 3
    "initial_positions",  # N x 2, agent positions before the first step
    "frames",  # N x 2 x 2 private rotations
    "goals",  # N dicts: holder, action, target, recipient
)


def trajectory_records(spec, batch, log, episode_ids=None):
    """Flatten a batched rollout into trajectory records.

    Args:
        spec (EpisodeSpec): Spec the rollout ran under.
        batch (WorldBatch): Initial states of the episodes.
        log (Mapping): Arrays ``positions``, ``velocities``, ``gazes`` of shape (T, B, N, 2)
                       and ``utterances`` of shape (T, B, N, K).
        episode_ids (Sequence[int] | None): Id per batch entry, defaults to ``range(B)``.

    Returns:
        list[dict]: Records ordered by episode, then timestep.
    """
    horizon, bsz = log["positions"].shape[:2]
    episode_ids = range(bsz) if episode_ids is None else episode_ids
    utterances = np.asarray(log["utterances"])
    symbols = utterances.argmax(axis=-1)
    records = []
    for b, episode in enumerate(episode_ids):
        goals = [{"holder": g,
                  "action": ACTIONS[batch.goal_actions[b, g]],
                  "target": batch.goal_targets[b, g],
                  "recipient": int(batch.goal_recipients[b, g])}
                 for g in range(batch.n_goals)]
        for t in range(horizon):
            records.append({
                "episode": int(episode),
                "t": t,
                "mode": spec.mode,
                "vocab_size": spec.vocab_size,
                "positions": log["positions"][t, b],
                "velocities": log["velocities"][t, b],
                "gazes": log["gazes"][t, b],
                "utterances": utterances[t, b],
                "symbols": symbols[t, b],
                "agent_colors": batch.agent_colors[b],
                "landmarks": batch.landmark_positions[b],
                "landmark_colors": batch.landmark_colors[b],
                "initial_positions": batch.agent_positions[b],
                "frames": batch.frames[b],
                "goals": goals,
            })
    return records


def write_trajectories(path, records, mode="w"):
    return write_jsonl(path, records, mode=mode)


def read_trajectories(path):
    """Read trajectory records, checking that every documented field is present."""
    records = read_jsonl(path)
    for i, record in enumerate(records):
        missing = set(TRAJECTORY_FIELDS) - set(record)
        if missing:
            raise ValueError(f"trajectory record {i} is missing fields {sorted(missing)}")
    return records
