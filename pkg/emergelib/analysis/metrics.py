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

Scalar measurements of finished episodes and of training logs.
"""
import numpy as np
import pandas as pd

from ..env.entities import LOOKAT, DONOTHING
from ..training.rewards import count_active_symbols, ACTIVE_SHARE
from ..utils.exceptions import ParameterError

COMPLETION_EPSILON = 0.15


def goal_outcomes(records, epsilon=COMPLETION_EPSILON):
    """Final error of every goal.

    GOTO goals measure the recipient's final position, LOOKAT goals its final gaze and
    DONOTHING goals its displacement from the initial position.

    Args:
        records (list[EpisodeRecord]): Finished episodes.
        epsilon (float): Success radius, must be positive.

    Returns:
        pd.DataFrame: One row per goal: episode, holder, recipient, action, final_error,
                      success.
    """
    if not epsilon > 0:
        raise ParameterError(f"completion radius must be positive, got {epsilon}")
    rows = []
    for record in records:
        for goal in record.goals:
            r = goal["recipient"]
            if goal["action"] == LOOKAT:
                final = record.gazes[-1, r]
            else:
                final = record.positions[-1, r]
            target = record.initial_positions[r] if goal["action"] == DONOTHING else goal["target"]
            error = float(np.linalg.norm(final - np.asarray(target)))
            rows.append({"episode": record.episode, "holder": goal["holder"], "recipient": r,
                         "action": goal["action"], "final_error": error, "success": error <= epsilon})
    return pd.DataFrame(rows, columns=["episode", "holder", "recipient", "action",
                                       "final_error", "success"])


def goal_completion_rate(records, epsilon=COMPLETION_EPSILON):
    """Fraction of goals whose recipient ends within `epsilon` of the target.

    Returns:
        float: NaN when there is no goal.
    """
    outcomes = goal_outcomes(records, epsilon)
    if outcomes.empty:
        return float("nan")
    return float(outcomes["success"].mean())


def active_vocab_count(usage_logs, threshold=ACTIVE_SHARE):
    """Number of active non-silence symbols at every logged iteration.

    Args:
        usage_logs (pd.DataFrame | list[dict]): Usage counts, one row per iteration and one
                                                column per symbol (as `load_usage` returns),
                                                or ``{"iter": ..., "counts": [...]}`` rows.
        threshold (float): Minimal share of non-silence usage for a symbol to be active.

    Returns:
        pd.Series: Active-symbol count indexed by iteration.
    """
    if not isinstance(usage_logs, pd.DataFrame):
        usage_logs = pd.DataFrame([row["counts"] for row in usage_logs],
                                  index=pd.Index([row["iter"] for row in usage_logs], name="iter"))
    counts = [count_active_symbols(row, threshold) for row in usage_logs.to_numpy()]
    return pd.Series(counts, index=usage_logs.index, name="active_vocab", dtype=int)


def usage_histogram(records, vocab_size=None):
    """Counts of every symbol over all agents and timesteps of the records."""
    if vocab_size is None:
        vocab_size = records[0].vocab_size if records else 0
    counts = np.zeros(vocab_size, dtype=int)
    for record in records:
        counts += np.bincount(record.symbols.ravel(), minlength=vocab_size)
    return pd.Series(counts, index=pd.RangeIndex(vocab_size, name="symbol"), name="count")


def episode_summary(records, epsilon=COMPLETION_EPSILON):
    """Summary of a set of records as a `pd.Series`."""
    usage = usage_histogram(records)
    return pd.Series({
        "n_episodes": len(records),
        "goal_completion": goal_completion_rate(records, epsilon) if records else None,
        "epsilon": epsilon,
        "total_utterances": int(usage.iloc[1:].sum()) if len(usage) else 0,
        "active_vocab": count_active_symbols(usage.to_numpy()) if len(usage) else 0,
    }, dtype=object)
