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

Measurements of the emergent language: which symbols stand for which goal concepts,
how symbol usage unfolds over an episode, and the path agents take to their target.

Symbols are attributed to concepts at the episode level: a goal's holder "used" a
symbol if it uttered it at any timestep, since utterances carry no fixed word order.
"""
from collections import Counter

import numpy as np
import pandas as pd
from sklearn.metrics import normalized_mutual_info_score
from sklearn.utils import Bunch

from ..env.entities import GOTO, SILENCE

CONCEPTS = ("landmark_color", "action", "recipient_color")


def chance_consistency(vocab_size, horizon):
    """Probability that `horizon` uniformly random non-silence symbols include a given one."""
    return 1.0 - (1.0 - 1.0 / (vocab_size - 1)) ** horizon


def _modal_symbol(utterance_sets):
    counts = Counter(s for symbols in utterance_sets for s in symbols)
    if not counts:
        return None, 0
    # Most episodes first, smallest symbol on ties.
    symbol, count = min(counts.items(), key=lambda item: (-item[1], item[0]))
    return symbol, count


def _dominant_symbol(record, agent):
    spoken = record.symbols[:, agent]
    spoken = spoken[spoken != SILENCE]
    if spoken.size == 0:
        return SILENCE
    values, counts = np.unique(spoken, return_counts=True)
    return int(values[np.argmax(counts)])


def symbol_goal_consistency(records, concepts=CONCEPTS):
    """Modal symbol of every goal concept and how consistently it is used.

    For each concept value (e.g. ``landmark_color = "red"``) the goals conveying it are
    collected; the modal symbol is the one found in most of their holders' utterance
    sets, and the consistency is the fraction of those goals whose set contains it.

    Args:
        records (list[EpisodeRecord]): Episodes of a fixed policy.
        concepts (Sequence[str]): Concept kinds to analyse.

    Returns:
        Bunch:
            table (pd.DataFrame): concept, value, modal_symbol, consistency, n_goals.
            consistency_rate (pd.Series): Goal-weighted consistency per concept kind.
            distinct (pd.Series): Whether the modal symbols of a concept kind are pairwise
                                  distinct.
            nmi (pd.Series): Normalised mutual information between the concept value and
                             the holder's most frequent symbol, per concept kind.
            chance (float): Consistency expected from uniformly random symbols.
    """
    rows, rates, distinct, nmi = [], {}, {}, {}
    for concept in concepts:
        by_value, labels, spoken = {}, [], []
        for record in records:
            for goal in record.goals:
                value = record.goal_concepts(goal)[concept]
                if value is None:
                    continue
                by_value.setdefault(value, []).append(record.utterance_set(goal["holder"]))
                labels.append(value)
                spoken.append(_dominant_symbol(record, goal["holder"]))
        concept_rows = []
        for value in sorted(by_value):
            sets = by_value[value]
            symbol, count = _modal_symbol(sets)
            concept_rows.append({"concept": concept, "value": value, "modal_symbol": symbol,
                                 "consistency": count / len(sets), "n_goals": len(sets)})
        rows.extend(concept_rows)
        n_goals = sum(r["n_goals"] for r in concept_rows)
        rates[concept] = (sum(r["consistency"] * r["n_goals"] for r in concept_rows) / n_goals
                          if n_goals else float("nan"))
        modal = [r["modal_symbol"] for r in concept_rows]
        distinct[concept] = None not in modal and len(set(modal)) == len(modal)
        nmi[concept] = float(normalized_mutual_info_score(labels, spoken)) if labels else float("nan")

    table = pd.DataFrame(rows, columns=["concept", "value", "modal_symbol", "consistency", "n_goals"])
    chance = (chance_consistency(records[0].vocab_size, records[0].horizon)
              if records else float("nan"))
    return Bunch(table=table,
                 consistency_rate=pd.Series(rates, name="consistency_rate", dtype=float),
                 distinct=pd.Series(distinct, name="distinct", dtype=bool),
                 nmi=pd.Series(nmi, name="nmi", dtype=float),
                 chance=chance)


def symbol_stream_histogram(records, include_silence=False):
    """Counts of every symbol at every timestep, pooled over agents and episodes.

    Returns:
        pd.DataFrame: Index ``t``, one column per symbol.
    """
    if not records:
        return pd.DataFrame(index=pd.RangeIndex(0, name="t"))
    vocab_size, horizon = records[0].vocab_size, records[0].horizon
    counts = np.zeros((horizon, vocab_size), dtype=int)
    for record in records:
        for t in range(record.horizon):
            counts[t] += np.bincount(record.symbols[t], minlength=vocab_size)
    histogram = pd.DataFrame(counts, index=pd.RangeIndex(horizon, name="t"),
                             columns=pd.RangeIndex(vocab_size, name="symbol"))
    return histogram if include_silence else histogram.drop(columns=SILENCE)


def centroid_detour_statistic(records, drop_fraction=0.5):
    """How often a GOTO recipient first heads for the landmark centroid.

    A detour is recorded when the distance to the landmark centroid reaches its minimum
    below its initial value before the distance to the target first falls under
    ``drop_fraction`` of its initial value.

    Returns:
        pd.Series: detour_fraction, mean_centroid_dip_step, mean_target_drop_step, n_goals.
    """
    dips, drops, detours = [], [], []
    for record in records:
        centroid = record.landmarks.mean(axis=0)
        for goal in record.goals:
            if goal["action"] != GOTO:
                continue
            r = goal["recipient"]
            path = np.vstack([record.initial_positions[r][None], record.positions[:, r]])
            to_centroid = np.linalg.norm(path - centroid, axis=1)
            to_target = np.linalg.norm(path - np.asarray(goal["target"]), axis=1)
            dip = int(np.argmin(to_centroid))
            below = np.flatnonzero(to_target < drop_fraction * to_target[0])
            drop = int(below[0]) if below.size else len(path)
            dips.append(dip)
            drops.append(drop)
            detours.append(to_centroid[dip] < to_centroid[0] and dip < drop)
    n = len(detours)
    return pd.Series({
        "detour_fraction": float(np.mean(detours)) if n else float("nan"),
        "mean_centroid_dip_step": float(np.mean(dips)) if n else float("nan"),
        "mean_target_drop_step": float(np.mean(drops)) if n else float("nan"),
        "n_goals": n,
    })
