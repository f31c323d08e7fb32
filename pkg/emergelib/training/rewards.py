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

Created on Oct 10, 2026

Auxiliary rewards shaping the emergent language: goal prediction and a
Dirichlet-process prior over the vocabulary.
"""
from dataclasses import dataclass

import numpy as np

from .. import diffcore as dc
from ..diffcore import Tensor
from ..env.entities import SILENCE
from ..utils.exceptions import ParameterError

ACTIVE_SHARE = 0.01


@dataclass
class UtteranceCounts:
    """Soft usage counts ``n_k`` of the non-silence symbols ``k = 1 .. K - 1``."""
    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=float)
        if np.any(self.counts < 0):
            raise ParameterError("utterance counts must be non-negative")

    @classmethod
    def from_utterances(cls, utterances):
        """Sum utterance mass over every axis but the symbol axis, dropping silence."""
        utterances = np.asarray(utterances, dtype=float)
        totals = utterances.reshape(-1, utterances.shape[-1]).sum(axis=0)
        return cls(np.delete(totals, SILENCE))

    @property
    def n(self):
        return float(self.counts.sum())


def goal_prediction_reward(predictions, targets):
    """``r_g = -sum over ordered pairs i != j of |g_hat_ij - g_j|^2``, per episode.

    Args:
        predictions (Tensor | np.ndarray): (B, N, N - 1, 8) guesses of agent ``i`` about
                                           the other agents' goal vectors.
        targets (np.ndarray): (B, N, N - 1, 8) true goal vectors, aligned with `predictions`
                              (as `env.observation.goal_prediction_targets` builds them).

    Returns:
        Tensor | np.ndarray: (B,) rewards; zero for perfect predictions.
    """
    if isinstance(predictions, Tensor):
        return -dc.reduce("sum", dc.reduce("sqnorm", predictions - targets, axis=-1), axis=(1, 2))
    errors = np.asarray(predictions) - np.asarray(targets)
    return -np.sum(errors ** 2, axis=(1, 2, 3))


def dirichlet_log_probs(counts, alpha):
    """``log p(c_k)`` with ``p(c_k) = min(1, n_k / (alpha + n - 1))``; zero where ``n_k = 0``.

    Values are plain arrays: they weigh the counts as constants of the batch. When less
    than ``1 - alpha`` utterance mass was emitted the denominator is not positive and every
    probability is clipped to one.
    """
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    log_p = np.zeros_like(counts)
    used = counts > 0
    denominator = alpha + n - 1.0
    if n > 0 and denominator > 0:
        log_p[used] = np.log(np.minimum(counts[used] / denominator, 1.0))
    return log_p


def vocab_reward_dp(counts, alpha):
    """Vocabulary reward ``r_c = sum_k n_k log p(c_k)``.

    Frequent symbols are cheap and rare ones expensive, so the active vocabulary shrinks.
    The probabilities are detached: gradients only flow through the counts weighting them.

    Args:
        counts (UtteranceCounts | Tensor): Usage counts of the non-silence symbols. A
                                           tensor of shape (K - 1,) keeps the result on
                                           its tape.
        alpha (float): Concentration; the chance of an out-of-vocabulary word.

    Returns:
        float | Tensor: The reward, always non-positive; zero when nothing was said.
    """
    if isinstance(counts, Tensor):
        log_p = dirichlet_log_probs(counts.value, alpha)
        return dc.reduce("sum", counts * log_p)
    if isinstance(counts, UtteranceCounts):
        counts = counts.counts
    counts = np.asarray(counts, dtype=float)
    return float(np.sum(counts * dirichlet_log_probs(counts, alpha)))


def count_active_symbols(counts, threshold=ACTIVE_SHARE):
    """Number of non-silence symbols whose share of non-silence usage exceeds `threshold`.

    Args:
        counts (np.ndarray): Usage counts of all K symbols, silence first.
        threshold (float): Minimal share.

    Returns:
        int
    """
    spoken = np.delete(np.asarray(counts, dtype=float), SILENCE)
    total = spoken.sum()
    if total <= 0:
        return 0
    return int(np.sum(spoken / total > threshold))
