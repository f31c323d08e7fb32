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

Created on Oct 08, 2026

Building blocks of the policy: fully connected modules, softmax pooling and
additive memories.
"""
import numpy as np

from .. import diffcore as dc
from ..utils.exceptions import ShapeMismatchError, ContractError

DROPOUT_RATE = 0.1


def fc_module(x, weights, training=False, dropout=DROPOUT_RATE, dropout_draws=None, rng=None):
    """Two ELU hidden layers and a linear read-out, applied to the last axis of `x`.

    Dropout sits between the two hidden layers and is active in training only.

    Args:
        x (Tensor): (..., n_in) inputs.
        weights (dict[str, Tensor]): ``W1, b1, W2, b2, W3, b3``.
        training (bool): Whether dropout is applied.
        dropout (float): Dropout rate.
        dropout_draws (np.ndarray | None): Uniform draws of shape (..., hidden).
        rng (np.random.Generator | None): Used when `dropout_draws` is not given.

    Returns:
        tuple[Tensor, Tensor]: The (..., n_out) output and the (..., hidden) last hidden
                               layer (read by auxiliary heads).

    Raises:
        ShapeMismatchError: if the input width does not match ``W1``.
    """
    n_in = weights["W1"].shape[0]
    if x.shape[-1] != n_in:
        raise ShapeMismatchError(f"module expects inputs of width {n_in}, got {x.shape[-1]}")
    hidden = dc.elu(dc.matmul(x, weights["W1"]) + weights["b1"])
    hidden = dc.stochastic("dropout_mask", hidden, dropout, draws=dropout_draws, rng=rng,
                           training=training)
    hidden = dc.elu(dc.matmul(hidden, weights["W2"]) + weights["b2"])
    return dc.matmul(hidden, weights["W3"]) + weights["b3"], hidden


def pool_softmax(features, default=None, axis=-2):
    """Permutation-invariant attention pooling over a set axis.

    Per feature dimension ``d``: ``phi_d = sum_j softmax_j(psi_{., d})_j * psi_{j, d}``.
    Sums are taken in sorted order, so any reordering of the set gives the same bits.

    Args:
        features (Tensor | None): (..., J, D) set of feature vectors.
        default (Tensor | None): (D,) learned vector returned for an empty set.
        axis (int): The set axis.

    Returns:
        Tensor: (..., D) pooled features.
    """
    if features is None or features.shape[axis] == 0:
        if default is None:
            raise ContractError("an empty set needs a default vector to pool to")
        return default
    weights = dc.softmax(features, axis=axis, ordered=True)
    return dc.reduce("sum", weights * features, axis=axis, ordered=True)


def broadcast_default(default, leading_shape):
    """Broadcast a (D,) default vector to ``(*leading_shape, D)``."""
    return default + np.zeros(tuple(leading_shape) + (default.shape[-1],))


def update_memory(m, delta, sigma=0.0, draws=None, rng=None, training=False):
    """Additive memory ``m' = tanh(m + delta + eps)`` with ``eps ~ N(0, sigma^2)`` in training."""
    if m.shape != delta.shape:
        raise ShapeMismatchError(f"memory {m.shape} and update {delta.shape} differ")
    noisy = dc.stochastic("gaussian_noise", m + delta, sigma, draws=draws, rng=rng,
                          training=training)
    return dc.tanh(noisy)
