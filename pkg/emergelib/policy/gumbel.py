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

Created on Oct 09, 2026

Gumbel-Softmax symbol emission.
"""
import numpy as np

from .. import diffcore as dc
from ..utils.exceptions import ParameterError, ContractError

TEMPERATURE = 1.0


def gumbel_noise(u):
    """Standard Gumbel variates ``-log(-log u)`` from uniforms in (0, 1)."""
    return -np.log(-np.log(np.asarray(u, dtype=float)))


def gumbel_softmax_sample(logits, tau=TEMPERATURE, uniforms=None, rng=None, hard=False):
    """Relaxed (or exact) categorical sample over the last axis.

    Soft: ``softmax((logits + g) / tau)``, differentiable in `logits`.
    Hard: the one-hot of ``argmax(logits + g)``, an exact sample of
    ``Categorical(softmax(logits))``; it is recorded as a constant.

    Args:
        logits (Tensor): (..., K) unnormalised log-probabilities.
        tau (float): Temperature, must be positive.
        uniforms (np.ndarray | None): (..., K) Uniform(0, 1) draws.
        rng (np.random.Generator | None): Used when `uniforms` is not given.
        hard (bool): Emit one-hot vectors.

    Returns:
        Tensor: (..., K) non-negative vectors summing to one.
    """
    if not tau > 0:
        raise ParameterError(f"temperature must be positive, got {tau}")
    if uniforms is None:
        if rng is None:
            raise ContractError("symbol sampling needs either `uniforms` or `rng`")
        uniforms = np.maximum(rng.random(logits.shape), np.finfo(float).tiny)
    perturbation = gumbel_noise(uniforms)
    if hard:
        k = logits.shape[-1]
        choice = np.argmax(logits.value + perturbation, axis=-1)
        return logits.tape.constant(np.eye(k)[choice])
    return dc.softmax((logits + perturbation) / tau, axis=-1)
