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

Created on Oct 11, 2026

Adaptive-moment gradient ascent on the return, with global-norm clipping.
"""
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..utils.exceptions import ShapeMismatchError, SkippedStepWarning

logger = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    """First and second moments per parameter and the number of applied steps."""
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)
    step: int = 0

    @classmethod
    def zeros_like(cls, arrays):
        return cls({k: np.zeros_like(v) for k, v in arrays.items()},
                   {k: np.zeros_like(v) for k, v in arrays.items()}, 0)

    def to_dict(self):
        return {"step": self.step,
                "first_moment": {k: {"shape": list(v.shape), "values": v.ravel().tolist()}
                                 for k, v in self.first_moment.items()},
                "second_moment": {k: {"shape": list(v.shape), "values": v.ravel().tolist()}
                                  for k, v in self.second_moment.items()}}

    @classmethod
    def from_dict(cls, d):
        def arrays(entries):
            return {k: np.array(e["values"], dtype=np.float64).reshape(e["shape"])
                    for k, e in entries.items()}
        return cls(arrays(d["first_moment"]), arrays(d["second_moment"]), int(d["step"]))


def global_norm(grads):
    return float(np.sqrt(sum(np.sum(g * g) for g in grads.values())))


def clip_by_global_norm(grads, max_norm):
    """Rescale all gradients together so their joint norm is at most `max_norm`.

    Returns:
        tuple[dict, float]: Clipped gradients and the norm before clipping.
    """
    norm = global_norm(grads)
    if norm <= max_norm or norm == 0:
        return dict(grads), norm
    scale = max_norm / norm
    return {k: g * scale for k, g in grads.items()}, norm


def adam_step(params, grads, state, lr=1e-3, betas=(0.9, 0.999), eps=1e-8, clip_norm=None):
    """One bias-corrected Adam update ascending the return.

    ``theta <- theta + lr * m_hat / (sqrt(v_hat) + eps)`` where `grads` are dR/dtheta.

    Args:
        params (dict[str, np.ndarray]): Current weights.
        grads (dict[str, np.ndarray]): Gradients of the return, same keys and shapes.
        state (OptimizerState): Moments; a fresh state may be empty.
        lr (float): Step size.
        betas (tuple[float, float]): Moment decay rates.
        eps (float): Denominator offset.
        clip_norm (float | None): Global-norm clip applied before the update.

    Returns:
        tuple[dict, OptimizerState, dict]: New weights, new state, and step info
                                           (``grad_norm``, ``skipped``).
    """
    if set(grads) != set(params):
        raise ShapeMismatchError("gradients and parameters have different names")
    for name, g in grads.items():
        if g.shape != params[name].shape:
            raise ShapeMismatchError(f"gradient of {name} has shape {g.shape}, "
                                     f"parameter has {params[name].shape}")
    if not all(np.all(np.isfinite(g)) for g in grads.values()):
        warnings.warn(f"Non-finite gradient at optimizer step {state.step + 1}; step skipped.",
                      SkippedStepWarning)
        logger.warning("skipped optimizer step %d: non-finite gradient", state.step + 1)
        return params, state, {"grad_norm": float("nan"), "skipped": True}
    if clip_norm is not None:
        grads, norm = clip_by_global_norm(grads, clip_norm)
    else:
        norm = global_norm(grads)

    beta1, beta2 = betas
    step = state.step + 1
    first, second, updated = {}, {}, {}
    for name, value in params.items():
        g = grads[name]
        m = beta1 * state.first_moment.get(name, np.zeros_like(value)) + (1 - beta1) * g
        v = beta2 * state.second_moment.get(name, np.zeros_like(value)) + (1 - beta2) * g * g
        m_hat = m / (1 - beta1 ** step)
        v_hat = v / (1 - beta2 ** step)
        updated[name] = value + lr * m_hat / (np.sqrt(v_hat) + eps)
        first[name], second[name] = m, v
    return updated, OptimizerState(first, second, step), {"grad_norm": norm, "skipped": False}
