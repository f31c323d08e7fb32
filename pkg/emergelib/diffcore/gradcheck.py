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

Created on Oct 04, 2026

Central finite-difference checks of tape gradients.
"""
import numpy as np
import pandas as pd

from .tape import Tape

DEFAULT_STEP = 1e-5


def _evaluate(build, inputs, check_finite):
    tape = Tape(check_finite=check_finite)
    tensors = {name: tape.parameter(value, name=name) for name, value in inputs.items()}
    root = build(tape, tensors)
    return tape, root


def analytic_gradient(build, inputs, check_finite=True):
    """Gradients of `build`'s scalar output by a reverse sweep.

    Args:
        build (callable): ``build(tape, tensors) -> Tensor`` where `tensors` maps each
                          input name to a parameter tensor on `tape`.
        inputs (dict[str, np.ndarray]): Point of evaluation.
        check_finite (bool): Passed to the `Tape`.

    Returns:
        dict[str, np.ndarray]: Gradient per input name.
    """
    tape, root = _evaluate(build, inputs, check_finite)
    return tape.backward(root)


def numerical_gradient(build, inputs, step=DEFAULT_STEP, check_finite=True):
    """Central differences ``(f(x + h) - f(x - h)) / 2h`` for every input entry."""
    inputs = {name: np.array(value, dtype=np.float64) for name, value in inputs.items()}
    gradients = {}
    for name, value in inputs.items():
        grad = np.zeros_like(value)
        for idx in np.ndindex(value.shape):
            shifted = dict(inputs)
            plus, minus = value.copy(), value.copy()
            plus[idx] += step
            minus[idx] -= step
            shifted[name] = plus
            f_plus = _evaluate(build, shifted, check_finite)[1].item()
            shifted[name] = minus
            f_minus = _evaluate(build, shifted, check_finite)[1].item()
            grad[idx] = (f_plus - f_minus) / (2 * step)
        gradients[name] = grad
    return gradients


def relative_error(analytic, numeric, floor=1e-8):
    """Normwise relative error ``max|a - n| / max(max|a|, max|n|, floor)``."""
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    if analytic.size == 0:
        return 0.0
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric)) / scale)


def check_gradients(build, inputs, step=DEFAULT_STEP, check_finite=True):
    """Compare analytic and finite-difference gradients.

    Args:
        build (callable): ``build(tape, tensors) -> Tensor`` (see `analytic_gradient`).
        inputs (dict[str, np.ndarray]): Point of evaluation.
        step (float): Finite-difference step.
        check_finite (bool): Passed to the `Tape`.

    Returns:
        pd.Series: Relative error per input name.
    """
    analytic = analytic_gradient(build, inputs, check_finite)
    numeric = numerical_gradient(build, inputs, step, check_finite)
    errors = {name: relative_error(analytic[name], numeric[name]) for name in inputs}
    return pd.Series(errors, name="relative_error", dtype=float)
