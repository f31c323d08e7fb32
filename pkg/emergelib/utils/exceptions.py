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

Created on Oct 02, 2026

Exceptions and warnings raised throughout the package.
Every exception subclasses the builtin it specializes, so callers can keep catching
`ValueError` / `FloatingPointError` as usual.
"""


class ShapeMismatchError(ValueError):
    """Operand dimensions do not agree."""


class DomainError(ValueError):
    """An elementwise function was evaluated outside of its domain (e.g. log of non-positive)."""


class ParameterError(ValueError):
    """An operation received an invalid hyper-parameter (negative std, rate outside [0, 1), ...)."""


class ContractError(ValueError):
    """A caller broke an operation's precondition (non-scalar backward root, spec mismatch, ...)."""


class SpecError(ValueError):
    """An episode specification cannot be instantiated."""


class ConfigError(ValueError):
    """A run configuration is malformed.

    Args:
        message (str): Human readable description.
        line (int | None): 1-based line number in the configuration document, if known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NonFiniteError(FloatingPointError):
    """A NaN or an infinity was produced inside the differentiable graph.

    Args:
        message (str): Description of the failing operation.
        location (dict | None): Where it happened, e.g. ``{"op": "exp", "iteration": 3,
                                "batch_index": 7, "timestep": 12}``.
    """

    def __init__(self, message, location=None):
        self.location = dict(location or {})
        if self.location:
            where = ", ".join(f"{k}={v}" for k, v in self.location.items())
            message = f"{message} ({where})"
        super().__init__(message)


class SkippedStepWarning(RuntimeWarning):
    """An optimizer step was skipped because the gradient was not finite."""
