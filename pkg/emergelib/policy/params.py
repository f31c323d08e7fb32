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

Weights of the shared policy and their checkpoint container.

There is exactly one weight set per module role. The physical encoder processes every
entity row and the communication encoder processes every incoming stream, so the
number of agents and landmarks never shows up in a parameter shape.
"""
import json
import os

import numpy as np

from ..env.entities import GOAL_WIDTH
from ..env.observation import ENTITY_WIDTH
from ..utils.exceptions import ContractError, ShapeMismatchError
from ..utils.general_tools import to_builtin

PHYS_ENCODER = "phys_encoder"
COMM_ENCODER = "comm_encoder"
GOAL_HEAD = "goal_head"
OUTPUT_MODULE = "output_module"
PHYS_DEFAULT = "phys_default"
COMM_DEFAULT = "comm_default"
FC_LAYERS = ("W1", "b1", "W2", "b2", "W3", "b3")

MEMORY_WIDTH = 32
DEFAULT_HIDDEN = 64
DEFAULT_FEATURES = 64
FULL_SCALE_HIDDEN = 256
MOTOR_WIDTH = 4  # u_p and u_v

CHECKPOINT_FORMAT = "emergelib-checkpoint"
CHECKPOINT_VERSION = 1


def _fc_shapes(role, n_in, hidden, n_out):
    return {f"{role}.W1": (n_in, hidden), f"{role}.b1": (hidden,),
            f"{role}.W2": (hidden, hidden), f"{role}.b2": (hidden,),
            f"{role}.W3": (hidden, n_out), f"{role}.b3": (n_out,)}


def parameter_shapes(vocab_size, hidden=DEFAULT_HIDDEN, features=DEFAULT_FEATURES,
                     memory=MEMORY_WIDTH):
    """Name -> shape of every policy weight, in a fixed order."""
    shapes = {}
    shapes.update(_fc_shapes(PHYS_ENCODER, ENTITY_WIDTH, hidden, features))
    shapes.update(_fc_shapes(COMM_ENCODER, vocab_size + memory, hidden, features + memory))
    shapes.update({f"{GOAL_HEAD}.W": (hidden, GOAL_WIDTH), f"{GOAL_HEAD}.b": (GOAL_WIDTH,)})
    shapes.update(_fc_shapes(OUTPUT_MODULE, 2 * features + GOAL_WIDTH + memory, hidden,
                             MOTOR_WIDTH + vocab_size + memory))
    shapes.update({PHYS_DEFAULT: (features,), COMM_DEFAULT: (features,)})
    return shapes


class PolicyParams:
    """Named weight arrays of the shared policy.

    Args:
        arrays (dict[str, np.ndarray]): Weights, keyed as in `parameter_shapes`.
        vocab_size (int): Number of symbols K.
        hidden (int): Hidden units per FC layer.
        features (int): Width of the pooled feature vectors.
        memory (int): Width of every memory module.
    """

    def __init__(self, arrays, vocab_size, hidden=DEFAULT_HIDDEN, features=DEFAULT_FEATURES,
                 memory=MEMORY_WIDTH):
        self.vocab_size = int(vocab_size)
        self.hidden = int(hidden)
        self.features = int(features)
        self.memory = int(memory)
        expected = parameter_shapes(self.vocab_size, self.hidden, self.features, self.memory)
        if set(arrays) != set(expected):
            raise ContractError(f"parameter names differ from the architecture: "
                                f"missing {sorted(set(expected) - set(arrays))}, "
                                f"unexpected {sorted(set(arrays) - set(expected))}")
        self.arrays = {}
        for name, shape in expected.items():
            value = np.array(arrays[name], dtype=np.float64)
            if value.shape != tuple(shape):
                raise ShapeMismatchError(f"{name} has shape {value.shape}, expected {tuple(shape)}")
            self.arrays[name] = value

    @classmethod
    def initialize(cls, vocab_size, rng, hidden=DEFAULT_HIDDEN, features=DEFAULT_FEATURES,
                   memory=MEMORY_WIDTH):
        """Random weights ``U(-1/sqrt(fan_in), 1/sqrt(fan_in))``, zero biases and defaults."""
        arrays = {}
        for name, shape in parameter_shapes(vocab_size, hidden, features, memory).items():
            if len(shape) == 2:
                bound = 1.0 / np.sqrt(shape[0])
                arrays[name] = rng.uniform(-bound, bound, size=shape)
            else:
                arrays[name] = np.zeros(shape)
        return cls(arrays, vocab_size, hidden, features, memory)

    @property
    def architecture(self):
        return {"vocab_size": self.vocab_size, "hidden": self.hidden,
                "features": self.features, "memory": self.memory}

    @property
    def names(self):
        return list(self.arrays)

    @property
    def n_parameters(self):
        return int(sum(a.size for a in self.arrays.values()))

    def module(self, role):
        """Weights of one module role, keyed by layer name (``W1``, ``b1``, ...)."""
        prefix = role + "."
        return {name[len(prefix):]: value for name, value in self.arrays.items()
                if name.startswith(prefix)}

    def on_tape(self, tape):
        """Record every weight as a named parameter of `tape`."""
        return {name: tape.parameter(value, name=name) for name, value in self.arrays.items()}

    def as_constants(self, tape):
        return {name: tape.constant(value) for name, value in self.arrays.items()}

    def replace(self, arrays):
        """New params with some arrays swapped in."""
        merged = dict(self.arrays)
        merged.update(arrays)
        return PolicyParams(merged, **self.architecture)

    def copy(self):
        return self.replace({})

    def equals(self, other):
        return (self.architecture == other.architecture and
                all(np.array_equal(self.arrays[k], other.arrays[k]) for k in self.arrays))

    def to_dict(self):
        return {"architecture": self.architecture,
                "arrays": {name: {"shape": list(value.shape), "values": value.ravel().tolist()}
                           for name, value in self.arrays.items()}}

    @classmethod
    def from_dict(cls, d):
        arrays = {name: np.array(entry["values"], dtype=np.float64).reshape(entry["shape"])
                  for name, entry in d["arrays"].items()}
        return cls(arrays, **d["architecture"])

    def __repr__(self):
        return (f"PolicyParams(vocab_size={self.vocab_size}, hidden={self.hidden}, "
                f"features={self.features}, memory={self.memory})")


def save_checkpoint(path, params, optimizer_state=None, iteration=None, extra=None):
    """Write a versioned JSON checkpoint.

    Floats are written with their shortest round-tripping representation, so loading
    restores every weight bit-exactly.

    Args:
        path (str): Destination file.
        params (PolicyParams): Policy weights.
        optimizer_state (object | None): Anything with a ``to_dict()`` method.
        iteration (int | None): Last completed training iteration.
        extra (dict | None): Additional JSON-serializable metadata.
    """
    document = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "iteration": iteration,
        "params": params.to_dict(),
        "optimizer": None if optimizer_state is None else optimizer_state.to_dict(),
        "extra": extra or {},
    }
    tmp_path = f"{path}.tmp"
    with open(tmp_path, "w", encoding="utf-8") as f:
        json.dump(to_builtin(document), f, allow_nan=False)
    os.replace(tmp_path, path)


def load_checkpoint(path):
    """Read a checkpoint written by `save_checkpoint`.

    Returns:
        dict: ``params`` (PolicyParams), ``optimizer`` (raw dict or None), ``iteration``
              and ``extra``.

    Raises:
        ContractError: if the file is not a checkpoint of a supported version.
    """
    with open(path, "r", encoding="utf-8") as f:
        document = json.load(f)
    if document.get("format") != CHECKPOINT_FORMAT:
        raise ContractError(f"{path} is not an emergelib checkpoint")
    if document.get("version") != CHECKPOINT_VERSION:
        raise ContractError(f"unsupported checkpoint version {document.get('version')}")
    return {"params": PolicyParams.from_dict(document["params"]),
            "optimizer": document.get("optimizer"),
            "iteration": document.get("iteration"),
            "extra": document.get("extra", {})}
