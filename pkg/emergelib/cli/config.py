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

Created on Oct 16, 2026

Run configuration documents.

A run is configured by one JSON object::

    {
      "preset": "1x1x3",
      "full_scale": false,
      "spec": {"horizon": 16, "vocab_size": 20},
      "train": {"batch_size": 128, "iterations": 5000, "seed": 0},
      "output": {"dir": "runs/desk"},
      "eval": {"episodes": 200, "epsilon": 0.15}
    }

Every section and key is optional; missing values take the library defaults, a preset
fills the episode arity, and explicit ``spec`` keys override the preset. Unknown keys
are rejected with the line they appear on.
"""
import json
import os
import re
from dataclasses import dataclass, field, fields
from typing import Optional

from ..env.entities import EpisodeSpec, PRESETS
from ..analysis.metrics import COMPLETION_EPSILON
from ..training.config import TrainConfig, FULL_SCALE_BATCH_SIZE
from ..policy.params import FULL_SCALE_HIDDEN
from ..utils.exceptions import ConfigError
from ..utils.general_tools import to_builtin

SEED_ENV_VAR = "EMERGELIB_SEED"
RESOLVED_CONFIG_FILE = "resolved-config.json"
DEFAULT_OUTPUT_DIR = "emergelib-run"
MAX_ARITY = 8

SECTIONS = ("preset", "full_scale", "spec", "train", "output", "eval")
SPEC_KEYS = tuple(f.name for f in fields(EpisodeSpec))
TRAIN_KEYS = tuple(f.name for f in fields(TrainConfig) if f.name != "spec")
OUTPUT_KEYS = ("dir",)
EVAL_KEYS = ("episodes", "epsilon", "batch_size")


@dataclass
class EvalSettings:
    episodes: int = 200
    epsilon: float = COMPLETION_EPSILON
    batch_size: Optional[int] = None


@dataclass
class RunConfig:
    """A resolved run configuration.

    Attributes:
        train (TrainConfig): Training configuration, its `spec` included.
        output_dir (str): Directory every command writes to.
        eval (EvalSettings): Evaluation defaults.
        preset (str | None): Preset the episode arity was taken from.
        full_scale (bool): Whether the large network and batch sizes were requested.
    """
    train: TrainConfig = field(default_factory=TrainConfig)
    output_dir: str = DEFAULT_OUTPUT_DIR
    eval: EvalSettings = field(default_factory=EvalSettings)
    preset: Optional[str] = None
    full_scale: bool = False

    @property
    def spec(self):
        return self.train.spec

    def to_dict(self):
        train = self.train.to_dict()
        spec = train.pop("spec")
        return {"preset": self.preset, "full_scale": self.full_scale, "spec": spec,
                "train": train, "output": {"dir": self.output_dir},
                "eval": {"episodes": self.eval.episodes, "epsilon": self.eval.epsilon,
                         "batch_size": self.eval.batch_size}}


def _line_of(text, key):
    """1-based line of the first ``"key":`` in `text`, or None."""
    match = re.search(r'"{}"\s*:'.format(re.escape(key)), text)
    return None if match is None else text.count("\n", 0, match.start()) + 1


def _check_keys(section, allowed, where, text):
    if not isinstance(section, dict):
        raise ConfigError(f"section {where!r} must be an object", line=_line_of(text, where))
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}; expected one of {list(allowed)}",
                              line=_line_of(text, key))


def parse_run_config(text):
    """Build a `RunConfig` from a JSON document.

    Args:
        text (str): The document.

    Returns:
        RunConfig

    Raises:
        ConfigError: on malformed JSON, unknown keys or invalid values, with the line.
    """
    try:
        document = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON: {e.msg}", line=e.lineno) from None
    if not isinstance(document, dict):
        raise ConfigError("the configuration must be a JSON object", line=1)
    _check_keys(document, SECTIONS, "config", text)
    spec_section = document.get("spec", {})
    train_section = document.get("train", {})
    output_section = document.get("output", {})
    eval_section = document.get("eval", {})
    _check_keys(spec_section, SPEC_KEYS, "spec", text)
    _check_keys(train_section, TRAIN_KEYS, "train", text)
    _check_keys(output_section, OUTPUT_KEYS, "output", text)
    _check_keys(eval_section, EVAL_KEYS, "eval", text)

    preset = document.get("preset")
    if preset is not None and preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; available: {sorted(PRESETS)}",
                          line=_line_of(text, "preset"))
    full_scale = bool(document.get("full_scale", False))

    try:
        spec = (EpisodeSpec.from_preset(preset, **spec_section) if preset is not None
                else EpisodeSpec(**spec_section))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid spec: {e}", line=_line_of(text, "spec")) from None
    train_values = dict(hidden=FULL_SCALE_HIDDEN, features=FULL_SCALE_HIDDEN,
                        batch_size=FULL_SCALE_BATCH_SIZE) if full_scale else {}
    train_values.update(train_section)
    try:
        train = TrainConfig(spec=spec, **train_values)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid train section: {e}", line=_line_of(text, "train")) from None
    try:
        evaluation = EvalSettings(**eval_section)
        valid = evaluation.episodes >= 0 and evaluation.epsilon > 0
    except TypeError as e:
        raise ConfigError(f"invalid eval section: {e}", line=_line_of(text, "eval")) from None
    if not valid:
        raise ConfigError("eval.episodes must be non-negative and eval.epsilon positive",
                          line=_line_of(text, "eval"))
    return RunConfig(train=train, output_dir=output_section.get("dir", DEFAULT_OUTPUT_DIR),
                     eval=evaluation, preset=preset, full_scale=full_scale)


def load_run_config(path):
    """`parse_run_config` of a file; no path gives the defaults."""
    if path is None:
        return RunConfig()
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read configuration {path}: {e.strerror}") from None
    return parse_run_config(text)


def check_arity(spec):
    """Agents and landmarks must each number between 1 and `MAX_ARITY`."""
    for name, value in (("n_agents", spec.n_agents), ("n_landmarks", spec.n_landmarks)):
        if not 1 <= value <= MAX_ARITY:
            raise ConfigError(f"{name}={value} outside the supported range [1, {MAX_ARITY}]")


def resolve_seed(flag=None, config_seed=0, environ=None):
    """The run seed: ``--seed`` flag, else the `SEED_ENV_VAR` variable, else the config's."""
    environ = os.environ if environ is None else environ
    if flag is not None:
        seed, source = flag, "--seed"
    elif environ.get(SEED_ENV_VAR, "").strip():
        seed, source = environ[SEED_ENV_VAR].strip(), SEED_ENV_VAR
    else:
        seed, source = config_seed, "config"
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        raise ConfigError(f"seed from {source} is not an integer: {seed!r}") from None
    if seed < 0:
        raise ConfigError(f"seed from {source} must be non-negative, got {seed}")
    return seed


def echo_config(config, out_dir):
    """Write the resolved configuration to ``out_dir/resolved-config.json``."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, RESOLVED_CONFIG_FILE)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_builtin(config.to_dict()), f, indent=2)
        f.write("\n")
    return path
