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

"""
from dataclasses import dataclass, field, asdict, fields
from typing import Tuple

from ..env.entities import EpisodeSpec
from ..env.rewards import ACTION_PENALTY, UTTERANCE_PENALTY
from ..policy.params import DEFAULT_HIDDEN, DEFAULT_FEATURES, MEMORY_WIDTH, FULL_SCALE_HIDDEN
from ..policy.policy import PolicyConfig, ACTION_NOISE, MEMORY_NOISE
from ..policy.modules import DROPOUT_RATE
from ..policy.gumbel import TEMPERATURE
from ..utils.exceptions import ParameterError

FULL_SCALE_BATCH_SIZE = 1024


@dataclass
class TrainConfig:
    """Everything a training run depends on.

    Args:
        spec (EpisodeSpec): Episodes to train on.
        batch_size (int): Episodes per iteration (B).
        iterations (int): Optimizer steps.
        learning_rate (float): Adam step size.
        betas (tuple[float, float]): Adam moment decay rates.
        eps (float): Adam denominator offset.
        clip_norm (float): Global gradient-norm clip.
        tau (float): Gumbel-Softmax temperature.
        alpha (float): Dirichlet-process concentration of the vocabulary reward.
        goal_weight (float): lambda_g, weight of the goal-prediction reward.
        vocab_weight (float): lambda_c, weight of the vocabulary reward.
        utterance_penalty (float): lambda_u, cost of a full non-silence utterance.
        action_penalty (float): lambda_a, weight of the motor-force regulariser.
        action_noise (float): sigma_u, motor noise in training.
        memory_noise (float): sigma_m, memory noise in training.
        dropout (float): Dropout rate between hidden layers in training.
        hidden (int): Hidden units per FC layer (H).
        features (int): Width of pooled feature vectors.
        memory (int): Width of each memory module.
        seed (int): Root seed of every random stream.
        checkpoint_every (int): Write a checkpoint every that many iterations (0: only at
                                the end).
        log_wall_clock (bool): Record wall-clock seconds in the metrics log (makes the log
                               non-deterministic).
        check_finite (bool): Abort a rollout at the first non-finite value.
    """
    spec: EpisodeSpec = field(default_factory=EpisodeSpec)
    batch_size: int = 128
    iterations: int = 5000
    learning_rate: float = 1e-3
    betas: Tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    clip_norm: float = 5.0
    tau: float = TEMPERATURE
    alpha: float = 1.0
    goal_weight: float = 0.1
    vocab_weight: float = 0.01
    utterance_penalty: float = UTTERANCE_PENALTY
    action_penalty: float = ACTION_PENALTY
    action_noise: float = ACTION_NOISE
    memory_noise: float = MEMORY_NOISE
    dropout: float = DROPOUT_RATE
    hidden: int = DEFAULT_HIDDEN
    features: int = DEFAULT_FEATURES
    memory: int = MEMORY_WIDTH
    seed: int = 0
    checkpoint_every: int = 0
    log_wall_clock: bool = False
    check_finite: bool = True

    def __post_init__(self):
        if isinstance(self.spec, dict):
            self.spec = EpisodeSpec.from_dict(self.spec)
        self.betas = tuple(self.betas)
        self.validate()

    def validate(self):
        if self.batch_size < 1:
            raise ParameterError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.iterations < 0:
            raise ParameterError(f"iterations must be non-negative, got {self.iterations}")
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if not self.tau > 0:
            raise ParameterError(f"tau must be positive, got {self.tau}")
        if not self.learning_rate > 0:
            raise ParameterError(f"learning_rate must be positive, got {self.learning_rate}")
        if not self.clip_norm > 0:
            raise ParameterError(f"clip_norm must be positive, got {self.clip_norm}")
        for name in ("goal_weight", "vocab_weight", "utterance_penalty", "action_penalty",
                     "action_noise", "memory_noise"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be non-negative, got {getattr(self, name)}")
        if not 0 <= self.dropout < 1:
            raise ParameterError(f"dropout must be in [0, 1), got {self.dropout}")
        if len(self.betas) != 2 or not all(0 <= b < 1 for b in self.betas):
            raise ParameterError(f"betas must be two values in [0, 1), got {self.betas}")
        if self.seed < 0:
            raise ParameterError(f"seed must be non-negative, got {self.seed}")
        if self.checkpoint_every < 0:
            raise ParameterError(f"checkpoint_every must be non-negative, got {self.checkpoint_every}")

    @property
    def policy_config(self):
        return PolicyConfig(tau=self.tau, action_noise=self.action_noise,
                            memory_noise=self.memory_noise, dropout=self.dropout)

    @property
    def architecture(self):
        return {"vocab_size": self.spec.vocab_size, "hidden": self.hidden,
                "features": self.features, "memory": self.memory}

    def replace(self, **changes):
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return TrainConfig(**values)

    @classmethod
    def full_scale(cls, **overrides):
        """Large-scale run: 256 hidden units and features, batches of 1024 episodes."""
        values = dict(hidden=FULL_SCALE_HIDDEN, features=FULL_SCALE_HIDDEN, batch_size=FULL_SCALE_BATCH_SIZE)
        values.update(overrides)
        return cls(**values)

    def to_dict(self):
        d = asdict(self)
        d["spec"] = self.spec.to_dict()
        d["betas"] = list(self.betas)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)
