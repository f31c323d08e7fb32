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

The shared policy: observation -> (motor action, utterance, memory updates, goal guesses).

Every agent of every episode is processed by the same weights in one vectorised pass;
the leading axes of all tensors are ``(B, N)``. Motor outputs are expressed in the
agent's private frame.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import diffcore as dc
from ..diffcore import Tensor
from ..env.entities import COMM, SILENCE, GOAL_WIDTH
from ..env.observation import ENTITY_WIDTH
from ..utils.exceptions import ContractError
from .gumbel import gumbel_softmax_sample, TEMPERATURE
from .modules import fc_module, pool_softmax, broadcast_default, update_memory, DROPOUT_RATE
from .params import (PolicyParams, PHYS_ENCODER, COMM_ENCODER, GOAL_HEAD, OUTPUT_MODULE,
                     PHYS_DEFAULT, COMM_DEFAULT, MOTOR_WIDTH)

ACTION_NOISE = 0.1
MEMORY_NOISE = 0.05


@dataclass
class PolicyConfig:
    """Stochasticity of the policy; all of it is switched off in evaluation mode."""
    tau: float = TEMPERATURE
    action_noise: float = ACTION_NOISE
    memory_noise: float = MEMORY_NOISE
    dropout: float = DROPOUT_RATE


@dataclass
class MemoryBank:
    """Recurrent state of every agent.

    Attributes:
        streams (Tensor | None): (B, N, N - 1, memory) one memory per incoming stream,
                                 keyed by the emitting agent's slot.
        output (Tensor): (B, N, memory) memory of the output module.
    """
    streams: Optional[Tensor]
    output: Tensor

    @classmethod
    def zeros(cls, tape, batch_size, n_agents, memory, with_streams=True):
        streams = None
        if with_streams and n_agents > 1:
            streams = tape.constant(np.zeros((batch_size, n_agents, n_agents - 1, memory)))
        return cls(streams=streams, output=tape.constant(np.zeros((batch_size, n_agents, memory))))


@dataclass
class ActionSample:
    """Outputs of one policy step.

    Attributes:
        u_p (Tensor): (B, N, 2) motor force, agent frame.
        u_v (Tensor): (B, N, 2) gaze target relative to the agent, agent frame.
        c (Tensor): (B, N, K) utterance; soft in training, one-hot in evaluation.
        logits (Tensor): (B, N, K) utterance logits.
        psi_u (Tensor): (B, N, 4) noiseless motor output.
        delta_streams (Tensor | None): (B, N, N - 1, memory) stream-memory updates.
        delta_output (Tensor): (B, N, memory) output-memory update.
        goal_predictions (Tensor | None): (B, N, N - 1, 8) guesses of the other agents'
                                          goal vectors; never fed back into actions.
    """
    u_p: Tensor
    u_v: Tensor
    c: Tensor
    logits: Tensor
    psi_u: Tensor
    delta_streams: Optional[Tensor]
    delta_output: Tensor
    goal_predictions: Optional[Tensor]


def _weights(params, tape):
    if isinstance(params, PolicyParams):
        return params.as_constants(tape), params.vocab_size, params.memory
    memory = params[f"{COMM_ENCODER}.W3"].shape[1] - params[COMM_DEFAULT].shape[0]
    vocab = params[f"{COMM_ENCODER}.W1"].shape[0] - memory
    return params, vocab, memory


def _module(weights, role):
    prefix = role + "."
    return {name[len(prefix):]: value for name, value in weights.items() if name.startswith(prefix)}


def _draws(noise, kind, site, shape):
    if noise is None:
        return None
    return noise.uniform(site, shape) if kind == "uniform" else noise.normal(site, shape)


def policy_forward(obs, memory, params, noise=None, training=True, config=None):
    """One step of the shared policy for every agent of a batch.

    Args:
        obs (Observation): Built by `env.observe` for the same spec.
        memory (MemoryBank): Current memories.
        params (PolicyParams | dict[str, Tensor]): Weights; a `PolicyParams` is recorded as
                                                   constants, a dict of tensors is used as is.
        noise (StepNoise | None): Per-step random draws; required in training.
        training (bool): Soft utterances, dropout and Gaussian noise when True; one-hot
                         utterances and no noise otherwise.
        config (PolicyConfig | None): Noise levels and temperature.

    Returns:
        tuple[ActionSample, MemoryBank]: Actions and the updated memories.

    Raises:
        ContractError: if the observation does not match the policy's widths.
    """
    config = config or PolicyConfig()
    tape = obs.physical.tape
    weights, vocab, memory_width = _weights(params, tape)
    if training and noise is None:
        raise ContractError("training-mode policy steps need per-step noise")
    if obs.physical.shape[-1] != ENTITY_WIDTH or obs.goal.shape[-1] != GOAL_WIDTH:
        raise ContractError(f"observation widths ({obs.physical.shape[-1]}, {obs.goal.shape[-1]}) "
                            f"do not match the policy ({ENTITY_WIDTH}, {GOAL_WIDTH})")
    if obs.streams is not None and obs.streams.shape[-1] != vocab:
        raise ContractError(f"streams carry {obs.streams.shape[-1]} symbols, the policy speaks {vocab}")
    bsz, n, n_entities = obs.physical.shape[:3]
    hidden = weights[f"{PHYS_ENCODER}.W1"].shape[1]

    # Physical observations: one encoder for every entity, pooled over entities.
    phys_features, _ = fc_module(
        obs.physical, _module(weights, PHYS_ENCODER), training=training, dropout=config.dropout,
        dropout_draws=_draws(noise, "uniform", "phys_dropout", (n, n_entities, hidden)))
    phi_x = pool_softmax(phys_features, default=broadcast_default(weights[PHYS_DEFAULT], (bsz, n)))

    # Utterance streams: one encoder for every (stream, stream memory) pair.
    delta_streams, goal_predictions = None, None
    if obs.streams is not None and memory.streams is not None:
        n_streams = obs.streams.shape[2]
        comm_in = dc.concat([obs.streams, memory.streams], axis=-1)
        comm_out, comm_hidden = fc_module(
            comm_in, _module(weights, COMM_ENCODER), training=training, dropout=config.dropout,
            dropout_draws=_draws(noise, "uniform", "comm_dropout", (n, n_streams, hidden)))
        n_features = weights[COMM_DEFAULT].shape[0]
        stream_features = comm_out[..., :n_features]
        delta_streams = comm_out[..., n_features:]
        goal_predictions = dc.matmul(comm_hidden, weights[f"{GOAL_HEAD}.W"]) + weights[f"{GOAL_HEAD}.b"]
        phi_c = pool_softmax(stream_features)
    else:
        phi_c = broadcast_default(weights[COMM_DEFAULT], (bsz, n))

    out_in = dc.concat([phi_x, phi_c, obs.goal, memory.output], axis=-1)
    out, _ = fc_module(out_in, _module(weights, OUTPUT_MODULE), training=training,
                       dropout=config.dropout,
                       dropout_draws=_draws(noise, "uniform", "out_dropout", (n, hidden)))
    psi_u = out[..., :MOTOR_WIDTH]
    logits = out[..., MOTOR_WIDTH:MOTOR_WIDTH + vocab]
    delta_output = out[..., MOTOR_WIDTH + vocab:]

    u = dc.stochastic("gaussian_noise", psi_u, config.action_noise,
                      draws=_draws(noise, "normal", "action_noise", (n, MOTOR_WIDTH)),
                      training=training)
    if obs.mode == COMM:
        c = gumbel_softmax_sample(logits, config.tau,
                                  uniforms=_uniforms_for_symbols(noise, n, vocab, logits),
                                  hard=not training)
    else:
        c = tape.constant(np.broadcast_to(np.eye(vocab)[SILENCE], (bsz, n, vocab)))

    sample = ActionSample(u_p=u[..., 0:2], u_v=u[..., 2:4], c=c, logits=logits, psi_u=psi_u,
                          delta_streams=delta_streams, delta_output=delta_output,
                          goal_predictions=goal_predictions)
    next_memory = MemoryBank(
        streams=None if delta_streams is None else update_memory(
            memory.streams, delta_streams, config.memory_noise, training=training,
            draws=_draws(noise, "normal", "stream_memory_noise", tuple(delta_streams.shape[1:]))),
        output=update_memory(memory.output, delta_output, config.memory_noise, training=training,
                             draws=_draws(noise, "normal", "out_memory_noise", (n, memory_width))))
    return sample, next_memory


def _uniforms_for_symbols(noise, n, vocab, logits):
    if noise is None:
        # Evaluation without explicit noise: the mode of the distribution.
        return np.full(logits.shape, np.exp(-1.0))
    return noise.uniform("gumbel", (n, vocab))
