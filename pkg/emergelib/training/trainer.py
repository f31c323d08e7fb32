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

Created on Oct 12, 2026

End-to-end training by backpropagation through time, and evaluation.
"""
import logging
import os
import time

import numpy as np
import pandas as pd
from sklearn.utils import Bunch

from ..env.export import trajectory_records
from ..policy.params import PolicyParams, save_checkpoint, load_checkpoint
from ..utils.exceptions import ContractError
from ..utils.general_tools import create_repr_string, write_jsonl
from ..utils.random_streams import RandomStreams
from .config import TrainConfig
from .optimizer import OptimizerState, adam_step
from .rewards import count_active_symbols, ACTIVE_SHARE
from .rollout import rollout_batch, EVALUATION_STREAM

logger = logging.getLogger(__name__)

METRICS_FIELDS = ("iter", "r_total", "r_phys", "r_g", "r_c", "r_utt", "active_vocab", "seconds")
METRICS_FILE = "metrics.jsonl"
USAGE_FILE = "usage.jsonl"
CHECKPOINT_FILE = "checkpoint.json"
CHECKPOINT_DIR = "checkpoints"
COMPLETION_EPSILON = 0.15


class BPTTTrainer:
    """Trains the shared policy on the composite return.

    Every iteration samples a fresh batch of worlds, unrolls it on a tape, differentiates
    the return with respect to all weights, and takes one clipped Adam ascent step. All
    randomness of iteration ``it`` comes from streams keyed by ``(seed, it, b, site)``, so a
    run is reproduced bit-exactly by its config, also across a resume.

    Args:
        config (TrainConfig): Run configuration.
        out_dir (str | None): Where ``metrics.jsonl``, ``usage.jsonl`` and checkpoints go.
                              Nothing is written when None.
        verbose (bool): Log progress at INFO level every `log_every` iterations.
        log_every (int): Progress-log period.
    """

    def __init__(self, config, out_dir=None, verbose=False, log_every=50):
        self.config = config
        self.out_dir = out_dir
        self.verbose = verbose
        self.log_every = log_every

    def _initial_params(self, streams):
        return PolicyParams.initialize(rng=streams.generator("init"), **self.config.architecture)

    def fit(self, params=None, resume=None):
        """Run the training loop.

        Args:
            params (PolicyParams | None): Starting weights; random when None.
            resume (str | None): Checkpoint to continue from (weights, moments, iteration).

        Returns:
            BPTTTrainer: self, with ``params_``, ``optimizer_state_`` and ``history_``.
        """
        config = self.config
        streams = RandomStreams(config.seed)
        start = 0
        if resume is not None:
            checkpoint = load_checkpoint(resume)
            params = checkpoint["params"]
            state = (OptimizerState.from_dict(checkpoint["optimizer"])
                     if checkpoint["optimizer"] is not None else OptimizerState.zeros_like(params.arrays))
            start = 0 if checkpoint["iteration"] is None else checkpoint["iteration"] + 1
            logger.info("resuming from %s at iteration %d", resume, start)
        else:
            params = self._initial_params(streams) if params is None else params
            state = OptimizerState.zeros_like(params.arrays)
        if params.architecture != config.architecture:
            raise ContractError(f"params architecture {params.architecture} does not match the "
                                f"config {config.architecture}")

        if self.out_dir is not None:
            os.makedirs(self.out_dir, exist_ok=True)
            if resume is None:
                # An empty log body marks a run that has not completed any iteration.
                open(os.path.join(self.out_dir, METRICS_FILE), "w").close()
                open(os.path.join(self.out_dir, USAGE_FILE), "w").close()

        history = []
        for iteration in range(start, config.iterations):
            started = time.perf_counter()
            result = rollout_batch(params, config, streams, iteration=iteration)
            grads = result.tape.backward(result.total)
            arrays, state, info = adam_step(params.arrays, grads, state, lr=config.learning_rate,
                                            betas=config.betas, eps=config.eps,
                                            clip_norm=config.clip_norm)
            params = params.replace(arrays)
            record = {"iter": iteration, **result.components,
                      "active_vocab": count_active_symbols(result.usage, ACTIVE_SHARE),
                      "seconds": time.perf_counter() - started if config.log_wall_clock else None}
            record = {k: record[k] for k in METRICS_FIELDS}
            history.append(record)
            self._log_iteration(record, result.usage, info)
            if config.checkpoint_every and (iteration + 1) % config.checkpoint_every == 0:
                self._checkpoint(params, state, iteration, periodic=True)

        if self.out_dir is not None:
            last = max(config.iterations, start) - 1
            self._checkpoint(params, state, last if last >= 0 else None, periodic=False)
        self.params_ = params
        self.optimizer_state_ = state
        self.history_ = pd.DataFrame(history, columns=list(METRICS_FIELDS))
        return self

    def _log_iteration(self, record, usage, info):
        if self.verbose and (record["iter"] % self.log_every == 0):
            logger.info("iter %d: r_total=%.4f r_phys=%.4f active_vocab=%d grad_norm=%.3g",
                        record["iter"], record["r_total"], record["r_phys"], record["active_vocab"],
                        info["grad_norm"])
        if self.out_dir is None:
            return
        write_jsonl(os.path.join(self.out_dir, METRICS_FILE), [record], mode="a")
        write_jsonl(os.path.join(self.out_dir, USAGE_FILE),
                    [{"iter": record["iter"], "counts": usage}], mode="a")

    def _checkpoint(self, params, state, iteration, periodic):
        if self.out_dir is None:
            return
        if periodic:
            directory = os.path.join(self.out_dir, CHECKPOINT_DIR)
            os.makedirs(directory, exist_ok=True)
            path = os.path.join(directory, f"iter-{iteration:06d}.json")
        else:
            path = os.path.join(self.out_dir, CHECKPOINT_FILE)
        save_checkpoint(path, params, optimizer_state=state, iteration=iteration,
                        extra={"config": self.config.to_dict()})
        logger.debug("wrote checkpoint %s", path)

    def __repr__(self):
        return create_repr_string(self)


def train(config, out_dir=None, resume=None, params=None, verbose=False):
    """Train a policy.

    Args:
        config (TrainConfig): Run configuration.
        out_dir (str | None): Output directory for logs and checkpoints.
        resume (str | None): Checkpoint to continue from.
        params (PolicyParams | None): Starting weights.
        verbose (bool): Log progress.

    Returns:
        tuple[PolicyParams, pd.DataFrame]: Trained weights and the metrics log.
    """
    trainer = BPTTTrainer(config, out_dir=out_dir, verbose=verbose).fit(params=params, resume=resume)
    return trainer.params_, trainer.history_


def _episode_chunks(episodes, batch_size):
    for start in range(0, episodes, batch_size):
        yield list(range(start, min(start + batch_size, episodes)))


def evaluate(params, spec, episodes, seed=0, config=None, epsilon=COMPLETION_EPSILON,
             batch_size=None, training=False, stream=EVALUATION_STREAM):
    """Roll out a fixed policy with hard symbols and no noise, and summarise it.

    Args:
        params (PolicyParams): Policy weights.
        spec (EpisodeSpec): Episodes to run; arity may differ from training.
        episodes (int): Number of episodes.
        seed (int): Root seed.
        config (TrainConfig | None): Coefficients; defaults are used when None.
        epsilon (float): Goal-completion radius.
        batch_size (int | None): Episodes per rollout, defaults to the config's.
        training (bool): Run the training-mode policy instead (soft and noisy).
        stream (int): First component of the episode keys.

    Returns:
        Bunch: ``report`` (pd.Series), ``usage`` (pd.Series, counts per symbol),
               ``episode_logs`` (pd.DataFrame), ``trajectories`` (list[dict]) and
               ``records`` (list[EpisodeRecord]).
    """
    from ..analysis.metrics import goal_completion_rate
    from ..analysis.records import records_from_trajectories

    config = TrainConfig(spec=spec) if config is None else config.replace(spec=spec)
    if params.vocab_size != spec.vocab_size:
        raise ContractError(f"policy speaks {params.vocab_size} symbols, spec has {spec.vocab_size}")
    batch_size = batch_size or config.batch_size
    streams = RandomStreams(seed)
    usage = np.zeros(spec.vocab_size, dtype=int)
    logs, trajectories = [], []
    for chunk in _episode_chunks(episodes, batch_size):
        keys = [(stream, e) for e in chunk]
        result = rollout_batch(params, config, streams, iteration=stream, episode_keys=keys,
                               training=training)
        usage += result.usage
        logs.append(result.episode_logs.assign(episode=chunk))
        trajectories.extend(trajectory_records(spec, result.batch, result.trajectory.arrays(),
                                               episode_ids=chunk))
    records = records_from_trajectories(trajectories)
    episode_logs = pd.concat(logs, ignore_index=True) if logs else pd.DataFrame(
        columns=["iteration", "episode_key", "r_phys", "r_utt", "r_g", "episode"])
    report = pd.Series({
        "n_episodes": episodes,
        "mean_r_phys": float(episode_logs["r_phys"].mean()) if episodes else None,
        "mean_r_utt": float(episode_logs["r_utt"].mean()) if episodes else None,
        "goal_completion": goal_completion_rate(records, epsilon) if episodes else None,
        "epsilon": epsilon,
        "total_utterances": int(usage[1:].sum()),
        "active_vocab": count_active_symbols(usage, ACTIVE_SHARE),
    }, dtype=object)
    usage = pd.Series(usage, index=pd.RangeIndex(spec.vocab_size, name="symbol"), name="count")
    return Bunch(report=report, usage=usage, episode_logs=episode_logs,
                 trajectories=trajectories, records=records)


def train_test_comparison(params, spec, episodes, seed=0, config=None, epsilon=COMPLETION_EPSILON):
    """Physical reward of the training-mode policy next to the evaluation-mode one.

    Returns:
        pd.DataFrame: Rows ``train`` and ``test``; columns ``mean_r_phys`` and
                      ``goal_completion``.
    """
    rows = {}
    for name, training in (("train", True), ("test", False)):
        report = evaluate(params, spec, episodes, seed=seed, config=config, epsilon=epsilon,
                          training=training).report
        rows[name] = {"mean_r_phys": report["mean_r_phys"],
                      "goal_completion": report["goal_completion"]}
    return pd.DataFrame.from_dict(rows, orient="index")
