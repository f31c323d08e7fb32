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

Named, counter-based random streams.

Every random quantity of a rollout is drawn from a Philox generator whose key is
derived from ``(seed, iteration, batch index, site)``. A site draws one block for the
whole episode, so the value used at timestep ``t`` is ``block[t]``: a fixed function of
``(seed, iteration, batch index, timestep, site)`` that does not depend on the batch
size, on the other entries, or on the order in which entries are evaluated.
"""
import numpy as np

# Stable site identifiers. Append only: reordering changes every stream.
SITES = {
    "world": 0,
    "goals": 1,
    "phys_dropout": 2,
    "comm_dropout": 3,
    "out_dropout": 4,
    "action_noise": 5,
    "stream_memory_noise": 6,
    "out_memory_noise": 7,
    "gumbel": 8,
    "scripted": 9,
    "init": 10,
    "scenario": 11,
}

_UNIFORM_FLOOR = np.finfo(np.float64).tiny


class RandomStreams:
    """Factory of reproducible generators keyed by integer tuples.

    Args:
        seed (int): Non-negative root seed of the run.
    """

    def __init__(self, seed=0):
        seed = int(seed)
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = seed

    def generator(self, *key):
        """A fresh generator for `key`.

        Args:
            *key (int | str): Non-negative integers, or site names from `SITES`.

        Returns:
            np.random.Generator: Philox-backed generator; same key, same stream.
        """
        spawn_key = tuple(SITES[k] if isinstance(k, str) else int(k) for k in key)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=spawn_key)
        return np.random.Generator(np.random.Philox(sequence))

    @staticmethod
    def episode_keys(iteration, batch_size):
        """Default episode keys of one batch: ``(iteration, batch_index)``."""
        return [(int(iteration), b) for b in range(batch_size)]

    def episode_noise(self, episode_keys, horizon):
        return EpisodeNoise(self, episode_keys, horizon)

    def __repr__(self):
        return f"RandomStreams(seed={self.seed})"


class EpisodeNoise:
    """Lazily drawn per-site noise blocks for a batch of episodes.

    Args:
        streams (RandomStreams): Root streams.
        episode_keys (list[tuple[int, int]]): One key per batch entry.
        horizon (int): Number of timesteps, the leading axis of every block.
    """

    def __init__(self, streams, episode_keys, horizon):
        self.streams = streams
        self.episode_keys = [tuple(k) for k in episode_keys]
        self.horizon = int(horizon)
        self._blocks = {}

    @property
    def batch_size(self):
        return len(self.episode_keys)

    def _block(self, site, kind, shape):
        cache_key = (site, kind, tuple(shape))
        if cache_key not in self._blocks:
            full_shape = (self.horizon,) + tuple(shape)
            per_entry = []
            for key in self.episode_keys:
                gen = self.streams.generator(*key, site)
                if kind == "uniform":
                    draw = np.maximum(gen.random(full_shape), _UNIFORM_FLOOR)
                else:
                    draw = gen.standard_normal(full_shape)
                per_entry.append(draw)
            # (T, B, *shape)
            self._blocks[cache_key] = np.stack(per_entry, axis=1)
        return self._blocks[cache_key]

    def at(self, t):
        """View of the noise at timestep `t`."""
        if not 0 <= t < self.horizon:
            raise IndexError(f"timestep {t} outside horizon {self.horizon}")
        return StepNoise(self, t)


class StepNoise:
    """Noise of a single timestep, batched over episodes (leading axis)."""

    def __init__(self, episode_noise, t):
        self._source = episode_noise
        self.t = t

    def uniform(self, site, shape):
        """Uniform(0, 1) draws, strictly positive, of shape ``(B, *shape)``."""
        return self._source._block(site, "uniform", shape)[self.t]

    def normal(self, site, shape):
        """Standard normal draws of shape ``(B, *shape)``."""
        return self._source._block(site, "normal", shape)[self.t]
