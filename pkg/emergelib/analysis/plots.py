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

Created on Oct 15, 2026

"""
import os
from itertools import cycle
from typing import Callable

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Circle

from ..env.entities import SILENCE, LANDMARK_RADIUS

WORD_COUNTS_PLOT = "word_counts"
SYMBOL_STREAM_PLOT = "symbol_stream"
REWARD_CURVES_PLOT = "reward_curves"
TRAJECTORY_FRAME_PLOT = "trajectory_frame"

SILENCE_GLYPH = "…"
FRAME_EXTENT = 1.5
SVG_HASH_SALT = "emergelib"


def lookup_name(name: str) -> Callable:
    """The drawing function registered under one of the ``*_PLOT`` names.

    `emergelib analyze` draws its report figures by name and stores each one as
    `figure_file_name(name)`.

    Raises:
        KeyError: for a name that is not registered.
    """
    return {
        WORD_COUNTS_PLOT: plot_word_counts,
        SYMBOL_STREAM_PLOT: plot_symbol_stream_histogram,
        REWARD_CURVES_PLOT: plot_reward_curves,
        TRAJECTORY_FRAME_PLOT: plot_trajectory_frame,
    }[name]


def figure_file_name(name):
    """SVG file a named figure is saved to, e.g. ``symbol-stream.svg``."""
    return name.replace("_", "-") + ".svg"


def _new_axes(ax, figsize=(6, 4)):
    if ax is not None:
        return ax
    fig = Figure(figsize=figsize)
    return fig.add_subplot(1, 1, 1)


def plot_word_counts(curves, ax=None):
    """Active-vocabulary count over training, one line per configuration.

    Args:
        curves (dict[str, pd.Series]): Configuration name to active-symbol counts indexed
                                       by iteration (as `metrics.active_vocab_count` returns).
        ax (plt.Axes | None): Axes to draw on.

    Returns:
        plt.Axes
    """
    ax = _new_axes(ax)
    for (name, counts), marker in zip(sorted(curves.items()), cycle(["o", "s", "^", "D"])):
        ax.plot(counts.index, counts.to_numpy(), label=name, marker=marker, markevery=max(1, len(counts) // 10))
    ax.set_xlabel("Iteration")
    ax.set_ylabel("Active symbols")
    ax.set_title("Word activation counts")
    if curves:
        ax.legend(loc="best")
    return ax


def plot_symbol_stream_histogram(histogram, ax=None):
    """Heat map of symbol counts per timestep.

    Args:
        histogram (pd.DataFrame): As `language.symbol_stream_histogram` returns.
        ax (plt.Axes | None): Axes to draw on.

    Returns:
        plt.Axes
    """
    ax = _new_axes(ax)
    values = histogram.to_numpy(dtype=float)
    if values.size:
        image = ax.imshow(values.T, aspect="auto", origin="lower", cmap="viridis",
                          interpolation="nearest",
                          extent=(-0.5, values.shape[0] - 0.5, -0.5, values.shape[1] - 0.5))
        ax.figure.colorbar(image, ax=ax, label="Count")
        ax.set_yticks(np.arange(values.shape[1]))
        ax.set_yticklabels([str(s) for s in histogram.columns])
    ax.set_xlabel("Timestep")
    ax.set_ylabel("Symbol")
    ax.set_title("Symbol streams")
    return ax


def plot_reward_curves(metrics, ax=None, components=("r_total", "r_phys", "r_g", "r_c", "r_utt")):
    """Return components over training, from a ``metrics.jsonl`` DataFrame."""
    ax = _new_axes(ax)
    for component in components:
        if component in metrics:
            ax.plot(metrics.index, metrics[component].to_numpy(dtype=float), label=component)
    ax.set_xlabel("Iteration")
    ax.set_ylabel("Reward")
    if len(metrics):
        ax.legend(loc="best")
    return ax


def utterance_label(symbol):
    return SILENCE_GLYPH if symbol == SILENCE else str(int(symbol))


def plot_trajectory_frame(record, t, ax=None, show_history=True):
    """Snapshot of an episode after step `t`.

    Agents are large circles and landmarks small ones, each tagged with the SVG id
    ``entity-k`` (agents first). Gazes are drawn as rays from the agent and the symbol
    an agent uttered at `t` is written next to it, silence as an ellipsis.

    Args:
        record (EpisodeRecord): Episode to draw.
        t (int): Timestep, ``0 <= t < record.horizon``.
        ax (plt.Axes | None): Axes to draw on.
        show_history (bool): Draw each agent's path up to `t`.

    Returns:
        plt.Axes
    """
    if not 0 <= t < record.horizon:
        raise IndexError(f"timestep {t} outside episode of length {record.horizon}")
    ax = _new_axes(ax, figsize=(5, 5))
    landmark_radius = LANDMARK_RADIUS
    for i in range(record.n_agents):
        p = record.positions[t, i]
        color = record.agent_colors[i]
        if show_history:
            path = np.vstack([record.initial_positions[i][None], record.positions[:t + 1, i]])
            ax.plot(path[:, 0], path[:, 1], color=color, alpha=0.4, linewidth=1)
        gaze = record.gazes[t, i]
        ax.plot([p[0], gaze[0]], [p[1], gaze[1]], color=color, linestyle="--", linewidth=1)
        ax.add_patch(Circle(p, record.agent_radius, facecolor=color, edgecolor="black",
                            gid=f"entity-{i}"))
        ax.text(p[0] + 1.2 * record.agent_radius, p[1] + 1.2 * record.agent_radius,
                utterance_label(record.symbols[t, i]), fontsize=9, gid=f"utterance-{i}")
    for j in range(record.n_landmarks):
        ax.add_patch(Circle(record.landmarks[j], landmark_radius, facecolor=record.landmark_colors[j],
                            edgecolor="black", gid=f"entity-{record.n_agents + j}"))
    ax.set_xlim(-FRAME_EXTENT, FRAME_EXTENT)
    ax.set_ylim(-FRAME_EXTENT, FRAME_EXTENT)
    ax.set_aspect("equal")
    ax.set_title(f"episode {record.episode}, t = {t}")
    return ax


def save_svg(ax_or_figure, path):
    """Write a figure as SVG with byte-identical output for identical content."""
    figure = ax_or_figure if isinstance(ax_or_figure, Figure) else ax_or_figure.figure
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        figure.savefig(path, format="svg", metadata={"Date": None})
    return path


def render_episode(record, out_dir, prefix="frame"):
    """One SVG per timestep of an episode.

    Returns:
        list[str]: Written paths, ordered by timestep.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for t in range(record.horizon):
        ax = plot_trajectory_frame(record, t)
        paths.append(save_svg(ax, os.path.join(out_dir, f"{prefix}-{record.episode:04d}-{t:03d}.svg")))
    return paths
