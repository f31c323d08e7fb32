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

Behavioural test suites for trained policies.

Generalization scenarios put a trained policy in situations it never saw: a landmark
of a novel color, two landmarks sharing a color, two holders giving one agent
conflicting goals, and two agents sharing the recipient's color. Non-verbal suites
compare policies trained without a communication channel.
"""
import numpy as np
import pandas as pd
from scipy import stats
from sklearn.metrics.pairwise import paired_cosine_distances

from ..env.entities import GOTO, Goal, MODES, GAZE_VISIBLE, POSITION_VISIBLE, BLIND
from ..env.world import sample_episode, stack_worlds, rotation
from ..training.config import TrainConfig
from ..training.rollout import rollout_batch
from ..training.trainer import evaluate
from ..utils.exceptions import SpecError
from ..utils.random_streams import RandomStreams
from .metrics import goal_completion_rate, COMPLETION_EPSILON

SCENARIO_STREAM = 2 ** 31 + 1
DISTRACTOR = "distractor"
DUPLICATE_COLOR = "duplicate_color"
CONFLICTING_GOALS = "conflicting_goals"
SHARED_AGENT_COLOR = "shared_agent_color"
NONVERBAL_MODES = (GAZE_VISIBLE, POSITION_VISIBLE, BLIND)


def _goto_world(spec, rng):
    return sample_episode(spec.replace(actions=(GOTO,)), rng)


def build_distractor_world(spec, rng):
    """A world plus one extra landmark whose color no other landmark has; no goal targets it."""
    world = _goto_world(spec, rng)
    palette = spec.palette_rgb
    used = {tuple(c) for c in world.landmark_colors}
    novel = [c for c in palette if tuple(c) not in used]
    if not novel:
        raise SpecError("the palette has no color left for a distractor landmark")
    color = novel[rng.integers(len(novel))]
    world.landmark_positions = np.vstack([world.landmark_positions, rng.uniform(-1, 1, size=(1, 2))])
    world.landmark_colors = np.vstack([world.landmark_colors, color[None]])
    return world, {"distractor": world.n_landmarks - 1}


def build_duplicate_color_world(spec, rng):
    """Landmark 1 takes landmark 0's color; agent 0's goal targets landmark 0."""
    if spec.n_landmarks < 2:
        raise SpecError("the duplicate-color scenario needs at least two landmarks")
    world = _goto_world(spec, rng)
    world.landmark_colors[1] = world.landmark_colors[0]
    world.goals[0] = Goal(GOTO, world.landmark_positions[0].copy(), world.goals[0].recipient)
    return world, {"goal": 0, "pair": (0, 1)}


def build_conflicting_goal_world(spec, rng):
    """Agents 0 and ``N - 1`` both send agent ``N - 1`` to different landmarks."""
    if spec.n_landmarks < 2 or spec.n_agents < 2:
        raise SpecError("the conflicting-goal scenario needs two agents and two landmarks")
    world = _goto_world(spec, rng)
    recipient = world.n_agents - 1
    first, second = rng.choice(world.n_landmarks, size=2, replace=False)
    goals = [Goal(GOTO, world.landmark_positions[rng.integers(world.n_landmarks)].copy(), h)
             for h in range(world.n_agents)]
    goals[0] = Goal(GOTO, world.landmark_positions[first].copy(), recipient)
    goals[recipient] = Goal(GOTO, world.landmark_positions[second].copy(), recipient)
    world.goals = goals
    return world, {"recipient": recipient, "targets": (int(first), int(second))}


def build_shared_color_world(spec, rng):
    """Agent 0 sends agent 1 to a landmark; an extra agent wears agent 1's color.

    The extra agent holds a copy of the goal addressed to agent 0, so nothing it holds
    is about itself.
    """
    if spec.n_agents < 2:
        raise SpecError("the shared-color scenario needs at least two agents")
    world = _goto_world(spec, rng)
    # Agent 0 takes over the goal for agent 1 by swapping whole goals with its holder.
    holder = next(h for h, g in enumerate(world.goals) if g.recipient == 1)
    world.goals[0], world.goals[holder] = world.goals[holder], world.goals[0]
    extra = world.n_agents
    position = rng.uniform(-1, 1, size=(1, 2))
    world.agent_positions = np.vstack([world.agent_positions, position])
    world.agent_velocities = np.vstack([world.agent_velocities, np.zeros((1, 2))])
    world.agent_gazes = np.vstack([world.agent_gazes, position])
    world.agent_colors = np.vstack([world.agent_colors, world.agent_colors[1][None]])
    world.frames = np.concatenate([world.frames, rotation(rng.uniform(0, 2 * np.pi, size=1))])
    to_first = next(g for g in world.goals if g.recipient == 0)
    world.goals.append(Goal(to_first.action, to_first.target.copy(), to_first.recipient))
    return world, {"recipient": 1, "twin": extra}


SCENARIOS = {
    DISTRACTOR: build_distractor_world,
    DUPLICATE_COLOR: build_duplicate_color_world,
    CONFLICTING_GOALS: build_conflicting_goal_world,
    SHARED_AGENT_COLOR: build_shared_color_world,
}


def run_scenario(params, spec, name, episodes, seed=0, config=None, batch_size=None):
    """Roll out a trained policy (evaluation mode) on scenario worlds.

    Returns:
        tuple[dict, list[dict], WorldBatch]: Trajectory arrays (T, B, ...), the scenario
                                             info of each episode and the initial states.
    """
    streams = RandomStreams(seed)
    stream = SCENARIO_STREAM + list(SCENARIOS).index(name)
    built = [SCENARIOS[name](spec, streams.generator(stream, e, "scenario")) for e in range(episodes)]
    worlds, infos = [w for w, _ in built], [i for _, i in built]
    run_spec = spec.replace(n_agents=worlds[0].n_agents, n_landmarks=worlds[0].n_landmarks)
    config = TrainConfig(spec=run_spec) if config is None else config.replace(spec=run_spec)
    batch_size = batch_size or config.batch_size
    arrays, batches = [], []
    for start in range(0, episodes, batch_size):
        chunk = list(range(start, min(start + batch_size, episodes)))
        batch = stack_worlds([worlds[e] for e in chunk])
        result = rollout_batch(params, config, streams, iteration=stream,
                               episode_keys=[(stream, e) for e in chunk], training=False,
                               batch=batch)
        arrays.append(result.trajectory.arrays())
        batches.append(batch)
    merged = {k: np.concatenate([a[k] for a in arrays], axis=1) for k in arrays[0]}
    return merged, infos, stack_worlds(worlds)


def _distractor_outcome(final, batch, infos):
    passed = []
    for b, info in enumerate(infos):
        distractor = batch.landmark_positions[b, info["distractor"]]
        ok = True
        for g in range(batch.n_goals):
            p = final[b, batch.goal_recipients[b, g]]
            ok &= np.linalg.norm(p - distractor) > np.linalg.norm(p - batch.goal_targets[b, g])
        passed.append(ok)
    return np.array(passed), {}


def _duplicate_outcome(final, batch, infos):
    passed = []
    for b, info in enumerate(infos):
        first, second = info["pair"]
        l1, l2 = batch.landmark_positions[b, first], batch.landmark_positions[b, second]
        p = final[b, batch.goal_recipients[b, info["goal"]]]
        passed.append(np.linalg.norm(p - (l1 + l2) / 2) < np.linalg.norm(p - l1))
    return np.array(passed), {}


def _conflicting_outcome(final, batch, infos):
    passed, ratios = [], []
    for b, info in enumerate(infos):
        first, second = info["targets"]
        t1, t2 = batch.landmark_positions[b, first], batch.landmark_positions[b, second]
        p = final[b, info["recipient"]]
        ratio = np.linalg.norm(p - (t1 + t2) / 2) / np.linalg.norm(t1 - t2)
        ratios.append(ratio)
        passed.append(ratio < 0.5)
    return np.array(passed), {"mean_midpoint_ratio": float(np.mean(ratios))}


def _shared_color_outcome(final, batch, infos):
    passed = []
    for b, info in enumerate(infos):
        target = batch.goal_targets[b, 0]
        both = [np.linalg.norm(final[b, a] - target) < np.linalg.norm(batch.agent_positions[b, a] - target)
                for a in (info["recipient"], info["twin"])]
        passed.append(all(both))
    return np.array(passed), {}


_OUTCOMES = {
    DISTRACTOR: _distractor_outcome,
    DUPLICATE_COLOR: _duplicate_outcome,
    CONFLICTING_GOALS: _conflicting_outcome,
    SHARED_AGENT_COLOR: _shared_color_outcome,
}


def generalization_suite(params, spec, episodes=200, seed=0, config=None, scenarios=None):
    """Pass rates of a trained policy on the four generalization scenarios.

    Args:
        params (PolicyParams): Trained policy.
        spec (EpisodeSpec): Base episodes the scenarios are derived from.
        episodes (int): Episodes per scenario.
        seed (int): Root seed.
        config (TrainConfig | None): Coefficients and batch size.
        scenarios (Sequence[str] | None): Subset of `SCENARIOS` to run.

    Returns:
        pd.DataFrame: One row per scenario: pass_rate, n_episodes and scenario-specific
                      extras (``mean_midpoint_ratio`` for conflicting goals).
    """
    rows = {}
    for name in scenarios or SCENARIOS:
        arrays, infos, batch = run_scenario(params, spec, name, episodes, seed=seed, config=config)
        passed, extras = _OUTCOMES[name](arrays["positions"][-1], batch, infos)
        rows[name] = {"pass_rate": float(passed.mean()), "n_episodes": episodes, **extras}
    return pd.DataFrame.from_dict(rows, orient="index")


def pointing_signature(records):
    """Mean cosine between the sender's gaze offset and its offset to its goal's target,
    over the steps of goals held for another agent. 1 when senders look at the target."""
    cosines = []
    for record in records:
        for goal in record.goals:
            sender = goal["holder"]
            if sender == goal["recipient"]:
                continue
            p = record.positions[:, sender]
            gaze = record.gazes[:, sender] - p
            toward = np.asarray(goal["target"]) - p
            keep = (np.linalg.norm(gaze, axis=1) > 1e-9) & (np.linalg.norm(toward, axis=1) > 1e-9)
            if keep.any():
                cosines.append(1.0 - paired_cosine_distances(gaze[keep], toward[keep]))
    if not cosines:
        return float("nan")
    return float(np.mean(np.concatenate(cosines)))


def guiding_signature(records):
    """Slope over time of the sender's distance to the target it wants another agent at;
    negative when senders lead the way."""
    steps, distances = [], []
    for record in records:
        for goal in record.goals:
            sender = goal["holder"]
            if sender == goal["recipient"]:
                continue
            d = np.linalg.norm(record.positions[:, sender] - np.asarray(goal["target"]), axis=1)
            steps.append(np.arange(record.horizon))
            distances.append(d)
    if not steps:
        return float("nan")
    x = np.concatenate(steps)
    if np.all(x == x[0]):
        return float("nan")
    return float(stats.linregress(x, np.concatenate(distances)).slope)


def pushing_signature(records, contact_margin=0.0):
    """Fraction of timesteps in which a sender touches its goal's recipient."""
    contacts = []
    for record in records:
        for goal in record.goals:
            sender, recipient = goal["holder"], goal["recipient"]
            if sender == recipient:
                continue
            gap = np.linalg.norm(record.positions[:, sender] - record.positions[:, recipient], axis=1)
            contacts.append(gap < 2 * record.agent_radius + contact_margin)
    return float(np.mean(np.concatenate(contacts))) if contacts else float("nan")


def nonverbal_suite(policies, spec, episodes=200, seed=0, config=None,
                    epsilon=COMPLETION_EPSILON, modes=NONVERBAL_MODES):
    """Completion rate and non-verbal strategy signatures per observability mode.

    Args:
        policies (dict[str, PolicyParams | None]): Trained policy per mode; missing or None
                                                   entries are reported as absent.
        spec (EpisodeSpec): Base episodes; the mode is set per row.
        episodes (int): Episodes per mode.
        seed (int): Root seed.
        config (TrainConfig | None): Coefficients and batch size.
        epsilon (float): Goal-completion radius.
        modes (Sequence[str]): Modes to report.

    Returns:
        pd.DataFrame: Index mode; columns present, completion_rate, pointing, guiding,
                      pushing.
    """
    rows = {}
    for mode in modes:
        if mode not in MODES:
            raise SpecError(f"unknown mode {mode!r}")
        params = policies.get(mode)
        if params is None:
            rows[mode] = {"present": False, "completion_rate": np.nan, "pointing": np.nan,
                          "guiding": np.nan, "pushing": np.nan}
            continue
        records = evaluate(params, spec.replace(mode=mode), episodes, seed=seed, config=config,
                           epsilon=epsilon).records
        rows[mode] = {"present": True,
                      "completion_rate": goal_completion_rate(records, epsilon),
                      "pointing": pointing_signature(records),
                      "guiding": guiding_signature(records),
                      "pushing": pushing_signature(records)}
    return pd.DataFrame.from_dict(rows, orient="index")[
        ["present", "completion_rate", "pointing", "guiding", "pushing"]]
