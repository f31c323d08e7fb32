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

Command line entry point: ``emergelib {train,eval,analyze,render}``.

Every command writes only inside its output directory and returns an exit code:
0 on success, 2 on configuration or input errors, 3 on numeric failures.
"""
import argparse
import json
import logging
import math
import os
import sys

from ..analysis.baselines import centroid_baseline
from ..analysis.language import (symbol_goal_consistency, symbol_stream_histogram,
                                 centroid_detour_statistic)
from ..analysis.metrics import active_vocab_count, episode_summary
from ..analysis.plots import (lookup_name, figure_file_name, render_episode, save_svg,
                              WORD_COUNTS_PLOT, SYMBOL_STREAM_PLOT, REWARD_CURVES_PLOT)
from ..analysis.records import load_records, load_metrics, load_usage
from ..analysis.suites import generalization_suite, nonverbal_suite
from ..env.entities import MODES
from ..env.export import write_trajectories
from ..policy.params import load_checkpoint
from ..training.config import TrainConfig
from ..training.trainer import train, evaluate, METRICS_FILE, USAGE_FILE, CHECKPOINT_FILE
from ..utils.exceptions import ConfigError, NonFiniteError
from ..utils.general_tools import to_builtin
from .config import load_run_config, resolve_seed, echo_config, check_arity

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_NUMERIC_ERROR = 3

EVAL_REPORT_FILE = "eval-report.json"
TRAJECTORIES_FILE = "trajectories.jsonl"
ANALYSIS_REPORT_FILE = "analysis-report.json"
FRAMES_DIR = "frames"


def _jsonable(obj):
    """`to_builtin` with NaN mapped to null."""
    obj = to_builtin(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(path, document):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_jsonable(document), f, indent=2, allow_nan=False)
        f.write("\n")
    return path


def _require_file(path, what):
    if path is None or not os.path.isfile(path):
        raise ConfigError(f"{what} not found: {path}")
    return path


def _resolve(args):
    """Run configuration with the command-line overrides applied."""
    config = load_run_config(args.config)
    seed = resolve_seed(args.seed, config.train.seed)
    train_config = config.train.replace(seed=seed)
    if getattr(args, "mode", None) is not None:
        train_config = train_config.replace(spec=train_config.spec.replace(mode=args.mode))
    config.train = train_config
    if args.out is not None:
        config.output_dir = args.out
    check_arity(config.spec)
    return config


def cmd_train(args):
    config = _resolve(args)
    out_dir = config.output_dir
    echo_config(config, out_dir)
    resume = None
    if args.resume:
        resume = _require_file(args.checkpoint or os.path.join(out_dir, CHECKPOINT_FILE), "checkpoint")
    logger.info("training %s for %d iterations into %s", config.spec, config.train.iterations, out_dir)
    train(config.train, out_dir=out_dir, resume=resume, verbose=args.verbose)
    return EXIT_OK


def _checkpoint_config(args, config, checkpoint):
    """The checkpoint's own training configuration unless a config file was given."""
    saved = checkpoint["extra"].get("config")
    if args.config is not None or saved is None:
        return config.train
    train_config = TrainConfig.from_dict(saved)
    train_config = train_config.replace(seed=resolve_seed(args.seed, train_config.seed))
    if args.mode is not None:
        train_config = train_config.replace(spec=train_config.spec.replace(mode=args.mode))
    return train_config


def cmd_eval(args):
    config = _resolve(args)
    out_dir = config.output_dir
    path = _require_file(args.checkpoint or os.path.join(out_dir, CHECKPOINT_FILE), "checkpoint")
    checkpoint = load_checkpoint(path)
    train_config = _checkpoint_config(args, config, checkpoint)
    spec = train_config.spec
    check_arity(spec)
    episodes = config.eval.episodes if args.episodes is None else args.episodes
    if episodes < 0:
        raise ConfigError(f"--episodes must be non-negative, got {episodes}")

    result = evaluate(checkpoint["params"], spec, episodes, seed=train_config.seed, config=train_config,
                      epsilon=config.eval.epsilon, batch_size=config.eval.batch_size)
    baseline = centroid_baseline(spec, episodes, seed=train_config.seed,
                                 action_penalty=train_config.action_penalty,
                                 batch_size=config.eval.batch_size or train_config.batch_size)
    os.makedirs(out_dir, exist_ok=True)
    write_json(os.path.join(out_dir, EVAL_REPORT_FILE), {
        "checkpoint": os.path.basename(path),
        "spec": spec.to_dict(),
        "seed": train_config.seed,
        "report": result.report.to_dict(),
        "symbol_histogram": result.usage.tolist(),
        "centroid_baseline_r_phys": baseline,
    })
    write_trajectories(os.path.join(out_dir, TRAJECTORIES_FILE), result.trajectories)
    logger.info("evaluated %d episodes: %s", episodes, result.report.to_dict())
    return EXIT_OK


def _optional(path):
    return path if path is not None and os.path.isfile(path) else None


def _parse_policies(items):
    policies = {}
    for item in items or ():
        mode, sep, path = item.partition("=")
        if not sep or mode not in MODES:
            raise ConfigError(f"--policy expects MODE=CHECKPOINT with MODE in {MODES}, got {item!r}")
        policies[mode] = load_checkpoint(_require_file(path, "checkpoint"))["params"]
    return policies


def _save_figure(plot_name, data, out_dir, report):
    file_name = figure_file_name(plot_name)
    save_svg(lookup_name(plot_name)(data), os.path.join(out_dir, file_name))
    report["figures"].append(file_name)


def cmd_analyze(args):
    config = _resolve(args)
    out_dir = config.output_dir
    trajectories = _require_file(args.trajectories or os.path.join(out_dir, TRAJECTORIES_FILE),
                                 "trajectories")
    metrics_path = args.metrics if args.metrics is not None else _optional(os.path.join(out_dir, METRICS_FILE))
    usage_path = args.usage if args.usage is not None else _optional(os.path.join(out_dir, USAGE_FILE))
    if metrics_path is not None:
        _require_file(metrics_path, "metrics log")
    if usage_path is not None:
        _require_file(usage_path, "usage log")

    records = load_records(trajectories)
    os.makedirs(out_dir, exist_ok=True)
    consistency = symbol_goal_consistency(records)
    histogram = symbol_stream_histogram(records)
    report = {
        "n_episodes": len(records),
        "empty": not records,
        "summary": episode_summary(records, config.eval.epsilon).to_dict(),
        "consistency": {
            "table": consistency.table.to_dict(orient="records"),
            "consistency_rate": consistency.consistency_rate.to_dict(),
            "distinct": consistency.distinct.to_dict(),
            "nmi": consistency.nmi.to_dict(),
            "chance": consistency.chance,
        },
        "centroid_detour": centroid_detour_statistic(records).to_dict(),
        "figures": [],
    }
    _save_figure(SYMBOL_STREAM_PLOT, histogram, out_dir, report)

    if usage_path is not None:
        active = active_vocab_count(load_usage(usage_path))
        report["active_vocab"] = {"final": int(active.iloc[-1]) if len(active) else None,
                                  "peak": int(active.max()) if len(active) else None}
        _save_figure(WORD_COUNTS_PLOT, {config.preset or "run": active}, out_dir, report)
    if metrics_path is not None:
        _save_figure(REWARD_CURVES_PLOT, load_metrics(metrics_path), out_dir, report)

    episodes = config.eval.episodes if args.episodes is None else args.episodes
    if args.checkpoint is not None:
        checkpoint = load_checkpoint(_require_file(args.checkpoint, "checkpoint"))
        train_config = _checkpoint_config(args, config, checkpoint)
        suite = generalization_suite(checkpoint["params"], train_config.spec, episodes=episodes,
                                     seed=train_config.seed, config=train_config)
        report["generalization"] = suite.to_dict(orient="index")
    policies = _parse_policies(args.policy)
    if policies:
        suite = nonverbal_suite(policies, config.spec, episodes=episodes, seed=config.train.seed,
                                config=config.train, epsilon=config.eval.epsilon)
        report["nonverbal"] = suite.to_dict(orient="index")

    write_json(os.path.join(out_dir, ANALYSIS_REPORT_FILE), report)
    return EXIT_OK


def cmd_render(args):
    config = _resolve(args)
    out_dir = config.output_dir
    trajectories = _require_file(args.trajectories or os.path.join(out_dir, TRAJECTORIES_FILE),
                                 "trajectories")
    records = load_records(trajectories)
    if not 0 <= args.episode < len(records):
        raise ConfigError(f"--episode {args.episode} out of range: the file holds {len(records)} episodes")
    paths = render_episode(records[args.episode], os.path.join(out_dir, FRAMES_DIR))
    logger.info("rendered %d frames", len(paths))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="emergelib",
                                     description="Grounded emergent communication in a particle world.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="JSON run configuration")
    common.add_argument("--out", type=str, default=None, help="Output directory (overrides the config)")
    common.add_argument("--seed", type=int, default=None,
                        help="Root seed; overrides $EMERGELIB_SEED, which overrides the config")
    common.add_argument("--verbose", action="store_true", help="Log progress")
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True

    p = subparsers.add_parser("train", parents=[common], help="Train a policy")
    p.add_argument("--mode", choices=MODES, default=None, help="Observability mode")
    p.add_argument("--resume", action="store_true", help="Continue from --checkpoint or OUT/checkpoint.json")
    p.add_argument("--checkpoint", type=str, default=None)
    p.set_defaults(handler=cmd_train)

    p = subparsers.add_parser("eval", parents=[common], help="Evaluate a checkpoint")
    p.add_argument("--checkpoint", type=str, default=None, help="Defaults to OUT/checkpoint.json")
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--mode", choices=MODES, default=None)
    p.set_defaults(handler=cmd_eval)

    p = subparsers.add_parser("analyze", parents=[common], help="Analyse trajectories and training logs")
    p.add_argument("--trajectories", type=str, default=None, help="Defaults to OUT/trajectories.jsonl")
    p.add_argument("--metrics", type=str, default=None)
    p.add_argument("--usage", type=str, default=None)
    p.add_argument("--checkpoint", type=str, default=None, help="Also run the generalization suite")
    p.add_argument("--policy", action="append", default=None, metavar="MODE=CHECKPOINT",
                   help="Policy for the non-verbal suite; repeat per mode")
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--mode", choices=MODES, default=None)
    p.set_defaults(handler=cmd_analyze)

    p = subparsers.add_parser("render", parents=[common], help="Render an episode as SVG frames")
    p.add_argument("--trajectories", type=str, default=None)
    p.add_argument("--episode", type=int, default=0, help="Position of the episode in the file")
    p.set_defaults(handler=cmd_render)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT_ERROR if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s: %(message)s")
    try:
        return args.handler(args)
    except (NonFiniteError, FloatingPointError) as e:
        logger.error("numeric failure: %s", e)
        print(f"emergelib: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC_ERROR
    except (ValueError, OSError, IndexError, KeyError) as e:
        print(f"emergelib: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
