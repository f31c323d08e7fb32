from .metrics import (goal_outcomes, goal_completion_rate, active_vocab_count, usage_histogram,
                      episode_summary, COMPLETION_EPSILON)
from .records import EpisodeRecord, records_from_trajectories, load_records, load_metrics, load_usage
from .baselines import (centroid_baseline, random_walk_baseline, run_scripted, CentroidController,
                        RandomWalkController)
from .language import (symbol_goal_consistency, symbol_stream_histogram, centroid_detour_statistic,
                       chance_consistency)
from .suites import (generalization_suite, nonverbal_suite, run_scenario, SCENARIOS,
                     build_distractor_world, build_duplicate_color_world, build_conflicting_goal_world,
                     build_shared_color_world, pointing_signature, guiding_signature, pushing_signature)
from .plots import (plot_word_counts, plot_symbol_stream_histogram, plot_reward_curves,
                    plot_trajectory_frame, render_episode, save_svg, lookup_name, figure_file_name)
