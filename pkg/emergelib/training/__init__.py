from .config import TrainConfig
from .rewards import (UtteranceCounts, goal_prediction_reward, vocab_reward_dp,
                      dirichlet_log_probs, count_active_symbols)
from .optimizer import OptimizerState, adam_step, clip_by_global_norm, global_norm
from .rollout import rollout_batch, simulate, sample_batch, PolicyController, Control, Trajectory
from .trainer import BPTTTrainer, train, evaluate, train_test_comparison, METRICS_FIELDS
