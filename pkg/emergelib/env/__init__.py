from .entities import (
    EpisodeSpec, EntityState, Goal, WorldState, WorldBatch,
    GOTO, LOOKAT, DONOTHING, ACTIONS, MODES, COMM, GAZE_VISIBLE, POSITION_VISIBLE, BLIND,
    SILENCE, GOAL_WIDTH, PRESETS, DEFAULT_PALETTE, color_name,
)
from .world import sample_world, assign_goals, sample_episode, stack_worlds, rotation
from .dynamics import PhysicalState, interaction_forces, pair_forces, step_physics, DT, DAMPING
from .observation import Observation, observe, goal_vectors, goal_prediction_targets, others_index, ENTITY_WIDTH
from .rewards import physical_reward, utterance_cost, goal_errors
from .export import trajectory_records, write_trajectories, read_trajectories, TRAJECTORY_FIELDS
