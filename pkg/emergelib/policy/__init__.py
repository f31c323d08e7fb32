from .params import (
    PolicyParams, parameter_shapes, save_checkpoint, load_checkpoint,
    MEMORY_WIDTH, DEFAULT_HIDDEN, DEFAULT_FEATURES, FULL_SCALE_HIDDEN,
    PHYS_ENCODER, COMM_ENCODER, GOAL_HEAD, OUTPUT_MODULE, PHYS_DEFAULT, COMM_DEFAULT,
)
from .modules import fc_module, pool_softmax, update_memory
from .gumbel import gumbel_softmax_sample, gumbel_noise
from .policy import policy_forward, PolicyConfig, MemoryBank, ActionSample
