"""
Block-diagonal Hessian-free optimization and the first-order baselines.
"""

from .adam import AdamConfig, adam_step
from .hessian_free import GGN, HESSIAN, HFConfig, StepReport, block_hf_step, make_block_operator
from .partition import (
    PARTITION_PRESETS,
    Block,
    BlockPartition,
    balanced,
    layerwise,
    partition_preset,
    single,
)
from .polyak import polyak_update
from .state import TrainerState

__all__ = [
    "AdamConfig",
    "Block",
    "BlockPartition",
    "GGN",
    "HESSIAN",
    "HFConfig",
    "PARTITION_PRESETS",
    "StepReport",
    "TrainerState",
    "adam_step",
    "balanced",
    "block_hf_step",
    "layerwise",
    "make_block_operator",
    "partition_preset",
    "polyak_update",
    "single",
]
