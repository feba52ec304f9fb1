"""footsim: a deterministic physics-based football-control sandbox.

Skill controllers emit unit latents for a gait decoder over a simplified
character surrogate; a four-state FSM switches skills from commands and world
predicates; evaluation metrics, scenario scripts, a batch CLI, and a realtime
session server sit on top.
"""

from .core import BallState, CharacterFrame, CharacterState, PlanarVec, SpatialVec
from .fsm import CommandSet, FsmState, PlayerFsm
from .motion import GaitParams, KickSwing, LatentCodec, build_ref_buffer
from .rewards import RewardConfig
from .sim import SimConfig, World, control_step, step
from .skills import AnalyticPolicy, ParametricPolicy, TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "BallState",
    "CharacterFrame",
    "CharacterState",
    "PlanarVec",
    "SpatialVec",
    "CommandSet",
    "FsmState",
    "PlayerFsm",
    "GaitParams",
    "KickSwing",
    "LatentCodec",
    "build_ref_buffer",
    "RewardConfig",
    "SimConfig",
    "World",
    "control_step",
    "step",
    "AnalyticPolicy",
    "ParametricPolicy",
    "TrainConfig",
    "train",
    "__version__",
]
