"""groundlab: sim2real grounding laboratory on a deterministic 2D physics engine."""

from .physics import (
    BodyDef,
    BodyState,
    Circle,
    ContactEvent,
    EnvironmentSpec,
    Engine,
    GoalCondition,
    LatentFactors,
    Segment,
    SimulationDivergedError,
    Trajectory,
    rollout,
    step,
)

__all__ = [
    "BodyDef",
    "BodyState",
    "Circle",
    "ContactEvent",
    "EnvironmentSpec",
    "Engine",
    "GoalCondition",
    "LatentFactors",
    "Segment",
    "SimulationDivergedError",
    "Trajectory",
    "rollout",
    "step",
]

__version__ = "0.1.0"
