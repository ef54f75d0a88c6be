"""Deterministic fixed-timestep 2D rigid-body simulation.

World model: dynamic circles and static segments under gravity, a
per-second velocity retention drag, and impulse-based collision
resolution with restitution and Coulomb friction.  Contact coefficients
combine as the product of the two bodies' values.  All rollouts are
bit-reproducible for identical inputs, and a rollout simulated inside a
batch is bit-identical to the same rollout simulated alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple, Optional, Sequence, Union

import numpy as np

from . import _kernels
from ._kernels import (
    BAUMGARTE,
    GOAL_CONTACT_RUN,
    GOAL_NONE,
    GOAL_REGION_ENTRY,
    PENETRATION_SLOP,
    RESTITUTION_THRESHOLD,
    SOLVER_ITERATIONS,
)

DEFAULT_DT = 1.0 / 240.0
DEFAULT_GRAVITY = (0.0, -9.8)


class SimulationDivergedError(RuntimeError):
    """A body state became non-finite during integration."""

    def __init__(self, role: str, step: int):
        super().__init__(f"simulation diverged at step {step} (body {role!r})")
        self.role = role
        self.step = step


@dataclass(frozen=True)
class LatentFactors:
    """Estimated per-object physics parameters."""

    density: float
    friction: float
    restitution: float

    def __post_init__(self):
        if not self.density > 0:
            raise ValueError(f"density must be positive, got {self.density}")
        if self.friction < 0:
            raise ValueError(f"friction must be non-negative, got {self.friction}")
        if not 0.0 <= self.restitution <= 1.0:
            raise ValueError(f"restitution must be in [0, 1], got {self.restitution}")

    def as_array(self) -> np.ndarray:
        return np.array([self.density, self.friction, self.restitution])

    @staticmethod
    def from_array(a) -> "LatentFactors":
        return LatentFactors(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class EnvironmentSpec:
    """World constants: latents plus drag, gravity and the fixed timestep.

    ``damping`` is the per-second velocity retention factor: 1 means no
    drag, 0.9 means a moving body loses 10% of its velocity per second.
    """

    latents: LatentFactors
    damping: float = 1.0
    gravity: tuple[float, float] = DEFAULT_GRAVITY
    dt: float = DEFAULT_DT

    def __post_init__(self):
        if not 0.0 <= self.damping <= 1.0:
            raise ValueError(f"damping must be in [0, 1], got {self.damping}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def step_retention(self) -> float:
        """Per-step velocity multiplier implementing the per-second drag."""
        return self.damping ** self.dt

    def with_latents(self, latents: LatentFactors) -> "EnvironmentSpec":
        return EnvironmentSpec(latents, self.damping, self.gravity, self.dt)


@dataclass(frozen=True)
class Circle:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Segment:
    p1: tuple[float, float]
    p2: tuple[float, float]
    thickness: float = 0.2

    def __post_init__(self):
        if self.p1 == self.p2:
            raise ValueError("segment endpoints must be distinct")
        if not self.thickness > 0:
            raise ValueError("segment thickness must be positive")


@dataclass(frozen=True)
class BodyDef:
    """A body in a scene: shape, motion type, role tag, optional material.

    Bodies without a material override take (friction, restitution) from
    the environment's latent factors; dynamic circles always take their
    mass from the latent density.  Segments must be static.
    """

    shape: Union[Circle, Segment]
    role: str
    motion: str = "dynamic"
    material: Optional[tuple[float, float]] = None  # (friction, restitution)

    def __post_init__(self):
        if self.motion not in ("static", "dynamic"):
            raise ValueError(f"motion must be static or dynamic, got {self.motion!r}")
        if isinstance(self.shape, Segment) and self.motion == "dynamic":
            raise ValueError("dynamic segments are not supported")

    @property
    def is_ball(self) -> bool:
        return isinstance(self.shape, Circle) and self.role.startswith("ball")

    @property
    def is_floor(self) -> bool:
        return self.role == "floor"


@dataclass
class BodyState:
    position: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)
    angle: float = 0.0
    angular_velocity: float = 0.0

    def is_finite(self) -> bool:
        return all(map(math.isfinite, (*self.position, *self.velocity,
                                       self.angle, self.angular_velocity)))


class ContactEvent(NamedTuple):
    step: int
    body_a: str
    body_b: str
    impulse: float
    kind: str  # "new" | "persisting"


class ContactLog(Sequence):
    """Column-stored contact event log with list-of-events access."""

    def __init__(self, steps, body_a, body_b, impulses, new_flags, roles):
        self._steps = np.asarray(steps, dtype=np.int64)
        self._a = np.asarray(body_a, dtype=np.int64)
        self._b = np.asarray(body_b, dtype=np.int64)
        self._impulses = np.asarray(impulses, dtype=np.float64)
        self._new = np.asarray(new_flags, dtype=np.uint8)
        self._roles = tuple(roles)

    @classmethod
    def empty(cls, roles=()) -> "ContactLog":
        return cls([], [], [], [], [], roles)

    @classmethod
    def from_events(cls, events: Sequence[ContactEvent], roles) -> "ContactLog":
        roles = tuple(roles)
        index = {r: i for i, r in enumerate(roles)}
        return cls(
            [e.step for e in events],
            [index[e.body_a] for e in events],
            [index[e.body_b] for e in events],
            [e.impulse for e in events],
            [1 if e.kind == "new" else 0 for e in events],
            roles,
        )

    def __len__(self) -> int:
        return len(self._steps)

    def __getitem__(self, i) -> ContactEvent:
        if isinstance(i, slice):
            raise TypeError("slicing a ContactLog is not supported")
        return ContactEvent(
            int(self._steps[i]),
            self._roles[self._a[i]],
            self._roles[self._b[i]],
            float(self._impulses[i]),
            "new" if self._new[i] else "persisting",
        )

    def __iter__(self) -> Iterator[ContactEvent]:
        for i in range(len(self)):
            yield self[i]

    @property
    def roles(self):
        return self._roles

    def columns(self):
        return self._steps, self._a, self._b, self._impulses, self._new


@dataclass
class Trajectory:
    """Observed rollout: sampled frames, contact log and summary counters."""

    roles: tuple[str, ...]  # dynamic circle roles, frame state order
    frames: list[tuple[int, tuple[BodyState, ...]]]
    contacts: ContactLog
    ball_ball_collisions: int
    obstacle_impacts: int
    rolling_steps: dict[str, int]
    terminated: bool
    termination_step: Optional[int]
    _positions: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def frame_steps(self) -> list[int]:
        return [s for s, _ in self.frames]

    def positions(self) -> np.ndarray:
        """Frame positions as an (n_frames, n_bodies, 2) array."""
        if self._positions is None:
            self._positions = np.array(
                [[st.position for st in states] for _, states in self.frames]
            )
        return self._positions

    def state(self, role: str, frame: int) -> BodyState:
        return self.frames[frame][1][self.roles.index(role)]


# ---------------------------------------------------------------------------
# goal conditions


@dataclass(frozen=True)
class GoalCondition:
    """Rollout stop condition evaluated inside the simulation loop."""

    kind: int
    role_a: str = ""
    role_b: str = ""
    run_steps: int = 0
    box: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    @staticmethod
    def contact_run(role_a: str, role_b: str, run_steps: int) -> "GoalCondition":
        """Bodies a and b stay in contact for run_steps consecutive steps."""
        return GoalCondition(GOAL_CONTACT_RUN, role_a=role_a, role_b=role_b,
                             run_steps=int(run_steps))

    @staticmethod
    def region_entry(role: str, box: tuple[float, float, float, float]) -> "GoalCondition":
        """Body center enters the axis-aligned box (x0, x1, y0, y1)."""
        return GoalCondition(GOAL_REGION_ENTRY, role_a=role, box=tuple(box))


# ---------------------------------------------------------------------------
# batch containers


@dataclass
class BatchState:
    """Per-row overrides for a batched rollout.

    Any field left as None falls back to the engine's template values.
    Shapes: positions/velocities (B, nc, 2); radii (B, nc); segments
    (B, ns, 2, 2); latents (B, 3) as (density, friction, restitution).
    """

    size: int
    positions: Optional[np.ndarray] = None
    velocities: Optional[np.ndarray] = None
    angles: Optional[np.ndarray] = None
    angular_velocities: Optional[np.ndarray] = None
    radii: Optional[np.ndarray] = None
    segments: Optional[np.ndarray] = None
    latents: Optional[np.ndarray] = None


@dataclass
class BatchResult:
    """Outputs of a batched rollout; row i corresponds to input row i."""

    roles: tuple[str, ...]
    frame_positions: np.ndarray   # (B, F, nc, 2)
    frame_steps: np.ndarray       # (B, F)
    frame_counts: np.ndarray      # (B,)
    goal_steps: np.ndarray        # (B,), -1 when the goal never fired
    best_contact_runs: np.ndarray
    ball_ball_collisions: np.ndarray
    obstacle_impacts: np.ndarray
    rolling_steps: np.ndarray     # (B, nc)
    diverged_step: np.ndarray     # (B,), -1 when healthy
    diverged_body: np.ndarray     # (B,), circle index
    frame_velocities: Optional[np.ndarray] = None
    frame_spins: Optional[np.ndarray] = None  # (B, F, nc, 2) = (angle, omega)
    events: Optional[tuple] = None            # raw event columns

    @property
    def size(self) -> int:
        return self.frame_counts.shape[0]

    def row_positions(self, i: int) -> np.ndarray:
        return self.frame_positions[i, : self.frame_counts[i]]

    def row_steps(self, i: int) -> np.ndarray:
        return self.frame_steps[i, : self.frame_counts[i]]


# ---------------------------------------------------------------------------
# engine


class Engine:
    """Packs a scene into kernel arrays and runs rollouts over it.

    An instance is cheap, single-threaded and holds no mutable rollout
    state; callers that want parallelism run many engines/rollouts
    concurrently above this layer.
    """

    def __init__(self, bodies: Sequence[BodyDef], env: EnvironmentSpec):
        self.bodies = list(bodies)
        self.env = env
        self.circles = [b for b in self.bodies if isinstance(b.shape, Circle)]
        self.segments = [b for b in self.bodies if isinstance(b.shape, Segment)]
        self.roles = tuple(b.role for b in self.circles)
        self.dynamic_roles = tuple(b.role for b in self.circles if b.motion == "dynamic")
        seen = set()
        for b in self.bodies:
            if b.role in seen:
                raise ValueError(f"duplicate body role {b.role!r}")
            seen.add(b.role)

        nc, ns = len(self.circles), len(self.segments)
        self._dyn = np.array([b.motion == "dynamic" for b in self.circles], dtype=np.uint8)
        self._ball = np.array([b.is_ball for b in self.circles], dtype=np.uint8)
        self._floor = np.array([b.is_floor for b in self.segments], dtype=np.uint8)
        self._shalf = np.array([b.shape.thickness * 0.5 for b in self.segments])
        self._radius0 = np.array([b.shape.radius for b in self.circles])
        self._seg0 = np.array(
            [[b.shape.p1, b.shape.p2] for b in self.segments]
        ).reshape(ns, 2, 2) if ns else np.zeros((0, 2, 2))

        bb = [(i, j) for i in range(nc) for j in range(i + 1, nc)]
        self._bb_i = np.array([p[0] for p in bb], dtype=np.int64)
        self._bb_j = np.array([p[1] for p in bb], dtype=np.int64)
        cs = [(c, s) for c in range(nc) for s in range(ns)]
        self._cs_c = np.array([p[0] for p in cs], dtype=np.int64)
        self._cs_s = np.array([p[1] for p in cs], dtype=np.int64)

    # -- array assembly ---------------------------------------------------

    def _materials(self, latents: np.ndarray):
        """Per-row friction/restitution/mass arrays from (B, 3) latents."""
        B = latents.shape[0]
        nc, ns = len(self.circles), len(self.segments)
        fric_c = np.empty((B, nc))
        rest_c = np.empty((B, nc))
        for i, b in enumerate(self.circles):
            if b.material is not None:
                fric_c[:, i] = b.material[0]
                rest_c[:, i] = b.material[1]
            else:
                fric_c[:, i] = latents[:, 1]
                rest_c[:, i] = latents[:, 2]
        fric_s = np.empty((B, ns))
        rest_s = np.empty((B, ns))
        for s, b in enumerate(self.segments):
            if b.material is not None:
                fric_s[:, s] = b.material[0]
                rest_s[:, s] = b.material[1]
            else:
                fric_s[:, s] = latents[:, 1]
                rest_s[:, s] = latents[:, 2]
        return fric_c, rest_c, fric_s, rest_s

    def _mass_arrays(self, latents: np.ndarray, radii: np.ndarray):
        B = latents.shape[0]
        nc = len(self.circles)
        inv_m = np.zeros((B, nc))
        inv_i = np.zeros((B, nc))
        for i, b in enumerate(self.circles):
            if b.motion != "dynamic":
                continue
            mass = latents[:, 0] * np.pi * radii[:, i] ** 2
            inertia = 0.5 * mass * radii[:, i] ** 2
            inv_m[:, i] = 1.0 / mass
            inv_i[:, i] = 1.0 / inertia
        return inv_m, inv_i

    def _resolve_goal(self, goal: Optional[GoalCondition]):
        if goal is None:
            return GOAL_NONE, 0, 0, 0, 0.0, 0.0, 0.0, 0.0
        if goal.kind == GOAL_CONTACT_RUN:
            a = self.roles.index(goal.role_a)
            b = self.roles.index(goal.role_b)
            return GOAL_CONTACT_RUN, a, b, goal.run_steps, 0.0, 0.0, 0.0, 0.0
        a = self.roles.index(goal.role_a)
        x0, x1, y0, y1 = goal.box
        return GOAL_REGION_ENTRY, a, 0, 0, x0, x1, y0, y1

    # -- rollouts ----------------------------------------------------------

    def rollout_batch(
        self,
        batch: BatchState,
        max_steps: int,
        observe_every: int,
        goal: Optional[GoalCondition] = None,
        record_full: bool = False,
        record_contacts: bool = False,
    ) -> BatchResult:
        if max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if observe_every < 1:
            raise ValueError("observe_every must be >= 1")
        B = batch.size
        nc, ns = len(self.circles), len(self.segments)

        def _tile(template, shape):
            return np.broadcast_to(template, shape).copy()

        pos = (np.array(batch.positions, dtype=np.float64)
               if batch.positions is not None else np.zeros((B, nc, 2)))
        vel = (np.array(batch.velocities, dtype=np.float64)
               if batch.velocities is not None else np.zeros((B, nc, 2)))
        angs = (np.array(batch.angles, dtype=np.float64)
                if batch.angles is not None else np.zeros((B, nc)))
        oms = (np.array(batch.angular_velocities, dtype=np.float64)
               if batch.angular_velocities is not None else np.zeros((B, nc)))
        radii = (np.array(batch.radii, dtype=np.float64)
                 if batch.radii is not None else _tile(self._radius0, (B, nc)))
        segs = (np.array(batch.segments, dtype=np.float64)
                if batch.segments is not None else _tile(self._seg0, (B, ns, 2, 2)))
        latents = (np.array(batch.latents, dtype=np.float64)
                   if batch.latents is not None else
                   _tile(self.env.latents.as_array(), (B, 3)))

        fric_c, rest_c, fric_s, rest_s = self._materials(latents)
        inv_m, inv_i = self._mass_arrays(latents, radii)

        px, py = np.ascontiguousarray(pos[:, :, 0]), np.ascontiguousarray(pos[:, :, 1])
        vx, vy = np.ascontiguousarray(vel[:, :, 0]), np.ascontiguousarray(vel[:, :, 1])
        sx1 = np.ascontiguousarray(segs[:, :, 0, 0])
        sy1 = np.ascontiguousarray(segs[:, :, 0, 1])
        sx2 = np.ascontiguousarray(segs[:, :, 1, 0])
        sy2 = np.ascontiguousarray(segs[:, :, 1, 1])

        n_frames = max_steps // observe_every + 2
        frames_pos = np.zeros((B, n_frames, nc, 2))
        if record_full:
            frames_vel = np.zeros((B, n_frames, nc, 2))
            frames_ang = np.zeros((B, n_frames, nc, 2))
        else:
            frames_vel = np.zeros((1, 1, 1, 2))
            frames_ang = np.zeros((1, 1, 1, 2))
        frame_steps = np.zeros((B, n_frames), dtype=np.int64)
        frame_counts = np.zeros(B, dtype=np.int64)
        goal_steps = np.zeros(B, dtype=np.int64)
        best_runs = np.zeros(B, dtype=np.int64)
        bb_counts = np.zeros(B, dtype=np.int64)
        impact_counts = np.zeros(B, dtype=np.int64)
        rolling = np.zeros((B, nc), dtype=np.int64)
        div_step = np.zeros(B, dtype=np.int64)
        div_body = np.zeros(B, dtype=np.int64)
        n_pairs = len(self._bb_i) + len(self._cs_c)
        if record_contacts:
            cap = max_steps * max(n_pairs, 1)
            ev_step = np.zeros((B, cap), dtype=np.int64)
            ev_a = np.zeros((B, cap), dtype=np.int64)
            ev_b = np.zeros((B, cap), dtype=np.int64)
            ev_imp = np.zeros((B, cap))
            ev_new = np.zeros((B, cap), dtype=np.uint8)
            ev_counts = np.zeros(B, dtype=np.int64)
        else:
            ev_step = np.zeros((1, 1), dtype=np.int64)
            ev_a = np.zeros((1, 1), dtype=np.int64)
            ev_b = np.zeros((1, 1), dtype=np.int64)
            ev_imp = np.zeros((1, 1))
            ev_new = np.zeros((1, 1), dtype=np.uint8)
            ev_counts = np.zeros(1, dtype=np.int64)

        gk, ga, gb, grun, gx0, gx1, gy0, gy1 = self._resolve_goal(goal)
        _kernels.simulate_batch(
            px, py, vx, vy, angs, oms,
            radii, inv_m, inv_i, fric_c, rest_c,
            self._dyn, self._ball,
            sx1, sy1, sx2, sy2,
            self._shalf, fric_s, rest_s, self._floor,
            self._bb_i, self._bb_j, self._cs_c, self._cs_s,
            float(self.env.gravity[0]), float(self.env.gravity[1]),
            self.env.step_retention, self.env.dt,
            int(max_steps), int(observe_every),
            gk, ga, gb, grun, gx0, gx1, gy0, gy1,
            frames_pos, frames_vel, frames_ang, frame_steps, frame_counts,
            goal_steps, best_runs, bb_counts, impact_counts, rolling,
            div_step, div_body,
            ev_step, ev_a, ev_b, ev_imp, ev_new, ev_counts,
            record_full, record_contacts,
        )

        return BatchResult(
            roles=self.roles,
            frame_positions=frames_pos,
            frame_steps=frame_steps,
            frame_counts=frame_counts,
            goal_steps=goal_steps,
            best_contact_runs=best_runs,
            ball_ball_collisions=bb_counts,
            obstacle_impacts=impact_counts,
            rolling_steps=rolling,
            diverged_step=div_step,
            diverged_body=div_body,
            frame_velocities=frames_vel if record_full else None,
            frame_spins=frames_ang if record_full else None,
            events=(ev_step, ev_a, ev_b, ev_imp, ev_new, ev_counts)
            if record_contacts else None,
        )

    def _batch_from_states(self, states: Sequence[BodyState]) -> BatchState:
        nc = len(self.circles)
        if len(states) != nc:
            raise ValueError(f"expected {nc} circle states, got {len(states)}")
        for st, b in zip(states, self.circles):
            if b.motion == "dynamic" and not st.is_finite():
                raise SimulationDivergedError(b.role, 0)
        pos = np.array([st.position for st in states]).reshape(1, nc, 2)
        vel = np.array([st.velocity for st in states]).reshape(1, nc, 2)
        angs = np.array([st.angle for st in states]).reshape(1, nc)
        oms = np.array([st.angular_velocity for st in states]).reshape(1, nc)
        return BatchState(1, positions=pos, velocities=vel, angles=angs,
                          angular_velocities=oms)

    def rollout(
        self,
        states: Sequence[BodyState],
        max_steps: int,
        observe_every: int,
        stop: Optional[GoalCondition] = None,
    ) -> Trajectory:
        """Run one rollout, recording frames, contacts and counters.

        Frames are sampled at step 0, every observe_every steps, and at
        the final step; the loop exits immediately when the stop
        condition fires.
        """
        batch = self._batch_from_states(states)
        res = self.rollout_batch(batch, max_steps, observe_every, goal=stop,
                                 record_full=True, record_contacts=True)
        return self._trajectory_from_batch(res, 0)

    def _trajectory_from_batch(self, res: BatchResult, row: int) -> Trajectory:
        if res.diverged_step[row] >= 0:
            role = self.roles[int(res.diverged_body[row])]
            raise SimulationDivergedError(role, int(res.diverged_step[row]))
        n = int(res.frame_counts[row])
        frames = []
        for f in range(n):
            states = tuple(
                BodyState(
                    position=(res.frame_positions[row, f, c, 0],
                              res.frame_positions[row, f, c, 1]),
                    velocity=(res.frame_velocities[row, f, c, 0],
                              res.frame_velocities[row, f, c, 1]),
                    angle=res.frame_spins[row, f, c, 0],
                    angular_velocity=res.frame_spins[row, f, c, 1],
                )
                for c in range(len(self.circles)) if self._dyn[c]
            )
            frames.append((int(res.frame_steps[row, f]), states))
        all_roles = self.roles + tuple(b.role for b in self.segments)
        ev_step, ev_a, ev_b, ev_imp, ev_new, ev_counts = res.events
        ne = int(ev_counts[row])
        log = ContactLog(ev_step[row, :ne].copy(), ev_a[row, :ne].copy(),
                         ev_b[row, :ne].copy(), ev_imp[row, :ne].copy(),
                         ev_new[row, :ne].copy(), all_roles)
        rolling = {
            self.roles[c]: int(res.rolling_steps[row, c])
            for c in range(len(self.circles)) if self._ball[c]
        }
        goal_step = int(res.goal_steps[row])
        return Trajectory(
            roles=self.dynamic_roles,
            frames=frames,
            contacts=log,
            ball_ball_collisions=int(res.ball_ball_collisions[row]),
            obstacle_impacts=int(res.obstacle_impacts[row]),
            rolling_steps=rolling,
            terminated=goal_step >= 0,
            termination_step=goal_step if goal_step >= 0 else None,
        )

    def step(self, states: Sequence[BodyState]) -> tuple[list[BodyState], list[ContactEvent]]:
        """Advance the scene one timestep and report resolved contacts."""
        batch = self._batch_from_states(states)
        res = self.rollout_batch(batch, max_steps=1, observe_every=1,
                                 record_full=True, record_contacts=True)
        if res.diverged_step[0] >= 0:
            role = self.roles[int(res.diverged_body[0])]
            raise SimulationDivergedError(role, 1)
        out = []
        for c in range(len(self.circles)):
            if self._dyn[c]:
                f = int(res.frame_counts[0]) - 1
                out.append(BodyState(
                    position=(res.frame_positions[0, f, c, 0],
                              res.frame_positions[0, f, c, 1]),
                    velocity=(res.frame_velocities[0, f, c, 0],
                              res.frame_velocities[0, f, c, 1]),
                    angle=res.frame_spins[0, f, c, 0],
                    angular_velocity=res.frame_spins[0, f, c, 1]))
            else:
                out.append(states[c])
        all_roles = self.roles + tuple(b.role for b in self.segments)
        ev_step, ev_a, ev_b, ev_imp, ev_new, ev_counts = res.events
        events = [
            ContactEvent(int(ev_step[0, i]), all_roles[ev_a[0, i]],
                         all_roles[ev_b[0, i]], float(ev_imp[0, i]),
                         "new" if ev_new[0, i] else "persisting")
            for i in range(int(ev_counts[0]))
        ]
        return out, events


def step(states: Sequence[BodyState], env: EnvironmentSpec,
         bodies: Sequence[BodyDef]) -> tuple[list[BodyState], list[ContactEvent]]:
    """One semi-implicit Euler step: gravity, drag, impulses, integration."""
    return Engine(bodies, env).step(states)


def rollout(bodies: Sequence[BodyDef], states: Sequence[BodyState],
            env: EnvironmentSpec, max_steps: int, observe_every: int,
            stop: Optional[GoalCondition] = None) -> Trajectory:
    return Engine(bodies, env).rollout(states, max_steps, observe_every, stop)


def recount_from_log(traj: Trajectory, ball_roles: Sequence[str],
                     floor_roles: Sequence[str]) -> tuple[int, dict[str, int]]:
    """Recompute the collision and rolling counters from the contact log.

    Independent of the in-rollout counters; used to check consistency.
    Rolling normals are not stored in the log, so this assumes floor
    contacts have near-vertical normals (true for horizontal floors).
    """
    balls = set(ball_roles)
    floors = set(floor_roles)
    collisions = 0
    rolling = {r: 0 for r in balls}
    for ev in traj.contacts:
        if ev.kind == "new" and ev.body_a in balls and ev.body_b in balls:
            collisions += 1
        if ev.kind == "persisting" and ev.body_a in balls and ev.body_b in floors:
            rolling[ev.body_a] += 1
    return collisions, rolling
