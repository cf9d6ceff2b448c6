"""Quasi-static insertion world.

The world is expressed in the hole frame: the shaft axis is +z, the mouth
of the shaft is at z = 0 and material extends downward.  A single point,
the connector tip, stands in for the held body during contact resolution;
the full body pose is reconstructed from the tip and the accumulated spin
about the connector axis.

Surface model, as a height field over radial distance r from the axis:

    r <= clearance                     open shaft (floor at -depth)
    clearance < r <= clearance+chamfer funnel wall, z = r - clearance - chamfer
    r > clearance+chamfer              flat material, z = 0

Screws rest on top of the bore (z = 0) until their threads engage; they
then descend only as far as the accumulated turns allow.  Mortise-tenon
pegs and dowels drop freely once inside the shaft.  All arithmetic is
plain-float and branch-deterministic; identical command streams produce
bit-identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ..geometry import RigidTransform, rotation_about_axis
from ..graph import ConnectorType

_EZ = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class HoleSpec:
    """Geometry of the receiving feature.

    ``axis_pose`` places the hole frame in world coordinates (identity for
    worlds that are already expressed in the hole frame).
    """

    radius: float = 0.004
    depth: float = 0.008
    clearance: float = 5e-4
    chamfer: float = 2e-3
    axis_pose: RigidTransform = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.axis_pose is None:
            object.__setattr__(self, "axis_pose", RigidTransform.identity())
        if self.radius <= 0 or self.depth <= 0:
            raise ValueError("hole radius and depth must be positive")
        if self.clearance <= 0 or self.clearance >= self.radius:
            raise ValueError("clearance must lie strictly between 0 and radius")
        if self.chamfer < 0:
            raise ValueError("chamfer cannot be negative")

    def replace(self, **kw) -> "HoleSpec":
        data = {
            "radius": self.radius,
            "depth": self.depth,
            "clearance": self.clearance,
            "chamfer": self.chamfer,
            "axis_pose": self.axis_pose,
        }
        data.update(kw)
        return HoleSpec(**data)


@dataclass(frozen=True)
class SimParams:
    translation_cap: float = 1e-3   # metres per step
    rotation_cap: float = 0.1       # radians per step
    tilt_max: float = 0.05          # radians; beyond this the tip cannot engage
    final_torque_turns: float = 0.5
    default_screw_lead: float = 1.25e-3


class Phase(str, Enum):
    FREE = "free"
    AXIS_CONSTRAINED = "axis_constrained"
    TIGHTENING = "tightening"
    FIXED = "fixed"


_PHASE_RANK = {
    Phase.FREE: 0,
    Phase.AXIS_CONSTRAINED: 1,
    Phase.TIGHTENING: 2,
    Phase.FIXED: 3,
}


def phase_rank(phase: Phase) -> int:
    return _PHASE_RANK[phase]


@dataclass(frozen=True)
class JointState:
    phase: Phase
    inserted_depth: float
    turns: float

    def to_dict(self) -> dict:
        return {
            "phase": self.phase.value,
            "inserted_depth": self.inserted_depth,
            "turns": self.turns,
        }


@dataclass(frozen=True)
class ContactReading:
    """Reaction force direction sensed at the tip, in the hole frame.

    Zero when the tip is strictly off every surface.  The axial component
    is +1 whenever the tip rests on material; the lateral components point
    toward the axis while the tip is on the funnel or on the rim region
    where the peg body overlaps the mouth.
    """

    force: tuple

    @property
    def in_contact(self) -> bool:
        fx, fy, fz = self.force
        return fx != 0.0 or fy != 0.0 or fz != 0.0

    @property
    def lateral(self) -> tuple:
        return (self.force[0], self.force[1])

    @property
    def lateral_magnitude(self) -> float:
        return math.hypot(self.force[0], self.force[1])

    @property
    def axial(self) -> float:
        return self.force[2]

    def to_list(self) -> list:
        return [self.force[0], self.force[1], self.force[2]]


_NO_CONTACT = ContactReading(force=(0.0, 0.0, 0.0))


@dataclass(frozen=True)
class Command:
    """One actuation step.

    kind is one of "translate", "rotate", "press".  Translations carry a
    3-vector in the hole frame; rotations carry a signed angle about the
    connector axis; press carries a requested descent distance.
    """

    kind: str
    vector: tuple = (0.0, 0.0, 0.0)
    angle: float = 0.0
    amount: float = 0.0

    @staticmethod
    def translate(dx: float, dy: float, dz: float = 0.0) -> "Command":
        return Command(kind="translate", vector=(float(dx), float(dy), float(dz)))

    @staticmethod
    def rotate(angle: float) -> "Command":
        return Command(kind="rotate", angle=float(angle))

    @staticmethod
    def press(amount: float) -> "Command":
        return Command(kind="press", amount=float(amount))

    def to_dict(self) -> dict:
        if self.kind == "translate":
            return {"kind": "translate", "vector": list(self.vector)}
        if self.kind == "rotate":
            return {"kind": "rotate", "angle": self.angle}
        return {"kind": "press", "amount": self.amount}


class World:
    """Mutable insertion state for a single connector operation.

    Instances are single-owner: ``step_sim`` mutates in place and returns
    the same object.  Use ``clone()`` to branch.
    """

    __slots__ = (
        "hole",
        "connector",
        "lead",
        "params",
        "x",
        "y",
        "z",
        "yaw",
        "tilt",
        "phase",
        "turns",
        "base_rotation",
        "tip_offset",
        "seated_pose",
        "steps",
        "log",
        "hidden_offset",
    )

    def __init__(
        self,
        hole: HoleSpec,
        connector: ConnectorType,
        params: SimParams,
        tip: tuple,
        base_rotation: np.ndarray,
        tip_offset: np.ndarray,
        seated_pose: RigidTransform,
        lead: Optional[float] = None,
        tilt: float = 0.0,
        enable_log: bool = False,
        hidden_offset: tuple = (0.0, 0.0),
    ) -> None:
        self.hole = hole
        self.connector = connector
        self.params = params
        self.lead = float(lead if lead is not None else params.default_screw_lead)
        if self.lead <= 0:
            raise ValueError("screw lead must be positive")
        self.x, self.y, self.z = (float(tip[0]), float(tip[1]), float(tip[2]))
        self.yaw = 0.0
        self.tilt = float(tilt)
        self.phase = Phase.FREE
        self.turns = 0.0
        self.base_rotation = np.array(base_rotation, dtype=float)
        self.tip_offset = np.array(tip_offset, dtype=float)
        self.seated_pose = seated_pose
        self.steps = 0
        self.log = [] if enable_log else None
        self.hidden_offset = hidden_offset

    # -- read-only views ------------------------------------------------

    @property
    def engaged(self) -> bool:
        return self.phase in (Phase.AXIS_CONSTRAINED, Phase.TIGHTENING)

    @property
    def inserted_depth(self) -> float:
        # Depth into the shaft proper. A tip below the mouth plane but out on
        # the funnel (r > clearance) has not entered the shaft and counts 0.
        if math.hypot(self.x, self.y) > self.hole.clearance:
            return 0.0
        d = -self.z
        if d < 0.0:
            return 0.0
        if d > self.hole.depth:
            return self.hole.depth
        return d

    def joint_state(self) -> JointState:
        return JointState(phase=self.phase, inserted_depth=self.inserted_depth, turns=self.turns)

    def body_pose(self) -> RigidTransform:
        spin = rotation_about_axis(_EZ, self.yaw)
        rot = self.base_rotation @ spin
        tip = np.array([self.x, self.y, self.z])
        return RigidTransform(rotation=rot, translation=tip - rot @ self.tip_offset)

    def state_tuple(self) -> tuple:
        return (self.x, self.y, self.z, self.yaw, self.tilt, self.phase.value, self.turns, self.steps)

    def clone(self) -> "World":
        w = World(
            hole=self.hole,
            connector=self.connector,
            params=self.params,
            tip=(self.x, self.y, self.z),
            base_rotation=self.base_rotation,
            tip_offset=self.tip_offset,
            seated_pose=self.seated_pose,
            lead=self.lead,
            tilt=self.tilt,
            enable_log=self.log is not None,
            hidden_offset=self.hidden_offset,
        )
        w.yaw = self.yaw
        w.phase = self.phase
        w.turns = self.turns
        w.steps = self.steps
        if self.log is not None:
            w.log = list(self.log)
        return w


def _free_floor(world: World, r: float) -> float:
    h = world.hole
    if r <= h.clearance:
        # Screws rest on top of the bore until the threads bite; everything
        # else falls straight through to the bottom.
        if world.connector is ConnectorType.SCREW:
            return 0.0
        return -h.depth
    rim = h.clearance + h.chamfer
    if r <= rim:
        return r - rim
    return 0.0


def _engaged_floor(world: World) -> float:
    if world.connector is ConnectorType.SCREW:
        thread_floor = -world.lead * world.turns
        bottom = -world.hole.depth
        return thread_floor if thread_floor > bottom else bottom
    return -world.hole.depth


def _fix_and_snap(world: World) -> None:
    # Joint creation: the mating surfaces pull the part into its seat.
    world.phase = Phase.FIXED
    world.x = 0.0
    world.y = 0.0
    world.z = -world.hole.depth
    world.yaw = 0.0
    world.tilt = 0.0


def _maybe_fix(world: World) -> None:
    if world.phase is Phase.FIXED or not world.engaged:
        return
    if world.connector is ConnectorType.SCREW:
        needed = world.hole.depth / world.lead + world.params.final_torque_turns
        if world.inserted_depth >= world.hole.depth and world.turns >= needed:
            _fix_and_snap(world)
    else:
        if -world.z >= world.hole.depth:
            _fix_and_snap(world)


def _reading(world: World) -> ContactReading:
    if world.phase is Phase.FIXED:
        return ContactReading(force=(0.0, 0.0, 1.0))
    r = math.hypot(world.x, world.y)
    floor = _engaged_floor(world) if world.engaged else _free_floor(world, r)
    if world.z > floor + 1e-15:
        return _NO_CONTACT
    fx = fy = 0.0
    if world.phase is Phase.FREE and r > world.hole.clearance:
        h = world.hole
        peg_radius = h.radius - h.clearance
        rim_reach = h.clearance + h.chamfer + 2.0 * peg_radius
        if r <= rim_reach:
            # Unit lateral reaction toward the axis wherever the peg rim
            # overlaps the hole opening; one unit = full chamfer overlap.
            fx = -world.x / r
            fy = -world.y / r
    return ContactReading(force=(fx, fy, 1.0))


def _apply_translation(world: World, vx: float, vy: float, vz: float) -> None:
    cap = world.params.translation_cap
    norm = math.sqrt(vx * vx + vy * vy + vz * vz)
    if norm > cap and norm > 0.0:
        scale = cap / norm
        vx *= scale
        vy *= scale
        vz *= scale

    blocked_down = False
    if vx != 0.0 or vy != 0.0:
        nx = world.x + vx
        ny = world.y + vy
        if world.engaged:
            rn = math.hypot(nx, ny)
            if rn > world.hole.clearance:
                s = world.hole.clearance / rn
                nx *= s
                ny *= s
        world.x = nx
        world.y = ny
        if not world.engaged:
            # Sliding along a surface rides up over rising walls; it never
            # wedges underneath them.
            floor = _free_floor(world, math.hypot(nx, ny))
            if world.z < floor:
                world.z = floor

    if vz != 0.0:
        if vz > 0.0:
            if not (world.engaged and world.connector is ConnectorType.SCREW):
                world.z += vz
            # engaged screws cannot back out axially; the threads hold
        else:
            r = math.hypot(world.x, world.y)
            floor = _engaged_floor(world) if world.engaged else _free_floor(world, r)
            nz = world.z + vz
            if nz < floor:
                nz = floor
                blocked_down = True
            world.z = nz

    if world.phase is Phase.FREE and world.tilt <= world.params.tilt_max:
        r = math.hypot(world.x, world.y)
        if r <= world.hole.clearance:
            if world.z < 0.0:
                world.phase = Phase.AXIS_CONSTRAINED
            elif blocked_down and world.z == 0.0 and world.connector is ConnectorType.SCREW:
                # A screw pushed against the top of the bore: threads bite.
                world.phase = Phase.AXIS_CONSTRAINED
    _maybe_fix(world)


def _apply_rotation(world: World, angle: float) -> None:
    cap = world.params.rotation_cap
    if angle > cap:
        angle = cap
    elif angle < -cap:
        angle = -cap
    if world.phase is Phase.FIXED:
        return
    world.yaw += angle
    if world.connector is ConnectorType.SCREW and world.engaged:
        if angle > 0.0:
            world.turns += angle / (2.0 * math.pi)
            if world.phase is Phase.AXIS_CONSTRAINED and world.turns > 0.0:
                world.phase = Phase.TIGHTENING
        # Backward rotation spins freely without unwinding the joint.
    _maybe_fix(world)


def step_sim(world: World, command: Command) -> tuple:
    """Advance the world by one command; returns (world, ContactReading)."""
    if command.kind == "translate":
        if world.phase is not Phase.FIXED:
            vx, vy, vz = command.vector
            _apply_translation(world, float(vx), float(vy), float(vz))
    elif command.kind == "press":
        if world.phase is not Phase.FIXED:
            amount = abs(float(command.amount))
            _apply_translation(world, 0.0, 0.0, -amount)
    elif command.kind == "rotate":
        _apply_rotation(world, float(command.angle))
    else:
        raise ValueError(f"unknown command kind {command.kind!r}")

    world.steps += 1
    reading = _reading(world)
    if world.log is not None:
        world.log.append(
            {
                "step": world.steps,
                "command": command.to_dict(),
                "tip": [world.x, world.y, world.z],
                "yaw": world.yaw,
                "tilt": world.tilt,
                "phase": world.phase.value,
                "turns": world.turns,
                "force": reading.to_list(),
            }
        )
    return world, reading
