"""Trial construction: from a planned operation to an insertion world.

A trial starts from the solved assembly: the fixed side's feature defines
the hole frame, the held body is lifted 20 mm along the axis and given a
hidden lateral offset drawn uniformly per axis.  Strategies never see the
offset; they only see contact readings.
"""

from __future__ import annotations

import json
import math
from typing import Mapping, Optional

import numpy as np

from ..errors import SchemaError, UnsolvedPose
from ..geometry import RigidTransform, geodesic_distance, minimal_rotation_between, rotation_about_axis
from ..graph import AssemblyGraph, ConnectionOperation, ConnectorType
from ..pose import AssemblySolution
from .world import HoleSpec, Phase, SimParams, World

_EZ = np.array([0.0, 0.0, 1.0])

_DEFAULT_HOLES = {
    ConnectorType.MORTISE_TENON: HoleSpec(radius=0.004, depth=0.008),
    ConnectorType.DOWEL: HoleSpec(radius=0.003, depth=0.008),
    ConnectorType.SCREW: HoleSpec(radius=0.0025, depth=0.005),
}

LIFT_HEIGHT = 0.02


def default_hole(connector: ConnectorType) -> HoleSpec:
    return _DEFAULT_HOLES[connector]


def init_trial(
    graph: AssemblyGraph,
    op: ConnectionOperation,
    solution: AssemblySolution,
    seed,
    *,
    perturbation: float = 3e-3,
    orientation_perturbation: float = 0.0,
    hole: Optional[HoleSpec] = None,
    params: SimParams = SimParams(),
    enable_log: bool = False,
) -> World:
    """Build the insertion world for one operation of a solved assembly."""
    fixed_parts = graph.leaf_parts(op.fixed_node)
    inst = op.instance
    if inst.end_a[0] in fixed_parts:
        end_fixed, end_held = inst.end_a, inst.end_b
    elif inst.end_b[0] in fixed_parts:
        end_fixed, end_held = inst.end_b, inst.end_a
    else:
        raise UnsolvedPose(f"operation {op.op_id}: neither endpoint lies on the fixed side")

    try:
        pose_fixed = solution.part_poses[end_fixed[0]]
        pose_held = solution.part_poses[end_held[0]]
    except KeyError as exc:
        raise UnsolvedPose(f"no solved pose for part {exc.args[0]!r}") from None

    feat_fixed = graph.feature(*end_fixed)
    feat_held = graph.feature(*end_held)

    mouth = pose_fixed.apply(np.asarray(feat_fixed.position))
    axis = pose_fixed.apply_direction(np.asarray(feat_fixed.normal))

    r_wh = minimal_rotation_between(axis, _EZ)
    world_to_hole = RigidTransform(rotation=r_wh, translation=-(r_wh @ mouth))
    seated = world_to_hole.compose(pose_held)

    if hole is None:
        hole = default_hole(op.connector_type)
    lead = inst.screw_lead if inst.screw_lead is not None else params.default_screw_lead

    tip_offset = np.asarray(feat_held.position) + hole.depth * np.asarray(feat_held.normal)
    seated_tip = seated.apply(tip_offset)
    expected = np.array([0.0, 0.0, -hole.depth])
    if not np.allclose(seated_tip, expected, atol=1e-6):
        raise UnsolvedPose(
            f"operation {op.op_id}: solved features do not mate "
            f"(seated tip at {seated_tip.tolist()})"
        )

    rng = np.random.default_rng(seed)
    dx, dy = rng.uniform(-perturbation, perturbation, size=2)
    tilt = 0.0
    base_rotation = seated.rotation
    if orientation_perturbation > 0.0:
        tilt = float(rng.uniform(0.0, orientation_perturbation))
        heading = float(rng.uniform(0.0, 2.0 * math.pi))
        lateral_axis = np.array([math.cos(heading), math.sin(heading), 0.0])
        base_rotation = rotation_about_axis(lateral_axis, tilt) @ seated.rotation

    tip_start = (
        float(seated_tip[0]) + float(dx),
        float(seated_tip[1]) + float(dy),
        float(seated_tip[2]) + LIFT_HEIGHT,
    )
    return World(
        hole=hole,
        connector=op.connector_type,
        params=params,
        tip=tip_start,
        base_rotation=base_rotation,
        tip_offset=tip_offset,
        seated_pose=seated,
        lead=lead,
        tilt=tilt,
        enable_log=enable_log,
        hidden_offset=(float(dx), float(dy)),
    )


def check_success(
    world: World,
    truth: Optional[RigidTransform] = None,
    *,
    eps_rotation: float = 0.05,
    eps_translation: float = 2e-4,
) -> bool:
    """A trial succeeds when the joint is fixed and the pose matches truth."""
    if world.phase is not Phase.FIXED:
        return False
    if truth is None:
        truth = world.seated_pose
    pose = world.body_pose()
    rot_err = geodesic_distance(pose.rotation, truth.rotation)
    trans_err = float(np.linalg.norm(pose.translation - truth.translation))
    return rot_err < eps_rotation and trans_err < eps_translation


def load_hole_overrides(text: str) -> tuple:
    """Parse a scenario file: hole-spec overrides by operation id.

    Returns (defaults, per_op) where defaults is a dict of HoleSpec field
    overrides applied to every operation and per_op maps op ids to dicts.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"scenario file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaError("scenario file must hold a JSON object")
    version = data.get("format_version", 1)
    if version != 1:
        raise SchemaError(f"unsupported scenario format_version {version!r}")
    allowed = {"radius", "depth", "clearance", "chamfer"}

    def _check(section: Mapping, where: str) -> dict:
        out = {}
        for key, value in section.items():
            if key not in allowed:
                raise SchemaError(f"unknown hole field {key!r}", field=where)
            out[key] = float(value)
        return out

    defaults = _check(data.get("defaults", {}), "defaults")
    per_op = {}
    ops = data.get("operations", {})
    if not isinstance(ops, dict):
        raise SchemaError("'operations' must be an object", field="operations")
    for op_id, section in ops.items():
        if not isinstance(section, dict):
            raise SchemaError(f"override for {op_id!r} must be an object", field="operations")
        per_op[op_id] = _check(section, f"operations.{op_id}")
    return defaults, per_op


def resolve_hole(
    connector: ConnectorType,
    op_id: str,
    defaults: Mapping,
    per_op: Mapping,
) -> HoleSpec:
    spec = default_hole(connector)
    merged = dict(defaults)
    merged.update(per_op.get(op_id, {}))
    if merged:
        spec = spec.replace(**merged)
    return spec
