"""Built-in assembly fixtures.

Four small products with hand-authored geometry. Dimensions are in metres
and deliberately simplified; what matters is that every graph validates,
every connection edge is exactly solvable (mating features coincide with
opposed normals at the design poses), and interchangeable parts carry
identical local feature layouts.

The authoring pattern: one side of each mate is written out explicitly in
part-local coordinates; the other side is derived through the design poses,
which makes coincidence exact by construction. Interchangeable parts are
authored first with shared layouts, and poses are chosen so the derived
features of their partners also come out identical.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .geometry import RigidTransform, rotation_about_axis
from .graph import (
    AssemblyGraph,
    AttachmentFeature,
    ConnectionEdge,
    ConnectionInstance,
    ConnectorType,
    GraphNode,
    NodeKind,
    save_graph_file,
    validate,
)

_RZ_PI = rotation_about_axis(np.array([0.0, 0.0, 1.0]), math.pi)

MT = ConnectorType.MORTISE_TENON
DOWEL = ConnectorType.DOWEL
SCREW = ConnectorType.SCREW


class _Builder:
    """Accumulates parts, poses and features for one fixture."""

    def __init__(self) -> None:
        self.poses: dict[str, RigidTransform] = {}
        self.features: dict[str, dict[str, AttachmentFeature]] = {}

    def part(self, pid: str, translation, rotation=None) -> None:
        rot = np.eye(3) if rotation is None else rotation
        self.poses[pid] = RigidTransform(rotation=rot, translation=np.asarray(translation, dtype=float))
        self.features[pid] = {}

    def author(self, pid: str, apid: str, position, normal) -> None:
        n = np.asarray(normal, dtype=float)
        n = n / np.linalg.norm(n)
        self.features[pid][apid] = AttachmentFeature(
            position=tuple(float(v) for v in position),
            normal=tuple(float(v) for v in n),
        )

    def world(self, pid: str, apid: str):
        feat = self.features[pid][apid]
        pose = self.poses[pid]
        return pose.apply(np.asarray(feat.position)), pose.apply_direction(np.asarray(feat.normal))

    def derive(self, dst_pid: str, dst_apid: str, src_pid: str, src_apid: str) -> None:
        """Author dst's feature so it mates src's exactly at the design poses."""
        pos_w, nrm_w = self.world(src_pid, src_apid)
        inv = self.poses[dst_pid].inverse()
        self.author(dst_pid, dst_apid, inv.apply(pos_w), inv.apply_direction(-nrm_w))

    def check_mate(self, end_a: tuple[str, str], end_b: tuple[str, str]) -> None:
        pa, na = self.world(*end_a)
        pb, nb = self.world(*end_b)
        if not (np.allclose(pa, pb, atol=1e-12) and np.allclose(na, -nb, atol=1e-12)):
            raise AssertionError(f"fixture features do not mate: {end_a} vs {end_b}")


def _part_nodes(pids) -> list[GraphNode]:
    return [GraphNode(id=pid, kind=NodeKind.PART, part=pid) for pid in pids]


def _chair() -> AssemblyGraph:
    b = _Builder()
    b.part("side_left", (0.0, -0.20, 0.0))
    b.part("side_right", (0.0, 0.20, 0.0))
    b.part("seat", (0.05, 0.02, 0.21))
    b.part("stretcher_front", (0.15, 0.02, 0.06))
    b.part("backrest", (-0.15, 0.02, 0.27))
    b.part("stretcher_rear", (-0.15, 0.02, 0.06))

    # Side frames: ten points each, identical layouts on both sides.
    side_layout = [
        ("A", (-0.15, 0.02, 0.06), (0, 1, 0)),  # rear stretcher tenon
        ("B", (-0.15, 0.02, 0.30), (0, 1, 0)),  # backrest dowel
        ("C", (-0.15, 0.02, 0.24), (0, 1, 0)),  # backrest dowel
        ("D", (0.05, 0.02, 0.20), (0, 0, 1)),   # seat tenon
        ("E", (0.12, 0.02, 0.20), (0, 0, 1)),   # seat screw
        ("F", (0.15, 0.02, 0.06), (0, 1, 0)),   # front stretcher tenon
        ("G", (0.15, 0.02, 0.10), (0, 1, 0)),   # front stretcher screw
        ("H", (0.15, 0.02, 0.02), (0, 1, 0)),   # front stretcher screw
        ("I", (-0.15, 0.02, 0.10), (0, 1, 0)),  # rear stretcher screw
        ("J", (-0.15, 0.02, 0.02), (0, 1, 0)),  # rear stretcher screw
    ]
    for suffix, pos, nrm in side_layout:
        b.author("side_left", f"1{suffix}", pos, nrm)
        b.author("side_right", f"2{suffix}", pos, nrm)

    # Stretchers: identical rails, ends at local y = -0.20 / +0.20.
    stretcher_layout = [
        ("A", (0.0, -0.20, 0.0), (0, -1, 0)),
        ("B", (0.0, -0.20, 0.04), (0, -1, 0)),
        ("C", (0.0, -0.20, -0.04), (0, -1, 0)),
        ("D", (0.0, 0.20, 0.0), (0, -1, 0)),
        ("E", (0.0, 0.20, 0.04), (0, -1, 0)),
        ("F", (0.0, 0.20, -0.04), (0, -1, 0)),
    ]
    for suffix, pos, nrm in stretcher_layout:
        b.author("stretcher_front", f"4{suffix}", pos, nrm)
        b.author("stretcher_rear", f"6{suffix}", pos, nrm)

    # Seat: four underside sockets for the side frames, two rear tenons.
    b.author("seat", "3A", (0.0, -0.20, -0.01), (0, 0, -1))
    b.author("seat", "3B", (0.07, -0.20, -0.01), (0, 0, -1))
    b.author("seat", "3C", (0.0, 0.20, -0.01), (0, 0, -1))
    b.author("seat", "3D", (0.07, 0.20, -0.01), (0, 0, -1))
    b.author("seat", "3E", (-0.18, -0.10, 0.0), (-1, 0, 0))
    b.author("seat", "3F", (-0.18, 0.10, 0.0), (-1, 0, 0))

    # Backrest: everything derived from its partners.
    b.derive("backrest", "5E", "side_left", "1B")
    b.derive("backrest", "5F", "side_left", "1C")
    b.derive("backrest", "5A", "side_right", "2B")
    b.derive("backrest", "5B", "side_right", "2C")
    b.derive("backrest", "5C", "seat", "3E")
    b.derive("backrest", "5D", "seat", "3F")

    for pair in [
        (("side_left", "1F"), ("stretcher_front", "4A")),
        (("side_left", "1G"), ("stretcher_front", "4B")),
        (("side_left", "1H"), ("stretcher_front", "4C")),
        (("side_right", "2F"), ("stretcher_front", "4D")),
        (("side_right", "2G"), ("stretcher_front", "4E")),
        (("side_right", "2H"), ("stretcher_front", "4F")),
        (("side_left", "1A"), ("stretcher_rear", "6A")),
        (("side_left", "1I"), ("stretcher_rear", "6B")),
        (("side_left", "1J"), ("stretcher_rear", "6C")),
        (("side_right", "2A"), ("stretcher_rear", "6D")),
        (("side_right", "2I"), ("stretcher_rear", "6E")),
        (("side_right", "2J"), ("stretcher_rear", "6F")),
        (("side_left", "1D"), ("seat", "3A")),
        (("side_left", "1E"), ("seat", "3B")),
        (("side_right", "2D"), ("seat", "3C")),
        (("side_right", "2E"), ("seat", "3D")),
    ]:
        b.check_mate(*pair)

    nodes = (
        GraphNode(id="chair", kind=NodeKind.ROOT, children=("sub_back", "seat", "stretcher_front", "stretcher_rear")),
        GraphNode(id="sub_back", kind=NodeKind.SUBASSEMBLY, children=("side_left", "side_right", "backrest")),
        *_part_nodes(["side_left", "side_right", "backrest", "seat", "stretcher_front", "stretcher_rear"]),
    )

    def inst(ctype, a, bnd, connector=None):
        return ConnectionInstance(connector_type=ctype, end_a=a, end_b=bnd, connector=connector)

    edges = (
        ConnectionEdge(
            name="E1",
            nodes=("side_left", "backrest"),
            instances=(
                inst(DOWEL, ("side_left", "1B"), ("backrest", "5E"), "dw1"),
                inst(DOWEL, ("side_left", "1C"), ("backrest", "5F"), "dw2"),
            ),
        ),
        ConnectionEdge(
            name="E2",
            nodes=("side_right", "backrest"),
            instances=(
                inst(DOWEL, ("side_right", "2B"), ("backrest", "5A"), "dw3"),
                inst(DOWEL, ("side_right", "2C"), ("backrest", "5B"), "dw4"),
            ),
        ),
        ConnectionEdge(
            name="E3",
            nodes=("sub_back", "seat"),
            instances=(
                inst(MT, ("side_left", "1D"), ("seat", "3A")),
                inst(SCREW, ("side_left", "1E"), ("seat", "3B"), "sc1"),
                inst(MT, ("side_right", "2D"), ("seat", "3C")),
                inst(SCREW, ("side_right", "2E"), ("seat", "3D"), "sc2"),
                inst(MT, ("backrest", "5C"), ("seat", "3E")),
                inst(MT, ("backrest", "5D"), ("seat", "3F")),
            ),
        ),
        ConnectionEdge(
            name="E4",
            nodes=("sub_back", "stretcher_front"),
            instances=(
                inst(MT, ("side_left", "1F"), ("stretcher_front", "4A")),
                inst(SCREW, ("side_left", "1G"), ("stretcher_front", "4B"), "sc3"),
                inst(SCREW, ("side_left", "1H"), ("stretcher_front", "4C"), "sc4"),
                inst(MT, ("side_right", "2F"), ("stretcher_front", "4D")),
                inst(SCREW, ("side_right", "2G"), ("stretcher_front", "4E"), "sc5"),
                inst(SCREW, ("side_right", "2H"), ("stretcher_front", "4F"), "sc6"),
            ),
        ),
        ConnectionEdge(
            name="E5",
            nodes=("sub_back", "stretcher_rear"),
            instances=(
                inst(MT, ("side_left", "1A"), ("stretcher_rear", "6A")),
                inst(SCREW, ("side_left", "1I"), ("stretcher_rear", "6B"), "sc7"),
                inst(SCREW, ("side_left", "1J"), ("stretcher_rear", "6C"), "sc8"),
                inst(MT, ("side_right", "2A"), ("stretcher_rear", "6D")),
                inst(SCREW, ("side_right", "2I"), ("stretcher_rear", "6E"), "sc9"),
                inst(SCREW, ("side_right", "2J"), ("stretcher_rear", "6F"), "sc10"),
            ),
        ),
    )
    connectors = {f"dw{i}": DOWEL for i in range(1, 5)}
    connectors.update({f"sc{i}": SCREW for i in range(1, 11)})
    return AssemblyGraph(
        name="chair",
        nodes=nodes,
        parts=b.features,
        connection_edges=edges,
        equivalence_edges=(("side_left", "side_right"), ("stretcher_front", "stretcher_rear")),
        connectors=connectors,
        step_order=("E1", "E2", "E3", "E4", "E5"),
    )


def _shoe_shelf() -> AssemblyGraph:
    b = _Builder()
    b.part("side_left", (0.0, -0.15, 0.0))
    b.part("side_right", (0.0, 0.15, 0.0))
    b.part("shelf_top", (0.0, 0.02, 0.40))
    b.part("shelf_bottom", (0.0, 0.02, 0.10))

    side_layout = [
        ("A", (-0.08, 0.02, 0.40), (0, 1, 0)),
        ("B", (0.08, 0.02, 0.40), (0, 1, 0)),
        ("C", (0.0, 0.02, 0.36), (0, 1, 0)),
        ("D", (-0.08, 0.02, 0.10), (0, 1, 0)),
        ("E", (0.08, 0.02, 0.10), (0, 1, 0)),
        ("F", (0.0, 0.02, 0.06), (0, 1, 0)),
    ]
    for suffix, pos, nrm in side_layout:
        b.author("side_left", f"1{suffix}", pos, nrm)
        b.author("side_right", f"2{suffix}", pos, nrm)

    b.derive("shelf_top", "3A", "side_left", "1A")
    b.derive("shelf_top", "3B", "side_left", "1B")
    b.derive("shelf_top", "3C", "side_left", "1C")
    b.derive("shelf_top", "3D", "side_right", "2A")
    b.derive("shelf_top", "3E", "side_right", "2B")
    b.derive("shelf_top", "3F", "side_right", "2C")
    b.derive("shelf_bottom", "4A", "side_left", "1D")
    b.derive("shelf_bottom", "4B", "side_left", "1E")
    b.derive("shelf_bottom", "4C", "side_left", "1F")
    b.derive("shelf_bottom", "4D", "side_right", "2D")
    b.derive("shelf_bottom", "4E", "side_right", "2E")
    # Pre-drilled but never fastened; keeps the two shelves interchangeable.
    b.author("shelf_bottom", "4F", (0.0, 0.15, -0.04), (0, -1, 0))

    nodes = (
        GraphNode(
            id="shoe_shelf",
            kind=NodeKind.ROOT,
            children=("side_left", "side_right", "shelf_top", "shelf_bottom"),
        ),
        *_part_nodes(["side_left", "side_right", "shelf_top", "shelf_bottom"]),
    )

    def inst(ctype, a, bnd, connector=None):
        return ConnectionInstance(connector_type=ctype, end_a=a, end_b=bnd, connector=connector)

    edges = (
        ConnectionEdge(
            name="E1",
            nodes=("side_left", "shelf_top"),
            instances=(
                inst(MT, ("side_left", "1A"), ("shelf_top", "3A")),
                inst(MT, ("side_left", "1B"), ("shelf_top", "3B")),
                inst(SCREW, ("side_left", "1C"), ("shelf_top", "3C"), "sc1"),
            ),
        ),
        ConnectionEdge(
            name="E2",
            nodes=("side_right", "shelf_top"),
            instances=(
                inst(MT, ("side_right", "2A"), ("shelf_top", "3D")),
                inst(MT, ("side_right", "2B"), ("shelf_top", "3E")),
                inst(SCREW, ("side_right", "2C"), ("shelf_top", "3F"), "sc2"),
            ),
        ),
        ConnectionEdge(
            name="E3",
            nodes=("side_left", "shelf_bottom"),
            instances=(
                inst(MT, ("side_left", "1D"), ("shelf_bottom", "4A")),
                inst(MT, ("side_left", "1E"), ("shelf_bottom", "4B")),
                inst(SCREW, ("side_left", "1F"), ("shelf_bottom", "4C"), "sc3"),
            ),
        ),
        ConnectionEdge(
            name="E4",
            nodes=("side_right", "shelf_bottom"),
            instances=(
                inst(MT, ("side_right", "2D"), ("shelf_bottom", "4D")),
                inst(MT, ("side_right", "2E"), ("shelf_bottom", "4E")),
            ),
        ),
    )
    return AssemblyGraph(
        name="shoe_shelf",
        nodes=nodes,
        parts=b.features,
        connection_edges=edges,
        equivalence_edges=(("side_left", "side_right"), ("shelf_top", "shelf_bottom")),
        connectors={"sc1": SCREW, "sc2": SCREW, "sc3": SCREW},
        step_order=("E1", "E2", "E3", "E4"),
    )


def _lego_person() -> AssemblyGraph:
    b = _Builder()
    b.part("head", (0.0, 0.0, 0.40))
    b.part("torso", (0.0, 0.0, 0.30))
    b.part("arm_left", (0.0, -0.07, 0.32))
    b.part("arm_right", (0.0, 0.07, 0.32), rotation=_RZ_PI)
    b.part("hand_left", (0.0, -0.08, 0.26))
    b.part("hand_right", (0.0, 0.08, 0.26))
    b.part("hip", (0.0, 0.0, 0.20))
    b.part("leg_left", (0.0, -0.02, 0.10))
    b.part("leg_right", (0.0, 0.04, 0.10))

    b.author("head", "1A", (0.0, 0.0, -0.02), (0, 0, -1))
    b.author("torso", "2A", (0.0, 0.0, 0.08), (0, 0, 1))
    b.author("torso", "2B", (0.0, -0.05, 0.02), (0, -1, 0))
    b.author("torso", "2C", (0.0, 0.05, 0.02), (0, 1, 0))
    b.author("torso", "2D", (0.0, 0.0, -0.05), (0, 0, -1))
    for pid, peg, wrist in (("arm_left", "3A", "3B"), ("arm_right", "4A", "4B")):
        b.author(pid, peg, (0.0, 0.02, 0.0), (0, 1, 0))
        b.author(pid, wrist, (0.0, -0.01, -0.05), (0, 0, -1))
    b.author("hand_left", "5A", (0.0, 0.0, 0.01), (0, 0, 1))
    b.author("hand_right", "6A", (0.0, 0.0, 0.01), (0, 0, 1))
    b.author("hip", "7A", (0.0, 0.0, 0.05), (0, 0, 1))
    b.author("hip", "7B", (0.0, -0.03, -0.02), (0, 0, -1))
    b.author("hip", "7C", (0.0, 0.03, -0.02), (0, 0, -1))
    b.author("leg_left", "8A", (0.0, -0.01, 0.08), (0, 0, 1))
    b.author("leg_right", "9A", (0.0, -0.01, 0.08), (0, 0, 1))

    for pair in [
        (("head", "1A"), ("torso", "2A")),
        (("arm_left", "3A"), ("torso", "2B")),
        (("arm_right", "4A"), ("torso", "2C")),
        (("arm_left", "3B"), ("hand_left", "5A")),
        (("arm_right", "4B"), ("hand_right", "6A")),
        (("torso", "2D"), ("hip", "7A")),
        (("leg_left", "8A"), ("hip", "7B")),
        (("leg_right", "9A"), ("hip", "7C")),
    ]:
        b.check_mate(*pair)

    nodes = (
        GraphNode(id="lego_person", kind=NodeKind.ROOT, children=("sub_upper", "sub_lower")),
        GraphNode(
            id="sub_upper",
            kind=NodeKind.SUBASSEMBLY,
            children=("head", "torso", "sub_arm_left", "sub_arm_right"),
        ),
        GraphNode(id="sub_arm_left", kind=NodeKind.SUBASSEMBLY, children=("arm_left", "hand_left")),
        GraphNode(id="sub_arm_right", kind=NodeKind.SUBASSEMBLY, children=("arm_right", "hand_right")),
        GraphNode(id="sub_lower", kind=NodeKind.SUBASSEMBLY, children=("hip", "leg_left", "leg_right")),
        *_part_nodes(
            ["head", "torso", "arm_left", "arm_right", "hand_left", "hand_right", "hip", "leg_left", "leg_right"]
        ),
    )

    def mt(a, bnd):
        return ConnectionInstance(connector_type=MT, end_a=a, end_b=bnd)

    edges = (
        ConnectionEdge(name="E1", nodes=("head", "torso"), instances=(mt(("head", "1A"), ("torso", "2A")),)),
        ConnectionEdge(name="E2", nodes=("sub_arm_left", "torso"), instances=(mt(("arm_left", "3A"), ("torso", "2B")),)),
        ConnectionEdge(name="E3", nodes=("sub_arm_right", "torso"), instances=(mt(("arm_right", "4A"), ("torso", "2C")),)),
        ConnectionEdge(name="E4", nodes=("arm_left", "hand_left"), instances=(mt(("arm_left", "3B"), ("hand_left", "5A")),)),
        ConnectionEdge(name="E5", nodes=("arm_right", "hand_right"), instances=(mt(("arm_right", "4B"), ("hand_right", "6A")),)),
        ConnectionEdge(name="E6", nodes=("sub_upper", "sub_lower"), instances=(mt(("torso", "2D"), ("hip", "7A")),)),
        ConnectionEdge(name="E7", nodes=("leg_left", "hip"), instances=(mt(("leg_left", "8A"), ("hip", "7B")),)),
        ConnectionEdge(name="E8", nodes=("leg_right", "hip"), instances=(mt(("leg_right", "9A"), ("hip", "7C")),)),
    )
    return AssemblyGraph(
        name="lego_person",
        nodes=nodes,
        parts=b.features,
        connection_edges=edges,
        equivalence_edges=(
            ("arm_left", "arm_right"),
            ("hand_left", "hand_right"),
            ("leg_left", "leg_right"),
            ("sub_arm_left", "sub_arm_right"),
        ),
        step_order=("E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8"),
    )


def _plane_model() -> AssemblyGraph:
    b = _Builder()
    b.part("fuselage_front", (0.15, 0.0, 0.10))
    b.part("fuselage_rear", (-0.15, 0.0, 0.10))
    b.part("wing_left", (0.05, -0.25, 0.10))
    b.part("wing_right", (0.05, 0.25, 0.10), rotation=_RZ_PI)
    b.part("tail_fin", (-0.28, 0.0, 0.18))
    b.part("stab_left", (-0.28, -0.08, 0.12))
    b.part("stab_right", (-0.28, 0.08, 0.12), rotation=_RZ_PI)
    b.part("engine_left", (0.05, -0.18, 0.06))
    b.part("engine_right", (0.05, 0.18, 0.06), rotation=_RZ_PI)
    b.part("landing_gear", (0.12, 0.0, 0.02))
    b.part("propeller", (0.26, 0.0, 0.10))

    b.author("fuselage_front", "1A", (-0.15, 0.0, 0.0), (-1, 0, 0))
    for pid, dwl, tenon in (("wing_left", "3A", "3B"), ("wing_right", "4A", "4B")):
        b.author(pid, dwl, (0.0, 0.23, 0.0), (0, 1, 0))
        b.author(pid, tenon, (-0.04, 0.23, 0.0), (0, 1, 0))
    b.author("engine_left", "8A", (0.0, 0.0, 0.03), (0, 0, 1))
    b.author("engine_right", "9A", (0.0, 0.0, 0.03), (0, 0, 1))
    b.author("tail_fin", "5A", (0.0, 0.0, -0.04), (0, 0, -1))
    b.author("stab_left", "6A", (0.0, 0.06, 0.0), (0, 1, 0))
    b.author("stab_right", "7A", (0.0, 0.06, 0.0), (0, 1, 0))
    b.author("landing_gear", "10A", (0.0, 0.0, 0.035), (0, 0, 1))
    b.author("propeller", "11A", (-0.035, 0.0, 0.0), (-1, 0, 0))

    b.derive("fuselage_rear", "2A", "fuselage_front", "1A")
    b.derive("fuselage_front", "1B", "wing_left", "3A")
    b.derive("fuselage_front", "1C", "wing_left", "3B")
    b.derive("fuselage_front", "1D", "wing_right", "4A")
    b.derive("fuselage_front", "1E", "wing_right", "4B")
    b.derive("wing_left", "3C", "engine_left", "8A")
    b.derive("wing_right", "4C", "engine_right", "9A")
    b.derive("fuselage_rear", "2B", "tail_fin", "5A")
    b.derive("fuselage_rear", "2C", "stab_left", "6A")
    b.derive("fuselage_rear", "2D", "stab_right", "7A")
    b.derive("fuselage_front", "1F", "landing_gear", "10A")
    b.derive("fuselage_front", "1G", "propeller", "11A")

    airframe_parts = [
        "fuselage_front",
        "fuselage_rear",
        "tail_fin",
        "stab_left",
        "stab_right",
        "landing_gear",
        "propeller",
    ]
    nodes = (
        GraphNode(id="plane_model", kind=NodeKind.ROOT, children=("sub_airframe", "sub_wing_left", "sub_wing_right")),
        GraphNode(id="sub_airframe", kind=NodeKind.SUBASSEMBLY, children=tuple(airframe_parts)),
        GraphNode(id="sub_wing_left", kind=NodeKind.SUBASSEMBLY, children=("wing_left", "engine_left")),
        GraphNode(id="sub_wing_right", kind=NodeKind.SUBASSEMBLY, children=("wing_right", "engine_right")),
        *_part_nodes(airframe_parts + ["wing_left", "wing_right", "engine_left", "engine_right"]),
    )

    def inst(ctype, a, bnd, connector=None):
        return ConnectionInstance(connector_type=ctype, end_a=a, end_b=bnd, connector=connector)

    edges = (
        ConnectionEdge(
            name="E1",
            nodes=("fuselage_front", "fuselage_rear"),
            instances=(inst(DOWEL, ("fuselage_front", "1A"), ("fuselage_rear", "2A"), "dw1"),),
        ),
        ConnectionEdge(
            name="E2",
            nodes=("fuselage_rear", "tail_fin"),
            instances=(inst(MT, ("fuselage_rear", "2B"), ("tail_fin", "5A")),),
        ),
        ConnectionEdge(
            name="E3",
            nodes=("fuselage_rear", "stab_left"),
            instances=(inst(MT, ("fuselage_rear", "2C"), ("stab_left", "6A")),),
        ),
        ConnectionEdge(
            name="E4",
            nodes=("fuselage_rear", "stab_right"),
            instances=(inst(MT, ("fuselage_rear", "2D"), ("stab_right", "7A")),),
        ),
        ConnectionEdge(
            name="E5",
            nodes=("sub_airframe", "sub_wing_left"),
            instances=(
                inst(DOWEL, ("fuselage_front", "1B"), ("wing_left", "3A"), "dw2"),
                inst(MT, ("fuselage_front", "1C"), ("wing_left", "3B")),
            ),
        ),
        ConnectionEdge(
            name="E6",
            nodes=("sub_airframe", "sub_wing_right"),
            instances=(
                inst(DOWEL, ("fuselage_front", "1D"), ("wing_right", "4A"), "dw3"),
                inst(MT, ("fuselage_front", "1E"), ("wing_right", "4B")),
            ),
        ),
        ConnectionEdge(
            name="E7",
            nodes=("wing_left", "engine_left"),
            instances=(inst(MT, ("wing_left", "3C"), ("engine_left", "8A")),),
        ),
        ConnectionEdge(
            name="E8",
            nodes=("wing_right", "engine_right"),
            instances=(inst(MT, ("wing_right", "4C"), ("engine_right", "9A")),),
        ),
        ConnectionEdge(
            name="E9",
            nodes=("fuselage_front", "landing_gear"),
            instances=(inst(MT, ("fuselage_front", "1F"), ("landing_gear", "10A")),),
        ),
        ConnectionEdge(
            name="E10",
            nodes=("fuselage_front", "propeller"),
            instances=(inst(MT, ("fuselage_front", "1G"), ("propeller", "11A")),),
        ),
    )
    return AssemblyGraph(
        name="plane_model",
        nodes=nodes,
        parts=b.features,
        connection_edges=edges,
        equivalence_edges=(
            ("wing_left", "wing_right"),
            ("stab_left", "stab_right"),
            ("engine_left", "engine_right"),
            ("sub_wing_left", "sub_wing_right"),
        ),
        connectors={"dw1": DOWEL, "dw2": DOWEL, "dw3": DOWEL},
        step_order=("E1", "E2", "E3", "E4", "E9", "E10", "E5", "E6", "E7", "E8"),
    )


_BUILDERS = {
    "chair": _chair,
    "shoe_shelf": _shoe_shelf,
    "lego_person": _lego_person,
    "plane_model": _plane_model,
}


def fixture_names() -> tuple[str, ...]:
    return tuple(_BUILDERS)


def fixture(name: str) -> AssemblyGraph:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(_BUILDERS)}") from None
    graph = builder()
    report = validate(graph)
    if not report.ok:
        raise AssertionError(f"fixture {name} failed validation:\n{report}")
    return graph


def write_fixture_files(directory) -> list[Path]:
    """Write every fixture graph as JSON into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in fixture_names():
        path = directory / f"{name}.json"
        save_graph_file(fixture(name), path)
        written.append(path)
    return written
