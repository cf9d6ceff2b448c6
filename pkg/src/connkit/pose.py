"""Closed-form pose alignment from matched attachment features, plus metrics.

Given matched point pairs (x_a, x_b) with outward normals (n_a, n_b), the
solver finds the rigid transform minimising

    sum_i ||R x_a_i + t - x_b_i||^2 + alpha * ||R n_a_i + n_b_i||^2

so mated points coincide and outward normals oppose. The rotation comes from
an SVD of the combined cross-covariance; the translation follows in closed
form from the centroids.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, LengthMismatch
from .geometry import RigidTransform, geodesic_distance, minimal_rotation_between

_RANK_TOL = 1e-8


class Degeneracy(str, enum.Enum):
    FULL = "full"          # rotation fully determined
    PLANAR = "planar"      # constraints span only a plane (rank 2)
    AXIS_FREE = "axis_free"  # one whole rotation axis left free (rank <= 1)


@dataclass(frozen=True)
class MatchedPairs:
    """Matched features of one connection edge, as stacked arrays.

    ``positions_a``/``normals_a`` live in the moving frame, ``positions_b``/
    ``normals_b`` in the target frame. ``alpha`` weights the normal term of
    the objective; 1.0 balances both terms at desk scale.
    """

    positions_a: np.ndarray
    normals_a: np.ndarray
    positions_b: np.ndarray
    normals_b: np.ndarray
    alpha: float = 1.0

    def __post_init__(self):
        for name in ("positions_a", "normals_a", "positions_b", "normals_b"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 3:
                raise LengthMismatch(f"{name} must have shape (k, 3)")
            object.__setattr__(self, name, arr)
        k = self.positions_a.shape[0]
        if k < 1:
            raise LengthMismatch("at least one matched pair is required")
        for name in ("normals_a", "positions_b", "normals_b"):
            if getattr(self, name).shape[0] != k:
                raise LengthMismatch("all pair arrays must share a length")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")

    @property
    def count(self) -> int:
        return int(self.positions_a.shape[0])

    @staticmethod
    def from_features(pairs, alpha: float = 1.0) -> "MatchedPairs":
        """Build from an iterable of ((pos_a, nrm_a), (pos_b, nrm_b))."""
        pa, na, pb, nb = [], [], [], []
        for (xa, va), (xb, vb) in pairs:
            pa.append(xa)
            na.append(va)
            pb.append(xb)
            nb.append(vb)
        return MatchedPairs(np.array(pa, float), np.array(na, float), np.array(pb, float), np.array(nb, float), alpha)


@dataclass(frozen=True)
class AlignmentResult:
    transform: RigidTransform
    residual: float
    degeneracy: Degeneracy


def alignment_objective(pairs: MatchedPairs, rotation: np.ndarray, translation: np.ndarray) -> float:
    """Evaluate the alignment objective for an arbitrary candidate pose."""
    r = np.asarray(rotation, float)
    t = np.asarray(translation, float)
    pos_err = pairs.positions_a @ r.T + t - pairs.positions_b
    nrm_err = pairs.normals_a @ r.T + pairs.normals_b
    return float(np.sum(pos_err * pos_err) + pairs.alpha * np.sum(nrm_err * nrm_err))


def induced_translation(pairs: MatchedPairs, rotation: np.ndarray) -> np.ndarray:
    """Optimal translation for a fixed rotation: centroid difference."""
    r = np.asarray(rotation, float)
    return pairs.positions_b.mean(axis=0) - r @ pairs.positions_a.mean(axis=0)


def solve_alignment(pairs: MatchedPairs) -> AlignmentResult:
    """Minimise the alignment objective over proper rigid transforms.

    The optimal rotation maximises the trace coupling against the combined
    cross-covariance of centered positions and negated normals. Rank-deficient
    covariances are resolved deterministically: with a single independent
    direction constraint the solver returns the minimal-geodesic rotation
    taking the moving direction onto its target, using a fixed perpendicular
    axis when a half-turn is needed.

    Raises DegenerateInput when every position coincides and ``alpha`` is
    zero, since no rotation information exists at all.
    """
    spread_a = float(np.max(np.abs(pairs.positions_a - pairs.positions_a[0]))) if pairs.count > 1 else 0.0
    if pairs.alpha == 0.0 and spread_a < 1e-12:
        raise DegenerateInput("all positions coincide and alpha is zero: rotation unconstrained")

    centroid_a = pairs.positions_a.mean(axis=0)
    centroid_b = pairs.positions_b.mean(axis=0)
    ca = pairs.positions_a - centroid_a
    cb = pairs.positions_b - centroid_b

    m = ca.T @ cb - pairs.alpha * (pairs.normals_a.T @ pairs.normals_b)

    u, s, vt = np.linalg.svd(m)
    scale = s[0] if s[0] > 0 else 1.0
    rank = int(np.sum(s > _RANK_TOL * scale)) if s[0] > 0 else 0

    if rank >= 2:
        v = vt.T
        d = float(np.sign(np.linalg.det(v @ u.T)))
        rotation = v @ np.diag([1.0, 1.0, d]) @ u.T
        degeneracy = Degeneracy.FULL if rank == 3 else Degeneracy.PLANAR
    elif rank == 1:
        # one direction pair constrains the rotation; the spin about it is
        # free, so pick the smallest rotation achieving the mapping
        rotation = minimal_rotation_between(u[:, 0], vt.T[:, 0])
        degeneracy = Degeneracy.AXIS_FREE
    else:
        rotation = np.eye(3)
        degeneracy = Degeneracy.AXIS_FREE

    translation = centroid_b - rotation @ centroid_a
    residual = alignment_objective(pairs, rotation, translation)
    return AlignmentResult(RigidTransform(rotation, translation), residual, degeneracy)


# ---------------------------------------------------------------------------
# pose metrics


@dataclass(frozen=True)
class PoseMetrics:
    rotation_geodesic: float
    rmse: float
    chamfer: float
    part_accuracy: float

    def to_dict(self) -> dict:
        return {
            "rotation_geodesic": self.rotation_geodesic,
            "rmse": self.rmse,
            "chamfer": self.chamfer,
            "part_accuracy": self.part_accuracy,
        }


def chamfer_distance(cloud_a, cloud_b) -> float:
    """Symmetric average Chamfer distance, plain L2 (not squared)."""
    a = np.asarray(cloud_a, float)
    b = np.asarray(cloud_b, float)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != 3 or b.shape[1] != 3:
        raise LengthMismatch("point clouds must have shape (n, 3)")
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise LengthMismatch("point clouds must be non-empty")
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return 0.5 * (float(d.min(axis=1).mean()) + float(d.min(axis=0).mean()))


def pose_metrics(predicted, truth, clouds, tau_pa: float = 0.01) -> PoseMetrics:
    """Per-part pose error summary.

    ``predicted`` and ``truth`` are parallel sequences of RigidTransform, and
    ``clouds`` the matching part point clouds in part-local frames. Rotation
    geodesic distance, RMSE and Chamfer distance are averaged over parts;
    part accuracy is the fraction of parts whose Chamfer distance under the
    predicted pose stays below ``tau_pa``.
    """
    predicted = list(predicted)
    truth = list(truth)
    clouds = [np.asarray(c, float) for c in clouds]
    if not (len(predicted) == len(truth) == len(clouds)):
        raise LengthMismatch(
            f"got {len(predicted)} predictions, {len(truth)} truths, {len(clouds)} clouds"
        )
    if not predicted:
        raise LengthMismatch("at least one part is required")

    gds, rmses, chamfers, hits = [], [], [], 0
    for pred, true, cloud in zip(predicted, truth, clouds):
        gds.append(geodesic_distance(pred.rotation, true.rotation))
        moved_pred = pred.apply(cloud)
        moved_true = true.apply(cloud)
        err = moved_pred - moved_true
        rmses.append(float(np.sqrt(np.mean(np.sum(err * err, axis=1)))))
        cd = chamfer_distance(moved_pred, moved_true)
        chamfers.append(cd)
        if cd < tau_pa:
            hits += 1
    return PoseMetrics(
        rotation_geodesic=float(np.mean(gds)),
        rmse=float(np.mean(rmses)),
        chamfer=float(np.mean(chamfers)),
        part_accuracy=hits / len(clouds),
    )


# ---------------------------------------------------------------------------
# whole-assembly solving


@dataclass(frozen=True)
class SolvedOperation:
    op_id: str
    edge_name: str
    fixed_node: str
    held_node: str
    instance_index: int
    transform: RigidTransform  # maps the held group onto the fixed structure
    residual: float
    degeneracy: Degeneracy


@dataclass(frozen=True)
class AssemblySolution:
    part_poses: dict[str, RigidTransform]
    operations: tuple[SolvedOperation, ...]

    def for_edge(self, edge_name: str) -> SolvedOperation:
        for op in self.operations:
            if op.edge_name == edge_name:
                return op
        raise KeyError(edge_name)


def solve_assembly(graph, alpha: float = 1.0) -> AssemblySolution:
    """Solve part poses for a whole graph by walking the planned sequence.

    Parts start floating at identity. For each planned edge (instances are
    solved jointly once per edge) the held group's features, at their current
    poses, are aligned onto the fixed side's. Parts already joined by earlier
    edges form rigid clusters, and the whole cluster of the held side moves
    together so earlier constraints stay satisfied. The first fixed side
    anchors the assembly frame.
    """
    from .graph import plan_sequence  # local import keeps module deps one-way

    ops = plan_sequence(graph)
    poses: dict[str, RigidTransform] = {pid: RigidTransform.identity() for pid in graph.parts}
    cluster: dict[str, str] = {pid: pid for pid in graph.parts}
    members: dict[str, set[str]] = {pid: {pid} for pid in graph.parts}
    solved: list[SolvedOperation] = []
    solved_edges: set[str] = set()

    def _merge(parts):
        roots = sorted({cluster[p] for p in parts})
        head = roots[0]
        for other in roots[1:]:
            for pid in members[other]:
                cluster[pid] = head
            members[head] |= members.pop(other)
        return head

    for op in ops:
        if op.edge_name in solved_edges:
            continue
        solved_edges.add(op.edge_name)
        edge = graph.edge(op.edge_name)
        held_parts = set(graph.leaf_parts(op.held_node))
        fixed_parts = set(graph.leaf_parts(op.fixed_node))
        moving = set()
        for pid in held_parts:
            moving |= members[cluster[pid]]
        rigid_already = bool(moving & fixed_parts)

        feats = []
        for inst in edge.instances:
            if inst.end_a[0] in held_parts:
                held_end, fixed_end = inst.end_a, inst.end_b
            else:
                held_end, fixed_end = inst.end_b, inst.end_a
            fa = graph.feature(*held_end)
            fb = graph.feature(*fixed_end)
            pose_h = poses[held_end[0]]
            pose_f = poses[fixed_end[0]]
            feats.append(
                (
                    (pose_h.apply(fa.position), pose_h.apply_direction(fa.normal)),
                    (pose_f.apply(fb.position), pose_f.apply_direction(fb.normal)),
                )
            )
        pairs = MatchedPairs.from_features(feats, alpha=alpha)
        if rigid_already:
            # Both sides are already one rigid body; nothing may move. Record
            # the residual the edge sees at the settled poses.
            result = AlignmentResult(
                transform=RigidTransform.identity(),
                residual=alignment_objective(pairs, np.eye(3), np.zeros(3)),
                degeneracy=Degeneracy.FULL,
            )
        else:
            result = solve_alignment(pairs)
            for pid in moving:
                poses[pid] = result.transform.compose(poses[pid])
        # Only parts the edge actually fastens become rigidly locked; subtree
        # parts that merely rode along stay free until their own edge runs.
        touched = set()
        for inst in edge.instances:
            touched.add(inst.end_a[0])
            touched.add(inst.end_b[0])
        _merge(touched)
        solved.append(
            SolvedOperation(
                op_id=op.op_id,
                edge_name=op.edge_name,
                fixed_node=op.fixed_node,
                held_node=op.held_node,
                instance_index=op.instance_index,
                transform=result.transform,
                residual=result.residual,
                degeneracy=result.degeneracy,
            )
        )
    return AssemblySolution(part_poses=poses, operations=tuple(solved))
