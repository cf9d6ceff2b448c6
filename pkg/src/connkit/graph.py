"""Hierarchical assembly graph: types, validation, serialization, planning.

The model has three edge families over one node set: composition (parent to
child, stored as ``children`` on each node), equivalence (interchangeable
nodes), and connection (sibling nodes joined by one or more connector
instances). Attachment geometry lives on parts, in part-local frames.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace

from .errors import InvalidGraph, ParseError, SchemaError

FORMAT_VERSION = 1

NodeId = str
PartId = str
AttachmentPointId = str
ConnectorId = str


class ConnectorType(str, enum.Enum):
    MORTISE_TENON = "mortise_tenon"
    DOWEL = "dowel"
    SCREW = "screw"

    @classmethod
    def from_str(cls, raw: str) -> "ConnectorType":
        key = raw.strip().lower().replace("-", "_").replace(" ", "_")
        for member in cls:
            if member.value == key:
                return member
        raise SchemaError(f"unknown connector type {raw!r}", field="connector_type")


class NodeKind(str, enum.Enum):
    PART = "part"
    SUBASSEMBLY = "subassembly"
    ROOT = "root"


@dataclass(frozen=True)
class AttachmentFeature:
    """A mating feature on a part: a point plus an outward unit normal."""

    position: tuple[float, float, float]
    normal: tuple[float, float, float]

    def to_dict(self) -> dict:
        return {"position": list(self.position), "normal": list(self.normal)}


@dataclass(frozen=True)
class GraphNode:
    id: NodeId
    kind: NodeKind
    part: PartId | None = None
    children: tuple[NodeId, ...] = ()


@dataclass(frozen=True)
class ConnectionInstance:
    """One physical fastening: a connector joining two attachment points."""

    connector_type: ConnectorType
    end_a: tuple[PartId, AttachmentPointId]
    end_b: tuple[PartId, AttachmentPointId]
    connector: ConnectorId | None = None
    screw_lead: float | None = None


def edge_key(a: NodeId, b: NodeId) -> tuple[NodeId, NodeId]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class ConnectionEdge:
    name: str
    nodes: tuple[NodeId, NodeId]
    instances: tuple[ConnectionInstance, ...]

    @property
    def key(self) -> tuple[NodeId, NodeId]:
        return edge_key(*self.nodes)


@dataclass(frozen=True)
class Violation:
    rule: str
    message: str
    locus: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        lines = [f"{len(self.violations)} violation(s):"]
        for v in self.violations:
            lines.append(f"  [{v.rule}] {v.locus}: {v.message}")
        return "\n".join(lines)


@dataclass(frozen=True)
class ConnectionOperation:
    """One planned fastening step, with a stable identifier."""

    op_id: str
    index: int
    edge_name: str
    edge: tuple[NodeId, NodeId]
    instance_index: int
    fixed_node: NodeId
    held_node: NodeId
    instance: ConnectionInstance

    @property
    def connector_type(self) -> ConnectorType:
        return self.instance.connector_type


@dataclass(frozen=True)
class AssemblyGraph:
    name: str
    nodes: tuple[GraphNode, ...]
    parts: dict[PartId, dict[AttachmentPointId, AttachmentFeature]]
    connection_edges: tuple[ConnectionEdge, ...]
    equivalence_edges: tuple[tuple[NodeId, NodeId], ...] = ()
    connectors: dict[ConnectorId, ConnectorType] = field(default_factory=dict)
    step_order: tuple[str, ...] = ()

    # -- lookups ---------------------------------------------------------

    def node(self, node_id: NodeId) -> GraphNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def has_node(self, node_id: NodeId) -> bool:
        return any(n.id == node_id for n in self.nodes)

    def root(self) -> GraphNode:
        roots = [n for n in self.nodes if n.kind is NodeKind.ROOT]
        if len(roots) != 1:
            raise InvalidGraph(f"expected exactly one root node, found {len(roots)}")
        return roots[0]

    def edge(self, name: str) -> ConnectionEdge:
        for e in self.connection_edges:
            if e.name == name:
                return e
        raise KeyError(name)

    def composition_edges(self) -> tuple[tuple[NodeId, NodeId], ...]:
        """Parent-to-child pairs derived from the stored children lists."""
        out = []
        for n in self.nodes:
            for c in n.children:
                out.append((n.id, c))
        return tuple(out)

    def parent_of(self, node_id: NodeId) -> NodeId | None:
        for n in self.nodes:
            if node_id in n.children:
                return n.id
        return None

    def leaf_parts(self, node_id: NodeId) -> tuple[PartId, ...]:
        """Part ids contained in the subtree rooted at ``node_id``."""
        node = self.node(node_id)
        if node.kind is NodeKind.PART:
            return (node.part,) if node.part else ()
        out: list[PartId] = []
        for c in node.children:
            out.extend(self.leaf_parts(c))
        return tuple(out)

    def feature(self, part: PartId, point: AttachmentPointId) -> AttachmentFeature:
        return self.parts[part][point]

    def part_of_point(self, point: AttachmentPointId) -> PartId | None:
        for pid, pts in self.parts.items():
            if point in pts:
                return pid
        return None


# ---------------------------------------------------------------------------
# validation


def _layout_multiset(graph: AssemblyGraph, node_id: NodeId) -> list[tuple[tuple[float, ...], tuple[float, ...]]]:
    feats = []
    for pid in graph.leaf_parts(node_id):
        for feat in graph.parts.get(pid, {}).values():
            feats.append((feat.position, feat.normal))
    return feats


def _layouts_match(a, b, tol: float = 1e-9) -> bool:
    if len(a) != len(b):
        return False
    remaining = list(b)
    for pos, nrm in a:
        hit = None
        for i, (p2, n2) in enumerate(remaining):
            if all(abs(x - y) <= tol for x, y in zip(pos, p2)) and all(
                abs(x - y) <= tol for x, y in zip(nrm, n2)
            ):
                hit = i
                break
        if hit is None:
            return False
        remaining.pop(hit)
    return True


def validate(graph: AssemblyGraph) -> ValidationReport:
    """Check every structural invariant and report all violations found."""
    out: list[Violation] = []

    def bad(rule: str, locus: str, message: str):
        out.append(Violation(rule, message, locus))

    ids = [n.id for n in graph.nodes]
    seen = set()
    for i in ids:
        if i in seen:
            bad("node-ids-unique", f"node {i}", "duplicate node id")
        seen.add(i)
    by_id = {n.id: n for n in graph.nodes}

    roots = [n for n in graph.nodes if n.kind is NodeKind.ROOT]
    if len(roots) != 1:
        bad("single-root", "graph", f"expected exactly one root node, found {len(roots)}")

    # composition forms a tree: single parent, no cycles, all reachable
    parent: dict[NodeId, NodeId] = {}
    for n in graph.nodes:
        if n.kind is NodeKind.PART and n.children:
            bad("parts-are-leaves", f"node {n.id}", "part node has children")
        if n.kind is not NodeKind.PART and n.part is not None:
            bad("part-ref-on-part-nodes", f"node {n.id}", "non-part node references a part")
        if n.kind is NodeKind.PART and n.part is None:
            bad("part-ref-on-part-nodes", f"node {n.id}", "part node lacks a part reference")
        if n.kind is NodeKind.PART and n.part is not None and n.part not in graph.parts:
            bad("part-exists", f"node {n.id}", f"unknown part {n.part!r}")
        for c in n.children:
            if c not in by_id:
                bad("child-exists", f"node {n.id}", f"unknown child {c!r}")
                continue
            if c in parent:
                bad("single-parent", f"node {c}", "node has more than one parent")
            parent[c] = n.id

    if roots:
        reachable = set()
        stack = [roots[0].id]
        while stack:
            cur = stack.pop()
            if cur in reachable or cur not in by_id:
                continue
            reachable.add(cur)
            stack.extend(by_id[cur].children)
        for n in graph.nodes:
            if n.id not in reachable:
                bad("tree-connected", f"node {n.id}", "not reachable from the root")
        if roots[0].id in parent:
            bad("root-is-root", f"node {roots[0].id}", "root has a parent")

    node_parts = {n.part for n in graph.nodes if n.kind is NodeKind.PART and n.part}
    for pid in graph.parts:
        if pid not in node_parts:
            bad("part-has-node", f"part {pid}", "part defined but not referenced by any node")

    # attachment points: globally unique ids, unit normals
    owner: dict[AttachmentPointId, PartId] = {}
    for pid, pts in graph.parts.items():
        for apid, feat in pts.items():
            if apid in owner:
                bad(
                    "point-ids-unique",
                    f"part {pid} point {apid}",
                    f"attachment point id also used by part {owner[apid]!r}",
                )
            owner[apid] = pid
            norm = math.sqrt(sum(x * x for x in feat.normal))
            if abs(norm - 1.0) > 1e-9:
                bad("normals-unit", f"part {pid} point {apid}", f"normal has length {norm:.3g}")

    # connection edges
    seen_edge_names = set()
    seen_connectors: dict[ConnectorId, str] = {}
    for e in graph.connection_edges:
        locus = f"edge {e.name}"
        if e.name in seen_edge_names:
            bad("edge-names-unique", locus, "duplicate connection edge name")
        seen_edge_names.add(e.name)
        a, b = e.nodes
        if a not in by_id or b not in by_id:
            bad("edge-nodes-exist", locus, f"endpoint {a!r} or {b!r} missing")
            continue
        if a == b:
            bad("edge-distinct-nodes", locus, "edge joins a node to itself")
            continue
        if parent.get(a) != parent.get(b) or parent.get(a) is None:
            bad("edges-join-siblings", locus, f"{a!r} and {b!r} are not siblings")
        leaves_a = set(graph.leaf_parts(a)) if a in by_id else set()
        leaves_b = set(graph.leaf_parts(b)) if b in by_id else set()
        if not e.instances:
            bad("edge-nonempty", locus, "connection edge has no instances")
        for i, inst in enumerate(e.instances):
            iloc = f"{locus} instance {i}"
            pa, pta = inst.end_a
            pb, ptb = inst.end_b
            if pa == pb:
                bad("ends-distinct-parts", iloc, "both ends reference the same part")
            for side, (p, pt) in (("a", inst.end_a), ("b", inst.end_b)):
                if p not in graph.parts:
                    bad("end-part-exists", iloc, f"end_{side} part {p!r} unknown")
                elif pt not in graph.parts[p]:
                    bad("end-point-exists", iloc, f"end_{side} point {pt!r} not on part {p!r}")
            in_a = pa in leaves_a and pb in leaves_b
            in_b = pa in leaves_b and pb in leaves_a
            if leaves_a and leaves_b and not (in_a or in_b):
                bad("ends-within-edge", iloc, "instance ends do not lie one per edge endpoint")
            if inst.connector_type is ConnectorType.MORTISE_TENON:
                if inst.connector is not None:
                    bad("connector-iff-typed", iloc, "mortise-tenon instances carry no connector id")
            else:
                if inst.connector is None:
                    bad("connector-iff-typed", iloc, f"{inst.connector_type.value} instance needs a connector id")
                elif inst.connector not in graph.connectors:
                    bad("connector-registered", iloc, f"connector {inst.connector!r} not registered")
                elif graph.connectors[inst.connector] is not inst.connector_type:
                    bad(
                        "connector-type-matches",
                        iloc,
                        f"connector {inst.connector!r} registered as "
                        f"{graph.connectors[inst.connector].value}, used as {inst.connector_type.value}",
                    )
            if inst.connector is not None:
                if inst.connector in seen_connectors:
                    bad(
                        "connector-single-use",
                        iloc,
                        f"connector {inst.connector!r} already used at {seen_connectors[inst.connector]}",
                    )
                seen_connectors[inst.connector] = iloc
            if inst.screw_lead is not None:
                if inst.connector_type is not ConnectorType.SCREW:
                    bad("screw-lead-screw-only", iloc, "screw_lead set on a non-screw instance")
                elif inst.screw_lead <= 0:
                    bad("screw-lead-positive", iloc, f"screw_lead {inst.screw_lead} not positive")

    # equivalence edges
    for a, b in graph.equivalence_edges:
        locus = f"equivalence {a}~{b}"
        if a not in by_id or b not in by_id:
            bad("equivalence-nodes-exist", locus, "endpoint missing")
            continue
        if a == b:
            bad("equivalence-distinct", locus, "node equivalent to itself")
            continue
        if not _layouts_match(_layout_multiset(graph, a), _layout_multiset(graph, b)):
            bad("equivalence-layouts", locus, "attachment layouts differ beyond relabeling")

    # step order covers each connection edge exactly once
    names = [e.name for e in graph.connection_edges]
    if sorted(graph.step_order) != sorted(names):
        bad(
            "step-order-complete",
            "step_order",
            "step_order is not a permutation of the connection edge names",
        )

    return ValidationReport(tuple(out))


# ---------------------------------------------------------------------------
# planning


def plan_sequence(graph: AssemblyGraph) -> tuple[ConnectionOperation, ...]:
    """Expand the manual step order into per-connector operations.

    Each connection instance becomes one operation, ordered by ``step_order``
    and then by instance order within the edge. The endpoint whose subtree
    contains more already-connected parts is fixed; ties go to the smaller
    node id. The other endpoint is held.
    """
    report = validate(graph)
    if not report.ok:
        raise InvalidGraph(f"cannot plan an invalid graph:\n{report}", report.violations)

    ops: list[ConnectionOperation] = []
    connected: set[PartId] = set()
    index = 0
    for name in graph.step_order:
        edge = graph.edge(name)
        a, b = edge.nodes
        leaves_a = set(graph.leaf_parts(a))
        leaves_b = set(graph.leaf_parts(b))
        for i, inst in enumerate(edge.instances):
            na, nb = len(connected & leaves_a), len(connected & leaves_b)
            if na > nb:
                fixed, held = a, b
            elif nb > na:
                fixed, held = b, a
            else:
                fixed, held = (a, b) if a < b else (b, a)
            ops.append(
                ConnectionOperation(
                    op_id=f"{name}.{i}",
                    index=index,
                    edge_name=name,
                    edge=edge.key,
                    instance_index=i,
                    fixed_node=fixed,
                    held_node=held,
                    instance=inst,
                )
            )
            index += 1
            connected |= leaves_a | leaves_b
    return tuple(ops)


# ---------------------------------------------------------------------------
# serialization


def graph_to_dict(graph: AssemblyGraph) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "name": graph.name,
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                **({"part": n.part} if n.part is not None else {}),
                **({"children": list(n.children)} if n.children else {}),
            }
            for n in graph.nodes
        ],
        "parts": {
            pid: {"attachment_points": {apid: f.to_dict() for apid, f in pts.items()}}
            for pid, pts in graph.parts.items()
        },
        "connectors": {cid: t.value for cid, t in graph.connectors.items()},
        "connection_edges": [
            {
                "name": e.name,
                "nodes": list(e.nodes),
                "instances": [
                    {
                        "connector_type": inst.connector_type.value,
                        **({"connector": inst.connector} if inst.connector is not None else {}),
                        "end_a": {"part": inst.end_a[0], "point": inst.end_a[1]},
                        "end_b": {"part": inst.end_b[0], "point": inst.end_b[1]},
                        **({"screw_lead": inst.screw_lead} if inst.screw_lead is not None else {}),
                    }
                    for inst in e.instances
                ],
            }
            for e in graph.connection_edges
        ],
        "equivalence_edges": [list(pair) for pair in graph.equivalence_edges],
        "step_order": list(graph.step_order),
    }


def _require(d: dict, key: str, locus: str):
    if key not in d:
        raise ParseError(f"missing required key {key!r}", field=locus)
    return d[key]


def _triple(raw, locus: str) -> tuple[float, float, float]:
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise ParseError("expected a 3-element list", field=locus)
    try:
        return (float(raw[0]), float(raw[1]), float(raw[2]))
    except (TypeError, ValueError):
        raise ParseError("expected numeric entries", field=locus) from None


def graph_from_dict(doc: dict) -> AssemblyGraph:
    if not isinstance(doc, dict):
        raise ParseError("top-level document must be an object")
    version = _require(doc, "format_version", "format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {version!r}", field="format_version")

    nodes = []
    for i, nd in enumerate(_require(doc, "nodes", "nodes")):
        locus = f"nodes[{i}]"
        kind_raw = _require(nd, "kind", f"{locus}.kind")
        try:
            kind = NodeKind(kind_raw)
        except ValueError:
            raise SchemaError(f"unknown node kind {kind_raw!r}", field=f"{locus}.kind") from None
        nodes.append(
            GraphNode(
                id=str(_require(nd, "id", f"{locus}.id")),
                kind=kind,
                part=nd.get("part"),
                children=tuple(nd.get("children", ())),
            )
        )

    parts: dict[PartId, dict[AttachmentPointId, AttachmentFeature]] = {}
    for pid, pd in _require(doc, "parts", "parts").items():
        pts = {}
        for apid, fd in _require(pd, "attachment_points", f"parts[{pid}]").items():
            locus = f"parts[{pid}].attachment_points[{apid}]"
            pts[apid] = AttachmentFeature(
                position=_triple(_require(fd, "position", f"{locus}.position"), f"{locus}.position"),
                normal=_triple(_require(fd, "normal", f"{locus}.normal"), f"{locus}.normal"),
            )
        parts[pid] = pts

    connectors = {
        cid: ConnectorType.from_str(t) for cid, t in doc.get("connectors", {}).items()
    }

    edges = []
    for i, ed in enumerate(_require(doc, "connection_edges", "connection_edges")):
        locus = f"connection_edges[{i}]"
        node_pair = _require(ed, "nodes", f"{locus}.nodes")
        if not isinstance(node_pair, (list, tuple)) or len(node_pair) != 2:
            raise ParseError("edge nodes must be a 2-element list", field=f"{locus}.nodes")
        instances = []
        for j, idd in enumerate(_require(ed, "instances", f"{locus}.instances")):
            iloc = f"{locus}.instances[{j}]"
            ea = _require(idd, "end_a", f"{iloc}.end_a")
            eb = _require(idd, "end_b", f"{iloc}.end_b")
            instances.append(
                ConnectionInstance(
                    connector_type=ConnectorType.from_str(
                        str(_require(idd, "connector_type", f"{iloc}.connector_type"))
                    ),
                    connector=idd.get("connector"),
                    end_a=(str(_require(ea, "part", f"{iloc}.end_a.part")), str(_require(ea, "point", f"{iloc}.end_a.point"))),
                    end_b=(str(_require(eb, "part", f"{iloc}.end_b.part")), str(_require(eb, "point", f"{iloc}.end_b.point"))),
                    screw_lead=idd.get("screw_lead"),
                )
            )
        edges.append(
            ConnectionEdge(
                name=str(ed.get("name", f"E{i + 1}")),
                nodes=(str(node_pair[0]), str(node_pair[1])),
                instances=tuple(instances),
            )
        )

    return AssemblyGraph(
        name=str(doc.get("name", "")),
        nodes=tuple(nodes),
        parts=parts,
        connection_edges=tuple(edges),
        equivalence_edges=tuple(
            (str(a), str(b)) for a, b in doc.get("equivalence_edges", ())
        ),
        connectors=connectors,
        step_order=tuple(str(s) for s in doc.get("step_order", ())),
    )


def save_graph(graph: AssemblyGraph) -> bytes:
    return (json.dumps(graph_to_dict(graph), indent=2, sort_keys=False) + "\n").encode()


def load_graph(data: bytes | str) -> AssemblyGraph:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc.msg}", line=exc.lineno) from None
    return graph_from_dict(doc)


def load_graph_file(path) -> AssemblyGraph:
    with open(path, "rb") as fh:
        return load_graph(fh.read())


def save_graph_file(graph: AssemblyGraph, path) -> None:
    with open(path, "wb") as fh:
        fh.write(save_graph(graph))


# ---------------------------------------------------------------------------
# convenience used by tests and tools


def _point_bijection(graph: AssemblyGraph, pa: PartId, pb: PartId) -> dict[AttachmentPointId, AttachmentPointId]:
    """Match points of two identically laid out parts by geometry."""
    out: dict[AttachmentPointId, AttachmentPointId] = {}
    taken: set[AttachmentPointId] = set()
    for apid, feat in graph.parts[pa].items():
        hit = None
        for other, cand in graph.parts[pb].items():
            if other in taken:
                continue
            if all(abs(x - y) <= 1e-9 for x, y in zip(feat.position, cand.position)) and all(
                abs(x - y) <= 1e-9 for x, y in zip(feat.normal, cand.normal)
            ):
                hit = other
                break
        if hit is None:
            raise InvalidGraph(f"parts {pa!r} and {pb!r} do not share a layout")
        out[apid] = hit
        taken.add(hit)
    return out


def swap_equivalent(graph: AssemblyGraph, a: NodeId, b: NodeId) -> AssemblyGraph:
    """Exchange the roles of two equivalence-linked part nodes.

    The physical parts trade places: each node keeps its position in the
    hierarchy but now references the other part, and every instance end is
    relabeled through the geometric point correspondence the equivalence
    guarantees to exist.
    """
    if edge_key(a, b) not in {edge_key(x, y) for x, y in graph.equivalence_edges}:
        raise InvalidGraph(f"{a!r} and {b!r} are not equivalence-linked")
    na, nb = graph.node(a), graph.node(b)
    if na.kind is not NodeKind.PART or nb.kind is not NodeKind.PART:
        raise InvalidGraph("only part nodes can be swapped")
    pa, pb = na.part, nb.part
    fwd = _point_bijection(graph, pa, pb)
    rev = {v: k for k, v in fwd.items()}

    def swap_end(end):
        part, point = end
        if part == pa:
            return (pb, fwd[point])
        if part == pb:
            return (pa, rev[point])
        return end

    nodes = []
    for n in graph.nodes:
        if n.id == a:
            nodes.append(replace(n, part=pb))
        elif n.id == b:
            nodes.append(replace(n, part=pa))
        else:
            nodes.append(n)
    edges = tuple(
        replace(
            e,
            instances=tuple(
                replace(inst, end_a=swap_end(inst.end_a), end_b=swap_end(inst.end_b))
                for inst in e.instances
            ),
        )
        for e in graph.connection_edges
    )
    return replace(graph, nodes=tuple(nodes), connection_edges=edges)
