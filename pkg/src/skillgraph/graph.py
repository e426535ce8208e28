"""Typed taxonomy graph: node/edge kinds, parsing, validation, serialization.

The graph is heterogeneous: five node kinds, six edge kinds, and a
legality table saying which endpoint kinds each edge kind may join.
Parsing rejects structural defects (bad syntax, duplicate ids, unknown
kinds, dangling endpoints, self-loops); schema validation reports
legality violations as data so callers can list them all.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum


class NodeKind(str, Enum):
    ROOT = "root"
    COMMON_FACTOR = "common_factor"
    INTERVENTION_CONCEPT = "intervention_concept"
    SKILL = "skill"
    EXAMPLE = "example"


class EdgeKind(str, Enum):
    FOSTERS = "fosters"
    EXPRESSES = "expresses"
    DEMONSTRATES = "demonstrates"
    INCLUDES = "includes"
    CONVEYS = "conveys"
    SUPPORTS = "supports"


# Legal (source kind, target kind) per edge kind. Root -> CommonFactor
# Includes edges are additionally whitelisted by validate_schema so the
# taxonomy forms one connected component.
EDGE_LEGALITY: dict[EdgeKind, tuple[NodeKind, NodeKind]] = {
    EdgeKind.FOSTERS: (NodeKind.EXAMPLE, NodeKind.COMMON_FACTOR),
    EdgeKind.EXPRESSES: (NodeKind.EXAMPLE, NodeKind.INTERVENTION_CONCEPT),
    EdgeKind.DEMONSTRATES: (NodeKind.EXAMPLE, NodeKind.SKILL),
    EdgeKind.INCLUDES: (NodeKind.COMMON_FACTOR, NodeKind.INTERVENTION_CONCEPT),
    EdgeKind.CONVEYS: (NodeKind.SKILL, NodeKind.INTERVENTION_CONCEPT),
    EdgeKind.SUPPORTS: (NodeKind.SKILL, NodeKind.COMMON_FACTOR),
}

# Canonical class names per task; Neutral is always the last index and
# "missing" (no annotation) is represented by None, never by a class.
CF_CLASSES = ("bond", "goal_alignment", "task_agreement", "neutral")
IC_CLASSES = ("ear", "cp", "neutral")
SKILL_CLASSES = (
    "open_ended_questions",
    "reflective_listening",
    "affirmation",
    "validation",
    "genuineness",
    "respect_for_autonomy",
    "asking_for_permission",
    "neutral",
)

TASK_CLASSES: dict[str, tuple[str, ...]] = {
    "cf": CF_CLASSES,
    "ic": IC_CLASSES,
    "skill": SKILL_CLASSES,
}


class GraphFormatError(ValueError):
    """Structural defect in a graph file; the input cannot be loaded."""


@dataclass(frozen=True)
class LabelSet:
    """Per-task class indices; None marks a missing annotation."""

    cf: int | None = None
    ic: int | None = None
    skill: int | None = None

    def __post_init__(self) -> None:
        for name, value, classes in (
            ("cf", self.cf, CF_CLASSES),
            ("ic", self.ic, IC_CLASSES),
            ("skill", self.skill, SKILL_CLASSES),
        ):
            if value is not None and not 0 <= value < len(classes):
                raise ValueError(f"label {name}={value} outside [0,{len(classes)})")

    def get(self, task: str) -> int | None:
        return {"cf": self.cf, "ic": self.ic, "skill": self.skill}[task]

    def present_count(self) -> int:
        return sum(v is not None for v in (self.cf, self.ic, self.skill))


@dataclass(frozen=True)
class NodeRecord:
    id: str
    kind: NodeKind
    name: str
    description: str
    text: str
    labels: LabelSet | None = None


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    kind: EdgeKind


@dataclass(frozen=True)
class HeteroGraph:
    """Immutable parsed graph with symmetric adjacency prebuilt."""

    nodes: tuple[NodeRecord, ...]
    edges: tuple[Edge, ...]
    index: dict[str, int] = field(compare=False)
    neighbors: dict[str, tuple[str, ...]] = field(compare=False)

    def node(self, node_id: str) -> NodeRecord:
        return self.nodes[self.index[node_id]]

    def example_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes if n.kind is NodeKind.EXAMPLE)


def _build_graph(nodes: list[NodeRecord], edges: list[Edge]) -> HeteroGraph:
    index = {n.id: i for i, n in enumerate(nodes)}
    adj: dict[str, list[str]] = {n.id: [] for n in nodes}
    for e in edges:
        adj[e.source].append(e.target)
        adj[e.target].append(e.source)
    # Neighbor order fixed by node position so all traversals are
    # deterministic regardless of edge-list order.
    neighbors = {
        nid: tuple(sorted(set(lst), key=index.__getitem__)) for nid, lst in adj.items()
    }
    return HeteroGraph(tuple(nodes), tuple(edges), index, neighbors)


_NODE_FIELDS = {"id", "kind", "name", "description", "text", "labels"}
_EDGE_FIELDS = {"source", "target", "kind"}


def _parse_labels(raw: object, node_id: str) -> LabelSet:
    if not isinstance(raw, dict):
        raise GraphFormatError(f"node {node_id!r}: labels must be an object")
    unknown = set(raw) - set(TASK_CLASSES)
    if unknown:
        raise GraphFormatError(
            f"node {node_id!r}: unknown label keys {sorted(unknown)}"
        )
    indices: dict[str, int] = {}
    for task, value in raw.items():
        classes = TASK_CLASSES[task]
        if value not in classes:
            raise GraphFormatError(
                f"node {node_id!r}: unknown {task} class {value!r}"
            )
        indices[task] = classes.index(value)
    return LabelSet(**indices)


def parse_graph(data: bytes | str) -> HeteroGraph:
    """Load a graph document, building symmetric adjacency.

    Node order is preserved from the file. Structural defects raise
    GraphFormatError; kind-level legality is left to validate_schema.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"malformed graph file: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) != {"nodes", "edges"}:
        raise GraphFormatError('graph document must have exactly "nodes" and "edges"')
    if not isinstance(doc["nodes"], list) or not isinstance(doc["edges"], list):
        raise GraphFormatError('"nodes" and "edges" must be arrays')

    nodes: list[NodeRecord] = []
    seen: set[str] = set()
    for i, raw in enumerate(doc["nodes"]):
        if not isinstance(raw, dict):
            raise GraphFormatError(f"node #{i} is not an object")
        unknown = set(raw) - _NODE_FIELDS
        if unknown:
            raise GraphFormatError(f"node #{i}: unknown fields {sorted(unknown)}")
        missing = (_NODE_FIELDS - {"labels"}) - set(raw)
        if missing:
            raise GraphFormatError(f"node #{i}: missing fields {sorted(missing)}")
        node_id = raw["id"]
        if not isinstance(node_id, str) or not node_id:
            raise GraphFormatError(f"node #{i}: id must be a non-empty string")
        if node_id in seen:
            raise GraphFormatError(f"duplicate node id {node_id!r}")
        seen.add(node_id)
        try:
            kind = NodeKind(raw["kind"])
        except ValueError:
            raise GraphFormatError(
                f"node {node_id!r}: unknown node kind {raw['kind']!r}"
            ) from None
        for fname in ("name", "description", "text"):
            if not isinstance(raw[fname], str):
                raise GraphFormatError(f"node {node_id!r}: {fname} must be a string")
        labels = None
        if "labels" in raw:
            if kind is not NodeKind.EXAMPLE:
                raise GraphFormatError(
                    f"node {node_id!r}: labels only allowed on example nodes"
                )
            labels = _parse_labels(raw["labels"], node_id)
        nodes.append(
            NodeRecord(
                id=node_id,
                kind=kind,
                name=raw["name"],
                description=raw["description"],
                text=raw["text"],
                labels=labels,
            )
        )

    edges: list[Edge] = []
    for i, raw in enumerate(doc["edges"]):
        if not isinstance(raw, dict):
            raise GraphFormatError(f"edge #{i} is not an object")
        unknown = set(raw) - _EDGE_FIELDS
        if unknown:
            raise GraphFormatError(f"edge #{i}: unknown fields {sorted(unknown)}")
        missing = _EDGE_FIELDS - set(raw)
        if missing:
            raise GraphFormatError(f"edge #{i}: missing fields {sorted(missing)}")
        try:
            kind = EdgeKind(raw["kind"])
        except ValueError:
            raise GraphFormatError(
                f"edge #{i}: unknown edge kind {raw['kind']!r}"
            ) from None
        src, dst = raw["source"], raw["target"]
        for endpoint in (src, dst):
            if endpoint not in seen:
                raise GraphFormatError(f"edge #{i}: dangling endpoint {endpoint!r}")
        if src == dst:
            raise GraphFormatError(f"edge #{i}: self-loop on {src!r}")
        edges.append(Edge(src, dst, kind))

    return _build_graph(nodes, edges)


def serialize_graph(g: HeteroGraph) -> str:
    """Canonical text form; parse(serialize(g)) reproduces g."""
    nodes = []
    for n in g.nodes:
        rec: dict[str, object] = {
            "id": n.id,
            "kind": n.kind.value,
            "name": n.name,
            "description": n.description,
            "text": n.text,
        }
        if n.labels is not None:
            labels = {}
            for task in ("cf", "ic", "skill"):
                value = n.labels.get(task)
                if value is not None:
                    labels[task] = TASK_CLASSES[task][value]
            rec["labels"] = labels
        nodes.append(rec)
    edges = [
        {"source": e.source, "target": e.target, "kind": e.kind.value}
        for e in g.edges
    ]
    return json.dumps({"nodes": nodes, "edges": edges}, indent=2) + "\n"


def validate_schema(g: HeteroGraph) -> list[str]:
    """Every kind-level violation, one string each; empty means valid."""
    violations: list[str] = []
    for i, e in enumerate(g.edges):
        src_kind = g.node(e.source).kind
        dst_kind = g.node(e.target).kind
        legal = EDGE_LEGALITY[e.kind]
        root_link = (
            e.kind is EdgeKind.INCLUDES
            and src_kind is NodeKind.ROOT
            and dst_kind is NodeKind.COMMON_FACTOR
        )
        if (src_kind, dst_kind) != legal and not root_link:
            violations.append(
                f"edge #{i} {e.source!r}-[{e.kind.value}]->{e.target!r}: "
                f"illegal endpoints ({src_kind.value}, {dst_kind.value}), "
                f"expected ({legal[0].value}, {legal[1].value})"
            )
    for n in g.nodes:
        if n.kind is NodeKind.EXAMPLE:
            if n.labels is None or n.labels.present_count() == 0:
                violations.append(f"example node {n.id!r} has no labels")
        elif not n.name:
            violations.append(f"{n.kind.value} node {n.id!r} has an empty name")
    return violations
