"""Road network representation, dynamic-condition overlay, scenarios and snapshots.

The static topology (nodes, edges, adjacency) never changes after a scenario
is loaded. Time-varying state lives in a per-edge overlay (congestion factor,
comfort penalty, blocked set) plus the per-node heuristic field. Planners
never see the mutable state directly; they operate on immutable
:class:`GraphSnapshot` values taken at epoch boundaries.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from .heuristics import HeuristicField, HeuristicWeights


class ScenarioError(Exception):
    """Base class for scenario loading failures."""


class ParseError(ScenarioError):
    """Malformed scenario document (bad JSON, wrong types, unknown keys)."""


class ValidationError(ScenarioError):
    """Well-formed document that violates a scenario invariant."""


# Event kinds accepted in scenario documents.
SET_CONGESTION = "set_congestion"
SET_COMFORT = "set_comfort"
SET_NODE_COMFORT_H = "set_node_comfort_h"
BLOCK_EDGE = "block_edge"
UNBLOCK_EDGE = "unblock_edge"

EVENT_KINDS = frozenset(
    {SET_CONGESTION, SET_COMFORT, SET_NODE_COMFORT_H, BLOCK_EDGE, UNBLOCK_EDGE}
)

# Kinds whose value field must be present.
_VALUED_KINDS = frozenset({SET_CONGESTION, SET_COMFORT, SET_NODE_COMFORT_H})


@dataclass(frozen=True)
class NodeRecord:
    id: str
    x: float
    y: float


@dataclass(frozen=True)
class EdgeRecord:
    id: str
    from_node: str
    to_node: str
    length_m: float
    base_time_s: float


@dataclass(frozen=True)
class Event:
    """A timed change to the world: congestion, comfort, blocking.

    ``sensed_only`` events change the ground-truth state but are not
    broadcast to the shared planning state; other vehicles learn about them
    only through shared traversal observations.
    """

    at_time: float
    kind: str
    target: str
    value: float | None = None
    sensed_only: bool = False


@dataclass(frozen=True)
class Query:
    vehicle: str
    start: str
    goal: str
    depart_s: float
    weights: HeuristicWeights
    prefers_comfort: bool = False
    rough_road: bool = False
    heavy_traffic: bool = False


class RoadGraph:
    """Directed road network with a mutable dynamic-condition overlay."""

    def __init__(self, nodes: Iterable[NodeRecord], edges: Iterable[EdgeRecord]):
        self.nodes: dict[str, NodeRecord] = {}
        for n in nodes:
            if n.id in self.nodes:
                raise ValidationError(f"duplicate node id {n.id!r}")
            if not (math.isfinite(n.x) and math.isfinite(n.y)):
                raise ValidationError(f"node {n.id!r} has non-finite coordinates")
            self.nodes[n.id] = n
        self.edges: dict[str, EdgeRecord] = {}
        for e in edges:
            if e.id in self.edges:
                raise ValidationError(f"duplicate edge id {e.id!r}")
            for endpoint in (e.from_node, e.to_node):
                if endpoint not in self.nodes:
                    raise ValidationError(
                        f"edge {e.id!r} references unknown node {endpoint!r}"
                    )
            if not (math.isfinite(e.length_m) and e.length_m > 0):
                raise ValidationError(f"edge {e.id!r} has non-positive length")
            if not (math.isfinite(e.base_time_s) and e.base_time_s > 0):
                raise ValidationError(f"edge {e.id!r} has non-positive base time")
            self.edges[e.id] = e
        adjacency: dict[str, list[str]] = {nid: [] for nid in self.nodes}
        for eid in sorted(self.edges):
            adjacency[self.edges[eid].from_node].append(eid)
        self.adjacency: dict[str, tuple[str, ...]] = {
            nid: tuple(eids) for nid, eids in adjacency.items()
        }
        # Dynamic overlay: defaults are free flow, no penalty, nothing blocked.
        self.congestion: dict[str, float] = {eid: 1.0 for eid in self.edges}
        self.comfort: dict[str, float] = {eid: 0.0 for eid in self.edges}
        self.blocked: set[str] = set()
        # Free-flow network top speed, used by the time heuristic.
        self.v_max: float = max(
            e.length_m / e.base_time_s for e in self.edges.values()
        ) if self.edges else 1.0

    def copy(self) -> "RoadGraph":
        g = RoadGraph.__new__(RoadGraph)
        g.nodes = self.nodes
        g.edges = self.edges
        g.adjacency = self.adjacency
        g.congestion = dict(self.congestion)
        g.comfort = dict(self.comfort)
        g.blocked = set(self.blocked)
        g.v_max = self.v_max
        return g


@dataclass(frozen=True)
class Scenario:
    graph: RoadGraph
    initial_field: HeuristicField
    events: tuple[Event, ...]
    queries: tuple[Query, ...]
    name: str
    seed: int
    alpha: float = 0.3


@dataclass(frozen=True)
class GraphSnapshot:
    """Immutable view of the overlay + heuristic field at one instant.

    All reads a planner performs during one search go through a single
    snapshot, so concurrent mutation of the live graph cannot affect it.
    """

    nodes: Mapping[str, NodeRecord]
    edges: Mapping[str, EdgeRecord]
    adjacency: Mapping[str, tuple[str, ...]]
    congestion: Mapping[str, float]
    comfort: Mapping[str, float]
    blocked: frozenset[str]
    h2: Mapping[str, float]
    h3: Mapping[str, float]
    v_max: float
    time: float

    def effective_time(self, edge_id: str) -> float:
        e = self.edges[edge_id]
        return e.base_time_s * self.congestion[edge_id]

    def node_penalty(self, node_id: str) -> float:
        return self.h2.get(node_id, 0.0) + self.h3.get(node_id, 0.0)


def apply_event(graph: RoadGraph, field: HeuristicField, ev: Event) -> None:
    """Apply one event to the live overlay. Exactly one attribute changes."""
    if ev.kind == SET_CONGESTION:
        if ev.target not in graph.edges:
            raise ValidationError(f"event targets unknown edge {ev.target!r}")
        if ev.value is None or ev.value < 1.0:
            raise ValidationError(f"congestion factor must be >= 1, got {ev.value}")
        graph.congestion[ev.target] = float(ev.value)
    elif ev.kind == SET_COMFORT:
        if ev.target not in graph.edges:
            raise ValidationError(f"event targets unknown edge {ev.target!r}")
        if ev.value is None or ev.value < 0.0:
            raise ValidationError(f"comfort penalty must be >= 0, got {ev.value}")
        graph.comfort[ev.target] = float(ev.value)
    elif ev.kind == SET_NODE_COMFORT_H:
        if ev.target not in graph.nodes:
            raise ValidationError(f"event targets unknown node {ev.target!r}")
        if ev.value is None or ev.value < 0.0:
            raise ValidationError(f"comfort heuristic must be >= 0, got {ev.value}")
        field.h2_by_node[ev.target] = float(ev.value)
    elif ev.kind == BLOCK_EDGE:
        if ev.target not in graph.edges:
            raise ValidationError(f"event targets unknown edge {ev.target!r}")
        graph.blocked.add(ev.target)
    elif ev.kind == UNBLOCK_EDGE:
        if ev.target not in graph.edges:
            raise ValidationError(f"event targets unknown edge {ev.target!r}")
        graph.blocked.discard(ev.target)
    else:
        raise ValidationError(f"unknown event kind {ev.kind!r}")


def snapshot(graph: RoadGraph, field: HeuristicField, time: float) -> GraphSnapshot:
    """Freeze the current overlay + field into an immutable snapshot."""
    return GraphSnapshot(
        nodes=graph.nodes,
        edges=graph.edges,
        adjacency=graph.adjacency,
        congestion=MappingProxyType(dict(graph.congestion)),
        comfort=MappingProxyType(dict(graph.comfort)),
        blocked=frozenset(graph.blocked),
        h2=MappingProxyType(dict(field.h2_by_node)),
        h3=field.h3_by_node,
        v_max=graph.v_max,
        time=time,
    )


def neighbors(snap: GraphSnapshot, node: str) -> list[tuple[str, str, float]]:
    """Unblocked successors of ``node`` as (successor, edge_id, effective_time).

    Ordered by ascending edge id, so traversal order is deterministic.
    """
    if node not in snap.nodes:
        raise KeyError(f"unknown node {node!r}")
    out = []
    for eid in snap.adjacency[node]:
        if eid in snap.blocked:
            continue
        e = snap.edges[eid]
        out.append((e.to_node, eid, e.base_time_s * snap.congestion[eid]))
    return out


def make_grid(rows: int, cols: int, edge_length: float, speed: float) -> RoadGraph:
    """4-connected grid with directed edges both ways between lattice neighbors."""
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be >= 1")
    if edge_length <= 0 or speed <= 0:
        raise ValueError("edge_length and speed must be > 0")
    width = max(len(str(rows - 1)), len(str(cols - 1)), 2)

    def nid(r: int, c: int) -> str:
        return f"n{r:0{width}d}_{c:0{width}d}"

    nodes = [
        NodeRecord(nid(r, c), c * edge_length, r * edge_length)
        for r in range(rows)
        for c in range(cols)
    ]
    base_time = edge_length / speed
    edges = []
    count = 0
    for r in range(rows):
        for c in range(cols):
            for dr, dc in ((0, 1), (1, 0), (0, -1), (-1, 0)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < rows and 0 <= cc < cols:
                    edges.append(
                        EdgeRecord(
                            f"e{count:06d}", nid(r, c), nid(rr, cc),
                            edge_length, base_time,
                        )
                    )
                    count += 1
    return RoadGraph(nodes, edges)


def reachable(graph: RoadGraph, start: str, goal: str) -> bool:
    if start == goal:
        return True
    seen = {start}
    q = deque([start])
    while q:
        cur = q.popleft()
        for eid in graph.adjacency[cur]:
            nxt = graph.edges[eid].to_node
            if nxt == goal:
                return True
            if nxt not in seen:
                seen.add(nxt)
                q.append(nxt)
    return False


# ---------------------------------------------------------------------------
# Scenario document (de)serialization
# ---------------------------------------------------------------------------

_TOP_KEYS = {"meta", "nodes", "edges", "heuristics", "events", "queries"}
_META_KEYS = {"name", "seed", "alpha"}
_NODE_KEYS = {"id", "x", "y"}
_EDGE_KEYS = {"id", "from", "to", "length_m", "base_time_s"}
_HEUR_KEYS = {"h2", "h3"}
_EVENT_KEYS = {"t_s", "kind", "target", "value", "sensed_only"}
_QUERY_KEYS = {"vehicle", "start", "goal", "depart_s", "weights", "context"}
_WEIGHT_KEYS = {"wg", "w1", "w2", "w3"}
_CONTEXT_KEYS = {"prefers_comfort", "rough_road", "heavy_traffic"}


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ParseError(f"unknown key(s) {sorted(unknown)} in {where}")


def _num(obj: dict, key: str, where: str) -> float:
    v = obj.get(key)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ParseError(f"{where}: {key!r} must be a number")
    return float(v)


def _text(obj: dict, key: str, where: str) -> str:
    v = obj.get(key)
    if not isinstance(v, str):
        raise ParseError(f"{where}: {key!r} must be a string")
    return v


def load_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document.

    Raises :class:`ParseError` for malformed documents and
    :class:`ValidationError` for structurally sound documents that break a
    scenario invariant (dangling ids, unsorted events, unreachable goals).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("scenario document must be a JSON object")
    _check_keys(doc, _TOP_KEYS, "document")
    for key in ("meta", "nodes", "edges", "queries"):
        if key not in doc:
            raise ParseError(f"missing required key {key!r}")

    meta = doc["meta"]
    if not isinstance(meta, dict):
        raise ParseError("meta must be an object")
    _check_keys(meta, _META_KEYS, "meta")
    name = _text(meta, "name", "meta")
    seed = meta.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ParseError("meta: 'seed' must be an integer")
    alpha = float(meta.get("alpha", 0.3))
    if not (0.0 < alpha <= 1.0):
        raise ValidationError(f"meta.alpha must be in (0, 1], got {alpha}")

    nodes = []
    for i, n in enumerate(doc["nodes"]):
        if not isinstance(n, dict):
            raise ParseError(f"nodes[{i}] must be an object")
        _check_keys(n, _NODE_KEYS, f"nodes[{i}]")
        nodes.append(
            NodeRecord(_text(n, "id", "node"), _num(n, "x", "node"), _num(n, "y", "node"))
        )
    edges = []
    for i, e in enumerate(doc["edges"]):
        if not isinstance(e, dict):
            raise ParseError(f"edges[{i}] must be an object")
        _check_keys(e, _EDGE_KEYS, f"edges[{i}]")
        edges.append(
            EdgeRecord(
                _text(e, "id", "edge"),
                _text(e, "from", "edge"),
                _text(e, "to", "edge"),
                _num(e, "length_m", "edge"),
                _num(e, "base_time_s", "edge"),
            )
        )
    graph = RoadGraph(nodes, edges)

    heur = doc.get("heuristics", {})
    if not isinstance(heur, dict):
        raise ParseError("heuristics must be an object")
    _check_keys(heur, _HEUR_KEYS, "heuristics")
    h2 = {str(k): float(v) for k, v in heur.get("h2", {}).items()}
    h3 = {str(k): float(v) for k, v in heur.get("h3", {}).items()}
    for mapping, label in ((h2, "h2"), (h3, "h3")):
        for nid, val in mapping.items():
            if nid not in graph.nodes:
                raise ValidationError(f"heuristics.{label} names unknown node {nid!r}")
            if not math.isfinite(val) or val < 0:
                raise ValidationError(f"heuristics.{label}[{nid!r}] must be finite >= 0")
    initial_field = HeuristicField(h2_by_node=h2, h3_by_node=h3, smoothing_alpha=alpha)

    events = []
    prev_t = -math.inf
    for i, ev in enumerate(doc.get("events", [])):
        if not isinstance(ev, dict):
            raise ParseError(f"events[{i}] must be an object")
        _check_keys(ev, _EVENT_KEYS, f"events[{i}]")
        t = _num(ev, "t_s", f"events[{i}]")
        kind = _text(ev, "kind", f"events[{i}]")
        target = _text(ev, "target", f"events[{i}]")
        if kind not in EVENT_KINDS:
            raise ValidationError(f"events[{i}]: unknown kind {kind!r}")
        if t < 0:
            raise ValidationError(f"events[{i}]: negative time {t}")
        if t < prev_t:
            raise ValidationError(
                f"events[{i}] at t={t} is out of order (previous t={prev_t})"
            )
        prev_t = t
        value = None
        if kind in _VALUED_KINDS:
            value = _num(ev, "value", f"events[{i}]")
        elif "value" in ev:
            raise ParseError(f"events[{i}]: {kind!r} takes no value")
        sensed_only = ev.get("sensed_only", False)
        if not isinstance(sensed_only, bool):
            raise ParseError(f"events[{i}]: 'sensed_only' must be a boolean")
        event = Event(t, kind, target, value, sensed_only)
        # Validate targets and bounds by applying to throwaway copies.
        apply_event(graph.copy(), initial_field.copy(), event)
        events.append(event)

    queries = []
    for i, q in enumerate(doc["queries"]):
        if not isinstance(q, dict):
            raise ParseError(f"queries[{i}] must be an object")
        _check_keys(q, _QUERY_KEYS, f"queries[{i}]")
        w = q.get("weights", {})
        if not isinstance(w, dict):
            raise ParseError(f"queries[{i}].weights must be an object")
        _check_keys(w, _WEIGHT_KEYS, f"queries[{i}].weights")
        weights = HeuristicWeights(
            w_g=float(w.get("wg", 1.0)),
            w1=float(w.get("w1", 1.0)),
            w2=float(w.get("w2", 1.0)),
            w3=float(w.get("w3", 1.0)),
        )
        ctx = q.get("context", {})
        if not isinstance(ctx, dict):
            raise ParseError(f"queries[{i}].context must be an object")
        _check_keys(ctx, _CONTEXT_KEYS, f"queries[{i}].context")
        query = Query(
            vehicle=_text(q, "vehicle", f"queries[{i}]"),
            start=_text(q, "start", f"queries[{i}]"),
            goal=_text(q, "goal", f"queries[{i}]"),
            depart_s=_num(q, "depart_s", f"queries[{i}]") if "depart_s" in q else 0.0,
            weights=weights,
            prefers_comfort=bool(ctx.get("prefers_comfort", False)),
            rough_road=bool(ctx.get("rough_road", False)),
            heavy_traffic=bool(ctx.get("heavy_traffic", False)),
        )
        for endpoint, label in ((query.start, "start"), (query.goal, "goal")):
            if endpoint not in graph.nodes:
                raise ValidationError(
                    f"queries[{i}]: {label} names unknown node {endpoint!r}"
                )
        if query.depart_s < 0:
            raise ValidationError(f"queries[{i}]: negative depart_s")
        if not reachable(graph, query.start, query.goal):
            raise ValidationError(
                f"queries[{i}]: goal {query.goal!r} unreachable from {query.start!r}"
            )
        queries.append(query)

    return Scenario(
        graph=graph,
        initial_field=initial_field,
        events=tuple(events),
        queries=tuple(queries),
        name=name,
        seed=seed,
        alpha=alpha,
    )


def scenario_to_dict(scn: Scenario) -> dict:
    """Canonical dict form: ids and events sorted, suitable for stable JSON."""
    doc: dict = {
        "meta": {"name": scn.name, "seed": scn.seed, "alpha": scn.alpha},
        "nodes": [
            {"id": n.id, "x": n.x, "y": n.y}
            for n in sorted(scn.graph.nodes.values(), key=lambda n: n.id)
        ],
        "edges": [
            {
                "id": e.id,
                "from": e.from_node,
                "to": e.to_node,
                "length_m": e.length_m,
                "base_time_s": e.base_time_s,
            }
            for e in sorted(scn.graph.edges.values(), key=lambda e: e.id)
        ],
        "heuristics": {
            "h2": dict(sorted(scn.initial_field.h2_by_node.items())),
            "h3": dict(sorted(scn.initial_field.h3_by_node.items())),
        },
        "events": [],
        "queries": [],
    }
    for ev in scn.events:
        entry: dict = {"t_s": ev.at_time, "kind": ev.kind, "target": ev.target}
        if ev.value is not None:
            entry["value"] = ev.value
        if ev.sensed_only:
            entry["sensed_only"] = True
        doc["events"].append(entry)
    for q in scn.queries:
        doc["queries"].append(
            {
                "vehicle": q.vehicle,
                "start": q.start,
                "goal": q.goal,
                "depart_s": q.depart_s,
                "weights": {
                    "wg": q.weights.w_g,
                    "w1": q.weights.w1,
                    "w2": q.weights.w2,
                    "w3": q.weights.w3,
                },
                "context": {
                    "prefers_comfort": q.prefers_comfort,
                    "rough_road": q.rough_road,
                    "heavy_traffic": q.heavy_traffic,
                },
            }
        )
    return doc


def serialize_scenario(scn: Scenario) -> str:
    """Byte-stable canonical encoding: sorted keys, two-space indent."""
    return json.dumps(scenario_to_dict(scn), sort_keys=True, indent=2) + "\n"
