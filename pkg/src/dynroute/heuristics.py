"""Per-node heuristic values, weighted cost combination, and observation fusion.

Three heuristic channels feed the search:

* h1 -- remaining travel time, straight-line distance over the network's
  free-flow top speed (admissible and consistent);
* h2 -- comfort, a per-node seconds-equivalent penalty updated at runtime
  from events and shared observations;
* h3 -- safety, fixed at load time and never written afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping


@dataclass
class HeuristicField:
    """Mutable comfort values plus write-protected safety values."""

    h2_by_node: dict[str, float] = field(default_factory=dict)
    h3_by_node: Mapping[str, float] = field(default_factory=dict)
    smoothing_alpha: float = 0.3

    def __post_init__(self) -> None:
        if not (0.0 < self.smoothing_alpha <= 1.0):
            raise ValueError(f"smoothing_alpha must be in (0, 1], got {self.smoothing_alpha}")
        # Safety values are sealed behind a read-only view; nothing in this
        # codebase can assign through it.
        self.h3_by_node = MappingProxyType(dict(self.h3_by_node))

    def copy(self) -> "HeuristicField":
        return HeuristicField(
            h2_by_node=dict(self.h2_by_node),
            h3_by_node=dict(self.h3_by_node),
            smoothing_alpha=self.smoothing_alpha,
        )


@dataclass(frozen=True)
class HeuristicWeights:
    """Coefficients applied to g and each heuristic channel."""

    w_g: float = 1.0
    w1: float = 1.0
    w2: float = 1.0
    w3: float = 1.0

    def __post_init__(self) -> None:
        for name in ("w_g", "w1", "w2", "w3"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if self.w_g <= 0:
            raise ValueError("w_g must be > 0 (path cost must count)")


@dataclass(frozen=True)
class Observation:
    """One vehicle's experienced traversal of one edge."""

    edge_id: str
    observed_travel_time: float
    observed_comfort: float
    reporter: str
    at_time: float


@dataclass(frozen=True)
class ContextFlags:
    passenger_prefers_comfort: bool = False
    rough_road_reported: bool = False
    heavy_traffic_reported: bool = False


def time_heuristic(snap, node: str, goal: str) -> float:
    """Lower bound on remaining travel time: straight line at top speed."""
    try:
        n = snap.nodes[node]
    except KeyError:
        raise KeyError(f"unknown node {node!r}") from None
    g = snap.nodes[goal]
    return math.hypot(n.x - g.x, n.y - g.y) / snap.v_max


def comfort_heuristic(field_or_snap, node: str) -> float:
    h2 = field_or_snap.h2_by_node if hasattr(field_or_snap, "h2_by_node") else field_or_snap.h2
    return h2.get(node, 0.0)


def safety_heuristic(field_or_snap, node: str) -> float:
    h3 = field_or_snap.h3_by_node if hasattr(field_or_snap, "h3_by_node") else field_or_snap.h3
    return h3.get(node, 0.0)


def combined_f(g: float, h1: float, h2: float, h3: float, w: HeuristicWeights) -> float:
    for name, v in (("g", g), ("h1", h1), ("h2", h2), ("h3", h3)):
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v}")
    return w.w_g * g + w.w1 * h1 + w.w2 * h2 + w.w3 * h3


def ingest_observations(graph, field: HeuristicField, batch: list[Observation]) -> None:
    """Fuse shared traversal observations into the overlay and comfort field.

    Exponential moving average with the field's alpha; congestion never drops
    below free flow. Processing order is (at_time, edge_id, reporter) so the
    result is independent of queue arrival order.
    """
    alpha = field.smoothing_alpha
    for obs in sorted(batch, key=lambda o: (o.at_time, o.edge_id, o.reporter)):
        edge = graph.edges.get(obs.edge_id)
        if edge is None:
            raise KeyError(f"observation for unknown edge {obs.edge_id!r}")
        ratio = obs.observed_travel_time / edge.base_time_s
        old_factor = graph.congestion[obs.edge_id]
        graph.congestion[obs.edge_id] = max(
            1.0, (1 - alpha) * old_factor + alpha * ratio
        )
        old_pen = graph.comfort[obs.edge_id]
        graph.comfort[obs.edge_id] = (1 - alpha) * old_pen + alpha * obs.observed_comfort
        head = edge.to_node
        old_h2 = field.h2_by_node.get(head, 0.0)
        field.h2_by_node[head] = (1 - alpha) * old_h2 + alpha * obs.observed_comfort


def adapt_weights(base: HeuristicWeights, ctx: ContextFlags) -> HeuristicWeights:
    """Scale heuristic coefficients from context flags.

    Fixed multiplier table, composed multiplicatively so the result does not
    depend on flag order. w_g and the safety weight are never touched.
    """
    w1, w2 = base.w1, base.w2
    if ctx.passenger_prefers_comfort:
        w2 *= 2.0
    if ctx.rough_road_reported:
        w2 *= 1.5
    if ctx.heavy_traffic_reported:
        w1 *= 1.5
    if w1 == base.w1 and w2 == base.w2:
        return base
    return replace(base, w1=w1, w2=w2)
