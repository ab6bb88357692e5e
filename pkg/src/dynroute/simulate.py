"""Epoch-synchronous multi-vehicle simulation with shared observations.

Two copies of the world are kept:

* the ground truth, which all scenario events mutate and which determines
  the travel times and penalties vehicles actually experience;
* the shared belief, from which planning snapshots are taken. Broadcast
  events reach it directly; ``sensed_only`` events reach it only through
  observations reported by vehicles that traversed the affected edges.

With observation sharing disabled the belief sees broadcast events only,
which is the control condition for measuring the value of sharing.

Within an epoch every vehicle plans against one immutable snapshot and
advances through ground truth; events and observation ingestion happen
exclusively at epoch boundaries. Edge traversal cost is frozen at entry.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field, replace

from .graph import (
    GraphSnapshot,
    RoadGraph,
    Scenario,
    apply_event,
    snapshot,
)
from .heuristics import (
    ContextFlags,
    HeuristicField,
    Observation,
    adapt_weights,
    ingest_observations,
)
from .planners import (
    FOUND,
    PlanResult,
    RRTParams,
    SearchParams,
    cheapest_edge,
    dijkstra_ucs,
    dyn_a_star,
    greedy_best_first,
    replan,
    rrt_plan,
    static_a_star,
)

EN_ROUTE = "en_route"
ARRIVED = "arrived"
STRANDED = "stranded"

ALGORITHMS = ("ucs", "greedy", "astar", "rrt", "dyn_astar")

_EPS = 1e-9


@dataclass(frozen=True)
class SimConfig:
    epoch_s: float = 30.0
    hysteresis: float = 0.01
    share_observations: bool = True
    horizon_s: float = 1e6
    noise_sigma: float = 0.0
    seed: int = 0
    rrt: RRTParams = field(default_factory=RRTParams)

    def __post_init__(self) -> None:
        if self.epoch_s <= 0:
            raise ValueError("epoch_s must be > 0")
        if self.horizon_s <= 0:
            raise ValueError("horizon_s must be > 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass
class VehicleState:
    id: str
    start: str
    goal: str
    depart_s: float
    params: SearchParams
    status: str = EN_ROUTE
    departed: bool = False
    at_node: str | None = None
    edge_id: str | None = None
    edge_head: str | None = None
    edge_total_s: float = 0.0
    edge_remaining_s: float = 0.0
    edge_comfort: float = 0.0
    plan_nodes: list[str] = field(default_factory=list)
    has_plan: bool = False
    plan_unreachable: bool = False
    realized_cost: float = 0.0
    replans: int = 0
    expanded: int = 0
    path_taken: list[str] = field(default_factory=list)
    arrival_s: float | None = None

    @property
    def position_on_edge(self) -> float:
        if self.edge_id is None or self.edge_total_s <= 0:
            return 0.0
        return 1.0 - self.edge_remaining_s / self.edge_total_s


@dataclass(frozen=True)
class EpochRecord:
    t_s: float
    events_applied: tuple[dict, ...]
    observations_ingested: int


@dataclass(frozen=True)
class SimulationTrace:
    scenario_name: str
    algorithm: str
    seed: int
    config: dict
    vehicles: tuple[dict, ...]
    epochs: tuple[EpochRecord, ...]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario_name,
            "algorithm": self.algorithm,
            "seed": self.seed,
            "config": self.config,
            "vehicles": list(self.vehicles),
            "epochs": [
                {
                    "t_s": ep.t_s,
                    "events_applied": list(ep.events_applied),
                    "observations_ingested": ep.observations_ingested,
                }
                for ep in self.epochs
            ],
        }


class Simulation:
    """One run of a scenario under one routing algorithm."""

    def __init__(self, scenario: Scenario, config: SimConfig, algorithm: str = "dyn_astar"):
        if algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
        self.scenario = scenario
        self.config = config
        self.algorithm = algorithm
        self.truth_graph: RoadGraph = scenario.graph.copy()
        self.truth_field: HeuristicField = scenario.initial_field.copy()
        self.belief_graph: RoadGraph = scenario.graph.copy()
        self.belief_field: HeuristicField = scenario.initial_field.copy()
        self.epoch_index = 0
        self.event_idx = 0
        self.obs_queue: list[Observation] = []
        self.epoch_log: list[EpochRecord] = []
        self._noise_rng = random.Random(config.seed)
        self.vehicles: list[VehicleState] = []
        for i, q in enumerate(sorted(scenario.queries, key=lambda q: q.vehicle)):
            ctx = ContextFlags(
                passenger_prefers_comfort=q.prefers_comfort,
                rough_road_reported=q.rough_road,
                heavy_traffic_reported=q.heavy_traffic,
            )
            params = SearchParams(
                weights=adapt_weights(q.weights, ctx),
                rng_seed=scenario.seed * 1000 + i,
                rrt=config.rrt,
            )
            self.vehicles.append(
                VehicleState(id=q.vehicle, start=q.start, goal=q.goal,
                             depart_s=q.depart_s, params=params)
            )

    # -- epoch machinery ----------------------------------------------------

    @property
    def now(self) -> float:
        return self.epoch_index * self.config.epoch_s

    def done(self) -> bool:
        return all(v.status != EN_ROUTE for v in self.vehicles)

    def step_epoch(self) -> None:
        t = self.now
        applied: list[dict] = []
        events = self.scenario.events
        while self.event_idx < len(events) and events[self.event_idx].at_time <= t + _EPS:
            ev = events[self.event_idx]
            apply_event(self.truth_graph, self.truth_field, ev)
            if not ev.sensed_only:
                apply_event(self.belief_graph, self.belief_field, ev)
            applied.append(
                {"t_s": ev.at_time, "kind": ev.kind, "target": ev.target,
                 "value": ev.value, "sensed_only": ev.sensed_only}
            )
            self.event_idx += 1

        ingested = 0
        if self.config.share_observations and self.obs_queue:
            ingest_observations(self.belief_graph, self.belief_field, self.obs_queue)
            ingested = len(self.obs_queue)
        self.obs_queue.clear()

        snap = snapshot(self.belief_graph, self.belief_field, t)
        for v in self.vehicles:
            self._plan_vehicle(v, snap, t)
        for v in self.vehicles:
            self._advance(v, t)

        self.epoch_log.append(EpochRecord(t, tuple(applied), ingested))
        self.epoch_index += 1

    def run(self) -> SimulationTrace:
        while not self.done() and self.now < self.config.horizon_s - _EPS:
            self.step_epoch()
        for v in self.vehicles:
            if v.status == EN_ROUTE:
                v.status = STRANDED
        return self._trace()

    # -- planning -----------------------------------------------------------

    def _plan_vehicle(self, v: VehicleState, snap: GraphSnapshot, t: float) -> None:
        if v.status != EN_ROUTE:
            return
        departs_this_epoch = v.depart_s < t + self.config.epoch_s - _EPS
        if not (v.departed or departs_this_epoch):
            return
        if self.algorithm != "dyn_astar" and v.has_plan:
            return

        origin = v.at_node if v.at_node is not None else v.edge_head
        if origin is None:
            origin = v.start

        if self.algorithm == "dyn_astar":
            if v.has_plan and v.plan_nodes and v.plan_nodes[0] == origin:
                prior = PlanResult(
                    path=tuple(v.plan_nodes), g_cost=0.0, f_cost_at_goal=0.0,
                    expanded=0, status=FOUND,
                )
                result = replan(prior, snap, origin, v.goal, v.params,
                                self.config.hysteresis)
            else:
                result = dyn_a_star(snap, origin, v.goal, v.params)
            v.replans += 1
        else:
            planner = {
                "ucs": lambda: dijkstra_ucs(snap, origin, v.goal),
                "greedy": lambda: greedy_best_first(snap, origin, v.goal),
                "astar": lambda: static_a_star(snap, origin, v.goal),
                "rrt": lambda: rrt_plan(snap, origin, v.goal, v.params),
            }[self.algorithm]
            result = planner()

        v.expanded += result.expanded
        v.has_plan = True
        if result.status != FOUND:
            v.plan_nodes = []
            v.plan_unreachable = True
            if v.at_node is not None:
                v.status = STRANDED
        else:
            v.plan_nodes = list(result.path)
            v.plan_unreachable = False

    # -- movement through ground truth ---------------------------------------

    def _truth_penalty(self, node: str) -> float:
        return self.truth_field.h2_by_node.get(node, 0.0) + self.truth_field.h3_by_node.get(node, 0.0)

    def _arrive_at_node(self, v: VehicleState, node: str, now: float) -> None:
        v.at_node = node
        v.path_taken.append(node)
        v.realized_cost += self._truth_penalty(node)
        if node == v.goal:
            v.status = ARRIVED
            v.arrival_s = now
        elif v.plan_unreachable:
            v.status = STRANDED

    def _advance(self, v: VehicleState, t: float) -> None:
        if v.status != EN_ROUTE:
            return
        end = t + self.config.epoch_s
        now = t
        if not v.departed:
            if v.depart_s >= end - _EPS:
                return
            now = max(now, v.depart_s)
            v.departed = True
            v.at_node = v.start
            v.path_taken.append(v.start)
            if v.start == v.goal:
                v.status = ARRIVED
                v.arrival_s = now
                return
            if v.plan_unreachable:
                v.status = STRANDED
                return

        while v.status == EN_ROUTE and now < end - _EPS:
            if v.at_node is not None:
                if len(v.plan_nodes) < 2 or v.plan_nodes[0] != v.at_node:
                    # No usable route forward; wait for the next replanning
                    # epoch if replanning is possible, otherwise strand.
                    if self.algorithm != "dyn_astar":
                        v.status = STRANDED
                    return
                nxt = v.plan_nodes[1]
                truth_snap_edge = self._truth_edge(v.at_node, nxt)
                if truth_snap_edge is None:
                    v.status = STRANDED
                    return
                eid, eff = truth_snap_edge
                v.edge_id = eid
                v.edge_head = nxt
                v.edge_total_s = eff
                v.edge_remaining_s = eff
                v.edge_comfort = self.truth_graph.comfort[eid]
                v.at_node = None
                v.plan_nodes.pop(0)
            else:
                step = min(v.edge_remaining_s, end - now)
                v.edge_remaining_s -= step
                v.realized_cost += step
                now += step
                if v.edge_remaining_s <= _EPS:
                    self._emit_observation(v, now)
                    head = v.edge_head
                    assert head is not None
                    v.edge_id = None
                    v.edge_head = None
                    self._arrive_at_node(v, head, now)

    def _truth_edge(self, u: str, nxt: str) -> tuple[str, float] | None:
        best = None
        for eid in self.truth_graph.adjacency[u]:
            if eid in self.truth_graph.blocked:
                continue
            e = self.truth_graph.edges[eid]
            if e.to_node != nxt:
                continue
            eff = e.base_time_s * self.truth_graph.congestion[eid]
            if best is None or eff < best[1]:
                best = (eid, eff)
        return best

    def _emit_observation(self, v: VehicleState, now: float) -> None:
        assert v.edge_id is not None
        observed_time = v.edge_total_s
        observed_comfort = v.edge_comfort
        if self.config.noise_sigma > 0:
            observed_time = max(_EPS, observed_time + self._noise_rng.gauss(0, self.config.noise_sigma))
            observed_comfort = max(0.0, observed_comfort + self._noise_rng.gauss(0, self.config.noise_sigma))
        self.obs_queue.append(
            Observation(
                edge_id=v.edge_id,
                observed_travel_time=observed_time,
                observed_comfort=observed_comfort,
                reporter=v.id,
                at_time=now,
            )
        )

    # -- output ---------------------------------------------------------------

    def _trace(self) -> SimulationTrace:
        vehicles = tuple(
            {
                "vehicle": v.id,
                "status": v.status,
                "realized_cost_s": round(v.realized_cost, 9),
                "arrival_s": None if v.arrival_s is None else round(v.arrival_s, 9),
                "replans": v.replans,
                "expanded": v.expanded,
                "path": list(v.path_taken),
            }
            for v in self.vehicles
        )
        cfg = self.config
        return SimulationTrace(
            scenario_name=self.scenario.name,
            algorithm=self.algorithm,
            seed=self.scenario.seed,
            config={
                "epoch_s": cfg.epoch_s,
                "alpha": self.scenario.alpha,
                "hysteresis": cfg.hysteresis,
                "share_observations": cfg.share_observations,
                "horizon_s": cfg.horizon_s,
                "noise_sigma": cfg.noise_sigma,
                "seed": cfg.seed,
            },
            vehicles=vehicles,
            epochs=tuple(self.epoch_log),
        )


def run_simulation(
    scenario: Scenario, config: SimConfig | None = None, algorithm: str = "dyn_astar"
) -> SimulationTrace:
    sim = Simulation(scenario, config or SimConfig(), algorithm)
    return sim.run()


def step_epoch(sim: Simulation) -> Simulation:
    """Advance one epoch; run_simulation is this iterated to quiescence."""
    sim.step_epoch()
    return sim


def collect_observation(
    vehicle_id: str, edge_id: str, effective_time_s: float, comfort_penalty: float, at_time: float
) -> Observation:
    """Observation a vehicle files after completing an edge traversal."""
    return Observation(
        edge_id=edge_id,
        observed_travel_time=effective_time_s,
        observed_comfort=comfort_penalty,
        reporter=vehicle_id,
        at_time=at_time,
    )


# ---------------------------------------------------------------------------
# Ground-truth timeline, shared with the offline oracle and trace replay
# ---------------------------------------------------------------------------


class TruthTimeline:
    """Piecewise-constant ground-truth state per simulation epoch.

    An event at time t takes effect at the first epoch boundary >= t,
    matching the simulator's event application rule exactly.
    """

    def __init__(self, scenario: Scenario, epoch_s: float):
        self.epoch_s = epoch_s
        graph = scenario.graph.copy()
        fld = scenario.initial_field.copy()
        self._starts: list[int] = [0]
        self._snaps: list[GraphSnapshot] = [snapshot(graph, fld, 0.0)]
        for ev in scenario.events:
            k = max(0, math.ceil(ev.at_time / epoch_s - 1e-12))
            apply_event(graph, fld, ev)
            snap = snapshot(graph, fld, k * epoch_s)
            if k == self._starts[-1]:
                self._snaps[-1] = snap
            else:
                self._starts.append(k)
                self._snaps.append(snap)

    def epoch_of(self, time: float) -> int:
        return max(0, int(math.floor(time / self.epoch_s + 1e-12)))

    def at_epoch(self, k: int) -> GraphSnapshot:
        i = bisect.bisect_right(self._starts, k) - 1
        return self._snaps[i]

    def at_time(self, time: float) -> GraphSnapshot:
        return self.at_epoch(self.epoch_of(time))


def replay_realized_cost(
    scenario: Scenario, config: SimConfig, vehicle: str, path: list[str], depart_s: float
) -> float:
    """Recompute a vehicle's realized cost from its recorded path alone.

    Follows the path through the ground-truth timeline with the same
    frozen-at-entry cost rule; a trace is replayable iff this matches.
    """
    timeline = TruthTimeline(scenario, config.epoch_s)
    now = depart_s
    cost = 0.0
    for u, v in zip(path, path[1:]):
        snap = timeline.at_time(now)
        edge = cheapest_edge(snap, u, v)
        if edge is None:
            raise ValueError(f"replay: no unblocked edge {u!r} -> {v!r} at t={now}")
        now += edge[1]
        cost += edge[1]
        arrival_snap = timeline.at_time(now)
        cost += arrival_snap.node_penalty(v)
    return cost
