"""Generator for the bundled benchmark scenario suites.

Five scenario families exercise the qualitative differences between the
planners:

* congestion -- a fast corridor degrades mid-journey; replanners detour.
* blockage   -- a corridor edge closes mid-journey; non-replanners strand.
* comfort    -- comfort penalties appear on upcoming nodes; only the
                comfort-aware replanner routes around them.
* deceptive  -- the geometrically direct route is several times slower;
                heuristic-greedy search commits to it.
* crowdsense -- congestion visible only through traversal; a leader reports
                it and a following vehicle benefits from shared observations.

All scenarios are built on a "ladder" road layout (a fast main road with a
slower parallel service road joined by short links) or purpose-built small
graphs, sized so the offline oracle solves them instantly. Generation is a
pure function of the seed; the committed files are reproduced byte-for-byte
by ``python -m dynroute.suite``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .graph import load_scenario, make_grid, serialize_scenario

EPOCH_S = 30.0  # suite scenarios are designed against the default epoch


def _doc(name: str, seed: int, nodes, edges, queries, events=(), h2=None, h3=None, alpha=0.3):
    return {
        "meta": {"name": name, "seed": seed, "alpha": alpha},
        "nodes": nodes,
        "edges": edges,
        "heuristics": {"h2": h2 or {}, "h3": h3 or {}},
        "events": list(events),
        "queries": queries,
    }


def _node(nid, x, y):
    return {"id": nid, "x": x, "y": y}


def _edge(eid, u, v, length, base_time):
    return {"id": eid, "from": u, "to": v, "length_m": length, "base_time_s": base_time}


def _query(vehicle, start, goal, depart=0.0, weights=(1.0, 1.0, 1.0, 1.0), **context):
    wg, w1, w2, w3 = weights
    return {
        "vehicle": vehicle,
        "start": start,
        "goal": goal,
        "depart_s": depart,
        "weights": {"wg": wg, "w1": w1, "w2": w2, "w3": w3},
        "context": {
            "prefers_comfort": context.get("prefers_comfort", False),
            "rough_road": context.get("rough_road", False),
            "heavy_traffic": context.get("heavy_traffic", False),
        },
    }


def _ladder(k: int):
    """Main road a0..ak (50 s/edge) with a parallel service road (60 s/edge)
    reachable by short links from a1..a(k-1) and rejoining at ak."""
    nodes = []
    edges = []
    for i in range(k + 1):
        nodes.append(_node(f"a{i}", i * 500.0, 0.0))
    for i in range(1, k):
        nodes.append(_node(f"b{i}", i * 500.0, -300.0))
    for i in range(k):
        edges.append(_edge(f"e_a{i:02d}", f"a{i}", f"a{i+1}", 500.0, 50.0))
    for i in range(1, k):
        edges.append(_edge(f"e_r{i:02d}", f"a{i}", f"b{i}", 300.0, 30.0))
    for i in range(1, k - 1):
        edges.append(_edge(f"e_b{i:02d}", f"b{i}", f"b{i+1}", 500.0, 60.0))
    exit_len = math.hypot(500.0, 300.0)
    edges.append(_edge(f"e_x{k-1:02d}", f"b{k-1}", f"a{k}", exit_len, 60.0))
    return nodes, edges


def _onset_boundary(j: int) -> float:
    """Latest epoch boundary at or before the vehicle reaches main-road node j."""
    return 30.0 * math.floor(50.0 * j / 30.0)


def congestion_scenarios(seed: int):
    docs = []
    combos = [
        (k, j, f)
        for k in (6, 7, 8)
        for j in (2, 3, 4)
        for f in (4.0, 6.0, 10.0)
        if j <= k - 2
    ][:27]
    for idx, (k, j, f) in enumerate(combos):
        nodes, edges = _ladder(k)
        t = _onset_boundary(j)
        events = [
            {"t_s": t, "kind": "set_congestion", "target": f"e_a{i:02d}", "value": f}
            for i in range(j, k)
        ]
        name = f"congestion_k{k}_j{j}_f{int(f)}"
        docs.append(
            _doc(name, seed + idx, nodes, edges,
                 [_query("v1", "a0", f"a{k}", weights=(1, 1, 1, 0))], events)
        )
    return docs


def blockage_scenarios(seed: int):
    docs = []
    combos = [
        (k, j, reopen)
        for k in (6, 7, 8, 9)
        for j in (2, 3, 4)
        for reopen in (False, True)
        if j <= k - 2
    ][:20]
    for idx, (k, j, reopen) in enumerate(combos):
        nodes, edges = _ladder(k)
        t = _onset_boundary(j)
        events = [{"t_s": t, "kind": "block_edge", "target": f"e_a{j:02d}"}]
        if reopen:
            events.append(
                {"t_s": t + 900.0, "kind": "unblock_edge", "target": f"e_a{j:02d}"}
            )
        name = f"blockage_k{k}_j{j}_{'reopen' if reopen else 'closed'}"
        docs.append(
            _doc(name, seed + 100 + idx, nodes, edges,
                 [_query("v1", "a0", f"a{k}", weights=(1, 1, 1, 0))], events)
        )
    return docs


def comfort_scenarios(seed: int):
    docs = []
    combos = [
        (k, j, p)
        for k in (6, 7, 8)
        for j in (2, 3, 4)
        for p in (300.0, 500.0, 700.0)
        if j <= k - 3
    ][:20]
    # j <= k-3 keeps at least one penalized interior node ahead of the goal.
    for idx, (k, j, p) in enumerate(combos):
        nodes, edges = _ladder(k)
        t = _onset_boundary(j)
        events = [
            {"t_s": t, "kind": "set_node_comfort_h", "target": f"a{i}", "value": p}
            for i in range(j + 1, k)
        ]
        name = f"comfort_k{k}_j{j}_p{int(p)}"
        docs.append(
            _doc(name, seed + 200 + idx, nodes, edges,
                 [_query("v1", "a0", f"a{k}", weights=(1, 1, 1, 1),
                         prefers_comfort=True)], events)
        )
    return docs


def deceptive_scenarios(seed: int):
    docs = []
    combos = [(m, slow) for m in (4, 5, 6) for slow in (2.0, 2.5, 3.0)][:15]
    extra = [(m, slow) for m in (7, 8, 9) for slow in (2.0, 2.5)]
    combos = (combos + extra)[:15]
    for idx, (m, slow) in enumerate(combos):
        span = 1000.0
        nodes = [_node("s", 0.0, 0.0), _node("t", span, 0.0),
                 _node("u", span / 2.0, 800.0)]
        step = span / m
        for i in range(1, m):
            nodes.append(_node(f"d{i}", i * step, 0.0))
        chain = ["s"] + [f"d{i}" for i in range(1, m)] + ["t"]
        edges = []
        for i, (a, b) in enumerate(zip(chain, chain[1:])):
            edges.append(_edge(f"e_d{i:02d}", a, b, step, step / slow))
        leg = math.hypot(span / 2.0, 800.0)
        edges.append(_edge("e_u0", "s", "u", leg, 100.0))
        edges.append(_edge("e_u1", "u", "t", leg, 100.0))
        name = f"deceptive_m{m}_s{int(slow * 10)}"
        docs.append(
            _doc(name, seed + 300 + idx, nodes, edges,
                 [_query("v1", "s", "t", weights=(1, 1, 1, 1))])
        )
    return docs


def _crowdsense_doc(name: str, seed: int, factor: float, prefix: int,
                    follower_extra: int = 0, follower_depart: float = 0.0):
    """Leader is forced over a hidden congested edge and reports it; the
    follower reaches the junction after the report lands and can detour."""
    obs_t = 50.0 * prefix + 50.0 * factor
    ingest_b = math.ceil(obs_t / EPOCH_S) * EPOCH_S
    n = math.ceil((ingest_b + EPOCH_S) / 50.0) + follower_extra

    nodes = [_node("x", 0.0, 0.0), _node("y", 500.0, 0.0),
             _node("lg", 1000.0, 0.0), _node("z", 500.0, -400.0)]
    edges = [
        _edge("e_h", "x", "y", 500.0, 50.0),
        _edge("e_yg", "y", "lg", 500.0, 50.0),
        _edge("e_z0", "x", "z", math.hypot(500.0, 400.0), 60.0),
        _edge("e_z1", "z", "lg", math.hypot(500.0, 400.0), 60.0),
    ]
    for i in range(prefix):
        nodes.append(_node(f"l{i}", 0.0, 300.0 * (prefix - i)))
        dst = "x" if i == prefix - 1 else f"l{i+1}"
        edges.append(_edge(f"e_l{i:02d}", f"l{i}", dst, 300.0, 50.0))
    for i in range(n):
        nodes.append(_node(f"f{i}", -500.0 * (n - i), 0.0))
        dst = "x" if i == n - 1 else f"f{i+1}"
        edges.append(_edge(f"e_f{i:02d}", f"f{i}", dst, 500.0, 50.0))

    events = [{"t_s": 0.0, "kind": "set_congestion", "target": "e_h",
               "value": factor, "sensed_only": True}]
    queries = [
        _query("lead", "l0", "y", weights=(1, 1, 0, 0)),
        _query("tail", "f0", "lg", depart=follower_depart, weights=(1, 1, 0, 0)),
    ]
    return _doc(name, seed, nodes, edges, queries, events)


def crowdsense_scenarios(seed: int):
    docs = []
    combos = [
        (factor, prefix, extra)
        for factor in (8.0, 10.0, 12.0)
        for prefix in (1, 2, 3)
        for extra in (0, 1, 2)
    ][:20]
    for idx, (factor, prefix, extra) in enumerate(combos):
        name = f"crowdsense_f{int(factor)}_p{prefix}_e{extra}"
        docs.append(_crowdsense_doc(name, seed + 400 + idx, factor, prefix, extra))
    return docs


def static_scenarios(seed: int):
    """Zero-event sub-suite: optimal planners must score exactly 1."""
    docs = [d for d in deceptive_scenarios(seed + 500)]
    for d in docs:
        d["meta"]["name"] = "static_" + d["meta"]["name"]
    for idx, k in enumerate((5, 6, 7, 8, 9)):
        nodes, edges = _ladder(k)
        docs.append(
            _doc(f"static_ladder_k{k}", seed + 600 + idx, nodes, edges,
                 [_query("v1", "a0", f"a{k}", weights=(1, 1, 1, 1))])
        )
    return docs[:20]


def grid10_doc(seed: int):
    """10x10 grid fixture: 100 nodes, 12 timed events, one crossing query."""
    g = make_grid(10, 10, 500.0, 10.0)
    nodes = [_node(n.id, n.x, n.y) for n in sorted(g.nodes.values(), key=lambda n: n.id)]
    edges = [
        _edge(e.id, e.from_node, e.to_node, e.length_m, e.base_time_s)
        for e in sorted(g.edges.values(), key=lambda e: e.id)
    ]
    eids = sorted(g.edges)
    events = []
    for i in range(6):
        events.append(
            {"t_s": 60.0 + 60.0 * i, "kind": "set_congestion",
             "target": eids[13 + 29 * i], "value": 3.0 + i}
        )
    for i in range(3):
        events.append(
            {"t_s": 480.0 + 60.0 * i, "kind": "set_comfort",
             "target": eids[7 + 31 * i], "value": 2.0}
        )
    events.append({"t_s": 720.0, "kind": "block_edge", "target": eids[101]})
    events.append({"t_s": 900.0, "kind": "unblock_edge", "target": eids[101]})
    events.append(
        {"t_s": 960.0, "kind": "set_node_comfort_h", "target": nodes[44]["id"], "value": 30.0}
    )
    first = nodes[0]["id"]
    last = nodes[-1]["id"]
    return _doc("grid10_congestion", seed, nodes, edges,
                [_query("v1", first, last, weights=(1, 1, 1, 0))], events)


def sharing_fixture_doc(seed: int):
    """Two-vehicle observation-sharing fixture used by the acceptance suite."""
    return _crowdsense_doc("sharing_fixture", seed, factor=10.0, prefix=1)


def write_suites(root: Path, seed: int = 20240) -> dict[str, int]:
    """Write all bundled scenario files under ``root``. Returns file counts."""
    counts = {}
    suite_dir = root / "suite"
    static_dir = root / "static_suite"
    suite_dir.mkdir(parents=True, exist_ok=True)
    static_dir.mkdir(parents=True, exist_ok=True)
    suite_docs = (
        congestion_scenarios(seed)
        + blockage_scenarios(seed)
        + comfort_scenarios(seed)
        + deceptive_scenarios(seed)
        + crowdsense_scenarios(seed)
    )
    for doc in suite_docs:
        _write_doc(suite_dir / f"{doc['meta']['name']}.scn", doc)
    counts["suite"] = len(suite_docs)
    static_docs = static_scenarios(seed)
    for doc in static_docs:
        _write_doc(static_dir / f"{doc['meta']['name']}.scn", doc)
    counts["static_suite"] = len(static_docs)
    _write_doc(root / "grid10_congestion.scn", grid10_doc(seed))
    _write_doc(root / "sharing_fixture.scn", sharing_fixture_doc(seed))
    counts["fixtures"] = 2
    return counts


def _write_doc(path: Path, doc: dict) -> None:
    scn = load_scenario(json.dumps(doc))  # validate before committing
    path.write_text(serialize_scenario(scn))


def main() -> None:
    import argparse

    parser = argparse.ArgumentParser(description="regenerate the bundled scenario suites")
    parser.add_argument("--out", type=Path, default=Path("scenarios"))
    parser.add_argument("--seed", type=int, default=20240)
    args = parser.parse_args()
    counts = write_suites(args.out, args.seed)
    for k, v in sorted(counts.items()):
        print(f"{k}: {v} file(s)")


if __name__ == "__main__":
    main()
