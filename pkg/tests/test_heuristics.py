import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynroute import (
    ContextFlags,
    HeuristicField,
    HeuristicWeights,
    Observation,
    adapt_weights,
    combined_f,
    comfort_heuristic,
    ingest_observations,
    make_grid,
    safety_heuristic,
    time_heuristic,
)
from conftest import build_graph, enumerate_min_travel, snap_of


class TestTimeHeuristic:
    def test_three_four_five_triangle(self):
        # two edges pin v_max to 10 m/s
        g = build_graph(
            [("a", 0.0, 0.0), ("b", 300.0, 400.0)],
            [("e1", "a", "b", 500.0, 50.0), ("e2", "b", "a", 500.0, 50.0)],
        )
        snap = snap_of(g)
        assert time_heuristic(snap, "a", "b") == pytest.approx(50.0)

    def test_zero_at_goal(self):
        g = make_grid(2, 2, 100.0, 10.0)
        snap = snap_of(g)
        assert time_heuristic(snap, "n00_00", "n00_00") == 0.0

    def test_corner_to_corner_bound_on_grid(self):
        g = make_grid(3, 3, 100.0, 10.0)
        snap = snap_of(g)
        h = time_heuristic(snap, "n00_00", "n02_02")
        assert h == pytest.approx(100.0 * math.sqrt(8) / 10.0)
        assert h <= enumerate_min_travel(snap, "n00_00", "n02_02") == 40.0

    def test_unknown_node(self):
        snap = snap_of(make_grid(1, 2, 100.0, 10.0))
        with pytest.raises(KeyError):
            time_heuristic(snap, "zz", "n00_00")

    def test_admissible_on_congested_grids(self):
        rng = random.Random(7)
        for _ in range(10):
            g = make_grid(rng.randint(2, 4), rng.randint(2, 4), 100.0, 10.0)
            for eid in g.edges:
                if rng.random() < 0.5:
                    g.congestion[eid] = rng.uniform(1.0, 5.0)
            snap = snap_of(g)
            ids = sorted(g.nodes)
            for start in ids:
                for goal in ids:
                    true = enumerate_min_travel(snap, start, goal)
                    assert time_heuristic(snap, start, goal) <= true + 1e-9

    def test_consistent_across_edges(self):
        g = make_grid(3, 3, 100.0, 10.0)
        snap = snap_of(g)
        for goal in sorted(g.nodes):
            for e in g.edges.values():
                hu = time_heuristic(snap, e.from_node, goal)
                hv = time_heuristic(snap, e.to_node, goal)
                assert hu <= e.base_time_s + hv + 1e-9


class TestLookups:
    def test_comfort_lookup_and_default(self):
        fld = HeuristicField(h2_by_node={"a": 4.0})
        assert comfort_heuristic(fld, "a") == 4.0
        assert comfort_heuristic(fld, "missing") == 0.0

    def test_safety_lookup_and_default(self):
        fld = HeuristicField(h3_by_node={"a": 1.0})
        assert safety_heuristic(fld, "a") == 1.0
        assert safety_heuristic(fld, "missing") == 0.0

    def test_lookups_work_on_snapshots(self):
        g = make_grid(1, 2, 100.0, 10.0)
        snap = snap_of(g, h2={"n00_01": 7.5}, h3={"n00_00": 2.0})
        assert comfort_heuristic(snap, "n00_01") == 7.5
        assert safety_heuristic(snap, "n00_00") == 2.0


class TestCombinedF:
    def test_unit_weights_sum(self):
        assert combined_f(5, 2, 1, 0.5, HeuristicWeights(1, 1, 1, 1)) == 8.5

    def test_pure_path_cost(self):
        assert combined_f(5, 2, 1, 0.5, HeuristicWeights(1, 0, 0, 0)) == 5.0

    def test_mixed_weights(self):
        assert combined_f(10, 4, 2, 1, HeuristicWeights(1, 2, 0.5, 3)) == 22.0

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            combined_f(math.inf, 0, 0, 0, HeuristicWeights())

    @settings(max_examples=100, deadline=None)
    @given(
        g=st.floats(0, 1e4), h1=st.floats(0, 1e4), h2=st.floats(0, 1e4),
        h3=st.floats(0, 1e4), scale=st.floats(0.01, 100.0),
    )
    def test_linear_in_weights(self, g, h1, h2, h3, scale):
        w = HeuristicWeights(1.0, 2.0, 0.5, 3.0)
        sw = HeuristicWeights(scale * w.w_g, scale * w.w1, scale * w.w2, scale * w.w3)
        assert combined_f(g, h1, h2, h3, sw) == pytest.approx(
            scale * combined_f(g, h1, h2, h3, w)
        )

    def test_invalid_weights_rejected(self):
        with pytest.raises(ValueError):
            HeuristicWeights(0.0, 1, 1, 1)
        with pytest.raises(ValueError):
            HeuristicWeights(1.0, -1, 1, 1)


def _line_graph(alpha=1.0):
    g = build_graph(
        [("a", 0.0, 0.0), ("b", 100.0, 0.0)],
        [("e1", "a", "b", 100.0, 10.0)],
    )
    return g, HeuristicField(smoothing_alpha=alpha)


def _obs(tt, comfort=0.0, reporter="v1", t=0.0):
    return Observation("e1", tt, comfort, reporter, t)


class TestIngestObservations:
    def test_full_replacement_at_alpha_one(self):
        g, fld = _line_graph(1.0)
        ingest_observations(g, fld, [_obs(15.0)])
        assert g.congestion["e1"] == pytest.approx(1.5)

    def test_half_alpha_moving_average(self):
        g, fld = _line_graph(0.5)
        ingest_observations(g, fld, [_obs(20.0)])
        assert g.congestion["e1"] == pytest.approx(1.5)

    def test_clamped_at_free_flow(self):
        g, fld = _line_graph(1.0)
        ingest_observations(g, fld, [_obs(5.0)])
        assert g.congestion["e1"] == 1.0

    def test_comfort_flows_to_head_node(self):
        g, fld = _line_graph(1.0)
        ingest_observations(g, fld, [_obs(10.0, comfort=3.0)])
        assert g.comfort["e1"] == pytest.approx(3.0)
        assert fld.h2_by_node["b"] == pytest.approx(3.0)

    def test_idempotent_at_alpha_one(self):
        g, fld = _line_graph(1.0)
        batch = [_obs(18.0, comfort=2.0)]
        ingest_observations(g, fld, batch)
        state = (dict(g.congestion), dict(g.comfort), dict(fld.h2_by_node))
        ingest_observations(g, fld, batch)
        assert (dict(g.congestion), dict(g.comfort), dict(fld.h2_by_node)) == state

    def test_order_independent_processing(self):
        batch = [_obs(20.0, t=5.0, reporter="b"), _obs(12.0, t=1.0, reporter="a")]
        g1, f1 = _line_graph(0.5)
        ingest_observations(g1, f1, batch)
        g2, f2 = _line_graph(0.5)
        ingest_observations(g2, f2, list(reversed(batch)))
        assert g1.congestion == g2.congestion

    def test_unknown_edge_rejected(self):
        g, fld = _line_graph()
        with pytest.raises(KeyError, match="e9"):
            ingest_observations(g, fld, [Observation("e9", 10.0, 0.0, "v", 0.0)])

    def test_h3_untouched(self):
        g = build_graph(
            [("a", 0.0, 0.0), ("b", 100.0, 0.0)],
            [("e1", "a", "b", 100.0, 10.0)],
        )
        fld = HeuristicField(h3_by_node={"b": 9.0}, smoothing_alpha=1.0)
        ingest_observations(g, fld, [_obs(30.0, comfort=5.0)])
        assert fld.h3_by_node["b"] == 9.0


class TestAdaptWeights:
    def test_no_flags_identity(self):
        base = HeuristicWeights(1, 1, 1, 1)
        assert adapt_weights(base, ContextFlags()) is base

    def test_comfort_and_rough_compose(self):
        out = adapt_weights(
            HeuristicWeights(1, 1, 1, 1),
            ContextFlags(passenger_prefers_comfort=True, rough_road_reported=True),
        )
        assert out.w2 == pytest.approx(3.0)
        assert (out.w_g, out.w1, out.w3) == (1, 1, 1)

    def test_heavy_traffic_scales_time_weight(self):
        out = adapt_weights(
            HeuristicWeights(1, 1, 1, 1), ContextFlags(heavy_traffic_reported=True)
        )
        assert (out.w_g, out.w1, out.w2, out.w3) == (1, 1.5, 1, 1)

    @settings(max_examples=100, deadline=None)
    @given(
        wg=st.floats(0.1, 10), w1=st.floats(0, 10), w2=st.floats(0, 10),
        w3=st.floats(0, 10), flags=st.tuples(st.booleans(), st.booleans(), st.booleans()),
    )
    def test_pure_and_preserves_wg_w3(self, wg, w1, w2, w3, flags):
        base = HeuristicWeights(wg, w1, w2, w3)
        ctx = ContextFlags(*flags)
        out1 = adapt_weights(base, ctx)
        out2 = adapt_weights(base, ctx)
        assert out1 == out2
        assert out1.w_g == base.w_g
        assert out1.w3 == base.w3
