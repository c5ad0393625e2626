import pytest

from meshflood.errors import SizeLimitError, StaleAssignmentError
from meshflood.fixtures import (
    FIG3_CLIENTS,
    FIG3_ROUTERS,
    complete_topology,
    fig3_topology,
    grid_topology,
    path_topology,
    random_connected_topology,
)
from meshflood.relays import (
    brute_force_min_relays,
    cardinality_report,
    coverage_check,
    dump_relays,
    select_relays,
    two_hop_pairs,
)
from meshflood.topology import MobilityStep, Node, Role, build_topology, reconfigure


def star_topology(leaves=4):
    nodes = [Node(0, Role.SOURCE, (250.0, 250.0))]
    spots = [(250.0, 330.0), (250.0, 170.0), (330.0, 250.0), (170.0, 250.0)]
    for i in range(leaves):
        nodes.append(Node(i + 1, Role.CLIENT, spots[i]))
    return build_topology(nodes, 100.0)


class TestSelectRelays:
    def test_path_selects_the_bridge(self):
        t = path_topology(3)
        a = select_relays(t)
        assert a.relays == (1,)
        assert a.covered_pairs == frozenset({(0, 2)})

    def test_complete_graph_selects_nothing(self):
        a = select_relays(complete_topology(4))
        assert a.relays == ()
        assert a.covered_pairs == frozenset()

    def test_fig3_selects_exactly_the_routers(self):
        t = fig3_topology()
        a = select_relays(t)
        assert a.relays == FIG3_ROUTERS
        assert not set(FIG3_CLIENTS) & a.relay_set
        assert 0 not in a.relay_set
        assert coverage_check(t, a.relays) == []

    def test_fig3_selectors_include_source(self):
        a = select_relays(fig3_topology())
        for router in FIG3_ROUTERS:
            assert 0 in a.selectors[router]

    def test_grid25_cover_is_valid_and_proper_subset(self):
        t = grid_topology(25)
        a = select_relays(t)
        assert coverage_check(t, a.relays) == []
        assert len(a.relays) < 25

    def test_random_topologies_always_covered(self):
        for n in (10, 20, 40):
            for seed in range(8):
                t = random_connected_topology(n, seed)
                a = select_relays(t)
                assert coverage_check(t, a.relays) == [], (n, seed)

    def test_deterministic_and_idempotent(self):
        t = random_connected_topology(20, 5)
        assert select_relays(t) == select_relays(t)

    def test_alternate_orders_still_cover(self):
        t = random_connected_topology(20, 3)
        for order in ("ascending", "descending", "degree"):
            a = select_relays(t, order)
            assert coverage_check(t, a.relays) == [], order

    def test_bridge_test_counter_bounded(self):
        for n in (10, 25, 50):
            t = random_connected_topology(n, 1)
            a = select_relays(t)
            pairs = len(two_hop_pairs(t))
            assert a.bridge_tests <= n * pairs
            assert a.bridge_tests <= n**3

    def test_disconnected_components_covered_independently(self):
        # Two separated triangles with one pendant each: pairs never span
        # components.
        nodes = [
            Node(0, Role.SOURCE, (0.0, 0.0)),
            Node(1, Role.CLIENT, (60.0, 0.0)),
            Node(2, Role.CLIENT, (30.0, 50.0)),
            Node(3, Role.CLIENT, (0.0, 100.0)),
            Node(4, Role.CLIENT, (400.0, 0.0)),
            Node(5, Role.CLIENT, (460.0, 0.0)),
        ]
        t = build_topology(nodes, 100.0)
        a = select_relays(t)
        assert coverage_check(t, a.relays) == []
        for u, w in a.covered_pairs:
            assert (u < 4) == (w < 4)


class TestCoverageCheck:
    def test_valid_cover_on_path(self):
        assert coverage_check(path_topology(3), {1}) == []

    def test_empty_relays_report_uncovered_pair_once(self):
        assert coverage_check(path_topology(3), set()) == [(0, 2)]

    def test_heuristic_cover_over_many_seeds(self):
        for seed in range(20):
            t = random_connected_topology(12, seed)
            a = select_relays(t)
            assert coverage_check(t, a.relays) == []


class TestBruteForceOracle:
    def test_path_minimum_is_the_middle(self):
        assert brute_force_min_relays(path_topology(3)) == {1}

    def test_star_minimum_is_the_center(self):
        assert brute_force_min_relays(star_topology()) == {0}

    def test_heuristic_never_beats_oracle(self):
        t = random_connected_topology(8, 11, radio_range=220.0)
        heuristic = select_relays(t)
        optimal = brute_force_min_relays(t)
        assert coverage_check(t, optimal) == []
        assert coverage_check(t, heuristic.relays) == []
        assert len(heuristic.relays) >= len(optimal)

    def test_complete_graph_needs_no_relays(self):
        assert brute_force_min_relays(complete_topology(4)) == set()

    def test_size_cap_enforced(self):
        with pytest.raises(SizeLimitError):
            brute_force_min_relays(grid_topology(25))

    def test_lexicographic_tie_break(self):
        # Square cycle: both {0, 1} and {2, 3} (among others) are minimum
        # covers; subset enumeration must return the lexicographically first.
        nodes = [
            Node(0, Role.SOURCE, (0.0, 0.0)),
            Node(1, Role.CLIENT, (90.0, 0.0)),
            Node(2, Role.CLIENT, (90.0, 90.0)),
            Node(3, Role.CLIENT, (0.0, 90.0)),
        ]
        t = build_topology(nodes, 100.0)
        assert brute_force_min_relays(t) == {0, 1}


class TestCardinalityReport:
    def test_path3(self):
        t = path_topology(3)
        report = cardinality_report(t, select_relays(t))
        assert (report.card_R, report.card_V) == (1, 3)
        assert report.cond1 and report.cond2

    def test_path5_fails_second_condition(self):
        t = path_topology(5)
        a = select_relays(t)
        assert a.relays == (1, 2, 3)
        report = cardinality_report(t, a)
        assert report.cond1
        assert not report.cond2  # 3 < 5 - 3 is false; observed, not enforced

    def test_complete_graph_both_conditions_hold(self):
        t = complete_topology(4)
        report = cardinality_report(t, select_relays(t))
        assert report.card_R == 0
        assert report.cond1 and report.cond2

    def test_stale_assignment_rejected(self):
        t = path_topology(3)
        a = select_relays(t)
        moved = reconfigure(t, MobilityStep(0.0, 500.0), seed=1)
        with pytest.raises(StaleAssignmentError):
            cardinality_report(moved, a)


class TestDumpRelays:
    def test_line_format(self):
        a = select_relays(path_topology(3))
        assert dump_relays(a) == "relay 1 selectors 0 2\n"

    def test_empty_assignment(self):
        assert dump_relays(select_relays(complete_topology(4))) == ""
