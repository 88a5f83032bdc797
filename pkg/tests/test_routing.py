import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from uavnet.oracles import bfs_shortest_path, geometric_adjacency, link_lifetime_bruteforce
from uavnet.routing import (DsdvEntry, QTable, Snapshot, dsdv_handle_link_break, dsdv_process_update,
                            greedy_next_hop, link_lifetime, opar_compute_path, q_routing_select,
                            q_routing_update)
from uavnet.routing.base import NeighborTable
from uavnet.routing.dsdv import UNREACHABLE
from conftest import static_pair

Z = (0.0, 0.0, 0.0)
R = 249.1


# -- greedy ------------------------------------------------------------------

def test_greedy_destination_neighbor_wins():
    d = greedy_next_hop((0, 0, 0), {5: (10, 0, 0), 9: (200, 0, 0)}, 9, (200, 0, 0))
    assert d.next_hop == 9


def test_greedy_picks_closest_to_destination():
    dst = (300.0, 0.0, 0.0)
    me = (180.0, 0.0, 0.0)              # 120 m from dst
    nbrs = {1: (150.0, 0.0, 0.0),       # 150 m from dst
            2: (210.0, 0.0, 0.0)}       # 90 m from dst
    assert greedy_next_hop(me, nbrs, 7, dst).next_hop == 2


def test_greedy_local_minimum():
    d = greedy_next_hop((100, 0, 0), {1: (0, 0, 0), 2: (50, 50, 0)}, 7, (200, 0, 0))
    assert d.next_hop is None and d.reason == "local_minimum"


def test_greedy_tie_goes_to_lowest_id():
    nbrs = {4: (50, 10, 0), 3: (50, -10, 0)}
    assert greedy_next_hop((0, 0, 0), nbrs, 9, (100, 0, 0)).next_hop == 3


# -- DSDV --------------------------------------------------------------------

def test_dsdv_adopts_into_empty_table():
    t = {}
    delta, bad = dsdv_process_update(t, [(4, 1, 100)], sender=2)
    assert bad == 0
    assert (t[4].next_hop, t[4].hop_metric, t[4].sequence_number) == (2, 2, 100)
    assert set(delta) == {4}


def test_dsdv_equal_seq_better_metric():
    t = {4: DsdvEntry(4, 9, 3, 100)}
    dsdv_process_update(t, [(4, 1, 100)], sender=2)
    assert (t[4].next_hop, t[4].hop_metric) == (2, 2)


def test_dsdv_stale_seq_ignored():
    t = {4: DsdvEntry(4, 9, 2, 102)}
    delta, _ = dsdv_process_update(t, [(4, 1, 100)], sender=2)
    assert delta == {} and t[4].next_hop == 9


def test_dsdv_link_break_and_restore():
    t = {4: DsdvEntry(4, 7, 2, 100), 5: DsdvEntry(5, 8, 1, 40)}
    delta = dsdv_handle_link_break(t, 7)
    assert set(delta) == {4}
    assert t[4].hop_metric == UNREACHABLE and t[4].sequence_number == 101
    assert dsdv_handle_link_break(t, 99) == {}
    dsdv_process_update(t, [(4, 3, 102)], sender=8)
    assert t[4].reachable and t[4].next_hop == 8 and t[4].sequence_number == 102


def test_dsdv_broken_route_propagates_unreachable():
    t = {4: DsdvEntry(4, 2, 2, 100)}
    dsdv_process_update(t, [(4, UNREACHABLE, 101)], sender=2)
    assert not t[4].reachable and t[4].sequence_number == 101


def test_dsdv_malformed_items_are_counted():
    t = {}
    _, bad = dsdv_process_update(t, [(1, 1, 2), "junk", (2, -1, 4), (3, 1.5, 2), (4, 1, -2)], sender=0)
    assert bad == 4 and set(t) == {1}


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.sampled_from([0, 1, 2, 3, UNREACHABLE]),
                          st.integers(0, 40), st.integers(0, 3)), max_size=40))
def test_dsdv_sequence_numbers_never_go_back(updates):
    t = {}
    last = {}
    for dst, metric, seq, sender in updates:
        if sender == 3:
            dsdv_handle_link_break(t, dst % 3)
        else:
            dsdv_process_update(t, [(dst, metric, seq)], sender=sender, self_id=99)
        for d, e in t.items():
            assert e.sequence_number >= last.get(d, -1)
            last[d] = e.sequence_number


# -- link lifetime / OPAR ----------------------------------------------------

def test_lifetime_examples():
    v = (3.0, 1.0, 0.0)
    assert link_lifetime(Z, v, (100, 0, 0), v, R) == math.inf
    # 200 m apart, separating head-on at 10 m/s total, 49 m of slack to 249
    assert link_lifetime(Z, (-5, 0, 0), (200, 0, 0), (5, 0, 0), 249.0) == pytest.approx(4.9)
    assert link_lifetime(Z, (-5, 0, 0), (249, 0, 0), (5, 0, 0), 249.0) == 0.0


vec = st.tuples(*[st.floats(-20, 20, allow_nan=False)] * 3)
pos = st.tuples(*[st.floats(-150, 150, allow_nan=False)] * 3)


@settings(max_examples=100, deadline=None)
@given(pos, vec, vec)
def test_lifetime_matches_bruteforce(p, vi, vj):
    if math.dist(p, Z) >= 240:
        return
    got = link_lifetime(Z, vi, p, vj, 249.0)
    ref = link_lifetime_bruteforce(Z, vi, p, vj, 249.0, horizon=200.0)
    if math.isinf(ref):
        assert got > 199.0
    else:
        assert got == pytest.approx(ref, abs=2e-3)


def still(n):
    return [Z] * n


def test_opar_chain():
    snap = Snapshot([(0, 0, 0), (200, 0, 0), (400, 0, 0)], still(3), R)
    assert opar_compute_path(snap, 0, 2) == [0, 1, 2]


def test_opar_prefers_fewer_hops():
    pts = [(0, 0, 0), (200, 0, 0), (400, 0, 0),            # 2-hop route via 1
           (120, 150, 0), (240, 190, 0), (360, 150, 0)]     # 3-hop detour via 3, 4, 5
    snap = Snapshot(pts, still(6), R)
    assert opar_compute_path(snap, 0, 2) == [0, 1, 2]


def test_opar_avoids_link_about_to_break():
    # 0-1-2 is the 2-hop route; relay 1 flies off along -x so the 1-2 link
    # (200 m, 49.1 m of slack) dies in 10 ms. 0-3-4-2 is a stable 3-hop detour.
    pts = [(0, 0, 0), (200, 0, 0), (400, 0, 0), (130, 150, 0), (270, 150, 0)]
    vel = still(5)
    vel[1] = (-4910.0, 0.0, 0.0)
    assert link_lifetime(pts[1], vel[1], pts[2], vel[2], R) == pytest.approx(0.01, abs=1e-4)
    snap = Snapshot(pts, vel, R)
    assert opar_compute_path(snap, 0, 2, hop_time=0.05) == [0, 3, 4, 2]
    # with a loose traversal estimate the short route is fine again
    assert opar_compute_path(snap, 0, 2, hop_time=0.001) == [0, 1, 2]


def test_opar_disconnected():
    snap = Snapshot([(0, 0, 0), (500, 0, 0)], still(2), R)
    assert opar_compute_path(snap, 0, 1) is None


def test_opar_matches_bfs_on_random_graphs():
    rng = random.Random(5)
    checked = 0
    for _ in range(120):
        pts = [(rng.uniform(0, 600), rng.uniform(0, 600), rng.uniform(0, 100)) for _ in range(15)]
        snap = Snapshot(pts, still(15), R)
        adj = geometric_adjacency(pts, R)
        s, d = rng.sample(range(15), 2)
        path = opar_compute_path(snap, s, d)
        ref = bfs_shortest_path(adj, s, d)
        if ref is None:
            assert path is None
        else:
            assert len(path) - 1 == ref
            checked += 1
    assert checked > 50


# -- Q-routing ---------------------------------------------------------------

def test_q_select_argmin_and_tie():
    q = QTable()
    q.q[9] = {1: 0.4, 2: 0.2}
    assert q_routing_select(q, 9, [1, 2], random.Random(0), 0.0).next_hop == 2
    q.q[9] = {7: 0.3, 4: 0.3}
    assert q_routing_select(q, 9, [7, 4], random.Random(0), 0.0).next_hop == 4
    assert q_routing_select(q, 9, [], random.Random(0), 0.0).reason == "no_route"


def test_q_select_explores_uniformly():
    from uavnet.oracles import chi_square_uniform
    q = QTable()
    q.q[9] = {1: 0.0, 2: 5.0, 3: 5.0, 4: 5.0}
    rng = random.Random(1)
    counts = {n: 0 for n in (1, 2, 3, 4)}
    for _ in range(10_000):
        counts[q_routing_select(q, 9, [1, 2, 3, 4], rng, 1.0).next_hop] += 1
    assert chi_square_uniform(list(counts.values())) > 0.01


def test_q_update_rules():
    q = QTable(learning_rate=1.0)
    q_routing_update(q, 9, 3, 0.2, 0.5)
    assert q.get(9, 3) == pytest.approx(0.7)
    q2 = QTable(learning_rate=0.1)
    q2.q[9][3] = 1.0
    q_routing_update(q2, 9, 3, 0.25, 0.25)
    assert q2.get(9, 3) == pytest.approx(0.95)
    q3 = QTable(learning_rate=1.0)
    q_routing_update(q3, 9, 9, 0.1, 123.0)
    assert q3.get(9, 9) == pytest.approx(0.1)


def test_q_converges_on_a_static_line():
    # A -> B -> C with deterministic per-hop delays 0.01 s and 0.02 s
    qa, qb = QTable(0.5), QTable(0.5)
    for _ in range(60):
        q_routing_update(qb, "C", "C", 0.02, 0.0)
        q_routing_update(qa, "C", "B", 0.01, qb.best("C", ["C"]))
    assert qa.get("C", "B") == pytest.approx(0.03, rel=0.01)


# -- neighbor table / hello --------------------------------------------------

def test_neighbor_expiry():
    t = NeighborTable(ttl=100)
    t.upsert(3, 0, (1, 2, 3))
    assert 3 in t.current(100)
    assert t.expire(101) == [3] and len(t) == 0


@pytest.mark.parametrize("dist,expect", [(150.0, True), (400.0, False)])
def test_hellos_fill_neighbor_tables(dist, expect):
    sim = static_pair(dist, routing="greedy", duration=1.0)
    sim.run()
    assert (1 in sim.uavs[0].neighbors) is expect
    assert (0 in sim.uavs[1].neighbors) is expect


def test_silent_neighbor_is_evicted():
    sim = static_pair(150.0, routing="greedy", duration=1.0)
    sim.run()
    sim.uavs[1].die()
    sim.kernel.run_until(sim.kernel.now() + 2_000_000_000)
    sim.uavs[0].routing.current_neighbors()
    assert 1 not in sim.uavs[0].neighbors
