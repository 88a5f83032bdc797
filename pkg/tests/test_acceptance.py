"""One test per acceptance criterion.

Each test prints, and records for the terminal summary, a single line
``criterion N: PASS|FAIL <details>``.
"""

import hashlib
import math
import random
import statistics

import pytest

from conftest import ACCEPTANCE_LINES, static_pair
from uavnet import Simulation, parse_config, run_scenario
from uavnet.energy import EnergyParams, comm_energy, propulsion_power
from uavnet.harness import aloha_saturation, audit_trace, compare_protocols, connectivity_experiment
from uavnet.mobility import MobilityParams, MotionState, gauss_markov_step, initial_state, random_waypoint_step
from uavnet.oracles import (bfs_shortest_path, chi_square_uniform, geometric_adjacency, poisson_band,
                            pure_aloha_success)
from uavnet.routing import Snapshot, opar_compute_path
from uavnet.geometry import Vector3

US = 1_000
VELOCITIES = [5, 10, 15, 20, 25]
SEEDS = 10


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


# -- 1 -----------------------------------------------------------------------

def test_criterion_1_single_hop_timing_exact():
    sim = static_pair(100.0, extra="mac.cw_min = 0\n")
    done = {}
    src = sim.uavs[0]
    inner = src.mac_done

    def mac_done(frame, ack):
        done["t"] = sim.kernel.now()
        inner(frame, ack)

    src.mac_done = mac_done
    sim.start()
    t0 = sim.kernel.now()
    pkt = src.inject(1)
    sim.kernel.run_until(10**9)
    prop = round(100.0 / 299_792_458.0 * 1e9)
    expected = 50 * US + 4328 * US + prop + 10 * US + 120 * US + prop
    observed = done.get("t", -1) - t0
    report(1, observed == expected and pkt.record.delivered,
           f"exchange {observed} ns, expected {expected} ns (tolerance 0)")


# -- 2 -----------------------------------------------------------------------

def test_criterion_2_energy_formulas():
    p = EnergyParams()
    hover = propulsion_power(0.0, p)
    e = comm_energy(0.1, 4328e-6)
    ok = hover == p.P0 + p.Pi and math.isclose(e, 4.328e-4, rel_tol=1e-12, abs_tol=0.0)
    report(2, ok, f"hover {hover!r} W (P0+Pi = {p.P0 + p.Pi!r}), comm {e!r} J")


# -- 3 -----------------------------------------------------------------------

def test_criterion_3_pure_aloha_matches_analytic():
    parts = []
    ok = True
    for g in (0.25, 0.5, 1.0):
        r = aloha_saturation(g, n_nodes=10, frames=100_000, seed=1)
        want = pure_aloha_success(g)
        good = r.frames >= 100_000 and abs(r.success_ratio - want) <= 0.03
        ok &= good
        parts.append(f"G={g}: {r.success_ratio:.4f} vs {want:.4f} over {r.frames} frames")
    report(3, ok, "; ".join(parts))


# -- 4 and 9 share the protocol comparison runs --------------------------------

@pytest.fixture(scope="module")
def comparison(tmp_path_factory):
    """150 runs (3 protocols x 5 velocities x 10 seeds, 100 s each). Every
    run writes a full trace, which is audited right after the run and then
    removed to keep disk use small."""
    root = tmp_path_factory.mktemp("compare")
    audits = []

    def audit(job, rep):
        out = job[3][1]
        checked, bad = audit_trace(out / "trace.csv")
        audits.append((str(out), checked, bad, rep.counts["delivered"],
                       rep.counts["reconciled"], rep.counts["reconcile_mismatch"]))
        (out / "trace.csv").unlink()

    cfg = parse_config("routing = opar\nduration = 100\n")
    cmp = compare_protocols(cfg, VELOCITIES, SEEDS, progress=audit, trace_dir=root)
    return cmp, audits


def test_criterion_4_protocol_ordering(comparison):
    cmp, _ = comparison
    checks = cmp.checks()
    table = []
    for v in VELOCITIES:
        cells = " ".join(f"{p}={cmp.mean(p, v, 'pdr'):.3f}/{1e3 * cmp.mean(p, v, 'e2e_delay_s'):.1f}ms"
                         for p in ("opar", "greedy", "dsdv"))
        table.append(f"v={v}: {cells}")
    print("\n".join(table))
    failed = [c.name for c in checks if not c.passed]
    groups = {
        "a": [c for c in checks if c.name.startswith("pdr_opar_highest")],
        "b": [c for c in checks if c.name.startswith("pdr_vs_velocity")],
        "c": [c for c in checks if c.name.startswith("delay_opar_lowest")],
    }
    summary = ", ".join(f"({k}) {sum(c.passed for c in cs)}/{len(cs)}" for k, cs in groups.items())
    rho = ", ".join(f"{p} rho={cmp.spearman(p):.2f}" for p in ("opar", "greedy", "dsdv"))
    report(4, not failed, f"{summary}; {rho}; failed: {failed or 'none'} | " + " | ".join(table))


def test_criterion_9_delay_components_reconcile(comparison):
    _, audits = comparison
    runs = len(audits)
    traced = sum(a[1] for a in audits)
    bad = sum(a[2] for a in audits)
    ledger_bad = sum(a[5] for a in audits)
    coverage = all(a[1] == a[3] == a[4] for a in audits)
    report(9, runs == 150 and bad == 0 and ledger_bad == 0 and coverage and traced > 0,
           f"{runs} runs, {traced} delivered packets audited from traces, "
           f"{bad} trace mismatches, {ledger_bad} ledger mismatches")


# -- 5 -----------------------------------------------------------------------

def test_criterion_5_virtual_force_connectivity():
    cfg = parse_config("routing = opar\nduration = 60\n")
    runs = connectivity_experiment(cfg, seeds=10, duration=60.0)
    c0 = statistics.median(r.start[1] for r in runs)
    c1 = statistics.median(r.end[1] for r in runs)
    e0 = statistics.median(r.start[2] for r in runs)
    e1 = statistics.median(r.end[2] for r in runs)
    ends = {r.end[0] for r in runs}
    report(5, c1 <= c0 and e1 > e0 and ends == {60 * 10**9},
           f"median components {c0} -> {c1}, median edges {e0} -> {e1} over {len(runs)} seeds")


# -- 6 -----------------------------------------------------------------------

def test_criterion_6_determinism(tmp_path):
    digests = []
    for routing in ("greedy", "dsdv", "opar", "q_routing"):
        cfg = parse_config(f"routing = {routing}\nduration = 10\nvelocity = 20\n")
        pair = []
        for k in ("a", "b"):
            out = tmp_path / routing / k
            run_scenario(cfg, out, trace=True)
            h = hashlib.sha256()
            h.update((out / "trace.csv").read_bytes())
            h.update((out / "report.txt").read_bytes())
            pair.append(h.hexdigest())
        digests.append((routing, pair[0] == pair[1], pair[0][:12]))
    report(6, all(same for _, same, _ in digests),
           ", ".join(f"{r} {'identical' if same else 'DIFFERENT'} ({d})" for r, same, d in digests))


# -- 7 -----------------------------------------------------------------------

def test_criterion_7_routing_oracles():
    rng = random.Random(2024)
    r = parse_config("routing = opar\nduration = 1\n")
    from uavnet.channel import max_comm_range
    comm = max_comm_range(r.channel)
    topologies = 0
    opar_bad = 0
    while topologies < 120:
        pts = [(rng.uniform(0, 600), rng.uniform(0, 600), rng.uniform(0, 100)) for _ in range(15)]
        snap = Snapshot(pts, [(0.0, 0.0, 0.0)] * 15, comm)
        adj = geometric_adjacency(pts, comm)
        s, d = rng.sample(range(15), 2)
        ref = bfs_shortest_path(adj, s, d)
        path = opar_compute_path(snap, s, d)
        if ref is None:
            opar_bad += path is not None
            continue
        topologies += 1
        opar_bad += path is None or len(path) - 1 != ref

    # in-simulation: static swarms, every delivered OPAR packet took a BFS-shortest path
    sim_checked = sim_bad = 0
    for seed in range(1, 6):
        cfg = parse_config(f"routing = opar\nduration = 5\nmotion = static\nseed = {seed}\n")
        sim = Simulation(cfg)
        adj = geometric_adjacency([u.position for u in sim.uavs], comm)
        sim.run()
        for rec in sim.metrics.records.values():
            if rec.delivered:
                sim_checked += 1
                sim_bad += len(rec.hops) + 1 != bfs_shortest_path(adj, rec.src, rec.dst)

    # greedy: distance to destination strictly shrinks hop by hop, never revisits
    greedy_checked = greedy_bad = 0
    for seed in range(1, 4):
        cfg = parse_config(f"routing = greedy\nduration = 20\nvelocity = 15\nseed = {seed}\n")
        sim = Simulation(cfg)
        packets = []
        for u in sim.uavs:
            inner = u.inject

            def inject(dst, _inner=inner):
                pkt = _inner(dst)
                packets.append(pkt)
                return pkt
            u.inject = inject
        sim.run()
        for pkt in packets:
            if pkt.record.delivered:
                greedy_checked += 1
                prog = pkt.progress
                strictly = all(b < a for a, b in zip(prog, prog[1:]))
                loop_free = len(set(pkt.record.hops)) == len(pkt.record.hops)
                greedy_bad += not (strictly and loop_free and len(prog) == len(pkt.record.hops) + 2)

    # DSDV: installed sequence numbers never go backwards
    seq_checked = seq_bad = 0
    for seed in range(1, 4):
        cfg = parse_config(f"routing = dsdv\nduration = 20\nvelocity = 25\nseed = {seed}\n")
        sim = Simulation(cfg)
        last = {}

        def watch(uav, dst, seq):
            nonlocal seq_checked, seq_bad
            seq_checked += 1
            seq_bad += seq < last.get((uav, dst), -1)
            last[(uav, dst)] = seq

        for u in sim.uavs:
            u.routing.seq_watch = watch
        sim.run()

    ok = (opar_bad == 0 and sim_bad == 0 and greedy_bad == 0 and seq_bad == 0
          and sim_checked > 0 and greedy_checked > 0 and seq_checked > 0)
    report(7, ok, f"OPAR vs BFS {topologies} topologies ({opar_bad} bad), {sim_checked} static-run "
                  f"deliveries ({sim_bad} bad); greedy {greedy_checked} delivered hop lists ({greedy_bad} bad); "
                  f"DSDV {seq_checked} installs ({seq_bad} regressions)")


# -- 8 -----------------------------------------------------------------------

def test_criterion_8_statistical_models():
    # Gauss-Markov mean speed
    p = MobilityParams(alpha=0.85, mean_speed=15.0)
    rng = random.Random(8)
    s = initial_state((300.0, 300.0, 50.0), p, rng)
    speeds = []
    for _ in range(20_000):
        s = gauss_markov_step(s, p, rng)
        speeds.append(s.speed)
    mean = statistics.fmean(speeds)
    band = 3 * p.speed_sigma / math.sqrt(len(speeds)) * math.sqrt((1 + p.alpha) / (1 - p.alpha))
    gm_ok = abs(mean - 15.0) < band

    # Poisson traffic count from the simulator's own generator
    cfg = parse_config("routing = greedy\nduration = 100\nn_uavs = 2\nmotion = static\n"
                       "traffic.sources = 1\nmac.ack_enabled = false\n")
    n = run_scenario(cfg).counts["generated"]
    lo, hi = poisson_band(5.0, 100.0)
    poisson_ok = lo <= n <= hi

    # random-waypoint targets uniform over the box
    wp = MobilityParams(model="random_waypoint", update_interval=1.0, speed_min=1e4, speed_max=1e4)
    rng = random.Random(88)
    st = MotionState(Vector3(300.0, 300.0, 50.0))
    bins = [0] * 27
    seen = 0
    prev = None
    while seen < 27_000:
        st = random_waypoint_step(st, wp, rng)
        if st.waypoint is not prev:
            prev = st.waypoint
            w = st.waypoint
            bins[min(int(w[0] / 200), 2) + 3 * min(int(w[1] / 200), 2) + 9 * min(int(w[2] * 3 / 100), 2)] += 1
            seen += 1
    pval = chi_square_uniform(bins)
    rwp_ok = pval > 0.01
    report(8, gm_ok and poisson_ok and rwp_ok,
           f"GM mean speed {mean:.3f} (15 +/- {band:.3f}); Poisson count {n} in [{lo:.0f}, {hi:.0f}]; "
           f"waypoint chi-square p={pval:.3f} (> 0.01)")
