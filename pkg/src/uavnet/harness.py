"""Experiment drivers: protocol comparison over velocity, the pure-ALOHA
saturation run, virtual-force connectivity, and trace audits."""

from __future__ import annotations

import math
import re
import statistics
from pathlib import Path
from dataclasses import dataclass, field

from scipy import stats

from .channel import Channel, ChannelParams
from .config import ScenarioConfig
from .kernel import Kernel, seconds
from .mac import DATA, Frame, MacParams, make_mac
from .oracles import OracleResult
from .rng import derive_seed, substream
from .simulation import Simulation
from .sweep import SweepResult, sweep, with_overrides
from .trace import read_trace

PROTOCOLS = ("opar", "greedy", "dsdv")


# -- protocol comparison -----------------------------------------------------

@dataclass
class Comparison:
    velocities: list[str]
    sweeps: dict[str, SweepResult]

    def mean(self, protocol: str, velocity, metric: str) -> float:
        xs = [r.metrics[metric] for r in self.sweeps[protocol].cell(velocity)]
        xs = [x for x in xs if not math.isnan(x)]
        return statistics.fmean(xs) if xs else math.nan

    def spearman(self, protocol: str, metric: str = "pdr") -> float:
        vs = [float(v) for v in self.velocities]
        means = [self.mean(protocol, v, metric) for v in self.velocities]
        return float(stats.spearmanr(vs, means).statistic)

    def checks(self) -> list[OracleResult]:
        out = []
        others = [p for p in self.sweeps if p != "opar"]
        for v in self.velocities:
            pdr = {p: self.mean(p, v, "pdr") for p in self.sweeps}
            out.append(OracleResult.ordinal(
                f"pdr_opar_highest@v={v}", "opar >= " + ",".join(others), pdr["opar"],
                all(pdr["opar"] >= pdr[p] for p in others)))
        for p in self.sweeps:
            rho = self.spearman(p)
            out.append(OracleResult.ordinal(f"pdr_vs_velocity_spearman[{p}]", "rho < 0", rho, rho < 0))
        for v in self.velocities:
            d = {p: self.mean(p, v, "e2e_delay_s") for p in self.sweeps}
            out.append(OracleResult.ordinal(
                f"delay_opar_lowest@v={v}", "opar < " + ",".join(others), d["opar"],
                all(d["opar"] < d[p] for p in others)))
        return out

    def rows(self) -> list[dict]:
        rows = []
        for p, sw in self.sweeps.items():
            rows.extend(sw.rows())
        return rows


def compare_protocols(cfg: ScenarioConfig, velocities, reps: int, protocols=PROTOCOLS,
                      workers: int = 1, progress=None, trace_dir=None) -> Comparison:
    """Sweep velocity for each protocol with shared replication seeds.

    ``trace_dir`` keeps every run's report and trace under
    ``trace_dir/<protocol>/velocity=<v>/rep<r>/``.
    """
    if "opar" not in protocols:
        raise ValueError("the comparison is made against opar")
    velocities = [str(v) for v in velocities]
    sweeps = {}
    for p in protocols:
        sweeps[p] = sweep(with_overrides(cfg, routing=p), "velocity", velocities, reps,
                          workers=workers, progress=progress,
                          trace_dir=None if trace_dir is None else Path(trace_dir) / p)
    return Comparison(velocities, sweeps)


def verdict_rows(checks: list[OracleResult]) -> list[dict]:
    return [{"check": c.name, "expected": c.expected, "observed": c.observed,
             "result": "pass" if c.passed else "fail"} for c in checks]


# -- pure ALOHA saturation ---------------------------------------------------

class _Source:
    """Always-backlogged sender: a new frame follows each completed one after
    an exponential silence, so ``n`` senders produce aggregate load ``g``."""

    def __init__(self, uav_id, sink, kernel, channel, params, frame_bytes, gap_mean_ns, rng):
        self.id = uav_id
        self.sink = sink
        self.kernel = kernel
        self.frame_bytes = frame_bytes
        self.gap_mean = gap_mean_ns
        self.rng = rng
        self.sent = 0
        self.mac = make_mac(self, kernel, channel, params, rng)

    def start(self):
        self.kernel.schedule_in(self._emit, self._gap())

    def _gap(self) -> int:
        return int(self.rng.expovariate(1.0 / self.gap_mean))

    def _emit(self):
        self.mac.enqueue(Frame(DATA, self.id, self.sink, self.frame_bytes))

    def mac_prepare(self, frame):
        return True

    def mac_tx_started(self, frame, tx, attempt):
        self.sent += 1

    def mac_done(self, frame, ack):
        self.kernel.schedule_in(self._emit, self._gap())

    def mac_drop(self, frame, reason):
        self.kernel.schedule_in(self._emit, self._gap())

    def mac_ack_outcome(self, frame, outcome):
        pass

    def mac_received(self, tx, outcome):
        pass

    def mac_rx_failed(self, tx, outcome):
        pass

    def ack_payload(self, frame):
        return None


class _Sink(_Source):
    def __init__(self, uav_id, kernel, channel, params, rng):
        super().__init__(uav_id, None, kernel, channel, params, 0, 1, rng)
        self.ok = 0
        self.failed = 0

    def mac_received(self, tx, outcome):
        self.ok += 1

    def mac_rx_failed(self, tx, outcome):
        self.failed += 1


@dataclass
class AlohaResult:
    load: float
    frames: int
    successes: int
    n_nodes: int

    @property
    def success_ratio(self) -> float:
        return self.successes / self.frames if self.frames else math.nan


def aloha_saturation(load: float, n_nodes: int = 10, frames: int = 100_000, seed: int = 1,
                     frame_bytes: int = 1082, radius: float = 100.0,
                     channel: ChannelParams | None = None) -> AlohaResult:
    """Pure ALOHA with ACKs off: ``n_nodes`` senders on a circle around a
    silent sink, run until the sink has judged ``frames`` frames.

    Every sender is equidistant from the sink, so any overlap at the sink
    leaves SINR below threshold and there is no capture effect.
    """
    if not 0 < load < n_nodes:
        raise ValueError("load must lie in (0, n_nodes)")
    c = channel or ChannelParams()
    k = Kernel()
    pos = [(0.0, 0.0, 50.0)] + [
        (radius * math.cos(2 * math.pi * i / n_nodes), radius * math.sin(2 * math.pi * i / n_nodes), 50.0)
        for i in range(n_nodes)]
    ch = Channel(k, c, n_nodes + 1, lambda i: pos[i])
    params = MacParams(protocol="aloha", ack_enabled=False)
    t_frame = c.airtime(frame_bytes)
    gap = t_frame * (n_nodes / load - 1.0)
    sink = _Sink(0, k, ch, params, substream(seed, 2, 0))
    srcs = [_Source(i, 0, k, ch, params, frame_bytes, gap, substream(seed, 2, i)) for i in range(1, n_nodes + 1)]
    for s in srcs:
        s.start()
    # advance in chunks until enough frames have been judged at the sink
    chunk = seconds(1.0)
    while sink.ok + sink.failed < frames:
        k.run_until(k.now() + chunk)
    return AlohaResult(load, sink.ok + sink.failed, sink.ok, n_nodes)


# -- virtual-force connectivity ----------------------------------------------

@dataclass
class ConnectivityRun:
    seed: int
    series: list[tuple[int, int, int, int]] = field(default_factory=list)  # (t_ns, comps, edges, largest)

    @property
    def start(self):
        return self.series[0]

    @property
    def end(self):
        return self.series[-1]


def connectivity_experiment(cfg: ScenarioConfig, seeds: int, duration: float = 60.0) -> list[ConnectivityRun]:
    """Virtual-force control only (no data traffic, no beacons)."""
    runs = []
    for r in range(seeds):
        seed = derive_seed(cfg.seed, 0, r)
        c = with_overrides(cfg, motion="virtual_force", duration=duration, seed=seed,
                           **{"traffic.rate": 0, "routing": "opar"})
        sim = Simulation(c)
        sim.run()
        runs.append(ConnectivityRun(seed, list(sim.connectivity)))
    return runs


# -- trace audit -------------------------------------------------------------

_NUM = re.compile(r"(\w+)=(-?\d+)")


def audit_trace(path) -> tuple[int, int]:
    """Post-run delay audit of one trace file.

    For every ``deliver`` record the five components must add up to the
    recorded E2E delay, and that delay must equal the delivery instant minus
    the timestamp of the packet's own ``pkt_gen`` record. Returns (deliveries
    checked, mismatches).
    """
    checked = bad = 0
    born = {}
    for row in read_trace(path):
        kind = row["kind"]
        if kind == "pkt_gen":
            born[row["pkt"]] = int(row["t_ns"])
            continue
        if kind != "deliver":
            continue
        f = {k: int(v) for k, v in _NUM.findall(row["detail"])}
        total = f["queuing"] + f["contention"] + f["transmission"] + f["propagation"] + f["ack"]
        checked += 1
        gen = born.get(row["pkt"])
        bad += total != f["e2e_ns"] or gen is None or f["at_ns"] - gen != f["e2e_ns"]
    return checked, bad
