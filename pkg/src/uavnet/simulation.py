"""Scenario assembly: UAVs with their protocol stacks on one shared channel.

``Simulation`` wires kernel, channel, MAC, routing, mobility/topology
control, energy and metrics together for a single replication;
``run_scenario`` is the one-call entry point.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import metrics as M
from .channel import BROADCAST, Channel, max_comm_range, propagation_delay
from .config import ScenarioConfig, dump_config, parse_config
from .energy import EnergyLedger, propulsion_power
from .geometry import ZERO, Vector3
from .kernel import Kernel, seconds
from .mac import ADVERT, CONTROL_KINDS, DATA, HELLO, Frame, default_ack_timeout, make_mac
from .metrics import DelayBreakdown, MetricsLedger, PacketRecord
from .mobility import MotionState, initial_state, mobility_update
from .rng import global_stream, uav_stream
from .routing.agents import PROTOCOLS
from .routing.base import FORWARD, NeighborTable
from .routing.opar import Snapshot
from .topology import ForceParams, apply_control_step, connectivity_stats, virtual_force
from .trace import TraceWriter

log = logging.getLogger(__name__)


class DataPacket:
    __slots__ = ("packet_id", "src", "dst", "record", "holder", "ingress", "access", "path",
                 "visited", "progress", "greedy_bound")

    def __init__(self, packet_id: int, src: int, dst: int, now: int, payload_bits: int):
        self.packet_id = packet_id
        self.src = src
        self.dst = dst
        self.record = PacketRecord(packet_id, src, dst, now, payload_bits)
        self.holder = src
        self.ingress = now
        self.access = now
        self.path: list[int] | None = None
        self.visited = {src}
        self.progress: list[float] = []
        self.greedy_bound = math.inf


class Uav:
    """One UAV: motion state, energy ledger, MAC and routing agent."""

    def __init__(self, sim: "Simulation", uav_id: int, position):
        self.sim = sim
        self.id = uav_id
        self.kernel = sim.kernel
        cfg = sim.cfg
        seed = sim.seed
        self.rng_mobility = uav_stream(seed, uav_id, "mobility")
        self.rng_traffic = uav_stream(seed, uav_id, "traffic")
        self.rng_mac = uav_stream(seed, uav_id, "mac")
        self.rng_routing = uav_stream(seed, uav_id, "routing")
        self.motion: MotionState = initial_state(position, sim.mobility, self.rng_mobility)
        if cfg.motion in ("static", "virtual_force"):
            self.motion = replace(self.motion, speed=0.0)  # hover until told otherwise
        self.energy = EnergyLedger(cfg.energy.initial)
        self.alive = True
        self.neighbors = NeighborTable(cfg.routing_params.ttl_ns)
        self.seen: set[int] = set()
        self.mac = make_mac(self, sim.kernel, sim.channel, sim.mac_params, self.rng_mac,
                            ack_bytes=sim.ack_bytes, ack_timeout=sim.ack_timeout)
        self.routing = PROTOCOLS[cfg.routing](self, cfg.routing_params)

    # -- state ----------------------------------------------------------
    @property
    def position(self) -> Vector3:
        return self.motion.position

    @property
    def velocity(self) -> Vector3:
        return self.motion.velocity if self.alive else ZERO

    def now(self) -> int:
        return self.kernel.now()

    def die(self):
        if not self.alive:
            return
        self.alive = False
        self.sim.channel.alive[self.id] = False
        self.motion = replace(self.motion, speed=0.0)
        self.mac.flush("dead_node")
        self.sim.emit("energy", self.id, None, self.position, "depleted")

    def _spend(self, joules: float, category: str):
        self.energy.debit(joules, category)
        if self.energy.depleted and self.alive:
            self.kernel.schedule_in(self.die, 0)

    # -- traffic --------------------------------------------------------
    def start_traffic(self):
        t = self.sim.cfg.traffic
        if t.rate > 0 and self.sim.cfg.n_uavs > 1:
            self.kernel.schedule_in(self._generate, self._interarrival())

    def _interarrival(self) -> int:
        t = self.sim.cfg.traffic
        if t.model == "poisson":
            return seconds(self.rng_traffic.expovariate(t.rate))
        return seconds(self.rng_traffic.uniform(0.0, 2.0 / t.rate))

    def _generate(self):
        if not self.alive:
            return
        sim = self.sim
        others = sim.cfg.n_uavs - 1
        dst = self.rng_traffic.randrange(others)
        if dst >= self.id:
            dst += 1
        self.inject(dst)
        self.kernel.schedule_in(self._generate, self._interarrival())

    def inject(self, dst: int) -> DataPacket:
        """Create a data packet for ``dst`` now and queue it."""
        sim = self.sim
        if dst == self.id or not 0 <= dst < len(sim.uavs):
            raise ValueError(f"invalid destination {dst} for UAV {self.id}")
        pkt = DataPacket(next(sim.packet_ids), self.id, dst, self.now(), sim.cfg.packet.payload_bytes * 8)
        sim.metrics.generated(pkt.record)
        sim.emit("pkt_gen", self.id, pkt.packet_id, None, f"dst={dst}")
        self._enqueue_data(pkt)
        return pkt

    def _enqueue_data(self, pkt: DataPacket):
        frame = Frame(DATA, self.id, BROADCAST, self.sim.data_bytes, packet=pkt,
                      payload=pkt.ingress, frame_id=next(self.sim.frame_ids))
        self.mac.enqueue(frame)

    def _forward(self, pkt: DataPacket):
        if not self.alive:
            self.sim.drop(pkt, self.id, "dead_node")
            return
        self._enqueue_data(pkt)

    def send_broadcast(self, kind: str, size: int, payload):
        self.mac.enqueue(Frame(kind, self.id, BROADCAST, size, payload=payload,
                               frame_id=next(self.sim.frame_ids)))

    # -- MAC host interface --------------------------------------------
    def mac_prepare(self, frame: Frame) -> bool:
        if frame.kind != DATA:
            return True
        pkt = frame.packet
        if len(pkt.record.hops) + 1 > self.sim.cfg.routing_params.ttl:
            self.sim.drop(pkt, self.id, "ttl_exceeded")
            return False
        decision = self.routing.next_hop_selection(pkt)
        if decision.verdict != FORWARD:
            self.sim.drop(pkt, self.id, decision.reason or "no_route")
            return False
        frame.dst = decision.next_hop
        frame.src = self.id
        pkt.access = self.now()
        return True

    def mac_tx_started(self, frame: Frame, tx, attempt: int):
        sim = self.sim
        self._spend(tx.tx_power * (tx.end - tx.start) / 1e9, "comm")
        if frame.kind in CONTROL_KINDS:
            sim.metrics.control_tx()
        if sim.trace is not None:
            pkt = frame.packet.packet_id if frame.packet is not None else None
            sim.emit("mac_tx", self.id, pkt, tx.tx_position, f"{frame.kind} to={frame.dst} attempt={attempt}")

    def mac_ack_outcome(self, frame: Frame, outcome):
        if self.sim.trace is not None and frame.packet is not None:
            detail = f"acked rtt={outcome.rtt}" if outcome.verdict == "acked" else "timeout"
            self.sim.emit("ack", self.id, frame.packet.packet_id, None, detail)

    def mac_done(self, frame: Frame, ack):
        if frame.kind == DATA and ack is not None:
            self.routing.on_hop_acked(frame.packet, frame.dst, self.now() - frame.payload, ack.payload)

    def mac_drop(self, frame: Frame, reason: str):
        if frame.kind != DATA:
            return
        pkt = frame.packet
        if pkt.holder != self.id:
            return  # next hop already has it; only the ACK was lost
        if reason == "retry_exhausted" and 0 <= frame.dst < len(self.sim.uavs):
            if not self.sim.uavs[frame.dst].alive:
                reason = "dead_node"
            self.routing.on_hop_failed(pkt, frame.dst)
        self.sim.drop(pkt, self.id, reason)

    def mac_rx_failed(self, tx, outcome):
        sim = self.sim
        if sim.trace is not None and tx.frame.dst == self.id:
            pkt = tx.frame.packet.packet_id if tx.frame.packet is not None else None
            sim.emit("mac_rx", self.id, pkt, None,
                     f"{tx.frame.kind} from={tx.tx_id} {outcome.verdict} sinr_db={outcome.min_sinr_db:.2f}")

    def mac_received(self, tx, outcome):
        frame = tx.frame
        kind = frame.kind
        if kind == DATA:
            self._data_arrival(tx)
        elif kind == HELLO or kind == ADVERT:
            self.routing.packet_reception(frame)
        else:
            self.sim.unknown_frames += 1

    def ack_payload(self, data_frame: Frame):
        if data_frame.packet is None:
            return None
        return self.routing.ack_feedback(data_frame.packet)

    def _data_arrival(self, tx):
        frame = tx.frame
        if frame.frame_id in self.seen:
            return
        self.seen.add(frame.frame_id)
        pkt: DataPacket = frame.packet
        if pkt.holder != frame.src:
            return
        sim = self.sim
        now = self.now()
        prop_data = tx.prop[self.id]
        if sim.mac_params.ack_enabled:
            prop_ack = propagation_delay(self.position, sim.uavs[frame.src].position)
            ack_time = sim.mac_params.sifs + sim.ack_airtime
        else:
            prop_ack = ack_time = 0
        ingress = now + ack_time + prop_ack
        rec = pkt.record
        rec.breakdown.append(DelayBreakdown(
            queuing=pkt.access - pkt.ingress,
            contention=tx.start - pkt.access,
            transmission=tx.end - tx.start,
            propagation=prop_data + prop_ack,
            ack_overhead=ack_time,
        ))
        pkt.holder = self.id
        pkt.ingress = ingress
        if sim.trace is not None:
            sim.emit("mac_rx", self.id, pkt.packet_id, self.position, f"data from={frame.src} success")
        if pkt.dst == self.id:
            if sim.metrics.delivered(rec, ingress) and sim.trace is not None:
                c = M.component_totals(rec)
                sim.emit("deliver", self.id, pkt.packet_id, None,
                         f"at_ns={ingress} e2e_ns={ingress - rec.generated_at} queuing={c.queuing} contention={c.contention} "
                         f"transmission={c.transmission} propagation={c.propagation} "
                         f"ack={c.ack_overhead} hops={'/'.join(map(str, rec.hops))}")
            return
        rec.hops.append(self.id)
        pkt.visited.add(self.id)
        self.kernel.schedule(self._forward, ingress, pkt)


@dataclass
class RunReport:
    config: ScenarioConfig
    seed: int
    metrics: dict[str, float]
    counts: dict[str, int]
    drops: dict[str, int]
    energy: dict[str, float]
    runtime_s: float = 0.0
    ledger: MetricsLedger | None = field(default=None, repr=False, compare=False)

    def to_text(self) -> str:
        """Flat ``key = value`` report. Wall-clock runtime is left out so the
        text is reproducible."""
        lines = [dump_config(self.config)]
        for k, v in self.metrics.items():
            lines.append(f"result.{k} = {_fmt(v)}\n")
        for k, v in self.counts.items():
            lines.append(f"result.count.{k} = {v}\n")
        for k in sorted(self.drops):
            lines.append(f"result.drop.{k} = {self.drops[k]}\n")
        for k, v in self.energy.items():
            lines.append(f"result.energy.{k} = {_fmt(v)}\n")
        return "".join(lines)


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def parse_report(text: str) -> tuple[ScenarioConfig, dict[str, str]]:
    """Split a report into its config echo and its ``result.*`` entries."""
    cfg_lines, results = [], {}
    for line in text.splitlines():
        if line.startswith("result."):
            k, _, v = line.partition("=")
            results[k.strip()[len("result."):]] = v.strip()
        else:
            cfg_lines.append(line)
    return parse_config("\n".join(cfg_lines)), results


class Simulation:
    def __init__(self, cfg: ScenarioConfig, trace_path: str | Path | None = None,
                 record: bool = False, positions=None, trace_stream=None):
        self.cfg = cfg
        self.seed = cfg.seed
        self.kernel = Kernel(record=record)
        self.metrics = MetricsLedger()
        self.trace = None
        if trace_path is not None or trace_stream is not None:
            self.trace = TraceWriter(trace_path, stream=trace_stream)
        self.packet_ids = itertools.count()
        self.frame_ids = itertools.count()
        self.unknown_frames = 0
        self.epoch = 0
        self._snap = None
        self._snap_epoch = -1

        self.mobility = cfg.mobility_params()
        self.comm_range = max_comm_range(cfg.channel)
        self.mac_params = cfg.mac.params()
        self.data_bytes = cfg.packet.data_frame_bytes
        self.ack_bytes = cfg.packet.ack_bytes + (8 if cfg.routing == "q_routing" else 0)
        self.ack_airtime = cfg.channel.airtime(self.ack_bytes)
        self.ack_timeout = self.mac_params.ack_timeout
        if self.ack_timeout is None:
            self.ack_timeout = default_ack_timeout(self.mac_params, self.ack_airtime, self.comm_range)

        self.uavs: list[Uav] = []
        self.channel = Channel(self.kernel, cfg.channel, cfg.n_uavs, self._position)
        if positions is None:
            rng = global_stream(self.seed, "placement")
            b = cfg.bounds
            positions = [(rng.uniform(0, b.x), rng.uniform(0, b.y), rng.uniform(0, b.z))
                         for _ in range(cfg.n_uavs)]
        if len(positions) != cfg.n_uavs:
            raise ValueError("need one initial position per UAV")
        for i, p in enumerate(positions):
            self.uavs.append(Uav(self, i, p))

        self.force = None
        if cfg.motion == "virtual_force":
            t = cfg.topology
            self.force = ForceParams(
                desired_distance=t.desired_distance or 0.7 * self.comm_range,
                spring_gain=t.spring_gain, gain=t.gain, max_step_speed=t.max_step_speed,
                control_interval=t.control_interval,
                interaction_radius=t.interaction_radius or self.comm_range)
            self.rng_topology = global_stream(self.seed, "topology")
        self.connectivity: list[tuple[int, int, int, int]] = []
        self._sampling_events = 0  # trace-only events, kept out of the report

    def _position(self, i: int):
        return self.uavs[i].motion.position

    # -- helpers used by agents -----------------------------------------
    def snapshot(self) -> Snapshot:
        if self._snap_epoch != self.epoch:
            self._snap = Snapshot([u.position for u in self.uavs], [u.velocity for u in self.uavs],
                                  self.comm_range)
            self._snap_epoch = self.epoch
        return self._snap

    def alive_mask(self) -> list[bool]:
        return [u.alive for u in self.uavs]

    def drop(self, pkt: DataPacket, at: int, reason: str):
        if self.metrics.dropped(pkt.record, reason):
            self.emit("drop", at, pkt.packet_id, None, reason)

    def emit(self, kind, uav, pkt, pos, detail=""):
        if self.trace is not None:
            self.trace.emit(self.kernel.now(), kind, uav, pkt, pos, detail)

    # -- periodic processes ---------------------------------------------
    def _mobility_tick(self):
        dt = self.mobility.update_interval
        step = seconds(dt)
        energy = self.cfg.energy
        driver = self.cfg.motion
        for u in self.uavs:
            if not u.alive:
                continue
            u._spend(propulsion_power(u.motion.speed, energy) * dt, "propulsion")
            if driver != "static" and u.alive:
                u.motion = mobility_update(u.motion, self.mobility, u.rng_mobility)
        self.epoch += 1
        self.kernel.schedule_in(self._mobility_tick, step)

    def _control_tick(self):
        p = self.force
        positions = [u.position for u in self.uavs]
        forces = []
        for u in self.uavs:
            if not u.alive:
                forces.append(ZERO)
                continue
            others = [positions[v.id] for v in self.uavs if v.id != u.id and v.alive]
            forces.append(virtual_force(positions[u.id], others, p, self.rng_topology))
        for u, f in zip(self.uavs, forces):
            if not u.alive:
                continue
            u._spend(propulsion_power(u.motion.speed, self.cfg.energy) * p.control_interval, "propulsion")
            u.motion = apply_control_step(u.motion, f, p, self.cfg.bounds, self.mobility.boundary)
        self.epoch += 1
        self._record_connectivity()
        self.kernel.schedule_in(self._control_tick, seconds(p.control_interval))

    def _record_connectivity(self):
        comps, edges, largest = connectivity_stats([u.position for u in self.uavs], self.comm_range)
        self.connectivity.append((self.kernel.now(), comps, edges, largest))
        self.emit("conn", None, None, None, f"components={comps} edges={edges} largest={largest}")

    def _position_sample(self):
        self._sampling_events += 1
        for u in self.uavs:
            self.trace.emit(self.kernel.now(), "pos", u.id, None, u.position, f"speed={u.motion.speed:.3f}")
        self.kernel.schedule_in(self._position_sample, seconds(self.cfg.trace.position_interval))

    def _energy_sample(self):
        self._sampling_events += 1
        for u in self.uavs:
            self.emit("energy", u.id, None, None, f"residual={u.energy.residual:.6f}")
        self.kernel.schedule_in(self._energy_sample, seconds(1.0))

    # -- run ------------------------------------------------------------
    def start(self):
        cfg = self.cfg
        if cfg.motion == "virtual_force":
            self._record_connectivity()
            self.kernel.schedule_in(self._control_tick, seconds(self.force.control_interval))
        else:
            self.kernel.schedule_in(self._mobility_tick, seconds(self.mobility.update_interval))
        if self.trace is not None:
            self.kernel.schedule_in(self._position_sample, 0)
            self.kernel.schedule_in(self._energy_sample, 0)
        n_src = cfg.traffic.sources or cfg.n_uavs
        for u in self.uavs:
            u.routing.start()
            if u.id < n_src:
                u.start_traffic()

    def run(self) -> RunReport:
        t0 = time.perf_counter()
        self.start()
        end = seconds(self.cfg.duration)
        self.kernel.run_until(end)
        self.metrics.finalize(self.cfg.duration)
        if self.trace is not None:
            self.trace.close()
        return self.report(time.perf_counter() - t0)

    def report(self, runtime: float = 0.0) -> RunReport:
        led = self.metrics
        terminal = led.terminal_counts()
        counts = {
            "generated": led.generated_count,
            "delivered": led.delivered_count,
            "dropped": terminal.get("dropped", 0),
            "in_flight": terminal.get("in_flight", 0),
            "control_tx": led.control_tx_count,
            "events": self.kernel.executed - self._sampling_events,
        }
        counts["reconciled"], counts["reconcile_mismatch"] = M.reconciliation_audit(led)
        energy = {
            "propulsion_j": sum(u.energy.spent_propulsion for u in self.uavs),
            "comm_j": sum(u.energy.spent_comm for u in self.uavs),
            "min_residual_j": min((u.energy.residual for u in self.uavs), default=0.0),
            "depleted": sum(1 for u in self.uavs if u.energy.depleted),
        }
        return RunReport(self.cfg, self.seed, M.summary(led), counts, dict(sorted(led.drops.items())),
                         energy, runtime, led)


def run_scenario(cfg: ScenarioConfig, out_dir: str | Path | None = None, trace: bool | None = None,
                 positions=None) -> RunReport:
    """Run one replication; with ``out_dir`` write ``report.txt`` (and
    ``trace.csv`` when tracing is on)."""
    trace = cfg.trace.enabled if trace is None else trace
    trace_path = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
        if trace:
            trace_path = out_dir / "trace.csv"
    sim = Simulation(cfg, trace_path=trace_path, positions=positions)
    rep = sim.run()
    if out_dir is not None:
        (out_dir / "report.txt").write_text(rep.to_text(), encoding="utf-8")
    log.info("run seed=%d routing=%s pdr=%.4f in %.2fs", cfg.seed, cfg.routing,
             rep.metrics["pdr"], rep.runtime_s)
    return rep
