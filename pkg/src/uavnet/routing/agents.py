"""Per-UAV routing agents.

Every agent implements ``next_hop_selection(packet)`` and
``packet_reception(frame)``; the host UAV calls the remaining hooks when the
MAC reports a delivered hop, a failed hop or an outgoing ACK.
"""

from __future__ import annotations

from ..geometry import distance
from ..kernel import seconds
from . import dsdv as _dsdv
from .base import RouteDecision
from .greedy import greedy_next_hop
from .opar import opar_compute_path
from .qrouting import QTable, q_routing_select, q_routing_update


class Routing:
    name = "base"
    uses_hello = True

    def __init__(self, uav, cfg):
        self.uav = uav
        self.cfg = cfg

    def start(self):
        if self.cfg.hello_interval > 0 and self.uses_hello:
            rng = self.uav.rng_routing
            interval = seconds(self.cfg.hello_interval)
            self.uav.kernel.schedule_in(self._hello, int(rng.uniform(0, interval)))

    def _hello(self):
        uav = self.uav
        if not uav.alive:
            return
        uav.send_broadcast("hello", self.cfg.hello_bytes,
                           (uav.id, uav.position, uav.velocity))
        uav.kernel.schedule_in(self._hello, seconds(self.cfg.hello_interval))

    def next_hop_selection(self, packet) -> RouteDecision:
        raise NotImplementedError

    def packet_reception(self, frame):
        if frame.kind == "hello":
            try:
                nid, pos, vel = frame.payload
            except (TypeError, ValueError):
                self.uav.sim.unknown_frames += 1
                return
            self.uav.neighbors.upsert(nid, self.uav.now(), pos, vel)
        else:
            self.uav.sim.unknown_frames += 1

    def current_neighbors(self):
        uav = self.uav
        for nid in uav.neighbors.expire(uav.now()):
            self.on_link_lost(nid)
        return uav.neighbors.entries

    def on_link_lost(self, nid: int):
        pass

    def on_hop_failed(self, packet, next_hop: int):
        self.uav.neighbors.remove(next_hop)
        self.on_link_lost(next_hop)

    def on_hop_acked(self, packet, next_hop: int, hop_delay: int, feedback):
        pass

    def ack_feedback(self, packet):
        return None


class GreedyRouting(Routing):
    name = "greedy"

    def next_hop_selection(self, packet) -> RouteDecision:
        uav = self.uav
        nbrs = self.current_neighbors()
        dst_pos = uav.sim.uavs[packet.dst].position  # idealized location service
        own = distance(uav.position, dst_pos)
        if not packet.progress:
            packet.progress.append(own)
        bound = min(own, packet.greedy_bound)
        table = {i: e.position for i, e in nbrs.items() if i not in packet.visited}
        if packet.dst in nbrs:
            table[packet.dst] = nbrs[packet.dst].position
        decision = greedy_next_hop(uav.position, table, packet.dst, dst_pos)
        if decision.next_hop is not None and decision.next_hop != packet.dst:
            d = distance(table[decision.next_hop], dst_pos)
            if d >= bound:
                return RouteDecision.none("local_minimum")
            packet.progress.append(d)
            packet.greedy_bound = d
        elif decision.next_hop == packet.dst:
            packet.progress.append(0.0)
            packet.greedy_bound = 0.0
        return decision


class DsdvRouting(Routing):
    name = "dsdv"

    def __init__(self, uav, cfg):
        super().__init__(uav, cfg)
        self.seq = 0
        self.table: dict[int, _dsdv.DsdvEntry] = {
            uav.id: _dsdv.DsdvEntry(uav.id, uav.id, 0, 0, 0)}
        self.changed: dict[int, _dsdv.DsdvEntry] = {}
        self._trigger = None
        self.malformed = 0
        self.seq_watch = None  # optional callable(uav_id, dst, seq)

    def start(self):
        super().start()
        rng = self.uav.rng_routing
        self.uav.kernel.schedule_in(self._full_dump, int(rng.uniform(0, seconds(self.cfg.dsdv_dump_interval))))

    def _install(self, delta):
        for dst, e in delta.items():
            self.changed[dst] = e
            if self.seq_watch is not None:
                self.seq_watch(self.uav.id, dst, e.sequence_number)

    def _advert_size(self, n):
        return self.cfg.advert_base_bytes + self.cfg.advert_entry_bytes * n

    def _full_dump(self):
        uav = self.uav
        if not uav.alive:
            return
        self.current_neighbors()
        self.seq += 2
        own = _dsdv.DsdvEntry(uav.id, uav.id, 0, self.seq, uav.now())
        self.table[uav.id] = own
        self._install({uav.id: own})
        entries = list(self.table.values())
        self.changed.clear()
        uav.send_broadcast("dsdv", self._advert_size(len(entries)), _dsdv.advert_items(entries))
        uav.kernel.schedule_in(self._full_dump, seconds(self.cfg.dsdv_dump_interval))

    def _schedule_trigger(self):
        if self._trigger is None or not self._trigger.pending:
            delay = int(self.uav.rng_routing.uniform(0, seconds(self.cfg.dsdv_trigger_delay)))
            self._trigger = self.uav.kernel.schedule_in(self._triggered, delay)

    def _triggered(self):
        uav = self.uav
        if not uav.alive or not self.changed:
            return
        entries = list(self.changed.values())
        self.changed.clear()
        uav.send_broadcast("dsdv", self._advert_size(len(entries)), _dsdv.advert_items(entries))

    def packet_reception(self, frame):
        if frame.kind != "dsdv":
            return super().packet_reception(frame)
        uav = self.uav
        uav.neighbors.upsert(frame.src, uav.now())
        before = {d: (e.next_hop, e.hop_metric) for d, e in self.table.items()}
        delta, bad = _dsdv.dsdv_process_update(self.table, frame.payload, frame.src, uav.id, uav.now())
        self.malformed += bad
        if delta:
            self._install(delta)
            # pure sequence-number refreshes wait for the next periodic dump
            if any(before.get(d) != (e.next_hop, e.hop_metric) for d, e in delta.items()):
                self._schedule_trigger()

    def on_link_lost(self, nid: int):
        delta = _dsdv.dsdv_handle_link_break(self.table, nid, self.uav.now())
        if delta:
            self._install(delta)
            self._schedule_trigger()

    def next_hop_selection(self, packet) -> RouteDecision:
        nbrs = self.current_neighbors()
        e = self.table.get(packet.dst)
        if e is None or not e.reachable:
            return RouteDecision.none("no_route")
        if e.next_hop not in nbrs:
            self.on_link_lost(e.next_hop)
            return RouteDecision.none("no_route")
        return RouteDecision.forward(e.next_hop)


class OparRouting(Routing):
    """Source routing: the path is computed once, at the source, from a
    ground-truth snapshot; relays follow the header without re-checking."""

    name = "opar"
    uses_hello = False

    def next_hop_selection(self, packet) -> RouteDecision:
        uav = self.uav
        path = packet.path
        if path is None or uav.id not in path:
            snap = uav.sim.snapshot()
            path = opar_compute_path(snap, uav.id, packet.dst, self.cfg.opar_hop_time, uav.sim.alive_mask())
            if path is None:
                return RouteDecision.none("no_route")
            packet.path = path
        i = path.index(uav.id)
        if i + 1 >= len(path):
            return RouteDecision.none("no_route")
        return RouteDecision.forward(path[i + 1])

    def on_hop_failed(self, packet, next_hop):
        pass


class QRouting(Routing):
    name = "q_routing"

    def __init__(self, uav, cfg):
        super().__init__(uav, cfg)
        self.q = QTable(cfg.q_learning_rate)

    def next_hop_selection(self, packet) -> RouteDecision:
        nbrs = self.current_neighbors()
        return q_routing_select(self.q, packet.dst, nbrs.keys(), self.uav.rng_routing, self.cfg.q_epsilon)

    def ack_feedback(self, packet):
        if packet.dst == self.uav.id:
            return 0.0
        return self.q.best(packet.dst, self.uav.neighbors.current(self.uav.now()).keys())

    def on_hop_acked(self, packet, next_hop, hop_delay, feedback):
        q_routing_update(self.q, packet.dst, next_hop, hop_delay / 1e9, feedback or 0.0)

    def on_hop_failed(self, packet, next_hop):
        super().on_hop_failed(packet, next_hop)
        self.q.q[packet.dst].pop(next_hop, None)


PROTOCOLS = {
    "greedy": GreedyRouting,
    "dsdv": DsdvRouting,
    "opar": OparRouting,
    "q_routing": QRouting,
}
