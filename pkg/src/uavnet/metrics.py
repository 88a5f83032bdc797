"""Per-packet records and the five network metrics.

Terminal states: ``delivered``, ``dropped`` (with a reason) and
``in_flight`` for packets still queued when the run stops.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

NA = math.nan  # metric not applicable (empty denominator)


class ReconciliationError(AssertionError):
    """Per-hop delay components do not add up to the end-to-end delay."""


@dataclass(frozen=True)
class DelayBreakdown:
    queuing: int
    contention: int
    transmission: int
    propagation: int
    ack_overhead: int

    @property
    def total(self) -> int:
        return self.queuing + self.contention + self.transmission + self.propagation + self.ack_overhead


@dataclass
class PacketRecord:
    packet_id: int
    src: int
    dst: int
    generated_at: int
    payload_bits: int
    delivered_at: int | None = None
    hops: list[int] = field(default_factory=list)
    breakdown: list[DelayBreakdown] = field(default_factory=list)
    terminal: str | None = None
    drop_reason: str | None = None

    @property
    def delivered(self) -> bool:
        return self.terminal == "delivered"

    @property
    def e2e(self) -> int | None:
        return None if self.delivered_at is None else self.delivered_at - self.generated_at


@dataclass
class MetricsLedger:
    generated_count: int = 0
    delivered_count: int = 0
    control_tx_count: int = 0
    delivered_payload_bits: int = 0
    sim_duration: float = 0.0
    records: dict[int, PacketRecord] = field(default_factory=dict)
    drops: Counter = field(default_factory=Counter)

    def generated(self, rec: PacketRecord):
        self.records[rec.packet_id] = rec
        self.generated_count += 1

    def delivered(self, rec: PacketRecord, at: int) -> bool:
        if rec.terminal is not None:
            return False
        rec.terminal = "delivered"
        rec.delivered_at = at
        self.delivered_count += 1
        self.delivered_payload_bits += rec.payload_bits
        return True

    def dropped(self, rec: PacketRecord, reason: str) -> bool:
        if rec.terminal is not None:
            return False
        rec.terminal = "dropped"
        rec.drop_reason = reason
        self.drops[reason] += 1
        return True

    def control_tx(self, n: int = 1):
        self.control_tx_count += n

    def finalize(self, sim_duration: float):
        self.sim_duration = sim_duration
        for rec in self.records.values():
            if rec.terminal is None:
                rec.terminal = "in_flight"
        self.drops["in_flight"] += sum(1 for r in self.records.values() if r.terminal == "in_flight")
        if self.drops["in_flight"] == 0:
            del self.drops["in_flight"]

    def terminal_counts(self) -> Counter:
        return Counter(r.terminal for r in self.records.values())


def pdr(ledger: MetricsLedger) -> float:
    if ledger.generated_count == 0:
        return NA
    return ledger.delivered_count / ledger.generated_count


def _delivered(ledger: MetricsLedger):
    return [r for r in ledger.records.values() if r.delivered]


def avg_e2e_delay(ledger: MetricsLedger) -> float:
    """Mean generation-to-delivery time of delivered packets, in seconds."""
    recs = _delivered(ledger)
    if not recs:
        return NA
    return sum(r.e2e for r in recs) / len(recs) / 1e9


def avg_throughput(ledger: MetricsLedger) -> float:
    """Delivered payload in Kbit/s."""
    if ledger.sim_duration <= 0:
        return 0.0 if ledger.delivered_payload_bits == 0 else NA
    return ledger.delivered_payload_bits / ledger.sim_duration / 1000.0


def routing_load(ledger: MetricsLedger) -> float:
    if ledger.delivered_count == 0:
        return NA
    return ledger.control_tx_count / ledger.delivered_count


def avg_hop_count(ledger: MetricsLedger) -> float:
    """Mean number of intermediate relays on delivered packets' paths."""
    recs = _delivered(ledger)
    if not recs:
        return NA
    return sum(len(r.hops) for r in recs) / len(recs)


def delay_breakdown(record: PacketRecord) -> DelayBreakdown:
    """Component totals over all hops of a delivered packet.

    Raises ReconciliationError if the hops do not sum to the E2E delay.
    """
    if not record.delivered:
        raise ValueError(f"packet {record.packet_id} was not delivered")
    totals = [sum(getattr(b, f) for b in record.breakdown) for f in
              ("queuing", "contention", "transmission", "propagation", "ack_overhead")]
    out = DelayBreakdown(*totals)
    if out.total != record.e2e:
        raise ReconciliationError(
            f"packet {record.packet_id}: components sum to {out.total} ns, E2E is {record.e2e} ns")
    return out


def summary(ledger: MetricsLedger) -> dict[str, float]:
    return {
        "pdr": pdr(ledger),
        "e2e_delay_s": avg_e2e_delay(ledger),
        "throughput_kbps": avg_throughput(ledger),
        "routing_load": routing_load(ledger),
        "hop_count": avg_hop_count(ledger),
    }


def component_totals(record: PacketRecord) -> DelayBreakdown:
    """Per-component sums over hops, without checking against the E2E delay."""
    return DelayBreakdown(*[sum(getattr(b, f) for b in record.breakdown) for f in
                            ("queuing", "contention", "transmission", "propagation", "ack_overhead")])


def reconciliation_audit(ledger: MetricsLedger) -> tuple[int, int]:
    """(delivered packets checked, packets whose components miss the E2E delay)."""
    checked = bad = 0
    for rec in ledger.records.values():
        if rec.delivered:
            checked += 1
            if component_totals(rec).total != rec.e2e:
                bad += 1
    return checked, bad
