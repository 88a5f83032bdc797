"""Free-space link budget, propagation delay and SINR reception.

``Channel`` is the shared on-air registry used during a run: it tracks which
transmissions each UAV can sense, schedules frame receptions and decides them
against the worst interference seen over the reception window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .geometry import distance

SPEED_OF_LIGHT = 299_792_458.0
BROADCAST = -1


@dataclass(frozen=True)
class ChannelParams:
    carrier_frequency: float = 2.4e9
    noise_power: float = 4e-11
    sinr_threshold_db: float = 6.0
    bit_rate: float = 2e6
    bandwidth: float = 22e6
    path_loss_exponent: float = 2.0
    tx_power: float = 0.1
    # carrier-sense (preamble detect) threshold, -82 dBm
    cs_threshold: float = 6.31e-12

    def __post_init__(self):
        for name in ("carrier_frequency", "noise_power", "bit_rate", "bandwidth",
                     "path_loss_exponent", "tx_power", "cs_threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not math.isfinite(self.sinr_threshold_db):
            raise ValueError("sinr_threshold_db must be finite")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def sinr_threshold(self) -> float:
        return 10.0 ** (self.sinr_threshold_db / 10.0)

    def airtime(self, size_bytes: int) -> int:
        """Frame duration in ns."""
        return int(round(size_bytes * 8 / self.bit_rate * 1e9))


def received_power(p_t: float, tx_pos, rx_pos, c: ChannelParams) -> float:
    d = distance(tx_pos, rx_pos)
    if d == 0.0:
        raise ValueError("transmitter and receiver are co-located")
    return p_t * (c.wavelength / (4.0 * math.pi * d)) ** c.path_loss_exponent


def propagation_delay(tx_pos, rx_pos) -> int:
    return int(round(distance(tx_pos, rx_pos) / SPEED_OF_LIGHT * 1e9))


def max_comm_range(c: ChannelParams, p_t: float | None = None) -> float:
    """Largest distance at which an interference-free frame still decodes."""
    p_t = c.tx_power if p_t is None else p_t
    if p_t <= 0:
        raise ValueError("p_t must be positive")
    floor = c.sinr_threshold * c.noise_power
    return c.wavelength / (4.0 * math.pi) * (p_t / floor) ** (1.0 / c.path_loss_exponent)


class Transmission:
    __slots__ = ("tx_id", "frame", "tx_power", "tx_position", "start", "end",
                 "rx_power", "prop", "sensed_by")

    def __init__(self, tx_id: int, frame, tx_power: float, tx_position, start: int, end: int):
        self.tx_id = tx_id
        self.frame = frame
        self.tx_power = tx_power
        self.tx_position = tx_position
        self.start = start
        self.end = end
        # per-receiver cache filled by Channel.transmit
        self.rx_power: list[float] | None = None
        self.prop: list[int] | None = None
        self.sensed_by: list[int] = []

    @property
    def frame_id(self):
        return getattr(self.frame, "frame_id", None)


@dataclass(frozen=True)
class ReceptionOutcome:
    verdict: str  # success | sinr_failure | below_sensitivity
    min_sinr_db: float
    interferer_ids: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.verdict == "success"


def worst_interference(window_start: int, window_end: int, arrivals) -> float:
    """Peak summed power of ``(arrive, leave, power)`` intervals inside a window."""
    edges = []
    for a, b, pw in arrivals:
        lo = max(a, window_start)
        hi = min(b, window_end)
        if lo < hi:
            edges.append((lo, 1, pw))
            edges.append((hi, 0, pw))
    if not edges:
        return 0.0
    # leaving edges sort before arriving ones at equal times: touching frames do not overlap
    edges.sort(key=lambda e: (e[0], e[1]))
    level = peak = 0.0
    for _, arriving, pw in edges:
        if arriving:
            level += pw
            if level > peak:
                peak = level
        else:
            level -= pw
    return peak


def _verdict(signal: float, interference: float, c: ChannelParams, ids) -> ReceptionOutcome:
    sinr = signal / (c.noise_power + interference)
    sinr_db = 10.0 * math.log10(sinr) if sinr > 0 else -math.inf
    if sinr >= c.sinr_threshold:
        return ReceptionOutcome("success", sinr_db, tuple(ids))
    if signal < c.cs_threshold:
        return ReceptionOutcome("below_sensitivity", sinr_db, tuple(ids))
    return ReceptionOutcome("sinr_failure", sinr_db, tuple(ids))


def evaluate_reception(target: Transmission, rx_pos, concurrent, c: ChannelParams,
                       rx_id: int | None = None) -> ReceptionOutcome:
    """Decide one frame at ``rx_pos`` given every transmission that may overlap it.

    Transmissions emitted by the receiver itself are not interference (the
    half-duplex rule is enforced by ``Channel``).
    """
    signal = received_power(target.tx_power, target.tx_position, rx_pos, c)
    d0 = propagation_delay(target.tx_position, rx_pos)
    w0, w1 = target.start + d0, target.end + d0
    arrivals = []
    ids = []
    for t in concurrent:
        if t is target or (rx_id is not None and t.tx_id == rx_id):
            continue
        d = propagation_delay(t.tx_position, rx_pos)
        a, b = t.start + d, t.end + d
        if a < w1 and b > w0:
            arrivals.append((a, b, received_power(t.tx_power, t.tx_position, rx_pos, c)))
            ids.append(t.tx_id)
    return _verdict(signal, worst_interference(w0, w1, arrivals), c, ids)


class Channel:
    """Shared wireless medium for one replication.

    ``positions`` returns the current position of UAV ``i``. ``listeners[i]``
    receives ``on_busy()``/``on_idle()`` when UAV ``i``'s carrier sense
    changes and ``on_frame(tx, outcome)`` for every frame it was a candidate
    receiver of.
    """

    def __init__(self, kernel, params: ChannelParams, n: int, positions: Callable[[int], tuple]):
        self.kernel = kernel
        self.params = params
        self.n = n
        self.positions = positions
        self.listeners: list = [None] * n
        self.sense_count = [0] * n
        self.transmitting: list[Transmission | None] = [None] * n
        self.recent: list[Transmission] = []
        self.max_airtime = 0
        self.on_tx_start: Callable | None = None
        self.alive = [True] * n
        self._decode_floor = params.sinr_threshold * params.noise_power
        self._k = (params.wavelength / (4.0 * math.pi)) ** params.path_loss_exponent
        self._half_n = params.path_loss_exponent / 2.0

    def busy(self, i: int) -> bool:
        return self.sense_count[i] > 0

    def transmit(self, tx_id: int, frame, size_bytes: int, on_end: Callable | None = None) -> Transmission:
        k = self.kernel
        now = k.now()
        c = self.params
        airtime = c.airtime(size_bytes)
        pos = self.positions(tx_id)
        tx = Transmission(tx_id, frame, c.tx_power, pos, now, now + airtime)
        if airtime > self.max_airtime:
            self.max_airtime = airtime
        self._prune(now)
        self.recent.append(tx)
        self.transmitting[tx_id] = tx

        rx_power = [0.0] * self.n
        prop = [0] * self.n
        pt_k = c.tx_power * self._k
        half_n = self._half_n
        cs = c.cs_threshold
        sensed = [tx_id]
        px, py, pz = pos
        for j in range(self.n):
            if j == tx_id:
                continue
            q = self.positions(j)
            dx, dy, dz = q[0] - px, q[1] - py, q[2] - pz
            d2 = dx * dx + dy * dy + dz * dz
            pw = pt_k / d2 ** half_n if d2 > 0 else math.inf
            rx_power[j] = pw
            prop[j] = int(round(math.sqrt(d2) / SPEED_OF_LIGHT * 1e9))
            if pw >= cs:
                sensed.append(j)
        tx.rx_power = rx_power
        tx.prop = prop
        tx.sensed_by = sensed

        dst = getattr(frame, "dst", BROADCAST)
        if dst == BROADCAST:
            floor = self._decode_floor
            for j in range(self.n):
                if j != tx_id and rx_power[j] >= floor and self.alive[j]:
                    k.schedule(self._rx_end, tx.end + prop[j], tx, j)
        elif 0 <= dst < self.n and dst != tx_id:
            k.schedule(self._rx_end, tx.end + prop[dst], tx, dst)

        counts = self.sense_count
        listeners = self.listeners
        for j in sensed:
            counts[j] += 1
            if counts[j] == 1 and listeners[j] is not None:
                listeners[j].on_busy()
        k.schedule(self._tx_end, tx.end, tx, on_end)
        if self.on_tx_start is not None:
            self.on_tx_start(tx)
        return tx

    def _tx_end(self, tx: Transmission, on_end):
        if self.transmitting[tx.tx_id] is tx:
            self.transmitting[tx.tx_id] = None
        counts = self.sense_count
        listeners = self.listeners
        for j in tx.sensed_by:
            counts[j] -= 1
            if counts[j] == 0 and listeners[j] is not None:
                listeners[j].on_idle()
        if on_end is not None:
            on_end(tx)

    def _prune(self, now: int):
        horizon = now - 2 * self.max_airtime - 10_000
        if self.recent and self.recent[0].end < horizon:
            self.recent = [t for t in self.recent if t.end >= horizon]

    def outcome_at(self, tx: Transmission, j: int) -> ReceptionOutcome:
        """Reception verdict for ``tx`` at UAV ``j`` using the emission-time geometry."""
        c = self.params
        w0 = tx.start + tx.prop[j]
        w1 = tx.end + tx.prop[j]
        arrivals = []
        ids = []
        half_duplex = False
        for t in self.recent:
            if t is tx:
                continue
            if t.tx_id == j:
                if t.start < w1 and t.end > w0:
                    half_duplex = True
                continue
            a = t.start + t.prop[j]
            b = t.end + t.prop[j]
            if a < w1 and b > w0:
                arrivals.append((a, b, t.rx_power[j]))
                ids.append(t.tx_id)
        out = _verdict(tx.rx_power[j], worst_interference(w0, w1, arrivals), c, ids)
        if half_duplex and out.ok:
            return ReceptionOutcome("sinr_failure", out.min_sinr_db, out.interferer_ids)
        return out

    def _rx_end(self, tx: Transmission, j: int):
        listener = self.listeners[j]
        if listener is None or not self.alive[j]:
            return
        listener.on_frame(tx, self.outcome_at(tx, j))
