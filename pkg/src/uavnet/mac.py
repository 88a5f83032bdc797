"""Medium access: CSMA/CA (DCF) and pure ALOHA with stop-and-wait ACKs.

Each UAV owns one MAC instance. The MAC holds the FIFO transmit queue, asks
its host to route the head-of-line frame, contends for the channel,
transmits, waits for the ACK and retries up to ``retry_limit`` times.

Timing is integer nanoseconds throughout.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .channel import BROADCAST, Transmission, propagation_delay

US = 1_000
MS = 1_000_000

DATA = "data"
ACK = "ack"
HELLO = "hello"
ADVERT = "dsdv"
CONTROL_KINDS = (HELLO, ADVERT)


@dataclass(frozen=True)
class MacParams:
    protocol: str = "csma_ca"
    slot: int = 20 * US
    sifs: int = 10 * US
    difs: int = 50 * US
    cw_min: int = 31
    cw_max: int = 1023
    retry_limit: int = 5
    ack_timeout: int | None = None  # None: derived from SIFS, ACK airtime and range
    aloha_max_backoff: int = 30 * MS
    queue_capacity: int = 100
    ack_enabled: bool = True
    immediate_access: bool = False

    def __post_init__(self):
        if self.protocol not in ("csma_ca", "aloha"):
            raise ValueError(f"unknown MAC protocol {self.protocol!r}")
        if not 0 <= self.cw_min <= self.cw_max:
            raise ValueError("need 0 <= cw_min <= cw_max")
        if self.retry_limit < 0:
            raise ValueError("retry_limit must be >= 0")
        if self.queue_capacity < 1:
            raise ValueError("queue_capacity must be >= 1")


def default_ack_timeout(p: MacParams, ack_airtime: int, comm_range: float) -> int:
    """SIFS + ACK airtime + round-trip propagation at full range + 10 us guard."""
    round_trip = 2 * propagation_delay((0.0, 0.0, 0.0), (comm_range, 0.0, 0.0))
    return p.sifs + ack_airtime + round_trip + 10 * US


def next_backoff(cw: int, rng) -> int:
    """Backoff slots drawn uniformly from ``{0, ..., cw}``."""
    if cw < 0:
        raise ValueError("cw must be >= 0")
    return rng.randint(0, cw) if cw > 0 else 0


def next_cw(cw: int, p: MacParams) -> int:
    return min(2 * (cw + 1) - 1, p.cw_max)


def aloha_retry_delay(rng, p: MacParams) -> int:
    return int(rng.uniform(0, p.aloha_max_backoff))


_frame_ids = itertools.count()


class Frame:
    __slots__ = ("kind", "src", "dst", "size", "packet", "payload", "frame_id", "acked_id")

    def __init__(self, kind: str, src: int, dst: int, size: int, packet=None, payload=None,
                 acked_id: int | None = None, frame_id: int | None = None):
        self.kind = kind
        self.src = src
        self.dst = dst
        self.size = size
        self.packet = packet
        self.payload = payload
        self.acked_id = acked_id
        self.frame_id = next(_frame_ids) if frame_id is None else frame_id

    @property
    def broadcast(self) -> bool:
        return self.dst == BROADCAST

    def __repr__(self):
        return f"Frame({self.kind}, {self.src}->{self.dst}, {self.size}B, id={self.frame_id})"


@dataclass(frozen=True)
class AckOutcome:
    verdict: str  # acked | timeout
    rtt: int | None = None


class MacTxState:
    __slots__ = ("frame", "attempt", "cw", "backoff_remaining", "phase", "access_start",
                 "tx_end", "countdown_start")

    def __init__(self):
        self.frame: Frame | None = None
        self.attempt = 0
        self.cw = 0
        self.backoff_remaining: int | None = None
        self.phase = "idle"  # idle | contending | transmitting | awaiting_ack
        self.access_start = 0
        self.tx_end = 0
        self.countdown_start = 0


class Mac:
    """Common queueing, transmit, ACK and retry machinery."""

    def __init__(self, host, kernel, channel, params: MacParams, rng, ack_bytes: int = 30,
                 ack_timeout: int | None = None):
        self.host = host
        self.id = host.id
        self.kernel = kernel
        self.channel = channel
        self.p = params
        self.rng = rng
        self.ack_bytes = ack_bytes
        self.ack_timeout = ack_timeout if ack_timeout is not None else params.ack_timeout
        if self.ack_timeout is None:
            self.ack_timeout = params.sifs + channel.params.airtime(ack_bytes) + 12 * US
        self.queue: deque[Frame] = deque()
        self.state = MacTxState()
        self._event = None  # pending contention / timeout event
        self._ack_out: int | None = None  # end time of an ACK we are sending
        self.enabled = True
        self.attempts = 0
        self.channel.listeners[self.id] = self

    # -- queue -----------------------------------------------------------
    def enqueue(self, frame: Frame) -> bool:
        if not self.enabled:
            self.host.mac_drop(frame, "dead_node")
            return False
        if len(self.queue) >= self.p.queue_capacity:
            self.host.mac_drop(frame, "queue_overflow")
            return False
        self.queue.append(frame)
        if self.state.phase == "idle":
            self._next()
        return True

    def flush(self, reason: str):
        """Drop everything queued or in service (used when the UAV dies)."""
        self.enabled = False
        self.kernel.cancel(self._event)
        self._event = None
        st = self.state
        if st.frame is not None and st.phase != "transmitting":
            f, st.frame = st.frame, None
            st.phase = "idle"
            self.host.mac_drop(f, reason)
        while self.queue:
            self.host.mac_drop(self.queue.popleft(), reason)

    def _next(self):
        st = self.state
        while self.queue and self.enabled:
            frame = self.queue.popleft()
            if not self.host.mac_prepare(frame):
                continue
            st.frame = frame
            st.attempt = 0
            st.cw = self.p.cw_min
            st.backoff_remaining = None
            st.access_start = self.kernel.now()
            self._contend()
            return
        st.frame = None
        st.phase = "idle"

    # -- transmit --------------------------------------------------------
    def _contend(self):
        raise NotImplementedError

    def _transmit(self):
        self._event = None
        st = self.state
        own = self.channel.transmitting[self.id]
        if own is not None:
            # still sending an ACK; go right after it
            self._event = self.kernel.schedule(self._transmit, own.end)
            return
        st.phase = "transmitting"
        st.attempt += 1
        self.attempts += 1
        frame = st.frame
        tx = self.channel.transmit(self.id, frame, frame.size, self._tx_done)
        self.host.mac_tx_started(frame, tx, st.attempt)

    def _tx_done(self, tx: Transmission):
        st = self.state
        if st.frame is not tx.frame:
            return
        st.tx_end = tx.end
        if not self.enabled:
            st.frame = None
            st.phase = "idle"
            self.host.mac_drop(tx.frame, "dead_node")
            return
        if tx.frame.broadcast or not self.p.ack_enabled:
            self._finish(None)
            return
        st.phase = "awaiting_ack"
        # strictly after the timeout: an ACK landing exactly on it still counts
        self._event = self.kernel.schedule(self._ack_timeout, tx.end + self.ack_timeout + 1)

    def _ack_timeout(self):
        self._event = None
        st = self.state
        self.host.mac_ack_outcome(st.frame, AckOutcome("timeout"))
        if st.attempt > self.p.retry_limit:
            f = st.frame
            st.frame = None
            st.phase = "idle"
            self.host.mac_drop(f, "retry_exhausted")
            self._next()
            return
        self._retry()

    def _retry(self):
        raise NotImplementedError

    def _finish(self, ack: Frame | None):
        st = self.state
        f = st.frame
        st.frame = None
        st.phase = "idle"
        self.host.mac_done(f, ack)
        self._next()

    # -- receive ---------------------------------------------------------
    def on_frame(self, tx: Transmission, outcome):
        frame = tx.frame
        if not outcome.ok:
            self.host.mac_rx_failed(tx, outcome)
            return
        if frame.kind == ACK:
            if frame.dst != self.id:
                return
            st = self.state
            if (st.phase == "awaiting_ack" and st.frame is not None
                    and frame.acked_id == st.frame.frame_id):
                self.kernel.cancel(self._event)
                self._event = None
                rtt = self.kernel.now() - st.tx_end
                self.host.mac_ack_outcome(st.frame, AckOutcome("acked", rtt))
                self._finish(frame)
            return
        if frame.dst == self.id and frame.kind == DATA and self.p.ack_enabled:
            self.kernel.schedule_in(self._send_ack, self.p.sifs, frame)
        if frame.dst == self.id or frame.dst == BROADCAST:
            self.host.mac_received(tx, outcome)

    def _send_ack(self, data: Frame):
        if not self.enabled or self.channel.transmitting[self.id] is not None:
            return
        extra = self.host.ack_payload(data)
        ack = Frame(ACK, self.id, data.src, self.ack_bytes + (8 if extra is not None else 0),
                    payload=extra, acked_id=data.frame_id)
        tx = self.channel.transmit(self.id, ack, ack.size, self._ack_sent)
        self.host.mac_tx_started(ack, tx, 1)

    def _ack_sent(self, tx):
        pass

    # -- carrier sense ---------------------------------------------------
    def on_busy(self):
        pass

    def on_idle(self):
        pass


class CsmaCaMac(Mac):
    """DCF: DIFS, slotted backoff frozen while busy, binary exponential CW."""

    def _contend(self):
        st = self.state
        st.phase = "contending"
        if st.backoff_remaining is None:
            if self.p.immediate_access and st.attempt == 0 and not self.channel.busy(self.id):
                st.backoff_remaining = 0
            else:
                st.backoff_remaining = next_backoff(st.cw, self.rng)
        if not self.channel.busy(self.id):
            self._start_countdown()

    def _start_countdown(self):
        st = self.state
        now = self.kernel.now()
        st.countdown_start = now + self.p.difs
        self._event = self.kernel.schedule(
            self._countdown_done, st.countdown_start + st.backoff_remaining * self.p.slot)

    def _countdown_done(self):
        self._event = None
        self.state.backoff_remaining = 0
        self._transmit()

    def on_busy(self):
        st = self.state
        if st.phase != "contending" or self._event is None:
            return
        self.kernel.cancel(self._event)
        self._event = None
        elapsed = (self.kernel.now() - st.countdown_start) // self.p.slot
        if elapsed > 0:
            st.backoff_remaining = max(0, st.backoff_remaining - elapsed)

    def on_idle(self):
        st = self.state
        if st.phase == "contending" and self._event is None:
            self._start_countdown()

    def _retry(self):
        st = self.state
        st.cw = next_cw(st.cw, self.p)
        st.backoff_remaining = None
        self._contend()


class AlohaMac(Mac):
    """Pure ALOHA: send at once, retransmit after a uniform random wait."""

    def _contend(self):
        st = self.state
        st.phase = "contending"
        if st.attempt == 0:
            self._transmit()
        else:
            self._event = self.kernel.schedule_in(self._transmit, aloha_retry_delay(self.rng, self.p))

    def _retry(self):
        self._contend()


def make_mac(host, kernel, channel, params: MacParams, rng, **kw) -> Mac:
    cls = CsmaCaMac if params.protocol == "csma_ca" else AlohaMac
    return cls(host, kernel, channel, params, rng, **kw)
