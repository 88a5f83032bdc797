"""Reference computations used to check the simulator.

Each oracle takes its own code path: nothing here calls into the modules
it is meant to validate.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class OracleResult:
    name: str
    expected: float
    observed: float
    tolerance: float
    passed: bool

    @classmethod
    def within(cls, name, expected, observed, tolerance):
        return cls(name, expected, observed, tolerance, abs(expected - observed) <= tolerance)

    @classmethod
    def ordinal(cls, name, expected, observed, holds: bool):
        return cls(name, expected, observed, 0.0, bool(holds))

    def line(self) -> str:
        return (f"{'PASS' if self.passed else 'FAIL'} {self.name}: expected={self.expected!r} "
                f"observed={self.observed!r} tol={self.tolerance!r}")


# -- graphs ------------------------------------------------------------------

def geometric_adjacency(positions, radius: float) -> dict[int, list[int]]:
    pts = np.asarray(positions, dtype=float)
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    n = len(pts)
    return {i: [j for j in range(n) if j != i and d[i, j] <= radius] for i in range(n)}


def bfs_shortest_path(adjacency: dict[int, list[int]], src: int, dst: int) -> int | None:
    """Number of links on a shortest path, or None when unreachable."""
    if src == dst:
        return 0
    seen = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        for v in adjacency.get(u, ()):
            if v not in seen:
                seen[v] = seen[u] + 1
                if v == dst:
                    return seen[v]
                q.append(v)
    return None


def matrix_power_distance(adjacency: dict[int, list[int]], src: int, dst: int) -> int | None:
    """Smallest k with (A^k)[src, dst] > 0, via repeated boolean products."""
    n = max(adjacency) + 1 if adjacency else 0
    if src == dst:
        return 0
    a = np.zeros((n, n), dtype=np.int64)
    for i, nb in adjacency.items():
        a[i, nb] = 1
    reach = np.eye(n, dtype=np.int64)
    for k in range(1, n):
        reach = np.minimum(reach @ a, 1)
        if reach[src, dst]:
            return k
    return None


def component_count(n: int, edges) -> int:
    """Connected components by union-find."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(i) for i in range(n)})


# -- link budget -------------------------------------------------------------

def friis_dbm(p_t_w: float, d: float, f_hz: float) -> float:
    """Free-space received power in dBm from the dB form of the link budget."""
    fspl_db = 20 * math.log10(d) + 20 * math.log10(f_hz) + 20 * math.log10(4 * math.pi / 299_792_458.0)
    return 10 * math.log10(p_t_w * 1000) - fspl_db


def friis_range(p_t_w: float, f_hz: float, noise_w: float, sinr_db: float) -> float:
    """Distance at which the noise-only SNR equals the threshold (dB domain)."""
    budget_db = 10 * math.log10(p_t_w / noise_w) - sinr_db
    fspl_1m = 20 * math.log10(f_hz) + 20 * math.log10(4 * math.pi / 299_792_458.0)
    return 10 ** ((budget_db - fspl_1m) / 20)


# -- random access -----------------------------------------------------------

def pure_aloha_success(g: float) -> float:
    """Infinite-population pure ALOHA: P(no other start within +-T) = e^(-2G)."""
    return math.exp(-2 * g)


def finite_aloha_success(g: float, n: int) -> float:
    """Success probability for ``n`` alternating on/off senders with
    aggregate attempt rate ``g`` per frame time.

    Each sender transmits a frame then stays silent for an exponential gap
    of mean T(n/g - 1). An interferer overlaps the tagged frame if it is on
    at the frame start or starts within the frame; the renewal argument
    gives P(clear) = (1 - r)·e^(-mu) per interferer, with r = g/n its busy
    fraction and mu = 1/(n/g - 1) its gap rate times T.
    """
    r = g / n
    mu = 1.0 / (n / g - 1.0)
    return ((1.0 - r) * math.exp(-mu)) ** (n - 1)


# -- statistics --------------------------------------------------------------

def poisson_band(rate: float, duration: float, k: float = 3.0) -> tuple[float, float]:
    mean = rate * duration
    return mean - k * math.sqrt(mean), mean + k * math.sqrt(mean)


def chi_square_uniform(counts) -> float:
    """p-value of a chi-square goodness-of-fit test against equal cell counts."""
    return float(stats.chisquare(np.asarray(counts, dtype=float)).pvalue)


def mean_confidence_band(samples, level: float = 0.99, effective_n: float | None = None):
    """Two-sided normal band for the mean of ``samples``.

    ``effective_n`` lets autocorrelated series use a reduced sample size.
    """
    x = np.asarray(samples, dtype=float)
    n = len(x) if effective_n is None else effective_n
    z = stats.norm.ppf(0.5 + level / 2)
    half = z * x.std(ddof=1) / math.sqrt(n)
    return x.mean() - half, x.mean() + half


def link_lifetime_bruteforce(p_i, v_i, p_j, v_j, radius: float, horizon: float = 1e4,
                             step: float = 1e-3) -> float:
    """First time the separation exceeds ``radius`` by bisection after a
    coarse forward scan; inf if it stays within range up to ``horizon``."""
    p = np.subtract(p_i, p_j, dtype=float)
    v = np.subtract(v_i, v_j, dtype=float)

    def sep(t):
        return float(np.linalg.norm(p + v * t))

    if sep(0.0) >= radius and sep(step) > sep(0.0):
        return 0.0
    t, dt = 0.0, 0.05
    while t < horizon:
        if sep(t + dt) > radius:
            lo, hi = t, t + dt
            while hi - lo > step * 1e-3:
                mid = (lo + hi) / 2
                lo, hi = (mid, hi) if sep(mid) <= radius else (lo, mid)
            return hi
        t += dt
    return math.inf
