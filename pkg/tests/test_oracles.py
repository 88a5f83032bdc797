import math
import random

import pytest

from uavnet.oracles import (OracleResult, bfs_shortest_path, finite_aloha_success, geometric_adjacency,
                            matrix_power_distance, mean_confidence_band, poisson_band, pure_aloha_success)


def test_bfs_examples():
    chain = {0: [1], 1: [0, 2], 2: [1]}
    assert bfs_shortest_path(chain, 0, 2) == 2
    assert bfs_shortest_path(chain, 1, 1) == 0
    assert bfs_shortest_path({0: [], 1: []}, 0, 1) is None


def test_bfs_agrees_with_matrix_powers():
    rng = random.Random(11)
    for _ in range(40):
        pts = [(rng.uniform(0, 600), rng.uniform(0, 600), rng.uniform(0, 100)) for _ in range(15)]
        adj = geometric_adjacency(pts, 249.1)
        s, d = rng.sample(range(15), 2)
        assert bfs_shortest_path(adj, s, d) == matrix_power_distance(adj, s, d)


def test_aloha_formulas():
    assert pure_aloha_success(0.5) == pytest.approx(math.exp(-1))
    # a large population approaches the infinite-population limit
    assert finite_aloha_success(0.5, 10_000) == pytest.approx(math.exp(-1), rel=1e-3)
    assert finite_aloha_success(0.5, 10) > pure_aloha_success(0.5)


def test_poisson_band():
    lo, hi = poisson_band(5.0, 100.0)
    assert lo == pytest.approx(500 - 3 * math.sqrt(500)) and hi == pytest.approx(500 + 3 * math.sqrt(500))


def test_mean_band_contains_mean():
    lo, hi = mean_confidence_band([1.0, 2.0, 3.0, 4.0])
    assert lo < 2.5 < hi


def test_oracle_result_line():
    r = OracleResult.within("x", 1.0, 1.01, 0.05)
    assert r.passed and "PASS" in r.line()
    assert not OracleResult.within("x", 1.0, 1.2, 0.05).passed
