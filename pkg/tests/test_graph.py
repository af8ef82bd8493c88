import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consensus_lab import (
    NoSpanningTreeError,
    WeightedDigraph,
    has_spanning_tree,
    is_delta_scrambling,
    laplacian,
    left_null_vector,
    read_edge_list,
    root_partition,
    scrambling_coefficient,
    wra,
    write_edge_list,
)
from helpers import brute_force_root_set, eta_oracle, random_digraph, random_metzler, random_strongly_connected

FIG1_L = np.array([
    [1, -1, 0, 0],
    [-1, 1, 0, 0],
    [-1, 0, 1, 0],
    [-1, -1, 0, 2],
], dtype=float)


def test_laplacian_fig1_exact(fig1):
    np.testing.assert_array_equal(laplacian(fig1), FIG1_L)


def test_laplacian_empty_graph():
    g = WeightedDigraph(3, np.zeros((3, 3)))
    np.testing.assert_array_equal(laplacian(g), np.zeros((3, 3)))


def test_laplacian_row_sums_and_signs():
    rng = np.random.default_rng(0)
    for _ in range(25):
        g = random_digraph(rng, int(rng.integers(2, 8)), 0.4, weight=float(rng.uniform(0.1, 3)))
        lap = laplacian(g)
        assert np.abs(lap.sum(axis=1)).max() < 1e-12
        off = lap - np.diag(np.diag(lap))
        assert (off <= 0).all()
        assert (np.diag(lap) >= 0).all()


def test_rejects_negative_weight():
    w = np.zeros((2, 2))
    w[0, 1] = -1.0
    with pytest.raises(ValueError, match="nonnegative"):
        WeightedDigraph(2, w)


def test_rejects_self_loop():
    w = np.eye(3)
    with pytest.raises(ValueError, match="diagonal"):
        WeightedDigraph(3, w)


def test_root_partition_fig1(fig1):
    part = root_partition(fig1)
    assert part.s1 == (0, 1)
    assert part.s2 == (2, 3)


def test_root_partition_complete_k3():
    w = np.ones((3, 3)) - np.eye(3)
    part = root_partition(WeightedDigraph(3, w))
    assert part.s1 == (0, 1, 2)
    assert part.s2 == ()


def test_root_partition_fig4_no_tree(fig4):
    assert root_partition(fig4) is None
    assert not has_spanning_tree(fig4)


def test_root_partition_block_form(fig1):
    rng = np.random.default_rng(1)
    graphs = [fig1] + [random_digraph(rng, 6, 0.3) for _ in range(20)]
    for g in graphs:
        part = root_partition(g)
        if part is None or not part.s2:
            continue
        permuted = part.permuted(laplacian(g))
        n1 = len(part.s1)
        assert np.all(permuted[:n1, n1:] == 0)


def _all_digraphs(n):
    slots = [(i, j) for i in range(n) for j in range(n) if i != j]
    for bits in range(2 ** len(slots)):
        w = np.zeros((n, n))
        for b, (i, j) in enumerate(slots):
            if bits >> b & 1:
                w[i, j] = 1.0
        yield WeightedDigraph(n, w)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_root_partition_matches_bruteforce_exhaustive(n):
    for g in _all_digraphs(n):
        expected = brute_force_root_set(g)
        part = root_partition(g)
        if not expected:
            assert part is None
        else:
            assert part is not None
            assert set(part.s1) == expected


def test_root_partition_matches_bruteforce_random():
    rng = np.random.default_rng(2)
    for _ in range(200):
        n = int(rng.integers(2, 8))
        g = random_digraph(rng, n, float(rng.uniform(0.1, 0.6)))
        expected = brute_force_root_set(g)
        part = root_partition(g)
        assert (part is not None) == bool(expected)
        if part is not None:
            assert set(part.s1) == expected
            # strongly connected exactly when every vertex is a root
            assert (len(part.s1) == n) == (expected == set(range(n)))


def test_left_null_vector_fig1_block(fig1):
    part = root_partition(fig1)
    xi = left_null_vector(part.root_block(laplacian(fig1)))
    np.testing.assert_allclose(xi, [0.5, 0.5], atol=1e-12)


def test_left_null_vector_single_root():
    assert left_null_vector(np.array([[0.0]])) == pytest.approx([1.0])


def test_left_null_vector_three_cycle():
    g = WeightedDigraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
    lap = laplacian(g)
    xi = left_null_vector(lap)
    np.testing.assert_allclose(xi, [1 / 3] * 3, atol=1e-12)
    np.testing.assert_allclose(xi @ lap, 0.0, atol=1e-12)


def test_left_null_vector_rejects_reducible():
    lap = np.array([[1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
    with pytest.raises(ValueError, match="reducible"):
        left_null_vector(lap)


def test_left_null_vector_residual_and_positivity():
    rng = np.random.default_rng(3)
    for _ in range(30):
        g = random_strongly_connected(rng, int(rng.integers(2, 9)))
        lap = laplacian(g)
        xi = left_null_vector(lap)
        assert np.abs(xi @ lap).max() <= 1e-10
        assert xi.min() > 0
        assert xi.sum() == pytest.approx(1.0, abs=1e-12)


def test_wra_fig1(fig1):
    x = np.array([3.0, 5.0, -2.0, 11.0])
    assert wra(x, fig1) == pytest.approx((x[0] + x[1]) / 2, abs=1e-12)


def test_wra_consensus_state(fig1):
    assert wra(np.full(4, 2.5), fig1) == pytest.approx(2.5, abs=1e-12)


def test_wra_double_star(double_star):
    rng = np.random.default_rng(4)
    x = rng.uniform(-5, 5, 12)
    assert wra(x, double_star) == pytest.approx((x[0] + x[1]) / 2, abs=1e-12)


def test_wra_no_spanning_tree_raises(fig4):
    with pytest.raises(NoSpanningTreeError):
        wra(np.zeros(6), fig4)


def test_eta_fig1_scrambling(fig1):
    eta = scrambling_coefficient(-laplacian(fig1))
    assert eta == pytest.approx(1.0, abs=1e-12)
    assert eta == pytest.approx(eta_oracle(-laplacian(fig1)))
    assert eta > 0  # scrambling


def test_eta_disconnected_components_zero():
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = w[2, 3] = w[3, 2] = 1.0
    assert scrambling_coefficient(w) == 0.0


def test_eta_complete_graph():
    n, delta = 8, 0.25
    w = delta * (np.ones((n, n)) - np.eye(n))
    assert scrambling_coefficient(w) == pytest.approx(n * delta, rel=1e-12)


def test_eta_matches_oracle_random():
    rng = np.random.default_rng(5)
    for _ in range(50):
        m = random_metzler(rng, int(rng.integers(2, 9)))
        assert scrambling_coefficient(m) == pytest.approx(eta_oracle(m), abs=1e-12)


def test_eta_diagonal_invariance():
    rng = np.random.default_rng(6)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        m = random_metzler(rng, n)
        shifted = m + np.diag(rng.normal(scale=10, size=n))
        assert scrambling_coefficient(m) == pytest.approx(scrambling_coefficient(shifted), abs=1e-12)


def test_eta_rejects_negative_offdiagonal():
    m = np.zeros((3, 3))
    m[0, 1] = -0.5
    with pytest.raises(ValueError, match="Metzler"):
        scrambling_coefficient(m)


def test_delta_scrambling_fig1(fig1):
    assert is_delta_scrambling(fig1, 1.0)
    assert not is_delta_scrambling(fig1, 1.5)


def test_delta_scrambling_complete_50():
    n = 50
    w = 0.1 * (np.ones((n, n)) - np.eye(n))
    g = WeightedDigraph(n, w)
    assert is_delta_scrambling(g, 0.1)
    assert scrambling_coefficient(w) == pytest.approx(5.0, rel=1e-12)


def test_delta_scrambling_implies_eta_bound():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(2, 8))
        g = random_digraph(rng, n, 0.5, weight=1.0)
        g = WeightedDigraph(n, g.weights * rng.uniform(0.05, 2.0, size=(n, n)))
        delta = float(rng.uniform(0.05, 1.5))
        if is_delta_scrambling(g, delta):
            assert scrambling_coefficient(-laplacian(g)) >= delta - 1e-12


@settings(max_examples=40)
@given(st.integers(2, 6), st.integers(0, 2**30))
def test_eta_of_laplacian_equals_eta_of_weights(n, seed):
    g = random_digraph(np.random.default_rng(seed), n, 0.5)
    assert scrambling_coefficient(-laplacian(g)) == pytest.approx(
        scrambling_coefficient(g.weights), abs=1e-12
    )


def test_edge_list_roundtrip(tmp_path, fig1):
    path = tmp_path / "g.edges"
    write_edge_list(fig1, path)
    g2 = read_edge_list(path)
    np.testing.assert_array_equal(fig1.weights, g2.weights)


def test_edge_list_comments_and_errors(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("# comment\nn 2\n0 1 0.25\n")
    g = read_edge_list(path)
    assert g.weights[1, 0] == 0.25
    path.write_text("0 1 0.25\n")
    with pytest.raises(ValueError, match="header"):
        read_edge_list(path)
    path.write_text("n 2\n0 1\n")
    with pytest.raises(ValueError, match="src dst weight"):
        read_edge_list(path)
