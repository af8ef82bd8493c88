"""Shared brute-force oracles and invariant checkers for the test suite.

The oracles deliberately avoid the library's computation paths: root sets
come from per-vertex BFS reachability, the scrambling coefficient from a
direct triple loop, and integrals from quadrature over hand-coded branches.
"""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from consensus_lab import WeightedDigraph, wra


def brute_force_root_set(g: WeightedDigraph) -> set[int]:
    """Vertices that reach every other vertex, via plain BFS."""
    succ = [set(np.flatnonzero(g.weights[:, v])) for v in range(g.n)]
    roots = set()
    for start in range(g.n):
        seen = {start}
        frontier = [start]
        while frontier:
            v = frontier.pop()
            for u in succ[v]:
                if u not in seen:
                    seen.add(u)
                    frontier.append(u)
        if len(seen) == g.n:
            roots.add(start)
    return roots


def eta_oracle(m: np.ndarray) -> float:
    """Triple-loop enumeration of the pairwise coupling margins."""
    n = m.shape[0]
    best = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            term = m[i, j] + m[j, i]
            for k in range(n):
                if k != i and k != j:
                    term += min(m[i, k], m[j, k])
            best = min(best, term)
    return float(best)


def random_digraph(rng, n, p, weight=1.0) -> WeightedDigraph:
    w = weight * (rng.random((n, n)) < p)
    np.fill_diagonal(w, 0.0)
    return WeightedDigraph(n, w.astype(float))


def random_strongly_connected(rng, n, extra_p=0.3, weight_range=(0.5, 1.5)) -> WeightedDigraph:
    """A random permutation cycle (guaranteeing strong connectivity) plus extras."""
    perm = rng.permutation(n)
    w = np.zeros((n, n))
    for a, b in zip(perm, np.roll(perm, -1)):
        w[b, a] = rng.uniform(*weight_range)
    extra = rng.random((n, n)) < extra_p
    np.fill_diagonal(extra, False)
    w = np.where(extra & (w == 0), rng.uniform(*weight_range, size=(n, n)), w)
    return WeightedDigraph(n, w)


def random_metzler(rng, n, density=0.5, scale=2.0) -> np.ndarray:
    m = scale * rng.random((n, n)) * (rng.random((n, n)) < density)
    m[np.diag_indices(n)] = rng.normal(size=n)  # diagonal sign must not matter
    return m


def source_components(g: WeightedDigraph) -> list[list[int]]:
    """Strongly connected components with no incoming edges, via scipy labels."""
    adj = csr_matrix((g.weights > 0).T)
    n_comp, labels = connected_components(adj, directed=True, connection="strong")
    has_in = np.zeros(n_comp, dtype=bool)
    dst, src = np.nonzero(g.weights)
    cross = labels[src] != labels[dst]
    has_in[labels[dst[cross]]] = True
    return [list(np.flatnonzero(labels == c)) for c in np.flatnonzero(~has_in)]


def adversarial_x0(g: WeightedDigraph, a=1.0, c=-1.0, filler=0.3) -> np.ndarray:
    """Initial condition freezing two source groups at different values.

    Valid for graphs without a spanning tree: two source components exist,
    each hears only itself, so its members keep their common value forever
    and the disagreement can never drop below |a - c|.
    """
    sources = source_components(g)
    assert len(sources) >= 2, "graph has a spanning tree; no adversarial x0 exists"
    x0 = np.full(g.n, filler)
    x0[sources[0]] = a
    x0[sources[1]] = c
    return x0


def check_shrinking(traj, lap_inf_norm, slack_scale=2.0):
    """Max component nonincreasing / min nondecreasing within integrator slack."""
    dt = traj.meta["dt"]
    stride = traj.meta.get("record_stride", 1)
    sup_gamma = float(np.abs(traj.gamma).max())
    slack = slack_scale * dt * lap_inf_norm * sup_gamma * stride
    vmax = traj.x.max(axis=1)
    vmin = traj.x.min(axis=1)
    assert (np.diff(vmax) <= slack + 1e-12).all(), "max component increased beyond slack"
    assert (np.diff(vmin) >= -slack - 1e-12).all(), "min component decreased beyond slack"


def check_wra_conservation(traj, graph, tol=1e-4):
    from consensus_lab import root_weights

    part, xi = root_weights(graph)
    values = traj.x[:, list(part.s1)] @ xi
    drift = float(np.abs(values - values[0]).max())
    assert drift <= tol, f"weighted root average drifted by {drift}"
    return drift


def check_selection_validity(traj, g, fudge=1e-9):
    """Every recorded selection lies in the band-widened admissible interval.

    Evaluating g just beyond the widened band edges yields the correct
    one-sided limits even when an edge falls exactly on a jump abscissa.
    """
    band = traj.meta["band"]
    tiny = 1e-12 * max(1.0, float(np.abs(traj.x).max()))
    lo = g.values(traj.x - band - tiny)
    hi = g.values(traj.x + band + tiny)
    ok = (lo - fudge <= traj.gamma) & (traj.gamma <= hi + fudge)
    assert ok.all(), f"{(~ok).sum()} selections outside their admissible interval"


def check_interval_decay(reports, dt, slack_factor=10.0):
    for r in reports:
        assert r.v_end <= r.bound_rhs + slack_factor * dt, (
            f"interval {r.k}: v_end={r.v_end} exceeds bound {r.bound_rhs} + slack"
        )
