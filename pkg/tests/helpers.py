"""Shared fixtures, generators, and independent oracles for the test suite."""

import numpy as np

import syncgap as sg


# --- fixture graphs ----------------------------------------------------------

def graph_from_w(W) -> sg.WeightedDigraph:
    """Build a graph from an adjacency matrix with W[i, j] = weight of j -> i."""
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    edges = [(j, i, W[i, j]) for i in range(n) for j in range(n) if W[i, j] != 0]
    return sg.build_graph(n, edges)


# 5-node weighted graph whose nodes 1 and 4 (0-based) are twins at minimum
# degree: gap 2 with eigenvector direction (0, -1, 0, 0, 1).
TWINS_W = np.array([
    [0, 1, 2, 0, 1],
    [1, 0, 0, 1, 0],
    [2, 0, 0, 1.5, 0],
    [0, 1, 1.5, 0, 1],
    [1, 0, 0, 1, 0],
], dtype=float)

# 5-node unweighted graph where nodes 3 and 4 share their gap-eigenvector
# entry without sharing neighborhoods: gap 1 with direction (-3, 0, 1, 1, 1).
EQUAL_ENTRY_W = np.array([
    [0, 1, 0, 0, 0],
    [1, 0, 1, 1, 1],
    [0, 1, 0, 0, 1],
    [0, 1, 0, 0, 1],
    [0, 1, 1, 1, 0],
], dtype=float)


def twins_graph() -> sg.WeightedDigraph:
    return graph_from_w(TWINS_W)


def equal_entry_graph() -> sg.WeightedDigraph:
    return graph_from_w(EQUAL_ENTRY_W)


def path_graph(n: int = 3, w: float = 1.0) -> sg.WeightedDigraph:
    edges = []
    for i in range(n - 1):
        edges += [(i, i + 1, w), (i + 1, i, w)]
    return sg.build_graph(n, edges)


def complete_graph(n: int, w: float = 1.0) -> sg.WeightedDigraph:
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            edges += [(i, j, w), (j, i, w)]
    return sg.build_graph(n, edges)


def cycle_graph(n: int, w: float = 1.0) -> sg.WeightedDigraph:
    edges = []
    for i in range(n):
        j = (i + 1) % n
        edges += [(i, j, w), (j, i, w)]
    return sg.build_graph(n, edges)


def master_slave_demo(w: float = 0.75) -> sg.WeightedDigraph:
    """Three-node strongly connected master (arc weight w) driving a two-node
    slave through node 1 (0-based); master spectrum {0, 2w, 3w}, slave block
    spectrum {1, 3}."""
    edges = [(u, v, w) for (u, v) in [(1, 0), (2, 0), (0, 1), (0, 2), (1, 2)]]
    edges += [(1, 3, 1.0), (1, 4, 1.0), (3, 4, 1.0), (4, 3, 1.0)]
    return sg.build_graph(5, edges)


HINDERING_ARC = (3, 1, 2.0)  # slave node 4 -> master node 2 (1-based), weight 2
IMPROVING_ARCS = ((3, 0, 1.0), (3, 1, 1.0), (3, 2, 1.0))  # slave hub


# --- independent oracles ------------------------------------------------------

def brute_force_sccs(g: sg.WeightedDigraph) -> set[frozenset[int]]:
    """Strong components via reachability closure (Floyd-Warshall style)."""
    n = g.n
    reach = np.eye(n, dtype=bool)
    for u, v, _w in g.edges:
        reach[u, v] = True
    for k in range(n):
        reach |= reach[:, k:k + 1] & reach[k:k + 1, :]
    comps = set()
    for i in range(n):
        comps.add(frozenset(j for j in range(n) if reach[i, j] and reach[j, i]))
    return comps


def induces_connected(g: sg.WeightedDigraph, nodes) -> bool:
    """Undirected connectivity of the induced subgraph, by traversal."""
    nodes = set(nodes)
    if not nodes:
        return False
    adj = {i: set() for i in nodes}
    for u, v, _w in g.edges:
        if u in nodes and v in nodes:
            adj[u].add(v)
            adj[v].add(u)
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        for j in adj[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return seen == nodes


# --- random families -----------------------------------------------------------

def random_connected_graph(rng, n_lo=4, n_hi=12, w_lo=0.5, w_hi=2.0):
    """Random weighted undirected connected graph: spanning tree plus extras."""
    n = int(rng.integers(n_lo, n_hi + 1))
    order = rng.permutation(n)
    pairs = {}
    for i in range(1, n):
        u = int(order[i])
        v = int(order[int(rng.integers(0, i))])
        pairs[(min(u, v), max(u, v))] = float(rng.uniform(w_lo, w_hi))
    for _ in range(int(rng.integers(0, n + 1))):
        u, v = int(rng.integers(0, n)), int(rng.integers(0, n))
        if u != v:
            pairs[(min(u, v), max(u, v))] = float(rng.uniform(w_lo, w_hi))
    edges = []
    for (u, v), w in pairs.items():
        edges += [(u, v, w), (v, u, w)]
    return sg.build_graph(n, edges)


def nice_gap_graph(rng, n_lo=4, n_hi=12, sep_min=1e-2, entry_min=1e-3):
    """Random connected graph resampled until the gap is simple with healthy
    separation and the gap eigenvector has no near-zero entries."""
    while True:
        g = random_connected_graph(rng, n_lo, n_hi)
        spec = sg.full_spectrum(sg.laplacian(g))
        lam = spec.eigenvalues.real
        if lam[1] < sep_min:
            continue
        sep = min(lam[1] - lam[0], lam[2] - lam[1])
        if sep < sep_min:
            continue
        info = sg.spectral_gap(sg.laplacian(g))
        if np.abs(info.fiedler).min() < entry_min:
            continue
        return g


def _random_strong_arcs(rng, n, w_lo, w_hi):
    order = rng.permutation(n)
    arcs = {}
    for i in range(n):
        u, v = int(order[i]), int(order[(i + 1) % n])
        arcs[(u, v)] = float(rng.uniform(w_lo, w_hi))
    for _ in range(int(rng.integers(0, n + 1))):
        u, v = int(rng.integers(0, n)), int(rng.integers(0, n))
        if u != v and (u, v) not in arcs:
            arcs[(u, v)] = float(rng.uniform(w_lo, w_hi))
    return arcs


def _random_undirected_arcs(rng, n, w_lo, w_hi):
    order = rng.permutation(n)
    pairs = {}
    for i in range(1, n):
        u = int(order[i])
        v = int(order[int(rng.integers(0, i))])
        pairs[(min(u, v), max(u, v))] = float(rng.uniform(w_lo, w_hi))
    for _ in range(int(rng.integers(0, n))):
        u, v = int(rng.integers(0, n)), int(rng.integers(0, n))
        if u != v:
            pairs[(min(u, v), max(u, v))] = float(rng.uniform(w_lo, w_hi))
    arcs = {}
    for (u, v), w in pairs.items():
        arcs[(u, v)] = w
        arcs[(v, u)] = w
    return arcs


def random_two_component(rng, gap_in="slave", sep_min=1e-2):
    """Random two-strong-component digraph whose gap provably sits in the
    requested block; returns (graph, blocks).

    gap_in='hindered' produces the regime where hindering certificates
    exist: a symmetric master rescaled so its first nonzero eigenvalue
    sits just above the slave gap.
    """
    hindered = gap_in == "hindered"
    want = "slave" if hindered else gap_in
    while True:
        n1 = int(rng.integers(2, 6))
        n2 = int(rng.integers(2, 6))
        if hindered:
            m_arcs = _random_undirected_arcs(rng, n1, 0.5, 1.5)
            s_arcs = _random_strong_arcs(rng, n2, 0.8, 2.0)
            c_lo, c_hi = 0.5, 1.5
        elif gap_in == "slave":
            m_arcs = _random_strong_arcs(rng, n1, 0.8, 2.0)
            s_arcs = _random_strong_arcs(rng, n2, 0.8, 2.0)
            c_lo, c_hi = 0.02, 0.12
        else:
            m_arcs = _random_strong_arcs(rng, n1, 0.02, 0.10)
            s_arcs = _random_strong_arcs(rng, n2, 0.8, 2.0)
            c_lo, c_hi = 0.8, 2.0
        slave_edges = [(u + n1, v + n1, w) for (u, v), w in s_arcs.items()]
        cuts = set()
        for _ in range(int(rng.integers(1, 4))):
            cuts.add((int(rng.integers(0, n1)), n1 + int(rng.integers(0, n2))))
        cut_edges = [(u, v, float(rng.uniform(c_lo, c_hi))) for (u, v) in cuts]
        if hindered:
            # rescale the master so alpha_2 lands a hair above the slave gap
            g0 = sg.build_graph(n1 + n2,
                                [(u, v, w) for (u, v), w in m_arcs.items()]
                                + slave_edges + cut_edges)
            blocks0 = sg.cutset_blocks(g0)
            mu = float(np.linalg.eigvals(blocks0.l2 + blocks0.d_c).real.min())
            alpha2 = float(np.sort(np.linalg.eigvals(blocks0.l1).real)[1])
            scale = float(rng.uniform(1.05, 1.6)) * mu / alpha2
            m_arcs = {k: w * scale for k, w in m_arcs.items()}
        edges = [(u, v, w) for (u, v), w in m_arcs.items()] + slave_edges + cut_edges
        g = sg.build_graph(n1 + n2, edges)
        try:
            blocks = sg.cutset_blocks(g)
            info = sg.gap_location(blocks)
        except sg.SyncgapError:
            continue
        if info.location != want:
            continue
        spec = sg.full_spectrum(sg.assemble_blocks(blocks))
        lam = spec.eigenvalues
        if min(abs(lam[1] - lam[0]), abs(lam[2] - lam[1])) < sep_min:
            continue
        return g, blocks


def random_nonneg_matrix(rng, shape, density=0.6):
    """Random nonnegative matrix with at least one positive entry."""
    while True:
        mask = rng.random(shape) < density
        M = np.where(mask, rng.uniform(0.1, 2.0, shape), 0.0)
        if (M > 0).any():
            return M
