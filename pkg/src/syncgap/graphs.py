"""Weighted digraphs, Laplacians, strong components, and the cutset block form.

Convention used everywhere: ``W[i, j]`` is the weight of the arc ``j -> i``,
i.e. row ``i`` of the adjacency matrix collects what node ``i`` listens to.
An edge-list line ``u v w`` (1-based) therefore sets ``W[v-1, u-1] = w``.
The Laplacian is ``L = D - W`` with ``D`` the diagonal of row sums, so
``L @ ones(n) == 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DuplicateEdgeError,
    IndexOutOfRangeError,
    NonPositiveWeightError,
    NoSpanningTreeError,
    NotTwoComponentsError,
    ParseError,
    SelfLoopError,
)

Edge = tuple[int, int, float]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class WeightedDigraph:
    """Validated weighted digraph: node count plus an ordered arc list.

    ``directed`` is True when at least one arc lacks a reverse arc of equal
    weight.  Instances are immutable and safe to share across threads.
    """

    n: int
    edges: tuple[Edge, ...]
    directed: bool

    @property
    def m(self) -> int:
        return len(self.edges)


def build_graph(n: int, edges) -> WeightedDigraph:
    """Validate an edge list and freeze it into a :class:`WeightedDigraph`.

    Parameters
    ----------
    n : int
        Number of nodes; indices run over ``0 .. n-1``.
    edges : iterable of (src, dst, weight)
        Directed arcs.  Parallel arcs are rejected rather than merged, so a
        duplicated line in an input file surfaces as an error instead of a
        silently doubled weight.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"node count must be a positive integer, got {n!r}")
    n = int(n)
    seen: set[tuple[int, int]] = set()
    out: list[Edge] = []
    for e in edges:
        try:
            u, v, w = e
        except (TypeError, ValueError):
            raise ValueError(f"edge {e!r} is not a (src, dst, weight) triple")
        u, v, w = int(u), int(v), float(w)
        if not (0 <= u < n and 0 <= v < n):
            raise IndexOutOfRangeError(f"edge ({u}, {v}, {w}) references a node outside [0, {n})")
        if u == v:
            raise SelfLoopError(f"edge ({u}, {v}, {w}) is a self-loop")
        if not (math.isfinite(w) and w > 0):
            raise NonPositiveWeightError(f"edge ({u}, {v}, {w}) has non-positive weight")
        if (u, v) in seen:
            raise DuplicateEdgeError(f"edge ({u}, {v}, {w}) duplicates an earlier arc")
        seen.add((u, v))
        out.append((u, v, w))
    weights = {(u, v): w for u, v, w in out}
    directed = any(weights.get((v, u)) != w for (u, v), w in weights.items())
    return WeightedDigraph(n=n, edges=tuple(out), directed=directed)


def adjacency(g: WeightedDigraph) -> np.ndarray:
    """Dense adjacency matrix with ``W[i, j]`` = weight of the arc ``j -> i``."""
    W = np.zeros((g.n, g.n))
    for u, v, w in g.edges:
        W[v, u] = w
    return W


@dataclass(frozen=True, eq=False)
class LaplacianMatrix:
    """Dense graph Laplacian ``D - W``; rows sum to zero."""

    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def laplacian(g: WeightedDigraph) -> LaplacianMatrix:
    """Laplacian of the graph under the row convention above.

    The vector of ones is always in the kernel; for undirected graphs the
    matrix is symmetric.
    """
    W = adjacency(g)
    L = np.diag(W.sum(axis=1)) - W
    return LaplacianMatrix(entries=_readonly(L))


@dataclass(frozen=True)
class CondensationReport:
    """Strong components and the acyclic structure between them.

    ``components`` partitions the node set and is sorted by smallest member.
    ``dag_edges`` holds (source component, target component) index pairs.
    ``root_components`` lists component indices with no incoming cutset;
    ``satisfies_a1`` is True iff there is exactly one root, which is
    equivalent to the existence of a spanning diverging tree.
    """

    components: tuple[frozenset[int], ...]
    dag_edges: tuple[tuple[int, int], ...]
    root_components: tuple[int, ...]
    satisfies_a1: bool


def _tarjan_sccs(n: int, adj: list[list[int]]) -> list[list[int]]:
    """Iterative Tarjan strong components (no recursion limit issues)."""
    index = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for i in range(pi, len(adj[v])):
                u = adj[v][i]
                if index[u] == -1:
                    work[-1] = (v, i + 1)
                    work.append((u, 0))
                    advanced = True
                    break
                if on_stack[u]:
                    lowlink[v] = min(lowlink[v], index[u])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    u = stack.pop()
                    on_stack[u] = False
                    comp.append(u)
                    if u == v:
                        break
                sccs.append(comp)
    return sccs


def condensation(g: WeightedDigraph) -> CondensationReport:
    """Strong components, condensation DAG, and the single-root check.

    A single node counts as a strong component, so a one-node master is a
    legitimate root.  Components depend on the topology only, never on the
    weights.
    """
    adj: list[list[int]] = [[] for _ in range(g.n)]
    for u, v, _w in g.edges:
        adj[u].append(v)
    sccs = _tarjan_sccs(g.n, adj)
    sccs.sort(key=min)
    comp_of = {}
    for ci, comp in enumerate(sccs):
        for v in comp:
            comp_of[v] = ci
    dag = set()
    for u, v, _w in g.edges:
        cu, cv = comp_of[u], comp_of[v]
        if cu != cv:
            dag.add((cu, cv))
    has_incoming = {cv for _cu, cv in dag}
    roots = tuple(ci for ci in range(len(sccs)) if ci not in has_incoming)
    return CondensationReport(
        components=tuple(frozenset(c) for c in sccs),
        dag_edges=tuple(sorted(dag)),
        root_components=roots,
        satisfies_a1=len(roots) == 1,
    )


@dataclass(frozen=True, eq=False)
class CutsetBlocks:
    """Block decomposition of a two-strong-component Laplacian.

    ``l1`` is the Laplacian of the root (master) component, ``l2`` the
    Laplacian of the driven (slave) component before the cutset degrees are
    added, ``c`` the cutset adjacency (``c[i, j]`` = weight of the arc
    ``master_nodes[j] -> slave_nodes[i]``) and ``d_c`` the diagonal of its
    row sums.  Reassembling ``[[l1, 0], [-c, l2 + d_c]]`` reproduces the
    graph Laplacian under the node order ``master_nodes + slave_nodes``.
    """

    l1: np.ndarray
    l2: np.ndarray
    c: np.ndarray
    d_c: np.ndarray
    master_nodes: tuple[int, ...]
    slave_nodes: tuple[int, ...]


def cutset_blocks(g: WeightedDigraph) -> CutsetBlocks:
    """Extract the master/slave block form of a two-component digraph.

    Raises
    ------
    NotTwoComponentsError
        If the condensation has one component or more than two.
    NoSpanningTreeError
        If the two components are mutually unreachable (two roots).
    """
    rep = condensation(g)
    if len(rep.components) != 2:
        raise NotTwoComponentsError(
            f"expected exactly two strong components, found {len(rep.components)}")
    if not rep.satisfies_a1:
        raise NoSpanningTreeError("both components are roots: no spanning diverging tree")
    master_ci = rep.root_components[0]
    slave_ci = 1 - master_ci
    master = tuple(sorted(rep.components[master_ci]))
    slave = tuple(sorted(rep.components[slave_ci]))
    W = adjacency(g)
    Wm = W[np.ix_(master, master)]
    Ws = W[np.ix_(slave, slave)]
    c = W[np.ix_(slave, master)]
    l1 = np.diag(Wm.sum(axis=1)) - Wm
    l2 = np.diag(Ws.sum(axis=1)) - Ws
    d_c = np.diag(c.sum(axis=1))
    return CutsetBlocks(
        l1=_readonly(l1), l2=_readonly(l2), c=_readonly(c), d_c=_readonly(d_c),
        master_nodes=master, slave_nodes=slave,
    )


def assemble_blocks(blocks: CutsetBlocks) -> np.ndarray:
    """Rebuild the full Laplacian ``[[l1, 0], [-c, l2 + d_c]]``."""
    n1 = blocks.l1.shape[0]
    n2 = blocks.l2.shape[0]
    L = np.zeros((n1 + n2, n1 + n2))
    L[:n1, :n1] = blocks.l1
    L[n1:, :n1] = -blocks.c
    L[n1:, n1:] = blocks.l2 + blocks.d_c
    return L


# --- edge-list text format -------------------------------------------------
#
# One arc per line: "u v w" with 1-based node indices and positive weight.
# '#' starts a comment, blank lines are ignored.  An optional header line
# "nodes N" fixes the node count; otherwise n is the largest index seen.

def parse_edge_list(text: str, source: str = "<string>") -> WeightedDigraph:
    """Parse the edge-list text format into a graph."""
    n_declared = None
    raw: list[tuple[int, int, int, float]] = []  # (line_no, u, v, w) 1-based
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if parts[0].lower() == "nodes":
            if n_declared is not None:
                raise ParseError(f"{source}:{line_no}: repeated 'nodes' header")
            if len(parts) != 2:
                raise ParseError(f"{source}:{line_no}: header must be 'nodes N'")
            try:
                n_declared = int(parts[1])
            except ValueError:
                raise ParseError(f"{source}:{line_no}: bad node count {parts[1]!r}")
            if n_declared < 1:
                raise ParseError(f"{source}:{line_no}: node count must be positive")
            continue
        if len(parts) != 3:
            raise ParseError(f"{source}:{line_no}: expected 'u v w', got {body!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2])
        except ValueError:
            raise ParseError(f"{source}:{line_no}: could not parse {body!r}")
        if u < 1 or v < 1:
            raise ParseError(f"{source}:{line_no}: node indices are 1-based")
        raw.append((line_no, u, v, w))
    if n_declared is None:
        if not raw:
            raise ParseError(f"{source}: empty edge list and no 'nodes' header")
        n_declared = max(max(u, v) for _ln, u, v, _w in raw)
    return build_graph(n_declared, [(u - 1, v - 1, w) for _ln, u, v, w in raw])


def load_edge_list(path) -> WeightedDigraph:
    """Read an edge-list file from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh.read(), source=str(path))


def format_edge_list(g: WeightedDigraph) -> str:
    """Render a graph in the edge-list text format (1-based, with header)."""
    lines = [f"nodes {g.n}"]
    lines += [f"{u + 1} {v + 1} {w!r}" for u, v, w in g.edges]
    return "\n".join(lines) + "\n"


def save_edge_list(g: WeightedDigraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_edge_list(g))
