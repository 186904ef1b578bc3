"""Link classification for undirected connected graphs.

For a graph with simple spectral gap and Fiedler vector v, the first-order
slopes of the gap under single-link perturbations are

    s_kl        = (v_k - v_l)^2          (undirected link k -- l)
    s_{k->l}    = v_l (v_l - v_k)        (arc k -> l)
    s_{l->k}    = v_k (v_k - v_l)        (arc l -> k)

The sign pattern of v splits the nodes into two connected blocks such that
every arc between the blocks has positive slope, arcs inside a block have
opposite slopes in the two directions, and sweeping a threshold across the
entries of v yields nested connected subgraphs whose crossing arcs hinder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GapNotSimpleError, NotConnectedError, NotUndirectedError
from .graphs import WeightedDigraph, adjacency, condensation, laplacian
from .spectra import spectral_gap

# Slopes below this magnitude are reported as first-order neutral.
NEUTRAL_TOL = 1e-10
# Fiedler entries below this magnitude count as zero (non-generic weights).
ZERO_ENTRY_TOL = 1e-9


@dataclass(frozen=True)
class LinkSlopes:
    """First-order gap slopes for one node pair.

    ``s_forward`` is the slope for the arc k -> l, ``s_backward`` for
    l -> k, and ``s_undirected`` for the symmetric link; the three always
    satisfy ``s_forward + s_backward == s_undirected``.
    """

    k: int
    l: int
    s_undirected: float
    s_forward: float
    s_backward: float


@dataclass(frozen=True, eq=False)
class FiedlerPartition:
    """Sign partition of the Fiedler vector plus the two threshold cascades.

    ``g1`` holds the nodes with nonnegative entries, ``g2`` the rest; both
    induce connected subgraphs.  ``cascade1`` grows ``g1`` one distinct
    negative Fiedler value at a time until the full node set is reached
    (``cascade2`` symmetrically grows ``g2`` through the positive values).
    ``zero_entries`` lists nodes whose entry is numerically zero; such nodes
    are assigned to ``g1`` and flag degraded genericity.
    """

    g1: frozenset[int]
    g2: frozenset[int]
    fiedler: np.ndarray
    cascade1: tuple[frozenset[int], ...]
    cascade2: tuple[frozenset[int], ...]
    zero_entries: tuple[int, ...]

    @property
    def has_zero_entries(self) -> bool:
        return bool(self.zero_entries)


@dataclass(frozen=True)
class LinkClassification:
    """One ordered pair with its slopes and the verdict for the arc k -> l."""

    k: int
    l: int
    slopes: LinkSlopes
    label: str  # 'improves' | 'hinders' | 'neutral'


def checked_fiedler(g: WeightedDigraph, tol: float | None = None) -> np.ndarray:
    """Fiedler vector of an undirected connected graph with a simple gap."""
    if g.directed:
        raise NotUndirectedError("operation requires an undirected graph")
    if len(condensation(g).components) != 1:
        raise NotConnectedError("graph is not connected")
    info = spectral_gap(laplacian(g), tol)
    if not info.is_simple:
        raise GapNotSimpleError("spectral gap is not simple")
    return info.fiedler


def _slopes(v: np.ndarray, k: int, l: int) -> LinkSlopes:
    vk, vl = float(v[k]), float(v[l])
    return LinkSlopes(k=k, l=l,
                      s_undirected=(vk - vl) ** 2,
                      s_forward=vl * (vl - vk),
                      s_backward=vk * (vk - vl))


def link_slopes(g: WeightedDigraph, k: int, l: int, tol: float | None = None) -> LinkSlopes:
    """Slopes of the spectral gap for perturbations between nodes k and l."""
    if not (0 <= k < g.n and 0 <= l < g.n):
        raise ValueError(f"node pair ({k}, {l}) out of range")
    if k == l:
        raise ValueError("nodes must differ")
    return _slopes(checked_fiedler(g, tol), k, l)


def _label(s_forward: float) -> str:
    if s_forward > NEUTRAL_TOL:
        return "improves"
    if s_forward < -NEUTRAL_TOL:
        return "hinders"
    return "neutral"


def classify_all_links(g: WeightedDigraph, tol: float | None = None) -> tuple[LinkClassification, ...]:
    """Slope record and verdict for every ordered node pair.

    The Fiedler vector is computed once and shared.  'neutral' means the
    first-order slope vanishes; second-order effects may still move the gap.
    """
    v = checked_fiedler(g, tol)
    out = []
    for k in range(g.n):
        for l in range(g.n):
            if k == l:
                continue
            sl = _slopes(v, k, l)
            out.append(LinkClassification(k=k, l=l, slopes=sl, label=_label(sl.s_forward)))
    return tuple(out)


def _distinct_descending(values: np.ndarray, tol: float) -> list[float]:
    """Cluster near-equal values; return representatives, descending."""
    reps: list[float] = []
    for x in sorted(values, reverse=True):
        if not reps or reps[-1] - x > tol:
            reps.append(float(x))
    return reps


def _cascade(v: np.ndarray, zero_tol: float) -> tuple[frozenset[int], ...]:
    """Nested threshold sets M(d) = {i : v_i + d >= 0} for one sweep.

    Thresholds follow the explicit recipe: with the distinct negative
    entries u_1 > ... > u_q, take eps as half the smallest gap between them
    (half the magnitude when there is a single value) and d_j = -u_j + eps.
    Equal entries share a threshold.
    """
    neg = v[v < -zero_tol]
    if neg.size == 0:
        return ()
    vals = _distinct_descending(neg, zero_tol)
    if len(vals) > 1:
        eps = 0.5 * min(a - b for a, b in zip(vals, vals[1:]))
    else:
        eps = 0.5 * abs(vals[0])
    members = []
    for u in vals:
        d = -u + eps
        members.append(frozenset(np.flatnonzero(v + d >= 0).tolist()))
    return tuple(members)


def fiedler_partition(g: WeightedDigraph, tol: float | None = None) -> FiedlerPartition:
    """Sign partition of the Fiedler vector and both destabilization cascades.

    Nodes with numerically zero entries join ``g1`` (they sit on the
    boundary of the sign cut) and are reported in ``zero_entries`` instead
    of raising, since matrices with repeated structure legitimately produce
    them.
    """
    v = checked_fiedler(g, tol)
    zeros = tuple(int(i) for i in np.flatnonzero(np.abs(v) <= ZERO_ENTRY_TOL))
    veff = v.copy()
    veff[list(zeros)] = 0.0
    g1 = frozenset(int(i) for i in np.flatnonzero(veff >= 0))
    g2 = frozenset(range(g.n)) - g1
    return FiedlerPartition(
        g1=g1, g2=g2, fiedler=v,
        cascade1=_cascade(veff, ZERO_ENTRY_TOL),
        cascade2=_cascade(-veff, ZERO_ENTRY_TOL),
        zero_entries=zeros,
    )


def twin_node_pairs(g: WeightedDigraph) -> list[tuple[int, int, bool]]:
    """Unordered node pairs with identical weighted neighbor rows.

    A twin pair whose shared degree exceeds the minimum degree of the graph
    is predicted first-order neutral: both nodes carry the same Fiedler
    entry, so all three link slopes between them vanish.  Twins at minimum
    degree are reported with ``predicted_neutral=False`` (the degree
    condition is necessary: equal rows alone do not force equal entries).
    """
    if g.directed:
        raise NotUndirectedError("twin detection requires an undirected graph")
    W = adjacency(g)
    d = W.sum(axis=1)
    d_min = d.min() if g.n else 0.0
    out = []
    for k in range(g.n):
        for l in range(k + 1, g.n):
            if np.array_equal(W[k], W[l]):
                out.append((k, l, bool(d[k] > d_min)))
    return out
