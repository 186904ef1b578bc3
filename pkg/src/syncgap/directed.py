"""Cutset perturbation analysis for two-strong-component digraphs.

With the Laplacian in block form ``[[L1, 0], [-C, L2 + D_C]]`` the spectrum
is the union of the block spectra, so the gap sits either in the master
block or in the slave block.  When it sits in the slave block it equals the
smallest eigenvalue mu of ``L2 + D_C``, which is real, simple and positive
with positive left/right eigenvectors w, y, and the slopes under cutset
perturbations are

    forward  (delta: slave x master):  s = w.T D_delta y / (w.T y) > 0
    backward (delta: master x slave):  s = -w.T C (L1 - mu I)^{-1} delta y / (w.T y)

Backward perturbations make the graph strongly connected; depending on how
the master eigenbasis loads the cutset they can improve or hinder, and this
module constructs certificates for both directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    AmbiguousLocationError,
    GapInMasterError,
    GapNotSimpleError,
    NotDiagonalizableError,
    NotIrreducibleError,
    SingularShiftError,
)
from .graphs import CutsetBlocks, assemble_blocks
from .spectra import SIMPLE_RTOL, GapInfo, fd_gap_slope, full_spectrum

# Classification threshold on slopes, matching the undirected module.
NEUTRAL_TOL = 1e-10
# Eigenvector-matrix condition number above which the master Laplacian is
# treated as defective.
DIAGONALIZABLE_COND = 1e8


@dataclass(frozen=True, eq=False)
class SlaveEig:
    """Smallest eigenvalue of ``L2 + D_C`` with positive eigenvectors.

    Normalized so that ``max(y) == 1`` and ``w @ y == 1``.
    """

    mu: float
    w: np.ndarray
    y: np.ndarray


@dataclass(frozen=True, eq=False)
class MasterEigenbasis:
    """Eigen-decomposition of the master Laplacian.

    ``alphas`` ascend by real part starting at 0; ``basis[:, 0]`` is exactly
    the ones vector and ``dual[i] @ basis[:, j] == delta_ij``.  When the
    master has zero column sums every non-first basis vector has zero entry
    sum and the ones-coefficient of any canonical basis vector is 1/n.
    """

    alphas: np.ndarray
    basis: np.ndarray
    dual: np.ndarray
    diagonalizable: bool
    zero_column_sums: bool


@dataclass(frozen=True, eq=False)
class PerturbationReport:
    """A candidate cutset perturbation with its slope and cross-check.

    ``delta`` is slave x master for direction 'forward' and master x slave
    for 'backward'.  ``fd_slope`` is the finite-difference oracle value
    (None when skipped) and ``construction`` records how the perturbation
    was produced: 'custom', 'slave_hub', or 'master_mode'.
    """

    delta: np.ndarray
    direction: str
    slope: float
    fd_slope: float | None
    classification: str  # 'improves' | 'hinders' | 'first_order_neutral'
    construction: str


class ImprovingNodes(NamedTuple):
    """Master nodes for which any single backward arc improves the gap,
    valid whenever the gap is below ``delta_threshold``."""

    nodes: frozenset[int]
    delta_threshold: float
    zero_column_sums: bool


def _strongly_connected_pattern(M: np.ndarray) -> bool:
    """Strong connectivity of the off-diagonal sparsity pattern of M."""
    n = M.shape[0]
    if n == 1:
        return True
    pattern = (M != 0.0) & ~np.eye(n, dtype=bool)

    def reaches_all(adj):
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(adj[i]):
                if j not in seen:
                    seen.add(int(j))
                    stack.append(int(j))
        return len(seen) == n

    return reaches_all(pattern) and reaches_all(pattern.T)


def slave_min_eig(blocks: CutsetBlocks, tol: float | None = None) -> SlaveEig:
    """Smallest eigenvalue of ``L2 + D_C`` via the nonnegative shift.

    ``s I - (L2 + D_C)`` with s the largest diagonal entry is nonnegative
    and irreducible for a strongly connected slave, so its dominant
    eigenvalue is simple with positive eigenvectors, and ``mu = s - Lambda``
    is the smallest eigenvalue of ``L2 + D_C``: real, simple, positive.
    """
    M = blocks.l2 + blocks.d_c
    # Row i of l2 picks up -w for every intra-slave arc into i, so the
    # off-diagonal pattern of M is exactly the slave's arc set.
    if not _strongly_connected_pattern(blocks.l2):
        raise NotIrreducibleError("slave component is not strongly connected")
    n = M.shape[0]
    s = float(M.diagonal().max())
    N = s * np.eye(n) - M
    spec = full_spectrum(N, tol)
    i = int(np.argmax(spec.eigenvalues.real))
    lam = spec.eigenvalues[i]
    if abs(lam.imag) > SIMPLE_RTOL * max(1.0, s):
        raise NotIrreducibleError("dominant eigenvalue of the shift is not real")

    def positive(vec):
        v = np.real(vec)
        if v.sum() < 0:
            v = -v
        if (v <= 0).any():
            raise NotIrreducibleError("dominant eigenvector is not strictly positive")
        return v

    y = positive(spec.right[:, i])
    w = positive(spec.left[:, i])
    mu = s - lam.real
    if mu <= 0:
        raise NotIrreducibleError(f"smallest slave eigenvalue {mu:.3e} is not positive")
    y = y / y.max()
    w = w / (w @ y)
    return SlaveEig(mu=float(mu), w=w, y=y)


def gap_location(blocks: CutsetBlocks, tol: float | None = None,
                 ambiguous_rtol: float = 1e-8):
    """Spectral gap of the assembled Laplacian and the block it belongs to.

    The gap is matched against the spectra of ``L1`` and ``L2 + D_C``; a
    match to both within ``ambiguous_rtol`` relative is reported as
    ambiguous rather than resolved.
    """
    L = assemble_blocks(blocks)
    spec = full_spectrum(L, tol)
    lam2 = spec.eigenvalues[1]
    if not spec.simple[1]:
        raise GapNotSimpleError("spectral gap of the assembled Laplacian is not simple")
    sigma1 = np.linalg.eigvals(blocks.l1)
    sigma2 = np.linalg.eigvals(blocks.l2 + blocks.d_c)
    d1 = float(np.abs(sigma1 - lam2).min())
    d2 = float(np.abs(sigma2 - lam2).min())
    amb = ambiguous_rtol * max(1.0, abs(lam2))
    if d1 <= amb and d2 <= amb:
        raise AmbiguousLocationError(
            f"gap {lam2:.6g} is within {amb:.1e} of both block spectra")
    scale = max(1.0, float(np.linalg.norm(L, np.inf)))
    if min(d1, d2) > 1e-7 * scale:
        raise AmbiguousLocationError(
            f"gap {lam2:.6g} matches neither block spectrum (d1={d1:.2e}, d2={d2:.2e})")
    location = "master" if d1 < d2 else "slave"
    return GapInfo(lambda2=lam2, is_simple=True, fiedler=None, location=location)


def _classify(slope: float) -> str:
    if slope > NEUTRAL_TOL:
        return "improves"
    if slope < -NEUTRAL_TOL:
        return "hinders"
    return "first_order_neutral"


def _check_delta(delta: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    delta = np.asarray(delta, dtype=float)
    if delta.shape != shape:
        raise ValueError(f"delta shape {delta.shape} does not match {shape}")
    if (delta < 0).any():
        raise ValueError("delta must be nonnegative")
    if not (delta > 0).any():
        raise ValueError("delta must have at least one positive entry")
    return delta


def forward_perturbation_matrix(blocks: CutsetBlocks, delta: np.ndarray) -> np.ndarray:
    """Full-size generator of the forward family: [[0, 0], [-delta, D_delta]]."""
    n1 = blocks.l1.shape[0]
    n2 = blocks.l2.shape[0]
    P = np.zeros((n1 + n2, n1 + n2))
    P[n1:, :n1] = -delta
    P[n1:, n1:] = np.diag(delta.sum(axis=1))
    return P


def backward_perturbation_matrix(blocks: CutsetBlocks, delta: np.ndarray) -> np.ndarray:
    """Full-size generator of the backward family: [[D_delta, -delta], [0, 0]]."""
    n1 = blocks.l1.shape[0]
    n2 = blocks.l2.shape[0]
    P = np.zeros((n1 + n2, n1 + n2))
    P[:n1, :n1] = np.diag(delta.sum(axis=1))
    P[:n1, n1:] = -delta
    return P


def forward_slope(blocks: CutsetBlocks, delta, *, with_oracle: bool = True,
                  eps: float = 1e-6, tol: float | None = None) -> PerturbationReport:
    """Slope for a perturbation in the direction of the cutset.

    With the gap in the slave block the slope is ``w.T D_delta y / (w.T y)``
    and is strictly positive; with the gap in the master block the cutset
    never touches it and the slope is exactly zero.
    """
    n1 = blocks.l1.shape[0]
    n2 = blocks.l2.shape[0]
    delta = _check_delta(delta, (n2, n1))
    info = gap_location(blocks, tol)
    if info.location == "master":
        slope = 0.0
    else:
        eig = slave_min_eig(blocks, tol)
        slope = float(eig.w @ (delta.sum(axis=1) * eig.y))  # w.T y == 1
    fd = None
    if with_oracle:
        fd = fd_gap_slope(assemble_blocks(blocks),
                          forward_perturbation_matrix(blocks, delta), eps, tol)
    return PerturbationReport(delta=delta, direction="forward", slope=slope,
                              fd_slope=fd, classification=_classify(slope),
                              construction="custom")


def _backward_value(blocks: CutsetBlocks, eig: SlaveEig, delta: np.ndarray) -> float:
    """Backward slope via the linear solve (L1 - mu I) x = delta @ y."""
    shift = blocks.l1 - eig.mu * np.eye(blocks.l1.shape[0])
    smin = np.linalg.svd(shift, compute_uv=False)[-1]
    if smin <= 1e-12 * max(1.0, float(np.linalg.norm(blocks.l1, np.inf))):
        raise SingularShiftError(
            f"L1 - mu I is numerically singular (sigma_min={smin:.2e})")
    x = np.linalg.solve(shift, delta @ eig.y)
    return float(-(eig.w @ (blocks.c @ x)))  # w.T y == 1


def backward_slope(blocks: CutsetBlocks, delta, *, with_oracle: bool = True,
                   eps: float = 1e-6, tol: float | None = None) -> PerturbationReport:
    """Slope for a perturbation opposite to the cutset (slave drives master).

    Only defined when the gap sits in the slave block; the case of a
    master-located gap needs eigenvectors of strongly connected digraph
    Laplacians and is rejected.
    """
    n1 = blocks.l1.shape[0]
    n2 = blocks.l2.shape[0]
    delta = _check_delta(delta, (n1, n2))
    info = gap_location(blocks, tol)
    if info.location == "master":
        raise GapInMasterError("gap sits in the master block; backward slopes unsupported")
    eig = slave_min_eig(blocks, tol)
    slope = _backward_value(blocks, eig, delta)
    fd = None
    if with_oracle:
        fd = fd_gap_slope(assemble_blocks(blocks),
                          backward_perturbation_matrix(blocks, delta), eps, tol)
    return PerturbationReport(delta=delta, direction="backward", slope=slope,
                              fd_slope=fd, classification=_classify(slope),
                              construction="custom")


def improving_delta(blocks: CutsetBlocks, slave_node: int, *, with_oracle: bool = True,
                    eps: float = 1e-6, tol: float | None = None) -> PerturbationReport:
    """Backward perturbation guaranteed to improve the gap.

    Turns ``slave_node`` (an original graph index inside the slave) into a
    hub driving every master node with weight ``1 / y_k``, so that
    ``delta @ y`` is the ones vector and the slope reduces to
    ``(1 / mu) * (w.T C 1) / (w.T y) > 0``.
    """
    if slave_node not in blocks.slave_nodes:
        raise ValueError(f"node {slave_node} is not in the slave component")
    info = gap_location(blocks, tol)
    if info.location == "master":
        raise GapInMasterError("gap sits in the master block; backward slopes unsupported")
    k = blocks.slave_nodes.index(slave_node)
    eig = slave_min_eig(blocks, tol)
    n1 = blocks.l1.shape[0]
    n2 = blocks.l2.shape[0]
    delta = np.zeros((n1, n2))
    delta[:, k] = 1.0 / eig.y[k]
    slope = _backward_value(blocks, eig, delta)
    fd = None
    if with_oracle:
        fd = fd_gap_slope(assemble_blocks(blocks),
                          backward_perturbation_matrix(blocks, delta), eps, tol)
    return PerturbationReport(delta=delta, direction="backward", slope=slope,
                              fd_slope=fd, classification=_classify(slope),
                              construction="slave_hub")


def master_eigenbasis(l1, tol: float | None = None) -> MasterEigenbasis:
    """Eigenbasis of the master Laplacian with its dual (left) basis.

    The first basis vector is pinned to the exact ones vector; the dual
    rows come from inverting the basis matrix, so ``dual @ basis == I``.
    Raises NotDiagonalizableError when the eigenvector matrix has condition
    number above ``DIAGONALIZABLE_COND``.
    """
    A = np.asarray(l1, dtype=float)
    n = A.shape[0]
    scale = max(1.0, float(np.linalg.norm(A, np.inf))) if A.size else 1.0
    vals, V = np.linalg.eig(A)
    order = np.lexsort((vals.imag, vals.real))
    vals = vals[order]
    V = V[:, order].astype(complex)
    if np.linalg.cond(V) > DIAGONALIZABLE_COND:
        raise NotDiagonalizableError(
            "master Laplacian eigenvector matrix is ill-conditioned")
    tol_s = (SIMPLE_RTOL if tol is None else tol) * scale
    if abs(vals[0]) > tol_s:
        raise ValueError(f"smallest master eigenvalue {vals[0]:.3e} is not zero; "
                         "not a Laplacian of a connected component")
    v0 = V[:, 0]
    if abs(v0 - v0.mean()).max() > 1e-6 * abs(v0).max():
        raise ValueError("kernel eigenvector is not constant; not a Laplacian")
    V[:, 0] = 1.0
    dual = np.linalg.inv(V)
    colsums = np.abs(A.sum(axis=0))
    return MasterEigenbasis(
        alphas=vals, basis=V, dual=dual, diagonalizable=True,
        zero_column_sums=bool(colsums.max() <= 1e-12 * scale),
    )


def _ones_coefficients(basis: MasterEigenbasis) -> np.ndarray:
    """Coefficient of the ones vector in the expansion of each e_k."""
    beta1 = basis.dual[0]
    if np.abs(beta1.imag).max() > 1e-9:
        raise NotDiagonalizableError("ones-coefficient row is not real")
    return beta1.real


def single_link_improving_nodes(blocks: CutsetBlocks, *, tol: float | None = None,
                                grid: int = 64, bisect_iters: int = 40) -> ImprovingNodes:
    """Master nodes at which any single backward arc improves the gap.

    A node qualifies when the ones-coefficient of its canonical basis
    vector in the master eigenbasis is positive; the coefficients sum to 1,
    so the set is never empty.  ``delta_threshold`` is the largest value
    such that for every gap below it the resolvent vector
    ``-(L1 - gap I)^{-1} e_k`` stays entrywise positive for all qualifying
    nodes, located by a grid scan plus bisection below the first nonzero
    master eigenvalue.  With zero column sums all coefficients equal 1/n
    and every master node qualifies.
    """
    info = gap_location(blocks, tol)
    if info.location == "master":
        raise GapInMasterError("gap sits in the master block; backward analysis unsupported")
    basis = master_eigenbasis(blocks.l1, tol)
    n1 = blocks.l1.shape[0]
    beta1 = _ones_coefficients(basis)
    if basis.zero_column_sums:
        local = list(range(n1))
    else:
        local = [k for k in range(n1) if beta1[k] > NEUTRAL_TOL]
    if n1 == 1:
        # singleton master: resolvent is the scalar 1/gap, positive always
        return ImprovingNodes(nodes=frozenset({blocks.master_nodes[0]}),
                              delta_threshold=np.inf,
                              zero_column_sums=basis.zero_column_sums)
    upper = float(basis.alphas[1].real)
    eye = np.eye(n1)

    def positive_everywhere(lam: float) -> bool:
        try:
            R = np.linalg.solve(blocks.l1 - lam * eye, -eye)
        except np.linalg.LinAlgError:
            return False
        return all((R[:, k] > 0).all() for k in local)

    xs = np.linspace(upper / grid, upper * (1 - 1e-9), grid)
    lo, hi = 0.0, None
    for x in xs:
        if positive_everywhere(float(x)):
            lo = float(x)
        else:
            hi = float(x)
            break
    if hi is None:
        threshold = upper
    else:
        for _ in range(bisect_iters):
            mid = 0.5 * (lo + hi)
            if positive_everywhere(mid):
                lo = mid
            else:
                hi = mid
        threshold = lo
    nodes = frozenset(blocks.master_nodes[k] for k in local)
    return ImprovingNodes(nodes=nodes, delta_threshold=threshold,
                          zero_column_sums=basis.zero_column_sums)


def hindering_delta(blocks: CutsetBlocks, *, with_oracle: bool = True,
                    eps: float = 1e-6, tol: float | None = None) -> PerturbationReport | None:
    """Backward perturbation with nonpositive slope, or None.

    Scans the real positive master eigenvalues with real eigenvectors, in
    both orientations.  For a mixed-sign eigenvector X the target
    ``delta @ y = beta_m 1 + X`` (beta_m the largest negative magnitude) is
    nonnegative, and the resolvent image has a positive entry where X peaks
    provided the eigenvalue stays below ``(beta_M / beta_m + 1) * gap``; the
    existing cutset must draw from that peak node.  An all-nonnegative X
    works with any cutset once its eigenvalue exceeds the gap.  The realized
    matrix is the canonical nonnegative solution ``target y^T / ||y||^2``.
    """
    info = gap_location(blocks, tol)
    if info.location == "master":
        raise GapInMasterError("gap sits in the master block; backward analysis unsupported")
    basis = master_eigenbasis(blocks.l1, tol)
    eig = slave_min_eig(blocks, tol)
    mu = eig.mu
    n1 = blocks.l1.shape[0]
    col_loads = blocks.c.sum(axis=0)
    for idx in range(1, n1):
        alpha = basis.alphas[idx]
        if alpha.real <= NEUTRAL_TOL or abs(alpha.imag) > 1e-10:
            continue
        vec = basis.basis[:, idx]
        if np.abs(vec.imag).max() > 1e-10 * max(1.0, np.abs(vec.real).max()):
            continue
        X0 = vec.real / np.abs(vec.real).max()
        for X in (X0, -X0):
            neg = X[X < 0]
            beta_M = float(X.max()) if (X > 0).any() else 0.0
            if neg.size:
                beta_m = float(-neg.min())
                if beta_M <= 0:
                    continue
                if not alpha.real < (beta_M / beta_m + 1.0) * mu:
                    continue
                peaks = np.flatnonzero(X >= beta_M - 1e-12)
                if not (col_loads[peaks] > 0).any():
                    continue  # cutset never sees the dominant entries
                target = np.maximum(beta_m + X, 0.0)
                target[target <= 1e-12 * target.max()] = 0.0
            else:
                if not alpha.real > mu:
                    continue
                target = X.copy()
            if not (target > 0).any():
                continue
            delta = np.outer(target, eig.y) / float(eig.y @ eig.y)
            slope = _backward_value(blocks, eig, delta)
            if slope > NEUTRAL_TOL:
                continue
            fd = None
            if with_oracle:
                fd = fd_gap_slope(assemble_blocks(blocks),
                                  backward_perturbation_matrix(blocks, delta), eps, tol)
            return PerturbationReport(delta=delta, direction="backward", slope=slope,
                                      fd_slope=fd, classification=_classify(slope),
                                      construction="master_mode")
    return None
