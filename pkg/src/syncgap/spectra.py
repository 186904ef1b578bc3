"""Dense eigen-analysis of Laplacians.

Provides full spectra with paired left/right eigenvectors, the spectral gap
with its Fiedler vector, the first-order slope of a simple eigenvalue under
a matrix perturbation, and a finite-difference oracle used to cross-check
every analytic slope in the toolkit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ConvergenceFailureError,
    EigenvalueCollisionError,
    GapNotSimpleError,
    NotAnEigenvalueError,
    NotConnectedError,
    NotSimpleError,
)
from .graphs import LaplacianMatrix

# Eigenvalues closer than SIMPLE_RTOL * max(1, ||L||_inf) are flagged
# non-simple and slope operations refuse to run on them.
SIMPLE_RTOL = 1e-8
# Looser tolerance for matching a caller-supplied eigenvalue to the spectrum.
MATCH_RTOL = 1e-6
RESIDUAL_RTOL = 1e-9


def as_matrix(L) -> np.ndarray:
    """Accept a LaplacianMatrix or anything array-like; return a square array."""
    if isinstance(L, LaplacianMatrix):
        A = L.entries
    else:
        A = np.asarray(L, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def _scale(A: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(A, np.inf))) if A.size else 1.0


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complete eigen-decomposition, sorted by (Re, Im) ascending.

    ``right[:, i]`` and ``left[:, i]`` pair with ``eigenvalues[i]`` and
    satisfy ``A @ right[:, i] = lam_i right[:, i]`` and
    ``left[:, i].T @ A = lam_i left[:, i].T`` (plain transpose, no
    conjugation).  ``simple[i]`` is True when ``lam_i`` is separated from
    every other eigenvalue by more than the simplicity tolerance.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    simple: np.ndarray


def is_symmetric(A: np.ndarray) -> bool:
    return bool(np.allclose(A, A.T, rtol=0.0, atol=1e-12 * _scale(A)))


def full_spectrum(L, tol: float | None = None) -> Spectrum:
    """Eigenvalues with matched left/right eigenvectors.

    Symmetric input goes through the symmetric solver (real output, left
    equals right); general input uses the QR-based dense solver.  Residuals
    are verified against ``RESIDUAL_RTOL * max(1, ||L||_inf)``.
    """
    A = as_matrix(L)
    n = A.shape[0]
    scale = _scale(A)
    if is_symmetric(A):
        try:
            lam, V = np.linalg.eigh(A)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailureError(str(exc)) from exc
        vals = lam.astype(complex)
        right = V
        left = V
    else:
        try:
            vals, vl, vr = scipy.linalg.eig(A, left=True, right=True)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
            raise ConvergenceFailureError(str(exc)) from exc
        order = np.lexsort((vals.imag, vals.real))
        vals = vals[order]
        right = vr[:, order]
        # scipy returns vl with vl[:, i].conj().T @ A = vals[i] * vl[:, i].conj().T
        left = vl[:, order].conj()
    res_r = np.abs(A @ right - right * vals[None, :]).max()
    res_l = np.abs(left.T @ A - vals[:, None] * left.T).max()
    if max(res_r, res_l) > RESIDUAL_RTOL * scale * max(1, n):
        raise ConvergenceFailureError(
            f"eigenpair residual {max(res_r, res_l):.3e} above tolerance")
    tol_s = (SIMPLE_RTOL if tol is None else tol) * scale
    if n == 1:
        simple = np.array([True])
    else:
        diffs = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(diffs, np.inf)
        simple = diffs.min(axis=1) > tol_s
    for arr in (vals, right, left, simple):
        arr.flags.writeable = False
    return Spectrum(eigenvalues=vals, right=right, left=left, simple=simple)


def sign_normalize(v: np.ndarray) -> np.ndarray:
    """Flip the sign so the entry of largest magnitude is positive.

    Ties resolve to the lowest index, which makes the sign pattern of a
    Fiedler vector (and hence the node partition) deterministic.
    """
    idx = int(np.argmax(np.abs(v)))
    return -v if v[idx] < 0 else v.copy()


@dataclass(frozen=True, eq=False)
class GapInfo:
    """Spectral gap with simplicity flag and, when meaningful, the Fiedler
    vector and the block the gap sits in ('master', 'slave', or 'whole')."""

    lambda2: complex
    is_simple: bool
    fiedler: np.ndarray | None
    location: str


def spectral_gap(L, tol: float | None = None) -> GapInfo:
    """Second-smallest eigenvalue by real part.

    Raises NotConnectedError when the second eigenvalue is numerically zero,
    which signals a violated single-root condition.  For symmetric input the
    sign-normalized unit Fiedler vector is attached.
    """
    A = as_matrix(L)
    if A.shape[0] < 2:
        raise ValueError("spectral gap needs at least 2 nodes")
    spec = full_spectrum(A, tol)
    lam2 = spec.eigenvalues[1]
    tol_s = (SIMPLE_RTOL if tol is None else tol) * _scale(A)
    if lam2.real <= tol_s:
        raise NotConnectedError(
            f"second eigenvalue {lam2:.3e} is numerically zero: graph is not connected")
    sep = abs(lam2 - spec.eigenvalues[0])
    if A.shape[0] > 2:
        sep = min(sep, abs(spec.eigenvalues[2] - lam2))
    fiedler = None
    if is_symmetric(A):
        v = np.real(spec.right[:, 1])
        fiedler = sign_normalize(v / np.linalg.norm(v))
    return GapInfo(lambda2=lam2, is_simple=bool(sep > tol_s),
                   fiedler=fiedler, location="whole")


def _pair_at(spec: Spectrum, i: int):
    """Left/right pair for eigenvalue i, renormalized so u.T @ v = 1."""
    u = spec.left[:, i]
    v = spec.right[:, i]
    s = u @ v
    if abs(s) < 1e-12:
        raise NotSimpleError("left/right eigenvectors nearly orthogonal (defective pair)")
    u = u / s
    if np.iscomplexobj(u) and abs(u.imag).max() < 1e-14 and abs(v.imag).max() < 1e-14:
        u, v = u.real, v.real
    return u, v


def eig_pair(L, lam, tol: float | None = None):
    """Left and right eigenvectors for a simple eigenvalue ``lam`` of ``L``.

    Returns ``(u, v)`` with ``u.T @ v = 1``.
    """
    A = as_matrix(L)
    spec = full_spectrum(A, tol)
    dist = np.abs(spec.eigenvalues - complex(lam))
    i = int(np.argmin(dist))
    if dist[i] > MATCH_RTOL * _scale(A):
        raise NotAnEigenvalueError(f"{lam} is not an eigenvalue (nearest: "
                                   f"{spec.eigenvalues[i]:.6g})")
    if not spec.simple[i]:
        raise NotSimpleError(f"eigenvalue {spec.eigenvalues[i]:.6g} is not simple")
    return _pair_at(spec, i)


def gap_slope(L, P, tol: float | None = None) -> complex:
    """First-order change rate of the spectral gap under ``L + eps * P``.

    Evaluates ``u.T @ P @ v / (u.T @ v)`` with ``(u, v)`` the left/right
    pair of the gap.  The gap must be simple.
    """
    A = as_matrix(L)
    if A.shape[0] < 2:
        raise ValueError("gap slope needs at least 2 nodes")
    Pm = np.asarray(P, dtype=float)
    if Pm.shape != A.shape:
        raise ValueError(f"perturbation shape {Pm.shape} does not match {A.shape}")
    spec = full_spectrum(A, tol)
    if not spec.simple[1]:
        raise GapNotSimpleError("spectral gap is not simple")
    u, v = _pair_at(spec, 1)
    return complex(u @ Pm @ v)


def fd_gap_slope(L, P, eps: float = 1e-6, tol: float | None = None) -> float:
    """Finite-difference slope of ``Re lambda_2`` under ``L + eps * P``.

    Two full eigensolves; the perturbed gap is matched to the base gap by
    nearest real part.  A genuinely ambiguous match (two perturbed
    eigenvalues equally close but with different real parts) raises
    EigenvalueCollisionError.  Serves as the independent oracle for every
    analytic slope.
    """
    if not (1e-9 <= eps <= 1e-3):
        raise ValueError(f"eps must lie in [1e-9, 1e-3], got {eps:g}")
    A = as_matrix(L)
    if A.shape[0] < 2:
        raise ValueError("gap slope needs at least 2 nodes")
    Pm = np.asarray(P, dtype=float)
    if Pm.shape != A.shape:
        raise ValueError(f"perturbation shape {Pm.shape} does not match {A.shape}")
    # both solves go through the same routine so a zero perturbation returns
    # exactly zero; no eigenvectors are involved, keeping the oracle
    # independent of the analytic slope machinery
    base = np.linalg.eigvals(A)
    base = base[np.lexsort((base.imag, base.real))]
    tol_s = (SIMPLE_RTOL if tol is None else tol) * _scale(A)
    others = np.abs(np.delete(base, 1) - base[1])
    if others.size and others.min() <= tol_s:
        raise GapNotSimpleError("spectral gap is not simple")
    lam2 = base[1]
    mu = np.linalg.eigvals(A + eps * Pm)
    d = np.abs(mu.real - lam2.real)
    atol = 1e-10 * _scale(A)
    near = mu[d <= d.min() + atol]
    if near.real.max() - near.real.min() > atol:
        raise EigenvalueCollisionError(
            "perturbed gap matches several eigenvalues with different real parts")
    return float((near.real.mean() - lam2.real) / eps)


def undirected_link_matrix(n: int, k: int, l: int) -> np.ndarray:
    """Laplacian of the n-node graph with the single undirected link k -- l."""
    if k == l:
        raise ValueError("link endpoints must differ")
    P = np.zeros((n, n))
    P[k, k] = P[l, l] = 1.0
    P[k, l] = P[l, k] = -1.0
    return P


def directed_link_matrix(n: int, k: int, l: int) -> np.ndarray:
    """Laplacian of the n-node graph with the single arc k -> l.

    Only the receiving row moves: entry (l, l) is +1 and (l, k) is -1.
    """
    if k == l:
        raise ValueError("link endpoints must differ")
    P = np.zeros((n, n))
    P[l, l] = 1.0
    P[l, k] = -1.0
    return P
