"""Dense symmetric eigensolver by cyclic Jacobi rotations.

Rotations are applied in round-robin order so that each round touches
n/2 disjoint (p, q) pairs at once; this keeps the sweep vectorised in
numpy while remaining a textbook cyclic Jacobi method.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["JacobiResult", "jacobi_eigh", "NotConverged", "eigh"]

# LAPACK takes over above this size; Jacobi stays available explicitly
JACOBI_MAX_N = 128


class NotConverged(RuntimeError):
    pass


@dataclass
class JacobiResult:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns, orthonormal
    sweeps: int
    off_norm: float  # off-diagonal Frobenius norm at exit


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Rounds of disjoint index pairs covering every pair exactly once."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _off(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def jacobi_eigh(matrix, tol: float = 1e-12, max_sweeps: int = 60) -> JacobiResult:
    """Eigen-decomposition of a real symmetric matrix.

    Sweeps until the off-diagonal Frobenius norm is at most
    ``tol * ||A||_F``.  Raises ``ValueError`` for non-symmetric input and
    ``NotConverged`` when ``max_sweeps`` is exhausted.
    """
    a = np.array(matrix, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    scale = float(np.linalg.norm(a))
    if not np.allclose(a, a.T, rtol=0.0, atol=max(tol, 1e-15) * max(scale, 1.0)):
        raise ValueError("matrix is not symmetric within tolerance")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    if n <= 1 or scale == 0.0:
        return JacobiResult(np.diag(a).copy(), v, 0, 0.0)
    threshold = tol * scale
    rounds = _round_robin(n)
    sweeps = 0
    off = _off(a)
    while off > threshold:
        if sweeps >= max_sweeps:
            raise NotConverged(f"off-diagonal norm {off:.3e} > {threshold:.3e} after {sweeps} sweeps")
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            if not active.any():
                continue
            app, aqq = a[p, p], a[q, q]
            safe = np.where(active, apq, 1.0)
            theta = np.where(active, (aqq - app) / (2.0 * safe), 0.0)
            big = np.abs(theta) > 1e150
            th = np.where(big, 0.0, theta)
            t = np.sign(th) / (np.abs(th) + np.sqrt(th * th + 1.0))
            t = np.where(th == 0.0, 1.0, t)
            # huge theta: t ~ 1/(2 theta)
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # A <- J^T A J with J[p,p]=J[q,q]=c, J[p,q]=s, J[q,p]=-s
            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = c * ap - s * aq
            a[:, q] = s * ap + c * aq
            ap, aq = a[p, :].copy(), a[q, :].copy()
            cc, ss = c[:, None], s[:, None]
            a[p, :] = cc * ap - ss * aq
            a[q, :] = ss * ap + cc * aq
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
        sweeps += 1
        off = _off(a)
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return JacobiResult(w[order], v[:, order], sweeps, off)


def _check_symmetric(a: np.ndarray, tol: float) -> None:
    if not np.allclose(a, a.T, rtol=0.0, atol=max(tol, 1e-15) * max(float(np.linalg.norm(a)), 1.0)):
        raise ValueError("matrix is not symmetric within tolerance")


def eigh(matrix, tol: float = 1e-12, method: str = "auto", vectors: bool = True):
    """Ascending eigenvalues and orthonormal eigenvectors.

    ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"`` (Jacobi up to
    ``JACOBI_MAX_N``, LAPACK beyond).  With ``vectors=False`` the LAPACK
    route skips the eigenvectors and returns ``None`` in their place.
    """
    a = np.asarray(matrix, dtype=float)
    if method == "auto":
        method = "jacobi" if a.shape[0] <= JACOBI_MAX_N else "lapack"
    if method == "jacobi":
        r = jacobi_eigh(a, tol)
        return r.eigenvalues, r.eigenvectors
    if method == "lapack":
        if not vectors:
            _check_symmetric(a, tol)
            return np.linalg.eigvalsh(0.5 * (a + a.T)), None
        if not np.allclose(a, a.T, rtol=0.0, atol=max(tol, 1e-15) * max(float(np.linalg.norm(a)), 1.0)):
            raise ValueError("matrix is not symmetric within tolerance")
        return np.linalg.eigh(0.5 * (a + a.T))
    raise ValueError(f"unknown method {method!r}")
