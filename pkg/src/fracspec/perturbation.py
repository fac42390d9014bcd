"""Eigenvalue shifts under block off-diagonal symmetric perturbations.

Let A be symmetric with eigenvalues l_1 >= ... >= l_n and a gap
l_d > l_{d+1}.  If B is symmetric with P B P = 0 and Q B Q = 0, where P
projects on the top-d eigenvectors and Q = I - P, then

    0 <= l_j(A+B) - l_j(A) <= ||B||^2 / (l_j - l_{d+1})      for j <= d
    0 <= l_j(A) - l_j(A+B) <= ||B||^2 / (l_d - l_j)          for j > d
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .eigen import eigh

__all__ = [
    "ProjectorPair",
    "WielandtEntry",
    "WielandtReport",
    "TrialRow",
    "spectral_projectors",
    "make_admissible_perturbation",
    "wielandt_check",
    "random_symmetric",
    "run_trials",
    "trials_csv",
]

EPS = np.finfo(float).eps


@dataclass
class ProjectorPair:
    P_top: np.ndarray
    P_bottom: np.ndarray
    d: int
    gap: float
    eigenvalues: np.ndarray  # decreasing


def _desc_eigh(a: np.ndarray, tol: float):
    w, v = eigh(a, tol=min(tol, 1e-12))
    return w[::-1], v[:, ::-1]


def spectral_projectors(A, d: int, tol: float = 1e-12) -> ProjectorPair:
    """Projectors on the top-d eigenvectors of A and on their complement.

    Raises ``ValueError`` unless l_d - l_{d+1} > 10 * tol.
    """
    a = np.asarray(A, dtype=float)
    n = a.shape[0]
    if not 1 <= d < n:
        raise ValueError(f"split index d must lie in [1, {n - 1}]")
    w, v = _desc_eigh(a, tol)
    gap = float(w[d - 1] - w[d])
    if gap <= 10 * tol:
        raise ValueError(f"no spectral gap at d={d}: l_d - l_(d+1) = {gap:.3g}")
    top = v[:, :d] @ v[:, :d].T
    bottom = v[:, d:] @ v[:, d:].T
    return ProjectorPair(top, bottom, d, gap, w)


def make_admissible_perturbation(
    A, d: int, seed: int, scale: float, tol: float = 1e-12, projectors: ProjectorPair | None = None
) -> np.ndarray:
    """B = P C Q + (P C Q)^T with spectral norm ``scale``.

    C is drawn from numpy's PCG64 generator seeded with ``seed``, so B is
    reproducible bit for bit on a given platform.
    """
    pp = projectors or spectral_projectors(A, d, tol)
    n = pp.P_top.shape[0]
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    if scale == 0:
        return np.zeros((n, n))
    c = np.random.default_rng(seed).standard_normal((n, n))
    half = pp.P_top @ c @ pp.P_bottom
    b = half + half.T
    b *= scale / np.linalg.norm(b, 2)
    worst = max(np.linalg.norm(pp.P_top @ b @ pp.P_top), np.linalg.norm(pp.P_bottom @ b @ pp.P_bottom))
    if worst > max(tol, 1e3 * EPS) * max(1.0, scale):
        raise ValueError(f"block conditions violated by {worst:.3g}")
    return b


@dataclass
class WielandtEntry:
    j: int  # 1-based
    block: str  # "top" or "bottom"
    shift: float  # l_j(A+B) - l_j(A)
    bound: float
    margin: float  # distance to the nearer side of the allowed interval
    ok: bool


@dataclass
class WielandtReport:
    entries: list[WielandtEntry]
    norm_B: float
    slack: float

    @property
    def violations(self) -> int:
        return sum(not e.ok for e in self.entries)

    @property
    def worst_margin_top(self) -> float:
        return min((e.margin for e in self.entries if e.block == "top"), default=float("inf"))

    @property
    def worst_margin_bottom(self) -> float:
        return min((e.margin for e in self.entries if e.block == "bottom"), default=float("inf"))

    def to_dict(self) -> dict:
        return {
            "norm_B": self.norm_B,
            "slack": self.slack,
            "violations": self.violations,
            "entries": [e.__dict__ for e in self.entries],
        }


def wielandt_check(A, B, d: int, tol: float = 1e-12, projectors: ProjectorPair | None = None) -> WielandtReport:
    """Check both shift inequalities for every index.

    Numeric slack is 1e3 * machine epsilon * ||A||.  Raises ``ValueError``
    when B is not block off-diagonal or the gap hypothesis fails.
    """
    a = np.asarray(A, dtype=float)
    b = np.asarray(B, dtype=float)
    pp = projectors or spectral_projectors(a, d, tol)
    norm_b = float(np.linalg.norm(b, 2))
    adm = max(np.linalg.norm(pp.P_top @ b @ pp.P_top), np.linalg.norm(pp.P_bottom @ b @ pp.P_bottom))
    if adm > max(tol, 1e3 * EPS) * max(1.0, norm_b) * 10:
        raise ValueError(f"B is not admissible: block norm {adm:.3g}")
    la = pp.eigenvalues
    lab, _ = _desc_eigh(a + b, tol)
    slack = float(1e3 * EPS * max(float(np.linalg.norm(a, 2)), 1.0))
    entries = []
    for j in range(len(la)):
        shift = float(lab[j] - la[j])
        if j < d:
            bound = norm_b**2 / float(la[j] - la[d])
            margin = min(shift, bound - shift)
            entries.append(WielandtEntry(j + 1, "top", shift, bound, margin, bool(-slack <= shift <= bound + slack)))
        else:
            bound = norm_b**2 / float(la[d - 1] - la[j])
            margin = min(-shift, bound + shift)
            entries.append(WielandtEntry(j + 1, "bottom", shift, bound, margin, bool(-bound - slack <= shift <= slack)))
    return WielandtReport(entries, norm_b, slack)


def random_symmetric(n: int, seed: int) -> np.ndarray:
    # separate stream from the one make_admissible_perturbation uses
    m = np.random.default_rng([seed, 1]).standard_normal((n, n))
    return (m + m.T) / 2


@dataclass
class TrialRow:
    seed: int
    scale: float
    worst_margin_top: float
    worst_margin_bottom: float
    violation: bool


def run_trials(n: int = 10, d: int = 4, trials: int = 1000, scale_fraction: float = 0.1, seed: int = 0, tol: float = 1e-12) -> list[TrialRow]:
    """Seeded trials: random A, admissible B with ||B|| = scale_fraction * gap."""
    if not 0 < scale_fraction:
        raise ValueError("scale_fraction must be positive")
    rows = []
    for k in range(trials):
        s = seed + k
        a = random_symmetric(n, s)
        pp = spectral_projectors(a, d, tol)
        scale = scale_fraction * pp.gap
        b = make_admissible_perturbation(a, d, s, scale, tol, pp)
        rep = wielandt_check(a, b, d, tol, pp)
        rows.append(TrialRow(s, scale, rep.worst_margin_top, rep.worst_margin_bottom, rep.violations > 0))
    return rows


def trials_csv(rows: list[TrialRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "scale", "worst_margin_top", "worst_margin_bottom", "violation"])
    for r in rows:
        w.writerow([r.seed, repr(r.scale), repr(r.worst_margin_top), repr(r.worst_margin_bottom), int(r.violation)])
    return buf.getvalue()
