"""Discrete Laplacians on graph approximations and their spectra.

Both conventions return the symmetric matrix of the nonnegative operator
``-Δ_m``:

``combinatorial``
    ``(-Δ_m u)(x) = Σ_{y~x} (u(x) - u(y))`` at interior vertices.  Under
    Neumann conditions boundary rows are doubled (reflecting boundary), so
    that a boundary vertex sees its mirror image.  The matrix is
    symmetrised by the diagonal similarity ``T^{1/2} (D - A) T^{1/2}``.
``probabilistic``
    ``u(x)`` minus the neighbour average, i.e. ``I - D^{-1} A``,
    symmetrised as ``I - D^{-1/2} A D^{-1/2}``.

Dirichlet conditions delete boundary rows and columns.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .eigen import eigh
from .graphs import FractalSpec, LevelGraph, build_level, get_fractal

__all__ = [
    "CONVENTIONS",
    "BOUNDARY_CONDITIONS",
    "SpectrumResult",
    "DecimationReport",
    "assemble",
    "spectrum",
    "level_spectrum",
    "verify_decimation",
]

CONVENTIONS = ("combinatorial", "probabilistic")
BOUNDARY_CONDITIONS = ("dirichlet", "neumann")


def _check(convention: str, bc: str) -> None:
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    if bc not in BOUNDARY_CONDITIONS:
        raise ValueError(f"unknown boundary condition {bc!r}; expected one of {BOUNDARY_CONDITIONS}")


def assemble(graph: LevelGraph, convention: str = "combinatorial", bc: str = "neumann") -> np.ndarray:
    """Symmetric matrix of the nonnegative level-m Laplacian."""
    _check(convention, bc)
    n = graph.n_vertices
    adj = np.zeros((n, n))
    for i, j in graph.edges:
        adj[i, j] = adj[j, i] = 1.0
    deg = adj.sum(axis=1)
    if convention == "probabilistic":
        inv_sqrt = 1.0 / np.sqrt(deg)
        mat = np.eye(n) - inv_sqrt[:, None] * adj * inv_sqrt[None, :]
    else:
        mat = np.diag(deg) - adj
        if bc == "neumann":
            t = np.ones(n)
            t[list(graph.boundary)] = 2.0
            r = np.sqrt(t)
            mat = r[:, None] * mat * r[None, :]
    if bc == "dirichlet":
        keep = list(graph.interior)
        if not keep:
            raise ValueError(f"no interior vertices at level {graph.level}; Dirichlet problem is empty")
        mat = mat[np.ix_(keep, keep)]
    return mat


@dataclass
class SpectrumResult:
    """Distinct eigenvalues (ascending) with multiplicities."""

    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    residual: float
    level: Optional[int] = None
    convention: Optional[str] = None
    bc: Optional[str] = None
    fractal: Optional[str] = None
    eigenvectors: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return int(self.multiplicities.sum())

    def all_values(self) -> np.ndarray:
        """Eigenvalues repeated by multiplicity."""
        return np.repeat(self.eigenvalues, self.multiplicities)

    def to_dict(self) -> dict:
        return {
            "fractal": self.fractal,
            "level": self.level,
            "convention": self.convention,
            "bc": self.bc,
            "residual": self.residual,
            "eigenvalues": [repr(float(v)) for v in self.eigenvalues],
            "multiplicities": [int(k) for k in self.multiplicities],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "index", "eigenvalue", "multiplicity"])
        for k, (v, mult) in enumerate(zip(self.eigenvalues, self.multiplicities)):
            w.writerow([self.level, k, repr(float(v)), int(mult)])
        return buf.getvalue()


def _cluster(values: np.ndarray, resolution: float) -> tuple[np.ndarray, np.ndarray]:
    if values.size == 0:
        return values, np.zeros(0, dtype=int)
    groups = [[values[0]]]
    for v in values[1:]:
        if v - groups[-1][-1] <= resolution:
            groups[-1].append(v)
        else:
            groups.append([v])
    return np.array([np.mean(g) for g in groups]), np.array([len(g) for g in groups], dtype=int)


def spectrum(
    matrix, tol: float = 1e-12, method: str = "auto", keep_vectors: bool = False, residual: bool = True
) -> SpectrumResult:
    """Full spectrum of a dense symmetric matrix.

    Eigenvalues closer than ``10 * tol * ||A||_2`` are merged into one
    value with the corresponding multiplicity.  ``residual=False`` skips
    the eigenvector residual (reported as NaN) for speed on large levels.
    """
    a = np.asarray(matrix, dtype=float)
    w, v = eigh(a, tol, method, vectors=residual or keep_vectors)
    norm = float(np.max(np.abs(w))) if w.size else 0.0
    if not residual:
        res_norm = float("nan")
    else:
        res_norm = float(np.linalg.norm(a @ v - v * w[None, :])) if w.size else 0.0
    vals, mult = _cluster(w, 10.0 * tol * max(norm, 1.0))
    return SpectrumResult(vals, mult, res_norm, eigenvectors=v if keep_vectors else None)


def level_spectrum(
    fractal: FractalSpec | str,
    level: int,
    convention: str = "combinatorial",
    bc: str = "neumann",
    tol: float = 1e-12,
    method: str = "auto",
) -> SpectrumResult:
    """Spectrum of Γ_level of ``fractal`` in the given convention."""
    spec = get_fractal(fractal) if isinstance(fractal, str) else fractal
    mat = assemble(build_level(spec, level), convention, bc)
    res = spectrum(mat, tol, method)
    res.level, res.convention, res.bc, res.fractal = level, convention, bc, spec.name
    return res


@dataclass
class DecimationReport:
    fractal: str
    level: int
    bc: str
    passed: bool
    max_distance: float
    checked: int
    skipped: list[float]
    worst_eigenvalue: Optional[float]

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def verify_decimation(
    fractal: FractalSpec | str,
    level: int,
    system,
    tol: float = 1e-9,
    bc: str = "neumann",
    method: str = "auto",
) -> DecimationReport:
    """Check that R maps σ(Δ_m) into σ(Δ_{m-1}) outside the exceptional set.

    Uses ``system.convention``.  For Dirichlet conditions the level-(m-1)
    reference set is the union of the Dirichlet and Neumann spectra, since
    R sends some Dirichlet eigenvalues onto boundary-supported Neumann
    ones.
    """
    if level < 1:
        raise ValueError("level must be at least 1")
    spec = get_fractal(fractal) if isinstance(fractal, str) else fractal
    fine = level_spectrum(spec, level, system.convention, bc, method=method)
    coarse_n = level_spectrum(spec, level - 1, system.convention, "neumann", method=method)
    ref = coarse_n.eigenvalues
    if bc == "dirichlet" and level - 1 >= 1:
        coarse_d = level_spectrum(spec, level - 1, system.convention, "dirichlet", method=method)
        ref = np.union1d(ref, coarse_d.eigenvalues)
    excluded = [float(e) for e in system.exceptional]
    worst, worst_at, checked, skipped = 0.0, None, 0, []
    for lam in fine.eigenvalues:
        if any(abs(lam - e) <= tol for e in excluded):
            skipped.append(float(lam))
            continue
        image = system.R(float(lam))
        dist = float(np.min(np.abs(ref - image)))
        checked += 1
        if dist > worst:
            worst, worst_at = dist, float(lam)
    return DecimationReport(spec.name, level, bc, worst <= tol, worst, checked, skipped, worst_at)
