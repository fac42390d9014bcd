"""Graph approximations of the interval, SG and SG3.

Vertices are addressed by ``(word, corner)``: ``word`` selects a level-m
cell by its sequence of contraction indices and ``corner`` one of that
cell's boundary points.  Addresses that name the same point are merged by
union-find and represented by their lexicographically least member, so no
coordinates (and no floating-point tolerance) are involved.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property

__all__ = [
    "FractalSpec",
    "LevelGraph",
    "INTERVAL",
    "SG",
    "SG3",
    "FRACTALS",
    "get_fractal",
    "build_level",
    "boundary_vertices",
]

Address = tuple[tuple[int, ...], int]


@dataclass(frozen=True)
class FractalSpec:
    """Subdivision template of a post-critically finite self-similar set.

    ``glue`` lists classes of (cell, corner) pairs that denote the same
    point of the level-1 graph.  ``boundary_cell[k]`` is the cell whose
    contraction fixes boundary point ``k``; that point is corner ``k`` of
    the cell.  Each cell is a complete graph on its corners.
    """

    name: str
    n_maps: int
    n_corners: int
    glue: tuple[frozenset, ...]
    boundary_cell: tuple[int, ...]
    max_level: int

    def __post_init__(self):
        seen = set()
        for cls in self.glue:
            if len(cls) < 2:
                raise ValueError(f"{self.name}: glue class {set(cls)} has fewer than two members")
            for cell, corner in cls:
                if not (0 <= cell < self.n_maps and 0 <= corner < self.n_corners):
                    raise ValueError(f"{self.name}: bad glue member {(cell, corner)}")
                if (cell, corner) in seen:
                    raise ValueError(f"{self.name}: {(cell, corner)} glued twice")
                seen.add((cell, corner))
        for k, cell in enumerate(self.boundary_cell):
            if (cell, k) in seen:
                raise ValueError(f"{self.name}: boundary point {k} may not be glued")
        if len(self.boundary_cell) != self.n_corners:
            raise ValueError(f"{self.name}: need one boundary cell per corner")

    @property
    def glued_pairs(self) -> int:
        """Number of identifications the template performs at level 1."""
        return sum(len(c) - 1 for c in self.glue)


def _lattice_glue(cells: list[tuple[int, int]], offsets: list[tuple[int, int]]):
    # group (cell, corner) by integer lattice point
    points: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for i, (a, b) in enumerate(cells):
        for c, (da, db) in enumerate(offsets):
            points.setdefault((a + da, b + db), []).append((i, c))
    return tuple(frozenset(v) for _, v in sorted(points.items()) if len(v) > 1)


INTERVAL = FractalSpec(
    name="interval",
    n_maps=2,
    n_corners=2,
    glue=(frozenset({(0, 1), (1, 0)}),),
    boundary_cell=(0, 1),
    max_level=12,
)

SG = FractalSpec(
    name="sg",
    n_maps=3,
    n_corners=3,
    glue=tuple(frozenset({(i, j), (j, i)}) for i, j in itertools.combinations(range(3), 2)),
    boundary_cell=(0, 1, 2),
    max_level=7,
)

# upward triangles of the side-3 subdivision, indexed by lattice position
_SG3_CELLS = [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (0, 2)]
SG3 = FractalSpec(
    name="sg3",
    n_maps=6,
    n_corners=3,
    glue=_lattice_glue(_SG3_CELLS, [(0, 0), (1, 0), (0, 1)]),
    boundary_cell=(0, 2, 5),
    max_level=5,
)

FRACTALS = {f.name: f for f in (INTERVAL, SG, SG3)}


def get_fractal(name: str) -> FractalSpec:
    try:
        return FRACTALS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown fractal {name!r}; known: {', '.join(FRACTALS)}") from None


def vertex_label(addr: Address) -> str:
    word, corner = addr
    return "".join(map(str, word)) + ":" + str(corner)


@dataclass(frozen=True)
class LevelGraph:
    """Level-m graph approximation with canonical vertex ordering."""

    spec: FractalSpec
    level: int
    vertices: tuple[Address, ...]
    edges: tuple[tuple[int, int], ...]
    boundary: tuple[int, ...]
    _index: dict = field(compare=False, repr=False, hash=False, default_factory=dict)
    _canon: dict = field(compare=False, repr=False, hash=False, default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in self.vertices]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(tuple(sorted(n)) for n in nbrs)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(n) for n in self.adjacency)

    @property
    def interior(self) -> tuple[int, ...]:
        b = set(self.boundary)
        return tuple(i for i in range(self.n_vertices) if i not in b)

    def index_of(self, addr: Address) -> int:
        """Index of any (possibly non-canonical) level-m address."""
        return self._index[_canonical_lookup(self, addr)]

    def labels(self) -> list[str]:
        return [vertex_label(v) for v in self.vertices]

    def to_dict(self) -> dict:
        return {
            "fractal": self.spec.name,
            "level": self.level,
            "vertices": self.labels(),
            "edges": [list(e) for e in self.edges],
            "boundary": [vertex_label(self.vertices[i]) for i in self.boundary],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _canonical_lookup(g: LevelGraph, addr: Address) -> Address:
    word, corner = addr
    word = tuple(word)
    if len(word) < g.level:
        word = word + (g.spec.boundary_cell[corner],) * (g.level - len(word))
    return g._canon[(word, corner)]


def build_level(spec: FractalSpec | str, m: int) -> LevelGraph:
    """Build Γ_m from ``spec``'s subdivision template.

    Γ_0 is the complete graph on the boundary points (a single edge for the
    interval).  Raises ``ValueError`` for a negative level or one above the
    fractal's safety cap.
    """
    if isinstance(spec, str):
        spec = get_fractal(spec)
    if m < 0:
        raise ValueError("level must be nonnegative")
    if m > spec.max_level:
        raise ValueError(f"level {m} exceeds the safety cap {spec.max_level} for {spec.name}")

    words = list(itertools.product(range(spec.n_maps), repeat=m))
    parent: dict[Address, Address] = {(w, c): (w, c) for w in words for c in range(spec.n_corners)}

    def find(a: Address) -> Address:
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(a: Address, b: Address) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            lo, hi = (ra, rb) if ra < rb else (rb, ra)
            parent[hi] = lo

    def at_level(word: tuple[int, ...], corner: int) -> Address:
        # corner k of a cell is fixed by that cell's boundary_cell[k] map
        return word + (spec.boundary_cell[corner],) * (m - len(word)), corner

    for k in range(m):
        for prefix in itertools.product(range(spec.n_maps), repeat=k):
            for cls in spec.glue:
                members = [at_level(prefix + (cell,), corner) for cell, corner in sorted(cls)]
                for other in members[1:]:
                    union(members[0], other)

    canon = {a: find(a) for a in parent}
    vertices = tuple(sorted(set(canon.values())))
    index = {v: i for i, v in enumerate(vertices)}
    edges = set()
    for w in words:
        ids = [index[canon[(w, c)]] for c in range(spec.n_corners)]
        for i, j in itertools.combinations(ids, 2):
            edges.add((min(i, j), max(i, j)))
    boundary = tuple(index[canon[at_level((), k)]] for k in range(spec.n_corners))
    return LevelGraph(spec, m, vertices, tuple(sorted(edges)), boundary, index, canon)


def boundary_vertices(graph: LevelGraph) -> list[str]:
    """Labels of the images of V_0, in boundary-point order."""
    return [vertex_label(graph.vertices[i]) for i in graph.boundary]


def embed_previous(graph: LevelGraph, previous: LevelGraph) -> list[int]:
    """Index in ``graph`` of each vertex of the level-(m-1) graph ``previous``."""
    if previous.level != graph.level - 1 or previous.spec != graph.spec:
        raise ValueError("previous must be the level m-1 graph of the same fractal")
    return [graph.index_of(v) for v in previous.vertices]
