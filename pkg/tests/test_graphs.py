import pytest
from hypothesis import given, strategies as st

from fracspec.graphs import FRACTALS, FractalSpec, boundary_vertices, build_level, embed_previous, get_fractal


@pytest.mark.parametrize("m", range(6))
def test_interval_counts(m):
    g = build_level("interval", m)
    assert g.n_vertices == 2**m + 1
    assert len(g.edges) == 2**m


@pytest.mark.parametrize("m", range(5))
def test_sg_counts(m):
    g = build_level("sg", m)
    assert g.n_vertices == (3 ** (m + 1) + 3) // 2
    assert len(g.edges) == 3 ** (m + 1)
    assert sorted(set(g.degrees) - {4}) == [2]  # corners have degree 2, every other vertex 4


@pytest.mark.parametrize("m", range(4))
def test_sg3_counts(m):
    g = build_level("sg3", m)
    # six cells per step, eight identifications among their 18 corners
    v = 3
    for _ in range(m):
        v = 6 * v - 8
    assert g.n_vertices == v
    assert len(g.edges) == 3 * 6**m


def test_level_zero_is_triangle():
    g = build_level("sg", 0)
    assert g.n_vertices == 3
    assert sorted(g.edges) == [(0, 1), (0, 2), (1, 2)]
    assert boundary_vertices(g) == [":0", ":1", ":2"]


@pytest.mark.parametrize("name", sorted(FRACTALS))
def test_graph_is_connected_and_simple(name):
    g = build_level(name, 2)
    assert len(set(g.edges)) == len(g.edges)
    assert all(i != j for i, j in g.edges)
    seen, todo = {0}, [0]
    while todo:
        for k in g.adjacency[todo.pop()]:
            if k not in seen:
                seen.add(k)
                todo.append(k)
    assert len(seen) == g.n_vertices
    assert len(g.boundary) == get_fractal(name).n_corners


@given(st.sampled_from(sorted(FRACTALS)), st.integers(1, 3))
def test_previous_level_embeds(name, m):
    prev, cur = build_level(name, m - 1), build_level(name, m)
    idx = embed_previous(cur, prev)
    assert len(set(idx)) == prev.n_vertices
    assert [idx[b] for b in prev.boundary] == list(cur.boundary)


def test_deterministic_ordering():
    assert build_level("sg3", 2).to_dict() == build_level("sg3", 2).to_dict()


def test_level_cap_and_negative_level():
    spec = get_fractal("sg")
    with pytest.raises(ValueError):
        build_level(spec, spec.max_level + 1)
    with pytest.raises(ValueError):
        build_level(spec, -1)


def test_template_validation():
    with pytest.raises(ValueError):
        FractalSpec("bad", 2, 2, (frozenset({(0, 1)}),), (0, 1), 3)
    with pytest.raises(ValueError):
        FractalSpec("bad", 2, 2, (frozenset({(0, 0), (1, 0)}),), (0, 1), 3)
