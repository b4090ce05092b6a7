"""Triangulation combinatorics: classes, orientability, moves, files."""

import random

import pytest

from cuspcomm.triangulation import Triangulation, TriangulationError, load
from cuspcomm.surface import cusp_link
from cuspcomm import ptb


def bundle(word, sign=1):
    return ptb.monodromy_triangulation(word, sign)


def test_edge_and_vertex_classes():
    t = bundle('LR')
    assert t.n_tets == 2
    assert len(t.vertex_classes()) == 1
    assert len(t.edge_classes()) == 2
    assert t.edge_orders() == [6, 6]
    # every tetrahedron edge belongs to exactly one class
    idx = t.edge_class_index()
    assert len(idx) == 6 * t.n_tets


def test_orientability_and_double_cover():
    t = bundle('LLR')
    assert t.is_orientable()
    # flip one gluing to break orientability
    a, f = next(iter(t.glue))
    t2, f2, p = t.glue[(a, f)]
    q = list(p)
    i, j = [v for v in range(4) if v != f][:2]
    q[i], q[j] = q[j], q[i]
    glue = dict(t.glue)
    glue[(a, f)] = (t2, f2, tuple(q))
    del glue[(t2, f2)]
    flipped = Triangulation(t.n_tets, glue)
    assert not flipped.is_orientable()
    cover = flipped.orientation_double_cover()
    assert cover.n_tets == 2 * flipped.n_tets
    assert cover.is_orientable()


def test_pachner_23_move():
    t = bundle('LRRLR')
    n_edges = len(t.edge_classes())
    moved = t.pachner_23(0, 0)
    assert moved.n_tets == t.n_tets + 1
    assert moved.n_cusps == t.n_cusps
    assert len(moved.edge_classes()) == n_edges + 1
    assert moved.is_orientable() == t.is_orientable()
    assert sum(moved.edge_orders()) == 6 * moved.n_tets


def test_pachner_23_random_faces():
    rng = random.Random(5)
    t = bundle('LLRRLR')
    for _ in range(10):
        f = rng.randrange(4)
        tet = rng.randrange(t.n_tets)
        t2, _, _ = t.glue[(tet, f)]
        if t2 == tet:
            continue
        moved = t.pachner_23(tet, f)
        assert moved.n_cusps == t.n_cusps
        assert len(moved.edge_classes()) == len(t.edge_classes()) + 1


def test_tri_text_round_trip(tmp_path):
    t = bundle('LRRLR', -1)
    text = t.to_tri_text()
    back = Triangulation.from_tri_text(text, name=t.name)
    assert back.n_tets == t.n_tets
    assert back.glue == t.glue
    assert back.cusp_of == t.cusp_of
    assert back.to_tri_text() == text
    p = tmp_path / 'b.tri'
    p.write_text(text)
    again = load(str(p))
    assert again.glue == t.glue


def test_tri_text_errors():
    with pytest.raises(TriangulationError):
        Triangulation.from_tri_text('tets 1\n')          # unglued faces
    with pytest.raises(TriangulationError):
        Triangulation.from_tri_text('tri 2\ntets 0\n')   # bad version
    t = bundle('LR')
    text = t.to_tri_text().replace('cusps 1', 'cusps 3')
    with pytest.raises(TriangulationError):
        Triangulation.from_tri_text(text)
    # inconsistent cusp labels on one vertex class
    lines = [ln for ln in t.to_tri_text().splitlines()]
    lines = [ln if not ln.startswith('cusp 0 0') else 'cusp 0 0 1'
             for ln in lines]
    with pytest.raises(TriangulationError):
        Triangulation.from_tri_text('\n'.join(lines).replace('cusps 1', 'cusps 2'))


def test_census_subset_parser():
    t = bundle('LR')
    lines = ['% Triangulation', 'sample', 'not_attempted 0.0', 'unknown_orientability',
             'CS_unknown', '1 0', '    torus 0.0 0.0', '2 0']
    for tet in range(t.n_tets):
        nbrs, perms = [], []
        for f in range(4):
            t2, f2, perm = t.glue[(tet, f)]
            nbrs.append(str(t2))
            perms.append(''.join(str(x) for x in perm))
        lines.append('   ' + ' '.join(nbrs))
        lines.append('  ' + ' '.join(perms))
        lines.append('  0 0 0 0')
        lines.append('  0  1  0 -1  0  0  0  0  1  0 -1  0  0  0  0  0')
        lines.append('  0.5 0.866025403784')
    text = '\n'.join(lines) + '\n'
    parsed = Triangulation.from_census_text(text)
    assert parsed.n_tets == t.n_tets
    assert parsed.glue == t.glue
    assert parsed.name == 'sample'


def test_cusp_link_is_torus_for_bundles():
    for w, sign in [('LR', 1), ('LLR', -1), ('LRRLR', 1)]:
        t = bundle(w, sign)
        surf, corners = cusp_link(t)
        assert surf.n_tris == 4 * t.n_tets
        assert surf.euler_characteristic() == 0
        assert surf.orientation_signs() is not None
        assert len(corners) == 4 * t.n_tets
