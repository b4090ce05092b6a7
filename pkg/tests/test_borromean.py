"""Tests for the frozen Borromean rings triangulation asset.

The asset is two regular ideal octahedra, each cut into four tetrahedra
around a vertical diagonal.  Everything asserted here is recomputed from
the file: combinatorics, homology, and the geometric solution against
the independent constants Catalan's constant (volume 8G) and the square
cusp tori."""

import mpmath

from cuspcomm import asset_path, ptb
from cuspcomm.homology import h1
from cuspcomm.shapes import solve_shapes
from cuspcomm.triangulation import load


def test_borromean_combinatorics():
    tri = load(asset_path('borromean.tri'))
    assert tri.n_tets == 8
    assert tri.n_cusps == 3
    assert tri.is_orientable()
    assert len(tri.edge_classes()) == 8
    # two octahedron diagonals of order 4; total angle 2 pi per class
    orders = tri.edge_orders()
    assert sum(orders) == 6 * 8
    assert h1(tri) == (3, [])


def test_borromean_geometry():
    tri = load(asset_path('borromean.tri'))
    sol = solve_shapes(tri, dps=35)
    with mpmath.workdps(45):
        for z in sol.shapes:
            assert abs(z - 1j) < 1e-33
        assert abs(sol.volume() - 8 * mpmath.catalan) < 1e-33
        for c in range(3):
            tau = sol.cusp_modulus(c)
            assert abs(tau - 2j) < 1e-30
        for dev in sol.developments:
            for alpha, _ in dev.closures:
                assert abs(alpha - 1) < 1e-30


def test_bundle_assets_match_generator():
    for name, word, sign in [('m004', 'LR', 1), ('m003', 'LR', -1)]:
        tri = load(asset_path(name + '.tri'))
        gen = ptb.monodromy_triangulation(word, sign)
        assert tri.n_tets == gen.n_tets
        assert tri.glue == gen.glue
        assert tri.cusp_of == gen.cusp_of
