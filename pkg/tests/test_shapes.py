"""Tests for the hyperbolic structure solver.

The volume oracle is the Lobachevsky function evaluated by numerical
integration, Lob(x) = -int_0^x log|2 sin t| dt: the figure-eight bundle
is two regular ideal tetrahedra of volume 2 Lob(pi/3) each, so its
volume must equal 6 Lob(pi/3).  Cyclic covers in the fiber direction
(the bundle of w^k) multiply volume by k, giving an internal consistency
oracle for non-regular examples.
"""

import cmath
import random

import mpmath
import pytest

from cuspcomm import ptb
from cuspcomm.shapes import (GeometryError, bloch_wigner, develop_cusp,
                             edge_param, pair_class, solve_shapes)
from cuspcomm.triangulation import Triangulation, TriangulationError


def lobachevsky(x):
    return -mpmath.quad(lambda t: mpmath.log(abs(2 * mpmath.sin(t))), [0, x])


def test_figure_eight_shapes_and_volume():
    tri = ptb.monodromy_triangulation('LR', 1)
    sol = solve_shapes(tri, dps=30)
    assert float(sol.residual) < 1e-30
    with mpmath.workdps(40):
        w = mpmath.exp(1j * mpmath.pi / 3)
        for z in sol.shapes:
            assert abs(z - w) < 1e-28
        vol = sol.volume()
        oracle = 6 * lobachevsky(mpmath.pi / 3)
        assert abs(vol - oracle) < 1e-28


def test_figure_eight_cusp_modulus():
    tri = ptb.monodromy_triangulation('LR', 1)
    sol = solve_shapes(tri, dps=30)
    with mpmath.workdps(40):
        tau = sol.cusp_modulus(0)
        assert abs(tau - 2j * mpmath.sqrt(3)) < 1e-28
    # completeness: every closure is a translation
    for dev in sol.developments:
        for alpha, beta in dev.closures:
            assert abs(alpha - 1) < 1e-28


def test_sister_volume_and_hexagonal_cusp():
    tri = ptb.monodromy_triangulation('LR', -1)
    sol = solve_shapes(tri, dps=30)
    with mpmath.workdps(40):
        vol = sol.volume()
        assert abs(vol - 6 * lobachevsky(mpmath.pi / 3)) < 1e-28
        tau = sol.cusp_modulus(0)
        # hexagonal torus: tau is a primitive sixth root of unity
        assert abs(tau * tau + tau + 1) < 1e-27 or \
            abs(tau * tau - tau + 1) < 1e-27


def test_cyclic_cover_volume_scaling():
    with mpmath.workdps(40):
        for word, sign in [('LLR', 1), ('LRRR', -1)]:
            base = solve_shapes(ptb.monodromy_triangulation(word, sign),
                                dps=30)
            cover = solve_shapes(ptb.monodromy_triangulation(word * 2, 1),
                                 dps=30)
            assert abs(cover.volume() - 2 * base.volume()) < 1e-27


def test_volume_invariant_under_pachner_moves():
    tri = ptb.monodromy_triangulation('LR', 1)
    sol0 = solve_shapes(tri, dps=30)
    with mpmath.workdps(40):
        v0 = sol0.volume()
        tau0 = sol0.cusp_modulus(0)
        for t in range(tri.n_tets):
            for f in range(4):
                sol = solve_shapes(tri.pachner_23(t, f), dps=30)
                assert abs(sol.volume() - v0) < 1e-27
                assert abs(sol.cusp_modulus(0) - tau0) < 1e-27


def test_oriented_copy_is_transparent():
    # the layered labeling of the figure-eight bundle gives tet 1 the
    # minority orientation, so solving must relabel it first
    tri = ptb.monodromy_triangulation('LR', 1)
    assert tri.orientation_signs() == [1, -1]
    fixed, swapped = tri.oriented_copy()
    assert swapped == [1]
    assert fixed.orientation_signs() == [1, 1]
    assert fixed.edge_orders() == tri.edge_orders()
    assert fixed.n_cusps == tri.n_cusps
    sol_orig = solve_shapes(tri, dps=30)
    sol_fixed = solve_shapes(fixed, dps=30)
    with mpmath.workdps(40):
        oracle = 6 * lobachevsky(mpmath.pi / 3)
        assert abs(sol_orig.volume() - oracle) < 1e-28
        assert abs(sol_fixed.volume() - oracle) < 1e-28


def test_degenerate_bundle_raises():
    tri = ptb.monodromy_triangulation('LL', 1, require_hyperbolic=False)
    with pytest.raises(GeometryError):
        solve_shapes(tri, dps=30)


def test_nonorientable_raises():
    tri = ptb.monodromy_triangulation('LR', 1)
    gl = dict(tri.glue)
    (t, f), (t2, f2, p) = next(iter(gl.items()))
    q = list(p)
    i, j = [v for v in range(4) if v != f][:2]
    q[i], q[j] = q[j], q[i]
    gl[(t, f)] = (t2, f2, tuple(q))
    del gl[(t2, f2)]
    bad = Triangulation(2, gl)
    assert not bad.is_orientable()
    with pytest.raises(TriangulationError):
        solve_shapes(bad, dps=30)


def test_edge_parameters_multiply_to_minus_one():
    rng = random.Random(20260823)
    for _ in range(50):
        z = complex(rng.uniform(-2, 2), rng.uniform(0.05, 2))
        p = edge_param(z, 0) * edge_param(z, 1) * edge_param(z, 2)
        assert abs(p + 1) < 1e-10
        # every pair class keeps the upper half plane
        for cls in range(3):
            assert edge_param(z, cls).imag > 0


def test_pair_class_table():
    assert pair_class(0, 1) == pair_class(2, 3) == 0
    assert pair_class(0, 2) == pair_class(1, 3) == 1
    assert pair_class(0, 3) == pair_class(1, 2) == 2
    assert pair_class(3, 0) == 2


def test_bloch_wigner_properties():
    with mpmath.workdps(30):
        rng = random.Random(7)
        for _ in range(20):
            z = mpmath.mpc(rng.uniform(-2, 2), rng.uniform(0.1, 2))
            d = bloch_wigner(z)
            assert d > 0
            # the five-term relatives: all three edge parameters of one
            # tetrahedron have the same volume
            assert abs(bloch_wigner(1 / (1 - z)) - d) < 1e-25
            assert abs(bloch_wigner((z - 1) / z) - d) < 1e-25
            assert abs(bloch_wigner(mpmath.conj(z)) + d) < 1e-25
        # the regular shape maximizes tetrahedron volume; its three
        # dihedral angles are all pi/3
        peak = bloch_wigner(mpmath.exp(1j * mpmath.pi / 3))
        assert abs(peak - 3 * lobachevsky(mpmath.pi / 3)) < 1e-25
        for _ in range(20):
            z = mpmath.mpc(rng.uniform(-2, 2), rng.uniform(0.1, 2))
            assert bloch_wigner(z) <= peak + 1e-25


def test_development_combinatorics():
    tri = ptb.monodromy_triangulation('LLRR', 1)
    sol = solve_shapes(tri, dps=30)
    for cusp, dev in enumerate(sol.developments):
        corners = [tv for tv, c in sol.triangulation.cusp_of.items()
                   if c == cusp]
        assert set(dev.positions) == set(corners)
        # each placed corner triangle is nondegenerate
        for pos in dev.positions.values():
            pts = list(pos.values())
            assert len(pts) == 3
            area = abs((pts[1] - pts[0]) * mpmath.conj(pts[2] - pts[0])
                       - mpmath.conj(pts[1] - pts[0]) * (pts[2] - pts[0]))
            assert area > 1e-10
        # one closure per traversal that did not place a new corner
        assert len(dev.closures) == 2 * len(corners) + 1


def test_closures_lie_in_reduced_lattice():
    with mpmath.workdps(40):
        for word, sign in [('LR', 1), ('LLR', 1), ('LRRR', -1)]:
            sol = solve_shapes(ptb.monodromy_triangulation(word, sign),
                               dps=30)
            dev = sol.developments[0]
            b1, b2 = dev.lattice_basis(tol=1e-20)
            det = (mpmath.re(b1) * mpmath.im(b2)
                   - mpmath.im(b1) * mpmath.re(b2))
            for alpha, beta in dev.closures:
                x = (mpmath.re(beta) * mpmath.im(b2)
                     - mpmath.im(beta) * mpmath.re(b2)) / det
                y = (mpmath.re(b1) * mpmath.im(beta)
                     - mpmath.im(b1) * mpmath.re(beta)) / det
                assert abs(x - round(float(x))) < 1e-20
                assert abs(y - round(float(y))) < 1e-20
            tau = sol.cusp_modulus(0)
            # reduced modulus lies in the standard fundamental domain
            assert abs(mpmath.re(tau)) <= 0.5 + 1e-20
            assert abs(tau) >= 1 - 1e-20
            assert mpmath.im(tau) > 0
