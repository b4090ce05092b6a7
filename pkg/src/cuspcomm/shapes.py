"""Hyperbolic structures on ideal triangulations.

Each positively oriented ideal tetrahedron carries a shape parameter z in
the upper half plane.  Placing the tetrahedron with vertices

    u0 = 0,  u1 = oo,  u2 = 1,  u3 = z

the three edge pairs carry the parameters

    (01)(23) -> z,   (02)(13) -> (z-1)/z,   (03)(12) -> 1/(1-z),

each the multiplier cross-ratio of its edge; their product is -1 and
their arguments are the dihedral angles.  A complete hyperbolic structure
is a solution of the edge equations (the parameters around each edge
class multiply to 1 with angle sum 2 pi) together with the completeness
equations (the similarity holonomy of each cusp torus has derivative 1).

Solving proceeds by a least-squares Newton iteration on the shape vector,
first in double precision from the regular starting point exp(i pi/3)
with a few deterministic perturbation retries, then refined with mpmath
to the requested number of digits.  Cusp cross-sections are developed
explicitly: every corner of a tetrahedron at the cusp is placed on the
horosphere viewed from the cusp point at infinity, which also yields the
translation lattice and modulus of each cusp torus.
"""

import cmath
import random

import mpmath

from .triangulation import TriangulationError


class GeometryError(ValueError):
    pass


_PAIR_CLASS = {}
for _a, _b in ((0, 1), (2, 3)):
    _PAIR_CLASS[(_a, _b)] = 0
for _a, _b in ((0, 2), (1, 3)):
    _PAIR_CLASS[(_a, _b)] = 1
for _a, _b in ((0, 3), (1, 2)):
    _PAIR_CLASS[(_a, _b)] = 2


def pair_class(a, b):
    """0, 1, 2 for the edge pair classes (01)(23), (02)(13), (03)(12)."""
    return _PAIR_CLASS[(a, b) if a < b else (b, a)]


def edge_param(z, cls):
    if cls == 0:
        return z
    if cls == 1:
        return (z - 1) / z
    return 1 / (1 - z)


def edge_param_dlog(z, cls):
    """d/dz of log(edge_param(z, cls))."""
    if cls == 0:
        return 1 / z
    if cls == 1:
        return 1 / (z - 1) - 1 / z
    return 1 / (1 - z)


_EVEN4 = {}


def _even_pair(v, f):
    """The ordered remaining pair (c, d) making (v, f, c, d) an even
    permutation of (0,1,2,3)."""
    key = (v, f)
    if key not in _EVEN4:
        c, d = [x for x in range(4) if x not in key]
        perm = [v, f, c, d]
        inv = sum(1 for i in range(4) for j in range(i + 1, 4)
                  if perm[i] > perm[j])
        _EVEN4[key] = (c, d) if inv % 2 == 0 else (d, c)
    return _EVEN4[key]


class CuspDevelopment:
    """One cusp cross-section developed on the horosphere about the cusp
    point placed at infinity.

    positions[(tet, v)] maps each other vertex w of the corner to its
    point in C; closures lists the similarity holonomies (a, b), meaning
    x -> a x + b, of the loops closing the development.  For a complete
    structure every a is 1 and the b span the cusp translation lattice."""

    def __init__(self, cusp, positions, closures):
        self.cusp = cusp
        self.positions = positions
        self.closures = closures

    def lattice_basis(self, tol=1e-6):
        """A reduced basis (b1, b2) of the translation lattice spanned by
        the closure translations, via Lagrange reduction."""
        vecs = [b for a, b in self.closures if abs(a - 1) <= tol]
        basis = _planar_lattice_basis(vecs)
        if basis is None:
            raise GeometryError("cusp %d closures do not span a lattice"
                                % self.cusp)
        return basis

    def modulus(self, tol=1e-6):
        """The shape of the cusp torus: tau = b2/b1 for a reduced lattice
        basis, normalized to the upper half plane."""
        b1, b2 = self.lattice_basis(tol)
        tau = b2 / b1
        if _im(tau) < 0:
            tau = -tau
        return tau


def _im(x):
    return x.imag if isinstance(x, complex) else mpmath.im(x)


def _re(x):
    return x.real if isinstance(x, complex) else mpmath.re(x)


def _planar_lattice_basis(vecs, eps=None):
    """A Lagrange-reduced basis of the planar lattice generated by the
    given complex vectors, or None when they do not span rank 2.  The
    vectors are assumed to lie in a common lattice (they are holonomy
    translations), so greedy pairwise reduction terminates on a basis."""
    if eps is None:
        m = max((abs(v) for v in vecs), default=0)
        eps = 1e-9 * (m or 1)
    vecs = [v for v in vecs if abs(v) > eps]
    changed = True
    while changed:
        changed = False
        vecs = sorted((v for v in vecs if abs(v) > eps), key=abs)
        for i in range(len(vecs)):
            for j in range(len(vecs)):
                if i == j or abs(vecs[i]) <= eps or abs(vecs[j]) <= eps:
                    continue
                # real part of v_j / v_i is the projection coefficient
                n = round(float(_re(vecs[j] / vecs[i])))
                if n != 0:
                    w = vecs[j] - n * vecs[i]
                    if abs(w) < abs(vecs[j]) - eps:
                        vecs[j] = w
                        changed = True
    vecs = sorted((v for v in vecs if abs(v) > eps), key=abs)
    if not vecs:
        return None
    b1 = vecs[0]
    for v in vecs[1:]:
        if abs(_im(v / b1)) * abs(b1) > eps:
            return (b1, v)
    return None


class ShapeSolution:
    """A complete hyperbolic structure on an oriented ideal triangulation.

    Attributes: triangulation (the positively oriented relabeled copy),
    shapes (one parameter per tetrahedron), dps (decimal digits), residual
    (final equation residual), developments (one CuspDevelopment per cusp).
    """

    def __init__(self, tri, shapes, dps, residual):
        self.triangulation = tri
        self.shapes = list(shapes)
        self.dps = dps
        self.residual = residual
        self.developments = [develop_cusp(tri, self.shapes, c)
                             for c in range(tri.n_cusps)]

    def volume(self):
        with mpmath.workdps(self.dps + 10):
            return +sum(bloch_wigner(z) for z in self.shapes)

    def cusp_modulus(self, cusp):
        with mpmath.workdps(self.dps + 10):
            return +self.developments[cusp].modulus(
                tol=10.0 ** (-self.dps // 2))

    def __repr__(self):
        return ('ShapeSolution(%s, %d tets, dps=%d, residual=%.2e)'
                % (self.triangulation.name, len(self.shapes), self.dps,
                   float(self.residual)))


def bloch_wigner(z):
    """The Bloch-Wigner dilogarithm D(z) = Im Li2(z) + arg(1-z) log|z|,
    the hyperbolic volume of the ideal tetrahedron of shape z."""
    z = mpmath.mpc(z)
    if mpmath.im(z) == 0:
        return mpmath.mpf(0)
    li2 = mpmath.polylog(2, z)
    return mpmath.im(li2) + mpmath.arg(1 - z) * mpmath.log(abs(z))


def develop_cusp(tri, shapes, cusp):
    """Develop the corner triangles of one cusp on the horosphere, with
    the cusp point at infinity.  Deterministic breadth-first traversal;
    returns a CuspDevelopment."""
    corners = sorted(tv for tv, c in tri.cusp_of.items() if c == cusp)
    if not corners:
        raise GeometryError("no corners on cusp %d" % cusp)
    positions = {}
    closures = []
    t0, v0 = corners[0]
    others = [w for w in range(4) if w != v0]
    a, b, c = others
    perm0 = [v0, a, b, c]
    inv = sum(1 for i in range(4) for j in range(i + 1, 4)
              if perm0[i] > perm0[j])
    if inv % 2 == 1:
        b, c = c, b
    q = edge_param(shapes[t0], pair_class(v0, a))
    positions[(t0, v0)] = {a: 0 * q, b: 1 + 0 * q, c: 1 / q}
    queue = [(t0, v0)]
    while queue:
        t, v = queue.pop(0)
        pos = positions[(t, v)]
        for f in sorted(w for w in range(4) if w != v):
            t2, f2, perm = tri.glue[(t, f)]
            v2 = perm[v]
            g, h = [w for w in range(4) if w not in (v, f)]
            known = {perm[g]: pos[g], perm[h]: pos[h]}
            cc, dd = _even_pair(v2, f2)
            q = edge_param(shapes[t2], pair_class(v2, f2))
            x = (known[cc] - q * known[dd]) / (1 - q)
            new = dict(known)
            new[f2] = x
            if (t2, v2) in positions:
                old = positions[(t2, v2)]
                ws = sorted(new)
                alpha = ((old[ws[0]] - old[ws[1]])
                         / (new[ws[0]] - new[ws[1]]))
                beta = old[ws[0]] - alpha * new[ws[0]]
                closures.append((alpha, beta))
            else:
                positions[(t2, v2)] = new
                queue.append((t2, v2))
    if len(positions) != len(corners):
        raise GeometryError("cusp %d development did not reach all corners"
                            % cusp)
    return CuspDevelopment(cusp, positions, closures)


def _residuals(tri, shapes, edge_classes, two_pi_i):
    """Edge equations followed by completeness equations (one log-holonomy
    per closure of every cusp development)."""
    res = []
    for cls in edge_classes:
        s = 0
        for t, (e1, e2) in cls:
            s = s + _log(edge_param(shapes[t], pair_class(e1, e2)))
        res.append(s - two_pi_i)
    for cusp in range(tri.n_cusps):
        dev = develop_cusp(tri, shapes, cusp)
        for alpha, beta in dev.closures:
            res.append(_log(alpha))
    return res


def _log(z):
    if isinstance(z, complex):
        return cmath.log(z)
    return mpmath.log(z)


def _solve_newton(tri, z0, edge_classes, dps=None, max_iter=60):
    """Least-squares Newton on the shape vector.  dps None means double
    precision with numpy; otherwise mpmath at the given digits."""
    n = len(z0)
    if dps is None:
        import numpy as np
        two_pi_i = 2j * cmath.pi
        z = list(z0)
        h = 1e-7
        tol = 1e-12
        for _ in range(max_iter):
            F = _residuals(tri, z, edge_classes, two_pi_i)
            m = len(F)
            err = max(abs(x) for x in F)
            if err < tol:
                return z, err
            J = np.zeros((m, n), dtype=complex)
            for tcol in range(n):
                zp = list(z)
                zm = list(z)
                zp[tcol] = zp[tcol] + h
                zm[tcol] = zm[tcol] - h
                Fp = _residuals(tri, zp, edge_classes, two_pi_i)
                Fm = _residuals(tri, zm, edge_classes, two_pi_i)
                for r in range(m):
                    J[r, tcol] = (Fp[r] - Fm[r]) / (2 * h)
            step, *_ = np.linalg.lstsq(J, -np.array(F), rcond=None)
            lam = 1.0
            base = err
            for _damp in range(12):
                z_new = [z[t] + lam * step[t] for t in range(n)]
                if min(x.imag for x in z_new) <= 0:
                    lam *= 0.5
                    continue
                F_new = _residuals(tri, z_new, edge_classes, two_pi_i)
                if max(abs(x) for x in F_new) < base:
                    z = z_new
                    break
                lam *= 0.5
            else:
                return None, err
        F = _residuals(tri, z, edge_classes, two_pi_i)
        err = max(abs(x) for x in F)
        return (z, err) if err < tol else (None, err)
    # mpmath refinement
    with mpmath.workdps(dps + 15):
        two_pi_i = 2j * mpmath.pi
        z = [mpmath.mpc(x) for x in z0]
        h = mpmath.mpf(10) ** (-(dps + 15) // 2)
        tol = mpmath.mpf(10) ** (-dps)
        for _ in range(max_iter):
            F = _residuals(tri, z, edge_classes, two_pi_i)
            m = len(F)
            err = max(abs(x) for x in F)
            if err < tol:
                return z, err
            J = mpmath.matrix(m, n)
            for tcol in range(n):
                zp = list(z)
                zm = list(z)
                zp[tcol] = zp[tcol] + h
                zm[tcol] = zm[tcol] - h
                Fp = _residuals(tri, zp, edge_classes, two_pi_i)
                Fm = _residuals(tri, zm, edge_classes, two_pi_i)
                for r in range(m):
                    J[r, tcol] = (Fp[r] - Fm[r]) / (2 * h)
            rhs = mpmath.matrix([-x for x in F])
            try:
                step = mpmath.qr_solve(J, rhs)[0]
            except (ZeroDivisionError, ValueError):
                # rank-deficient Jacobian (symmetric solutions); fall back
                # to ridge-regularized normal equations
                JH = J.T.apply(mpmath.conj)
                A = JH * J
                for i in range(n):
                    A[i, i] += mpmath.mpf(10) ** (-dps)
                try:
                    step = mpmath.lu_solve(A, JH * rhs)
                except (ZeroDivisionError, ValueError):
                    return None, err
            z = [z[t] + step[t] for t in range(n)]
            if min(mpmath.im(x) for x in z) <= 0:
                return None, err
        F = _residuals(tri, z, edge_classes, two_pi_i)
        err = max(abs(x) for x in F)
        return (z, err) if err < tol else (None, err)


def _initial_guesses(n, attempts=9):
    """The regular shape for every tetrahedron, then deterministic
    perturbed restarts."""
    base = cmath.exp(1j * cmath.pi / 3)
    yield [base] * n
    for k in range(1, attempts):
        rng = random.Random(661 * k)
        yield [cmath.exp(1j * cmath.pi * (0.15 + 0.7 * rng.random()))
               * (0.6 + 0.8 * rng.random()) for _ in range(n)]


def solve_shapes(tri, dps=30, flat_eps=1e-9):
    """Solve for the complete hyperbolic structure on an ideal
    triangulation.  Returns a ShapeSolution on the positively oriented
    relabeled copy of the input.  Raises GeometryError when no positively
    oriented solution is found or the solution is flat."""
    oriented, _swapped = tri.oriented_copy()
    edge_classes = oriented.edge_classes()
    last_err = None
    for guess in _initial_guesses(oriented.n_tets):
        z, err = _solve_newton(oriented, guess, edge_classes, dps=None)
        last_err = err
        if z is not None:
            break
    else:
        raise GeometryError(
            "no geometric solution found for %s (best residual %.2e); "
            "the triangulation may admit only degenerate shapes"
            % (tri.name or 'triangulation', float(last_err)))
    if min(x.imag for x in z) < flat_eps:
        raise GeometryError(
            "solution for %s contains a flat tetrahedron (Im z = %.2e)"
            % (tri.name or 'triangulation', min(x.imag for x in z)))
    if dps is not None:
        z, err = _solve_newton(oriented, z, edge_classes, dps=dps)
        if z is None:
            raise GeometryError("high-precision refinement failed for %s"
                                % (tri.name or 'triangulation'))
    with mpmath.workdps((dps or 15) + 10):
        sol = ShapeSolution(oriented, z, dps or 15, err)
    return sol
