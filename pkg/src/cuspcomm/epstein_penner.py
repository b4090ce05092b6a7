"""Cell decompositions of cusped hyperbolic 3-manifolds from Minkowski
lifts of horoballs.

A choice of one horoball per cusp lifts equivariantly to a family of
points on the light cone of Minkowski space R^{3,1}, and the boundary of
the convex hull of that family projects to an ideal cell decomposition
D(v) of the manifold, depending only on the ray of the cusp size vector
v.  This module computes the lifts from a solved triangulation, the
hyperplane normals and tilt linear functionals that detect the faces of
D(v), and the decomposition itself by flipping away faces of negative
tilt and merging faces of zero tilt.

Conventions.  The bilinear form is x*y = x1 y1 + x2 y2 + x3 y3 - x4 y4.
A horoball corresponds to the unique future light-like vector n with
x*n = -1 for points x of the boundary horosphere; in the upper
half-space model the horoball of Euclidean diameter d at u in C has
n = (2 Re u, 2 Im u, |u|^2 - 1, |u|^2 + 1)/d, the horoball {height > h}
at infinity has n = h(0, 0, 1, 1), and n*n' = -2 exp(delta) where delta
is the signed distance between two horoballs.  The size of a cusp
neighbourhood is the square root of its cross-section area, and the
stored lifts use the size-1 (unit area) horosphere of every cusp, so
the vertex representative at sizes v is n / v_{c} for a vertex on cusp
c.  All tilt and coplanarity rows are invariant under Lorentz changes
of frame and under uniform rescaling of the lifts.

For a cell with lifted vertices n_0, ..., n_k and cusp indices c(j),
the hyperplane through the first four representatives n_j / v_{c(j)}
is {x : x . N_v = 1} (Euclidean dot) with N_v = M^-1 (v_{c(0)}, ...,
v_{c(3)})^t for M the matrix with rows n_j, which is linear in v.  The
remaining vertices give coplanarity rows n_j . N_v - v_{c(j)} (the
rows of L_C), and a neighbouring cell's off-face vertex n' gives the
tilt row n' . N_v - v_{c'}: positive tilt means the face is convex and
genuine, zero that the two cells merge, negative that the hull lies
beyond the face.  D(v) = D exactly when L_D v = 0 and F_D v > 0."""

import heapq
import itertools
from collections import deque
from fractions import Fraction

import mpmath
import numpy as np

from .shapes import (GeometryError, ShapeSolution, _im, _re, _solve_newton,
                     develop_cusp, solve_shapes)
from .triangulation import (TriangulationError, _ORIENTED_FACE_VERTS,
                            _parity)


class FlipError(RuntimeError):
    """The flip loop could not reach the canonical decomposition."""


def minkowski_inner(x, y):
    """The signature (3,1) form x1 y1 + x2 y2 + x3 y3 - x4 y4."""
    return x[0] * y[0] + x[1] * y[1] + x[2] * y[2] - x[3] * y[3]


# ---- developing tetrahedra on the sphere at infinity ---------------------
#
# Ideal points are kept as projective pairs (a, b) meaning a/b in the
# boundary C u {infinity}, which avoids every special case at infinity.
# The base tetrahedron of a patch sits at (0, infinity, 1, z).


def _cross(p, q):
    return p[0] * q[1] - q[0] * p[1]


def _fourth_point(z, pts):
    """Given three entries of pts (one is None), return the projective
    point making the cross-ratio shape of the tetrahedron equal z."""
    m = pts.index(None)

    def residual(a, b):
        q = list(pts)
        q[m] = (a, b)
        return (z * _cross(q[2], q[0]) * _cross(q[3], q[1])
                - _cross(q[2], q[1]) * _cross(q[3], q[0]))

    alpha = residual(1, 0)
    beta = residual(0, 1)
    a, b = -beta, alpha
    s = max(abs(a), abs(b))
    if s == 0:
        raise GeometryError("degenerate cross-ratio transfer")
    return (a / s, b / s)


def _shape_of(pts):
    """The cross-ratio shape of the tetrahedron with the four projective
    vertex positions pts, in label order."""
    num = _cross(pts[2], pts[1]) * _cross(pts[3], pts[0])
    den = _cross(pts[2], pts[0]) * _cross(pts[3], pts[1])
    if den == 0:
        raise GeometryError("degenerate vertex positions")
    return num / den


def _base_points(z):
    zero = z * 0
    one = zero + 1
    return [(zero, one), (one, zero), (one, one), (z, one)]


def _across(tri, shapes, pts, t, f):
    """Positions of the tetrahedron glued to face f of t, given t's
    positions pts.  Returns (t2, f2, pts2)."""
    t2, f2, perm = tri.glue[(t, f)]
    filled = [None] * 4
    for w in range(4):
        if w != f:
            filled[perm[w]] = pts[w]
    filled[f2] = _fourth_point(shapes[t2], filled)
    return t2, f2, filled


def _develop_tets(tri, shapes, start, allowed):
    """Breadth-first development crossing only directed faces in
    `allowed`; returns dict tet -> positions (first reach wins)."""
    pos = {start: _base_points(shapes[start])}
    queue = deque([start])
    while queue:
        t = queue.popleft()
        for f in range(4):
            if (t, f) not in allowed:
                continue
            t2, _, pts2 = _across(tri, shapes, pos[t], t, f)
            if t2 in pos:
                continue
            pos[t2] = pts2
            queue.append(t2)
    return pos


# ---- horoball normals from cusp cross-section charts ---------------------


class _Charts:
    """Unit-area cusp cross-section charts.  pos[(t, v)] maps the other
    vertices w of corner (t, v) to their chart points, scaled so each
    cusp torus has area 1; chart distances calibrate horoball sizes."""

    def __init__(self, tri, shapes, tol=1e-6):
        self.pos = {}
        for c in range(tri.n_cusps):
            dev = develop_cusp(tri, shapes, c)
            b1, b2 = dev.lattice_basis(tol)
            area = abs(_im(b1.conjugate() * b2))
            scale = 1 / area ** 0.5
            for corner, pl in dev.positions.items():
                self.pos[corner] = {w: p * scale for w, p in pl.items()}


def _corner_normal(pts, charts, t, v):
    """The Minkowski normal of the size-1 horoball at corner (t, v) of a
    tetrahedron developed at positions pts.

    With q = a/b the corner's position and x, y two other vertices, the
    horoball diameter follows from matching the developed edge x--y
    against the same edge in the unit-area cusp chart; everything
    combines into a formula regular at q = infinity."""
    x, y = [w for w in range(4) if w != v][:2]
    qx, qy, qv = pts[x], pts[y], pts[v]
    chart = charts.pos[(t, v)]
    gap = abs(chart[x] - chart[y])
    cxy, cxv, cyv = abs(_cross(qx, qy)), abs(_cross(qx, qv)), abs(_cross(qy, qv))
    if cxv == 0 or cyv == 0 or gap == 0:
        raise GeometryError("degenerate corner at (%d,%d)" % (t, v))
    scale = cxy / (gap * cxv * cyv)
    a, b = qv
    w = a * b.conjugate()
    aa = abs(a) ** 2
    bb = abs(b) ** 2
    return [2 * _re(w) * scale, 2 * _im(w) * scale,
            (aa - bb) * scale, (aa + bb) * scale]


def lift_patch(tri, shapes, charts, start, allowed):
    """Size-1 horoball lifts of every corner of the patch developed from
    `start` across the directed faces in `allowed`, in the frame that
    puts the start tetrahedron at (0, infinity, 1, z)."""
    pos = _develop_tets(tri, shapes, start, allowed)
    lifts = {}
    for t, pts in pos.items():
        for v in range(4):
            lifts[(t, v)] = _corner_normal(pts, charts, t, v)
    return lifts


def lift_cell(tri, shapes, tets, base=None, allowed=None, charts=None,
              frame=None):
    """Minkowski lifts (at reference sizes v = (1,...,1)) of all corners
    of the given tetrahedra, developed in a common frame with the base
    tet at (0, infinity, 1, z).  By default crossing is allowed through
    any face joining two members; pass `allowed` (a set of directed
    (t, f)) to restrict it, e.g. to the interior faces of a cell that
    abuts itself.  frame='balanced' post-composes balanced_frame().

    Returns dict (tet, vertex) -> 4-vector."""
    tets = sorted(set(tets))
    if base is None:
        base = tets[0]
    if allowed is None:
        allowed = {(t, f) for t in tets for f in range(4)
                   if tri.glue[(t, f)][0] in tets}
    if charts is None:
        charts = _Charts(tri, shapes)
    lifts = lift_patch(tri, shapes, charts, base, allowed)
    missing = [t for t in tets if (t, 0) not in lifts]
    if missing:
        raise ValueError("cell not connected to base %d: %r" % (base, missing))
    if frame == 'balanced':
        lam = balanced_frame([lifts[(t, v)] for t in tets for v in range(4)])
        lifts = {k: list(lam @ np.array([float(x) for x in n]))
                 for k, n in lifts.items()}
    return lifts


def balanced_frame(ns):
    """A Lorentz transformation composed with a uniform positive scaling
    that centers the given light-like vectors: their sum is carried to
    the positive time axis and the mean last coordinate becomes 1.
    Returns the 4x4 matrix to apply.  For cells with enough symmetry
    this reproduces the symmetric integer representatives."""
    A = np.array([[float(x) for x in n] for n in ns])
    s = A.sum(axis=0)
    ss = minkowski_inner(s, s)
    if ss >= 0:
        raise GeometryError("vertex sum is not time-like")
    shat = s / np.sqrt(-ss)
    # Minkowski Gram-Schmidt: three space-like rows orthogonal to shat
    rows = []
    J = np.diag([1.0, 1.0, 1.0, -1.0])
    for seed in np.eye(4):
        w = seed + minkowski_inner(seed, shat) * (J @ shat)
        for r in rows:
            w = w - minkowski_inner(w, r) * (J @ r)
        nrm = minkowski_inner(w, w)
        if nrm > 1e-12:
            rows.append(w / np.sqrt(nrm))
        if len(rows) == 3:
            break
    lam = np.vstack([rows[0] @ J, rows[1] @ J, rows[2] @ J, -shat @ J])
    mean4 = (A @ lam.T)[:, 3].mean()
    return lam / mean4


def lorentz_map(src, dst):
    """The linear map sending each src vector to the corresponding dst
    vector, by least squares.  When both families are horoball lifts of
    the same configuration the result is a Lorentz matrix."""
    A = np.array([[float(x) for x in v] for v in src])
    B = np.array([[float(x) for x in v] for v in dst])
    sol, *_ = np.linalg.lstsq(A, B, rcond=None)
    return sol.T


def is_lorentz(lam, tol=1e-8):
    """Whether lam preserves the Minkowski form within tol."""
    J = np.diag([1.0, 1.0, 1.0, -1.0])
    return bool(np.max(np.abs(lam.T @ J @ lam - J)) <= tol)


# ---- hyperplane normals and tilt rows ------------------------------------


def hyperplane_map(ns, cusps, n_cusps):
    """The 4 x c matrix N with N v the Euclidean normal of the
    hyperplane through the scaled lifts n_j / v_{c(j)}, normalized by
    x . N_v = 1 on the hyperplane.  ns are four lifts, cusps their cusp
    indices."""
    M = np.array([[float(x) for x in n] for n in ns])
    E = np.zeros((4, n_cusps))
    for j, c in enumerate(cusps):
        E[j, c] = 1.0
    try:
        return np.linalg.solve(M, E)
    except np.linalg.LinAlgError:
        raise GeometryError("defining lifts are linearly dependent")


def hyperplane_normal(ns, cusps, v):
    """N_v itself, for four defining lifts and a size vector."""
    v = np.asarray([float(x) for x in v])
    return hyperplane_map(ns, cusps, len(v)) @ v


def tilt_row(n, cusp, nmap):
    """The row vector of v -> n . N_v - v_{cusp}.  For n an off-face
    vertex of the neighbouring cell this is the tilt row of the face;
    for an excess vertex of the cell itself it is a coplanarity row."""
    row = np.array([float(x) for x in n]) @ nmap
    row[cusp] -= 1.0
    return row


def normalize_row(row, zero_eps=0.0):
    """Scale by a positive factor so the entry of largest magnitude is
    +-1; rows below zero_eps in max norm are snapped to exactly zero
    (a coplanarity condition holding identically in v)."""
    row = np.asarray(row, dtype=float)
    m = np.max(np.abs(row))
    if m <= zero_eps:
        return np.zeros_like(row)
    return row / m


def rationalize_row(row, max_den=10 ** 6):
    """Fractions approximating a normalized row, for display."""
    return [Fraction(float(x)).limit_denominator(max_den) for x in row]


def _rel_tilt(row, v):
    nr = float(np.linalg.norm(row))
    if nr <= 1e-9:
        # identically-zero row up to roundoff (a face interior to a cell
        # for every v, e.g. the splitting face of a pyramid)
        return 0.0
    return float(row @ v) / (nr * float(np.linalg.norm(v)))


def _quotient_faces(tri):
    out = []
    for t in range(tri.n_tets):
        for f in range(4):
            t2, f2, _ = tri.glue[(t, f)]
            if (t, f) < (t2, f2):
                out.append(((t, f), (t2, f2)))
    return out


def _face_row(tri, shapes, charts, piece):
    """Tilt row of one tetrahedron face, computed in the frame of its
    lexicographically smaller side: the hyperplane of that tetrahedron
    against the opposite vertex of its neighbour."""
    (t, f), _ = piece
    pts = _base_points(shapes[t])
    ns = [_corner_normal(pts, charts, t, v) for v in range(4)]
    cusps = [tri.cusp_of[(t, v)] for v in range(4)]
    nmap = hyperplane_map(ns, cusps, tri.n_cusps)
    t2, f2, pts2 = _across(tri, shapes, pts, t, f)
    apex = _corner_normal(pts2, charts, t2, f2)
    return tilt_row(apex, tri.cusp_of[(t2, f2)], nmap)


def face_rows(tri, shapes, charts=None):
    """All quotient tetrahedron faces with their tilt rows (unmerged
    simplicial decomposition).  Returns list of (piece, row)."""
    if charts is None:
        charts = _Charts(tri, shapes)
    return [(piece, _face_row(tri, shapes, charts, piece))
            for piece in _quotient_faces(tri)]


# ---- the flip loop -------------------------------------------------------


def _try_23(tri, shapes, piece, flat_eps):
    """Attempt the 2-3 move across a face; returns (tri2, shapes2) or
    None.  New shapes come from cross-ratios of the five developed
    ideal points; flat results (within flat_eps of real) are allowed
    transiently, reversed tetrahedra are not."""
    (t, f), (t2, f2) = piece
    if t == t2:
        return None
    pts = _base_points(shapes[t])
    _, _, pts2 = _across(tri, shapes, pts, t, f)
    apex1 = pts[f]
    apex2 = pts2[f2]
    abc = _ORIENTED_FACE_VERTS[f]
    try:
        znew = [_shape_of([apex1, apex2, pts[abc[i]], pts[abc[(i + 1) % 3]]])
                for i in range(3)]
    except GeometryError:
        return None
    if any(_im(z) < -flat_eps for z in znew):
        return None
    try:
        tri2 = tri.pachner_23(t, f)
    except TriangulationError:
        return None
    shapes2 = [shapes[x] for x in range(tri.n_tets) if x not in (t, t2)]
    return tri2, shapes2 + znew


def _try_32(tri, shapes, t, edge, min_im):
    """Attempt the 3-2 move around an edge of t; returns (tri2, shapes2)
    or None.  Requires an order-3 edge with three distinct tetrahedra
    and both new shapes of imaginary part >= min_im (strictly positive
    min_im when the move must remove a flat tetrahedron)."""
    try:
        ring = tri.edge_ring(t, edge)
    except TriangulationError:
        return None
    if len(ring) != 3 or len({tt for tt, _, _ in ring}) != 3:
        return None
    t0, (a0, b0), (u0, w0) = ring[0]
    pts = _base_points(shapes[t0])
    pole_a, pole_b = pts[a0], pts[b0]
    ring_pos = [pts[u0], pts[w0], None]
    # one crossing reaches the middle tetrahedron and the third ring vertex
    t1, _, pts1 = _across(tri, shapes, pts, t0, u0)
    _, _, (u1, w1) = ring[1]
    assert t1 == ring[1][0]
    ring_pos[2] = pts1[w1]
    try:
        if _parity((a0, b0, u0, w0)) == 0:
            z0 = _shape_of([ring_pos[1], ring_pos[0], ring_pos[2], pole_a])
            z1 = _shape_of([ring_pos[0], ring_pos[1], ring_pos[2], pole_b])
        else:
            z0 = _shape_of([ring_pos[0], ring_pos[1], ring_pos[2], pole_a])
            z1 = _shape_of([ring_pos[1], ring_pos[0], ring_pos[2], pole_b])
    except GeometryError:
        return None
    if _im(z0) < min_im or _im(z1) < min_im:
        return None
    try:
        tri2 = tri.pachner_32(t, edge)
    except TriangulationError:
        return None
    old = {tt for tt, _, _ in ring}
    shapes2 = [shapes[x] for x in range(tri.n_tets) if x not in old]
    return tri2, shapes2 + [z0, z1]


def _face_edges(f):
    abc = [x for x in range(4) if x != f]
    return [(abc[0], abc[1]), (abc[0], abc[2]), (abc[1], abc[2])]


def _resolve_flats(work, zs, flat_eps, depth=4):
    """Yield flat-free states (tri, shapes, n_moves) reachable from the
    given one by 3-2 moves that strictly remove flat tetrahedra,
    branching over the admissible choices."""
    flat = [t for t, z in enumerate(zs) if _im(z) <= flat_eps]
    if not flat:
        yield work, zs, 0
        return
    if depth <= 0:
        return
    for t in flat:
        for edge in [(a, b) for a in range(4) for b in range(a + 1, 4)]:
            out = _try_32(work, zs, t, edge, flat_eps)
            if out is None:
                continue
            for w2, z2, k in _resolve_flats(out[0], out[1], flat_eps,
                                            depth - 1):
                yield w2, z2, k + 1


def _composites(work, zs, piece, flat_eps, bend_eps=1e-2):
    """Candidate moves for a face of negative tilt: the 2-3 across it
    and the 3-2 moves around its edges, each followed by whatever flat
    cleanups are needed.  Yields flat-free (tri, shapes, n_moves).

    The 2-3 may transiently create a tetrahedron bent slightly past
    flat (imaginary part down to -bend_eps): near a wall of the tilt
    polytope, the quadrilateral crossed by a 4-4 re-diagonalization is
    planar only on the wall itself, and bends to one side or the other
    nearby.  The cleanup removes such tetrahedra again, and only states
    with strictly positively oriented shapes are yielded."""
    primaries = []
    out = _try_23(work, zs, piece, bend_eps)
    if out is not None:
        primaries.append(out)
    (t, f), _ = piece
    for edge in _face_edges(f):
        out = _try_32(work, zs, t, edge, -flat_eps)
        if out is not None:
            primaries.append(out)
    for w2, z2 in primaries:
        for w3, z3, k in _resolve_flats(w2, z2, flat_eps):
            yield w3, z3, k + 1


def _face_rels(work, zs, v, eps_tilt):
    """All quotient faces with their relative tilts at v, and the
    potential the flip search descends: (total magnitude of the
    negative relative tilts, their number).  The total comes first: a
    state with few but deeply negative faces is usually further from
    the canonical decomposition than one with many slightly negative
    ones, and ordering by count first can trap the search in a large
    family of deceptively small counts."""
    charts = _Charts(work, zs)
    rels = []
    neg = []
    for piece in _quotient_faces(work):
        rel = _rel_tilt(_face_row(work, zs, charts, piece), v)
        rels.append((rel, piece))
        if rel < -eps_tilt:
            neg.append(rel)
    return (-sum(neg), len(neg)), rels


def _negativity(work, zs, v, eps_tilt):
    return _face_rels(work, zs, v, eps_tilt)[0]


_EVEN_PERMS = [(0, 1, 2, 3), (0, 2, 3, 1), (0, 3, 1, 2),
               (1, 0, 3, 2), (1, 2, 0, 3), (1, 3, 2, 0),
               (2, 0, 1, 3), (2, 1, 3, 0), (2, 3, 0, 1),
               (3, 0, 2, 1), (3, 1, 0, 2), (3, 2, 1, 0)]


def _perm_tables():
    perms = list(itertools.permutations(range(4)))
    comp = {(a, b): tuple(a[b[i]] for i in range(4))
            for a in perms for b in perms}
    inv = {p: tuple(sorted(range(4), key=lambda i: p[i])) for p in perms}
    min_even = {rho: min((comp[(tau, rho)], tau) for tau in _EVEN_PERMS)
                for rho in perms}
    return comp, inv, min_even


_COMP, _PERM_INV, _MIN_EVEN = _perm_tables()


def _shape_relabel(z, perm):
    """The shape of a tetrahedron after relabeling vertex w as perm[w]
    (an even permutation, so the imaginary part keeps its sign)."""
    pts = _base_points(z)
    return _shape_of([pts[perm.index(i)] for i in range(4)])


def _state_key(tri, zs):
    """A canonical certificate of the labeled geometric triangulation,
    invariant under renumbering the tetrahedra and evenly relabeling
    their vertices.  Used to recognize already-visited states during
    the flip search; weaker fingerprints (shape multisets, edge class
    orders) collide between genuinely different triangulations of
    symmetric manifolds and make the search prune its goal.

    The certificate develops the gluing graph breadth-first from every
    (seed tetrahedron, even relabeling) pair, choosing each newly
    reached tetrahedron's relabeling to minimize the recorded gluing
    permutation, and keeps the lexicographically smallest transcript of
    (shape, vertex cusps, gluings)."""
    glue = tri.glue
    cusp_of = tri.cusp_of
    n = tri.n_tets
    # decorations of (tet, relabeling), shared by all starts
    deco = {}
    for t in range(n):
        base = _base_points(zs[t])
        for sig in _EVEN_PERMS:
            inv = _PERM_INV[sig]
            w = _shape_of([base[inv[i]] for i in range(4)])
            deco[(t, sig)] = (round(w.real, 6), round(w.imag, 6),
                              tuple(cusp_of[(t, inv[i])] for i in range(4)),
                              inv)
    # only starts whose first record can be minimal need developing
    head = min(deco[k][:3] for k in deco)
    starts = [k for k in deco if deco[k][:3] == head]
    best = None
    for seed, p0 in starts:
        idx = {seed: 0}
        lab = {seed: p0}
        order_t = [seed]
        rec = []
        qi = 0
        worse = False
        while qi < len(order_t):
            t = order_t[qi]
            qi += 1
            re6, im6, cusps, inv = deco[(t, lab[t])]
            entry = []
            for a in range(4):
                t2, f2, p = glue[(t, inv[a])]
                rho = _COMP[(p, inv)]
                if t2 not in idx:
                    q, tau = _MIN_EVEN[rho]
                    idx[t2] = len(order_t)
                    lab[t2] = tau
                    order_t.append(t2)
                else:
                    q = _COMP[(lab[t2], rho)]
                entry.append((idx[t2], q))
            rec.append((re6, im6, cusps, tuple(entry)))
            if best is not None:
                k = len(rec) - 1
                if k < len(best) and rec[k] > best[k]:
                    worse = True
                    break
        if worse:
            continue
        cand = tuple(rec)
        if best is None or cand < best:
            best = cand
    return best


def _search(work, zs, varr, eps_tilt, flat_eps, budget, active_only=True):
    """Best-first search in the flip graph for a triangulation with
    every relative tilt >= -eps_tilt at the size vector varr.

    A state is a geometric triangulation; its moves are the composites
    across a face (see _composites).  With active_only, only faces with
    relative tilt below a threshold scaled to the state's own worst
    negativity are flipped: the negative faces are the ones that must
    leave the decomposition, the zero faces cross plateaus of
    triangulations subdividing the same cells, and slightly positive
    faces of the same magnitude as the negative ones belong to the same
    degenerating wall configuration.  This prunes the enormous swamp of
    states reachable by disturbing faces that firmly lie in D(v).
    States are explored in order of total negativity; a set of visited
    states (up to relabeling, by canonical certificate) makes plateaus
    crossable, which greedy strict descent cannot do.  Returns (work,
    zs, moves); raises FlipError when the state budget is exhausted or
    every flip sequence is blocked by degenerate configurations."""
    moves = 0
    if any(_im(z) <= flat_eps for z in zs):
        # flat input (only possible with explicitly supplied shapes)
        flats = [t for t, z in enumerate(zs) if _im(z) <= flat_eps]
        for w2, z2, k in _resolve_flats(work, zs, flat_eps):
            work, zs, moves = w2, z2, k
            break
        else:
            raise FlipError("flat tetrahedra %r admit no 3-2 move" % flats)

    seen = {_state_key(work, zs)}
    order = itertools.count()  # tie-break so the heap never compares states
    pot, rels = _face_rels(work, zs, varr, eps_tilt)
    heap = [(pot, next(order), moves, work, zs, rels)]
    while heap:
        pot, _, moves, work, zs, rels = heapq.heappop(heap)
        if pot[1] == 0:
            return work, zs, moves
        if len(seen) >= budget:
            raise FlipError("no non-negatively tilted triangulation found "
                            "within %d states" % budget)
        delta = np.inf
        if active_only:
            delta = max(eps_tilt, -2.0 * min(rel for rel, _ in rels))
        for rel, piece in rels:
            if rel > delta:
                continue
            for w2, z2, k in _composites(work, zs, piece, flat_eps):
                key = _state_key(w2, z2)
                if key in seen:
                    continue
                seen.add(key)
                pot2, rels2 = _face_rels(w2, z2, varr, eps_tilt)
                heapq.heappush(heap, (pot2, next(order), moves + k,
                                      w2, z2, rels2))
    raise FlipError("every flip sequence from this triangulation "
                    "reaches a degenerate configuration")


def _continuation(work, zs, varr, eps_tilt, flat_eps, leg_budget,
                  full_budget, min_step=2.0 ** -8):
    """Reach a non-negatively tilted triangulation at varr by walking
    the segment from the balanced vector (1, ..., 1), warm-starting
    each leg from the previous solution and bisecting failed legs.
    Each leg then only crosses one or two walls of the tilt polytope,
    which takes a handful of flips, so legs get a small state budget
    and fail fast; a leg still stuck at the minimal step is retried
    once with the full budget."""
    ones = np.ones(len(varr))
    work, zs, moves = _search(work, zs, ones, eps_tilt, flat_eps,
                              full_budget)
    t = 0.0
    while t < 1.0:
        step = 1.0 - t
        while True:
            u = (1 - (t + step)) * ones + (t + step) * varr
            try:
                w2, z2, k = _search(work, zs, u, eps_tilt, flat_eps,
                                    leg_budget)
                break
            except FlipError:
                step /= 2
                if step >= min_step:
                    continue
                try:
                    u = (1 - (t + min_step)) * ones + (t + min_step) * varr
                    w2, z2, k = _search(work, zs, u, eps_tilt, flat_eps,
                                        full_budget)
                    step = min_step
                    break
                except FlipError:
                    raise FlipError(
                        "continuation towards %s stalled at t=%.5f"
                        % (np.round(varr, 6).tolist(), t))
        work, zs, moves = w2, z2, moves + k
        t += step
    return work, zs, moves


def canonical_decomposition(tri, shapes=None, v=None, eps_tilt=1e-7,
                            flat_eps=1e-9, max_states=None, dps=30):
    """The cell decomposition D(v) determined by the cusp size vector v,
    computed from any geometric triangulation of the manifold.

    A triangulation subdividing D(v) is found by best-first search in
    the flip graph (see _search).  When v is far from balanced, the
    search landscape from an arbitrary starting triangulation can be
    deceptive, so on failure the computation restarts as a
    continuation from the balanced vector (see _continuation).  Once a
    non-negative state is reached, the shapes are polished at full
    precision and faces with |tilt| <= eps_tilt are merged into
    polyhedral cells.

    shapes may be a ShapeSolution or a list of shapes for tri with
    orientation-consistent labeling; None solves first.  Raises
    FlipError when even the continuation cannot reach v."""
    if shapes is None:
        shapes = solve_shapes(tri, dps=dps)
    if isinstance(shapes, ShapeSolution):
        work = shapes.triangulation
        dps = shapes.dps
        zs = [complex(z) for z in shapes.shapes]
    else:
        work = tri
        zs = [complex(z) for z in shapes]
    c = work.n_cusps
    if v is None:
        v = (1.0,) * c
    v = tuple(float(x) for x in v)
    if len(v) != c or min(v) <= 0:
        raise ValueError("size vector must have %d positive entries" % c)
    varr = np.asarray(v)

    budget = max_states if max_states is not None else 200 + 60 * work.n_tets
    quick = min(budget, 60 + 10 * work.n_tets)
    work0, zs0 = work, zs
    try:
        work, zs, moves = _search(work, zs, varr, eps_tilt, flat_eps, quick)
    except FlipError:
        try:
            work, zs, moves = _continuation(work0, zs0, varr, eps_tilt,
                                            flat_eps, quick, budget)
        except FlipError:
            # last resort: unrestricted moves (paths through flips of
            # positively tilted faces)
            work, zs, moves = _search(work0, zs0, varr, eps_tilt, flat_eps,
                                      budget, active_only=False)

    # polish the shapes at full precision and rebuild the lift data
    with mpmath.workdps(dps + 10):
        zmp, residual = _solve_newton(work, [mpmath.mpc(z) for z in zs],
                                      work.edge_classes(), dps=dps)
    return _assemble(work, zmp, v, eps_tilt, dps, residual, moves)


# ---- assembling the merged decomposition ---------------------------------


class Cell:
    """One ideal polyhedron of a decomposition: the tetrahedra
    subdividing it, its ideal vertices with Minkowski lifts in the
    cell's own frame, the indices of the four defining vertices, and
    the coplanarity rows of the remaining (excess) vertices."""

    def __init__(self, tets, base, internal, lifts, vertices, defining, rows):
        self.tets = tets
        self.base = base
        self.internal = internal
        self.lifts = lifts
        self.vertices = vertices
        self.defining = defining
        self.rows = rows

    @property
    def n_vertices(self):
        return len(self.vertices)

    def __repr__(self):
        return ('Cell(%d tets, %d vertices)'
                % (len(self.tets), len(self.vertices)))


class Facet:
    """One internal face of a decomposition: the tetrahedron face pairs
    forming it, the two incident cells, and its tilt row."""

    def __init__(self, pieces, cells, row, tilt):
        self.pieces = pieces
        self.cells = cells
        self.row = row
        self.tilt = tilt

    def __repr__(self):
        return 'Facet(cells %r, %d pieces, tilt %.3g)' % (
            self.cells, len(self.pieces), self.tilt)


class TiltSystem:
    """The matrices of Prop.-style linear conditions cutting out the
    parameter cell of a decomposition: P = {v > 0 : L v = 0, F v > 0}."""

    def __init__(self, L, F, n_cusps):
        self.n_cusps = n_cusps
        self.L = np.array(L, dtype=float).reshape(-1, n_cusps)
        self.F = np.array(F, dtype=float).reshape(-1, n_cusps)

    def contains(self, v, eps=1e-7):
        v = np.asarray([float(x) for x in v])
        nv = float(np.linalg.norm(v))
        if np.min(v) <= 0:
            return False
        if self.L.shape[0] and np.max(np.abs(self.L @ v)) > eps * nv:
            return False
        if self.F.shape[0] and np.min(self.F @ v) <= eps * nv:
            return False
        return True

    def __repr__(self):
        return 'TiltSystem(%d coplanarity rows, %d tilt rows, %d cusps)' % (
            self.L.shape[0], self.F.shape[0], self.n_cusps)


class CellDecomposition:
    """An ideal cell decomposition with Minkowski lift data.

    Attributes: triangulation (the simplicial subdivision after any
    flips), shapes (mpmath, one per tetrahedron), v (provenance size
    vector), cells, cell_of (tet -> cell index), faces (Facet list),
    dps, residual, moves (flips performed)."""

    def __init__(self, triangulation, shapes, v, cells, cell_of, faces,
                 dps, residual, moves):
        self.triangulation = triangulation
        self.shapes = shapes
        self.v = tuple(v)
        self.cells = cells
        self.cell_of = cell_of
        self.faces = faces
        self.dps = dps
        self.residual = residual
        self.moves = moves

    @property
    def n_cells(self):
        return len(self.cells)

    def tilt_system(self):
        c = self.triangulation.n_cusps
        L = [row for cell in self.cells for row in cell.rows]
        F = [face.row for face in self.faces]
        return TiltSystem(L, F, c)

    def check(self, eps=1e-7):
        """The defining properties of D(v): every cell planar at v,
        every retained face of positive tilt at v."""
        v = np.asarray(self.v)
        nv = float(np.linalg.norm(v))
        for cell in self.cells:
            for row in cell.rows:
                if abs(float(np.dot(row, v))) > eps * nv:
                    raise FlipError("cell not planar at %r" % (self.v,))
        for face in self.faces:
            if float(np.dot(face.row, v)) <= eps * nv:
                raise FlipError("retained face without positive tilt")
        return True

    def vertex_counts(self):
        """Sorted list of per-cell ideal vertex counts (4 = simplex,
        5 = pyramid, 6 = octahedron, ...)."""
        return sorted(cell.n_vertices for cell in self.cells)

    def to_dict(self):
        """A JSON-ready record: cells with 20-digit vertex lifts, face
        pairings, and the L/F rows."""
        def num(x):
            return mpmath.nstr(mpmath.mpf(x), 20)

        cells = []
        for cell in self.cells:
            verts = []
            for vx in cell.vertices:
                verts.append({
                    'corners': [list(cr) for cr in vx['corners']],
                    'cusp': vx['cusp'],
                    'lift': [num(x) for x in vx['lift']],
                })
            cells.append({
                'tets': list(cell.tets),
                'vertices': verts,
                'defining': list(cell.defining),
                'coplanarity_rows': [[float(x) for x in row]
                                     for row in cell.rows],
            })
        faces = []
        for face in self.faces:
            faces.append({
                'cells': list(face.cells),
                'pieces': [[list(p[0]), list(p[1])] for p in face.pieces],
                'row': [float(x) for x in face.row],
                'tilt': float(face.tilt),
            })
        ts = self.tilt_system()
        return {
            'size_vector': [float(x) for x in self.v],
            'n_cusps': self.triangulation.n_cusps,
            'n_tets': self.triangulation.n_tets,
            'n_cells': self.n_cells,
            'cells': cells,
            'faces': faces,
            'L': [[float(x) for x in row] for row in ts.L],
            'F': [[float(x) for x in row] for row in ts.F],
        }

    def to_text(self):
        """A readable report of the decomposition."""
        d = self.to_dict()
        out = []
        out.append('decomposition at v = (%s)'
                   % ', '.join('%g' % x for x in d['size_vector']))
        out.append('%d cells over %d tetrahedra, %d internal faces'
                   % (d['n_cells'], d['n_tets'], len(d['faces'])))
        for i, cell in enumerate(d['cells']):
            out.append('cell %d: tets %s' % (i, cell['tets']))
            for k, vx in enumerate(cell['vertices']):
                tag = ' (defining)' if k in cell['defining'] else ''
                out.append('  vertex %d cusp %d%s: [%s]'
                           % (k, vx['cusp'], tag, ', '.join(vx['lift'])))
            for row in cell['coplanarity_rows']:
                out.append('  L row: [%s]' % ', '.join('%.12g' % x
                                                       for x in row))
        for face in d['faces']:
            out.append('face cells %r tilt %.12g row [%s]'
                       % (tuple(face['cells']), face['tilt'],
                          ', '.join('%.12g' % x for x in face['row'])))
        return '\n'.join(out) + '\n'

    def __repr__(self):
        return ('CellDecomposition(v=%r, %d cells, vertex counts %r)'
                % (self.v, self.n_cells, self.vertex_counts()))


def _group_corners(cell_tets, lifts, tol=1e-8):
    """Partition the corners of a cell's tetrahedra into ideal vertex
    classes by equality of their lifts (same point and same horoball
    means the same vector)."""
    corners = sorted((t, v) for t in cell_tets for v in range(4))
    arr = {cr: np.array([float(x) for x in lifts[cr]]) for cr in corners}
    scale = max(float(np.linalg.norm(a)) for a in arr.values())
    classes = []
    for cr in corners:
        for cl in classes:
            if float(np.linalg.norm(arr[cr] - arr[cl[0]])) <= tol * scale:
                cl.append(cr)
                break
        else:
            classes.append([cr])
    return classes


def _assemble(work, zmp, v, eps_tilt, dps, residual, moves):
    """Merge zero-tilt faces and build the CellDecomposition record."""
    with mpmath.workdps(dps + 10):
        charts = _Charts(work, zmp, tol=10.0 ** (-dps // 2))
        varr = np.asarray(v)

        rows = {}
        for piece in _quotient_faces(work):
            rows[piece] = _face_row(work, zmp, charts, piece)

        # union-find merge across zero-tilt faces
        parent = list(range(work.n_tets))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        kind = {}
        for piece, row in rows.items():
            rel = _rel_tilt(row, varr)
            if rel < -eps_tilt:
                raise FlipError("negative tilt %g survived the flip loop"
                                % rel)
            kind[piece] = 'zero' if rel <= eps_tilt else 'positive'
            if kind[piece] == 'zero':
                a, b = find(piece[0][0]), find(piece[1][0])
                if a != b:
                    parent[max(a, b)] = min(a, b)

        groups = {}
        for t in range(work.n_tets):
            groups.setdefault(find(t), []).append(t)
        cell_tets = [sorted(g) for _, g in sorted(groups.items())]
        cell_of = {t: i for i, g in enumerate(cell_tets) for t in g}

        # per-cell frames across interior (zero-tilt) faces only
        internal = {i: set() for i in range(len(cell_tets))}
        for piece, k in kind.items():
            if k == 'zero':
                (t, f), (t2, f2) = piece
                internal[cell_of[t]].add((t, f))
                internal[cell_of[t]].add((t2, f2))

        cells = []
        for i, tets in enumerate(cell_tets):
            base = tets[0]
            lifts = lift_patch(work, zmp, charts, base,
                               {(t, f) for (t, f) in internal[i]})
            classes = _group_corners(tets, lifts)
            vertices = []
            for cl in classes:
                cusps = {work.cusp_of[cr] for cr in cl}
                assert len(cusps) == 1
                vertices.append({'corners': cl, 'cusp': cusps.pop(),
                                 'lift': lifts[cl[0]]})
            # greedy choice of four linearly independent defining lifts
            defining = []
            mat = np.zeros((0, 4))
            for k, vx in enumerate(vertices):
                cand = np.vstack(
                    [mat, [float(x) for x in vx['lift']]])
                if np.linalg.matrix_rank(cand) > mat.shape[0]:
                    mat = cand
                    defining.append(k)
                if len(defining) == 4:
                    break
            if len(defining) < 4:
                raise GeometryError("cell %d spans less than four "
                                    "dimensions" % i)
            nmap = hyperplane_map([vertices[k]['lift'] for k in defining],
                                  [vertices[k]['cusp'] for k in defining],
                                  work.n_cusps)
            crows = []
            for k, vx in enumerate(vertices):
                if k in defining:
                    continue
                crows.append(normalize_row(
                    tilt_row(vx['lift'], vx['cusp'], nmap), zero_eps=1e-8))
            cells.append(Cell(tets, base, internal[i], lifts, vertices,
                              defining, crows))

        faces = _build_facets(work, zmp, charts, varr, rows, kind, cells,
                              cell_of)

    dec = CellDecomposition(work, list(zmp), v, cells, cell_of, faces,
                            dps, residual, moves)
    dec.check(max(eps_tilt, 1e-9))
    return dec


def _build_facets(work, zmp, charts, varr, rows, kind, cells, cell_of):
    """Group the retained (positive-tilt) tetrahedron faces into the
    polygonal faces of the decomposition.

    Two boundary faces of the same cell belong to the same polygon
    exactly when their vertex lifts, scaled by 1/v, span a common
    2-plane (distinct facets of a convex polytope have distinct
    supporting planes); gluings then match the two sides up."""
    retained = [p for p, k in kind.items() if k == 'positive']

    def side_points(tq, fq):
        cell = cells[cell_of[tq]]
        pts = []
        for w in range(4):
            if w != fq:
                n = np.array([float(x) for x in cell.lifts[(tq, w)]])
                pts.append(n / varr[work.cusp_of[(tq, w)]])
        return pts

    # union-find over retained pieces
    idx = {p: i for i, p in enumerate(retained)}
    parent = list(range(len(retained)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    # same supporting plane within one cell side
    by_side = {}
    for p in retained:
        for side in p:
            by_side.setdefault(cell_of[side[0]], []).append((side, p))
    for ci, sides in by_side.items():
        for a in range(len(sides)):
            for b in range(a + 1, len(sides)):
                (ta, fa), pa = sides[a]
                (tb, fb), pb = sides[b]
                pts = side_points(ta, fa) + side_points(tb, fb)
                base = pts[0]
                diffs = np.array([q - base for q in pts[1:]])
                sv = np.linalg.svd(diffs, compute_uv=False)
                if sv[2] <= 1e-6 * sv[0]:
                    union(idx[pa], idx[pb])

    classes = {}
    for p in retained:
        classes.setdefault(find(idx[p]), []).append(p)

    faces = []
    for _, pieces in sorted(classes.items()):
        pieces = sorted(pieces)
        rep = pieces[0]
        (t, f), (t2, f2) = rep
        ca, cb = cell_of[t], cell_of[t2]
        # the row of the merged face: cell ca's hyperplane against the
        # opposite vertex just across the representative piece (correct
        # even when the face glues the cell to itself)
        cell = cells[ca]
        pos = _develop_tets(work, zmp, cell.base, cell.internal)
        nmap = hyperplane_map(
            [cell.vertices[k]['lift'] for k in cell.defining],
            [cell.vertices[k]['cusp'] for k in cell.defining],
            work.n_cusps)
        _, _, pts2 = _across(work, zmp, pos[t], t, f)
        apex = _corner_normal(pts2, charts, t2, f2)
        row = normalize_row(tilt_row(apex, work.cusp_of[(t2, f2)], nmap))
        faces.append(Facet(pieces, (ca, cb), row, float(row @ varr)))
    return faces


# ---- cusp sizes and densities --------------------------------------------


def maximal_cusp_sizes(tri, shapes=None, dps=30):
    """The largest s such that scaling every cusp cross-section to size
    s keeps the horoballs pairwise disjoint along the edges of the
    canonical decomposition; returns the uniform size vector (s,...,s).
    Uses n*n' = -2 exp(distance) on the size-1 lifts of the two ends of
    each edge."""
    dec = canonical_decomposition(tri, shapes, dps=dps)
    work = dec.triangulation
    retained = {side for face in dec.faces for p in face.pieces for side in p}
    with mpmath.workdps(dec.dps + 10):
        charts = _Charts(work, dec.shapes, tol=10.0 ** (-dec.dps // 2))
        best = None
        for cls in work.edge_classes():
            # skip edges interior to a cell (diagonals of the subdivision)
            if not any((t, f) in retained
                       for t, (a, b) in cls for f in range(4)
                       if f not in (a, b)):
                continue
            t, (a, b) = cls[0]
            pts = _base_points(dec.shapes[t])
            na = _corner_normal(pts, charts, t, a)
            nb = _corner_normal(pts, charts, t, b)
            delta = mpmath.log(-minkowski_inner(na, nb) / 2)
            best = delta if best is None else min(best, delta)
        s = +mpmath.exp(best / 2)
    return (s,) * work.n_cusps


def cusp_density(tri, shapes=None, dps=30):
    """Cusp volume over manifold volume at the maximal uniform cusp
    size, for one-cusped manifolds.  Bounded above by 0.853276..., the
    density of the figure-eight knot complement."""
    if tri.n_cusps != 1:
        raise ValueError("cusp density needs a one-cusped manifold")
    if shapes is None:
        shapes = solve_shapes(tri, dps=dps)
    if not isinstance(shapes, ShapeSolution):
        shapes = ShapeSolution(tri, list(shapes), dps, None)
    s = maximal_cusp_sizes(shapes.triangulation, shapes, dps=shapes.dps)[0]
    with mpmath.workdps(shapes.dps + 10):
        return +(s ** 2 / (2 * shapes.volume()))
