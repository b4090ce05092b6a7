"""Triangulated surfaces as combinatorial complexes.

A surface is a set of triangles with sides glued in pairs.  Side i of a
triangle is the side opposite its local vertex i, mirroring the labeling
convention for tetrahedra.  A gluing carries a permutation of {0,1,2}
sending source vertices to target vertices and the source side label to
the target side label.

Triangles may carry vertex labels and edge labels.  Automorphism and
isomorphism search treats labels as a partition: a map is admissible when
it induces a well-defined injective relabeling, not necessarily the
identity.
"""

from .triangulation import TriangulationError


def _invert3(p):
    q = [0, 0, 0]
    for i, v in enumerate(p):
        q[v] = i
    return tuple(q)


def _sign3(p):
    # parity of a permutation of {0,1,2}
    inv = sum(1 for i in range(3) for j in range(i + 1, 3) if p[i] > p[j])
    return 1 if inv % 2 == 0 else -1


_PERMS3 = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]


class Surface:
    """A closed triangulated surface with optional vertex/edge labels."""

    def __init__(self, n_tris, gluings, vertex_labels=None, edge_labels=None):
        self.n_tris = n_tris
        self.glue = {}
        for (t, s), (t2, s2, perm) in gluings.items():
            self._add(t, s, t2, s2, tuple(perm))
        for t in range(n_tris):
            for s in range(3):
                if (t, s) not in self.glue:
                    raise TriangulationError("side (%d,%d) is unglued" % (t, s))
        self.vertex_labels = vertex_labels
        self.edge_labels = edge_labels

    def _add(self, t, s, t2, s2, perm):
        if perm[s] != s2 or sorted(perm) != [0, 1, 2]:
            raise TriangulationError("bad side permutation %r" % (perm,))
        if (t, s) == (t2, s2):
            raise TriangulationError("side (%d,%d) glued to itself" % (t, s))
        for key, val in (((t, s), (t2, s2, perm)),
                         ((t2, s2), (t, s, _invert3(perm)))):
            if key in self.glue and self.glue[key] != val:
                raise TriangulationError("conflicting gluings at %r" % (key,))
            self.glue[key] = val

    # ---- cell structure --------------------------------------------------

    def vertex_classes(self):
        """Orbits of triangle corners (tri, local vertex)."""
        items = [(t, v) for t in range(self.n_tris) for v in range(3)]
        seen, classes = set(), []
        for it in items:
            if it in seen:
                continue
            orbit, stack = [], [it]
            seen.add(it)
            while stack:
                t, v = stack.pop()
                orbit.append((t, v))
                for s in range(3):
                    if s == v:
                        continue
                    t2, s2, perm = self.glue[(t, s)]
                    nb = (t2, perm[v])
                    if nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
            classes.append(sorted(orbit))
        return classes

    def edge_pairs(self):
        """The side pairings as a list of ((t,s),(t2,s2)) with t,s minimal."""
        out = []
        for (t, s), (t2, s2, perm) in self.glue.items():
            if (t, s) <= (t2, s2):
                out.append(((t, s), (t2, s2)))
        return out

    def euler_characteristic(self):
        v = len(self.vertex_classes())
        e = len(self.edge_pairs())
        return v - e + self.n_tris

    def vertex_orders(self):
        return sorted(len(c) for c in self.vertex_classes())

    def orientation_signs(self):
        """Consistent triangle signs, or None if nonorientable.  Odd side
        permutations are the orientation-compatible kind."""
        sign = {0: 1}
        stack = [0]
        while stack:
            t = stack.pop()
            for s in range(3):
                t2, s2, perm = self.glue[(t, s)]
                want = sign[t] * (1 if _sign3(perm) == -1 else -1)
                if t2 in sign:
                    if sign[t2] != want:
                        return None
                else:
                    sign[t2] = want
                    stack.append(t2)
        if len(sign) != self.n_tris:
            raise TriangulationError("surface is not connected")
        return [sign[t] for t in range(self.n_tris)]

    # ---- maps ------------------------------------------------------------

    def _propagate(self, other, t0, image):
        """Try to extend triangle-0 |-> image (t2, perm) to a full
        simplicial map onto `other`; returns dict t -> (t2, perm) or None."""
        amap = {t0: image}
        stack = [t0]
        while stack:
            t = stack.pop()
            t2, sigma = amap[t]
            for s in range(3):
                a, sa, rho = self.glue[(t, s)]
                b, sb, rho2 = other.glue[(t2, sigma[s])]
                tau = tuple(rho2[sigma[_invert3(rho)[i]]] for i in range(3))
                if a in amap:
                    if amap[a] != (b, tau):
                        return None
                else:
                    amap[a] = (b, tau)
                    stack.append(a)
        if len(amap) != self.n_tris or self.n_tris != other.n_tris:
            return None
        return amap

    @staticmethod
    def _labels_consistent(amap, lab1, lab2, arity):
        """Check a simplicial map induces an injective relabeling on the
        given corner (arity 3: vertices) or side labels."""
        if lab1 is None or lab2 is None:
            return True
        fwd, bwd = {}, {}
        for t, (t2, perm) in amap.items():
            for i in range(arity):
                a = lab1[(t, i)]
                b = lab2[(t2, perm[i])]
                if fwd.setdefault(a, b) != b or bwd.setdefault(b, a) != a:
                    return False
        return True

    def _admissible(self, other, amap):
        return (amap is not None
                and self._labels_consistent(amap, self.vertex_labels,
                                            other.vertex_labels, 3)
                and self._labels_consistent(amap, self.edge_labels,
                                            other.edge_labels, 3))

    def isomorphisms_to(self, other, first_only=False):
        """All label-respecting simplicial isomorphisms onto `other`, as
        dicts triangle -> (image triangle, vertex permutation)."""
        found = []
        if self.n_tris != other.n_tris:
            return found
        for t2 in range(other.n_tris):
            for perm in _PERMS3:
                amap = self._propagate(other, 0, (t2, perm))
                if self._admissible(other, amap):
                    found.append(amap)
                    if first_only:
                        return found
        return found

    def automorphisms(self):
        return self.isomorphisms_to(self)

    def is_isomorphic_to(self, other):
        return bool(self.isomorphisms_to(other, first_only=True))


def cusp_link(tri, cusp=None):
    """The induced triangulation of the cusp cross-sections of an ideal
    triangulation: one triangle per tetrahedron corner, sides glued along
    the face pairings.

    Local vertex i of the corner triangle at (tet, v) is its corner on the
    tetrahedron edge (v, w_i), where w_0 < w_1 < w_2 are the other three
    vertices; side i then lies in the tetrahedron face w_i.  Vertex labels
    record the edge class of (v, w_i); edge labels record the edge class of
    the face edge opposite v, i.e. the edge the side runs parallel to.

    Returns (surface, corners) where corners[i] = (tet, v) for triangle i.
    Restrict to one cusp by passing its index."""
    corners = [(t, v) for t in range(tri.n_tets) for v in range(4)
               if cusp is None or tri.cusp_of[(t, v)] == cusp]
    index = {c: i for i, c in enumerate(corners)}
    cls = tri.edge_class_index()
    gl, vlab, elab = {}, {}, {}
    for (t, v), i in index.items():
        others = [w for w in range(4) if w != v]
        for s, w in enumerate(others):
            vlab[(i, s)] = cls[(t, tuple(sorted((v, w))))]
            t2, f2, perm = tri.glue[(t, w)]
            v2 = perm[v]
            others2 = [x for x in range(4) if x != v2]
            j = index[(t2, v2)]
            p3 = [None, None, None]
            for si, wi in enumerate(others):
                p3[si] = others2.index(f2 if wi == w else perm[wi])
            gl[(i, s)] = (j, others2.index(f2), tuple(p3))
            ab = tuple(sorted(set(others) - {w}))
            elab[(i, s)] = cls[(t, ab)]
    surf = Surface(len(corners), gl, vertex_labels=vlab, edge_labels=elab)
    return surf, corners
