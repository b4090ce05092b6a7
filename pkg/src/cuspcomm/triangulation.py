"""Ideal triangulations of cusped 3-manifolds.

A triangulation is a set of ideal tetrahedra with faces glued in pairs.
Face f of a tetrahedron means the face opposite vertex f, so faces and
vertices share the labels 0..3.  A gluing carries a permutation of
{0,1,2,3} sending the three vertices of the source face onto the target
face (and the source face label to the target face label).

The file format `tri 1` is a plain text exchange format:

    tri 1
    tets N
    cusps C
    glue t f t2 f2 p0 p1 p2 p3     # one line per face pairing
    cusp t v k                     # vertex v of tet t lies on cusp k

'#' starts a comment.  A tolerant reader for the standard census
triangulation file format (header, neighbor table, permutation table,
cusp table) is also provided; all other census fields are ignored.
"""

import os


class TriangulationError(ValueError):
    pass


_FACE_VERTS = {f: tuple(v for v in range(4) if v != f) for f in range(4)}

# The vertices of face f in the cyclic order that makes (f, *triple) an
# even permutation of (0,1,2,3); Pachner moves use this order so that
# the tetrahedra they create inherit the orientation of the old ones.
_ORIENTED_FACE_VERTS = {0: (1, 2, 3), 1: (0, 3, 2), 2: (0, 1, 3),
                        3: (0, 2, 1)}


def _parity(seq):
    """Parity (0 even, 1 odd) of a permutation given as a tuple."""
    return sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq))
               if seq[i] > seq[j]) % 2


def _perm_sign(p):
    s = 1
    q = list(p)
    for i in range(4):
        while q[i] != i:
            j = q[i]
            q[i], q[j] = q[j], q[i]
            s = -s
    return s


def _invert(p):
    q = [0] * 4
    for i, v in enumerate(p):
        q[v] = i
    return tuple(q)


class Triangulation:
    """An ideal triangulation given by face pairings and cusp labels."""

    def __init__(self, n_tets, gluings, cusp_labels=None, name=''):
        """gluings: dict (t, f) -> (t2, f2, perm).  Both directions may be
        given; missing reverses are filled in and conflicts rejected.
        cusp_labels: optional dict (t, v) -> cusp index; must be constant
        on vertex classes.  When omitted, classes are numbered by first
        appearance."""
        self.n_tets = n_tets
        self.name = name
        self.glue = {}
        for (t, f), (t2, f2, perm) in gluings.items():
            self._add_gluing(t, f, t2, f2, tuple(perm))
        for t in range(n_tets):
            for f in range(4):
                if (t, f) not in self.glue:
                    raise TriangulationError("face (%d,%d) is unglued" % (t, f))
        self._edge_classes = None
        self._vertex_classes = None
        self.cusp_of = self._assign_cusps(cusp_labels)
        self.n_cusps = 1 + max(self.cusp_of.values())

    def _add_gluing(self, t, f, t2, f2, perm):
        if perm[f] != f2:
            raise TriangulationError("perm %r does not send face %d to %d"
                                     % (perm, f, f2))
        if sorted(perm) != [0, 1, 2, 3]:
            raise TriangulationError("bad permutation %r" % (perm,))
        if (t, f) == (t2, f2):
            raise TriangulationError("face (%d,%d) glued to itself" % (t, f))
        for key, val in (((t, f), (t2, f2, perm)), ((t2, f2), (t, f, _invert(perm)))):
            if key in self.glue and self.glue[key] != val:
                raise TriangulationError("conflicting gluings at %r" % (key,))
            self.glue[key] = val

    # ---- vertex and edge classes ----------------------------------------

    def vertex_classes(self):
        """Orbits of (tet, vertex) under the face gluings (the ideal
        vertices of the manifold, i.e. the cusps)."""
        if self._vertex_classes is None:
            self._vertex_classes = self._orbits(
                [(t, v) for t in range(self.n_tets) for v in range(4)],
                self._vertex_neighbors)
        return self._vertex_classes

    def _vertex_neighbors(self, tv):
        t, v = tv
        out = []
        for f in range(4):
            if f == v:
                continue
            t2, f2, perm = self.glue[(t, f)]
            out.append((t2, perm[v]))
        return out

    def edge_classes(self):
        """Orbits of unordered tetrahedron edges; each orbit is a list of
        (tet, (a, b)) incidences whose length is the edge order."""
        if self._edge_classes is None:
            items = [(t, (a, b)) for t in range(self.n_tets)
                     for a in range(4) for b in range(a + 1, 4)]
            self._edge_classes = self._orbits(items, self._edge_neighbors)
        return self._edge_classes

    def _edge_neighbors(self, te):
        t, (a, b) = te
        out = []
        for f in range(4):
            if f in (a, b):
                continue
            t2, f2, perm = self.glue[(t, f)]
            out.append((t2, tuple(sorted((perm[a], perm[b])))))
        return out

    @staticmethod
    def _orbits(items, neighbors):
        seen, classes = set(), []
        for it in items:
            if it in seen:
                continue
            orbit, stack = [], [it]
            seen.add(it)
            members = {it}
            while stack:
                cur = stack.pop()
                orbit.append(cur)
                for nb in neighbors(cur):
                    if nb not in members:
                        members.add(nb)
                        seen.add(nb)
                        stack.append(nb)
            classes.append(sorted(orbit))
        return classes

    def edge_class_index(self):
        """dict (tet, (a,b)) -> index of its edge class."""
        idx = {}
        for i, cls in enumerate(self.edge_classes()):
            for inc in cls:
                idx[inc] = i
        return idx

    def edge_orders(self):
        return sorted(len(c) for c in self.edge_classes())

    def _assign_cusps(self, labels):
        classes = self.vertex_classes()
        cusp_of = {}
        if labels is None:
            for i, cls in enumerate(classes):
                for tv in cls:
                    cusp_of[tv] = i
            return cusp_of
        for cls in classes:
            vals = {labels[tv] for tv in cls}
            if len(vals) != 1:
                raise TriangulationError(
                    "cusp labels %r not constant on vertex class %r" % (vals, cls))
            k = vals.pop()
            for tv in cls:
                cusp_of[tv] = k
        used = sorted(set(cusp_of.values()))
        if used != list(range(len(used))):
            raise TriangulationError("cusp labels %r are not 0..C-1" % used)
        return cusp_of

    # ---- orientability ---------------------------------------------------

    def orientation_signs(self):
        """Tetrahedron signs of a consistent orientation, or None when the
        triangulation is nonorientable.  An odd gluing permutation is the
        orientation-compatible kind."""
        sign = {0: 1}
        stack = [0]
        while stack:
            t = stack.pop()
            for f in range(4):
                t2, f2, perm = self.glue[(t, f)]
                want = sign[t] * (1 if _perm_sign(perm) == -1 else -1)
                if t2 in sign:
                    if sign[t2] != want:
                        return None
                else:
                    sign[t2] = want
                    stack.append(t2)
        if len(sign) != self.n_tets:
            raise TriangulationError("triangulation is not connected")
        return [sign[t] for t in range(self.n_tets)]

    def is_orientable(self):
        return self.orientation_signs() is not None

    def orientation_double_cover(self):
        """The orientable double cover: two sheets, gluings with even
        permutations cross sheets."""
        n = self.n_tets
        gl = {}
        for (t, f), (t2, f2, perm) in self.glue.items():
            for sheet in (0, 1):
                sheet2 = sheet if _perm_sign(perm) == -1 else 1 - sheet
                gl[(t + n * sheet, f)] = (t2 + n * sheet2, f2, perm)
        return Triangulation(2 * n, gl, name=self.name + '~')

    def oriented_copy(self):
        """A relabeled copy in which every tetrahedron is positively
        oriented, i.e. every gluing permutation is odd.  Tetrahedra that
        carried the minority orientation have vertices 2 and 3 swapped.
        Returns (triangulation, swapped) with the list of relabeled tets.
        Raises when the triangulation is nonorientable."""
        signs = self.orientation_signs()
        if signs is None:
            raise TriangulationError("triangulation is nonorientable")
        swap = {v: {2: 3, 3: 2}.get(v, v) for v in range(4)}
        gl = {}
        for (t, f), (t2, f2, perm) in self.glue.items():
            p = list(perm)
            if signs[t] < 0:
                p = [p[swap[v]] for v in range(4)]
                f = swap[f]
            if signs[t2] < 0:
                p = [swap[x] for x in p]
                f2 = swap[f2]
            gl[(t, f)] = (t2, f2, tuple(p))
        labels = {}
        for (t, v), k in self.cusp_of.items():
            labels[(t, swap[v] if signs[t] < 0 else v)] = k
        out = Triangulation(self.n_tets, gl, cusp_labels=labels,
                            name=self.name)
        assert all(_perm_sign(p) == -1 for (_, _, p) in out.glue.values())
        return out, [t for t in range(self.n_tets) if signs[t] < 0]

    # ---- Pachner moves (combinatorial) ----------------------------------

    def pachner_23(self, t, f):
        """The 2-3 move across face f of tet t: replace the two distinct
        tetrahedra sharing that face by three around a new edge.  Returns a
        new Triangulation.  The two old tets are removed and three new tets
        appended; the remaining tets are renumbered in order.

        New tet i (i = 0,1,2) has vertices 0 = old apex of t, 1 = old apex
        of t2, 2 = abc[i], 3 = abc[i+1], where abc runs over the vertices
        of the shared face in t in orientation order (so a consistently
        oriented labeling stays consistently oriented)."""
        t2, f2, perm = self.glue[(t, f)]
        if t2 == t:
            raise TriangulationError("2-3 move needs two distinct tetrahedra")
        abc = _ORIENTED_FACE_VERTS[f]
        old_pair = {t, t2}
        keep = [x for x in range(self.n_tets) if x not in old_pair]
        renum = {x: i for i, x in enumerate(keep)}
        base = len(keep)

        # (old tet, old face) -> (new tet, new face, old vertex -> new vertex)
        # for the six outer faces of the bipyramid.
        hole = {}
        for i in range(3):
            j = (i + 1) % 3
            k = ({0, 1, 2} - {i, j}).pop()
            hole[(t, abc[k])] = (base + i, 1, {f: 0, abc[i]: 2, abc[j]: 3})
            hole[(t2, perm[abc[k]])] = (
                base + i, 0, {f2: 1, perm[abc[i]]: 2, perm[abc[j]]: 3})

        gl = {}
        for x in keep:
            for ff in range(4):
                tt, f3, pp = self.glue[(x, ff)]
                if tt in old_pair:
                    nt, nf, vmap = hole[(tt, f3)]
                    q = [None] * 4
                    for ov in range(4):
                        if ov != ff:
                            q[ov] = vmap[pp[ov]]
                    q[ff] = nf
                    gl[(renum[x], ff)] = (nt, nf, tuple(q))
                else:
                    gl[(renum[x], ff)] = (renum[tt], f3, pp)
        # outer faces whose old neighbor was the other tet of the pair glue
        # two of the new tets to each other.
        for (src, sf), (nt, nf, vmap) in hole.items():
            tt, f3, pp = self.glue[(src, sf)]
            if tt in old_pair:
                nt2, nf2, vmap2 = hole[(tt, f3)]
                q = [None] * 4
                inv = {v: k for k, v in vmap.items()}
                for nv, ov in inv.items():
                    q[nv] = vmap2[pp[ov]]
                q[nf] = nf2
                gl[(nt, nf)] = (nt2, nf2, tuple(q))
        # internal gluings: new tets i and j=i+1 share the face (0,1,abc[j]),
        # which omits vertex 3 in tet i and vertex 2 in tet j... in tet i the
        # shared face contains abc[j]=vertex 3, omitting vertex 2; in tet j it
        # contains abc[j]=vertex 2, omitting vertex 3.
        for i in range(3):
            j = (i + 1) % 3
            gl[(base + i, 2)] = (base + j, 3, (0, 1, 3, 2))
        labels = self._carry_cusps(keep, renum, hole)
        return Triangulation(base + 3, gl, cusp_labels=labels,
                             name=self.name + '+23')

    def _carry_cusps(self, keep, renum, hole):
        """Cusp labels for the triangulation after a Pachner move: kept
        tets keep theirs, and each vertex of a new tet inherits the label
        of an old vertex it came from (via the hole vertex maps)."""
        labels = {}
        for x in keep:
            for v in range(4):
                labels[(renum[x], v)] = self.cusp_of[(x, v)]
        for (src, _sf), (nt, _nf, vmap) in hole.items():
            for ov, nv in vmap.items():
                labels[(nt, nv)] = self.cusp_of[(src, ov)]
        return labels

    def edge_ring(self, t, edge):
        """Walk around the edge (a, b) of tet t.  Returns the ordered list
        [(tet, (a_i, b_i), (u_i, w_i))] where (a_i, b_i) is the pole pair in
        consistent order and (u_i, w_i) are the remaining two vertices; the
        walk leaves tet i through the face opposite u_i, and the vertex
        glued to w_i becomes u_{i+1}."""
        a, b = edge
        u0, w0 = [x for x in range(4) if x not in (a, b)]
        ring = []
        tt, aa, bb, u, w = t, a, b, u0, w0
        while True:
            ring.append((tt, (aa, bb), (u, w)))
            t2, f2, perm = self.glue[(tt, u)]
            aa2, bb2, u2 = perm[aa], perm[bb], perm[w]
            w2 = [x for x in range(4) if x not in (aa2, bb2, u2)][0]
            tt, aa, bb, u, w = t2, aa2, bb2, u2, w2
            if (tt, aa, bb) == (t, a, b):
                if (u, w) != (u0, w0):
                    raise TriangulationError("edge walk closed with a twist")
                return ring
            if len(ring) > 6 * self.n_tets:
                raise TriangulationError("edge walk did not close")

    def pachner_32(self, t, edge):
        """The 3-2 move around the edge (a, b) of tet t, which must have
        exactly three distinct tetrahedra around it: replace them by two
        tetrahedra sharing the ring triangle.  Returns a new Triangulation.

        With ring vertices A, B, C (in walk order) and poles P (vertex a
        side) and Q, new tet 0 has vertices (B, A, C, P) as labels
        (0,1,2,3) and new tet 1 has (A, B, C, Q), with A and B exchanged
        in both when the starting labels (a, b, u_0, w_0) form an odd
        permutation; this keeps a consistently oriented labeling
        consistently oriented."""
        ring = self.edge_ring(t, edge)
        if len(ring) != 3:
            raise TriangulationError("3-2 move needs an edge of order 3")
        if len({tt for tt, _, _ in ring}) != 3:
            raise TriangulationError("3-2 move needs three distinct tetrahedra")
        old = [tt for tt, _, _ in ring]
        keep = [x for x in range(self.n_tets) if x not in old]
        renum = {x: i for i, x in enumerate(keep)}
        base = len(keep)
        # tet i of the ring carries ring vertices (i, i+1) mod 3 as (u, w);
        # one new tet takes the ring order directly and the other with the
        # first two ring vertices exchanged, the assignment depending on the
        # starting label parity, so both match the kept orientation
        hole = {}
        swap = {0: 1, 1: 0, 2: 2}
        ident = {0: 0, 1: 1, 2: 2}
        a0, b0 = ring[0][1]
        u0, w0 = ring[0][2]
        if _parity((a0, b0, u0, w0)) == 0:
            m0, m1 = swap, ident
        else:
            m0, m1 = ident, swap
        for i, (tt, (aa, bb), (u, w)) in enumerate(ring):
            hole[(tt, bb)] = (base, m0[(i + 2) % 3],
                             {aa: 3, u: m0[i], w: m0[(i + 1) % 3]})
            hole[(tt, aa)] = (base + 1, m1[(i + 2) % 3],
                             {bb: 3, u: m1[i], w: m1[(i + 1) % 3]})
        gl = {}
        for x in keep:
            for ff in range(4):
                t3, f3, pp = self.glue[(x, ff)]
                if t3 in old:
                    nt, nf, vmap = hole[(t3, f3)]
                    q = [None] * 4
                    for ov in range(4):
                        if ov != ff:
                            q[ov] = vmap[pp[ov]]
                    q[ff] = nf
                    gl[(renum[x], ff)] = (nt, nf, tuple(q))
                else:
                    gl[(renum[x], ff)] = (renum[t3], f3, pp)
        for (src, sf), (nt, nf, vmap) in hole.items():
            t3, f3, pp = self.glue[(src, sf)]
            if t3 in old:
                if (t3, f3) not in hole:
                    raise TriangulationError(
                        "3-2 move blocked: bipyramid boundary glued to its "
                        "interior")
                nt2, nf2, vmap2 = hole[(t3, f3)]
                q = [None] * 4
                inv = {v: k for k, v in vmap.items()}
                for nv, ov in inv.items():
                    q[nv] = vmap2[pp[ov]]
                q[nf] = nf2
                gl[(nt, nf)] = (nt2, nf2, tuple(q))
        gl[(base, 3)] = (base + 1, 3, (1, 0, 2, 3))
        labels = self._carry_cusps(keep, renum, hole)
        return Triangulation(base + 2, gl, cusp_labels=labels,
                             name=self.name + '+32')

    # ---- serialization ---------------------------------------------------

    def to_tri_text(self):
        lines = ['tri 1', 'tets %d' % self.n_tets, 'cusps %d' % self.n_cusps]
        if self.name:
            lines.insert(1, '# %s' % self.name)
        done = set()
        for t in range(self.n_tets):
            for f in range(4):
                if (t, f) in done:
                    continue
                t2, f2, perm = self.glue[(t, f)]
                done.add((t, f))
                done.add((t2, f2))
                lines.append('glue %d %d %d %d %d %d %d %d'
                             % ((t, f, t2, f2) + tuple(perm)))
        for t in range(self.n_tets):
            for v in range(4):
                lines.append('cusp %d %d %d' % (t, v, self.cusp_of[(t, v)]))
        return '\n'.join(lines) + '\n'

    @classmethod
    def from_tri_text(cls, text, name=''):
        n_tets = n_cusps = None
        gluings, labels = {}, {}
        for raw in text.splitlines():
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            if tok[0] == 'tri':
                if tok[1] != '1':
                    raise TriangulationError("unsupported tri version %r" % tok[1])
            elif tok[0] == 'tets':
                n_tets = int(tok[1])
            elif tok[0] == 'cusps':
                n_cusps = int(tok[1])
            elif tok[0] == 'glue':
                t, f, t2, f2 = map(int, tok[1:5])
                perm = tuple(map(int, tok[5:9]))
                gluings[(t, f)] = (t2, f2, perm)
            elif tok[0] == 'cusp':
                t, v, k = map(int, tok[1:4])
                labels[(t, v)] = k
            else:
                raise TriangulationError("unknown directive %r" % tok[0])
        if n_tets is None:
            raise TriangulationError("missing 'tets' line")
        tri = cls(n_tets, gluings, cusp_labels=labels or None, name=name)
        if n_cusps is not None and tri.n_cusps != n_cusps:
            raise TriangulationError("file claims %d cusps, found %d"
                                     % (n_cusps, tri.n_cusps))
        return tri

    @classmethod
    def from_census_text(cls, text):
        """Read the documented subset of the standard census triangulation
        format: the header block, then per tetrahedron a neighbor line, a
        permutation line (4 four-character words) and a cusp index line.
        Everything else (peripheral curves, shapes, CS) is skipped."""
        lines = [ln.rstrip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln.strip()]
        if not lines or not lines[0].startswith('% Triangulation'):
            raise TriangulationError("not a census triangulation file")
        name = lines[1].strip()
        i = 2
        # skip solution type, volume, orientability, CS lines until the cusp
        # count line "<or> <nonor>"
        while i < len(lines):
            tok = lines[i].split()
            if len(tok) == 2 and all(_is_int(x) for x in tok):
                break
            i += 1
        if i == len(lines):
            raise TriangulationError("missing cusp count line")
        n_or, n_non = int(lines[i].split()[0]), int(lines[i].split()[1])
        i += 1
        i += n_or + n_non          # one "torus ..." line per cusp
        n_tets = int(lines[i].split()[0])
        i += 1
        gluings, labels = {}, {}
        for t in range(n_tets):
            nbrs = [int(x) for x in lines[i].split()]
            perms_tok = lines[i + 1].split()
            cusps = [int(x) for x in lines[i + 2].split()[:4]]
            for v in range(4):
                labels[(t, v)] = cusps[v]
            for f in range(4):
                perm = tuple(int(ch) for ch in perms_tok[f])
                gluings[(t, f)] = (nbrs[f], perm[f], perm)
            # skip the 4 peripheral curve rows per sheet (variable count)
            i += 3
            while i < len(lines) and _looks_peripheral(lines[i]):
                i += 1
        return cls(n_tets, gluings, cusp_labels=labels, name=name)


def _is_int(x):
    try:
        int(x)
        return True
    except ValueError:
        return False


def _looks_peripheral(line):
    tok = line.split()
    if not tok:
        return False
    if len(tok) < 8:
        # a shape line like "0.5 0.8660" or next tet's 4 neighbors
        return all('.' in x or 'e' in x.lower() for x in tok)
    return all(_is_int(x) for x in tok)


def load(path):
    """Read a triangulation from a `tri 1` or census format file."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith('% Triangulation'):
        return Triangulation.from_census_text(text)
    return Triangulation.from_tri_text(
        text, name=os.path.splitext(os.path.basename(path))[0])
