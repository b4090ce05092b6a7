"""Once-punctured-torus bundles from monodromy words.

The monodromy of a hyperbolic once-punctured-torus bundle is +-or-minus a
product of the standard parabolics

    L = [[1,0],[1,1]],   R = [[1,1],[0,1]],

with both letters occurring.  Such a word determines the layered ideal
triangulation of the bundle: each letter contributes one tetrahedron,
interpolating between the two flat triangulations of the fiber torus
before and after the corresponding diagonal exchange.

Working in the plane model, the fiber at level k is triangulated by the
unit triangles of the two translation classes

    U + t = {t, t+(1,0), t+(1,1)},   V + t = {t, t+(0,1), t+(1,1)},

and letter w_k lays a tetrahedron over the quadrilateral whose bottom
diagonal is the flipped slope.  Tetrahedron k has vertices

    L: P0=(0,-1) P1=(0,0) P2=(1,0) P3=(1,1)
    R: P0=(-1,0) P1=(0,0) P2=(0,1) P3=(1,1)

in level-k plane coordinates; faces opposite vertices 0 and 3 face down,
faces opposite 1 and 2 face up.  Passing to level k+1 changes coordinates
by the inverse letter matrix, after which every face is again a unit
triangle and top faces glue to the next tetrahedron's bottom faces by the
unique translation matching their classes.  Closing up the last level to
the first uses the monodromy sign: sign -1 composes with the elliptic
involution x -> -x, which swaps the two triangle classes.

The cusp cross-section triangulation has one triangle per tetrahedron
corner, 4n in all, and is modeled by horizontal strips of n triangles:
adjacent strips are mirror images, letters of type L put the two-vertex
side of their triangle on even horizontal lines and letters of type R on
odd ones.  The deck group of the cusp torus is generated by a horizontal
translation by one period and a vertical translation by four strips; for
sign -1 the horizontal generator picks up a vertical offset of two
strips.
"""

from .triangulation import Triangulation
from .surface import Surface, cusp_link


class PTBError(ValueError):
    pass


L_MAT = ((1, 0), (1, 1))
R_MAT = ((1, 1), (0, 1))

_SWAP = {'L': 'R', 'R': 'L'}


def normalize_word(word):
    w = word.strip().upper()
    if not w or any(ch not in 'LR' for ch in w):
        raise PTBError("monodromy word must be a nonempty string of L's and R's")
    return w


def word_matrix(word):
    """The product of the letter matrices, as integer row tuples."""
    m = ((1, 0), (0, 1))
    for ch in normalize_word(word):
        a = L_MAT if ch == 'L' else R_MAT
        m = ((m[0][0] * a[0][0] + m[0][1] * a[1][0],
              m[0][0] * a[0][1] + m[0][1] * a[1][1]),
             (m[1][0] * a[0][0] + m[1][1] * a[1][0],
              m[1][0] * a[0][1] + m[1][1] * a[1][1]))
    return m


def is_hyperbolic_word(word):
    """A bundle monodromy is hyperbolic exactly when both letters occur,
    equivalently the trace of the word matrix exceeds 2."""
    w = normalize_word(word)
    return 'L' in w and 'R' in w


def _require_hyperbolic(word):
    w = normalize_word(word)
    if not is_hyperbolic_word(w):
        raise PTBError("word %r is a power of a single letter; "
                       "the bundle is not hyperbolic" % word)
    return w


# ---- word symmetry types -------------------------------------------------


def _rotations(w):
    return [w[i:] + w[:i] for i in range(len(w))]


def cyclic_equal(a, b):
    return len(a) == len(b) and b in a + a


def swap_letters(w):
    return ''.join(_SWAP[ch] for ch in w)


def primitive_root(word):
    """The primitive cyclic root u and multiplicity m with word = u^m."""
    w = normalize_word(word)
    n = len(w)
    for p in range(1, n + 1):
        if n % p == 0 and w == w[:p] * (n // p):
            return w[:p], n // p
    raise AssertionError("unreachable")


def classify_symmetries(word):
    """Symmetry types of the bundle read off from the monodromy word.

    Returns a dict with the detected types, the power multiplicity m, the
    predicted symmetry group order 2*m*r (r = 1, 2 or 4 for no reflection
    type, one, or all three), and whether the word belongs to one of the
    exceptional families where extra symmetries exist.

    Types:
      central            the elliptic involution, always present
      power              word = u^m with m > 1; rotational symmetry of order m
      palindromic        word is cyclically equal to its reversal
      half_turn_swap     even length, shifting by half a period swaps L and R
      reversal_swap      reversal composed with the letter swap fixes the word
    Any two of the last three imply the third."""
    w = _require_hyperbolic(word)
    n = len(w)
    u, m = primitive_root(w)
    types = ['central']
    if m > 1:
        types.append('power')
    if cyclic_equal(w, w[::-1]):
        types.append('palindromic')
    if n % 2 == 0 and all(w[(i + n // 2) % n] == _SWAP[w[i]] for i in range(n)):
        types.append('half_turn_swap')
    if cyclic_equal(swap_letters(w), w[::-1]):
        types.append('reversal_swap')
    exceptional = None
    if n % 2 == 0 and all(w[i] != w[(i + 1) % n] for i in range(n)):
        exceptional = '(LR)^m'
    elif n % 4 == 0 and cyclic_equal(w, 'LLRR' * (n // 4)):
        exceptional = '(LLRR)^m'
    elif cyclic_equal(w, 'LLR') or cyclic_equal(w, 'LRR'):
        exceptional = 'arithmetic length 3'
    refl = [t for t in ('palindromic', 'half_turn_swap', 'reversal_swap')
            if t in types]
    if len(refl) == 2 and exceptional is None:
        raise AssertionError("two reflection types without the third: %r" % w)
    r = {0: 1, 1: 2}.get(len(refl), 4)
    return {
        'word': w,
        'types': types,
        'multiplicity': m,
        'primitive_root': u,
        'predicted_order': 2 * m * r,
        'exceptional': exceptional,
    }


# ---- the layered triangulation ------------------------------------------


def _letter_inv(ch, pt):
    x, y = pt
    return (x, y - x) if ch == 'L' else (x - y, y)


def _triangle_class(coords):
    """Classify a unit lattice triangle: returns ('U'|'V', base translate)."""
    t = (min(x for x, y in coords), min(y for x, y in coords))
    rel = sorted((x - t[0], y - t[1]) for x, y in coords)
    if rel == [(0, 0), (1, 0), (1, 1)]:
        return 'U', t
    if rel == [(0, 0), (0, 1), (1, 1)]:
        return 'V', t
    raise AssertionError("not a unit triangle: %r" % (coords,))


def _tet_faces(ch):
    """Vertex coordinate maps for the four faces of a letter tetrahedron.
    Bottom faces (opposite vertices 0 and 3) are in the tetrahedron's own
    level coordinates; top faces (opposite 1 and 2) already in the next
    level's coordinates."""
    if ch == 'L':
        corners = {0: (0, -1), 1: (0, 0), 2: (1, 0), 3: (1, 1)}
    else:
        corners = {0: (-1, 0), 1: (0, 0), 2: (0, 1), 3: (1, 1)}
    faces = {}
    for opp in range(4):
        fmap = {v: corners[v] for v in range(4) if v != opp}
        if opp in (1, 2):
            fmap = {v: _letter_inv(ch, pt) for v, pt in fmap.items()}
        faces[opp] = fmap
    return faces


def _match_by_translation(top, bottom):
    """Glue two coordinate faces of the same triangle class: returns the
    vertex map {top vertex: bottom vertex}."""
    ctop, ttop = _triangle_class(list(top.values()))
    cbot, tbot = _triangle_class(list(bottom.values()))
    if ctop != cbot:
        return None
    d = (tbot[0] - ttop[0], tbot[1] - ttop[1])
    rev = {pt: v for v, pt in bottom.items()}
    return {v: rev[(x + d[0], y + d[1])] for v, (x, y) in top.items()}


def monodromy_triangulation(word, sign=1, require_hyperbolic=True):
    """The layered ideal triangulation of the punctured-torus bundle with
    monodromy +-(product of the letters of `word`).  One tetrahedron per
    letter; the result has a single cusp and len(word) edge classes.

    require_hyperbolic=False admits single-letter words, whose layered
    triangulation exists combinatorially but carries no hyperbolic
    structure (the geometric solution degenerates to flat tetrahedra)."""
    if require_hyperbolic:
        w = _require_hyperbolic(word)
    else:
        w = normalize_word(word)
    if sign not in (1, -1):
        raise PTBError("sign must be +1 or -1")
    n = len(w)
    gl = {}
    for k in range(n):
        faces_k = _tet_faces(w[k])
        k2 = (k + 1) % n
        faces_next = _tet_faces(w[k2])
        tops = {opp: faces_k[opp] for opp in (1, 2)}
        if k == n - 1 and sign == -1:
            tops = {opp: {v: (-x, -y) for v, (x, y) in fmap.items()}
                    for opp, fmap in tops.items()}
        for opp, fmap in tops.items():
            for opp2 in (0, 3):
                vmap = _match_by_translation(fmap, faces_next[opp2])
                if vmap is None:
                    continue
                perm = [None] * 4
                for v, v2 in vmap.items():
                    perm[v] = v2
                perm[opp] = opp2
                gl[(k, opp)] = (k2, opp2, tuple(perm))
                break
            else:
                raise AssertionError("unmatched top face")
    tri = Triangulation(n, gl, name='bundle(%s,%+d)' % (w, sign))
    if is_hyperbolic_word(w) and (tri.n_cusps != 1
                                  or len(tri.edge_classes()) != n):
        raise AssertionError("layered triangulation sanity check failed")
    return tri


# ---- the strip model of the cusp triangulation ---------------------------


class StripModel:
    """The cusp cross-section of a bundle, as horizontal strips of
    triangles.  Triangles are indexed by (strip, position); the quotient
    fundamental domain is strips 0..3 with one period per strip for sign
    +1, and strips 0..1 with two periods for sign -1."""

    def __init__(self, word, sign=1):
        self.word = _require_hyperbolic(word)
        if sign not in (1, -1):
            raise PTBError("sign must be +1 or -1")
        self.sign = sign
        n = self.n = len(self.word)
        if sign == 1:
            self.strips, self.width = 4, n
        else:
            self.strips, self.width = 2, 2 * n
        self.tris = [(s, j) for s in range(self.strips)
                     for j in range(self.width)]
        self.index = {sj: i for i, sj in enumerate(self.tris)}
        gl = {}
        for s, j in self.tris:
            i = self.index[(s, j)]
            ch = self.letter(j)
            # right slant (side 0) to the next triangle's left slant (side 1)
            i2 = self.index[self.reduce(s, j + 1)]
            perm = (1, 0, 2) if ch == self.letter(j + 1) else (1, 2, 0)
            gl[(i, 0)] = (i2, 1, perm)
            # horizontal two-vertex side (side 2): L sits on the even line,
            # R on the odd one; the partner is the mirror triangle there.
            if ch == 'L':
                s2 = s - 1 if s % 2 == 0 else s + 1
            else:
                s2 = s + 1 if s % 2 == 0 else s - 1
            i3 = self.index[self.reduce(s2, j)]
            gl[(i, 2)] = (i3, 2, (0, 1, 2))
        self.surface = Surface(len(self.tris), gl)
        self.vertex_labels = None
        self.edge_labels = None
        self.direction_parity = None

    def letter(self, j):
        return self.word[j % self.n]

    def reduce(self, s, j):
        """Canonical fundamental-domain representative of a plane triangle
        under the deck group."""
        if self.sign == 1:
            return s % 4, j % self.n
        s2 = s % 2
        steps = (s - s2) // 2
        return s2, (j - steps * self.n) % self.width

    def is_up(self, s, j):
        """Whether the triangle's two-vertex side is its lower side."""
        return (self.letter(j) == 'L') == (s % 2 == 0)

    def triangle_count(self):
        return len(self.tris)


def _check_strip_rule(model, vlab, elab):
    """The strip reading rule: for a slanted edge e, the adjacent triangle
    on the side given by the strip's direction has its opposite vertex on
    the same edge of the bundle triangulation that e runs along.  Strips
    alternate direction; returns the parity (0 or 1) of the strips whose
    direction picks the left-hand triangle, or None when the rule fails."""
    for parity in (0, 1):
        ok = True
        for s, j in model.tris:
            i = model.index[(s, j)]
            i2 = model.index[model.reduce(s, j + 1)]
            # the slanted edge between positions j and j+1 of strip s:
            # side 0 of i, side 1 of i2.
            if s % 2 == parity:
                delta_tri, opp = i, 0
            else:
                delta_tri, opp = i2, 1
            if elab[(i, 0)] != vlab[(delta_tri, opp)]:
                ok = False
                break
        if ok:
            return parity
    return None


def _transport_labels(model, induced):
    """Carry the induced labels onto the strip model.  A bare isomorphism
    of the complexes need not take strips to strips, so search for one
    under which the strip reading rule holds."""
    isos = induced.isomorphisms_to(model.surface)
    if not isos:
        raise AssertionError("strip model does not match the induced "
                             "cusp triangulation for %r" % model.word)
    for amap in isos:
        vlab, elab = {}, {}
        for t, (t2, perm) in amap.items():
            for i in range(3):
                vlab[(t2, perm[i])] = induced.vertex_labels[(t, i)]
                elab[(t2, perm[i])] = induced.edge_labels[(t, i)]
        parity = _check_strip_rule(model, vlab, elab)
        if parity is not None:
            model.vertex_labels = vlab
            model.edge_labels = elab
            model.surface.vertex_labels = vlab
            model.surface.edge_labels = elab
            model.direction_parity = parity
            return
    raise AssertionError("strip reading rule fails for %r under every "
                         "isomorphism" % model.word)


def cusp_triangulation(word, sign=1):
    """The labeled cusp cross-section triangulation of the bundle, in the
    strip model.  Labels are transported from the triangulation induced on
    the cusp by the layered tetrahedra; vertex labels name the bundle edge
    a corner runs into, edge labels the bundle edge a side runs along.
    The strip reading rule relating the two fixes the transport."""
    model = StripModel(word, sign)
    tri = monodromy_triangulation(word, sign)
    induced, _ = cusp_link(tri)
    _transport_labels(model, induced)
    return model


def symmetry_group_order(word, sign=1):
    """The number of label-partition-preserving automorphisms of the cusp
    triangulation, computed by brute force.  The count is the same on the
    strip model and on the induced complex; the latter is used directly."""
    tri = monodromy_triangulation(word, sign)
    induced, _ = cusp_link(tri)
    return len(induced.automorphisms())
