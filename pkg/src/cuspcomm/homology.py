"""Integer homology of an ideal triangulation.

The manifold deformation retracts onto the spine dual to the
triangulation: one 0-cell per tetrahedron, a 1-cell through every glued
face pair, and a 2-cell wrapping around every edge class.  H1 of that
complex is H1 of the manifold.  All matrix work is exact over the
integers via Smith normal form.
"""


def smith_normal_form(rows):
    """Smith normal form of an integer matrix given as a list of rows.
    Returns (S, U, V, Vinv) with S = U * A * V, U and V unimodular, and
    Vinv the inverse of V; S is diagonal with each entry dividing the
    next."""
    A = [list(r) for r in rows]
    m = len(A)
    n = len(A[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]
    Vinv = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_op(i, j, c):          # row_i += c * row_j   (also on U)
        for k in range(n):
            A[i][k] += c * A[j][k]
        for k in range(m):
            U[i][k] += c * U[j][k]

    def col_op(i, j, c):          # col_i += c * col_j   (V tracks, Vinv untracks)
        for k in range(m):
            A[k][i] += c * A[k][j]
        for k in range(n):
            V[k][i] += c * V[k][j]
        for k in range(n):
            Vinv[j][k] -= c * Vinv[i][k]

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def col_swap(i, j):
        for k in range(m):
            A[k][i], A[k][j] = A[k][j], A[k][i]
        for k in range(n):
            V[k][i], V[k][j] = V[k][j], V[k][i]
        Vinv[i], Vinv[j] = Vinv[j], Vinv[i]

    def row_neg(i):
        for k in range(n):
            A[i][k] = -A[i][k]
        for k in range(m):
            U[i][k] = -U[i][k]

    t = 0
    while t < min(m, n):
        # find the smallest nonzero entry in the remaining block
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] != 0 and (piv is None
                                     or abs(A[i][j]) < abs(A[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        row_swap(t, piv[0])
        col_swap(t, piv[1])
        if A[t][t] < 0:
            row_neg(t)
        dirty = False
        for i in range(t + 1, m):
            if A[i][t] % A[t][t] != 0:
                dirty = True
            row_op(i, t, -(A[i][t] // A[t][t]))
        for j in range(t + 1, n):
            if A[t][j] % A[t][t] != 0:
                dirty = True
            col_op(j, t, -(A[t][j] // A[t][t]))
        if dirty or any(A[i][t] for i in range(t + 1, m)) \
                or any(A[t][j] for j in range(t + 1, n)):
            continue
        # divisibility: fold any non-multiple into the pivot's row
        bad = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if A[i][j] % A[t][t] != 0:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            row_op(t, bad, 1)
            continue
        t += 1
    return A, U, V, Vinv


def _face_pairs(tri):
    pairs = []
    seen = set()
    for t in range(tri.n_tets):
        for f in range(4):
            if (t, f) in seen:
                continue
            t2, f2, _ = tri.glue[(t, f)]
            seen.add((t, f))
            seen.add((t2, f2))
            pairs.append(((t, f), (t2, f2)))
    return pairs


def _edge_cycle_relation(tri, cls, pair_index):
    """Exponent-sum vector of the dual 2-cell boundary around one edge
    class, as a row over the face-pair generators."""
    row = [0] * len(pair_index[None])
    t, (a, b) = cls[0]
    faces = [f for f in range(4) if f not in (a, b)]
    h = faces[0]
    start = (t, (a, b), h)
    while True:
        t2, f2, perm = tri.glue[(t, h)]
        key = ((t, h), (t2, f2))
        if key in pair_index:
            row[pair_index[key]] += 1
        else:
            row[pair_index[((t2, f2), (t, h))]] -= 1
        a2, b2 = sorted((perm[a], perm[b]))
        h2 = next(f for f in range(4) if f not in (a2, b2, f2))
        t, (a, b), h = t2, (a2, b2), h2
        if (t, (a, b), h) == start:
            break
    return row


def h1(tri):
    """H1 of the cusped manifold as (betti_number, torsion_factors)."""
    pairs = _face_pairs(tri)
    pair_index = {p: i for i, p in enumerate(pairs)}
    pair_index[None] = pairs
    n1 = len(pairs)
    # boundary to 0-chains: head minus tail tetrahedron
    d1 = [[0] * n1 for _ in range(tri.n_tets)]
    for i, ((t, f), (t2, f2)) in enumerate(pairs):
        d1[t2][i] += 1
        d1[t][i] -= 1
    # dual 2-cell boundaries
    d2 = [_edge_cycle_relation(tri, cls, pair_index)
          for cls in tri.edge_classes()]
    S1, U1, V1, V1inv = smith_normal_form(d1)
    rank1 = sum(1 for i in range(min(len(S1), n1)) if S1[i][i] != 0)
    kernel_cols = [j for j in range(n1)
                   if all(i >= len(S1) or S1[i][j] == 0 for i in range(len(S1)))]
    # coordinates of each relation in the kernel basis (columns of V1)
    coords = []
    for row in d2:
        full = [sum(V1inv[i][k] * row[k] for k in range(n1))
                for i in range(n1)]
        for i in range(n1):
            if i not in kernel_cols and full[i] != 0:
                raise AssertionError("relation not in cycle space")
        coords.append([full[i] for i in kernel_cols])
    if not coords:
        return len(kernel_cols), []
    S2, _, _, _ = smith_normal_form(coords)
    k = len(kernel_cols)
    diag = [S2[i][i] for i in range(min(len(S2), k)) if S2[i][i] != 0]
    betti = k - len(diag)
    torsion = [d for d in diag if d != 1]
    return betti, torsion
