"""Tests for integer homology of ideal triangulations."""

import random

from cuspcomm import ptb
from cuspcomm.homology import h1, smith_normal_form


def matmul(X, Y):
    return [[sum(X[i][k] * Y[k][j] for k in range(len(Y)))
             for j in range(len(Y[0]))] for i in range(len(X))]


def test_smith_normal_form_random():
    rng = random.Random(20260823)
    for _ in range(150):
        m, n = rng.randint(1, 6), rng.randint(1, 6)
        A = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(m)]
        S, U, V, Vinv = smith_normal_form(A)
        assert matmul(matmul(U, A), V) == S
        assert matmul(V, Vinv) == [[int(i == j) for j in range(n)]
                                   for i in range(n)]
        diag = [S[i][i] for i in range(min(m, n))]
        for i in range(len(diag) - 1):
            if diag[i] == 0:
                assert diag[i + 1] == 0
            elif diag[i + 1] != 0:
                assert diag[i + 1] % diag[i] == 0
        assert all(S[i][j] == 0 for i in range(m) for j in range(n) if i != j)


def test_bundle_homology_matches_monodromy():
    """H1 of a once-punctured-torus bundle is Z + coker(sign*A - I) with A
    the monodromy matrix acting on H1 of the fiber."""
    rng = random.Random(7)
    words = ['LR', 'LLR', 'LRRR', 'LLRR', 'LLLRR']
    for _ in range(10):
        n = rng.randint(2, 7)
        w = ''.join(rng.choice('LR') for _ in range(n))
        if 'L' in w and 'R' in w:
            words.append(w)
    for word in words:
        A = ptb.word_matrix(word)
        for sign in (1, -1):
            tri = ptb.monodromy_triangulation(word, sign)
            betti, torsion = h1(tri)
            M = [[sign * A[0][0] - 1, sign * A[0][1]],
                 [sign * A[1][0], sign * A[1][1] - 1]]
            det = abs(M[0][0] * M[1][1] - M[0][1] * M[1][0])
            if det == 0:
                continue
            assert betti == 1
            order = 1
            for d in torsion:
                order *= d
            assert order == det, (word, sign, torsion, det)


def test_known_census_homology():
    assert h1(ptb.monodromy_triangulation('LR', 1)) == (1, [])
    assert h1(ptb.monodromy_triangulation('LR', -1)) == (1, [5])
