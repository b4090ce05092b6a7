"""Punctured-torus bundles: words, layered triangulations, cusp strips."""

import itertools
import random

import pytest

from cuspcomm import ptb
from cuspcomm.surface import cusp_link


def test_word_matrices():
    assert ptb.word_matrix('L') == ((1, 0), (1, 1))
    assert ptb.word_matrix('R') == ((1, 1), (0, 1))
    assert ptb.word_matrix('LR') == ((1, 1), (1, 2))
    assert ptb.word_matrix('LRRLR') == ((3, 5), (4, 7))


def test_hyperbolicity_is_both_letters():
    assert ptb.is_hyperbolic_word('LR')
    assert not ptb.is_hyperbolic_word('LLLL')
    assert not ptb.is_hyperbolic_word('R')
    # trace > 2 exactly in the hyperbolic case
    for w in ('LR', 'LLR', 'LLLL', 'RRR', 'LRLRR'):
        m = ptb.word_matrix(w)
        assert (m[0][0] + m[1][1] > 2) == ptb.is_hyperbolic_word(w)


def test_word_errors():
    with pytest.raises(ptb.PTBError):
        ptb.normalize_word('')
    with pytest.raises(ptb.PTBError):
        ptb.normalize_word('LRX')
    with pytest.raises(ptb.PTBError):
        ptb.monodromy_triangulation('LLL')
    with pytest.raises(ptb.PTBError):
        ptb.monodromy_triangulation('LR', sign=2)


def test_classify_lrrlr():
    info = ptb.classify_symmetries('LRRLR')
    assert set(info['types']) == {'central', 'palindromic'}
    assert info['multiplicity'] == 1
    assert info['predicted_order'] == 4
    assert info['exceptional'] is None


def test_classify_power_and_reflections():
    info = ptb.classify_symmetries('LRRLRR')
    assert 'power' in info['types'] and info['multiplicity'] == 2
    assert info['predicted_order'] == 2 * 2 * 2  # central, power, palindromic
    info = ptb.classify_symmetries('LLRRRL')
    # half-turn letter swap: shifting by 3 swaps L and R
    assert 'half_turn_swap' in info['types']


def test_exceptional_families():
    assert ptb.classify_symmetries('LRLR')['exceptional'] == '(LR)^m'
    assert ptb.classify_symmetries('LLRR')['exceptional'] == '(LLRR)^m'
    assert ptb.classify_symmetries('LLR')['exceptional'] == 'arithmetic length 3'
    assert ptb.classify_symmetries('LRRLR')['exceptional'] is None


def test_closure_of_reflection_types():
    # any two of the three reflection types force the third
    for n in range(2, 9):
        for bits in itertools.product('LR', repeat=n):
            w = ''.join(bits)
            if ptb.is_hyperbolic_word(w):
                info = ptb.classify_symmetries(w)
                refl = {'palindromic', 'half_turn_swap',
                        'reversal_swap'} & set(info['types'])
                if info['exceptional'] is None:
                    assert len(refl) != 2, w


def test_figure_eight_and_sister():
    for sign in (1, -1):
        t = ptb.monodromy_triangulation('LR', sign)
        assert t.n_tets == 2
        assert t.n_cusps == 1
        assert t.edge_orders() == [6, 6]
        assert t.is_orientable()


def test_layered_triangulation_shape():
    for w in ('LLR', 'LRRLR', 'LLRRLR'):
        for sign in (1, -1):
            t = ptb.monodromy_triangulation(w, sign)
            assert t.n_tets == len(w)
            assert t.n_cusps == 1
            assert len(t.edge_classes()) == len(w)
            assert t.is_orientable()
            assert sum(t.edge_orders()) == 6 * len(w)


def test_strip_model_matches_induced_link():
    rng = random.Random(77)
    words = set()
    while len(words) < 20:
        n = rng.randrange(2, 9)
        w = ''.join(rng.choice('LR') for _ in range(n))
        if ptb.is_hyperbolic_word(w):
            words.add(w)
    for w in sorted(words):
        for sign in (1, -1):
            model = ptb.cusp_triangulation(w, sign)
            assert model.direction_parity in (0, 1)
            surf = model.surface
            assert surf.n_tris == 4 * len(w)
            assert surf.euler_characteristic() == 0
            assert surf.orientation_signs() is not None
            # every bundle edge label appears on exactly two cusp vertices,
            # and the vertex order equals the bundle edge order
            tri = ptb.monodromy_triangulation(w, sign)
            orders = {i: len(c) for i, c in enumerate(tri.edge_classes())}
            per_label = {}
            for cls in surf.vertex_classes():
                labs = {model.vertex_labels[c] for c in cls}
                assert len(labs) == 1
                lab = labs.pop()
                per_label.setdefault(lab, []).append(len(cls))
            assert all(len(v) == 2 for v in per_label.values())
            for lab, sizes in per_label.items():
                assert sizes == [orders[lab], orders[lab]]


def test_lrrlr_cusp_picture():
    model = ptb.cusp_triangulation('LRRLR', 1)
    assert model.surface.n_tris == 20
    assert len(set(model.vertex_labels.values())) == 5
    assert len(set(model.edge_labels.values())) == 5
    # strip pattern of two-vertex-side placement follows the letters
    ups = [model.is_up(0, j) for j in range(5)]
    assert ups == [ch == 'L' for ch in 'LRRLR']
    # brute-force symmetry count matches the prediction
    assert ptb.symmetry_group_order('LRRLR', 1) == 4
    assert ptb.symmetry_group_order('LRRLR', -1) == 4


def test_symmetry_counts_small_words():
    for n in range(2, 7):
        for bits in itertools.product('LR', repeat=n):
            w = ''.join(bits)
            if not ptb.is_hyperbolic_word(w):
                continue
            info = ptb.classify_symmetries(w)
            for sign in (1, -1):
                got = ptb.symmetry_group_order(w, sign)
                if info['exceptional'] is None:
                    assert got == info['predicted_order'], (w, sign)
                else:
                    assert got >= info['predicted_order'], (w, sign)


def test_exceptional_words_have_extra_symmetries():
    assert ptb.symmetry_group_order('LLRR', 1) == 16 > 8
    assert ptb.symmetry_group_order('LLRR', -1) == 32 > 8
