"""Dowker-Thistlethwaite code parsing and round trips."""

import os
import random

import pytest

from cuspcomm import dt

ASSETS = os.path.join(os.path.dirname(dt.__file__), 'assets')


def test_alphabetic_example_decodes():
    code = dt.parse_alphabetic('hbbfcDEgFHAb')
    assert code.crossings == 8
    assert code.components == 2
    assert code.sequence == ((6, -8), (-10, 14, -12, -16, -2, 4))


def test_numeric_matches_alphabetic_example():
    a = dt.parse_alphabetic('hbbfcDEgFHAb')
    b = dt.parse_numeric('(6,-8)(-10,14,-12,-16,-2,4)')
    assert a == b
    assert dt.to_alphabetic(b) == 'hbbfcDEgFHAb'
    assert dt.to_numeric(a) == '(6,-8)(-10,14,-12,-16,-2,4)'


def test_single_component_numeric_without_parens():
    code = dt.parse_numeric('4,6,8,2')
    assert code.components == 1
    assert code.crossings == 4
    dt.validate(code)


def test_trefoil_and_figure8_tables():
    tref = dt.parse_alphabetic('cacbca')
    assert tref.flat() == [4, 6, 2]
    fig8 = dt.parse_alphabetic('dadbcda')
    assert fig8.flat() == [4, 6, 8, 2]
    assert fig8.crossing_table() == [(1, 4), (3, 6), (5, 8), (7, 2)]


def test_alphabetic_round_trip_random():
    rng = random.Random(20260823)
    for _ in range(200):
        n = rng.randrange(3, 14)
        evens = list(range(2, 2 * n + 1, 2))
        rng.shuffle(evens)
        evens = [e if rng.random() < 0.5 else -e for e in evens]
        # split into components
        k = rng.randrange(1, min(4, n) + 1)
        cuts = sorted(rng.sample(range(1, n), k - 1))
        seq, prev = [], 0
        for c in cuts + [n]:
            seq.append(tuple(evens[prev:c]))
            prev = c
        code = dt.DTCode(n, k, tuple(seq))
        dt.validate(code)
        text = dt.to_alphabetic(code)
        back = dt.parse_alphabetic(text)
        assert back == code
        assert dt.to_alphabetic(back) == text
        num = dt.to_numeric(code)
        assert dt.parse_numeric(num) == code


def test_corpus_loads_and_round_trips():
    path = os.path.join(ASSETS, 'dt_table5.txt')
    table = dt.load_corpus(path)
    assert len(table) == 67
    names = [name for name, _ in table]
    assert names[0] == '4a1'
    assert 'x8ex1' in names
    assert '12n706' in names
    raw = {}
    with open(path) as fh:
        for line in fh:
            line = line.split('#', 1)[0].strip()
            if line:
                nm, text = line.split()
                raw[nm] = text
    for name, code in table:
        dt.validate(code)
        assert dt.to_alphabetic(code) == raw[name]
        parsed = dt.parse_name(name)
        if parsed is not None and parsed[1] == 'a':
            # alternating knots and links have all-positive codes
            assert code.is_alternating_form(), name


def test_parse_name():
    assert dt.parse_name('4a1') == (4, 'a', 1)
    assert dt.parse_name('12n706') == (12, 'n', 706)
    assert dt.parse_name('x8ex1') is None
    assert dt.parse_name('10a') is None


def test_errors():
    with pytest.raises(dt.DTError):
        dt.parse_alphabetic('')
    with pytest.raises(dt.DTError):
        dt.parse_alphabetic('zz')
    with pytest.raises(dt.DTError):
        dt.parse_alphabetic('cacq')      # letter out of range
    with pytest.raises(dt.DTError):
        dt.parse_alphabetic('cacbb')     # wrong length
    with pytest.raises(dt.DTError):
        dt.parse_numeric('3,5,7')        # odd entries
    with pytest.raises(dt.DTError):
        dt.validate(dt.DTCode(3, 1, [[4, 4, 2]]))  # repeated pairing
