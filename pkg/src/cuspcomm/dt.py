"""Dowker-Thistlethwaite codes for knots and links.

A DT code for an n-crossing, k-component link records, for each odd label
1, 3, ..., 2n-1, the even label sharing its crossing, negated when the even
strand passes under.  The even labels are bracketed into k subsequences, one
per link component.  The alphabetic form packs the same data into letters:
two letters giving n and k (a=1, b=2, ...), then k letters giving the
bracket lengths, then n letters giving the even labels (a=2, b=4, ...,
capitals negative).
"""

from dataclasses import dataclass


class DTError(ValueError):
    pass


@dataclass
class DTCode:
    """A validated DT code.

    crossings     number of crossings n
    components    number of link components k
    sequence      tuple of k tuples of signed even integers
    """
    crossings: int
    components: int
    sequence: tuple

    def flat(self):
        return [a for comp in self.sequence for a in comp]

    def is_alternating_form(self):
        # an alternating diagram never has an understrand marker
        return all(a > 0 for a in self.flat())

    def crossing_table(self):
        """Pair each odd label 1, 3, ..., 2n-1 with its signed even partner."""
        flat = self.flat()
        return [(2 * i + 1, flat[i]) for i in range(self.crossings)]


def _letter_count(ch):
    # counting letters: a=1, b=2, ...
    if not ch.islower():
        raise DTError("expected a lowercase count letter, got %r" % ch)
    return ord(ch) - ord('a') + 1


def _letter_label(ch):
    # label letters: a=2, b=4, ...; capitals are negated
    if ch.islower():
        return 2 * (ord(ch) - ord('a') + 1)
    if ch.isupper():
        return -2 * (ord(ch) - ord('A') + 1)
    raise DTError("expected a label letter, got %r" % ch)


def _label_letter(val):
    if val == 0 or val % 2 != 0:
        raise DTError("labels must be nonzero even integers, got %r" % val)
    idx = abs(val) // 2
    if idx > 26:
        raise DTError("label %d out of alphabetic range" % val)
    ch = chr(ord('a') + idx - 1)
    return ch if val > 0 else ch.upper()


def parse_alphabetic(text):
    """Parse an alphabetic DT code like 'hbbfcDEgFHAb' into a DTCode."""
    text = text.strip()
    if len(text) < 2:
        raise DTError("alphabetic code too short: %r" % text)
    n = _letter_count(text[0])
    k = _letter_count(text[1])
    if len(text) != 2 + k + n:
        raise DTError("code %r has length %d, expected 2+%d+%d"
                      % (text, len(text), k, n))
    lengths = [_letter_count(c) for c in text[2:2 + k]]
    if sum(lengths) != n:
        raise DTError("component lengths %r do not sum to %d" % (lengths, n))
    labels = [_letter_label(c) for c in text[2 + k:]]
    seq, pos = [], 0
    for ell in lengths:
        seq.append(tuple(labels[pos:pos + ell]))
        pos += ell
    code = DTCode(n, k, tuple(seq))
    validate(code)
    return code


def to_alphabetic(code):
    """Inverse of parse_alphabetic."""
    validate(code)
    out = [chr(ord('a') + code.crossings - 1), chr(ord('a') + code.components - 1)]
    out += [chr(ord('a') + len(comp) - 1) for comp in code.sequence]
    out += [_label_letter(a) for a in code.flat()]
    return ''.join(out)


def parse_numeric(text):
    """Parse a numeric DT code like '(6,-8)(-10,14,-12,-16,-2,4)'.

    A bare comma-separated list (no parentheses) is read as a knot code.
    """
    text = text.strip()
    if '(' in text:
        comps, depth, cur = [], 0, ''
        for ch in text:
            if ch == '(':
                if depth:
                    raise DTError("nested parentheses in %r" % text)
                depth, cur = 1, ''
            elif ch == ')':
                if not depth:
                    raise DTError("unbalanced parentheses in %r" % text)
                depth = 0
                comps.append(tuple(int(tok) for tok in cur.replace(',', ' ').split()))
            elif depth:
                cur += ch
            elif ch.strip():
                raise DTError("unexpected %r outside parentheses" % ch)
        if depth:
            raise DTError("unbalanced parentheses in %r" % text)
    else:
        comps = [tuple(int(tok) for tok in text.replace(',', ' ').split())]
    n = sum(len(c) for c in comps)
    code = DTCode(n, len(comps), tuple(comps))
    validate(code)
    return code


def to_numeric(code):
    validate(code)
    if code.components == 1:
        return ' '.join(str(a) for a in code.sequence[0])
    return ''.join('(%s)' % ','.join(str(a) for a in comp) for comp in code.sequence)


def validate(code):
    """Check the defining permutation property of a DT code.

    The absolute values of the entries must be exactly the even numbers
    2, 4, ..., 2n, each once.
    """
    flat = code.flat()
    if len(flat) != code.crossings:
        raise DTError("expected %d entries, got %d" % (code.crossings, len(flat)))
    if code.components != len(code.sequence) or code.components < 1:
        raise DTError("bad component count")
    need = set(range(2, 2 * code.crossings + 1, 2))
    got = sorted(abs(a) for a in flat)
    if got != sorted(need):
        raise DTError("entries %r are not a signed permutation of %r"
                      % (flat, sorted(need)))
    for a in flat:
        if a % 2 != 0:
            raise DTError("odd entry %d" % a)
    return True


def parse_name(name):
    """Split a census-style link name like '12n706' or '6a5'.

    Returns (crossings, 'a'|'n', index) or None when the name does not
    follow the convention (our corpus also holds unnamed examples).
    """
    i = 0
    while i < len(name) and name[i].isdigit():
        i += 1
    if i == 0 or i == len(name) or name[i] not in 'an':
        return None
    try:
        return int(name[:i]), name[i], int(name[i + 1:])
    except ValueError:
        return None


def load_corpus(path):
    """Read a 'name<spaces>code' table, one entry per line, '#' comments."""
    entries = []
    with open(path) as fh:
        for line in fh:
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            name, code = line.split()
            entries.append((name, parse_alphabetic(code)))
    return entries
