"""Hall bases of free Lie algebras stratified by derived series level.

Basis words are iterated left-normed brackets [h1,...,hk], shorthand for
[...[[h1,h2],h3],...,hk], where all hj come from the previous level and
h1 < h2 >= h3 >= ... >= hk in a fixed total order.  Level 0 is the
generators; the words of level >= l, taken together, give a basis of the
l-th derived subalgebra, so enumerating by level answers derived-series
questions by counting.

The fixed total order compares level first (a word of LOWER level is
GREATER than any word of higher level), then total degree, then child
sequences lexicographically.  Only same-level comparisons matter for the
chain condition above; the cross-level rule fixes one global order so that
listings and pivot choices are reproducible.

Arbitrary brackets are rewritten into the basis by expanding both sides in
the tensor algebra (the free Lie algebra sits inside it, multidegree by
multidegree) and solving the resulting exact linear system over the basis
words of the same multidegree.  Two shortcut cases avoid the solve: a
bracket of two distinct same-level words is itself a basis word, and
appending a small enough previous-level word to a left-normed bracket just
extends it.  Everything is Fraction arithmetic; no floats.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .ratlin import ONE, ZERO, EchelonForm

__all__ = [
    "HallWord",
    "LieElement",
    "LieError",
    "apply_morphism",
    "bigraded_dims",
    "bracket",
    "bracket_word",
    "default_names",
    "format_element",
    "gen_elt",
    "generator",
    "hall_basis_derived",
    "hall_level",
    "hall_words_of_degree",
    "lie_tensor",
    "multidegree",
    "parse_element",
    "tensor_expand",
    "witt_dim",
    "word_str",
    "zero",
]


class LieError(ValueError):
    pass


class HallWord:
    """One basis word: a generator, or a left-normed bracket of words one
    level down.  Immutable; order is the fixed total order of the module
    docstring, exposed through the precomputed sort key."""

    __slots__ = ("level", "gen", "children", "degree", "key", "_hash", "_counts")

    def __init__(self, level, gen=None, children=None, _validate=True):
        self.level = level
        self.gen = gen
        self.children = children
        if level == 0:
            if _validate and (children is not None or gen is None or gen < 0):
                raise LieError("level-0 word must be a bare generator index")
            self.degree = 1
            self.key = (0, 1, gen)
            counts = {gen: 1}
        else:
            if _validate:
                if not children or len(children) < 2:
                    raise LieError("bracket word needs at least two children")
                if any(c.level != level - 1 for c in children):
                    raise LieError("children must all sit one level down")
                if not children[0].key < children[1].key:
                    raise LieError("first child must be smaller than second")
                for a, b in zip(children[1:], children[2:]):
                    if a.key < b.key:
                        raise LieError("children after the second must be weakly decreasing")
            self.degree = sum(c.degree for c in children)
            self.key = (-level, self.degree, tuple(c.key for c in children))
            counts: dict = {}
            for c in children:
                for g, m in c._counts.items():
                    counts[g] = counts.get(g, 0) + m
        self._counts = counts
        self._hash = hash((level, gen, children))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, HallWord):
            return NotImplemented
        return (
            self.level == other.level
            and self.gen == other.gen
            and self.children == other.children
        )

    def __lt__(self, other):
        return self.key < other.key

    def __le__(self, other):
        return self.key <= other.key

    def __repr__(self):
        return f"HallWord({word_str(self, None)})"

    def gen_counts(self) -> dict:
        return dict(self._counts)

    def max_gen(self) -> int:
        return max(self._counts)


_GENERATORS: dict[int, HallWord] = {}


def generator(g: int) -> HallWord:
    w = _GENERATORS.get(g)
    if w is None:
        if g < 0:
            raise LieError(f"generator index must be >= 0, got {g}")
        w = HallWord(0, gen=g)
        _GENERATORS[g] = w
    return w


def bracket_word(children) -> HallWord:
    """The left-normed basis word with these children (validated)."""
    return HallWord(children[0].level + 1, children=tuple(children))


def multidegree(w: HallWord, n_gens: int):
    md = [0] * n_gens
    for g, m in w._counts.items():
        if g >= n_gens:
            raise LieError(f"word uses generator {g} outside alphabet of size {n_gens}")
        md[g] = m
    return tuple(md)


def word_str(w: HallWord, names) -> str:
    """Render as nested binary brackets, e.g. [[x,y],y]."""

    def name(g):
        if names is None:
            return f"x{g + 1}"
        return names[g]

    if w.level == 0:
        return name(w.gen)
    acc = word_str(w.children[0], names)
    for c in w.children[1:]:
        acc = f"[{acc},{word_str(c, names)}]"
    return acc


# ---------------------------------------------------------------------------
# enumeration

def _check_enum_args(n_gens, level, max_degree):
    if n_gens < 1:
        raise LieError(f"alphabet size must be >= 1, got {n_gens}")
    if level < 0:
        raise LieError(f"level must be >= 0, got {level}")
    if max_degree < 0:
        raise LieError(f"degree cap must be >= 0, got {max_degree}")


@lru_cache(maxsize=None)
def hall_level(n_gens: int, level: int, max_degree: int):
    """All basis words of exactly this level with total degree <= max_degree,
    in the fixed total order."""
    _check_enum_args(n_gens, level, max_degree)
    if level == 0:
        if max_degree < 1:
            return ()
        return tuple(generator(g) for g in range(n_gens))
    if 2 ** level > max_degree:
        return ()
    prev = hall_level(n_gens, level - 1, max_degree - 2 ** (level - 1))
    out = []

    def extend(indices, total):
        if len(indices) >= 2:
            out.append(bracket_word(tuple(prev[i] for i in indices)))
        last = indices[-1]
        for nxt in range(last + 1):
            d = total + prev[nxt].degree
            if d <= max_degree:
                extend(indices + (nxt,), d)

    for i in range(len(prev)):
        for j in range(i + 1, len(prev)):
            d = prev[i].degree + prev[j].degree
            if d <= max_degree:
                extend((i, j), d)
    out.sort(key=lambda w: w.key)
    return tuple(out)


@lru_cache(maxsize=None)
def hall_basis_derived(n_gens: int, derived_level: int, max_degree: int):
    """Union of hall_level over levels >= derived_level, degree <= cap.

    Sorted degree-major, then by the fixed total order within a degree; this
    is also the pivot column order used everywhere downstream.
    """
    _check_enum_args(n_gens, derived_level, max_degree)
    words = []
    level = derived_level
    while level == 0 or 2 ** level <= max_degree:
        words.extend(hall_level(n_gens, level, max_degree))
        level += 1
        if level > 0 and 2 ** level > max_degree:
            break
    words.sort(key=lambda w: (w.degree, w.key))
    return tuple(words)


@lru_cache(maxsize=None)
def hall_words_of_degree(n_gens: int, degree: int):
    """Basis words of exact total degree, grouped by multidegree."""
    grouped: dict = {}
    for w in hall_basis_derived(n_gens, 0, degree):
        if w.degree == degree:
            grouped.setdefault(multidegree(w, n_gens), []).append(w)
    return {md: tuple(ws) for md, ws in grouped.items()}


def _divisors(k):
    out = [d for d in range(1, k + 1) if k % d == 0]
    return out


def _mobius(k):
    out = 1
    p = 2
    while p * p <= k:
        if k % p == 0:
            k //= p
            if k % p == 0:
                return 0
            out = -out
        else:
            p += 1
    if k > 1:
        out = -out
    return out


def witt_dim(n_gens: int, degree: int) -> int:
    """Dimension of the degree-d part of the free Lie algebra (necklace count)."""
    if degree < 1:
        raise LieError(f"degree must be >= 1, got {degree}")
    if n_gens < 1:
        raise LieError(f"alphabet size must be >= 1, got {n_gens}")
    total = sum(_mobius(d) * n_gens ** (degree // d) for d in _divisors(degree))
    q, r = divmod(total, degree)
    assert r == 0
    return q


def bigraded_dims(derived_level: int, max_degree: int) -> dict:
    """Multidegree counts for the two-letter alphabet.

    Returns {(i, j): count} over the derived-level basis with x-degree i and
    y-degree j, i + j <= max_degree.
    """
    out: dict = {}
    for w in hall_basis_derived(2, derived_level, max_degree):
        md = multidegree(w, 2)
        out[md] = out.get(md, 0) + 1
    return out


# ---------------------------------------------------------------------------
# tensor expansion and bracket normalization

_EXPAND: dict[HallWord, dict] = {}


def tensor_expand(w: HallWord) -> dict:
    """Image of a basis word in the tensor algebra: {letter tuple: int}."""
    t = _EXPAND.get(w)
    if t is not None:
        return t
    if w.level == 0:
        t = {(w.gen,): 1}
    else:
        t = tensor_expand(w.children[0])
        for c in w.children[1:]:
            t = _tensor_commutator(t, tensor_expand(c))
    _EXPAND[w] = t
    return t


def _tensor_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for u, x in a.items():
        for v, y in b.items():
            k = u + v
            z = out.get(k, 0) + x * y
            if z:
                out[k] = z
            else:
                del out[k]
    return out


def _tensor_commutator(a: dict, b: dict) -> dict:
    out = _tensor_mul(a, b)
    for u, x in _tensor_mul(b, a).items():
        z = out.get(u, 0) - x
        if z:
            out[u] = z
        else:
            del out[u]
    return out


def _word_int(letters, n_gens):
    k = 0
    for g in letters:
        k = k * n_gens + g
    return k


class _MultidegreeSolver:
    """Expresses tensor polynomials of one multidegree over the basis words."""

    def __init__(self, n_gens, md):
        self.n_gens = n_gens
        self.words = hall_words_of_degree(n_gens, sum(md)).get(md, ())
        self.ech = EchelonForm(track=True)
        for w in self.words:
            row = {
                _word_int(u, n_gens): Fraction(c)
                for u, c in tensor_expand(w).items()
            }
            res, _ = self.ech.insert(row)
            assert res, "basis words must expand independently"

    def solve(self, tensor_poly: dict) -> dict:
        row = {
            _word_int(u, self.n_gens): Fraction(c) for u, c in tensor_poly.items()
        }
        res, combo = self.ech.reduce(row)
        if res:
            raise AssertionError("commutator expansion escaped the Lie span")
        return {self.words[i]: c for i, c in (combo or {}).items()}


_SOLVERS: dict = {}


def _solver(n_gens, md) -> _MultidegreeSolver:
    key = (n_gens, md)
    s = _SOLVERS.get(key)
    if s is None:
        s = _MultidegreeSolver(n_gens, md)
        _SOLVERS[key] = s
    return s


_PAIR_NORM: dict = {}


def _normalize_pair(n_gens, a: HallWord, b: HallWord) -> dict:
    """[a, b] as a combination of basis words, for basis words a, b."""
    if a is b or a == b:
        return {}
    if b.key < a.key:
        return {w: -c for w, c in _normalize_pair(n_gens, b, a).items()}
    key = (n_gens, a, b)
    out = _PAIR_NORM.get(key)
    if out is not None:
        return out
    if a.level == b.level:
        out = {bracket_word((a, b)): ONE}
    elif b.level == a.level - 1 and b.key <= a.children[-1].key:
        out = {bracket_word(a.children + (b,)): ONE}
    else:
        md = tuple(
            x + y
            for x, y in zip(multidegree(a, n_gens), multidegree(b, n_gens))
        )
        t = _tensor_commutator(tensor_expand(a), tensor_expand(b))
        out = _solver(n_gens, md).solve(t)
    _PAIR_NORM[key] = out
    return out


class LieElement:
    """A finite rational combination of basis words on a fixed alphabet."""

    __slots__ = ("n_gens", "terms")

    def __init__(self, n_gens: int, terms: dict):
        self.n_gens = n_gens
        clean = {}
        for w, c in terms.items():
            c = c if isinstance(c, Fraction) else Fraction(c)
            if c:
                if w.max_gen() >= n_gens:
                    raise LieError(
                        f"word {word_str(w, None)} uses a generator outside alphabet size {n_gens}"
                    )
                clean[w] = c
        self.terms = clean

    __hash__ = None

    def __eq__(self, other):
        if not isinstance(other, LieElement):
            return NotImplemented
        return self.n_gens == other.n_gens and self.terms == other.terms

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for w, c in other.terms.items():
            y = terms.get(w, ZERO) + c
            if y:
                terms[w] = y
            else:
                del terms[w]
        return LieElement(self.n_gens, terms)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return LieElement(self.n_gens, {w: -c for w, c in self.terms.items()})

    def __rmul__(self, c):
        c = c if isinstance(c, Fraction) else Fraction(c)
        return LieElement(self.n_gens, {w: c * x for w, x in self.terms.items()})

    def __repr__(self):
        return f"LieElement({format_element(self)})"

    def _check(self, other):
        if not isinstance(other, LieElement):
            raise LieError(f"expected LieElement, got {type(other).__name__}")
        if other.n_gens != self.n_gens:
            raise LieError("alphabet size mismatch")

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self):
        return sorted({w.degree for w in self.terms})

    def min_degree(self):
        if not self.terms:
            return None
        return min(w.degree for w in self.terms)

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def component(self, degree: int) -> "LieElement":
        return LieElement(
            self.n_gens, {w: c for w, c in self.terms.items() if w.degree == degree}
        )

    def truncate(self, max_degree: int) -> "LieElement":
        return LieElement(
            self.n_gens,
            {w: c for w, c in self.terms.items() if w.degree <= max_degree},
        )

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda wc: (wc[0].degree, wc[0].key))


def zero(n_gens: int) -> LieElement:
    return LieElement(n_gens, {})


def gen_elt(n_gens: int, g: int) -> LieElement:
    if not 0 <= g < n_gens:
        raise LieError(f"generator index {g} outside alphabet of size {n_gens}")
    return LieElement(n_gens, {generator(g): ONE})


def bracket(u: LieElement, v: LieElement) -> LieElement:
    """The Lie bracket [u, v], rewritten into the basis."""
    u._check(v)
    n = u.n_gens
    acc: dict = {}
    for wa, ca in u.terms.items():
        for wb, cb in v.terms.items():
            c = ca * cb
            for w, k in _normalize_pair(n, wa, wb).items():
                y = acc.get(w, ZERO) + c * k
                if y:
                    acc[w] = y
                else:
                    del acc[w]
    return LieElement(n, acc)


def lie_tensor(e: LieElement) -> dict:
    """Image of an element in the tensor algebra: {letter tuple: Fraction}."""
    out: dict = {}
    for w, c in e.terms.items():
        for u, x in tensor_expand(w).items():
            y = out.get(u, ZERO) + c * x
            if y:
                out[u] = y
            else:
                del out[u]
    return out


def apply_morphism(e: LieElement, images, n_out: int, max_degree=None) -> LieElement:
    """Push an element through the morphism sending generator g to images[g].

    images is a sequence of LieElements on the target alphabet.  With
    max_degree set, intermediate and final results are truncated above that
    total degree, which is the right notion for working modulo a lower
    central series term.
    """
    if len(images) != e.n_gens:
        raise LieError(f"need {e.n_gens} generator images, got {len(images)}")
    memo: dict = {}

    def push(w: HallWord) -> LieElement:
        got = memo.get(w)
        if got is not None:
            return got
        if w.level == 0:
            out = images[w.gen]
        else:
            out = push(w.children[0])
            for c in w.children[1:]:
                out = bracket(out, push(c))
                if max_degree is not None:
                    out = out.truncate(max_degree)
        memo[w] = out
        return out

    acc = zero(n_out)
    for w, c in e.terms.items():
        acc = acc + c * push(w)
    if max_degree is not None:
        acc = acc.truncate(max_degree)
    return acc


# ---------------------------------------------------------------------------
# parsing and printing

def default_names(n_gens: int):
    if n_gens <= 3:
        return tuple("xyz"[:n_gens])
    return tuple(f"x{i + 1}" for i in range(n_gens))


def format_element(e: LieElement, names=None) -> str:
    if names is None:
        names = default_names(e.n_gens)
    if not e.terms:
        return "0"
    parts = []
    for w, c in e.sorted_terms():
        ws = word_str(w, names)
        if c == 1:
            body = ws
        elif c == -1:
            body = ws
        else:
            body = f"{abs(c)}*{ws}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts)


class _Parser:
    def __init__(self, text, names):
        self.text = text.replace(" ", "").replace("\t", "")
        self.pos = 0
        self.names = list(names)

    def error(self, msg):
        raise LieError(f"parse error at position {self.pos}: {msg} (in {self.text!r})")

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def parse(self) -> LieElement:
        e = self.parse_sum()
        if self.pos != len(self.text):
            self.error("trailing input")
        return e

    def parse_sum(self) -> LieElement:
        n = len(self.names)
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
        acc = sign * self.parse_term()
        while self.peek() in ("+", "-"):
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
            acc = acc + sign * self.parse_term()
        if acc.n_gens != n:
            raise AssertionError
        return acc

    def parse_term(self) -> LieElement:
        c = ONE
        if self.peek().isdigit():
            c = self.parse_rational()
            if self.peek() == "*":
                self.pos += 1
            else:
                self.error("a coefficient must be followed by '*' and a bracket or generator")
        return c * self.parse_monomial()

    def parse_rational(self) -> Fraction:
        start = self.pos
        while self.peek().isdigit():
            self.pos += 1
        num = int(self.text[start:self.pos])
        if self.peek() == "/":
            self.pos += 1
            dstart = self.pos
            while self.peek().isdigit():
                self.pos += 1
            if dstart == self.pos:
                self.error("missing denominator")
            return Fraction(num, int(self.text[dstart:self.pos]))
        return Fraction(num)

    def parse_monomial(self) -> LieElement:
        n = len(self.names)
        if self.peek() == "[":
            self.pos += 1
            left = self.parse_sum()
            self.expect(",")
            right = self.parse_sum()
            self.expect("]")
            return bracket(left, right)
        start = self.pos
        while self.peek().isalnum() or self.peek() == "_":
            self.pos += 1
        name = self.text[start:self.pos]
        if not name:
            self.error("expected a generator name or '['")
        if name not in self.names:
            self.error(f"unknown generator {name!r}")
        return gen_elt(n, self.names.index(name))


def parse_element(text: str, names) -> LieElement:
    """Parse nested bracket expressions like '[x,[x,y]] - 2*[y,[x,y]]'."""
    return _Parser(text, names).parse()
