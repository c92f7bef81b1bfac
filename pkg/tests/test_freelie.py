"""Hall basis enumeration and bracket normalization against independent oracles.

The necklace (Witt) formula and direct tensor-algebra commutators are the
oracles here; enumeration counts and normalized brackets must reproduce them
exactly.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lieobstruct.freelie import (
    LieElement,
    LieError,
    apply_morphism,
    bigraded_dims,
    bracket,
    bracket_word,
    format_element,
    gen_elt,
    generator,
    hall_basis_derived,
    hall_level,
    lie_tensor,
    multidegree,
    parse_element,
    tensor_expand,
    witt_dim,
    word_str,
    zero,
)

# dimensions of the free Lie algebra per degree, from the necklace formula,
# computed by hand: (1/k) sum_{d|k} mu(d) n^(k/d)
WITT_2 = (2, 1, 2, 3, 6, 9, 18, 30)
WITT_3 = (3, 3, 8, 18, 48, 116, 312, 810)

X = generator(0)
Y = generator(1)
XY = bracket_word((X, Y))


def counts_by_degree(words, top):
    out = [0] * (top + 1)
    for w in words:
        out[w.degree] += 1
    return out[1:]


def test_witt_dim_formula():
    assert [witt_dim(2, d) for d in range(1, 9)] == list(WITT_2)
    assert [witt_dim(3, d) for d in range(1, 9)] == list(WITT_3)
    assert witt_dim(1, 1) == 1
    assert witt_dim(1, 5) == 0


def test_hall_counts_match_witt():
    for n, table in ((2, WITT_2), (3, WITT_3)):
        words = hall_basis_derived(n, 0, 8)
        assert counts_by_degree(words, 8) == list(table)


def test_level_one_words_degree_three():
    words = hall_level(2, 1, 3)
    xyx = bracket_word((X, Y, X))
    xyy = bracket_word((X, Y, Y))
    assert set(words) == {XY, xyx, xyy}
    assert words[0] == XY
    assert hall_level(2, 0, 1) == (X, Y)
    assert hall_level(2, 2, 3) == ()
    assert hall_level(1, 1, 6) == ()
    assert hall_basis_derived(1, 1, 6) == ()


def test_lowest_second_derived_words():
    # a level-2 word needs two distinct level-1 children, so degree 5 is
    # the first possible total degree and there is nothing in degree 4
    assert hall_basis_derived(2, 2, 4) == ()
    words = hall_basis_derived(2, 2, 5)
    assert len(words) == 2
    mds = {multidegree(w, 2) for w in words}
    assert mds == {(2, 3), (3, 2)}


def test_second_derived_degree_counts():
    # Witt(2, d) minus the d-1 level-one words of degree d
    words = hall_basis_derived(2, 2, 12)
    expected = [0, 0, 0, 0, 2, 4, 12, 23, 48, 90, 176, 324]
    assert counts_by_degree(words, 12) == expected


def test_parity_of_x_degree_two_slice():
    dims = bigraded_dims(2, 14)
    expected = {3: 1, 4: 1, 5: 2, 6: 2, 7: 3, 8: 3, 9: 4, 10: 4, 11: 5, 12: 5}
    for i, d in expected.items():
        assert dims.get((2, i), 0) == d
    assert (2, 2) not in dims
    assert bigraded_dims(1, 2) == {(1, 1): 1}


def test_x_degree_lower_bound_per_level():
    for level in (1, 2, 3):
        for w in hall_level(2, level, 12):
            assert w.gen_counts().get(0, 0) >= 2 ** (level - 1)


def test_basis_order_is_degree_major():
    words = hall_basis_derived(2, 0, 6)
    degs = [w.degree for w in words]
    assert degs == sorted(degs)
    keys = [w.key for w in words]
    for a, b in zip(words, words[1:]):
        if a.degree == b.degree:
            assert a.key < b.key
    assert len(set(keys)) == len(keys)


def test_enumeration_argument_errors():
    with pytest.raises(LieError):
        hall_level(0, 0, 3)
    with pytest.raises(LieError):
        hall_level(2, -1, 3)
    with pytest.raises(LieError):
        hall_basis_derived(2, 0, -1)
    with pytest.raises(LieError):
        witt_dim(2, 0)


def test_bracket_basic_identities():
    x = gen_elt(2, 0)
    y = gen_elt(2, 1)
    xy = bracket(x, y)
    assert xy == LieElement(2, {XY: Fraction(1)})
    assert bracket(xy, xy).is_zero()
    # [y,[x,y]] = -[[x,y],y]
    assert bracket(y, xy) == LieElement(2, {bracket_word((X, Y, Y)): Fraction(-1)})
    assert bracket(x, xy) == LieElement(2, {bracket_word((X, Y, X)): Fraction(-1)})


def test_bracket_multidegrees_add():
    u = bracket(gen_elt(2, 0), bracket(gen_elt(2, 0), gen_elt(2, 1)))
    for w in u.terms:
        assert multidegree(w, 2) == (2, 1)


def tensor_commutator(a, b):
    out = {}
    for u, s in a.items():
        for v, t in b.items():
            out[u + v] = out.get(u + v, 0) + s * t
            out[v + u] = out.get(v + u, 0) - s * t
    return {k: v for k, v in out.items() if v}


def test_normalization_against_tensor_oracle():
    """Every normalized pair bracket must re-expand to the plain commutator."""
    for n in (2, 3):
        pool = hall_basis_derived(n, 0, 4)
        for a in pool:
            for b in pool:
                if a.degree + b.degree > 5:
                    continue
                got = bracket(
                    LieElement(n, {a: Fraction(1)}), LieElement(n, {b: Fraction(1)})
                )
                want = tensor_commutator(tensor_expand(a), tensor_expand(b))
                assert lie_tensor(got) == {
                    u: Fraction(c) for u, c in want.items()
                }


def small_elements(n_gens, max_degree=3):
    pool = list(hall_basis_derived(n_gens, 0, max_degree))
    coeff = st.integers(min_value=-3, max_value=3)
    return st.lists(
        st.tuples(st.sampled_from(pool), coeff), min_size=0, max_size=4
    ).map(
        lambda pairs: LieElement(
            n_gens,
            {
                w: sum(Fraction(c) for ww, c in pairs if ww == w)
                for w, _ in pairs
            },
        )
    )


@settings(max_examples=60, deadline=None)
@given(small_elements(2), small_elements(2))
def test_antisymmetry(u, v):
    assert bracket(u, v) == -bracket(v, u)


@settings(max_examples=40, deadline=None)
@given(small_elements(3, 2), small_elements(3, 2), small_elements(3, 2))
def test_jacobi(a, b, c):
    lhs = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
    assert lhs.is_zero()


def test_parse_matches_api():
    e = parse_element("[x,[x,y]] - 2*[y,[x,y]]", ("x", "y"))
    x = gen_elt(2, 0)
    y = gen_elt(2, 1)
    xy = bracket(x, y)
    assert e == bracket(x, xy) - Fraction(2) * bracket(y, xy)
    assert parse_element(" [ x , y ]\t+ 1/2 * x", ("x", "y")) == bracket(
        x, y
    ) + Fraction(1, 2) * x


def test_parse_errors():
    with pytest.raises(LieError):
        parse_element("[x,y", ("x", "y"))
    with pytest.raises(LieError):
        parse_element("[x,z]", ("x", "y"))
    with pytest.raises(LieError):
        parse_element("2[x,y]", ("x", "y"))
    with pytest.raises(LieError):
        parse_element("[x,y]]", ("x", "y"))
    with pytest.raises(LieError):
        parse_element("", ("x", "y"))


@settings(max_examples=60, deadline=None)
@given(small_elements(2))
def test_format_parse_round_trip(e):
    assert parse_element(format_element(e) if not e.is_zero() else "x", ("x", "y")) == (
        e if not e.is_zero() else gen_elt(2, 0)
    )


def test_word_str_left_normed():
    assert word_str(bracket_word((X, Y, Y)), ("x", "y")) == "[[x,y],y]"
    assert word_str(bracket_word((XY, bracket_word((X, Y, Y)))), ("x", "y")) == (
        "[[x,y],[[x,y],y]]"
    )


def test_apply_morphism_substitution():
    x = gen_elt(2, 0)
    y = gen_elt(2, 1)
    e = bracket(x, y)
    # x -> x, y -> [x,y] turns [x,y] into [x,[x,y]]
    out = apply_morphism(e, [x, bracket(x, y)], 2)
    assert out == bracket(x, bracket(x, y))
    assert apply_morphism(e, [x, bracket(x, y)], 2, max_degree=2).is_zero()
    assert apply_morphism(zero(2), [x, y], 2).is_zero()
    with pytest.raises(LieError):
        apply_morphism(e, [x], 2)


def test_element_validation():
    with pytest.raises(LieError):
        LieElement(1, {XY: Fraction(1)})
    with pytest.raises(LieError):
        gen_elt(2, 5)
    u = LieElement(2, {XY: Fraction(0)})
    assert u.is_zero()
