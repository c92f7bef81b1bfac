"""Chevalley-Eilenberg complexes, flat connections, classifying maps, and
the tower stability checks."""

from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lieobstruct import data_path
from lieobstruct.cdga import cohomology, load_cdga
from lieobstruct.ce import (
    CeError,
    canonical_connection,
    canonical_filtration,
    ce_chain_boundary,
    ce_cochain,
    check_stability,
    classifying_stage,
    flat_to_lie_map,
    flat_to_morphism,
    hirsch_tower,
    is_flat,
    lie_homology,
    lie_homology_by_weight,
    tower_from_cdga,
    verify_one_equivalence,
)
from lieobstruct.fplie import (
    NilpotentLieAlgebra,
    h2_graded,
    lcs_quotient,
    load_presentation,
    presentation_from_dict,
)

ONE = Fraction(1)

FREE2 = presentation_from_dict({"generators": ["x", "y"], "relators": []})
HEIS_ALG = lcs_quotient(FREE2, 3)

HEIS = load_cdga(data_path("heis.json"))
NONCARNOT = load_cdga(data_path("noncarnot.json"))
TORUS = load_cdga(data_path("torus.json"))
WEDGE2 = load_cdga(data_path("wedge2.json"))
ALL_CDGAS = [HEIS, NONCARNOT, TORUS, WEDGE2]


def abelian(n):
    p = presentation_from_dict(
        {"generators": [f"g{i}" for i in range(n)], "relators": []}
    )
    return lcs_quotient(p, 2)


# ---------------------------------------------------------------------------
# cochain cdga


def test_heisenberg_cochain_differential():
    ce = ce_cochain(HEIS_ALG, 3)
    # d(u3) = -u1^u2, the other generators are closed
    assert dict(ce.cdga.diff[1].entries) == {(0, 2): Fraction(-1)}
    assert ce.cdga.names[1] == ("u1", "u2", "u3")
    assert ce.cdga.names[2] == ("u1^u2", "u1^u3", "u2^u3")


def test_heisenberg_cochain_betti():
    ce = ce_cochain(HEIS_ALG, 3)
    assert [cohomology(ce.cdga, i)[0] for i in range(4)] == [1, 2, 2, 1]


def test_cochain_matches_presentation_quotient():
    """The bundled Heisenberg presentation and the free class-2 quotient
    carry identical structure constants."""
    g = lcs_quotient(load_presentation(data_path("pres_heis.json")), 3)
    assert g.dim == HEIS_ALG.dim
    assert g.brackets == HEIS_ALG.brackets
    ce = ce_cochain(g, 3)
    assert [cohomology(ce.cdga, i)[0] for i in range(4)] == [1, 2, 2, 1]


def test_abelian_cochain_is_closed():
    ce = ce_cochain(abelian(4), 3)
    for n in range(1, 4):
        assert not ce.cdga.diff[n].entries


def test_cochain_rejects_bad_caps():
    with pytest.raises(CeError):
        ce_cochain(HEIS_ALG, 1)
    with pytest.raises(CeError):
        ce_cochain(HEIS_ALG, 4)


def test_cochain_rejects_jacobi_failure():
    bad = NilpotentLieAlgebra(
        class_bound=3,
        gen_names=("e1", "e2", "e3", "e4"),
        labels=("e1", "e2", "e3", "e4"),
        weights=(1, 1, 2, 1),
        brackets={(0, 1): {2: ONE}, (2, 3): {0: ONE}},
        gen_images=({0: ONE}, {1: ONE}, {2: ONE}, {3: ONE}),
    )
    assert not bad.check_jacobi()
    with pytest.raises(CeError):
        ce_cochain(bad, 3)


def test_cochain_cap_two_has_no_triple_degree():
    ce = ce_cochain(HEIS_ALG, 2)
    assert ce.cdga.top == 2
    assert len(ce.tuples) == 3


# ---------------------------------------------------------------------------
# chain complex and homology


def test_boundary_shapes_and_low_degrees():
    g = HEIS_ALG
    assert ce_chain_boundary(g, 0).rows == 0
    assert ce_chain_boundary(g, 0).cols == 1
    d1 = ce_chain_boundary(g, 1)
    assert (d1.rows, d1.cols) == (1, 3)
    assert not d1.entries
    with pytest.raises(CeError):
        ce_chain_boundary(g, -1)


def test_heisenberg_boundary_two():
    # x1^x2 goes to -x3, the pairs containing x3 are killed
    d2 = ce_chain_boundary(HEIS_ALG, 2)
    assert dict(d2.entries) == {(2, 0): Fraction(-1)}


def test_heisenberg_boundary_three_vanishes():
    d3 = ce_chain_boundary(HEIS_ALG, 3)
    assert not d3.entries


def test_cochain_is_transpose_of_boundary():
    """The degree-one cochain differential is the plain transpose of the
    second boundary map; both pin c_ij^k with the same sign."""
    for g in (HEIS_ALG, lcs_quotient(FREE2, 4), lcs_quotient(FREE2, 5)):
        ce = ce_cochain(g, 3)
        d2 = ce_chain_boundary(g, 2)
        assert ce.cdga.diff[1].entries == d2.transpose().entries


def test_heisenberg_homology():
    assert [lie_homology(HEIS_ALG, n) for n in range(4)] == [1, 2, 2, 1]


def test_abelian_homology_is_binomial():
    g = abelian(4)
    for n in range(5):
        assert lie_homology(g, n) == comb(4, n)


def test_homology_by_weight_heisenberg():
    assert lie_homology_by_weight(HEIS_ALG, 2) == {3: 2}
    # the weight-2 class is a boundary, so H_1 sees only the generators
    assert lie_homology_by_weight(HEIS_ALG, 1) == {1: 2}


def test_homology_by_weight_needs_graded_input():
    ungraded = NilpotentLieAlgebra(
        class_bound=2,
        gen_names=("e1", "e2"),
        labels=("e1", "e2"),
        weights=(1, 1),
        brackets={(0, 1): {0: ONE}},
        gen_images=({0: ONE}, {1: ONE}),
    )
    with pytest.raises(CeError):
        lie_homology_by_weight(ungraded, 2)


def test_graded_h2_matches_hopf_formula():
    """Degreewise second homology of the class-(k+1) quotient agrees with
    the Hopf formula dimensions in every degree k up to six."""
    for name in ("pres_cubic", "pres_torus", "free_metabelian"):
        p = load_presentation(data_path(name + ".json"))
        fp = h2_graded(p, 6)
        for k in range(2, 7):
            g = lcs_quotient(p, k + 1)
            assert lie_homology_by_weight(g, 2).get(k, 0) == fp.get(k, 0)


def test_truncation_h2_dimension_formula():
    """dim H2 of the class-n quotient splits as the low-degree Hopf dims
    plus the top-weight correction dim L_n - dim J_n."""
    from lieobstruct.freelie import hall_basis_derived
    from lieobstruct.fplie import ideal_span

    for name in ("pres_cubic", "pres_torus"):
        p = load_presentation(data_path(name + ".json"))
        fp = h2_graded(p, 6)
        for n in (3, 4, 5):
            g = lcs_quotient(p, n)
            witt_n = sum(
                1 for w in hall_basis_derived(len(p.generators), 0, n)
                if w.degree == n
            )
            j_n = ideal_span(p, n).dim - ideal_span(p, n - 1).dim
            expected = sum(fp.get(k, 0) for k in range(2, n + 1)) + witt_n - j_n
            assert lie_homology(g, 2) == expected


# ---------------------------------------------------------------------------
# flat connections


def test_zero_connection_is_flat():
    assert is_flat(HEIS, HEIS_ALG, {})


def test_canonical_connections_are_flat():
    for a in ALL_CDGAS:
        for n in range(2, 6):
            g, omega = canonical_connection(a, n)
            assert is_flat(a, g, omega)


def test_nonflat_connection_detected():
    g = lcs_quotient(FREE2, 3)
    omega = {(0, 0): ONE, (1, 1): ONE}
    # on the torus algebra a1.a2 is the top class, so the bracket term of
    # the Maurer-Cartan equation cannot cancel
    assert not is_flat(TORUS, g, omega)
    with pytest.raises(CeError):
        flat_to_morphism(TORUS, g, omega)


def test_connection_entries_validated():
    with pytest.raises(CeError):
        is_flat(HEIS, HEIS_ALG, {(7, 0): ONE})
    with pytest.raises(CeError):
        is_flat(HEIS, HEIS_ALG, {(0, 9): ONE})
    with pytest.raises(CeError):
        is_flat(HEIS, HEIS_ALG, {(0, 0): 0.5})


@settings(max_examples=25, deadline=None)
@given(
    st.dictionaries(
        st.tuples(st.integers(0, 1), st.integers(0, 1)),
        st.fractions(min_value=-3, max_value=3),
        max_size=4,
    )
)
def test_abelian_target_makes_everything_flat(omega):
    """With zero differential and an abelian target both Maurer-Cartan
    terms vanish identically."""
    g = abelian(2)
    omega = {k: v for k, v in omega.items() if v}
    assert is_flat(WEDGE2, g, omega)


def test_flat_morphism_recovers_connection():
    g, omega = canonical_connection(HEIS, 3)
    f = flat_to_morphism(HEIS, g, omega)
    assert dict(f.maps[1].entries) == omega
    # u3 is sent to -a3
    assert f.apply(1, {2: ONE}) == {2: Fraction(-1)}
    # multiplicativity forces u1^u2 to a12
    assert f.apply(2, {0: ONE}) == {0: ONE}


def test_zero_connection_morphism_kills_positive_degrees():
    f = flat_to_morphism(HEIS, HEIS_ALG, {})
    for i in range(1, 4):
        assert not f.maps[i].entries


def test_flat_lie_map_canonical_is_projection():
    g, omega = canonical_connection(HEIS, 3)
    images = flat_to_lie_map(HEIS, g, omega)
    assert images == g.gen_images


def test_flat_lie_map_zero_and_abelian():
    assert flat_to_lie_map(HEIS, HEIS_ALG, {}) == ({}, {}, {})
    g = abelian(2)
    images = flat_to_lie_map(TORUS, g, {(0, 0): ONE, (1, 1): ONE})
    assert images == ({0: ONE}, {1: ONE})


def test_flat_lie_map_rejects_nonflat():
    with pytest.raises(CeError):
        flat_to_lie_map(TORUS, lcs_quotient(FREE2, 3), {(0, 0): ONE, (1, 1): ONE})


# ---------------------------------------------------------------------------
# classifying maps


def test_classifying_stage_two():
    f = classifying_stage(HEIS, 2)
    # the class-2 quotient is the 2-dimensional abelianization
    assert f.source.dim(1) == 2
    assert dict(f.maps[1].entries) == {(0, 0): ONE, (1, 1): ONE}


def test_classifying_stage_three_gains_a_weight_two_class():
    f = classifying_stage(HEIS, 3)
    assert f.source.dim(1) == 3
    assert f.apply(1, {2: ONE}) == {2: Fraction(-1)}


def test_classifying_stages_are_tower_compatible():
    tower = tower_from_cdga(HEIS, 3)
    f2 = classifying_stage(HEIS, 2)
    f3 = classifying_stage(HEIS, 3)
    composed = f3.compose(tower.inclusions[2])
    assert composed.maps == f2.maps


def test_classifying_stage_needs_two():
    with pytest.raises(CeError):
        classifying_stage(HEIS, 1)


# ---------------------------------------------------------------------------
# finite-stage one-equivalence


def test_one_equivalence_all_examples():
    for a in ALL_CDGAS:
        for n in (2, 3, 4):
            out = verify_one_equivalence(a, n)
            assert out == {"h1_iso": True, "h2_kernel_inclusion": True}


def test_one_equivalence_needs_stage_two():
    with pytest.raises(CeError):
        verify_one_equivalence(HEIS, 1)


# ---------------------------------------------------------------------------
# towers


def test_tower_stage_dims():
    t = tower_from_cdga(HEIS, 5)
    assert {n: c.algebra.dim for n, c in t.stages.items()} == {2: 2, 3: 3, 4: 3, 5: 3}
    t = tower_from_cdga(WEDGE2, 5)
    # free Lie algebra on two generators: 2, 1, 2, 3 new classes per weight
    assert {n: c.algebra.dim for n, c in t.stages.items()} == {2: 2, 3: 3, 4: 5, 5: 8}


def test_tower_inclusions_are_hirsch_extensions():
    for a in ALL_CDGAS:
        t = tower_from_cdga(a, 5)
        for n in range(2, 5):
            small = t.stages[n]
            big = t.stages[n + 1]
            ds = small.algebra.dim
            for (row, col) in big.cdga.diff[1].entries:
                if col >= ds:
                    i, j = big.tuples[2][row]
                    assert i < ds and j < ds


def test_tower_h1_is_stable():
    t = tower_from_cdga(NONCARNOT, 5)
    for n in range(2, 6):
        assert cohomology(t.stages[n].cdga, 1)[0] == 3


def test_tower_needs_stage_two():
    with pytest.raises(CeError):
        hirsch_tower(FREE2, 1)


def test_tower_from_presentation():
    t = hirsch_tower(load_presentation(data_path("free_metabelian.json")), 4)
    assert {n: c.algebra.dim for n, c in t.stages.items()} == {2: 2, 3: 3, 4: 5}


# ---------------------------------------------------------------------------
# stability and the canonical filtration


def test_stability_all_stage_pairs():
    for a in ALL_CDGAS:
        t = tower_from_cdga(a, 5)
        for n in range(2, 5):
            for m in range(n + 1, 6):
                assert check_stability(t, m, n) == {"prop_i": True, "prop_ii": True}


def test_stability_validates_stage_order():
    t = tower_from_cdga(TORUS, 3)
    with pytest.raises(CeError):
        check_stability(t, 2, 2)
    with pytest.raises(CeError):
        check_stability(t, 4, 2)


def test_canonical_filtration_matches_defining_filtration():
    for a in ALL_CDGAS:
        report = canonical_filtration(tower_from_cdga(a, 5))
        assert report["all_equal"]
        for stage, row in report["stages"].items():
            assert row["w_dim"] == row["v_dim"]


def test_filtration_starts_at_closed_generators():
    """W^2 is the kernel of d on degree-one generators."""
    t = tower_from_cdga(NONCARNOT, 5)
    report = canonical_filtration(t)
    top = t.stages[5].cdga
    closed = sum(
        1 for k in range(top.dim(1)) if not top.d_apply(1, {k: ONE})
    )
    assert report["stages"][2]["w_dim"] == closed
