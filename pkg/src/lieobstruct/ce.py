"""Chevalley-Eilenberg complexes of nilpotent Lie algebras, flat connections,
classifying maps, and the stability checks on towers of nilpotent quotients.

The cochain complex of a finite-dimensional nilpotent Lie algebra is built as
a finite cdga on the exterior algebra of the dual space, with d = -beta* on
generators extended by the graded Leibniz rule; the chain complex carries the
boundary del_n(x_1 ^ ... ^ x_n) = sum over i < j of (-1)^(i+j)
[x_i, x_j] ^ (the rest).  On top of those sit Maurer-Cartan connections
(d omega + 1/2 [omega, omega] = 0), the cdga morphisms C(g) -> A they induce,
the canonical connections of the holonomy tower, and the finite-stage
1-equivalence, stability, and canonical-filtration checks.

Exterior bases are tuples of strictly increasing basis indices; every sign
comes from counting transpositions, so results are bit-for-bit reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

from .cdga import (
    CdgaMorphism,
    FiniteCdga,
    holonomy,
    induced_cohomology_matrix,
)
from .fplie import NilpotentLieAlgebra, lcs_quotient
from .ratlin import (
    ONE,
    ZERO,
    EchelonForm,
    SparseMatrix,
    Subspace,
    kernel,
    rank,
    scal,
    vec_add,
)

__all__ = [
    "CeComplex",
    "CeError",
    "HirschTower",
    "canonical_connection",
    "canonical_filtration",
    "ce_chain_boundary",
    "ce_cochain",
    "check_stability",
    "classifying_stage",
    "flat_to_lie_map",
    "flat_to_morphism",
    "hirsch_tower",
    "is_flat",
    "lie_homology",
    "lie_homology_by_weight",
    "tower_from_cdga",
    "verify_one_equivalence",
]


class CeError(ValueError):
    pass


def _merge_wedge(t1: tuple, t2: tuple):
    """Concatenate two strictly increasing index tuples into one, returning
    (sign, sorted tuple) or None when an index repeats."""
    merged = list(t1)
    sign = 1
    for x in t2:
        pos = len(merged)
        while pos > 0 and merged[pos - 1] > x:
            pos -= 1
        if pos > 0 and merged[pos - 1] == x:
            return None
        if (len(merged) - pos) % 2 == 1:
            sign = -sign
        merged.insert(pos, x)
    return sign, tuple(merged)


@dataclass(frozen=True)
class CeComplex:
    """Cochain cdga of a nilpotent Lie algebra through degree cap, together
    with the exterior index tuples backing each named basis element."""

    algebra: NilpotentLieAlgebra
    cap: int
    cdga: FiniteCdga
    tuples: tuple
    positions: tuple = field(repr=False)


def ce_cochain(g: NilpotentLieAlgebra, degree_cap: int = 3) -> CeComplex:
    """The Chevalley-Eilenberg cochain cdga of g through degree_cap."""
    if degree_cap < 2:
        raise CeError(f"cochain degree cap must be >= 2, got {degree_cap}")
    if degree_cap > 3:
        raise CeError("cochain degree cap above 3 is not supported")
    if not g.check_jacobi():
        raise CeError("structure constants fail the Jacobi identity")
    m = g.dim
    tuples = [((),)]
    for n in range(1, degree_cap + 1):
        tuples.append(tuple(combinations(range(m), n)))
    positions = tuple({t: i for i, t in enumerate(row)} for row in tuples)
    names = [("1",)]
    for n in range(1, degree_cap + 1):
        names.append(
            tuple("^".join(f"u{i + 1}" for i in t) for t in tuples[n])
        )

    def d_generator(k: int) -> dict:
        out = {}
        for (i, j), table in g.brackets.items():
            c = table.get(k)
            if c:
                pos = positions[2][(i, j)]
                out[pos] = out.get(pos, ZERO) - c
        return {p: c for p, c in out.items() if c}

    diff_entries = [dict() for _ in range(degree_cap + 1)]
    for k in range(m):
        for p, c in d_generator(k).items():
            diff_entries[1][(p, k)] = c
    if degree_cap >= 3:
        for col, (i, j) in enumerate(tuples[2]):
            acc: dict = {}
            for factor, other, sgn in ((i, j, 1), (j, i, -1)):
                for p, c in d_generator(factor).items():
                    w = _merge_wedge(tuples[2][p], (other,))
                    if w is None:
                        continue
                    ws, wt = w
                    pos = positions[3][wt]
                    acc[pos] = acc.get(pos, ZERO) + sgn * ws * c
            for pos, c in acc.items():
                if c:
                    diff_entries[2][(pos, col)] = c
    diff = []
    for n in range(degree_cap + 1):
        rows = len(tuples[n + 1]) if n + 1 <= degree_cap else 0
        diff.append(SparseMatrix(rows, len(tuples[n]), diff_entries[n]))

    prod = {}
    for i in range(1, degree_cap):
        for j in range(1, degree_cap + 1 - i):
            table = {}
            for a, ta in enumerate(tuples[i]):
                for b, tb in enumerate(tuples[j]):
                    w = _merge_wedge(ta, tb)
                    if w is None:
                        continue
                    sgn, wt = w
                    table[(a, b)] = {positions[i + j][wt]: scal(sgn)}
            if table:
                prod[(i, j)] = table
    cdga = FiniteCdga(tuple(names), tuple(diff), prod)
    return CeComplex(g, degree_cap, cdga, tuple(tuple(r) for r in tuples), positions)


# ---------------------------------------------------------------------------
# chain complex and homology

def ce_chain_boundary(g: NilpotentLieAlgebra, n: int) -> SparseMatrix:
    """The boundary matrix from the n-th to the (n-1)-st exterior power."""
    if n < 0:
        raise CeError(f"chain degree must be >= 0, got {n}")
    m = g.dim
    if n == 0:
        return SparseMatrix(0, 1, {})
    cols = list(combinations(range(m), n))
    rows = {t: i for i, t in enumerate(combinations(range(m), n - 1))}
    entries: dict = {}
    for col, t in enumerate(cols):
        for a in range(n):
            for b in range(a + 1, n):
                br = g.bracket_vec({t[a]: ONE}, {t[b]: ONE})
                if not br:
                    continue
                rest = t[:a] + t[a + 1:b] + t[b + 1:]
                sign0 = 1 if (a + b) % 2 == 0 else -1
                for k, c in br.items():
                    w = _merge_wedge(rest, (k,))
                    if w is None:
                        continue
                    sgn, wt = w
                    key = (rows[wt], col)
                    v = entries.get(key, ZERO) + sign0 * sgn * c
                    if v:
                        entries[key] = v
                    else:
                        del entries[key]
    return SparseMatrix(len(rows), len(cols), entries)


def lie_homology(g: NilpotentLieAlgebra, n: int) -> int:
    """dim H_n(g) = dim ker(del_n) - rank(del_(n+1))."""
    if n < 0:
        raise CeError(f"homology degree must be >= 0, got {n}")
    dim_n = comb(g.dim, n)
    return dim_n - rank(ce_chain_boundary(g, n)) - rank(ce_chain_boundary(g, n + 1))


def _require_graded(g: NilpotentLieAlgebra):
    for (i, j), table in g.brackets.items():
        for k, c in table.items():
            if c and g.weights[k] != g.weights[i] + g.weights[j]:
                raise CeError(
                    "weight-split homology needs strictly graded structure "
                    "constants"
                )


def lie_homology_by_weight(g: NilpotentLieAlgebra, n: int) -> dict:
    """dim of the weight-w piece of H_n(g), for a weight-graded g."""
    if n < 0:
        raise CeError(f"homology degree must be >= 0, got {n}")
    _require_graded(g)

    def tuple_weight(t):
        return sum(g.weights[i] for i in t)

    def ranks_by_weight(step):
        mat = ce_chain_boundary(g, step)
        cols = list(combinations(range(g.dim), step))
        echs: dict = {}
        for j, t in enumerate(cols):
            col = mat.col(j)
            if col:
                echs.setdefault(tuple_weight(t), EchelonForm()).insert(col)
        return {w: e.rank for w, e in echs.items()}

    counts: dict = {}
    for t in combinations(range(g.dim), n):
        w = tuple_weight(t)
        counts[w] = counts.get(w, 0) + 1
    r_n = ranks_by_weight(n) if n >= 1 else {}
    r_next = ranks_by_weight(n + 1)
    out = {}
    for w, c in sorted(counts.items()):
        d = c - r_n.get(w, 0) - r_next.get(w, 0)
        if d:
            out[w] = d
    return out


# ---------------------------------------------------------------------------
# flat connections

def _connection_columns(a: FiniteCdga, g: NilpotentLieAlgebra, omega: dict):
    """omega as one A^1 column per Lie algebra basis index, validated."""
    cols: dict = {}
    for key, c in omega.items():
        try:
            i, k = key
        except (TypeError, ValueError):
            raise CeError("connection entries are keyed by (cdga index, g index)")
        if not 0 <= i < a.dim(1) or not 0 <= k < g.dim:
            raise CeError(f"connection entry {key} out of range")
        try:
            c = scal(c)
        except ValueError as exc:
            raise CeError(str(exc)) from exc
        if c:
            cols.setdefault(k, {})[i] = c
    return cols


def _mc_defect(a: FiniteCdga, g: NilpotentLieAlgebra, omega: dict) -> dict:
    """d omega + 1/2 [omega, omega] as one A^2 vector per g basis index."""
    cols = _connection_columns(a, g, omega)
    defect = {}
    for k, col in cols.items():
        v: dict = {}
        for i, c in col.items():
            v = vec_add(v, a.d_apply(1, {i: ONE}), c)
        if v:
            defect[k] = v
    for k in sorted(cols):
        for l in sorted(cols):
            if l <= k:
                continue
            br = g.bracket_vec({k: ONE}, {l: ONE})
            if not br:
                continue
            pair = a.mul(1, cols[k], 1, cols[l])
            if not pair:
                continue
            for r, c in br.items():
                cur = vec_add(defect.get(r, {}), pair, c)
                if cur:
                    defect[r] = cur
                elif r in defect:
                    del defect[r]
    return {k: v for k, v in defect.items() if v}


def is_flat(a: FiniteCdga, g: NilpotentLieAlgebra, omega: dict) -> bool:
    """Whether d omega + 1/2 [omega, omega] = 0 in A^2 tensor g."""
    return not _mc_defect(a, g, omega)


def _morphism_from_connection(a, ce: CeComplex, omega: dict) -> CdgaMorphism:
    g = ce.algebra
    cols = _connection_columns(a, g, omega)
    maps = [SparseMatrix.identity(1)]
    entries = {}
    for k, col in cols.items():
        for i, c in col.items():
            entries[(i, k)] = c
    maps.append(SparseMatrix(a.dim(1), g.dim, entries))

    def image1(k):
        return dict(cols.get(k, {}))

    entries2 = {}
    for pos, (k, l) in enumerate(ce.tuples[2]):
        v = a.mul(1, image1(k), 1, image1(l))
        for r, c in v.items():
            entries2[(r, pos)] = c
    maps.append(SparseMatrix(a.dim(2), len(ce.tuples[2]), entries2))
    if ce.cap >= 3:
        entries3 = {}
        for pos, (k, l, r) in enumerate(ce.tuples[3]):
            tail = maps[2].col(ce.positions[2][(l, r)])
            v = a.mul(1, image1(k), 2, tail)
            for row, c in v.items():
                entries3[(row, pos)] = c
        maps.append(SparseMatrix(a.dim(3), len(ce.tuples[3]), entries3))
    return CdgaMorphism(ce.cdga, a, tuple(maps))


def flat_to_morphism(a: FiniteCdga, g: NilpotentLieAlgebra, omega: dict) -> CdgaMorphism:
    """The cdga morphism C(g) -> a induced by a flat connection; degree 1 is
    the transpose of omega's matrix and higher degrees are forced by
    multiplicativity."""
    if not is_flat(a, g, omega):
        raise CeError("connection is not flat")
    return _morphism_from_connection(a, ce_cochain(g, 3), omega)


def _evaluate_element(g: NilpotentLieAlgebra, elem, images) -> dict:
    memo: dict = {}

    def value(word):
        got = memo.get(word)
        if got is not None:
            return got
        if word.level == 0 and word.children is None:
            v = dict(images[word.gen])
        else:
            v = value(word.children[0])
            for child in word.children[1:]:
                v = g.bracket_vec(v, value(child))
        memo[word] = v
        return v

    out: dict = {}
    for word, c in elem.terms.items():
        out = vec_add(out, value(word), c)
    return out


def flat_to_lie_map(a: FiniteCdga, g: NilpotentLieAlgebra, omega: dict):
    """Images of the holonomy generators under the Lie morphism h(a) -> g
    matching a flat connection; every relator is checked to die in g."""
    if not is_flat(a, g, omega):
        raise CeError("connection is not flat")
    cols = _connection_columns(a, g, omega)
    p = holonomy(a)
    images = []
    for i in range(len(p.generators)):
        img: dict = {}
        for k, col in cols.items():
            c = col.get(i)
            if c:
                img[k] = c
        images.append(img)
    for rel in p.scheme.relators:
        if _evaluate_element(g, rel, images):
            raise CeError(
                "holonomy relator does not vanish in the target; the "
                "connection does not define a Lie morphism"
            )
    return tuple(images)


# ---------------------------------------------------------------------------
# canonical connections and classifying maps

def canonical_connection(a: FiniteCdga, n: int):
    """(h(a)/Gamma_n, the canonical connection omega_n): each degree-1 basis
    element pairs with the class of its dual holonomy generator."""
    if n < 1:
        raise CeError(f"stage must be >= 1, got {n}")
    g = lcs_quotient(holonomy(a), n)
    omega = {}
    for i, img in enumerate(g.gen_images):
        for k, c in img.items():
            omega[(i, k)] = c
    return g, omega


def classifying_stage(a: FiniteCdga, n: int) -> CdgaMorphism:
    """The stage-n classifying map C(h(a)/Gamma_n) -> a at the canonical
    connection."""
    if n < 2:
        raise CeError(f"classifying stage must be >= 2, got {n}")
    g, omega = canonical_connection(a, n)
    if not is_flat(a, g, omega):
        raise CeError("canonical connection failed the Maurer-Cartan check")
    return _morphism_from_connection(a, ce_cochain(g, 3), omega)


# ---------------------------------------------------------------------------
# towers

@dataclass(frozen=True)
class HirschTower:
    """Chevalley-Eilenberg stages C(h/Gamma_n) for 2 <= n <= max_stage, with
    the stage-to-stage inclusions; consecutive stages differ by a Hirsch
    extension in degree 1."""

    presentation: object
    max_stage: int
    stages: dict
    inclusions: dict


def _stage_inclusion(small: CeComplex, big: CeComplex) -> CdgaMorphism:
    ds = small.algebra.dim
    if big.algebra.labels[:ds] != small.algebra.labels:
        raise CeError("tower stages do not share a compatible basis")
    maps = [SparseMatrix.identity(1)]
    maps.append(
        SparseMatrix(big.algebra.dim, ds, {(k, k): ONE for k in range(ds)})
    )
    for deg in (2, 3):
        if deg > small.cap:
            break
        entries = {}
        for col, t in enumerate(small.tuples[deg]):
            entries[(big.positions[deg][t], col)] = ONE
        maps.append(
            SparseMatrix(len(big.tuples[deg]), len(small.tuples[deg]), entries)
        )
    return CdgaMorphism(small.cdga, big.cdga, tuple(maps))


def hirsch_tower(p, max_stage: int = 5) -> HirschTower:
    """Stages 2..max_stage of the tower of cochain cdgas of the nilpotent
    quotients of a finitely presented Lie algebra."""
    if max_stage < 2:
        raise CeError(f"tower needs max stage >= 2, got {max_stage}")
    stages = {}
    for n in range(2, max_stage + 1):
        stages[n] = ce_cochain(lcs_quotient(p, n), 3)
    inclusions = {}
    for n in range(2, max_stage):
        small, big = stages[n], stages[n + 1]
        incl = _stage_inclusion(small, big)
        ds = small.algebra.dim
        for k in range(ds, big.algebra.dim):
            for (row, col) in big.cdga.diff[1].entries:
                if col != k:
                    continue
                i, j = big.tuples[2][row]
                if i >= ds or j >= ds:
                    raise CeError(
                        f"stage {n + 1} is not a Hirsch extension of stage {n}"
                    )
        inclusions[n] = incl
    return HirschTower(p, max_stage, stages, inclusions)


def tower_from_cdga(a: FiniteCdga, max_stage: int = 5) -> HirschTower:
    return hirsch_tower(holonomy(a), max_stage)


# ---------------------------------------------------------------------------
# stage checks

def verify_one_equivalence(a: FiniteCdga, n: int) -> dict:
    """Finite-stage form of the classifying map being a 1-minimal model map:
    H^1(f_n) bijective, and every H^2 class of stage n killed by f_n already
    dies one stage up the tower."""
    if n < 2:
        raise CeError(f"stage must be >= 2, got {n}")
    p = holonomy(a)
    g_n = lcs_quotient(p, n)
    g_next = lcs_quotient(p, n + 1)
    ce_n = ce_cochain(g_n, 3)
    ce_next = ce_cochain(g_next, 3)
    omega = {}
    for i, img in enumerate(g_n.gen_images):
        for k, c in img.items():
            omega[(i, k)] = c
    if not is_flat(a, g_n, omega):
        raise CeError("canonical connection failed the Maurer-Cartan check")
    f = _morphism_from_connection(a, ce_n, omega)
    h1 = induced_cohomology_matrix(f, 1)
    h1_iso = h1.rows == h1.cols and rank(h1) == h1.rows
    m_f = induced_cohomology_matrix(f, 2)
    m_q = induced_cohomology_matrix(_stage_inclusion(ce_n, ce_next), 2)
    ker_f = kernel(m_f)
    ker_q = kernel(m_q)
    return {
        "h1_iso": h1_iso,
        "h2_kernel_inclusion": ker_q.contains_space(ker_f),
    }


def check_stability(tower: HirschTower, m: int, n: int) -> dict:
    """Stability of the defining filtration between stages n < m: the H^1
    stage map is bijective, and the H^2 kernel into stage m equals the H^2
    kernel into stage n+1."""
    if not 2 <= n < m <= tower.max_stage:
        raise CeError(f"need 2 <= n < m <= {tower.max_stage}, got n={n} m={m}")
    ce_n = tower.stages[n]
    incl_m = _stage_inclusion(ce_n, tower.stages[m])
    h1 = induced_cohomology_matrix(incl_m, 1)
    prop_i = h1.rows == h1.cols and rank(h1) == h1.rows
    k_m = kernel(induced_cohomology_matrix(incl_m, 2))
    k_next = kernel(
        induced_cohomology_matrix(_stage_inclusion(ce_n, tower.stages[n + 1]), 2)
    )
    prop_ii = k_m.contains_space(k_next) and k_next.contains_space(k_m)
    return {"prop_i": prop_i, "prop_ii": prop_ii}


def canonical_filtration(tower: HirschTower) -> dict:
    """Run the W filtration recursion W^(n+1) = (d restricted to V)^(-1) of
    the second exterior power of W^n inside the top stage, and compare with
    the defining filtration V^n = dual of h/Gamma_n."""
    top = tower.stages[tower.max_stage]
    mdim = top.algebra.dim
    d1 = top.cdga.diff[1]
    pair_count = len(top.tuples[2])

    def wedge_square(w: Subspace) -> EchelonForm:
        ech = EchelonForm()
        rows = w.basis_rows
        for r in range(len(rows)):
            for s in range(r + 1, len(rows)):
                vec = {}
                for (i, ci) in rows[r].items():
                    for (j, cj) in rows[s].items():
                        if i == j:
                            continue
                        if i < j:
                            key, val = (i, j), ci * cj
                        else:
                            key, val = (j, i), -ci * cj
                        pos = top.positions[2][key]
                        cur = vec.get(pos, ZERO) + val
                        if cur:
                            vec[pos] = cur
                        else:
                            del vec[pos]
                ech.insert(vec)
        return ech

    w = Subspace.span([], mdim)
    report = {}
    all_equal = True
    for stage in range(2, tower.max_stage + 1):
        ech = wedge_square(w)
        entries = {}
        for t in range(mdim):
            img = d1.matvec({t: ONE})
            res, _ = ech.reduce(img)
            for row, c in res.items():
                entries[(row, t)] = c
        w = kernel(SparseMatrix(pair_count, mdim, entries))
        v_dim = tower.stages[stage].algebra.dim
        expected = Subspace.span([{k: ONE} for k in range(v_dim)], mdim)
        equal = w == expected
        all_equal = all_equal and equal
        report[stage] = {"w_dim": w.dim, "v_dim": v_dim, "equal": equal}
    return {"stages": report, "all_equal": all_equal}
