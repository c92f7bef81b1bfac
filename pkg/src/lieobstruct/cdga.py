"""Finite connected commutative differential graded algebras in degrees <= 3.

A FiniteCdga is given by a named basis in each degree, a differential, and a
product table; the constructor checks connectedness, d^2 = 0, graded
commutativity, the Leibniz rule, and associativity exhaustively on the finite
bases, so anything that loads is actually a cdga.  Degrees above the top are
treated as zero (the quotient truncation), which keeps every rule consistent.

On top of that sit the operations this toolkit needs: the sub-cdga A[q]
generated in degrees <= q (same cohomology through q, monomorphism in q+1),
cohomology with explicit representatives, the holonomy Lie presentation dual
to d and the product on degree 1, resonance dimensions for twisted
differentials d + omega.(-), probing for nontrivial degree-1 resonance, and
fixed sub-cdgas of finite group actions via the averaging projector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .ratlin import (
    ONE,
    ZERO,
    EchelonForm,
    SparseMatrix,
    Subspace,
    kernel,
    rank,
    scal,
    scalar_to_json,
    vec_add,
)

__all__ = [
    "CdgaError",
    "CdgaMorphism",
    "FiniteCdga",
    "GroupAction",
    "action_from_dict",
    "cdga_from_dict",
    "cdga_to_dict",
    "cohomology",
    "fixed_subcdga",
    "format_cdga_element",
    "holonomy",
    "identity_morphism",
    "induced_cohomology_matrix",
    "is_q_equivalence",
    "load_action",
    "load_cdga",
    "parse_cdga_element",
    "resonance_dim",
    "resonance_membership",
    "resonance_trivial_probe",
    "truncate",
]


class CdgaError(ValueError):
    pass


def _clean(vec: dict) -> dict:
    return {k: v for k, v in vec.items() if v}


@dataclass(frozen=True)
class FiniteCdga:
    """names[i] is the basis of degree i (degree 0 is the unit alone);
    diff[i] is the matrix of d from degree i to i+1; prod[(i, j)][(a, b)]
    is the product of the a-th degree-i and b-th degree-j basis elements.

    The product table is stored complete for all ordered pairs of positive
    degrees with i + j <= top; absent entries are zero.
    """

    names: tuple
    diff: tuple
    prod: dict

    def __post_init__(self):
        if not self.names or len(self.names[0]) != 1:
            raise CdgaError("degree 0 must be the one-dimensional span of the unit")
        if self.top > 3:
            raise CdgaError(f"top degree {self.top} unsupported, need <= 3")
        seen = set()
        for i, row in enumerate(self.names):
            for nm in row:
                if not isinstance(nm, str) or not nm:
                    raise CdgaError("basis names must be nonempty strings")
                if nm in seen:
                    raise CdgaError(f"duplicate basis name {nm!r}")
                seen.add(nm)
        if len(self.diff) != self.top + 1:
            raise CdgaError("need one differential matrix per degree")
        for i, m in enumerate(self.diff):
            if (m.rows, m.cols) != (self.dim(i + 1), self.dim(i)):
                raise CdgaError(f"differential in degree {i} has the wrong shape")
        if not self.diff[0].is_zero():
            raise CdgaError("the unit must be closed")
        self._check_d_squared()
        self._check_commutativity()
        self._check_leibniz()
        self._check_associativity()

    # -- shape helpers ----------------------------------------------------

    @property
    def top(self) -> int:
        return len(self.names) - 1

    def dim(self, i: int) -> int:
        if 0 <= i <= self.top:
            return len(self.names[i])
        return 0

    def d_apply(self, i: int, vec: dict) -> dict:
        if 0 <= i <= self.top:
            return self.diff[i].matvec(vec)
        return {}

    def mul(self, i: int, u: dict, j: int, v: dict) -> dict:
        """Product of a degree-i and a degree-j element."""
        if i == 0:
            c = u.get(0, ZERO)
            return _clean({k: c * x for k, x in v.items()})
        if j == 0:
            c = v.get(0, ZERO)
            return _clean({k: c * x for k, x in u.items()})
        if i + j > self.top:
            return {}
        table = self.prod.get((i, j), {})
        out: dict = {}
        for a, x in u.items():
            for b, y in v.items():
                for k, c in table.get((a, b), {}).items():
                    z = out.get(k, ZERO) + x * y * c
                    if z:
                        out[k] = z
                    else:
                        del out[k]
        return out

    # -- load-time validation ---------------------------------------------

    def _check_d_squared(self):
        for i in range(self.top):
            for k in range(self.dim(i)):
                if self.d_apply(i + 1, self.d_apply(i, {k: ONE})):
                    raise CdgaError(
                        f"d^2 != 0 on {self.names[i][k]!r}"
                    )

    def _check_commutativity(self):
        for i in range(1, self.top):
            for j in range(i, self.top + 1 - i):
                sign = ONE if (i * j) % 2 == 0 else -ONE
                for a in range(self.dim(i)):
                    for b in range(self.dim(j)):
                        lhs = self.mul(i, {a: ONE}, j, {b: ONE})
                        rhs = self.mul(j, {b: ONE}, i, {a: ONE})
                        if lhs != {k: sign * c for k, c in rhs.items()}:
                            raise CdgaError(
                                "graded commutativity fails on "
                                f"{self.names[i][a]!r} * {self.names[j][b]!r}"
                            )

    def _check_leibniz(self):
        for i in range(1, self.top):
            for j in range(1, self.top + 1 - i):
                sign = ONE if i % 2 == 0 else -ONE
                for a in range(self.dim(i)):
                    da = self.d_apply(i, {a: ONE})
                    for b in range(self.dim(j)):
                        db = self.d_apply(j, {b: ONE})
                        lhs = self.d_apply(i + j, self.mul(i, {a: ONE}, j, {b: ONE}))
                        rhs = vec_add(
                            self.mul(i + 1, da, j, {b: ONE}),
                            self.mul(i, {a: ONE}, j + 1, db),
                            sign,
                        )
                        if lhs != rhs:
                            raise CdgaError(
                                "Leibniz rule fails on "
                                f"{self.names[i][a]!r} * {self.names[j][b]!r}"
                            )

    def _check_associativity(self):
        for i in range(1, self.top):
            for j in range(1, self.top + 1 - i):
                for k in range(1, self.top + 1 - i - j):
                    for a in range(self.dim(i)):
                        for b in range(self.dim(j)):
                            ab = self.mul(i, {a: ONE}, j, {b: ONE})
                            for c in range(self.dim(k)):
                                bc = self.mul(j, {b: ONE}, k, {c: ONE})
                                lhs = self.mul(i + j, ab, k, {c: ONE})
                                rhs = self.mul(i, {a: ONE}, j + k, bc)
                                if lhs != rhs:
                                    raise CdgaError(
                                        "associativity fails on "
                                        f"{self.names[i][a]!r}, {self.names[j][b]!r}, "
                                        f"{self.names[k][c]!r}"
                                    )


def format_cdga_element(a: FiniteCdga, i: int, vec: dict) -> str:
    if not vec:
        return "0"
    parts = []
    for k in sorted(vec):
        c = vec[k]
        nm = a.names[i][k]
        body = nm if abs(c) == 1 else f"{abs(c)}*{nm}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts)


# ---------------------------------------------------------------------------
# morphisms

@dataclass(frozen=True)
class CdgaMorphism:
    """Degreewise linear maps commuting with d and multiplicative on basis
    products.  maps[i] sends degree-i source coordinates to target ones;
    degrees above the source top are zero.  The top source degree is exempt
    from the d-compatibility check because the source differential there is
    zero by truncation."""

    source: FiniteCdga
    target: FiniteCdga
    maps: tuple

    def __post_init__(self):
        if len(self.maps) != self.source.top + 1:
            raise CdgaError("need one matrix per source degree")
        for i, m in enumerate(self.maps):
            if (m.rows, m.cols) != (self.target.dim(i), self.source.dim(i)):
                raise CdgaError(f"morphism matrix in degree {i} has the wrong shape")
        if self.apply(0, {0: ONE}) != {0: ONE}:
            raise CdgaError("morphism must send the unit to the unit")
        for i in range(self.source.top):
            for k in range(self.source.dim(i)):
                lhs = self.apply(i + 1, self.source.d_apply(i, {k: ONE}))
                rhs = self.target.d_apply(i, self.apply(i, {k: ONE}))
                if lhs != rhs:
                    raise CdgaError(
                        f"morphism does not commute with d on {self.source.names[i][k]!r}"
                    )
        for i in range(1, self.source.top):
            for j in range(i, self.source.top + 1 - i):
                for a in range(self.source.dim(i)):
                    fa = self.apply(i, {a: ONE})
                    for b in range(self.source.dim(j)):
                        fb = self.apply(j, {b: ONE})
                        lhs = self.apply(
                            i + j, self.source.mul(i, {a: ONE}, j, {b: ONE})
                        )
                        if lhs != self.target.mul(i, fa, j, fb):
                            raise CdgaError(
                                "morphism is not multiplicative on "
                                f"{self.source.names[i][a]!r} * {self.source.names[j][b]!r}"
                            )

    def apply(self, i: int, vec: dict) -> dict:
        if 0 <= i <= self.source.top:
            return self.maps[i].matvec(vec)
        return {}

    def compose(self, inner: "CdgaMorphism") -> "CdgaMorphism":
        """self after inner."""
        if inner.target is not self.source and inner.target != self.source:
            raise CdgaError("composition needs matching middle cdga")
        mats = []
        for i in range(inner.source.top + 1):
            if i <= self.source.top:
                mats.append(self.maps[i].matmul(inner.maps[i]))
            else:
                mats.append(SparseMatrix(self.target.dim(i), inner.source.dim(i), {}))
        return CdgaMorphism(inner.source, self.target, tuple(mats))


def identity_morphism(a: FiniteCdga) -> CdgaMorphism:
    return CdgaMorphism(
        a, a, tuple(SparseMatrix.identity(a.dim(i)) for i in range(a.top + 1))
    )


# ---------------------------------------------------------------------------
# cohomology

class _CohomologyData:
    """Cocycle representatives of H^i plus class coordinates of cocycles."""

    def __init__(self, a: FiniteCdga, i: int):
        self.a = a
        self.i = i
        self.ech = EchelonForm(track=True)
        self.rep_of_attempt = {}
        self.reps = []
        attempt = 0
        if i >= 1 and i - 1 <= a.top:
            for k in range(a.dim(i - 1)):
                self.ech.insert(a.d_apply(i - 1, {k: ONE}))
                attempt += 1
        if 0 <= i <= a.top:
            if i == a.top:
                cocycles = [{k: ONE} for k in range(a.dim(i))]
            else:
                cocycles = list(kernel(a.diff[i]).basis_rows)
            for vec in cocycles:
                res, _ = self.ech.insert(vec)
                if res:
                    self.rep_of_attempt[attempt] = len(self.reps)
                    self.reps.append(dict(vec))
                attempt += 1

    @property
    def dim(self) -> int:
        return len(self.reps)

    def class_coords(self, vec: dict) -> dict:
        """Coordinates of a cocycle's class over the representative basis."""
        res, combo = self.ech.reduce(vec)
        if res:
            raise CdgaError("class coordinates demanded for a non-cocycle")
        out = {}
        for attempt, c in (combo or {}).items():
            r = self.rep_of_attempt.get(attempt)
            if r is not None and c:
                out[r] = c
        return out


def cohomology(a: FiniteCdga, i: int):
    """(Betti number, cocycle representatives) in degree i."""
    if i < 0:
        raise CdgaError(f"degree must be >= 0, got {i}")
    if i > a.top:
        return 0, ()
    data = _CohomologyData(a, i)
    return data.dim, tuple(data.reps)


def induced_cohomology_matrix(f: CdgaMorphism, i: int) -> SparseMatrix:
    """Matrix of H^i(f) over the representative bases of source and target."""
    src = _CohomologyData(f.source, i) if i <= f.source.top else None
    tgt = _CohomologyData(f.target, i) if i <= f.target.top else None
    nsrc = src.dim if src else 0
    ntgt = tgt.dim if tgt else 0
    entries = {}
    if src and tgt:
        for col, rep in enumerate(src.reps):
            img = f.apply(i, rep)
            for row, c in tgt.class_coords(img).items():
                entries[(row, col)] = c
    return SparseMatrix(ntgt, nsrc, entries)


def is_q_equivalence(f: CdgaMorphism, q: int) -> bool:
    """H^i(f) bijective for i <= q and injective for i = q + 1."""
    for i in range(q + 2):
        m = induced_cohomology_matrix(f, i)
        r = rank(m)
        if r != m.cols:
            return False
        if i <= q and r != m.rows:
            return False
    return True


# ---------------------------------------------------------------------------
# truncation A[q]

def _degree_drop(a: FiniteCdga, new_top: int) -> FiniteCdga:
    """Quotient by everything above new_top."""
    if new_top >= a.top:
        return a
    names = a.names[: new_top + 1]
    diff = []
    for i in range(new_top + 1):
        rows = len(names[i + 1]) if i + 1 <= new_top else 0
        entries = {
            (r, c): v for (r, c), v in a.diff[i].entries.items() if r < rows
        } if rows else {}
        diff.append(SparseMatrix(rows, len(names[i]), entries))
    prod = {
        (i, j): table
        for (i, j), table in a.prod.items()
        if i + j <= new_top
    }
    return FiniteCdga(names, tuple(diff), prod)


def truncate(a: FiniteCdga, q: int):
    """The sub-cdga A[q] of the quotient A/(degrees > q+1), together with its
    inclusion: degrees <= q kept whole, degree q+1 cut down to
    d(A^q) + sum of products from positive degrees."""
    if q < 1:
        raise CdgaError(f"truncation level must be >= 1, got {q}")
    quot = _degree_drop(a, q + 1)
    top_dim = quot.dim(q + 1)
    span_vecs = []
    for k in range(quot.dim(q)):
        v = quot.d_apply(q, {k: ONE})
        if v:
            span_vecs.append(v)
    for i in range(1, q + 1):
        j = q + 1 - i
        if j < 1 or j > quot.top:
            continue
        for x in range(quot.dim(i)):
            for y in range(quot.dim(j)):
                v = quot.mul(i, {x: ONE}, j, {y: ONE})
                if v:
                    span_vecs.append(v)
    sub = Subspace.span(span_vecs, top_dim)
    if sub.dim == top_dim:
        return quot, identity_morphism(quot)
    names = list(quot.names[: q + 1])
    names.append(tuple(f"t{q + 1}_{r + 1}" for r in range(sub.dim)))

    def coords(vec: dict) -> dict:
        out = {r: vec.get(p, ZERO) for r, p in enumerate(sub.pivots)}
        return _clean(out)

    diff = []
    for i in range(q + 1):
        if i < q:
            diff.append(quot.diff[i])
        else:
            entries = {}
            for k in range(quot.dim(q)):
                for r, c in coords(quot.d_apply(q, {k: ONE})).items():
                    entries[(r, k)] = c
            diff.append(SparseMatrix(sub.dim, quot.dim(q), entries))
    diff.append(SparseMatrix(0, sub.dim, {}))
    prod = {}
    for (i, j), table in quot.prod.items():
        if i + j <= q:
            prod[(i, j)] = table
        elif i + j == q + 1:
            new_table = {}
            for (x, y), val in table.items():
                cv = coords(val)
                if cv:
                    new_table[(x, y)] = cv
            if new_table:
                prod[(i, j)] = new_table
    out = FiniteCdga(tuple(names), tuple(diff), prod)
    mats = [SparseMatrix.identity(quot.dim(i)) for i in range(q + 1)]
    entries = {}
    for r, row in enumerate(sub.basis_rows):
        for k, c in row.items():
            entries[(k, r)] = c
    mats.append(SparseMatrix(quot.dim(q + 1), sub.dim, entries))
    incl = CdgaMorphism(out, quot, tuple(mats))
    return out, incl


# ---------------------------------------------------------------------------
# holonomy presentation

def holonomy(a: FiniteCdga):
    """The Lie presentation dual to (d, product) on A[1]: one generator per
    degree-1 basis element, one relator per degree-2 basis element of A[1],
    each relator the sum of the dual of d and the dual of the product."""
    from .fplie import FiniteList, LiePresentation
    from .freelie import LieElement, bracket, gen_elt

    a1, _ = truncate(a, 1)
    g = a1.dim(1)
    gens = tuple(f"x{i + 1}" for i in range(g))
    relators = []
    for k in range(a1.dim(2)):
        rel = LieElement(g, {})
        for i in range(g):
            c = a1.d_apply(1, {i: ONE}).get(k, ZERO)
            if c:
                rel = rel + c * gen_elt(g, i)
        for i in range(g):
            for j in range(i + 1, g):
                c = a1.mul(1, {i: ONE}, 1, {j: ONE}).get(k, ZERO)
                if c:
                    rel = rel + c * bracket(gen_elt(g, i), gen_elt(g, j))
        if not rel.is_zero():
            relators.append(rel)
    return LiePresentation(gens, FiniteList(tuple(relators)))


# ---------------------------------------------------------------------------
# resonance

def _twisted_matrix(a: FiniteCdga, omega: dict, i: int) -> SparseMatrix:
    entries = {}
    rows = a.dim(i + 1)
    for k in range(a.dim(i)):
        v = vec_add(a.d_apply(i, {k: ONE}), a.mul(1, omega, i, {k: ONE}))
        for r, c in v.items():
            entries[(r, k)] = c
    return SparseMatrix(rows, a.dim(i), entries)


def _require_cocycle(a: FiniteCdga, omega: dict):
    omega = _clean({k: scal(c) for k, c in omega.items()})
    if any(k < 0 or k >= a.dim(1) for k in omega):
        raise CdgaError("resonance point is not a degree-1 vector")
    if a.d_apply(1, omega):
        raise CdgaError("resonance point must be a closed degree-1 element")
    return omega


def resonance_dim(a: FiniteCdga, omega: dict, i: int) -> int:
    """dim H^i of the complex twisted by a closed degree-1 element."""
    omega = _require_cocycle(a, omega)
    if not 0 <= i <= a.top - 1:
        raise CdgaError(f"degree {i} out of range for resonance (top {a.top})")
    sq = _twisted_matrix(a, omega, i)
    # the twisted differential squares to zero because omega is closed and
    # degree-1 squares vanish; spot-check it before trusting the ranks
    if i + 1 <= a.top - 1:
        nxt = _twisted_matrix(a, omega, i + 1)
        assert nxt.matmul(sq).is_zero()
    r_i = rank(sq)
    r_prev = rank(_twisted_matrix(a, omega, i - 1)) if i >= 1 else 0
    return a.dim(i) - r_i - r_prev


def resonance_membership(a: FiniteCdga, omega: dict, i: int, r: int) -> bool:
    return resonance_dim(a, omega, i) >= r


def resonance_trivial_probe(a: FiniteCdga, trials: int = 20, seed: int = 0) -> dict:
    """Look for a nonzero degree-1 cohomology class with nontrivial degree-1
    resonance: basis classes first, then pairwise sums, then seeded random
    rational combinations.  Finding none proves nothing and is reported so.
    """
    import random

    b1, reps = cohomology(a, 1)
    if b1 < 1:
        raise CdgaError("resonance probe needs first Betti number >= 1")
    candidates = [dict(rep) for rep in reps]
    for r in range(b1):
        for s in range(r + 1, b1):
            candidates.append(vec_add(reps[r], reps[s]))
    rng = random.Random(seed)
    for _ in range(max(trials, 0)):
        vec: dict = {}
        for rep in reps:
            c = Fraction(rng.randint(-3, 3), rng.randint(1, 2))
            vec = vec_add(vec, rep, c)
        if vec:
            candidates.append(vec)
    tested = 0
    for omega in candidates:
        if not omega:
            continue
        tested += 1
        if resonance_membership(a, omega, 1, 1):
            certified = resonance_dim(a, omega, 1)
            return {
                "verdict": "nontrivial",
                "witness": {
                    a.names[1][k]: scalar_to_json(c) for k, c in sorted(omega.items())
                },
                "witness_dim": certified,
            }
    return {"verdict": "no-witness-found", "points_tested": tested}


# ---------------------------------------------------------------------------
# group actions and fixed sub-cdgas

@dataclass(frozen=True)
class GroupAction:
    """A finite group acting by cdga automorphisms: element names, the
    composition table (g, h) -> gh, and one morphism per element."""

    elements: tuple
    table: dict
    morphisms: dict

    def __post_init__(self):
        elts = self.elements
        if not elts:
            raise CdgaError("action needs at least the identity element")
        for g in elts:
            if g not in self.morphisms:
                raise CdgaError(f"no morphism for group element {g!r}")
        for g in elts:
            for h in elts:
                k = self.table.get((g, h))
                if k not in elts:
                    raise CdgaError(f"composition table incomplete at ({g!r}, {h!r})")
                got = self.morphisms[g].compose(self.morphisms[h])
                if got.maps != self.morphisms[k].maps:
                    raise CdgaError(
                        f"morphisms disagree with the table at ({g!r}, {h!r})"
                    )
        ident = None
        for e in elts:
            if all(self.table[(e, g)] == g and self.table[(g, e)] == g for g in elts):
                ident = e
                break
        if ident is None:
            raise CdgaError("composition table has no identity element")
        a = self.morphisms[ident].source
        if self.morphisms[ident].maps != identity_morphism(a).maps:
            raise CdgaError("identity element must act as the identity morphism")

    @property
    def cdga(self) -> FiniteCdga:
        return self.morphisms[self.elements[0]].source


def fixed_subcdga(action: GroupAction):
    """The sub-cdga of invariants, via the averaging projector, with its
    inclusion into the ambient cdga."""
    a = action.cdga
    order = Fraction(1, len(action.elements))
    projectors = []
    for i in range(a.top + 1):
        acc = SparseMatrix(a.dim(i), a.dim(i), {})
        for g in action.elements:
            acc = acc.add(action.morphisms[g].maps[i])
        p = acc.scale(order)
        assert p.matmul(p) == p
        projectors.append(p)
    for i in range(a.top):
        # the projector commutes with d because every group element does
        assert a.diff[i].matmul(projectors[i]) == projectors[i + 1].matmul(a.diff[i])
    subs = []
    for i in range(a.top + 1):
        vecs = [projectors[i].matvec({k: ONE}) for k in range(a.dim(i))]
        subs.append(Subspace.span([v for v in vecs if v], a.dim(i)))
    if subs[0].dim != 1:
        raise AssertionError("the unit must be invariant")

    def coords(i, vec):
        out = {r: vec.get(p, ZERO) for r, p in enumerate(subs[i].pivots)}
        out = _clean(out)
        check: dict = dict(vec)
        for r, c in out.items():
            check = vec_add(check, subs[i].basis_rows[r], -c)
        if check:
            raise AssertionError("vector claimed invariant is not in the span")
        return out

    names = [("1",)]
    for i in range(1, a.top + 1):
        names.append(tuple(f"inv{i}_{r + 1}" for r in range(subs[i].dim)))
    diff = []
    for i in range(a.top + 1):
        rows = subs[i + 1].dim if i + 1 <= a.top else 0
        entries = {}
        for k, row in enumerate(subs[i].basis_rows):
            dv = a.d_apply(i, dict(row))
            if dv:
                for r, c in coords(i + 1, dv).items():
                    entries[(r, k)] = c
        diff.append(SparseMatrix(rows, subs[i].dim, entries))
    prod = {}
    for i in range(1, a.top):
        for j in range(1, a.top + 1 - i):
            table = {}
            for x, rx in enumerate(subs[i].basis_rows):
                for y, ry in enumerate(subs[j].basis_rows):
                    v = a.mul(i, dict(rx), j, dict(ry))
                    if v:
                        table[(x, y)] = coords(i + j, v)
            if table:
                prod[(i, j)] = table
    fixed = FiniteCdga(tuple(names), tuple(diff), prod)
    mats = []
    for i in range(a.top + 1):
        entries = {}
        for r, row in enumerate(subs[i].basis_rows):
            for k, c in row.items():
                entries[(k, r)] = c
        mats.append(SparseMatrix(a.dim(i), subs[i].dim, entries))
    incl = CdgaMorphism(fixed, a, tuple(mats))
    return fixed, incl


# ---------------------------------------------------------------------------
# file format

class _ExprParser:
    """Sums of rational multiples of basis names and binary products."""

    def __init__(self, text, lookup, cdga_mul):
        self.text = text.replace(" ", "").replace("\t", "")
        self.pos = 0
        self.lookup = lookup
        self.mul = cdga_mul

    def error(self, msg):
        raise CdgaError(f"bad expression {self.text!r} at position {self.pos}: {msg}")

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self):
        if self.text == "0":
            return None
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
        degree, vec = self._term(sign)
        while self.peek() in ("+", "-"):
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
            d2, v2 = self._term(sign)
            if d2 != degree:
                self.error("mixed degrees in one expression")
            vec = vec_add(vec, v2)
        if self.pos != len(self.text):
            self.error("trailing input")
        return degree, _clean(vec)

    def _rational(self):
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

    def _name(self):
        start = self.pos
        while self.peek().isalnum() or self.peek() == "_":
            self.pos += 1
        nm = self.text[start:self.pos]
        if not nm:
            self.error("expected a basis name")
        if nm not in self.lookup:
            self.error(f"unknown basis name {nm!r}")
        return self.lookup[nm]

    def _term(self, sign):
        c = Fraction(sign)
        if self.peek().isdigit():
            c *= self._rational()
            if self.peek() != "*":
                self.error("a coefficient must be followed by '*'")
            self.pos += 1
        d1, k1 = self._name()
        vec = {k1: c}
        deg = d1
        while self.peek() == "*":
            self.pos += 1
            d2, k2 = self._name()
            vec = self.mul(deg, vec, d2, {k2: ONE})
            deg += d2
        return deg, vec


def cdga_from_dict(data: dict) -> FiniteCdga:
    if not isinstance(data, dict):
        raise CdgaError("cdga file must hold a JSON object")
    degrees = data.get("degrees")
    if not isinstance(degrees, dict) or not degrees:
        raise CdgaError('"degrees" must map degree strings to name lists')
    try:
        keys = sorted(int(k) for k in degrees)
    except ValueError as exc:
        raise CdgaError(f"bad degree key: {exc}") from exc
    if any(k < 1 for k in keys):
        raise CdgaError("degrees start at 1; the unit is implicit")
    top = max(keys)
    names = [("1",)]
    for i in range(1, top + 1):
        row = degrees.get(str(i), [])
        if not isinstance(row, list) or not all(isinstance(x, str) for x in row):
            raise CdgaError(f'"degrees"["{i}"] must be a list of names')
        names.append(tuple(row))
    lookup = {}
    for i, row in enumerate(names):
        for k, nm in enumerate(row):
            if nm in lookup:
                raise CdgaError(f"duplicate basis name {nm!r}")
            lookup[nm] = (i, k)

    # products first: both the differential and later consumers need them
    mu_raw = data.get("mu", {})
    if not isinstance(mu_raw, dict):
        raise CdgaError('"mu" must be an object')
    prod: dict = {}

    def put(i, a, j, b, vec):
        table = prod.setdefault((i, j), {})
        if (a, b) in table and table[(a, b)] != vec:
            raise CdgaError(
                f"conflicting products for {names[i][a]!r} * {names[j][b]!r}"
            )
        table[(a, b)] = vec

    for key, val in sorted(mu_raw.items()):
        parts = key.replace(" ", "").split("*")
        if len(parts) != 2:
            raise CdgaError(f"product key must be 'name*name', got {key!r}")
        left, right = parts
        if left not in lookup or right not in lookup:
            raise CdgaError(f"product key {key!r} uses an unknown name")
        (i, ai), (j, bj) = lookup[left], lookup[right]
        if i > j:
            raise CdgaError(
                f"list products with the lower degree first: {key!r}"
            )
        if i + j > top:
            raise CdgaError(f"product {key!r} lands above the top degree")

        def no_products(*_args):
            raise CdgaError(
                f"product value for {key!r} must be linear in basis names"
            )

        out = _ExprParser(str(val), lookup, no_products).parse()
        if out is None:
            vec = {}
        else:
            deg, vec = out
            if deg != i + j:
                raise CdgaError(f"product {key!r} has degree {deg}, want {i + j}")
        if vec:
            put(i, ai, j, bj, vec)
            sign = ONE if (i * j) % 2 == 0 else -ONE
            if (j, bj) != (i, ai):
                put(j, bj, i, ai, {k: sign * c for k, c in vec.items()})
    # odd-degree squares are zero by omission; nonzero ones would fail the
    # graded-commutativity check in the constructor

    def cdga_mul(i, u, j, v):
        if i == 0:
            c = u.get(0, ZERO)
            return _clean({k: c * x for k, x in v.items()})
        if j == 0:
            c = v.get(0, ZERO)
            return _clean({k: c * x for k, x in u.items()})
        if i + j > top:
            return {}
        table = prod.get((i, j), {})
        out: dict = {}
        for ax, x in u.items():
            for bx, y in v.items():
                for k, c in table.get((ax, bx), {}).items():
                    z = out.get(k, ZERO) + x * y * c
                    if z:
                        out[k] = z
                    else:
                        del out[k]
        return out

    d_raw = data.get("d", {})
    if not isinstance(d_raw, dict):
        raise CdgaError('"d" must be an object')
    diff_entries: dict = {}
    for nm, val in sorted(d_raw.items()):
        if nm not in lookup:
            raise CdgaError(f'"d" key {nm!r} is not a basis name')
        i, k = lookup[nm]
        out = _ExprParser(str(val), lookup, cdga_mul).parse()
        if out is None:
            continue
        deg, vec = out
        if deg != i + 1:
            raise CdgaError(f"d({nm}) has degree {deg}, want {i + 1}")
        for r, c in vec.items():
            diff_entries.setdefault(i, {})[(r, k)] = c
    diff = []
    for i in range(top + 1):
        rows = len(names[i + 1]) if i + 1 <= top else 0
        diff.append(SparseMatrix(rows, len(names[i]), diff_entries.get(i, {})))
    return FiniteCdga(tuple(names), tuple(diff), prod)


def cdga_to_dict(a: FiniteCdga) -> dict:
    degrees = {str(i): list(a.names[i]) for i in range(1, a.top + 1)}
    d = {}
    for i in range(1, a.top):
        for k in range(a.dim(i)):
            v = a.d_apply(i, {k: ONE})
            if v:
                d[a.names[i][k]] = format_cdga_element(a, i + 1, v).replace(" ", "")
    mu = {}
    for (i, j), table in sorted(a.prod.items()):
        if i > j:
            continue
        for (x, y), vec in sorted(table.items()):
            if i == j and x > y:
                continue
            mu[f"{a.names[i][x]}*{a.names[j][y]}"] = format_cdga_element(
                a, i + j, vec
            ).replace(" ", "")
    return {"degrees": degrees, "d": d, "mu": mu}


def parse_cdga_element(a: FiniteCdga, text: str):
    """Parse a sum of rational multiples of basis names, with optional binary
    products, into (degree, vector).  Zero parses to (None, {})."""
    lookup = {}
    for i, row in enumerate(a.names):
        for k, nm in enumerate(row):
            lookup[nm] = (i, k)
    out = _ExprParser(str(text), lookup, a.mul).parse()
    if out is None:
        return None, {}
    return out


def load_cdga(path) -> FiniteCdga:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CdgaError(f"{path}: invalid JSON: {exc}") from exc
    try:
        return cdga_from_dict(data)
    except CdgaError as exc:
        raise CdgaError(f"{path}: {exc}") from exc


def action_from_dict(a: FiniteCdga, data: dict) -> GroupAction:
    if not isinstance(data, dict):
        raise CdgaError("action file must hold a JSON object")
    elements = data.get("elements")
    if not isinstance(elements, list) or not elements:
        raise CdgaError('"elements" must be a nonempty list')
    table_raw = data.get("table", {})
    table = {}
    for key, val in table_raw.items():
        parts = key.split(",")
        if len(parts) != 2:
            raise CdgaError(f"table key must be 'g,h', got {key!r}")
        table[(parts[0], parts[1])] = val
    lookup = {}
    for i, row in enumerate(a.names):
        for k, nm in enumerate(row):
            lookup[nm] = (i, k)
    maps_raw = data.get("maps", {})
    morphisms = {}
    for g in elements:
        given = maps_raw.get(g, {})
        mats_entries = [dict() for _ in range(a.top + 1)]
        mats_entries[0][(0, 0)] = ONE
        for i in range(1, a.top + 1):
            for k, nm in enumerate(a.names[i]):
                val = given.get(nm, nm)
                out = _ExprParser(str(val), lookup, a.mul).parse()
                if out is None:
                    continue
                deg, vec = out
                if deg != i:
                    raise CdgaError(f"action image of {nm!r} has degree {deg}")
                for r, c in vec.items():
                    mats_entries[i][(r, k)] = c
        mats = tuple(
            SparseMatrix(a.dim(i), a.dim(i), mats_entries[i])
            for i in range(a.top + 1)
        )
        morphisms[g] = CdgaMorphism(a, a, mats)
    return GroupAction(tuple(elements), table, morphisms)


def load_action(a: FiniteCdga, path) -> GroupAction:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CdgaError(f"{path}: invalid JSON: {exc}") from exc
    try:
        return action_from_dict(a, data)
    except CdgaError as exc:
        raise CdgaError(f"{path}: {exc}") from exc
