"""Gottlieb groups, evaluation subgroups, the obstruction group O(f) and related invariants.

Homotopy groups are read dually: pi_n is identified with functionals on the
degree-n generators.  A functional is a dense coordinate vector over the list
of generator names of that degree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .cdga import KsExtension, Morphism, SullivanAlgebra, linear_part, surviving_base_indices
from .derivation import PhiDerivation, dual, identity_of, slice_along
from .errors import PreconditionError
from .linalg import RationalMatrix, SubspaceBasis, combinations_in_span, kernel_basis, solve_affine_in_subspace

MAX_PERMUTATIONS = 720


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


@dataclass(frozen=True)
class DualSubspace:
    """A subspace of Hom(W^n, Q), coordinates indexed by ``names``."""

    degree: int
    names: tuple
    basis: SubspaceBasis

    @classmethod
    def of(cls, degree: int, names, vectors=()) -> "DualSubspace":
        names = tuple(names)
        return cls(degree, names, SubspaceBasis.span(len(names), list(vectors)))

    @classmethod
    def spanned_by(cls, degree: int, names, chosen) -> "DualSubspace":
        names = tuple(names)
        return cls(degree, names, SubspaceBasis.coordinate(len(names), [names.index(c) for c in chosen]))

    @property
    def dim(self) -> int:
        return self.basis.dim

    def contains_dual(self, name: str) -> bool:
        return self.basis.contains({self.names.index(name): 1})

    def contains(self, vec) -> bool:
        return self.basis.contains(vec)

    def duals(self) -> list:
        """Basis elements rendered as combinations of dual generators."""
        out = []
        for row in self.basis.sparse_vectors():
            parts = []
            for k, (i, c) in enumerate(sorted(row.items())):
                name = f"{self.names[i]}*"
                a = abs(c)
                body = name if a == 1 else f"{_fmt(a)}*{name}"
                if k == 0:
                    parts.append(("-" if c < 0 else "") + body)
                else:
                    parts.append((" - " if c < 0 else " + ") + body)
            out.append("".join(parts))
        return out

    def coordinate_names(self) -> list:
        """Names whose duals lie in the subspace (exact for coordinate subspaces)."""
        return [n for n in self.names if self.contains_dual(n)]

    def __str__(self):
        return "span{" + ", ".join(self.duals()) + "}"


@dataclass
class GradedSubspace:
    per_degree: dict

    @property
    def dim(self) -> int:
        return sum(s.dim for s in self.per_degree.values())

    def __getitem__(self, n) -> DualSubspace:
        return self.per_degree[n]

    def duals(self) -> list:
        return [x for n in sorted(self.per_degree) for x in self.per_degree[n].duals()]

    def nonzero_degrees(self) -> list:
        return [n for n in sorted(self.per_degree) if self.per_degree[n].dim]


def _check_degree(alg: SullivanAlgebra, n: int):
    if n < 1:
        raise PreconditionError("Gottlieb computations need degree >= 1")
    if n == 1 and alg.generators_of_degree(1):
        raise PreconditionError("degree-1 duals are excluded when the algebra has degree-1 generators")


def _names_of_degree(alg: SullivanAlgebra, n: int) -> tuple:
    return tuple(alg.names[i] for i in alg.generators_of_degree(n))


def _constant_projection(slice_, names) -> SubspaceBasis:
    pos = {slice_.basis[k][0]: k for k in slice_.constant_positions()}
    cols = [pos[n] for n in names]
    return combinations_in_span(slice_.boundary, cols)


def gottlieb_group(alg: SullivanAlgebra, n: int) -> DualSubspace:
    """G_n: combinations of degree-n duals extending to delta-closed self-derivations."""
    _check_degree(alg, n)
    names = _names_of_degree(alg, n)
    if not names:
        return DualSubspace.of(n, names)
    sl = slice_along(identity_of(alg), n)
    return DualSubspace(n, names, _constant_projection(sl, names))


def evaluation_subgroup(ks: KsExtension, n: int) -> DualSubspace:
    """G_n(B, E; f): duals of base generators extending to closed derivations along the inclusion."""
    _check_degree(ks.total, n)
    names = _names_of_degree(ks.base, n)
    if not names:
        return DualSubspace.of(n, names)
    sl = slice_along(ks.inclusion, n)
    return DualSubspace(n, names, _constant_projection(sl, names))


def _along_degree_range(alg: SullivanAlgebra, max_degree: int | None):
    top = max((g.degree for g in alg.generators), default=0)
    if max_degree is not None:
        top = min(top, max_degree)
    low = 2 if alg.generators_of_degree(1) else 1
    return range(low, top + 1)


def gottlieb_groups(alg: SullivanAlgebra, max_degree: int | None = None) -> GradedSubspace:
    return GradedSubspace({n: gottlieb_group(alg, n) for n in _along_degree_range(alg, max_degree)})


def evaluation_subgroups(ks: KsExtension, max_degree: int | None = None) -> GradedSubspace:
    degs = _along_degree_range(ks.total, max_degree)
    return GradedSubspace({n: evaluation_subgroup(ks, n) for n in degs if n <= max((g.degree for g in ks.base.generators), default=0)})


# -- the obstruction group ---------------------------------------------------


@dataclass
class GeneratorDiagnostic:
    name: str
    degree: int
    surviving: bool
    condition_i: bool | None = None
    sigma: PhiDerivation | None = None  # delta_E(w* + sigma) = 0
    condition_ii: bool | None = None
    tau: PhiDerivation | None = None  # a violation: delta_B(w* + tau) = 0
    skipped: str | None = None

    @property
    def qualifies(self) -> bool:
        return bool(self.surviving and self.condition_i and self.condition_ii)

    def describe(self) -> str:
        if self.skipped:
            return f"{self.name}*: skipped ({self.skipped})"
        if not self.surviving:
            return f"{self.name}*: not surviving in H(W+V, Q(D))"
        parts = [f"{self.name}*:"]
        parts.append(f"(i) {'holds, sigma = ' + str(self.sigma) if self.condition_i else 'fails'};")
        parts.append(f"(ii) {'holds' if self.condition_ii else 'fails, tau = ' + str(self.tau)}")
        return " ".join(parts)


@dataclass
class ObstructionReport:
    order: tuple  # base generator order used for the conditions
    per_degree: dict  # degree -> DualSubspace (span of qualifying duals)
    diagnostics: list
    definition_b: dict  # degree -> dim of image of G_n(E) in pi_n(B)/G_n(B)
    permutation_discrepancies: list = field(default_factory=list)

    @property
    def o(self) -> int:
        return sum(s.dim for s in self.per_degree.values())

    @property
    def is_rg_map(self) -> bool:
        return self.o == 0

    def basis(self) -> list:
        return [x for n in sorted(self.per_degree) for x in self.per_degree[n].duals()]

    def qualifying(self) -> list:
        return [d.name for d in self.diagnostics if d.qualifies]

    @property
    def mismatches(self) -> list:
        """Degrees where the condition-based span and the image-quotient dimension disagree."""
        return [
            n
            for n in sorted(set(self.per_degree) | set(self.definition_b))
            if self.definition_b.get(n, 0) != (self.per_degree[n].dim if n in self.per_degree else 0)
        ]

    @property
    def consistent(self) -> bool:
        return not self.mismatches


def _affine_condition(slice_, target_name: str, killed) -> list | None:
    """x with delta(target* + x) = 0 and x(g) = 0 for every g in ``killed``; None if impossible."""
    one = slice_.along.target.ring.one_exps
    e = slice_.index[(target_name, one)]
    rhs = {r: -c for r, c in slice_.boundary.column(e).items()}
    killed = set(killed)
    free = [k for k, (g, _) in enumerate(slice_.basis) if g not in killed]
    space = SubspaceBasis.coordinate(len(slice_.basis), free)
    return solve_affine_in_subspace(slice_.boundary, rhs, space)


def _lemma_conditions(ks: KsExtension, order: tuple, survivors: set) -> list:
    out = []
    base = ks.base
    for pos, name in enumerate(order):
        g = base.generator(name)
        diag = GeneratorDiagnostic(name, g.degree, name in survivors)
        if g.degree == 1 and ks.total.generators_of_degree(1):
            diag.skipped = "degree 1"
            out.append(diag)
            continue
        if not diag.surviving:
            out.append(diag)
            continue
        killed = order[: pos + 1]
        tot = slice_along(identity_of(ks.total), g.degree)
        x = _affine_condition(tot, name, killed)
        diag.condition_i = x is not None
        if x is not None:
            diag.sigma = tot.derivation(x)
        bsl = slice_along(identity_of(base), g.degree)
        y = _affine_condition(bsl, name, killed)
        diag.condition_ii = y is None
        if y is not None:
            diag.tau = bsl.derivation(y)
        out.append(diag)
    return out


def _definition_b(ks: KsExtension, degrees) -> dict:
    out = {}
    for n in degrees:
        base_names = _names_of_degree(ks.base, n)
        if not base_names:
            continue
        gb = gottlieb_group(ks.base, n)
        ge = gottlieb_group(ks.total, n)
        pos = [ge.names.index(b) for b in base_names]
        restricted = []
        for row in ge.basis.sparse_vectors():
            restricted.append({k: row[p] for k, p in enumerate(pos) if p in row})
        u = SubspaceBasis.span(len(base_names), restricted)
        out[n] = (u + gb.basis).dim - gb.dim
    return out


def _degree_blocks(alg: SullivanAlgebra) -> list:
    return [list(grp) for _, grp in itertools.groupby(alg.names, key=lambda n: alg.generator(n).degree)]


def obstruction_group(ks: KsExtension, check_permutations: bool = False) -> ObstructionReport:
    """O(f) as the span of surviving base duals meeting the two derivation conditions.

    The base generator order is the declared one.  With ``check_permutations``
    the conditions are re-run over every reordering of equal-degree blocks
    (capped) and any change in the resulting span is reported.
    """
    base = ks.base
    if not base.is_ordered():
        raise PreconditionError("base generators must be declared in nondecreasing degree")
    survivors = {base.names[i] for i in surviving_base_indices(ks)}
    order = tuple(base.names)
    diags = _lemma_conditions(ks, order, survivors)
    per_degree = {}
    for n in sorted({g.degree for g in base.generators}):
        if n == 1 and ks.total.generators_of_degree(1):
            continue
        names = _names_of_degree(base, n)
        chosen = [d.name for d in diags if d.degree == n and d.qualifies]
        per_degree[n] = DualSubspace.spanned_by(n, names, chosen)
    defb = _definition_b(ks, per_degree)
    report = ObstructionReport(order, per_degree, diags, defb)
    if check_permutations:
        report.permutation_discrepancies = _permutation_check(ks, survivors, set(report.qualifying()))
    return report


def _permutation_check(ks: KsExtension, survivors: set, reference: set) -> list:
    blocks = _degree_blocks(ks.base)
    choices = [list(itertools.permutations(b)) for b in blocks]
    out = []
    for count, combo in enumerate(itertools.product(*choices)):
        if count >= MAX_PERMUTATIONS:
            break
        order = tuple(n for blk in combo for n in blk)
        got = {d.name for d in _lemma_conditions(ks, order, survivors) if d.qualifies}
        if got != reference:
            out.append((order, sorted(got)))
    return out


def obstruction_dimension(ks: KsExtension) -> int:
    return obstruction_group(ks).o


def morphism_obstruction(f: Morphism) -> GradedSubspace:
    """O(f) for a map of minimal algebras f: M(B) -> M(E), as pi_n(f)G_n(E) modulo G_n(B).

    Each degree slice is the image of G_n(E) in pi_n(B), before the quotient;
    its ``dim`` minus dim G_n(B) is dim O_n.  The returned subspace holds a
    complement representative: the image with G_n(B) projected out.
    """
    if not (f.source.is_minimal() and f.target.is_minimal()):
        raise PreconditionError("morphism_obstruction needs minimal source and target")
    out = {}
    for n in _along_degree_range(f.source, None):
        names = _names_of_degree(f.source, n)
        if not names:
            continue
        gb = gottlieb_group(f.source, n)
        ge = gottlieb_group(f.target, n)
        images = [_pull_dual(f, n, row, ge.names) for row in ge.basis.sparse_vectors()]
        vecs = []
        for v in images:
            r = gb.basis.residual(v)
            if r:
                vecs.append(r)
        out[n] = DualSubspace(n, names, SubspaceBasis.span(len(names), vecs))
    return GradedSubspace(out)


def _pull_dual(f: Morphism, n: int, row: dict, target_names) -> dict:
    """pi_n(f) on a functional: w -> x(linear part of f(w))."""
    src_names = _names_of_degree(f.source, n)
    out = {}
    tidx = {f.target.index(t): k for k, t in enumerate(target_names)}
    for k, w in enumerate(src_names):
        lin = f.image(w).linear_coefficients()
        s = sum((c * row.get(tidx[i], 0) for i, c in lin.items() if i in tidx), Fraction(0))
        if s:
            out[k] = s
    return out


def is_rg_map(obj) -> bool:
    """True iff O(f) = 0.  Accepts a KS-extension or a map of minimal algebras."""
    if isinstance(obj, KsExtension):
        return obstruction_group(obj).o == 0
    if isinstance(obj, Morphism):
        return morphism_obstruction(obj).dim == 0
    raise TypeError(f"cannot decide the G-map property of {obj!r}")


# -- Gottlieb homology -------------------------------------------------------


@dataclass
class GottliebHomology:
    degree: int
    names: tuple  # total generators of this degree
    dim: int
    basis: list  # residue vectors over ``names``
    cycles: SubspaceBasis  # ker pi_n(f) inside G_n(E, X; j) plus coboundary functionals
    boundaries: SubspaceBasis  # pi_n(j) G_n(X) plus coboundary functionals

    def duals(self) -> list:
        return DualSubspace(self.degree, self.names, SubspaceBasis.span(len(self.names), self.basis)).duals()


def _coboundary_functionals(alg: SullivanAlgebra, n: int, names) -> list:
    """Functionals x -> (coefficient of t in Q(D)x), which vanish on pi_n."""
    lp = linear_part(alg)
    pos = {alg.index(m): k for k, m in enumerate(names)}
    rows: dict = {}
    for j, col in enumerate(lp.matrix.columns()):
        if j not in pos:
            continue
        for t, c in col.items():
            rows.setdefault(t, {})[pos[j]] = c
    return list(rows.values())


def gottlieb_homology(ks: KsExtension, n: int) -> GottliebHomology:
    """GH_n = Ker pi_n(f) / Im pi_n(j) inside G_n(E, X; j)."""
    tot = ks.total
    _check_degree(tot, n)
    names = _names_of_degree(tot, n)
    amb = len(names)
    cob = SubspaceBasis.span(amb, _coboundary_functionals(tot, n, names)) if names else SubspaceBasis.zero(0)
    if not names:
        return GottliebHomology(n, names, 0, [], cob, cob)
    sl = slice_along(ks.projection, n)
    h = SubspaceBasis(amb, _constant_projection(sl, names).rows) + cob
    fiber_pos = [k for k, m in enumerate(names) if m not in ks.base.ring.index]
    kernel = h.intersect(SubspaceBasis.coordinate(amb, fiber_pos))
    fib_names = _names_of_degree(ks.fiber, n)
    if fib_names and not (n == 1 and ks.fiber.generators_of_degree(1)):
        gx = gottlieb_group(ks.fiber, n)
        ext = [{names.index(fib_names[i]): c for i, c in row.items()} for row in gx.basis.sparse_vectors()]
    else:
        ext = []
    bound = SubspaceBasis.span(amb, ext) + cob
    cycles = kernel + cob
    inter = cycles.intersect(bound)
    reps = []
    acc = inter
    for v in cycles.sparse_vectors():
        if not acc.contains(v):
            acc = acc + SubspaceBasis.span(amb, [v])
            reps.append(v)
    return GottliebHomology(n, names, len(reps), reps, cycles, bound)


# -- centers and W-maps ------------------------------------------------------


def _require_minimal(alg: SullivanAlgebra, what: str):
    if not alg.is_minimal():
        raise PreconditionError(f"{what} must be minimal (its differential has linear terms)")


def homotopy_center(alg: SullivanAlgebra, n: int) -> DualSubspace:
    """P_n: degree-n duals whose Whitehead pairing with every dual vanishes.

    The pairing of a* and b* against a generator v is the constant obtained by
    applying (a, 1) and then (b, 1) to dv; only the quadratic part contributes.
    """
    _require_minimal(alg, "the algebra")
    _check_degree(alg, n)
    names = _names_of_degree(alg, n)
    if not names:
        return DualSubspace.of(n, names)
    ident = identity_of(alg)
    rows: dict = {}
    for k, a in enumerate(names):
        da = dual(ident, a)
        for v in alg.names:
            dv = alg.differential_of(v)
            if not dv or not dv.mentions(a):
                continue
            first = da.apply(dv.word_length_component(2))
            if not first:
                continue
            for b in alg.names:
                if not first.mentions(b):
                    continue
                c = dual(ident, b).apply(first).constant_term()
                if c:
                    rows.setdefault((v, b), {})[k] = c
    constraint = RationalMatrix(len(rows), len(names), list(rows.values()))
    return DualSubspace(n, names, kernel_basis(constraint))


def homotopy_centers(alg: SullivanAlgebra, max_degree: int | None = None) -> GradedSubspace:
    return GradedSubspace({n: homotopy_center(alg, n) for n in _along_degree_range(alg, max_degree)})


@dataclass
class WMapReport:
    verdict: bool
    failures: list  # (degree, dual rendering of a P_n(E) element whose image leaves P_n(B))


def w_map_report(obj) -> WMapReport:
    if isinstance(obj, KsExtension):
        _require_minimal(obj.total, "the total algebra")
        f = obj.inclusion
    elif isinstance(obj, Morphism):
        f = obj
        _require_minimal(f.target, "the target algebra")
    else:
        raise TypeError(f"cannot decide the W-map property of {obj!r}")
    _require_minimal(f.source, "the base algebra")
    failures = []
    for n in _along_degree_range(f.target, None):
        pe = homotopy_center(f.target, n)
        if not pe.names:
            continue
        src_names = _names_of_degree(f.source, n)
        pb = homotopy_center(f.source, n) if src_names else None
        for row, label in zip(pe.basis.sparse_vectors(), pe.duals()):
            img = _pull_dual(f, n, row, pe.names)
            if img and (pb is None or not pb.contains(img)):
                failures.append((n, label))
    return WMapReport(not failures, failures)


def is_w_map(obj) -> bool:
    """pi_n(f) P_n(E) within P_n(B) for all n; needs minimal algebras on both sides."""
    return w_map_report(obj).verdict


# -- classification of spherical generators ---------------------------------

K1, K2, K3, K4, NONE = "K1", "K2", "K3", "K4", "none"


def classify_generator(ks: KsExtension, name: str) -> str:
    """Place the dual of a total generator among K1..K4 (or none)."""
    tot = ks.total
    g = tot.generator(name)
    if not g.odd:
        raise PreconditionError(f"{name} has even degree; only odd spherical generators are classified")
    n = g.degree
    _check_degree(tot, n)
    names = _names_of_degree(tot, n)
    e = {names.index(name): Fraction(1)}
    cob = SubspaceBasis.span(len(names), _coboundary_functionals(tot, n, names))
    gh = gottlieb_homology(ks, n)
    if gh.boundaries.contains(e):
        return K1
    base_names = _names_of_degree(ks.base, n)
    image = {base_names.index(name): Fraction(1)} if name in base_names else {}
    if not image and gh.cycles.contains(e):
        return K2
    if image:
        if gottlieb_group(ks.base, n).contains(image):
            return K4
        ge = SubspaceBasis(len(names), gottlieb_group(tot, n).basis.rows) + cob
        if ge.contains(e):
            return K3
    return NONE
