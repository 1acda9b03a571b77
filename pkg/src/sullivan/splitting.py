"""Splitting odd spheres off a total space along generators of O(f).

For an odd D-closed base generator w and a witness sigma with
delta(w* - sigma) = 0 and sigma(w) = 0, the map

    phi(x) = x + w * sigma(x)

is a degree-0 algebra automorphism (its inverse subtracts instead), and
phi^-1 D phi is D with w set to zero on every other generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cdga import GradedRing, KsExtension, Morphism, Polynomial, SullivanAlgebra, _total_order
from .derivation import PhiDerivation, identity_of, slice_along
from .errors import PreconditionError, SplittingError
from .gottlieb import _affine_condition, obstruction_group


def _check_candidate(ks: KsExtension, w: str):
    g = ks.base.generator(w)
    if not g.odd:
        raise PreconditionError(f"{w} has even degree; only odd generators split off as spheres")
    if ks.base.differential_of(w):
        raise PreconditionError(f"d {w} != 0; non-closed generators are not split")
    if ks.D(w):
        raise PreconditionError(f"D {w} != 0")


def find_witness(ks: KsExtension, w: str) -> PhiDerivation | None:
    """sigma on the total algebra with sigma(w_j) = 0 for j <= i and delta(w* - sigma) = 0.

    Among all such sigma this returns the basic solution of the reduced
    system, which is deterministic.  None when no witness exists.
    """
    _check_candidate(ks, w)
    order = ks.base.names
    killed = order[: order.index(w) + 1]
    sl = slice_along(identity_of(ks.total), ks.base.generator(w).degree)
    x = _affine_condition(sl, w, killed)
    if x is None:
        return None
    return -sl.derivation(x)


def _phi(alg_src: SullivanAlgebra, alg_tgt: SullivanAlgebra, w: str, sigma: PhiDerivation, sign: int) -> Morphism:
    wp = alg_tgt.gen(w)
    images = {}
    for g in alg_src.names:
        val = sigma.value(g)
        img = alg_tgt.gen(g)
        if val:
            img = img + (wp * val.to_ring(alg_tgt.ring)).scale(sign)
        images[g] = img
    return Morphism(alg_src, alg_tgt, images)


def _transport(sigma: PhiDerivation, alg: SullivanAlgebra, killed) -> PhiDerivation:
    """Move a witness onto the differential ``alg.d`` by killing already split generators."""
    ident = identity_of(alg)
    vals = {}
    for g, v in sigma.values.items():
        if g in killed:
            continue
        v = v.set_zero(killed)
        if v:
            vals[g] = v
    return PhiDerivation(ident, sigma.degree, vals)


@dataclass
class SplittingCertificate:
    ks: KsExtension
    selected: tuple
    witnesses: tuple  # as supplied, on the original total algebra
    transported: tuple  # witness i moved onto D_i
    stages: tuple  # D_1 = D, ..., D_(k+1), as algebras on the total generators
    automorphisms: tuple  # phi_i : (Lambda, D_(i+1)) -> (Lambda, D_i)
    inverses: tuple
    composite: Morphism  # phi_1 o ... o phi_k : factored -> original
    composite_inverse: Morphism

    @property
    def factored(self) -> SullivanAlgebra:
        return self.stages[-1]

    @property
    def k(self) -> int:
        return len(self.selected)

    def fiber_generators(self) -> list:
        return [n for n in self.ks.total.names if n not in self.selected]

    def describe(self) -> str:
        lines = [f"split off: {', '.join(self.selected) or '(nothing)'}"]
        for w, s in zip(self.selected, self.witnesses):
            lines.append(f"  sigma[{w}] = {s}")
        for g, v in zip(self.factored.names, self.factored.d):
            if v:
                lines.append(f"  D' {g} = {v}")
        return "\n".join(lines)


def _split_differential(alg: SullivanAlgebra, w: str, name=None) -> SullivanAlgebra:
    d = {g: (Polynomial.zero(alg.ring) if g == w else v.set_zero([w])) for g, v in zip(alg.names, alg.d)}
    return SullivanAlgebra(alg.generators, d, name=name)


def assemble_certificate(ks: KsExtension, selected, witnesses) -> SplittingCertificate:
    """Build the certificate data from witnesses without checking anything."""
    selected = tuple(selected)
    witnesses = tuple(witnesses)
    if len(selected) != len(witnesses):
        raise PreconditionError("one witness per selected generator is required")
    pos = {n: i for i, n in enumerate(ks.base.names)}
    pairs = sorted(zip(selected, witnesses), key=lambda p: pos[p[0]])
    selected = tuple(p[0] for p in pairs)
    witnesses = tuple(p[1] for p in pairs)
    stages = [ks.total]
    transported, autos, invs = [], [], []
    for i, (w, sigma) in enumerate(pairs):
        cur = stages[-1]
        s = _transport(sigma, cur, selected[:i])
        nxt = _split_differential(cur, w)
        transported.append(s)
        autos.append(_phi(nxt, cur, w, s, 1))
        invs.append(_phi(cur, nxt, w, s, -1))
        stages.append(nxt)
    total = ks.total
    final = stages[-1]
    if autos:
        comp = autos[-1]
        for a in reversed(autos[:-1]):
            comp = a.compose(comp)
        comp_inv = invs[0]
        for a in invs[1:]:
            comp_inv = a.compose(comp_inv)
    else:
        comp = Morphism(final, total, {n: total.gen(n) for n in total.names})
        comp_inv = Morphism(total, final, {n: final.gen(n) for n in total.names})
    return SplittingCertificate(
        ks, selected, witnesses, tuple(transported), tuple(stages), tuple(autos), tuple(invs), comp, comp_inv
    )


def change_of_basis(ks: KsExtension, witnesses) -> SplittingCertificate:
    """Conjugate D by phi_i = id + w_i sigma_i in turn; ``witnesses`` maps w_i -> sigma_i."""
    items = dict(witnesses)
    for w in items:
        _check_candidate(ks, w)
    cert = assemble_certificate(ks, items.keys(), items.values())
    for i, (w, phi, inv) in enumerate(zip(cert.selected, cert.automorphisms, cert.inverses)):
        cur, nxt = cert.stages[i], cert.stages[i + 1]
        for g in cur.names:
            conj = inv.apply(cur.apply_d(phi.apply(nxt.gen(g))))
            conj = Polynomial(nxt.ring, conj.terms)
            if any(conj.mentions(x) for x in cert.selected[: i + 1]):
                raise SplittingError(f"conjugated differential of {g} still involves {w}: {conj}")
            if conj != nxt.differential_of(g):
                raise SplittingError(f"conjugated differential of {g} is {conj}, expected {nxt.differential_of(g)}")
    return cert


def split(ks: KsExtension, generators=None) -> SplittingCertificate:
    """Find witnesses for ``generators`` (default: every odd closed qualifying generator) and split."""
    if generators is None:
        rep = obstruction_group(ks)
        generators = [
            n
            for n in rep.qualifying()
            if ks.base.generator(n).odd and not ks.base.differential_of(n)
        ]
    witnesses = {}
    for w in generators:
        s = find_witness(ks, w)
        if s is None:
            raise PreconditionError(f"{w}* admits no witness; it does not represent an element of O(f)")
        witnesses[w] = s
    return change_of_basis(ks, witnesses)


@dataclass
class CertificateCheck:
    ok: bool
    failures: list = field(default_factory=list)  # (check, generator, message)

    def __bool__(self):
        return self.ok

    def failing_generators(self) -> list:
        return sorted({g for _, g, _ in self.failures if g})


def verify_certificate(cert: SplittingCertificate) -> CertificateCheck:
    """Check that the composite is a DGA isomorphism onto the split presentation."""
    fails = []
    total, fact = cert.ks.total, cert.factored
    phi, inv = cert.composite, cert.composite_inverse
    for g in total.names:
        lhs = phi.apply(fact.apply_d(fact.gen(g)))
        rhs = total.apply_d(phi.apply(fact.gen(g)))
        if lhs != rhs:
            fails.append(("chain", g, f"Phi(D' {g}) = {lhs} but D(Phi {g}) = {rhs}"))
        if inv.apply(phi.apply(fact.gen(g))) != fact.gen(g) or phi.apply(inv.apply(total.gen(g))) != total.gen(g):
            fails.append(("inverse", g, "composite and its inverse do not cancel"))
        dd = fact.apply_d(fact.differential_of(g))
        if dd:
            fails.append(("d-squared", g, f"D'(D' {g}) = {dd}"))
        dv = fact.differential_of(g)
        for w in cert.selected:
            if dv.mentions(w):
                fails.append(("split", g, f"D' {g} involves {w}"))
    for w in cert.selected:
        if fact.differential_of(w):
            fails.append(("split", w, f"D' {w} != 0"))
    return CertificateCheck(not fails, fails)


@dataclass
class PullbackResult:
    extension: KsExtension  # f_a : F -> B_a
    o_before: int
    o_after: int
    k: int

    @property
    def bound_holds(self) -> bool:
        """o(f_a) <= o(f) - k."""
        return self.o_after <= self.o_before - self.k


def associated_pullback(ks: KsExtension, cert: SplittingCertificate) -> PullbackResult:
    """The pull-back fibration F -> B_a over Lambda W_k = base with the split generators removed."""
    check = verify_certificate(cert)
    if not check.ok or cert.ks != ks:
        raise PreconditionError("invalid certificate for this extension")
    if not cert.selected:
        o = obstruction_group(ks).o
        return PullbackResult(ks, o, o, 0)
    killed = set(cert.selected)
    base_gens = [g for g in ks.base.generators if g.name not in killed]
    base = SullivanAlgebra(
        base_gens,
        {g.name: ks.base.differential_of(g.name).set_zero(killed) for g in base_gens},
        name=f"{ks.base.name}_a" if ks.base.name else None,
    )
    fact = cert.factored
    d = {}
    ring = GradedRing.of(_total_order(base, ks.fiber_generators))
    for g in ks.fiber_generators:
        d[g.name] = fact.differential_of(g.name).to_ring(ring)
    ext = KsExtension(base, ks.fiber_generators, d, name=f"{ks.name}_a" if ks.name else None)
    return PullbackResult(ext, obstruction_group(ks).o, obstruction_group(ext).o, len(cert.selected))
