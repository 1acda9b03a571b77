"""Derivations along DGA maps, elementary derivations (v, h) and the boundary delta."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .cdga import KsExtension, Morphism, Polynomial, SullivanAlgebra, apply_derivation
from .errors import DomainMismatchError, ModelError, PreconditionError
from .linalg import RationalMatrix


def _along(obj) -> Morphism:
    if isinstance(obj, Morphism):
        return obj
    if isinstance(obj, KsExtension):
        return obj.inclusion
    if isinstance(obj, SullivanAlgebra):
        return identity_of(obj)
    raise TypeError(f"cannot use {obj!r} as a base morphism")


def identity_of(alg: SullivanAlgebra) -> Morphism:
    ident = alg.__dict__.get("_identity_morphism")
    if ident is None:
        ident = Morphism.identity(alg)
        alg.__dict__["_identity_morphism"] = ident
    return ident


class PhiDerivation:
    """A derivation of degree n along phi: source -> target, lowering degree by n.

    Extended to products by theta(xy) = theta(x) phi(y) + (-1)^(n|x|) phi(x) theta(y).
    Degree 0 is accepted (the splitting automorphisms need it) but never enters
    Gottlieb computations.
    """

    def __init__(self, along, degree: int, values: Mapping[str, Polynomial] | None = None):
        self.along = _along(along)
        if degree < 0:
            raise ModelError("derivation degree must be nonnegative")
        self.degree = degree
        src, tgt = self.along.source, self.along.target
        clean = {}
        for name, val in (values or {}).items():
            g = src.generator(name)
            if not isinstance(val, Polynomial):
                val = tgt.poly(val)
            if val.ring is not tgt.ring:
                raise DomainMismatchError(f"value of {name} is not over the target algebra")
            if not val:
                continue
            if val.degrees() != {g.degree - degree}:
                raise ModelError(f"value of {name} must have degree {g.degree - degree}, got {sorted(val.degrees())}")
            clean[name] = val
        self.values = clean

    @property
    def source(self) -> SullivanAlgebra:
        return self.along.source

    @property
    def target(self) -> SullivanAlgebra:
        return self.along.target

    def value(self, name: str) -> Polynomial:
        self.source.generator(name)
        return self.values.get(name, Polynomial.zero(self.target.ring))

    def apply(self, p: Polynomial) -> Polynomial:
        if p.ring is not self.source.ring:
            raise DomainMismatchError("element is not over the derivation's source")
        idx = {self.source.index(n): v for n, v in self.values.items()}
        return apply_derivation(p, idx, self.degree & 1, self.along.images, self.target.ring)

    __call__ = apply

    def is_zero(self) -> bool:
        return not self.values

    def _same_space(self, other: "PhiDerivation"):
        if self.along is not other.along and self.along != other.along:
            raise DomainMismatchError("derivations along different morphisms")
        if self.degree != other.degree and self.values and other.values:
            raise DomainMismatchError("derivations of different degrees")

    def __add__(self, other: "PhiDerivation") -> "PhiDerivation":
        self._same_space(other)
        vals = dict(self.values)
        for n, v in other.values.items():
            vals[n] = vals[n] + v if n in vals else v
        deg = self.degree if self.values else other.degree
        return PhiDerivation(self.along, deg, vals)

    def scale(self, c) -> "PhiDerivation":
        return PhiDerivation(self.along, self.degree, {n: v.scale(c) for n, v in self.values.items()})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        if not isinstance(other, PhiDerivation):
            return NotImplemented
        if self.values != other.values:
            return False
        return not self.values or self.degree == other.degree

    def __hash__(self):
        return hash(frozenset(self.values.items()))

    def terms(self) -> list:
        """Elementary pieces (generator, coefficient, monomial-string) in canonical order."""
        out = []
        for name in self.source.names:
            v = self.values.get(name)
            if v is None:
                continue
            for m, c in v.sorted_terms():
                out.append((name, c, v.ring.format_monomial(m)))
        return out

    def __str__(self):
        if not self.values:
            return "0"
        parts = []
        for k, (name, c, mono) in enumerate(self.terms()):
            sign = "-" if c < 0 else "+"
            a = abs(c)
            coeff = "" if a == 1 else (f"{a.numerator}" if a.denominator == 1 else f"{a.numerator}/{a.denominator}") + "*"
            body = f"{coeff}({name},{mono})"
            parts.append(("-" + body if sign == "-" else body) if k == 0 else f" {sign} {body}")
        return "".join(parts)

    def __repr__(self):
        return f"PhiDerivation(deg {self.degree}: {self})"


def elementary(along, v: str, h, degree: int | None = None) -> PhiDerivation:
    """The derivation (v, h): v goes to h, every other generator to zero."""
    phi = _along(along)
    g = phi.source.generator(v)
    if not isinstance(h, Polynomial):
        h = phi.target.poly(h)
    if h.ring is not phi.target.ring:
        raise DomainMismatchError("h is not over the target algebra")
    if not h.is_homogeneous():
        raise ModelError(f"inhomogeneous value {h}")
    if h:
        n = g.degree - h.degree()
        if degree is not None and degree != n:
            raise ModelError(f"({v},{h}) has degree {n}, not {degree}")
        degree = n
    elif degree is None:
        raise ModelError("the degree of a zero elementary derivation must be given")
    if degree < 0:
        raise ModelError(f"({v},{h}) would raise degree")
    return PhiDerivation(phi, degree, {v: h})


def dual(along, v: str) -> PhiDerivation:
    """v* = (v, 1)."""
    phi = _along(along)
    return elementary(phi, v, Polynomial.constant(phi.target.ring, 1))


def delta(theta: PhiDerivation) -> PhiDerivation:
    """delta(theta) = d_T o theta - (-1)^n theta o d_S, a derivation of degree n - 1."""
    if theta.degree < 1:
        raise PreconditionError("delta is defined on derivations of positive degree")
    src, tgt = theta.source, theta.target
    sign = -1 if theta.degree & 1 else 1
    vals = {}
    for g in src.generators:
        out = tgt.apply_d(theta.value(g.name))
        dg = src.differential_of(g.name)
        if dg:
            out = out - theta.apply(dg).scale(sign)
        if out:
            vals[g.name] = out
    return PhiDerivation(theta.along, theta.degree - 1, vals)


def left_partial(p: Polynomial, name: str) -> Polynomial:
    """Formal left partial derivative: write each monomial as v * rest with Koszul sign."""
    ring = p.ring
    i = ring.index[name]
    out: dict = {}
    for m, c in p.terms.items():
        e = m[i]
        if not e:
            continue
        if ring.odd[i]:
            swaps = sum(m[j] for j in ring.odd_positions if j < i)
            coeff = -c if swaps & 1 else c
        else:
            coeff = c * e
        rest = list(m)
        rest[i] -= 1
        rest = tuple(rest)
        v = out.get(rest, 0) + coeff
        if v:
            out[rest] = v
        else:
            out.pop(rest, None)
    return Polynomial(ring, out)


def notation_delta(theta: PhiDerivation) -> PhiDerivation:
    """delta of a sum of elementary derivations via the (v, d'h) - sum (u, h phi(d du/dv)) expansion.

    Independent of :func:`delta`; the two must agree.
    """
    if theta.degree < 1:
        raise PreconditionError("delta is defined on derivations of positive degree")
    src, tgt, phi = theta.source, theta.target, theta.along
    sign = -1 if theta.degree & 1 else 1
    acc: dict = {}

    def add(name, poly):
        if poly:
            acc[name] = acc[name] + poly if name in acc else poly

    for v, h in theta.values.items():
        add(v, tgt.apply_d(h))
        for u in src.names:
            du = src.differential_of(u)
            if not du or not du.mentions(v):
                continue
            add(u, (h * phi.apply(left_partial(du, v))).scale(-sign))
    return PhiDerivation(phi, theta.degree - 1, acc)


@dataclass
class DerivationComplexSlice:
    """Der_n along phi with its canonical basis of elementary derivations and delta: Der_n -> Der_(n-1)."""

    along: Morphism
    degree: int
    basis: list  # (generator name, monomial exponent tuple)
    lower_basis: list
    boundary: RationalMatrix
    index: dict = field(repr=False)
    lower_index: dict = field(repr=False)

    def __len__(self):
        return len(self.basis)

    def constant_positions(self) -> list:
        """Positions of the duals (g, 1) with |g| = n, in source generator order."""
        one = self.along.target.ring.one_exps
        return [k for k, (_, m) in enumerate(self.basis) if m == one]

    def constant_names(self) -> list:
        return [self.basis[k][0] for k in self.constant_positions()]

    def positions_of(self, names) -> list:
        names = set(names)
        return [k for k, (n, _) in enumerate(self.basis) if n in names]

    def derivation(self, vec) -> PhiDerivation:
        ring = self.along.target.ring
        items = vec.items() if isinstance(vec, dict) else enumerate(vec)
        vals: dict = {}
        for k, c in items:
            if not c:
                continue
            name, m = self.basis[k]
            vals.setdefault(name, {})[m] = Fraction(c)
        return PhiDerivation(self.along, self.degree, {n: Polynomial(ring, t) for n, t in vals.items()})

    def vector(self, theta: PhiDerivation) -> dict:
        out = {}
        for name, val in theta.values.items():
            for m, c in val.terms.items():
                out[self.index[(name, m)]] = c
        return out


def _basis_for(phi: Morphism, n: int) -> list:
    out = []
    for g in phi.source.generators:
        k = g.degree - n
        if k < 0:
            continue
        for m in phi.target.monomials(k):
            out.append((g.name, m))
    return out


def complex_slice(source: SullivanAlgebra, target: SullivanAlgebra, phi: Morphism | None, n: int) -> DerivationComplexSlice:
    """Basis of Der_n(source, target; phi) and the exact matrix of delta into degree n - 1."""
    if n < 1:
        raise PreconditionError("derivation slices are built for degree >= 1")
    if phi is None:
        if source is not target and source != target:
            raise DomainMismatchError("a morphism is required between different algebras")
        phi = identity_of(source)
    if phi.source != source or phi.target != target:
        raise DomainMismatchError("morphism does not match source and target")
    cache = phi.__dict__.setdefault("_slices", {})
    if n in cache:
        return cache[n]
    basis = _basis_for(phi, n)
    lower = _basis_for(phi, n - 1)
    index = {b: k for k, b in enumerate(basis)}
    lower_index = {b: k for k, b in enumerate(lower)}
    sign = -1 if n & 1 else 1
    tgt_ring = target.ring
    src_idx = source.ring.index
    # which generators' differentials mention each source generator
    users: dict = {}
    for u in source.names:
        for i in source.differential_of(u).support_generators():
            users.setdefault(source.ring.names[i], []).append(u)
    cols = []
    for name, m in basis:
        h = Polynomial._raw(tgt_ring, {m: Fraction(1)})
        col: dict = {}
        dh = target.apply_d(h)
        for mm, c in dh.terms.items():
            k = lower_index[(name, mm)]
            col[k] = col.get(k, 0) + c
        vals = {src_idx[name]: h}
        for u in users.get(name, ()):
            img = apply_derivation(source.differential_of(u), vals, n & 1, phi.images, tgt_ring)
            for mm, c in img.terms.items():
                k = lower_index[(u, mm)]
                col[k] = col.get(k, 0) - sign * c
        cols.append({k: c for k, c in col.items() if c})
    mat = RationalMatrix.from_columns(len(lower), cols)
    sl = DerivationComplexSlice(phi, n, basis, lower, mat, index, lower_index)
    cache[n] = sl
    return sl


def slice_along(obj, n: int) -> DerivationComplexSlice:
    phi = _along(obj)
    return complex_slice(phi.source, phi.target, phi, n)
