"""Free graded-commutative algebras over Q, Sullivan algebras and KS-extensions.

Monomials are exponent vectors over the ring's generator order.  Odd
generators carry exponent 0 or 1; putting a product into that normal form
multiplies the coefficient by the Koszul sign of the sorting permutation
restricted to odd factors.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import DomainMismatchError, ModelError, PreconditionError
from .linalg import RationalMatrix, SubspaceBasis, kernel_basis

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_']*\Z")


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int

    def __post_init__(self):
        if not IDENT_RE.match(self.name):
            raise ModelError(f"invalid generator name {self.name!r}")
        if not isinstance(self.degree, int) or self.degree < 1:
            raise ModelError(f"generator {self.name} must have degree >= 1, got {self.degree!r}")

    @property
    def odd(self) -> bool:
        return self.degree % 2 == 1


class GradedRing:
    """The underlying free graded-commutative algebra of an ordered generator list.

    Rings are interned: two rings over equal generator tuples are the same
    object, so domain checks are identity checks.
    """

    _cache: dict = {}

    def __init__(self, gens: tuple):
        self.gens = gens
        self.degrees = tuple(g.degree for g in gens)
        self.odd = tuple(g.odd for g in gens)
        self.odd_positions = tuple(i for i, o in enumerate(self.odd) if o)
        self.names = tuple(g.name for g in gens)
        self.index = {g.name: i for i, g in enumerate(gens)}
        if len(self.index) != len(gens):
            dup = [n for n in self.names if self.names.count(n) > 1]
            raise ModelError(f"duplicate generator name {dup[0]!r}")
        self.one_exps = (0,) * len(gens)
        self._monomials: dict[int, list] = {}

    @classmethod
    def of(cls, gens: Iterable[Generator]) -> "GradedRing":
        key = tuple(gens)
        ring = cls._cache.get(key)
        if ring is None:
            ring = cls(key)
            cls._cache[key] = ring
        return ring

    def __len__(self):
        return len(self.gens)

    def __repr__(self):
        return "GradedRing(" + ", ".join(f"{g.name}:{g.degree}" for g in self.gens) + ")"

    def mono_degree(self, exps) -> int:
        return sum(e * d for e, d in zip(exps, self.degrees) if e)

    def mono_mul(self, a, b):
        """(sign, exps) for the product of two normal-form monomials, or None if zero."""
        parity = 0
        a_odd_after = 0
        for j in reversed(self.odd_positions):
            if b[j]:
                if a[j]:
                    return None
                parity += a_odd_after
            if a[j]:
                a_odd_after += 1
        return (-1 if parity & 1 else 1), tuple(x + y for x, y in zip(a, b))

    def normalize(self, factors: Sequence[int]):
        """Normal form of a raw ordered product of generator indices."""
        exps = [0] * len(self.gens)
        odd_seq = []
        for i in factors:
            if self.odd[i]:
                if exps[i]:
                    return None
                odd_seq.append(i)
            exps[i] += 1
        inversions = sum(1 for x, y in itertools.combinations(odd_seq, 2) if x > y)
        return (-1 if inversions & 1 else 1), tuple(exps)

    def monomials(self, degree: int) -> list:
        """All normal-form monomials of the given degree, in canonical order."""
        if degree < 0:
            return []
        cached = self._monomials.get(degree)
        if cached is not None:
            return cached
        n = len(self.gens)
        out = []

        def rec(i, remaining, acc):
            if i == n:
                if remaining == 0:
                    out.append(tuple(acc))
                return
            d = self.degrees[i]
            top = min(1, remaining // d) if self.odd[i] else remaining // d
            for e in range(top, -1, -1):
                acc.append(e)
                rec(i + 1, remaining - e * d, acc)
                acc.pop()

        rec(0, degree, [])
        self._monomials[degree] = out
        return out

    def format_monomial(self, exps) -> str:
        parts = []
        for name, e in zip(self.names, exps):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return "*".join(parts) if parts else "1"


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class Polynomial:
    """An element of a free graded-commutative algebra: monomial -> nonzero rational."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: GradedRing, terms: Mapping | None = None):
        self.ring = ring
        clean = {}
        if terms:
            n = len(ring.gens)
            for exps, c in terms.items():
                if len(exps) != n:
                    raise DomainMismatchError("monomial length does not match the ring")
                c = Fraction(c)
                if c:
                    clean[tuple(exps)] = c
        self.terms = clean

    @classmethod
    def _raw(cls, ring, terms):
        p = cls.__new__(cls)
        p.ring = ring
        p.terms = terms
        return p

    @classmethod
    def zero(cls, ring: GradedRing) -> "Polynomial":
        return cls._raw(ring, {})

    @classmethod
    def constant(cls, ring: GradedRing, c=1) -> "Polynomial":
        c = Fraction(c)
        return cls._raw(ring, {ring.one_exps: c} if c else {})

    @classmethod
    def generator(cls, ring: GradedRing, name: str) -> "Polynomial":
        try:
            i = ring.index[name]
        except KeyError:
            raise DomainMismatchError(f"unknown generator {name!r}") from None
        exps = [0] * len(ring.gens)
        exps[i] = 1
        return cls._raw(ring, {tuple(exps): Fraction(1)})

    @classmethod
    def monomial(cls, ring: GradedRing, exps, coeff=1) -> "Polynomial":
        return cls(ring, {tuple(exps): coeff})

    @classmethod
    def from_factors(cls, ring: GradedRing, names: Sequence[str], coeff=1) -> "Polynomial":
        """The ordered product of named generators, put into normal form."""
        try:
            idx = [ring.index[n] for n in names]
        except KeyError as exc:
            raise DomainMismatchError(f"unknown generator {exc.args[0]!r}") from None
        nf = ring.normalize(idx)
        if nf is None:
            return cls.zero(ring)
        sign, exps = nf
        return cls(ring, {exps: sign * Fraction(coeff)})

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "Polynomial"):
        if self.ring is not other.ring:
            raise DomainMismatchError(f"polynomials over different generator sets: {self.ring} vs {other.ring}")

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self.ring, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for m, c in other.terms.items():
            v = terms.get(m, 0) + c
            if v:
                terms[m] = v
            else:
                terms.pop(m, None)
        return Polynomial._raw(self.ring, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return Polynomial.zero(self.ring)
        return Polynomial._raw(self.ring, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check(other)
        ring = self.ring
        terms: dict = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                prod = ring.mono_mul(ma, mb)
                if prod is None:
                    continue
                sign, m = prod
                v = terms.get(m, 0) + sign * ca * cb
                if v:
                    terms[m] = v
                else:
                    terms.pop(m, None)
        return Polynomial._raw(ring, terms)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(self.ring, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.ring, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ring is other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((id(self.ring), frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # -- structure ----------------------------------------------------------

    def degrees(self) -> set:
        return {self.ring.mono_degree(m) for m in self.terms}

    def degree(self) -> int | None:
        """Degree of a homogeneous element; None for zero; raises if inhomogeneous."""
        ds = self.degrees()
        if not ds:
            return None
        if len(ds) > 1:
            raise ModelError(f"inhomogeneous element {self}")
        return ds.pop()

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def homogeneous_component(self, k: int) -> "Polynomial":
        return Polynomial._raw(self.ring, {m: c for m, c in self.terms.items() if self.ring.mono_degree(m) == k})

    def word_length_component(self, k: int) -> "Polynomial":
        return Polynomial._raw(self.ring, {m: c for m, c in self.terms.items() if sum(m) == k})

    def constant_term(self) -> Fraction:
        return self.terms.get(self.ring.one_exps, Fraction(0))

    def linear_coefficients(self) -> dict:
        """Generator index -> coefficient of that generator."""
        out = {}
        for m, c in self.terms.items():
            if sum(m) == 1:
                out[m.index(1)] = c
        return out

    def support_generators(self) -> set:
        return {i for m in self.terms for i, e in enumerate(m) if e}

    def mentions(self, name: str) -> bool:
        i = self.ring.index[name]
        return any(m[i] for m in self.terms)

    def set_zero(self, names: Iterable[str]) -> "Polynomial":
        """Kill the named generators (an algebra endomorphism)."""
        idx = [self.ring.index[n] for n in names]
        return Polynomial._raw(self.ring, {m: c for m, c in self.terms.items() if not any(m[i] for i in idx)})

    def to_ring(self, ring: GradedRing) -> "Polynomial":
        """Re-express in another ring by generator name (inclusion or restriction)."""
        if ring is self.ring:
            return self
        src = self.ring
        mapping = []
        for i, g in enumerate(src.gens):
            j = ring.index.get(g.name)
            if j is not None and ring.gens[j].degree != g.degree:
                raise DomainMismatchError(f"generator {g.name} has different degrees")
            mapping.append(j)
        terms = {}
        for m, c in self.terms.items():
            factors = []
            for i, e in enumerate(m):
                if e:
                    if mapping[i] is None:
                        raise DomainMismatchError(f"generator {src.names[i]} not in target ring")
                    factors.extend([mapping[i]] * e)
            nf = ring.normalize(factors)
            if nf is None:
                continue
            sign, exps = nf
            v = terms.get(exps, 0) + sign * c
            if v:
                terms[exps] = v
            else:
                terms.pop(exps, None)
        return Polynomial._raw(ring, terms)

    def sorted_terms(self) -> list:
        """Terms in canonical order: by degree, then descending exponent vector."""
        deg = self.ring.mono_degree
        return sorted(self.terms.items(), key=lambda mc: (deg(mc[0]), tuple(-e for e in mc[0])))

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for k, (m, c) in enumerate(self.sorted_terms()):
            mono = self.ring.format_monomial(m)
            sign = "-" if c < 0 else "+"
            a = -c if c < 0 else c
            if mono == "1":
                body = _fmt_coeff(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_fmt_coeff(a)}*{mono}"
            if k == 0:
                out.append(("-" if sign == "-" else "") + body)
            else:
                out.append(f" {sign} {body}")
        return "".join(out)

    def __repr__(self):
        return f"Polynomial({self})"


def mul(p: Polynomial, q: Polynomial) -> Polynomial:
    """Graded-commutative product."""
    if p.ring is not q.ring:
        raise DomainMismatchError("polynomials over different generator sets")
    return p * q


def apply_derivation(
    poly: Polynomial,
    values: Mapping[int, Polynomial],
    parity: int,
    images: Sequence[Polynomial],
    target: GradedRing,
) -> Polynomial:
    """Apply the derivation with the given generator values along a morphism.

    ``values`` maps source generator index to its image in ``target``;
    ``images`` are the morphism's images of all source generators.  The sign
    rule is theta(xy) = theta(x) phi(y) + (-1)^(parity*|x|) phi(x) theta(y).
    """
    out: dict = {}
    src = poly.ring
    degs = src.degrees
    for m, c in poly.terms.items():
        hit = [i for i, e in enumerate(m) if e and i in values]
        if not hit:
            continue
        blocks = [(i, e) for i, e in enumerate(m) if e]
        block_polys = [images[i] ** e for i, e in blocks]
        right = [None] * len(blocks)
        acc = Polynomial.constant(target, 1)
        for k in range(len(blocks) - 1, -1, -1):
            right[k] = acc
            acc = block_polys[k] * acc
        left = Polynomial.constant(target, 1)
        prefix_deg = 0
        for k, (i, e) in enumerate(blocks):
            if i in values:
                term = left * values[i]
                if e > 1:
                    term = term * images[i] ** (e - 1)
                term = term * right[k]
                coeff = c * e
                if parity and prefix_deg & 1:
                    coeff = -coeff
                for mm, cc in term.terms.items():
                    v = out.get(mm, 0) + coeff * cc
                    if v:
                        out[mm] = v
                    else:
                        out.pop(mm, None)
            left = left * block_polys[k]
            prefix_deg += e * degs[i]
    return Polynomial._raw(target, out)


@dataclass
class Issue:
    kind: str
    generator: str | None
    message: str

    def __str__(self):
        where = f"[{self.generator}] " if self.generator else ""
        return f"{self.kind}: {where}{self.message}"


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self):
        return self.ok

    def kinds(self) -> set:
        return {e.kind for e in self.errors}

    def extend(self, other: "ValidationReport", prefix: str = ""):
        for e in other.errors:
            self.errors.append(Issue(e.kind, e.generator, prefix + e.message))
        for w in other.warnings:
            self.warnings.append(Issue(w.kind, w.generator, prefix + w.message))


def _coerce_value(value, ring: GradedRing) -> Polynomial:
    if isinstance(value, Polynomial):
        if value.ring is not ring:
            return value.to_ring(ring)
        return value
    if isinstance(value, (int, Fraction)):
        return Polynomial.constant(ring, value)
    if isinstance(value, str):
        from .modelfile import parse_polynomial

        return parse_polynomial(value, ring)
    raise TypeError(f"cannot interpret {value!r} as a polynomial")


class SullivanAlgebra:
    """A free graded-commutative algebra with a differential given on generators."""

    def __init__(
        self,
        generators: Sequence[Generator | tuple],
        differential: Mapping[str, object] | None = None,
        name: str | None = None,
    ):
        gens = tuple(g if isinstance(g, Generator) else Generator(*g) for g in generators)
        self.ring = GradedRing.of(gens)
        self.name = name
        differential = dict(differential or {})
        unknown = [k for k in differential if k not in self.ring.index]
        if unknown:
            raise ModelError(f"differential given for unknown generator {unknown[0]!r}")
        self.d = tuple(
            _coerce_value(differential[g.name], self.ring) if g.name in differential else Polynomial.zero(self.ring)
            for g in gens
        )

    @property
    def generators(self) -> tuple:
        return self.ring.gens

    @property
    def names(self) -> tuple:
        return self.ring.names

    def index(self, name: str) -> int:
        try:
            return self.ring.index[name]
        except KeyError:
            raise DomainMismatchError(f"unknown generator {name!r}") from None

    def generator(self, name: str) -> Generator:
        return self.ring.gens[self.index(name)]

    def gen(self, name: str) -> Polynomial:
        return Polynomial.generator(self.ring, name)

    def poly(self, value) -> Polynomial:
        return _coerce_value(value, self.ring)

    def one(self) -> Polynomial:
        return Polynomial.constant(self.ring, 1)

    def zero(self) -> Polynomial:
        return Polynomial.zero(self.ring)

    def differential_of(self, name: str) -> Polynomial:
        return self.d[self.index(name)]

    def degrees(self) -> list:
        return sorted({g.degree for g in self.generators})

    def generators_of_degree(self, n: int) -> list:
        return [i for i, g in enumerate(self.generators) if g.degree == n]

    def apply_d(self, p: Polynomial) -> Polynomial:
        if p.ring is not self.ring:
            raise DomainMismatchError("element is not over this algebra's generators")
        values = {i: v for i, v in enumerate(self.d) if v}
        return apply_derivation(p, values, 1, self._identity_images, self.ring)

    @cached_property
    def _identity_images(self) -> tuple:
        return tuple(Polynomial.generator(self.ring, n) for n in self.names)

    def is_minimal(self) -> bool:
        return all(not v.linear_coefficients() and not v.constant_term() for v in self.d)

    def is_ordered(self) -> bool:
        degs = self.ring.degrees
        return all(a <= b for a, b in zip(degs, degs[1:]))

    def validate(self, check_order: bool = True) -> ValidationReport:
        """Degree, ordering and d^2 = 0 checks; never raises."""
        rep = ValidationReport()
        for g, dg in zip(self.generators, self.d):
            if not dg:
                continue
            bad = sorted(k for k in dg.degrees() if k != g.degree + 1)
            if bad:
                rep.errors.append(
                    Issue("degree", g.name, f"d({g.name}) has terms of degree {bad}, expected {g.degree + 1}")
                )
        if not rep.errors:
            for g in self.generators:
                dd = self.apply_d(self.d[self.index(g.name)])
                if dd:
                    rep.errors.append(Issue("d-squared", g.name, f"d(d({g.name})) = {dd}"))
        if check_order and not self.is_ordered():
            for a, b in zip(self.generators, self.generators[1:]):
                if a.degree > b.degree:
                    rep.errors.append(
                        Issue("order", b.name, f"{b.name} (degree {b.degree}) follows {a.name} (degree {a.degree})")
                    )
        for g in self.generators:
            if g.degree == 1:
                rep.warnings.append(Issue("degree-one", g.name, "degree-1 generator (not simply connected)"))
        return rep

    def require_valid(self, check_order: bool = True):
        rep = self.validate(check_order)
        if not rep.ok:
            raise ModelError("; ".join(str(e) for e in rep.errors))

    def monomials(self, degree: int) -> list:
        return self.ring.monomials(degree)

    def differential_matrix(self, degree: int) -> RationalMatrix:
        """Matrix of d from degree ``degree`` to ``degree + 1`` in monomial bases."""
        src = self.monomials(degree)
        dst = {m: i for i, m in enumerate(self.monomials(degree + 1))}
        cols = []
        for m in src:
            img = self.apply_d(Polynomial._raw(self.ring, {m: Fraction(1)}))
            cols.append({dst[mm]: c for mm, c in img.terms.items()})
        return RationalMatrix.from_columns(len(dst), cols)

    def __eq__(self, other):
        if not isinstance(other, SullivanAlgebra):
            return NotImplemented
        return self.ring is other.ring and self.d == other.d

    def __hash__(self):
        return hash((id(self.ring), self.d))

    def __repr__(self):
        label = self.name or "algebra"
        return f"SullivanAlgebra({label}: {', '.join(f'{g.name}:{g.degree}' for g in self.generators)})"

    def describe(self) -> str:
        lines = [repr(self)]
        for g, dg in zip(self.generators, self.d):
            if dg:
                lines.append(f"  d {g.name} = {dg}")
        return "\n".join(lines)


def apply_d(alg: SullivanAlgebra, p: Polynomial) -> Polynomial:
    return alg.apply_d(p)


def validate(alg: SullivanAlgebra, check_order: bool = True) -> ValidationReport:
    return alg.validate(check_order)


class Morphism:
    """A DGA map given by images of the source generators; unlisted generators map to 0."""

    def __init__(
        self,
        source: SullivanAlgebra,
        target: SullivanAlgebra,
        images: Mapping[str, object] | None = None,
        name: str | None = None,
    ):
        self.source = source
        self.target = target
        self.name = name
        images = dict(images or {})
        unknown = [k for k in images if k not in source.ring.index]
        if unknown:
            raise ModelError(f"image given for unknown generator {unknown[0]!r}")
        self.images = tuple(
            _coerce_value(images[g.name], target.ring) if g.name in images else Polynomial.zero(target.ring)
            for g in source.generators
        )
        self._mono_cache: dict = {}

    @classmethod
    def identity(cls, alg: SullivanAlgebra) -> "Morphism":
        return cls(alg, alg, {n: alg.gen(n) for n in alg.names}, name="id")

    @classmethod
    def by_name(cls, source: SullivanAlgebra, target: SullivanAlgebra, name: str | None = None) -> "Morphism":
        """Send each source generator to the target generator of the same name, or 0."""
        images = {n: target.gen(n) for n in source.names if n in target.ring.index}
        return cls(source, target, images, name=name)

    def image(self, name: str) -> Polynomial:
        return self.images[self.source.index(name)]

    def _mono_image(self, m) -> Polynomial:
        img = self._mono_cache.get(m)
        if img is None:
            img = Polynomial.constant(self.target.ring, 1)
            for i, e in enumerate(m):
                if e:
                    img = img * self.images[i] ** e
            self._mono_cache[m] = img
        return img

    def apply(self, p: Polynomial) -> Polynomial:
        if p.ring is not self.source.ring:
            raise DomainMismatchError("element is not over the morphism's source")
        out: dict = {}
        for m, c in p.terms.items():
            for mm, cc in self._mono_image(m).terms.items():
                v = out.get(mm, 0) + c * cc
                if v:
                    out[mm] = v
                else:
                    out.pop(mm, None)
        return Polynomial._raw(self.target.ring, out)

    __call__ = apply

    def compose(self, first: "Morphism") -> "Morphism":
        """self o first."""
        if first.target != self.source:
            raise DomainMismatchError("morphisms are not composable")
        return Morphism(first.source, self.target, {n: self.apply(first.image(n)) for n in first.source.names})

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        for g, img in zip(self.source.generators, self.images):
            if img and img.degrees() != {g.degree}:
                rep.errors.append(Issue("degree", g.name, f"image {img} does not have degree {g.degree}"))
        if rep.errors:
            return rep
        for g, img in zip(self.source.generators, self.images):
            lhs = self.apply(self.source.differential_of(g.name))
            rhs = self.target.apply_d(img)
            if lhs != rhs:
                rep.errors.append(Issue("chain", g.name, f"f(d {g.name}) = {lhs} but d f({g.name}) = {rhs}"))
        return rep

    def linear_coefficient(self, source_index: int, target_index: int) -> Fraction:
        return self.images[source_index].linear_coefficients().get(target_index, Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, Morphism):
            return NotImplemented
        return self.source == other.source and self.target == other.target and self.images == other.images

    def __hash__(self):
        return hash((self.source, self.target, self.images))

    def __repr__(self):
        return f"Morphism({self.name or '?'}: {self.source.name or '?'} -> {self.target.name or '?'})"


def _total_order(base: SullivanAlgebra, fiber: Sequence[Generator]) -> tuple:
    keyed = [((g.degree, 0, i), g) for i, g in enumerate(base.generators)]
    keyed += [((g.degree, 1, i), g) for i, g in enumerate(fiber)]
    return tuple(g for _, g in sorted(keyed, key=lambda kg: kg[0]))


class KsExtension:
    """A relative Sullivan model (Lambda W, d_B) -> (Lambda W (x) Lambda V, D).

    The total algebra orders its generators by degree, base generators first
    within a degree, each group keeping its declaration order.
    """

    def __init__(
        self,
        base: SullivanAlgebra,
        fiber_generators: Sequence[Generator | tuple],
        differential: Mapping[str, object] | None = None,
        name: str | None = None,
    ):
        self.base = base
        self.name = name
        self.fiber_generators = tuple(g if isinstance(g, Generator) else Generator(*g) for g in fiber_generators)
        clash = set(base.names) & {g.name for g in self.fiber_generators}
        if clash:
            raise ModelError(f"fiber generator {sorted(clash)[0]!r} clashes with a base generator")
        differential = dict(differential or {})
        base_given = [k for k in differential if k in base.ring.index]
        if base_given:
            raise ModelError(f"differential of base generator {base_given[0]!r} is fixed by the base")
        gens = _total_order(base, self.fiber_generators)
        ring = GradedRing.of(gens)
        d = {}
        for g in base.generators:
            d[g.name] = base.differential_of(g.name).to_ring(ring)
        for g in self.fiber_generators:
            if g.name in differential:
                d[g.name] = _coerce_value(differential[g.name], ring)
        unknown = [k for k in differential if k not in ring.index]
        if unknown:
            raise ModelError(f"differential given for unknown generator {unknown[0]!r}")
        self.total = SullivanAlgebra(gens, d, name=f"{name}.total" if name else None)
        self.inclusion = Morphism.by_name(base, self.total, name="inclusion")
        fib = SullivanAlgebra(
            self.fiber_generators,
            {g.name: self.fiber_differential_of(g.name) for g in self.fiber_generators},
            name=f"{name}.fiber" if name else None,
        )
        self.fiber = fib
        self.projection = Morphism.by_name(self.total, fib, name="projection")

    def fiber_differential_of(self, name: str):
        """D-bar(v): D(v) with every base generator set to zero, as text-free polynomial."""
        dv = self.total.differential_of(name).set_zero(self.base.names)
        fib_ring = GradedRing.of(self.fiber_generators)
        return dv.to_ring(fib_ring)

    @property
    def fiber_names(self) -> tuple:
        return tuple(g.name for g in self.fiber_generators)

    def base_total_indices(self) -> list:
        return [self.total.index(n) for n in self.base.names]

    def D(self, name: str) -> Polynomial:
        return self.total.differential_of(name)

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        rep.extend(self.base.validate(check_order=True), prefix="base: ")
        tot = self.total.validate(check_order=False)
        for e in tot.errors:
            rep.errors.append(Issue(e.kind, e.generator, "total: " + e.message))
        for w in tot.warnings:
            if w.generator in self.fiber_names:
                rep.warnings.append(Issue(w.kind, w.generator, "total: " + w.message))
        return rep

    def require_valid(self):
        rep = self.validate()
        if not rep.ok:
            raise ModelError("; ".join(str(e) for e in rep.errors))

    def with_total_differential(self, d: Mapping[str, Polynomial], name: str | None = None) -> "KsExtension":
        """Same generators, new fiber differential (base differential kept)."""
        return KsExtension(
            self.base, self.fiber_generators, {n: d[n] for n in self.fiber_names}, name=name or self.name
        )

    def __eq__(self, other):
        if not isinstance(other, KsExtension):
            return NotImplemented
        return self.base == other.base and self.fiber_generators == other.fiber_generators and self.total == other.total

    def __hash__(self):
        return hash((self.base, self.total))

    def __repr__(self):
        return f"KsExtension({self.name or '?'}: fiber {', '.join(self.fiber_names) or '-'} over {self.base.name or '?'})"


def trivial_extension(base: SullivanAlgebra, name: str | None = None) -> KsExtension:
    return KsExtension(base, (), {}, name=name)


def product_extension(base: SullivanAlgebra, fiber: SullivanAlgebra, name: str | None = None) -> KsExtension:
    """The product B x X: fiber differential copied verbatim."""
    gens = fiber.generators
    ring = GradedRing.of(_total_order(base, gens))
    d = {g.name: fiber.differential_of(g.name).to_ring(ring) for g in gens}
    return KsExtension(base, gens, d, name=name)


def compose_ks(outer: KsExtension, inner: KsExtension, name: str | None = None) -> KsExtension:
    """KS-extension of the composite X -> Y -> Z from Y over Z and X over Y's total."""
    if inner.base != outer.total:
        raise DomainMismatchError("inner extension is not built over the outer extension's total algebra")
    fiber = outer.fiber_generators + inner.fiber_generators
    ring = GradedRing.of(_total_order(outer.base, fiber))
    d = {g.name: inner.D(g.name).to_ring(ring) for g in fiber}
    return KsExtension(outer.base, fiber, d, name=name)


def pullback_model(ks: KsExtension, base_map: Morphism, name: str | None = None) -> KsExtension:
    """Push-out of ``ks`` along a map out of its base: substitute base generators via ``base_map``."""
    if base_map.source != ks.base:
        raise DomainMismatchError("base map does not start at the extension's base")
    new_base = base_map.target
    clash = set(new_base.names) & set(ks.fiber_names)
    if clash:
        raise ModelError(f"fiber generator {sorted(clash)[0]!r} clashes with the new base")
    ring = GradedRing.of(_total_order(new_base, ks.fiber_generators))
    images = {}
    for g in ks.base.generators:
        images[g.name] = base_map.image(g.name).to_ring(ring)
    for g in ks.fiber_generators:
        images[g.name] = Polynomial.generator(ring, g.name)
    scratch = SullivanAlgebra(ring.gens, {}, name=None)
    subst = Morphism(ks.total, scratch, images)
    d = {}
    for g in ks.fiber_generators:
        img = subst.apply(ks.D(g.name))
        if img and img.degrees() != {g.degree + 1}:
            raise ModelError(f"substituted differential of {g.name} has the wrong degree")
        d[g.name] = img
    return KsExtension(new_base, ks.fiber_generators, d, name=name)


@dataclass
class LinearPart:
    """The linear part Q(D) of a differential, as an endomorphism of the generator span."""

    names: tuple
    matrix: RationalMatrix  # column j = Q(D)(generator j)

    def image_of(self, name: str) -> dict:
        j = self.names.index(name)
        return {self.names[i]: v for i, v in self.matrix.column(j).items()}

    def is_zero(self) -> bool:
        return self.matrix.is_zero()


def linear_part(obj) -> LinearPart:
    alg = obj.total if isinstance(obj, KsExtension) else obj
    cols = [dict(v.linear_coefficients()) for v in alg.d]
    return LinearPart(alg.names, RationalMatrix.from_columns(len(alg.names), cols))


def surviving_base_indices(ks: KsExtension) -> list:
    """Base indices i with [w_i] != 0 in H(W + V, Q(D))."""
    lp = linear_part(ks)
    image = SubspaceBasis.span(len(lp.names), lp.matrix.columns())
    out = []
    for i, name in enumerate(ks.base.names):
        j = lp.names.index(name)
        if lp.matrix.column(j):
            continue
        if image.contains({j: 1}):
            continue
        out.append(i)
    return out


@dataclass
class CohomologyResult:
    dims: list
    bases: list  # per degree, list of cocycle representatives (Polynomial)

    def dim(self, k: int) -> int:
        return self.dims[k]


def cohomology(alg: SullivanAlgebra, max_degree: int) -> CohomologyResult:
    """Dimensions and representative cocycles of H^k for 0 <= k <= max_degree."""
    if max_degree < 0:
        raise PreconditionError("max_degree must be nonnegative")
    dims, bases = [], []
    prev_image = SubspaceBasis.zero(1)  # image of d into degree 0 is zero
    for k in range(max_degree + 1):
        mons = alg.monomials(k)
        dk = alg.differential_matrix(k)
        ker = kernel_basis(dk)
        if k == 0:
            img = SubspaceBasis.zero(len(mons))
        else:
            img = prev_image
        reps = []
        ech = img
        for v in ker.sparse_vectors():
            if not ech.contains(v):
                ech = ech + SubspaceBasis.span(len(mons), [v])
                reps.append(Polynomial(alg.ring, {mons[i]: c for i, c in v.items()}))
        dims.append(len(reps))
        bases.append(reps)
        prev_image = SubspaceBasis.span(len(alg.monomials(k + 1)), dk.columns())
    return CohomologyResult(dims, bases)


def tensor(a: SullivanAlgebra, b: SullivanAlgebra, name: str | None = None) -> SullivanAlgebra:
    """Tensor product of algebras on disjoint generator sets, generators sorted by degree (a first on ties)."""
    gens = tuple(sorted(a.generators + b.generators, key=lambda g: g.degree))
    ring = GradedRing.of(gens)
    d = {n: a.differential_of(n).to_ring(ring) for n in a.names}
    d.update({n: b.differential_of(n).to_ring(ring) for n in b.names})
    return SullivanAlgebra(gens, d, name=name)
