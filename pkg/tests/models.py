"""Random small minimal models for property tests, plus corpus helpers."""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

from hypothesis import strategies as st

from sullivan.cdga import Generator, KsExtension, Polynomial, SullivanAlgebra
from sullivan.linalg import RationalMatrix, kernel_basis
from sullivan.modelfile import load

CORPUS = Path(__file__).resolve().parent.parent / "src" / "sullivan" / "corpus"


def corpus_files():
    return sorted(CORPUS.glob("*.sul"))


def corpus_doc(stem: str):
    return load(CORPUS / f"{stem}.sul")


def all_extensions():
    out = []
    for path in corpus_files():
        doc = load(path)
        out.extend((path.stem, name, ks) for name, ks in doc.extensions.items())
    return out


def _decomposable_cocycle(gens, d, degree, rng: random.Random):
    """A random d-cocycle of the given degree built from products of ``gens``."""
    if not gens:
        return {}
    alg = SullivanAlgebra(gens, d)
    ring = alg.ring
    monos = [m for m in ring.monomials(degree) if sum(m) >= 2]
    if not monos:
        return {}
    upper = ring.monomials(degree + 1)
    pos = {m: i for i, m in enumerate(upper)}
    cols = []
    for m in monos:
        img = alg.apply_d(Polynomial.monomial(ring, m))
        cols.append({pos[k]: c for k, c in img.terms.items()})
    ker = kernel_basis(RationalMatrix.from_columns(len(upper), cols))
    if not ker.dim:
        return {}
    terms = {}
    for vec in ker.sparse_vectors():
        c = rng.choice([0, 1, 1, -1, 2])
        for j, x in vec.items():
            terms[monos[j]] = terms.get(monos[j], 0) + c * x
    return {m: Fraction(c) for m, c in terms.items() if c}


def random_algebra(rng: random.Random, size: int, prefix: str = "a", degrees=(2, 3, 3, 4, 5, 5)):
    degs = sorted(rng.choice(degrees) for _ in range(size))
    gens, d = [], {}
    for i, k in enumerate(degs):
        g = Generator(f"{prefix}{i}", k)
        terms = _decomposable_cocycle(gens, d, k + 1, rng)
        gens.append(g)
        if terms:
            d[g.name] = Polynomial(SullivanAlgebra(gens).ring, {m + (0,): c for m, c in terms.items()})
    return SullivanAlgebra(gens, d, name="R")


def _lift(terms, src, dst):
    out = {}
    for m, c in terms.items():
        exps = [0] * len(dst.gens)
        for i, e in enumerate(m):
            exps[dst.index[src.names[i]]] = e
        out[tuple(exps)] = c
    return out


def random_extension(rng: random.Random, base: SullivanAlgebra, size: int, prefix: str = "v", degrees=(2, 3, 3, 5, 7)):
    fiber = sorted((Generator(f"{prefix}{i}", rng.choice(degrees)) for i in range(size)), key=lambda g: g.degree)
    ks = KsExtension(base, [], {}, name="K")
    for g in fiber:
        tot = ks.total
        terms = _decomposable_cocycle(list(tot.generators), {n: tot.differential_of(n) for n in tot.names}, g.degree + 1, rng)
        chosen = list(ks.fiber_generators) + [g]
        ring = KsExtension(base, chosen, {}).total.ring
        vals = {h.name: Polynomial(ring, _lift(ks.D(h.name).terms, tot.ring, ring)) for h in ks.fiber_generators}
        if terms:
            vals[g.name] = Polynomial(ring, _lift(terms, tot.ring, ring))
        ks = KsExtension(base, chosen, vals, name="K")
    return ks


@st.composite
def algebras(draw, max_size=4):
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    return random_algebra(rng, draw(st.integers(1, max_size)))


def random_small_extension(rng: random.Random, max_base=4, max_fiber=2):
    base = random_algebra(rng, rng.randint(1, max_base), prefix="w", degrees=(3, 3, 3, 5, 5, 2, 4))
    return random_extension(rng, base, rng.randint(1, max_fiber))


def random_tower(rng: random.Random):
    """A pair (outer, inner): outer over a base, inner over outer's total."""
    base = random_algebra(rng, rng.randint(2, 4), prefix="w", degrees=(3, 3, 3, 5))
    outer = random_extension(rng, base, rng.randint(1, 2), prefix="v", degrees=(3, 5, 5, 7))
    inner = random_extension(rng, outer.total, rng.randint(1, 2), prefix="x", degrees=(3, 5, 5, 7))
    return outer, inner


seeds = st.integers(0, 2**32 - 1)


@st.composite
def extensions(draw):
    return random_small_extension(random.Random(draw(seeds)))


@st.composite
def towers(draw):
    return random_tower(random.Random(draw(seeds)))


@st.composite
def spherical_extensions(draw):
    """Odd spheres w1..wk (degree 3) with d u = w1...wk and fibers killing products of pairs."""
    k = draw(st.sampled_from([2, 4]))
    ws = [f"w{i}" for i in range(1, k + 1)]
    base = SullivanAlgebra([(w, 3) for w in ws] + [("u", 3 * k - 1)], {"u": "*".join(ws)}, name="B")
    nfib = draw(st.integers(1, 2))
    pairs = [(a, b) for i, a in enumerate(ws) for b in ws[i + 1 :]]
    d = {}
    for j in range(nfib):
        chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=3, unique=True))
        coeffs = draw(st.lists(st.sampled_from([1, -1, 2]), min_size=len(chosen), max_size=len(chosen)))
        d[f"v{j}"] = " + ".join(f"{c}*{a}*{b}" for c, (a, b) in zip(coeffs, chosen))
    return KsExtension(base, [(f"v{j}", 5) for j in range(nfib)], d, name="E")


def random_poly(rng: random.Random, alg: SullivanAlgebra, degree: int, terms: int = 3) -> Polynomial:
    monos = alg.ring.monomials(degree)
    if not monos:
        return Polynomial.zero(alg.ring)
    picked = {rng.choice(monos): Fraction(rng.choice([1, -1, 2, -3]), rng.choice([1, 1, 2])) for _ in range(terms)}
    return Polynomial(alg.ring, picked)


@st.composite
def algebra_with_polys(draw, count=3):
    """A random algebra with ``count`` random homogeneous elements of degree <= 8."""
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    alg = random_algebra(rng, draw(st.integers(1, 4)))
    polys = [random_poly(rng, alg, draw(st.integers(0, 8))) for _ in range(count)]
    return alg, polys
