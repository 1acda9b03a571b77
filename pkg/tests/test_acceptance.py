"""Acceptance criteria, one test each.

Each test reports a single PASS/FAIL line in the terminal summary (see
conftest.py).  Run this file directly to get the same lines without pytest.
"""

import random
from fractions import Fraction
from itertools import product

from click.testing import CliRunner

from models import (
    all_extensions,
    corpus_doc,
    corpus_files,
    random_algebra,
    random_extension,
    random_poly,
    random_small_extension,
    random_tower,
)
from oracle import Model, d_squared_zero, lemma_obstruction, obstruction_dims
from sullivan.cdga import Morphism, cohomology, compose_ks
from sullivan.cli import main
from sullivan.derivation import PhiDerivation, delta, identity_of
from sullivan.errors import ParseError
from sullivan.gottlieb import (
    evaluation_subgroups,
    gottlieb_groups,
    homotopy_centers,
    is_rg_map,
    is_w_map,
    obstruction_group,
)
from sullivan.modelfile import document_of, load, parse, serialize
from sullivan.splitting import split, verify_certificate
from test_derivation import _slices_compose_to_zero
from test_gottlieb import _bounds

CRITERIA = {
    1: "obstruction of the two-stage KS-extension is span{w1*}",
    2: "spherical fibrations at n = 2, 3 split off 2n-2 spheres",
    3: "even-generator fibre: O = span{w1*}, one sphere splits",
    4: "pull-back along the pinch map: evaluation subgroup and G-map",
    5: "r.G-maps with full evaluation subgroup (two fixtures)",
    6: "homogeneous-space base has o(f) = 0",
    7: "pull-back square: o values and O(f o g') = O(f) + O(g')",
    8: "three-stage towers over even (l, m, n)",
    9: "maps into S3 x S5 x S9: r.G iff a = b = 0; cohomology of the base",
    10: "a G-map that is not a W-map",
    11: "even-sphere fibres give r.G-maps",
    12: "property suites on fixtures and random algebras",
    13: "parser fuzzing and corpus command",
}


def _o(ks):
    return obstruction_group(ks).o


def _basis(ks):
    return obstruction_group(ks).basis()


def test_criterion_01():
    rep = obstruction_group(corpus_doc("ex2_2").extensions["E"])
    assert rep.basis() == ["w1*"] and rep.o == 1


def test_criterion_02():
    for n in (2, 3):
        ks = corpus_doc(f"ex3_2_1_n{n}").extensions["E"]
        rep = obstruction_group(ks)
        assert rep.basis() == [f"w{i}*" for i in range(3, 2 * n + 1)]
        assert rep.o == 2 * n - 2
        cert = split(ks)
        assert cert.k == 2 * n - 2 and verify_certificate(cert).ok


def test_criterion_03():
    ks = corpus_doc("ex3_2_2").extensions["E"]
    assert _basis(ks) == ["w1*"]
    cert = split(ks)
    assert cert.k == 1 and verify_certificate(cert).ok


def test_criterion_04():
    doc = corpus_doc("ex3_3_2")
    ks = doc.extensions["E"]
    assert evaluation_subgroups(ks).duals() == ["w*", "u*"]
    assert gottlieb_groups(doc.algebras["CP2"]).duals() == ["u*"]
    assert is_rg_map(ks)


def test_criterion_05():
    results = {}
    for stem in ("ex3_3_3", "ex3_3_4"):
        ks = corpus_doc(stem).extensions["E"]
        results[stem] = (_o(ks), evaluation_subgroups(ks).dim, len(ks.base.generators))
    assert results == {"ex3_3_3": (0, 5, 5), "ex3_3_4": (0, 5, 5)}


def test_criterion_06():
    assert _o(corpus_doc("rem2_6_1").extensions["E"]) == 0


def test_criterion_07():
    n = 3
    ext = corpus_doc("ex3_5_1_n3").extensions
    assert _o(ext["G"]) == _o(ext["FG"]) == 2 * n - 2
    assert _o(ext["F"]) == 2 * n - 4
    assert _o(ext["Gp"]) == 2
    o_fg, o_f, o_g = _basis(ext["FG"]), _basis(ext["F"]), _basis(ext["Gp"])
    assert not set(o_f) & set(o_g)
    assert sorted(o_fg) == sorted(o_f + o_g)
    assert compose_ks(ext["F"], ext["Gp"]).total == ext["FG"].total


def tower_text(l, m, n):
    """Z: n odd spheres with top cell; Y -> Z kills w1..wl; X -> Y kills w1w2 and w_(l+1)..w_m."""
    ws = [f"w{i}" for i in range(1, n + 1)]
    lines = ["algebra Z"] + [f"gen {w} : 3" for w in ws] + [f"gen w : {3 * n - 1}", f"d w = {'*'.join(ws)}", ""]
    lines += ["extension Y over Z", f"gen v : {3 * l - 1}", f"d v = {'*'.join(ws[:l])}", ""]
    x_gens = [("u", 5, "w1*w2")]
    if m > l:
        x_gens.append(("up", 3 * (m - l) - 1, "*".join(ws[l:m])))
    lines += ["extension X over Y"] + [f"gen {g} : {k}" for g, k, _ in x_gens] + [f"d {g} = {v}" for g, _, v in x_gens]
    lines += ["", "extension XZ over Z", f"gen v : {3 * l - 1}"] + [f"gen {g} : {k}" for g, k, _ in x_gens]
    lines += [f"d v = {'*'.join(ws[:l])}"] + [f"d {g} = {v}" for g, _, v in x_gens]
    return "\n".join(lines) + "\n"


def even_triples():
    return [(l, m, n) for l in range(2, 9, 2) for m in range(l, 9, 2) for n in range(m, 9, 2)]


def test_criterion_08():
    for l, m, n in even_triples():
        doc = parse(tower_text(l, m, n))
        f, g, fg = doc.extensions["Y"], doc.extensions["X"], doc.extensions["XZ"]
        got = (_o(f), _o(g), _o(fg))
        assert got == (n - l, l - 2, l - m + n - 2), (l, m, n, got)
        assert compose_ks(f, g).total == fg.total


def test_criterion_09():
    doc = corpus_doc("ex3_6_2")
    b, e = doc.algebras["B"], doc.algebras["E"]
    values = [Fraction(0), Fraction(1), Fraction(-2), Fraction(1, 2)]
    for a, bb, c in product(values, repeat=3):
        f = Morphism(b, e, {"x": e.gen("v1").scale(a), "y": e.gen("v2").scale(bb), "u": e.gen("v3").scale(c)})
        assert f.validate().ok
        assert is_rg_map(f) == (a == 0 and bb == 0), (a, bb, c)
    dims = cohomology(b, 20).dims
    assert dims[16] == 1 and dims[17:21] == [0, 0, 0, 0]


def test_criterion_10():
    doc = corpus_doc("ex3_7")
    assert is_rg_map(doc.extensions["E"])
    assert not is_w_map(doc.morphisms["f"])
    assert homotopy_centers(doc.algebras["B"]).duals() == ["u*"]


def test_criterion_11():
    for tag in "abc":
        ks = corpus_doc(f"ex3_9_{tag}").extensions["E"]
        assert [g.name for g in ks.fiber_generators] == ["x", "y"]
        fib = ks.fiber
        assert fib.differential_of("y") == fib.gen("x") * fib.gen("x")
        assert is_rg_map(ks)


ELLIPTIC = [("ex3_3_2", "CP2"), ("ex3_3_2", "S4"), ("ex3_1", "B"), ("ex3_2_1_n2", "B"), ("rem2_6_1", "B"), ("ex3_7", "B")]


def test_criterion_12():
    rng = random.Random(20260101)
    algebras = []
    for path in corpus_files():
        doc = load(path)
        algebras += list(doc.algebras.values()) + [ks.total for ks in doc.extensions.values()]
    algebras += [random_algebra(rng, rng.randint(1, 4)) for _ in range(100)]
    for alg in algebras:
        assert alg.validate().ok and d_squared_zero(Model.of(alg))
    # delta^2 = 0 and Koszul signs on the random ones
    for alg in algebras[-100:]:
        for n in (2, 3, 4):
            assert _slices_compose_to_zero(identity_of(alg), n)
        vals = {g.name: random_poly(rng, alg, g.degree - 3) for g in alg.generators if g.degree >= 3}
        assert delta(delta(PhiDerivation(alg, 3, vals))).is_zero()
        p, q, r = (random_poly(rng, alg, rng.randint(1, 8)) for _ in range(3))
        assert (p * q) * r == p * (q * r)
        if p and q:
            sign = -1 if (p.degree() * q.degree()) % 2 else 1
            assert p * q == (q * p).scale(sign)
    # G(B) in G(B, E; f) and the bounds on o(f)
    exts = [ks for _, _, ks in all_extensions()] + [random_small_extension(rng) for _ in range(100)]
    for ks in exts:
        _bounds(ks)
    # subadditivity, with the basis-level inclusion
    for _ in range(100):
        outer, inner = random_tower(rng)
        o_fg, o_f, o_g = (obstruction_group(k) for k in (compose_ks(outer, inner), outer, inner))
        assert o_fg.o <= o_f.o + o_g.o
        assert set(o_fg.basis()) <= set(o_f.basis()) | set(o_g.basis())
    # oddly graded Gottlieb groups on elliptic fixtures
    for stem, name in ELLIPTIC:
        alg = corpus_doc(stem).algebras[name]
        assert all(n % 2 for n in gottlieb_groups(alg).nonzero_degrees())
    # brute-force oracle on every fixture (each degree has at most 12 generators)
    for ks in exts:
        degs = [g.degree for g in ks.total.generators]
        if max(degs.count(k) for k in degs) > 12:
            continue
        rep = obstruction_group(ks)
        base, total = Model.of(ks.base), Model.of(ks.total)
        assert rep.qualifying() == lemma_obstruction(base, total)
        assert rep.definition_b == obstruction_dims(base, total, rep.definition_b)
    # pure base: every map is an r.G-map
    base = corpus_doc("ex3_1").algebras["B"]
    for _ in range(20):
        assert is_rg_map(random_extension(rng, base, 2, prefix="f", degrees=(2, 3, 3, 5)))


def test_criterion_13():
    rng = random.Random(13)
    for i in range(100):
        base = random_algebra(rng, rng.randint(0, 4), prefix="w", degrees=(2, 3, 3, 4, 5))
        items = [base, random_extension(rng, base, rng.randint(1, 3))]
        doc = document_of(*items, metadata={"title": f"case {i}"})
        assert parse(serialize(doc)) == doc
    for _ in range(300):
        blob = bytes(rng.randrange(256) for _ in range(rng.randint(0, 80)))
        text = "".join(rng.choice("agdexmpnvw12 :=+-*^/()#\n") for _ in range(rng.randint(0, 80)))
        for data in (blob, text):
            try:
                parse(data)
            except ParseError as err:
                assert err.line >= 1 and err.column >= 1
    for path in corpus_files():
        load(path)
    res = CliRunner().invoke(main, ["corpus", "--jobs", "1"])
    assert res.exit_code == 0, res.output


if __name__ == "__main__":
    import sys

    failed = 0
    for k, title in CRITERIA.items():
        try:
            globals()[f"test_criterion_{k:02d}"]()
            status = "PASS"
        except AssertionError:
            status = "FAIL"
            failed += 1
        print(f"criterion {k:2d}: {status}  {title}")
    sys.exit(1 if failed else 0)
