import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from models import corpus_files, random_algebra, random_extension
from sullivan.cdga import SullivanAlgebra
from sullivan.errors import ParseError
from sullivan.modelfile import document_of, load, parse, parse_polynomial, serialize

TWO_STAGE = """\
# a comment
algebra B
gen w1 : 3
gen w2 : 3
gen u : 5
d u = w1*w2

extension E over B
gen v1 : 2
gen v2 : 4
d v1 = w2
d v2 = u + w1*v1
"""


def test_parse_two_stage_extension():
    doc = parse(TWO_STAGE)
    ks = doc.extensions["E"]
    tot = ks.total
    assert ks.base is doc.algebras["B"]
    assert doc.extension_bases == {"E": "B"}
    assert tot.differential_of("v2") == tot.gen("u") + tot.gen("w1") * tot.gen("v1")
    assert tot.differential_of("v1") == tot.gen("w2")


def test_empty_algebra():
    doc = parse("algebra A\n")
    assert len(doc.algebras["A"].generators) == 0
    assert doc.algebras["A"].validate().ok


def test_odd_square_warns():
    doc = parse("algebra A\ngen w1 : 3\ngen u : 5\nd u = w1*w1\n")
    assert not doc.algebras["A"].differential_of("u")
    (w,) = doc.warnings
    assert w.line == 4 and "0" in w.message


def test_sign_normal_form():
    doc = parse("algebra A\ngen w1 : 3\ngen w2 : 3\ngen u : 5\nd u = -w2*w1\n")
    assert "d u = w1*w2" in serialize(doc)


def test_rational_coefficients_preserved():
    doc = parse("algebra A\ngen x : 2\ngen y : 3\nd y = 5/3*x^2\n")
    assert doc.algebras["A"].differential_of("y").terms[(2, 0)] == Fraction(5, 3)
    text = serialize(doc)
    assert "5/3" in text
    assert parse(text) == doc


def test_morphism_and_meta():
    text = "meta title = t\nalgebra A\ngen x : 3\n\nalgebra C\ngen y : 3\n\nmorphism f : A -> C\nmap x = 2*y\n"
    doc = parse(text)
    assert doc.metadata == {"title": "t"}
    f = doc.morphisms["f"]
    assert f.apply(doc.algebras["A"].gen("x")) == doc.algebras["C"].gen("y").scale(2)
    assert parse(serialize(doc)) == doc


def test_parse_polynomial_precedence():
    alg = SullivanAlgebra([("x", 2), ("y", 2)])
    p = parse_polynomial("-x^2*y + 3*(x + y)*(x + y)", alg.ring)
    x, y = alg.gen("x"), alg.gen("y")
    assert p == -(x * x * y) + ((x + y) * (x + y)).scale(3)


@pytest.mark.parametrize(
    "text,line,column",
    [
        ("algebra A\ngen x 3\n", 2, 7),
        ("algebra A\ngen x : 3\nd x = x +\n", 3, 10),
        ("algebra A\ngen 3x : 3\n", 2, 5),
        ("gen x : 3\n", 1, 1),
        ("algebra A\ngen x : 3\nd x = x $ x\n", 3, 9),
    ],
)
def test_positioned_syntax_errors(text, line, column):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert (err.value.line, err.value.column) == (line, column)


def test_expected_tokens_listed():
    with pytest.raises(ParseError) as err:
        parse("algebra A\ngen x 3\n")
    assert err.value.expected == ("':'",)


def test_exponent_needs_a_generator():
    alg = SullivanAlgebra([("x", 2), ("y", 2)])
    with pytest.raises(ParseError) as err:
        parse_polynomial("(x + y)^2", alg.ring)
    assert err.value.column == 8


@pytest.mark.parametrize(
    "text,line",
    [
        ("algebra A\ngen x : 3\nd x = y\n", 3),
        ("algebra A\ngen x : 2\ngen y : 3\nd y = x\n", 4),
        ("extension E over Nope\ngen v : 3\n", 1),
        ("algebra A\ngen x : 3\n\nalgebra A\n", 4),
        ("algebra A\ngen x : 3\ngen x : 5\n", 3),
    ],
)
def test_semantic_errors_positioned(text, line):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.line == line and err.value.column >= 1


def test_invalid_utf8():
    with pytest.raises(ParseError) as err:
        parse(b"algebra A\n\xff\n")
    assert err.value.line >= 1


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.stem)
def test_corpus_round_trip(path):
    doc = load(path)
    text = serialize(doc)
    again = parse(text)
    assert again == doc
    assert serialize(again) == text


@given(st.integers(0, 2**32 - 1))
def test_fuzzed_round_trip(seed):
    rng = random.Random(seed)
    base = random_algebra(rng, rng.randint(0, 4), prefix="w", degrees=(2, 3, 3, 4, 5))
    items = [base]
    if rng.random() < 0.8:
        items.append(random_extension(rng, base, rng.randint(1, 3)))
    doc = document_of(*items, metadata={"title": f"case {seed}"})
    assert parse(serialize(doc)) == doc


@given(st.binary(max_size=200))
def test_arbitrary_bytes(data):
    try:
        parse(data)
    except ParseError as err:
        assert err.line >= 1 and err.column >= 1


@given(st.text(alphabet="agdexmpnvw123 :=+-*^/()#\n>", max_size=120))
def test_arbitrary_near_miss_text(text):
    try:
        parse(text)
    except ParseError as err:
        assert err.line >= 1 and err.column >= 1
