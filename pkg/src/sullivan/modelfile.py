"""The `.sul` text format: algebras, KS-extensions and morphisms.

A file is a sequence of lines.  Block headers::

    algebra B
    extension E over B          # B may name an algebra or an extension
    morphism f : A -> C         # ends may name algebras or extensions (their totals)

and, inside blocks::

    gen x : 3
    d x = 3/2*w1*w2 - u^2
    map x = y + z

Top-level ``meta key = free text`` lines carry metadata.  ``#`` starts a
comment.  Products need an explicit ``*``; ``^`` binds to a single generator.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .cdga import Generator, GradedRing, KsExtension, Morphism, Polynomial, SullivanAlgebra
from .errors import ParseError, SullivanError

MAX_EXPONENT = 512
MAX_NESTING = 100

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)|(?P<ident>[A-Za-z][A-Za-z0-9_']*)|(?P<int>[0-9]+)|(?P<arrow>->)|(?P<op>[-+*/^():=,])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, op, eol
    text: str
    line: int
    column: int


def _describe(tok: Token) -> str:
    return "end of line" if tok.kind == "eol" else repr(tok.text)


def tokenize_line(text: str, line: int) -> list:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            if kind == "arrow":
                kind = "op"
            out.append(Token(kind, m.group(), line, pos + 1))
        pos = m.end()
    out.append(Token("eol", "", line, n + 1))
    return out


class _Cursor:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eol":
            self.pos += 1
        return t

    def fail(self, expected, what: str | None = None):
        t = self.tok
        raise ParseError(what or f"unexpected {_describe(t)}", t.line, t.column, expected)

    def expect_op(self, op: str) -> Token:
        if self.tok.kind == "op" and self.tok.text == op:
            return self.advance()
        self.fail([repr(op)])

    def expect_ident(self, what="identifier") -> Token:
        if self.tok.kind == "ident":
            return self.advance()
        self.fail([what])

    def expect_int(self) -> Token:
        if self.tok.kind == "int":
            return self.advance()
        self.fail(["integer"])

    def expect_eol(self):
        if self.tok.kind != "eol":
            self.fail(["end of line"])

    def at_op(self, *ops) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops


_PRIMARY_START = ["'('", "'-'", "generator", "number"]


class _ExprParser:
    """expr := term (('+'|'-') term)* ; term := unary ('*' unary)* ;
    unary := '-' unary | primary ; primary := INT ['/' INT] | IDENT ['^' INT] | '(' expr ')'."""

    def __init__(self, cur: _Cursor, ring: GradedRing):
        self.cur = cur
        self.ring = ring
        self.depth = 0

    def expr(self) -> Polynomial:
        acc = self.term()
        while self.cur.at_op("+", "-"):
            op = self.cur.advance().text
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> Polynomial:
        acc = self.unary()
        while self.cur.at_op("*"):
            self.cur.advance()
            acc = acc * self.unary()
        return acc

    def unary(self) -> Polynomial:
        if self.cur.at_op("-"):
            tok = self.cur.advance()
            self._enter(tok)
            out = -self.unary()
            self.depth -= 1
            return out
        return self.primary()

    def _enter(self, tok: Token):
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise ParseError("expression nested too deeply", tok.line, tok.column)

    def primary(self) -> Polynomial:
        cur = self.cur
        tok = cur.tok
        if tok.kind == "int":
            cur.advance()
            value = Fraction(int(tok.text))
            if cur.at_op("/"):
                cur.advance()
                den = cur.expect_int()
                if int(den.text) == 0:
                    raise ParseError("zero denominator", den.line, den.column)
                value /= int(den.text)
            return Polynomial.constant(self.ring, value)
        if tok.kind == "ident":
            cur.advance()
            if tok.text not in self.ring.index:
                raise ParseError(f"unknown generator {tok.text!r}", tok.line, tok.column)
            g = Polynomial.generator(self.ring, tok.text)
            if cur.at_op("^"):
                cur.advance()
                e = cur.expect_int()
                k = int(e.text)
                if k > MAX_EXPONENT:
                    raise ParseError(f"exponent {k} exceeds {MAX_EXPONENT}", e.line, e.column)
                return g ** k
            return g
        if cur.at_op("("):
            cur.advance()
            self._enter(tok)
            out = self.expr()
            self.depth -= 1
            cur.expect_op(")")
            return out
        cur.fail(_PRIMARY_START)


def parse_polynomial(text: str, ring: GradedRing, line: int = 1) -> Polynomial:
    """Parse a single polynomial expression over ``ring``."""
    cur = _Cursor(tokenize_line(text, line))
    value = _ExprParser(cur, ring).expr()
    cur.expect_eol()
    return value


@dataclass
class ParseWarning:
    message: str
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}: warning: {self.message}"


@dataclass
class ModelDocument:
    algebras: dict = field(default_factory=dict)
    extensions: dict = field(default_factory=dict)
    morphisms: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    order: list = field(default_factory=list)  # (kind, name) in file order
    extension_bases: dict = field(default_factory=dict)  # extension name -> referenced name
    morphism_ends: dict = field(default_factory=dict)  # morphism name -> (source ref, target ref)
    warnings: list = field(default_factory=list, compare=False)

    def algebra(self, name: str) -> SullivanAlgebra:
        """An algebra by name; an extension name yields its total algebra."""
        if name in self.algebras:
            return self.algebras[name]
        if name in self.extensions:
            return self.extensions[name].total
        raise KeyError(name)

    def names(self) -> list:
        return [n for _, n in self.order]

    def kind_of(self, name: str) -> str | None:
        for k, n in self.order:
            if n == name:
                return k
        return None


class _Block:
    def __init__(self, kind, name, header: Token):
        self.kind = kind
        self.name = name
        self.header = header
        self.gens: list = []  # (Generator, Token)
        self.lines: list = []  # (keyword, name token, cursor positioned at expression)
        self.base_ref = None
        self.ends = None


def _collect(text: str) -> tuple:
    meta = {}
    blocks: list = []
    current = None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        if re.match(r"\s*meta\b", body):
            m = re.match(r"\s*meta\s+([A-Za-z][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$", body)
            if m is None:
                col = len(body) - len(body.lstrip()) + 5
                raise ParseError("malformed metadata line", lineno, col, ["metadata key", "'='"])
            meta[m.group(1)] = m.group(2)
            continue
        cur = _Cursor(tokenize_line(body, lineno))
        head = cur.tok
        if head.kind != "ident":
            cur.fail(["'algebra'", "'extension'", "'morphism'", "'meta'", "'gen'", "'d'", "'map'"])
        kw = head.text
        if kw == "algebra":
            cur.advance()
            name = cur.expect_ident("block name")
            cur.expect_eol()
            current = _Block("algebra", name.text, name)
            blocks.append(current)
            continue
        if kw == "extension":
            cur.advance()
            name = cur.expect_ident("block name")
            over = cur.tok
            if not (over.kind == "ident" and over.text == "over"):
                cur.fail(["'over'"])
            cur.advance()
            ref = cur.expect_ident("algebra or extension name")
            cur.expect_eol()
            current = _Block("extension", name.text, name)
            current.base_ref = ref
            blocks.append(current)
            continue
        if kw == "morphism":
            cur.advance()
            name = cur.expect_ident("block name")
            cur.expect_op(":")
            src = cur.expect_ident("algebra or extension name")
            cur.expect_op("->")
            tgt = cur.expect_ident("algebra or extension name")
            cur.expect_eol()
            current = _Block("morphism", name.text, name)
            current.ends = (src, tgt)
            blocks.append(current)
            continue
        if kw in ("gen", "d", "map"):
            if current is None:
                raise ParseError(f"'{kw}' outside of a block", head.line, head.column, ["'algebra'", "'extension'", "'morphism'"])
            allowed = {"algebra": ("gen", "d"), "extension": ("gen", "d"), "morphism": ("map",)}[current.kind]
            if kw not in allowed:
                raise ParseError(
                    f"'{kw}' is not allowed in a {current.kind} block", head.line, head.column, [repr(a) for a in allowed]
                )
            cur.advance()
            gname = cur.expect_ident("generator name")
            if kw == "gen":
                cur.expect_op(":")
                deg = cur.expect_int()
                cur.expect_eol()
                k = int(deg.text)
                if k < 1:
                    raise ParseError("generator degree must be at least 1", deg.line, deg.column)
                current.gens.append((Generator(gname.text, k), gname))
            else:
                cur.expect_op("=")
                if cur.tok.kind == "eol":
                    cur.fail(_PRIMARY_START)
                current.lines.append((kw, gname, cur))
            continue
        cur.fail(["'algebra'", "'extension'", "'morphism'", "'meta'", "'gen'", "'d'", "'map'"])
    return meta, blocks


def _parse_expr(cur: _Cursor, ring: GradedRing) -> Polynomial:
    value = _ExprParser(cur, ring).expr()
    cur.expect_eol()
    return value


def _check_degree(value: Polynomial, want: int, cur: _Cursor, start: Token, what: str):
    degs = value.degrees()
    if degs and degs != {want}:
        raise ParseError(f"{what} has degree {sorted(degs)}, expected {want}", start.line, start.column)


def parse(text) -> ModelDocument:
    """Parse a model document.  All failures raise :class:`ParseError` with a position."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid UTF-8 at byte {exc.start}", 1, 1) from None
    meta, blocks = _collect(text)
    doc = ModelDocument(metadata=meta)
    for blk in blocks:
        if doc.kind_of(blk.name) is not None:
            raise ParseError(f"duplicate block name {blk.name!r}", blk.header.line, blk.header.column)
        try:
            if blk.kind == "algebra":
                _build_algebra(doc, blk)
            elif blk.kind == "extension":
                _build_extension(doc, blk)
            else:
                _build_morphism(doc, blk)
        except ParseError:
            raise
        except SullivanError as exc:
            raise ParseError(str(exc), blk.header.line, blk.header.column) from None
        doc.order.append((blk.kind, blk.name))
    return doc


def _gens_ring(blk, extra=()) -> GradedRing:
    seen = {g.name for g in extra}
    for g, tok in blk.gens:
        if g.name in seen:
            raise ParseError(f"duplicate generator {g.name!r}", tok.line, tok.column)
        seen.add(g.name)
    return GradedRing.of(tuple(g for g, _ in blk.gens))


def _differentials(doc, blk, ring: GradedRing, own: dict) -> dict:
    out = {}
    for kw, gname, cur in blk.lines:
        g = own.get(gname.text)
        if g is None:
            raise ParseError(f"'d' for generator {gname.text!r} not declared in this block", gname.line, gname.column)
        if gname.text in out:
            raise ParseError(f"second differential for {gname.text!r}", gname.line, gname.column)
        start = cur.tok
        value = _parse_expr(cur, ring)
        _check_degree(value, g.degree + 1, cur, start, f"d {gname.text}")
        if not value and _nontrivial_syntax(cur):
            doc.warnings.append(ParseWarning(f"d {gname.text} is 0 after normalization", start.line, start.column))
        out[gname.text] = value
    return out


def _nontrivial_syntax(cur: _Cursor) -> bool:
    toks = [t for t in cur.tokens if t.kind != "eol"]
    eq = next(i for i, t in enumerate(toks) if t.kind == "op" and t.text == "=")
    rhs = toks[eq + 1 :]
    return any(t.kind == "ident" for t in rhs) or any(t.kind == "int" and int(t.text) != 0 for t in rhs)


def _build_algebra(doc: ModelDocument, blk: _Block):
    ring = _gens_ring(blk)
    own = {g.name: g for g, _ in blk.gens}
    d = _differentials(doc, blk, ring, own)
    doc.algebras[blk.name] = SullivanAlgebra(ring.gens, d, name=blk.name)


def _build_extension(doc: ModelDocument, blk: _Block):
    ref = blk.base_ref
    try:
        base = doc.algebra(ref.text)
    except KeyError:
        raise ParseError(f"unknown algebra or extension {ref.text!r}", ref.line, ref.column) from None
    for g, tok in blk.gens:
        if g.name in base.ring.index:
            raise ParseError(f"generator {g.name!r} already belongs to the base", tok.line, tok.column)
    _gens_ring(blk)
    fiber = tuple(g for g, _ in blk.gens)
    scratch = KsExtension(base, fiber, {}, name=blk.name)
    ring = scratch.total.ring
    own = {g.name: g for g in fiber}
    for kw, gname, cur in blk.lines:
        if gname.text in base.ring.index:
            raise ParseError(f"differential of base generator {gname.text!r} is fixed by the base", gname.line, gname.column)
    d = _differentials(doc, blk, ring, own)
    doc.extensions[blk.name] = KsExtension(base, fiber, d, name=blk.name)
    doc.extension_bases[blk.name] = ref.text


def _build_morphism(doc: ModelDocument, blk: _Block):
    src_tok, tgt_tok = blk.ends
    ends = []
    for tok in (src_tok, tgt_tok):
        try:
            ends.append(doc.algebra(tok.text))
        except KeyError:
            raise ParseError(f"unknown algebra or extension {tok.text!r}", tok.line, tok.column) from None
    if blk.gens:
        g, tok = blk.gens[0]
        raise ParseError("'gen' is not allowed in a morphism block", tok.line, tok.column)
    src, tgt = ends
    images = {}
    for kw, gname, cur in blk.lines:
        if gname.text not in src.ring.index:
            raise ParseError(f"unknown source generator {gname.text!r}", gname.line, gname.column)
        if gname.text in images:
            raise ParseError(f"second image for {gname.text!r}", gname.line, gname.column)
        start = cur.tok
        value = _parse_expr(cur, tgt.ring)
        _check_degree(value, src.generator(gname.text).degree, cur, start, f"image of {gname.text}")
        images[gname.text] = value
    doc.morphisms[blk.name] = Morphism(src, tgt, images, name=blk.name)
    doc.morphism_ends[blk.name] = (src_tok.text, tgt_tok.text)


def load(path) -> ModelDocument:
    with open(path, "rb") as fh:
        return parse(fh.read())


# -- serialization -----------------------------------------------------------


def serialize(doc: ModelDocument) -> str:
    """Canonical text; ``parse(serialize(doc)) == doc``."""
    out = []
    for key in sorted(doc.metadata):
        out.append(f"meta {key} = {doc.metadata[key]}")
    for kind, name in doc.order:
        if out:
            out.append("")
        if kind == "algebra":
            alg = doc.algebras[name]
            out.append(f"algebra {name}")
            out.extend(f"gen {g.name} : {g.degree}" for g in alg.generators)
            out.extend(f"d {g.name} = {v}" for g, v in zip(alg.generators, alg.d) if v)
        elif kind == "extension":
            ks = doc.extensions[name]
            out.append(f"extension {name} over {doc.extension_bases[name]}")
            out.extend(f"gen {g.name} : {g.degree}" for g in ks.fiber_generators)
            for g in ks.fiber_generators:
                v = ks.D(g.name)
                if v:
                    out.append(f"d {g.name} = {v}")
        else:
            f = doc.morphisms[name]
            src, tgt = doc.morphism_ends[name]
            out.append(f"morphism {name} : {src} -> {tgt}")
            out.extend(f"map {g.name} = {v}" for g, v in zip(f.source.generators, f.images) if v)
    return "\n".join(out) + "\n"


def document_of(*items, metadata=None) -> ModelDocument:
    """Wrap named algebras/extensions/morphisms built in code into a document.

    Extension bases and morphism ends are referenced by the ``name`` of the
    object they were built from, which must already be in the document.
    """
    doc = ModelDocument(metadata=dict(metadata or {}))

    def ref_of(alg: SullivanAlgebra) -> str:
        for n, a in doc.algebras.items():
            if a == alg:
                return n
        for n, e in doc.extensions.items():
            if e.total == alg:
                return n
        raise ValueError(f"{alg!r} is not in the document")

    for item in items:
        if not item.name:
            raise ValueError(f"{item!r} has no name")
        if isinstance(item, SullivanAlgebra):
            doc.algebras[item.name] = item
            doc.order.append(("algebra", item.name))
        elif isinstance(item, KsExtension):
            doc.extension_bases[item.name] = ref_of(item.base)
            doc.extensions[item.name] = item
            doc.order.append(("extension", item.name))
        elif isinstance(item, Morphism):
            doc.morphism_ends[item.name] = (ref_of(item.source), ref_of(item.target))
            doc.morphisms[item.name] = item
            doc.order.append(("morphism", item.name))
        else:
            raise TypeError(f"cannot place {item!r} in a document")
    return doc
