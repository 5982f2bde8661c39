"""Line-oriented netlist format.

::

    # comment
    DOMAIN electrical
    NODE A B G
    BRANCH l1 A G
    R l1 6
    ISRC l1 const:3
    VSRC l1 step:8@0
    MESH M1 -l1 +l2
    TRANSFORMER l3 l4 2
    GYRATOR l5 l6 0.5
    REF G

Each directive occupies one line.  Values keep their literal text so a
printed netlist parses back to an identical one; lowering reads numeric
literals as exact rationals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from ..complex import build_complex, find_meshes
from ..elements import DOMAINS, Element, ElementKind, Transducer, parse_source
from ..errors import (
    NetlistSyntaxError,
    NoReferenceNode,
    TontiError,
    UnknownDirective,
)
from ..model import Model, build_model

__all__ = [
    "BranchDecl",
    "DomainDecl",
    "ElementDecl",
    "MeshDecl",
    "Netlist",
    "NodeDecl",
    "RefDecl",
    "SourceDecl",
    "TransducerDecl",
    "load",
    "lower",
    "parse",
    "print_netlist",
]

_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*\Z")
_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d{1,3})?(/\d+)?\Z")
_TOKEN = re.compile(r"[^ \t\r\f\v]+")

PASSIVE = {"R": ElementKind.RESISTOR, "L": ElementKind.INDUCTOR, "C": ElementKind.CAPACITOR}
SOURCES = {"VSRC": ElementKind.EFFORT_SOURCE, "ISRC": ElementKind.FLOW_SOURCE}
DIRECTIVES = ("DOMAIN", "NODE", "BRANCH", "R", "L", "C", "VSRC", "ISRC", "MESH",
              "TRANSFORMER", "GYRATOR", "REF")


def _span():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class DomainDecl:
    name: str
    span: Optional[tuple] = _span()

    def text(self):
        return f"DOMAIN {self.name}"


@dataclass(frozen=True)
class NodeDecl:
    ids: tuple
    span: Optional[tuple] = _span()

    def text(self):
        return "NODE " + " ".join(self.ids)


@dataclass(frozen=True)
class BranchDecl:
    id: str
    tail: str
    head: str
    span: Optional[tuple] = _span()

    def text(self):
        return f"BRANCH {self.id} {self.tail} {self.head}"


@dataclass(frozen=True)
class ElementDecl:
    letter: str
    branch: str
    literal: str
    span: Optional[tuple] = _span()

    def text(self):
        return f"{self.letter} {self.branch} {self.literal}"


@dataclass(frozen=True)
class SourceDecl:
    letter: str
    branch: str
    literal: str
    span: Optional[tuple] = _span()

    def text(self):
        return f"{self.letter} {self.branch} {self.literal}"


@dataclass(frozen=True)
class MeshDecl:
    id: str
    walk: tuple
    span: Optional[tuple] = _span()

    def text(self):
        parts = [("+" if s > 0 else "-") + b for b, s in self.walk]
        return f"MESH {self.id} " + " ".join(parts)


@dataclass(frozen=True)
class TransducerDecl:
    kind: str  # TRANSFORMER or GYRATOR
    left: str
    right: str
    literal: str
    span: Optional[tuple] = _span()

    def text(self):
        return f"{self.kind} {self.left} {self.right} {self.literal}"


@dataclass(frozen=True)
class RefDecl:
    ids: tuple
    span: Optional[tuple] = _span()

    def text(self):
        return "REF " + " ".join(self.ids)


Statement = Union[DomainDecl, NodeDecl, BranchDecl, ElementDecl, SourceDecl, MeshDecl,
                  TransducerDecl, RefDecl]


@dataclass(frozen=True)
class Netlist:
    """Parsed netlist: the directives in file order, comments dropped."""

    statements: tuple = ()

    def of(self, kind):
        return [s for s in self.statements if isinstance(s, kind)]

    @property
    def node_ids(self):
        return [n for s in self.of(NodeDecl) for n in s.ids]

    @property
    def branches(self):
        return self.of(BranchDecl)

    @property
    def meshes(self):
        return self.of(MeshDecl)


# parsing -----------------------------------------------------------------------------


def parse(text) -> Netlist:
    """Parse netlist text (``str`` or UTF-8 ``bytes``).

    Raises
    ------
    NetlistSyntaxError
        At the first offending token; ``UnknownDirective`` for an
        unrecognized keyword.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            before = bytes(text)[: exc.start]
            line = before.count(b"\n") + 1
            col = exc.start - (before.rfind(b"\n") + 1) + 1
            raise NetlistSyntaxError("input is not valid UTF-8", line=line, col=col) from None
    statements = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        body = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(body)]
        if tokens:
            statements.append(_statement(tokens, lineno))
    return Netlist(tuple(statements))


class _Cursor:
    def __init__(self, tokens, line):
        self.tokens = tokens
        self.line = line
        self.pos = 1

    def _end_col(self):
        word, col = self.tokens[-1]
        return col + len(word)

    def take(self, expected, pattern=None, check=None):
        if self.pos >= len(self.tokens):
            raise NetlistSyntaxError("line ends early", line=self.line, col=self._end_col(),
                                     expected=expected)
        word, col = self.tokens[self.pos]
        ok = pattern.match(word) if pattern is not None else True
        if ok and check is not None:
            ok = check(word)
        if not ok:
            raise NetlistSyntaxError(f"unexpected token {word!r}", line=self.line, col=col,
                                     expected=expected)
        self.pos += 1
        return word

    def rest(self):
        return len(self.tokens) - self.pos

    def done(self):
        if self.pos < len(self.tokens):
            word, col = self.tokens[self.pos]
            raise NetlistSyntaxError(f"unexpected token {word!r}", line=self.line, col=col,
                                     expected="end of line")


def _is_source(word):
    try:
        parse_source(word)
    except (ValueError, OverflowError):
        return False
    return True


def _is_value(word):
    if not _NUMBER.match(word):
        return False
    try:
        Fraction(word)
    except (ValueError, ZeroDivisionError, OverflowError):
        return False
    return True


def _statement(tokens, line):
    word, col = tokens[0]
    span = (line, col)
    cur = _Cursor(tokens, line)
    if word not in DIRECTIVES:
        raise UnknownDirective(f"unknown directive {word!r}", line=line, col=col,
                               expected=", ".join(DIRECTIVES))
    if word == "DOMAIN":
        name = cur.take("domain name (" + ", ".join(DOMAINS) + ")", check=lambda w: w in DOMAINS)
        cur.done()
        return DomainDecl(name, span)
    if word in ("NODE", "REF"):
        ids = [cur.take("identifier", _ID)]
        while cur.rest():
            ids.append(cur.take("identifier", _ID))
        return (NodeDecl if word == "NODE" else RefDecl)(tuple(ids), span)
    if word == "BRANCH":
        bid = cur.take("branch identifier", _ID)
        tail = cur.take("tail node", _ID)
        head = cur.take("head node", _ID)
        cur.done()
        return BranchDecl(bid, tail, head, span)
    if word in PASSIVE:
        bid = cur.take("branch identifier", _ID)
        lit = cur.take("numeric value", check=_is_value)
        cur.done()
        return ElementDecl(word, bid, lit, span)
    if word in SOURCES:
        bid = cur.take("branch identifier", _ID)
        lit = cur.take("source const:<v>, step:<v>@<t> or sin:<amp>,<hz>[,<phase>]",
                       check=_is_source)
        cur.done()
        return SourceDecl(word, bid, lit, span)
    if word == "MESH":
        mid = cur.take("mesh identifier", _ID)
        walk = []
        signed = re.compile(r"[+-][A-Za-z_][A-Za-z0-9_.]*\Z")
        walk.append(cur.take("signed branch such as +l1", signed))
        while cur.rest():
            walk.append(cur.take("signed branch such as +l1", signed))
        return MeshDecl(mid, tuple((w[1:], 1 if w[0] == "+" else -1) for w in walk), span)
    # TRANSFORMER, GYRATOR
    left = cur.take("left branch", _ID)
    right = cur.take("right branch", _ID)
    lit = cur.take("nonzero modulus", check=lambda w: _is_value(w) and Fraction(w) != 0)
    cur.done()
    return TransducerDecl(word, left, right, lit, span)


def print_netlist(netlist: Netlist) -> str:
    """Render a netlist; ``parse(print_netlist(n)) == n``."""
    return "".join(s.text() + "\n" for s in netlist.statements)


# lowering --------------------------------------------------------------------------------


def _exact(literal):
    return Fraction(literal)


def lower(netlist: Netlist) -> Model:
    """Validate a netlist and turn it into a :class:`~tonti.model.Model`.

    Meshes are discovered from a spanning forest when none are declared.
    Errors raised by the model checks carry the span of the directive
    that introduced the offending entity.
    """
    spans = {}
    domain = "electrical"
    branch_domain = {}
    branches, meshes, elements, transducers, refs = [], [], [], [], []
    first_span = None
    for st in netlist.statements:
        first_span = first_span or st.span
        if isinstance(st, DomainDecl):
            domain = st.name
        elif isinstance(st, NodeDecl):
            for n in st.ids:
                spans.setdefault(n, st.span)
        elif isinstance(st, BranchDecl):
            spans.setdefault(st.id, st.span)
            branch_domain[st.id] = domain
            branches.append((st.id, st.tail, st.head))
        elif isinstance(st, MeshDecl):
            spans.setdefault(st.id, st.span)
            meshes.append((st.id, st.walk))
        elif isinstance(st, RefDecl):
            refs.extend(st.ids)
            for n in st.ids:
                spans.setdefault(("ref", n), st.span)
        elif isinstance(st, ElementDecl):
            elements.append((st, PASSIVE[st.letter], _exact(st.literal)))
        elif isinstance(st, SourceDecl):
            elements.append((st, SOURCES[st.letter], parse_source(st.literal)))
        else:
            transducers.append(st)

    node_ids = netlist.node_ids
    try:
        cx = build_complex(node_ids, branches, meshes or None)
        if not meshes:
            cx = cx.with_meshes(find_meshes(cx))
        els = []
        for st, kind, value in elements:
            dom = branch_domain.get(st.branch, domain)
            els.append(Element(st.branch, kind, value, dom, span=st.span))
        trs = [
            Transducer(st.kind.lower(), st.left, st.right, _exact(st.literal), span=st.span)
            for st in transducers
        ]
        if not refs:
            raise NoReferenceNode("the netlist has no REF directive", span=first_span or (1, 1))
        return build_model(cx, els, trs, refs, branch_domain)
    except TontiError as exc:
        if exc.span is None and exc.subject is not None:
            exc.span = spans.get(exc.subject) or spans.get(("ref", exc.subject))
        raise


def load(path) -> Model:
    """Read, parse and lower a netlist file."""
    with open(path, "rb") as fh:
        return lower(parse(fh.read()))
