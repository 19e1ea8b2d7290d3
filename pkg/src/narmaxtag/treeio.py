"""Text formats for trees, grammars and derivations.

All three formats are round-trippable: emitters produce canonical
spacing, parsers accept arbitrary whitespace between tokens.

Tree format: parenthesized pre-order, one node written as ``label``,
``label↓`` or ``label★``, followed by an optional parenthesized child
list, e.g. ``expr0(expr1(par(c) op(×) expr2(u)) op(+) expr0★)``.
Labels that collide with the markers or the structural characters are
written in double quotes.  When the alphabets are known the label kinds
are resolved against them; otherwise internal and marked nodes are read
as nonterminals, ``ε`` as the empty leaf and everything else as a
terminal.

Grammar format: ``nonterminals:`` / ``terminals:`` / ``start:`` header
lines followed by named tree blocks ``initial NAME = TREE`` and
``auxiliary NAME = TREE``.

Derivation format: nested ``name[op@address -> child, ...]`` lists with
``op`` one of ``sub``/``adj`` and dotted Gorn addresses (``ε`` for the
root).
"""

from __future__ import annotations

import re
from typing import Iterable

from .trees import (
    EPSILON,
    FOOT_MARK,
    SUBSTITUTION_MARK,
    DerivationEdge,
    DerivationTree,
    ElementaryTree,
    GornAddress,
    Grammar,
    LabelKind,
    NodeLabel,
    Operation,
    SyntacticTree,
    TreeKind,
    format_address,
)

_SPECIAL = set("()\"" + SUBSTITUTION_MARK + FOOT_MARK)


class TextFormatError(ValueError):
    """Syntax error in one of the text formats, with a character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


# ---------------------------------------------------------------------------
# Tokenizing
# ---------------------------------------------------------------------------


class _Token:
    __slots__ = ("kind", "text", "marker", "quoted", "pos")

    def __init__(self, kind, text, pos, marker=None, quoted=False):
        self.kind = kind  # "label", "(", ")"
        self.text = text
        self.marker = marker
        self.quoted = quoted
        self.pos = pos


def _tokenize_tree(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "()":
            tokens.append(_Token(ch, ch, i))
            i += 1
            continue
        if ch in (SUBSTITUTION_MARK, FOOT_MARK):
            raise TextFormatError("marker without a preceding label", i)
        start = i
        if ch == '"':
            i += 1
            parts = []
            while i < n and text[i] != '"':
                if text[i] == "\\" and i + 1 < n:
                    parts.append(text[i + 1])
                    i += 2
                else:
                    parts.append(text[i])
                    i += 1
            if i >= n:
                raise TextFormatError("unterminated quoted label", start)
            i += 1
            label, quoted = "".join(parts), True
        else:
            while i < n and not text[i].isspace() and text[i] not in _SPECIAL:
                i += 1
            label, quoted = text[start:i], False
        marker = None
        if i < n and text[i] in (SUBSTITUTION_MARK, FOOT_MARK):
            marker = text[i]
            i += 1
        tokens.append(_Token("label", label, start, marker=marker, quoted=quoted))
    return tokens


# ---------------------------------------------------------------------------
# Tree format
# ---------------------------------------------------------------------------


class _NodeSpec:
    __slots__ = ("name", "marker", "quoted", "children", "pos")

    def __init__(self, name, marker, quoted, pos):
        self.name = name
        self.marker = marker
        self.quoted = quoted
        self.children: list[_NodeSpec] = []
        self.pos = pos


def _parse_node(tokens: list[_Token], i: int) -> tuple[_NodeSpec, int]:
    if i >= len(tokens) or tokens[i].kind != "label":
        pos = tokens[i].pos if i < len(tokens) else (tokens[-1].pos if tokens else 0)
        raise TextFormatError("expected a node label", pos)
    tok = tokens[i]
    node = _NodeSpec(tok.text, tok.marker, tok.quoted, tok.pos)
    i += 1
    if i < len(tokens) and tokens[i].kind == "(":
        i += 1
        while i < len(tokens) and tokens[i].kind != ")":
            child, i = _parse_node(tokens, i)
            node.children.append(child)
        if i >= len(tokens):
            raise TextFormatError("missing ')'", tokens[-1].pos)
        if not node.children:
            raise TextFormatError("empty child list", tokens[i].pos)
        i += 1
    return node, i


def _resolve_label(
    spec: _NodeSpec,
    nonterminals: frozenset[str] | None,
    terminals: frozenset[str] | None,
) -> NodeLabel:
    site = spec.marker == SUBSTITUTION_MARK
    foot = spec.marker == FOOT_MARK
    name = spec.name
    if not name:
        raise TextFormatError("empty label", spec.pos)
    if nonterminals is not None or terminals is not None:
        if not spec.quoted and name in (nonterminals or frozenset()):
            return NodeLabel.nonterminal(name, site=site, foot=foot)
        if not spec.quoted and name == EPSILON:
            return NodeLabel.epsilon()
        if name in (terminals or frozenset()):
            if spec.marker:
                raise TextFormatError(f"terminal {name!r} cannot carry a marker", spec.pos)
            return NodeLabel.terminal(name)
        raise TextFormatError(f"label {name!r} is not in the alphabets", spec.pos)
    if spec.children or spec.marker:
        if spec.quoted:
            raise TextFormatError("quoted labels denote terminals", spec.pos)
        return NodeLabel.nonterminal(name, site=site, foot=foot)
    if name == EPSILON and not spec.quoted:
        return NodeLabel.epsilon()
    return NodeLabel.terminal(name)


def parse_tree(
    text: str,
    *,
    nonterminals: Iterable[str] | None = None,
    terminals: Iterable[str] | None = None,
) -> SyntacticTree:
    tokens = _tokenize_tree(text)
    if not tokens:
        raise TextFormatError("empty tree text", 0)
    spec, i = _parse_node(tokens, 0)
    if i != len(tokens):
        raise TextFormatError("trailing tokens after tree", tokens[i].pos)
    nts = None if nonterminals is None else frozenset(nonterminals)
    ts = None if terminals is None else frozenset(terminals)

    labels: dict[int, NodeLabel] = {}
    children: dict[int, tuple[int, ...]] = {}
    counter = [0]

    def build(node: _NodeSpec) -> int:
        counter[0] += 1
        nid = counter[0]
        labels[nid] = _resolve_label(node, nts, ts)
        children[nid] = tuple(build(kid) for kid in node.children)
        return nid

    root = build(spec)
    return SyntacticTree(root, labels, children)


def _format_label(label: NodeLabel) -> str:
    name = label.name
    if label.kind is LabelKind.EPSILON:
        return EPSILON
    needs_quote = (
        not name
        or any(ch.isspace() or ch in _SPECIAL for ch in name)
        or (label.kind is LabelKind.TERMINAL and name == EPSILON)
    )
    if needs_quote:
        if label.kind is not LabelKind.TERMINAL:
            raise ValueError(f"nonterminal name {name!r} contains reserved characters")
        name = '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if label.substitution_marker:
        name += SUBSTITUTION_MARK
    if label.foot_marker:
        name += FOOT_MARK
    return name


def format_tree(tree: SyntacticTree) -> str:
    def emit(nid: int) -> str:
        text = _format_label(tree.label(nid))
        kids = tree.child_ids(nid)
        if kids:
            text += "(" + " ".join(emit(k) for k in kids) + ")"
        return text

    return emit(tree.root)


# ---------------------------------------------------------------------------
# Grammar format
# ---------------------------------------------------------------------------


def parse_grammar(text: str) -> Grammar:
    nonterminals: frozenset[str] | None = None
    terminals: frozenset[str] | None = None
    start: str | None = None
    initials: list[ElementaryTree] = []
    auxiliaries: list[ElementaryTree] = []
    offset = 0
    for raw in text.splitlines():
        line = raw.strip()
        pos = offset
        offset += len(raw) + 1
        if not line:
            continue
        head, _, rest = line.partition(":")
        if head in ("nonterminals", "terminals", "start") and _:
            symbols = [tok.text for tok in _tokenize_tree(rest) if tok.kind == "label"]
            if head == "nonterminals":
                nonterminals = frozenset(symbols)
            elif head == "terminals":
                terminals = frozenset(symbols)
            else:
                if len(symbols) != 1:
                    raise TextFormatError("start line needs exactly one symbol", pos)
                start = symbols[0]
            continue
        match = re.match(r"(initial|auxiliary)\s+([\w.\-]+)\s*=\s*(.+)$", line)
        if not match:
            raise TextFormatError(f"cannot parse grammar line {line!r}", pos)
        if nonterminals is None or terminals is None or start is None:
            raise TextFormatError("tree blocks must come after the header lines", pos)
        kind = TreeKind.INITIAL if match.group(1) == "initial" else TreeKind.AUXILIARY
        tree = parse_tree(match.group(3), nonterminals=nonterminals, terminals=terminals)
        bucket = initials if kind is TreeKind.INITIAL else auxiliaries
        bucket.append(ElementaryTree(match.group(2), kind, tree))
    if nonterminals is None or terminals is None or start is None:
        raise TextFormatError("grammar is missing header lines", 0)
    return Grammar(nonterminals, terminals, start, tuple(initials), tuple(auxiliaries))


def format_grammar(grammar: Grammar) -> str:
    lines = [
        "nonterminals: " + " ".join(sorted(grammar.nonterminals)),
        "terminals: " + " ".join(sorted(grammar.terminals)),
        "start: " + grammar.start,
    ]
    for entry in grammar.initials:
        lines.append(f"initial {entry.name} = {format_tree(entry.tree)}")
    for entry in grammar.auxiliaries:
        lines.append(f"auxiliary {entry.name} = {format_tree(entry.tree)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Derivation format
# ---------------------------------------------------------------------------

_NAME_RE = re.compile(r"[\w.\-]+")
_ADDRESS_RE = re.compile(rf"{EPSILON}|\d+(?:\.\d+)*")


class _DerivationScanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, literal: str) -> None:
        self.skip_ws()
        if not self.text.startswith(literal, self.pos):
            raise TextFormatError(f"expected {literal!r}", self.pos)
        self.pos += len(literal)

    def name(self) -> str:
        self.skip_ws()
        match = _NAME_RE.match(self.text, self.pos)
        if not match:
            raise TextFormatError("expected an elementary-tree name", self.pos)
        self.pos = match.end()
        return match.group()

    def address(self) -> GornAddress:
        self.skip_ws()
        match = _ADDRESS_RE.match(self.text, self.pos)
        if not match:
            raise TextFormatError("expected a Gorn address", self.pos)
        self.pos = match.end()
        raw = match.group()
        return () if raw == EPSILON else tuple(int(p) for p in raw.split("."))


def parse_derivation(text: str) -> DerivationTree:
    scanner = _DerivationScanner(text)
    node = _parse_derivation_node(scanner)
    scanner.skip_ws()
    if scanner.pos != len(scanner.text):
        raise TextFormatError("trailing text after derivation", scanner.pos)
    return node


def _parse_derivation_node(scanner: _DerivationScanner) -> DerivationTree:
    name = scanner.name()
    edges: list[DerivationEdge] = []
    if scanner.peek() == "[":
        scanner.expect("[")
        while True:
            op_name = scanner.name()
            try:
                operation = Operation(op_name)
            except ValueError:
                raise TextFormatError(
                    f"unknown operation {op_name!r} (expected sub/adj)", scanner.pos
                ) from None
            scanner.expect("@")
            address = scanner.address()
            scanner.expect("->")
            child = _parse_derivation_node(scanner)
            edges.append(DerivationEdge(operation, address, child))
            if scanner.peek() == ",":
                scanner.expect(",")
                continue
            scanner.expect("]")
            break
    return DerivationTree(name, tuple(edges))


def format_derivation(derivation: DerivationTree) -> str:
    if not derivation.edges:
        return derivation.tree_name
    parts = [
        f"{edge.operation.value}@{format_address(edge.address)} -> "
        + format_derivation(edge.child)
        for edge in derivation.edges
    ]
    return f"{derivation.tree_name}[" + ", ".join(parts) + "]"
