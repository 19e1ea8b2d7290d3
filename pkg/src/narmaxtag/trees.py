"""Generic tree adjoining grammar machinery.

Trees, grammars and derivations are immutable values: every operation
returns a fresh tree and never touches its inputs.  Nodes are identified
by integer ids, but ids are an implementation detail -- whenever two
trees have to be compared, structural equality (same shape, same labels)
is the notion that matters, and incoming material is renumbered on every
splice so that vertex sets stay disjoint.

The two rewriting operations follow the usual set-level definitions:
substitution replaces a marked nonterminal leaf by the root of an
initial tree, adjunction excises an internal node, splices an auxiliary
tree in its place and re-hangs the excised node's children below the
auxiliary tree's foot.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping, Sequence, Union

GornAddress = tuple[int, ...]

ROOT_ADDRESS: GornAddress = ()

EPSILON = "ε"
SUBSTITUTION_MARK = "↓"
FOOT_MARK = "★"


class TagError(Exception):
    """Base class for grammar and tree-operation failures."""


class InvalidAddressError(TagError):
    """A Gorn address does not resolve to a node of the given tree."""


class UndefinedSubstitutionError(TagError):
    """Substitution preconditions are violated at the requested node."""


class UndefinedAdjunctionError(TagError):
    """Adjunction preconditions are violated at the requested node."""


class DanglingReferenceError(TagError):
    """A derivation refers to an elementary tree the grammar does not have."""


class InapplicableOperationError(TagError):
    """A derivation edge cannot be applied at its recorded address."""


def format_address(address: GornAddress) -> str:
    return EPSILON if not address else ".".join(str(i) for i in address)


class LabelKind(Enum):
    NONTERMINAL = "nonterminal"
    TERMINAL = "terminal"
    EPSILON = "epsilon"


@dataclass(frozen=True)
class NodeLabel:
    """Label of a tree node, plus its substitution/foot marker state."""

    kind: LabelKind
    name: str
    substitution_marker: bool = False
    foot_marker: bool = False

    def __post_init__(self) -> None:
        if self.substitution_marker and self.kind is not LabelKind.NONTERMINAL:
            raise ValueError("substitution marker requires a nonterminal label")
        if self.foot_marker and self.kind is not LabelKind.NONTERMINAL:
            raise ValueError("foot marker requires a nonterminal label")
        if self.substitution_marker and self.foot_marker:
            raise ValueError("a node cannot carry both markers")

    @staticmethod
    def nonterminal(name: str, *, site: bool = False, foot: bool = False) -> "NodeLabel":
        return NodeLabel(LabelKind.NONTERMINAL, name, site, foot)

    @staticmethod
    def terminal(symbol: str) -> "NodeLabel":
        return NodeLabel(LabelKind.TERMINAL, symbol)

    @staticmethod
    def epsilon() -> "NodeLabel":
        return NodeLabel(LabelKind.EPSILON, EPSILON)

    def same_symbol(self, other: "NodeLabel") -> bool:
        """Kind/name agreement, ignoring markers."""
        return self.kind is other.kind and self.name == other.name

    def key(self) -> tuple:
        return (self.kind.value, self.name, self.substitution_marker, self.foot_marker)


@dataclass(frozen=True, eq=False)
class SyntacticTree:
    """Finite ordered labeled tree.

    ``labels`` maps every node id to its label; ``children`` maps every
    node id to the ordered tuple of its child ids (leaves map to ``()``).
    Construction checks that the data actually forms a single rooted
    tree; labeling rules (internal nodes nonterminal, foot constraints)
    are the business of :func:`validate_grammar` and of the operations'
    own preconditions, so that malformed labelings can be represented
    and diagnosed.
    """

    root: int
    labels: Mapping[int, NodeLabel]
    children: Mapping[int, tuple[int, ...]]

    def __post_init__(self) -> None:
        labels = dict(self.labels)
        children = {nid: tuple(self.children.get(nid, ())) for nid in labels}
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "children", children)
        if self.root not in labels:
            raise ValueError("root id is not a labeled node")
        indegree = {nid: 0 for nid in labels}
        for parent, kids in children.items():
            for kid in kids:
                if kid not in labels:
                    raise ValueError(f"child id {kid} of node {parent} is unlabeled")
                indegree[kid] += 1
        if indegree[self.root] != 0:
            raise ValueError("root has an incoming edge")
        bad = [nid for nid, deg in indegree.items() if nid != self.root and deg != 1]
        if bad:
            raise ValueError(f"nodes {bad} do not have in-degree 1")
        if len(list(self.pre_order())) != len(labels):
            raise ValueError("not all nodes are reachable from the root")

    @staticmethod
    def _build(
        root: int,
        labels: dict[int, NodeLabel],
        children: dict[int, tuple[int, ...]],
    ) -> "SyntacticTree":
        # trusted fast path for operation-internal construction: the
        # caller guarantees complete, well-formed node/child maps
        tree = object.__new__(SyntacticTree)
        object.__setattr__(tree, "root", root)
        object.__setattr__(tree, "labels", labels)
        object.__setattr__(tree, "children", children)
        return tree

    # -- queries ---------------------------------------------------------

    def node_ids(self) -> frozenset[int]:
        return frozenset(self.labels)

    def label(self, nid: int) -> NodeLabel:
        return self.labels[nid]

    def child_ids(self, nid: int) -> tuple[int, ...]:
        return self.children[nid]

    def is_leaf(self, nid: int) -> bool:
        return not self.children[nid]

    def is_internal(self, nid: int) -> bool:
        return bool(self.children[nid])

    def pre_order(self, start: int | None = None) -> Iterator[int]:
        stack = [self.root if start is None else start]
        while stack:
            nid = stack.pop()
            yield nid
            stack.extend(reversed(self.children[nid]))

    def post_order(self) -> Iterator[int]:
        def walk(nid: int) -> Iterator[int]:
            for kid in self.children[nid]:
                yield from walk(kid)
            yield nid

        return walk(self.root)

    def leaves(self) -> Iterator[int]:
        return (nid for nid in self.pre_order() if self.is_leaf(nid))

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (parent, kid) for parent, kids in self.children.items() for kid in kids
        )

    def parent_map(self) -> dict[int, int]:
        return {kid: parent for parent, kids in self.children.items() for kid in kids}

    def foot_node(self) -> int | None:
        for nid in self.pre_order():
            if self.labels[nid].foot_marker:
                return nid
        return None

    def substitution_sites(self) -> tuple[int, ...]:
        return tuple(
            nid
            for nid in self.pre_order()
            if self.is_leaf(nid) and self.labels[nid].substitution_marker
        )

    def address_of(self, nid: int) -> GornAddress:
        parents = self.parent_map()
        path: list[int] = []
        cur = nid
        while cur != self.root:
            parent = parents.get(cur)
            if parent is None:
                raise InvalidAddressError(f"node {nid} is not part of the tree")
            path.append(self.children[parent].index(cur) + 1)
            cur = parent
        return tuple(reversed(path))

    # -- structure -------------------------------------------------------

    def renumbered(self, start: int) -> "SyntacticTree":
        """Copy with ids reassigned consecutively from ``start`` in pre-order."""
        mapping = {nid: start + i for i, nid in enumerate(self.pre_order())}
        labels = {mapping[nid]: self.labels[nid] for nid in mapping}
        children = {
            mapping[nid]: tuple(mapping[k] for k in self.children[nid])
            for nid in mapping
        }
        return SyntacticTree._build(mapping[self.root], labels, children)

    def max_id(self) -> int:
        return max(self.labels)

    def structural_key(self, start: int | None = None) -> tuple:
        nid = self.root if start is None else start
        return (
            self.labels[nid].key(),
            tuple(self.structural_key(kid) for kid in self.children[nid]),
        )

    def structurally_equal(self, other: "SyntacticTree") -> bool:
        return self.structural_key() == other.structural_key()


class TreeKind(Enum):
    INITIAL = "initial"
    AUXILIARY = "auxiliary"


@dataclass(frozen=True, eq=False)
class ElementaryTree:
    """A named catalog entry: an immutable template instantiated at use."""

    name: str
    kind: TreeKind
    tree: SyntacticTree


@dataclass(frozen=True, eq=False)
class Grammar:
    """Alphabets, start symbol and the elementary-tree catalogs."""

    nonterminals: frozenset[str]
    terminals: frozenset[str]
    start: str
    initials: tuple[ElementaryTree, ...]
    auxiliaries: tuple[ElementaryTree, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "nonterminals", frozenset(self.nonterminals))
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        object.__setattr__(self, "initials", tuple(self.initials))
        object.__setattr__(self, "auxiliaries", tuple(self.auxiliaries))

    def elementary(self) -> Iterator[ElementaryTree]:
        yield from self.initials
        yield from self.auxiliaries

    def find(self, name: str) -> ElementaryTree | None:
        for entry in self.elementary():
            if entry.name == name:
                return entry
        return None


class Operation(Enum):
    SUBSTITUTION = "sub"
    ADJUNCTION = "adj"


@dataclass(frozen=True)
class DerivationEdge:
    operation: Operation
    address: GornAddress
    child: "DerivationTree"

    def __post_init__(self) -> None:
        object.__setattr__(self, "address", tuple(self.address))
        if any(i < 1 for i in self.address):
            raise ValueError("Gorn address indices must be >= 1")


@dataclass(frozen=True)
class DerivationTree:
    """Record of which elementary trees were combined, where and how.

    Edge addresses always refer to the parent node's *original*
    elementary tree, never to the partially rewritten host.
    """

    tree_name: str
    edges: tuple[DerivationEdge, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(self.edges))
        seen = set()
        for edge in self.edges:
            if edge.address in seen:
                raise ValueError(
                    f"two edges of {self.tree_name!r} share address "
                    f"{format_address(edge.address)}"
                )
            seen.add(edge.address)

    def node_names(self) -> Iterator[str]:
        yield self.tree_name
        for edge in self.edges:
            yield from edge.child.node_names()

    def operation_count(self) -> int:
        return sum(1 + edge.child.operation_count() for edge in self.edges)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def node_at(tree: SyntacticTree, address: Sequence[int]) -> int:
    """Resolve a Gorn address; the empty address is the root."""
    nid = tree.root
    for depth, index in enumerate(address):
        kids = tree.child_ids(nid)
        if index < 1 or index > len(kids):
            raise InvalidAddressError(
                f"address {format_address(tuple(address))} leaves the tree at "
                f"step {depth + 1}"
            )
        nid = kids[index - 1]
    return nid


TreeLike = Union[SyntacticTree, ElementaryTree]


def _as_tree(value: TreeLike) -> SyntacticTree:
    return value.tree if isinstance(value, ElementaryTree) else value


def substitute(gamma: SyntacticTree, site: int, inner: TreeLike) -> SyntacticTree:
    """Replace the marked leaf ``site`` by a copy of the initial tree ``inner``.

    The incoming tree is renumbered pre-order starting at
    ``gamma.max_id() + 1`` so that the two vertex sets are disjoint; the
    result keeps every other id of ``gamma``.
    """
    inner_tree = _as_tree(inner)
    if site not in gamma.labels:
        raise UndefinedSubstitutionError(f"node {site} is not part of the host tree")
    label = gamma.label(site)
    if gamma.is_internal(site):
        raise UndefinedSubstitutionError("substitution target must be a leaf")
    if label.foot_marker:
        raise UndefinedSubstitutionError("cannot substitute at a foot node")
    if not label.substitution_marker:
        raise UndefinedSubstitutionError("target leaf is not marked for substitution")
    if inner_tree.foot_node() is not None:
        raise UndefinedSubstitutionError("cannot substitute an auxiliary tree")
    root_label = inner_tree.label(inner_tree.root)
    if not (
        label.kind is LabelKind.NONTERMINAL
        and root_label.kind is LabelKind.NONTERMINAL
        and label.name == root_label.name
    ):
        raise UndefinedSubstitutionError(
            f"label {label.name!r} does not match incoming root {root_label.name!r}"
        )

    base = gamma.max_id() + 1
    mapping = {nid: base + i for i, nid in enumerate(inner_tree.pre_order())}
    inst_root = mapping[inner_tree.root]
    labels = {nid: lab for nid, lab in gamma.labels.items() if nid != site}
    children = {
        nid: tuple(inst_root if kid == site else kid for kid in kids)
        for nid, kids in gamma.children.items()
        if nid != site
    }
    for nid, new in mapping.items():
        labels[new] = inner_tree.labels[nid]
        children[new] = tuple(mapping[k] for k in inner_tree.children[nid])
    root = inst_root if site == gamma.root else gamma.root
    return SyntacticTree._build(root, labels, children)


def adjoin(gamma: SyntacticTree, at: int, aux: TreeLike) -> SyntacticTree:
    """Splice a copy of the auxiliary tree ``aux`` in at internal node ``at``.

    The excised node's children re-attach below the copy's foot node,
    whose marker is cleared in the result.  Renumbering of the incoming
    tree is the same pre-order scheme used by :func:`substitute`.
    """
    aux_tree = _as_tree(aux)
    if at not in gamma.labels:
        raise UndefinedAdjunctionError(f"node {at} is not part of the host tree")
    if gamma.is_leaf(at):
        raise UndefinedAdjunctionError("adjunction target must have out-degree >= 1")
    foot = aux_tree.foot_node()
    if foot is None:
        raise UndefinedAdjunctionError("incoming tree has no foot node")
    label = gamma.label(at)
    root_label = aux_tree.label(aux_tree.root)
    if not (
        label.kind is LabelKind.NONTERMINAL
        and root_label.kind is LabelKind.NONTERMINAL
        and label.name == root_label.name
    ):
        raise UndefinedAdjunctionError(
            f"label {label.name!r} does not match incoming root {root_label.name!r}"
        )

    base = gamma.max_id() + 1
    mapping = {nid: base + i for i, nid in enumerate(aux_tree.pre_order())}
    inst_root = mapping[aux_tree.root]
    inst_foot = mapping[foot]
    labels = {nid: lab for nid, lab in gamma.labels.items() if nid != at}
    children = {
        nid: tuple(inst_root if kid == at else kid for kid in kids)
        for nid, kids in gamma.children.items()
        if nid != at
    }
    for nid, new in mapping.items():
        labels[new] = aux_tree.labels[nid]
        children[new] = tuple(mapping[k] for k in aux_tree.children[nid])
    foot_label = labels[inst_foot]
    labels[inst_foot] = NodeLabel(
        foot_label.kind, foot_label.name, foot_label.substitution_marker, False
    )
    children[inst_foot] = gamma.children[at]
    root = inst_root if at == gamma.root else gamma.root
    return SyntacticTree._build(root, labels, children)


def yield_of(tree: SyntacticTree) -> tuple[str, ...]:
    """Left-to-right leaf labels; epsilon leaves are elided."""
    out = []
    for nid in tree.pre_order():
        if tree.is_leaf(nid):
            label = tree.label(nid)
            if label.kind is not LabelKind.EPSILON:
                out.append(label.name)
    return tuple(out)


def is_saturated(tree: SyntacticTree) -> bool:
    """True iff every leaf is a terminal or epsilon."""
    return all(
        tree.label(nid).kind is not LabelKind.NONTERMINAL for nid in tree.leaves()
    )


def derive(derivation: DerivationTree, grammar: Grammar) -> SyntacticTree:
    """Evaluate a derivation tree into the derived syntactic tree.

    The root must name an initial tree whose root label is the start
    symbol.  Each edge's address is resolved against the parent's
    pristine elementary-tree instance before anything is applied, so the
    result does not depend on sibling order; operations are applied
    innermost-first for deterministic error reporting.
    """
    entry = grammar.find(derivation.tree_name)
    if entry is None:
        raise DanglingReferenceError(f"unknown elementary tree {derivation.tree_name!r}")
    root_label = entry.tree.label(entry.tree.root)
    if entry.kind is not TreeKind.INITIAL or root_label.name != grammar.start:
        raise InapplicableOperationError(
            f"derivation root {derivation.tree_name!r} is not an initial tree "
            f"rooted at {grammar.start!r}"
        )
    return _derive_node(derivation, grammar)


def _derive_node(derivation: DerivationTree, grammar: Grammar) -> SyntacticTree:
    entry = grammar.find(derivation.tree_name)
    if entry is None:
        raise DanglingReferenceError(f"unknown elementary tree {derivation.tree_name!r}")
    host = entry.tree.renumbered(1)
    resolved = []
    for edge in derivation.edges:
        try:
            target = node_at(host, edge.address)
        except InvalidAddressError as exc:
            raise InapplicableOperationError(
                f"address {format_address(edge.address)} is not a node of "
                f"{derivation.tree_name!r}"
            ) from exc
        resolved.append((edge, target))
    rank = {nid: pos for pos, nid in enumerate(host.post_order())}
    resolved.sort(key=lambda pair: rank[pair[1]])
    for edge, target in resolved:
        child_entry = grammar.find(edge.child.tree_name)
        if child_entry is None:
            raise DanglingReferenceError(
                f"unknown elementary tree {edge.child.tree_name!r}"
            )
        part = _derive_node(edge.child, grammar)
        try:
            if edge.operation is Operation.SUBSTITUTION:
                if child_entry.kind is not TreeKind.INITIAL:
                    raise InapplicableOperationError(
                        f"substitution edge targets auxiliary tree "
                        f"{child_entry.name!r}"
                    )
                host = substitute(host, target, part)
            else:
                if child_entry.kind is not TreeKind.AUXILIARY:
                    raise InapplicableOperationError(
                        f"adjunction edge targets initial tree {child_entry.name!r}"
                    )
                host = adjoin(host, target, part)
        except (UndefinedSubstitutionError, UndefinedAdjunctionError) as exc:
            raise InapplicableOperationError(
                f"cannot apply {edge.operation.value} of {edge.child.tree_name!r} "
                f"at {derivation.tree_name!r}@{format_address(edge.address)}: {exc}"
            ) from exc
    return host


# ---------------------------------------------------------------------------
# Grammar validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    tree: str | None = None
    address: str | None = None

    def __str__(self) -> str:
        where = ""
        if self.tree is not None:
            where = f" [{self.tree}" + (f"@{self.address}]" if self.address else "]")
        return f"{self.code}: {self.message}{where}"


def validate_grammar(grammar: Grammar) -> list[Diagnostic]:
    """Check every grammar and elementary-tree invariant.

    Returns an empty list when the grammar is well formed, otherwise one
    diagnostic per violation.  Never raises: broken grammars are data to
    be reported on, not errors.
    """
    out: list[Diagnostic] = []
    overlap = grammar.nonterminals & grammar.terminals
    if overlap:
        out.append(
            Diagnostic(
                "alphabets-overlap",
                "nonterminals and terminals share " + ", ".join(sorted(overlap)),
            )
        )
    if grammar.start not in grammar.nonterminals:
        out.append(
            Diagnostic(
                "start-not-nonterminal",
                f"start symbol {grammar.start!r} is not a nonterminal",
            )
        )
    seen: set[str] = set()
    for entry in grammar.elementary():
        if entry.name in seen:
            out.append(
                Diagnostic(
                    "duplicate-tree-name",
                    f"tree name {entry.name!r} appears more than once",
                    tree=entry.name,
                )
            )
        seen.add(entry.name)
        out.extend(_check_tree(entry, grammar))
    return out


def _check_tree(entry: ElementaryTree, grammar: Grammar) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    tree = entry.tree

    def diag(code: str, message: str, nid: int | None = None) -> None:
        address = None if nid is None else format_address(tree.address_of(nid))
        out.append(Diagnostic(code, message, tree=entry.name, address=address))

    feet = [nid for nid in tree.pre_order() if tree.label(nid).foot_marker]
    if entry.kind is TreeKind.AUXILIARY and not feet:
        diag("missing-foot", "auxiliary tree has no foot node")
    if entry.kind is TreeKind.INITIAL and feet:
        diag("unexpected-foot", "initial tree carries a foot node", feet[0])
    if len(feet) > 1:
        diag("multiple-foot", f"{len(feet)} foot-marked nodes", feet[1])
    root_label = tree.label(tree.root)
    for foot in feet:
        if tree.is_internal(foot):
            diag("foot-not-leaf", "foot node has children", foot)
        if tree.label(foot).name != root_label.name:
            diag(
                "foot-label-mismatch",
                f"foot label {tree.label(foot).name!r} differs from root label "
                f"{root_label.name!r}",
                foot,
            )
    for nid in tree.pre_order():
        label = tree.label(nid)
        if tree.is_internal(nid) and label.kind is not LabelKind.NONTERMINAL:
            diag(
                "internal-not-nonterminal",
                f"internal node labeled with {label.kind.value} {label.name!r}",
                nid,
            )
        if label.kind is LabelKind.NONTERMINAL and label.name not in grammar.nonterminals:
            diag("unknown-label", f"nonterminal {label.name!r} is not in the alphabet", nid)
        if label.kind is LabelKind.TERMINAL and label.name not in grammar.terminals:
            diag("unknown-label", f"terminal {label.name!r} is not in the alphabet", nid)
    return out
