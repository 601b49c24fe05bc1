"""Elementary trees and the composition operations over them.

Trees are immutable: substitution, adjunction and equation installation all
return new trees.  Every node carries a top and a bottom feature structure;
coindexation between slots (installed from feature equations) lives in a
per-tree bindings table so that one unification step is visible through all
aliases of a shared cell.

Node addresses are 1-based child-index tuples; the root address is ().
"""

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .features import (
    EMPTY,
    AtomSet,
    CoindexRef,
    FeatureEquation,
    FeatureError,
    FeaturePath,
    FeatureStructure,
    _resolve,
    _unify_values,
    format_fs,
    parse_equation,
    parse_fs,
    resolve_fs,
)

INITIAL = "initial"
AUXILIARY = "auxiliary"

ANCHOR = "anchor"
FOOT = "foot"
SUBST = "subst"
NA = "na"

EPS = "eps"

# leaf-category codes used when synthesizing tree names; phrasal categories
# take an -x suffix, anchors are upcased by the caller
NAME_CODES = {
    "S": "s", "NP": "nx", "VP": "vx", "PP": "px", "AP": "ax", "AdvP": "arbx",
    "N": "n", "V": "v", "P": "p", "A": "a", "D": "d", "Ad": "arb",
    "Comp": "comp", "Conj": "conj", "PL": "pl", "Punct": "punct",
}


class TreeError(Exception):
    """Malformed tree input or a violated operation precondition."""


@dataclass
class Failure:
    """Composition failure: recoverable, carries the offending location."""

    operation: str
    message: str
    address: Optional[Tuple[int, ...]] = None
    attribute: Optional[str] = None

    def __bool__(self):
        return False

    def __str__(self):
        where = "" if self.address is None else " at %s" % (self.address,)
        attr = "" if self.attribute is None else " (attribute %s)" % self.attribute
        return "%s failed%s%s: %s" % (self.operation, where, attr, self.message)


@dataclass(frozen=True)
class NodeLabel:
    """Category stem plus subscript, e.g. NP_1 or S_r."""

    stem: str
    subscript: str = ""

    @classmethod
    def parse(cls, text: str) -> "NodeLabel":
        stem, sep, sub = text.partition("_")
        if not stem:
            raise TreeError("empty node label: %r" % text)
        return cls(stem, sub)

    def text(self) -> str:
        return self.stem + ("_" + self.subscript if self.subscript else "")

    def __str__(self):
        return self.text()


@dataclass(frozen=True)
class TreeNode:
    label: NodeLabel
    markers: frozenset = frozenset()
    top: FeatureStructure = EMPTY
    bottom: FeatureStructure = EMPTY
    children: Tuple["TreeNode", ...] = ()
    terminal: bool = False

    @property
    def is_empty(self) -> bool:
        return not self.terminal and self.label.stem == EPS

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def replace(self, **kwargs) -> "TreeNode":
        vals = dict(label=self.label, markers=self.markers, top=self.top,
                    bottom=self.bottom, children=self.children,
                    terminal=self.terminal)
        vals.update(kwargs)
        return TreeNode(**vals)


def make_node(label: str, markers=(), top=EMPTY, bottom=EMPTY, children=(),
              terminal=False) -> TreeNode:
    """Convenience constructor taking the label as text."""
    return TreeNode(NodeLabel.parse(label) if not terminal else NodeLabel(label),
                    frozenset(markers), top, bottom, tuple(children), terminal)


class ElementaryTree:
    """A named tree with bindings; kind is initial or auxiliary."""

    __slots__ = ("name", "kind", "root", "comments", "equations", "bindings")

    def __init__(self, name: str, root: TreeNode, kind: Optional[str] = None,
                 comments: Sequence[str] = (), equations: Sequence[FeatureEquation] = (),
                 bindings: Optional[Dict[int, object]] = None):
        self.name = name
        self.root = root
        if kind is None:
            kind = AUXILIARY if any(FOOT in n.markers for _, n in walk(root)) else INITIAL
        if kind not in (INITIAL, AUXILIARY):
            raise TreeError("bad tree kind: %r" % kind)
        self.kind = kind
        self.comments = tuple(comments)
        self.equations = tuple(equations)
        self.bindings = dict(bindings or {})

    def replace(self, **kwargs) -> "ElementaryTree":
        vals = dict(name=self.name, root=self.root, kind=self.kind,
                    comments=self.comments, equations=self.equations,
                    bindings=self.bindings)
        vals.update(kwargs)
        return ElementaryTree(**vals)

    def walk(self) -> Iterator[Tuple[Tuple[int, ...], TreeNode]]:
        return walk(self.root)

    def node_at(self, addr: Sequence[int]) -> TreeNode:
        node = self.root
        for i in addr:
            if i < 1 or i > len(node.children):
                raise TreeError("no node at address %s" % (tuple(addr),))
            node = node.children[i - 1]
        return node

    def addresses_of(self, name: str) -> List[Tuple[int, ...]]:
        return [addr for addr, node in self.walk()
                if not node.terminal and node.label.text() == name]

    def foot_address(self) -> Optional[Tuple[int, ...]]:
        for addr, node in self.walk():
            if FOOT in node.markers:
                return addr
        return None

    def anchor_addresses(self) -> List[Tuple[int, ...]]:
        return [addr for addr, node in self.walk() if ANCHOR in node.markers]

    def subst_addresses(self) -> List[Tuple[int, ...]]:
        return [addr for addr, node in self.walk() if SUBST in node.markers]

    def frontier(self) -> List[str]:
        """Terminal words in surface order; empty elements contribute nothing."""
        out = []
        for _, node in self.walk():
            if node.terminal:
                out.append(node.label.stem)
        return out

    def features(self, name: str, side: str) -> FeatureStructure:
        """Resolved feature structure on the named node's top or bottom."""
        addr = self._only_addr(name)
        node = self.node_at(addr)
        fs = node.top if side == "t" else node.bottom
        return resolve_fs(fs, self.bindings)

    def _only_addr(self, name: str) -> Tuple[int, ...]:
        addrs = self.addresses_of(name)
        if not addrs:
            raise TreeError("unknown node name %r in tree %s" % (name, self.name))
        if len(addrs) > 1:
            raise TreeError("ambiguous node name %r in tree %s" % (name, self.name))
        return addrs[0]

    def __repr__(self):
        return "<%s %s: %d nodes>" % (self.kind, self.name,
                                      sum(1 for _ in self.walk()))


def walk(root: TreeNode, addr: Tuple[int, ...] = ()) -> Iterator[Tuple[Tuple[int, ...], TreeNode]]:
    yield addr, root
    for i, child in enumerate(root.children, 1):
        yield from walk(child, addr + (i,))


def replace_at(root: TreeNode, addr: Sequence[int], new_node: TreeNode) -> TreeNode:
    if not addr:
        return new_node
    i = addr[0]
    kids = list(root.children)
    kids[i - 1] = replace_at(kids[i - 1], addr[1:], new_node)
    return root.replace(children=tuple(kids))


# ---------------------------------------------------------------------------
# coindexation plumbing

def _iter_values(fs: FeatureStructure) -> Iterator[object]:
    for _, val in fs.items():
        yield val
        if isinstance(val, FeatureStructure):
            yield from _iter_values(val)


def max_link(tree: ElementaryTree) -> int:
    links = [0]
    for link, val in tree.bindings.items():
        links.append(link)
        if isinstance(val, CoindexRef):
            links.append(val.link)
        elif isinstance(val, FeatureStructure):
            links.extend(v.link for v in _iter_values(val) if isinstance(v, CoindexRef))
    for _, node in tree.walk():
        for fs in (node.top, node.bottom):
            links.extend(v.link for v in _iter_values(fs) if isinstance(v, CoindexRef))
    return max(links)


def _shift_value(val, offset):
    if isinstance(val, CoindexRef):
        return CoindexRef(val.link + offset)
    if isinstance(val, FeatureStructure):
        return FeatureStructure({a: _shift_value(v, offset) for a, v in val.items()})
    return val


def _shift_node(node: TreeNode, offset: int) -> TreeNode:
    return node.replace(top=_shift_value(node.top, offset),
                        bottom=_shift_value(node.bottom, offset),
                        children=tuple(_shift_node(c, offset) for c in node.children))


def shift_links(tree: ElementaryTree, offset: int) -> ElementaryTree:
    """Rename every coindexation link by a fixed offset."""
    if offset == 0:
        return tree
    binds = {link + offset: _shift_value(val, offset)
             for link, val in tree.bindings.items()}
    return tree.replace(root=_shift_node(tree.root, offset), bindings=binds)


def _update_path(fs: FeatureStructure, attrs: Sequence[str], binds: dict, update):
    """Apply `update` to the value at `attrs`, following shared cells."""
    attr = attrs[0]
    cur = fs.get(attr)
    if len(attrs) == 1:
        return fs.set(attr, update(cur))
    if cur is None:
        return fs.set(attr, _update_path(EMPTY, attrs[1:], binds, update))
    if isinstance(cur, CoindexRef):
        link, concrete = _resolve(cur, binds)
        if concrete is None:
            concrete = EMPTY
        if not isinstance(concrete, FeatureStructure):
            raise TreeError("atomic value at intermediate attribute %r" % attr)
        binds[link] = _update_path(concrete, attrs[1:], binds, update)
        return fs
    if isinstance(cur, FeatureStructure):
        return fs.set(attr, _update_path(cur, attrs[1:], binds, update))
    raise TreeError("atomic value at intermediate attribute %r" % attr)


def _node_side(node: TreeNode, side: str) -> FeatureStructure:
    return node.top if side == "t" else node.bottom


def _with_side(node: TreeNode, side: str, fs: FeatureStructure) -> TreeNode:
    return node.replace(top=fs) if side == "t" else node.replace(bottom=fs)


def install_equations(tree: ElementaryTree,
                      eqs: Optional[Sequence[FeatureEquation]] = None) -> ElementaryTree:
    """Realize feature equations as constants and shared cells.

    With no explicit list the tree's own equations are installed.  Constant
    equations unify their value into the addressed slot; path-to-path
    equations alias the two slots through a fresh cell.  A side left
    unspecified in the equation defaults to top.  Unknown or ambiguous node
    names, and constants that clash immediately, raise TreeError.
    """
    if eqs is None:
        eqs = tree.equations
    root = tree.root
    binds = dict(tree.bindings)
    next_link = max_link(tree) + 1
    for eq in eqs:
        if eq.klass:
            # class-prefixed equations are rewrite filters, not content
            continue
        root, next_link = _install_one(tree.name, root, binds, eq, next_link)
    return tree.replace(root=root, bindings=binds)


def _addr_of_name(tree_name: str, root: TreeNode, name: str) -> Tuple[int, ...]:
    addrs = [addr for addr, node in walk(root)
             if not node.terminal and node.label.text() == name]
    if not addrs:
        raise TreeError("equation names unknown node %r in tree %s" % (name, tree_name))
    if len(addrs) > 1:
        raise TreeError("equation names ambiguous node %r in tree %s" % (name, tree_name))
    return addrs[0]


def _install_one(tree_name: str, root: TreeNode, binds: dict,
                 eq: FeatureEquation, next_link: int):
    lhs = eq.lhs
    addr_a = _addr_of_name(tree_name, root, lhs.node)
    side_a = lhs.side or "t"
    if isinstance(eq.rhs, AtomSet):
        atoms = eq.rhs

        def put_const(old):
            if old is None:
                return atoms
            merged = _unify_values(old, atoms, binds)
            if merged is None:
                raise TreeError("equation %s clashes in tree %s" % (eq.text(), tree_name))
            return merged

        node = root
        for i in addr_a:
            node = node.children[i - 1]
        new_fs = _update_path(_node_side(node, side_a), lhs.attrs, binds, put_const)
        return replace_at(root, addr_a, _with_side(node, side_a, new_fs)), next_link

    rhs = eq.rhs
    addr_b = _addr_of_name(tree_name, root, rhs.node)
    side_b = rhs.side or "t"
    link = next_link
    prior = []

    def grab(old):
        if old is not None:
            prior.append(old)
        return CoindexRef(link)

    for addr, side, attrs in ((addr_a, side_a, lhs.attrs), (addr_b, side_b, rhs.attrs)):
        node = root
        for i in addr:
            node = node.children[i - 1]
        new_fs = _update_path(_node_side(node, side), attrs, binds, grab)
        root = replace_at(root, addr, _with_side(node, side, new_fs))
    for old in prior:
        merged = _unify_values(CoindexRef(link), old, binds)
        if merged is None:
            raise TreeError("equation %s clashes in tree %s" % (eq.text(), tree_name))
    return root, next_link + 1


def unify_features(tree: ElementaryTree, name: str, side: str,
                   fs: FeatureStructure) -> Union[ElementaryTree, Failure]:
    """Unify `fs` into a named node's top or bottom; shared cells update."""
    addr = tree._only_addr(name)
    node = tree.node_at(addr)
    binds = dict(tree.bindings)
    merged = _unify_values(_node_side(node, side), fs, binds)
    if merged is None:
        return Failure("unify_features", "clash on %s.%s" % (name, side), addr,
                       _first_clash(_node_side(node, side), fs, tree.bindings))
    root = replace_at(tree.root, addr, _with_side(node, side, merged))
    return tree.replace(root=root, bindings=binds)


def _first_clash(a, b, binds) -> Optional[str]:
    """Dotted attribute path of the first failing sub-unification."""
    work = dict(binds)
    _, ca = _resolve(a, work) if isinstance(a, CoindexRef) else (None, a)
    _, cb = _resolve(b, work) if isinstance(b, CoindexRef) else (None, b)
    if ca is None or cb is None:
        return None
    if isinstance(ca, FeatureStructure) and isinstance(cb, FeatureStructure):
        for attr, aval in ca.items():
            bval = cb.get(attr)
            if bval is None:
                continue
            if _unify_values(aval, bval, dict(work)) is None:
                deeper = _first_clash(aval, bval, work)
                return attr if deeper is None else attr + "." + deeper
        return None
    return None


# ---------------------------------------------------------------------------
# composition

def substitute(host: ElementaryTree, addr: Sequence[int],
               filler: ElementaryTree) -> Union[ElementaryTree, Failure]:
    """Merge an initial tree's root into a substitution slot of the host.

    The slot keeps its label; its new top is the unification of the slot top
    with the filler root top, its bottom is the filler root bottom.  Returns
    Failure when the slot is not substitution-marked, the label stems differ,
    or the tops clash.
    """
    addr = tuple(addr)
    if filler.kind != INITIAL:
        raise TreeError("substitution filler must be an initial tree")
    slot = host.node_at(addr)
    if SUBST not in slot.markers:
        return Failure("substitute", "target is not a substitution slot", addr)
    if slot.label.stem != filler.root.label.stem:
        return Failure("substitute", "label stem %s does not match filler root %s"
                       % (slot.label.stem, filler.root.label.stem), addr)
    filler = shift_links(filler, max_link(host))
    binds = dict(host.bindings)
    binds.update(filler.bindings)
    top = _unify_values(slot.top, filler.root.top, binds)
    if top is None:
        return Failure("substitute", "top features clash", addr,
                       _first_clash(slot.top, filler.root.top, binds))
    new_node = slot.replace(markers=(slot.markers | filler.root.markers) - {SUBST},
                            top=top, bottom=filler.root.bottom,
                            children=filler.root.children)
    return host.replace(root=replace_at(host.root, addr, new_node), bindings=binds)


def adjoin(host: ElementaryTree, addr: Sequence[int],
           aux: ElementaryTree) -> Union[ElementaryTree, Failure]:
    """Graft an auxiliary tree at an adjoinable host node.

    The host node splits: the upper copy takes unify(host top, aux root top)
    on top and the aux root bottom below; the lower copy takes the aux foot
    top above and unify(host bottom, aux foot bottom) below, keeping the host
    node's children.
    """
    addr = tuple(addr)
    if aux.kind != AUXILIARY:
        raise TreeError("adjunction requires an auxiliary tree")
    target = host.node_at(addr)
    if target.terminal or target.is_empty:
        return Failure("adjoin", "cannot adjoin at a terminal", addr)
    if NA in target.markers:
        return Failure("adjoin", "target carries the null-adjunction constraint", addr)
    if SUBST in target.markers:
        return Failure("adjoin", "cannot adjoin at an unfilled substitution slot", addr)
    if target.label.stem != aux.root.label.stem:
        return Failure("adjoin", "label stem %s does not match auxiliary root %s"
                       % (target.label.stem, aux.root.label.stem), addr)
    foot_addr = aux.foot_address()
    if foot_addr is None:
        raise TreeError("auxiliary tree %s has no foot" % aux.name)
    aux = shift_links(aux, max_link(host))
    foot = aux.node_at(foot_addr)
    binds = dict(host.bindings)
    binds.update(aux.bindings)
    upper_top = _unify_values(target.top, aux.root.top, binds)
    if upper_top is None:
        return Failure("adjoin", "top features clash with auxiliary root", addr,
                       _first_clash(target.top, aux.root.top, binds))
    lower_bottom = _unify_values(target.bottom, foot.bottom, binds)
    if lower_bottom is None:
        return Failure("adjoin", "bottom features clash with auxiliary foot", addr,
                       _first_clash(target.bottom, foot.bottom, binds))
    lower = target.replace(top=foot.top, bottom=lower_bottom)
    grafted = replace_at(aux.root, foot_addr, lower)
    upper = target.replace(top=upper_top, bottom=aux.root.bottom,
                           children=grafted.children)
    return host.replace(root=replace_at(host.root, addr, upper), bindings=binds)


@dataclass(frozen=True)
class DerivedNode:
    label: NodeLabel
    matrix: FeatureStructure
    children: Tuple["DerivedNode", ...] = ()
    terminal: bool = False

    @property
    def is_empty(self):
        return not self.terminal and self.label.stem == EPS


@dataclass
class DerivedTree:
    name: str
    root: DerivedNode

    def walk(self):
        def go(node, addr):
            yield addr, node
            for i, child in enumerate(node.children, 1):
                yield from go(child, addr + (i,))
        return go(self.root, ())

    def frontier(self) -> List[str]:
        return [node.label.stem for _, node in self.walk() if node.terminal]


def finalize(tree: ElementaryTree,
             root_constraints: Sequence[FeatureEquation] = ()) -> Union[DerivedTree, Failure]:
    """Collapse top and bottom at every node, then apply root constraints.

    Unfilled substitution slots are a precondition violation and raise.
    Failure reports the first offending node address and attribute.  Root
    constraint equations must carry an empty node name or the root's own
    name, and a constant right-hand side.
    """
    if tree.subst_addresses():
        raise TreeError("finalize with unfilled substitution slots at %s"
                        % tree.subst_addresses())
    binds = dict(tree.bindings)
    merged: Dict[Tuple[int, ...], FeatureStructure] = {}
    for addr, node in tree.walk():
        out = _unify_values(node.top, node.bottom, binds)
        if out is None:
            return Failure("finalize", "top and bottom do not unify", addr,
                           _first_clash(node.top, node.bottom, binds))
        merged[addr] = out
    root_name = tree.root.label.text()
    for eq in root_constraints:
        if eq.lhs.node not in ("", root_name):
            raise TreeError("root constraint %s does not name the root %s"
                            % (eq.text(), root_name))
        if not isinstance(eq.rhs, AtomSet):
            raise TreeError("root constraint %s must have a constant value" % eq.text())
        want = FeatureStructure.from_path(eq.lhs.attrs, eq.rhs)
        out = _unify_values(merged[()], want, binds)
        if out is None:
            return Failure("finalize", "root constraint %s fails" % eq.text(), (),
                           ".".join(eq.lhs.attrs))
        merged[()] = out

    def build(node: TreeNode, addr) -> DerivedNode:
        kids = tuple(build(c, addr + (i,)) for i, c in enumerate(node.children, 1))
        return DerivedNode(node.label, resolve_fs(merged[addr], binds), kids,
                           node.terminal)

    return DerivedTree(tree.name, build(tree.root, ()))


# ---------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Violation:
    level: str
    address: Tuple[int, ...]
    message: str

    def __str__(self):
        return "%s at %s: %s" % (self.level, self.address, self.message)


def validate_elementary(tree: ElementaryTree,
                        include_warnings: bool = False) -> List[Violation]:
    """Structural well-formedness check; empty result means no errors.

    A lexicalized anchor (anchor leaf that has acquired a single terminal
    child) is accepted.  With include_warnings, a node whose top and bottom
    share a coindexation cell is flagged: adjunction can no longer separate
    them there.
    """
    out: List[Violation] = []
    feet = []
    for addr, node in tree.walk():
        m = node.markers
        if node.terminal:
            if m:
                out.append(Violation("error", addr, "terminal carries markers"))
            if node.children:
                out.append(Violation("error", addr, "terminal has children"))
            continue
        if node.is_empty:
            if m:
                out.append(Violation("error", addr, "empty element carries markers"))
            if node.children:
                out.append(Violation("error", addr, "empty element has children"))
            continue
        if SUBST in m and FOOT in m:
            out.append(Violation("error", addr, "node is both substitution and foot"))
        if ANCHOR in m and (SUBST in m or FOOT in m):
            out.append(Violation("error", addr, "anchor combined with slot marker"))
        if FOOT in m:
            feet.append(addr)
            if node.children:
                out.append(Violation("error", addr, "foot node has children"))
            if NA not in m:
                out.append(Violation("error", addr, "foot node lacks the NA constraint"))
            if node.label.stem != tree.root.label.stem:
                out.append(Violation("error", addr, "foot label differs from root label"))
        if SUBST in m:
            if node.children:
                out.append(Violation("error", addr, "substitution slot has children"))
            if node.bottom:
                out.append(Violation("error", addr, "substitution slot has bottom features"))
        if ANCHOR in m and node.children:
            kids = node.children
            if not (len(kids) == 1 and kids[0].terminal):
                out.append(Violation("error", addr, "anchor is an internal node"))
        if not node.children and not (m & {SUBST, FOOT, ANCHOR}) and addr:
            out.append(Violation("error", addr, "bare nonterminal leaf"))
        for fs in (node.top, node.bottom):
            for val in _iter_values(fs):
                if isinstance(val, CoindexRef):
                    try:
                        _resolve(val, tree.bindings)
                    except FeatureError as exc:
                        out.append(Violation("error", addr, str(exc)))
        if include_warnings:
            tops = {_resolve(v, tree.bindings)[0] for v in _iter_values(node.top)
                    if isinstance(v, CoindexRef)}
            bots = {_resolve(v, tree.bindings)[0] for v in _iter_values(node.bottom)
                    if isinstance(v, CoindexRef)}
            if tops & bots:
                out.append(Violation("warning", addr,
                                     "top and bottom share a coindexation cell"))
    if tree.kind == AUXILIARY and len(feet) != 1:
        out.append(Violation("error", (), "auxiliary tree needs exactly one foot"))
    if tree.kind == INITIAL and feet:
        out.append(Violation("error", feet[0], "initial tree has a foot node"))
    if SUBST in tree.root.markers:
        out.append(Violation("error", (), "root is a substitution slot"))
    return out


# ---------------------------------------------------------------------------
# name synthesis

def _leaf_code(label: NodeLabel) -> str:
    code = NAME_CODES.get(label.stem, label.stem.lower())
    sub = label.subscript if label.subscript.isdigit() else ""
    return code + sub


def tree_name(tree: ElementaryTree, family_context: Optional[dict] = None) -> str:
    """Synthesize the conventional compact name for a tree.

    The body spells the frontier of the clausal spine (the S_r subtree when
    present, else the whole tree): argument slots by category code and index,
    anchors upcased, fixed words verbatim, an empty element by its parent's
    code.  An extraction prefix W<k> (pW<k> for a prepositional target) is
    derived from the emptied argument; family_context may force a prefix.
    """
    family_context = family_context or {}
    letter = "α" if tree.kind == INITIAL else "β"
    spine = tree.root
    for _, node in tree.walk():
        if not node.terminal and node.label.stem == "S" and node.label.subscript == "r":
            spine = node
            break
    prefix = family_context.get("prefix")
    if prefix is None:
        prefix = ""
        for addr, node in tree.walk():
            if node.is_empty and addr:
                parent = tree.node_at(addr[:-1])
                mark = "pW" if parent.label.stem == "PP" else "W"
                sub = parent.label.subscript if parent.label.subscript.isdigit() else ""
                prefix = mark + sub
                break
    body = []
    if tree.kind == INITIAL and spine.label.stem != "S":
        body.append(_leaf_code(spine.label).upper())
    for addr, node in walk(spine):
        if node.terminal:
            parent = spine
            for i in addr[:-1]:
                parent = parent.children[i - 1]
            if ANCHOR not in parent.markers:
                body.append(node.label.stem)
        elif node.is_empty:
            parent = spine
            for i in addr[:-1]:
                parent = parent.children[i - 1]
            body.append(_leaf_code(parent.label))
        elif not node.children:
            if ANCHOR in node.markers:
                body.append(_leaf_code(node.label).upper())
            else:
                body.append(_leaf_code(node.label))
        elif ANCHOR in node.markers and len(node.children) == 1 \
                and node.children[0].terminal:
            # lexicalized anchor: name by category, not by the word
            body.append(_leaf_code(node.label).upper())
    return letter + prefix + "".join(body)


def family_name(declarative: ElementaryTree) -> str:
    """Family names are T plus the declarative tree's body."""
    return "T" + tree_name(declarative)[1:]


# ---------------------------------------------------------------------------
# serialization

def _normalize_links(tree: ElementaryTree):
    """Map refs to chain roots and drop dangling chain entries."""
    def norm_value(val):
        if isinstance(val, CoindexRef):
            link, _ = _resolve(val, tree.bindings)
            return CoindexRef(link)
        if isinstance(val, FeatureStructure):
            return FeatureStructure({a: norm_value(v) for a, v in val.items()})
        return val

    def norm_node(node):
        return node.replace(top=norm_value(node.top), bottom=norm_value(node.bottom),
                            children=tuple(norm_node(c) for c in node.children))

    root = norm_node(tree.root)
    binds = {}
    for link, val in tree.bindings.items():
        tail, concrete = _resolve(CoindexRef(link), tree.bindings)
        if concrete is not None:
            binds[tail] = norm_value(concrete)
    return root, binds


def serialize_tree(tree: ElementaryTree, include_name: bool = True,
                   include_comments: bool = True,
                   include_equations: bool = True) -> str:
    root, binds = _normalize_links(tree)
    link_names: Dict[int, int] = {}
    lines = ["tree %s %s" % (tree.name if include_name else "-", tree.kind)]
    if include_comments:
        for comment in tree.comments:
            lines.append("  comment %s" % comment)
    for _, node in walk(root):
        label = '"%s"' % node.label.stem if node.terminal else node.label.text()
        marks = "+".join(sorted(node.markers)) if node.markers else "-"
        parts = [label, marks, str(len(node.children))]
        if node.top:
            parts.append("top=%s" % format_fs(node.top, link_names))
        if node.bottom:
            parts.append("bot=%s" % format_fs(node.bottom, link_names))
        lines.append("  " + " ".join(parts))
    emitted = set()
    link_lines = []
    while True:
        todo = sorted((ln for ln in link_names if ln not in emitted),
                      key=lambda ln: link_names[ln])
        if not todo:
            break
        for link in todo:
            emitted.add(link)
            if link in binds:
                val = binds[link]
                text = val.text() if isinstance(val, AtomSet) \
                    else format_fs(val, link_names)
                link_lines.append((link_names[link], text))
    for display, text in sorted(link_lines):
        lines.append("  link %d %s" % (display, text))
    if include_equations:
        for eq in tree.equations:
            lines.append("  eq %s" % eq.text())
    lines.append("end")
    return "\n".join(lines)


def serialize_trees(trees: Sequence[ElementaryTree]) -> str:
    return "\n\n".join(serialize_tree(t) for t in trees) + "\n"


def canonical_key(tree: ElementaryTree) -> str:
    """Name- and comment-independent structural form, equations realized."""
    installed = install_equations(tree)
    return serialize_tree(installed, include_name=False, include_comments=False,
                          include_equations=False)


def _parse_node_line(tokens: List[str], line_no: int):
    if len(tokens) < 3:
        raise TreeError("line %d: node line needs label, markers and arity" % line_no)
    label_tok, marks_tok, count_tok = tokens[0], tokens[1], tokens[2]
    terminal = label_tok.startswith('"') and label_tok.endswith('"')
    if terminal:
        label = NodeLabel(label_tok[1:-1])
    else:
        label = NodeLabel.parse(label_tok)
    markers = frozenset() if marks_tok == "-" else frozenset(marks_tok.split("+"))
    bad = markers - {ANCHOR, FOOT, SUBST, NA}
    if bad:
        raise TreeError("line %d: unknown markers %s" % (line_no, sorted(bad)))
    if not count_tok.isdigit():
        raise TreeError("line %d: bad child count %r" % (line_no, count_tok))
    top = bottom = EMPTY
    for part in tokens[3:]:
        if part.startswith("top="):
            top = parse_fs(part[4:])
        elif part.startswith("bot="):
            bottom = parse_fs(part[4:])
        else:
            raise TreeError("line %d: unexpected token %r" % (line_no, part))
    return TreeNode(label, markers, top, bottom, (), terminal), int(count_tok)


def _split_node_line(line: str) -> List[str]:
    # feature texts contain spaces after commas; split only on spaces that
    # are not inside braces
    out, depth, cur = [], 0, []
    for ch in line:
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        if ch == " " and depth == 0:
            if cur:
                out.append("".join(cur))
                cur = []
        else:
            cur.append(ch)
    if cur:
        out.append("".join(cur))
    return out


def parse_trees(text: str, source: str = "<string>") -> List[ElementaryTree]:
    """Parse a file of tree records; inverse of serialize_trees."""
    trees: List[ElementaryTree] = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if not line or line.startswith("#"):
            i += 1
            continue
        if not line.startswith("tree "):
            raise TreeError("%s:%d: expected a tree header" % (source, i + 1))
        header = line.split()
        if len(header) != 3 or header[2] not in (INITIAL, AUXILIARY):
            raise TreeError("%s:%d: bad tree header" % (source, i + 1))
        name, kind = header[1], header[2]
        i += 1
        comments: List[str] = []
        flat: List[Tuple[TreeNode, int]] = []
        links: Dict[int, object] = {}
        eqs: List[FeatureEquation] = []
        pending = 1
        while i < len(lines):
            line = lines[i].strip()
            i += 1
            if not line:
                continue
            if line == "end":
                pending = -1
                break
            if line.startswith("comment "):
                comments.append(line[len("comment "):])
                continue
            if pending > 0:
                node, count = _parse_node_line(_split_node_line(line), i)
                flat.append((node, count))
                pending += count - 1
                continue
            if line.startswith("link "):
                _, num, val = line.split(" ", 2)
                links[int(num)] = parse_fs(val) if val.startswith("{") \
                    else (CoindexRef(int(val[1:])) if val.startswith("@")
                          else AtomSet.parse(val))
                continue
            if line.startswith("eq "):
                try:
                    eqs.append(parse_equation(line[3:]))
                except FeatureError as exc:
                    raise TreeError("%s:%d: %s" % (source, i, exc))
                continue
            raise TreeError("%s:%d: unexpected line %r" % (source, i, line))
        if pending != -1:
            raise TreeError("%s: unterminated tree record %s" % (source, name))
        it = iter(flat)

        def build(it=it):
            node, count = next(it)
            kids = tuple(build(it) for _ in range(count))
            return node.replace(children=kids)

        try:
            root = build()
        except StopIteration:
            raise TreeError("%s: truncated node list in tree %s" % (source, name))
        trees.append(ElementaryTree(name, root, kind, comments, eqs, links))
    return trees
