"""Lexicalization, derivation trees, and bounded recognition.

The lexicon format is record oriented: `<<INDEX>>` starts a record and the
remaining fields are `<<ENTRY>>word<<POS>>tag` pairs (one per anchor),
`<<FAMILY>>` or `<<TREES>>` for the selected structures, and `<<FEATURES>>`
holding `#` tokens.  A feature token names an attribute path on the first
anchor, or on another node when its first segment matches a node label
(`#TRANS+` puts ⟨trans⟩={+} on the anchor, `#N_card-` puts ⟨card⟩={-} on N);
a trailing sign is the value, otherwise the last segment is.  Attribute
names and values are lowercased.

Recognition enumerates derivations exhaustively up to a composition-step
bound: within one elementary tree, substitution slots are filled in address
order, then auxiliaries may adjoin at the tree's own adjoinable addresses,
deepest first, at most once per address.  Adjunction into attached material
belongs to the attached tree's own derivation node, so every derivation
tree is enumerated exactly once.
"""

import re
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .features import AtomSet, FeatureEquation, FeaturePath
from .trees import (
    INITIAL,
    NA,
    SUBST,
    DerivedTree,
    ElementaryTree,
    Failure,
    NodeLabel,
    TreeError,
    TreeNode,
    adjoin,
    finalize,
    install_equations,
    replace_at,
    substitute,
)


class LexError(Exception):
    pass


@dataclass(frozen=True)
class LexEntry:
    """One syntactic lexicon record."""

    index: str
    anchors: Tuple[Tuple[str, str], ...]       # (word, part of speech)
    family: str = ""
    trees: Tuple[str, ...] = ()
    features: Tuple[str, ...] = ()             # raw # tokens

    @property
    def words(self) -> Tuple[str, ...]:
        return tuple(w for w, _ in self.anchors)


_FIELD = re.compile(r"<<([A-Z]+)>>")


def parse_lexicon(text: str, source: str = "<string>") -> List[LexEntry]:
    """Parse lexicon records, leniently: fields may wrap across lines."""
    entries = []
    block: List[str] = []
    line_no = 0
    start = 1

    def flush():
        if block:
            entries.append(_parse_record(" ".join(block), source, start))
            block.clear()

    for line_no, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith(";"):
            flush()
            continue
        if stripped.startswith("<<INDEX>>"):
            flush()
            start = line_no
        elif not block:
            raise LexError("%s:%d: record must start with <<INDEX>>"
                           % (source, line_no))
        block.append(stripped)
    flush()
    return entries


def _parse_record(text: str, source: str, line_no: int) -> LexEntry:
    fields = []
    parts = _FIELD.split(text)
    if parts[0].strip():
        raise LexError("%s:%d: stray text before <<INDEX>>" % (source, line_no))
    for key, value in zip(parts[1::2], parts[2::2]):
        fields.append((key, value.strip()))
    if not fields or fields[0][0] != "INDEX":
        raise LexError("%s:%d: record must start with <<INDEX>>" % (source, line_no))
    index = fields[0][1]
    anchors: List[Tuple[str, str]] = []
    family = ""
    trees: List[str] = []
    feats: List[str] = []
    pending_word: Optional[str] = None
    for key, value in fields[1:]:
        if key == "ENTRY":
            if pending_word is not None:
                raise LexError("%s:%d: <<ENTRY>> without <<POS>>" % (source, line_no))
            pending_word = value
        elif key == "POS":
            if pending_word is None:
                raise LexError("%s:%d: <<POS>> without <<ENTRY>>" % (source, line_no))
            anchors.append((pending_word, value))
            pending_word = None
        elif key == "FAMILY":
            family = value
        elif key == "TREES":
            trees.extend(t.lstrip("^") for t in value.split())
        elif key == "FEATURES":
            for tok in value.split():
                if not tok.startswith("#"):
                    raise LexError("%s:%d: feature token %r lacks #"
                                   % (source, line_no, tok))
                feats.append(tok[1:])
        else:
            raise LexError("%s:%d: unknown field <<%s>>" % (source, line_no, key))
    if pending_word is not None:
        raise LexError("%s:%d: <<ENTRY>> without <<POS>>" % (source, line_no))
    if not anchors:
        anchors.append((index, ""))
    if not family and not trees:
        raise LexError("%s:%d: entry %s selects no family or trees"
                       % (source, line_no, index))
    return LexEntry(index, tuple(anchors), family, tuple(trees), tuple(feats))


def format_lexicon(entries: Sequence[LexEntry]) -> str:
    out = []
    for e in entries:
        head = "<<INDEX>>" + e.index
        for word, pos in e.anchors:
            head += "<<ENTRY>>%s<<POS>>%s" % (word, pos)
        if e.family:
            head += "<<FAMILY>>" + e.family
        lines = [head]
        if e.trees:
            lines.append("<<TREES>>" + " ".join("^" + t for t in e.trees))
        if e.features:
            lines.append("<<FEATURES>>" + " ".join("#" + f for f in e.features))
        out.append("\n".join(lines))
    return "\n\n".join(out) + "\n"


def entry_equations(entry: LexEntry, tree: ElementaryTree) -> List[FeatureEquation]:
    """Translate the entry's feature tokens against a concrete tree."""
    labels = {}
    for _, node in tree.walk():
        if not node.terminal:
            label = node.label
            labels.setdefault((label.stem + label.subscript).upper(), label.text())
    anchor_addrs = tree.anchor_addresses()
    if not anchor_addrs:
        raise LexError("tree %s has no anchor" % tree.name)
    anchor_name = tree.node_at(anchor_addrs[0]).label.text()
    eqs = []
    for token in entry.features:
        if token.endswith(("+", "-")):
            value, segs = token[-1], token[:-1].split("_")
        else:
            segs = token.split("_")
            if len(segs) < 2:
                raise LexError("feature token %r has no value" % token)
            value, segs = segs[-1], segs[:-1]
        node = anchor_name
        if segs and segs[0].upper() in labels:
            node = labels[segs[0].upper()]
            segs = segs[1:]
        if not segs:
            raise LexError("feature token %r has no attribute" % token)
        path = FeaturePath(node, "t", tuple(s.lower() for s in segs))
        eqs.append(FeatureEquation(path, AtomSet.parse(value.lower()), ""))
    return eqs


def lexicalize(tree: ElementaryTree, entry: LexEntry) -> ElementaryTree:
    """Anchor the tree with the entry's words and install its features.

    Anchor leaves, in address order, each receive one terminal child; the
    part of speech must restate the anchor's label stem when given.
    """
    addrs = tree.anchor_addresses()
    open_addrs = [a for a in addrs if not tree.node_at(a).children]
    if len(open_addrs) != len(entry.anchors):
        raise LexError("entry %s has %d anchors but tree %s has %d"
                       % (entry.index, len(entry.anchors), tree.name,
                          len(open_addrs)))
    root = tree.root
    for addr, (word, pos) in zip(open_addrs, entry.anchors):
        node = tree.node_at(addr)
        if pos and node.label.stem != pos:
            raise LexError("entry %s anchors %s at a %s node in %s"
                           % (entry.index, pos, node.label.stem, tree.name))
        leaf = TreeNode(NodeLabel(word), terminal=True)
        root = replace_at(root, addr, node.replace(children=(leaf,)))
    out = tree.replace(root=root,
                       name="%s[%s]" % (tree.name, " ".join(entry.words)))
    eqs = list(out.equations) + entry_equations(entry, out)
    return install_equations(out.replace(equations=eqs))


# ---------------------------------------------------------------------------
# derivation trees

SUBSTITUTION = "substitution"
ADJUNCTION = "adjunction"

# matrix clauses must be indicative or imperative and take no complementizer
MATRIX_CONSTRAINTS = (
    FeatureEquation(FeaturePath("", "", ("mode",)), AtomSet.parse("ind/imp")),
    FeatureEquation(FeaturePath("", "", ("comp",)), AtomSet.parse("nil")),
)


@dataclass(frozen=True)
class DerivationEdge:
    operation: str
    address: Tuple[int, ...]
    child: "DerivationNode"


@dataclass(frozen=True)
class DerivationNode:
    tree: str                                  # name into the tree mapping
    edges: Tuple[DerivationEdge, ...] = ()


def _addr_text(addr: Tuple[int, ...]) -> str:
    return ".".join(str(i) for i in addr) if addr else "0"


def format_derivation(node: DerivationNode, indent: int = 0) -> str:
    lines = ["  " * indent + node.tree]
    for edge in node.edges:
        op = "subst" if edge.operation == SUBSTITUTION else "adjoin"
        lines.append("  " * (indent + 1) + "%s@%s" % (op, _addr_text(edge.address)))
        lines.append(format_derivation(edge.child, indent + 2))
    return "\n".join(lines)


def compose(d: DerivationNode, trees: Dict[str, ElementaryTree],
            root_constraints: Optional[Sequence[FeatureEquation]] = None) -> Union[DerivedTree, Failure]:
    """Build the derived tree bottom-up and finalize it.

    Substitution edges apply first; adjunction edges apply deepest first so
    that every address refers to the elementary tree being extended.  The
    default root constraints are the matrix-clause ones; pass () for none.
    """
    if root_constraints is None:
        root_constraints = MATRIX_CONSTRAINTS
    assembled = _assemble(d, trees)
    if isinstance(assembled, Failure):
        return assembled
    return finalize(assembled, root_constraints)


def _assemble(d: DerivationNode, trees: Dict[str, ElementaryTree]) -> Union[ElementaryTree, Failure]:
    if d.tree not in trees:
        raise TreeError("derivation references unknown tree %s" % d.tree)
    current = trees[d.tree]
    subs = [e for e in d.edges if e.operation == SUBSTITUTION]
    adjs = [e for e in d.edges if e.operation == ADJUNCTION]
    bad = [e for e in d.edges if e.operation not in (SUBSTITUTION, ADJUNCTION)]
    if bad:
        raise TreeError("unknown derivation operation %r" % bad[0].operation)
    seen = set()
    for e in adjs:
        if e.address in seen:
            return Failure(ADJUNCTION, "second adjunction at one address of %s"
                           % d.tree, e.address)
        seen.add(e.address)
    for e in subs + sorted(adjs, key=lambda e: (-len(e.address), e.address)):
        child = _assemble(e.child, trees)
        if isinstance(child, Failure):
            return child
        op = substitute if e.operation == SUBSTITUTION else adjoin
        current = op(current, e.address, child)
        if isinstance(current, Failure):
            return current
    return current


# ---------------------------------------------------------------------------
# bounded recognition

@dataclass
class RecognizeResult:
    accepted: bool
    derivations: List[DerivationNode]
    bound_hit: bool                            # pruning occurred at the bound

    def __bool__(self):
        return self.accepted


def word_sequence(tree: ElementaryTree) -> List[str]:
    return [n.label.stem for _, n in tree.walk() if n.terminal]


def _min_ops(tree: ElementaryTree) -> int:
    return len(tree.subst_addresses())


def _adjunction_sites(tree: ElementaryTree) -> List[Tuple[int, ...]]:
    sites = []
    for addr, node in tree.walk():
        if node.terminal or node.is_empty:
            continue
        if NA in node.markers or SUBST in node.markers:
            continue
        sites.append(addr)
    return sorted(sites, key=lambda a: (-len(a), a))


class _Search:
    def __init__(self, grammar: Sequence[ElementaryTree], target: Counter,
                 max_ops: int):
        self.target = target
        self.max_ops = max_ops
        self.bound_hit = False
        self.initial: Dict[str, List[ElementaryTree]] = {}
        self.auxiliary: Dict[str, List[ElementaryTree]] = {}
        for t in grammar:
            words = Counter(word_sequence(t))
            if words - target:
                continue
            bucket = self.initial if t.kind == INITIAL else self.auxiliary
            bucket.setdefault(t.root.label.stem, []).append(t)

    def complete(self, tree: ElementaryTree, used: Counter,
                 budget: int) -> Iterator[Tuple[ElementaryTree, Tuple[DerivationEdge, ...], int, Counter]]:
        """Completions of one elementary tree: slots filled, adjunctions in."""
        slots = tree.subst_addresses()
        if len(slots) > budget:
            self.bound_hit = True
            return
        yield from self._fill(tree, slots, used, budget,
                              _adjunction_sites(tree))

    def _fill(self, tree, slots, used, budget, sites):
        if not slots:
            yield from self._adjoin(tree, sites, used, budget)
            return
        addr, rest = slots[0], slots[1:]
        stem = tree.node_at(addr).label.stem
        for filler in self.initial.get(stem, ()):
            words = Counter(word_sequence(filler))
            new_used = used + words
            if new_used - self.target:
                continue
            if 1 + _min_ops(filler) + len(rest) > budget:
                self.bound_hit = True
                continue
            for ftree, fedges, fops, fused in self.complete(filler, new_used,
                                                            budget - 1 - len(rest)):
                res = substitute(tree, addr, ftree)
                if isinstance(res, Failure):
                    continue
                edge = DerivationEdge(SUBSTITUTION, addr,
                                      DerivationNode(filler.name, fedges))
                for out in self._fill(res, rest, fused, budget - 1 - fops, sites):
                    tree2, edges2, ops2, used2 = out
                    yield tree2, (edge,) + edges2, 1 + fops + ops2, used2

    def _adjoin(self, tree, sites, used, budget):
        if not sites:
            yield tree, (), 0, used
            return
        addr, rest = sites[0], sites[1:]
        yield from self._adjoin(tree, rest, used, budget)
        stem = tree.node_at(addr).label.stem
        for aux in self.auxiliary.get(stem, ()):
            words = Counter(word_sequence(aux))
            new_used = used + words
            if new_used - self.target:
                continue
            if 1 + _min_ops(aux) > budget:
                self.bound_hit = True
                continue
            for atree, aedges, aops, aused in self.complete(aux, new_used,
                                                            budget - 1):
                res = adjoin(tree, addr, atree)
                if isinstance(res, Failure):
                    continue
                edge = DerivationEdge(ADJUNCTION, addr,
                                      DerivationNode(aux.name, aedges))
                for out in self._adjoin(res, rest, aused, budget - 1 - aops):
                    tree2, edges2, ops2, used2 = out
                    yield tree2, (edge,) + edges2, 1 + aops + ops2, used2


def recognize(sentence: Sequence[str], grammar: Sequence[ElementaryTree],
              max_ops: int = 8, start: str = "S",
              root_constraints: Optional[Sequence[FeatureEquation]] = None) -> RecognizeResult:
    """Exhaustive bounded recognition; sound and complete within the bound.

    Accepts when some derivation of at most max_ops composition steps
    finalizes successfully with the sentence as its frontier.  When nothing
    is found but a branch was cut by the bound, bound_hit distinguishes the
    inconclusive case from plain rejection.
    """
    if max_ops <= 0:
        raise ValueError("max_ops must be positive")
    if root_constraints is None:
        root_constraints = MATRIX_CONSTRAINTS
    words = list(sentence)
    target = Counter(words)
    search = _Search(grammar, target, max_ops)
    found: List[DerivationNode] = []
    if words:
        for root in search.initial.get(start, ()):
            root_words = Counter(word_sequence(root))
            if root_words - target:
                continue
            for tree, edges, ops, used in search.complete(root, root_words,
                                                          max_ops):
                if used != target:
                    continue
                derived = finalize(tree, root_constraints)
                if isinstance(derived, Failure):
                    continue
                if [n.label.stem for _, n in derived.walk()
                        if n.terminal] == words:
                    found.append(DerivationNode(root.name, edges))
    return RecognizeResult(bool(found), found, search.bound_hit)
