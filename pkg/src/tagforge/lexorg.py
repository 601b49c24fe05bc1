"""From subcategorization frames to tree families.

A frame lists an anchor category and its ordered arguments.  Lexical
redistribution rules (LRRs) rewrite whole frames (passive, dative shift);
closing a frame under sequences of distinct rules gives the frame set of a
family.  Each frame is turned into a tree description by instantiating
subcategorization blocks from a library, conjoined with each applicable
transformation block (wh extraction and the like) plus the untransformed
case; solving the descriptions yields the family's trees, each carrying a
provenance record (frame, rule sequence, transformation).
"""

import itertools
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .features import EMPTY, FeatureEquation, FeaturePath, FeatureStructure, unify
from .descriptions import (
    DescriptionError,
    NodeSpec,
    SolverConfig,
    TreeDescription,
    conjoin,
    describe,
    solve,
)
from .trees import ElementaryTree, TreeError, family_name, tree_name

PRE = "pre"
POST = "post"


class LexorgError(Exception):
    pass


@dataclass(frozen=True)
class Argument:
    """One subcategorized argument in surface order.

    `index` is the semantic index (0 subject, 1 first object, ...), kept
    stable under redistribution.  `expansion` names the fixed word of an
    expanded argument, e.g. "to" for a to-PP.
    """

    index: int
    category: str
    position: str
    features: FeatureStructure = EMPTY
    expansion: Optional[str] = None

    def node_name(self) -> str:
        return "%s_%d" % (self.category, self.index)


@dataclass(frozen=True)
class SubcatFrame:
    name: str
    anchor: str
    args: Tuple[Argument, ...]
    features: Tuple[FeatureEquation, ...] = ()

    def signature(self):
        return (self.anchor, self.args, self.features)


@dataclass(frozen=True)
class ArgPattern:
    binder: str
    category: str
    position: str
    features: FeatureStructure = EMPTY


@dataclass(frozen=True)
class ArgTemplate:
    """Right-hand argument: a rebound left argument or a fresh one.

    `binder` naming a left pattern reuses the matched argument (its semantic
    index survives); otherwise it must be an integer literal introducing a
    fresh argument with that index.
    """

    binder: str
    category: Optional[str] = None
    position: str = POST
    features: FeatureStructure = EMPTY
    expansion: Optional[str] = None


@dataclass(frozen=True)
class LRR:
    """Lexical redistribution rule: a frame pattern and a frame template."""

    name: str
    anchor: str
    left: Tuple[ArgPattern, ...]
    right: Tuple[ArgTemplate, ...]
    add_features: Tuple[FeatureEquation, ...] = ()
    additive: bool = False


def lrr_match(rule: LRR, frame: SubcatFrame) -> Optional[Dict[str, Argument]]:
    """Bind left pattern arguments positionally; None when no match."""
    if rule.anchor != frame.anchor or len(rule.left) != len(frame.args):
        return None
    binding: Dict[str, Argument] = {}
    for pat, arg in zip(rule.left, frame.args):
        if pat.category != arg.category or pat.position != arg.position:
            return None
        if unify(pat.features, arg.features) is None:
            return None
        binding[pat.binder] = arg
    return binding


def lrr_apply(rule: LRR, frame: SubcatFrame) -> Optional[SubcatFrame]:
    """The rewritten frame, or None when the rule does not match."""
    binding = lrr_match(rule, frame)
    if binding is None:
        return None
    args: List[Argument] = []
    used = set()
    for tmpl in rule.right:
        if tmpl.binder in binding:
            src = binding[tmpl.binder]
            used.add(tmpl.binder)
            feats = unify(src.features, tmpl.features)
            if feats is None:
                return None
            category = tmpl.category or src.category
            expansion = tmpl.expansion
            if expansion is None and category == src.category:
                expansion = src.expansion
            args.append(Argument(src.index, category, tmpl.position, feats, expansion))
        else:
            if not tmpl.binder.isdigit():
                raise LexorgError("rule %s: template %r binds nothing and is "
                                  "not a fresh index" % (rule.name, tmpl.binder))
            if tmpl.category is None:
                raise LexorgError("rule %s: fresh argument needs a category"
                                  % rule.name)
            args.append(Argument(int(tmpl.binder), tmpl.category, tmpl.position,
                                 tmpl.features, tmpl.expansion))
    if rule.additive:
        for pat, arg in zip(rule.left, frame.args):
            if pat.binder not in used:
                args.append(arg)
    feats = frame.features + rule.add_features
    return SubcatFrame(frame.name, frame.anchor, tuple(args), feats)


@dataclass(frozen=True)
class ClosureEntry:
    frame: SubcatFrame
    sequence: Tuple[str, ...]


def frame_closure(frame: SubcatFrame, rules: Sequence[LRR]) -> List[ClosureEntry]:
    """Close a frame under sequences of distinct rules, breadth first.

    A frame reachable along several sequences is kept once, under the
    shortest sequence (first found in rule-list order on ties).
    """
    by_name = {}
    for rule in rules:
        if rule.name in by_name:
            raise LexorgError("duplicate rule name %s" % rule.name)
        by_name[rule.name] = rule
    out = [ClosureEntry(frame, ())]
    seen = {frame.signature()}
    frontier = [(frame, ())]
    while frontier:
        new_frontier = []
        for cur, seq in frontier:
            for rule in rules:
                if rule.name in seq:
                    continue
                nxt = lrr_apply(rule, cur)
                if nxt is None or nxt.signature() in seen:
                    continue
                seen.add(nxt.signature())
                entry = ClosureEntry(nxt, seq + (rule.name,))
                out.append(entry)
                new_frontier.append((nxt, entry.sequence))
        frontier = new_frontier
    return out


# ---------------------------------------------------------------------------
# block library

@dataclass(frozen=True)
class TransformationBlock:
    """A named transformation description, optionally per-argument.

    With a `targets` (position, category) selector the block is instantiated
    once per eligible argument, substituting `$arg` with the target node name
    and `$trace` with the matching empty-element name.  An NP selector also
    reaches the NP inside an expanded prepositional argument.
    """

    name: str
    description: TreeDescription
    targets: Optional[Tuple[str, str]] = None

    def instances_for(self, frame: SubcatFrame) -> List[TreeDescription]:
        if self.targets is None:
            return [self.description]
        position, category = self.targets
        out = []
        for arg in frame.args:
            if arg.position != position:
                continue
            if arg.category == category:
                name = arg.node_name()
            elif arg.category == "PP" and category == "NP":
                name = "NP_%d" % arg.index
            else:
                continue
            subs = {"$arg": name, "$trace": "eps_%d" % arg.index}
            out.append(instantiate(self.description, subs))
        return out


def instantiate(desc: TreeDescription, subs: Dict[str, str],
                words: Optional[Dict[str, str]] = None) -> TreeDescription:
    """Substitute placeholder node names (and terminal spellings)."""
    words = words or {}

    def sub(n: str) -> str:
        return subs.get(n, n)

    nodes = []
    for spec in desc.nodes:
        word = spec.word
        if word in words:
            word = words[word]
        nodes.append(NodeSpec(sub(spec.name), None, spec.markers, spec.top,
                              spec.bottom, word))
    eqs = []
    for eq in desc.equations:
        lhs = FeaturePath(sub(eq.lhs.node), eq.lhs.side, eq.lhs.attrs)
        rhs = eq.rhs
        if isinstance(rhs, FeaturePath):
            rhs = FeaturePath(sub(rhs.node), rhs.side, rhs.attrs)
        eqs.append(FeatureEquation(lhs, rhs, eq.klass))
    return TreeDescription(desc.name, tuple(nodes),
                           frozenset((sub(a), sub(b)) for a, b in desc.parents),
                           frozenset((sub(a), sub(b)) for a, b in desc.doms),
                           frozenset((sub(a), sub(b)) for a, b in desc.precs),
                           tuple(eqs))


@dataclass
class BlockLibrary:
    """Spine blocks by anchor category, argument blocks by shape, transformations."""

    spines: Dict[str, TreeDescription] = field(default_factory=dict)
    arg_blocks: Dict[Tuple[str, str, Optional[str]], TreeDescription] = field(default_factory=dict)
    trans_blocks: List[TransformationBlock] = field(default_factory=list)

    def arg_block(self, arg: Argument) -> TreeDescription:
        for key in ((arg.category, arg.position, arg.expansion),
                    (arg.category, arg.position, None)):
            if key in self.arg_blocks:
                return self.arg_blocks[key]
        raise LexorgError("no block for a %s %s argument" % (arg.position, arg.category))


def blocks_for_frame(frame: SubcatFrame, lib: BlockLibrary) -> TreeDescription:
    """Instantiate and conjoin the spine and one block per argument."""
    if frame.anchor not in lib.spines:
        raise LexorgError("no spine block for anchor %s" % frame.anchor)
    desc = replace(lib.spines[frame.anchor], name=frame.name)
    for arg in frame.args:
        template = lib.arg_block(arg)
        subs = {"$arg": arg.node_name(),
                "$p": "P_%d" % arg.index,
                "$obj": "NP_%d" % arg.index,
                "$w": "w_%d" % arg.index}
        words = {"$word": arg.expansion} if arg.expansion else {}
        block = instantiate(template, subs, words)
        desc = conjoin(desc, block)
        if arg.features:
            desc = conjoin(desc, describe(nodes=[
                NodeSpec(arg.node_name(), top=arg.features)]))
    # surface order: pre-anchor arguments before the anchor's VP, the anchor
    # before post-anchor arguments, arguments in frame order
    pre = [a.node_name() for a in frame.args if a.position == PRE]
    post = [a.node_name() for a in frame.args if a.position == POST]
    chain = []
    for left, right in zip(pre, pre[1:]):
        chain.append((left, right))
    if pre:
        chain.append((pre[-1], "VP"))
    if post:
        chain.append(("V", post[0]))
    for left, right in zip(post, post[1:]):
        chain.append((left, right))
    known = {s.name for s in desc.nodes}
    chain = [(a, b) for a, b in chain if a in known and b in known]
    desc = TreeDescription(desc.name, desc.nodes, desc.parents, desc.doms,
                           desc.precs | frozenset(chain),
                           desc.equations + frame.features)
    return desc


# ---------------------------------------------------------------------------
# family generation

@dataclass(frozen=True)
class Provenance:
    frame: str
    rules: Tuple[str, ...]
    transformation: Optional[str]


@dataclass
class TreeFamily:
    name: str
    trees: List[ElementaryTree]
    provenance: Dict[str, Provenance]

    def by_name(self, name: str) -> ElementaryTree:
        for t in self.trees:
            if t.name == name:
                return t
        raise KeyError(name)


def generate_family(frame: SubcatFrame, rules: Sequence[LRR], lib: BlockLibrary,
                    cfg: Optional[SolverConfig] = None) -> TreeFamily:
    """All trees of the family anchored by the frame's lexical class."""
    closure = frame_closure(frame, rules)
    named: List[Tuple[str, ElementaryTree, Provenance]] = []
    fam = None
    for entry in closure:
        base = blocks_for_frame(entry.frame, lib)
        combos: List[Tuple[Optional[str], TreeDescription]] = [(None, base)]
        for block in lib.trans_blocks:
            for inst in block.instances_for(entry.frame):
                combos.append((block.name, conjoin(base, inst)))
        for trans, desc in combos:
            for model in solve(desc, cfg):
                name = tree_name(model)
                prov = Provenance(frame.name, entry.sequence, trans)
                named.append((name, model, prov))
                if fam is None and not entry.sequence and trans is None:
                    fam = family_name(model)
    if fam is None:
        raise LexorgError("frame %s has no declarative tree" % frame.name)
    counts: Dict[str, int] = {}
    trees = []
    provenance: Dict[str, Provenance] = {}
    for name, model, prov in sorted(named, key=lambda x: x[0]):
        counts[name] = counts.get(name, 0) + 1
        if counts[name] > 1:
            name = "%s-%d" % (name, counts[name])
        trees.append(model.replace(name=name))
        provenance[name] = prov
    return TreeFamily(fam, trees, provenance)


# ---------------------------------------------------------------------------
# frame lattice

def _extends(small: SubcatFrame, big: SubcatFrame) -> bool:
    """True when big's argument list embeds small's, order preserved."""
    if small.anchor != big.anchor:
        return False
    if small.signature() == big.signature():
        return False
    it = iter(big.args)
    for arg in small.args:
        for cand in it:
            if (cand.index == arg.index and cand.category == arg.category
                    and cand.position == arg.position
                    and unify(cand.features, arg.features) is not None):
                break
        else:
            return False
    return True


def frame_lattice(frames: Sequence[SubcatFrame]) -> List[Tuple[str, str]]:
    """Extension edges between frames, transitively reduced."""
    edges = [(a.name, b.name) for a in frames for b in frames if _extends(a, b)]
    edge_set = set(edges)
    reduced = []
    for a, b in edges:
        if any((a, c) in edge_set and (c, b) in edge_set
               for c in {n for _, n in edges} if c not in (a, b)):
            continue
        reduced.append((a, b))
    return sorted(reduced)
