"""Tree-rewriting metarules.

A metarule is a pair of pattern trees.  Pattern node labels are constants
(``NP_1``), untyped variables (``?1``) capturing a contiguous forest, or
typed variables (``?3NP_1/PP``) capturing exactly one node whose label fits
one of the specifiers (``_?`` meaning any subscript, no subscript meaning
none).  Constants must agree with the input node on name and markers both
ways; typed variables only require their markers to be present on the input
node.  An untyped variable with children additionally excises, anywhere in
the captured forest, one pairwise non-overlapping subtree per child (left to
right) and matches the children against the excised subtrees; at output the
right-hand side's children are inserted exactly at the excision points.

Feature equations on the left-hand side filter matches: a ``+`` equation
must be matched by an input equation, which is then kept; a ``-`` equation
must be matched and the matching equations are dropped; an unprefixed
left-hand equation drops its matches without requiring any.  All other input
equations are copied, and unprefixed right-hand equations are added.
Equation matching honors commutativity and lets ``?n`` metavariables stand
for attribute names or atomic values (never paths).
"""

import os
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .features import FeatureEquation, FeaturePath
from .trees import (
    ElementaryTree,
    NodeLabel,
    TreeNode,
    canonical_key,
    parse_trees,
    serialize_trees,
    walk,
)

CONSTANT = "constant"
TYPED = "typed"
UNTYPED = "untyped"

MODE_PREFIX = {
    "single": "MR-",
    "parallel": "MRP-",
    "sequential": "MRS-",
    "cumulative": "MRC-",
}


class MetaruleError(Exception):
    pass


@dataclass(frozen=True)
class PatternNode:
    kind: str
    name: str = ""                      # constant label text, or the word
    var_id: str = ""
    specs: Tuple[Tuple[str, str], ...] = ()   # (stem, subscript spec)
    markers: frozenset = frozenset()
    children: Tuple["PatternNode", ...] = ()
    terminal: bool = False


def parse_pattern_label(text: str):
    """Split a pattern label into (kind, var_id, specs)."""
    if not text.startswith("?"):
        return CONSTANT, "", ()
    m = re.match(r"\?(\d+)(.*)$", text)
    if not m:
        raise MetaruleError("bad variable label %r" % text)
    var_id, rest = m.group(1), m.group(2)
    if not rest:
        return UNTYPED, var_id, ()
    specs = []
    for part in rest.split("/"):
        if not part:
            raise MetaruleError("empty specifier in %r" % text)
        stem, _, sub = part.partition("_")
        specs.append((stem, sub))
    return TYPED, var_id, tuple(specs)


def pattern_from_tree(node: TreeNode) -> PatternNode:
    children = tuple(pattern_from_tree(c) for c in node.children)
    if node.terminal:
        return PatternNode(CONSTANT, node.label.stem, markers=node.markers,
                           children=children, terminal=True)
    kind, var_id, specs = parse_pattern_label(node.label.text())
    if kind == CONSTANT:
        return PatternNode(CONSTANT, node.label.text(), markers=node.markers,
                           children=children)
    return PatternNode(kind, var_id=var_id, specs=specs, markers=node.markers,
                       children=children)


@dataclass
class Metarule:
    name: str
    lhs: PatternNode
    rhs: PatternNode
    lhs_name: str
    rhs_name: str
    lhs_eqs: Tuple[FeatureEquation, ...] = ()
    rhs_eqs: Tuple[FeatureEquation, ...] = ()
    comments: Tuple[str, ...] = ()

    def __post_init__(self):
        lhs_un = _var_children(self.lhs, UNTYPED)
        rhs_un = _var_children(self.rhs, UNTYPED)
        for side, seen in (("left", lhs_un), ("right", rhs_un)):
            ids = list(seen)
            if len(ids) != len(set(ids)):
                raise MetaruleError("%s: duplicate untyped variable on the %s side"
                                    % (self.name, side))
        for var_id, arity in rhs_un.items():
            if var_id not in lhs_un:
                raise MetaruleError("%s: untyped variable ?%s only on the right"
                                    % (self.name, var_id))
            if arity != lhs_un[var_id]:
                raise MetaruleError(
                    "%s: untyped variable ?%s has %d children on the right "
                    "but %d on the left" % (self.name, var_id, arity,
                                            lhs_un[var_id]))
        lhs_ty = set(_var_children(self.lhs, TYPED))
        for var_id in _var_children(self.rhs, TYPED):
            if var_id not in lhs_ty:
                raise MetaruleError("%s: typed variable ?%s only on the right"
                                    % (self.name, var_id))


def _var_children(root: PatternNode, kind: str) -> Dict[str, int]:
    out: Dict[str, int] = {}
    def go(n):
        if n.kind == kind:
            out[n.var_id] = len(n.children)
        for c in n.children:
            go(c)
    go(root)
    return out


def metarule_from_trees(lhs_tree: ElementaryTree, rhs_tree: ElementaryTree,
                        name: Optional[str] = None) -> Metarule:
    lhs_eqs = tuple(lhs_tree.equations)
    rhs_eqs = tuple(e for e in rhs_tree.equations if not e.klass)
    return Metarule(name or lhs_tree.name, pattern_from_tree(lhs_tree.root),
                    pattern_from_tree(rhs_tree.root), lhs_tree.name,
                    rhs_tree.name, lhs_eqs, rhs_eqs, tuple(lhs_tree.comments))


def load_metarules(text: str, source: str = "<string>"):
    """Pair the records of a metarule file; returns (rules, warnings)."""
    trees = parse_trees(text, source)
    warnings = []
    if len(trees) % 2:
        warnings.append("%s: odd final tree %s ignored" % (source, trees[-1].name))
        trees = trees[:-1]
    rules = []
    for i in range(0, len(trees), 2):
        rules.append(metarule_from_trees(trees[i], trees[i + 1]))
    return rules, warnings


# ---------------------------------------------------------------------------
# matching

@dataclass(frozen=True)
class Match:
    """Variable bindings: typed to a node address, untyped to the captured
    top addresses plus the excised descendant addresses."""

    typed: Tuple[Tuple[str, Tuple[int, ...]], ...]
    untyped: Tuple[Tuple[str, Tuple[Tuple[Tuple[int, ...], ...],
                                    Tuple[Tuple[int, ...], ...]]], ...]

    def typed_map(self):
        return dict(self.typed)

    def untyped_map(self):
        return dict(self.untyped)


class _TreeIndex:
    """Preorder spans for right-of tests and address bookkeeping."""

    def __init__(self, tree: ElementaryTree):
        self.tree = tree
        self.nodes: Dict[Tuple[int, ...], TreeNode] = {}
        self.span: Dict[Tuple[int, ...], Tuple[int, int]] = {}
        counter = [0]

        def index(node, addr):
            start = counter[0]
            counter[0] += 1
            self.nodes[addr] = node
            for i, c in enumerate(node.children, 1):
                index(c, addr + (i,))
            self.span[addr] = (start, counter[0] - 1)

        index(tree.root, ())

    def children(self, addr):
        return [addr + (i,) for i in range(1, len(self.nodes[addr].children) + 1)]

    def descendants_or_self(self, addr):
        lo, hi = self.span[addr]
        return [a for a, (s, _) in sorted(self.span.items(), key=lambda kv: kv[1][0])
                if lo <= s <= hi]

    def right_of(self, a, b):
        return self.span[a][0] > self.span[b][1]


def _spec_matches(specs, label: NodeLabel) -> bool:
    for stem, sub in specs:
        if stem != label.stem:
            continue
        if sub == "?":
            if label.subscript:
                return True
        elif sub == "":
            if not label.subscript:
                return True
        elif sub == label.subscript:
            return True
    return False


def _node_compat(p: PatternNode, node: TreeNode) -> bool:
    if p.kind == CONSTANT:
        if p.terminal != node.terminal:
            return False
        name = node.label.stem if node.terminal else node.label.text()
        return p.name == name and p.markers == node.markers
    if p.kind == TYPED:
        if node.terminal:
            return False
        return p.markers <= node.markers and _spec_matches(p.specs, node.label)
    raise MetaruleError("untyped variable in a singleton slot")


def _valid_mappings(ps: Sequence[PatternNode], addrs: Sequence[Tuple[int, ...]],
                    idx: _TreeIndex):
    """Splits of the address list into one contiguous block per pattern node."""
    if not ps:
        if not addrs:
            yield []
        return
    p, rest = ps[0], ps[1:]
    if p.kind == UNTYPED:
        for k in range(len(addrs) + 1):
            for tail in _valid_mappings(rest, addrs[k:], idx):
                yield [(p, tuple(addrs[:k]))] + tail
    else:
        if addrs and _node_compat(p, idx.nodes[addrs[0]]):
            for tail in _valid_mappings(rest, addrs[1:], idx):
                yield [(p, (addrs[0],))] + tail


def _merge(a: dict, b: dict) -> Optional[dict]:
    out = dict(a)
    for key, val in b.items():
        if key in out and out[key] != val:
            return None
        out[key] = val
    return out


def _match_forest(ps, addrs, idx) -> List[dict]:
    results = []
    for mapping in _valid_mappings(ps, addrs, idx):
        partial = [dict()]
        for p, block in mapping:
            subs = _match_element(p, block, idx)
            if not subs:
                partial = []
                break
            partial = [m for a in partial for b in subs
                       for m in [_merge(a, b)] if m is not None]
            if not partial:
                break
        results.extend(partial)
    # two mapping routes can induce the same bindings; keep one of each
    seen = set()
    unique = []
    for m in results:
        key = tuple(sorted(m.items()))
        if key not in seen:
            seen.add(key)
            unique.append(m)
    return unique


def _match_element(p: PatternNode, block, idx) -> List[dict]:
    if p.kind in (CONSTANT, TYPED):
        addr = block[0]
        subs = _match_forest(p.children, idx.children(addr), idx)
        if p.kind == TYPED:
            subs = [m for m in (_merge(s, {("t", p.var_id): addr}) for s in subs)
                    if m is not None]
        return subs
    # untyped: excise one subtree per child from the captured forest
    s = len(p.children)
    if s == 0:
        return [{("u", p.var_id): (tuple(block), ())}]
    pool = []
    for top in block:
        pool.extend(idx.descendants_or_self(top))
    out = []
    for combo in _right_combos(pool, s, idx):
        for inner in _match_forest(p.children, combo, idx):
            m = _merge(inner, {("u", p.var_id): (tuple(block), tuple(combo))})
            if m is not None:
                out.append(m)
    return out


def _right_combos(pool, s, idx):
    """Ordered selections, each strictly to the right of the previous."""
    def grow(start, chosen):
        if len(chosen) == s:
            yield tuple(chosen)
            return
        for i in range(start, len(pool)):
            addr = pool[i]
            if chosen and not idx.right_of(addr, chosen[-1]):
                continue
            chosen.append(addr)
            yield from grow(i + 1, chosen)
            chosen.pop()

    yield from grow(0, [])


def match_trees(pattern_root: PatternNode, tree: ElementaryTree) -> List[Match]:
    """All structural matches of the pattern against the whole tree."""
    _reject_variable_input(tree)
    idx = _TreeIndex(tree)
    out = []
    for m in _match_forest([pattern_root], [()], idx):
        typed = tuple(sorted((k[1], v) for k, v in m.items() if k[0] == "t"))
        untyped = tuple(sorted((k[1], v) for k, v in m.items() if k[0] == "u"))
        out.append(Match(typed, untyped))
    return out


def _reject_variable_input(tree: ElementaryTree):
    for addr, node in tree.walk():
        if not node.terminal and node.label.stem.startswith("?"):
            raise MetaruleError("input tree %s has a variable label at %s"
                                % (tree.name, addr))


# ---------------------------------------------------------------------------
# feature equation filtering

_METAVAR = re.compile(r"^\?\d+$")


def _is_metavar(tok: str) -> bool:
    return bool(_METAVAR.match(tok))


def _node_token_matches(tok: str, name: str, binding: dict) -> bool:
    if not tok.startswith("?"):
        return tok == name
    body = tok[1:]
    m = re.match(r"^(\d*)(.*)$", body)
    digits, rest = m.group(1), m.group(2)
    if digits and not rest:
        # structural variable left unsubstituted: treat as unresolvable
        return False
    specs = []
    for part in rest.split("/"):
        stem, _, sub = part.partition("_")
        specs.append((stem, sub))
    return _spec_matches(specs, NodeLabel.parse(name))


def _path_matches(pat: FeaturePath, given: FeaturePath, binding: dict) -> bool:
    if not _node_token_matches(pat.node, given.node, binding):
        return False
    if (pat.side or "t") != (given.side or "t"):
        return False
    if len(pat.attrs) != len(given.attrs):
        return False
    for a, b in zip(pat.attrs, given.attrs):
        if _is_metavar(a):
            if binding.setdefault(("attr", a), b) != b:
                return False
        elif a != b:
            return False
    return True


def _value_matches(pat, given, binding) -> bool:
    if isinstance(pat, FeaturePath) != isinstance(given, FeaturePath):
        return False
    if isinstance(pat, FeaturePath):
        return _path_matches(pat, given, binding)
    if len(pat.atoms) == 1:
        atom = next(iter(pat.atoms))
        if _is_metavar(atom):
            return binding.setdefault(("val", atom), given) == given
    return pat.atoms == given.atoms


def _eq_matches(pat: FeatureEquation, given: FeatureEquation, binding: dict) -> Optional[dict]:
    """Extended binding if the input equation fits the pattern equation."""
    orientations = [given]
    if isinstance(given.rhs, FeaturePath):
        orientations.append(given.commuted())
    for g in orientations:
        trial = dict(binding)
        if _path_matches(pat.lhs, g.lhs, trial) and _value_matches(pat.rhs, g.rhs, trial):
            return trial
    return None


def _substitute_eq(eq: FeatureEquation, names: Dict[str, str],
                   binding: dict) -> FeatureEquation:
    def sub_path(p: FeaturePath) -> FeaturePath:
        node = names.get(p.node, p.node)
        attrs = tuple(binding.get(("attr", a), a) if _is_metavar(a) else a
                      for a in p.attrs)
        return FeaturePath(node, p.side, attrs)

    rhs = eq.rhs
    if isinstance(rhs, FeaturePath):
        rhs = sub_path(rhs)
    elif len(rhs.atoms) == 1 and _is_metavar(next(iter(rhs.atoms))):
        bound = binding.get(("val", next(iter(rhs.atoms))))
        if bound is None:
            raise MetaruleError("unbound metavariable in added equation %s" % eq.text())
        rhs = bound
    return FeatureEquation(sub_path(eq.lhs), rhs, "")


def feature_filter(rule: Metarule, tree: ElementaryTree, match: Match,
                   idx: _TreeIndex):
    """Apply the equation classes for one structural match.

    Returns (kept input equations, added equations) or None when a required
    equation is missing.
    """
    names = {"?" + var: idx.nodes[addr].label.text()
             for var, addr in match.typed_map().items()}
    inp = [FeatureEquation(e.lhs, e.rhs, "") for e in tree.equations]
    alive = list(range(len(inp)))
    binding: dict = {}
    for eq in rule.lhs_eqs:
        pat = _substitute_eq_nodes(eq, names)
        hits = []
        for i in alive:
            got = _eq_matches(pat, inp[i], binding)
            if got is not None:
                hits.append((i, got))
        if eq.klass in ("+", "-") and not hits:
            return None
        if hits and eq.klass in ("+", "-"):
            binding = hits[0][1]
        if eq.klass in ("-", ""):
            dead = {i for i, _ in hits}
            alive = [i for i in alive if i not in dead]
    kept = [inp[i] for i in alive]
    added = [_substitute_eq(eq, names, binding) for eq in rule.rhs_eqs]
    return kept, added


def _substitute_eq_nodes(eq: FeatureEquation, names: Dict[str, str]) -> FeatureEquation:
    def sub_path(p: FeaturePath) -> FeaturePath:
        return FeaturePath(names.get(p.node, p.node), p.side, p.attrs)

    rhs = eq.rhs
    if isinstance(rhs, FeaturePath):
        rhs = sub_path(rhs)
    return FeatureEquation(sub_path(eq.lhs), rhs, eq.klass)


# ---------------------------------------------------------------------------
# output generation

class _Hole:
    __slots__ = ("index",)

    def __init__(self, index):
        self.index = index


def _capture(idx: _TreeIndex, tops, descs) -> List[object]:
    """The captured forest with holes at the excised addresses."""
    hole_of = {addr: k for k, addr in enumerate(descs)}

    def copy(addr):
        if addr in hole_of:
            return _Hole(hole_of[addr])
        node = idx.nodes[addr]
        kids = tuple(copy(addr + (i,)) for i in range(1, len(node.children) + 1))
        return node.replace(children=kids)

    return [copy(top) for top in tops]


def _instantiate(p: PatternNode, match: Match, idx: _TreeIndex) -> List[TreeNode]:
    if p.kind == CONSTANT:
        kids = _instantiate_children(p.children, match, idx)
        if p.terminal:
            return [TreeNode(NodeLabel(p.name), p.markers, children=tuple(kids),
                             terminal=True)]
        return [TreeNode(NodeLabel.parse(p.name), p.markers, children=tuple(kids))]
    if p.kind == TYPED:
        addr = match.typed_map()[p.var_id]
        label = idx.nodes[addr].label
        kids = _instantiate_children(p.children, match, idx)
        return [TreeNode(label, p.markers, children=tuple(kids))]
    tops, descs = match.untyped_map()[p.var_id]
    fills = [_instantiate(child, match, idx) for child in p.children]
    out: List[TreeNode] = []
    for item in _capture(idx, tops, descs):
        if isinstance(item, _Hole):
            out.extend(fills[item.index])
        else:
            out.append(_fill(item, fills))
    return out


def _instantiate_children(children, match, idx) -> List[TreeNode]:
    out: List[TreeNode] = []
    for child in children:
        out.extend(_instantiate(child, match, idx))
    return out


def _fill(node: TreeNode, fills) -> TreeNode:
    kids: List[TreeNode] = []
    for child in node.children:
        if isinstance(child, _Hole):
            kids.extend(fills[child.index])
        else:
            kids.append(_fill(child, fills))
    return node.replace(children=tuple(kids))


def apply_metarule(rule: Metarule, tree: ElementaryTree,
                   copy_unmatched: bool = False,
                   change_name: bool = False) -> List[ElementaryTree]:
    """One output tree per surviving match, canonically ordered.

    With copy_unmatched, a tree with no surviving match passes through
    unchanged instead of producing nothing.
    """
    idx = _TreeIndex(tree)
    outputs = []
    for match in match_trees(rule.lhs, tree):
        filtered = feature_filter(rule, tree, match, idx)
        if filtered is None:
            continue
        kept, added = filtered
        roots = _instantiate(rule.rhs, match, idx)
        if len(roots) != 1:
            raise MetaruleError("%s: right-hand side produced %d roots"
                                % (rule.name, len(roots)))
        root = roots[0]
        present = {n.label.text() for _, n in walk(root) if not n.terminal}
        eqs = [e for e in kept
               if _eq_nodes_present(e, present)] + \
              [e for e in added if _eq_nodes_present(e, present)]
        name = tree.name + "-" + rule.rhs_name if change_name else tree.name
        comments = tuple(["from rule %s:" % rule.name] + list(rule.comments)
                         + ["from input %s:" % tree.name] + list(tree.comments))
        outputs.append(ElementaryTree(name, root, comments=comments, equations=eqs))
    if not outputs and copy_unmatched:
        return [tree]
    return sorted(outputs, key=canonical_key)


def _eq_nodes_present(eq: FeatureEquation, present) -> bool:
    if eq.lhs.node not in present:
        return False
    if isinstance(eq.rhs, FeaturePath) and eq.rhs.node not in present:
        return False
    return True


# ---------------------------------------------------------------------------
# application modes

def run_mode(rules: Sequence[Metarule], trees: Sequence[ElementaryTree],
             mode: str, copy_unmatched: bool = False,
             change_name: bool = False) -> List[ElementaryTree]:
    if mode == "single":
        rule = rules[0]
        return [out for t in trees
                for out in apply_metarule(rule, t, copy_unmatched, change_name)]
    if mode == "parallel":
        return [out for t in trees for rule in rules
                for out in apply_metarule(rule, t, copy_unmatched, change_name)]
    if mode == "sequential":
        buf = list(trees)
        for rule in rules:
            buf = [out for t in buf
                   for out in apply_metarule(rule, t, copy_unmatched, change_name)]
        return buf
    if mode == "cumulative":
        # inputs pass through at every stage; copy_unmatched has no effect
        buf = list(trees)
        for rule in rules:
            buf = buf + [out for t in buf
                         for out in apply_metarule(rule, t, False, change_name)]
        return buf
    raise MetaruleError("unknown mode %r" % mode)


def run_files(mr_path: str, tree_paths: Sequence[str], mode: str,
              out_dir: Optional[str] = None, copy_unmatched: bool = False,
              change_name: bool = False):
    """Apply a metarule file to tree files; returns (written paths, warnings)."""
    if mode not in MODE_PREFIX:
        raise MetaruleError("unknown mode %r" % mode)
    with open(mr_path, encoding="utf-8") as handle:
        rules, warnings = load_metarules(handle.read(), mr_path)
    if not rules:
        raise MetaruleError("%s holds no metarule" % mr_path)
    if mode == "single" and len(rules) > 1:
        warnings.append("%s: single mode uses only the first rule" % mr_path)
    written = []
    for path in tree_paths:
        with open(path, encoding="utf-8") as handle:
            trees = parse_trees(handle.read(), path)
        outs = run_mode(rules, trees, mode, copy_unmatched, change_name)
        directory = out_dir if out_dir is not None else os.path.dirname(path)
        target = os.path.join(directory, MODE_PREFIX[mode] + os.path.basename(path))
        with open(target, "w", encoding="utf-8") as handle:
            handle.write(serialize_trees(outs) if outs else "")
        written.append(target)
    return written, warnings
