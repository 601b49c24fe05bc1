"""Tree descriptions (blocks) and their minimal-model solver.

A description declares named node variables plus parent, dominance and
precedence pairs and feature equations.  Conjunction is set union, with
variables of the same name identified.  Solving enumerates every tree over
the declared variables (no fresh nodes) that satisfies the constraints,
keeping only minimal models: a tree is dropped when merging some of its
mergeable nodes still yields a satisfying tree.  All sibling orders
consistent with the precedence pairs are enumerated.

Variable names are label-shaped (``NP_0``, ``S_r``); the solved tree uses
them as node labels, so feature equations survive solving unchanged.
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .features import (
    EMPTY,
    AtomSet,
    FeatureEquation,
    FeaturePath,
    FeatureStructure,
    resolve_fs,
    unify,
)
from . import trees as T
from .trees import ElementaryTree, NodeLabel, TreeNode


class DescriptionError(Exception):
    pass


@dataclass(frozen=True)
class NodeSpec:
    """One declared node variable.

    `word` makes the variable a terminal leaf with that spelling.  The
    category, when given, must restate the stem of the name.
    """

    name: str
    category: Optional[str] = None
    markers: FrozenSet[str] = frozenset()
    top: FeatureStructure = EMPTY
    bottom: FeatureStructure = EMPTY
    word: Optional[str] = None

    def __post_init__(self):
        label = NodeLabel.parse(self.name)
        if self.category is not None and self.category != label.stem:
            raise DescriptionError("category %s contradicts node name %s"
                                   % (self.category, self.name))
        if self.word is not None and (self.markers or self.top or self.bottom):
            raise DescriptionError("terminal %s cannot carry markers or features"
                                   % self.name)
        bad = self.markers - {T.ANCHOR, T.FOOT, T.NA, T.SUBST}
        if bad:
            raise DescriptionError("unknown markers %s on %s" % (sorted(bad), self.name))

    @property
    def stem(self) -> str:
        return NodeLabel.parse(self.name).stem

    def merged_with(self, other: "NodeSpec") -> "NodeSpec":
        if self.word is not None or other.word is not None:
            if self.word != other.word:
                raise DescriptionError("cannot identify %s with %s"
                                       % (self.name, other.name))
        top = unify(self.top, other.top)
        bottom = unify(self.bottom, other.bottom)
        if top is None or bottom is None:
            raise DescriptionError("features clash identifying %s with %s"
                                   % (self.name, other.name))
        return NodeSpec(self.name, self.category or other.category,
                        self.markers | other.markers, top, bottom, self.word)


@dataclass(frozen=True)
class TreeDescription:
    name: str = "d"
    nodes: Tuple[NodeSpec, ...] = ()
    parents: FrozenSet[Tuple[str, str]] = frozenset()
    doms: FrozenSet[Tuple[str, str]] = frozenset()
    precs: FrozenSet[Tuple[str, str]] = frozenset()
    equations: Tuple[FeatureEquation, ...] = ()

    def __post_init__(self):
        seen = {}
        for spec in self.nodes:
            if spec.name in seen:
                raise DescriptionError("duplicate node %s" % spec.name)
            seen[spec.name] = spec
        for rel, pairs in (("parent", self.parents), ("dom", self.doms),
                           ("prec", self.precs)):
            for a, b in pairs:
                for n in (a, b):
                    if n not in seen:
                        raise DescriptionError("%s pair names undeclared node %s"
                                               % (rel, n))
        object.__setattr__(self, "nodes",
                           tuple(sorted(self.nodes, key=lambda s: s.name)))
        object.__setattr__(self, "equations", tuple(
            sorted(self.equations, key=lambda e: (e.klass, e.text()))))

    def spec(self, name: str) -> NodeSpec:
        for s in self.nodes:
            if s.name == name:
                return s
        raise DescriptionError("no node %s" % name)

    def names(self) -> List[str]:
        return [s.name for s in self.nodes]


def describe(name="d", nodes=(), parents=(), doms=(), precs=(), equations=()):
    """Constructor taking loose sequences; node specs may be bare names."""
    specs = []
    for n in nodes:
        specs.append(NodeSpec(n) if isinstance(n, str) else n)
    return TreeDescription(name, tuple(specs), frozenset(parents),
                           frozenset(doms), frozenset(precs), tuple(equations))


def conjoin(a: TreeDescription, b: TreeDescription) -> TreeDescription:
    """Union two descriptions, identifying equally named variables."""
    by_name: Dict[str, NodeSpec] = {s.name: s for s in a.nodes}
    for spec in b.nodes:
        if spec.name in by_name:
            by_name[spec.name] = by_name[spec.name].merged_with(spec)
        else:
            by_name[spec.name] = spec
    precs = a.precs | b.precs
    _check_prec_cycle(precs)
    eqs = list(a.equations)
    have = {(e.klass, e.canonical().text()) for e in eqs}
    for eq in b.equations:
        key = (eq.klass, eq.canonical().text())
        if key not in have:
            have.add(key)
            eqs.append(eq)
    return TreeDescription(a.name, tuple(by_name.values()),
                           a.parents | b.parents, a.doms | b.doms, precs,
                           tuple(eqs))


def _check_prec_cycle(precs):
    graph: Dict[str, set] = {}
    for x, y in precs:
        graph.setdefault(x, set()).add(y)
        graph.setdefault(y, set())
    state: Dict[str, int] = {}

    def visit(n):
        state[n] = 1
        for m in graph[n]:
            if state.get(m) == 1:
                raise DescriptionError("precedence cycle through %s" % m)
            if m not in state:
                visit(m)
        state[n] = 2

    for n in graph:
        if n not in state:
            visit(n)


@dataclass
class SolverConfig:
    max_nodes: int = 16
    max_models: int = 5000


# ---------------------------------------------------------------------------
# solving

def _compatible(a: NodeSpec, b: NodeSpec) -> bool:
    if a.stem != b.stem:
        return False
    try:
        a.merged_with(b)
    except DescriptionError:
        return False
    marks = a.markers | b.markers
    if T.FOOT in marks and (T.SUBST in marks or T.ANCHOR in marks):
        return False
    return True


def _partitions(names: List[str], compat) -> List[List[List[str]]]:
    """All set partitions whose blocks are pairwise compatible."""
    out: List[List[List[str]]] = []

    def grow(i, blocks):
        if i == len(names):
            out.append([list(b) for b in blocks])
            return
        name = names[i]
        for block in blocks:
            if all(compat(name, other) for other in block):
                block.append(name)
                grow(i + 1, blocks)
                block.pop()
        blocks.append([name])
        grow(i + 1, blocks)
        blocks.pop()

    grow(0, [])
    return out


def _coarser(p: Sequence[FrozenSet[str]], q: Sequence[FrozenSet[str]]) -> bool:
    """True if q merges strictly more than p (every p-block inside a q-block)."""
    if len(q) >= len(p):
        return False
    return all(any(pb <= qb for qb in q) for pb in p)


def solve(d: TreeDescription, cfg: Optional[SolverConfig] = None) -> List[ElementaryTree]:
    """All minimal models of the description, canonically ordered.

    >>> d = describe(nodes=["S", "NP", "VP"], parents=[("S", "NP"), ("S", "VP")])
    >>> [len(t.root.children) for t in solve(d)]
    [2, 2]
    """
    cfg = cfg or SolverConfig()
    names = d.names()
    if not names:
        return []
    if len(names) > cfg.max_nodes:
        raise DescriptionError("description exceeds the %d node budget"
                               % cfg.max_nodes)
    declared = {s.name for s in d.nodes}
    for eq in d.equations:
        for part in (eq.lhs, eq.rhs):
            if isinstance(part, FeaturePath) and part.node not in declared:
                raise DescriptionError("equation %s references undeclared node %s"
                                       % (eq.text(), part.node))
    specs = {s.name: s for s in d.nodes}
    compat_cache: Dict[Tuple[str, str], bool] = {}

    def compat(x, y):
        key = (x, y) if x < y else (y, x)
        if key not in compat_cache:
            compat_cache[key] = _compatible(specs[x], specs[y])
        return compat_cache[key]

    found: List[Tuple[Tuple[FrozenSet[str], ...], ElementaryTree, str]] = []
    seen_keys = set()
    satisfying_partitions: List[Tuple[FrozenSet[str], ...]] = []
    for blocks in _partitions(names, compat):
        part = tuple(sorted((frozenset(b) for b in blocks), key=sorted))
        rep = {n: min(b) for b in blocks for n in b}
        ok = True
        parent_of: Dict[str, str] = {}
        for a, b in d.parents:
            pa, pb = rep[a], rep[b]
            if pa == pb or parent_of.get(pb, pa) != pa:
                ok = False
                break
            parent_of[pb] = pa
        if not ok:
            continue
        lifted_prec = {(rep[a], rep[b]) for a, b in d.precs}
        if any(a == b for a, b in lifted_prec):
            continue
        lifted_dom = {(rep[a], rep[b]) for a, b in d.doms}
        merged_specs: Dict[str, NodeSpec] = {}
        try:
            for b in blocks:
                spec = specs[b[0]]
                for other in b[1:]:
                    spec = spec.merged_with(specs[other])
                merged_specs[min(b)] = NodeSpec(min(b), None, spec.markers,
                                                spec.top, spec.bottom, spec.word)
        except DescriptionError:
            continue
        reps = sorted(merged_specs)
        fixed = set(parent_of)
        free = [r for r in reps if r not in fixed]
        hosts = [r for r in reps
                 if merged_specs[r].word is None
                 and NodeLabel.parse(r).stem != T.EPS]
        for assignment in _parent_choices(free, hosts):
            pmap = dict(parent_of)
            pmap.update(assignment)
            roots = [r for r in reps if r not in pmap]
            if len(roots) != 1 or _cyclic(pmap):
                continue
            if not all(_dominates(pmap, a, b) for a, b in lifted_dom):
                continue
            if any(_dominates(pmap, a, b) or _dominates(pmap, b, a)
                   for a, b in lifted_prec):
                continue
            kids: Dict[str, List[str]] = {r: [] for r in reps}
            for child, parent in pmap.items():
                kids[parent].append(child)
            for ordering in _order_choices(roots[0], kids, lifted_prec, cfg):
                tree = _build_model(d, blocks, merged_specs, roots[0], ordering)
                if tree is None:
                    continue
                key = T.canonical_key(tree)
                if satisfies(tree, d) is None:
                    continue
                satisfying_partitions.append(part)
                if key not in seen_keys:
                    seen_keys.add(key)
                    found.append((part, tree, key))
                if len(found) > cfg.max_models:
                    raise DescriptionError("model enumeration cap exceeded")

    minimal = []
    for part, tree, key in found:
        if any(_coarser(part, other) for other in satisfying_partitions):
            continue
        minimal.append((key, tree))
    minimal.sort(key=lambda kt: kt[0])
    out = []
    for i, (_, tree) in enumerate(minimal, 1):
        name = d.name if len(minimal) == 1 else "%s-%d" % (d.name, i)
        out.append(tree.replace(name=name))
    return out


def _parent_choices(free, hosts):
    """Each free node picks any host or becomes the root (None omitted)."""
    if not free:
        yield {}
        return
    options = []
    for node in free:
        opts = [(node, h) for h in hosts if h != node]
        opts.append((node, None))
        options.append(opts)
    for combo in itertools.product(*options):
        yield {n: p for n, p in combo if p is not None}


def _cyclic(pmap) -> bool:
    for start in pmap:
        seen = set()
        n = start
        while n in pmap:
            if n in seen:
                return True
            seen.add(n)
            n = pmap[n]
    return False


def _dominates(pmap, a, b) -> bool:
    """Reflexive dominance under a parent map."""
    n = b
    while True:
        if n == a:
            return True
        if n not in pmap:
            return False
        n = pmap[n]


def _order_choices(root, kids, precs, cfg):
    """Cartesian product of sibling permutations honoring precedence."""
    nodes = sorted(kids)
    per_node = []
    for n in nodes:
        perms = [p for p in itertools.permutations(sorted(kids[n]))
                 if _prec_ok_local(p, precs)]
        per_node.append(perms)
    for combo in itertools.product(*per_node):
        ordering = dict(zip(nodes, combo))
        if _prec_ok_global(root, ordering, precs):
            yield ordering


def _prec_ok_local(siblings, precs):
    pos = {n: i for i, n in enumerate(siblings)}
    for a, b in precs:
        if a in pos and b in pos and pos[a] >= pos[b]:
            return False
    return True


def _frontier_order(root, ordering, out=None):
    if out is None:
        out = []
    out.append(root)
    for child in ordering.get(root, ()):
        _frontier_order(child, ordering, out)
    return out


def _prec_ok_global(root, ordering, precs):
    # a precedes b iff a's whole subtree comes before b's; with dominance
    # already excluded, preorder position decides it
    pos = {n: i for i, n in enumerate(_frontier_order(root, ordering))}
    return all(pos[a] < pos[b] for a, b in precs if a in pos and b in pos)


def _build_model(d, blocks, merged_specs, root, ordering) -> Optional[ElementaryTree]:
    rep = {n: min(b) for b in blocks for n in b}

    def build(name: str, is_root: bool = False) -> TreeNode:
        spec = merged_specs[name]
        children = tuple(build(c) for c in ordering.get(name, ()))
        if spec.word is not None:
            return TreeNode(NodeLabel(spec.word), terminal=True)
        label = NodeLabel.parse(name)
        markers = set(spec.markers)
        if T.FOOT in markers:
            markers.add(T.NA)
        if (not children and not is_root and label.stem != T.EPS
                and not markers & {T.FOOT, T.ANCHOR, T.SUBST}):
            markers.add(T.SUBST)
        return TreeNode(label, frozenset(markers), spec.top, spec.bottom, children)

    root_node = build(root, is_root=True)
    eqs = []
    for eq in d.equations:
        lhs = FeaturePath(rep[eq.lhs.node], eq.lhs.side, eq.lhs.attrs)
        rhs = eq.rhs
        if isinstance(rhs, FeaturePath):
            rhs = FeaturePath(rep[rhs.node], rhs.side, rhs.attrs)
        eqs.append(FeatureEquation(lhs, rhs, eq.klass))
    try:
        tree = ElementaryTree(d.name, root_node, equations=eqs)
        T.install_equations(tree)
    except T.TreeError:
        return None
    return tree


# ---------------------------------------------------------------------------
# satisfaction

def satisfies(t: ElementaryTree, d: TreeDescription) -> Optional[Dict[str, Tuple[int, ...]]]:
    """A witness mapping of variables to node addresses, or None.

    Variables sharing a target count as identified.  Category is matched on
    the label stem, markers by inclusion, and equations either verbatim (up
    to commuting path equations and variable renaming) or as realized
    constants on installed structures.
    """
    addr_nodes = list(t.walk())
    candidates: Dict[str, List[Tuple[int, ...]]] = {}
    for spec in d.nodes:
        opts = []
        for addr, node in addr_nodes:
            if spec.word is not None:
                if node.terminal and node.label.stem == spec.word:
                    opts.append(addr)
                continue
            if node.terminal:
                continue
            if node.label.stem != spec.stem:
                continue
            if not spec.markers <= node.markers:
                continue
            if spec.top and not _entails_fs(t, node.top, spec.top):
                continue
            if spec.bottom and not _entails_fs(t, node.bottom, spec.bottom):
                continue
            opts.append(addr)
        if not opts:
            return None
        candidates[spec.name] = opts

    eq_index = {e.canonical().text() for e in t.equations}
    names = sorted(candidates, key=lambda n: len(candidates[n]))

    def check(m) -> bool:
        for a, b in d.parents:
            if m[b][:-1] != m[a] or len(m[b]) != len(m[a]) + 1:
                return False
        for a, b in d.doms:
            if m[b][:len(m[a])] != m[a]:
                return False
        for a, b in d.precs:
            x, y = m[a], m[b]
            if x[:len(y)] == y or y[:len(x)] == x:
                return False
            if x > y:
                return False
        for eq in d.equations:
            if not _eq_holds(t, m, eq, eq_index):
                return False
        return True

    def assign(i, m):
        if i == len(names):
            return dict(m) if check(m) else None
        name = names[i]
        for addr in candidates[name]:
            m[name] = addr
            got = assign(i + 1, m)
            if got is not None:
                return got
        del m[name]
        return None

    return assign(0, {})


def _entails_fs(t: ElementaryTree, actual: FeatureStructure,
                wanted: FeatureStructure) -> bool:
    from .features import subsumes
    return subsumes(wanted, resolve_fs(actual, t.bindings))


def _eq_holds(t, m, eq, eq_index) -> bool:
    def rename(path: FeaturePath) -> Optional[FeaturePath]:
        if path.node not in m:
            return None
        node = t.node_at(m[path.node])
        return FeaturePath(node.label.text(), path.side, path.attrs)

    lhs = rename(eq.lhs)
    if lhs is None:
        return False
    rhs = eq.rhs
    if isinstance(rhs, FeaturePath):
        rhs = rename(rhs)
        if rhs is None:
            return False
    renamed = FeatureEquation(lhs, rhs, eq.klass)
    if renamed.canonical().text() in eq_index:
        return True
    if isinstance(rhs, AtomSet):
        node = t.node_at(m[eq.lhs.node])
        fs = node.top if (eq.lhs.side or "t") == "t" else node.bottom
        val = resolve_fs(fs, t.bindings).value_at(lhs.attrs)
        return isinstance(val, AtomSet) and val.atoms <= rhs.atoms
    return False
