"""Feature structures with disjunctive atomic values and coindexation.

A feature structure maps attribute names to values; a value is either a
nested structure, a finite set of atoms (a disjunction, e.g. ``ind/imp``),
or a coindexation reference into a bindings table.  Unification of two atom
sets is set intersection; an empty intersection, or an atom meeting a
structure, is failure.  Failure is a value here, not an exception: ``unify``
returns None, in the style of NLTK's featstruct module.

Coindexation is kept out of the structures themselves.  A structure slot may
hold a ``CoindexRef`` naming a cell in an external bindings dict (owned by
whatever tree the structure lives on), so structures stay immutable while a
single unification step updates every alias of a shared cell.
"""

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Tuple, Union


class FeatureError(Exception):
    """Malformed feature input (syntax errors, bad paths, cyclic refs)."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class AtomSet:
    """A nonempty finite disjunction of atomic values."""

    atoms: frozenset

    def __init__(self, atoms: Iterable[str]):
        fs = frozenset(str(a) for a in atoms)
        if not fs:
            raise FeatureError("empty atom set")
        object.__setattr__(self, "atoms", fs)

    @classmethod
    def parse(cls, text: str) -> "AtomSet":
        return cls(tok for tok in text.split("/") if tok)

    def text(self) -> str:
        return "/".join(sorted(self.atoms))

    def __repr__(self):
        return "AtomSet(%s)" % self.text()


@dataclass(frozen=True)
class CoindexRef:
    """Reference to a shared cell in a bindings table."""

    link: int

    def __repr__(self):
        return "@%d" % self.link


Value = Union[AtomSet, CoindexRef, "FeatureStructure"]


class FeatureStructure:
    """Immutable attribute -> value mapping.

    >>> fs = FeatureStructure({"mode": AtomSet.parse("ind/imp")})
    >>> format_fs(fs)
    '{mode=imp/ind}'
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Union[Mapping[str, Value], Iterable[Tuple[str, Value]]] = ()):
        items = dict(entries)
        for key, val in items.items():
            if not isinstance(key, str) or not key:
                raise FeatureError("bad attribute name: %r" % (key,))
            if not isinstance(val, (AtomSet, CoindexRef, FeatureStructure)):
                raise FeatureError("bad value for %s: %r" % (key, val))
        self._entries = tuple(sorted(items.items()))

    def get(self, attr: str) -> Optional[Value]:
        for key, val in self._entries:
            if key == attr:
                return val
        return None

    def items(self) -> Tuple[Tuple[str, Value], ...]:
        return self._entries

    def keys(self):
        return tuple(key for key, _ in self._entries)

    def value_at(self, path: Iterable[str]) -> Optional[Value]:
        """Value at a nested attribute path, or None if any step is absent."""
        cur: Value = self
        for attr in path:
            if not isinstance(cur, FeatureStructure):
                return None
            nxt = cur.get(attr)
            if nxt is None:
                return None
            cur = nxt
        return cur

    def set(self, attr: str, value: Value) -> "FeatureStructure":
        items = dict(self._entries)
        items[attr] = value
        return FeatureStructure(items)

    def without(self, attr: str) -> "FeatureStructure":
        items = dict(self._entries)
        items.pop(attr, None)
        return FeatureStructure(items)

    @staticmethod
    def from_path(path: Iterable[str], value: Value) -> "FeatureStructure":
        """Build a nested structure holding `value` at `path`."""
        out = value
        for attr in reversed(list(path)):
            out = FeatureStructure({attr: out})
        if not isinstance(out, FeatureStructure):
            raise FeatureError("empty path")
        return out

    def __contains__(self, attr):
        return self.get(attr) is not None

    def __bool__(self):
        return bool(self._entries)

    def __len__(self):
        return len(self._entries)

    def __eq__(self, other):
        return isinstance(other, FeatureStructure) and self._entries == other._entries

    def __hash__(self):
        return hash(self._entries)

    def __repr__(self):
        return "FS%s" % format_fs(self)


EMPTY = FeatureStructure()


# ---------------------------------------------------------------------------
# unification

def _resolve(value: Value, binds: Mapping[int, Value]):
    """Follow coindex chains.  Returns (link or None, concrete or None)."""
    seen = set()
    while isinstance(value, CoindexRef):
        if value.link in seen:
            raise FeatureError("cyclic coindexation through link %d" % value.link)
        seen.add(value.link)
        if value.link not in binds:
            return value.link, None
        link = value.link
        value = binds[link]
        if not isinstance(value, CoindexRef):
            return link, value
    return None, value


def _unify_concrete(x: Value, y: Value, binds: dict) -> Optional[Value]:
    if isinstance(x, AtomSet) and isinstance(y, AtomSet):
        both = x.atoms & y.atoms
        return AtomSet(both) if both else None
    if isinstance(x, FeatureStructure) and isinstance(y, FeatureStructure):
        out = dict(x.items())
        for attr, yval in y.items():
            if attr in out:
                merged = _unify_values(out[attr], yval, binds)
                if merged is None:
                    return None
                out[attr] = merged
            else:
                out[attr] = yval
        return FeatureStructure(out)
    # atom against structure
    return None


def _unify_values(x: Value, y: Value, binds: dict) -> Optional[Value]:
    lx, cx = _resolve(x, binds)
    ly, cy = _resolve(y, binds)
    if lx is not None and ly is not None:
        if lx == ly:
            return CoindexRef(lx)
        binds[lx] = CoindexRef(ly)
        if cx is None and cy is None:
            binds.pop(ly, None)
            return CoindexRef(ly)
        if cx is None or cy is None:
            binds[ly] = cx if cy is None else cy
            return CoindexRef(ly)
        merged = _unify_values(cx, cy, binds)
        if merged is None:
            return None
        binds[ly] = merged
        return CoindexRef(ly)
    if lx is not None:
        merged = cy if cx is None else _unify_values(cx, cy, binds)
        if merged is None:
            return None
        binds[lx] = merged
        return CoindexRef(lx)
    if ly is not None:
        merged = cx if cy is None else _unify_values(cy, cx, binds)
        if merged is None:
            return None
        binds[ly] = merged
        return CoindexRef(ly)
    return _unify_concrete(cx, cy, binds)


def unify(a: FeatureStructure, b: FeatureStructure) -> Optional[FeatureStructure]:
    """Unify two coindexation-free structures; None on failure.

    The empty structure is the identity.  Commutative, associative and
    idempotent up to structural equality.

    >>> a = FeatureStructure({"mode": AtomSet.parse("ind/imp")})
    >>> b = FeatureStructure({"mode": AtomSet.parse("ind")})
    >>> unify(a, b) == b
    True
    >>> unify(b, FeatureStructure({"mode": AtomSet.parse("ger")})) is None
    True
    """
    out = _unify_values(a, b, {})
    if out is None:
        return None
    assert isinstance(out, FeatureStructure)
    return out


def unify_in(a: FeatureStructure, b: FeatureStructure, binds: Mapping[int, Value]):
    """Unify under a bindings table.  Returns (structure, new table) or None.

    The input table is not mutated; shared cells touched by the unification
    carry their new values in the returned table, which makes the update
    visible through every alias of the cell.
    """
    work = dict(binds)
    out = _unify_values(a, b, work)
    if out is None:
        return None
    assert isinstance(out, FeatureStructure)
    return out, work


def resolve_fs(fs: FeatureStructure, binds: Mapping[int, Value]) -> FeatureStructure:
    """Expand every coindex reference to its current value.

    Unbound cells resolve to the empty structure (no constraint yet).
    """
    def walk(value: Value, seen) -> Value:
        if isinstance(value, CoindexRef):
            if value.link in seen:
                raise FeatureError("cyclic coindexation through link %d" % value.link)
            _, concrete = _resolve(value, binds)
            if concrete is None:
                return EMPTY
            return walk(concrete, seen | {value.link})
        if isinstance(value, FeatureStructure):
            return FeatureStructure({attr: walk(val, seen) for attr, val in value.items()})
        return value

    out = walk(fs, frozenset())
    assert isinstance(out, FeatureStructure)
    return out


def subsumes(general: FeatureStructure, specific: FeatureStructure) -> bool:
    """True if every constraint of `general` holds in `specific`.

    Atom sets constrain by superset: {ind,imp} subsumes {ind}.  Coindexation
    identity is not compared; resolve structures first if they carry refs.
    """
    def covers(g: Value, s: Value) -> bool:
        if isinstance(g, CoindexRef) or isinstance(s, CoindexRef):
            raise FeatureError("subsumes wants resolved structures")
        if isinstance(g, AtomSet):
            return isinstance(s, AtomSet) and s.atoms <= g.atoms
        if isinstance(g, FeatureStructure):
            if not isinstance(s, FeatureStructure):
                return False
            for attr, gval in g.items():
                sval = s.get(attr)
                if sval is None or not covers(gval, sval):
                    return False
            return True
        return False

    return covers(general, specific)


# ---------------------------------------------------------------------------
# serialization

def format_fs(fs: FeatureStructure, link_names: Optional[dict] = None) -> str:
    """Canonical text: sorted attributes, sorted atoms, refs as @N.

    `link_names` maps raw link ids to display numbers; ids are assigned in
    order of first appearance so serialized output is stable across runs.
    """
    def fmt(value: Value) -> str:
        if isinstance(value, AtomSet):
            return value.text()
        if isinstance(value, CoindexRef):
            if link_names is None:
                return "@%d" % value.link
            if value.link not in link_names:
                link_names[value.link] = len(link_names) + 1
            return "@%d" % link_names[value.link]
        return "{%s}" % ", ".join(
            "%s=%s" % (attr, fmt(val)) for attr, val in value.items())

    return fmt(fs)


class _Scanner:
    def __init__(self, text: str, base: int = 0):
        self.text = text
        self.pos = 0
        self.base = base

    def error(self, message):
        raise FeatureError(message, offset=self.base + self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        self.skip_ws()
        if self.peek() != ch:
            self.error("expected %r" % ch)
        self.pos += 1

    def token(self, extra=""):
        self.skip_ws()
        start = self.pos
        stop = "{}=,<>:() \t"
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in stop and ch not in extra:
                break
            self.pos += 1
        if self.pos == start:
            self.error("expected a name")
        return self.text[start:self.pos]


def parse_fs(text: str) -> FeatureStructure:
    """Parse the canonical structure syntax; inverse of format_fs."""
    sc = _Scanner(text)
    out = _parse_fs(sc)
    sc.skip_ws()
    if sc.pos != len(text):
        sc.error("trailing input")
    return out


def _parse_fs(sc: _Scanner) -> FeatureStructure:
    sc.expect("{")
    entries = {}
    sc.skip_ws()
    if sc.peek() == "}":
        sc.pos += 1
        return FeatureStructure()
    while True:
        attr = sc.token()
        sc.expect("=")
        sc.skip_ws()
        if sc.peek() == "{":
            entries[attr] = _parse_fs(sc)
        elif sc.peek() == "@":
            sc.pos += 1
            digits = sc.token()
            if not digits.isdigit():
                sc.error("expected a link number")
            entries[attr] = CoindexRef(int(digits))
        else:
            entries[attr] = AtomSet.parse(sc.token(extra="/"))
        sc.skip_ws()
        if sc.peek() == ",":
            sc.pos += 1
            continue
        sc.expect("}")
        return FeatureStructure(entries)


# ---------------------------------------------------------------------------
# feature equations

SIDES = ("t", "b", "")


@dataclass(frozen=True)
class FeaturePath:
    """One side of an equation: node, t/b side ('' = unspecified), attributes."""

    node: str
    side: str
    attrs: Tuple[str, ...]

    def text(self) -> str:
        side = ".%s" % self.side if self.side else ""
        return "%s%s:<%s>" % (self.node, side, " ".join(self.attrs))


@dataclass(frozen=True)
class FeatureEquation:
    """``lhs = rhs`` between a node path and a path or constant.

    `klass` is the metarule class prefix character ("", "+" or "-"); plain
    grammar equations always use "".
    """

    lhs: FeaturePath
    rhs: Union[FeaturePath, AtomSet]
    klass: str = ""

    def text(self) -> str:
        rhs = self.rhs.text()
        return "%s%s=%s" % (self.klass, self.lhs.text(), rhs)

    def commuted(self) -> "FeatureEquation":
        if isinstance(self.rhs, FeaturePath):
            return FeatureEquation(self.rhs, self.lhs, self.klass)
        return self

    def canonical(self) -> "FeatureEquation":
        """Path=path equations ordered by path text, for commutative compare."""
        if isinstance(self.rhs, FeaturePath) and self.rhs.text() < self.lhs.text():
            return self.commuted()
        return self


def _parse_path(sc: _Scanner) -> FeaturePath:
    node = sc.token(extra="?")
    side = ""
    if "." in node:
        node, dot, side = node.rpartition(".")
        if side not in ("t", "b"):
            node = node + dot + side
            side = ""
    sc.expect(":")
    sc.expect("<")
    attrs = []
    while True:
        sc.skip_ws()
        if sc.peek() == ">":
            sc.pos += 1
            break
        if not sc.peek():
            sc.error("unterminated attribute path")
        attrs.append(sc.token(extra="?"))
    if not attrs:
        sc.error("empty attribute path")
    return FeaturePath(node, side, tuple(attrs))


def parse_equation(text: str, base_offset: int = 0) -> FeatureEquation:
    """Parse equation surface syntax.

    >>> parse_equation("NP.b:<agr> = N.t:<agr>").rhs.node
    'N'
    >>> parse_equation("V.t:<trans>=+").rhs
    AtomSet(+)
    >>> parse_equation("S_r.b:<assign-comp> = inf_nil/ind_nil/ecm").rhs
    AtomSet(ecm/ind_nil/inf_nil)
    """
    sc = _Scanner(text, base_offset)
    sc.skip_ws()
    klass = ""
    rest = sc.text[sc.pos:]
    if sc.peek() in "+-" and (":" in rest or "<" in rest):
        # class prefix, not a bare-atom typo: an equation body must follow
        klass = sc.peek()
        sc.pos += 1
    lhs = _parse_path(sc)
    sc.expect("=")
    sc.skip_ws()
    remainder = sc.text[sc.pos:]
    if ":" in remainder and "<" in remainder:
        rhs: Union[FeaturePath, AtomSet] = _parse_path(sc)
    else:
        rhs = AtomSet.parse(sc.token(extra="/?+-"))
    sc.skip_ws()
    if sc.pos != len(sc.text):
        sc.error("trailing input after equation")
    return FeatureEquation(lhs, rhs, klass)
