"""Sectioned grammar source files.

A grammar is one or more text files (or a directory of them): `.grammar`
files hold frame, rule, block, transformation and config records, `.trees`
files hold tree templates, `.lex` files hold lexicon records.  Records look
like

    frame transitive
      anchor V
      arg 0 NP pre
      arg 1 NP post
    end

    rule passive
      anchor V
      in a NP pre
      in b NP post
      out b pre
      out a PP post word=by
      eq V.t:<mode> = ppart
    end

    block spine_v
      spine V
      node S_r
      node VP
      node V anchor
      parent S_r VP
      parent VP V
      eq S_r.b:<mode> = VP.t:<mode>
    end

    transformation wh-subject
      targets pre NP
      node S_q
      ...
    end

Diagnostics carry `path:line:col: code: message`.
"""

import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .features import FeatureError, FeatureStructure, parse_equation, parse_fs
from .descriptions import NodeSpec, SolverConfig, TreeDescription, describe
from .derive import LexEntry, LexError, parse_lexicon
from .lexorg import (
    POST,
    PRE,
    ArgPattern,
    ArgTemplate,
    Argument,
    BlockLibrary,
    LRR,
    SubcatFrame,
    TransformationBlock,
)
from .trees import ElementaryTree, TreeError, parse_trees

MARKS = {"anchor", "foot", "subst", "na"}


class SourceError(Exception):
    """A source diagnostic, formatted path:line:col: code: message."""

    def __init__(self, path: str, line: int, col: int, code: str, message: str):
        self.path = path
        self.line = line
        self.col = col
        self.code = code
        self.message = message
        super().__init__("%s:%d:%d: %s: %s" % (path, line, col, code, message))


@dataclass
class GrammarSource:
    frames: Dict[str, SubcatFrame] = field(default_factory=dict)
    rules: List[LRR] = field(default_factory=list)
    library: BlockLibrary = field(default_factory=BlockLibrary)
    trees: Dict[str, ElementaryTree] = field(default_factory=dict)
    lexicon: List[LexEntry] = field(default_factory=list)
    config: Dict[str, int] = field(default_factory=dict)

    def solver_config(self) -> SolverConfig:
        kwargs = {k: v for k, v in self.config.items()
                  if k in ("max_nodes", "max_models")}
        return SolverConfig(**kwargs)


def _split_opts(parts: List[str], path, no, allow=("word",)):
    """Trailing word=... and {...} feature options of a record line."""
    word = None
    feats = FeatureStructure()
    rest = []
    for part in parts:
        if part.startswith("word="):
            if "word" not in allow:
                raise SourceError(path, no, 1, "syntax", "word= not allowed here")
            word = part[5:]
        elif part.startswith("{"):
            try:
                feats = parse_fs(part)
            except FeatureError as exc:
                raise SourceError(path, no, 1, "syntax", str(exc))
        else:
            rest.append(part)
    return rest, word, feats


def _join_braces(parts: List[str]) -> List[str]:
    """Re-join tokens split inside {...} feature texts."""
    out: List[str] = []
    depth = 0
    for part in parts:
        if depth > 0:
            out[-1] += " " + part
        else:
            out.append(part)
        depth += part.count("{") - part.count("}")
    return out


def _position(tok: str, path, no) -> str:
    if tok not in (PRE, POST):
        raise SourceError(path, no, 1, "syntax",
                          "position must be pre or post, not %r" % tok)
    return tok


class _RecordParser:
    def __init__(self, path: str, lines: List[Tuple[int, str]]):
        self.path = path
        self.lines = lines

    def err(self, no, code, message):
        return SourceError(self.path, no, 1, code, message)

    def eq(self, no, text):
        try:
            return parse_equation(text)
        except FeatureError as exc:
            raise self.err(no, "syntax", str(exc))

    def parse_frame(self, name: str) -> SubcatFrame:
        anchor = None
        args: List[Argument] = []
        eqs = []
        for no, line in self.lines:
            parts = _join_braces(line.split())
            key = parts[0]
            if key == "anchor" and len(parts) == 2:
                anchor = parts[1]
            elif key == "arg":
                rest, word, feats = _split_opts(parts[1:], self.path, no)
                if len(rest) != 3 or not rest[0].isdigit():
                    raise self.err(no, "syntax",
                                   "arg wants: index category pre|post")
                args.append(Argument(int(rest[0]), rest[1],
                                     _position(rest[2], self.path, no),
                                     feats, word))
            elif key == "eq":
                eqs.append(self.eq(no, line[len("eq "):]))
            else:
                raise self.err(no, "syntax", "unexpected frame line %r" % line)
        if anchor is None:
            raise self.err(self.lines[0][0] if self.lines else 0, "syntax",
                           "frame %s lacks an anchor" % name)
        return SubcatFrame(name, anchor, tuple(args), tuple(eqs))

    def parse_rule(self, name: str) -> LRR:
        anchor = None
        left: List[ArgPattern] = []
        right: List[ArgTemplate] = []
        eqs = []
        additive = False
        for no, line in self.lines:
            parts = _join_braces(line.split())
            key = parts[0]
            if key == "anchor" and len(parts) == 2:
                anchor = parts[1]
            elif key == "in":
                rest, word, feats = _split_opts(parts[1:], self.path, no, allow=())
                if len(rest) != 3:
                    raise self.err(no, "syntax", "in wants: binder category pre|post")
                left.append(ArgPattern(rest[0], rest[1],
                                       _position(rest[2], self.path, no), feats))
            elif key == "out":
                rest, word, feats = _split_opts(parts[1:], self.path, no)
                if len(rest) == 2:
                    binder, category, pos = rest[0], None, rest[1]
                elif len(rest) == 3:
                    binder, category, pos = rest[0], rest[1], rest[2]
                else:
                    raise self.err(no, "syntax",
                                   "out wants: binder [category] pre|post")
                right.append(ArgTemplate(binder, category,
                                         _position(pos, self.path, no),
                                         feats, word))
            elif key == "eq":
                eqs.append(self.eq(no, line[len("eq "):]))
            elif key == "additive" and len(parts) == 1:
                additive = True
            else:
                raise self.err(no, "syntax", "unexpected rule line %r" % line)
        if anchor is None:
            raise self.err(self.lines[0][0] if self.lines else 0, "syntax",
                           "rule %s lacks an anchor" % name)
        return LRR(name, anchor, tuple(left), tuple(right), tuple(eqs), additive)

    def parse_description(self, name: str, skip=()) -> Tuple[TreeDescription, List[Tuple[int, str]]]:
        nodes: List[NodeSpec] = []
        declared = set()
        parents, doms, precs, eqs = [], [], [], []
        extra: List[Tuple[int, str]] = []
        for no, line in self.lines:
            parts = _join_braces(line.split())
            key = parts[0]
            if key in skip:
                extra.append((no, line))
                continue
            if key == "node":
                rest, word, _ = _split_opts(parts[1:], self.path, no)
                top = bottom = FeatureStructure()
                marks = frozenset()
                if not rest:
                    raise self.err(no, "syntax", "node wants a name")
                node_name, rest = rest[0], rest[1:]
                for part in rest:
                    if part.startswith("top="):
                        top = self._fs(part[4:], no)
                    elif part.startswith("bot="):
                        bottom = self._fs(part[4:], no)
                    else:
                        got = frozenset(part.split("+"))
                        if got - MARKS:
                            raise self.err(no, "syntax",
                                           "unknown markers %s" % sorted(got - MARKS))
                        marks = marks | got
                if node_name in declared:
                    raise self.err(no, "duplicate",
                                   "node %s declared twice in %s" % (node_name, name))
                declared.add(node_name)
                nodes.append(NodeSpec(node_name, None, marks, top, bottom, word))
            elif key in ("parent", "dom", "prec") and len(parts) == 3:
                {"parent": parents, "dom": doms, "prec": precs}[key].append(
                    (parts[1], parts[2]))
            elif key == "eq":
                eqs.append(self.eq(no, line[len("eq "):]))
            else:
                raise self.err(no, "syntax", "unexpected line %r in %s" % (line, name))
        try:
            desc = describe(name=name, nodes=nodes, parents=parents, doms=doms,
                            precs=precs, equations=eqs)
        except Exception as exc:
            raise self.err(self.lines[0][0] if self.lines else 0, "reference", str(exc))
        return desc, extra

    def _fs(self, text, no):
        try:
            return parse_fs(text)
        except FeatureError as exc:
            raise self.err(no, "syntax", str(exc))


def parse_grammar_text(text: str, path: str, source: Optional[GrammarSource] = None,
                       origins: Optional[Dict[str, Tuple[str, int]]] = None) -> GrammarSource:
    """Parse one .grammar file into (or onto) a GrammarSource."""
    src = source if source is not None else GrammarSource()
    origins = origins if origins is not None else {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        no = i + 1
        i += 1
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2 and parts[0] != "config":
            raise SourceError(path, no, 1, "syntax",
                              "expected 'kind name' record header, got %r" % line)
        kind = parts[0]
        name = parts[1] if len(parts) > 1 else "config"
        if kind not in ("frame", "rule", "block", "transformation", "config"):
            raise SourceError(path, no, 1, "syntax", "unknown record kind %r" % kind)
        body: List[Tuple[int, str]] = []
        closed = False
        while i < len(lines):
            inner = lines[i].strip()
            inner_no = i + 1
            i += 1
            if inner == "end":
                closed = True
                break
            if inner and not inner.startswith("#"):
                body.append((inner_no, inner))
        if not closed:
            raise SourceError(path, no, 1, "syntax",
                              "record %s %s is not closed by end" % (kind, name))
        key = "%s %s" % (kind, name)
        if kind != "config" and key in origins:
            prev_path, prev_no = origins[key]
            raise SourceError(path, no, 1, "duplicate",
                              "%s already defined at %s:%d" % (key, prev_path, prev_no))
        origins[key] = (path, no)
        parser = _RecordParser(path, body)
        if kind == "frame":
            src.frames[name] = parser.parse_frame(name)
        elif kind == "rule":
            src.rules.append(parser.parse_rule(name))
        elif kind == "block":
            _register_block(src, parser, name, path, no)
        elif kind == "transformation":
            _register_transformation(src, parser, name, path, no)
        else:
            for body_no, body_line in body:
                cfg = body_line.split()
                if len(cfg) != 2 or not cfg[1].isdigit():
                    raise SourceError(path, body_no, 1, "syntax",
                                      "config wants: key integer")
                src.config[cfg[0]] = int(cfg[1])
    return src


def _register_block(src, parser, name, path, no):
    desc, extra = parser.parse_description(name, skip=("spine", "arg"))
    role = None
    for extra_no, line in extra:
        parts = line.split()
        if parts[0] == "spine" and len(parts) == 2:
            role = ("spine", parts[1])
        elif parts[0] == "arg":
            rest, word, _ = _split_opts(parts[1:], path, extra_no)
            if len(rest) != 2:
                raise SourceError(path, extra_no, 1, "syntax",
                                  "arg wants: category pre|post [word=...]")
            role = ("arg", rest[0], _position(rest[1], path, extra_no), word)
        else:
            raise SourceError(path, extra_no, 1, "syntax",
                              "unexpected block line %r" % line)
    if role is None:
        raise SourceError(path, no, 1, "syntax",
                          "block %s declares neither spine nor arg" % name)
    if role[0] == "spine":
        if role[1] in src.library.spines:
            raise SourceError(path, no, 1, "duplicate",
                              "spine for %s already defined" % role[1])
        src.library.spines[role[1]] = desc
    else:
        key = (role[1], role[2], role[3])
        if key in src.library.arg_blocks:
            raise SourceError(path, no, 1, "duplicate",
                              "argument block for %s already defined" % (key,))
        src.library.arg_blocks[key] = desc


def _register_transformation(src, parser, name, path, no):
    desc, extra = parser.parse_description(name, skip=("targets",))
    targets = None
    for extra_no, line in extra:
        parts = line.split()
        if len(parts) != 3:
            raise SourceError(path, extra_no, 1, "syntax",
                              "targets wants: pre|post category")
        targets = (_position(parts[1], path, extra_no), parts[2])
    src.library.trans_blocks.append(TransformationBlock(name, desc, targets))


def load_grammar(paths: Sequence[str]) -> GrammarSource:
    """Load grammar, tree and lexicon files; directories are expanded."""
    files: List[str] = []
    for path in paths:
        if os.path.isdir(path):
            files.extend(os.path.join(path, f) for f in sorted(os.listdir(path))
                         if f.endswith((".grammar", ".trees", ".lex")))
        else:
            files.append(path)
    src = GrammarSource()
    origins: Dict[str, Tuple[str, int]] = {}
    for path in files:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
        if path.endswith(".trees"):
            try:
                for tree in parse_trees(text, path):
                    key = "tree %s" % tree.name
                    if key in origins:
                        raise SourceError(path, 1, 1, "duplicate",
                                          "tree %s already defined in %s"
                                          % (tree.name, origins[key][0]))
                    origins[key] = (path, 1)
                    src.trees[tree.name] = tree
            except TreeError as exc:
                raise SourceError(path, 1, 1, "syntax", str(exc))
        elif path.endswith(".lex"):
            try:
                src.lexicon.extend(parse_lexicon(text, path))
            except LexError as exc:
                raise SourceError(path, 1, 1, "syntax", str(exc))
        else:
            parse_grammar_text(text, path, src, origins)
    return src
