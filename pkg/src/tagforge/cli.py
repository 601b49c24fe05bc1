"""Command line front end.

Commands: compile (grammar to tree families), metarule (apply a rule file),
derive (recognize sentences), validate, name and dump.  Outputs are
deterministic: identical inputs and flags give byte-identical files.
"""

import argparse
import os
import sys
from typing import Dict, List, Optional, Sequence

from .derive import LexError, lexicalize, recognize, format_derivation
from .features import FeatureError, format_fs
from .lexorg import LexorgError, TreeFamily, generate_family
from .metarules import MetaruleError, run_files
from .source import GrammarSource, SourceError, load_grammar
from .trees import (
    ElementaryTree,
    TreeError,
    parse_trees,
    serialize_trees,
    tree_name,
    validate_elementary,
)
from .render import node_caption


class CliError(Exception):
    def __init__(self, code: str, message: str, path: str = "tagforge"):
        self.code = code
        self.message = message
        self.path = path
        super().__init__(message)

    def diagnostic(self) -> str:
        return "%s:0:0: %s: %s" % (self.path, self.code, self.message)


def compile_families(src: GrammarSource) -> Dict[str, TreeFamily]:
    """Generate every frame's family, keyed by family name."""
    cfg = src.solver_config()
    out: Dict[str, TreeFamily] = {}
    by_frame: Dict[str, str] = {}
    for name in sorted(src.frames):
        try:
            fam = generate_family(src.frames[name], src.rules, src.library, cfg)
        except LexorgError as exc:
            raise CliError("empty-family", "frame %s: %s" % (name, exc))
        if fam.name in out:
            raise CliError("duplicate",
                           "frames %s and %s both yield family %s"
                           % (by_frame[fam.name], name, fam.name))
        out[fam.name] = fam
        by_frame[fam.name] = name
    return out


def assemble_grammar(src: GrammarSource,
                     families: Optional[Dict[str, TreeFamily]] = None) -> List[ElementaryTree]:
    """Lexicalized trees for every lexicon entry.

    A tree whose features clash with the entry's is skipped, so one family
    can serve all the forms of a verb (the indicative form drops the
    participle trees and vice versa).
    """
    if families is None:
        families = compile_families(src)
    templates: Dict[str, ElementaryTree] = dict(src.trees)
    for fam in families.values():
        for t in fam.trees:
            if t.name in templates:
                raise CliError("duplicate", "tree name %s defined twice" % t.name)
            templates[t.name] = t
    grammar = []
    for entry in src.lexicon:
        names = list(entry.trees)
        if entry.family:
            if entry.family not in families:
                raise CliError("reference", "entry %s selects unknown family %s"
                               % (entry.index, entry.family))
            names.extend(t.name for t in families[entry.family].trees)
        for name in names:
            if name not in templates:
                raise CliError("reference", "entry %s selects unknown tree %s"
                               % (entry.index, name))
            try:
                grammar.append(lexicalize(templates[name], entry))
            except TreeError:
                continue
    return grammar


def _family_comment(fam: TreeFamily, tree: ElementaryTree) -> List[str]:
    prov = fam.provenance[tree.name]
    parts = ["frame %s" % prov.frame]
    if prov.rules:
        parts.append("rules %s" % "+".join(prov.rules))
    if prov.transformation:
        parts.append("transformation %s" % prov.transformation)
    return ["; ".join(parts)]


def cmd_compile(args) -> int:
    src = load_grammar(args.paths)
    if not src.frames:
        raise CliError("empty-family", "no frames in %s" % ", ".join(args.paths))
    families = compile_families(src)
    os.makedirs(args.out_dir, exist_ok=True)
    for name in sorted(families):
        fam = families[name]
        annotated = [t.replace(comments=tuple(_family_comment(fam, t)) + t.comments)
                     for t in fam.trees]
        path = os.path.join(args.out_dir, name + ".trees")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(serialize_trees(annotated))
        print(path)
        if args.figures:
            from .render import save_family_figure
            print(save_family_figure(name, fam.trees,
                                     os.path.join(args.out_dir, name + ".png")))
    return 0


def cmd_metarule(args) -> int:
    written, warnings = run_files(args.rules, args.trees, args.mode,
                                  out_dir=args.out_dir,
                                  copy_unmatched=args.copy_unmatched,
                                  change_name=args.change_name)
    for warning in warnings:
        print("%s: warning: %s" % (os.path.basename(sys.argv[0]), warning),
              file=sys.stderr)
    for path in written:
        print(path)
    return 0


def _sentences(args) -> List[str]:
    if args.sentences:
        with open(args.sentences, encoding="utf-8") as handle:
            text = handle.read()
    else:
        text = sys.stdin.read()
    return [line.strip() for line in text.splitlines() if line.strip()]


def cmd_derive(args) -> int:
    src = load_grammar(args.paths)
    families = compile_families(src) if src.frames else {}
    grammar = assemble_grammar(src, families)
    status = 0
    for sentence in _sentences(args):
        result = recognize(sentence.split(), grammar, max_ops=args.max_ops,
                           start=args.start)
        if result.accepted:
            verdict = "accept"
        elif result.bound_hit:
            verdict = "inconclusive"
        else:
            verdict = "reject"
        print("%s\t%s" % (verdict, sentence))
        if args.show_derivations and result.accepted:
            for d in result.derivations:
                print(format_derivation(d, indent=1))
    return status


def cmd_validate(args) -> int:
    status = 0
    for path in args.trees:
        with open(path, encoding="utf-8") as handle:
            trees = parse_trees(handle.read(), path)
        for tree in trees:
            for violation in validate_elementary(tree, args.warnings):
                print("%s: %s: %s" % (path, tree.name, violation))
                if violation.level == "error":
                    status = 1
    return status


def cmd_name(args) -> int:
    for path in args.trees:
        with open(path, encoding="utf-8") as handle:
            trees = parse_trees(handle.read(), path)
        for tree in trees:
            print("%s\t%s\t%s" % (path, tree.name, tree_name(tree)))
    return 0


def _dump_tree(tree: ElementaryTree) -> str:
    lines = ["%s (%s)" % (tree.name, tree.kind)]
    for addr, node in tree.walk():
        parts = [node_caption(node)]
        if node.top:
            parts.append("top=%s" % format_fs(node.top, {}))
        if node.bottom:
            parts.append("bot=%s" % format_fs(node.bottom, {}))
        lines.append("  " * (len(addr) + 1) + " ".join(parts))
    for eq in tree.equations:
        lines.append("  eq " + eq.text())
    return "\n".join(lines)


def cmd_dump(args) -> int:
    for path in args.trees:
        with open(path, encoding="utf-8") as handle:
            trees = parse_trees(handle.read(), path)
        for index, tree in enumerate(trees):
            print(_dump_tree(tree))
            print()
            if args.figures:
                from .render import save_tree_figure
                out_dir = args.out_dir or os.path.dirname(path) or "."
                stem = os.path.splitext(os.path.basename(path))[0]
                os.makedirs(out_dir, exist_ok=True)
                target = os.path.join(out_dir, "%s-%02d.png" % (stem, index + 1))
                print(save_tree_figure(tree, target))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tagforge",
        description="grammar metacompiler for lexicalized tree-adjoining grammars")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="generate tree families from a grammar")
    p.add_argument("paths", nargs="+", help="grammar files or directories")
    p.add_argument("-o", "--out-dir", required=True)
    p.add_argument("--figures", action="store_true",
                   help="render one figure per family next to the tree files")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("metarule", help="apply a metarule file to tree files")
    p.add_argument("rules", help="metarule file (pairs of pattern trees)")
    p.add_argument("trees", nargs="+", help="tree files")
    p.add_argument("--mode", choices=("single", "parallel", "sequential",
                                      "cumulative"), default="single")
    p.add_argument("--copy-unmatched", action="store_true")
    p.add_argument("--change-name", action="store_true")
    p.add_argument("-o", "--out-dir", default=None)
    p.set_defaults(func=cmd_metarule)

    p = sub.add_parser("derive", help="recognize sentences over a grammar")
    p.add_argument("paths", nargs="+", help="grammar files or directories")
    p.add_argument("--sentences", default=None,
                   help="file of sentences, one per line (default stdin)")
    p.add_argument("--max-ops", type=int, default=8)
    p.add_argument("--start", default="S")
    p.add_argument("--show-derivations", action="store_true")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("validate", help="check tree files for violations")
    p.add_argument("trees", nargs="+")
    p.add_argument("--warnings", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("name", help="synthesize conventional tree names")
    p.add_argument("trees", nargs="+")
    p.set_defaults(func=cmd_name)

    p = sub.add_parser("dump", help="print trees in a readable layout")
    p.add_argument("trees", nargs="+")
    p.add_argument("--figures", action="store_true")
    p.add_argument("-o", "--out-dir", default=None)
    p.set_defaults(func=cmd_dump)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SourceError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except CliError as exc:
        print(exc.diagnostic(), file=sys.stderr)
        return 1
    except (FeatureError, TreeError, MetaruleError, LexorgError, LexError) as exc:
        print("tagforge:0:0: error: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("tagforge:0:0: io: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
