"""Manual check: lexicon, lexicalization, recognition over a mini grammar."""

import sys, os, time
sys.path.insert(0, os.path.dirname(__file__))

from tagforge import generate_family, parse_trees
from tagforge.derive import (
    compose, format_derivation, lexicalize, parse_lexicon, format_lexicon,
    recognize,
)
import grammars as G

STANDALONE = """\
tree αNXN initial
  NP - 1
  N anchor 0
end

tree βDnx auxiliary
  NP - 2
  D anchor 0
  NP foot+na 0
end

tree βvxARB auxiliary
  VP - 2
  VP foot+na 0
  Ad anchor 0
end
"""

LEXICON = """\
<<INDEX>>slept<<ENTRY>>slept<<POS>>V<<FAMILY>>Tnx0V
<<FEATURES>>#MODE_ind

<<INDEX>>fell<<ENTRY>>fell<<POS>>V<<FAMILY>>Tnx0V
<<FEATURES>>#MODE_ind

<<INDEX>>ate<<ENTRY>>ate<<POS>>V<<FAMILY>>Tnx0Vnx1
<<FEATURES>>#MODE_ind #TRANS+

<<INDEX>>saw<<ENTRY>>saw<<POS>>V<<FAMILY>>Tnx0Vnx1
<<FEATURES>>#MODE_ind #TRANS+

<<INDEX>>Al<<ENTRY>>Al<<POS>>N<<TREES>>^αNXN
<<FEATURES>>#NP_wh-

<<INDEX>>Dana<<ENTRY>>Dana<<POS>>N<<TREES>>^αNXN
<<FEATURES>>#NP_wh-

<<INDEX>>apple<<ENTRY>>apple<<POS>>N<<TREES>>^αNXN
<<FEATURES>>#NP_wh-

<<INDEX>>who<<ENTRY>>who<<POS>>N<<TREES>>^αNXN
<<FEATURES>>#NP_wh+

<<INDEX>>an<<ENTRY>>an<<POS>>D<<TREES>>^βDnx

<<INDEX>>quickly<<ENTRY>>quickly<<POS>>Ad<<TREES>>^βvxARB
"""

GOOD = [
    "Al slept",
    "Dana slept",
    "an apple fell",
    "Al ate an apple",
    "Dana saw Al",
    "Al saw an apple",
    "who slept",
    "who ate an apple",
    "who saw Dana",
    "Al ate an apple quickly",
]
BAD = [
    "slept Al",
    "Al an apple ate",
    "ate Al an apple",
    "apple an fell",
    "Al ate apple an",
    "an ate Al apple",
    "saw Dana Al",
    "slept who",
    "quickly Al ate an apple",
    "Al who saw",
]

lib = G.english_library()
templates = {}
for frame in (G.intransitive_frame(), G.transitive_frame()):
    fam = generate_family(frame, [], lib)
    for t in fam.trees:
        templates[t.name] = t
for t in parse_trees(STANDALONE):
    templates[t.name] = t
print("templates:", sorted(templates))

families = {}
for frame in (G.intransitive_frame(), G.transitive_frame()):
    fam = generate_family(frame, [], lib)
    families[fam.name] = [t.name for t in fam.trees]
print("families:", families)

entries = parse_lexicon(LEXICON, "mini.lex")
rt = parse_lexicon(format_lexicon(entries), "rt")
assert rt == entries, "lexicon round trip failed"

grammar = []
for e in entries:
    names = list(e.trees)
    if e.family:
        names.extend(families[e.family])
    for name in names:
        grammar.append(lexicalize(templates[name], e))
print("grammar size:", len(grammar))

t0 = time.time()
ok = True
for s in GOOD:
    r = recognize(s.split(), grammar, max_ops=8)
    mark = "ok" if r.accepted else "FAIL"
    if not r.accepted:
        ok = False
    print("%-28s -> %s (%d derivations, bound_hit=%s)"
          % (s, mark, len(r.derivations), r.bound_hit))
for s in BAD:
    r = recognize(s.split(), grammar, max_ops=8)
    mark = "ok" if not r.accepted else "FAIL"
    if r.accepted:
        ok = False
        for d in r.derivations[:2]:
            print(format_derivation(d))
    print("%-28s -> reject %s (bound_hit=%s)" % (s, mark, r.bound_hit))
print("elapsed %.2fs" % (time.time() - t0))

# round trip: compose the first derivation of the last good sentence
r = recognize(GOOD[3].split(), grammar, max_ops=8)
lookup = {t.name: t for t in grammar}
derived = compose(r.derivations[0], lookup)
frontier = [n.label.stem for _, n in derived.walk() if n.terminal]
print("round trip:", frontier)
assert frontier == GOOD[3].split()
print(format_derivation(r.derivations[0]))
sys.exit(0 if ok else 1)
