"""Manual check: wh-subject metarule vs directly generated family members."""

import sys, os
sys.path.insert(0, os.path.dirname(__file__))

from tagforge import (
    apply_metarule, canonical_key, generate_family, load_metarules,
    serialize_tree,
)
import grammars as G

lib = G.english_library()
rules, warns = load_metarules(G.WH_SUBJECT_METARULE, "wh-subject.mr")
assert not warns, warns
rule = rules[0]

for frame in (G.intransitive_frame(), G.transitive_frame(), G.ditransitive_frame()):
    fam = generate_family(frame, [], lib)
    decl = [t for t in fam.trees
            if fam.provenance[t.name].transformation is None][0]
    want = [t for t in fam.trees
            if fam.provenance[t.name].transformation == "wh-subject"]
    assert len(want) == 1, [t.name for t in fam.trees]
    got = apply_metarule(rule, decl)
    print("frame=%s decl=%s -> %d output(s); family member %s"
          % (frame.name, decl.name, len(got), want[0].name))
    if len(got) != 1 or canonical_key(got[0]) != canonical_key(want[0]):
        print("MISMATCH")
        for t in got:
            print("--- metarule output:")
            print(serialize_tree(t))
        print("--- family member:")
        print(serialize_tree(want[0]))
        print("--- keys:")
        if got:
            print(canonical_key(got[0]))
        print(canonical_key(want[0]))
        sys.exit(1)
print("criterion 1 shape: OK")
