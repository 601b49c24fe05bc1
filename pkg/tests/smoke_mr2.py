"""Manual check: excision, typed variables, equation classes, modes."""

import sys, os, tempfile
sys.path.insert(0, os.path.dirname(__file__))

from tagforge import apply_metarule, load_metarules, match_trees, parse_trees, run_mode
from tagforge.metarules import run_files
from tagforge.trees import serialize_tree, serialize_trees

# --- excision: capture C anywhere below, replace with X ------------------
MR1 = """\
tree exc-lhs initial
  ?1 - 1
  C - 0
end

tree exc-rhs initial
  ?1 - 1
  X - 0
end
"""
INP1 = """\
tree t1 initial
  A - 2
  B - 2
  C - 0
  D - 0
  E - 0
end
"""
rules, _ = load_metarules(MR1)
tree = parse_trees(INP1)[0]
out = apply_metarule(rules[0], tree)
assert len(out) == 1, len(out)
print(serialize_tree(out[0]))
print()

# --- excision of two subtrees, swapped on output -------------------------
MR2 = """\
tree swap-lhs initial
  ?1 - 2
  C - 0
  E - 0
end

tree swap-rhs initial
  ?1 - 2
  E - 0
  C - 0
end
"""
rules, _ = load_metarules(MR2)
out = apply_metarule(rules[0], tree)
assert len(out) == 1, len(out)
print(serialize_tree(out[0]))
print()

# --- typed variable with subscript wildcard ------------------------------
MR3 = """\
tree ty-lhs initial
  S - 2
  ?1NP_? subst 0
  ?2 - 0
end

tree ty-rhs initial
  S - 2
  ?2 - 0
  ?1NP_? subst 0
end
"""
INP3 = """\
tree t3 initial
  S - 2
  NP_1 subst+na 0
  VP - 1
  V anchor 0
end

tree t3b initial
  S - 2
  NP subst 0
  VP - 1
  V anchor 0
end
"""
rules, _ = load_metarules(MR3)
t3, t3b = parse_trees(INP3)
out = apply_metarule(rules[0], t3)
assert len(out) == 1
print(serialize_tree(out[0]))
# NP without subscript must not match NP_?
assert apply_metarule(rules[0], t3b) == []
assert apply_metarule(rules[0], t3b, copy_unmatched=True) == [t3b]
print()

# --- equation classes and metavariables ----------------------------------
MR4 = """\
tree feq-lhs initial
  S - 1
  ?1V_? anchor 0

tree feq-rhs initial
  S - 1
  ?1V_? anchor 0
  eq S.b:<inv> = -
end
"""
# malformed: missing end -> parse error expected
try:
    load_metarules(MR4)
    print("UNEXPECTED: parse passed")
except Exception as exc:
    print("parse error as expected:", exc)

MR4 = """\
tree feq-lhs initial
  S - 1
  ?1V_? anchor 0
  eq +?1.t:<agr ?2> = ?3
  eq -S.b:<mode> = ind
end

tree feq-rhs initial
  S - 1
  ?1V_? anchor 0
  eq S.b:<agr ?2> = ?3
end
"""
INP4 = """\
tree t4 initial
  S - 1
  V_9 anchor 0
  eq V_9.t:<agr num> = sg
  eq S.b:<mode> = ind
  eq V_9.t:<fin> = +
end

tree t4b initial
  S - 1
  V_9 anchor 0
  eq S.b:<mode> = ind
end
"""
rules, _ = load_metarules(MR4)
t4, t4b = parse_trees(INP4)
out = apply_metarule(rules[0], t4)
assert len(out) == 1
print(serialize_tree(out[0]))
# required V equation absent -> match rejected
assert apply_metarule(rules[0], t4b) == []
print()

# --- modes and file prefixes --------------------------------------------
MR5 = """\
tree r1-lhs initial
  A - 1
  ?1 - 0
end

tree r1-rhs initial
  A - 2
  B - 0
  ?1 - 0
end

tree r2-lhs initial
  A - 2
  B - 0
  ?1 - 0
end

tree r2-rhs initial
  A - 3
  C - 0
  B - 0
  ?1 - 0
end
"""
INPS = """\
tree u1 initial
  A - 1
  X - 0
end
"""
trees = parse_trees(INPS)
rules, _ = load_metarules(MR5)
for mode, expect in (("single", 1), ("parallel", 1), ("sequential", 1), ("cumulative", 3)):
    outs = run_mode(rules, trees, mode)
    print(mode, [t.name for t in outs], "->", len(outs))
    assert len(outs) == expect, (mode, len(outs))

with tempfile.TemporaryDirectory() as tmp:
    mrp = os.path.join(tmp, "rules.mr")
    tp = os.path.join(tmp, "base.trees")
    with open(mrp, "w") as h:
        h.write(MR5)
    with open(tp, "w") as h:
        h.write(INPS)
    for mode in ("single", "parallel", "sequential", "cumulative"):
        written, warns = run_files(mrp, [tp], mode)
        print(mode, [os.path.basename(w) for w in written], warns)

print("metarule extras: OK")
