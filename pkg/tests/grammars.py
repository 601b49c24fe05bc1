"""Shared fixture grammar: a small English verb grammar.

Used across the test modules so that frames, redistribution rules, blocks
and metarules stay consistent with each other.
"""

from tagforge.descriptions import NodeSpec, describe
from tagforge.features import parse_equation
from tagforge.lexorg import (
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


def eqs(*texts):
    return tuple(parse_equation(t) for t in texts)


def verb_spine():
    """Clausal spine for verbal anchors: S_r over VP over the anchor."""
    return describe(
        name="spine",
        nodes=[NodeSpec("S_r"), NodeSpec("VP"), NodeSpec("V", markers=frozenset({"anchor"}))],
        parents=[("S_r", "VP"), ("VP", "V")],
        equations=eqs("S_r.b:<mode> = VP.t:<mode>", "VP.b:<mode> = V.t:<mode>"),
    )


def subject_block():
    return describe(name="subj", nodes=["$arg", "S_r"],
                    parents=[("S_r", "$arg")])


def object_block():
    return describe(name="obj", nodes=["$arg", "VP"],
                    parents=[("VP", "$arg")])


def expanded_pp_block():
    """Post-verbal PP argument: preposition plus NP object."""
    return describe(
        name="pp",
        nodes=[NodeSpec("$arg"), NodeSpec("$p"), NodeSpec("$w", word="$word"),
               NodeSpec("$obj"), NodeSpec("VP")],
        parents=[("VP", "$arg"), ("$arg", "$p"), ("$arg", "$obj"), ("$p", "$w")],
        precs=[("$p", "$obj")],
    )


def wh_shape():
    """Extraction: fronted NP_w above S_r, the target argument emptied.

    The emptied argument carries the null-adjunction mark so nothing can
    adjoin between it and its trace.
    """
    return describe(
        name="wh",
        nodes=[NodeSpec("S_q"), NodeSpec("NP_w"), NodeSpec("S_r"),
               NodeSpec("$arg", markers=frozenset({"na"})), NodeSpec("$trace")],
        parents=[("S_q", "NP_w"), ("S_q", "S_r"), ("$arg", "$trace")],
        precs=[("NP_w", "S_r")],
        equations=eqs("NP_w.t:<trace> = $arg.t:<trace>",
                      "NP_w.t:<wh> = +",
                      "S_q.b:<mode> = S_r.t:<mode>"),
    )


def wh_subject_block():
    return TransformationBlock("wh-subject", wh_shape(), targets=(PRE, "NP"))


def wh_non_subject_block():
    return TransformationBlock("wh-non-subject", wh_shape(), targets=(POST, "NP"))


def english_library():
    lib = BlockLibrary()
    lib.spines["V"] = verb_spine()
    lib.arg_blocks[("NP", PRE, None)] = subject_block()
    lib.arg_blocks[("NP", POST, None)] = object_block()
    lib.arg_blocks[("PP", POST, None)] = expanded_pp_block()
    lib.trans_blocks = [wh_subject_block(), wh_non_subject_block()]
    return lib


def intransitive_frame():
    return SubcatFrame("intransitive", "V", (Argument(0, "NP", PRE),))


def transitive_frame():
    return SubcatFrame("transitive", "V",
                       (Argument(0, "NP", PRE), Argument(1, "NP", POST)))


def ditransitive_frame():
    return SubcatFrame("ditransitive", "V",
                       (Argument(0, "NP", PRE), Argument(1, "NP", POST),
                        Argument(2, "NP", POST)))


def dative_shift_rule():
    """NP NP NP becomes NP NP to-PP with the inner objects swapped."""
    return LRR(
        name="dative-shift",
        anchor="V",
        left=(ArgPattern("a", "NP", PRE), ArgPattern("b", "NP", POST),
              ArgPattern("c", "NP", POST)),
        right=(ArgTemplate("a", position=PRE), ArgTemplate("c", position=POST),
               ArgTemplate("b", category="PP", position=POST, expansion="to")),
    )


def passive_rule():
    """Promote the first object, demote the subject into a by-PP."""
    return LRR(
        name="passive",
        anchor="V",
        left=(ArgPattern("a", "NP", PRE), ArgPattern("b", "NP", POST),
              ArgPattern("c", "PP", POST)),
        right=(ArgTemplate("b", position=PRE), ArgTemplate("c", position=POST),
               ArgTemplate("a", category="PP", position=POST, expansion="by")),
        add_features=eqs("V.t:<mode> = ppart"),
    )


def short_passive_rule():
    """Two-argument passive for the transitive frame."""
    return LRR(
        name="passive",
        anchor="V",
        left=(ArgPattern("a", "NP", PRE), ArgPattern("b", "NP", POST)),
        right=(ArgTemplate("b", position=PRE),
               ArgTemplate("a", category="PP", position=POST, expansion="by")),
        add_features=eqs("V.t:<mode> = ppart"),
    )


def ditransitive_rules():
    return [dative_shift_rule(), passive_rule()]


# ---------------------------------------------------------------------------
# metarule fixtures

WH_SUBJECT_METARULE = """\
tree whs-lhs initial
  S_r - 2
  NP_0 subst 0
  ?1 - 0
end

tree whs-rhs initial
  S_q - 2
  NP_w subst 0
  S_r - 2
  NP_0 na 1
  eps_0 - 0
  ?1 - 0
  eq NP_w.t:<trace> = NP_0.t:<trace>
  eq NP_w.t:<wh> = +
  eq S_q.b:<mode> = S_r.t:<mode>
end
"""
