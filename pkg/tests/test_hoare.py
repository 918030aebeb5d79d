"""The proof-tree checker, semantic spot checks, and rule fuzzing."""

import pytest

from cslcheck.dist import uniform_store, zero_store
from cslcheck.hoare import (
    ProofError,
    check_triple,
    fuzz_rule_soundness,
    validate_triple,
)
from cslcheck.syntax import (
    HoareTriple,
    parse_env,
    parse_formula,
    parse_program,
    parse_proof,
)


def check(doc):
    return check_triple(parse_proof(doc))


def expect_error(doc, pattern):
    with pytest.raises(ProofError, match=pattern):
        check(doc)


# Leaf rules


SKIP_DOC = """
{"root": {"rule": "Skip", "env": "{x: Bool}", "pre": "(U(x)){x: Bool}",
  "program": "skip", "post": "(U(x)){x: Bool}", "children": []}}
"""


def test_skip_rule():
    t = check(SKIP_DOC)
    assert t.program == parse_program("skip")
    expect_error(
        SKIP_DOC.replace('"post": "(U(x)){x: Bool}"', '"post": "(T){x: Bool}"'),
        "unchanged",
    )
    expect_error(
        SKIP_DOC.replace('"program": "skip"', '"program": "x := 1"'),
        "empty program",
    )


def test_assn_rule_random_expression():
    doc = """
    {"root": {"rule": "Assn", "env": "{k: Str[n], m: Str[n]}",
      "pre": "(T){k: Str[n], m: Str[n]}", "program": "k := rnd()",
      "post": "(k == rnd()){k: Str[n], m: Str[n]}", "children": []}}
    """
    check(doc)
    expect_error(doc.replace("(T)", "(U(m))"), "precondition must be T")
    expect_error(
        doc.replace("k == rnd()", "m == rnd()"), "postcondition must be"
    )


def test_assn_rejects_self_reference():
    doc = """
    {"root": {"rule": "Assn", "env": "{k: Str[n]}", "pre": "(T){k: Str[n]}",
      "program": "k := xor(k, rnd())",
      "post": "(k == xor(k, rnd())){k: Str[n]}", "children": []}}
    """
    expect_error(doc, "must not occur")


def test_dassn_rule_deterministic_expression():
    doc = """
    {"root": {"rule": "DAssn", "env": "{c: Str[n], k: Str[n], m: Str[n]}",
      "pre": "(T){c: Str[n], k: Str[n], m: Str[n]}", "program": "c := xor(m, k)",
      "post": "(c .= xor(m, k)){c: Str[n], k: Str[n], m: Str[n]}", "children": []}}
    """
    check(doc)


def test_dassn_rejects_randomized_expression():
    doc = """
    {"root": {"rule": "DAssn", "env": "{k: Str[n]}", "pre": "(T){k: Str[n]}",
      "program": "k := rnd()", "post": "(k == rnd()){k: Str[n]}", "children": []}}
    """
    expect_error(doc, "postcondition must be")


def test_conclusion_must_type_check():
    doc = """
    {"root": {"rule": "Skip", "env": "{x: Bool}", "pre": "(U(y)){x: Bool}",
      "program": "skip", "post": "(U(y)){x: Bool}", "children": []}}
    """
    expect_error(doc, "root")


def test_annotation_must_match_env():
    doc = """
    {"root": {"rule": "Skip", "env": "{x: Bool, y: Bool}", "pre": "(U(x)){x: Bool}",
      "program": "skip", "post": "(U(x)){x: Bool}", "children": []}}
    """
    expect_error(doc, "annotation")


# Scoped assignment


SR_DOC = """
{"root": {"rule": "SRAssn", "env": "{c: Str[n], k: Str[n], m: Str[n]}",
  "pre": "((T){m: Str[n]} * (T){c: Str[n]}){c: Str[n], k: Str[n], m: Str[n]}",
  "program": "k := rnd()",
  "post": "(((T){m: Str[n]} /\\\\ (k == rnd()){k: Str[n], m: Str[n]}){k: Str[n], m: Str[n]} * (T){c: Str[n]}){c: Str[n], k: Str[n], m: Str[n]}",
  "children": []}}
"""


def test_scoped_random_assignment():
    t = check(SR_DOC)
    assert t.env == parse_env("{c: Str[n], k: Str[n], m: Str[n]}")


def test_scoped_assignment_shape_errors():
    expect_error(
        SR_DOC.replace(
            '"pre": "((T){m: Str[n]} * (T){c: Str[n]}){c: Str[n], k: Str[n], m: Str[n]}"',
            '"pre": "(T){c: Str[n], k: Str[n], m: Str[n]}"',
        ),
        "separating conjunction",
    )
    # the assigned variable may not already live in the active component
    bad = SR_DOC.replace("(T){m: Str[n]}", "(T){k: Str[n], m: Str[n]}")
    expect_error(bad, "active component")


def test_scoped_assignment_removes_target_from_context():
    # k sits in the context pre-side and must be dropped post-side
    doc = """
    {"root": {"rule": "SDAssn", "env": "{k: Bool, m: Bool}",
      "pre": "((T){m: Bool} * (U(k)){k: Bool}){k: Bool, m: Bool}",
      "program": "k := not(m)",
      "post": "(((T){m: Bool} /\\\\ (k .= not(m)){k: Bool, m: Bool}){k: Bool, m: Bool} * (U(k)){}){k: Bool, m: Bool}",
      "children": []}}
    """
    # the stale context still mentions k, so it no longer type-checks
    expect_error(doc, "root")


def test_sdassn_needs_deterministic_rhs():
    doc = SR_DOC.replace('"rule": "SRAssn"', '"rule": "SDAssn"').replace(
        "k == rnd()", "k .= rnd()"
    )
    expect_error(doc, "root")


# Composition


SEQ_DOC = """
{"root": {"rule": "Seq", "env": "{b: Bool, x: Bool}",
  "pre": "(T){b: Bool, x: Bool}",
  "program": "b := not(x); x := not(b)",
  "post": "(x .= not(b)){b: Bool, x: Bool}",
  "mid": "(b .= not(x)){b: Bool, x: Bool}",
  "children": [
    {"rule": "DAssn", "env": "{b: Bool, x: Bool}", "pre": "(T){b: Bool, x: Bool}",
     "program": "b := not(x)", "post": "(b .= not(x)){b: Bool, x: Bool}",
     "children": []},
    {"rule": "Weak", "env": "{b: Bool, x: Bool}",
     "pre": "(b .= not(x)){b: Bool, x: Bool}",
     "program": "x := not(b)", "post": "(x .= not(b)){b: Bool, x: Bool}",
     "pre_cert": {"steps": [{"id": "t", "rule": "TopI",
        "lhs": "(b .= not(x)){b: Bool, x: Bool}",
        "rhs": "(T){b: Bool, x: Bool}", "premises": []}], "root": "t"},
     "post_cert": {"steps": [{"id": "a", "rule": "AP",
        "lhs": "(x .= not(b)){b: Bool, x: Bool}",
        "rhs": "(x .= not(b)){b: Bool, x: Bool}", "premises": []}], "root": "a"},
     "children": [
       {"rule": "DAssn", "env": "{b: Bool, x: Bool}",
        "pre": "(T){b: Bool, x: Bool}", "program": "x := not(b)",
        "post": "(x .= not(b)){b: Bool, x: Bool}", "children": []}
     ]}
  ]}}
"""


def test_seq_with_weakening():
    t = check(SEQ_DOC)
    assert t.post == parse_formula("(x .= not(b)){b: Bool, x: Bool}")


def test_seq_mid_must_chain():
    bad = SEQ_DOC.replace(
        '"mid": "(b .= not(x)){b: Bool, x: Bool}"',
        '"mid": "(T){b: Bool, x: Bool}"',
    )
    expect_error(bad, "first subproof")


def test_error_paths_point_into_the_tree():
    # break the inner DAssn of the Weak child: its path is root.children[1].children[0]
    bad = SEQ_DOC.replace(
        '"pre": "(T){b: Bool, x: Bool}", "program": "x := not(b)",\n        "post": "(x .= not(b)){b: Bool, x: Bool}", "children": []',
        '"pre": "(U(b)){b: Bool, x: Bool}", "program": "x := not(b)",\n        "post": "(x .= not(b)){b: Bool, x: Bool}", "children": []',
    )
    with pytest.raises(ProofError) as exc_info:
        check(bad)
    assert "root.children[1]" in str(exc_info.value)


def test_weak_certificates_must_match_exactly():
    bad = SEQ_DOC.replace(
        '"rhs": "(T){b: Bool, x: Bool}", "premises": []}], "root": "t"}',
        '"rhs": "(T){b: Bool, x: Bool}", "premises": []},'
        '{"id": "u", "rule": "AP", "lhs": "(T){b: Bool, x: Bool}",'
        '"rhs": "(T){b: Bool, x: Bool}", "premises": []}], "root": "u"}',
    )
    expect_error(bad, "pre certificate must derive")


# Conditionals


RCOND_DOC = """
{"root": {"rule": "RCond", "env": "{b: Bool}", "pre": "(T){b: Bool}",
  "program": "if b then skip else skip end", "post": "(b == b){b: Bool}",
  "children": [
    {"rule": "Weak", "env": "{b: Bool}", "pre": "(b .= 1){b: Bool}",
     "program": "skip", "post": "(b == b){b: Bool}",
     "pre_cert": {"steps": [{"id": "t", "rule": "TopI",
        "lhs": "(b .= 1){b: Bool}", "rhs": "(T){b: Bool}", "premises": []}],
        "root": "t"},
     "post_cert": {"steps": [{"id": "v", "rule": "T0",
        "lhs": "(T){b: Bool}", "rhs": "(b == b){b: Bool}", "premises": []}],
        "root": "v"},
     "children": [
       {"rule": "Skip", "env": "{b: Bool}", "pre": "(T){b: Bool}",
        "program": "skip", "post": "(T){b: Bool}", "children": []}
     ]},
    {"rule": "Weak", "env": "{b: Bool}", "pre": "(b .= 0){b: Bool}",
     "program": "skip", "post": "(b == b){b: Bool}",
     "pre_cert": {"steps": [{"id": "t", "rule": "TopI",
        "lhs": "(b .= 0){b: Bool}", "rhs": "(T){b: Bool}", "premises": []}],
        "root": "t"},
     "post_cert": {"steps": [{"id": "v", "rule": "T0",
        "lhs": "(T){b: Bool}", "rhs": "(b == b){b: Bool}", "premises": []}],
        "root": "v"},
     "children": [
       {"rule": "Skip", "env": "{b: Bool}", "pre": "(T){b: Bool}",
        "program": "skip", "post": "(T){b: Bool}", "children": []}
     ]}
  ]}}
"""


def test_rcond_guard_cases():
    check(RCOND_DOC)


def test_rcond_post_must_be_exact():
    bad = RCOND_DOC.replace("(b == b)", "(b ~~ b)").replace(
        '"rule": "T0"', '"rule": "S0"'
    )
    expect_error(bad, "exact")


def test_rcond_branch_preconditions_are_fixed():
    bad = RCOND_DOC.replace('"pre": "(b .= 1){b: Bool}"', '"pre": "(T){b: Bool}"')
    expect_error(bad, "then branch")


# Const and Frame


CONST_DOC = """
{"root": {"rule": "Const", "env": "{x: Bool, y: Bool, z: Bool}",
  "pre": "((T){x: Bool, y: Bool} /\\\\ (U(z)){z: Bool}){x: Bool, y: Bool, z: Bool}",
  "program": "x := not(y)",
  "post": "((x .= not(y)){x: Bool, y: Bool} /\\\\ (U(z)){z: Bool}){x: Bool, y: Bool, z: Bool}",
  "children": [
    {"rule": "DAssn", "env": "{x: Bool, y: Bool}", "pre": "(T){x: Bool, y: Bool}",
     "program": "x := not(y)", "post": "(x .= not(y)){x: Bool, y: Bool}",
     "children": []}
  ]}}
"""


def test_const_rule():
    check(CONST_DOC)


def test_const_context_must_avoid_written_variables():
    bad = CONST_DOC.replace("(U(z)){z: Bool}", "(U(x)){x: Bool, z: Bool}")
    expect_error(bad, "writes")


def test_const_context_identical_on_both_sides():
    bad = CONST_DOC.replace(
        '"post": "((x .= not(y)){x: Bool, y: Bool} /\\\\ (U(z)){z: Bool})',
        '"post": "((x .= not(y)){x: Bool, y: Bool} /\\\\ (T){z: Bool})',
    )
    expect_error(bad, "identical")


FRAME_DOC = CONST_DOC.replace('"rule": "Const"', '"rule": "Frame"').replace(
    "/\\\\", "*"
)


def test_frame_rule():
    check(FRAME_DOC)


def test_frame_parts_must_be_disjoint():
    bad = FRAME_DOC.replace("(U(z)){z: Bool}", "(U(y)){y: Bool, z: Bool}")
    expect_error(bad, "root")


# Semantic spot checks


def test_validate_triple_confirms_otp():
    env = parse_env("{c: Str[n], k: Str[n], m: Str[n]}")
    triple = HoareTriple(
        pre=parse_formula("(T){c: Str[n], k: Str[n], m: Str[n]}"),
        env=env,
        program=parse_program("k := rnd(); c := xor(m, k)"),
        post=parse_formula("(U(c)){c: Str[n], k: Str[n], m: Str[n]}"),
    )
    stores = [uniform_store(env, (1, 2)), zero_store(env, (1, 2))]
    report = validate_triple(triple, stores)
    assert report.ok
    assert report.checked == 2
    assert report.hits == 2


def test_validate_triple_finds_counterexamples():
    env = parse_env("{x: Bool}")
    triple = HoareTriple(
        pre=parse_formula("(T){x: Bool}"),
        env=env,
        program=parse_program("skip"),
        post=parse_formula("(U(x)){x: Bool}"),
    )
    report = validate_triple(triple, [zero_store(env, (1,))])
    assert not report.ok
    assert len(report.failures) == 1
    assert report.failures[0].input.env == env


def test_validate_triple_counts_vacuous_stores():
    env = parse_env("{x: Bool}")
    triple = HoareTriple(
        pre=parse_formula("(U(x)){x: Bool}"),
        env=env,
        program=parse_program("skip"),
        post=parse_formula("(U(x)){x: Bool}"),
    )
    report = validate_triple(triple, [zero_store(env, (1,))])
    assert report.ok
    assert report.checked == 1
    assert report.hits == 0


# Rule fuzzing


@pytest.mark.parametrize("rule", ["SRAssn", "SDAssn", "RCond", "Const", "Frame"])
def test_fuzz_rules_find_no_violations(rule):
    report = fuzz_rule_soundness(rule, cases=25, seed=7, ns=(1,))
    assert report.ok, report.violations[:1]
    assert report.hits > 0


def test_fuzz_unknown_rule():
    with pytest.raises(ValueError, match="fuzz generator"):
        fuzz_rule_soundness("Skip", cases=1)
