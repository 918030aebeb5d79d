"""Frozen oracle values, each computed by hand before the implementation
was run.

Every expected value below comes from an enumeration small enough to do on
paper: distributions over one or two bits with at most four support points.
The comments show the enumeration; the asserts pin the implementation to it.
"""

from fractions import Fraction

from cslcheck.dist import (
    FinDist,
    Memory,
    Store,
    ZeroMassError,
    condition,
    convex,
    project,
    stat_dist,
    tensor,
    uniform_memories,
    uniform_values,
)
from cslcheck.semantics import bind_stub, eval_expr, run, run_kozen, store_project
from cslcheck.syntax import parse_decls, parse_env, parse_expr, parse_program
from cslcheck.logic import sat_atom, sat_formula
from cslcheck.syntax import parse_formula

import pytest

H = Fraction(1, 2)
Q = Fraction(1, 4)


def mem(env, n, **values):
    return Memory.make(env, n, values)


def test_negation_of_a_fair_bit_is_fair():
    # {0: 1/2, 1: 1/2} maps through bit-flip to {1: 1/2, 0: 1/2}
    d = FinDist({"0": H, "1": H})
    flipped = d.map(lambda v: "1" if v == "0" else "0")
    assert flipped == FinDist({"0": H, "1": H})


def test_conditioning_uniform_two_bools():
    # uniform over (r,s) in {0,1}^2; given r=0 the four points collapse to
    # {(0,0): 1/2, (0,1): 1/2}
    env = parse_env("{r: Bool, s: Bool}")
    d = uniform_memories(env, 1)
    got = condition(d, "r", "0")
    want = FinDist(
        {
            mem(env, 1, r="0", s="0"): H,
            mem(env, 1, r="0", s="1"): H,
        }
    )
    assert got == want


def test_conditioning_on_a_missing_event_raises():
    env = parse_env("{r: Bool}")
    d = FinDist.dirac(mem(env, 1, r="1"))
    with pytest.raises(ZeroMassError):
        condition(d, "r", "0")


def test_point_mass_is_half_away_from_uniform():
    # (1/2)(|1 - 1/2| + |0 - 1/2|) = 1/2
    assert stat_dist(FinDist.dirac("0"), FinDist({"0": H, "1": H})) == H


def test_eighth_distance_example():
    # (1/2)(|1/2 - 5/8| + |1/2 - 3/8|) = 1/8
    a = FinDist({"0": H, "1": H})
    b = FinDist({"0": Fraction(5, 8), "1": Fraction(3, 8)})
    assert stat_dist(a, b) == Fraction(1, 8)


def test_otp_output_at_n1_from_biased_message():
    # m ~ {0: 1/3, 1: 2/3}; k fresh uniform; c = m xor k.
    # joint on (m,c): (0,0) 1/6, (0,1) 1/6, (1,0) 1/3, (1,1) 1/3
    # c-marginal: 1/6+1/3 = 1/2 each; joint equals m-marginal x c-marginal.
    env = parse_env("{c: Str[n], k: Str[n], m: Str[n]}")
    prog = parse_program("k := rnd(); c := xor(m, k)")
    third = Fraction(1, 3)
    d = FinDist(
        {
            mem(env, 1, m="0", k="0", c="0"): third,
            mem(env, 1, m="1", k="0", c="0"): 2 * third,
        }
    )
    out = run(env, prog, 1, d)
    mc = parse_env("{c: Str[n], m: Str[n]}")
    got = project(out, mc)
    want = FinDist(
        {
            mem(mc, 1, m="0", c="0"): Fraction(1, 6),
            mem(mc, 1, m="0", c="1"): Fraction(1, 6),
            mem(mc, 1, m="1", c="0"): third,
            mem(mc, 1, m="1", c="1"): third,
        }
    )
    assert got == want
    c_only = project(out, parse_env("{c: Str[n]}"))
    assert c_only == uniform_memories(parse_env("{c: Str[n]}"), 1)
    m_only = project(out, parse_env("{m: Str[n]}"))
    assert got == tensor(m_only, c_only)


def test_xor_program_truth_table():
    # if k then c := not(m) else c := m end computes c = k xor m:
    # (k,m) -> c: (0,0)->0 (0,1)->1 (1,0)->1 (1,1)->0
    env = parse_env("{c: Bool, k: Bool, m: Bool}")
    prog = parse_program("if k then c := not(m) else c := m end")
    table = {("0", "0"): "0", ("0", "1"): "1", ("1", "0"): "1", ("1", "1"): "0"}
    for (k, m), c in table.items():
        d = FinDist.dirac(mem(env, 1, k=k, m=m, c="0"))
        out = run(env, prog, 1, d)
        assert out == FinDist.dirac(mem(env, 1, k=k, m=m, c=c))


def test_bit_reversal_permutes_but_keeps_uniform():
    # bitreverse("01") = "10"; a permutation of {0,1}^2 keeps uniform uniform
    syms = parse_decls("decl g : Str[n] -> Str[n] det;")
    syms = bind_stub(syms, "g", "bitreverse")
    env = parse_env("{x: Str[n]}")
    e = parse_expr("g(x)", syms)
    point = FinDist.dirac(mem(env, 2, x="01"))
    assert eval_expr(env, e, 2, point, syms) == FinDist.dirac("10")
    u = uniform_memories(env, 2)
    assert eval_expr(env, e, 2, u, syms) == uniform_values(
        parse_env("{x: Str[n]}").lookup("x"), 2
    )


def test_tensor_marginals_recover_factors():
    # ({x=0: 1/4, x=1: 3/4} x {y=0: 2/5, y=1: 3/5}) projected to x gives the
    # first factor back exactly
    ex = parse_env("{x: Bool}")
    ey = parse_env("{y: Bool}")
    a = FinDist({mem(ex, 1, x="0"): Q, mem(ex, 1, x="1"): 3 * Q})
    b = FinDist(
        {mem(ey, 1, y="0"): Fraction(2, 5), mem(ey, 1, y="1"): Fraction(3, 5)}
    )
    joint = tensor(a, b)
    assert project(joint, ex) == a
    assert project(joint, ey) == b


def test_xor_with_fresh_randomness_is_uniform():
    # 01 xor {00,01,10,11} = {01,00,11,10}, each 1/4
    env = parse_env("{m: Str[n]}")
    e = parse_expr("xor(m, rnd())")
    d = FinDist.dirac(mem(env, 2, m="01"))
    got = eval_expr(env, e, 2, d)
    assert got == FinDist({"00": Q, "01": Q, "10": Q, "11": Q})


def test_anticorrelated_bits_have_equal_marginals_but_differ_pointwise():
    # {(r=0,s=1): 1/2, (r=1,s=0): 1/2}: both marginals are fair coins, so
    # r == s holds; r .= s fails on every support point.
    env = parse_env("{r: Bool, s: Bool}")
    d = FinDist(
        {
            mem(env, 1, r="0", s="1"): H,
            mem(env, 1, r="1", s="0"): H,
        }
    )
    s = Store(env, {1: d})
    eq = parse_formula("(r == s){r: Bool, s: Bool}")
    ind = parse_formula("(r ~~ s){r: Bool, s: Bool}")
    espl = parse_formula("(r .= s){r: Bool, s: Bool}")
    assert sat_atom(s, eq) is True
    assert sat_atom(s, ind) is True
    assert sat_atom(s, espl) is False


def test_setzero_matches_zeroed_variable():
    env = parse_env("{r: Str[n]}")
    s = Store(env, {2: FinDist.dirac(mem(env, 2, r="00"))})
    f = parse_formula("(setzero[n]() == r){r: Str[n]}")
    assert sat_formula(s, f) is True


def test_convex_mix_of_two_points():
    env = parse_env("{x: Bool}")
    a = FinDist.dirac(mem(env, 1, x="0"))
    b = FinDist.dirac(mem(env, 1, x="1"))
    guard = FinDist({"1": H, "0": H})
    assert convex(a, b, guard) == FinDist(
        {mem(env, 1, x="0"): H, mem(env, 1, x="1"): H}
    )


def test_branching_program_by_hand():
    # d = {(b=0,x=0): 1/2, (b=1,x=0): 1/2}; if b then x := 1 else skip end
    # gives {(b=0,x=0): 1/2, (b=1,x=1): 1/2}; both semantics agree.
    env = parse_env("{b: Bool, x: Bool}")
    prog = parse_program("if b then x := 1 else skip end")
    d = FinDist(
        {
            mem(env, 1, b="0", x="0"): H,
            mem(env, 1, b="1", x="0"): H,
        }
    )
    want = FinDist(
        {
            mem(env, 1, b="0", x="0"): H,
            mem(env, 1, b="1", x="1"): H,
        }
    )
    assert run(env, prog, 1, d) == want
    assert run_kozen(env, prog, 1, d) == want


def test_store_projection_of_otp_output_is_uniform_cipher():
    # the full OTP run from the all-zero store: c-marginal uniform at n=1,2
    env = parse_env("{c: Str[n], k: Str[n], m: Str[n]}")
    prog = parse_program("k := rnd(); c := xor(m, k)")
    zero = {1: FinDist.dirac(mem(env, 1, c="0", k="0", m="0"))}
    zero[2] = FinDist.dirac(mem(env, 2, c="00", k="00", m="00"))
    out_store = Store(env, {n: run(env, prog, n, d) for n, d in zero.items()})
    c_env = parse_env("{c: Str[n]}")
    got = store_project(out_store, c_env)
    assert got.at(1) == uniform_memories(c_env, 1)
    assert got.at(2) == uniform_memories(c_env, 2)
