"""Random generators for environments, distributions, programs, formulas,
and proof-rule instances.

Everything here is deliberately small: variables draw from a fixed name
pool, string types stay at width 1 or n, and supports stay tiny, so that
exhaustive enumeration downstream is instant even at n = 3.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from .dist import (
    FinDist,
    Memory,
    Store,
    all_memories,
    tensor,
    uniform_memories,
    value_len,
)
from .syntax import (
    App,
    Assign,
    ATOM_EQ,
    ATOM_ESPL,
    ATOM_IND,
    ATOM_U,
    And,
    Atom,
    BoolType,
    EMPTY_ENV,
    Env,
    Formula,
    HoareTriple,
    If,
    Lit,
    POLY_N,
    ProofTree,
    Seq,
    SKIP,
    SizePoly,
    Star,
    StrType,
    SymbolTable,
    Top,
    Var,
)
from .types import env_join, type_expr

BOOL = BoolType()
STR_N = StrType(POLY_N)
STR_1 = StrType(SizePoly.const(1))
POLY_ONE = SizePoly.const(1)

_NAME_POOL = ("a", "b", "c", "d", "k", "m", "r", "s", "t", "u", "x", "y")
_TYPE_POOL = (BOOL, BOOL, STR_N, STR_1)


def gen_names(rng: random.Random, count: int) -> list[str]:
    return rng.sample(_NAME_POOL, count)


def gen_env(
    rng: random.Random,
    min_vars: int = 1,
    max_vars: int = 3,
    types=_TYPE_POOL,
    names: Optional[list[str]] = None,
) -> Env:
    if names is None:
        names = gen_names(rng, rng.randint(min_vars, max_vars))
    return Env.make({nm: rng.choice(types) for nm in names})


def gen_value(rng: random.Random, t, n: int) -> str:
    return "".join(rng.choice("01") for _ in range(value_len(t, n)))


def gen_dist(rng: random.Random, env: Env, n: int, max_support: int = 4) -> FinDist:
    """A proper distribution over memories; biased toward structured cases."""
    mems = all_memories(env, n)
    roll = rng.random()
    if roll < 0.2:
        return uniform_memories(env, n)
    if roll < 0.35:
        return FinDist.dirac(rng.choice(mems))
    k = rng.randint(1, min(max_support, len(mems)))
    pts = rng.sample(mems, k)
    weights = [rng.randint(1, 8) for _ in pts]
    total = sum(weights)
    return FinDist({m: Fraction(w, total) for m, w in zip(pts, weights)})


def gen_product_dist(rng: random.Random, n: int, parts) -> FinDist:
    d = FinDist.dirac(Memory.make(EMPTY_ENV, n, {}))
    for part in parts:
        d = tensor(d, gen_dist(rng, part, n))
    return d


def gen_store(rng: random.Random, env: Env, ns, split=None) -> Store:
    """Random store; with a split given, lean toward product distributions
    factored along it (so separating preconditions get hit)."""
    family = {}
    for n in ns:
        if split is not None and rng.random() < 0.7:
            family[n] = gen_product_dist(rng, n, split)
        else:
            family[n] = gen_dist(rng, env, n)
    return Store(env, family)


def gen_stores(rng: random.Random, env: Env, ns, count: int, split=None):
    return [gen_store(rng, env, ns, split) for _ in range(count)]


# ---------------------------------------------------------------------------
# Expressions and programs


def gen_expr(
    rng: random.Random,
    env: Env,
    want_t,
    symbols: Optional[SymbolTable] = None,
    det: bool = False,
    depth: int = 2,
):
    """A random expression of the requested type over env."""
    symbols = symbols or SymbolTable()
    simple = [Var(nm) for nm, t in env.items() if t == want_t]
    if want_t == BOOL:
        simple += [Lit("0"), Lit("1")]
    if isinstance(want_t, StrType):
        simple.append(App("setzero", (), (want_t.size,)))
        if want_t == STR_N and not det:
            simple.append(App("rnd", ()))

    builders = []
    if depth > 0:

        def xor_pair():
            return App(
                "xor",
                (
                    gen_expr(rng, env, want_t, symbols, det, depth - 1),
                    gen_expr(rng, env, want_t, symbols, det, depth - 1),
                ),
            )

        builders.append(xor_pair)
        if want_t == BOOL:
            builders.append(
                lambda: App(
                    "not", (gen_expr(rng, env, BOOL, symbols, det, depth - 1),)
                )
            )
            headable = [
                Var(nm)
                for nm, t in env.items()
                if isinstance(t, StrType) and t.size.try_sub(POLY_ONE) is not None
            ]
            if headable:
                builders.append(lambda: App("head", (rng.choice(headable),)))
    if builders and rng.random() < 0.35:
        return rng.choice(builders)()
    if simple:
        return rng.choice(simple)
    return rng.choice(builders)()


def _chain(stmts):
    prog = stmts[0]
    for s in stmts[1:]:
        prog = Seq(prog, s)
    return prog


def gen_program(
    rng: random.Random,
    env: Env,
    symbols: Optional[SymbolTable] = None,
    size: int = 3,
    rnd_ok: bool = True,
):
    """A random well-typed program over env (possibly with conditionals)."""
    symbols = symbols or SymbolTable()
    bools = [nm for nm, t in env.items() if t == BOOL]

    def stmt(depth):
        roll = rng.random()
        if roll < 0.08:
            return SKIP
        if roll < 0.28 and bools and depth > 0:
            return If(
                rng.choice(bools),
                block(depth - 1, rng.randint(1, 2)),
                block(depth - 1, rng.randint(1, 2)),
            )
        target = rng.choice(env.names())
        e = gen_expr(rng, env, env.lookup(target), symbols, det=not rnd_ok)
        return Assign(target, e)

    def block(depth, count):
        return _chain([stmt(depth) for _ in range(count)])

    return block(2, rng.randint(1, size))


# ---------------------------------------------------------------------------
# Formulas


def gen_atom(
    rng: random.Random,
    env: Env,
    symbols: Optional[SymbolTable] = None,
    exact: bool = False,
) -> Formula:
    """A random well-formed atom annotated with env."""
    symbols = symbols or SymbolTable()
    types = [t for _, t in env.items()] or [BOOL]
    t = rng.choice(types)
    kinds = (ATOM_EQ, ATOM_ESPL) if exact else (ATOM_U, ATOM_IND, ATOM_EQ, ATOM_ESPL)
    kind = rng.choice(kinds)
    det = kind == ATOM_ESPL
    e = gen_expr(rng, env, t, symbols, det=det, depth=1)
    if kind == ATOM_U:
        return Formula(Atom(kind, (e,)), env)
    g = gen_expr(rng, env, t, symbols, det=det, depth=1)
    return Formula(Atom(kind, (e, g)), env)


def gen_simple_formula(
    rng: random.Random,
    env: Env,
    symbols: Optional[SymbolTable] = None,
    exact: bool = False,
) -> Formula:
    """T or a single atom, annotated with env."""
    if rng.random() < 0.3 or len(env) == 0:
        return Formula(Top(), env)
    return gen_atom(rng, env, symbols, exact)


def _split_env(rng: random.Random, env: Env):
    names = list(env.names())
    rng.shuffle(names)
    cut = rng.randint(0, len(names))
    return env.restrict(names[:cut]), env.restrict(names[cut:])


def gen_formula(
    rng: random.Random,
    env: Env,
    symbols: Optional[SymbolTable] = None,
    depth: int = 2,
) -> Formula:
    """A random well-formed annotated formula over (a sub-env of) env."""
    symbols = symbols or SymbolTable()
    roll = rng.random()
    if depth == 0 or roll < 0.45 or len(env) == 0:
        return gen_simple_formula(rng, env, symbols)
    if roll < 0.75:
        left = gen_formula(rng, env, symbols, depth - 1)
        right = gen_formula(rng, env, symbols, depth - 1)
        return Formula(And(left, right), env)
    a, b = _split_env(rng, env)
    left = gen_formula(rng, a, symbols, depth - 1)
    right = gen_formula(rng, b, symbols, depth - 1)
    return Formula(Star(left, right), env)


def gen_exact_formula(
    rng: random.Random,
    env: Env,
    symbols: Optional[SymbolTable] = None,
    depth: int = 1,
) -> Formula:
    """An exact formula (T, F, ==, .= and conjunction only)."""
    if depth > 0 and rng.random() < 0.4:
        left = gen_exact_formula(rng, env, symbols, depth - 1)
        right = gen_exact_formula(rng, env, symbols, depth - 1)
        return Formula(And(left, right), env)
    return gen_simple_formula(rng, env, symbols, exact=True)


# ---------------------------------------------------------------------------
# Proof-rule instances for the soundness fuzzer


def _disjoint_envs(rng: random.Random, k1: int, k2: int, types=_TYPE_POOL):
    names = gen_names(rng, k1 + k2)
    a = Env.make({nm: rng.choice(types) for nm in names[:k1]})
    b = Env.make({nm: rng.choice(types) for nm in names[k1:]})
    return a, b


def gen_scoped_assign(rng: random.Random, ns, symbols: SymbolTable, exact: bool):
    """A random SRAssn/SDAssn conclusion together with its leaf proof node."""
    xi, theta = _disjoint_envs(rng, rng.randint(1, 2), rng.randint(1, 2))
    delta = env_join(xi, theta)
    r = rng.choice(theta.names())
    want_t = theta.lookup(r)
    e = gen_expr(rng, xi, want_t, symbols, det=exact, depth=1)
    try:
        type_expr(xi, e, symbols)
    except Exception:
        return None
    phi = gen_simple_formula(rng, xi, symbols)
    psi = Formula(Top(), theta)
    kind = ATOM_ESPL if exact else ATOM_EQ
    xi_r = env_join(xi, Env.make({r: want_t}))
    post_left = Formula(And(phi, Formula(Atom(kind, (Var(r), e)), xi_r)), xi_r)
    post = Formula(Star(post_left, Formula(psi.body, theta.remove(r))), delta)
    pre = Formula(Star(phi, psi), delta)
    triple = HoareTriple(pre, delta, Assign(r, e), post)
    rule = "SDAssn" if exact else "SRAssn"
    return triple, ProofTree(rule, triple)


def gen_composite(rng: random.Random, ns, symbols: SymbolTable, star_shape: bool):
    """A random Frame/Const conclusion plus the child triple it extends."""
    xi, theta = _disjoint_envs(rng, rng.randint(1, 2), rng.randint(1, 2))
    delta = env_join(xi, theta)
    prog = gen_program(rng, xi, symbols, size=2)
    phi = gen_simple_formula(rng, xi, symbols)
    psi = gen_simple_formula(rng, xi, symbols)
    context = gen_simple_formula(rng, theta, symbols)
    shape = Star if star_shape else And
    pre = Formula(shape(phi, context), delta)
    post = Formula(shape(psi, context), delta)
    child = HoareTriple(phi, xi, prog, psi)
    return HoareTriple(pre, delta, prog, post), child


def gen_rcond(rng: random.Random, ns, symbols: SymbolTable):
    """A random RCond conclusion plus the two branch triples."""
    guard = rng.choice(_NAME_POOL)
    extra = gen_env(
        rng, 1, 2, names=[nm for nm in gen_names(rng, 3) if nm != guard][:2]
    )
    env = env_join(Env.make({guard: BOOL}), extra)
    then_p = gen_program(rng, env, symbols, size=2)
    else_p = gen_program(rng, env, symbols, size=2)
    post = gen_exact_formula(rng, env, symbols)
    prog = If(guard, then_p, else_p)
    triple = HoareTriple(Formula(Top(), env), env, prog, post)
    then_triple = HoareTriple(
        Formula(Atom(ATOM_ESPL, (Var(guard), Lit("1"))), env), env, then_p, post
    )
    else_triple = HoareTriple(
        Formula(Atom(ATOM_ESPL, (Var(guard), Lit("0"))), env), env, else_p, post
    )
    return triple, then_triple, else_triple
