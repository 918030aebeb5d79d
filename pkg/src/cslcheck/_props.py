"""Property suites behind the `cslcheck properties` command.

Each suite draws random cases from _gen, checks an exact law, and returns a
SuiteResult whose failures list is empty on success. The same suites back the
package's acceptance tests, so they stay deterministic for a fixed seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import _gen
from .dist import (
    FinDist,
    Memory,
    Store,
    all_memories,
    all_values,
    tensor,
    uniform_memories,
)
from .hoare import fuzz_rule_soundness
from .logic import (
    check_axiom_instance,
    entailment_holds_on,
    sat_bi,
    sat_formula,
    search_annotation,
)
from .semantics import (
    bind_stub,
    run,
    run_kozen,
    run_store,
    store_project,
    store_tensor,
)
from .syntax import (
    And,
    App,
    ATOM_ESPL,
    ATOM_U,
    Atom,
    BoolType,
    EMPTY_ENV,
    Env,
    Formula,
    POLY_N,
    SizePoly,
    Star,
    StrType,
    SymbolTable,
    Top,
    Var,
    parse_decls,
)
from .types import env_join, mv

ONE = Fraction(1)
BOOL = BoolType()
STR_N = StrType(POLY_N)
STR_N1 = StrType(SizePoly.make((1, 1)))


@dataclass
class SuiteResult:
    name: str
    cases: int
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _note(result: SuiteResult, message: str, cap: int = 5) -> None:
    if len(result.failures) < cap:
        result.failures.append(message)
    else:
        result.failures.append("...")
        raise _SuiteAbort


class _SuiteAbort(Exception):
    pass


def _suite(fn):
    def wrapper(seed: int, cases: int, ns) -> SuiteResult:
        rng = random.Random(seed)
        result = SuiteResult(fn.__name__.removeprefix("suite_"), cases)
        try:
            fn(rng, cases, tuple(ns), result)
        except _SuiteAbort:
            pass
        return result

    return wrapper


# ---------------------------------------------------------------------------


@_suite
def suite_monad(rng, cases, ns, result):
    """Left/right identity and associativity for bind on memory space."""
    symbols = SymbolTable()
    for _ in range(cases):
        env = _gen.gen_env(rng)
        n = rng.choice(ns)
        d = _gen.gen_dist(rng, env, n)
        p1 = _gen.gen_program(rng, env, symbols, size=2)
        p2 = _gen.gen_program(rng, env, symbols, size=2)
        k1 = lambda m: run(env, p1, n, FinDist.dirac(m), symbols)
        k2 = lambda m: run(env, p2, n, FinDist.dirac(m), symbols)
        m0 = rng.choice(list(d.support()))
        if FinDist.dirac(m0).bind(k1) != k1(m0):
            _note(result, f"left identity fails at {m0}")
        if d.bind(FinDist.dirac) != d:
            _note(result, "right identity fails")
        if d.bind(k1).bind(k2) != d.bind(lambda m: k1(m).bind(k2)):
            _note(result, "associativity fails")


@_suite
def suite_kozen(rng, cases, ns, result):
    """The per-sample conditional semantics agrees with the split-and-merge
    one on every generated program, exactly."""
    symbols = SymbolTable()
    for i in range(cases):
        env = _gen.gen_env(rng)
        prog = _gen.gen_program(rng, env, symbols)
        n = rng.choice(ns)
        d = _gen.gen_dist(rng, env, n)
        if run(env, prog, n, d, symbols) != run_kozen(env, prog, n, d, symbols):
            _note(result, f"case {i}: semantics disagree")


@_suite
def suite_pkrm(rng, cases, ns, result):
    """Tensor monoid laws and the projection preorder on stores."""
    for _ in range(cases):
        names = _gen.gen_names(rng, 3)
        envs = [Env.make({nm: rng.choice(_gen._TYPE_POOL)}) for nm in names]
        stores = [_gen.gen_store(rng, e, ns) for e in envs]
        a, b, c = stores
        left = store_tensor(store_tensor(a, b), c)
        right = store_tensor(a, store_tensor(b, c))
        if left != right:
            _note(result, "tensor associativity fails")
        unit = Store(
            EMPTY_ENV,
            {n: FinDist.dirac(Memory.make(EMPTY_ENV, n, {})) for n in ns},
        )
        if store_tensor(a, unit) != a or store_tensor(unit, a) != a:
            _note(result, "tensor identity fails")
        whole = left
        # preorder: marginals of marginals are marginals
        sub = env_join(envs[0], envs[1])
        if store_project(store_project(whole, sub), envs[0]) != store_project(
            whole, envs[0]
        ):
            _note(result, "projection transitivity fails")
        if store_project(whole, whole.env) != whole:
            _note(result, "projection reflexivity fails")
        # tensor respects the preorder componentwise
        t1 = _gen.gen_store(rng, env_join(envs[0], envs[1]), ns)
        t2 = _gen.gen_store(rng, envs[2], ns)
        if store_project(store_tensor(t1, t2), env_join(envs[0], envs[2])) != store_tensor(
            store_project(t1, envs[0]), store_project(t2, envs[2])
        ):
            _note(result, "tensor compatibility with projection fails")


@_suite
def suite_mv(rng, cases, ns, result):
    """Running a program never moves the marginal of untouched variables."""
    symbols = SymbolTable()
    for _ in range(cases):
        env = _gen.gen_env(rng, 2, 3)
        prog = _gen.gen_program(rng, env, symbols)
        rest = env.restrict(set(env.names()) - mv(prog))
        s = _gen.gen_store(rng, env, ns)
        out = run_store(s, prog, symbols)
        if store_project(out, rest) != store_project(s, rest):
            _note(result, "marginal of unmodified variables changed")


@_suite
def suite_locality(rng, cases, ns, result):
    """A program over a sub-environment commutes with projection to it."""
    symbols = SymbolTable()
    for _ in range(cases):
        env = _gen.gen_env(rng, 2, 3)
        sub_names = rng.sample(env.names(), rng.randint(1, len(env)))
        sub = env.restrict(sub_names)
        prog = _gen.gen_program(rng, sub, symbols)
        s = _gen.gen_store(rng, env, ns)
        if store_project(run_store(s, prog, symbols), sub) != run_store(
            store_project(s, sub), prog, symbols
        ):
            _note(result, "projection does not commute with execution")


@_suite
def suite_frame(rng, cases, ns, result):
    """Execution on one independent component leaves the product shape."""
    symbols = SymbolTable()
    for _ in range(cases):
        xi, theta = _gen._disjoint_envs(rng, rng.randint(1, 2), rng.randint(1, 2))
        prog = _gen.gen_program(rng, xi, symbols)
        left = _gen.gen_store(rng, xi, ns)
        right = _gen.gen_store(rng, theta, ns)
        joint = store_tensor(left, right)
        if run_store(joint, prog, symbols) != store_tensor(
            run_store(left, prog, symbols), right
        ):
            _note(result, "independence is not preserved by a local program")


@_suite
def suite_unit(rng, cases, ns, result):
    """The empty-environment store is the unit of tensor, and every store
    projects onto it."""
    for _ in range(cases):
        env = _gen.gen_env(rng)
        s = _gen.gen_store(rng, env, ns)
        unit = Store(
            EMPTY_ENV,
            {n: FinDist.dirac(Memory.make(EMPTY_ENV, n, {})) for n in ns},
        )
        if store_tensor(unit, s) != s:
            _note(result, "unit tensor changed the store")
        if store_project(s, EMPTY_ENV) != unit:
            _note(result, "projection to the empty environment is not the unit")


@_suite
def suite_linearity(rng, cases, ns, result):
    """Execution is linear in the input sub-distribution."""
    symbols = SymbolTable()
    for _ in range(cases):
        env = _gen.gen_env(rng)
        prog = _gen.gen_program(rng, env, symbols)
        n = rng.choice(ns)
        d1 = _gen.gen_dist(rng, env, n).scale(Fraction(1, 2))
        d2 = _gen.gen_dist(rng, env, n).scale(Fraction(1, 3))
        if run(env, prog, n, d1.add(d2), symbols) != run(
            env, prog, n, d1, symbols
        ).add(run(env, prog, n, d2, symbols)):
            _note(result, "additivity fails")
        q = Fraction(rng.randint(1, 3), 4)
        if run(env, prog, n, d1.scale(q), symbols) != run(
            env, prog, n, d1, symbols
        ).scale(q):
            _note(result, "homogeneity fails")


def _head(v: str) -> str:
    return v[0]


def _tail(v: str) -> str:
    return v[1:]


@_suite
def suite_axioms(rng, cases, ns, result):
    """Semantic validity of the axiom schemas on random and on crafted
    stores, all at epsilon 0."""
    symbols = SymbolTable()
    simple = ("S0", "S1", "S2", "T0", "T1", "T2", "W1", "W2", "U1")
    per_schema = max(1, cases // (len(simple) + 3))
    for name in simple:
        for _ in range(per_schema):
            env = _gen.gen_env(rng)
            t = rng.choice([tt for _, tt in env.items()])
            det = name == "W2"
            subst = {
                "env": env,
                "e": _gen.gen_expr(rng, env, t, symbols, det=det, depth=1),
                "g": _gen.gen_expr(rng, env, t, symbols, det=det, depth=1),
                "h": _gen.gen_expr(rng, env, t, symbols, det=det, depth=1),
            }
            if name == "W2":
                subst["d"], subst["c"] = subst["e"], subst["g"]
            try:
                lhs, rhs = check_axiom_instance(name, subst, symbols)
            except Exception:
                continue  # e.g. an ill-typed draw; instance skipped
            for s in _gen.gen_stores(rng, env, ns, 2):
                if not entailment_holds_on(s, lhs, rhs, symbols=symbols):
                    _note(result, f"{name} fails on a store")
    # split: uniform source, derived head/tail
    env = Env.make({"r": STR_N1, "b": BOOL, "s": STR_N})
    family = {}
    for nn in ns:
        pts = {}
        for v in all_values(STR_N1, nn):
            m = Memory.make(env, nn, {"r": v, "b": _head(v), "s": _tail(v)})
            pts[m] = Fraction(1, 2 ** (nn + 1))
        family[nn] = FinDist(pts)
    s = Store(env, family)
    lhs, rhs = _ax_spl_instance(env)
    if not (
        sat_formula(s, lhs, symbols=symbols)
        and sat_formula(s, rhs, symbols=symbols)
    ):
        _note(result, "split axiom fails on the derived uniform store")
    for rnd_store in _gen.gen_stores(rng, env, ns, 3):
        if not entailment_holds_on(rnd_store, lhs, rhs, symbols=symbols):
            _note(result, "split axiom fails on a random store")
    # merge: independent uniform parts, derived concatenation
    env = Env.make({"r": STR_N, "b": BOOL, "s": STR_N1})
    family = {}
    for nn in ns:
        pts = {}
        for v in all_values(STR_N, nn):
            for bit in "01":
                m = Memory.make(env, nn, {"r": v, "b": bit, "s": v + bit})
                pts[m] = Fraction(1, 2 ** (nn + 1))
        family[nn] = FinDist(pts)
    s = Store(env, family)
    lhs, rhs = _ax_mrg_instance(env)
    if not (
        sat_formula(s, lhs, symbols=symbols) and sat_formula(s, rhs, symbols=symbols)
    ):
        _note(result, "merge axiom fails on the derived uniform store")
    for rnd_store in _gen.gen_stores(rng, env, ns, 3):
        if not entailment_holds_on(rnd_store, lhs, rhs, symbols=symbols):
            _note(result, "merge axiom fails on a random store")
    # pseudorandom-step axiom under length-preserving bijections
    for stub in ("identity", "bitreverse"):
        syms = parse_decls("decl g : Str[n] -> Str[n] det;")
        syms = bind_stub(syms, "g", stub)
        env = Env.make({"x": STR_N})
        lhs = Formula(Atom(ATOM_U, (Var("x"),)), env)
        rhs = Formula(Atom(ATOM_U, (App("g", (Var("x"),)),)), env)
        stores = [Store(env, {n: uniform_memories(env, n) for n in ns})]
        stores += _gen.gen_stores(rng, env, ns, 3)
        for s in stores:
            if not entailment_holds_on(s, lhs, rhs, symbols=syms):
                _note(result, f"uniformity is not preserved by the {stub} stub")


def _ax_spl_instance(env: Env):
    xi = env
    lhs = Formula(
        And(
            Formula(
                And(
                    Formula(Atom(ATOM_U, (Var("r"),)), xi),
                    Formula(Atom(ATOM_ESPL, (Var("b"), App("head", (Var("r"),)))), xi),
                ),
                xi,
            ),
            Formula(Atom(ATOM_ESPL, (Var("s"), App("tail", (Var("r"),)))), xi),
        ),
        xi,
    )
    rhs = Formula(
        Star(
            Formula(Atom(ATOM_U, (Var("b"),)), xi.restrict(("b",))),
            Formula(Atom(ATOM_U, (Var("s"),)), xi.restrict(("s",))),
        ),
        xi,
    )
    return lhs, rhs


def _ax_mrg_instance(env: Env):
    xi = env
    lhs = Formula(
        And(
            Formula(
                Star(
                    Formula(Atom(ATOM_U, (Var("r"),)), xi.restrict(("r",))),
                    Formula(Atom(ATOM_U, (Var("b"),)), xi.restrict(("b",))),
                ),
                xi.restrict(("r", "b")),
            ),
            Formula(
                Atom(ATOM_ESPL, (Var("s"), App("concat", (Var("r"), Var("b"))))), xi
            ),
        ),
        xi,
    )
    rhs = Formula(Atom(ATOM_U, (Var("s"),)), xi)
    return lhs, rhs


@_suite
def suite_fuzz(rng, cases, ns, result):
    per_rule = max(1, cases // 5)
    for rule in ("Frame", "Const", "RCond", "SRAssn", "SDAssn"):
        report = fuzz_rule_soundness(rule, per_rule, rng.randrange(2**30), ns)
        for v in report.violations:
            _note(result, f"{rule}: {v['program']} breaks {v['post']}")


@_suite
def suite_bi(rng, cases, ns, result):
    """Annotated satisfaction implies plain satisfaction; plain satisfaction
    always has an annotated witness."""
    symbols = SymbolTable()
    for _ in range(cases):
        env = _gen.gen_env(rng, 1, 2)
        f = _gen.gen_formula(rng, env, symbols)
        s = _gen.gen_store(rng, env, ns)
        annotated = sat_formula(store_project(s, f.annotation), f, symbols=symbols)
        plain = sat_bi(store_project(s, f.annotation), f, symbols=symbols)
        if annotated and not plain:
            _note(result, "annotated satisfaction without a plain witness")
        if plain:
            witness = search_annotation(
                store_project(s, f.annotation), f.body, symbols=symbols
            )
            if witness is None or not sat_formula(
                store_project(s, f.annotation), witness, symbols=symbols
            ):
                _note(result, "no annotation found for a plainly-true formula")


@_suite
def suite_split_merge(rng, cases, ns, result):
    """A two-variable boolean store is uniform exactly when both marginals
    are uniform and the joint is their product."""
    env = Env.make({"x": BOOL, "y": BOOL})
    ex, ey = env.restrict(("x",)), env.restrict(("y",))
    mems = all_memories(env, 1)

    def verdicts(d: FinDist):
        s = Store(env, {1: d})
        joint_uniform = d == uniform_memories(env, 1)
        mx = store_project(s, ex), store_project(s, ey)
        marg_uniform = all(
            p.at(1) == uniform_memories(p.env, 1) for p in mx
        )
        product = d == tensor(mx[0].at(1), mx[1].at(1))
        return joint_uniform, marg_uniform and product

    for den in range(1, 9):
        for w1 in range(den + 1):
            for w2 in range(den + 1 - w1):
                for w3 in range(den + 1 - w1 - w2):
                    weights = (w1, w2, w3, den - w1 - w2 - w3)
                    d = FinDist(
                        {m: Fraction(w, den) for m, w in zip(mems, weights) if w}
                    )
                    a, b = verdicts(d)
                    if a != b:
                        _note(
                            result,
                            f"split/merge mismatch at weights {weights}/{den}",
                        )
    for _ in range(cases):
        a, b = verdicts(_gen.gen_dist(rng, env, 1))
        if a != b:
            _note(result, "split/merge mismatch on a random store")


@_suite
def suite_independence(rng, cases, ns, result):
    """The product criterion agrees with exhaustive witness search."""
    symbols = SymbolTable()
    env = Env.make({"x": BOOL, "y": BOOL})
    ex, ey = env.restrict(("x",)), env.restrict(("y",))
    f = Formula(
        Star(Formula(Top(), ex), Formula(Top(), ey)),
        env,
    )
    for _ in range(cases):
        n = rng.choice(ns)
        xmems = all_memories(ex, n)
        ymems = all_memories(ey, n)
        weights = [rng.randint(0, 6) for _ in range(4)]
        total = sum(weights)
        if total == 0:
            continue
        d = FinDist(
            {
                m: Fraction(w, total)
                for m, w in zip(all_memories(env, n), weights)
                if w
            }
        )
        s = Store(env, {n: d})
        criterion = sat_formula(s, f, symbols=symbols)
        # brute force: all product pairs with probabilities k/total
        found = False
        for kx in range(total + 1):
            for ky in range(total + 1):
                u = FinDist(
                    {
                        xmems[0]: Fraction(kx, total),
                        xmems[1]: Fraction(total - kx, total),
                    }
                )
                v = FinDist(
                    {
                        ymems[0]: Fraction(ky, total),
                        ymems[1]: Fraction(total - ky, total),
                    }
                )
                if tensor(u, v) == d:
                    found = True
                    break
            if found:
                break
        if criterion != found:
            _note(result, f"independence criterion disagrees at weights {weights}")


ALL_SUITES = (
    suite_monad,
    suite_kozen,
    suite_pkrm,
    suite_mv,
    suite_locality,
    suite_frame,
    suite_unit,
    suite_linearity,
    suite_axioms,
    suite_fuzz,
    suite_bi,
    suite_split_merge,
    suite_independence,
)
