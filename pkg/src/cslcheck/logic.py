"""Formula satisfaction, axiom schemas, and the entailment checker.

Satisfaction is decided exactly on explicit stores. The separating
conjunction is decided by the product-of-marginals criterion: the store's
marginal on the joined child domains must equal the tensor of the two child
marginals. The plain (annotation-free) evaluator sat_bi instead searches all
disjoint sub-environment splits for a witnessing product.

Entailments between annotated formulas are checked only against explicit
step-by-step certificates; see check_hilbert. Leaf steps are named axiom
schemas, template-matched and side-condition-checked by
check_axiom_instance; which schemas are enabled is configuration read from
schemas.json.
"""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from itertools import combinations
from typing import Callable, Optional

from .dist import Store, is_uniform, stat_dist, uniform_values
from .semantics import (
    eval_det,
    eval_expr,
    store_indist,
    store_project,
    store_tensor,
)
from .syntax import (
    And,
    App,
    Atom,
    ATOM_EQ,
    ATOM_ESPL,
    ATOM_IND,
    ATOM_U,
    BoolType,
    Bot,
    DET,
    EMPTY_ENV,
    EntailmentCert,
    Env,
    Formula,
    Lit,
    POLY_N,
    SizePoly,
    Star,
    StrType,
    SymbolTable,
    Top,
    Var,
    atom as mk_atom,
    conj as mk_conj,
    formula_to_text,
    top as mk_top,
)
from .types import (
    TypeCheckError,
    env_ext,
    env_join,
    env_union,
    formula_ext,
    formula_fv,
    fv,
    type_expr,
    wf_formula,
)

ZERO = Fraction(0)


# ---------------------------------------------------------------------------
# Satisfaction


def sat_atom(
    s: Store,
    f: Formula,
    epsilon: Fraction = ZERO,
    symbols: Optional[SymbolTable] = None,
) -> bool:
    """Decide an atomic formula on a store over exactly its annotation."""
    symbols = symbols or SymbolTable()
    a = f.body
    if not isinstance(a, Atom):
        raise ValueError("sat_atom needs an atomic formula")
    if s.env != f.annotation:
        raise TypeCheckError("sat_atom", "store environment differs from annotation")
    env = f.annotation
    if a.kind == ATOM_U:
        t = type_expr(env, a.args[0], symbols)
        for n in s.tested_ns():
            out = eval_expr(env, a.args[0], n, s.at(n), symbols)
            if epsilon == 0:
                if not is_uniform(out, t, n):
                    return False
            elif stat_dist(out, uniform_values(t, n)) > epsilon:
                return False
        return True
    if a.kind == ATOM_IND:
        for n in s.tested_ns():
            d1 = eval_expr(env, a.args[0], n, s.at(n), symbols)
            d2 = eval_expr(env, a.args[1], n, s.at(n), symbols)
            if stat_dist(d1, d2) > epsilon:
                return False
        return True
    if a.kind == ATOM_EQ:
        # equality of output distributions is exact in every mode
        for n in s.tested_ns():
            d1 = eval_expr(env, a.args[0], n, s.at(n), symbols)
            d2 = eval_expr(env, a.args[1], n, s.at(n), symbols)
            if d1 != d2:
                return False
        return True
    for n in s.tested_ns():
        for m in s.at(n).support():
            v1 = eval_det(env, a.args[0], n, m, symbols)
            v2 = eval_det(env, a.args[1], n, m, symbols)
            if v1 != v2:
                return False
    return True


def sat_formula(
    s: Store,
    f: Formula,
    epsilon: Fraction = ZERO,
    symbols: Optional[SymbolTable] = None,
) -> bool:
    """Decide an annotated formula on a store over exactly its annotation."""
    symbols = symbols or SymbolTable()
    if s.env != f.annotation:
        raise TypeCheckError(
            "sat_formula", "store environment differs from annotation"
        )
    b = f.body
    if isinstance(b, Top):
        return True
    if isinstance(b, Bot):
        return False
    if isinstance(b, Atom):
        return sat_atom(s, f, epsilon, symbols)
    left, right = b.left, b.right
    lproj = store_project(s, left.annotation)
    rproj = store_project(s, right.annotation)
    if isinstance(b, And):
        return sat_formula(lproj, left, epsilon, symbols) and sat_formula(
            rproj, right, epsilon, symbols
        )
    joined = env_join(left.annotation, right.annotation)
    independent = store_indist(
        store_project(s, joined), store_tensor(lproj, rproj), epsilon
    )
    return (
        independent
        and sat_formula(lproj, left, epsilon, symbols)
        and sat_formula(rproj, right, epsilon, symbols)
    )


def entailment_holds_on(
    s: Store,
    lhs: Formula,
    rhs: Formula,
    epsilon: Fraction = ZERO,
    symbols: Optional[SymbolTable] = None,
) -> bool:
    """One store's worth of evidence for an entailment.

    The store may be over any environment extending both annotations; the
    check is that the lhs marginal satisfying lhs forces the rhs marginal to
    satisfy rhs.
    """
    if not sat_formula(store_project(s, lhs.annotation), lhs, epsilon, symbols):
        return True
    return sat_formula(store_project(s, rhs.annotation), rhs, epsilon, symbols)


# ---------------------------------------------------------------------------
# Annotation-free evaluation (plain resource semantics)


def _subenvs(env: Env):
    names = env.names()
    for k in range(len(names) + 1):
        for combo in combinations(names, k):
            yield env.restrict(combo)


def sat_bi(
    s: Store,
    f: Formula,
    epsilon: Fraction = ZERO,
    symbols: Optional[SymbolTable] = None,
) -> bool:
    """Decide a formula on a store ignoring all annotations.

    Conjunction reads both conjuncts on the same store; separating
    conjunction searches every pair of disjoint sub-environments for a
    split whose marginals are independent and satisfy the two sides.
    """
    symbols = symbols or SymbolTable()
    b = f.body
    if isinstance(b, Top):
        return True
    if isinstance(b, Bot):
        return False
    if isinstance(b, Atom):
        return sat_atom(s, Formula(b, s.env), epsilon, symbols)
    if isinstance(b, And):
        return sat_bi(s, b.left, epsilon, symbols) and sat_bi(
            s, b.right, epsilon, symbols
        )
    need_left = formula_fv(b.left)
    need_right = formula_fv(b.right)
    for xi in _subenvs(s.env):
        if not need_left <= set(xi.names()):
            continue
        rest = s.env.restrict(set(s.env.names()) - set(xi.names()))
        for theta in _subenvs(rest):
            if not need_right <= set(theta.names()):
                continue
            lproj = store_project(s, xi)
            rproj = store_project(s, theta)
            product_ok = store_indist(
                store_project(s, env_join(xi, theta)),
                store_tensor(lproj, rproj),
                epsilon,
            )
            if (
                product_ok
                and sat_bi(lproj, b.left, epsilon, symbols)
                and sat_bi(rproj, b.right, epsilon, symbols)
            ):
                return True
    return False


def search_annotation(
    s: Store,
    body,
    epsilon: Fraction = ZERO,
    symbols: Optional[SymbolTable] = None,
) -> Optional[Formula]:
    """Re-annotate a formula body so it holds on s, or return None.

    Mirrors the sat_bi witness search: conjunctions get the full store
    environment, separating conjunctions get a successful disjoint split.
    """
    symbols = symbols or SymbolTable()
    if isinstance(body, Top):
        return Formula(body, s.env)
    if isinstance(body, Bot):
        return None
    if isinstance(body, Atom):
        f = Formula(body, s.env)
        try:
            wf_formula(f, symbols)
        except TypeCheckError:
            return None
        return f if sat_atom(s, f, epsilon, symbols) else None
    if isinstance(body, And):
        left = search_annotation(s, body.left.body, epsilon, symbols)
        right = search_annotation(s, body.right.body, epsilon, symbols)
        if left is None or right is None:
            return None
        return Formula(And(left, right), s.env)
    need_left = formula_fv(body.left)
    need_right = formula_fv(body.right)
    for xi in _subenvs(s.env):
        if not need_left <= set(xi.names()):
            continue
        rest = s.env.restrict(set(s.env.names()) - set(xi.names()))
        for theta in _subenvs(rest):
            if not need_right <= set(theta.names()):
                continue
            lproj = store_project(s, xi)
            rproj = store_project(s, theta)
            if not store_indist(
                store_project(s, env_join(xi, theta)),
                store_tensor(lproj, rproj),
                epsilon,
            ):
                continue
            left = search_annotation(lproj, body.left.body, epsilon, symbols)
            right = search_annotation(rproj, body.right.body, epsilon, symbols)
            if left is not None and right is not None:
                return Formula(Star(left, right), s.env)
    return None


# ---------------------------------------------------------------------------
# Axiom schemas


class SchemaError(Exception):
    """A claimed schema instance fails its template or a side condition."""

    def __init__(self, schema: str, message: str):
        super().__init__(f"{schema}: {message}")
        self.schema = schema
        self.message = message


def _want(cond: bool, schema: str, message: str) -> None:
    if not cond:
        raise SchemaError(schema, message)


def _atom_of(f: Formula, kind: str, schema: str, what: str) -> Atom:
    b = f.body
    _want(
        isinstance(b, Atom) and b.kind == kind,
        schema,
        f"{what} must be a {kind} atom, got {formula_to_text(f)}",
    )
    return b


def _and_of(f: Formula, schema: str, what: str) -> And:
    _want(isinstance(f.body, And), schema, f"{what} must be a conjunction")
    return f.body


def _star_of(f: Formula, schema: str, what: str) -> Star:
    _want(isinstance(f.body, Star), schema, f"{what} must be a separating conjunction")
    return f.body


def _same_outer(lhs: Formula, rhs: Formula, schema: str) -> Env:
    _want(
        lhs.annotation == rhs.annotation,
        schema,
        "both sides must share the outer annotation",
    )
    return lhs.annotation


def _match_validity(kind: str):
    def match(lhs: Formula, rhs: Formula, symbols: SymbolTable, schema: str):
        _same_outer(lhs, rhs, schema)
        a = _atom_of(rhs, kind, schema, "the conclusion")
        _want(a.args[0] == a.args[1], schema, "the two operands must be identical")

    return match


def _match_symmetry(kind: str):
    def match(lhs: Formula, rhs: Formula, symbols: SymbolTable, schema: str):
        delta = _same_outer(lhs, rhs, schema)
        al = _atom_of(lhs, kind, schema, "the hypothesis")
        ar = _atom_of(rhs, kind, schema, "the conclusion")
        _want(
            ar.args == (al.args[1], al.args[0]),
            schema,
            "the conclusion must swap the hypothesis operands",
        )
        _want(
            lhs.annotation == delta and rhs.annotation == delta,
            schema,
            "annotations must agree",
        )

    return match


def _match_transitivity(kind: str):
    def match(lhs: Formula, rhs: Formula, symbols: SymbolTable, schema: str):
        delta = _same_outer(lhs, rhs, schema)
        conj_body = _and_of(lhs, schema, "the hypothesis")
        a1 = _atom_of(conj_body.left, kind, schema, "the first conjunct")
        a2 = _atom_of(conj_body.right, kind, schema, "the second conjunct")
        _want(
            conj_body.left.annotation == delta
            and conj_body.right.annotation == delta,
            schema,
            "both conjuncts must carry the full annotation",
        )
        _want(
            a1.args[1] == a2.args[0],
            schema,
            "the middle operands must coincide",
        )
        ar = _atom_of(rhs, kind, schema, "the conclusion")
        _want(
            ar.args == (a1.args[0], a2.args[1]),
            schema,
            "the conclusion must chain the outer operands",
        )

    return match


def _match_w1(lhs, rhs, symbols, schema):
    _same_outer(lhs, rhs, schema)
    al = _atom_of(lhs, ATOM_EQ, schema, "the hypothesis")
    ar = _atom_of(rhs, ATOM_IND, schema, "the conclusion")
    _want(al.args == ar.args, schema, "operands must match")


def _match_w2(lhs, rhs, symbols, schema):
    _same_outer(lhs, rhs, schema)
    al = _atom_of(lhs, ATOM_ESPL, schema, "the hypothesis")
    ar = _atom_of(rhs, ATOM_EQ, schema, "the conclusion")
    _want(al.args == ar.args, schema, "operands must match")


def _match_u1(lhs, rhs, symbols, schema):
    delta = _same_outer(lhs, rhs, schema)
    conj_body = _and_of(lhs, schema, "the hypothesis")
    ind = _atom_of(conj_body.left, ATOM_IND, schema, "the first conjunct")
    uni = _atom_of(conj_body.right, ATOM_U, schema, "the second conjunct")
    _want(
        conj_body.left.annotation == delta and conj_body.right.annotation == delta,
        schema,
        "both conjuncts must carry the full annotation",
    )
    _want(uni.args[0] == ind.args[0], schema, "U must speak about the left operand")
    ar = _atom_of(rhs, ATOM_U, schema, "the conclusion")
    _want(ar.args[0] == ind.args[1], schema, "the conclusion transports U across ~~")


def _match_ax_potp(lhs, rhs, symbols, schema):
    delta = _same_outer(lhs, rhs, schema)
    al = _atom_of(lhs, ATOM_U, schema, "the hypothesis")
    ar = _atom_of(rhs, ATOM_U, schema, "the conclusion")
    _want(isinstance(al.args[0], Var), schema, "the hypothesis must be U of a variable")
    x = al.args[0]
    e = ar.args[0]
    _want(
        isinstance(e, App) and e.args == (x,) and not e.size_args,
        schema,
        "the conclusion must be U of a declared symbol applied to the same variable",
    )
    xt = delta.lookup(x.name)
    _want(
        xt == StrType(POLY_N),
        schema,
        f"side condition violated: {x.name} must have type Str[n]",
    )
    sym = symbols.lookup(e.fname)
    _want(sym is not None, schema, f"{e.fname} is not a declared symbol")
    _want(sym.kind == DET, schema, f"{e.fname} must be deterministic")
    _want(
        sym.arg_types == (StrType(POLY_N),) and isinstance(sym.result_type, StrType),
        schema,
        f"{e.fname} must be declared Str[n] -> Str[p]",
    )
    growth = sym.result_type.size.try_sub(POLY_N)
    _want(
        growth is not None and not growth.is_zero(),
        schema,
        f"side condition violated: {e.fname} must be length-increasing (p > n)",
    )


def _match_aux1(lhs, rhs, symbols, schema):
    _same_outer(lhs, rhs, schema)
    ls = _star_of(lhs, schema, "the hypothesis")
    land = _and_of(ls.left, schema, "the left component")
    _want(isinstance(land.left.body, Top), schema, "first conjunct must be T")
    eqa = _atom_of(land.right, ATOM_EQ, schema, "the second conjunct")
    k = eqa.args[0]
    _want(isinstance(k, Var), schema, "== must bind a variable on the left")
    _want(
        eqa.args[1] == App("rnd", ()),
        schema,
        "== must equate the variable with rnd()",
    )
    _want(isinstance(ls.right.body, Top), schema, "right component must be T")
    m1 = ls.right.annotation
    _want(k.name not in m1, schema, f"{k.name} must not occur in the right component")
    rs = _star_of(rhs, schema, "the conclusion")
    ua = _atom_of(rs.left, ATOM_U, schema, "the left conclusion component")
    _want(ua.args[0] == k, schema, "the conclusion must claim U of the same variable")
    _want(
        env_ext(rs.left.annotation, ls.left.annotation),
        schema,
        "the U component annotation must shrink from the == component",
    )
    _want(isinstance(rs.right.body, Top), schema, "right conclusion component must be T")
    _want(
        env_ext(rs.right.annotation, m1),
        schema,
        "the right conclusion annotation must shrink from the hypothesis",
    )


def _match_aux2(lhs, rhs, symbols, schema):
    _same_outer(lhs, rhs, schema)
    land = _and_of(lhs, schema, "the hypothesis")
    espl = _atom_of(land.left, ATOM_ESPL, schema, "the first conjunct")
    c = espl.args[0]
    _want(isinstance(c, Var), schema, ".= must bind a variable on the left")
    rhs_expr = espl.args[1]
    _want(
        isinstance(rhs_expr, App) and rhs_expr.fname == "xor" and len(rhs_expr.args) == 2,
        schema,
        ".= must equate the variable with an xor",
    )
    m_var, d_expr = rhs_expr.args
    _want(isinstance(m_var, Var), schema, "the first xor argument must be a variable")
    starf = _star_of(land.right, schema, "the second conjunct")
    ud = _atom_of(starf.left, ATOM_U, schema, "the uniform component")
    _want(ud.args[0] == d_expr, schema, "U must speak about the second xor argument")
    xi = starf.left.annotation
    _want(isinstance(starf.right.body, Top), schema, "the framed component must be T")
    m_env = starf.right.annotation
    _want(m_var.name in m_env, schema, f"{m_var.name} must be in the framed component")
    _want(c.name not in m_env, schema, f"{c.name} must not be in the framed component")
    _want(c.name not in xi, schema, f"{c.name} must not occur in the uniform component")
    _want(
        m_var.name not in xi,
        schema,
        f"{m_var.name} must not occur in the uniform component",
    )
    _want(
        fv(d_expr) <= set(xi.names()),
        schema,
        "the xored expression must live in the uniform component",
    )
    rs = _star_of(rhs, schema, "the conclusion")
    _want(isinstance(rs.left.body, Top), schema, "left conclusion component must be T")
    _want(
        env_ext(rs.left.annotation, m_env),
        schema,
        "the left conclusion annotation must shrink from the framed component",
    )
    uc = _atom_of(rs.right, ATOM_U, schema, "the right conclusion component")
    _want(uc.args[0] == c, schema, "the conclusion must claim U of the assigned variable")
    _want(
        rs.right.annotation.names() == (c.name,),
        schema,
        "the U component annotation must be exactly the assigned variable",
    )


def _match_ax_spl(lhs, rhs, symbols, schema):
    xi = _same_outer(lhs, rhs, schema)
    outer = _and_of(lhs, schema, "the hypothesis")
    inner = _and_of(outer.left, schema, "the first two conjuncts")
    ua = _atom_of(inner.left, ATOM_U, schema, "the first conjunct")
    heada = _atom_of(inner.right, ATOM_ESPL, schema, "the second conjunct")
    taila = _atom_of(outer.right, ATOM_ESPL, schema, "the third conjunct")
    for part, what in (
        (inner.left, "first conjunct"),
        (inner.right, "second conjunct"),
        (outer.right, "third conjunct"),
        (outer.left, "inner conjunction"),
    ):
        _want(
            part.annotation == xi,
            schema,
            f"the {what} must carry the full annotation",
        )
    r = ua.args[0]
    _want(isinstance(r, Var), schema, "U must speak about a variable")
    b, s = heada.args[0], taila.args[0]
    _want(
        isinstance(b, Var) and isinstance(s, Var),
        schema,
        ".= must bind variables on the left",
    )
    _want(
        heada.args[1] == App("head", (r,)),
        schema,
        "the second conjunct must take head of the uniform variable",
    )
    _want(
        taila.args[1] == App("tail", (r,)),
        schema,
        "the third conjunct must take tail of the uniform variable",
    )
    names = {r.name, b.name, s.name}
    _want(len(names) == 3, schema, "the three variables must be distinct")
    _want(
        set(xi.names()) == names,
        schema,
        "the annotation domain must be exactly the three variables",
    )
    _want(xi.lookup(b.name) == BoolType(), schema, f"{b.name} must be Bool")
    st, rt = xi.lookup(s.name), xi.lookup(r.name)
    _want(
        isinstance(st, StrType) and isinstance(rt, StrType),
        schema,
        "the split variables must be strings",
    )
    _want(
        rt.size == st.size.add(SizePoly.const(1)),
        schema,
        "the source must be one bit longer than the tail",
    )
    rstar = _star_of(rhs, schema, "the conclusion")
    ub = _atom_of(rstar.left, ATOM_U, schema, "the left conclusion component")
    us = _atom_of(rstar.right, ATOM_U, schema, "the right conclusion component")
    _want(ub.args[0] == b, schema, "the left component must claim U of the bit")
    _want(us.args[0] == s, schema, "the right component must claim U of the tail")
    _want(
        rstar.left.annotation == xi.restrict((b.name,)),
        schema,
        "the bit component must be annotated with exactly the bit",
    )
    _want(
        rstar.right.annotation == xi.restrict((s.name,)),
        schema,
        "the tail component must be annotated with exactly the tail",
    )


def _match_ax_mrg(lhs, rhs, symbols, schema):
    xi = _same_outer(lhs, rhs, schema)
    outer = _and_of(lhs, schema, "the hypothesis")
    starf = _star_of(outer.left, schema, "the first conjunct")
    ur = _atom_of(starf.left, ATOM_U, schema, "the left star component")
    ub = _atom_of(starf.right, ATOM_U, schema, "the right star component")
    cata = _atom_of(outer.right, ATOM_ESPL, schema, "the second conjunct")
    r, b = ur.args[0], ub.args[0]
    s = cata.args[0]
    _want(
        isinstance(r, Var) and isinstance(b, Var) and isinstance(s, Var),
        schema,
        "all three roles must be variables",
    )
    _want(
        cata.args[1] == App("concat", (r, b)),
        schema,
        "the second conjunct must concatenate the two uniform variables",
    )
    names = {r.name, b.name, s.name}
    _want(len(names) == 3, schema, "the three variables must be distinct")
    _want(
        set(xi.names()) == names,
        schema,
        "the annotation domain must be exactly the three variables",
    )
    _want(
        outer.right.annotation == xi and outer.left.annotation == xi.restrict(
            (r.name, b.name)
        ),
        schema,
        "the conjunct annotations must be the full and the joint-source environments",
    )
    _want(
        starf.left.annotation == xi.restrict((r.name,))
        and starf.right.annotation == xi.restrict((b.name,)),
        schema,
        "the star components must be annotated with their own variables",
    )
    _want(xi.lookup(b.name) == BoolType(), schema, f"{b.name} must be Bool")
    rt, st = xi.lookup(r.name), xi.lookup(s.name)
    _want(
        isinstance(rt, StrType) and isinstance(st, StrType),
        schema,
        "source and target must be strings",
    )
    _want(
        st.size == rt.size.add(SizePoly.const(1)),
        schema,
        "the target must be one bit longer than the source",
    )
    ua = _atom_of(rhs, ATOM_U, schema, "the conclusion")
    _want(ua.args[0] == s, schema, "the conclusion must claim U of the target")


def _match_xorpi1(lhs, rhs, symbols, schema):
    delta = _same_outer(lhs, rhs, schema)
    al = _atom_of(lhs, ATOM_ESPL, schema, "the hypothesis")
    _want(
        isinstance(al.args[0], Var) and isinstance(al.args[1], Lit),
        schema,
        "the hypothesis must pin a variable to a bit literal",
    )
    rb = _and_of(rhs, schema, "the conclusion")
    _want(isinstance(rb.left.body, Top), schema, "the first conjunct must be T")
    _want(
        env_ext(rb.left.annotation, delta),
        schema,
        "the T annotation must extend into the outer annotation",
    )
    ar = _atom_of(rb.right, ATOM_ESPL, schema, "the second conjunct")
    _want(ar == al, schema, "the pinned atom must be preserved")
    _want(
        env_ext(rb.right.annotation, delta),
        schema,
        "the atom annotation must extend into the outer annotation",
    )


def _match_xorpi2(lhs, rhs, symbols, schema):
    delta = _same_outer(lhs, rhs, schema)
    land = _and_of(lhs, schema, "the hypothesis")
    ca = _atom_of(land.left, ATOM_ESPL, schema, "the first conjunct")
    ka = _atom_of(land.right, ATOM_ESPL, schema, "the second conjunct")
    ar = _atom_of(rhs, ATOM_ESPL, schema, "the conclusion")
    c = ca.args[0]
    k = ka.args[0]
    _want(
        isinstance(c, Var) and isinstance(k, Var) and isinstance(ka.args[1], Lit),
        schema,
        "the conjuncts must pin variables (the second to a bit literal)",
    )
    _want(
        ar.args[0] == c,
        schema,
        "the conclusion must speak about the assigned variable",
    )
    out = ar.args[1]
    _want(
        isinstance(out, App)
        and out.fname == "xor"
        and out.args[0] == k
        and isinstance(out.args[1], Var),
        schema,
        "the conclusion must equate with xor of the guard and the message",
    )
    m = out.args[1]
    _want(
        len({c.name, k.name, m.name}) == 3,
        schema,
        "the three variables must be distinct",
    )
    bit = ka.args[1].bit
    want_rhs = App("not", (m,)) if bit == "1" else m
    _want(
        ca.args[1] == want_rhs,
        schema,
        "the assigned expression must match the pinned guard bit"
        f" (expected {'not of the message' if bit == '1' else 'the message'})",
    )
    for v in (c, k, m):
        _want(
            delta.lookup(v.name) == BoolType(),
            schema,
            f"{v.name} must be Bool",
        )


def _match_relabel(lhs, rhs, symbols, schema):
    _want(
        formula_ext(lhs, rhs) or formula_ext(rhs, lhs),
        schema,
        "the two sides must be annotation-orderable copies of one formula",
    )


def _flatten_nary(f: Formula, conn, schema: str, is_root: bool = True):
    if not isinstance(f.body, conn):
        return [f]
    if not is_root:
        joiner = env_join if conn is Star else env_union
        expected = joiner(f.body.left.annotation, f.body.right.annotation)
        _want(
            f.annotation == expected,
            schema,
            "inner node annotations must be the join of their children",
        )
    return _flatten_nary(f.body.left, conn, schema, False) + _flatten_nary(
        f.body.right, conn, schema, False
    )


def _match_commassoc(lhs, rhs, symbols, schema):
    _same_outer(lhs, rhs, schema)
    kinds = {type(f.body) for f in (lhs, rhs) if isinstance(f.body, (And, Star))}
    _want(len(kinds) > 0, schema, "at least one side must be a compound formula")
    _want(len(kinds) == 1, schema, "cannot mix the two conjunctions")
    conn = kinds.pop()
    left_leaves = _flatten_nary(lhs, conn, schema)
    right_leaves = _flatten_nary(rhs, conn, schema)
    if conn is Star:
        unit = mk_top(EMPTY_ENV)
        left_leaves = [f for f in left_leaves if f != unit]
        right_leaves = [f for f in right_leaves if f != unit]
    from collections import Counter

    _want(
        Counter(left_leaves) == Counter(right_leaves),
        schema,
        "both sides must carry the same leaves",
    )


def _star_unit_parts(f: Formula, schema: str, what: str) -> Formula:
    b = _star_of(f, schema, what)
    unit = mk_top(EMPTY_ENV)
    if b.right == unit:
        return b.left
    if b.left == unit:
        return b.right
    raise SchemaError(schema, f"{what} must have a T component over the empty environment")


def _match_star_unit_e(lhs, rhs, symbols, schema):
    kept = _star_unit_parts(lhs, schema, "the hypothesis")
    _want(
        rhs == Formula(kept.body, lhs.annotation),
        schema,
        "the conclusion must be the non-unit component at the outer annotation",
    )


def _match_star_unit_i(lhs, rhs, symbols, schema):
    kept = _star_unit_parts(rhs, schema, "the conclusion")
    _want(
        lhs == Formula(kept.body, rhs.annotation),
        schema,
        "the hypothesis must be the non-unit component at the outer annotation",
    )


_SCHEMA_MATCHERS: dict[str, Callable] = {
    "S0": _match_validity(ATOM_IND),
    "S1": _match_symmetry(ATOM_IND),
    "S2": _match_transitivity(ATOM_IND),
    "T0": _match_validity(ATOM_EQ),
    "T1": _match_symmetry(ATOM_EQ),
    "T2": _match_transitivity(ATOM_EQ),
    "W1": _match_w1,
    "W2": _match_w2,
    "U1": _match_u1,
    "Ax_POTP": _match_ax_potp,
    "Ax_SPL": _match_ax_spl,
    "Ax_MRG": _match_ax_mrg,
    "AuxPOTP1": _match_aux1,
    "AuxPOTP2": _match_aux2,
    "XorPi1": _match_xorpi1,
    "XorPi2": _match_xorpi2,
    "Relabel": _match_relabel,
    "CommAssoc": _match_commassoc,
    "StarUnitE": _match_star_unit_e,
    "StarUnitI": _match_star_unit_i,
}

SCHEMA_NAMES = tuple(_SCHEMA_MATCHERS)


def load_registry(path: Optional[str] = None) -> frozenset[str]:
    """Names of enabled schemas, from schemas.json or a user-supplied file."""
    if path is None:
        text = resources.files("cslcheck").joinpath("schemas.json").read_text()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    doc = json.loads(text)
    return frozenset(doc["enabled"])


def match_axiom(
    name: str,
    lhs: Formula,
    rhs: Formula,
    symbols: Optional[SymbolTable] = None,
    registry: Optional[frozenset] = None,
) -> None:
    """Check one claimed schema instance; SchemaError explains failures."""
    symbols = symbols or SymbolTable()
    registry = registry if registry is not None else load_registry()
    if name not in _SCHEMA_MATCHERS:
        raise SchemaError(name, "unknown schema")
    if name not in registry:
        raise SchemaError(name, "schema is disabled in the registry")
    wf_formula(lhs, symbols)
    wf_formula(rhs, symbols)
    _SCHEMA_MATCHERS[name](lhs, rhs, symbols, name)


# -- substitution-driven construction of instances


def _build_validity(kind):
    def build(subst, symbols):
        env = subst["env"]
        e = subst["e"]
        rhs = mk_atom(kind, (e, e), env)
        lhs = subst.get("lhs", mk_top(env))
        return lhs, rhs

    return build


def _build_symmetry(kind):
    def build(subst, symbols):
        env = subst["env"]
        return (
            mk_atom(kind, (subst["e"], subst["g"]), env),
            mk_atom(kind, (subst["g"], subst["e"]), env),
        )

    return build


def _build_transitivity(kind):
    def build(subst, symbols):
        env, e, g, h = subst["env"], subst["e"], subst["g"], subst["h"]
        lhs = mk_conj(
            mk_atom(kind, (e, g), env), mk_atom(kind, (g, h), env), env
        )
        return lhs, mk_atom(kind, (e, h), env)

    return build


def _build_w1(subst, symbols):
    env = subst["env"]
    return (
        mk_atom(ATOM_EQ, (subst["e"], subst["g"]), env),
        mk_atom(ATOM_IND, (subst["e"], subst["g"]), env),
    )


def _build_w2(subst, symbols):
    env = subst["env"]
    return (
        mk_atom(ATOM_ESPL, (subst["d"], subst["c"]), env),
        mk_atom(ATOM_EQ, (subst["d"], subst["c"]), env),
    )


def _build_u1(subst, symbols):
    env, e, g = subst["env"], subst["e"], subst["g"]
    lhs = mk_conj(
        mk_atom(ATOM_IND, (e, g), env), mk_atom(ATOM_U, (e,), env), env
    )
    return lhs, mk_atom(ATOM_U, (g,), env)


def _build_ax_potp(subst, symbols):
    env = subst["env"]
    x = Var(subst["x"]) if isinstance(subst["x"], str) else subst["x"]
    g = subst["g"]
    return (
        mk_atom(ATOM_U, (x,), env),
        mk_atom(ATOM_U, (App(g, (x,)),), env),
    )


_SCHEMA_BUILDERS: dict[str, Callable] = {
    "S0": _build_validity(ATOM_IND),
    "S1": _build_symmetry(ATOM_IND),
    "S2": _build_transitivity(ATOM_IND),
    "T0": _build_validity(ATOM_EQ),
    "T1": _build_symmetry(ATOM_EQ),
    "T2": _build_transitivity(ATOM_EQ),
    "W1": _build_w1,
    "W2": _build_w2,
    "U1": _build_u1,
    "Ax_POTP": _build_ax_potp,
}


def check_axiom_instance(
    name: str,
    subst: dict,
    symbols: Optional[SymbolTable] = None,
    registry: Optional[frozenset] = None,
) -> tuple[Formula, Formula]:
    """Instantiate a schema from metavariable bindings and check it.

    subst maps the schema's metavariables (expressions and environments) to
    concrete values; schemas without a structured builder take explicit
    "lhs"/"rhs" formulas. Returns the instantiated entailment.
    """
    symbols = symbols or SymbolTable()
    if name not in _SCHEMA_MATCHERS:
        raise SchemaError(name, "unknown schema")
    if name in _SCHEMA_BUILDERS and not ("lhs" in subst and "rhs" in subst):
        lhs, rhs = _SCHEMA_BUILDERS[name](subst, symbols)
    else:
        try:
            lhs, rhs = subst["lhs"], subst["rhs"]
        except KeyError as exc:
            raise SchemaError(name, f"substitution is missing {exc}") from exc
    match_axiom(name, lhs, rhs, symbols, registry)
    return lhs, rhs


# ---------------------------------------------------------------------------
# The entailment derivation checker


class CertError(Exception):
    """A certificate step fails; the message names the step."""

    def __init__(self, step: str, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step
        self.message = message


CORE_RULES = (
    "AP",
    "TopI",
    "BotE",
    "AndI",
    "AndE1",
    "AndE2",
    "StarI",
    "StarC",
    "StarA1",
    "StarA2",
)

# Trans composes two entailments; it is registry-gated like the schemas.
EXTENSION_RULES = ("Trans",)


def _check_core_step(step, get_premise, fail) -> None:
    lhs, rhs, rule = step.lhs, step.rhs, step.rule

    def premises(k):
        if len(step.premises) != k:
            fail(f"{rule} needs exactly {k} premise(s), got {len(step.premises)}")
        return [get_premise(sid) for sid in step.premises]

    if rule == "AP":
        premises(0)
        if lhs != rhs:
            fail("AP needs identical sides")
    elif rule == "TopI":
        premises(0)
        if not isinstance(rhs.body, Top):
            fail("TopI concludes T")
        if rhs.annotation != lhs.annotation:
            fail("TopI keeps the annotation")
    elif rule == "BotE":
        premises(0)
        if not isinstance(lhs.body, Bot):
            fail("BotE starts from F")
        if rhs.annotation != lhs.annotation:
            fail("BotE keeps the annotation")
    elif rule == "AndI":
        p1, p2 = premises(2)
        if p1.lhs != lhs or p2.lhs != lhs:
            fail("AndI premises must share the hypothesis")
        if not isinstance(rhs.body, And):
            fail("AndI concludes a conjunction")
        delta = lhs.annotation
        if rhs.annotation != delta:
            fail("AndI keeps the annotation")
        if p1.rhs.annotation != delta or p2.rhs.annotation != delta:
            fail("AndI premises must conclude at the full annotation")
        if not formula_ext(rhs.body.left, p1.rhs):
            fail("left conjunct must relabel into the first premise conclusion")
        if not formula_ext(rhs.body.right, p2.rhs):
            fail("right conjunct must relabel into the second premise conclusion")
    elif rule in ("AndE1", "AndE2"):
        (p,) = premises(1)
        if p.lhs != lhs:
            fail("the premise must share the hypothesis")
        if not isinstance(p.rhs.body, And):
            fail("the premise must conclude a conjunction")
        delta = p.rhs.annotation
        picked = p.rhs.body.left if rule == "AndE1" else p.rhs.body.right
        if rhs != Formula(picked.body, delta):
            fail("the conclusion must be the selected conjunct at the outer annotation")
    elif rule == "StarI":
        p1, p2 = premises(2)
        if not isinstance(lhs.body, Star) or not isinstance(rhs.body, Star):
            fail("StarI rewrites a separating conjunction componentwise")
        if lhs.annotation != rhs.annotation:
            fail("StarI keeps the outer annotation")
        if lhs.body.left != p1.lhs or rhs.body.left != p1.rhs:
            fail("left components must match the first premise")
        if lhs.body.right != p2.lhs or rhs.body.right != p2.rhs:
            fail("right components must match the second premise")
        for p in (p1, p2):
            if p.lhs.annotation != p.rhs.annotation and not env_ext(
                p.rhs.annotation, p.lhs.annotation
            ):
                fail("component conclusions may only shrink their annotation")
    elif rule == "StarC":
        premises(0)
        if not isinstance(lhs.body, Star) or not isinstance(rhs.body, Star):
            fail("StarC swaps a separating conjunction")
        if lhs.annotation != rhs.annotation:
            fail("StarC keeps the outer annotation")
        if rhs.body.left != lhs.body.right or rhs.body.right != lhs.body.left:
            fail("StarC must swap the two components unchanged")
    elif rule in ("StarA1", "StarA2"):
        premises(0)
        src, dst = (lhs, rhs) if rule == "StarA1" else (rhs, lhs)
        # src = (a * (b * c)), dst = ((a * b) * c), inner nodes at joins
        if not isinstance(src.body, Star) or not isinstance(src.body.right.body, Star):
            fail("reassociation needs a right-nested separating conjunction")
        if not isinstance(dst.body, Star) or not isinstance(dst.body.left.body, Star):
            fail("reassociation needs a left-nested separating conjunction")
        a, bc = src.body.left, src.body.right
        b, c = bc.body.left, bc.body.right
        ab, c2 = dst.body.left, dst.body.right
        if (ab.body.left, ab.body.right, c2) != (a, b, c):
            fail("reassociation must keep the three components in order")
        if bc.annotation != env_join(b.annotation, c.annotation):
            fail("the inner node must be annotated with the join of its children")
        if ab.annotation != env_join(a.annotation, b.annotation):
            fail("the inner node must be annotated with the join of its children")
        if lhs.annotation != rhs.annotation:
            fail("reassociation keeps the outer annotation")


def check_hilbert(
    cert: EntailmentCert,
    symbols: Optional[SymbolTable] = None,
    registry: Optional[frozenset] = None,
) -> tuple[Formula, Formula]:
    """Check every step of a derivation; returns the root conclusion."""
    symbols = symbols or SymbolTable()
    registry = registry if registry is not None else load_registry()
    seen: dict[str, object] = {}
    for step in cert.steps:
        sid = step.sid

        def fail(message, _sid=sid):
            raise CertError(_sid, message)

        if sid in seen:
            fail("duplicate step id")

        def get_premise(pid, _fail=fail):
            if pid not in seen:
                _fail(f"premise {pid} must be an earlier step")
            return seen[pid]

        for f in (step.lhs, step.rhs):
            try:
                wf_formula(f, symbols)
            except TypeCheckError as exc:
                fail(f"ill-formed formula: {exc}")
        if step.rule in CORE_RULES:
            _check_core_step(step, get_premise, fail)
        elif step.rule == "Trans":
            if "Trans" not in registry:
                fail("schema Trans is disabled in the registry")
            if len(step.premises) != 2:
                fail("Trans needs exactly 2 premises")
            p1, p2 = (get_premise(pid) for pid in step.premises)
            if p1.lhs != step.lhs:
                fail("the first premise must start from the hypothesis")
            if p1.rhs != p2.lhs:
                fail("the premises must chain through one formula")
            if p2.rhs != step.rhs:
                fail("the second premise must reach the conclusion")
        elif step.rule in _SCHEMA_MATCHERS:
            if step.premises:
                fail("schema instances take no premises")
            try:
                match_axiom(step.rule, step.lhs, step.rhs, symbols, registry)
            except SchemaError as exc:
                fail(str(exc))
        else:
            fail(f"unknown step rule {step.rule!r}")
        seen[sid] = step
    root = cert.step(cert.root)
    if root is None:
        raise CertError(cert.root, "root step is missing")
    return root.lhs, root.rhs
