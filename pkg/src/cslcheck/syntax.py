r"""Abstract syntax, grammars, and printers.

This module defines the value types everything else works on: size
polynomials, sized types, typing environments, expressions, loopless
programs, annotated formulas, Hoare triples, proof trees, and entailment
certificates. It also houses the tokenizer, the recursive-descent parsers
for the surface syntax, and the pretty printers. Printing is total and
parsing the printed form gives back an equal tree.

Surface syntax summary:

    programs   skip | r := e | P; P | if r then P else R end
               begin P end groups a sequence (needed so nested sequencing
               round-trips); function applications are f(e1, ..., ek) and
               setzero takes its size explicitly: setzero[n+1]()
    formulas   T | F | U(e) | e ~~ g | e == g | d .= c | phi /\ psi
               | phi * psi, each group optionally annotated with an
               environment: (U(k)){k: Str[n]} * (T){m: Str[n]}
    types      Bool | Str[p] with p a sum of terms like 3, n, 2n, n^2
    preamble   decl g : Str[n] -> Str[n+1] det;

Proof scripts and entailment certificates are JSON documents whose leaves
use the grammars above; see parse_proof and parse_cert.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Union


class ParseError(Exception):
    """Syntax error carrying a line/column position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Size polynomials


@dataclass(frozen=True)
class SizePoly:
    """Univariate polynomial in n with nonnegative integer coefficients.

    coeffs[i] is the coefficient of n^i. The representation is canonical:
    no trailing zero coefficients, and the zero polynomial is (0,).
    """

    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a size polynomial needs at least one coefficient")
        if any(c < 0 for c in self.coeffs):
            raise ValueError("size polynomial coefficients must be nonnegative")
        if len(self.coeffs) > 1 and self.coeffs[-1] == 0:
            raise ValueError("size polynomial not in canonical form")

    @staticmethod
    def make(coeffs) -> "SizePoly":
        """Build a polynomial, trimming trailing zeros into canonical form."""
        cs = list(coeffs) or [0]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        return SizePoly(tuple(cs))

    @staticmethod
    def const(c: int) -> "SizePoly":
        return SizePoly((c,))

    def is_zero(self) -> bool:
        return self.coeffs == (0,)

    def add(self, other: "SizePoly") -> "SizePoly":
        a, b = self.coeffs, other.coeffs
        width = max(len(a), len(b))
        return SizePoly.make(
            (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
            for i in range(width)
        )

    def try_sub(self, other: "SizePoly") -> Optional["SizePoly"]:
        """self - other, or None if any resulting coefficient would be negative."""
        a, b = self.coeffs, other.coeffs
        width = max(len(a), len(b))
        out = []
        for i in range(width):
            c = (a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)
            if c < 0:
                return None
            out.append(c)
        return SizePoly.make(out)


POLY_ZERO = SizePoly.const(0)
POLY_ONE = SizePoly.const(1)
POLY_N = SizePoly((0, 1))


def poly_eval(p: SizePoly, n: int) -> int:
    """Evaluate p at the security parameter n >= 1."""
    if n < 1:
        raise ValueError(f"security parameter must be >= 1, got {n}")
    total = 0
    for c in reversed(p.coeffs):
        total = total * n + c
    return total


def poly_to_text(p: SizePoly) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for i in range(len(p.coeffs) - 1, -1, -1):
        c = p.coeffs[i]
        if c == 0:
            continue
        if i == 0:
            parts.append(str(c))
        else:
            head = "" if c == 1 else str(c)
            exp = "n" if i == 1 else f"n^{i}"
            parts.append(head + exp)
    return "+".join(parts)


# ---------------------------------------------------------------------------
# Types and environments


@dataclass(frozen=True)
class StrType:
    size: SizePoly


@dataclass(frozen=True)
class BoolType:
    pass


Type = Union[StrType, BoolType]
BOOL = BoolType()


def type_to_text(t: Type) -> str:
    if isinstance(t, BoolType):
        return "Bool"
    return f"Str[{poly_to_text(t.size)}]"


@dataclass(frozen=True)
class Env:
    """Finite map from variable names to types, kept sorted by name."""

    bindings: tuple[tuple[str, Type], ...]

    def __post_init__(self):
        names = [name for name, _ in self.bindings]
        if names != sorted(names):
            raise ValueError("environment bindings must be sorted by name")
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable in environment")

    @staticmethod
    def make(mapping) -> "Env":
        items = mapping.items() if isinstance(mapping, dict) else mapping
        return Env(tuple(sorted(items, key=lambda kv: kv[0])))

    def lookup(self, name: str) -> Optional[Type]:
        for k, t in self.bindings:
            if k == name:
                return t
        return None

    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.bindings)

    def items(self) -> tuple[tuple[str, Type], ...]:
        return self.bindings

    def restrict(self, names) -> "Env":
        keep = set(names)
        return Env(tuple((k, t) for k, t in self.bindings if k in keep))

    def remove(self, name: str) -> "Env":
        return Env(tuple((k, t) for k, t in self.bindings if k != name))

    def __contains__(self, name: str) -> bool:
        return self.lookup(name) is not None

    def __len__(self) -> int:
        return len(self.bindings)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names())


EMPTY_ENV = Env(())


def env_to_text(env: Env) -> str:
    inner = ", ".join(f"{k}: {type_to_text(t)}" for k, t in env.items())
    return "{" + inner + "}"


# ---------------------------------------------------------------------------
# Function symbols

DET = "det"
RND = "rnd"

# Size-indexed built-in families; their signatures are resolved against
# argument types by the type checker rather than stored here.
BUILTIN_NAMES = frozenset({"rnd", "head", "tail", "xor", "concat", "setzero", "not"})


@dataclass(frozen=True)
class FuncSym:
    """A declared function symbol with a concrete signature.

    impl, when present, is a per-n evaluator on value tuples (deterministic
    symbols) and is excluded from equality so that stub binding does not
    change syntactic identity of expressions referring to the symbol.
    """

    name: str
    arg_types: tuple[Type, ...]
    result_type: Type
    kind: str  # DET or RND
    impl: Optional[Callable] = field(default=None, compare=False)

    def with_impl(self, impl: Callable) -> "FuncSym":
        return FuncSym(self.name, self.arg_types, self.result_type, self.kind, impl)


class SymbolTable:
    """Declared (non-built-in) function symbols, by name."""

    def __init__(self, syms: Optional[dict[str, FuncSym]] = None):
        self.syms: dict[str, FuncSym] = dict(syms or {})

    def declare(self, sym: FuncSym) -> None:
        if sym.name in BUILTIN_NAMES:
            raise ValueError(f"cannot redeclare built-in symbol {sym.name}")
        if sym.name in self.syms and self.syms[sym.name] != sym:
            raise ValueError(f"conflicting declarations for symbol {sym.name}")
        self.syms[sym.name] = sym

    def lookup(self, name: str) -> Optional[FuncSym]:
        return self.syms.get(name)

    def known(self, name: str) -> bool:
        return name in BUILTIN_NAMES or name in self.syms

    def copy(self) -> "SymbolTable":
        return SymbolTable(self.syms)

    def bind(self, name: str, impl: Callable) -> "SymbolTable":
        """Return a copy with the named symbol's evaluator set."""
        if name not in self.syms:
            raise KeyError(f"unknown symbol {name}")
        out = self.copy()
        out.syms[name] = self.syms[name].with_impl(impl)
        return out


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    """A boolean bit literal, '0' or '1'."""

    bit: str

    def __post_init__(self):
        if self.bit not in ("0", "1"):
            raise ValueError(f"bit literal must be 0 or 1, got {self.bit}")


@dataclass(frozen=True)
class App:
    """Application of a named function symbol.

    size_args carries explicit size annotations from the surface syntax
    (setzero requires one; the other built-ins normally infer theirs).
    """

    fname: str
    args: tuple["Expr", ...]
    size_args: tuple[SizePoly, ...] = ()


Expr = Union[Var, Lit, App]


def expr_to_text(e: Expr) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Lit):
        return e.bit
    sizes = ""
    if e.size_args:
        sizes = "[" + ", ".join(poly_to_text(p) for p in e.size_args) + "]"
    return f"{e.fname}{sizes}(" + ", ".join(expr_to_text(a) for a in e.args) + ")"


# ---------------------------------------------------------------------------
# Programs


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    target: str
    rhs: Expr


@dataclass(frozen=True)
class Seq:
    first: "Program"
    second: "Program"


@dataclass(frozen=True)
class If:
    guard: str  # grammar restricts guards to bare variables
    then_branch: "Program"
    else_branch: "Program"


Program = Union[Skip, Assign, Seq, If]

SKIP = Skip()


def program_to_text(p: Program) -> str:
    if isinstance(p, Skip):
        return "skip"
    if isinstance(p, Assign):
        return f"{p.target} := {expr_to_text(p.rhs)}"
    if isinstance(p, Seq):
        first = program_to_text(p.first)
        if isinstance(p.first, Seq):
            first = f"begin {first} end"
        return f"{first}; {program_to_text(p.second)}"
    return (
        f"if {p.guard} then {program_to_text(p.then_branch)}"
        f" else {program_to_text(p.else_branch)} end"
    )


# ---------------------------------------------------------------------------
# Formulas

ATOM_U = "U"
ATOM_IND = "Ind"
ATOM_EQ = "Eq"
ATOM_ESPL = "ESpl"

ATOM_OPS = {ATOM_IND: "~~", ATOM_EQ: "==", ATOM_ESPL: ".="}


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Atom:
    kind: str  # ATOM_U | ATOM_IND | ATOM_EQ | ATOM_ESPL
    args: tuple[Expr, ...]

    def __post_init__(self):
        want = 1 if self.kind == ATOM_U else 2
        if self.kind not in (ATOM_U, ATOM_IND, ATOM_EQ, ATOM_ESPL):
            raise ValueError(f"unknown atom kind {self.kind}")
        if len(self.args) != want:
            raise ValueError(f"{self.kind} atom takes {want} operand(s)")


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Star:
    left: "Formula"
    right: "Formula"


Body = Union[Top, Bot, Atom, And, Star]


@dataclass(frozen=True)
class Formula:
    """A formula body together with its environment annotation."""

    body: Body
    annotation: Env

    def with_annotation(self, env: Env) -> "Formula":
        return Formula(self.body, env)


TOP = Top()
BOT = Bot()


def top(env: Env = EMPTY_ENV) -> Formula:
    return Formula(TOP, env)


def bot(env: Env = EMPTY_ENV) -> Formula:
    return Formula(BOT, env)


def atom(kind: str, args, env: Env) -> Formula:
    return Formula(Atom(kind, tuple(args)), env)


def conj(left: Formula, right: Formula, env: Env) -> Formula:
    return Formula(And(left, right), env)


def star(left: Formula, right: Formula, env: Env) -> Formula:
    return Formula(Star(left, right), env)


def formula_to_text(f: Formula) -> str:
    """Print with every annotation explicit, so parsing is inverse on the nose."""
    ann = env_to_text(f.annotation)
    b = f.body
    if isinstance(b, Top):
        body = "T"
    elif isinstance(b, Bot):
        body = "F"
    elif isinstance(b, Atom):
        if b.kind == ATOM_U:
            body = f"U({expr_to_text(b.args[0])})"
        else:
            op = ATOM_OPS[b.kind]
            body = f"{expr_to_text(b.args[0])} {op} {expr_to_text(b.args[1])}"
    elif isinstance(b, And):
        body = f"{formula_to_text(b.left)} /\\ {formula_to_text(b.right)}"
    else:
        body = f"{formula_to_text(b.left)} * {formula_to_text(b.right)}"
    return f"({body}){ann}"


# ---------------------------------------------------------------------------
# Triples, proof trees, certificates


@dataclass(frozen=True)
class HoareTriple:
    pre: Formula
    env: Env
    program: Program
    post: Formula


@dataclass(frozen=True)
class CertStep:
    """One step of an entailment derivation.

    Each step records its full conclusion (lhs entails rhs) plus the ids of
    the premise steps it uses, so checking is local to the step.
    """

    sid: str
    rule: str
    lhs: Formula
    rhs: Formula
    premises: tuple[str, ...] = ()


@dataclass(frozen=True)
class EntailmentCert:
    steps: tuple[CertStep, ...]
    root: str

    def step(self, sid: str) -> Optional[CertStep]:
        for s in self.steps:
            if s.sid == sid:
                return s
        return None

    def conclusion(self) -> tuple[Formula, Formula]:
        root = self.step(self.root)
        if root is None:
            raise ValueError(f"certificate root step {self.root} missing")
        return root.lhs, root.rhs


RULE_NAMES = (
    "Skip",
    "Seq",
    "Assn",
    "DAssn",
    "SRAssn",
    "SDAssn",
    "RCond",
    "Weak",
    "Const",
    "Frame",
)


@dataclass
class ProofTree:
    rule: str
    conclusion: HoareTriple
    children: tuple["ProofTree", ...] = ()
    mid: Optional[Formula] = None  # Seq witness
    pre_cert: Optional[EntailmentCert] = None  # Weak witnesses
    post_cert: Optional[EntailmentCert] = None


# ---------------------------------------------------------------------------
# Tokenizer

_PUNCT = [
    ":=",
    "->",
    "==",
    ".=",
    "~~",
    "/\\",
    "(",
    ")",
    "{",
    "}",
    "[",
    "]",
    ",",
    ";",
    ":",
    "*",
    "+",
    "^",
]


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "punct" | "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if ch == "#":  # comment to end of line
            while i < n and text[i] != "\n":
                i += 1
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, line, col))
                i, col = i + len(p), col + len(p)
                break
        else:
            if ch.isdigit():
                j = i
                while j < n and text[j].isdigit():
                    j += 1
                tokens.append(Token("int", text[i:j], line, col))
                col += j - i
                i = j
            elif ch.isalpha() or ch == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                tokens.append(Token("ident", text[i:j], line, col))
                col += j - i
                i = j
            else:
                raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str, symbols: Optional[SymbolTable] = None):
        self.tokens = tokenize(text)
        self.pos = 0
        self.symbols = symbols.copy() if symbols else SymbolTable()

    # -- token plumbing

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        if text == "":
            return tok.kind == "eof"
        return tok.text == text and tok.kind in ("punct", "ident")

    def eat(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not self.at(text):
            raise ParseError(f"expected {text!r}, got {tok.text!r}", tok.line, tok.col)
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            raise ParseError(f"expected {what}, got {tok.text!r}", tok.line, tok.col)
        return self.next()

    def fail(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)

    # -- polynomials, types, environments

    def poly(self) -> SizePoly:
        total = self.poly_term()
        while self.eat("+"):
            total = total.add(self.poly_term())
        return total

    def poly_term(self) -> SizePoly:
        tok = self.peek()
        coeff = 1
        if tok.kind == "int":
            coeff = int(self.next().text)
            if not (self.peek().kind == "ident" and self.peek().text == "n"):
                return SizePoly.const(coeff)
        if not (self.peek().kind == "ident" and self.peek().text == "n"):
            self.fail("expected a size polynomial term")
        self.next()
        power = 1
        if self.eat("^"):
            ptok = self.peek()
            if ptok.kind != "int":
                self.fail("expected an integer exponent")
            power = int(self.next().text)
        return SizePoly.make([0] * power + [coeff])

    def type_(self) -> Type:
        tok = self.expect_ident("a type")
        if tok.text == "Bool":
            return BOOL
        if tok.text == "Str":
            self.expect("[")
            p = self.poly()
            self.expect("]")
            return StrType(p)
        raise ParseError(f"expected a type, got {tok.text!r}", tok.line, tok.col)

    def env(self) -> Env:
        self.expect("{")
        bindings = []
        if not self.at("}"):
            while True:
                name = self.expect_ident("a variable name").text
                self.expect(":")
                bindings.append((name, self.type_()))
                if not self.eat(","):
                    break
        self.expect("}")
        try:
            return Env.make(bindings)
        except ValueError as exc:
            self.fail(str(exc))

    # -- declarations

    def decls(self) -> None:
        while self.at("decl"):
            self.next()
            name_tok = self.expect_ident("a symbol name")
            if name_tok.text in BUILTIN_NAMES:
                raise ParseError(
                    f"cannot redeclare built-in symbol {name_tok.text}",
                    name_tok.line,
                    name_tok.col,
                )
            self.expect(":")
            arg_types = []
            if not self.at("->"):
                while True:
                    arg_types.append(self.type_())
                    if not self.eat(","):
                        break
            self.expect("->")
            result = self.type_()
            kind_tok = self.expect_ident("det or rnd")
            if kind_tok.text not in (DET, RND):
                raise ParseError(
                    f"expected det or rnd, got {kind_tok.text!r}",
                    kind_tok.line,
                    kind_tok.col,
                )
            self.expect(";")
            try:
                self.symbols.declare(
                    FuncSym(name_tok.text, tuple(arg_types), result, kind_tok.text)
                )
            except ValueError as exc:
                raise ParseError(str(exc), name_tok.line, name_tok.col) from exc

    # -- expressions

    def expr(self) -> Expr:
        tok = self.peek()
        if tok.kind == "int":
            if tok.text in ("0", "1"):
                self.next()
                return Lit(tok.text)
            self.fail(f"unexpected integer {tok.text!r} in expression")
        name_tok = self.expect_ident("an expression")
        name = name_tok.text
        size_args: tuple[SizePoly, ...] = ()
        if self.at("["):
            self.next()
            sizes = [self.poly()]
            while self.eat(","):
                sizes.append(self.poly())
            self.expect("]")
            size_args = tuple(sizes)
        if self.at("(") or size_args:
            if not self.symbols.known(name):
                raise ParseError(
                    f"unknown function symbol {name}", name_tok.line, name_tok.col
                )
            self.expect("(")
            args = []
            if not self.at(")"):
                while True:
                    args.append(self.expr())
                    if not self.eat(","):
                        break
            self.expect(")")
            return App(name, tuple(args), size_args)
        return Var(name)

    # -- programs

    def program(self) -> Program:
        stmts = [self.statement()]
        while self.eat(";"):
            stmts.append(self.statement())
        out = stmts[-1]
        for s in reversed(stmts[:-1]):
            out = Seq(s, out)
        return out

    def statement(self) -> Program:
        tok = self.peek()
        if self.eat("skip"):
            return SKIP
        if self.eat("begin"):
            body = self.program()
            self.expect("end")
            return body
        if self.eat("if"):
            guard_tok = self.expect_ident("a guard variable")
            if self.at("("):
                raise ParseError(
                    "guard of if must be a bare variable",
                    guard_tok.line,
                    guard_tok.col,
                )
            self.expect("then")
            then_branch = self.program()
            self.expect("else")
            else_branch = self.program()
            self.expect("end")
            return If(guard_tok.text, then_branch, else_branch)
        target = self.expect_ident("a statement")
        if target.text in ("then", "else", "end", "decl"):
            raise ParseError(
                f"unexpected keyword {target.text!r}", target.line, target.col
            )
        self.expect(":=")
        return Assign(target.text, self.expr())

    # -- formulas

    def formula(self) -> Formula:
        raw = self.raw_star()
        return _resolve_formula(raw, None, self)

    def raw_star(self) -> "_RawNode":
        node = self.raw_conj()
        while self.at("*"):
            self.next()
            right = self.raw_conj()
            node = _RawNode("star", left=node, right=right, ann=self.opt_ann())
        return node

    def raw_conj(self) -> "_RawNode":
        node = self.raw_primary()
        while self.at("/\\"):
            self.next()
            right = self.raw_primary()
            node = _RawNode("and", left=node, right=right, ann=self.opt_ann())
        return node

    def raw_primary(self) -> "_RawNode":
        if self.eat("("):
            inner = self.raw_star()
            self.expect(")")
            ann = self.opt_ann()
            if ann is not None:
                inner = _RawNode("group", left=inner, ann=ann)
            return inner
        if self.eat("T"):
            return _RawNode("top", ann=self.opt_ann())
        if self.eat("F"):
            return _RawNode("bot", ann=self.opt_ann())
        if self.at("U"):
            save = self.pos
            self.next()
            if self.eat("("):
                arg = self.expr()
                self.expect(")")
                return _RawNode("atom", atom=Atom(ATOM_U, (arg,)), ann=self.opt_ann())
            self.pos = save
        left = self.expr()
        for op, kind in (("==", ATOM_EQ), ("~~", ATOM_IND), (".=", ATOM_ESPL)):
            if self.eat(op):
                right = self.expr()
                return _RawNode(
                    "atom", atom=Atom(kind, (left, right)), ann=self.opt_ann()
                )
        self.fail("expected ==, ~~ or .= after expression")

    def opt_ann(self) -> Optional[Env]:
        if self.at("{"):
            return self.env()
        return None


@dataclass
class _RawNode:
    """Parse-tree node for formulas before annotation resolution."""

    kind: str  # "top" | "bot" | "atom" | "and" | "star" | "group"
    left: Optional["_RawNode"] = None
    right: Optional["_RawNode"] = None
    atom: Optional[Atom] = None
    ann: Optional[Env] = None


def _atom_fv(a: Atom) -> set[str]:
    out: set[str] = set()

    def walk(e: Expr):
        if isinstance(e, Var):
            out.add(e.name)
        elif isinstance(e, App):
            for sub in e.args:
                walk(sub)

    for arg in a.args:
        walk(arg)
    return out


def _raw_fv(node: _RawNode) -> set[str]:
    if node.kind == "atom":
        return _atom_fv(node.atom)
    if node.kind in ("and", "star", "group"):
        out = _raw_fv(node.left)
        if node.right is not None:
            out |= _raw_fv(node.right)
        return out
    return set()


def _merge_annotations(a: Env, b: Env, parser: _Parser, disjoint: bool) -> Env:
    merged: dict[str, Type] = dict(a.items())
    for name, t in b.items():
        if name in merged:
            if disjoint:
                parser.fail(f"variable {name} bound on both sides of *")
            if merged[name] != t:
                parser.fail(f"conflicting types inferred for {name}")
        else:
            merged[name] = t
    return Env.make(merged)


def _resolve_formula(
    node: _RawNode, inherited: Optional[Env], parser: _Parser
) -> Formula:
    """Attach environment annotations.

    Explicit annotations win. An un-annotated atom, T, or F inherits the
    enclosing annotation (restricted to free variables on the children of a
    *, which must be disjoint). An un-annotated compound with annotated
    children takes the union (for /\\) or disjoint join (for *) of theirs.
    """
    if node.kind == "group":
        return _resolve_formula(node.left, node.ann, parser)
    ann = node.ann if node.ann is not None else inherited
    if node.kind in ("top", "bot"):
        if ann is None:
            parser.fail("annotation omitted where required")
        return Formula(TOP if node.kind == "top" else BOT, ann)
    if node.kind == "atom":
        if ann is None:
            parser.fail("annotation omitted where required")
        return Formula(node.atom, ann)
    star_node = node.kind == "star"
    child_inherit_left = child_inherit_right = ann
    if star_node and ann is not None:
        # children of * must have disjoint domains, so an inherited
        # annotation is cut down to each child's free variables
        child_inherit_left = ann.restrict(_raw_fv(node.left))
        child_inherit_right = ann.restrict(_raw_fv(node.right))
    left = _resolve_formula(node.left, child_inherit_left, parser)
    right = _resolve_formula(node.right, child_inherit_right, parser)
    if ann is None:
        ann = _merge_annotations(
            left.annotation, right.annotation, parser, disjoint=star_node
        )
    ctor = Star if star_node else And
    return Formula(ctor(left, right), ann)


# ---------------------------------------------------------------------------
# Parser entry points


def parse_program(text: str, symbols: Optional[SymbolTable] = None) -> Program:
    """Parse a program, allowing an optional decl preamble."""
    return parse_program_with_decls(text, symbols)[1]


def parse_program_with_decls(
    text: str, symbols: Optional[SymbolTable] = None
) -> tuple[SymbolTable, Program]:
    p = _Parser(text, symbols)
    p.decls()
    prog = p.program()
    p.expect("")  # eof
    return p.symbols, prog


def parse_formula(text: str, symbols: Optional[SymbolTable] = None) -> Formula:
    """Parse an annotated formula, allowing an optional decl preamble."""
    p = _Parser(text, symbols)
    p.decls()
    f = p.formula()
    p.expect("")
    return f


def parse_expr(text: str, symbols: Optional[SymbolTable] = None) -> Expr:
    p = _Parser(text, symbols)
    e = p.expr()
    p.expect("")
    return e


def parse_type(text: str) -> Type:
    p = _Parser(text)
    t = p.type_()
    p.expect("")
    return t


def parse_env(text: str) -> Env:
    p = _Parser(text)
    env = p.env()
    p.expect("")
    return env


def parse_poly(text: str) -> SizePoly:
    p = _Parser(text)
    poly = p.poly()
    p.expect("")
    return poly


def parse_decls(text: str, symbols: Optional[SymbolTable] = None) -> SymbolTable:
    p = _Parser(text, symbols)
    p.decls()
    p.expect("")
    return p.symbols


# ---------------------------------------------------------------------------
# Proof scripts and certificates (JSON)


def _cert_from_obj(obj: dict, symbols: SymbolTable, path: str) -> EntailmentCert:
    steps = []
    if not isinstance(obj, dict) or "steps" not in obj or "root" not in obj:
        raise ValueError(f"{path}: certificate needs 'steps' and 'root'")
    for i, raw in enumerate(obj["steps"]):
        where = f"{path}.steps[{i}]"
        for key in ("id", "rule", "lhs", "rhs"):
            if key not in raw:
                raise ValueError(f"{where}: missing field {key!r}")
        steps.append(
            CertStep(
                sid=raw["id"],
                rule=raw["rule"],
                lhs=parse_formula(raw["lhs"], symbols),
                rhs=parse_formula(raw["rhs"], symbols),
                premises=tuple(raw.get("premises", ())),
            )
        )
    return EntailmentCert(tuple(steps), obj["root"])


def _cert_to_obj(cert: EntailmentCert) -> dict:
    return {
        "steps": [
            {
                "id": s.sid,
                "rule": s.rule,
                "lhs": formula_to_text(s.lhs),
                "rhs": formula_to_text(s.rhs),
                "premises": list(s.premises),
            }
            for s in cert.steps
        ],
        "root": cert.root,
    }


def _tree_from_obj(obj: dict, symbols: SymbolTable, path: str) -> ProofTree:
    if not isinstance(obj, dict):
        raise ValueError(f"{path}: proof node must be an object")
    for key in ("rule", "env", "pre", "program", "post"):
        if key not in obj:
            raise ValueError(f"{path}: missing field {key!r}")
    rule = obj["rule"]
    if rule not in RULE_NAMES:
        raise ValueError(f"{path}: unknown rule name {rule!r}")
    env = parse_env(obj["env"])
    conclusion = HoareTriple(
        pre=parse_formula(obj["pre"], symbols),
        env=env,
        program=parse_program(obj["program"], symbols),
        post=parse_formula(obj["post"], symbols),
    )
    children = tuple(
        _tree_from_obj(c, symbols, f"{path}.children[{i}]")
        for i, c in enumerate(obj.get("children", ()))
    )
    mid = None
    if "mid" in obj:
        mid = parse_formula(obj["mid"], symbols)
    elif rule == "Seq":
        raise ValueError(f"{path}: Seq node needs a 'mid' witness formula")
    pre_cert = post_cert = None
    if rule == "Weak":
        if "pre_cert" not in obj or "post_cert" not in obj:
            raise ValueError(f"{path}: Weak node needs pre_cert and post_cert")
        pre_cert = _cert_from_obj(obj["pre_cert"], symbols, f"{path}.pre_cert")
        post_cert = _cert_from_obj(obj["post_cert"], symbols, f"{path}.post_cert")
    return ProofTree(rule, conclusion, children, mid, pre_cert, post_cert)


def parse_proof_with_decls(
    text: str, symbols: Optional[SymbolTable] = None
) -> tuple[SymbolTable, ProofTree]:
    """Parse a JSON proof script into its symbol table and ProofTree.

    The document is {"decls": [...], "root": node}; every node carries
    rule, env, pre, program, post, optional witnesses, and children.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"proof script is not valid JSON: {exc}") from exc
    table = symbols.copy() if symbols else SymbolTable()
    for decl in doc.get("decls", ()):
        table = parse_decls(decl, table)
    if "root" not in doc:
        raise ValueError("proof script needs a 'root' node")
    return table, _tree_from_obj(doc["root"], table, "root")


def parse_proof(text: str, symbols: Optional[SymbolTable] = None) -> ProofTree:
    return parse_proof_with_decls(text, symbols)[1]


def _tree_to_obj(t: ProofTree) -> dict:
    obj = {
        "rule": t.rule,
        "env": env_to_text(t.conclusion.env),
        "pre": formula_to_text(t.conclusion.pre),
        "program": program_to_text(t.conclusion.program),
        "post": formula_to_text(t.conclusion.post),
    }
    if t.mid is not None:
        obj["mid"] = formula_to_text(t.mid)
    if t.pre_cert is not None:
        obj["pre_cert"] = _cert_to_obj(t.pre_cert)
    if t.post_cert is not None:
        obj["post_cert"] = _cert_to_obj(t.post_cert)
    if t.children:
        obj["children"] = [_tree_to_obj(c) for c in t.children]
    return obj


def proof_to_text(t: ProofTree, decls: Optional[list[str]] = None) -> str:
    doc = {"decls": decls or [], "root": _tree_to_obj(t)}
    return json.dumps(doc, indent=2) + "\n"


def cert_to_text(cert: EntailmentCert) -> str:
    return json.dumps(_cert_to_obj(cert), indent=2) + "\n"


def parse_cert(text: str, symbols: Optional[SymbolTable] = None) -> EntailmentCert:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"certificate is not valid JSON: {exc}") from exc
    return _cert_from_obj(doc, symbols.copy() if symbols else SymbolTable(), "cert")
