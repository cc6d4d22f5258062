"""Pretty-printing of types and expressions.

Types render in two modes:
  * source  -- as written in specs: ``seq of nat``, ``seq of (@T)``
  * display -- fully bracketed element positions: ``set of (nat)``, used when
    reporting type-parameter assignments in counterexamples
"""

from __future__ import annotations

from fractions import Fraction

from .ast import (
    Apply, Binary, Bind, BoolType, CasesExpr, CharLit, CharType, Exists, Expr,
    FieldSel, FnInst, Forall, IfExpr, IntType, LetBeExpr, LetExpr, Lit,
    MapEnum, MapType, Nat1Type, NatType, NamedType, NilLit, OptionalType,
    ParamType, Paren, PatLit, PatNil, PatQuote, PatRecord, PatTuple, PatVar,
    PatWild, Pattern, ProductType, QuoteLit, QuoteType, RealType, RecordCtor,
    RecordType, SeqComp, SeqEnum, SeqType, SetComp, SetEnum, SetRange,
    SetType, TupleCtor, TupleSel, TypeExpr, TypeJudgement, Unary, UnionType,
    Var,
)

# ---- types ----

_SIMPLE = {
    BoolType: "bool", NatType: "nat", Nat1Type: "nat1",
    IntType: "int", RealType: "real", CharType: "char",
}

# grammar levels: union(1) < product(2) < 'x of'(3) < atom(4)


def _type_level(t: TypeExpr) -> int:
    if isinstance(t, UnionType):
        return 1
    if isinstance(t, ProductType):
        return 2
    if isinstance(t, (SeqType, SetType, MapType)):
        return 3
    return 4


def render_type(t: TypeExpr, mode: str = "source") -> str:
    return _rt(t, mode, 1)


def _rt(t: TypeExpr, mode: str, min_level: int) -> str:
    s = _rt_bare(t, mode)
    if _type_level(t) < min_level:
        return f"({s})"
    return s


def _of_elem(t: TypeExpr, mode: str) -> str:
    if mode == "display":
        return f"({_rt_bare(t, mode)})"
    # source style: basic/named/quote elements stay bare, anything else
    # (including type parameters, matching tool output) is bracketed
    if type(t) in _SIMPLE or isinstance(t, (NamedType, QuoteType)):
        return _rt_bare(t, mode)
    return f"({_rt_bare(t, mode)})"


def _rt_bare(t: TypeExpr, mode: str) -> str:
    simple = _SIMPLE.get(type(t))
    if simple is not None:
        return simple
    if isinstance(t, QuoteType):
        return f"<{t.tag}>"
    if isinstance(t, NamedType):
        return t.name
    if isinstance(t, RecordType):
        return t.name
    if isinstance(t, ParamType):
        return f"@{t.name}"
    if isinstance(t, SeqType):
        return f"seq of {_of_elem(t.elem, mode)}"
    if isinstance(t, SetType):
        return f"set of {_of_elem(t.elem, mode)}"
    if isinstance(t, MapType):
        return f"map {_of_elem(t.dom, mode)} to {_of_elem(t.rng, mode)}"
    if isinstance(t, ProductType):
        if not t.items:
            return "()"
        return " * ".join(_rt(x, mode, 3) for x in t.items)
    if isinstance(t, UnionType):
        return " | ".join(_rt(x, mode, 2) for x in t.members)
    if isinstance(t, OptionalType):
        return f"[{_rt_bare(t.inner, mode)}]"
    raise TypeError(f"render_type: unhandled {type(t).__name__}")


# ---- expressions ----

# precedence: 0 block-level (if/let/cases/quantifier), 1 <=>, 2 =>, 3 or,
# 4 and, 5 not, 6 relational, 7 additive, 8 multiplicative, 9 unary, 10 atom

_BINARY_PREC = {
    "<=>": 1, "=>": 2, "or": 3, "and": 4,
    "=": 6, "<>": 6, "<": 6, "<=": 6, ">": 6, ">=": 6,
    "in set": 6, "not in set": 6, "subset": 6, "psubset": 6,
    "+": 7, "-": 7, "^": 7, "\\": 7, "union": 7, "munion": 7, "++": 7,
    "*": 8, "/": 8, "div": 8, "mod": 8, "inter": 8,
}
_RIGHT_ASSOC = {"<=>", "=>"}


def format_rational(x: Fraction) -> str:
    """Exact decimal when the denominator divides a power of ten, else p/q."""
    sign = "-" if x < 0 else ""
    x = abs(x)
    num, den = x.numerator, x.denominator
    if den == 1:
        return f"{sign}{num}"
    d = den
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d == 1:
        k = max(twos, fives)
        scaled = num * 10**k // den
        digits = str(scaled).rjust(k + 1, "0")
        return f"{sign}{digits[:-k]}.{digits[-k:]}"
    return f"{sign}{num}/{den}"


def render_pattern(p: Pattern) -> str:
    if isinstance(p, PatVar):
        return p.name
    if isinstance(p, PatWild):
        return "-"
    if isinstance(p, PatNil):
        return "nil"
    if isinstance(p, PatQuote):
        return f"<{p.tag}>"
    if isinstance(p, PatLit):
        v = p.value
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, Fraction):
            return format_rational(v)
        if isinstance(v, str):
            return f"'{v}'"
        return str(v)
    if isinstance(p, PatTuple):
        return "mk_(" + ", ".join(render_pattern(x) for x in p.items) + ")"
    if isinstance(p, PatRecord):
        return f"mk_{p.name}(" + ", ".join(render_pattern(x) for x in p.items) + ")"
    raise TypeError(f"render_pattern: unhandled {type(p).__name__}")


def render_bind(b: Bind) -> str:
    if b.source_set is not None:
        return f"{render_pattern(b.pattern)} in set {render_expr(b.source_set)}"
    return f"{render_pattern(b.pattern)}:{render_type(b.dtype)}"


def render_binds(binds: list[Bind]) -> str:
    return ", ".join(render_bind(b) for b in binds)


def render_expr(e: Expr) -> str:
    return _re(e, 0)


def _re(e: Expr, min_prec: int) -> str:
    if isinstance(e, Paren):
        return f"({_re(e.inner, 0)})"
    s, prec = _re_bare(e)
    if prec < min_prec:
        return f"({s})"
    return s


def _re_bare(e: Expr) -> tuple[str, int]:
    if isinstance(e, Lit):
        v = e.value
        if isinstance(v, bool):
            return ("true" if v else "false"), 10
        if isinstance(v, Fraction):
            return format_rational(v), 10
        return str(v), 10
    if isinstance(e, CharLit):
        return f"'{e.ch}'", 10
    if isinstance(e, QuoteLit):
        return f"<{e.tag}>", 10
    if isinstance(e, NilLit):
        return "nil", 10
    if isinstance(e, Var):
        return e.name, 10
    if isinstance(e, Unary):
        if e.op == "not":
            return f"not {_re(e.operand, 5)}", 5
        if e.op == "-":
            return f"-{_re(e.operand, 9)}", 9
        return f"{e.op} {_re(e.operand, 9)}", 9
    if isinstance(e, Binary):
        p = _BINARY_PREC[e.op]
        if e.op in _RIGHT_ASSOC:
            lhs, rhs = _re(e.left, p + 1), _re(e.right, p)
        else:
            lhs, rhs = _re(e.left, p), _re(e.right, p + 1)
        return f"{lhs} {e.op} {rhs}", p
    if isinstance(e, Apply):
        args = ", ".join(_re(a, 0) for a in e.args)
        return f"{_re(e.fn, 10)}({args})", 10
    if isinstance(e, FnInst):
        targs = ", ".join(render_type(t) for t in e.type_args)
        return f"{e.name}[{targs}]", 10
    if isinstance(e, FieldSel):
        return f"{_re(e.subject, 10)}.{e.fname}", 10
    if isinstance(e, TupleSel):
        return f"{_re(e.subject, 10)}.#{e.index}", 10
    if isinstance(e, TupleCtor):
        return "mk_(" + ", ".join(_re(x, 0) for x in e.items) + ")", 10
    if isinstance(e, RecordCtor):
        return f"mk_{e.name}(" + ", ".join(_re(x, 0) for x in e.args) + ")", 10
    if isinstance(e, SetEnum):
        return "{" + ", ".join(_re(x, 0) for x in e.items) + "}", 10
    if isinstance(e, SeqEnum):
        return "[" + ", ".join(_re(x, 0) for x in e.items) + "]", 10
    if isinstance(e, SetRange):
        return "{" + _re(e.lo, 0) + ", ..., " + _re(e.hi, 0) + "}", 10
    if isinstance(e, MapEnum):
        if not e.pairs:
            return "{|->}", 10
        body = ", ".join(f"{_re(k, 0)} |-> {_re(v, 0)}" for k, v in e.pairs)
        return "{" + body + "}", 10
    if isinstance(e, SetComp):
        s = "{" + _re(e.result, 0) + " | " + render_binds(e.binds)
        if e.pred is not None:
            s += " & " + _re(e.pred, 0)
        return s + "}", 10
    if isinstance(e, SeqComp):
        s = "[" + _re(e.result, 0) + " | " + render_binds(e.binds)
        if e.pred is not None:
            s += " & " + _re(e.pred, 0)
        return s + "]", 10
    if isinstance(e, IfExpr):
        parts = [f"if {_re(e.cond, 0)} then {_re(e.then_branch, 0)}"]
        for c, r in e.elif_branches:
            parts.append(f"elseif {_re(c, 0)} then {_re(r, 0)}")
        parts.append(f"else {_re(e.else_branch, 0)}")
        return " ".join(parts), 0
    if isinstance(e, LetExpr):
        defs = ", ".join(f"{render_pattern(p)} = {_re(x, 0)}" for p, x in e.defs)
        return f"let {defs} in {_re(e.body, 0)}", 0
    if isinstance(e, LetBeExpr):
        s = f"let {render_binds(e.binds)}"
        if e.pred is not None:
            s += f" be st {_re(e.pred, 0)}"
        return f"{s} in {_re(e.body, 0)}", 0
    if isinstance(e, Forall):
        return f"forall {render_binds(e.binds)} & {_re(e.body, 0)}", 0
    if isinstance(e, Exists):
        return f"exists {render_binds(e.binds)} & {_re(e.body, 0)}", 0
    if isinstance(e, CasesExpr):
        clauses = []
        for c in e.clauses:
            pats = ", ".join(render_pattern(p) for p in c.patterns)
            clauses.append(f"{pats} -> {_re(c.result, 0)}")
        if e.others is not None:
            clauses.append(f"others -> {_re(e.others, 0)}")
        return f"cases {_re(e.scrutinee, 0)}: " + ", ".join(clauses) + " end", 0
    if isinstance(e, TypeJudgement):
        return f"is_({_re(e.subject, 0)}, {render_type(e.dtype)})", 10
    raise TypeError(f"render_expr: unhandled {type(e).__name__}")


def render_obligation_expr(e: Expr, indent: int = 0) -> str:
    """Multi-line layout used for proof obligation listings.

    Each leading quantifier opens ``(forall binds &`` on its own line with the
    body indented two further spaces; everything else renders on one line.
    """
    pad = " " * indent
    if isinstance(e, Paren):
        inner = e.inner
        if isinstance(inner, (Forall, Exists)):
            return render_obligation_expr(inner, indent)
        return pad + f"({render_expr(inner)})"
    if isinstance(e, (Forall, Exists)):
        kw = "forall" if isinstance(e, Forall) else "exists"
        head = f"{pad}({kw} {render_binds(e.binds)} &"
        body = render_obligation_expr(e.body, indent + 2)
        return f"{head}\n{body})"
    return pad + render_expr(e)
