"""AST node types for the specification language: types, patterns, expressions, definitions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


@dataclass(frozen=True)
class Loc:
    file: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.file} at line {self.line}:{self.col}"


NOWHERE = Loc("?", 0, 0)


# ============================================================
# TYPE EXPRESSIONS
# ============================================================


@dataclass(frozen=True)
class TypeExpr:
    pass


@dataclass(frozen=True)
class BoolType(TypeExpr):
    pass


@dataclass(frozen=True)
class NatType(TypeExpr):
    pass


@dataclass(frozen=True)
class Nat1Type(TypeExpr):
    pass


@dataclass(frozen=True)
class IntType(TypeExpr):
    pass


@dataclass(frozen=True)
class RealType(TypeExpr):
    pass


@dataclass(frozen=True)
class CharType(TypeExpr):
    pass


@dataclass(frozen=True)
class QuoteType(TypeExpr):
    tag: str


@dataclass(frozen=True)
class SeqType(TypeExpr):
    elem: TypeExpr


@dataclass(frozen=True)
class SetType(TypeExpr):
    elem: TypeExpr


@dataclass(frozen=True)
class MapType(TypeExpr):
    dom: TypeExpr
    rng: TypeExpr


@dataclass(frozen=True)
class ProductType(TypeExpr):
    items: tuple[TypeExpr, ...]  # arity >= 2


@dataclass(frozen=True)
class OptionalType(TypeExpr):
    inner: TypeExpr


@dataclass(frozen=True)
class UnionType(TypeExpr):
    members: tuple[TypeExpr, ...]  # >= 2, pairwise distinct after normalization


@dataclass(frozen=True)
class NamedType(TypeExpr):
    name: str


@dataclass(frozen=True)
class ParamType(TypeExpr):
    name: str  # stored without the leading '@'


@dataclass(frozen=True)
class RecordType(TypeExpr):
    """Body of a record type definition (``R :: f1 : T1 ...``); always reached via NamedType."""

    name: str
    fields: tuple[tuple[str, TypeExpr], ...]


BOOL = BoolType()
NAT = NatType()
NAT1 = Nat1Type()
INT = IntType()
REAL = RealType()
CHAR = CharType()

NUMERIC_TYPES = (Nat1Type, NatType, IntType, RealType)


def make_union(members: list[TypeExpr]) -> TypeExpr:
    """Flatten nested unions and drop structural duplicates; collapse singletons."""
    flat: list[TypeExpr] = []
    for m in members:
        if isinstance(m, UnionType):
            flat.extend(m.members)
        else:
            flat.append(m)
    deduped: list[TypeExpr] = []
    for m in flat:
        if m not in deduped:
            deduped.append(m)
    if len(deduped) == 1:
        return deduped[0]
    return UnionType(tuple(deduped))


# ============================================================
# PATTERNS
# ============================================================


class Pattern:
    loc: Loc


@dataclass
class PatLit(Pattern):
    value: object  # bool | int | Fraction | str (char) | quote tag wrapped below
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class PatQuote(Pattern):
    tag: str
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class PatNil(Pattern):
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class PatVar(Pattern):
    name: str
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class PatWild(Pattern):
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class PatTuple(Pattern):
    items: list[Pattern]
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class PatRecord(Pattern):
    name: str
    items: list[Pattern]
    loc: Loc = field(default=NOWHERE, compare=False)


def pattern_vars(p: Pattern) -> list[str]:
    if isinstance(p, PatVar):
        return [p.name]
    if isinstance(p, (PatTuple, PatRecord)):
        out: list[str] = []
        for item in p.items:
            out.extend(pattern_vars(item))
        return out
    return []


# ============================================================
# EXPRESSIONS
# ============================================================


class Expr:
    """Base class for expression nodes. The checker attaches ``static_type`` after checking."""

    loc: Loc
    static_type: TypeExpr | None = None


@dataclass
class Lit(Expr):
    value: bool | int | Fraction
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class CharLit(Expr):
    ch: str
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class QuoteLit(Expr):
    tag: str
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class NilLit(Expr):
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class Var(Expr):
    name: str
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class Unary(Expr):
    op: str
    operand: Expr
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class IfExpr(Expr):
    cond: Expr
    then_branch: Expr
    elif_branches: list[tuple[Expr, Expr]]
    else_branch: Expr
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class CaseClause:
    patterns: list[Pattern]
    result: Expr


@dataclass
class CasesExpr(Expr):
    scrutinee: Expr
    clauses: list[CaseClause]
    others: Expr | None
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class Bind:
    """A quantifier/let binding ``pattern : type``.

    Set binds (``x in set S``) are rewritten to type binds during checking;
    the original set expression is kept in ``source_set`` so evaluation can
    iterate the set's members instead of the whole type.
    """

    pattern: Pattern
    dtype: TypeExpr
    source_set: Expr | None = None
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class LetExpr(Expr):
    defs: list[tuple[Pattern, Expr]]
    body: Expr
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class LetBeExpr(Expr):
    binds: list[Bind]
    pred: Expr | None
    body: Expr
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class Forall(Expr):
    binds: list[Bind]
    body: Expr
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class Exists(Expr):
    binds: list[Bind]
    body: Expr
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class Apply(Expr):
    fn: Expr
    args: list[Expr]
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class FnInst(Expr):
    """Type-parameter instantiation ``f[nat]`` of a polymorphic function."""

    name: str
    type_args: list[TypeExpr]
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class SetEnum(Expr):
    items: list[Expr]
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class SetRange(Expr):
    lo: Expr
    hi: Expr
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class SetComp(Expr):
    result: Expr
    binds: list[Bind]
    pred: Expr | None
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class SeqEnum(Expr):
    items: list[Expr]
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class SeqComp(Expr):
    result: Expr
    binds: list[Bind]
    pred: Expr | None
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class MapEnum(Expr):
    pairs: list[tuple[Expr, Expr]]
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class TupleCtor(Expr):
    items: list[Expr]  # mk_(a, b, ...), arity >= 2
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class RecordCtor(Expr):
    name: str
    args: list[Expr]
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class FieldSel(Expr):
    subject: Expr
    fname: str
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class TupleSel(Expr):
    subject: Expr
    index: int  # 1-based, written .#n
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class Paren(Expr):
    inner: Expr
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class TypeJudgement(Expr):
    """``is_(e, T)`` — true iff the value of e inhabits T. Built by obligation generation."""

    subject: Expr
    dtype: TypeExpr
    loc: Loc = field(default=NOWHERE, compare=False)


def strip_parens(e: Expr) -> Expr:
    while isinstance(e, Paren):
        e = e.inner
    return e


def ast_equal(a: Expr, b: Expr) -> bool:
    """Structural equality of expressions, ignoring parentheses and locations."""
    a = strip_parens(a)
    b = strip_parens(b)
    if type(a) is not type(b):
        return False
    if isinstance(a, Lit):
        return a.value == b.value and type(a.value) is type(b.value)
    if isinstance(a, CharLit):
        return a.ch == b.ch
    if isinstance(a, QuoteLit):
        return a.tag == b.tag
    if isinstance(a, NilLit):
        return True
    if isinstance(a, Var):
        return a.name == b.name
    if isinstance(a, Unary):
        return a.op == b.op and ast_equal(a.operand, b.operand)
    if isinstance(a, Binary):
        return a.op == b.op and ast_equal(a.left, b.left) and ast_equal(a.right, b.right)
    if isinstance(a, Apply):
        return (
            len(a.args) == len(b.args)
            and ast_equal(a.fn, b.fn)
            and all(ast_equal(x, y) for x, y in zip(a.args, b.args))
        )
    if isinstance(a, FnInst):
        return a.name == b.name and a.type_args == b.type_args
    if isinstance(a, (SetEnum, SeqEnum, TupleCtor)):
        return len(a.items) == len(b.items) and all(
            ast_equal(x, y) for x, y in zip(a.items, b.items)
        )
    if isinstance(a, SetRange):
        return ast_equal(a.lo, b.lo) and ast_equal(a.hi, b.hi)
    if isinstance(a, MapEnum):
        return len(a.pairs) == len(b.pairs) and all(
            ast_equal(ka, kb) and ast_equal(va, vb)
            for (ka, va), (kb, vb) in zip(a.pairs, b.pairs)
        )
    if isinstance(a, RecordCtor):
        return (
            a.name == b.name
            and len(a.args) == len(b.args)
            and all(ast_equal(x, y) for x, y in zip(a.args, b.args))
        )
    if isinstance(a, FieldSel):
        return a.fname == b.fname and ast_equal(a.subject, b.subject)
    if isinstance(a, TupleSel):
        return a.index == b.index and ast_equal(a.subject, b.subject)
    if isinstance(a, TypeJudgement):
        return a.dtype == b.dtype and ast_equal(a.subject, b.subject)
    if isinstance(a, IfExpr):
        return (
            ast_equal(a.cond, b.cond)
            and ast_equal(a.then_branch, b.then_branch)
            and len(a.elif_branches) == len(b.elif_branches)
            and all(
                ast_equal(c1, c2) and ast_equal(e1, e2)
                for (c1, e1), (c2, e2) in zip(a.elif_branches, b.elif_branches)
            )
            and ast_equal(a.else_branch, b.else_branch)
        )
    if isinstance(a, (Forall, Exists)):
        return _binds_equal(a.binds, b.binds) and ast_equal(a.body, b.body)
    if isinstance(a, LetBeExpr):
        return (
            _binds_equal(a.binds, b.binds)
            and _opt_equal(a.pred, b.pred)
            and ast_equal(a.body, b.body)
        )
    if isinstance(a, LetExpr):
        return (
            len(a.defs) == len(b.defs)
            and all(
                _patterns_equal(p1, p2) and ast_equal(e1, e2)
                for (p1, e1), (p2, e2) in zip(a.defs, b.defs)
            )
            and ast_equal(a.body, b.body)
        )
    if isinstance(a, CasesExpr):
        return (
            ast_equal(a.scrutinee, b.scrutinee)
            and len(a.clauses) == len(b.clauses)
            and all(
                len(c1.patterns) == len(c2.patterns)
                and all(_patterns_equal(p1, p2) for p1, p2 in zip(c1.patterns, c2.patterns))
                and ast_equal(c1.result, c2.result)
                for c1, c2 in zip(a.clauses, b.clauses)
            )
            and _opt_equal(a.others, b.others)
        )
    if isinstance(a, (SetComp, SeqComp)):
        return (
            ast_equal(a.result, b.result)
            and _binds_equal(a.binds, b.binds)
            and _opt_equal(a.pred, b.pred)
        )
    raise TypeError(f"ast_equal: unhandled node {type(a).__name__}")


def _opt_equal(a: Expr | None, b: Expr | None) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return ast_equal(a, b)


def _binds_equal(xs: list[Bind], ys: list[Bind]) -> bool:
    if len(xs) != len(ys):
        return False
    for x, y in zip(xs, ys):
        if not _patterns_equal(x.pattern, y.pattern) or x.dtype != y.dtype:
            return False
        if not _opt_equal(x.source_set, y.source_set):
            return False
    return True


def _patterns_equal(a: Pattern, b: Pattern) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, PatLit):
        return a.value == b.value
    if isinstance(a, PatQuote):
        return a.tag == b.tag
    if isinstance(a, PatVar):
        return a.name == b.name
    if isinstance(a, (PatWild, PatNil)):
        return True
    if isinstance(a, (PatTuple, PatRecord)):
        if isinstance(a, PatRecord) and a.name != b.name:
            return False
        return len(a.items) == len(b.items) and all(
            _patterns_equal(x, y) for x, y in zip(a.items, b.items)
        )
    raise TypeError(f"unhandled pattern {type(a).__name__}")


# ============================================================
# DEFINITIONS
# ============================================================


@dataclass
class TypeDef:
    name: str
    body: TypeExpr  # RecordType for record definitions
    inv_pattern: Pattern | None = None
    inv_expr: Expr | None = None
    loc: Loc = field(default=NOWHERE, compare=False)

    @property
    def has_invariant(self) -> bool:
        return self.inv_expr is not None


@dataclass
class FunctionDef:
    name: str
    type_params: list[str]  # without '@'
    sig_type: TypeExpr  # left of '->' as written (product for multi-arg)
    return_type: TypeExpr
    param_patterns: list[Pattern]
    body: Expr
    pre: Expr | None = None
    post: Expr | None = None
    loc: Loc = field(default=NOWHERE, compare=False)
    # filled by the checker:
    param_types: list[TypeExpr] = field(default_factory=list, compare=False)
    references_state: bool = field(default=False, compare=False)
    derived_from: str | None = field(default=None, compare=False)  # pre_/post_/inv_ origin


@dataclass
class StateDef:
    name: str
    fields: list[tuple[str, TypeExpr]]
    inv_pattern: Pattern | None = None
    inv_expr: Expr | None = None
    init_pattern: Pattern | None = None
    init_expr: Expr | None = None
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class ValueDef:
    name: str
    dtype: TypeExpr | None
    expr: Expr
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class QuickCheckAnnotation:
    function_name: str
    param_name: str  # without '@'
    candidate_types: list[TypeExpr]
    loc: Loc = field(default=NOWHERE, compare=False)


@dataclass
class SpecModule:
    name: str = "DEFAULT"
    type_defs: list[TypeDef] = field(default_factory=list)
    function_defs: list[FunctionDef] = field(default_factory=list)
    state_def: StateDef | None = None
    value_defs: list[ValueDef] = field(default_factory=list)
    annotations: list[QuickCheckAnnotation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    checked: bool = False

    def type_def(self, name: str) -> TypeDef | None:
        for td in self.type_defs:
            if td.name == name:
                return td
        return None

    def function_def(self, name: str) -> FunctionDef | None:
        for fd in self.function_defs:
            if fd.name == name:
                return fd
        return None

    def value_def(self, name: str) -> ValueDef | None:
        for vd in self.value_defs:
            if vd.name == name:
                return vd
        return None
