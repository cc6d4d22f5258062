"""Tree-walking evaluator with quantifier instrumentation and cancellation."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .ast import (
    Apply, Binary, Bind, CasesExpr, CharLit, Exists, Expr, FieldSel, FnInst,
    Forall, FunctionDef, IfExpr, LetBeExpr, LetExpr, Lit, Loc, MapEnum,
    NilLit, NOWHERE, Paren, PatLit, PatNil, PatQuote, PatRecord, PatTuple,
    PatVar, PatWild, Pattern, QuoteLit, RecordCtor, RecordType, SeqComp,
    SeqEnum, SetComp, SetEnum, SetRange, SpecModule, TupleCtor, TupleSel,
    TypeDef, TypeExpr, TypeJudgement, Unary, Var, strip_parens,
)
from .render import render_bind, render_expr, render_pattern, render_type
from .values import (
    FALSE, NIL, TRUE, BoolVal, CharVal, IntVal, MapVal, NilVal, QuoteVal,
    RatVal, RecordVal, SeqVal, SetVal, TupleVal, Value, as_fraction,
    enumerate_all, is_number, mk_map, mk_number, mk_set, type_membership,
    value_key,
)

E_SEQ_APPLY = 4064
E_MAP_APPLY = 4065
E_DIV_ZERO = 4066
E_HD_TL = 4067
E_CASES = 4068
E_PRE = 4069
E_LETBE = 4070
E_INV = 4071
E_TYPE = 4072
E_INFINITE = 4073
E_DEPTH = 4074

STEP_BUDGET = 10**7
PRODUCT_CAP = 10**6
INNER_ENUM_LIMIT = 10_000
MAX_CALL_DEPTH = 300


class VdmRuntimeError(Exception):
    def __init__(self, code: int, message: str, loc: Loc):
        super().__init__(f"Error {code}: {message} in {loc}")
        self.code = code
        self.message = message
        self.loc = loc


class InfiniteTypeError(VdmRuntimeError):
    """A quantifier/let-be ranged over a type we cannot enumerate. Treated as
    "unknown" rather than as a counterexample."""

    def __init__(self, message: str, loc: Loc):
        super().__init__(E_INFINITE, message, loc)


class EvalCancelled(Exception):
    pass


@dataclass
class CancelToken:
    deadline: float | None = None  # absolute time.monotonic() limit
    cancelled: bool = False

    @classmethod
    def after(cls, seconds: float | None) -> CancelToken:
        if seconds is None:
            return cls(None)
        return cls(time.monotonic() + seconds)

    def expired(self) -> bool:
        return self.cancelled or (self.deadline is not None and time.monotonic() > self.deadline)


@dataclass
class Ok:
    value: Value


@dataclass
class EvalError:
    code: int
    message: str
    loc: Loc


@dataclass
class Cancelled:
    pass


Outcome = object  # Ok | EvalError | Cancelled


@dataclass
class Context:
    mod: SpecModule
    token: CancelToken = field(default_factory=CancelToken)
    frames: list[dict[str, Value]] = field(default_factory=list)
    steps: int = 0
    depth: int = 0
    globals_cache: dict[str, Value] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)

    def step(self, loc: Loc) -> None:
        self.steps += 1
        if self.steps > STEP_BUDGET:
            raise EvalCancelled()
        if (self.steps & 0xFF) == 0 and self.token.expired():
            raise EvalCancelled()

    def lookup(self, name: str, loc: Loc) -> Value:
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name]
        if name in self.globals_cache:
            return self.globals_cache[name]
        vd = self.mod.value_def(name)
        if vd is not None:
            saved = self.frames
            self.frames = []
            try:
                v = _eval(vd.expr, self)
            finally:
                self.frames = saved
            self.globals_cache[name] = v
            return v
        if self.mod.state_def is not None and any(name == f for f, _ in self.mod.state_def.fields):
            raise VdmRuntimeError(E_TYPE, f"state field '{name}' cannot be evaluated", loc)
        raise VdmRuntimeError(E_TYPE, f"'{name}' is not defined", loc)

    def inv_eval(self, td: TypeDef, v: Value) -> bool:
        """Evaluate a type definition's invariant against a candidate value."""
        if td.inv_expr is None:
            return True
        binding = match_pattern(td.inv_pattern, v)
        if binding is None:
            return False
        saved = self.frames
        self.frames = [binding]
        try:
            r = _eval(td.inv_expr, self)
        finally:
            self.frames = saved
        if not isinstance(r, BoolVal):
            raise VdmRuntimeError(E_TYPE, f"invariant of '{td.name}' is not boolean", td.loc)
        return r.b


# ---- pattern matching ----


def match_pattern(p: Pattern, v: Value) -> dict[str, Value] | None:
    if isinstance(p, PatVar):
        return {p.name: v}
    if isinstance(p, PatWild):
        return {}
    if isinstance(p, PatNil):
        return {} if isinstance(v, NilVal) else None
    if isinstance(p, PatQuote):
        return {} if isinstance(v, QuoteVal) and v.tag == p.tag else None
    if isinstance(p, PatLit):
        lit = p.value
        if isinstance(lit, bool):
            return {} if isinstance(v, BoolVal) and v.b == lit else None
        if isinstance(lit, (int, Fraction)):
            return {} if is_number(v) and as_fraction(v) == Fraction(lit) else None
        if isinstance(lit, str):
            return {} if isinstance(v, CharVal) and v.c == lit else None
        return None
    if isinstance(p, PatTuple):
        if not isinstance(v, TupleVal) or len(v.items) != len(p.items):
            return None
        return _match_items(p.items, v.items)
    if isinstance(p, PatRecord):
        if not isinstance(v, RecordVal) or v.name != p.name or len(v.fields) != len(p.items):
            return None
        return _match_items(p.items, v.fields)
    raise TypeError(f"match_pattern: {type(p).__name__}")


def _match_items(pats, vals) -> dict[str, Value] | None:
    out: dict[str, Value] = {}
    for sub, val in zip(pats, vals):
        m = match_pattern(sub, val)
        if m is None:
            return None
        for k, x in m.items():
            if k in out and out[k] != x:
                return None  # repeated variable must bind equal values
            out[k] = x
    return out


# ---- function calls ----


def call_function(fd: FunctionDef, args: list[Value], ctx: Context,
                  loc: Loc = NOWHERE) -> Value:
    if len(args) != len(fd.param_patterns):
        raise VdmRuntimeError(E_TYPE, f"'{fd.name}' expects {len(fd.param_patterns)} arguments", loc)
    frame: dict[str, Value] = {}
    for pat, arg in zip(fd.param_patterns, args):
        m = match_pattern(pat, arg)
        if m is None:
            raise VdmRuntimeError(E_TYPE, f"cannot match argument of '{fd.name}'", loc)
        frame.update(m)
    ctx.depth += 1
    if ctx.depth > MAX_CALL_DEPTH:
        ctx.depth -= 1
        raise VdmRuntimeError(E_DEPTH, f"call depth exceeded in '{fd.name}'", loc)
    saved = ctx.frames
    ctx.frames = [frame]
    try:
        if fd.pre is not None and fd.derived_from is None:
            pre = _eval(fd.pre, ctx)
            if not (isinstance(pre, BoolVal) and pre.b):
                raise VdmRuntimeError(E_PRE, f"precondition failure: pre_{fd.name}", loc)
        return _eval(fd.body, ctx)
    finally:
        ctx.frames = saved
        ctx.depth -= 1


def evaluate(e: Expr, ctx: Context) -> Outcome:
    """Evaluate a checked expression; never raises for language-level errors."""
    try:
        return Ok(_eval(e, ctx))
    except VdmRuntimeError as err:
        return EvalError(err.code, err.message, err.loc)
    except EvalCancelled:
        return Cancelled()


# ---- the evaluator ----


def _truthy(v: Value, loc: Loc) -> bool:
    if isinstance(v, BoolVal):
        return v.b
    raise VdmRuntimeError(E_TYPE, "expression is not boolean", loc)


def _eval(e: Expr, ctx: Context) -> Value:  # noqa: C901
    ctx.step(e.loc)
    if isinstance(e, Lit):
        if isinstance(e.value, bool):
            return TRUE if e.value else FALSE
        return mk_number(e.value)
    if isinstance(e, CharLit):
        return CharVal(e.ch)
    if isinstance(e, QuoteLit):
        return QuoteVal(e.tag)
    if isinstance(e, NilLit):
        return NIL
    if isinstance(e, Paren):
        return _eval(e.inner, ctx)
    if isinstance(e, Var):
        fd = ctx.mod.function_def(e.name)
        if fd is not None and not any(e.name in fr for fr in ctx.frames):
            if ctx.mod.value_def(e.name) is None:
                raise VdmRuntimeError(E_TYPE, f"function '{e.name}' used without arguments", e.loc)
        return ctx.lookup(e.name, e.loc)
    if isinstance(e, Unary):
        return _eval_unary(e, ctx)
    if isinstance(e, Binary):
        return _eval_binary(e, ctx)
    if isinstance(e, IfExpr):
        if _truthy(_eval(e.cond, ctx), e.cond.loc):
            return _eval(e.then_branch, ctx)
        for c, r in e.elif_branches:
            if _truthy(_eval(c, ctx), c.loc):
                return _eval(r, ctx)
        return _eval(e.else_branch, ctx)
    if isinstance(e, CasesExpr):
        subject = _eval(e.scrutinee, ctx)
        for cl in e.clauses:
            for pat in cl.patterns:
                m = match_pattern(pat, subject)
                if m is not None:
                    ctx.frames.append(m)
                    try:
                        return _eval(cl.result, ctx)
                    finally:
                        ctx.frames.pop()
        if e.others is not None:
            return _eval(e.others, ctx)
        raise VdmRuntimeError(E_CASES, "no cases clause matched the value", e.loc)
    if isinstance(e, LetExpr):
        frame: dict[str, Value] = {}
        ctx.frames.append(frame)
        try:
            for pat, ex in e.defs:
                v = _eval(ex, ctx)
                m = match_pattern(pat, v)
                if m is None:
                    raise VdmRuntimeError(E_TYPE, "let pattern does not match value", pat.loc)
                frame.update(m)
            return _eval(e.body, ctx)
        finally:
            ctx.frames.pop()
    if isinstance(e, LetBeExpr):
        for binding in _bind_combinations(e.binds, ctx, e.loc):
            ctx.frames.append(binding)
            try:
                if e.pred is None or _truthy(_eval(e.pred, ctx), e.pred.loc):
                    return _eval(e.body, ctx)
            finally:
                ctx.frames.pop()
        raise VdmRuntimeError(E_LETBE, "let-be-st found no applicable value", e.loc)
    if isinstance(e, Forall):
        for binding in _bind_combinations(e.binds, ctx, e.loc):
            ctx.frames.append(binding)
            try:
                if not _truthy(_eval(e.body, ctx), e.body.loc):
                    return FALSE
            finally:
                ctx.frames.pop()
        return TRUE
    if isinstance(e, Exists):
        for binding in _bind_combinations(e.binds, ctx, e.loc):
            ctx.frames.append(binding)
            try:
                if _truthy(_eval(e.body, ctx), e.body.loc):
                    return TRUE
            finally:
                ctx.frames.pop()
        return FALSE
    if isinstance(e, SetComp):
        out = []
        for binding in _bind_combinations(e.binds, ctx, e.loc):
            ctx.frames.append(binding)
            try:
                if e.pred is None or _truthy(_eval(e.pred, ctx), e.pred.loc):
                    out.append(_eval(e.result, ctx))
            finally:
                ctx.frames.pop()
        return mk_set(out)
    if isinstance(e, SeqComp):
        pairs = []
        for binding in _bind_combinations(e.binds, ctx, e.loc):
            ctx.frames.append(binding)
            try:
                if e.pred is None or _truthy(_eval(e.pred, ctx), e.pred.loc):
                    key = tuple(value_key(binding[k]) for k in sorted(binding))
                    pairs.append((key, _eval(e.result, ctx)))
            finally:
                ctx.frames.pop()
        pairs.sort(key=lambda kv: kv[0])
        return SeqVal(tuple(v for _, v in pairs))
    if isinstance(e, SetEnum):
        return mk_set(_eval(x, ctx) for x in e.items)
    if isinstance(e, SeqEnum):
        return SeqVal(tuple(_eval(x, ctx) for x in e.items))
    if isinstance(e, SetRange):
        lo_v, hi_v = _eval(e.lo, ctx), _eval(e.hi, ctx)
        if not (is_number(lo_v) and is_number(hi_v)):
            raise VdmRuntimeError(E_TYPE, "set range bounds must be numeric", e.loc)
        lo = math.ceil(as_fraction(lo_v))
        hi = math.floor(as_fraction(hi_v))
        if hi - lo > PRODUCT_CAP:
            raise VdmRuntimeError(E_TYPE, "set range too large", e.loc)
        return mk_set(IntVal(i) for i in range(lo, hi + 1))
    if isinstance(e, MapEnum):
        pairs = [(_eval(k, ctx), _eval(v, ctx)) for k, v in e.pairs]
        try:
            return mk_map(pairs)
        except ValueError:
            raise VdmRuntimeError(E_TYPE, "duplicate map keys with different values", e.loc)
    if isinstance(e, TupleCtor):
        return TupleVal(tuple(_eval(x, ctx) for x in e.items))
    if isinstance(e, RecordCtor):
        td = ctx.mod.type_def(e.name)
        if td is None or not isinstance(td.body, RecordType):
            raise VdmRuntimeError(E_TYPE, f"unknown record type '{e.name}'", e.loc)
        v = RecordVal(e.name, tuple(_eval(x, ctx) for x in e.args))
        if td.has_invariant and not ctx.inv_eval(td, v):
            raise VdmRuntimeError(E_INV, f"type invariant of '{e.name}' violated", e.loc)
        return v
    if isinstance(e, FieldSel):
        subject = _eval(e.subject, ctx)
        if isinstance(subject, RecordVal):
            td = ctx.mod.type_def(subject.name)
            if td is not None and isinstance(td.body, RecordType):
                for i, (fname, _) in enumerate(td.body.fields):
                    if fname == e.fname:
                        return subject.fields[i]
        raise VdmRuntimeError(E_TYPE, f"no field '{e.fname}' in value", e.loc)
    if isinstance(e, TupleSel):
        subject = _eval(e.subject, ctx)
        if isinstance(subject, TupleVal) and 1 <= e.index <= len(subject.items):
            return subject.items[e.index - 1]
        raise VdmRuntimeError(E_TYPE, f"cannot select #{e.index} from value", e.loc)
    if isinstance(e, Apply):
        return _eval_apply(e, ctx)
    if isinstance(e, FnInst):
        raise VdmRuntimeError(E_TYPE, "function instantiation must be applied", e.loc)
    if isinstance(e, TypeJudgement):
        v = _eval(e.subject, ctx)
        return TRUE if type_membership(v, e.dtype, ctx.mod, ctx.inv_eval) else FALSE
    raise TypeError(f"_eval: unhandled {type(e).__name__}")


def _eval_apply(e: Apply, ctx: Context) -> Value:
    fn = strip_parens(e.fn)
    fd = None
    if isinstance(fn, FnInst):
        fd = ctx.mod.function_def(fn.name)
    elif isinstance(fn, Var) and not any(fn.name in fr for fr in ctx.frames):
        fd = ctx.mod.function_def(fn.name)
    if fd is not None:
        args = [_eval(a, ctx) for a in e.args]
        return call_function(fd, args, ctx, e.loc)
    subject = _eval(fn, ctx)
    if isinstance(subject, SeqVal):
        if len(e.args) != 1:
            raise VdmRuntimeError(E_TYPE, "sequence application takes one index", e.loc)
        idx = _eval(e.args[0], ctx)
        if not isinstance(idx, IntVal) or idx.i < 1:
            raise VdmRuntimeError(
                E_SEQ_APPLY, f"Value {_rv(idx)} is not a nat1", e.loc)
        if idx.i > len(subject.items):
            raise VdmRuntimeError(
                E_SEQ_APPLY, f"Value {idx.i} is not in inds of the sequence", e.loc)
        return subject.items[idx.i - 1]
    if isinstance(subject, MapVal):
        if len(e.args) != 1:
            raise VdmRuntimeError(E_TYPE, "map application takes one key", e.loc)
        key = _eval(e.args[0], ctx)
        for k, v in subject.pairs:
            if k == key:
                return v
        raise VdmRuntimeError(E_MAP_APPLY, f"Value {_rv(key)} is not in the map domain", e.loc)
    raise VdmRuntimeError(E_TYPE, "value is not applicable", e.loc)


def _rv(v: Value) -> str:
    from .values import render_value

    return render_value(v)


def _eval_unary(e: Unary, ctx: Context) -> Value:
    op = e.op
    v = _eval(e.operand, ctx)
    if op == "not":
        return FALSE if _truthy(v, e.loc) else TRUE
    if op == "-":
        if not is_number(v):
            raise VdmRuntimeError(E_TYPE, "'-' needs a number", e.loc)
        return mk_number(-as_fraction(v))
    if op == "abs":
        if not is_number(v):
            raise VdmRuntimeError(E_TYPE, "'abs' needs a number", e.loc)
        return mk_number(abs(as_fraction(v)))
    if op == "floor":
        if not is_number(v):
            raise VdmRuntimeError(E_TYPE, "'floor' needs a number", e.loc)
        return IntVal(math.floor(as_fraction(v)))
    if op in ("hd", "tl"):
        if not isinstance(v, SeqVal):
            raise VdmRuntimeError(E_TYPE, f"'{op}' needs a sequence", e.loc)
        if not v.items:
            raise VdmRuntimeError(E_HD_TL, f"cannot take {op} of []", e.loc)
        return v.items[0] if op == "hd" else SeqVal(v.items[1:])
    if op == "len":
        if not isinstance(v, SeqVal):
            raise VdmRuntimeError(E_TYPE, "'len' needs a sequence", e.loc)
        return IntVal(len(v.items))
    if op == "elems":
        if not isinstance(v, SeqVal):
            raise VdmRuntimeError(E_TYPE, "'elems' needs a sequence", e.loc)
        return mk_set(v.items)
    if op == "inds":
        if not isinstance(v, SeqVal):
            raise VdmRuntimeError(E_TYPE, "'inds' needs a sequence", e.loc)
        return mk_set(IntVal(i) for i in range(1, len(v.items) + 1))
    if op == "card":
        if not isinstance(v, SetVal):
            raise VdmRuntimeError(E_TYPE, "'card' needs a set", e.loc)
        return IntVal(len(v.items))
    if op == "dom":
        if not isinstance(v, MapVal):
            raise VdmRuntimeError(E_TYPE, "'dom' needs a map", e.loc)
        return mk_set(k for k, _ in v.pairs)
    if op == "rng":
        if not isinstance(v, MapVal):
            raise VdmRuntimeError(E_TYPE, "'rng' needs a map", e.loc)
        return mk_set(x for _, x in v.pairs)
    if op == "power":
        if not isinstance(v, SetVal):
            raise VdmRuntimeError(E_TYPE, "'power' needs a set", e.loc)
        if len(v.items) > 16:
            raise VdmRuntimeError(E_TYPE, "power set operand too large", e.loc)
        subsets = []
        for r in range(len(v.items) + 1):
            for combo in itertools.combinations(v.items, r):
                subsets.append(mk_set(combo))
        return mk_set(subsets)
    raise TypeError(f"unary {op}")


def _eval_binary(e: Binary, ctx: Context) -> Value:  # noqa: C901
    op = e.op
    if op == "and":
        if not _truthy(_eval(e.left, ctx), e.left.loc):
            return FALSE
        return TRUE if _truthy(_eval(e.right, ctx), e.right.loc) else FALSE
    if op == "or":
        if _truthy(_eval(e.left, ctx), e.left.loc):
            return TRUE
        return TRUE if _truthy(_eval(e.right, ctx), e.right.loc) else FALSE
    if op == "=>":
        if not _truthy(_eval(e.left, ctx), e.left.loc):
            return TRUE
        return TRUE if _truthy(_eval(e.right, ctx), e.right.loc) else FALSE
    if op == "<=>":
        l = _truthy(_eval(e.left, ctx), e.left.loc)
        r = _truthy(_eval(e.right, ctx), e.right.loc)
        return TRUE if l == r else FALSE

    lv = _eval(e.left, ctx)
    rv = _eval(e.right, ctx)
    if op == "=":
        return TRUE if lv == rv else FALSE
    if op == "<>":
        return TRUE if lv != rv else FALSE
    if op in ("<", "<=", ">", ">="):
        if not (is_number(lv) and is_number(rv)):
            raise VdmRuntimeError(E_TYPE, f"'{op}' needs numbers", e.loc)
        a, b = as_fraction(lv), as_fraction(rv)
        return TRUE if {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op] else FALSE
    if op in ("+", "-", "*", "/"):
        if not (is_number(lv) and is_number(rv)):
            raise VdmRuntimeError(E_TYPE, f"'{op}' needs numbers", e.loc)
        a, b = as_fraction(lv), as_fraction(rv)
        if op == "+":
            return mk_number(a + b)
        if op == "-":
            return mk_number(a - b)
        if op == "*":
            return mk_number(a * b)
        if b == 0:
            raise VdmRuntimeError(E_DIV_ZERO, "division by zero", e.loc)
        return mk_number(a / b)
    if op in ("div", "mod"):
        if not (isinstance(lv, IntVal) and isinstance(rv, IntVal)):
            raise VdmRuntimeError(E_TYPE, f"'{op}' needs integers", e.loc)
        if rv.i == 0:
            raise VdmRuntimeError(E_DIV_ZERO, f"{op} by zero", e.loc)
        if op == "mod":
            return IntVal(lv.i - rv.i * math.floor(Fraction(lv.i, rv.i)))
        q = abs(lv.i) // abs(rv.i)
        return IntVal(-q if (lv.i < 0) != (rv.i < 0) else q)
    if op == "in set":
        if not isinstance(rv, SetVal):
            raise VdmRuntimeError(E_TYPE, "'in set' needs a set", e.loc)
        return TRUE if lv in rv.items else FALSE
    if op == "not in set":
        if not isinstance(rv, SetVal):
            raise VdmRuntimeError(E_TYPE, "'not in set' needs a set", e.loc)
        return FALSE if lv in rv.items else TRUE
    if op in ("subset", "psubset"):
        if not (isinstance(lv, SetVal) and isinstance(rv, SetVal)):
            raise VdmRuntimeError(E_TYPE, f"'{op}' needs sets", e.loc)
        is_sub = all(x in rv.items for x in lv.items)
        if op == "subset":
            return TRUE if is_sub else FALSE
        return TRUE if is_sub and len(lv.items) < len(rv.items) else FALSE
    if op in ("union", "inter", "\\"):
        if not (isinstance(lv, SetVal) and isinstance(rv, SetVal)):
            raise VdmRuntimeError(E_TYPE, f"'{op}' needs sets", e.loc)
        if op == "union":
            return mk_set(lv.items + rv.items)
        if op == "inter":
            return mk_set(x for x in lv.items if x in rv.items)
        return mk_set(x for x in lv.items if x not in rv.items)
    if op == "^":
        if not (isinstance(lv, SeqVal) and isinstance(rv, SeqVal)):
            raise VdmRuntimeError(E_TYPE, "'^' needs sequences", e.loc)
        return SeqVal(lv.items + rv.items)
    if op == "munion":
        if not (isinstance(lv, MapVal) and isinstance(rv, MapVal)):
            raise VdmRuntimeError(E_TYPE, "'munion' needs maps", e.loc)
        try:
            return mk_map(lv.pairs + rv.pairs)
        except ValueError:
            raise VdmRuntimeError(E_TYPE, "munion of maps with conflicting keys", e.loc)
    if op == "++":
        if isinstance(lv, MapVal) and isinstance(rv, MapVal):
            merged = dict(lv.pairs)
            keyed = {value_key(k): (k, v) for k, v in merged.items()} if False else None
            out = list(lv.pairs)
            for k, v in rv.pairs:
                for i, (k2, _) in enumerate(out):
                    if k2 == k:
                        out[i] = (k, v)
                        break
                else:
                    out.append((k, v))
            return mk_map(out)
        if isinstance(lv, SeqVal) and isinstance(rv, MapVal):
            items = list(lv.items)
            for k, v in rv.pairs:
                if not isinstance(k, IntVal) or not (1 <= k.i <= len(items)):
                    raise VdmRuntimeError(E_TYPE, "sequence override index out of range", e.loc)
                items[k.i - 1] = v
            return SeqVal(tuple(items))
        raise VdmRuntimeError(E_TYPE, "'++' needs map/map or seq/map", e.loc)
    raise TypeError(f"binary {op}")


# ---- bind iteration for plain evaluation ----


def _bind_domain(b: Bind, ctx: Context, loc: Loc) -> list[Value]:
    if b.source_set is not None:
        s = _eval(b.source_set, ctx)
        if not isinstance(s, SetVal):
            raise VdmRuntimeError(E_TYPE, "'in set' bind needs a set", loc)
        return list(s.items)
    vals, exhausted = enumerate_all(b.dtype, INNER_ENUM_LIMIT, ctx.mod, ctx.inv_eval)
    if not exhausted:
        raise InfiniteTypeError(
            f"cannot enumerate type {render_type(b.dtype)} in a nested bind", loc)
    return vals


def _bind_combinations(binds: list[Bind], ctx: Context, loc: Loc):
    """Iterate all frames for a bind list (leftmost bind varying slowest)."""
    domains = [_bind_domain(b, ctx, loc) for b in binds]
    for combo in itertools.product(*domains):
        frame: dict[str, Value] = {}
        ok = True
        for b, v in zip(binds, combo):
            ctx.step(loc)
            m = match_pattern(b.pattern, v)
            if m is None:
                ok = False
                break
            frame.update(m)
        if ok:
            yield frame


# ---- instrumented quantifier evaluation ----


@dataclass
class BindOverrides:
    """Value lists keyed by the rendered ``name:type`` text of each bind."""

    values: dict[str, list[Value]] = field(default_factory=dict)
    all_values: dict[str, bool] = field(default_factory=dict)

    @staticmethod
    def key_for(b: Bind) -> str:
        return f"{render_pattern(b.pattern)}:{render_type(b.dtype)}"


@dataclass
class QuantifierReport:
    result: Outcome
    failing: dict[str, Value] | None = None
    witness: dict[str, Value] | None = None
    exhausted: bool = False


def quantifier_chain(e: Expr) -> tuple[list[Bind], Expr, bool]:
    """Collect the leading same-polarity quantifier chain.

    Returns (binds, body, is_universal); a non-quantified expression yields
    ([], e, True).
    """
    e = strip_parens(e)
    if isinstance(e, Forall):
        universal = True
    elif isinstance(e, Exists):
        universal = False
    else:
        return [], e, True
    binds: list[Bind] = []
    cls = Forall if universal else Exists
    while True:
        binds.extend(e.binds)
        nxt = strip_parens(e.body)
        if isinstance(nxt, cls):
            e = nxt
        else:
            return binds, e.body, universal


def evaluate_quantified(e: Expr, overrides: BindOverrides, ctx: Context) -> QuantifierReport:
    binds, body, universal = quantifier_chain(e)
    if not binds:
        outcome = evaluate(body, ctx)
        if isinstance(outcome, Cancelled):
            return QuantifierReport(outcome)
        if isinstance(outcome, EvalError):
            if outcome.code == E_INFINITE:
                return QuantifierReport(Ok(TRUE if universal else FALSE), exhausted=False)
            return QuantifierReport(outcome, failing={} if universal else None, exhausted=True)
        return QuantifierReport(outcome, exhausted=True)

    lists: list[list[Value]] = []
    exhausted = True
    for b in binds:
        key = BindOverrides.key_for(b)
        vals = overrides.values.get(key, [])
        lists.append(vals)
        if not overrides.all_values.get(key, False):
            if not vals:
                exhausted = False
        # a bind with all_values set keeps exhaustiveness even when empty

    total = 1
    for vals in lists:
        total *= len(vals)
    if any(not vals for vals in lists):
        # vacuous quantifier: true for forall, false for exists
        complete = all(
            overrides.all_values.get(BindOverrides.key_for(b), False) or vals
            for b, vals in zip(binds, lists)
        )
        exhausted = bool(complete) and all(
            overrides.all_values.get(BindOverrides.key_for(b), False)
            for b, vals in zip(binds, lists) if not vals
        )
        return QuantifierReport(Ok(TRUE if universal else FALSE), exhausted=exhausted)

    capped = total > PRODUCT_CAP
    if capped:
        exhausted = False
    for b in binds:
        if not overrides.all_values.get(BindOverrides.key_for(b), False):
            exhausted = False

    count = 0
    unknown = False
    try:
        for combo in itertools.product(*lists):
            count += 1
            if count > PRODUCT_CAP:
                break
            frame: dict[str, Value] = {}
            ok = True
            for b, v in zip(binds, combo):
                m = match_pattern(b.pattern, v)
                if m is None:
                    ok = False
                    break
                frame.update(m)
            if not ok:
                unknown = True
                continue
            ctx.frames.append(frame)
            try:
                r = _eval(body, ctx)
            except InfiniteTypeError:
                unknown = True
                continue
            except VdmRuntimeError as err:
                if universal:
                    return QuantifierReport(
                        EvalError(err.code, err.message, err.loc),
                        failing=dict(frame), exhausted=False)
                continue  # an erroring candidate is not a witness
            finally:
                if ctx.frames and ctx.frames[-1] is frame:
                    ctx.frames.pop()
            if not isinstance(r, BoolVal):
                unknown = True
                continue
            if universal and not r.b:
                return QuantifierReport(Ok(FALSE), failing=dict(frame), exhausted=False)
            if not universal and r.b:
                return QuantifierReport(Ok(TRUE), witness=dict(frame), exhausted=False)
    except EvalCancelled:
        return QuantifierReport(Cancelled())

    if unknown:
        exhausted = False
    return QuantifierReport(Ok(TRUE if universal else FALSE), exhausted=exhausted)
