"""Name resolution and static typing for parsed modules.

Collects every diagnostic before raising; attaches ``static_type`` to
expression nodes; desugars set binds into type binds (keeping the source
set for evaluation); registers the derived ``pre_f``/``post_f``/``inv_T``
functions so obligation expressions can call them.
"""

from __future__ import annotations

from fractions import Fraction

from .ast import (
    BOOL, INT, NAT, NAT1, REAL,
    Apply, Binary, Bind, BoolType, CasesExpr, CharLit, CharType, Exists, Expr,
    FieldSel, FnInst, Forall, FunctionDef, IfExpr, IntType, LetBeExpr,
    LetExpr, Lit, MapEnum, MapType, Nat1Type, NatType, NamedType, NilLit,
    OptionalType, ParamType, Paren, PatLit, PatNil, PatQuote, PatRecord,
    PatTuple, PatVar, PatWild, Pattern, ProductType, QuoteLit, QuoteType,
    RealType, RecordCtor, RecordType, SeqComp, SeqEnum, SeqType, SetComp,
    SetEnum, SetRange, SetType, SpecModule, TupleCtor, TupleSel, TypeDef,
    TypeExpr, TypeJudgement, Unary, UnionType, Var, make_union,
)
from .parser import Diagnostic, SpecError
from .render import render_type

_NUMERIC_RANK = {Nat1Type: 1, NatType: 2, IntType: 3, RealType: 4}
_RANK_TYPE = {1: NAT1, 2: NAT, 3: INT, 4: REAL}


class SpecCheckError(SpecError):
    pass


def is_numeric(t: TypeExpr | None) -> bool:
    return t is not None and type(t) in _NUMERIC_RANK


def numeric_rank(t: TypeExpr) -> int:
    return _NUMERIC_RANK[type(t)]


def numeric_join(a: TypeExpr, b: TypeExpr) -> TypeExpr:
    return _RANK_TYPE[max(numeric_rank(a), numeric_rank(b))]


def unfold(t: TypeExpr, mod: SpecModule) -> TypeExpr:
    """Replace a named type by its body (one level); invariants are not dropped
    by callers that care — they must check has_invariant themselves."""
    seen: set[str] = set()
    while isinstance(t, NamedType):
        if t.name in seen:
            return t
        seen.add(t.name)
        td = mod.type_def(t.name)
        if td is None:
            return t
        t = td.body
    return t


def invariant_chain(t: TypeExpr, mod: SpecModule) -> list[TypeDef]:
    """Type defs with invariants crossed when unfolding t to its structure."""
    out: list[TypeDef] = []
    seen: set[str] = set()
    while isinstance(t, NamedType) and t.name not in seen:
        seen.add(t.name)
        td = mod.type_def(t.name)
        if td is None:
            break
        if td.has_invariant:
            out.append(td)
        t = td.body
    return out


def sub_type(a: TypeExpr | None, b: TypeExpr | None, mod: SpecModule,
             _seen: frozenset = frozenset()) -> bool:
    """Conservative subtype test: True only when every value of a inhabits b.

    Unknown (None) types are never subtypes; named types with invariants are
    only supertypes of themselves.
    """
    if a is None or b is None:
        return False
    if a == b:
        return True
    key = (a, b)
    if key in _seen:
        return True  # coinductive: assume holds on cycles
    seen = _seen | {key}
    if isinstance(b, NamedType):
        td = mod.type_def(b.name)
        if td is None:
            return False
        if td.has_invariant:
            return False  # already handled a == b above
        return sub_type(a, td.body, mod, seen)
    if isinstance(a, NamedType):
        td = mod.type_def(a.name)
        if td is None:
            return False
        # values of a are a subset of its body's values, invariant or not
        return sub_type(td.body, b, mod, seen)
    if isinstance(a, UnionType):
        return all(sub_type(m, b, mod, seen) for m in a.members)
    if isinstance(b, UnionType):
        return any(sub_type(a, m, mod, seen) for m in b.members)
    if isinstance(b, OptionalType):
        if isinstance(a, OptionalType):
            return sub_type(a.inner, b.inner, mod, seen)
        return sub_type(a, b.inner, mod, seen)
    if is_numeric(a) and is_numeric(b):
        return numeric_rank(a) <= numeric_rank(b)
    if isinstance(a, SeqType) and isinstance(b, SeqType):
        return sub_type(a.elem, b.elem, mod, seen)
    if isinstance(a, SetType) and isinstance(b, SetType):
        return sub_type(a.elem, b.elem, mod, seen)
    if isinstance(a, MapType) and isinstance(b, MapType):
        return sub_type(a.dom, b.dom, mod, seen) and sub_type(a.rng, b.rng, mod, seen)
    if isinstance(a, ProductType) and isinstance(b, ProductType):
        return len(a.items) == len(b.items) and all(
            sub_type(x, y, mod, seen) for x, y in zip(a.items, b.items)
        )
    if isinstance(a, RecordType) and isinstance(b, RecordType):
        return a.name == b.name
    return False


def type_equal(a: TypeExpr | None, b: TypeExpr | None, mod: SpecModule) -> bool:
    return sub_type(a, b, mod) and sub_type(b, a, mod)


def compatible(a: TypeExpr | None, b: TypeExpr | None, mod: SpecModule) -> bool:
    """Overlap test used for =, <>: could some value belong to both?"""
    if a is None or b is None:
        return True
    a2, b2 = unfold(a, mod), unfold(b, mod)
    if isinstance(a2, UnionType):
        return any(compatible(m, b2, mod) for m in a2.members)
    if isinstance(b2, UnionType):
        return any(compatible(a2, m, mod) for m in b2.members)
    if isinstance(a2, OptionalType):
        return isinstance(b2, OptionalType) or compatible(a2.inner, b2, mod)
    if isinstance(b2, OptionalType):
        return compatible(a2, b2.inner, mod)
    if is_numeric(a2) and is_numeric(b2):
        return True
    if isinstance(a2, SeqType) and isinstance(b2, SeqType):
        return True  # [] inhabits both regardless of elements
    if isinstance(a2, SetType) and isinstance(b2, SetType):
        return True
    if isinstance(a2, MapType) and isinstance(b2, MapType):
        return True
    if isinstance(a2, ProductType) and isinstance(b2, ProductType):
        return len(a2.items) == len(b2.items) and all(
            compatible(x, y, mod) for x, y in zip(a2.items, b2.items)
        )
    if isinstance(a2, RecordType) and isinstance(b2, RecordType):
        return a2.name == b2.name
    return type(a2) is type(b2) and a2 == b2 or type(a2) is type(b2)


def arith_result(op: str, a: TypeExpr | None, b: TypeExpr | None) -> TypeExpr | None:
    """Most precise numeric result type for a binary arithmetic operator."""
    if not (is_numeric(a) and is_numeric(b)):
        return None
    ra, rb = numeric_rank(a), numeric_rank(b)
    if op == "+":
        if max(ra, rb) <= 2 and min(ra, rb) == 1:
            return NAT1  # nat1 + nat >= 1
        return numeric_join(a, b)
    if op == "-":
        return INT if max(ra, rb) <= 3 else REAL
    if op == "*":
        if ra == rb == 1:
            return NAT1
        if max(ra, rb) <= 2:
            return NAT
        return numeric_join(a, b)
    if op == "/":
        return REAL
    if op in ("div", "mod"):
        if max(ra, rb) <= 3:
            return NAT if max(ra, rb) <= 2 else INT
        return None
    return None


def unary_arith_result(op: str, a: TypeExpr | None) -> TypeExpr | None:
    if not is_numeric(a):
        return None
    r = numeric_rank(a)
    if op == "-":
        return INT if r <= 3 else REAL
    if op == "abs":
        if r == 1:
            return NAT1
        return NAT if r <= 3 else REAL
    if op == "floor":
        return a if r <= 3 else INT
    return None


class Checker:
    def __init__(self, mod: SpecModule):
        self.mod = mod
        self.diags: list[Diagnostic] = []
        self.scopes: list[dict[str, TypeExpr | None]] = []
        self.current_fn: FunctionDef | None = None
        self.tparams: set[str] = set()
        self.state_fields: dict[str, TypeExpr] = {}
        self._value_types: dict[str, TypeExpr | None] = {}
        self._value_stack: set[str] = set()

    def error(self, message: str, loc) -> None:
        self.diags.append(Diagnostic(message, loc))

    # -- scope helpers --

    def push(self, frame: dict[str, TypeExpr | None]) -> None:
        self.scopes.append(frame)

    def pop(self) -> None:
        self.scopes.pop()

    def lookup_local(self, name: str) -> tuple[bool, TypeExpr | None]:
        for frame in reversed(self.scopes):
            if name in frame:
                return True, frame[name]
        return False, None

    # -- registration --

    def run(self) -> None:
        mod = self.mod
        if mod.state_def is not None:
            self.state_fields = dict(mod.state_def.fields)

        seen_types: set[str] = set()
        for td in mod.type_defs:
            if td.name in seen_types:
                self.error(f"duplicate type definition '{td.name}'", td.loc)
            seen_types.add(td.name)

        seen_vals: set[str] = set()
        for fd in list(mod.function_defs):
            if fd.name in seen_vals:
                self.error(f"duplicate definition '{fd.name}'", fd.loc)
            seen_vals.add(fd.name)
        for vd in mod.value_defs:
            if vd.name in seen_vals:
                self.error(f"duplicate definition '{vd.name}'", vd.loc)
            seen_vals.add(vd.name)

        self._register_derived()
        self._detect_alias_cycles()

        for td in mod.type_defs:
            self.check_type(td.body, td.loc)
        if mod.state_def is not None:
            for _, ft in mod.state_def.fields:
                self.check_type(ft, mod.state_def.loc)

        for vd in mod.value_defs:
            if vd.dtype is not None:
                self.check_type(vd.dtype, vd.loc)
            t = self.infer(vd.expr)
            if vd.dtype is not None and t is not None and not sub_type(t, vd.dtype, mod):
                if not compatible(t, vd.dtype, mod):
                    self.error(
                        f"value '{vd.name}' of type {render_type(t)} does not match "
                        f"declared {render_type(vd.dtype)}", vd.loc,
                    )

        for fd in mod.function_defs:
            self.check_function(fd)

        for td in mod.type_defs:
            if td.has_invariant:
                self._check_inv_clause(td.inv_pattern, td.inv_expr,
                                       td.body if not isinstance(td.body, RecordType) else NamedType(td.name),
                                       td.loc, record=td.body if isinstance(td.body, RecordType) else None)
        sd = mod.state_def
        if sd is not None:
            rec = RecordType(sd.name, tuple(sd.fields))
            if sd.inv_expr is not None:
                self._check_inv_clause(sd.inv_pattern, sd.inv_expr, rec, sd.loc, record=rec)
            if sd.init_expr is not None:
                self._check_inv_clause(sd.init_pattern, sd.init_expr, rec, sd.loc, record=rec)

        self._check_annotations()

    def _register_derived(self) -> None:
        mod = self.mod
        for fd in list(mod.function_defs):
            if fd.derived_from is not None:
                continue
            if fd.pre is not None:
                mod.function_defs.append(FunctionDef(
                    f"pre_{fd.name}", list(fd.type_params), fd.sig_type, BOOL,
                    list(fd.param_patterns), fd.pre, None, None, fd.loc,
                    derived_from="pre",
                ))
            if fd.post is not None:
                items = self._split_sig(fd)
                sig = ProductType(tuple(items + [fd.return_type]))
                mod.function_defs.append(FunctionDef(
                    f"post_{fd.name}", list(fd.type_params), sig, BOOL,
                    list(fd.param_patterns) + [PatVar("RESULT", fd.loc)],
                    fd.post, None, None, fd.loc,
                    derived_from="post",
                ))
        for td in mod.type_defs:
            if td.has_invariant:
                mod.function_defs.append(FunctionDef(
                    f"inv_{td.name}", [], td.body, BOOL,
                    [td.inv_pattern], td.inv_expr, None, None, td.loc,
                    derived_from="inv",
                ))

    def _split_sig(self, fd: FunctionDef) -> list[TypeExpr]:
        n = len(fd.param_patterns)
        sig = fd.sig_type
        if n == 0:
            if isinstance(sig, ProductType) and not sig.items:
                return []
            self.error(f"'{fd.name}' declares no parameters but a non-empty signature", fd.loc)
            return []
        if n == 1:
            if isinstance(sig, ProductType) and not sig.items:
                self.error(f"'{fd.name}' takes one parameter but signature is ()", fd.loc)
                return [None]  # type: ignore[list-item]
            return [sig]
        if isinstance(sig, ProductType) and len(sig.items) == n:
            return list(sig.items)
        self.error(
            f"'{fd.name}' takes {n} parameters but its signature has "
            f"{len(sig.items) if isinstance(sig, ProductType) else 1}", fd.loc,
        )
        return [None] * n  # type: ignore[list-item]

    def _detect_alias_cycles(self) -> None:
        for td in self.mod.type_defs:
            seen = {td.name}
            t = td.body
            while isinstance(t, NamedType):
                if t.name in seen:
                    self.error(f"type definition '{td.name}' is cyclic", td.loc)
                    break
                seen.add(t.name)
                nxt = self.mod.type_def(t.name)
                if nxt is None:
                    break
                t = nxt.body

    # -- types --

    def check_type(self, t: TypeExpr, loc) -> None:
        if isinstance(t, NamedType):
            if self.mod.type_def(t.name) is None:
                self.error(f"unknown type '{t.name}'", loc)
        elif isinstance(t, ParamType):
            if t.name not in self.tparams:
                self.error(f"type parameter '@{t.name}' not declared here", loc)
        elif isinstance(t, (SeqType, SetType)):
            self.check_type(t.elem, loc)
        elif isinstance(t, MapType):
            self.check_type(t.dom, loc)
            self.check_type(t.rng, loc)
        elif isinstance(t, ProductType):
            for x in t.items:
                self.check_type(x, loc)
        elif isinstance(t, UnionType):
            for x in t.members:
                self.check_type(x, loc)
        elif isinstance(t, OptionalType):
            self.check_type(t.inner, loc)
        elif isinstance(t, RecordType):
            for _, ft in t.fields:
                self.check_type(ft, loc)

    # -- functions --

    def check_function(self, fd: FunctionDef) -> None:
        self.current_fn = fd
        self.tparams = set(fd.type_params)
        self.check_type(fd.sig_type, fd.loc)
        self.check_type(fd.return_type, fd.loc)
        fd.param_types = self._split_sig(fd)
        frame: dict[str, TypeExpr | None] = {}
        for pat, pt in zip(fd.param_patterns, fd.param_types):
            self.bind_pattern(pat, pt, frame)
        self.push(frame)
        self.infer(fd.body)
        if fd.derived_from is None:
            if fd.pre is not None:
                self.expect_bool(fd.pre, "precondition")
            if fd.post is not None:
                self.push({"RESULT": fd.return_type})
                self.expect_bool(fd.post, "postcondition")
                self.pop()
        self.pop()
        self.current_fn = None
        self.tparams = set()

    def _check_inv_clause(self, pat: Pattern | None, expr: Expr | None,
                          subject: TypeExpr, loc, record=None) -> None:
        if expr is None:
            return
        frame: dict[str, TypeExpr | None] = {}
        if pat is not None:
            if record is not None and isinstance(pat, PatRecord):
                self.bind_pattern(pat, record, frame)
            else:
                self.bind_pattern(pat, subject, frame)
        self.push(frame)
        self.expect_bool(expr, "invariant")
        self.pop()

    def bind_pattern(self, pat: Pattern, t: TypeExpr | None, frame: dict) -> None:
        if isinstance(pat, PatVar):
            frame[pat.name] = t
            return
        if isinstance(pat, PatTuple):
            t2 = unfold(t, self.mod) if t is not None else None
            items = t2.items if isinstance(t2, ProductType) and len(t2.items) == len(pat.items) else None
            for i, sub in enumerate(pat.items):
                self.bind_pattern(sub, items[i] if items else None, frame)
            return
        if isinstance(pat, PatRecord):
            td = self.mod.type_def(pat.name)
            body = td.body if td is not None else None
            rec = body if isinstance(body, RecordType) else (t if isinstance(t, RecordType) else None)
            if rec is None and td is None and not (isinstance(t, RecordType) and t.name == pat.name):
                self.error(f"unknown record type '{pat.name}' in pattern", pat.loc)
            if isinstance(t, RecordType) and t.name == pat.name:
                rec = t
            if rec is not None and len(rec.fields) != len(pat.items):
                self.error(f"pattern mk_{pat.name} has {len(pat.items)} fields, "
                           f"type has {len(rec.fields)}", pat.loc)
                rec = None
            for i, sub in enumerate(pat.items):
                self.bind_pattern(sub, rec.fields[i][1] if rec else None, frame)
            return
        # literals / wildcard / nil: no bindings

    # -- expressions --

    def expect_bool(self, e: Expr, what: str) -> None:
        t = self.infer(e)
        if t is not None and not sub_type(t, BOOL, self.mod):
            self.error(f"{what} must be boolean, got {render_type(t)}", e.loc)

    def infer(self, e: Expr) -> TypeExpr | None:
        t = self._infer(e)
        e.static_type = t
        return t

    def _infer(self, e: Expr) -> TypeExpr | None:  # noqa: C901
        mod = self.mod
        if isinstance(e, Lit):
            v = e.value
            if isinstance(v, bool):
                return BOOL
            if isinstance(v, Fraction):
                return REAL
            return NAT1 if v >= 1 else NAT
        if isinstance(e, CharLit):
            return CharType()
        if isinstance(e, QuoteLit):
            return QuoteType(e.tag)
        if isinstance(e, NilLit):
            return None  # typed by context (optional types)
        if isinstance(e, Paren):
            return self.infer(e.inner)
        if isinstance(e, Var):
            found, t = self.lookup_local(e.name)
            if found:
                return t
            if e.name in self.state_fields:
                if self.current_fn is not None:
                    self.current_fn.references_state = True
                return self.state_fields[e.name]
            vd = mod.value_def(e.name)
            if vd is not None:
                return self.value_type(vd)
            fd = mod.function_def(e.name)
            if fd is not None:
                return None  # function used as a value: no first-class fn type
            self.error(f"unknown identifier '{e.name}'", e.loc)
            return None
        if isinstance(e, Unary):
            t = self.infer(e.operand)
            return self.unary_type(e.op, t, e)
        if isinstance(e, Binary):
            return self.binary_type(e)
        if isinstance(e, IfExpr):
            self.expect_bool(e.cond, "if condition")
            t1 = self.infer(e.then_branch)
            parts = [t1]
            for c, r in e.elif_branches:
                self.expect_bool(c, "elseif condition")
                parts.append(self.infer(r))
            parts.append(self.infer(e.else_branch))
            return self.join_all(parts)
        if isinstance(e, CasesExpr):
            st = self.infer(e.scrutinee)
            parts = []
            for cl in e.clauses:
                frame: dict[str, TypeExpr | None] = {}
                for p in cl.patterns:
                    self.bind_pattern(p, st, frame)
                self.push(frame)
                parts.append(self.infer(cl.result))
                self.pop()
            if e.others is not None:
                parts.append(self.infer(e.others))
            return self.join_all(parts)
        if isinstance(e, LetExpr):
            frame = {}
            for pat, ex in e.defs:
                self.push(frame)
                t = self.infer(ex)
                self.pop()
                self.bind_pattern(pat, t, frame)
            self.push(frame)
            t = self.infer(e.body)
            self.pop()
            return t
        if isinstance(e, LetBeExpr):
            frame = self.check_binds(e.binds)
            self.push(frame)
            if e.pred is not None:
                self.expect_bool(e.pred, "such-that predicate")
            t = self.infer(e.body)
            self.pop()
            return t
        if isinstance(e, (Forall, Exists)):
            frame = self.check_binds(e.binds)
            self.push(frame)
            self.expect_bool(e.body, "quantifier body")
            self.pop()
            return BOOL
        if isinstance(e, (SetComp, SeqComp)):
            frame = self.check_binds(e.binds)
            self.push(frame)
            if e.pred is not None:
                self.expect_bool(e.pred, "comprehension predicate")
            rt = self.infer(e.result)
            self.pop()
            if isinstance(e, SetComp):
                return SetType(rt) if rt is not None else None
            return SeqType(rt) if rt is not None else None
        if isinstance(e, SetEnum):
            ts = [self.infer(x) for x in e.items]
            inner = self.join_all(ts) if ts else None
            return SetType(inner) if inner is not None else SetType(NAT) if not ts else None
        if isinstance(e, SeqEnum):
            ts = [self.infer(x) for x in e.items]
            inner = self.join_all(ts) if ts else None
            return SeqType(inner) if inner is not None else SeqType(NAT) if not ts else None
        if isinstance(e, SetRange):
            t1, t2 = self.infer(e.lo), self.infer(e.hi)
            for t, sub in ((t1, e.lo), (t2, e.hi)):
                if t is not None and not is_numeric(unfold(t, mod)):
                    self.error("set range bounds must be numeric", sub.loc)
            return SetType(INT)
        if isinstance(e, MapEnum):
            kts = [self.infer(k) for k, _ in e.pairs]
            vts = [self.infer(v) for _, v in e.pairs]
            kt, vt = self.join_all(kts), self.join_all(vts)
            if kt is None or vt is None:
                return None
            return MapType(kt, vt)
        if isinstance(e, TupleCtor):
            ts = [self.infer(x) for x in e.items]
            if any(t is None for t in ts):
                return None
            return ProductType(tuple(ts))
        if isinstance(e, RecordCtor):
            td = mod.type_def(e.name)
            if td is None or not isinstance(td.body, RecordType):
                self.error(f"unknown record type '{e.name}'", e.loc)
                for a in e.args:
                    self.infer(a)
                return None
            rec = td.body
            if len(e.args) != len(rec.fields):
                self.error(f"mk_{e.name} expects {len(rec.fields)} arguments, "
                           f"got {len(e.args)}", e.loc)
            for a in e.args:
                self.infer(a)
            return NamedType(e.name)
        if isinstance(e, FieldSel):
            st = self.infer(e.subject)
            st2 = unfold(st, mod) if st is not None else None
            if isinstance(st2, RecordType):
                for fname, ft in st2.fields:
                    if fname == e.fname:
                        return ft
                self.error(f"record '{st2.name}' has no field '{e.fname}'", e.loc)
            elif st2 is not None:
                self.error(f"field select on non-record type {render_type(st2)}", e.loc)
            return None
        if isinstance(e, TupleSel):
            st = self.infer(e.subject)
            st2 = unfold(st, mod) if st is not None else None
            if isinstance(st2, ProductType):
                if 1 <= e.index <= len(st2.items):
                    return st2.items[e.index - 1]
                self.error(f"tuple selector #{e.index} out of range", e.loc)
            elif st2 is not None:
                self.error("tuple select on non-tuple value", e.loc)
            return None
        if isinstance(e, FnInst):
            fd = mod.function_def(e.name)
            if fd is None:
                self.error(f"unknown function '{e.name}'", e.loc)
                return None
            if len(e.type_args) != len(fd.type_params):
                self.error(f"'{e.name}' has {len(fd.type_params)} type parameters, "
                           f"got {len(e.type_args)}", e.loc)
                return None
            for ta in e.type_args:
                self.check_type(ta, e.loc)
            return None
        if isinstance(e, Apply):
            return self.apply_type(e)
        if isinstance(e, TypeJudgement):
            self.infer(e.subject)
            return BOOL
        raise TypeError(f"infer: unhandled node {type(e).__name__}")

    def value_type(self, vd) -> TypeExpr | None:
        if vd.dtype is not None:
            return vd.dtype
        if vd.name in self._value_types:
            return self._value_types[vd.name]
        if vd.name in self._value_stack:
            return None
        self._value_stack.add(vd.name)
        try:
            t = self._infer(vd.expr)
        finally:
            self._value_stack.discard(vd.name)
        self._value_types[vd.name] = t
        return t

    def check_binds(self, binds: list[Bind]) -> dict[str, TypeExpr | None]:
        frame: dict[str, TypeExpr | None] = {}
        for b in binds:
            if b.source_set is not None:
                st = self.infer(b.source_set)
                st2 = unfold(st, self.mod) if st is not None else None
                if isinstance(st2, SetType):
                    b.dtype = st2.elem
                else:
                    if st is not None:
                        self.error("'in set' needs a set expression", b.loc)
                    b.dtype = NAT  # recovery placeholder; evaluation uses the set anyway
            else:
                self.check_type(b.dtype, b.loc)
            self.bind_pattern(b.pattern, b.dtype, frame)
        return frame

    def apply_type(self, e: Apply) -> TypeExpr | None:
        mod = self.mod
        fn = e.fn
        subst: dict[str, TypeExpr] | None = None
        fd: FunctionDef | None = None
        if isinstance(fn, FnInst):
            self.infer(fn)
            fd = mod.function_def(fn.name)
            if fd is not None and len(fn.type_args) == len(fd.type_params):
                subst = dict(zip(fd.type_params, fn.type_args))
        elif isinstance(fn, Var):
            found, _ = self.lookup_local(fn.name)
            if not found and mod.value_def(fn.name) is None:
                fd = mod.function_def(fn.name)
        if fd is not None:
            fn.static_type = None
            if len(e.args) != len(fd.param_patterns):
                self.error(f"'{fd.name}' expects {len(fd.param_patterns)} arguments, "
                           f"got {len(e.args)}", e.loc)
            for a in e.args:
                self.infer(a)
            rt = fd.return_type
            return substitute_params(rt, subst) if subst else rt
        ft = self.infer(fn)
        ft2 = unfold(ft, mod) if ft is not None else None
        for a in e.args:
            self.infer(a)
        if isinstance(ft2, SeqType):
            if len(e.args) != 1:
                self.error("sequence application takes one index", e.loc)
            return ft2.elem
        if isinstance(ft2, MapType):
            if len(e.args) != 1:
                self.error("map application takes one key", e.loc)
            return ft2.rng
        if ft2 is not None and isinstance(fn, Var) and mod.function_def(fn.name) is None:
            self.error(f"'{fn.name}' is not applicable", e.loc)
        elif ft2 is not None and not isinstance(fn, Var):
            self.error("expression is not applicable", e.loc)
        return None

    def unary_type(self, op: str, t: TypeExpr | None, e: Unary) -> TypeExpr | None:
        mod = self.mod
        t2 = unfold(t, mod) if t is not None else None
        if op == "not":
            if t2 is not None and not isinstance(t2, BoolType):
                self.error("'not' needs a boolean operand", e.loc)
            return BOOL
        if op in ("-", "abs", "floor"):
            if t2 is None:
                return None
            r = unary_arith_result(op, t2)
            if r is None:
                self.error(f"'{op}' needs a numeric operand", e.loc)
            return r
        if op in ("hd", "tl", "len", "elems", "inds"):
            if t2 is None:
                return None
            if not isinstance(t2, SeqType):
                self.error(f"'{op}' needs a sequence operand", e.loc)
                return None
            return {"hd": t2.elem, "tl": t2, "len": NAT,
                    "elems": SetType(t2.elem), "inds": SetType(NAT1)}[op]
        if op == "card":
            if t2 is not None and not isinstance(t2, SetType):
                self.error("'card' needs a set operand", e.loc)
            return NAT
        if op == "power":
            if t2 is None:
                return None
            if not isinstance(t2, SetType):
                self.error("'power' needs a set operand", e.loc)
                return None
            return SetType(t2)
        if op in ("dom", "rng"):
            if t2 is None:
                return None
            if not isinstance(t2, MapType):
                self.error(f"'{op}' needs a map operand", e.loc)
                return None
            return SetType(t2.dom if op == "dom" else t2.rng)
        raise TypeError(f"unary op {op}")

    def binary_type(self, e: Binary) -> TypeExpr | None:  # noqa: C901
        mod = self.mod
        op = e.op
        lt = self.infer(e.left)
        rt = self.infer(e.right)
        l2 = unfold(lt, mod) if lt is not None else None
        r2 = unfold(rt, mod) if rt is not None else None
        if op in ("and", "or", "=>", "<=>"):
            for t, sub in ((l2, e.left), (r2, e.right)):
                if t is not None and not isinstance(t, BoolType):
                    self.error(f"'{op}' needs boolean operands", sub.loc)
            return BOOL
        if op in ("=", "<>"):
            if lt is not None and rt is not None and not compatible(lt, rt, mod):
                self.error(f"cannot compare {render_type(lt)} with {render_type(rt)}", e.loc)
            return BOOL
        if op in ("<", "<=", ">", ">="):
            for t, sub in ((l2, e.left), (r2, e.right)):
                if t is not None and not is_numeric(t):
                    self.error(f"'{op}' needs numeric operands", sub.loc)
            return BOOL
        if op in ("+", "-", "*", "/", "div", "mod"):
            if l2 is None or r2 is None:
                return None if op not in ("/",) else REAL
            r = arith_result(op, l2, r2)
            if r is None:
                self.error(f"'{op}' needs numeric operands", e.loc)
            return r
        if op in ("in set", "not in set"):
            if r2 is not None and not isinstance(r2, SetType):
                self.error(f"'{op}' needs a set on the right", e.right.loc)
            return BOOL
        if op in ("subset", "psubset"):
            for t, sub in ((l2, e.left), (r2, e.right)):
                if t is not None and not isinstance(t, SetType):
                    self.error(f"'{op}' needs set operands", sub.loc)
            return BOOL
        if op in ("union", "inter", "\\"):
            for t, sub in ((l2, e.left), (r2, e.right)):
                if t is not None and not isinstance(t, SetType):
                    self.error(f"'{op}' needs set operands", sub.loc)
            if isinstance(l2, SetType) and isinstance(r2, SetType):
                if op == "inter":
                    return l2
                return SetType(self.join2(l2.elem, r2.elem)) if op == "union" else l2
            return l2 if isinstance(l2, SetType) else r2 if isinstance(r2, SetType) else None
        if op == "^":
            for t, sub in ((l2, e.left), (r2, e.right)):
                if t is not None and not isinstance(t, SeqType):
                    self.error("'^' needs sequence operands", sub.loc)
            if isinstance(l2, SeqType) and isinstance(r2, SeqType):
                return SeqType(self.join2(l2.elem, r2.elem))
            return l2 if isinstance(l2, SeqType) else r2
        if op == "munion":
            for t, sub in ((l2, e.left), (r2, e.right)):
                if t is not None and not isinstance(t, MapType):
                    self.error("'munion' needs map operands", sub.loc)
            return l2 if isinstance(l2, MapType) else r2
        if op == "++":
            if isinstance(l2, MapType) or isinstance(r2, MapType):
                return l2 if isinstance(l2, MapType) else r2
            if isinstance(l2, SeqType) or isinstance(r2, MapType):
                return l2
            return l2
        raise TypeError(f"binary op {op}")

    def join2(self, a: TypeExpr | None, b: TypeExpr | None) -> TypeExpr | None:
        return self.join_all([a, b])

    def join_all(self, ts: list[TypeExpr | None]) -> TypeExpr | None:
        known = [t for t in ts if t is not None]
        if len(known) != len(ts) or not known:
            return None
        out = known[0]
        for t in known[1:]:
            if type_equal(out, t, self.mod):
                continue
            if is_numeric(unfold(out, self.mod)) and is_numeric(unfold(t, self.mod)):
                out = numeric_join(unfold(out, self.mod), unfold(t, self.mod))
            elif sub_type(out, t, self.mod):
                out = t
            elif sub_type(t, out, self.mod):
                continue
            else:
                out = make_union([out, t])
        return out

    # -- annotations --

    def _check_annotations(self) -> None:
        mod = self.mod
        kept = []
        for a in mod.annotations:
            fd = mod.function_def(a.function_name) if a.function_name else None
            if fd is None or fd.derived_from is not None:
                mod.warnings.append(
                    f"@QuickCheck annotation at line {a.loc.line} does not precede a function; ignored"
                )
                continue
            if a.param_name not in fd.type_params:
                mod.warnings.append(
                    f"@QuickCheck annotation names '@{a.param_name}' which is not a "
                    f"type parameter of '{fd.name}'; ignored"
                )
                continue
            ok = True
            for t in a.candidate_types:
                saved = len(self.diags)
                self.check_type(t, a.loc)
                if len(self.diags) != saved:
                    del self.diags[saved:]
                    mod.warnings.append(
                        f"@QuickCheck annotation for '{fd.name}' uses an unknown type; ignored"
                    )
                    ok = False
                    break
            if ok:
                kept.append(a)
        mod.annotations[:] = kept


def substitute_params(t: TypeExpr, subst: dict[str, TypeExpr]) -> TypeExpr:
    """Replace @T parameters by concrete types throughout a type expression."""
    if isinstance(t, ParamType):
        return subst.get(t.name, t)
    if isinstance(t, SeqType):
        return SeqType(substitute_params(t.elem, subst))
    if isinstance(t, SetType):
        return SetType(substitute_params(t.elem, subst))
    if isinstance(t, MapType):
        return MapType(substitute_params(t.dom, subst), substitute_params(t.rng, subst))
    if isinstance(t, ProductType):
        return ProductType(tuple(substitute_params(x, subst) for x in t.items))
    if isinstance(t, UnionType):
        return make_union([substitute_params(x, subst) for x in t.members])
    if isinstance(t, OptionalType):
        return OptionalType(substitute_params(t.inner, subst))
    return t


def check_module(mod: SpecModule) -> SpecModule:
    """Resolve and type the module in place. Raises SpecCheckError on problems."""
    if mod.checked:
        return mod
    checker = Checker(mod)
    checker.run()
    if checker.diags:
        raise SpecCheckError(checker.diags)
    mod.checked = True
    return mod
