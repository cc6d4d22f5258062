"""Recursive-descent parser producing a SpecModule, collecting all diagnostics before failing."""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    BOOL, CHAR, INT, NAT, NAT1, REAL,
    Apply, Binary, Bind, CaseClause, CasesExpr, CharLit, Exists, Expr,
    FieldSel, FnInst, Forall, FunctionDef, IfExpr, LetBeExpr, LetExpr, Lit,
    Loc, MapEnum, MapType, NamedType, NilLit, OptionalType, ParamType, Paren,
    PatLit, PatNil, PatQuote, PatRecord, PatTuple, PatVar, PatWild, Pattern,
    ProductType, QuickCheckAnnotation, QuoteLit, QuoteType, RecordCtor,
    RecordType, SeqComp, SeqEnum, SeqType, SetComp, SetEnum, SetRange,
    SetType, SpecModule, StateDef, TupleCtor, TupleSel, TypeDef, TypeExpr,
    Unary, ValueDef, Var, make_union,
)
from .lexer import Comment, LexError, Token, tokenize


@dataclass
class Diagnostic:
    message: str
    loc: Loc

    def __str__(self) -> str:
        return f"{self.message} in {self.loc}"


class SpecError(Exception):
    """Raised after a load phase that produced one or more diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


class SpecParseError(SpecError):
    pass


class _Recover(Exception):
    pass


SECTION_KEYWORDS = {"types", "values", "functions", "state"}

UNARY_KEYWORDS = {
    "abs", "floor", "hd", "tl", "len", "elems", "inds", "card", "dom", "rng", "power",
}
ADD_OPS = {"+", "-", "^", "\\", "union", "munion", "++"}
MUL_OPS = {"*", "/", "div", "mod", "inter"}
REL_OPS = {"=", "<>", "<", "<=", ">", ">=", "subset", "psubset"}

EXPR_STOP = {")", "]", "}", ",", ";", "|"}


class Parser:
    def __init__(self, tokens: list[Token], filename: str):
        self.tokens = tokens
        self.filename = filename
        self.pos = 0
        self.diagnostics: list[Diagnostic] = []

    # ---- token utilities ----

    def peek(self, k: int = 0) -> Token:
        i = min(self.pos + k, len(self.tokens) - 1)
        return self.tokens[i]

    def loc(self, tok: Token | None = None) -> Loc:
        t = tok if tok is not None else self.peek()
        return Loc(self.filename, t.line, t.col)

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def at_op(self, text: str) -> bool:
        return self.at("op", text)

    def at_kw(self, text: str) -> bool:
        return self.at("keyword", text)

    def advance(self) -> Token:
        t = self.peek()
        if t.kind != "eof":
            self.pos += 1
        return t

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        if self.at(kind, text):
            return self.advance()
        return None

    def error(self, message: str, tok: Token | None = None) -> None:
        self.diagnostics.append(Diagnostic(message, self.loc(tok)))

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.accept(kind, text)
        if t is None:
            got = self.peek()
            want = text if text is not None else kind
            shown = got.text if got.kind != "eof" else "end of file"
            self.error(f"expected '{want}', found '{shown}'")
            raise _Recover()
        return t

    def sync(self) -> None:
        """Skip to the next definition boundary after a parse error."""
        while True:
            t = self.peek()
            if t.kind == "eof":
                return
            if t.kind == "op" and t.text == ";":
                self.advance()
                return
            if t.kind == "keyword" and (t.text in SECTION_KEYWORDS or t.text == "end"):
                return
            self.advance()

    # ---- document structure ----

    def parse_document(self) -> SpecModule:
        mod = SpecModule()
        if self.at_kw("module"):
            self.advance()
            name_tok = self.expect("ident")
            mod.name = name_tok.text
            self.expect("keyword", "definitions")
            self.parse_sections(mod, until_end=True)
            self.expect("keyword", "end")
            close = self.accept("ident")
            if close is not None and close.text != mod.name:
                self.error(f"module '{mod.name}' closed with 'end {close.text}'", close)
        else:
            self.parse_sections(mod, until_end=False)
        if self.peek().kind != "eof":
            self.error(f"unexpected '{self.peek().text}' after module end")
        return mod

    def parse_sections(self, mod: SpecModule, until_end: bool) -> None:
        while True:
            t = self.peek()
            if t.kind == "eof":
                return
            if t.kind == "keyword" and t.text == "end" and until_end:
                return
            if self.at_kw("types"):
                self.advance()
                self.parse_defs(mod, self.parse_type_def)
            elif self.at_kw("values"):
                self.advance()
                self.parse_defs(mod, self.parse_value_def)
            elif self.at_kw("functions"):
                self.advance()
                self.parse_defs(mod, self.parse_function_def)
            elif self.at_kw("state"):
                try:
                    self.parse_state_def(mod)
                except _Recover:
                    self.sync()
            else:
                self.error(f"expected a definitions section, found '{t.text}'")
                self.advance()
                self.sync()

    def at_section_boundary(self) -> bool:
        t = self.peek()
        if t.kind == "eof":
            return True
        return t.kind == "keyword" and (t.text in SECTION_KEYWORDS or t.text == "end")

    def parse_defs(self, mod: SpecModule, parse_one) -> None:
        while not self.at_section_boundary():
            try:
                parse_one(mod)
                if not self.accept("op", ";") and not self.at_section_boundary():
                    self.error(f"expected ';', found '{self.peek().text}'")
                    raise _Recover()
            except _Recover:
                self.sync()

    # ---- type definitions ----

    def parse_type_def(self, mod: SpecModule) -> None:
        name_tok = self.expect("ident")
        loc = self.loc(name_tok)
        if self.accept("op", "::"):
            fields = self.parse_field_list()
            body: TypeExpr = RecordType(name_tok.text, tuple(fields))
        else:
            self.expect("op", "=")
            body = self.parse_type()
        inv_pat, inv_expr = self.parse_inv_clause()
        mod.type_defs.append(TypeDef(name_tok.text, body, inv_pat, inv_expr, loc))

    def parse_field_list(self) -> list[tuple[str, TypeExpr]]:
        fields: list[tuple[str, TypeExpr]] = []
        while self.peek().kind == "ident" and self.peek(1).kind == "op" and self.peek(1).text == ":":
            fname = self.advance().text
            self.advance()  # ':'
            fields.append((fname, self.parse_type()))
        if not fields:
            self.error("expected at least one field declaration")
            raise _Recover()
        return fields

    def parse_inv_clause(self) -> tuple[Pattern | None, Expr | None]:
        if self.accept("keyword", "inv"):
            pat = self.parse_pattern()
            self.expect("op", "==")
            return pat, self.parse_expr()
        return None, None

    # ---- value definitions ----

    def parse_value_def(self, mod: SpecModule) -> None:
        name_tok = self.expect("ident")
        loc = self.loc(name_tok)
        dtype: TypeExpr | None = None
        if self.accept("op", ":"):
            dtype = self.parse_type()
        self.expect("op", "=")
        expr = self.parse_expr()
        mod.value_defs.append(ValueDef(name_tok.text, dtype, expr, loc))

    # ---- function definitions ----

    def parse_function_def(self, mod: SpecModule) -> None:
        name_tok = self.expect("ident")
        loc = self.loc(name_tok)
        type_params: list[str] = []
        if self.accept("op", "["):
            while True:
                tp = self.expect("tparam")
                type_params.append(tp.value)  # type: ignore[arg-type]
                if not self.accept("op", ","):
                    break
            self.expect("op", "]")
        self.expect("op", ":")
        if self.at_op("(") and self.peek(1).kind == "op" and self.peek(1).text == ")":
            self.advance()
            self.advance()
            sig_type: TypeExpr = ProductType(())
        else:
            sig_type = self.parse_type()
        self.expect("op", "->")
        ret_type = self.parse_type()
        if self.at_op("->"):
            self.error("curried function types are not supported")
            raise _Recover()

        head_tok = self.expect("ident")
        if head_tok.text != name_tok.text:
            self.error(
                f"definition of '{head_tok.text}' does not match signature '{name_tok.text}'",
                head_tok,
            )
        self.expect("op", "(")
        patterns: list[Pattern] = []
        if not self.at_op(")"):
            patterns.append(self.parse_pattern())
            while self.accept("op", ","):
                patterns.append(self.parse_pattern())
        self.expect("op", ")")
        self.expect("op", "==")
        body = self.parse_expr()
        pre = post = None
        if self.accept("keyword", "pre"):
            pre = self.parse_expr()
        if self.accept("keyword", "post"):
            post = self.parse_expr()
        mod.function_defs.append(
            FunctionDef(name_tok.text, type_params, sig_type, ret_type, patterns, body, pre, post, loc)
        )

    # ---- state definition ----

    def parse_state_def(self, mod: SpecModule) -> None:
        kw = self.expect("keyword", "state")
        loc = self.loc(kw)
        name_tok = self.expect("ident")
        self.expect("keyword", "of")
        fields = self.parse_field_list()
        inv_pat = inv_expr = None
        init_pat = init_expr = None
        if self.accept("keyword", "inv"):
            inv_pat = self.parse_pattern()
            self.expect("op", "==")
            inv_expr = self.parse_expr()
        if self.accept("keyword", "init"):
            init_pat = self.parse_pattern()
            self.expect("op", "==")
            init_expr = self.parse_expr()
        self.expect("keyword", "end")
        self.accept("op", ";")
        if mod.state_def is not None:
            self.error("duplicate state definition", kw)
        mod.state_def = StateDef(name_tok.text, fields, inv_pat, inv_expr, init_pat, init_expr, loc)

    # ---- types ----

    def parse_type(self) -> TypeExpr:
        return self.parse_union_type()

    def parse_union_type(self) -> TypeExpr:
        members = [self.parse_product_type()]
        while self.accept("op", "|"):
            members.append(self.parse_product_type())
        if len(members) == 1:
            return members[0]
        return make_union(members)

    def parse_product_type(self) -> TypeExpr:
        items = [self.parse_basic_type()]
        while self.accept("op", "*"):
            items.append(self.parse_basic_type())
        if len(items) == 1:
            return items[0]
        return ProductType(tuple(items))

    def parse_basic_type(self) -> TypeExpr:
        t = self.peek()
        if t.kind == "keyword":
            simple = {"bool": BOOL, "nat": NAT, "nat1": NAT1, "int": INT, "real": REAL, "char": CHAR}
            if t.text in simple:
                self.advance()
                return simple[t.text]
            if t.text == "seq":
                self.advance()
                self.expect("keyword", "of")
                return SeqType(self.parse_basic_type())
            if t.text == "set":
                self.advance()
                self.expect("keyword", "of")
                return SetType(self.parse_basic_type())
            if t.text == "map":
                self.advance()
                dom = self.parse_basic_type()
                self.expect("keyword", "to")
                return MapType(dom, self.parse_basic_type())
        if t.kind == "quote":
            self.advance()
            return QuoteType(t.value)  # type: ignore[arg-type]
        if t.kind == "tparam":
            self.advance()
            return ParamType(t.value)  # type: ignore[arg-type]
        if t.kind == "ident":
            self.advance()
            return NamedType(t.text)
        if t.kind == "op" and t.text == "[":
            self.advance()
            inner = self.parse_type()
            self.expect("op", "]")
            return OptionalType(inner)
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.parse_type()
            self.expect("op", ")")
            return inner
        self.error(f"expected a type, found '{t.text if t.kind != 'eof' else 'end of file'}'")
        raise _Recover()

    # ---- patterns ----

    def parse_pattern(self) -> Pattern:
        t = self.peek()
        loc = self.loc(t)
        if t.kind == "op" and t.text == "-":
            nxt = self.peek(1)
            if nxt.kind == "num":
                self.advance()
                self.advance()
                val = nxt.value
                return PatLit(-val, loc)  # type: ignore[operator]
            self.advance()
            return PatWild(loc)
        if t.kind == "num":
            self.advance()
            return PatLit(t.value, loc)
        if t.kind == "char":
            self.advance()
            return PatLit(t.value, loc)
        if t.kind == "quote":
            self.advance()
            return PatQuote(t.value, loc)  # type: ignore[arg-type]
        if t.kind == "keyword" and t.text in ("true", "false"):
            self.advance()
            return PatLit(t.text == "true", loc)
        if t.kind == "keyword" and t.text == "nil":
            self.advance()
            return PatNil(loc)
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.parse_pattern()
            self.expect("op", ")")
            return inner
        if t.kind == "ident":
            name = t.text
            if name == "mk_":
                self.advance()
                self.expect("op", "(")
                items = [self.parse_pattern()]
                while self.accept("op", ","):
                    items.append(self.parse_pattern())
                self.expect("op", ")")
                if len(items) < 2:
                    self.error("tuple pattern needs at least two elements", t)
                return PatTuple(items, loc)
            if name.startswith("mk_") and len(name) > 3:
                self.advance()
                self.expect("op", "(")
                items: list[Pattern] = []
                if not self.at_op(")"):
                    items.append(self.parse_pattern())
                    while self.accept("op", ","):
                        items.append(self.parse_pattern())
                self.expect("op", ")")
                return PatRecord(name[3:], items, loc)
            self.advance()
            return PatVar(name, loc)
        self.error(f"expected a pattern, found '{t.text if t.kind != 'eof' else 'end of file'}'")
        raise _Recover()

    # ---- binds ----

    def parse_binds(self) -> list[Bind]:
        """Comma-separated bind groups, e.g. ``x:nat, y:seq of nat, a, b in set s``.

        Patterns inside a group share one type/set; each pattern becomes its own Bind.
        """
        binds: list[Bind] = []
        while True:
            pats: list[Pattern] = [self.parse_pattern()]
            while self.at_op(","):
                self.advance()
                pats.append(self.parse_pattern())
                if self.at_op(":") or (self.at_kw("in") and self.peek(1).text == "set"):
                    break
            if self.accept("op", ":"):
                dtype = self.parse_type()
                binds.extend(Bind(p, dtype, None, p.loc) for p in pats)
            elif self.at_kw("in") and self.peek(1).kind == "keyword" and self.peek(1).text == "set":
                self.advance()
                self.advance()
                src = self.parse_expr()
                # placeholder type; the checker replaces it with the element type
                binds.extend(Bind(p, NamedType("?set"), src, p.loc) for p in pats)
            else:
                self.error(f"expected ':' or 'in set' in binding, found '{self.peek().text}'")
                raise _Recover()
            if not self.accept("op", ","):
                return binds

    # ---- expressions ----

    def parse_expr(self) -> Expr:
        t = self.peek()
        if t.kind == "keyword":
            if t.text == "forall":
                return self.parse_quantifier(Forall)
            if t.text == "exists":
                return self.parse_quantifier(Exists)
            if t.text == "if":
                return self.parse_if()
            if t.text == "let":
                return self.parse_let()
            if t.text == "cases":
                return self.parse_cases()
        return self.parse_iff()

    def parse_quantifier(self, ctor) -> Expr:
        kw = self.advance()
        loc = self.loc(kw)
        binds = self.parse_binds()
        self.expect("op", "&")
        body = self.parse_expr()
        return ctor(binds, body, loc)

    def parse_if(self) -> Expr:
        kw = self.advance()
        loc = self.loc(kw)
        cond = self.parse_expr()
        self.expect("keyword", "then")
        then_branch = self.parse_expr()
        elifs: list[tuple[Expr, Expr]] = []
        while self.accept("keyword", "elseif"):
            c = self.parse_expr()
            self.expect("keyword", "then")
            elifs.append((c, self.parse_expr()))
        self.expect("keyword", "else")
        else_branch = self.parse_expr()
        return IfExpr(cond, then_branch, elifs, else_branch, loc)

    def parse_let(self) -> Expr:
        kw = self.advance()
        loc = self.loc(kw)
        save = self.pos
        save_diag = len(self.diagnostics)
        try:
            binds = self.parse_binds()
            if self.at_kw("be"):
                self.advance()
                self.expect("keyword", "st")
                pred = self.parse_expr()
                self.expect("keyword", "in")
                body = self.parse_expr()
                return LetBeExpr(binds, pred, body, loc)
        except _Recover:
            pass
        self.pos = save
        del self.diagnostics[save_diag:]
        defs: list[tuple[Pattern, Expr]] = []
        while True:
            pat = self.parse_pattern()
            self.expect("op", "=")
            defs.append((pat, self.parse_expr()))
            if not self.accept("op", ","):
                break
        self.expect("keyword", "in")
        return LetExpr(defs, self.parse_expr(), loc)

    def parse_cases(self) -> Expr:
        kw = self.advance()
        loc = self.loc(kw)
        scrutinee = self.parse_expr()
        self.expect("op", ":")
        clauses: list[CaseClause] = []
        others: Expr | None = None
        while True:
            if self.at_kw("end"):
                break
            if self.accept("keyword", "others"):
                self.expect("op", "->")
                others = self.parse_expr()
                self.accept("op", ",")
                continue
            pats = [self.parse_pattern()]
            while self.accept("op", ","):
                pats.append(self.parse_pattern())
            self.expect("op", "->")
            result = self.parse_expr()
            clauses.append(CaseClause(pats, result))
            if not self.accept("op", ","):
                break
        self.expect("keyword", "end")
        if not clauses and others is None:
            self.error("cases expression has no alternatives", kw)
        return CasesExpr(scrutinee, clauses, others, loc)

    def parse_iff(self) -> Expr:
        left = self.parse_implies()
        if self.at_op("<=>"):
            op_tok = self.advance()
            right = self.parse_iff()
            return Binary("<=>", left, right, self.loc(op_tok))
        return left

    def parse_implies(self) -> Expr:
        left = self.parse_or()
        if self.at_op("=>"):
            op_tok = self.advance()
            right = self.parse_implies()
            return Binary("=>", left, right, self.loc(op_tok))
        return left

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.at_kw("or"):
            op_tok = self.advance()
            left = Binary("or", left, self.parse_and(), self.loc(op_tok))
        return left

    def parse_and(self) -> Expr:
        left = self.parse_not()
        while self.at_kw("and"):
            op_tok = self.advance()
            left = Binary("and", left, self.parse_not(), self.loc(op_tok))
        return left

    def parse_not(self) -> Expr:
        if self.at_kw("not"):
            tok = self.advance()
            return Unary("not", self.parse_not(), self.loc(tok))
        return self.parse_relational()

    def parse_relational(self) -> Expr:
        left = self.parse_additive()
        while True:
            t = self.peek()
            if t.kind == "op" and t.text in REL_OPS:
                self.advance()
                left = Binary(t.text, left, self.parse_additive(), self.loc(t))
            elif t.kind == "keyword" and t.text in ("subset", "psubset"):
                self.advance()
                left = Binary(t.text, left, self.parse_additive(), self.loc(t))
            elif t.kind == "keyword" and t.text == "in" and self.peek(1).text == "set":
                self.advance()
                self.advance()
                left = Binary("in set", left, self.parse_additive(), self.loc(t))
            elif (
                t.kind == "keyword"
                and t.text == "not"
                and self.peek(1).text == "in"
                and self.peek(2).text == "set"
            ):
                self.advance()
                self.advance()
                self.advance()
                left = Binary("not in set", left, self.parse_additive(), self.loc(t))
            else:
                return left

    def parse_additive(self) -> Expr:
        left = self.parse_multiplicative()
        while True:
            t = self.peek()
            if (t.kind == "op" and t.text in ADD_OPS) or (
                t.kind == "keyword" and t.text in ("union", "munion")
            ):
                self.advance()
                left = Binary(t.text, left, self.parse_multiplicative(), self.loc(t))
            else:
                return left

    def parse_multiplicative(self) -> Expr:
        left = self.parse_unary()
        while True:
            t = self.peek()
            if (t.kind == "op" and t.text in MUL_OPS) or (
                t.kind == "keyword" and t.text in ("div", "mod", "inter")
            ):
                self.advance()
                left = Binary(t.text, left, self.parse_unary(), self.loc(t))
            else:
                return left

    def parse_unary(self) -> Expr:
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.advance()
            return Unary("-", self.parse_unary(), self.loc(t))
        if t.kind == "keyword" and t.text in UNARY_KEYWORDS:
            self.advance()
            return Unary(t.text, self.parse_unary(), self.loc(t))
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        base_tok = self.peek()
        e = self.parse_atom()
        base_loc = Loc(self.filename, base_tok.line, base_tok.col)
        while True:
            if self.at_op("("):
                self.advance()
                args: list[Expr] = []
                if not self.at_op(")"):
                    args.append(self.parse_expr())
                    while self.accept("op", ","):
                        args.append(self.parse_expr())
                self.expect("op", ")")
                e = Apply(e, args, base_loc)
            elif self.at_op(".#"):
                tok = self.advance()
                num = self.expect("num")
                if not isinstance(num.value, int) or num.value < 1:
                    self.error("tuple selector must be a positive integer", num)
                    raise _Recover()
                e = TupleSel(e, num.value, self.loc(tok))
            elif self.at_op(".") and self.peek(1).kind in ("ident", "keyword"):
                tok = self.advance()
                fname = self.advance().text
                e = FieldSel(e, fname, self.loc(tok))
            else:
                return e

    def parse_atom(self) -> Expr:
        t = self.peek()
        loc = self.loc(t)
        if t.kind == "num":
            self.advance()
            return Lit(t.value, loc)  # type: ignore[arg-type]
        if t.kind == "char":
            self.advance()
            return CharLit(t.value, loc)  # type: ignore[arg-type]
        if t.kind == "quote":
            self.advance()
            return QuoteLit(t.value, loc)  # type: ignore[arg-type]
        if t.kind == "keyword":
            if t.text in ("true", "false"):
                self.advance()
                return Lit(t.text == "true", loc)
            if t.text == "nil":
                self.advance()
                return NilLit(loc)
        if t.kind == "ident":
            name = t.text
            if name == "mk_":
                self.advance()
                self.expect("op", "(")
                items = [self.parse_expr()]
                while self.accept("op", ","):
                    items.append(self.parse_expr())
                self.expect("op", ")")
                if len(items) < 2:
                    self.error("tuple constructor needs at least two elements", t)
                    raise _Recover()
                return TupleCtor(items, loc)
            if name.startswith("mk_") and len(name) > 3:
                self.advance()
                self.expect("op", "(")
                args: list[Expr] = []
                if not self.at_op(")"):
                    args.append(self.parse_expr())
                    while self.accept("op", ","):
                        args.append(self.parse_expr())
                self.expect("op", ")")
                return RecordCtor(name[3:], args, loc)
            self.advance()
            if self.at_op("["):
                save = self.pos
                save_diag = len(self.diagnostics)
                self.advance()
                try:
                    targs = [self.parse_type()]
                    while self.accept("op", ","):
                        targs.append(self.parse_type())
                    self.expect("op", "]")
                    return FnInst(name, targs, loc)
                except _Recover:
                    self.pos = save
                    del self.diagnostics[save_diag:]
            return Var(name, loc)
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect("op", ")")
            return Paren(inner, loc)
        if t.kind == "op" and t.text == "[":
            return self.parse_seq_atom(loc)
        if t.kind == "op" and t.text == "{":
            return self.parse_set_or_map_atom(loc)
        shown = t.text if t.kind != "eof" else "end of file"
        self.error(f"expected an expression, found '{shown}'")
        raise _Recover()

    def parse_seq_atom(self, loc: Loc) -> Expr:
        self.advance()  # '['
        if self.accept("op", "]"):
            return SeqEnum([], loc)
        first = self.parse_expr()
        if self.accept("op", "|"):
            binds = self.parse_binds()
            pred = self.parse_expr() if self.accept("op", "&") else None
            self.expect("op", "]")
            return SeqComp(first, binds, pred, loc)
        items = [first]
        while self.accept("op", ","):
            items.append(self.parse_expr())
        self.expect("op", "]")
        return SeqEnum(items, loc)

    def parse_set_or_map_atom(self, loc: Loc) -> Expr:
        self.advance()  # '{'
        if self.accept("op", "}"):
            return SetEnum([], loc)
        if self.accept("op", "|->"):
            self.expect("op", "}")
            return MapEnum([], loc)
        first = self.parse_expr()
        if self.accept("op", "|->"):
            pairs = [(first, self.parse_expr())]
            while self.accept("op", ","):
                k = self.parse_expr()
                self.expect("op", "|->")
                pairs.append((k, self.parse_expr()))
            self.expect("op", "}")
            return MapEnum(pairs, loc)
        if self.accept("op", "|"):
            binds = self.parse_binds()
            pred = self.parse_expr() if self.accept("op", "&") else None
            self.expect("op", "}")
            return SetComp(first, binds, pred, loc)
        if self.at_op(",") and self.peek(1).kind == "op" and self.peek(1).text == "...":
            self.advance()
            self.advance()
            self.expect("op", ",")
            hi = self.parse_expr()
            self.expect("op", "}")
            return SetRange(first, hi, loc)
        items = [first]
        while self.accept("op", ","):
            items.append(self.parse_expr())
        self.expect("op", "}")
        return SetEnum(items, loc)


# ---- annotation comments ----


def _parse_annotation(comment: Comment, filename: str) -> QuickCheckAnnotation | None:
    text = comment.text.strip()
    if not text.startswith("@QuickCheck"):
        return None
    rest = text[len("@QuickCheck") :].strip()
    if rest.endswith(";"):
        rest = rest[:-1]
    loc = Loc(filename, comment.line, comment.col)
    try:
        toks, _ = tokenize(rest)
    except LexError as e:
        raise SpecParseError([Diagnostic(f"bad @QuickCheck annotation: {e.message}", loc)])
    p = Parser(toks, filename)
    try:
        tp = p.expect("tparam")
        p.expect("op", "=")
        types = [p.parse_type()]
        while p.accept("op", ","):
            types.append(p.parse_type())
        if p.peek().kind != "eof":
            p.error(f"unexpected '{p.peek().text}' in annotation")
            raise _Recover()
    except _Recover:
        msgs = p.diagnostics or [Diagnostic("bad @QuickCheck annotation", loc)]
        raise SpecParseError([Diagnostic(f"bad @QuickCheck annotation: {d.message}", loc) for d in msgs])
    return QuickCheckAnnotation("", tp.value, types, loc)  # type: ignore[arg-type]


def _attach_annotations(mod: SpecModule, annos: list[QuickCheckAnnotation]) -> None:
    funcs = sorted(mod.function_defs, key=lambda f: f.loc.line)
    for a in annos:
        target = None
        for f in funcs:
            if f.loc.line > a.loc.line:
                target = f
                break
        if target is not None:
            a.function_name = target.name
        mod.annotations.append(a)


# ---- entry points ----


def parse_module(text: str, filename: str) -> SpecModule:
    """Parse a whole source file. Raises SpecParseError listing every diagnostic."""
    try:
        tokens, comments = tokenize(text)
    except LexError as e:
        raise SpecParseError([Diagnostic(e.message, Loc(filename, e.line, e.col))])
    parser = Parser(tokens, filename)
    try:
        mod = parser.parse_document()
    except _Recover:
        mod = SpecModule()
    if parser.diagnostics:
        raise SpecParseError(parser.diagnostics)
    annos = [a for c in comments if (a := _parse_annotation(c, filename)) is not None]
    _attach_annotations(mod, annos)
    return mod


def parse_expression(text: str, filename: str = "console") -> Expr:
    """Parse a single expression, e.g. from the REPL's print command."""
    try:
        tokens, _ = tokenize(text)
    except LexError as e:
        raise SpecParseError([Diagnostic(e.message, Loc(filename, e.line, e.col))])
    parser = Parser(tokens, filename)
    try:
        expr = parser.parse_expr()
        if parser.peek().kind != "eof":
            parser.error(f"unexpected '{parser.peek().text}' after expression")
            raise _Recover()
    except _Recover:
        raise SpecParseError(parser.diagnostics or [Diagnostic("parse error", Loc(filename, 1, 1))])
    if parser.diagnostics:
        raise SpecParseError(parser.diagnostics)
    return expr
