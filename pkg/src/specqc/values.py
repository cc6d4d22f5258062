"""Runtime values, type cardinality, and value generation (fixed/exhaustive/random)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .ast import (
    BoolType, CharType, IntType, MapType, Nat1Type, NatType, NamedType,
    OptionalType, ParamType, ProductType, QuoteType, RealType, RecordType,
    SeqType, SetType, SpecModule, TypeDef, TypeExpr, UnionType,
    Binary, Lit, Paren, PatVar, Var,
)
from .checker import invariant_chain, unfold
from .render import format_rational


@dataclass(frozen=True)
class Value:
    pass


@dataclass(frozen=True)
class BoolVal(Value):
    b: bool


@dataclass(frozen=True)
class IntVal(Value):
    i: int


@dataclass(frozen=True)
class RatVal(Value):
    r: Fraction  # never integral; use mk_number


@dataclass(frozen=True)
class CharVal(Value):
    c: str


@dataclass(frozen=True)
class QuoteVal(Value):
    tag: str


@dataclass(frozen=True)
class SeqVal(Value):
    items: tuple[Value, ...]


@dataclass(frozen=True)
class SetVal(Value):
    items: tuple[Value, ...]  # canonical order, no duplicates; use mk_set


@dataclass(frozen=True)
class MapVal(Value):
    pairs: tuple[tuple[Value, Value], ...]  # canonical key order; use mk_map


@dataclass(frozen=True)
class TupleVal(Value):
    items: tuple[Value, ...]


@dataclass(frozen=True)
class RecordVal(Value):
    name: str
    fields: tuple[Value, ...]


@dataclass(frozen=True)
class NilVal(Value):
    pass


TRUE = BoolVal(True)
FALSE = BoolVal(False)
NIL = NilVal()


def mk_number(x: int | Fraction) -> Value:
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return IntVal(int(x))
        return RatVal(x)
    return IntVal(int(x))


def is_number(v: Value) -> bool:
    return isinstance(v, (IntVal, RatVal))


def as_fraction(v: Value) -> Fraction:
    if isinstance(v, IntVal):
        return Fraction(v.i)
    if isinstance(v, RatVal):
        return v.r
    raise TypeError(f"not a number: {v}")


_TAG_ORDER = {
    NilVal: 0, BoolVal: 1, IntVal: 2, RatVal: 2, CharVal: 3, QuoteVal: 4,
    SeqVal: 5, SetVal: 6, MapVal: 7, TupleVal: 8, RecordVal: 9,
}


def value_key(v: Value):
    """Total order key over all values; numerics compare by magnitude."""
    tag = _TAG_ORDER[type(v)]
    if isinstance(v, NilVal):
        return (tag,)
    if isinstance(v, BoolVal):
        return (tag, v.b)
    if isinstance(v, (IntVal, RatVal)):
        return (tag, as_fraction(v))
    if isinstance(v, CharVal):
        return (tag, v.c)
    if isinstance(v, QuoteVal):
        return (tag, v.tag)
    if isinstance(v, (SeqVal, TupleVal)):
        return (tag, tuple(value_key(x) for x in v.items))
    if isinstance(v, SetVal):
        return (tag, tuple(value_key(x) for x in v.items))
    if isinstance(v, MapVal):
        return (tag, tuple((value_key(k), value_key(x)) for k, x in v.pairs))
    if isinstance(v, RecordVal):
        return (tag, v.name, tuple(value_key(x) for x in v.fields))
    raise TypeError(f"value_key: {type(v).__name__}")


def mk_set(items: Iterable[Value]) -> SetVal:
    dedup: list[Value] = []
    for x in items:
        if x not in dedup:
            dedup.append(x)
    return SetVal(tuple(sorted(dedup, key=value_key)))


def mk_map(pairs: Iterable[tuple[Value, Value]]) -> MapVal:
    acc: list[tuple[Value, Value]] = []
    for k, v in pairs:
        for k2, v2 in acc:
            if k2 == k:
                if v2 != v:
                    raise ValueError("duplicate map key with conflicting values")
                break
        else:
            acc.append((k, v))
    return MapVal(tuple(sorted(acc, key=lambda kv: value_key(kv[0]))))


def render_value(v: Value) -> str:
    if isinstance(v, BoolVal):
        return "true" if v.b else "false"
    if isinstance(v, IntVal):
        return str(v.i)
    if isinstance(v, RatVal):
        return format_rational(v.r)
    if isinstance(v, CharVal):
        return f"'{v.c}'"
    if isinstance(v, QuoteVal):
        return f"<{v.tag}>"
    if isinstance(v, NilVal):
        return "nil"
    if isinstance(v, SeqVal):
        return "[" + ", ".join(render_value(x) for x in v.items) + "]"
    if isinstance(v, SetVal):
        return "{" + ", ".join(render_value(x) for x in v.items) + "}"
    if isinstance(v, MapVal):
        if not v.pairs:
            return "{|->}"
        return "{" + ", ".join(f"{render_value(k)} |-> {render_value(x)}" for k, x in v.pairs) + "}"
    if isinstance(v, TupleVal):
        return "mk_(" + ", ".join(render_value(x) for x in v.items) + ")"
    if isinstance(v, RecordVal):
        return f"mk_{v.name}(" + ", ".join(render_value(x) for x in v.fields) + ")"
    raise TypeError(f"render_value: {type(v).__name__}")


# printable-first alphabet for char generation (full 7-bit range, 128 chars)
_PRINTABLE = (
    "abcdefghijklmnopqrstuvwxyz"
    "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    "0123456789"
    " !\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~"
)
CHAR_ALPHABET: list[str] = list(_PRINTABLE) + [
    chr(c) for c in range(128) if chr(c) not in _PRINTABLE
]

# a value count beyond this is reported as None ("infinite or intractably many")
CARD_CEILING = 10**9

InvEval = Callable[[TypeDef, Value], bool]


def cardinality(t: TypeExpr, mod: SpecModule, cap: int = CARD_CEILING,
                _seen: frozenset = frozenset()) -> Optional[int]:
    """Exact number of values of t ignoring invariants; None when infinite
    (or above cap, which defaults to a bound treated as effectively infinite)."""
    if isinstance(t, BoolType):
        return 2 if cap >= 2 else None
    if isinstance(t, CharType):
        return 128 if cap >= 128 else None
    if isinstance(t, QuoteType):
        return 1
    if isinstance(t, (NatType, Nat1Type, IntType, RealType, SeqType, ParamType)):
        return None
    if isinstance(t, NamedType):
        if t.name in _seen:
            return None  # recursive type
        td = mod.type_def(t.name)
        if td is None:
            return None
        return cardinality(td.body, mod, cap, _seen | {t.name})
    if isinstance(t, SetType):
        c = cardinality(t.elem, mod, cap.bit_length(), _seen)
        if c is None:
            return None
        n = 2**c
        return n if n <= cap else None
    if isinstance(t, MapType):
        d = cardinality(t.dom, mod, cap.bit_length(), _seen)
        r = cardinality(t.rng, mod, cap, _seen)
        if d is None or r is None:
            return None
        n = (r + 1) ** d
        return n if n <= cap else None
    if isinstance(t, (ProductType, RecordType)):
        items = t.items if isinstance(t, ProductType) else tuple(ft for _, ft in t.fields)
        n = 1
        for x in items:
            c = cardinality(x, mod, cap, _seen)
            if c is None:
                return None
            n *= c
            if n > cap:
                return None
        return n
    if isinstance(t, OptionalType):
        c = cardinality(t.inner, mod, cap, _seen)
        if c is None:
            return None
        return c + 1 if c + 1 <= cap else None
    if isinstance(t, UnionType):
        # members are structurally deduplicated at construction, so the sum is
        # exact unless aliases overlap structurally distinct spellings
        total = 0
        for m in t.members:
            c = cardinality(m, mod, cap, _seen)
            if c is None:
                return None
            total += c
            if total > cap:
                return None
        return total
    raise TypeError(f"cardinality: {type(t).__name__}")


# ---- invariant-bound extraction ----


def _strip(e):
    while isinstance(e, Paren):
        e = e.inner
    return e


def _conjuncts(e) -> list:
    e = _strip(e)
    if isinstance(e, Binary) and e.op == "and":
        return _conjuncts(e.left) + _conjuncts(e.right)
    return [e]


def _literal_int(e) -> Optional[int]:
    e = _strip(e)
    if isinstance(e, Lit) and isinstance(e.value, int) and not isinstance(e.value, bool):
        return e.value
    return None


def extract_bounds(td: TypeDef) -> tuple[Optional[int], Optional[int]]:
    """Syntactic (lower, upper) integer bounds implied by a type invariant.

    Only recognizes conjuncts comparing the invariant variable to an integer
    literal; anything else contributes no bound.
    """
    if td.inv_expr is None or not isinstance(td.inv_pattern, PatVar):
        return None, None
    var = td.inv_pattern.name
    lo: Optional[int] = None
    hi: Optional[int] = None

    def tighten_lo(k: int) -> None:
        nonlocal lo
        lo = k if lo is None else max(lo, k)

    def tighten_hi(k: int) -> None:
        nonlocal hi
        hi = k if hi is None else min(hi, k)

    for c in _conjuncts(td.inv_expr):
        if not isinstance(c, Binary):
            continue
        left, right = _strip(c.left), _strip(c.right)
        if isinstance(left, Var) and left.name == var:
            k = _literal_int(right)
            if k is None:
                continue
            op = c.op
        elif isinstance(right, Var) and right.name == var:
            k = _literal_int(left)
            if k is None:
                continue
            op = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "="}.get(c.op)
            if op is None:
                continue
        else:
            continue
        if op == "<":
            tighten_hi(k - 1)
        elif op == "<=":
            tighten_hi(k)
        elif op == ">":
            tighten_lo(k + 1)
        elif op == ">=":
            tighten_lo(k)
        elif op == "=":
            tighten_lo(k)
            tighten_hi(k)
    return lo, hi


# ---- exhaustive enumeration ----


def enumerate_all(t: TypeExpr, limit: int, mod: SpecModule,
                  inv_eval: InvEval | None = None) -> tuple[list[Value], bool]:
    """All values of t (invariant-filtered) when that is tractable within limit.

    Returns (values, exhausted). exhausted=False means the type could not be
    fully enumerated under the limit; the value list is then empty.
    """
    vals, exhausted = _enum(t, limit, mod, inv_eval, frozenset())
    if not exhausted:
        return [], False
    return vals, True


def _filter_chain(vals: list[Value], t: TypeExpr, mod: SpecModule,
                  inv_eval: InvEval | None) -> list[Value]:
    chain = invariant_chain(t, mod) if isinstance(t, NamedType) else []
    if not chain:
        return vals
    out = []
    for v in vals:
        ok = True
        for td in chain:
            if inv_eval is None:
                continue
            try:
                if not inv_eval(td, v):
                    ok = False
                    break
            except Exception:
                ok = False  # invariant error: candidate discarded
                break
        if ok:
            out.append(v)
    return out


def _enum(t: TypeExpr, limit: int, mod: SpecModule, inv_eval: InvEval | None,
          seen: frozenset) -> tuple[list[Value], bool]:
    if isinstance(t, NamedType):
        if t.name in seen:
            return [], False
        td = mod.type_def(t.name)
        if td is None:
            return [], False
        vals, ok = _enum(td.body, limit, mod, inv_eval, seen | {t.name})
        if not ok and td.has_invariant:
            vals, ok = _enum_bounded(td, limit, mod)
        if not ok:
            return [], False
        if td.has_invariant:
            if inv_eval is None:
                return [], False  # cannot honor the invariant without an evaluator
            vals = _filter_chain(vals, NamedType(t.name), mod, inv_eval)
        return vals, True
    if isinstance(t, BoolType):
        return [FALSE, TRUE][:], limit >= 2
    if isinstance(t, CharType):
        if limit < 128:
            return [], False
        return [CharVal(c) for c in sorted(CHAR_ALPHABET)], True
    if isinstance(t, QuoteType):
        return [QuoteVal(t.tag)], limit >= 1
    if isinstance(t, (NatType, Nat1Type, IntType, RealType, SeqType, ParamType)):
        return [], False
    if isinstance(t, SetType):
        elems, ok = _enum(t.elem, limit.bit_length(), mod, inv_eval, seen)
        if not ok or 2 ** len(elems) > limit:
            return [], False
        out = []
        for r in range(len(elems) + 1):
            for combo in itertools.combinations(elems, r):
                out.append(mk_set(combo))
        return out, True
    if isinstance(t, MapType):
        doms, ok1 = _enum(t.dom, limit.bit_length(), mod, inv_eval, seen)
        rngs, ok2 = _enum(t.rng, limit, mod, inv_eval, seen)
        if not ok1 or not ok2 or (len(rngs) + 1) ** len(doms) > limit:
            return [], False
        out = []
        for size in range(len(doms) + 1):
            for dom_combo in itertools.combinations(doms, size):
                for rng_combo in itertools.product(rngs, repeat=size):
                    out.append(mk_map(zip(dom_combo, rng_combo)))
        return out, True
    if isinstance(t, (ProductType, RecordType)):
        parts = t.items if isinstance(t, ProductType) else tuple(ft for _, ft in t.fields)
        pools = []
        total = 1
        for p in parts:
            vals, ok = _enum(p, limit, mod, inv_eval, seen)
            if not ok:
                return [], False
            pools.append(vals)
            total *= len(vals)
            if total > limit:
                return [], False
        combos = itertools.product(*pools)
        if isinstance(t, ProductType):
            return [TupleVal(c) for c in combos], True
        return [RecordVal(t.name, c) for c in combos], True
    if isinstance(t, OptionalType):
        vals, ok = _enum(t.inner, limit - 1 if limit > 0 else 0, mod, inv_eval, seen)
        if not ok:
            return [], False
        return [NIL] + vals, True
    if isinstance(t, UnionType):
        out: list[Value] = []
        for m in t.members:
            vals, ok = _enum(m, limit, mod, inv_eval, seen)
            if not ok:
                return [], False
            for v in vals:
                if v not in out:
                    out.append(v)
            if len(out) > limit:
                return [], False
        return out, True
    raise TypeError(f"enumerate: {type(t).__name__}")


def _enum_bounded(td: TypeDef, limit: int, mod: SpecModule) -> tuple[list[Value], bool]:
    """Enumerate an invariant-restricted numeric type via syntactic bounds."""
    base = unfold(td.body, mod)
    if not isinstance(base, (NatType, Nat1Type, IntType)):
        return [], False
    lo, hi = extract_bounds(td)
    if isinstance(base, NatType):
        lo = 0 if lo is None else max(lo, 0)
    elif isinstance(base, Nat1Type):
        lo = 1 if lo is None else max(lo, 1)
    if lo is None or hi is None or hi - lo + 1 > limit:
        return [], False
    if hi < lo:
        return [], True
    return [IntVal(i) for i in range(lo, hi + 1)], True


# ---- fixed (deterministic) generation ----


def _int_range(size: int) -> list[int]:
    lo = -(size // 2)
    hi = (size + 1) // 2 - 1
    return list(range(lo, hi + 1))


def fixed_values(t: TypeExpr, size: int, mod: SpecModule,
                 inv_eval: InvEval | None = None) -> list[Value]:
    """Deterministic value sample for t, at most size values, zero-centered
    numerics, small compound values first."""
    assert size >= 1
    card = cardinality(t, mod, cap=size)
    if card is not None and card <= size:
        vals, ok = _enum(t, size, mod, inv_eval, frozenset())
        if ok:
            return vals
    return _fixed(t, size, mod, inv_eval, frozenset())


def _fixed(t: TypeExpr, size: int, mod: SpecModule, inv_eval: InvEval | None,
           seen: frozenset) -> list[Value]:
    if isinstance(t, BoolType):
        return [FALSE, TRUE][: max(size, 1)]
    if isinstance(t, CharType):
        return [CharVal(c) for c in CHAR_ALPHABET[:size]]
    if isinstance(t, QuoteType):
        return [QuoteVal(t.tag)]
    if isinstance(t, IntType):
        return [IntVal(i) for i in _int_range(size)]
    if isinstance(t, NatType):
        return [IntVal(i) for i in range(size)]
    if isinstance(t, Nat1Type):
        return [IntVal(i) for i in range(1, size + 1)]
    if isinstance(t, RealType):
        ints = _int_range(size)
        cands = {Fraction(i) for i in ints} | {Fraction(i, 2) for i in ints}
        ordered = sorted(cands, key=lambda f: (abs(f), f))
        return [mk_number(f) for f in ordered[:size]]
    if isinstance(t, NamedType):
        if t.name in seen:
            return []
        td = mod.type_def(t.name)
        if td is None:
            return []
        vals = _fixed(td.body, size, mod, inv_eval, seen | {t.name})
        if td.has_invariant:
            vals = _filter_chain(vals, t, mod, inv_eval)
        return vals
    if isinstance(t, SeqType):
        pool = _fixed(t.elem, size, mod, inv_eval, seen)
        out: list[Value] = []
        length = 0
        while len(out) < size:
            if length > 0 and not pool:
                break
            added = False
            for combo in itertools.product(pool, repeat=length):
                out.append(SeqVal(combo))
                added = True
                if len(out) >= size:
                    break
            if length > 0 and not added:
                break
            length += 1
        return out[:size]
    if isinstance(t, SetType):
        pool = _fixed(t.elem, size, mod, inv_eval, seen)
        out = []
        for r in range(len(pool) + 1):
            for combo in itertools.combinations(pool, r):
                out.append(mk_set(combo))
                if len(out) >= size:
                    return out
        return out
    if isinstance(t, MapType):
        dpool = _fixed(t.dom, size, mod, inv_eval, seen)
        rpool = _fixed(t.rng, size, mod, inv_eval, seen)
        out = []
        for r in range(len(dpool) + 1):
            if r > 0 and not rpool:
                break
            for dom_combo in itertools.combinations(dpool, r):
                for rng_combo in itertools.product(rpool, repeat=r):
                    out.append(mk_map(zip(dom_combo, rng_combo)))
                    if len(out) >= size:
                        return out
        return out
    if isinstance(t, (ProductType, RecordType)):
        parts = t.items if isinstance(t, ProductType) else tuple(ft for _, ft in t.fields)
        pools = [_fixed(p, size, mod, inv_eval, seen) for p in parts]
        if any(not p for p in pools):
            return []
        combos = _diagonal_product(pools, size)
        if isinstance(t, ProductType):
            return [TupleVal(tuple(c)) for c in combos]
        return [RecordVal(t.name, tuple(c)) for c in combos]
    if isinstance(t, OptionalType):
        return ([NIL] + _fixed(t.inner, size, mod, inv_eval, seen))[:size]
    if isinstance(t, UnionType):
        pools = [_fixed(m, size, mod, inv_eval, seen) for m in t.members]
        out = []
        for layer in itertools.zip_longest(*pools):
            for v in layer:
                if v is not None and v not in out:
                    out.append(v)
                    if len(out) >= size:
                        return out
        return out
    if isinstance(t, ParamType):
        raise ValueError(f"unsubstituted type parameter @{t.name}")
    raise TypeError(f"fixed_values: {type(t).__name__}")


def _diagonal_product(pools: list[list[Value]], size: int) -> list[list[Value]]:
    """Tuples ordered by total pool-index sum (small combinations first)."""
    out: list[list[Value]] = []
    max_sum = sum(len(p) - 1 for p in pools)
    for s in range(max_sum + 1):
        for idx in _index_sums(len(pools), s, [len(p) for p in pools]):
            out.append([pools[i][j] for i, j in enumerate(idx)])
            if len(out) >= size:
                return out
    return out


def _index_sums(n: int, total: int, limits: list[int]):
    if n == 1:
        if total < limits[0]:
            yield (total,)
        return
    for first in range(min(total, limits[0] - 1) + 1):
        for rest in _index_sums(n - 1, total - first, limits[1:]):
            yield (first, *rest)


# ---- random generation ----


def random_value(t: TypeExpr, rng, ordinal: int, mod: SpecModule,
                 inv_eval: InvEval | None = None) -> Optional[Value]:
    """One pseudo-random value; integer draws for the k-th value stay within
    [-10k, 10k]. Returns None when invariant rejection exhausts its retries."""
    for _ in range(100):
        v = _random(t, rng, ordinal, mod)
        if v is None:
            return None
        if type_membership(v, t, mod, inv_eval):
            return v
    return None


def _random(t: TypeExpr, rng, k: int, mod: SpecModule) -> Optional[Value]:
    bound = 10 * k
    if isinstance(t, BoolType):
        return TRUE if rng.random() < 0.5 else FALSE
    if isinstance(t, CharType):
        return CharVal(CHAR_ALPHABET[rng.randrange(len(CHAR_ALPHABET))])
    if isinstance(t, QuoteType):
        return QuoteVal(t.tag)
    if isinstance(t, IntType):
        return IntVal(rng.randint(-bound, bound))
    if isinstance(t, NatType):
        return IntVal(max(0, rng.randint(-bound, bound)))
    if isinstance(t, Nat1Type):
        return IntVal(max(1, rng.randint(-bound, bound)))
    if isinstance(t, RealType):
        return mk_number(Fraction(rng.randint(-2 * bound, 2 * bound), 2))
    if isinstance(t, NamedType):
        td = mod.type_def(t.name)
        if td is None:
            return None
        return _random(td.body, rng, k, mod)
    if isinstance(t, SeqType):
        n = rng.randint(0, 4)
        items = [_random(t.elem, rng, k, mod) for _ in range(n)]
        if any(x is None for x in items):
            return None
        return SeqVal(tuple(items))
    if isinstance(t, SetType):
        n = rng.randint(0, 4)
        items = [_random(t.elem, rng, k, mod) for _ in range(n)]
        if any(x is None for x in items):
            return None
        return mk_set(items)
    if isinstance(t, MapType):
        n = rng.randint(0, 3)
        pairs = []
        for _ in range(n):
            kk = _random(t.dom, rng, k, mod)
            vv = _random(t.rng, rng, k, mod)
            if kk is None or vv is None:
                return None
            pairs.append((kk, vv))
        try:
            return mk_map(pairs)
        except ValueError:
            return mk_map(dict(pairs).items())
    if isinstance(t, (ProductType, RecordType)):
        parts = t.items if isinstance(t, ProductType) else tuple(ft for _, ft in t.fields)
        items = [_random(p, rng, k, mod) for p in parts]
        if any(x is None for x in items):
            return None
        if isinstance(t, ProductType):
            return TupleVal(tuple(items))
        return RecordVal(t.name, tuple(items))
    if isinstance(t, OptionalType):
        if rng.random() < 0.2:
            return NIL
        return _random(t.inner, rng, k, mod)
    if isinstance(t, UnionType):
        m = t.members[rng.randrange(len(t.members))]
        return _random(m, rng, k, mod)
    if isinstance(t, ParamType):
        raise ValueError(f"unsubstituted type parameter @{t.name}")
    raise TypeError(f"random_value: {type(t).__name__}")


# ---- membership ----


def type_membership(v: Value, t: TypeExpr, mod: SpecModule,
                    inv_eval: InvEval | None = None,
                    _seen: frozenset = frozenset()) -> bool:
    """True iff v inhabits t, including numeric ranges and invariant chains."""
    if isinstance(t, BoolType):
        return isinstance(v, BoolVal)
    if isinstance(t, CharType):
        return isinstance(v, CharVal)
    if isinstance(t, QuoteType):
        return isinstance(v, QuoteVal) and v.tag == t.tag
    if isinstance(t, RealType):
        return is_number(v)
    if isinstance(t, IntType):
        return isinstance(v, IntVal)
    if isinstance(t, NatType):
        return isinstance(v, IntVal) and v.i >= 0
    if isinstance(t, Nat1Type):
        return isinstance(v, IntVal) and v.i >= 1
    if isinstance(t, NamedType):
        if (t.name, id(v)) in _seen:
            return True
        td = mod.type_def(t.name)
        if td is None:
            return False
        if not type_membership(v, td.body, mod, inv_eval, _seen | {(t.name, id(v))}):
            return False
        if td.has_invariant and inv_eval is not None:
            try:
                return bool(inv_eval(td, v))
            except Exception:
                return False
        return True
    if isinstance(t, SeqType):
        return isinstance(v, SeqVal) and all(
            type_membership(x, t.elem, mod, inv_eval, _seen) for x in v.items
        )
    if isinstance(t, SetType):
        return isinstance(v, SetVal) and all(
            type_membership(x, t.elem, mod, inv_eval, _seen) for x in v.items
        )
    if isinstance(t, MapType):
        return isinstance(v, MapVal) and all(
            type_membership(k, t.dom, mod, inv_eval, _seen)
            and type_membership(x, t.rng, mod, inv_eval, _seen)
            for k, x in v.pairs
        )
    if isinstance(t, ProductType):
        return isinstance(v, TupleVal) and len(v.items) == len(t.items) and all(
            type_membership(x, ti, mod, inv_eval, _seen)
            for x, ti in zip(v.items, t.items)
        )
    if isinstance(t, RecordType):
        return isinstance(v, RecordVal) and v.name == t.name and len(v.fields) == len(t.fields) and all(
            type_membership(x, ft, mod, inv_eval, _seen)
            for x, (_, ft) in zip(v.fields, t.fields)
        )
    if isinstance(t, OptionalType):
        return isinstance(v, NilVal) or type_membership(v, t.inner, mod, inv_eval, _seen)
    if isinstance(t, UnionType):
        return any(type_membership(v, m, mod, inv_eval, _seen) for m in t.members)
    if isinstance(t, ParamType):
        return False  # unsubstituted parameters admit nothing
    raise TypeError(f"type_membership: {type(t).__name__}")
