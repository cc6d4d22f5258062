"""Tokenizer for the specification language."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

KEYWORDS = {
    "module", "definitions", "end", "types", "values", "functions", "state",
    "of", "to", "inv", "init", "pre", "post",
    "if", "then", "elseif", "else", "cases", "others",
    "let", "in", "be", "st", "forall", "exists",
    "and", "or", "not",
    "abs", "floor", "hd", "tl", "len", "elems", "inds", "card",
    "dom", "rng", "power", "union", "inter", "munion", "div", "mod",
    "subset", "psubset",
    "bool", "nat", "nat1", "int", "real", "char",
    "seq", "set", "map",
    "true", "false", "nil",
}

# longest match first
OPERATORS = [
    "<=>", "|->", "...", "==>",
    "=>", "->", "==", "<>", "<=", ">=", ".#", "::", "++",
    "=", "<", ">", "+", "-", "*", "/", "^", "\\",
    "(", ")", "[", "]", "{", "}", ",", ";", ":", ".", "|", "&",
]


@dataclass
class Token:
    kind: str  # num | ident | keyword | quote | char | tparam | op | eof
    text: str
    line: int
    col: int
    value: object = None

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


@dataclass
class Comment:
    text: str  # without the leading '--'
    line: int
    col: int


class LexError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at line {line}:{col}")
        self.message = message
        self.line = line
        self.col = col


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def tokenize(text: str) -> tuple[list[Token], list[Comment]]:
    """Scan source text into tokens; returns (tokens, comments).

    Comments (``-- ...`` to end of line) are collected separately so that
    checker-level annotations embedded in them can be recovered.
    """
    tokens: list[Token] = []
    comments: list[Comment] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def advance(k: int = 1) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance()
            continue
        if c == "-" and text.startswith("--", i):
            start_line, start_col = line, col
            j = text.find("\n", i)
            if j < 0:
                j = n
            comments.append(Comment(text[i + 2 : j], start_line, start_col))
            advance(j - i)
            continue
        start_line, start_col = line, col
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            is_real = False
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                is_real = True
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            lexeme = text[i:j]
            if is_real:
                whole, frac = lexeme.split(".")
                val: object = Fraction(int(whole + frac), 10 ** len(frac))
            else:
                val = int(lexeme)
            tokens.append(Token("num", lexeme, start_line, start_col, val))
            advance(j - i)
            continue
        if _is_ident_start(c):
            j = i
            while j < n and _is_ident_char(text[j]):
                j += 1
            name = text[i:j]
            kind = "keyword" if name in KEYWORDS else "ident"
            tokens.append(Token(kind, name, start_line, start_col, name))
            advance(j - i)
            continue
        if c == "@":
            j = i + 1
            while j < n and _is_ident_char(text[j]):
                j += 1
            if j == i + 1:
                raise LexError("expected identifier after '@'", line, col)
            tokens.append(Token("tparam", text[i:j], start_line, start_col, text[i + 1 : j]))
            advance(j - i)
            continue
        if c == "'":
            if i + 2 < n and text[i + 2] == "'":
                tokens.append(Token("char", text[i : i + 3], start_line, start_col, text[i + 1]))
                advance(3)
                continue
            raise LexError("malformed char literal", line, col)
        if c == "<":
            # quote literal <Tag>: uppercase start, no spaces
            j = i + 1
            if j < n and text[j].isupper():
                k = j
                while k < n and _is_ident_char(text[k]):
                    k += 1
                if k < n and text[k] == ">":
                    tag = text[j:k]
                    tokens.append(Token("quote", text[i : k + 1], start_line, start_col, tag))
                    advance(k + 1 - i)
                    continue
        for op in OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token("op", op, start_line, start_col, op))
                advance(len(op))
                break
        else:
            raise LexError(f"unexpected character {c!r}", line, col)

    tokens.append(Token("eof", "", line, col))
    return tokens, comments
