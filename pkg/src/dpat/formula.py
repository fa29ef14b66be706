"""First-order formulas in the language of rings with counting quantifiers.

Surface syntax (ASCII, Unicode aliases in brackets)::

    formula  := implies
    implies  := disj ["->" implies]                 [→]
    disj     := conj {"|" conj}                     [∨]
    conj     := unary {"&" unary}                   [∧]
    unary    := "~" unary                           [¬]
              | quant IDENT unary
              | term "=" term
              | "(" formula ")"
    quant    := "E" | "A" | "#>=" INT | "#<=" INT   [∃ ∀ #≥ #≤ ∃≥ ∃≤]
    term     := prod {("+" | "-") prod}             [−]
    prod     := factor {"*" factor}                 [·]
    factor   := "-" factor | INT | IDENT | "(" term ")"

``E`` and ``A`` are reserved and cannot be used as variable names. A quantifier
body is a unary formula, so ``E y (y*y = x) & x = 1`` scopes ``y`` over the
atom only; the canonical printer always parenthesizes quantifier bodies.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple, Union

from .errors import FormulaSyntaxError

INT64_MAX = 2**63 - 1


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class IntConst:
    """Integer literal other than 0 and 1; shorthand for ±(1 + ... + 1)."""

    value: int


@dataclass(frozen=True)
class Add:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Sub:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Neg:
    arg: "Term"


@dataclass(frozen=True)
class Mul:
    left: "Term"
    right: "Term"


Term = Union[Var, Zero, One, IntConst, Add, Sub, Neg, Mul]


# ------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class CountAtLeast:
    """At least ``bound`` witnesses for ``var``."""

    bound: int
    var: str
    body: "Formula"

    def __post_init__(self):
        if not 1 <= self.bound <= INT64_MAX:
            raise ValueError(f"CountAtLeast bound must be >= 1, got {self.bound}")


@dataclass(frozen=True)
class CountAtMost:
    """At most ``bound`` witnesses for ``var``."""

    bound: int
    var: str
    body: "Formula"

    def __post_init__(self):
        if not 0 <= self.bound <= INT64_MAX:
            raise ValueError(f"CountAtMost bound must be >= 0, got {self.bound}")


Formula = Union[Eq, Not, And, Or, Implies, Exists, Forall, CountAtLeast, CountAtMost]
QUANTIFIERS = (Exists, Forall, CountAtLeast, CountAtMost)
BINARY_CONNECTIVES = (And, Or, Implies)
BINARY_TERMS = (Add, Sub, Mul)


# ---------------------------------------------------------------- lexer


@dataclass(frozen=True)
class Token:
    kind: str          # one of INT IDENT EOF or the punctuation itself
    text: str
    line: int
    col: int
    value: Optional[int] = None


_PUNCT = {
    "(": "(", ")": ")", "+": "+", "*": "*", "=": "=", "~": "~", "&": "&", "|": "|",
    "·": "*", "−": "-", "¬": "~", "∧": "&", "∨": "|", "→": "->", "∃": "E", "∀": "A",
}


def tokenize(text: str) -> List[Token]:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)

    def read_int(j):
        k = j
        while k < n and text[k] == " ":
            k += 1
        start = k
        while k < n and text[k].isdigit():
            k += 1
        if start == k:
            raise FormulaSyntaxError("expected a counting bound", line, col + (k - i))
        return k, int(text[start:k])

    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        start_col = col
        if ch == "-" and i + 1 < n and text[i + 1] == ">":
            tokens.append(Token("->", "->", line, start_col))
            i, col = i + 2, col + 2
            continue
        if ch == "#" or (ch == "∃" and i + 1 < n and text[i + 1] in "≥≤"):
            rest = text[i + 1:i + 3]
            if rest.startswith(">=") or rest.startswith("≥"):
                kind, skip = "#>=", (3 if rest.startswith(">=") else 2)
            elif rest.startswith("<=") or rest.startswith("≤"):
                kind, skip = "#<=", (3 if rest.startswith("<=") else 2)
            else:
                raise FormulaSyntaxError(f"unexpected character {ch!r}", line, start_col)
            j, value = read_int(i + skip)
            if value > INT64_MAX:
                raise FormulaSyntaxError("counting bound out of range", line, start_col)
            tokens.append(Token(kind, text[i:j], line, start_col, value))
            col += j - i
            i = j
            continue
        if ch == "-" or ch in _PUNCT:
            kind = "-" if ch == "-" else _PUNCT[ch]
            tokens.append(Token(kind, ch, line, start_col))
            i, col = i + 1, col + 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("INT", text[i:j], line, start_col, int(text[i:j])))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            word = text[i:j]
            kind = word if word in ("E", "A") else "IDENT"
            tokens.append(Token(kind, word, line, start_col))
            col += j - i
            i = j
            continue
        raise FormulaSyntaxError(f"unexpected character {ch!r}", line, start_col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


# --------------------------------------------------------------- parser


class _Fail(Exception):
    def __init__(self, pos, message):
        self.pos = pos
        self.message = message


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.pos = 0
        self.open_parens: List[Token] = []
        self.furthest: Optional[_Fail] = None

    def peek(self):
        return self.toks[self.pos]

    def fail(self, message):
        err = _Fail(self.pos, message)
        if self.furthest is None or err.pos >= self.furthest.pos:
            self.furthest = err
        raise err

    def expect(self, kind):
        tok = self.peek()
        if tok.kind != kind:
            if tok.kind == "EOF" and kind == ")":
                self.fail("unclosed parenthesis")
            self.fail(f"expected {kind!r}, found {tok.text or 'end of input'!r}")
        self.pos += 1
        return tok

    def formula(self):
        left = self.disj()
        if self.peek().kind == "->":
            self.pos += 1
            return Implies(left, self.formula())
        return left

    def disj(self):
        left = self.conj()
        while self.peek().kind == "|":
            self.pos += 1
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.peek().kind == "&":
            self.pos += 1
            left = And(left, self.unary())
        return left

    def unary(self):
        tok = self.peek()
        if tok.kind == "~":
            self.pos += 1
            return Not(self.unary())
        if tok.kind in ("E", "A", "#>=", "#<="):
            self.pos += 1
            var = self.expect("IDENT").text
            body = self.unary()
            if tok.kind == "E":
                return Exists(var, body)
            if tok.kind == "A":
                return Forall(var, body)
            if tok.kind == "#>=":
                if tok.value < 1:
                    self.pos -= 2
                    self.fail("#>= bound must be at least 1")
                return CountAtLeast(tok.value, var, body)
            return CountAtMost(tok.value, var, body)
        if tok.kind == "(":
            # "(" may open a term such as (x+1)*y = 0 or a parenthesized formula.
            saved = self.pos, list(self.open_parens)
            try:
                return self.atom()
            except _Fail:
                self.pos, self.open_parens = saved
            self.pos += 1
            self.open_parens.append(tok)
            inner = self.formula()
            self.expect(")")
            self.open_parens.pop()
            return inner
        if tok.kind == "EOF":
            self.fail("unexpected end of input")
        return self.atom()

    def atom(self):
        left = self.term()
        self.expect("=")
        return Eq(left, self.term())

    def term(self):
        left = self.prod()
        while self.peek().kind in ("+", "-"):
            op = self.peek().kind
            self.pos += 1
            right = self.prod()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def prod(self):
        left = self.factor()
        while self.peek().kind == "*":
            self.pos += 1
            left = Mul(left, self.factor())
        return left

    def factor(self):
        tok = self.peek()
        if tok.kind == "-":
            self.pos += 1
            nxt = self.peek()
            if nxt.kind == "INT" and nxt.value >= 1:
                self.pos += 1
                if nxt.value > INT64_MAX + 1:
                    self.fail("integer literal out of signed 64-bit range")
                return IntConst(-nxt.value)
            return Neg(self.factor())
        if tok.kind == "INT":
            self.pos += 1
            if tok.value > INT64_MAX:
                self.fail("integer literal out of signed 64-bit range")
            return Zero() if tok.value == 0 else One() if tok.value == 1 else IntConst(tok.value)
        if tok.kind == "IDENT":
            self.pos += 1
            return Var(tok.text)
        if tok.kind == "(":
            self.pos += 1
            self.open_parens.append(tok)
            inner = self.term()
            self.expect(")")
            self.open_parens.pop()
            return inner
        if tok.kind == "EOF":
            self.fail("unexpected end of input")
        self.fail(f"unexpected token {tok.text!r}")


def parse(text: str) -> Formula:
    """Parse formula text; raises FormulaSyntaxError with line/column."""
    tokens = tokenize(text)
    p = _Parser(tokens)
    try:
        f = p.formula()
        if p.peek().kind != "EOF":
            p.fail(f"unexpected token {p.peek().text!r}")
        return f
    except _Fail:
        err = p.furthest
        tok = tokens[min(err.pos, len(tokens) - 1)]
        message = err.message
        if tok.kind == "EOF" and any(t.kind == "(" for t in tokens[:err.pos]) and _unbalanced(tokens):
            message = "unclosed parenthesis"
        raise FormulaSyntaxError(message, tok.line, tok.col) from None


def parse_term(text: str) -> Term:
    tokens = tokenize(text)
    p = _Parser(tokens)
    try:
        t = p.term()
        if p.peek().kind != "EOF":
            p.fail(f"unexpected token {p.peek().text!r}")
        return t
    except _Fail:
        tok = tokens[min(p.furthest.pos, len(tokens) - 1)]
        raise FormulaSyntaxError(p.furthest.message, tok.line, tok.col) from None


def _unbalanced(tokens):
    depth = 0
    for t in tokens:
        depth += (t.kind == "(") - (t.kind == ")")
    return depth > 0


# -------------------------------------------------------------- printer

_ASCII = {"add": "+", "sub": "-", "mul": "*", "neg": "-", "not": "~", "and": "&", "or": "|",
          "implies": "->", "E": "E", "A": "A", "ge": "#>=", "le": "#<="}
_UNICODE = {"add": "+", "sub": "−", "mul": "·", "neg": "−", "not": "¬", "and": "∧", "or": "∨",
            "implies": "→", "E": "∃", "A": "∀", "ge": "∃≥", "le": "∃≤"}

_TERM_PREC = {Add: 1, Sub: 1, Mul: 2, Neg: 3}
_FORMULA_PREC = {Implies: 1, Or: 2, And: 3}


def _term_str(t, ctx, sym):
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, One):
        return "1"
    if isinstance(t, IntConst):
        return str(t.value) if t.value >= 0 else sym["neg"] + str(-t.value)
    if isinstance(t, Neg):
        inner = _term_str(t.arg, 3, sym)
        if isinstance(t.arg, (Zero, One, IntConst)):
            inner = f"({inner})"
        return sym["neg"] + inner
    prec = _TERM_PREC[type(t)]
    op = {Add: sym["add"], Sub: sym["sub"], Mul: sym["mul"]}[type(t)]
    s = f"{_term_str(t.left, prec, sym)} {op} {_term_str(t.right, prec + 1, sym)}"
    return f"({s})" if ctx > prec else s


def _formula_str(f, ctx, sym):
    if isinstance(f, Eq):
        s = f"{_term_str(f.left, 0, sym)} = {_term_str(f.right, 0, sym)}"
        return f"({s})" if ctx > 4 else s
    if isinstance(f, Not):
        # ~(x = 0) rather than ~x = 0
        return sym["not"] + _formula_str(f.arg, 5 if isinstance(f.arg, Eq) else 4, sym)
    if isinstance(f, QUANTIFIERS):
        if isinstance(f, Exists):
            head = sym["E"]
        elif isinstance(f, Forall):
            head = sym["A"]
        elif isinstance(f, CountAtLeast):
            head = f"{sym['ge']}{f.bound}"
        else:
            head = f"{sym['le']}{f.bound}"
        return f"{head} {f.var} ({_formula_str(f.body, 0, sym)})"
    prec = _FORMULA_PREC[type(f)]
    op = {And: sym["and"], Or: sym["or"], Implies: sym["implies"]}[type(f)]
    if isinstance(f, Implies):
        s = f"{_formula_str(f.left, prec + 1, sym)} {op} {_formula_str(f.right, prec, sym)}"
    else:
        s = f"{_formula_str(f.left, prec, sym)} {op} {_formula_str(f.right, prec + 1, sym)}"
    return f"({s})" if ctx > prec else s


def print_formula(f: Formula, unicode: bool = False) -> str:
    """Canonical printing; ``parse(print_formula(f)) == f``."""
    return _formula_str(f, 0, _UNICODE if unicode else _ASCII)


def print_term(t: Term, unicode: bool = False) -> str:
    return _term_str(t, 0, _UNICODE if unicode else _ASCII)


# ----------------------------------------------------------- complexity

# Canonical printing as above with IntConst n written as 1+...+1 (negated for
# n < 0). Every symbol, variable name and counting bound is one token, and a
# matched parenthesis pair counts as a single token.


def _term_tokens(t, ctx):
    if isinstance(t, (Var, Zero, One)):
        return 1
    if isinstance(t, IntConst):
        n = abs(t.value)
        if n == 0:
            return 1
        body = 2 * n - 1
        if t.value < 0:
            # −1 or −(1+...+1)
            return 1 + body + (1 if n > 1 else 0)
        return body + (1 if n > 1 and ctx > 1 else 0)
    if isinstance(t, Neg):
        inner = _term_tokens(t.arg, 3)
        if isinstance(t.arg, (Zero, One)) or (isinstance(t.arg, IntConst) and t.arg.value < 2):
            inner += 1  # the printer wraps literal operands: -(1), -(-3)
        return 1 + inner
    prec = _TERM_PREC[type(t)]
    count = _term_tokens(t.left, prec) + 1 + _term_tokens(t.right, prec + 1)
    return count + (1 if ctx > prec else 0)


def _formula_tokens(f, ctx):
    if isinstance(f, Eq):
        return _term_tokens(f.left, 0) + 1 + _term_tokens(f.right, 0) + (1 if ctx > 4 else 0)
    if isinstance(f, Not):
        return 1 + _formula_tokens(f.arg, 5 if isinstance(f.arg, Eq) else 4)
    if isinstance(f, (Exists, Forall)):
        return 2 + 1 + _formula_tokens(f.body, 0)
    if isinstance(f, (CountAtLeast, CountAtMost)):
        return 3 + 1 + _formula_tokens(f.body, 0)
    prec = _FORMULA_PREC[type(f)]
    if isinstance(f, Implies):
        count = _formula_tokens(f.left, prec + 1) + 1 + _formula_tokens(f.right, prec)
    else:
        count = _formula_tokens(f.left, prec) + 1 + _formula_tokens(f.right, prec + 1)
    return count + (1 if ctx > prec else 0)


def complexity(f: Union[Formula, Term]) -> int:
    """Length of ``f`` in tokens under the fixed canonical tokenization.

    >>> complexity(parse("x = x"))
    3
    >>> complexity(parse("E y (y = y)"))
    6
    """
    if isinstance(f, (Var, Zero, One, IntConst, Add, Sub, Neg, Mul)):
        return _term_tokens(f, 0)
    return _formula_tokens(f, 0)


# ---------------------------------------------------------- free variables


def _term_vars(t) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    elif isinstance(t, Neg):
        yield from _term_vars(t.arg)
    elif isinstance(t, BINARY_TERMS):
        yield from _term_vars(t.left)
        yield from _term_vars(t.right)


def _free_occurrences(f, bound) -> Iterator[str]:
    if isinstance(f, Eq):
        for v in _term_vars(f.left):
            if v not in bound:
                yield v
        for v in _term_vars(f.right):
            if v not in bound:
                yield v
    elif isinstance(f, Not):
        yield from _free_occurrences(f.arg, bound)
    elif isinstance(f, QUANTIFIERS):
        yield from _free_occurrences(f.body, bound | {f.var})
    else:
        yield from _free_occurrences(f.left, bound)
        yield from _free_occurrences(f.right, bound)


def free_vars(f: Formula) -> List[str]:
    """Free variables in order of first occurrence."""
    seen: List[str] = []
    for v in _free_occurrences(f, frozenset()):
        if v not in seen:
            seen.append(v)
    return seen


def term_vars(t: Term) -> List[str]:
    seen: List[str] = []
    for v in _term_vars(t):
        if v not in seen:
            seen.append(v)
    return seen


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.arg)
    elif isinstance(f, QUANTIFIERS):
        yield from subformulas(f.body)
    elif isinstance(f, BINARY_CONNECTIVES):
        yield from subformulas(f.left)
        yield from subformulas(f.right)


def as_formula(f: Union[str, Formula]) -> Formula:
    return parse(f) if isinstance(f, str) else f


def conjunction(parts: Tuple[Formula, ...]) -> Formula:
    out = parts[0]
    for part in parts[1:]:
        out = And(out, part)
    return out
