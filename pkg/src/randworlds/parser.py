"""Parser and printer for knowledge-base files and queries.

A KB file is a sequence of declarations followed by statements::

    predicate Hep/1; predicate Jaun/1; const Eric;
    Jaun(Eric).
    prop{Hep(x) | Jaun(x)}[x] ~=[1] 0.8.

``#`` starts a line comment.  Statements end with ``.`` and are conjoined
into a single KB formula.  The printer emits text that parses back to a
structurally equal AST.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .lang import (
    And, App, Atomic, Compare, CondProp, Const, Eps, ExactCompare, Exists,
    ExistsExactly, ExistsUnique, Falsity, Forall, Formula, Iff, Implies,
    LangError, Not, Or, PAdd, PExpr, PMul, Prop, PSub, Rat, Term, Truth,
    TRUE, Var, Vocabulary, check_formula,
)


class ParseError(LangError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<number>\d+\.\d+|\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=>|=>|<=|<~|~=|[(){}\[\],;.|+\-*/=!])
""", re.VERBOSE)

_KEYWORDS = {"and", "or", "not", "forall", "exists", "exists_exactly",
             "true", "false", "prop", "eps", "predicate", "function", "const"}


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"{self.kind}:{self.text!r}@{self.line}:{self.col}"


def _tokenize(text: str) -> list[_Token]:
    toks = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            toks.append(_Token(kind, chunk, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    toks.append(_Token("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str, vocab: Vocabulary | None = None):
        self.toks = _tokenize(text)
        self.i = 0
        self.vocab = vocab or Vocabulary()

    # -- token plumbing -----------------------------------------------------

    def peek(self) -> _Token:
        return self.toks[self.i]

    def next(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.text == text and t.kind in ("op", "name")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> _Token:
        t = self.peek()
        if not self.at(text):
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return self.next()

    def fail(self, msg: str):
        t = self.peek()
        raise ParseError(msg, t.line, t.col)

    # -- declarations -------------------------------------------------------

    def parse_kb(self) -> tuple[Vocabulary, Formula]:
        preds: list[tuple[str, int]] = []
        funcs: list[tuple[str, int]] = []
        consts: list[str] = []
        while self.peek().text in ("predicate", "function", "const"):
            kw = self.next().text
            name_tok = self.peek()
            if name_tok.kind != "name":
                self.fail("expected a symbol name")
            name = self.next().text
            if kw in ("predicate", "function"):
                self.expect("/")
                ar_tok = self.peek()
                if ar_tok.kind != "number" or "." in ar_tok.text:
                    self.fail("expected an integer arity")
                arity = int(self.next().text)
                (preds if kw == "predicate" else funcs).append((name, arity))
            else:
                consts.append(name)
            self.expect(";")
        self.vocab = Vocabulary(tuple(preds), tuple(funcs), tuple(consts))
        stmts: list[Formula] = []
        while self.peek().kind != "eof":
            f = self.formula()
            self.expect(".")
            check_formula(self.vocab, f)
            stmts.append(f)
        kb: Formula = TRUE
        if stmts:
            kb = stmts[0]
            for f in stmts[1:]:
                kb = And(kb, f)
        return self.vocab, kb

    def parse_formula(self) -> Formula:
        f = self.formula()
        t = self.peek()
        if t.kind != "eof":
            raise ParseError(f"trailing input {t.text!r}", t.line, t.col)
        check_formula(self.vocab, f)
        return f

    # -- formulas -----------------------------------------------------------

    def formula(self) -> Formula:
        left = self.implies()
        while self.accept("<=>"):
            left = Iff(left, self.implies())
        return left

    def implies(self) -> Formula:
        left = self.disjunct()
        if self.accept("=>"):
            return Implies(left, self.implies())
        return left

    def disjunct(self) -> Formula:
        left = self.conjunct()
        while self.accept("or"):
            left = Or(left, self.conjunct())
        return left

    def conjunct(self) -> Formula:
        left = self.unary()
        while self.accept("and"):
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        t = self.peek()
        if self.accept("not"):
            return Not(self.unary())
        if self.accept("forall"):
            return Forall(self.var_name(), self.unary())
        if self.accept("exists"):
            if self.accept("!"):
                return ExistsUnique(self.var_name(), self.unary())
            return Exists(self.var_name(), self.unary())
        if self.accept("exists_exactly"):
            self.expect("[")
            n_tok = self.peek()
            if n_tok.kind != "number" or "." in n_tok.text:
                self.fail("expected an integer count")
            n = int(self.next().text)
            self.expect("]")
            return ExistsExactly(n, self.var_name(), self.unary())
        return self.primary()

    def var_name(self) -> str:
        t = self.peek()
        if t.kind != "name" or t.text in _KEYWORDS:
            self.fail("expected a variable name")
        return self.next().text

    def primary(self) -> Formula:
        t = self.peek()
        if self.accept("true"):
            return Truth()
        if self.accept("false"):
            return Falsity()
        if t.kind == "number" or t.text in ("prop", "eps"):
            return self.comparison()
        if t.text == "(":
            # Could open a formula or a parenthesized proportion expression;
            # try a comparison first and backtrack on failure.
            mark = self.i
            try:
                return self.comparison()
            except ParseError:
                self.i = mark
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        if t.kind == "name":
            term = self.term()
            if self.accept("="):
                return Atomic("=", (term, self.term()))
            if isinstance(term, Atomic):  # predicate application came back
                return term
            self.fail("expected a predicate application or equality")
        self.fail(f"unexpected {t.text!r}")

    def comparison(self) -> Formula:
        lhs = self.pexpr()
        t = self.peek()
        if t.text in ("~=", "<~"):
            op = self.next().text
            self.expect("[")
            idx_tok = self.peek()
            if idx_tok.kind != "number" or "." in idx_tok.text:
                self.fail("expected an integer tolerance index")
            idx = int(self.next().text)
            self.expect("]")
            return Compare(lhs, op, self.pexpr(), idx)
        if t.text in ("=", "<="):
            op = self.next().text
            return ExactCompare(lhs, op, self.pexpr())
        self.fail("expected a comparison operator")

    # -- terms --------------------------------------------------------------

    def term(self):
        """Parse a term; a name applied to args may resolve to a predicate
        application (returned as Atomic) when the name is a declared predicate."""
        t = self.peek()
        if t.kind != "name" or t.text in _KEYWORDS:
            self.fail("expected a term")
        name = self.next().text
        if self.at("("):
            pa = self.vocab.predicate_arity
            fa = self.vocab.function_arity
            self.next()
            args = [self.strict_term()]
            while self.accept(","):
                args.append(self.strict_term())
            self.expect(")")
            if name in pa:
                return Atomic(name, tuple(args))
            if name in fa:
                return App(name, tuple(args))
            raise ParseError(f"undeclared symbol {name}", t.line, t.col)
        if name in self.vocab.constants:
            return Const(name)
        return Var(name)

    def strict_term(self) -> Term:
        t = self.peek()
        out = self.term()
        if isinstance(out, Atomic):
            raise ParseError(f"predicate {out.pred} used as a term", t.line, t.col)
        return out

    # -- proportion expressions --------------------------------------------

    def pexpr(self) -> PExpr:
        left = self.pterm()
        while True:
            if self.accept("+"):
                left = PAdd(left, self.pterm())
            elif self.accept("-"):
                left = PSub(left, self.pterm())
            else:
                return left

    def pterm(self) -> PExpr:
        left = self.pfactor()
        while self.accept("*"):
            left = PMul(left, self.pfactor())
        return left

    def pfactor(self) -> PExpr:
        t = self.peek()
        if t.kind == "number":
            return Rat(self.rational())
        if self.accept("prop"):
            self.expect("{")
            body = self.formula()
            cond = None
            if self.accept("|"):
                cond = self.formula()
            self.expect("}")
            self.expect("[")
            vs = [self.var_name()]
            while self.accept(","):
                vs.append(self.var_name())
            self.expect("]")
            if cond is None:
                return Prop(body, tuple(vs))
            return CondProp(body, cond, tuple(vs))
        if self.accept("eps"):
            self.expect("[")
            idx_tok = self.peek()
            if idx_tok.kind != "number" or "." in idx_tok.text:
                self.fail("expected an integer tolerance index")
            idx = int(self.next().text)
            self.expect("]")
            return Eps(idx)
        if self.accept("("):
            e = self.pexpr()
            self.expect(")")
            return e
        self.fail("expected a proportion expression")

    def rational(self) -> Fraction:
        t = self.peek()
        if t.kind != "number":
            self.fail("expected a number")
        first = self.next().text
        if "." in first:
            return Fraction(first)
        if self.accept("/"):
            d_tok = self.peek()
            if d_tok.kind != "number" or "." in d_tok.text:
                self.fail("expected an integer denominator")
            den = int(self.next().text)
            if den == 0:
                self.fail("zero denominator")
            return Fraction(int(first), den)
        return Fraction(int(first))


# ---------------------------------------------------------------------------
# public entry points


def parse_kb(text: str) -> tuple[Vocabulary, Formula]:
    """Parse a KB file: declarations, then statements conjoined in order."""
    return _Parser(text).parse_kb()


def parse_kb_file(path) -> tuple[Vocabulary, Formula]:
    with open(path, encoding="utf-8") as fh:
        return parse_kb(fh.read())


def parse_formula(text: str, vocab: Vocabulary) -> Formula:
    """Parse a single closed formula (e.g. a command-line query)."""
    return _Parser(text, vocab).parse_formula()


# ---------------------------------------------------------------------------
# printing


def format_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_term(t) -> str:
    if isinstance(t, Var) or isinstance(t, Const):
        return t.name
    return f"{t.func}({', '.join(format_term(a) for a in t.args)})"


def format_pexpr(e: PExpr) -> str:
    if isinstance(e, Rat):
        return format_rational(e.value)
    if isinstance(e, Eps):
        return f"eps[{e.index}]"
    if isinstance(e, Prop):
        return f"prop{{{format_formula(e.body)}}}[{','.join(e.vars)}]"
    if isinstance(e, CondProp):
        return (f"prop{{{format_formula(e.body)} | {format_formula(e.cond)}}}"
                f"[{','.join(e.vars)}]")
    op = {PAdd: "+", PSub: "-", PMul: "*"}[type(e)]
    return f"({format_pexpr(e.left)} {op} {format_pexpr(e.right)})"


def format_formula(f: Formula) -> str:
    if isinstance(f, Truth):
        return "true"
    if isinstance(f, Falsity):
        return "false"
    if isinstance(f, Atomic):
        if f.pred == "=":
            return f"{format_term(f.args[0])} = {format_term(f.args[1])}"
        return f"{f.pred}({', '.join(format_term(t) for t in f.args)})"
    if isinstance(f, Not):
        return f"not ({format_formula(f.body)})"
    if isinstance(f, (And, Or, Implies, Iff)):
        op = {And: "and", Or: "or", Implies: "=>", Iff: "<=>"}[type(f)]
        return f"({format_formula(f.left)} {op} {format_formula(f.right)})"
    if isinstance(f, Forall):
        return f"forall {f.var} ({format_formula(f.body)})"
    if isinstance(f, Exists):
        return f"exists {f.var} ({format_formula(f.body)})"
    if isinstance(f, ExistsUnique):
        return f"exists! {f.var} ({format_formula(f.body)})"
    if isinstance(f, ExistsExactly):
        return f"exists_exactly[{f.count}] {f.var} ({format_formula(f.body)})"
    if isinstance(f, Compare):
        return f"{format_pexpr(f.lhs)} {f.op}[{f.index}] {format_pexpr(f.rhs)}"
    if isinstance(f, ExactCompare):
        return f"{format_pexpr(f.lhs)} {f.op} {format_pexpr(f.rhs)}"
    raise TypeError(f"not a formula: {f!r}")
