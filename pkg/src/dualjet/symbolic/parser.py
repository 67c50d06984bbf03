"""Recursive-descent parser for the coordinate expression language.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' integer)?
    base   := number | ident | func '(' expr ')' | '(' expr ')' | '-' base
    func   := sin | cos | tan | exp | log | sqrt
    number := integer ('/' integer)? | decimal

Two consequences worth knowing: a unary minus binds tighter than ``^``
(``-x^2`` is ``(-x)^2``), and ``a/b`` is one rational literal only when
written without spaces, so ``x/2/3`` is ``x/(2/3)``.  Decimals, including
an optional exponent (``1.5e-3``), become exact rationals.
"""

from fractions import Fraction

from .expr import FUNCTIONS, ONE, apply_function, const, symbol

__all__ = ["parse_expr", "ExprSyntaxError", "UnknownIdentifierError"]


class ExprSyntaxError(ValueError):
    """Malformed expression text; ``offset`` is a byte offset into the UTF-8 text."""

    def __init__(self, message, text, pos):
        self.offset = len(text[:pos].encode("utf-8"))
        self.text = text
        super().__init__(f"{message} at byte offset {self.offset}")


class UnknownIdentifierError(ValueError):
    def __init__(self, name, text, pos):
        self.name = name
        self.offset = len(text[:pos].encode("utf-8"))
        super().__init__(f"unknown identifier {name!r} at byte offset {self.offset}")


def _allowed_names(chart):
    if chart is None:
        return None
    names = getattr(chart, "coordinate_names", None)
    if names is None:
        names = chart
    return frozenset(names)


class _Parser:
    def __init__(self, text, names):
        self.s = text
        self.n = len(text)
        self.i = 0
        self.names = names

    def error(self, msg, pos=None):
        raise ExprSyntaxError(msg, self.s, self.i if pos is None else pos)

    def skip(self):
        s, i, n = self.s, self.i, self.n
        while i < n and s[i] in " \t\r\n":
            i += 1
        self.i = i

    def peek(self):
        self.skip()
        return self.s[self.i] if self.i < self.n else ""

    def expect(self, ch):
        if self.peek() != ch:
            found = repr(self.s[self.i]) if self.i < self.n else "end of input"
            self.error(f"expected {ch!r}, found {found}")
        self.i += 1

    def parse(self):
        if not self.s.strip():
            self.error("empty expression")
        e = self.expr()
        self.skip()
        if self.i < self.n:
            self.error(f"unexpected {self.s[self.i]!r}")
        return e

    def expr(self):
        e = self.term()
        while True:
            c = self.peek()
            if c == "+":
                self.i += 1
                e = e + self.term()
            elif c == "-":
                self.i += 1
                e = e - self.term()
            else:
                return e

    def term(self):
        e = self.factor()
        while True:
            c = self.peek()
            if c == "*":
                self.i += 1
                e = e * self.factor()
            elif c == "/":
                self.i += 1
                pos = self.i
                d = self.factor()
                if d.is_zero():
                    self.error("division by zero", pos)
                e = e / d
            else:
                return e

    def factor(self):
        b = self.base()
        if self.peek() == "^":
            self.i += 1
            self.skip()
            start = self.i
            while self.i < self.n and self.s[self.i].isdigit():
                self.i += 1
            if start == self.i:
                self.error("expected integer exponent")
            k = int(self.s[start:self.i])
            if k == 0:
                return ONE
            return b ** k
        return b

    def base(self):
        c = self.peek()
        if not c:
            self.error("unexpected end of input")
        if c == "-":
            self.i += 1
            return -self.base()
        if c == "(":
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if c.isdigit() or c == ".":
            return self.number()
        if c.isalpha() or c == "_":
            return self.ident()
        self.error(f"unexpected {c!r}")

    def _digits(self):
        start = self.i
        while self.i < self.n and self.s[self.i].isdigit():
            self.i += 1
        return self.s[start:self.i]

    def number(self):
        s = self.s
        start = self.i
        whole = self._digits()
        decimal = False
        if self.i < self.n and s[self.i] == ".":
            decimal = True
            self.i += 1
            self._digits()
            if self.i - start == 1:
                self.error("malformed number", start)
        if self.i < self.n and s[self.i] in "eE" and (decimal or whole):
            j = self.i + 1
            if j < self.n and s[j] in "+-":
                j += 1
            if j < self.n and s[j].isdigit():
                decimal = True
                self.i = j
                self._digits()
        if decimal:
            return const(Fraction(s[start:self.i]))
        # integer, optionally a rational literal written without spaces
        if self.i + 1 < self.n and s[self.i] == "/" and s[self.i + 1].isdigit():
            self.i += 1
            den = self._digits()
            if int(den) == 0:
                self.error("zero denominator in rational literal", start)
            return const(Fraction(int(whole), int(den)))
        return const(int(whole))

    def ident(self):
        s = self.s
        start = self.i
        while self.i < self.n and (s[self.i].isalnum() or s[self.i] == "_"):
            self.i += 1
        name = s[start:self.i]
        if name in FUNCTIONS:
            if self.peek() != "(":
                self.error(f"expected '(' after function {name!r}")
            self.i += 1
            arg = self.expr()
            self.expect(")")
            return apply_function(name, arg)
        if self.names is not None and name not in self.names:
            raise UnknownIdentifierError(name, s, start)
        return symbol(name)


def parse_expr(text, chart=None):
    """Parse ``text`` into a canonical Expr.

    ``chart`` restricts identifiers to its coordinate names; it may be a
    :class:`~dualjet.chart.JetChart`, any iterable of names, or ``None``
    to accept every identifier.
    """
    if not isinstance(text, str):
        raise TypeError("expression text must be a string")
    return _Parser(text, _allowed_names(chart)).parse()
