"""Immutable symbolic expressions over chart coordinates.

An :class:`Expr` is a Laurent polynomial with exact rational coefficients
over *atoms*.  An atom is a coordinate symbol, a function application
(``sin``, ``cos``, ``exp``, ``log``, ``sqrt``) of a canonical Expr, or a
primitive multi-term sum that occurs only with negative exponents (a
denominator).  The polynomial is stored as a dict from monomial to
coefficient; the canonical form is unique for a given mathematical
expression modulo the rewrite rules below, so structural equality is the
equality test.

Rewrite rules applied on every construction:

* ``tan(u)`` is ``sin(u)/cos(u)``;
* ``sin(u)^e * cos(u)^f`` is reduced so that ``e`` is 0 or 1, or ``e < 0``
  with ``f`` in {0, 1};
* all ``exp`` factors of a monomial merge into a single ``exp(sum)``;
* ``sqrt(u)^k`` becomes ``u^(k//2) * sqrt(u)^(k%2)``;
* denominators that divide their numerator exactly are cancelled.
"""

import math
import threading
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels as K

try:
    from gmpy2 import mpq as Rational
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    Rational = Fraction

__all__ = [
    "Expr",
    "Rational",
    "symbol",
    "const",
    "sin",
    "cos",
    "tan",
    "exp",
    "log",
    "sqrt",
    "diff",
    "substitute",
    "evaluate",
    "evaluate_points",
    "canonicalize",
    "sum_products",
    "EvalDomainError",
    "MissingAssignmentError",
    "ZERO",
    "ONE",
]

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt")


class EvalDomainError(ArithmeticError):
    """Raised when evaluation leaves the real domain of a subexpression."""

    def __init__(self, message, subexpr=None):
        super().__init__(message)
        self.subexpr = subexpr


class MissingAssignmentError(KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"no value assigned to symbol {self.name!r}"


def to_rational(x):
    if isinstance(x, Rational):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError("non-finite constant")
        return Rational(Fraction(x))
    if isinstance(x, str):
        return Rational(Fraction(x))
    return Rational(x)


_Q0 = Rational(0)
_Q1 = Rational(1)

# ---------------------------------------------------------------------------
# Atom table.  Append-only interning; ids are process-local and never reused.

_lock = threading.RLock()
_kind = []  # "sym" | "fn" | "sum"
_name = []  # symbol or function name, None for sums
_arg = []  # Expr argument (fn) or primitive Expr (sum)
_free = []  # frozenset of symbol atom ids
_skey = []  # structural sort key
_index = {}
_watch = {}  # atom id -> tag, for atoms subject to rewrite rules
_partner = {}  # sin id <-> cos id of the same argument
_deriv_cache = {}


def _intern(kind, name, arg):
    key = (kind, name, arg)
    aid = _index.get(key)
    if aid is not None:
        return aid
    with _lock:
        aid = _index.get(key)
        if aid is not None:
            return aid
        if kind == "sym":
            free = None
            skey = (0, name)
        elif kind == "fn":
            free = arg.free_ids
            skey = (1, name, arg.sort_key())
        else:
            free = arg.free_ids
            skey = (2, arg.sort_key())
        aid = len(_kind)
        _kind.append(kind)
        _name.append(name)
        _arg.append(arg)
        _free.append(frozenset((aid,)) if free is None else free)
        _skey.append(skey)
        if kind == "sum":
            _watch[aid] = "sum"
        elif kind == "fn" and name in ("sin", "cos", "exp", "sqrt"):
            _watch[aid] = name
        _index[key] = aid
        return aid


def _trig_partner(aid):
    pid = _partner.get(aid)
    if pid is None:
        other = "cos" if _name[aid] == "sin" else "sin"
        pid = _intern("fn", other, _arg[aid])
        _partner[aid] = pid
        _partner[pid] = aid
    return pid


def _mono_from(fac):
    out = []
    for aid in sorted(fac):
        e = fac[aid]
        if e:
            out.append(aid)
            out.append(e)
    return tuple(out)


def _mono_key(m):
    return tuple((_skey[m[k]], m[k + 1]) for k in range(0, len(m), 2))


# ---------------------------------------------------------------------------


class Expr:
    """Canonical symbolic expression.  Construct through the module helpers."""

    __slots__ = ("_p", "_sp", "_h", "_key", "_fids")

    def __init__(self, value=0):
        e = _as_expr(value)
        self._p = e._p
        self._sp = e._sp
        self._h = None
        self._key = None
        self._fids = None

    # -- basic queries ----------------------------------------------------
    @property
    def terms(self):
        return self._p

    def is_zero(self):
        return not self._p

    def is_constant(self):
        p = self._p
        return not p or (len(p) == 1 and () in p)

    def constant_value(self):
        """The rational value of a constant expression."""
        if not self._p:
            return _Q0
        if len(self._p) == 1 and () in self._p:
            return self._p[()]
        raise ValueError(f"{self} is not constant")

    @property
    def free_ids(self):
        f = self._fids
        if f is None:
            s = set()
            for aid in K.poly_atoms(self._p):
                s |= _free[aid]
            f = self._fids = frozenset(s)
        return f

    @property
    def free_symbols(self):
        """Names of the coordinate symbols the expression depends on."""
        return frozenset(_name[i] for i in self.free_ids)

    def atoms(self):
        return {_atom_expr(i) for i in K.poly_atoms(self._p)}

    def sort_key(self):
        k = self._key
        if k is None:
            k = self._key = tuple(sorted((_mono_key(m), c) for m, c in self._p.items()))
        return k

    # -- protocol ------------------------------------------------------------
    def __hash__(self):
        h = self._h
        if h is None:
            p = self._p
            if not p:
                h = hash(0)
            elif len(p) == 1 and () in p:
                h = hash(p[()])
            elif self._has_denominator():
                # equal values may differ in shape here, see __eq__
                h = hash("fraction")
            else:
                h = hash(frozenset(p.items()))
            self._h = h
        return h

    def _has_denominator(self):
        return any(_watch.get(a) == "sum" for a in K.poly_atoms(self._p))

    def __eq__(self, other):
        if isinstance(other, Expr):
            if self._p == other._p:
                return True
            # a sum atom and its factors can give two shapes of one value;
            # their difference always reduces to zero
            if self._has_denominator() or other._has_denominator():
                return not (self - other)._p
            return False
        if isinstance(other, (int, Fraction, type(_Q0))):
            return self._p == ({(): Rational(other)} if other else {})
        return NotImplemented

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __bool__(self):
        return bool(self._p)

    def __repr__(self):
        return f"Expr({str(self)!r})"

    def __str__(self):
        return _format(self)

    def __float__(self):
        return float(self.constant_value())

    def __reduce__(self):
        return (_rebuild, (self.to_raw(),))

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        if not o._p:
            return self
        if not self._p:
            return o
        p = dict(self._p)
        K.poly_addscaled(p, o._p, 1)
        return _make(p, self._sp or o._sp)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        if not o._p:
            return self
        p = dict(self._p)
        K.poly_addscaled(p, o._p, -1)
        return _make(p, self._sp or o._sp)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return _new({m: -c for m, c in self._p.items()}, self._sp)

    def __pos__(self):
        return self

    def __mul__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        if not self._p or not o._p:
            return ZERO
        return _make(K.poly_mul(self._p, o._p), self._sp or o._sp)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return self * o ** -1

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o * self ** -1

    def __pow__(self, k):
        if isinstance(k, Expr):
            k = k.constant_value()
        if isinstance(k, (Fraction, type(_Q0))):
            if k.denominator != 1:
                raise ValueError("only integer exponents are supported")
            k = int(k.numerator)
        if not isinstance(k, int):
            return NotImplemented
        p = self._p
        if k == 0:
            return ONE
        if k == 1:
            return self
        if not p:
            if k < 0:
                raise ZeroDivisionError("symbolic division by zero")
            return ZERO
        if len(p) == 1:
            (m, c), = p.items()
            if m == ():
                return _const_q(c ** k if k > 0 else _Q1 / c ** (-k))
            nm = tuple(v if i % 2 == 0 else v * k for i, v in enumerate(m))
            return _make({nm: c ** k if k > 0 else _Q1 / c ** (-k)}, self._sp)
        if k < 0:
            return _inverse_power(p, self._sp, k)
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- conversions ---------------------------------------------------------
    def to_raw(self):
        """Plain nested-tuple tree (see :func:`canonicalize`)."""
        terms = []
        for m in sorted(self._p, key=_mono_key):
            c = self._p[m]
            fs = [("num", Fraction(int(c.numerator), int(c.denominator)))]
            for k in range(0, len(m), 2):
                a = _atom_raw(m[k])
                e = m[k + 1]
                fs.append(a if e == 1 else ("pow", a, e))
            terms.append(("mul", fs))
        return ("add", terms)

    def latex(self, names=None):
        """LaTeX text; ``names`` optionally maps a symbol name to its LaTeX form."""
        return _latex(self, names)


def _inverse_power(p, sp, k):
    """``p ** k`` for a multi-term ``p`` and ``k < 0``.

    The sum is split as ``M * sin(u)^(2r) * ... * c * S`` with ``M`` the
    monomial content, ``(1 - cos(u)^2)`` factors recognised as ``sin(u)^2``,
    ``c`` rational and ``S`` a primitive sum with integer coprime
    coefficients and positive leading term.  Only ``S`` becomes a
    denominator atom.
    """
    vec, mono = _lift(p)
    V = {vec(m): c for m, c in p.items()}
    lo = [min(col) for col in zip(*V)]
    content = dict(zip(*[iter(mono(lo))] * 2))
    q = {mono([a - b for a, b in zip(v, lo)]): c for v, c in V.items()} if content else dict(p)
    sin_pows = {}
    for aid in sorted(K.poly_atoms(q)):
        if _watch.get(aid) != "cos":
            continue
        d = {(): _Q1, (aid, 2): -_Q1}
        while len(q) > 1:
            r = _exact_div(q, d)
            if r is None:
                break
            q = r
            sid = _trig_partner(aid)
            sin_pows[sid] = sin_pows.get(sid, 0) + 2
    fac = {}
    for aid, e in content.items():
        fac[aid] = fac.get(aid, 0) + e * k
    for sid, e in sin_pows.items():
        fac[sid] = fac.get(sid, 0) + e * k
    if len(q) == 1:
        (m, c), = q.items()
        for j in range(0, len(m), 2):
            fac[m[j]] = fac.get(m[j], 0) + m[j + 1] * k
        coef = c ** k if k > 0 else _Q1 / c ** (-k)
        return _make({_mono_from(fac): coef}, True)
    lead = q[min(q, key=_mono_key)]
    den = 1
    num = 0
    for c in q.values():
        den = den * int(c.denominator) // math.gcd(den, int(c.denominator))
    for c in q.values():
        num = math.gcd(num, int(c.numerator * den // c.denominator))
    scale = Rational(den, num) * (1 if lead > 0 else -1)
    prim = _make({m: c * scale for m, c in q.items()}, sp)
    if len(prim._p) == 1:
        return _make({_mono_from(fac): scale ** (-k)}, True) * prim ** k
    coef = scale ** (-k)
    # p^j and its expansion must share one denominator atom
    root = _perfect_power(prim._p)
    if root is not None:
        r, j = root
        r = _make(r, sp)
        rr = (r ** -1)._p
        (m, c), = rr.items()
        (aid, _), = zip(m[0::2], m[1::2])
        base = _arg[aid]
        ratio = _ratio(prim._p, (base ** j)._p)
        fac[aid] = fac.get(aid, 0) + j * k
        return _make({_mono_from(fac): coef * ratio ** k}, True)
    aid = _intern("sum", None, prim)
    fac[aid] = fac.get(aid, 0) + k
    return _make({_mono_from(fac): coef}, True)


def _lift(*polys):
    """Exponent-vector coordinates for ``polys`` with exp atoms unfolded.

    ``exp(sum c_i m_i)`` becomes the product of ``E_i ** (c_i * L_i)`` with
    one base ``E_i`` per argument monomial ``m_i`` and ``L_i`` the common
    denominator of its coefficients, so ``exp(2*y)`` is the square of
    ``exp(y)`` in these coordinates.  Returns ``(vec, mono)``: monomial to
    vector and back.
    """
    atoms = set()
    for p in polys:
        atoms.update(K.poly_atoms(p))
    plain = sorted((a for a in atoms if _watch.get(a) != "exp"), key=_skey.__getitem__)
    den = {}
    for a in atoms:
        if _watch.get(a) == "exp":
            for m, c in _arg[a]._p.items():
                d, l = int(c.denominator), den.get(m, 1)
                den[m] = l * d // math.gcd(l, d)
    keys = sorted(den, key=_mono_key)
    np_ = len(plain)
    pos = {a: i for i, a in enumerate(plain)}
    kpos = {m: np_ + i for i, m in enumerate(keys)}
    nv = np_ + len(keys)

    def vec(mono_):
        v = [0] * nv
        for t in range(0, len(mono_), 2):
            a, e = mono_[t], mono_[t + 1]
            i = pos.get(a)
            if i is not None:
                v[i] = e
            else:
                for m, c in _arg[a]._p.items():
                    v[kpos[m]] += int(e * c * den[m])
        return tuple(v)

    def mono(v):
        fac = {plain[i]: v[i] for i in range(np_) if v[i]}
        arg = {keys[i - np_]: Rational(v[i], den[keys[i - np_]]) for i in range(np_, nv) if v[i]}
        if arg:
            fac[_intern("fn", "exp", _make(arg, True))] = 1
        return _mono_from(fac)

    return vec, mono


def _ratio(p, q):
    """The constant ``p / q`` when ``p`` is a rational multiple of ``q``."""
    m = next(iter(p))
    return p[m] / q[m]


def _iroot(n, j):
    if n < 0:
        return None
    r = int(round(n ** (1.0 / j))) if n < 2**1000 else 1 << (n.bit_length() // j)
    while r ** j > n:
        r = (r * (j - 1) + n // r ** (j - 1)) // j
    while (r + 1) ** j <= n:
        r += 1
    return r if r ** j == n else None


def _qroot(c, j):
    num, den = int(c.numerator), int(c.denominator)
    sign = 1
    if num < 0:
        if j % 2 == 0:
            return None
        sign, num = -1, -num
    a, b = _iroot(num, j), _iroot(den, j)
    if a is None or b is None:
        return None
    return Rational(sign * a, b)


def _perfect_power(p):
    """``(r, j)`` with ``r ** j == p`` and ``j`` maximal, or None.

    ``p`` has no monomial content, so every exponent vector is
    non-negative; the root is grown term by term in lex order.
    """
    vec, mono = _lift(p)
    P = {vec(m): c for m, c in p.items()}
    if any(e < 0 for v in P for e in v):
        return None
    lt = max(P)
    g = 0
    for e in lt + min(P):
        g = math.gcd(g, e)
    negP = {v: -c for v, c in P.items()}
    for j in range(g, 1, -1):
        if g % j:
            continue
        for Q in (P, negP):
            r = _vec_root(Q, lt, j, len(P))
            if r is not None:
                return {mono(v): c for v, c in r.items()}, j
    return None


def _vec_mul(a, b):
    out = {}
    for u, x in a.items():
        for v, y in b.items():
            w = tuple(s + t for s, t in zip(u, v))
            z = out.get(w, 0) + x * y
            if z:
                out[w] = z
            else:
                out.pop(w, None)
    return out


def _vec_pow(a, j):
    out = a
    for _ in range(j - 1):
        out = _vec_mul(out, a)
    return out


def _vec_root(P, lt, j, limit):
    lc = _qroot(P[lt], j)
    if lc is None:
        return None
    r_lt = tuple(e // j for e in lt)
    r = {r_lt: lc}
    scale = j * lc ** (j - 1)
    shift = tuple((j - 1) * e for e in r_lt)
    for _ in range(limit + 1):
        R = dict(P)
        for v, c in _vec_pow(r, j).items():
            x = R.get(v, 0) - c
            if x:
                R[v] = x
            else:
                R.pop(v, None)
        if not R:
            return r
        top = max(R)
        m = tuple(a - b for a, b in zip(top, shift))
        if any(e < 0 for e in m) or m >= r_lt or m in r:
            return None
        r[m] = R[top] / scale
    return None


def _rebuild(raw):
    return canonicalize(raw)


def _new(p, sp):
    e = object.__new__(Expr)
    e._p = p
    e._sp = sp
    e._h = None
    e._key = None
    e._fids = None
    return e


def _make(p, sp):
    if sp:
        p, sp = _fixup(p)
    return _new(p, sp)


def _const_q(q):
    return _new({(): q} if q else {}, False)


def const(value):
    """Exact rational constant (ints, Fractions, decimal strings or floats)."""
    return _const_q(to_rational(value))


ZERO = _new({}, False)
ONE = _new({(): _Q1}, False)


def _coerce(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction, type(_Q0))):
        return _const_q(Rational(x))
    return None


def _as_expr(x):
    e = _coerce(x)
    if e is None:
        if isinstance(x, str):
            raise TypeError("use parse_expr to build an Expr from text")
        raise TypeError(f"cannot convert {type(x).__name__} to Expr")
    return e


def symbol(name):
    """The coordinate symbol ``name``."""
    if not isinstance(name, str) or not name:
        raise ValueError("symbol name must be a non-empty string")
    return _new({(_intern("sym", name, None), 1): _Q1}, False)


def _atom_expr(aid):
    return _new({(aid, 1): _Q1}, aid in _watch)


def _symbol_id(v):
    if isinstance(v, str):
        return _intern("sym", v, None)
    if isinstance(v, Expr) and len(v._p) == 1:
        (m, c), = v._p.items()
        if len(m) == 2 and m[1] == 1 and c == 1 and _kind[m[0]] == "sym":
            return m[0]
    raise ValueError(f"{v!r} is not a coordinate symbol")


def sum_products(terms, base=None):
    """``base + sum(c * a * b)`` over ``(c, a, b)`` triples, in one pass.

    ``b`` may be None for a plain scaled term.  Canonicalization runs once
    on the accumulated result.
    """
    acc = dict(base._p) if base is not None else {}
    sp = base._sp if base is not None else False
    for c, a, b in terms:
        if not a._p:
            continue
        if b is None:
            K.poly_addscaled(acc, a._p, c)
            sp = sp or a._sp
        elif b._p:
            K.poly_addmul(acc, a._p, b._p, c)
            sp = sp or a._sp or b._sp
    return _make(acc, sp)


# ---------------------------------------------------------------------------
# Function application


def _lead_negative(u):
    p = u._p
    return bool(p) and p[min(p, key=_mono_key)] < 0


def _fn(name, u):
    return _atom_expr(_intern("fn", name, u))


def sin(u):
    u = _as_expr(u)
    if not u._p:
        return ZERO
    if _lead_negative(u):
        return -_fn("sin", -u)
    return _fn("sin", u)


def cos(u):
    u = _as_expr(u)
    if not u._p:
        return ONE
    if _lead_negative(u):
        u = -u
    return _fn("cos", u)


def tan(u):
    return sin(u) * cos(u) ** -1


def exp(u):
    u = _as_expr(u)
    if not u._p:
        return ONE
    return _fn("exp", u)


def log(u):
    u = _as_expr(u)
    if u == 1:
        return ZERO
    p = u._p
    if len(p) == 1:
        (m, c), = p.items()
        if c == 1 and len(m) == 2 and m[1] == 1 and _kind[m[0]] == "fn" and _name[m[0]] == "exp":
            return _arg[m[0]]
    return _fn("log", u)


def _rational_sqrt(q):
    if q < 0:
        return None
    n, d = int(q.numerator), int(q.denominator)
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Rational(rn, rd)
    return None


def sqrt(u):
    u = _as_expr(u)
    if u.is_constant():
        r = _rational_sqrt(u.constant_value())
        if r is not None:
            return _const_q(r)
    return _fn("sqrt", u)


_FUNC_TABLE = {"sin": sin, "cos": cos, "tan": tan, "exp": exp, "log": log, "sqrt": sqrt}


def apply_function(name, u):
    try:
        return _FUNC_TABLE[name](u)
    except KeyError:
        raise ValueError(f"unknown function {name!r}") from None


# ---------------------------------------------------------------------------
# Normal-form rewriting (only runs when watched atoms may be present)


@lru_cache(maxsize=None)
def _trig_nf(e, f):
    """sin^e cos^f as {(e', f'): coeff} in the reduced basis."""
    if e >= 2:
        out = dict(_trig_nf(e - 2, f))
        for key, c in _trig_nf(e - 2, f + 2).items():
            out[key] = out.get(key, 0) - c
    elif e < 0 and f >= 2:
        out = dict(_trig_nf(e, f - 2))
        for key, c in _trig_nf(e + 2, f - 2).items():
            out[key] = out.get(key, 0) - c
    elif e < 0 and f < 0:
        out = dict(_trig_nf(e + 2, f))
        for key, c in _trig_nf(e, f + 2).items():
            out[key] = out.get(key, 0) + c
    else:
        return {(e, f): 1}
    return {k: v for k, v in out.items() if v}


def _mono_status(m):
    """0: no watched atoms; 1: watched but normal; 2: needs rewriting."""
    status = 0
    nexp = 0
    for k in range(0, len(m), 2):
        tag = _watch.get(m[k])
        if tag is None:
            continue
        status = 1
        e = m[k + 1]
        if tag == "sum":
            if e > 0:
                return 2
        elif tag == "sqrt":
            if e != 1:
                return 2
        elif tag == "exp":
            nexp += 1
            if e != 1 or nexp > 1:
                return 2
        elif tag == "sin":
            if e >= 2:
                return 2
            if e < 0:
                f = _exponent_in(m, _trig_partner(m[k]))
                if f >= 2 or f < 0:
                    return 2
    return status


def _exponent_in(m, aid):
    for k in range(0, len(m), 2):
        if m[k] == aid:
            return m[k + 1]
    return 0


def _rewrite_mono(m):
    fac = dict(zip(m[0::2], m[1::2]))
    rest = {}
    parts = []
    exps = []
    done = set()
    for aid, e in fac.items():
        if aid in done:
            continue
        tag = _watch.get(aid)
        if tag is None:
            rest[aid] = e
        elif tag in ("sin", "cos"):
            pid = _trig_partner(aid)
            sid, cid = (aid, pid) if tag == "sin" else (pid, aid)
            es, fc = fac.get(sid, 0), fac.get(cid, 0)
            done.add(sid)
            done.add(cid)
            nf = _trig_nf(es, fc)
            if len(nf) == 1 and (es, fc) in nf:
                if es:
                    rest[sid] = es
                if fc:
                    rest[cid] = fc
            else:
                parts.append({_mono_from({sid: a, cid: b}): Rational(c) for (a, b), c in nf.items()})
        elif tag == "exp":
            exps.append((aid, e))
        elif tag == "sqrt":
            if e == 1:
                rest[aid] = e
            else:
                q, r = divmod(e, 2)
                part = _arg[aid] ** q
                if r:
                    part = part * _atom_expr(aid)
                parts.append(part._p)
        else:  # sum atom
            if e > 0:
                parts.append((_arg[aid] ** e)._p)
            else:
                rest[aid] = e
    if len(exps) == 1 and exps[0][1] == 1:
        rest[exps[0][0]] = 1
    elif exps:
        total = ZERO
        for aid, e in exps:
            total = total + _arg[aid] * e
        if total._p:
            parts.append(exp(total)._p)
    poly = {_mono_from(rest): _Q1}
    for part in parts:
        poly = K.poly_mul(poly, part)
    return poly


def _rewrite_pass(p):
    """One rewriting sweep; returns (poly, watched, changed)."""
    watched = False
    out = None
    for m, c in p.items():
        st = _mono_status(m)
        if st == 2:
            if out is None:
                out = {}
                for m2, c2 in p.items():
                    if m2 is m:
                        break
                    out[m2] = c2
            K.poly_addscaled(out, _rewrite_mono(m), c)
        else:
            if st == 1:
                watched = True
            if out is not None:
                K.poly_addscaled(out, {m: c}, 1)
    if out is None:
        return p, watched, False
    return out, watched, True


def _fixup(p):
    for _ in range(100000):
        p, watched, changed = _rewrite_pass(p)
        if changed:
            continue
        if watched:
            q = _cancel_denominators(p)
            if q is not None:
                p = q
                continue
        return p, watched
    raise RuntimeError("normal-form rewriting did not terminate")


def _cancel_denominators(p):
    """Bring the denominator atoms of ``p`` to one reduced fraction.

    ``p`` is rewritten as ``N * prod(S_j ** -K_j)`` with ``K_j`` the largest
    power of ``1/prim_j`` present, then ``N`` is divided by every ``prim_j``
    as long as the division is exact.  Returns the new polynomial, or None
    when ``p`` is already in that form.
    """
    depth = {}
    for m in p:
        for k in range(0, len(m), 2):
            a, e = m[k], m[k + 1]
            if e < 0 and _watch.get(a) == "sum" and -e > depth.get(a, 0):
                depth[a] = -e
    if not depth:
        return None
    num = {}
    for m, c in p.items():
        fac = dict(zip(m[0::2], m[1::2]))
        term = None
        for a, k in depth.items():
            j = k + fac.pop(a, 0)
            if j:
                pw = (_arg[a] ** j)._p
                term = pw if term is None else K.poly_mul(term, pw)
        K.poly_addmul(num, term if term is not None else {(): _Q1}, {_mono_from(fac): c}, 1)
    num = _reduce(num)
    for a in sorted(depth, key=_skey.__getitem__):
        prim = _arg[a]._p
        while depth[a] and num:
            q = _exact_div(num, prim)
            if q is None:
                break
            num = q
            depth[a] -= 1
    out = {}
    K.poly_addmul(out, num, {_mono_from({a: -k for a, k in depth.items()}): _Q1}, 1)
    return None if out == p else out


def _exact_div(num, den):
    """Exact quotient num/den as a Laurent polynomial, or None.

    When plain division fails and ``den = A + B r`` involves ``r = sin(u)``
    or ``r = sqrt(u)``, both sides are multiplied by ``A - B r`` so the
    divisor becomes free of ``r`` and the rule for ``r^2`` is accounted for.
    """
    q = _exact_div_plain(num, den)
    if q is not None:
        return q
    sins = {a for a in K.poly_atoms(den) if _watch.get(a) in ("sin", "sqrt")}
    if not sins:
        return None
    for p in (num, den):
        for m in p:
            for k in range(0, len(m), 2):
                if _watch.get(m[k]) in ("sin", "sqrt") and m[k + 1] not in (0, 1):
                    return None
    for sid in sorted(sins, key=_skey.__getitem__):
        conj = {m: (-c if _exponent_in(m, sid) else c) for m, c in den.items()}
        num, den = _reduce(K.poly_mul(num, conj)), _reduce(K.poly_mul(den, conj))
        if not den:
            return None
    return _exact_div_plain(num, den)


def _reduce(p):
    changed = True
    while changed:
        p, _, changed = _rewrite_pass(p)
    return p


def _exact_div_plain(num, den):
    vec, mono = _lift(num, den)
    N = {vec(m): c for m, c in num.items()}
    Dn = {vec(m): c for m, c in den.items()}
    nv = len(next(iter(Dn)))
    lo_n = [min(v[i] for v in N) for i in range(nv)]
    lo_d = [min(v[i] for v in Dn) for i in range(nv)]
    N = {tuple(a - b for a, b in zip(v, lo_n)): c for v, c in N.items()}
    Dn = {tuple(a - b for a, b in zip(v, lo_d)): c for v, c in Dn.items()}
    lt_d = max(Dn)
    lc_d = Dn[lt_d]
    Q = {}
    steps = 0
    while N:
        steps += 1
        if steps > 10000:
            return None
        lt = max(N)
        if any(a < b for a, b in zip(lt, lt_d)):
            return None
        qm = tuple(a - b for a, b in zip(lt, lt_d))
        qc = N[lt] / lc_d
        Q[qm] = Q.get(qm, 0) + qc
        for v, c in Dn.items():
            w = tuple(a + b for a, b in zip(v, qm))
            x = N.get(w, 0) - qc * c
            if x:
                N[w] = x
            else:
                N.pop(w, None)
    shift = [a - b for a, b in zip(lo_n, lo_d)]
    out = {}
    for v, c in Q.items():
        if c:
            out[mono([a + b for a, b in zip(v, shift)])] = c
    return out


# ---------------------------------------------------------------------------
# Calculus


def _atom_deriv(aid, vid):
    key = (aid, vid)
    d = _deriv_cache.get(key)
    if d is not None:
        return d
    kind = _kind[aid]
    if kind == "sym":
        d = ONE if aid == vid else ZERO
    elif kind == "sum":
        d = diff(_arg[aid], vid)
    else:
        u = _arg[aid]
        du = diff(u, vid)
        name = _name[aid]
        if not du._p:
            d = ZERO
        elif name == "sin":
            d = cos(u) * du
        elif name == "cos":
            d = -sin(u) * du
        elif name == "exp":
            d = _atom_expr(aid) * du
        elif name == "log":
            d = du * u ** -1
        elif name == "sqrt":
            d = du * _atom_expr(aid) ** -1 * Rational(1, 2)
        else:  # pragma: no cover
            raise AssertionError(name)
    _deriv_cache[key] = d
    return d


def diff(e, v):
    """Exact partial derivative of ``e`` with respect to the symbol ``v``."""
    vid = v if isinstance(v, int) else _symbol_id(v)
    e = _as_expr(e)
    if not e._p or vid not in e.free_ids:
        return ZERO
    derivs = {}
    sp = e._sp
    for aid in K.poly_atoms(e._p):
        if vid in _free[aid]:
            d = _atom_deriv(aid, vid)
            if d._p:
                derivs[aid] = d._p
                sp = sp or d._sp
    if not derivs:
        return ZERO
    return _make(K.poly_diff(e._p, derivs), sp)


def symbol_id(v):
    """Internal atom id of a coordinate symbol (name or Expr)."""
    return _symbol_id(v)


def substitute(e, mapping):
    """Simultaneous substitution of symbols by expressions."""
    e = _as_expr(e)
    sub = {}
    for k, v in mapping.items():
        sub[_symbol_id(k)] = _as_expr(v)
    if not sub or not (e.free_ids & sub.keys()):
        return e
    memo = {}
    return _subst(e, sub, memo)


def _subst_atom(aid, sub, memo):
    r = memo.get(aid)
    if r is not None:
        return r
    if not (_free[aid] & sub.keys()):
        r = False
    elif _kind[aid] == "sym":
        r = sub[aid]
    elif _kind[aid] == "fn":
        r = _FUNC_TABLE[_name[aid]](_subst(_arg[aid], sub, memo))
    else:
        r = ("sum", _subst(_arg[aid], sub, memo))
    memo[aid] = r
    return r


def _subst(e, sub, memo):
    out = ZERO
    keep = {}
    for m, c in e._p.items():
        fac = []
        changed = False
        for k in range(0, len(m), 2):
            r = _subst_atom(m[k], sub, memo)
            if r is False:
                fac.append((None, m[k], m[k + 1]))
            else:
                changed = True
                fac.append((r, m[k], m[k + 1]))
        if not changed:
            keep[m] = c
            continue
        term = _const_q(c)
        for r, aid, k in fac:
            if r is None:
                term = term * _new({(aid, k): _Q1}, aid in _watch)
            elif isinstance(r, tuple):
                term = term * r[1] ** k
            else:
                term = term * r ** k
        out = out + term
    if keep:
        out = out + _make(keep, e._sp)
    return out


# ---------------------------------------------------------------------------
# Numeric evaluation

_NUMFN = {"sin": math.sin, "cos": math.cos, "exp": math.exp}


def _atom_value(aid, assignment, memo):
    v = memo.get(aid)
    if v is not None:
        return v
    kind = _kind[aid]
    if kind == "sym":
        try:
            v = float(assignment[_name[aid]])
        except KeyError:
            raise MissingAssignmentError(_name[aid]) from None
        if not math.isfinite(v):
            raise ValueError(f"non-finite value for {_name[aid]!r}")
    elif kind == "sum":
        v = _eval(_arg[aid], assignment, memo)
    else:
        u = _eval(_arg[aid], assignment, memo)
        name = _name[aid]
        if name == "log":
            if u <= 0:
                raise EvalDomainError(f"log of non-positive value in log({_arg[aid]})", _atom_expr(aid))
            v = math.log(u)
        elif name == "sqrt":
            if u < 0:
                raise EvalDomainError(f"sqrt of negative value in sqrt({_arg[aid]})", _atom_expr(aid))
            v = math.sqrt(u)
        else:
            try:
                v = _NUMFN[name](u)
            except OverflowError:
                raise EvalDomainError(f"overflow in {name}({_arg[aid]})", _atom_expr(aid)) from None
    memo[aid] = v
    return v


def _eval(e, assignment, memo):
    vals = {aid: _atom_value(aid, assignment, memo) for aid in K.poly_atoms(e._p)}
    try:
        return K.poly_eval(e._p, vals)
    except ZeroDivisionError:
        for aid, x in vals.items():
            if x == 0.0:
                den = _atom_expr(aid)
                if _kind[aid] == "sum":
                    den = _arg[aid]
                raise EvalDomainError(f"division by zero: {den} = 0", den) from None
        raise EvalDomainError("division by zero", e) from None  # pragma: no cover


def evaluate(e, assignment):
    """Floating-point value of ``e``; ``assignment`` maps names to reals."""
    e = _as_expr(e)
    return _eval(e, assignment, {})


def _atom_values_points(aid, points, npts, memo):
    v = memo.get(aid)
    if v is not None:
        return v
    kind = _kind[aid]
    if kind == "sym":
        try:
            v = np.ascontiguousarray(points[_name[aid]], dtype=np.float64)
        except KeyError:
            raise MissingAssignmentError(_name[aid]) from None
    elif kind == "sum":
        v = _eval_points(_arg[aid], points, npts, memo)
    else:
        u = _eval_points(_arg[aid], points, npts, memo)
        name = _name[aid]
        with np.errstate(all="ignore"):
            if name == "log":
                v = np.where(u > 0, np.log(np.where(u > 0, u, 1.0)), np.nan)
            elif name == "sqrt":
                v = np.where(u >= 0, np.sqrt(np.where(u >= 0, u, 0.0)), np.nan)
            else:
                v = getattr(np, name)(u)
    memo[aid] = v
    return v


def _eval_points(e, points, npts, memo):
    vals = {aid: _atom_values_points(aid, points, npts, memo) for aid in K.poly_atoms(e._p)}
    return K.poly_eval_points(e._p, vals, npts)


def evaluate_points(exprs, points, memo=None):
    """Vectorized evaluation of several expressions at the same points.

    ``points`` maps symbol names to equal-length float arrays.  Returns a
    list of arrays; out-of-domain points come back as nan or inf.
    """
    npts = len(next(iter(points.values()))) if points else 1
    if memo is None:
        memo = {}
    out = []
    for e in exprs:
        e = _as_expr(e)
        if not e._p:
            out.append(np.zeros(npts))
        else:
            out.append(_eval_points(e, points, npts, memo))
    return out


# ---------------------------------------------------------------------------
# Raw trees


def _atom_raw(aid):
    kind = _kind[aid]
    if kind == "sym":
        return ("sym", _name[aid])
    if kind == "fn":
        return ("fn", _name[aid], _arg[aid].to_raw())
    return _arg[aid].to_raw()


def canonicalize(raw):
    """Canonical Expr of a raw tree.

    Raw nodes: ``("num", q)``, ``("sym", name)``, ``("add", [nodes])``,
    ``("mul", [nodes])``, ``("pow", node, int)``, ``("fn", name, node)``.
    An Expr is accepted as a leaf.
    """
    if isinstance(raw, Expr):
        return raw
    tag = raw[0]
    if tag == "num":
        return const(raw[1])
    if tag == "sym":
        return symbol(raw[1])
    if tag == "add":
        out = ZERO
        for r in raw[1]:
            out = out + canonicalize(r)
        return out
    if tag == "mul":
        out = ONE
        for r in raw[1]:
            out = out * canonicalize(r)
        return out
    if tag == "pow":
        return canonicalize(raw[1]) ** int(raw[2])
    if tag == "fn":
        return apply_function(raw[1], canonicalize(raw[2]))
    raise ValueError(f"unknown raw node {tag!r}")


# ---------------------------------------------------------------------------
# Printing


def _fmt_q(q):
    return str(int(q.numerator)) if q.denominator == 1 else f"{int(q.numerator)}/{int(q.denominator)}"


def _atom_str(aid):
    kind = _kind[aid]
    if kind == "sym":
        return _name[aid]
    if kind == "fn":
        return f"{_name[aid]}({_format(_arg[aid])})"
    return f"({_format(_arg[aid])})"


def _factor_order(m):
    return sorted(((m[k], m[k + 1]) for k in range(0, len(m), 2)), key=lambda t: _skey[t[0]])


def _term_str(m, c):
    """Returns (text, negative) for one monomial with coefficient c."""
    neg = c < 0
    a = -c if neg else c
    num = []
    den = []
    for aid, e in _factor_order(m):
        s = _atom_str(aid)
        if e > 0:
            num.append(s if e == 1 else f"{s}^{e}")
        else:
            den.append(s if e == -1 else f"{s}^{-e}")
    if a != 1 or not num:
        num.insert(0, _fmt_q(a))
    text = "*".join(num)
    if den:
        text += "/" + "/".join(den)
    return text, neg


def _format(e):
    p = e._p
    if not p:
        return "0"
    out = []
    for i, m in enumerate(sorted(p, key=_mono_key)):
        text, neg = _term_str(m, p[m])
        if i == 0:
            if neg:
                # a leading unary minus binds tighter than '^', so guard powers
                first = text.split("*", 1)[0].split("/", 1)[0]
                if "^" in first:
                    text = f"({text})"
                out.append("-" + text)
            else:
                out.append(text)
        else:
            out.append((" - " if neg else " + ") + text)
    return "".join(out)


def _latex_atom(aid, names):
    kind = _kind[aid]
    if kind == "sym":
        return names(_name[aid]) if names else _name[aid]
    if kind == "fn":
        fname = {"sin": r"\sin", "cos": r"\cos", "exp": r"\exp", "log": r"\log"}.get(_name[aid])
        if _name[aid] == "sqrt":
            return r"\sqrt{" + _latex(_arg[aid], names) + "}"
        return fname + r"\left(" + _latex(_arg[aid], names) + r"\right)"
    return r"\left(" + _latex(_arg[aid], names) + r"\right)"


def _latex_q(q):
    if q.denominator == 1:
        return str(int(q.numerator))
    return r"\frac{%d}{%d}" % (int(q.numerator), int(q.denominator))


def _latex(e, names=None):
    p = e._p
    if not p:
        return "0"
    out = []
    for i, m in enumerate(sorted(p, key=_mono_key)):
        c = p[m]
        neg = c < 0
        a = -c if neg else c
        num, den = [], []
        for aid, k in _factor_order(m):
            s = _latex_atom(aid, names)
            if k > 0:
                num.append(s if k == 1 else f"{{{s}}}^{{{k}}}")
            else:
                den.append(s if k == -1 else f"{{{s}}}^{{{-k}}}")
        nump = " ".join(num)
        if a.denominator != 1 or den:
            top = str(int(a.numerator)) if a.numerator != 1 or not nump else ""
            top = (top + " " + nump).strip() or "1"
            bottom = (str(int(a.denominator)) if a.denominator != 1 else "") + " " + " ".join(den)
            t = r"\frac{%s}{%s}" % (top, bottom.strip())
        else:
            t = nump if a == 1 and nump else (_latex_q(a) + (" " + nump if nump else ""))
        if i == 0:
            out.append("-" + t if neg else t)
        else:
            out.append((" - " if neg else " + ") + t)
    return "".join(out)
