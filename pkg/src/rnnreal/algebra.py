"""Exact multivariate polynomials and rational functions over the rationals.

Coefficients are :class:`fractions.Fraction`; polynomials are sparse maps from
exponent tuples to nonzero coefficients.  Values are immutable once built, so
they can be shared freely between threads.

Variables are addressed with 0-based indices in the Python API.  The text form
uses the 1-based names ``X1 .. Xn``::

    >>> x1, x2 = MultiPoly.variables(2)
    >>> str(x1 * x2 * (1 - x2))
    '-1 * X1 * X2^2 + 1 * X1 * X2'
"""
from __future__ import annotations

import contextlib
import contextvars
import math
import re
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import ArgumentError, BlowupError, DimensionError, EvaluationError, ParseError

Scalar = Fraction

DEFAULT_DEGREE_CAP = 64
_degree_cap = contextvars.ContextVar("degree_cap", default=DEFAULT_DEGREE_CAP)


def get_degree_cap() -> int:
    return _degree_cap.get()


@contextlib.contextmanager
def degree_cap(cap: int):
    """Temporarily change the total-degree cap for polynomials built in this context."""
    if cap < 0:
        raise ArgumentError("degree cap must be non-negative")
    token = _degree_cap.set(cap)
    try:
        yield cap
    finally:
        _degree_cap.reset(token)


def to_scalar(value, precision: int | None = None) -> Fraction:
    """Convert ``value`` to an exact rational.

    Integers, Fractions and strings such as ``"3"``, ``"-2/7"`` or ``"0.125"``
    are converted exactly.  Python floats are read through their shortest
    decimal representation unless ``precision`` is given, in which case the
    closest rational with denominator at most ``10**precision`` is used.
    Anything else (``"pi"``, ``nan``) is rejected.
    """
    if isinstance(value, bool):
        raise ArgumentError(f"not a rational literal: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ArgumentError(f"not a finite number: {value!r}")
        if precision is not None:
            return Fraction(value).limit_denominator(10**precision)
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ArgumentError(f"not a rational literal: {value!r}") from None
    raise ArgumentError(f"not a rational literal: {value!r}")


def format_scalar(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _grlex_key(exps: tuple[int, ...]):
    return (sum(exps), exps)


class MultiPoly:
    """Sparse polynomial in ``num_vars`` variables with rational coefficients."""

    __slots__ = ("num_vars", "_terms", "_degree")

    def __init__(self, num_vars: int, terms: Mapping[Sequence[int], object] | None = None):
        if not isinstance(num_vars, int) or num_vars < 0:
            raise ArgumentError(f"num_vars must be a non-negative integer, got {num_vars!r}")
        clean: dict[tuple[int, ...], Fraction] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != num_vars:
                raise DimensionError(f"exponent vector {exps} does not have length {num_vars}")
            if any(e < 0 for e in exps):
                raise ArgumentError(f"negative exponent in {exps}")
            c = to_scalar(coeff)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if not clean[exps]:
                    del clean[exps]
        self._init(num_vars, clean)

    def _init(self, num_vars, terms):
        self.num_vars = num_vars
        self._terms = terms
        self._degree = max((sum(e) for e in terms), default=-1)
        cap = _degree_cap.get()
        if self._degree > cap:
            raise BlowupError(f"polynomial of total degree {self._degree} exceeds the cap {cap}")

    @classmethod
    def _raw(cls, num_vars: int, terms: dict) -> MultiPoly:
        # terms already validated: exact Fractions, no zeros
        obj = cls.__new__(cls)
        obj._init(num_vars, terms)
        return obj

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, num_vars: int) -> MultiPoly:
        return cls._raw(num_vars, {})

    @classmethod
    def constant(cls, num_vars: int, value) -> MultiPoly:
        c = to_scalar(value)
        return cls._raw(num_vars, {(0,) * num_vars: c} if c else {})

    @classmethod
    def one(cls, num_vars: int) -> MultiPoly:
        return cls.constant(num_vars, 1)

    @classmethod
    def variable(cls, num_vars: int, index: int) -> MultiPoly:
        if not 0 <= index < num_vars:
            raise ArgumentError(f"variable index {index} out of range for {num_vars} variables")
        exps = [0] * num_vars
        exps[index] = 1
        return cls._raw(num_vars, {tuple(exps): Fraction(1)})

    @classmethod
    def variables(cls, num_vars: int) -> list[MultiPoly]:
        return [cls.variable(num_vars, i) for i in range(num_vars)]

    # -- inspection ---------------------------------------------------------
    @property
    def terms(self) -> Mapping[tuple[int, ...], Fraction]:
        return MappingProxyType(self._terms)

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return self._degree

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return self._degree <= 0

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ArgumentError("polynomial is not constant")
        return self._terms.get((0,) * self.num_vars, Fraction(0))

    def is_one(self) -> bool:
        return self.is_constant() and self.constant_value() == 1

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Terms in graded-lexicographic order, leading term first."""
        return sorted(self._terms.items(), key=lambda item: _grlex_key(item[0]), reverse=True)

    def variables_used(self) -> set[int]:
        return {i for exps in self._terms for i, e in enumerate(exps) if e}

    def __len__(self):
        return len(self._terms)

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> MultiPoly:
        if isinstance(other, MultiPoly):
            if other.num_vars != self.num_vars:
                raise DimensionError(
                    f"cannot combine polynomials in {self.num_vars} and {other.num_vars} variables"
                )
            return other
        if isinstance(other, (int, Fraction, str)) and not isinstance(other, bool):
            return MultiPoly.constant(self.num_vars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for exps, c in other._terms.items():
            s = out.get(exps, 0) + c
            if s:
                out[exps] = s
            else:
                out.pop(exps, None)
        return MultiPoly._raw(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.num_vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self._terms or not other._terms:
            return MultiPoly.zero(self.num_vars)
        cap = _degree_cap.get()
        if self._degree + other._degree > cap:
            raise BlowupError(
                f"product degree {self._degree + other._degree} exceeds the cap {cap}"
            )
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly._raw(self.num_vars, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ArgumentError("exponent must be a non-negative integer")
        result = MultiPoly.one(self.num_vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c) -> MultiPoly:
        c = to_scalar(c)
        if not c:
            return MultiPoly.zero(self.num_vars)
        return MultiPoly._raw(self.num_vars, {e: v * c for e, v in self._terms.items()})

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.num_vars == other.num_vars and self._terms == other._terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        return hash((self.num_vars, frozenset(self._terms.items())))

    # -- calculus and evaluation -------------------------------------------
    def partial(self, index: int) -> MultiPoly:
        """Formal partial derivative with respect to variable ``index`` (0-based)."""
        if not 0 <= index < self.num_vars:
            raise ArgumentError(f"variable index {index} out of range for {self.num_vars} variables")
        out = {}
        for exps, c in self._terms.items():
            e = exps[index]
            if e:
                new = exps[:index] + (e - 1,) + exps[index + 1:]
                out[new] = c * e
        return MultiPoly._raw(self.num_vars, out)

    def gradient(self) -> list[MultiPoly]:
        return [self.partial(i) for i in range(self.num_vars)]

    def evaluate(self, point: Sequence) -> Fraction:
        """Exact value at a rational point."""
        if len(point) != self.num_vars:
            raise DimensionError(f"point has {len(point)} coordinates, expected {self.num_vars}")
        pt = [to_scalar(v) for v in point]
        # cache powers: exponents repeat heavily across terms
        powers: list[dict[int, Fraction]] = [{} for _ in pt]
        total = Fraction(0)
        for exps, c in self._terms.items():
            term = c
            for i, e in enumerate(exps):
                if e:
                    cache = powers[i]
                    p = cache.get(e)
                    if p is None:
                        p = cache[e] = pt[i] ** e
                    term *= p
            total += term
        return total

    def evaluate_float(self, point: Sequence[float]) -> float:
        total = 0.0
        for exps, c in self._terms.items():
            term = float(c)
            for i, e in enumerate(exps):
                if e:
                    term *= point[i] ** e
            total += term
        return total

    def embed(self, num_vars: int, positions: Sequence[int]) -> MultiPoly:
        """Rename variable ``t`` to variable ``positions[t]`` of a ring with ``num_vars`` variables."""
        if len(positions) != self.num_vars:
            raise DimensionError("one target position per variable is required")
        if any(not 0 <= p < num_vars for p in positions):
            raise ArgumentError("target position out of range")
        out: dict[tuple[int, ...], Fraction] = {}
        for exps, c in self._terms.items():
            new = [0] * num_vars
            for t, e in enumerate(exps):
                new[positions[t]] += e
            key = tuple(new)
            out[key] = out.get(key, 0) + c
        return MultiPoly._raw(num_vars, {e: c for e, c in out.items() if c})

    # -- text ---------------------------------------------------------------
    def to_text(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"X{i + 1}" for i in range(self.num_vars)]
        if not self._terms:
            return "0"
        pieces = []
        for k, (exps, c) in enumerate(self.sorted_terms()):
            factors = [format_scalar(abs(c))]
            for i, e in enumerate(exps):
                if e == 1:
                    factors.append(names[i])
                elif e > 1:
                    factors.append(f"{names[i]}^{e}")
            body = " * ".join(factors)
            if k == 0:
                pieces.append(f"-{body}" if c < 0 else body)
            else:
                pieces.append(f"- {body}" if c < 0 else f"+ {body}")
        return " ".join(pieces)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"MultiPoly({self.num_vars}, {self.to_text()!r})"


class RationalFunc:
    """Numerator/denominator pair of polynomials; no gcd cancellation is ever applied."""

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: MultiPoly, denominator: MultiPoly | None = None):
        if denominator is None:
            denominator = MultiPoly.one(numerator.num_vars)
        if numerator.num_vars != denominator.num_vars:
            raise DimensionError("numerator and denominator must share num_vars")
        if denominator.is_zero():
            raise ArgumentError("denominator is the zero polynomial")
        self.numerator = numerator
        self.denominator = denominator

    @classmethod
    def from_poly(cls, p: MultiPoly) -> RationalFunc:
        return cls(p, MultiPoly.one(p.num_vars))

    @classmethod
    def zero(cls, num_vars: int) -> RationalFunc:
        return cls(MultiPoly.zero(num_vars))

    @property
    def num_vars(self) -> int:
        return self.numerator.num_vars

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def is_polynomial(self) -> bool:
        """True iff the stored denominator is the constant one."""
        return self.denominator.is_one()

    def _check(self, other: RationalFunc):
        if other.num_vars != self.num_vars:
            raise DimensionError(
                f"cannot combine rational functions in {self.num_vars} and {other.num_vars} variables"
            )

    def __add__(self, other: RationalFunc) -> RationalFunc:
        self._check(other)
        return rat_combine([self, other])

    def __neg__(self):
        return RationalFunc(-self.numerator, self.denominator)

    def __sub__(self, other: RationalFunc) -> RationalFunc:
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, MultiPoly):
            other = RationalFunc.from_poly(other)
        self._check(other)
        return RationalFunc(self.numerator * other.numerator, self.denominator * other.denominator)

    def scale(self, c) -> RationalFunc:
        return RationalFunc(self.numerator.scale(c), self.denominator)

    def partial(self, index: int) -> RationalFunc:
        """Quotient rule; stays polynomial when the denominator is constant."""
        n, d = self.numerator, self.denominator
        if d.is_constant():
            return RationalFunc(n.partial(index), d)
        return RationalFunc(n.partial(index) * d - n * d.partial(index), d * d)

    def evaluate(self, point: Sequence) -> Fraction:
        den = self.denominator.evaluate(point)
        if not den:
            raise EvaluationError(
                f"denominator {self.denominator} vanishes at {list(point)}",
                denominator=self.denominator,
                point=tuple(point),
            )
        return self.numerator.evaluate(point) / den

    def embed(self, num_vars: int, positions: Sequence[int]) -> RationalFunc:
        return RationalFunc(self.numerator.embed(num_vars, positions),
                            self.denominator.embed(num_vars, positions))

    def equivalent(self, other: RationalFunc) -> bool:
        """Equality as elements of the fraction field (cross multiplication)."""
        self._check(other)
        return self.numerator * other.denominator == other.numerator * self.denominator

    def __eq__(self, other):
        if not isinstance(other, RationalFunc):
            return NotImplemented
        return self.numerator == other.numerator and self.denominator == other.denominator

    def __hash__(self):
        return hash((self.numerator, self.denominator))

    def to_text(self, names=None) -> str:
        num = self.numerator.to_text(names)
        if self.is_polynomial():
            return num
        return f"({num}) / ({self.denominator.to_text(names)})"

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"RationalFunc({self.numerator.to_text()!r}, {self.denominator.to_text()!r})"


def poly_arith(op: str, a: MultiPoly, b: MultiPoly) -> MultiPoly:
    if a.num_vars != b.num_vars:
        raise DimensionError(f"cannot {op} polynomials in {a.num_vars} and {b.num_vars} variables")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ArgumentError(f"unknown operation {op!r}")


def rat_combine(terms: Sequence[RationalFunc]) -> RationalFunc:
    """Sum of fractions brought to the product denominator.

    numerator = sum_k P_k * prod_{r != k} Q_r and denominator = prod_k Q_k.
    Nothing is cancelled, so the denominator records every summand.
    """
    terms = list(terms)
    if not terms:
        raise ArgumentError("rat_combine needs at least one summand")
    n = terms[0].num_vars
    if any(t.num_vars != n for t in terms):
        raise DimensionError("all summands must share num_vars")
    if len(terms) == 1:
        return terms[0]
    # prefix/suffix products avoid the quadratic number of multiplications
    prefix = [MultiPoly.one(n)]
    for t in terms:
        prefix.append(prefix[-1] * t.denominator)
    suffix = [MultiPoly.one(n)]
    for t in reversed(terms):
        suffix.append(suffix[-1] * t.denominator)
    suffix.reverse()
    num = MultiPoly.zero(n)
    for k, t in enumerate(terms):
        if t.numerator.is_zero():
            continue
        num = num + t.numerator * prefix[k] * suffix[k + 1]
    return RationalFunc(num, prefix[-1])


def poly_partial(p: MultiPoly, var_index: int) -> MultiPoly:
    return p.partial(var_index)


def poly_eval(p: MultiPoly, point: Sequence) -> Fraction:
    return p.evaluate(point)


def rat_eval(f: RationalFunc, point: Sequence) -> Fraction:
    return f.evaluate(point)


# -- exact linear algebra ---------------------------------------------------

def _integer_rows(m: Sequence[Sequence]) -> list[list[int]]:
    rows = []
    for row in m:
        row = [to_scalar(v) for v in row]
        scale = 1
        for v in row:
            scale = scale * v.denominator // math.gcd(scale, v.denominator)
        rows.append([int(v * scale) for v in row])
    return rows


def exact_rank(m: Sequence[Sequence]) -> int:
    """Rank over the rationals by fraction-free (Bareiss) elimination.

    Rows are first scaled to integers, so every intermediate value is an exact
    integer and no threshold is involved.
    """
    rows = _integer_rows(m)
    if not rows or not rows[0]:
        return 0
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DimensionError("matrix rows have different lengths")
    rank = 0
    prev = 1
    for col in range(width):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        for r in range(rank + 1, len(rows)):
            a = rows[r][col]
            rows[r] = [(p * rows[r][c] - a * rows[rank][c]) // prev for c in range(width)]
        prev = p
        rank += 1
        if rank == len(rows):
            break
    return rank


class EchelonBasis:
    """Incrementally maintained row-echelon basis over the rationals.

    Used to decide whether a new exact vector enlarges a span without
    recomputing the rank of the whole matrix.
    """

    def __init__(self, width: int):
        self.width = width
        self._rows: list[tuple[int, list[Fraction]]] = []

    @property
    def rank(self) -> int:
        return len(self._rows)

    def reduce(self, vec: Sequence) -> list[Fraction]:
        v = [to_scalar(x) for x in vec]
        if len(v) != self.width:
            raise DimensionError(f"vector length {len(v)} != {self.width}")
        for pivot, row in self._rows:
            c = v[pivot]
            if c:
                for k in range(pivot, self.width):
                    if row[k]:
                        v[k] -= c * row[k]
        return v

    def add(self, vec: Sequence) -> bool:
        """Insert ``vec``; return True iff it was independent of the basis."""
        v = self.reduce(vec)
        pivot = next((k for k, x in enumerate(v) if x), None)
        if pivot is None:
            return False
        lead = v[pivot]
        v = [x / lead for x in v]
        # keep earlier rows reduced against the new pivot
        for idx, (p, row) in enumerate(self._rows):
            c = row[pivot]
            if c:
                self._rows[idx] = (p, [a - c * b for a, b in zip(row, v)])
        self._rows.append((pivot, v))
        self._rows.sort(key=lambda item: item[0])
        return True


# -- text parsing -------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:pos + 1]!r} at column {pos + 1} in {text!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class _PolyParser:
    def __init__(self, text, num_vars, names):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.n = num_vars
        self.names = names

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def fail(self, msg):
        raise ParseError(f"{msg} in polynomial {self.text!r}")

    def parse(self) -> MultiPoly:
        if not self.tokens:
            self.fail("empty expression")
        p = self.expr()
        if self.pos != len(self.tokens):
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return p

    def expr(self):
        sign = 1
        kind, val = self.peek()
        if val in ("+", "-"):
            self.take()
            sign = -1 if val == "-" else 1
        acc = self.term().scale(sign)
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self):
        acc = self.power()
        while True:
            val = self.peek()[1]
            if val == "*":
                self.take()
                acc = acc * self.power()
            elif val == "/":
                self.take()
                divisor = self.power()
                if not divisor.is_constant() or divisor.is_zero():
                    self.fail("division is only allowed by nonzero constants")
                acc = acc.scale(1 / divisor.constant_value())
            else:
                return acc

    def power(self):
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.take()
            kind, val = self.take()
            if kind != "num" or not val.isdigit():
                self.fail("exponent must be a non-negative integer")
            base = base ** int(val)
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return MultiPoly.constant(self.n, Fraction(val))
        if kind == "name":
            return MultiPoly.variable(self.n, self.lookup(val))
        if val == "(":
            inner = self.expr()
            if self.take()[1] != ")":
                self.fail("missing ')'")
            return inner
        if val == "-":
            return -self.power()
        self.fail(f"unexpected token {val!r}")

    def lookup(self, name):
        if self.names is not None and name in self.names:
            return self.names[name]
        m = re.fullmatch(r"X(\d+)", name)
        if m:
            idx = int(m.group(1)) - 1
            if 0 <= idx < self.n:
                return idx
            self.fail(f"variable {name} out of range for {self.n} variables")
        self.fail(f"unknown symbol {name!r}")


def parse_poly(text: str, num_vars: int, names: Sequence[str] | None = None) -> MultiPoly:
    """Parse polynomial text such as ``"1 - X1^2"`` or ``"-1/2 * X1 * X2"``.

    ``X1 .. Xn`` are always accepted; ``names`` adds aliases for variables in order.
    """
    table = {name: i for i, name in enumerate(names)} if names is not None else None
    if isinstance(text, (int, Fraction)):
        return MultiPoly.constant(num_vars, text)
    if not isinstance(text, str):
        raise ParseError(f"polynomial must be text, got {type(text).__name__}")
    return _PolyParser(text, num_vars, table).parse()


def matrix_to_scalars(rows: Iterable[Iterable]) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(to_scalar(v) for v in row) for row in rows)


class CompiledPolys:
    """Float evaluator for a list of polynomials sharing one ring.

    Evaluates every polynomial at once on a single point of shape ``(n,)`` or a
    batch of shape ``(B, n)``; used by the simulators, where exact arithmetic
    would be far too slow.
    """

    def __init__(self, polys: Sequence[MultiPoly], num_vars: int | None = None):
        import numpy as np

        polys = list(polys)
        if num_vars is None:
            num_vars = polys[0].num_vars if polys else 0
        exps, coefs, rows = [], [], []
        for r, p in enumerate(polys):
            if p.num_vars != num_vars:
                raise DimensionError("all compiled polynomials must share num_vars")
            for e, c in p.terms.items():
                exps.append(e)
                coefs.append(float(c))
                rows.append(r)
        self.num_vars = num_vars
        self.size = len(polys)
        self._exps = np.array(exps, dtype=np.int64).reshape(len(exps), num_vars)
        scatter = np.zeros((len(exps), len(polys)))
        scatter[np.arange(len(exps)), rows] = coefs
        self._scatter = scatter

    def __call__(self, x):
        import numpy as np

        x = np.asarray(x, dtype=float)
        mon = np.multiply.reduce(x[..., None, :] ** self._exps, axis=-1)
        return mon @ self._scatter
