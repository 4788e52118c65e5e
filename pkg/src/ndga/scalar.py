"""Exact symbolic scalar expressions.

The coefficient field for every form module in this package: expression
trees over rational constants, coordinates x1, x2, ..., sums, products,
non-negative integer powers, sin and cos.  The operator set is closed
under partial differentiation, so derivatives never leave the type.

Values are immutable; every function here is pure.
"""

from __future__ import annotations

import functools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

Number = Union[int, Fraction, float]

# Seed for the randomized zero test on trigonometric expressions.  Exposed
# so the CLI can override it (--seed); identical seeds give identical runs.
DEFAULT_ZERO_SEED = 271828182845
ZERO_TOLERANCE = 1e-9
ZERO_SAMPLES = 8

_zero_seed = DEFAULT_ZERO_SEED


def set_zero_seed(seed: int) -> None:
    global _zero_seed
    _zero_seed = seed


def get_zero_seed() -> int:
    return _zero_seed


class ScalarError(Exception):
    pass


class ParseError(ScalarError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class EvalError(ScalarError):
    pass


class Expr:
    """Base node.  Subclasses are frozen dataclasses, hashable and comparable."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, negate(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), negate(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __pow__(self, exponent: int):
        return pow_(self, exponent)

    def __neg__(self):
        return negate(self)

    def __str__(self):
        return render(self)


@dataclass(frozen=True, slots=True)
class Rat(Expr):
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True, slots=True)
class Var(Expr):
    index: int


@dataclass(frozen=True, slots=True)
class Sum(Expr):
    terms: tuple


@dataclass(frozen=True, slots=True)
class Product(Expr):
    factors: tuple


@dataclass(frozen=True, slots=True)
class Power(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True, slots=True)
class Sin(Expr):
    argument: Expr


@dataclass(frozen=True, slots=True)
class Cos(Expr):
    argument: Expr


ZERO = Rat(Fraction(0))
ONE = Rat(Fraction(1))


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return Rat(Fraction(value))
    raise TypeError(f"cannot interpret {value!r} as a scalar expression")


def rational(num, den=1) -> Rat:
    return Rat(Fraction(num, den))


def var(index: int) -> Var:
    if index < 1:
        raise ValueError("coordinate indices start at 1")
    return Var(index)


def sin(e) -> Expr:
    return normalize(Sin(as_expr(e)))


def cos(e) -> Expr:
    return normalize(Cos(as_expr(e)))


# ------------------------------------------------------------------
# ordering and normalization
# ------------------------------------------------------------------

@functools.lru_cache(maxsize=262144)
def sort_key(e: Expr):
    if isinstance(e, Rat):
        return (0, e.value.numerator, e.value.denominator)
    if isinstance(e, Var):
        return (1, e.index)
    if isinstance(e, Sin):
        return (2, sort_key(e.argument))
    if isinstance(e, Cos):
        return (3, sort_key(e.argument))
    if isinstance(e, Power):
        return (4, sort_key(e.base), e.exponent)
    if isinstance(e, Product):
        return (5, tuple(sort_key(f) for f in e.factors))
    if isinstance(e, Sum):
        return (6, tuple(sort_key(t) for t in e.terms))
    raise TypeError(type(e))


def _split_coefficient(e: Expr):
    """Split a normalized term into (rational coefficient, non-constant core)."""
    if isinstance(e, Rat):
        return e.value, None
    if isinstance(e, Product) and isinstance(e.factors[0], Rat):
        rest = e.factors[1:]
        core = rest[0] if len(rest) == 1 else Product(rest)
        return e.factors[0].value, core
    return Fraction(1), e


def _rebuild_term(coeff: Fraction, core) -> Expr:
    if core is None:
        return Rat(coeff)
    if coeff == 1:
        return core
    if isinstance(core, Product):
        return Product((Rat(coeff),) + core.factors)
    return Product((Rat(coeff), core))


@functools.lru_cache(maxsize=131072)
def normalize(e: Expr) -> Expr:
    """Canonical structural form: flattened sums/products, sorted factors,
    merged rational constants and like terms.  Idempotent; does not expand
    powers of sums or distribute products over sums."""
    if isinstance(e, (Rat, Var)):
        return e
    if isinstance(e, Sin):
        arg = normalize(e.argument)
        if arg == ZERO:
            return ZERO
        return Sin(arg)
    if isinstance(e, Cos):
        arg = normalize(e.argument)
        if arg == ZERO:
            return ONE
        return Cos(arg)
    if isinstance(e, Power):
        return _normalize_power(normalize(e.base), e.exponent)
    if isinstance(e, Product):
        return _normalize_product([normalize(f) for f in e.factors])
    if isinstance(e, Sum):
        return _normalize_sum([normalize(t) for t in e.terms])
    raise TypeError(type(e))


def _normalize_power(base: Expr, exponent: int) -> Expr:
    if exponent < 0:
        raise ScalarError("negative exponents are outside the expression grammar")
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Rat):
        return Rat(base.value ** exponent)
    if isinstance(base, Power):
        return _normalize_power(base.base, base.exponent * exponent)
    if isinstance(base, Product):
        return _normalize_product([_normalize_power(f, exponent) for f in base.factors])
    return Power(base, exponent)


def _normalize_product(factors) -> Expr:
    coeff = Fraction(1)
    flat = []
    stack = list(reversed(factors))
    while stack:
        f = stack.pop()
        if isinstance(f, Rat):
            coeff *= f.value
        elif isinstance(f, Product):
            stack.extend(reversed(f.factors))
        else:
            flat.append(f)
    if coeff == 0:
        return ZERO
    exponents: dict = {}
    for f in flat:
        if isinstance(f, Power):
            base, exp = f.base, f.exponent
        else:
            base, exp = f, 1
        key = sort_key(base)
        if key in exponents:
            exponents[key] = (base, exponents[key][1] + exp)
        else:
            exponents[key] = (base, exp)
    rebuilt = []
    for key in sorted(exponents):
        base, exp = exponents[key]
        rebuilt.append(base if exp == 1 else Power(base, exp))
    if not rebuilt:
        return Rat(coeff)
    if coeff == 1:
        return rebuilt[0] if len(rebuilt) == 1 else Product(tuple(rebuilt))
    if len(rebuilt) == 1 and isinstance(rebuilt[0], Sum):
        # constants distribute over a lone sum so that scaling is structural
        scaled = [_normalize_product([Rat(coeff), t]) for t in rebuilt[0].terms]
        return _normalize_sum(scaled)
    return Product((Rat(coeff),) + tuple(rebuilt))


def _normalize_sum(terms) -> Expr:
    constant = Fraction(0)
    collected: dict = {}
    stack = list(reversed(terms))
    while stack:
        t = stack.pop()
        if isinstance(t, Sum):
            stack.extend(reversed(t.terms))
            continue
        coeff, core = _split_coefficient(t)
        if core is None:
            constant += coeff
            continue
        key = sort_key(core)
        if key in collected:
            collected[key] = (core, collected[key][1] + coeff)
        else:
            collected[key] = (core, coeff)
    rebuilt = []
    if constant != 0:
        rebuilt.append(Rat(constant))
    for key in sorted(collected):
        core, coeff = collected[key]
        if coeff != 0:
            rebuilt.append(_rebuild_term(coeff, core))
    if not rebuilt:
        return ZERO
    if len(rebuilt) == 1:
        return rebuilt[0]
    return Sum(tuple(rebuilt))


def add(*terms) -> Expr:
    return _normalize_sum([normalize(as_expr(t)) for t in terms])


def mul(*factors) -> Expr:
    return _normalize_product([normalize(as_expr(f)) for f in factors])


def pow_(base, exponent: int) -> Expr:
    return _normalize_power(normalize(as_expr(base)), exponent)


def negate(e: Expr) -> Expr:
    """Structural negation: folds the sign into the rational head."""
    if isinstance(e, Rat):
        return Rat(-e.value)
    if isinstance(e, Sum):
        return Sum(tuple(negate(t) for t in e.terms))
    if isinstance(e, Product):
        head = e.factors[0]
        if isinstance(head, Rat):
            if head.value == -1:
                rest = e.factors[1:]
                return rest[0] if len(rest) == 1 else Product(rest)
            return Product((Rat(-head.value),) + e.factors[1:])
        return Product((Rat(Fraction(-1)),) + e.factors)
    return Product((Rat(Fraction(-1)), e))


# ------------------------------------------------------------------
# differentiation, substitution, evaluation
# ------------------------------------------------------------------

@functools.lru_cache(maxsize=131072)
def diff(e: Expr, index: int) -> Expr:
    """Partial derivative with respect to x_index; result is normalized."""
    if isinstance(e, Rat):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.index == index else ZERO
    if isinstance(e, Sum):
        return add(*[diff(t, index) for t in e.terms])
    if isinstance(e, Product):
        parts = []
        for i, f in enumerate(e.factors):
            df = diff(f, index)
            if df == ZERO:
                continue
            parts.append(mul(*(e.factors[:i] + (df,) + e.factors[i + 1:])))
        return add(*parts) if parts else ZERO
    if isinstance(e, Power):
        if e.exponent == 0:
            return ZERO
        db = diff(e.base, index)
        if db == ZERO:
            return ZERO
        return mul(Rat(Fraction(e.exponent)), pow_(e.base, e.exponent - 1), db)
    if isinstance(e, Sin):
        da = diff(e.argument, index)
        return ZERO if da == ZERO else mul(Cos(e.argument), da)
    if isinstance(e, Cos):
        da = diff(e.argument, index)
        return ZERO if da == ZERO else mul(rational(-1), Sin(e.argument), da)
    raise TypeError(type(e))


def substitute(e: Expr, assignment: Mapping[int, Expr]) -> Expr:
    """Replace coordinates by expressions; result is normalized."""
    if isinstance(e, Rat):
        return e
    if isinstance(e, Var):
        return normalize(assignment.get(e.index, e))
    if isinstance(e, Sum):
        return add(*[substitute(t, assignment) for t in e.terms])
    if isinstance(e, Product):
        return mul(*[substitute(f, assignment) for f in e.factors])
    if isinstance(e, Power):
        return pow_(substitute(e.base, assignment), e.exponent)
    if isinstance(e, Sin):
        return normalize(Sin(substitute(e.argument, assignment)))
    if isinstance(e, Cos):
        return normalize(Cos(substitute(e.argument, assignment)))
    raise TypeError(type(e))


def variables(e: Expr) -> set:
    if isinstance(e, Rat):
        return set()
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, Sum):
        return set().union(*[variables(t) for t in e.terms])
    if isinstance(e, Product):
        return set().union(*[variables(f) for f in e.factors])
    if isinstance(e, Power):
        return variables(e.base)
    if isinstance(e, (Sin, Cos)):
        return variables(e.argument)
    raise TypeError(type(e))


Point = Mapping[int, Number]


def evaluate(e: Expr, point: Point) -> Number:
    """Evaluate at a point.  Exact Fraction result for polynomial data,
    float as soon as sin/cos or a float coordinate is involved."""
    if isinstance(e, Rat):
        return e.value
    if isinstance(e, Var):
        if e.index not in point:
            raise EvalError(f"coordinate x{e.index} is unassigned")
        value = point[e.index]
        return Fraction(value) if isinstance(value, int) else value
    if isinstance(e, Sum):
        total = Fraction(0)
        for t in e.terms:
            total = total + evaluate(t, point)
        return total
    if isinstance(e, Product):
        result = Fraction(1)
        for f in e.factors:
            result = result * evaluate(f, point)
        return result
    if isinstance(e, Power):
        return evaluate(e.base, point) ** e.exponent
    if isinstance(e, Sin):
        return math.sin(float(evaluate(e.argument, point)))
    if isinstance(e, Cos):
        return math.cos(float(evaluate(e.argument, point)))
    raise TypeError(type(e))


# ------------------------------------------------------------------
# zero test
# ------------------------------------------------------------------
#
# Strategy: expand into a polynomial whose indeterminates ("atoms") are the
# coordinates and the sin/cos subterms.  A zero polynomial certifies a zero
# function.  A nonzero trig-free polynomial certifies a nonzero function.
# Otherwise (trig identities such as sin^2+cos^2-1) fall back to seeded
# evaluation at ZERO_SAMPLES points in [-1,1]^n with tolerance ZERO_TOLERANCE.

Monomial = tuple  # ((atom_key, exponent), ...), sorted


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            merged: dict = dict(m1)
            for atom, exp in m2:
                merged[atom] = merged.get(atom, 0) + exp
            key = tuple(sorted(merged.items()))
            c = out.get(key, Fraction(0)) + c1 * c2
            if c == 0:
                out.pop(key, None)
            else:
                out[key] = c
    return out


def _poly_add(p: dict, q: dict) -> dict:
    out = dict(p)
    for m, c in q.items():
        s = out.get(m, Fraction(0)) + c
        if s == 0:
            out.pop(m, None)
        else:
            out[m] = s
    return out


def _poly_pow(p: dict, k: int) -> dict:
    result = {(): Fraction(1)}
    for _ in range(k):
        result = _poly_mul(result, p)
    return result


def as_polynomial(e: Expr) -> dict:
    """Expanded polynomial over atoms.  Atom keys are ('x', i) for
    coordinates and ('sin'|'cos', sort_key(arg)) for trig subterms."""
    e = normalize(e)
    return _as_poly(e)


def _as_poly(e: Expr) -> dict:
    if isinstance(e, Rat):
        return {} if e.value == 0 else {(): e.value}
    if isinstance(e, Var):
        return {((("x", e.index), 1),): Fraction(1)}
    if isinstance(e, (Sin, Cos)):
        kind = "sin" if isinstance(e, Sin) else "cos"
        atom = (kind, sort_key(e.argument))
        return {((atom, 1),): Fraction(1)}
    if isinstance(e, Sum):
        out: dict = {}
        for t in e.terms:
            out = _poly_add(out, _as_poly(t))
        return out
    if isinstance(e, Product):
        out = {(): Fraction(1)}
        for f in e.factors:
            out = _poly_mul(out, _as_poly(f))
        return out
    if isinstance(e, Power):
        return _poly_pow(_as_poly(e.base), e.exponent)
    raise TypeError(type(e))


def _has_trig_atom(poly: dict) -> bool:
    return any(atom[0] != "x" for mono in poly for atom, _ in mono)


def is_zero(e: Expr, seed: int | None = None) -> bool:
    """True iff e is identically zero.  Exact for polynomial expressions;
    probabilistic (seeded sampling) once sin/cos identities are involved."""
    return _is_zero_cached(normalize(e), _zero_seed if seed is None else seed)


@functools.lru_cache(maxsize=65536)
def _is_zero_cached(e: Expr, seed: int) -> bool:
    poly = _as_poly(e)
    if not poly:
        return True
    if not _has_trig_atom(poly):
        return False
    rng = random.Random(seed)
    names = sorted(variables(e))
    for _ in range(ZERO_SAMPLES):
        point = {i: rng.uniform(-1.0, 1.0) for i in names}
        if abs(float(evaluate(e, point))) >= ZERO_TOLERANCE:
            return False
    return True


def is_polynomial(e: Expr) -> bool:
    return not _has_trig_atom(as_polynomial(e))


# ------------------------------------------------------------------
# parser
# ------------------------------------------------------------------
#
# expr   := ['+'|'-'] term (('+'|'-') term)*
# term   := factor ('*' factor)*
# factor := base ('^' nonneg-integer)?
# base   := rational | 'x' positive-integer | 'sin(' expr ')'
#         | 'cos(' expr ')' | '(' expr ')'
# rational := integer ('/' positive-integer)?
#
# The optional leading sign is a convenience extension so that entries such
# as "-x1" are accepted in data files.  Whitespace is insignificant.

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise ParseError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, char: str):
        if self.peek() != char:
            self.error(f"expected '{char}'")
        self.pos += 1

    def parse(self) -> Expr:
        e = self.parse_expr()
        if self.peek():
            self.error(f"unexpected character {self.text[self.pos]!r}")
        return e

    def parse_expr(self) -> Expr:
        lead = self.peek()
        negative_head = False
        if lead in ("+", "-"):
            # leading sign only when followed by a non-digit (digits belong
            # to the signed rational literal in `base`)
            save = self.pos
            self.pos += 1
            if self.peek().isdigit():
                self.pos = save
            else:
                negative_head = lead == "-"
                if lead == "+":
                    negative_head = False
        term = self.parse_term()
        if negative_head:
            term = negate(term)
        terms = [term]
        while self.peek() in ("+", "-"):
            op = self.peek()
            self.pos += 1
            nxt = self.parse_term()
            terms.append(negate(nxt) if op == "-" else nxt)
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def parse_term(self) -> Expr:
        factors = [self.parse_factor()]
        while self.peek() == "*":
            self.pos += 1
            factors.append(self.parse_factor())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def parse_factor(self) -> Expr:
        base = self.parse_base()
        if self.peek() == "^":
            self.pos += 1
            exponent = self.parse_integer(allow_sign=False)
            return Power(base, exponent)
        return base

    def parse_base(self) -> Expr:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if ch.isalpha():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isalpha():
                self.pos += 1
            name = self.text[start:self.pos]
            if name == "x":
                index = self.parse_integer(allow_sign=False)
                if index < 1:
                    self.pos = start
                    self.error("coordinate index must be positive")
                return Var(index)
            if name in ("sin", "cos"):
                self.expect("(")
                inner = self.parse_expr()
                self.expect(")")
                return Sin(inner) if name == "sin" else Cos(inner)
            self.pos = start
            self.error(f"unknown identifier '{name}'")
        if ch.isdigit() or ch in ("+", "-"):
            return self.parse_rational()
        self.error("expected an expression")

    def parse_integer(self, allow_sign: bool) -> int:
        self.skip_ws()
        start = self.pos
        if allow_sign and self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        if self.pos >= len(self.text) or not self.text[self.pos].isdigit():
            self.pos = start
            self.error("expected an integer")
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        return int(self.text[start:self.pos])

    def parse_rational(self) -> Rat:
        numerator = self.parse_integer(allow_sign=True)
        if self.peek() == "/":
            self.pos += 1
            denominator = self.parse_integer(allow_sign=False)
            if denominator == 0:
                self.error("zero denominator")
            return Rat(Fraction(numerator, denominator))
        return Rat(Fraction(numerator))


def parse(text: str) -> Expr:
    """Parse an expression.  The returned tree is unnormalized; apply
    normalize() for the canonical form."""
    return _Parser(text).parse()


# ------------------------------------------------------------------
# rendering
# ------------------------------------------------------------------

def _is_negative_headed(e: Expr) -> bool:
    if isinstance(e, Rat):
        return e.value < 0
    if isinstance(e, Product):
        return isinstance(e.factors[0], Rat) and e.factors[0].value < 0
    return False


def _render_factor(e: Expr) -> str:
    if isinstance(e, (Sum, Product)):
        return f"({render(e)})"
    if isinstance(e, Rat) and e.value < 0:
        return f"({render(e)})"
    return render(e)


def _render_power_base(e: Expr) -> str:
    if isinstance(e, (Var, Sin, Cos)):
        return render(e)
    if isinstance(e, Rat) and e.value >= 0:
        return render(e)
    return f"({render(e)})"


def render(e: Expr) -> str:
    """Text form that parses back to a structurally equal tree."""
    if isinstance(e, Rat):
        return str(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Sin):
        return f"sin({render(e.argument)})"
    if isinstance(e, Cos):
        return f"cos({render(e.argument)})"
    if isinstance(e, Power):
        return f"{_render_power_base(e.base)}^{e.exponent}"
    if isinstance(e, Product):
        head = e.factors[0]
        if isinstance(head, Rat) and head.value == -1 and len(e.factors) > 1:
            rest = e.factors[1:]
            body = "*".join(_render_factor(f) for f in rest)
            return f"-{body}"
        parts = [render(head) if isinstance(head, Rat) else _render_factor(head)]
        parts += [_render_factor(f) for f in e.factors[1:]]
        return "*".join(parts)
    if isinstance(e, Sum):
        pieces = []
        for i, t in enumerate(e.terms):
            body = f"({render(t)})" if isinstance(t, Sum) else None
            if i == 0:
                pieces.append(body or render(t))
            elif body is not None:
                pieces.append(f" + {body}")
            elif _is_negative_headed(t):
                pieces.append(f" - {render(negate(t))}")
            else:
                pieces.append(f" + {render(t)}")
        return "".join(pieces)
    raise TypeError(type(e))
