"""Levi-Civita connection and curvature of a coordinate metric.

Christoffel symbols of g = (g_ij) involve the inverse metric, whose
entries are quotients; the division-free scalar grammar cannot hold them.
This module therefore computes internally with exact quotients num/det^k:
numerators are polynomials over the atoms {coordinates, sin(u), cos(u)}
with sin-exponents reduced through sin^2 = 1 - cos^2, and the denominator
is always a power of det(g), produced by cofactor inversion.  Final
curvature entries are converted back to scalar expressions by exact
polynomial division; flatness certificates clear denominators instead,
which leaves every verdict unchanged because det(g) vanishes nowhere on
the metric's domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from . import forms, linalg, scalar
from .forms import MatrixForm
from .scalar import Expr

Mono = Tuple  # ((atom, exponent), ...) sorted; atom = (kind, key, payload)


class MetricError(Exception):
    pass


class GrammarError(MetricError):
    """A requested value has no representation in the scalar grammar."""


# ------------------------------------------------------------------
# polynomials over trigonometric atoms
# ------------------------------------------------------------------

def _atom_var(index: int):
    return ("x", index, None)


def _atom_trig(kind: str, argument: Expr):
    return (kind, scalar.sort_key(argument), argument)


class TrigPoly:
    """Polynomial over coordinate and sin/cos atoms, kept canonical with
    every sin-exponent at most one.  Zero testing is exact."""

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Mono, Fraction]):
        self.terms = {m: c for m, c in terms.items() if c != 0}

    # construction ---------------------------------------------------

    @staticmethod
    def const(value) -> "TrigPoly":
        value = Fraction(value)
        return TrigPoly({(): value} if value else {})

    @staticmethod
    def zero() -> "TrigPoly":
        return TrigPoly({})

    @staticmethod
    def one() -> "TrigPoly":
        return TrigPoly({(): Fraction(1)})

    @staticmethod
    def atom(atom, exponent: int = 1) -> "TrigPoly":
        return _canonical_monomial({atom: exponent}, Fraction(1))

    @staticmethod
    def from_expr(e: Expr) -> "TrigPoly":
        e = scalar.normalize(e)
        return _expand(e)

    # ring operations -------------------------------------------------

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            value = terms.get(mono, Fraction(0)) + coeff
            if value:
                terms[mono] = value
            else:
                terms.pop(mono, None)
        return TrigPoly(terms)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + other.scale(-1)

    def scale(self, value) -> "TrigPoly":
        value = Fraction(value)
        return TrigPoly({m: value * c for m, c in self.terms.items()})

    def __neg__(self) -> "TrigPoly":
        return self.scale(-1)

    def __mul__(self, other: "TrigPoly") -> "TrigPoly":
        out = TrigPoly.zero()
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                merged = dict(m1)
                for atom, exp in m2:
                    merged[atom] = merged.get(atom, 0) + exp
                out = out + _canonical_monomial(merged, c1 * c2)
        return out

    def power(self, k: int) -> "TrigPoly":
        out = TrigPoly.one()
        for _ in range(k):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    # calculus ---------------------------------------------------------

    def diff(self, index: int) -> "TrigPoly":
        out = TrigPoly.zero()
        for mono, coeff in self.terms.items():
            for position, (atom, exp) in enumerate(mono):
                rest = {a: e for a, e in mono if a != atom}
                if exp > 1:
                    rest[atom] = exp - 1
                base = _canonical_monomial(rest, coeff * exp)
                kind, _, payload = atom
                if kind == "x":
                    if atom[1] == index:
                        out = out + base
                    continue
                inner = TrigPoly.from_expr(scalar.diff(payload, index))
                if inner.is_zero():
                    continue
                if kind == "sin":
                    outer = TrigPoly.atom(_atom_trig("cos", payload))
                else:
                    outer = TrigPoly.atom(_atom_trig("sin", payload)).scale(-1)
                out = out + base * outer * inner
        return out

    # conversion --------------------------------------------------------

    def to_expr(self) -> Expr:
        pieces = []
        for mono, coeff in sorted(self.terms.items()):
            factors = [scalar.Rat(coeff)]
            for atom, exp in mono:
                kind = atom[0]
                if kind == "x":
                    base: Expr = scalar.Var(atom[1])
                elif kind == "sin":
                    base = scalar.Sin(atom[2])
                else:
                    base = scalar.Cos(atom[2])
                factors.append(scalar.pow_(base, exp))
            pieces.append(scalar.mul(*factors))
        return scalar.add(*pieces) if pieces else scalar.ZERO

    def __repr__(self):
        return f"TrigPoly({scalar.render(self.to_expr())})"


def _canonical_monomial(exponents: Dict, coeff: Fraction) -> TrigPoly:
    """Build coeff * product(atom^exp) with sin-powers reduced via
    sin^2 u = 1 - cos^2 u."""
    if coeff == 0:
        return TrigPoly.zero()
    exponents = {a: e for a, e in exponents.items() if e != 0}
    for atom, exp in exponents.items():
        if atom[0] == "sin" and exp >= 2:
            half, remainder = divmod(exp, 2)
            rest = dict(exponents)
            rest.pop(atom)
            if remainder:
                rest[atom] = 1
            base = _canonical_monomial(rest, coeff)
            cos_atom = ("cos", atom[1], atom[2])
            # (1 - cos^2)^half by binomial expansion
            expansion = TrigPoly.zero()
            sign = Fraction(1)
            from math import comb
            for j in range(half + 1):
                term = _canonical_monomial({cos_atom: 2 * j}, Fraction((-1) ** j * comb(half, j)))
                expansion = expansion + term
            return base * expansion
    mono = tuple(sorted(exponents.items()))
    return TrigPoly({mono: coeff})


def _expand(e: Expr) -> TrigPoly:
    if isinstance(e, scalar.Rat):
        return TrigPoly.const(e.value)
    if isinstance(e, scalar.Var):
        return TrigPoly.atom(_atom_var(e.index))
    if isinstance(e, scalar.Sin):
        return TrigPoly.atom(_atom_trig("sin", scalar.normalize(e.argument)))
    if isinstance(e, scalar.Cos):
        return TrigPoly.atom(_atom_trig("cos", scalar.normalize(e.argument)))
    if isinstance(e, scalar.Sum):
        out = TrigPoly.zero()
        for t in e.terms:
            out = out + _expand(t)
        return out
    if isinstance(e, scalar.Product):
        out = TrigPoly.one()
        for f in e.factors:
            out = out * _expand(f)
        return out
    if isinstance(e, scalar.Power):
        return _expand(e.base).power(e.exponent)
    raise TypeError(type(e))


# ------------------------------------------------------------------
# exact division
# ------------------------------------------------------------------

def _atoms_of(poly: TrigPoly) -> list:
    atoms = set()
    for mono in poly.terms:
        for atom, _ in mono:
            atoms.add(atom)
    return sorted(atoms)


def _sin_atoms(poly: TrigPoly) -> list:
    return [a for a in _atoms_of(poly) if a[0] == "sin"]


def _split_by_atom(poly: TrigPoly, atom) -> Tuple[TrigPoly, TrigPoly]:
    """poly = even + atom * rest, assuming the atom's exponent is <= 1
    everywhere (true canonically for sin atoms)."""
    without: Dict[Mono, Fraction] = {}
    with_atom: Dict[Mono, Fraction] = {}
    for mono, coeff in poly.terms.items():
        entry = dict(mono)
        if atom in entry:
            entry.pop(atom)
            with_atom[tuple(sorted(entry.items()))] = coeff
        else:
            without[mono] = coeff
    return TrigPoly(without), TrigPoly(with_atom)


def exact_divide(num: TrigPoly, den: TrigPoly) -> Optional[TrigPoly]:
    """num / den when the quotient is again a polynomial, else None.
    sin-bearing denominators are first rationalized by conjugation."""
    if den.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    for atom in _sin_atoms(den):
        p, q = _split_by_atom(den, atom)
        if q.is_zero():
            continue
        conjugate = p - TrigPoly.atom(atom) * q
        num = num * conjugate
        den = den * conjugate
        if den.is_zero():
            return None
    atoms = sorted(set(_atoms_of(num)) | set(_atoms_of(den)))
    index = {a: i for i, a in enumerate(atoms)}

    def vector(mono) -> tuple:
        v = [0] * len(atoms)
        for atom, exp in mono:
            v[index[atom]] = exp
        return tuple(v)

    den_items = sorted(den.terms.items(), key=lambda t: vector(t[0]))
    lead_den_mono, lead_den_coeff = den_items[-1]
    lead_den_vec = vector(lead_den_mono)
    remainder = dict(num.terms)
    quotient: Dict[Mono, Fraction] = {}
    while remainder:
        lead_mono = max(remainder, key=vector)
        lead_vec = vector(lead_mono)
        diff = [a - b for a, b in zip(lead_vec, lead_den_vec)]
        if any(d < 0 for d in diff):
            return None
        t_mono = tuple(
            sorted((atoms[i], d) for i, d in enumerate(diff) if d)
        )
        t_coeff = remainder[lead_mono] / lead_den_coeff
        quotient[t_mono] = quotient.get(t_mono, Fraction(0)) + t_coeff
        product = TrigPoly({t_mono: t_coeff}) * den
        for mono, coeff in product.terms.items():
            value = remainder.get(mono, Fraction(0)) - coeff
            if value:
                remainder[mono] = value
            else:
                remainder.pop(mono, None)
    return TrigPoly(quotient)


# ------------------------------------------------------------------
# quotients over powers of the metric determinant
# ------------------------------------------------------------------

@dataclass(frozen=True)
class DetFraction:
    """num / det^power with a shared determinant polynomial."""

    num: TrigPoly
    power: int
    det: TrigPoly

    def _align(self, other: "DetFraction") -> Tuple[TrigPoly, TrigPoly, int]:
        power = max(self.power, other.power)
        a = self.num * self.det.power(power - self.power)
        b = other.num * other.det.power(power - other.power)
        return a, b, power

    def __add__(self, other: "DetFraction") -> "DetFraction":
        a, b, power = self._align(other)
        return DetFraction(a + b, power, self.det)

    def __sub__(self, other: "DetFraction") -> "DetFraction":
        a, b, power = self._align(other)
        return DetFraction(a - b, power, self.det)

    def __mul__(self, other: "DetFraction") -> "DetFraction":
        return DetFraction(self.num * other.num, self.power + other.power, self.det)

    def scale(self, value) -> "DetFraction":
        return DetFraction(self.num.scale(value), self.power, self.det)

    def diff(self, index: int) -> "DetFraction":
        if self.power == 0:
            return DetFraction(self.num.diff(index), 0, self.det)
        numerator = (
            self.num.diff(index) * self.det
            - self.num.scale(self.power) * self.det.diff(index)
        )
        return DetFraction(numerator, self.power + 1, self.det)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def as_expr(self) -> Optional[Expr]:
        """Exact scalar expression, or None when num / det^power is not
        polynomial."""
        value = self.num
        for _ in range(self.power):
            divided = exact_divide(value, self.det)
            if divided is None:
                return None
            value = divided
        return value.to_expr()

    def as_pair(self) -> Tuple[Expr, Expr]:
        """(numerator, denominator) as scalar expressions."""
        return self.num.to_expr(), self.det.power(self.power).to_expr()

    def aligned_num(self, power: int) -> TrigPoly:
        if power < self.power:
            raise MetricError("cannot align to a smaller power")
        return self.num * self.det.power(power - self.power)


# ------------------------------------------------------------------
# metrics
# ------------------------------------------------------------------

def _symbolic_det(entries: List[List[TrigPoly]]) -> TrigPoly:
    n = len(entries)
    if n == 1:
        return entries[0][0]
    total = TrigPoly.zero()
    sign = 1
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in entries[1:]]
        term = entries[0][j] * _symbolic_det(minor)
        total = total + (term if sign > 0 else -term)
        sign = -sign
    return total


def _symbolic_adjugate(entries: List[List[TrigPoly]]) -> List[List[TrigPoly]]:
    n = len(entries)
    if n == 1:
        return [[TrigPoly.one()]]
    adj = [[TrigPoly.zero()] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [
                [entries[r][c] for c in range(n) if c != j]
                for r in range(n) if r != i
            ]
            cof = _symbolic_det(minor)
            adj[j][i] = cof if (i + j) % 2 == 0 else -cof
    return adj


class Metric:
    """Symmetric coordinate metric with an exact inverse.

    The inverse is either supplied (entries in the scalar grammar,
    certified by the zero test on g g^-1 - I) or derived by cofactor
    inversion, in which case the inverse entries are quotients adj/det and
    the adjugate identity g adj = det I is certified exactly."""

    def __init__(self, entries, inverse=None):
        rows = [list(r) for r in entries]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise MetricError("metric matrix must be square")
        self.dim = n
        self.g = tuple(
            tuple(scalar.normalize(scalar.as_expr(e)) for e in row) for row in rows
        )
        for i in range(n):
            for j in range(i + 1, n):
                if self.g[i][j] != self.g[j][i]:
                    raise MetricError(
                        f"metric is not symmetric at ({i + 1},{j + 1}): "
                        f"{scalar.render(self.g[i][j])} vs {scalar.render(self.g[j][i])}"
                    )
        self._g_poly = [[TrigPoly.from_expr(self.g[i][j]) for j in range(n)] for i in range(n)]
        self._det = _symbolic_det(self._g_poly)
        if self._det.is_zero():
            raise MetricError("metric is degenerate: det(g) = 0 identically")
        if inverse is not None:
            inv_rows = [
                [scalar.normalize(scalar.as_expr(e)) for e in row] for row in inverse
            ]
            if len(inv_rows) != n or any(len(r) != n for r in inv_rows):
                raise MetricError("inverse matrix must match the metric's shape")
            for i in range(n):
                for j in range(n):
                    delta = scalar.ONE if i == j else scalar.ZERO
                    total = scalar.add(
                        *[scalar.mul(self.g[i][k], inv_rows[k][j]) for k in range(n)],
                        scalar.negate(delta),
                    )
                    if not scalar.is_zero(total):
                        raise MetricError(
                            f"supplied inverse fails g g^-1 = I at ({i + 1},{j + 1})"
                        )
            self._inverse = [
                [DetFraction(TrigPoly.from_expr(inv_rows[i][j]), 0, self._det) for j in range(n)]
                for i in range(n)
            ]
            self.inverse_supplied = True
        else:
            adj = _symbolic_adjugate(self._g_poly)
            for i in range(n):
                for j in range(n):
                    total = TrigPoly.zero()
                    for k in range(n):
                        total = total + self._g_poly[i][k] * adj[k][j]
                    expected = self._det if i == j else TrigPoly.zero()
                    if not (total - expected).is_zero():
                        raise MetricError("cofactor inversion failed its certificate")
            self._inverse = [
                [DetFraction(adj[i][j], 1, self._det) for j in range(n)] for i in range(n)
            ]
            self.inverse_supplied = False

    def entry(self, i: int, j: int) -> Expr:
        return self.g[i - 1][j - 1]

    def inverse_fraction(self, i: int, j: int) -> DetFraction:
        return self._inverse[i - 1][j - 1]

    def inverse_expr(self, i: int, j: int) -> Optional[Expr]:
        return self._inverse[i - 1][j - 1].as_expr()

    def det_poly(self) -> TrigPoly:
        return self._det

    def fraction(self, e: Expr) -> DetFraction:
        return DetFraction(TrigPoly.from_expr(e), 0, self._det)


# ------------------------------------------------------------------
# Christoffel symbols and curvature
# ------------------------------------------------------------------

@dataclass(frozen=True)
class Christoffel:
    """Symbols G[i][j][k] = Gamma^i_jk, symmetric in (j, k), as exact
    quotients over powers of det(g)."""

    metric: Metric
    symbols: tuple

    def entry(self, i: int, j: int, k: int) -> DetFraction:
        return self.symbols[i - 1][j - 1][k - 1]

    def entry_pair(self, i: int, j: int, k: int) -> Tuple[Expr, Expr]:
        return self.entry(i, j, k).as_pair()

    def entry_expr(self, i: int, j: int, k: int) -> Optional[Expr]:
        return self.entry(i, j, k).as_expr()


def christoffel(metric: Metric) -> Christoffel:
    """Gamma^i_jk = 1/2 sum_l g^il (d_k g_lj + d_j g_lk - d_l g_jk)."""
    n = metric.dim
    g = [[metric.fraction(metric.g[i][j]) for j in range(n)] for i in range(n)]
    symbols = []
    for i in range(n):
        row_i = []
        for j in range(n):
            row_j = []
            for k in range(n):
                total = DetFraction(TrigPoly.zero(), 0, metric.det_poly())
                for l in range(n):
                    bracket = (
                        g[l][j].diff(k + 1) + g[l][k].diff(j + 1) - g[j][k].diff(l + 1)
                    )
                    total = total + metric.inverse_fraction(i + 1, l + 1) * bracket
                row_j.append(total.scale(Fraction(1, 2)))
            row_i.append(tuple(row_j))
        symbols.append(tuple(row_i))
    result = Christoffel(metric, tuple(symbols))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for k in range(j, n + 1):
                if not (result.entry(i, j, k) - result.entry(i, k, j)).is_zero():
                    raise MetricError("Christoffel symbols are not symmetric")
    return result


def riemann_components(metric: Metric) -> list:
    """R[i][j][k][l] = d_k G^i_jl - d_l G^i_jk + G^h_jl G^i_hk - G^h_jk G^i_hl
    (0-based indices), as exact quotients."""
    n = metric.dim
    gamma = christoffel(metric)
    G = gamma.symbols
    R = []
    for i in range(n):
        ri = []
        for j in range(n):
            rj = []
            for k in range(n):
                rk = []
                for l in range(n):
                    value = G[i][j][l].diff(k + 1) - G[i][j][k].diff(l + 1)
                    for h in range(n):
                        value = value + G[h][j][l] * G[i][h][k]
                        value = value - G[h][j][k] * G[i][h][l]
                    rk.append(value)
                rj.append(tuple(rk))
            ri.append(tuple(rj))
        R.append(tuple(ri))
    return R


def riemann_form(metric: Metric) -> MatrixForm:
    """Curvature as an End(TM)-valued 2-form: component dx^k ^ dx^l (k < l)
    carries the matrix (R^i_jkl)_ij.  Raises GrammarError when an entry is
    not polynomial over the atoms."""
    n = metric.dim
    R = riemann_components(metric)
    components = {}
    for k in range(n):
        for l in range(k + 1, n):
            entries = []
            for i in range(n):
                row = []
                for j in range(n):
                    value = R[i][j][k][l].as_expr()
                    if value is None:
                        raise GrammarError(
                            f"curvature entry R^{i + 1}_{j + 1}{k + 1}{l + 1} "
                            "is not expressible in the scalar grammar"
                        )
                    row.append(value)
                entries.append(tuple(row))
            components[(k + 1, l + 1)] = tuple(entries)
    return MatrixForm(n, (n, n), components)


def _cleared_forms(metric: Metric) -> Tuple[MatrixForm, MatrixForm]:
    """Denominator-cleared curvature and connection forms: det^P R and
    det^Q Gamma have polynomial entries and the same vanishing behavior."""
    n = metric.dim
    R = riemann_components(metric)
    gamma = christoffel(metric)
    r_power = max(
        (R[i][j][k][l].power for i in range(n) for j in range(n)
         for k in range(n) for l in range(n)),
        default=0,
    )
    g_power = max(
        (gamma.symbols[i][j][k].power for i in range(n) for j in range(n) for k in range(n)),
        default=0,
    )
    curvature_components = {}
    for k in range(n):
        for l in range(k + 1, n):
            entries = tuple(
                tuple(R[i][j][k][l].aligned_num(r_power).to_expr() for j in range(n))
                for i in range(n)
            )
            curvature_components[(k + 1, l + 1)] = entries
    connection_components = {}
    for k in range(n):
        entries = tuple(
            tuple(gamma.symbols[i][j][k].aligned_num(g_power).to_expr() for j in range(n))
            for i in range(n)
        )
        connection_components[(k + 1,)] = entries
    S = MatrixForm(n, (n, n), curvature_components)
    tau = MatrixForm(n, (n, n), connection_components)
    return S, tau


def levi_civita_n_flat(metric: Metric, n: int) -> bool:
    """Order-n flatness of the Levi-Civita connection, decided on the
    denominator-cleared curvature and connection forms."""
    S, tau = _cleared_forms(metric)
    return forms.n_flat_from_curvature(S, tau, n)


def minimal_lc_flatness_order(metric: Metric, max_n: int = 8):
    S, tau = _cleared_forms(metric)
    for n in range(2, max_n + 1):
        if forms.n_flat_from_curvature(S, tau, n):
            return n
    return None


# ------------------------------------------------------------------
# metric files
# ------------------------------------------------------------------
#
#   dim <n>
#   <n rows of n entries separated by ';'>
#   inverse            (optional)
#   <n rows of n entries separated by ';'>

class MetricFileError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_metric(text: str) -> Metric:
    lines = text.splitlines()
    pos = 0

    def next_content():
        nonlocal pos
        while pos < len(lines):
            stripped = lines[pos].strip()
            pos += 1
            if stripped and not stripped.startswith("#"):
                return stripped, pos
        return None, pos

    content, line_no = next_content()
    if content is None:
        raise MetricFileError("missing 'dim <n>' header", line_no)
    parts = content.split()
    if len(parts) != 2 or parts[0] != "dim":
        raise MetricFileError("expected 'dim <n>'", line_no)
    try:
        n = int(parts[1])
    except ValueError:
        raise MetricFileError("expected an integer dimension", line_no)
    if n < 1:
        raise MetricFileError("dimension must be positive", line_no)

    def read_matrix():
        rows = []
        for _ in range(n):
            content, line_no = next_content()
            if content is None:
                raise MetricFileError("unexpected end of file inside a matrix", line_no)
            cells = [c.strip() for c in content.split(";")]
            if len(cells) != n:
                raise MetricFileError(f"expected {n} entries separated by ';'", line_no)
            row = []
            for cell in cells:
                try:
                    row.append(scalar.parse(cell))
                except scalar.ParseError as err:
                    raise MetricFileError(f"bad expression {cell!r}: {err}", line_no)
            rows.append(tuple(row))
        return tuple(rows)

    g = read_matrix()
    inverse = None
    content, line_no = next_content()
    if content is not None:
        if content.split() != ["inverse"]:
            raise MetricFileError("expected 'inverse' or end of file", line_no)
        inverse = read_matrix()
        content, line_no = next_content()
        if content is not None:
            raise MetricFileError("unexpected content after the inverse block", line_no)
    try:
        return Metric(g, inverse)
    except MetricError as err:
        raise MetricFileError(str(err), line_no)


def load_metric(path) -> Metric:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_metric(handle.read())
