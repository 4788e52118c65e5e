"""Matrix-valued differential forms on a coordinate patch.

A form is a finite map from strictly increasing coordinate multi-indices to
matrices of scalar expressions.  Square shapes model endomorphism-valued
forms; m x 1 shapes model vector-valued forms.  The module provides the
wedge product, the exterior derivative, connections d + omega, curvature,
N-flatness certificates via ordered-pairing expansions of curvature powers,
and tensor products of connections.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from typing import Iterable, Mapping, Sequence

from . import scalar
from .scalar import Expr, ZERO, normalize

MultiIndex = tuple  # strictly increasing tuple of coordinate indices
Matrix = tuple      # tuple of tuple of Expr


class FormError(Exception):
    pass


# ------------------------------------------------------------------
# matrices of scalar expressions
# ------------------------------------------------------------------

def matrix_of(rows: Iterable[Iterable]) -> Matrix:
    return tuple(tuple(normalize(scalar.as_expr(e)) for e in row) for row in rows)


def zero_entries(rows: int, cols: int) -> Matrix:
    return tuple(tuple(ZERO for _ in range(cols)) for _ in range(rows))


def identity_entries(n: int) -> Matrix:
    return tuple(
        tuple(scalar.ONE if i == j else ZERO for j in range(n)) for i in range(n)
    )


def entries_add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(scalar.add(x, y) for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def entries_scale(c, a: Matrix) -> Matrix:
    return tuple(tuple(scalar.mul(c, x) for x in row) for row in a)


def entries_mul(a: Matrix, b: Matrix) -> Matrix:
    if len(a[0]) != len(b):
        raise FormError("matrix shape mismatch")
    return tuple(
        tuple(
            scalar.add(*[scalar.mul(a[i][k], b[k][j]) for k in range(len(b))])
            for j in range(len(b[0]))
        )
        for i in range(len(a))
    )


def entries_kron(a: Matrix, b: Matrix) -> Matrix:
    rows = []
    for ra in a:
        for rb in b:
            rows.append(tuple(scalar.mul(x, y) for x in ra for y in rb))
    return tuple(rows)


def entries_is_zero(a: Matrix) -> bool:
    return all(scalar.is_zero(e) for row in a for e in row)


def _entries_nonzero_structurally(a: Matrix) -> bool:
    return any(e != ZERO for row in a for e in row)


# ------------------------------------------------------------------
# forms
# ------------------------------------------------------------------

def merge_indices(left: MultiIndex, right: MultiIndex):
    """Shuffle a concatenated pair of increasing multi-indices into one.
    Returns (sign, merged) or None when an index repeats."""
    if set(left) & set(right):
        return None
    sign = 1
    for i in left:
        sign *= -1 if sum(1 for j in right if j < i) % 2 else 1
    return sign, tuple(sorted(left + right))


class MatrixForm:
    """Immutable graded form with matrix coefficients.

    components: {multi-index: matrix}; all-zero matrices are dropped and
    entries are kept normalized, so `==` is structural equality of
    canonical representatives.
    """

    __slots__ = ("base_dim", "shape", "_components")

    def __init__(self, base_dim: int, shape, components: Mapping[MultiIndex, Matrix]):
        rows, cols = shape
        comp = {}
        for index, entries in components.items():
            index = tuple(index)
            if any(not 1 <= i <= base_dim for i in index):
                raise FormError(f"index {index} outside base dimension {base_dim}")
            if list(index) != sorted(set(index)):
                raise FormError(f"multi-index {index} is not strictly increasing")
            entries = matrix_of(entries)
            if len(entries) != rows or any(len(r) != cols for r in entries):
                raise FormError("component has the wrong matrix shape")
            if _entries_nonzero_structurally(entries):
                comp[index] = entries
        self.base_dim = base_dim
        self.shape = (rows, cols)
        self._components = comp

    # -- inspection ------------------------------------------------

    def components(self):
        return sorted(self._components.items())

    def component(self, index) -> Matrix:
        index = tuple(index)
        return self._components.get(index, zero_entries(*self.shape))

    def degrees(self):
        return sorted({len(i) for i in self._components})

    def degree_part(self, degree: int) -> "MatrixForm":
        return MatrixForm(
            self.base_dim,
            self.shape,
            {i: m for i, m in self._components.items() if len(i) == degree},
        )

    def is_structurally_zero(self) -> bool:
        return not self._components

    def is_zero(self) -> bool:
        """Semantic zero test (exact for polynomial entries, seeded
        sampling for trigonometric ones)."""
        return all(entries_is_zero(m) for m in self._components.values())

    def __eq__(self, other):
        if not isinstance(other, MatrixForm):
            return NotImplemented
        return (
            self.base_dim == other.base_dim
            and self.shape == other.shape
            and self._components == other._components
        )

    def __hash__(self):
        return hash(
            (self.base_dim, self.shape, tuple(sorted(self._components.items())))
        )

    def __repr__(self):
        if not self._components:
            return f"MatrixForm({self.base_dim}, {self.shape}, 0)"
        bits = []
        for index, entries in self.components():
            label = "".join(f"dx{i}" for i in index) or "1"
            bits.append(f"{label}: {[[str(e) for e in row] for row in entries]}")
        return "MatrixForm(" + "; ".join(bits) + ")"

    # -- algebra ---------------------------------------------------

    def _check_compatible(self, other: "MatrixForm"):
        if self.base_dim != other.base_dim:
            raise FormError("base dimension mismatch")

    def __add__(self, other: "MatrixForm") -> "MatrixForm":
        self._check_compatible(other)
        if self.shape != other.shape:
            raise FormError("shape mismatch")
        comp = dict(self._components)
        for index, entries in other._components.items():
            if index in comp:
                comp[index] = entries_add(comp[index], entries)
            else:
                comp[index] = entries
        return MatrixForm(self.base_dim, self.shape, comp)

    def __sub__(self, other: "MatrixForm") -> "MatrixForm":
        return self + other.scale(-1)

    def scale(self, c) -> "MatrixForm":
        return MatrixForm(
            self.base_dim,
            self.shape,
            {i: entries_scale(c, m) for i, m in self._components.items()},
        )

    def __neg__(self) -> "MatrixForm":
        return self.scale(-1)


def zero_form(base_dim: int, shape) -> MatrixForm:
    return MatrixForm(base_dim, shape, {})


def identity_form(base_dim: int, fiber_dim: int) -> MatrixForm:
    return MatrixForm(base_dim, (fiber_dim, fiber_dim), {(): identity_entries(fiber_dim)})


def scalar_form(base_dim: int, components: Mapping[MultiIndex, object]) -> MatrixForm:
    return MatrixForm(
        base_dim, (1, 1), {tuple(i): ((scalar.as_expr(e),),) for i, e in components.items()}
    )


def basis_one_form(base_dim: int, index: int, fiber_dim: int = 1) -> MatrixForm:
    """dx_index times the identity on the fiber."""
    return MatrixForm(
        base_dim, (fiber_dim, fiber_dim), {(index,): identity_entries(fiber_dim)}
    )


def wedge(a: MatrixForm, b: MatrixForm) -> MatrixForm:
    """Graded product: basis forms shuffle with a sign, matrices multiply
    in order, repeated coordinate indices kill the term."""
    a._check_compatible(b)
    if a.shape[1] != b.shape[0]:
        raise FormError(f"fiber shape mismatch: {a.shape} then {b.shape}")
    comp: dict = {}
    for ia, ma in a._components.items():
        for ib, mb in b._components.items():
            merged = merge_indices(ia, ib)
            if merged is None:
                continue
            sign, index = merged
            product = entries_mul(ma, mb)
            if sign < 0:
                product = entries_scale(-1, product)
            if index in comp:
                comp[index] = entries_add(comp[index], product)
            else:
                comp[index] = product
    return MatrixForm(a.base_dim, (a.shape[0], b.shape[1]), comp)


def wedge_power(a: MatrixForm, k: int) -> MatrixForm:
    """k-fold wedge power, multiplied left to right."""
    if k < 1:
        raise FormError("wedge power needs k >= 1")
    result = a
    for _ in range(k - 1):
        result = wedge(result, a)
    return result


def exterior_d(a: MatrixForm) -> MatrixForm:
    """Componentwise exterior derivative d(A dx^I) = sum_j (d_j A) dx^j ^ dx^I."""
    comp: dict = {}
    for index, entries in a._components.items():
        occupied = set(index)
        for j in range(1, a.base_dim + 1):
            if j in occupied:
                continue
            derived = tuple(
                tuple(scalar.diff(e, j) for e in row) for row in entries
            )
            if not _entries_nonzero_structurally(derived):
                continue
            sign, merged = merge_indices((j,), index)
            if sign < 0:
                derived = entries_scale(-1, derived)
            if merged in comp:
                comp[merged] = entries_add(comp[merged], derived)
            else:
                comp[merged] = derived
    return MatrixForm(a.base_dim, a.shape, comp)


# ------------------------------------------------------------------
# connections
# ------------------------------------------------------------------

@dataclass(frozen=True)
class Connection:
    """A connection one-form: square-fibered, homogeneous of degree 1."""

    form: MatrixForm

    def __post_init__(self):
        rows, cols = self.form.shape
        if rows != cols:
            raise FormError("connection fibers must be square")
        if any(len(i) != 1 for i, _ in self.form.components()):
            raise FormError("connection form must have pure degree 1")

    @property
    def base_dim(self) -> int:
        return self.form.base_dim

    @property
    def fiber_dim(self) -> int:
        return self.form.shape[0]

    def coefficient(self, i: int) -> Matrix:
        return self.form.component((i,))


def connection_from_coefficients(base_dim: int, coefficients: Mapping[int, Matrix]) -> Connection:
    mats = {(i,): m for i, m in coefficients.items()}
    some = next(iter(coefficients.values()), ((ZERO,),))
    fiber = len(some)
    return Connection(MatrixForm(base_dim, (fiber, fiber), mats))


def curvature(conn: Connection) -> MatrixForm:
    """F = d(omega) + omega ^ omega."""
    return exterior_d(conn.form) + wedge(conn.form, conn.form)


def nabla_apply(conn: Connection, alpha: MatrixForm) -> MatrixForm:
    """Covariant derivative (d + omega)(alpha) on vector- or
    endomorphism-valued forms."""
    if conn.fiber_dim != alpha.shape[0]:
        raise FormError("fiber dimension mismatch")
    return exterior_d(alpha) + wedge(conn.form, alpha)


def nabla_power(conn: Connection, alpha: MatrixForm, n: int) -> MatrixForm:
    result = alpha
    for _ in range(n):
        result = nabla_apply(conn, result)
    return result


# ------------------------------------------------------------------
# flatness of order N
# ------------------------------------------------------------------

def n_flat_from_curvature(F: MatrixForm, omega_form: MatrixForm, n: int) -> bool:
    """Order-n flatness decided from a curvature form and connection form.

    Even n = 2K: F^K vanishes.  Odd n = 2K+1: the operator F^K (d + omega)
    vanishes, which unrolls to F^K ^ dx_i = 0 for every coordinate and
    F^K ^ omega = 0.
    """
    if n < 2:
        raise FormError("flatness order must be at least 2")
    half, odd = divmod(n, 2)
    power = wedge_power(F, half)
    if not odd:
        return power.is_zero()
    for i in range(1, F.base_dim + 1):
        dxi = basis_one_form(F.base_dim, i, F.shape[1])
        if not wedge(power, dxi).is_zero():
            return False
    return wedge(power, omega_form).is_zero()


def is_n_flat(conn: Connection, n: int) -> bool:
    """True iff (d + omega)^n = 0."""
    return n_flat_from_curvature(curvature(conn), conn.form, n)


def minimal_flatness_order(conn: Connection, max_n: int = 8):
    """Least n <= max_n with (d + omega)^n = 0, or None.  Flatness of
    order n implies flatness of every higher order, so the scan is exact."""
    F = curvature(conn)
    for n in range(2, max_n + 1):
        if n_flat_from_curvature(F, conn.form, n):
            return n
    return None


def probe_forms(conn: Connection):
    """Vector-valued probes used to measure flatness by direct iteration:
    f e_j for f in {1, x_1, ..., x_n} and dx_i e_j.  The coordinate
    functions make every F^K ^ dx_i direction visible through F^K ^ df."""
    n, m = conn.base_dim, conn.fiber_dim
    probes = []
    fs = [scalar.ONE] + [scalar.var(i) for i in range(1, n + 1)]
    for j in range(m):
        for f in fs:
            column = tuple((f,) if r == j else (ZERO,) for r in range(m))
            probes.append(MatrixForm(n, (m, 1), {(): column}))
        for i in range(1, n + 1):
            column = tuple((scalar.ONE,) if r == j else (ZERO,) for r in range(m))
            probes.append(MatrixForm(n, (m, 1), {(i,): column}))
    return probes


def brute_force_flatness_order(conn: Connection, max_n: int = 8):
    """Least n <= max_n with nabla^n annihilating the probe set, measured
    by actually iterating the covariant derivative.  A probe that has
    become the zero function stays zero under nabla, so it drops out."""
    current = probe_forms(conn)
    for n in range(1, max_n + 1):
        current = [nabla_apply(conn, a) for a in current]
        current = [a for a in current if not a.is_zero()]
        if not current:
            # orders below 2 are not meaningful flatness orders
            return max(n, 2)
    return None


# ------------------------------------------------------------------
# ordered pairings and the expansion of curvature powers
# ------------------------------------------------------------------

@dataclass(frozen=True)
class OrderedPairing:
    """Partition of an even index set into pairs (a_i, b_i) with a_i < b_i,
    listed with a_1 < a_2 < ..., and the permutation sign of
    (s_1, ..., s_2k) -> (a_1, b_1, ..., a_k, b_k)."""

    pairs: tuple
    sign: int


def _permutation_sign(sequence: Sequence[int]) -> int:
    inversions = sum(
        1
        for i in range(len(sequence))
        for j in range(i + 1, len(sequence))
        if sequence[i] > sequence[j]
    )
    return -1 if inversions % 2 else 1


def ordered_pairings(index_set: Iterable[int]):
    """All pairings of an even-cardinality index set; (2k)!/(2^k k!) of them."""
    elements = sorted(index_set)
    if len(elements) % 2:
        raise FormError("ordered pairings need an even-cardinality set")

    def rec(remaining):
        if not remaining:
            yield ()
            return
        first = remaining[0]
        for idx in range(1, len(remaining)):
            partner = remaining[idx]
            rest = remaining[1:idx] + remaining[idx + 1:]
            for tail in rec(rest):
                yield ((first, partner),) + tail

    result = []
    for pairs in rec(tuple(elements)):
        flattened = [x for pair in pairs for x in pair]
        result.append(OrderedPairing(pairs, _permutation_sign(flattened)))
    return result


def curvature_components(F: MatrixForm) -> dict:
    """The matrices F_ij for i < j from a degree-2 form."""
    comp = {}
    for index, entries in F._components.items():
        if len(index) != 2:
            raise FormError("curvature component extraction needs a 2-form")
        comp[index] = entries
    return comp


def component_lookup(components: Mapping, i: int, j: int, fiber_dim: int) -> Matrix:
    """F_ij extended to all index pairs: antisymmetric, zero diagonal."""
    if i == j:
        return zero_entries(fiber_dim, fiber_dim)
    if i < j:
        return components.get((i, j), zero_entries(fiber_dim, fiber_dim))
    upper = components.get((j, i))
    if upper is None:
        return zero_entries(fiber_dim, fiber_dim)
    return entries_scale(-1, upper)


def pairing_sum(components: Mapping, index_set: Iterable[int], fiber_dim: int) -> Matrix:
    """Signed sum over pairings, over every ordering of each pairing's
    pairs, of the ordered matrix products of paired components.  This is
    exactly the dx^A coefficient of the corresponding power of
    sum_{i<j} F_ij dx^i ^ dx^j."""
    elements = sorted(index_set)
    k = len(elements) // 2
    total = zero_entries(fiber_dim, fiber_dim)
    for pairing in ordered_pairings(elements):
        for order in permutations(range(k)):
            product = identity_entries(fiber_dim)
            for position in order:
                a, b = pairing.pairs[position]
                product = entries_mul(
                    product, component_lookup(components, a, b, fiber_dim)
                )
            if pairing.sign < 0:
                product = entries_scale(-1, product)
            total = entries_add(total, product)
    return total


def pairing_power_form(F: MatrixForm, k: int) -> MatrixForm:
    """Reassembles sum_A pairing_sum(A) dx^A; equals wedge_power(F, k)."""
    comps = curvature_components(F)
    m = F.shape[0]
    out = {}
    for A in combinations(range(1, F.base_dim + 1), 2 * k):
        out[A] = pairing_sum(comps, A, m)
    return MatrixForm(F.base_dim, F.shape, out)


def pairing_flatness_certificate(conn: Connection, k: int):
    """Certificate that (d + omega)^{2k} = 0, checked through the pairing
    expansion: the signed pairing sum must vanish for every 2k-subset of
    coordinates.  Returns (verdict, failing subsets)."""
    if k < 1:
        raise FormError("k must be at least 1")
    F = curvature(conn)
    comps = curvature_components(F)
    failures = []
    for A in combinations(range(1, conn.base_dim + 1), 2 * k):
        total = pairing_sum(comps, A, conn.fiber_dim)
        if not entries_is_zero(total):
            failures.append(A)
    return not failures, failures


# ------------------------------------------------------------------
# tensor product of connections
# ------------------------------------------------------------------

def tensor_connection(c1: Connection, c2: Connection) -> Connection:
    """Connection omega_1 (x) I + I (x) omega_2 on the tensor fiber."""
    if c1.base_dim != c2.base_dim:
        raise FormError("base dimension mismatch")
    m1, m2 = c1.fiber_dim, c2.fiber_dim
    id1, id2 = identity_entries(m1), identity_entries(m2)
    comps = {}
    for i in range(1, c1.base_dim + 1):
        left = entries_kron(c1.coefficient(i), id2)
        right = entries_kron(id1, c2.coefficient(i))
        total = entries_add(left, right)
        if _entries_nonzero_structurally(total):
            comps[(i,)] = total
    return Connection(MatrixForm(c1.base_dim, (m1 * m2, m1 * m2), comps))


# ------------------------------------------------------------------
# connection files
# ------------------------------------------------------------------
#
#   base <n>
#   fiber <m>
#   omega <i>
#   <m rows of m entries separated by ';'>
#
# Blocks for coordinates with omega_i = 0 may be omitted.

class ConnectionFileError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_connection(text: str) -> Connection:
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

    def expect_header(keyword):
        content, line_no = next_content()
        if content is None:
            raise ConnectionFileError(f"missing '{keyword}' header", line_no)
        parts = content.split()
        if len(parts) != 2 or parts[0] != keyword:
            raise ConnectionFileError(f"expected '{keyword} <int>'", line_no)
        try:
            return int(parts[1])
        except ValueError:
            raise ConnectionFileError(f"expected an integer after '{keyword}'", line_no)

    base = expect_header("base")
    fiber = expect_header("fiber")
    if base < 1 or fiber < 1:
        raise ConnectionFileError("base and fiber dimensions must be positive", pos)

    coefficients = {}
    while True:
        content, line_no = next_content()
        if content is None:
            break
        parts = content.split()
        if len(parts) != 2 or parts[0] != "omega":
            raise ConnectionFileError("expected 'omega <i>'", line_no)
        try:
            i = int(parts[1])
        except ValueError:
            raise ConnectionFileError("expected an integer coordinate index", line_no)
        if not 1 <= i <= base:
            raise ConnectionFileError(f"coordinate index {i} out of range", line_no)
        if i in coefficients:
            raise ConnectionFileError(f"duplicate block for omega {i}", line_no)
        rows = []
        for _ in range(fiber):
            content, line_no = next_content()
            if content is None:
                raise ConnectionFileError("unexpected end of file inside a block", line_no)
            cells = [c.strip() for c in content.split(";")]
            if len(cells) != fiber:
                raise ConnectionFileError(
                    f"expected {fiber} entries separated by ';'", line_no
                )
            row = []
            for cell in cells:
                try:
                    row.append(scalar.parse(cell))
                except scalar.ParseError as err:
                    raise ConnectionFileError(f"bad expression {cell!r}: {err}", line_no)
            rows.append(tuple(row))
        coefficients[i] = tuple(rows)
    comps = {(i,): m for i, m in coefficients.items()}
    return Connection(MatrixForm(base, (fiber, fiber), comps))


def load_connection(path) -> Connection:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_connection(handle.read())
