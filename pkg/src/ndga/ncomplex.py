"""Finite-dimensional N-complexes over exact rationals.

A complex is a finite sequence of rational matrices d_i: V^i -> V^(i+1)
whose every N-fold composition vanishes.  Generalized cohomology in the
window 1 <= p <= N-1:

    H(p, i) = Ker(d^p : V^i -> V^(i+p)) / Im(d^(N-p) : V^(i-N+p) -> V^i)

with out-of-range degrees read as zero spaces.  All ranks come from exact
elimination; no floating point anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import List, Tuple

from . import linalg
from .linalg import FracMatrix


class ComplexError(Exception):
    pass


@dataclass(frozen=True)
class FiniteNComplex:
    """order: the nilpotency exponent N; degrees lo..lo+len(dims)-1 with
    maps[t] sending degree lo+t to lo+t+1 (so len(maps) = len(dims) - 1)."""

    order: int
    lo: int
    dims: tuple
    maps: tuple

    def __post_init__(self):
        if self.order < 2:
            raise ComplexError("order must be at least 2")
        if not self.dims:
            raise ComplexError("a complex needs at least one degree")
        if len(self.maps) != len(self.dims) - 1:
            raise ComplexError("need exactly one map per consecutive degree pair")
        for t, matrix in enumerate(self.maps):
            rows, cols = len(matrix), len(matrix[0]) if matrix else 0
            if self.dims[t + 1] == 0 or self.dims[t] == 0:
                continue
            if rows != self.dims[t + 1] or any(len(r) != self.dims[t] for r in matrix):
                raise ComplexError(
                    f"dimension mismatch between consecutive matrices at degree {self.lo + t}: "
                    f"got {rows}x{cols}, expected {self.dims[t + 1]}x{self.dims[t]}"
                )

    @property
    def hi(self) -> int:
        return self.lo + len(self.dims) - 1

    def dim(self, degree: int) -> int:
        if self.lo <= degree <= self.hi:
            return self.dims[degree - self.lo]
        return 0

    def map_at(self, degree: int) -> FracMatrix:
        """d: V^degree -> V^(degree+1), zero outside the stored range."""
        t = degree - self.lo
        if 0 <= t < len(self.maps):
            return self.maps[t]
        return linalg.zero_matrix(self.dim(degree + 1), self.dim(degree))

    def power_at(self, degree: int, p: int) -> FracMatrix:
        """d^p: V^degree -> V^(degree+p) as one exact matrix."""
        result = linalg.identity(self.dim(degree))
        for step in range(p):
            result = linalg.mat_mul(self.map_at(degree + step), result)
        return result


def complex_from(order: int, lo: int, dims, maps) -> FiniteNComplex:
    return FiniteNComplex(
        order,
        lo,
        tuple(int(n) for n in dims),
        tuple(linalg.to_matrix(m) for m in maps),
    )


def validate(c: FiniteNComplex) -> bool:
    """True iff every order-fold composition is exactly zero."""
    for degree in range(c.lo, c.hi - c.order + 1):
        if not linalg.is_zero_matrix(c.power_at(degree, c.order)):
            return False
    return True


def p_cohomology_dim(c: FiniteNComplex, p: int, degree: int) -> int:
    """dim Ker(d^p at degree) - rank(d^(order-p) into degree).  The
    containment Im subset Ker is certified first; its failure means the
    input is not a valid complex of this order."""
    if not 1 <= p <= c.order - 1:
        raise ComplexError(f"p must satisfy 1 <= p <= {c.order - 1}")
    outgoing = c.power_at(degree, p)
    incoming = c.power_at(degree - (c.order - p), c.order - p)
    if not linalg.is_zero_matrix(linalg.mat_mul(outgoing, incoming)):
        raise ComplexError(
            f"image is not contained in the kernel at degree {degree} (p={p}); "
            "the differential does not satisfy the declared nilpotency order"
        )
    kernel_dim = c.dim(degree) - linalg.rank(outgoing)
    image_rank = linalg.rank(incoming)
    return kernel_dim - image_rank


def total_cohomology_dims(c: FiniteNComplex, m: int) -> Tuple[int, List[Tuple[int, int, int]]]:
    """Total dimension at diagonal m = 2i - p, with the (i, p, dim)
    breakdown over 1 <= p <= order-1 and stored degrees i."""
    breakdown = []
    total = 0
    for i in range(c.lo, c.hi + 1):
        p = 2 * i - m
        if 1 <= p <= c.order - 1:
            d = p_cohomology_dim(c, p, i)
            breakdown.append((i, p, d))
            total += d
    return total, breakdown


def total_diagonals(c: FiniteNComplex) -> List[int]:
    values = set()
    for i in range(c.lo, c.hi + 1):
        for p in range(1, c.order):
            values.add(2 * i - p)
    return sorted(values)


# ------------------------------------------------------------------
# tensor product
# ------------------------------------------------------------------

def tensor_complex(c1: FiniteNComplex, c2: FiniteNComplex, order: int | None = None) -> FiniteNComplex:
    """Tensor product with differential d1 (x) Id + (-1)^deg1 Id (x) d2
    (Koszul sign on the second summand).  Blocks within each total degree
    are ordered by the first factor's degree."""
    lo = c1.lo + c2.lo
    hi = c1.hi + c2.hi
    if order is None:
        order = c1.order + c2.order - 1

    def blocks(total: int) -> List[Tuple[int, int]]:
        return [
            (i, total - i)
            for i in range(c1.lo, c1.hi + 1)
            if c2.lo <= total - i <= c2.hi and c1.dim(i) * c2.dim(total - i) > 0
        ]

    dims = []
    maps = []
    for total in range(lo, hi + 1):
        dims.append(sum(c1.dim(i) * c2.dim(j) for i, j in blocks(total)))
    for total in range(lo, hi):
        source = blocks(total)
        target = blocks(total + 1)
        target_offsets = {}
        offset = 0
        for i, j in target:
            target_offsets[(i, j)] = offset
            offset += c1.dim(i) * c2.dim(j)
        rows = offset
        cols = sum(c1.dim(i) * c2.dim(j) for i, j in source)
        matrix = [[Fraction(0)] * cols for _ in range(rows)]
        col_offset = 0
        for i, j in source:
            block_cols = c1.dim(i) * c2.dim(j)
            # d1 (x) Id lands in block (i+1, j)
            if (i + 1, j) in target_offsets:
                piece = linalg.kronecker(c1.map_at(i), linalg.identity(c2.dim(j)))
                r0 = target_offsets[(i + 1, j)]
                for r, row in enumerate(piece):
                    for s, value in enumerate(row):
                        matrix[r0 + r][col_offset + s] += value
            # (-1)^i Id (x) d2 lands in block (i, j+1)
            if (i, j + 1) in target_offsets:
                piece = linalg.kronecker(linalg.identity(c1.dim(i)), c2.map_at(j))
                sign = Fraction(-1 if i % 2 else 1)
                r0 = target_offsets[(i, j + 1)]
                for r, row in enumerate(piece):
                    for s, value in enumerate(row):
                        matrix[r0 + r][col_offset + s] += sign * value
            col_offset += block_cols
        maps.append(tuple(tuple(row) for row in matrix))
    return FiniteNComplex(order, lo, tuple(dims), tuple(maps))


def measured_nilpotency(c: FiniteNComplex, bound: int) -> int:
    """Least t <= bound with every t-fold composition zero."""
    for t in range(1, bound + 1):
        if all(
            linalg.is_zero_matrix(c.power_at(degree, t))
            for degree in range(c.lo, c.hi + 1)
        ):
            return t
    raise ComplexError(f"nilpotency exceeds {bound}")


def tensor_nilpotency(c1: FiniteNComplex, c2: FiniteNComplex) -> int:
    """Measured minimal nilpotency of the tensor complex; certified to be
    at most order1 + order2 - 1."""
    total_dim = sum(c1.dims) * sum(c2.dims)
    if total_dim > 4096:
        raise ComplexError("tensor size budget exceeded")
    bound = c1.order + c2.order - 1
    return measured_nilpotency(tensor_complex(c1, c2), bound)


# ------------------------------------------------------------------
# complex files
# ------------------------------------------------------------------
#
#   N <order>
#   deg <i> dim <n_i>
#   <rows of the matrix out of degree i, whitespace-separated fractions>
#   deg <i+1> dim <n_{i+1}>
#   ...
#
# The rows between two degree headers form the map out of the earlier
# degree; the final degree block has no rows.

class ComplexFileError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_complex(text: str) -> FiniteNComplex:
    order = None
    degree_dims: List[Tuple[int, int]] = []
    row_groups: List[List[Tuple[List[Fraction], int]]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "N":
            if order is not None:
                raise ComplexFileError("duplicate N header", line_no)
            if len(parts) != 2:
                raise ComplexFileError("expected 'N <order>'", line_no)
            try:
                order = int(parts[1])
            except ValueError:
                raise ComplexFileError("expected an integer order", line_no)
        elif parts[0] == "deg":
            if order is None:
                raise ComplexFileError("'N <order>' must come first", line_no)
            if len(parts) != 4 or parts[2] != "dim":
                raise ComplexFileError("expected 'deg <i> dim <n>'", line_no)
            try:
                degree, dim = int(parts[1]), int(parts[3])
            except ValueError:
                raise ComplexFileError("expected integers in the degree header", line_no)
            if dim < 0:
                raise ComplexFileError("dimensions must be non-negative", line_no)
            if degree_dims and degree != degree_dims[-1][0] + 1:
                raise ComplexFileError(
                    f"degrees must be consecutive; got {degree} after {degree_dims[-1][0]}",
                    line_no,
                )
            degree_dims.append((degree, dim))
            row_groups.append([])
        else:
            if not row_groups:
                raise ComplexFileError("matrix rows before any degree header", line_no)
            try:
                row = [Fraction(cell) for cell in parts]
            except ValueError:
                raise ComplexFileError(f"bad rational entry in {line!r}", line_no)
            row_groups[-1].append((row, line_no))
    if order is None:
        raise ComplexFileError("missing 'N <order>' header", 1)
    if not degree_dims:
        raise ComplexFileError("no degrees declared", 1)
    if row_groups[-1]:
        raise ComplexFileError(
            "rows after the final degree header", row_groups[-1][0][1]
        )
    maps = []
    for t in range(len(degree_dims) - 1):
        _, source_dim = degree_dims[t]
        _, target_dim = degree_dims[t + 1]
        rows = row_groups[t]
        if len(rows) != target_dim:
            line = rows[0][1] if rows else 1
            raise ComplexFileError(
                f"map out of degree {degree_dims[t][0]} needs {target_dim} rows, got {len(rows)}",
                line,
            )
        for row, line_no in rows:
            if len(row) != source_dim:
                raise ComplexFileError(
                    f"expected {source_dim} entries per row", line_no
                )
        maps.append(tuple(tuple(row) for row, _ in rows))
    return FiniteNComplex(
        order,
        degree_dims[0][0],
        tuple(dim for _, dim in degree_dims),
        tuple(maps),
    )


def load_complex(path) -> FiniteNComplex:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_complex(handle.read())
