"""Exact rational linear algebra: rank, dependencies, circuits, bordering.

Everything here is exact.  Rank clears denominators to integers and runs
fraction-free (Bareiss) elimination; for larger matrices a modular
full-rank certificate short-circuits the common nonsingular case (rank mod p
equals rank over the rationals when it hits the dimension, since a nonzero
minor mod p is a nonzero minor).  No result ever depends on floating point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from .dist import RationalLike, as_fraction
from .errors import BudgetError, ConfigError

DEFAULT_SUBSET_BUDGET = 2_000_000

_PRIME = 2_147_483_647  # 2^31 - 1; products of two residues fit in int64
_MODULAR_MIN_DIM = 24  # measured crossover vs pure fraction-free elimination


@dataclass(frozen=True)
class ExactMatrix:
    """Immutable matrix of exact rationals."""

    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if not self.rows or not self.rows[0]:
            raise ConfigError("matrix needs at least one row and one column")
        width = len(self.rows[0])
        for row in self.rows:
            if len(row) != width:
                raise ConfigError("ragged rows")
            for e in row:
                if not isinstance(e, Fraction):
                    raise ConfigError("entries must be Fractions; use from_rows()")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[RationalLike]]) -> "ExactMatrix":
        return cls(tuple(tuple(as_fraction(e) for e in row) for row in rows))

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    @cached_property
    def is_symmetric(self) -> bool:
        m, n = self.shape
        if m != n:
            return False
        return all(self.rows[i][j] == self.rows[j][i] for i in range(n) for j in range(i))

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.rows)

    @property
    def columns(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(zip(*self.rows))

    def rank(self) -> int:
        return rank_rows(self.rows)

    def __repr__(self) -> str:
        m, n = self.shape
        return f"ExactMatrix({m}x{n})"


def matrix_from_json(obj: object) -> ExactMatrix:
    """Parse an array-of-arrays of rational strings/ints."""
    if not isinstance(obj, Sequence) or isinstance(obj, str):
        raise ConfigError("matrix literal must be an array of arrays")
    return ExactMatrix.from_rows(obj)  # type: ignore[arg-type]


def matrix_to_json(mat: ExactMatrix) -> list[list[str]]:
    return [[str(e) for e in row] for row in mat.rows]


# -- integer rank core -------------------------------------------------------


def _bareiss_rank(rows: list[list[int]]) -> int:
    """Fraction-free elimination rank on integer rows (mutates its input)."""
    m, n = len(rows), len(rows[0])
    prev = 1
    r = 0
    for c in range(n):
        if r == m:
            break
        piv = -1
        for i in range(r, m):
            if rows[i][c]:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
        pivot_row = rows[r]
        p = pivot_row[c]
        for i in range(r + 1, m):
            ri = rows[i]
            f = ri[c]
            if f:
                for j in range(c + 1, n):
                    ri[j] = (p * ri[j] - f * pivot_row[j]) // prev
                ri[c] = 0
            elif prev != 1 or p != 1:
                for j in range(c + 1, n):
                    ri[j] = (p * ri[j]) // prev
        prev = p
        r += 1
    return r


def _modular_rank(a: np.ndarray) -> int:
    """Rank of an int64 matrix over GF(2^31 - 1); entries must be reduced."""
    m, n = a.shape
    r = 0
    for c in range(n):
        if r == m:
            break
        col = a[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = pow(int(a[r, c]), _PRIME - 2, _PRIME)
        a[r, c:] = (a[r, c:] * inv) % _PRIME
        factors = a[r + 1 :, c]
        if factors.size and factors.any():
            a[r + 1 :, c:] = (a[r + 1 :, c:] - np.outer(factors, a[r, c:])) % _PRIME
        r += 1
    return r


def rank_int_rows(rows: Sequence[Sequence[int]]) -> int:
    """Exact rank of integer rows, with a modular full-rank certificate."""
    m, n = len(rows), len(rows[0])
    k = min(m, n)
    if k >= _MODULAR_MIN_DIM and not any(not any(row) for row in rows):
        try:
            a = np.asarray(rows, dtype=np.int64)
        except OverflowError:
            a = None
        if a is not None:
            if _modular_rank(np.mod(a, _PRIME)) == k:
                return k
    return _bareiss_rank([list(row) for row in rows])


def rank_rows(rows: Sequence[Sequence[Union[Fraction, int]]]) -> int:
    """Exact rank of rational rows: clear denominators globally, then eliminate."""
    denom = 1
    for row in rows:
        for e in row:
            if isinstance(e, Fraction) and e.denominator != 1:
                denom = math.lcm(denom, e.denominator)
    if denom == 1:
        int_rows = [[int(e) for e in row] for row in rows]
    else:
        int_rows = [
            [
                e.numerator * (denom // e.denominator) if isinstance(e, Fraction) else int(e) * denom
                for e in row
            ]
            for row in rows
        ]
    return rank_int_rows(int_rows)


def rank(mat: ExactMatrix) -> int:
    return rank_rows(mat.rows)


# -- exact solving / dependencies --------------------------------------------


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals; returns (rows, pivot cols)."""
    m, n = len(rows), len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        piv = next((i for i in range(r, m) if rows[i][c]), -1)
        if piv < 0:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [e * inv for e in rows[r]]
        for i in range(m):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows, pivots


def null_combination(mat: ExactMatrix) -> tuple[Fraction, ...]:
    """The vanishing column combination of an (n-1) x n matrix of rank n-1.

    Returns c with  sum_j c_j * column_j = 0,  normalized so the first nonzero
    coefficient is 1.  The kernel is one-dimensional under the precondition,
    so c is unique up to the normalization.
    """
    m, n = mat.shape
    if m != n - 1:
        raise ConfigError(f"need an (n-1) x n matrix, got {m} x {n}")
    rows = [list(row) for row in mat.rows]
    reduced, pivots = _rref(rows)
    if len(pivots) != n - 1:
        raise ConfigError(f"matrix rank {len(pivots)} != {n - 1}; kernel is not a line")
    free = next(c for c in range(n) if c not in pivots)
    coeffs = [Fraction(0)] * n
    coeffs[free] = Fraction(1)
    for r, c in enumerate(pivots):
        coeffs[c] = -reduced[r][free]
    lead = next(x for x in coeffs if x)
    return tuple(x / lead for x in coeffs)


def _dependency_coefficients(vectors: Sequence[tuple[Fraction, ...]]) -> tuple[Fraction, ...]:
    """A nonzero c with sum_i c_i * v_i = 0 for vectors spanning a 1-dim kernel."""
    dim = len(vectors[0])
    k = len(vectors)
    rows = [[vectors[i][d] for i in range(k)] for d in range(dim)]  # columns = vectors
    reduced, pivots = _rref(rows)
    free = next(c for c in range(k) if c not in pivots)
    coeffs = [Fraction(0)] * k
    coeffs[free] = Fraction(1)
    for r, c in enumerate(pivots):
        coeffs[c] = -reduced[r][free]
    lead = next(x for x in coeffs if x)
    return tuple(x / lead for x in coeffs)


# -- circuits and strong rank -------------------------------------------------


@dataclass(frozen=True)
class CircuitReport:
    """Outcome of a smallest-dependent-subset search.

    ``witness`` is a full-length coefficient vector with exactly ``degree``
    nonzeros whose combination of the input vectors vanishes; None when no
    dependent subset exists below the cap.
    """

    found: bool
    degree: int | None
    witness: tuple[Fraction, ...] | None
    search_cap: int
    subsets_examined: int


def min_circuit_below(
    vectors: Sequence[Sequence[RationalLike]],
    cap: int,
    budget: int = DEFAULT_SUBSET_BUDGET,
) -> CircuitReport:
    """Smallest dependent subset of size < cap, searched in increasing size.

    Sizes are scanned 1, 2, ..., cap-1 and subsets lexicographically, so the
    result is deterministic for a given vector order.  The first dependent
    subset found is minimal, hence its unique dependency has full support.
    Raises BudgetError once more than ``budget`` subsets would be examined.
    """
    if cap < 1:
        raise ConfigError(f"cap must be >= 1, got {cap}")
    vecs = [tuple(as_fraction(e) for e in v) for v in vectors]
    if not vecs:
        raise ConfigError("need at least one vector")
    count = len(vecs)
    examined = 0
    for size in range(1, min(cap - 1, count) + 1):
        examined_here = math.comb(count, size)
        if examined + examined_here > budget:
            raise BudgetError(
                f"circuit search needs {examined + examined_here} subsets; budget is {budget}"
            )
        for subset in itertools.combinations(range(count), size):
            examined += 1
            chosen = [vecs[i] for i in subset]
            if rank_rows(chosen) < size:
                local = _dependency_coefficients(chosen)
                witness = [Fraction(0)] * count
                for idx, coeff in zip(subset, local):
                    witness[idx] = coeff
                return CircuitReport(
                    found=True,
                    degree=size,
                    witness=tuple(witness),
                    search_cap=cap,
                    subsets_examined=examined,
                )
    return CircuitReport(
        found=False, degree=None, witness=None, search_cap=cap, subsets_examined=examined
    )


def strong_rank(
    mat: ExactMatrix, side: str = "rows", budget: int = DEFAULT_SUBSET_BUDGET
) -> int:
    """Largest k such that every k of the chosen vectors are independent."""
    if side not in ("rows", "columns"):
        raise ConfigError(f"side must be 'rows' or 'columns', got {side!r}")
    vectors = mat.rows if side == "rows" else mat.columns
    count = len(vectors)
    if rank_rows(vectors) == count:
        return count
    report = min_circuit_below(vectors, cap=count + 1, budget=budget)
    assert report.found  # rank deficit guarantees a dependent subset
    return report.degree - 1  # type: ignore[operator]


# -- singular structure --------------------------------------------------------


def degree_threshold(n: int, eps: float) -> int:
    """ceil(n^(1-eps)) with a 1e-9 guard against float roundoff."""
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not 0.0 <= eps <= 1.0:
        raise ConfigError(f"eps must lie in [0, 1], got {eps}")
    return math.ceil(n ** (1.0 - eps) - 1e-9)


@dataclass(frozen=True)
class SingularityClass:
    """Whether a singular matrix has a short vanishing row combination."""

    label: str  # "normal" | "abnormal"
    threshold: int
    report: CircuitReport


def classify_singular(
    mat: ExactMatrix, eps: float, budget: int = DEFAULT_SUBSET_BUDGET
) -> SingularityClass:
    """Abnormal iff some vanishing row combination has degree < ceil(n^(1-eps)).

    Precondition: the matrix is square and singular.
    """
    m, n = mat.shape
    if m != n:
        raise ConfigError(f"need a square matrix, got {m} x {n}")
    if rank(mat) == n:
        raise ConfigError("matrix is nonsingular; nothing to classify")
    threshold = degree_threshold(n, eps)
    report = min_circuit_below(mat.rows, cap=threshold, budget=budget)
    label = "abnormal" if report.found else "normal"
    return SingularityClass(label=label, threshold=threshold, report=report)


@dataclass(frozen=True)
class RowClassification:
    """Leave-one-out dependency supports of a nonsingular matrix's rows."""

    supports: tuple[int, ...]
    good: tuple[bool, ...]
    threshold: int
    perfect: bool


def classify_rows(mat: ExactMatrix, eps: float) -> RowClassification:
    """Mark each row good iff deleting it leaves a vanishing column combination
    with support at least ceil(n^(1-eps)).

    Precondition: the matrix is square and nonsingular.  For n = 1 the single
    row is good by convention (the length-1 combination (1,) has support 1).
    """
    m, n = mat.shape
    if m != n:
        raise ConfigError(f"need a square matrix, got {m} x {n}")
    if rank(mat) < n:
        raise ConfigError("matrix is singular; row classification needs full rank")
    threshold = degree_threshold(n, eps)
    if n == 1:
        return RowClassification(supports=(1,), good=(True,), threshold=threshold, perfect=True)
    supports = []
    good = []
    for i in range(n):
        sub = ExactMatrix(tuple(row for j, row in enumerate(mat.rows) if j != i))
        combo = null_combination(sub)
        support = sum(1 for x in combo if x)
        supports.append(support)
        good.append(support >= threshold)
    return RowClassification(
        supports=tuple(supports), good=tuple(good), threshold=threshold, perfect=all(good)
    )


# -- symmetric bordering --------------------------------------------------------


def in_column_span(mat: ExactMatrix, u: Sequence[RationalLike]) -> bool:
    """Whether u lies in the span of the matrix's columns."""
    m, _ = mat.shape
    uu = [as_fraction(x) for x in u]
    if len(uu) != m:
        raise ConfigError(f"vector length {len(uu)} != row count {m}")
    base = rank(mat)
    augmented = [list(row) + [x] for row, x in zip(mat.rows, uu)]
    return rank_rows(augmented) == base


def border_symmetric(mat: ExactMatrix, u: Sequence[RationalLike], d: RationalLike) -> int:
    """Rank increment from bordering a symmetric matrix by column u, row u^T,
    and corner d.  Always in {0, 1, 2}; an increment of 2 is forced whenever
    u is outside the column span."""
    m, n = mat.shape
    if m != n or not mat.is_symmetric:
        raise ConfigError("bordering requires a symmetric square matrix")
    uu = [as_fraction(x) for x in u]
    if len(uu) != n:
        raise ConfigError(f"border vector length {len(uu)} != matrix size {n}")
    dd = as_fraction(d)
    bordered = [list(row) + [x] for row, x in zip(mat.rows, uu)]
    bordered.append(uu + [dd])
    return rank_rows(bordered) - rank(mat)
