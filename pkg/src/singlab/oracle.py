"""Exhaustive exact-probability engines for tiny instances.

Everything here enumerates complete outcome spaces and accumulates exact
rational probabilities — ground truth for the Monte Carlo harness and the
bound evaluators.  Enumerations are guarded by an outcome-count budget.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .dist import (
    DiscreteDist,
    RationalLike,
    as_fraction,
    biggest_jump,
    convolve,
    scale_dist,
)
from .ensembles import EntryScheme, kappa_n
from .errors import BudgetError, ConfigError
from .xlinalg import ExactMatrix, rank, rank_rows

DEFAULT_ENUM_BUDGET = 2**24

# An exact law is just a finite-support rational distribution.
ExactLaw = DiscreteDist

Value = object  # int | Fraction in practice


def _value_view(dist: DiscreteDist) -> list:
    """Support values with integer-valued rationals lowered to plain ints."""
    return [v.numerator if v.denominator == 1 else v for v in dist.values]


def joint_outcomes(
    dists: Sequence[DiscreteDist], budget: int = DEFAULT_ENUM_BUDGET
) -> Iterator[tuple[tuple, Fraction]]:
    """Yield (values, probability) over the full product space.

    Uniform-mass products (the common Bernoulli(1/2)/Rademacher case) share a
    single precomputed probability; otherwise probabilities multiply per cell.
    """
    total = math.prod(d.size for d in dists)
    if total > budget:
        raise BudgetError(f"enumeration needs {total} outcomes; budget is {budget}")
    views = [_value_view(d) for d in dists]
    if all(len(set(d.masses)) == 1 for d in dists):
        p = math.prod((d.masses[0] for d in dists), start=Fraction(1))
        for values in itertools.product(*views):
            yield values, p
    else:
        mass_rows = [d.masses for d in dists]
        for picks in itertools.product(*[range(d.size) for d in dists]):
            p = math.prod(
                (masses[k] for masses, k in zip(mass_rows, picks)), start=Fraction(1)
            )
            yield tuple(view[k] for view, k in zip(views, picks)), p


def _square_cells(scheme: EntryScheme, n: int) -> list[DiscreteDist]:
    return [scheme.resolve(i, j, n) for i in range(1, n + 1) for j in range(1, n + 1)]


def _upper_cells(scheme: EntryScheme, n: int) -> list[DiscreteDist]:
    return [scheme.resolve(i, j, n) for i in range(1, n + 1) for j in range(i, n + 1)]


def _square_rows(values: tuple, n: int) -> list[list]:
    return [list(values[r * n : (r + 1) * n]) for r in range(n)]


def _symmetric_rows(values: tuple, n: int) -> list[list]:
    rows = [[0] * n for _ in range(n)]
    k = 0
    for i in range(n):
        for j in range(i, n):
            rows[i][j] = values[k]
            rows[j][i] = values[k]
            k += 1
    return rows


def enumerate_singularity(
    scheme: EntryScheme, n: int, kind: str, budget: int = DEFAULT_ENUM_BUDGET
) -> Fraction:
    """Exact P(rank < n) by weighted enumeration of every entry outcome."""
    if kind == "ginibre":
        cells, build = _square_cells(scheme, n), _square_rows
    elif kind == "wigner":
        if not scheme.symmetric_ok():
            raise ConfigError("scheme is not symmetric; cannot enumerate a symmetric kind")
        cells, build = _upper_cells(scheme, n), _symmetric_rows
    else:
        raise ConfigError(f"kind must be 'ginibre' or 'wigner', got {kind!r}")
    p_singular = Fraction(0)
    for values, p in joint_outcomes(cells, budget):
        if rank_rows(build(values, n)) < n:
            p_singular += p
    return p_singular


def linear_combination_law(
    alphas: Sequence[RationalLike], dists: Sequence[DiscreteDist]
) -> DiscreteDist:
    """Exact law of sum_i alpha_i * xi_i by iterated scaled convolution."""
    if len(alphas) != len(dists) or not dists:
        raise ConfigError("need one nonzero coefficient per distribution")
    coeffs = [as_fraction(a) for a in alphas]
    if any(a == 0 for a in coeffs):
        raise ConfigError("all coefficients must be nonzero")
    law = scale_dist(dists[0], coeffs[0])
    for a, d in zip(coeffs[1:], dists[1:]):
        law = convolve(law, scale_dist(d, a))
    return law


def exact_linear_concentration(
    alphas: Sequence[RationalLike], dists: Sequence[DiscreteDist]
) -> tuple[Fraction, Fraction]:
    """(sup atom mass, its location) for sum_i alpha_i * xi_i."""
    x, mass = biggest_jump(linear_combination_law(alphas, dists))
    return mass, x


def _parse_symmetric_coeffs(
    c: Sequence[Sequence[RationalLike]], n: int
) -> list[list[Fraction]]:
    if len(c) != n or any(len(row) != n for row in c):
        raise ConfigError(f"coefficient matrix must be {n} x {n}")
    cc = [[as_fraction(e) for e in row] for row in c]
    for i in range(n):
        for j in range(i):
            if cc[i][j] != cc[j][i]:
                raise ConfigError("coefficient matrix must be symmetric")
    return cc


def quadratic_form_law(
    c: Sequence[Sequence[RationalLike]],
    dists: Sequence[DiscreteDist],
    budget: int = DEFAULT_ENUM_BUDGET,
) -> DiscreteDist:
    """Exact law of  phi = sum_{i,j} c_ij xi_i xi_j  (double sum: cross terms
    appear twice) over the product of all supports."""
    n = len(dists)
    if n == 0:
        raise ConfigError("need at least one variable")
    cc = _parse_symmetric_coeffs(c, n)
    fast = _quadratic_law_int_fast(cc, dists, budget)
    if fast is not None:
        return fast
    acc: dict[Fraction, Fraction] = {}
    for values, p in joint_outcomes(dists, budget):
        phi = Fraction(0)
        for i in range(n):
            vi = values[i]
            if not vi:
                continue
            row = cc[i]
            s = Fraction(0)
            for j in range(n):
                if values[j]:
                    s += row[j] * values[j]
            phi += vi * s
        acc[phi] = acc.get(phi, Fraction(0)) + p
    return DiscreteDist(tuple(sorted(acc.items())))


def _quadratic_law_int_fast(
    cc: list[list[Fraction]], dists: Sequence[DiscreteDist], budget: int
) -> DiscreteDist | None:
    """Vectorized path for integer coefficients and integer supports.

    Exact: outcome values stay within int64 by the magnitude guard, and the
    per-outcome probabilities are identical rationals whenever every law is
    uniform on its support (otherwise fall back to the generic path)."""
    n = len(dists)
    if any(e.denominator != 1 for row in cc for e in row):
        return None
    if any(v.denominator != 1 for d in dists for v in d.values):
        return None
    if any(len(set(d.masses)) != 1 for d in dists):
        return None
    total = math.prod(d.size for d in dists)
    if total > budget:
        raise BudgetError(f"enumeration needs {total} outcomes; budget is {budget}")
    if total * n > 2**25:  # keep the dense outcome grid in memory bounds
        return None
    max_v = max(max(abs(int(v)) for v in d.values) for d in dists)
    max_c = max((abs(int(e)) for row in cc for e in row), default=0)
    if max_c * max_v * max_v * n * n >= 2**62:
        return None
    grids = np.meshgrid(
        *[np.asarray([int(v) for v in d.values], dtype=np.int64) for d in dists],
        indexing="ij",
    )
    x = np.stack([g.reshape(-1) for g in grids], axis=1)  # total x n
    cmat = np.asarray([[int(e) for e in row] for row in cc], dtype=np.int64)
    phi = np.einsum("ti,ij,tj->t", x, cmat, x)
    outcome_p = math.prod((d.masses[0] for d in dists), start=Fraction(1))
    values, counts = np.unique(phi, return_counts=True)
    atoms = tuple(
        (Fraction(int(v)), int(k) * outcome_p) for v, k in zip(values, counts)
    )
    return DiscreteDist(atoms)


def exact_quadratic_concentration(
    c: Sequence[Sequence[RationalLike]],
    dists: Sequence[DiscreteDist],
    budget: int = DEFAULT_ENUM_BUDGET,
) -> tuple[Fraction, Fraction]:
    """(sup atom mass, its location) for the quadratic form."""
    x, mass = biggest_jump(quadratic_form_law(c, dists, budget))
    return mass, x


Interval = tuple[RationalLike | None, RationalLike | None]


def _in_interval(x, lo: Fraction | None, hi: Fraction | None) -> bool:
    if lo is not None and x < lo:
        return False
    if hi is not None and x > hi:
        return False
    return True


def verify_decoupling(
    c: Sequence[Sequence[RationalLike]],
    dists: Sequence[DiscreteDist],
    s1: Sequence[int],
    s2: Sequence[int],
    interval: Interval,
    budget: int = DEFAULT_ENUM_BUDGET,
) -> tuple[Fraction, Fraction, bool]:
    """Exact check of the decoupling inequality for one quadratic form.

    Variables are numbered 1..n.  With X the s1-coordinates, Y the
    s2-coordinates, and X' an independent copy of X, returns

        (P{phi(X,Y) in I}^2,  P{phi(X,Y) in I and phi(X',Y) in I},  lhs <= rhs).

    The interval is closed, with None endpoints meaning unbounded.
    """
    n = len(dists)
    cc = _parse_symmetric_coeffs(c, n)
    ones = sorted(set(s1))
    twos = sorted(set(s2))
    if sorted(ones + twos) != list(range(1, n + 1)):
        raise ConfigError("s1 and s2 must partition the variables 1..n")
    lo = as_fraction(interval[0]) if interval[0] is not None else None
    hi = as_fraction(interval[1]) if interval[1] is not None else None
    if lo is not None and hi is not None and lo > hi:
        raise ConfigError(f"empty interval [{lo}, {hi}]")
    s1_idx = [i - 1 for i in ones]

    def phi_of(values: Sequence) -> Fraction:
        total = Fraction(0)
        for i in range(n):
            vi = values[i]
            if not vi:
                continue
            row = cc[i]
            s = Fraction(0)
            for j in range(n):
                if values[j]:
                    s += row[j] * values[j]
            total += vi * s
        return total

    total_outcomes = math.prod(d.size for d in dists) * math.prod(
        dists[i].size for i in s1_idx
    )
    if total_outcomes > budget:
        raise BudgetError(f"enumeration needs {total_outcomes} outcomes; budget is {budget}")

    lhs = Fraction(0)
    rhs = Fraction(0)
    copy_dists = [dists[i] for i in s1_idx]
    for values, p in joint_outcomes(dists, budget):
        if not _in_interval(phi_of(values), lo, hi):
            continue
        lhs += p
        # swap in every outcome of the independent copy on the s1 coordinates
        for copy_values, q in joint_outcomes(copy_dists, budget):
            swapped = list(values)
            for idx, v in zip(s1_idx, copy_values):
                swapped[idx] = v
            if _in_interval(phi_of(swapped), lo, hi):
                rhs += p * q
    lhs_sq = lhs * lhs
    return lhs_sq, rhs, lhs_sq <= rhs


def exact_border_law(
    mat: ExactMatrix, scheme: EntryScheme, budget: int = DEFAULT_ENUM_BUDGET
) -> ExactLaw:
    """Exact law of the rank increment when a symmetric matrix is bordered by
    a random column u, mirrored row, and corner d drawn from the scheme at
    size n+1."""
    m, n = mat.shape
    if m != n or not mat.is_symmetric:
        raise ConfigError("bordering requires a symmetric square matrix")
    cells = [scheme.resolve(i, n + 1, n + 1) for i in range(1, n + 2)]
    base_rank = rank(mat)
    base_rows = [list(row) for row in mat.rows]
    acc: dict[Fraction, Fraction] = {}
    for values, p in joint_outcomes(cells, budget):
        u, d = values[:n], values[n]
        bordered = [row + [x] for row, x in zip(base_rows, u)]
        bordered.append(list(u) + [d])
        inc = Fraction(rank_rows(bordered) - base_rank)
        acc[inc] = acc.get(inc, Fraction(0)) + p
    return DiscreteDist(tuple(sorted(acc.items())))


def exact_rank_process(
    scheme: EntryScheme,
    n_max: int,
    kappa: float | None = None,
    budget: int = DEFAULT_ENUM_BUDGET,
) -> list[float]:
    """E[X_n] for n = 1..n_max, where X_n = (kappa^(-1/8))^(n - rank) on
    singular outcomes and 0 otherwise.

    Probabilities and ranks are exact; only the irrational kappa^(-1/8) power
    is floating point.  With kappa omitted, each size uses the scheme's own
    biggest-jump profile at that size.
    """
    if n_max < 1:
        raise ConfigError(f"n_max must be >= 1, got {n_max}")
    if not scheme.symmetric_ok():
        raise ConfigError("rank process needs a symmetric scheme")
    out: list[float] = []
    for n in range(1, n_max + 1):
        k = float(kappa_n(scheme, n)) if kappa is None else kappa
        if not 0.0 < k < 1.0:
            raise ConfigError(f"kappa must lie in (0, 1), got {k}")
        growth = k ** (-1.0 / 8.0)
        expectation = 0.0
        for values, p in joint_outcomes(_upper_cells(scheme, n), budget):
            deficiency = n - rank_rows(_symmetric_rows(values, n))
            if deficiency > 0:
                expectation += float(p) * growth**deficiency
        out.append(expectation)
    return out


def first_row_zero_prob(scheme: EntryScheme, n: int, kind: str) -> Fraction:
    """Exact probability that the entire first row is zero."""
    if kind not in ("ginibre", "wigner"):
        raise ConfigError(f"kind must be 'ginibre' or 'wigner', got {kind!r}")
    p = Fraction(1)
    for j in range(1, n + 1):
        p *= scheme.resolve(1, j, n).mass_at(0)
        if p == 0:
            return p
    return p
