"""Finite-support rational distributions and their concentration algebra.

Atoms are (value, mass) pairs of exact ``fractions.Fraction``s, kept sorted by
value.  All probability arithmetic (convolution, window masses, biggest jump)
is exact; floats only appear when a caller asks for them.

Sampling is exact as well: a draw picks one uniform integer in ``[0, D)`` where
``D`` is the common denominator of the masses, so sampled frequencies follow
the rational masses with no floating-point thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import ConfigError

RationalLike = Union[Fraction, int, str]


def as_fraction(x: RationalLike) -> Fraction:
    """Parse an exact rational from a Fraction, int, or 'p/q' string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):  # bool is an int subclass; reject it explicitly
        raise ConfigError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse rational from {x!r}: {exc}") from None
    raise ConfigError(f"not a rational: {x!r} (floats are not accepted; pass a string)")


@dataclass(frozen=True)
class DiscreteDist:
    """A finite-support distribution with exact rational atoms.

    ``atoms`` is a tuple of (value, mass) pairs with strictly increasing
    values, strictly positive masses, and masses summing to exactly 1.
    """

    atoms: tuple[tuple[Fraction, Fraction], ...]

    def __hash__(self) -> int:
        # Fraction hashing is slow enough to dominate cache lookups keyed by
        # distributions, so memoize the structural hash.
        cached = self.__dict__.get("_hash_memo")
        if cached is None:
            cached = hash(self.atoms)
            object.__setattr__(self, "_hash_memo", cached)
        return cached

    def __post_init__(self) -> None:
        if not self.atoms:
            raise ConfigError("distribution needs at least one atom")
        total = Fraction(0)
        prev = None
        for value, mass in self.atoms:
            if not isinstance(value, Fraction) or not isinstance(mass, Fraction):
                raise ConfigError("atoms must hold Fraction pairs; use from_pairs()")
            if mass <= 0:
                raise ConfigError(f"atom mass must be positive, got {mass}")
            if prev is not None and value <= prev:
                raise ConfigError("atom values must be strictly increasing")
            prev = value
            total += mass
        if total != 1:
            raise ConfigError(f"atom masses must sum to 1, got {total}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[RationalLike, RationalLike]]) -> "DiscreteDist":
        """Build from (value, mass) pairs; sorts and merges duplicate values."""
        acc: dict[Fraction, Fraction] = {}
        for value, mass in pairs:
            v, m = as_fraction(value), as_fraction(mass)
            if m == 0:
                continue
            acc[v] = acc.get(v, Fraction(0)) + m
        return cls(tuple(sorted(acc.items())))

    @classmethod
    def point(cls, value: RationalLike) -> "DiscreteDist":
        return cls(((as_fraction(value), Fraction(1)),))

    @classmethod
    def bernoulli(cls, p: RationalLike) -> "DiscreteDist":
        """Mass p at 1 and 1-p at 0 (degenerate endpoints allowed)."""
        p = as_fraction(p)
        if not 0 <= p <= 1:
            raise ConfigError(f"bernoulli parameter must lie in [0, 1], got {p}")
        if p == 0:
            return cls.point(0)
        if p == 1:
            return cls.point(1)
        return cls(((Fraction(0), 1 - p), (Fraction(1), p)))

    @classmethod
    def rademacher(cls) -> "DiscreteDist":
        return cls(((Fraction(-1), Fraction(1, 2)), (Fraction(1), Fraction(1, 2))))

    @classmethod
    def uniform_int(cls, lo: int, hi: int) -> "DiscreteDist":
        if hi < lo:
            raise ConfigError(f"uniform_int needs lo <= hi, got [{lo}, {hi}]")
        k = hi - lo + 1
        return cls(tuple((Fraction(v), Fraction(1, k)) for v in range(lo, hi + 1)))

    # -- views -------------------------------------------------------------

    @cached_property
    def values(self) -> tuple[Fraction, ...]:
        return tuple(v for v, _ in self.atoms)

    @cached_property
    def masses(self) -> tuple[Fraction, ...]:
        return tuple(m for _, m in self.atoms)

    @property
    def size(self) -> int:
        return len(self.atoms)

    @property
    def is_degenerate(self) -> bool:
        return len(self.atoms) == 1

    def mass_at(self, value: RationalLike) -> Fraction:
        v = as_fraction(value)
        for val, m in self.atoms:
            if val == v:
                return m
            if val > v:
                break
        return Fraction(0)

    @cached_property
    def sampler(self) -> "AtomSampler":
        return AtomSampler.for_dist(self)

    def __repr__(self) -> str:  # compact: DiscreteDist({0: 1/2, 1: 1/2})
        inner = ", ".join(f"{v}: {m}" for v, m in self.atoms)
        return f"DiscreteDist({{{inner}}})"


@dataclass(frozen=True)
class AtomSampler:
    """Exact inversion sampler for one distribution.

    One draw consumes one uniform integer in [0, denominator); the atom is the
    bucket the integer falls into under the cumulative numerators.
    """

    values: tuple[Fraction, ...]
    denominator: int
    cumulative: np.ndarray  # int64, strictly increasing, last == denominator
    int_values: np.ndarray | None  # int64 view of values when all are integers
    equiprobable: bool  # all atoms share mass 1/denominator, so index == draw

    @classmethod
    def for_dist(cls, dist: DiscreteDist) -> "AtomSampler":
        denom = math.lcm(*(m.denominator for m in dist.masses))
        if denom > 2**62:
            raise ConfigError("mass denominators too large for exact integer sampling")
        acc = 0
        cum = []
        for m in dist.masses:
            acc += m.numerator * (denom // m.denominator)
            cum.append(acc)
        int_values: np.ndarray | None = None
        if all(v.denominator == 1 for v in dist.values):
            iv = [v.numerator for v in dist.values]
            if all(-(2**62) < x < 2**62 for x in iv):
                int_values = np.asarray(iv, dtype=np.int64)
        return cls(
            dist.values,
            denom,
            np.asarray(cum, dtype=np.int64),
            int_values,
            denom == dist.size,
        )

    def draw_indices(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Atom indices for `size` consecutive draws from `rng`."""
        u = rng.integers(0, self.denominator, size=size, dtype=np.int64)
        if self.equiprobable:
            return u
        return np.searchsorted(self.cumulative, u, side="right")

    def draw_one(self, rng: np.random.Generator) -> Fraction:
        u = int(rng.integers(0, self.denominator, dtype=np.int64))
        return self.values[int(np.searchsorted(self.cumulative, u, side="right"))]


@dataclass(frozen=True)
class JumpProfile:
    """Biggest jump of a law together with its safe window half-width.

    * ``kappa`` — largest atom mass; ``x_kappa`` — smallest value attaining it.
    * ``delta`` — half the minimal gap between consecutive support points
      (1 for a point mass), so every closed window of length ``delta``
      contains at most one atom.
    * ``kappa_delta`` — the window concentration at width ``delta``, which for
      finite support equals ``kappa``.
    """

    x_kappa: Fraction
    kappa: Fraction
    kappa_delta: Fraction
    delta: Fraction


# -- operations -------------------------------------------------------------


def biggest_jump(dist: DiscreteDist) -> tuple[Fraction, Fraction]:
    """(value, mass) of the largest atom; ties go to the smallest value."""
    best_v, best_m = dist.atoms[0]
    for v, m in dist.atoms[1:]:
        if m > best_m:
            best_v, best_m = v, m
    return best_v, best_m


def levy_concentration(dist: DiscreteDist, lam: RationalLike) -> Fraction:
    """Largest mass of a closed window [x, x + lam], exact over rationals.

    The optimum is attained with the window's left edge at a support point,
    so a two-pointer sweep over the sorted atoms suffices.
    """
    lam = as_fraction(lam)
    if lam < 0:
        raise ConfigError(f"window length must be nonnegative, got {lam}")
    values, masses = dist.values, dist.masses
    best = Fraction(0)
    window = Fraction(0)
    j = 0
    for i, left in enumerate(values):
        while j < len(values) and values[j] <= left + lam:
            window += masses[j]
            j += 1
        if window > best:
            best = window
        window -= masses[i]
    return best


def kappa_delta_profile(dist: DiscreteDist) -> JumpProfile:
    """Biggest jump plus the half-minimal-gap window width delta.

    With windows no wider than delta, window concentration equals the biggest
    jump, so ``kappa_delta == kappa`` for finite support.
    """
    x_kappa, kappa = biggest_jump(dist)
    if dist.is_degenerate:
        delta = Fraction(1)
    else:
        values = dist.values
        delta = min(b - a for a, b in zip(values, values[1:])) / 2
    return JumpProfile(x_kappa=x_kappa, kappa=kappa, kappa_delta=kappa, delta=delta)


def convolve(a: DiscreteDist, b: DiscreteDist) -> DiscreteDist:
    """Law of the sum of independent draws from `a` and `b`."""
    acc: dict[Fraction, Fraction] = {}
    for va, ma in a.atoms:
        for vb, mb in b.atoms:
            v = va + vb
            acc[v] = acc.get(v, Fraction(0)) + ma * mb
    return DiscreteDist(tuple(sorted(acc.items())))


def scale_dist(dist: DiscreteDist, beta: RationalLike) -> DiscreteDist:
    """Law of beta * X for a nonzero rational beta."""
    beta = as_fraction(beta)
    if beta == 0:
        raise ConfigError("scale factor must be nonzero")
    pairs = [(beta * v, m) for v, m in dist.atoms]
    if beta < 0:
        pairs.reverse()
    return DiscreteDist(tuple(pairs))


def difference_dist(dist: DiscreteDist) -> DiscreteDist:
    """Law of X - X' for two independent copies of the distribution."""
    return convolve(dist, scale_dist(dist, -1))


def sample(dist: DiscreteDist, rng: np.random.Generator) -> Fraction:
    """One exact draw."""
    return dist.sampler.draw_one(rng)


def sample_values(dist: DiscreteDist, rng: np.random.Generator, size: int) -> list[Fraction]:
    """`size` exact draws, in draw order."""
    idx = dist.sampler.draw_indices(rng, size)
    values = dist.values
    return [values[int(i)] for i in idx]


# -- JSON literals -----------------------------------------------------------


def dist_from_json(obj: object) -> DiscreteDist:
    """Parse a distribution literal.

    Accepted forms::

        {"atoms": [["0", "1/2"], ["1", "1/2"]]}
        {"bernoulli": "3/10"}
        {"rademacher": true}
        {"uniform_int": [-1, 1]}
        {"point": "2/3"}
    """
    if not isinstance(obj, Mapping):
        raise ConfigError(f"distribution literal must be an object, got {type(obj).__name__}")
    keys = set(obj)
    if keys == {"atoms"}:
        pairs = obj["atoms"]
        if not isinstance(pairs, Sequence) or isinstance(pairs, str):
            raise ConfigError("'atoms' must be a list of [value, mass] pairs")
        parsed = []
        for pair in pairs:
            if not isinstance(pair, Sequence) or isinstance(pair, str) or len(pair) != 2:
                raise ConfigError(f"bad atom entry {pair!r}; expected [value, mass]")
            parsed.append((pair[0], pair[1]))
        return DiscreteDist.from_pairs(parsed)
    if keys == {"bernoulli"}:
        return DiscreteDist.bernoulli(obj["bernoulli"])
    if keys == {"rademacher"}:
        if obj["rademacher"] is not True:
            raise ConfigError('rademacher literal must be {"rademacher": true}')
        return DiscreteDist.rademacher()
    if keys == {"uniform_int"}:
        rng_pair = obj["uniform_int"]
        if (
            not isinstance(rng_pair, Sequence)
            or len(rng_pair) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in rng_pair)
        ):
            raise ConfigError('uniform_int literal must be {"uniform_int": [lo, hi]}')
        return DiscreteDist.uniform_int(rng_pair[0], rng_pair[1])
    if keys == {"point"}:
        return DiscreteDist.point(obj["point"])
    raise ConfigError(f"unrecognized distribution literal with keys {sorted(keys)}")


def dist_to_json(dist: DiscreteDist) -> dict:
    return {"atoms": [[str(v), str(m)] for v, m in dist.atoms]}
