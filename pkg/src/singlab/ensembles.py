"""Entry schemes, seeded streams, and exact matrix samplers.

A scheme maps (row, column, size) to a finite-support rational law.  Samplers
draw whole matrices from counter-based streams so that a (scheme, kind, n,
seed, trial) tuple pins the matrix down exactly, independent of how trials are
scheduled across workers.

Draw order inside one matrix is row-major over the cells the sampler owns
(square: all n^2 cells; symmetric: upper triangle including the diagonal;
adjacency: strict upper triangle).  Point-mass cells consume no randomness.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Mapping, Sequence, Union

import numpy as np

from .dist import (
    AtomSampler,
    DiscreteDist,
    RationalLike,
    as_fraction,
    biggest_jump,
    dist_from_json,
    dist_to_json,
)
from .errors import ConfigError
from .xlinalg import ExactMatrix

Value = Union[Fraction, int]

_ROUND_DENOM = 2**32
_MIN_DENSITY = Fraction(1, 2**32)
_MAX_DENSITY = Fraction(1, 2)


@dataclass(frozen=True)
class DensityRule:
    """Edge/entry density p(n).

    Exactly one of three forms:

    * fixed rational p;
    * power profile n^(alpha-1) — evaluated in double precision, rounded to
      denominator 2^32 and clipped to [2^-32, 1/2], except alpha = 0 which is
      kept exact as 1/n;
    * logarithmic profile c * ln(n) / n^beta, rounded and clipped the same way.
    """

    fixed: Fraction | None = None
    alpha: float | None = None
    c: float | None = None
    beta: float | None = None

    def __post_init__(self) -> None:
        forms = [self.fixed is not None, self.alpha is not None, self.c is not None]
        if sum(forms) != 1:
            raise ConfigError("density rule needs exactly one of: p, alpha, (c, beta)")
        if self.fixed is not None and not 0 < self.fixed <= 1:
            raise ConfigError(f"fixed density must lie in (0, 1], got {self.fixed}")
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if (self.c is None) != (self.beta is None):
            raise ConfigError("c and beta must be given together")
        if self.c is not None:
            if self.c <= 0:
                raise ConfigError(f"c must be positive, got {self.c}")
            if not 0.0 < self.beta < 1.0:  # type: ignore[operator]
                raise ConfigError(f"beta must lie in (0, 1), got {self.beta}")

    def density(self, n: int) -> Fraction:
        if n < 1:
            raise ConfigError(f"n must be >= 1, got {n}")
        if self.fixed is not None:
            return self.fixed
        if self.alpha is not None:
            if self.alpha == 0.0:
                return Fraction(1, n)  # kept exact: reference laws need (1 - 1/n)^n
            return _round_clip(float(n) ** (self.alpha - 1.0))
        return _round_clip(self.c * math.log(n) / float(n) ** self.beta)  # type: ignore[operator]

    def raw_density(self, n: int) -> float:
        """The unrounded, unclipped float value of the profile."""
        if self.fixed is not None:
            return float(self.fixed)
        if self.alpha is not None:
            return float(n) ** (self.alpha - 1.0)
        return self.c * math.log(n) / float(n) ** self.beta  # type: ignore[operator]

    def to_json(self) -> dict:
        if self.fixed is not None:
            return {"p": str(self.fixed)}
        if self.alpha is not None:
            return {"alpha": self.alpha}
        return {"c": self.c, "beta": self.beta}

    @classmethod
    def from_json(cls, obj: object) -> "DensityRule":
        if not isinstance(obj, Mapping):
            raise ConfigError("density rule must be an object")
        keys = set(obj)
        if keys == {"p"}:
            return cls(fixed=as_fraction(obj["p"]))
        if keys == {"alpha"}:
            return cls(alpha=_as_float(obj["alpha"], "alpha"))
        if keys == {"c", "beta"}:
            return cls(c=_as_float(obj["c"], "c"), beta=_as_float(obj["beta"], "beta"))
        raise ConfigError(f"unrecognized density rule with keys {sorted(keys)}")


def _as_float(x: object, name: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{name} must be a number, got {x!r}")
    return float(x)


def _round_clip(x: float) -> Fraction:
    p = Fraction(round(x * _ROUND_DENOM), _ROUND_DENOM)
    return min(max(p, _MIN_DENSITY), _MAX_DENSITY)


# -- schemes ------------------------------------------------------------------


class EntryScheme:
    """Maps 1-based (i, j, n) to the law of entry (i, j) at size n."""

    kind: str = ""

    def resolve(self, i: int, j: int, n: int) -> DiscreteDist:
        raise NotImplementedError

    def symmetric_ok(self) -> bool:
        """Whether resolve(i, j, n) == resolve(j, i, n) for all cells."""
        raise NotImplementedError

    def distinct_dists(self, n: int) -> list[DiscreteDist]:
        """The distinct entry laws at size n (small, for jump scans)."""
        seen: dict[DiscreteDist, None] = {}
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                seen.setdefault(self.resolve(i, j, n))
        return list(seen)

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class IIDScheme(EntryScheme):
    dist: DiscreteDist
    kind = "iid"

    def resolve(self, i: int, j: int, n: int) -> DiscreteDist:
        _check_cell(i, j, n)
        return self.dist

    def symmetric_ok(self) -> bool:
        return True

    def distinct_dists(self, n: int) -> list[DiscreteDist]:
        return [self.dist]

    def to_json(self) -> dict:
        return {"kind": "iid", "dist": dist_to_json(self.dist)}


@dataclass(frozen=True)
class TableScheme(EntryScheme):
    """A fixed n x n table of laws; only usable at its own size."""

    table: tuple[tuple[DiscreteDist, ...], ...]
    kind = "table"

    def __post_init__(self) -> None:
        n = len(self.table)
        if n == 0 or any(len(row) != n for row in self.table):
            raise ConfigError("table must be square and nonempty")

    def resolve(self, i: int, j: int, n: int) -> DiscreteDist:
        _check_cell(i, j, n)
        if n != len(self.table):
            raise ConfigError(f"table scheme is {len(self.table)} x {len(self.table)}, asked for n={n}")
        return self.table[i - 1][j - 1]

    def symmetric_ok(self) -> bool:
        n = len(self.table)
        return all(self.table[i][j] == self.table[j][i] for i in range(n) for j in range(i))

    def distinct_dists(self, n: int) -> list[DiscreteDist]:
        if n != len(self.table):
            raise ConfigError(f"table scheme is {len(self.table)} x {len(self.table)}, asked for n={n}")
        seen: dict[DiscreteDist, None] = {}
        for row in self.table:
            for d in row:
                seen.setdefault(d)
        return list(seen)

    def to_json(self) -> dict:
        return {"kind": "table", "entries": [[dist_to_json(d) for d in row] for row in self.table]}


@dataclass(frozen=True)
class SparseBernoulliScheme(EntryScheme):
    """All entries Bernoulli(p(n)) on {0, 1}."""

    rule: DensityRule
    kind = "sparse_bernoulli"

    def resolve(self, i: int, j: int, n: int) -> DiscreteDist:
        _check_cell(i, j, n)
        return DiscreteDist.bernoulli(self.rule.density(n))

    def symmetric_ok(self) -> bool:
        return True

    def distinct_dists(self, n: int) -> list[DiscreteDist]:
        return [DiscreteDist.bernoulli(self.rule.density(n))]

    def to_json(self) -> dict:
        return {"kind": "sparse_bernoulli", "rule": self.rule.to_json()}


@dataclass(frozen=True)
class BandedScheme(EntryScheme):
    """`dist` within the band |i - j| <= width, a point mass at 0 outside."""

    width: int
    dist: DiscreteDist
    kind = "banded"

    def __post_init__(self) -> None:
        if self.width < 0:
            raise ConfigError(f"band width must be >= 0, got {self.width}")

    def resolve(self, i: int, j: int, n: int) -> DiscreteDist:
        _check_cell(i, j, n)
        return self.dist if abs(i - j) <= self.width else DiscreteDist.point(0)

    def symmetric_ok(self) -> bool:
        return True

    def distinct_dists(self, n: int) -> list[DiscreteDist]:
        if n - 1 > self.width:
            return [self.dist, DiscreteDist.point(0)]
        return [self.dist]

    def to_json(self) -> dict:
        return {"kind": "banded", "w": self.width, "dist": dist_to_json(self.dist)}


@dataclass(frozen=True)
class GraphScheme(EntryScheme):
    """Adjacency entries: zero diagonal, Bernoulli(p(n)) off the diagonal."""

    rule: DensityRule
    kind = "graph"

    def resolve(self, i: int, j: int, n: int) -> DiscreteDist:
        _check_cell(i, j, n)
        if i == j:
            return DiscreteDist.point(0)
        return DiscreteDist.bernoulli(self.rule.density(n))

    def symmetric_ok(self) -> bool:
        return True

    def distinct_dists(self, n: int) -> list[DiscreteDist]:
        if n == 1:
            return [DiscreteDist.point(0)]
        return [DiscreteDist.point(0), DiscreteDist.bernoulli(self.rule.density(n))]

    def to_json(self) -> dict:
        return {"kind": "graph", "rule": self.rule.to_json()}


def _check_cell(i: int, j: int, n: int) -> None:
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not (1 <= i <= n and 1 <= j <= n):
        raise ConfigError(f"cell ({i}, {j}) outside 1..{n}")


def scheme_from_json(obj: object) -> EntryScheme:
    """Parse a scheme literal.

    Canonical (kind-discriminated) forms::

        {"kind": "iid", "dist": <dist literal>}
        {"kind": "table", "entries": [[<dist>, ...], ...]}
        {"kind": "sparse_bernoulli", "rule": <density rule>}
        {"kind": "banded", "w": <int>, "dist": <dist literal>}
        {"kind": "graph", "rule": <density rule>}

    The compact single-key shorthand ({"iid": <dist>}, {"graph": <rule>}, ...)
    is accepted as well.
    """
    if not isinstance(obj, Mapping):
        raise ConfigError("scheme literal must be an object")
    keys = set(obj)
    if "kind" in keys:
        kind = obj["kind"]
        if kind == "iid" and keys == {"kind", "dist"}:
            return IIDScheme(dist_from_json(obj["dist"]))
        if kind == "table" and keys == {"kind", "entries"}:
            return _table_from_json(obj["entries"])
        if kind == "sparse_bernoulli" and keys == {"kind", "rule"}:
            return SparseBernoulliScheme(DensityRule.from_json(obj["rule"]))
        if kind == "banded" and keys == {"kind", "w", "dist"}:
            return _banded_from_json(obj["w"], obj["dist"])
        if kind == "graph" and keys == {"kind", "rule"}:
            return GraphScheme(DensityRule.from_json(obj["rule"]))
        raise ConfigError(
            f"unrecognized scheme literal: kind={kind!r} with keys {sorted(keys)}"
        )
    if keys == {"iid"}:
        return IIDScheme(dist_from_json(obj["iid"]))
    if keys == {"table"}:
        return _table_from_json(obj["table"])
    if keys == {"sparse_bernoulli"}:
        return SparseBernoulliScheme(DensityRule.from_json(obj["sparse_bernoulli"]))
    if keys == {"banded"}:
        spec = obj["banded"]
        if not isinstance(spec, Mapping) or set(spec) not in ({"width", "dist"}, {"w", "dist"}):
            raise ConfigError('banded literal must be {"banded": {"w": w, "dist": d}}')
        return _banded_from_json(spec.get("w", spec.get("width")), spec["dist"])
    if keys == {"graph"}:
        return GraphScheme(DensityRule.from_json(obj["graph"]))
    raise ConfigError(f"unrecognized scheme literal with keys {sorted(keys)}")


def _table_from_json(rows: object) -> TableScheme:
    if not isinstance(rows, Sequence) or isinstance(rows, str):
        raise ConfigError("table entries must be an array of arrays of distributions")
    return TableScheme(tuple(tuple(dist_from_json(d) for d in row) for row in rows))


def _banded_from_json(width: object, dist: object) -> BandedScheme:
    if isinstance(width, bool) or not isinstance(width, int):
        raise ConfigError("band width must be an integer")
    return BandedScheme(width, dist_from_json(dist))


def kappa_n(scheme: EntryScheme, n: int) -> Fraction:
    """Largest biggest-jump mass over the non-degenerate entry laws at size n.

    Point-mass cells carry no randomness and are excluded so that structurally
    zero cells (band exteriors, adjacency diagonals) do not force the profile
    to 1; if every cell is a point mass the profile is 1.
    """
    dists = scheme.distinct_dists(n)
    live = [d for d in dists if not d.is_degenerate]
    if not live:
        return Fraction(1)
    return max(biggest_jump(d)[1] for d in live)


# -- seeded streams -----------------------------------------------------------


@dataclass(frozen=True)
class SeedSpec:
    """Derives independent counter-based streams per (experiment, n, trial).

    Philox key = (master_seed, 64-bit digest of experiment_id); counter
    encodes (trial, n).  Distinct tuples give independent streams, so trial
    counts do not depend on worker scheduling.
    """

    master_seed: int
    experiment_id: str = ""

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError(f"master_seed must be a 64-bit integer, got {self.master_seed}")

    @cached_property
    def _key_words(self) -> np.ndarray:
        """Philox key words: low word the master seed, high word the id digest."""
        digest = hashlib.blake2b(self.experiment_id.encode(), digest_size=8).digest()
        words = np.array(
            [self.master_seed, int.from_bytes(digest, "little")], dtype=np.uint64
        )
        words.setflags(write=False)
        return words

    def stream(self, n: int = 0, trial: int = 0) -> np.random.Generator:
        # 256-bit counter with low word = trial, second word = n
        counter = np.zeros(4, dtype=np.uint64)
        try:
            counter[0] = trial
            counter[1] = n
        except (OverflowError, ValueError) as exc:
            raise ConfigError(f"n and trial must be 64-bit nonnegative, got ({n}, {trial})") from exc
        return np.random.Generator(np.random.Philox(counter=counter, key=self._key_words))

    def cursor(self) -> "StreamCursor":
        """A reusable single-thread view over this spec's (n, trial) streams."""
        return StreamCursor(self)


class StreamCursor:
    """Rewindable generator over a SeedSpec's stream grid.

    ``at(n, trial)`` resets one shared Philox generator to the exact state a
    fresh ``SeedSpec.stream(n, trial)`` would start in, skipping per-call
    construction cost.  Every call returns the same generator object, valid
    only until the next ``at``; use one cursor per thread.
    """

    __slots__ = ("_bit_gen", "_gen", "_state", "_counter")

    def __init__(self, spec: SeedSpec) -> None:
        self._bit_gen = np.random.Philox(
            counter=np.zeros(4, dtype=np.uint64), key=spec._key_words
        )
        self._gen = np.random.Generator(self._bit_gen)
        self._state = self._bit_gen.state
        self._counter = self._state["state"]["counter"]

    def at(self, n: int, trial: int) -> np.random.Generator:
        counter = self._counter
        try:
            counter[0] = trial
            counter[1] = n
        except (OverflowError, ValueError) as exc:
            raise ConfigError(f"n and trial must be 64-bit nonnegative, got ({n}, {trial})") from exc
        state = self._state
        state["buffer_pos"] = 4
        state["has_uint32"] = 0
        self._bit_gen.state = state
        return self._gen


RngLike = Union[np.random.Generator, SeedSpec, int]


def as_stream(seed: RngLike, n: int = 0, trial: int = 0) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, SeedSpec):
        return seed.stream(n=n, trial=trial)
    if isinstance(seed, (int, np.integer)) and not isinstance(seed, bool):
        return SeedSpec(int(seed)).stream(n=n, trial=trial)
    raise ConfigError(f"cannot derive a stream from {seed!r}")


# -- matrix draws --------------------------------------------------------------


@dataclass(frozen=True)
class _DrawPlan:
    """Precomputed draw recipe for a fixed cell list.

    ``fill`` holds the point-mass values (and placeholder zeros for random
    cells); ``live_idx`` the positions that consume randomness, in draw order.
    ``shared`` is set when every random cell follows one common law, enabling
    a single vectorized draw; otherwise ``samplers`` drives per-cell draws.
    """

    fill: tuple[Value, ...]
    live_idx: tuple[int, ...]
    shared: AtomSampler | None
    samplers: tuple[AtomSampler, ...] | None

    @classmethod
    def for_cells(cls, dists: Sequence[DiscreteDist]) -> "_DrawPlan":
        fill: list[Value] = [0] * len(dists)
        live_idx = []
        for k, d in enumerate(dists):
            if d.is_degenerate:
                v = d.values[0]
                fill[k] = v.numerator if v.denominator == 1 else v
            else:
                live_idx.append(k)
        shared: AtomSampler | None = None
        samplers: tuple[AtomSampler, ...] | None = None
        if live_idx:
            first = dists[live_idx[0]]
            if all(dists[k] is first or dists[k] == first for k in live_idx[1:]):
                shared = first.sampler
            else:
                samplers = tuple(dists[k].sampler for k in live_idx)
        return cls(tuple(fill), tuple(live_idx), shared, samplers)

    def draw(self, rng: np.random.Generator) -> list[Value]:
        values = list(self.fill)
        if self.shared is not None:
            sampler = self.shared
            picks = sampler.draw_indices(rng, len(self.live_idx))
            if sampler.int_values is not None:
                drawn = sampler.int_values[picks].tolist()
            else:
                vals = sampler.values
                drawn = [vals[int(p)] for p in picks]
            for k, v in zip(self.live_idx, drawn):
                values[k] = v
        elif self.samplers is not None:
            for k, sampler in zip(self.live_idx, self.samplers):
                v = sampler.draw_one(rng)
                values[k] = v.numerator if v.denominator == 1 else v
        return values


def _draw_cells(dists: Sequence[DiscreteDist], rng: np.random.Generator) -> list[Value]:
    """One exact draw per cell, in the given cell order.

    Point-mass cells consume no randomness.  When every random cell shares one
    law the draw is a single vectorized call; otherwise cells draw one at a
    time in order.
    """
    return _DrawPlan.for_cells(dists).draw(rng)


@lru_cache(maxsize=512)
def _square_plan(scheme: EntryScheme, n: int) -> _DrawPlan:
    return _DrawPlan.for_cells(
        [scheme.resolve(i, j, n) for i in range(1, n + 1) for j in range(1, n + 1)]
    )


@lru_cache(maxsize=512)
def _upper_plan(scheme: EntryScheme, n: int) -> _DrawPlan:
    return _DrawPlan.for_cells(
        [scheme.resolve(i, j, n) for i in range(1, n + 1) for j in range(i, n + 1)]
    )


@lru_cache(maxsize=512)
def _strict_upper_plan(scheme: EntryScheme, n: int) -> _DrawPlan:
    return _DrawPlan.for_cells(
        [scheme.resolve(i, j, n) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    )


@lru_cache(maxsize=512)
def _border_plan(scheme: EntryScheme, n: int) -> _DrawPlan:
    """Cells for growing an n x n symmetric matrix to size n+1."""
    return _DrawPlan.for_cells([scheme.resolve(i, n + 1, n + 1) for i in range(1, n + 2)])


def draw_square_rows(scheme: EntryScheme, n: int, rng: np.random.Generator) -> list[list[Value]]:
    """All n^2 entries independent, row-major draw order."""
    flat = _square_plan(scheme, n).draw(rng)
    return [flat[r * n : (r + 1) * n] for r in range(n)]


def draw_symmetric_rows(scheme: EntryScheme, n: int, rng: np.random.Generator) -> list[list[Value]]:
    """Upper triangle (including diagonal) independent, mirrored below."""
    if not scheme.symmetric_ok():
        raise ConfigError("scheme is not symmetric; cannot draw a symmetric matrix")
    flat = _upper_plan(scheme, n).draw(rng)
    rows: list[list[Value]] = [[0] * n for _ in range(n)]
    k = 0
    for i in range(n):
        for j in range(i, n):
            v = flat[k]
            rows[i][j] = v
            rows[j][i] = v
            k += 1
    return rows


def draw_adjacency_rows(scheme: EntryScheme, n: int, rng: np.random.Generator) -> list[list[Value]]:
    """Strict upper triangle independent, zero diagonal, mirrored below."""
    if not isinstance(scheme, GraphScheme):
        raise ConfigError("adjacency draws need a graph scheme")
    flat = _strict_upper_plan(scheme, n).draw(rng)
    rows: list[list[Value]] = [[0] * n for _ in range(n)]
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            v = flat[k]
            rows[i][j] = v
            rows[j][i] = v
            k += 1
    return rows


def sample_ginibre(scheme: EntryScheme, n: int, seed: RngLike, trial: int = 0) -> ExactMatrix:
    """An n x n matrix with all entries independent."""
    rng = as_stream(seed, n=n, trial=trial)
    return ExactMatrix.from_rows(draw_square_rows(scheme, n, rng))


def sample_wigner(scheme: EntryScheme, n: int, seed: RngLike, trial: int = 0) -> ExactMatrix:
    """A symmetric n x n matrix with independent upper-triangle entries."""
    rng = as_stream(seed, n=n, trial=trial)
    return ExactMatrix.from_rows(draw_symmetric_rows(scheme, n, rng))


def sample_adjacency(scheme: EntryScheme, n: int, seed: RngLike, trial: int = 0) -> ExactMatrix:
    """A symmetric {0,1} adjacency matrix with a zero diagonal."""
    rng = as_stream(seed, n=n, trial=trial)
    return ExactMatrix.from_rows(draw_adjacency_rows(scheme, n, rng))


def grow_wigner_rows(
    rows: list[list[Value]], scheme: EntryScheme, rng: np.random.Generator
) -> list[list[Value]]:
    """Extend a symmetric matrix by one fresh bordering row/column.

    Draw order: border entries (1, n+1) .. (n, n+1), then the corner.
    """
    if not scheme.symmetric_ok():
        raise ConfigError("scheme is not symmetric; cannot grow a symmetric matrix")
    n = len(rows)
    border = _border_plan(scheme, n).draw(rng)
    grown = [row + [border[i]] for i, row in enumerate(rows)]
    grown.append(list(border))
    return grown


def grow_wigner(mat: ExactMatrix, scheme: EntryScheme, seed: RngLike, trial: int = 0) -> ExactMatrix:
    """One symmetric growth step, from size n to n+1."""
    m, n = mat.shape
    if m != n or not mat.is_symmetric:
        raise ConfigError("growth requires a symmetric square matrix")
    rng = as_stream(seed, n=n + 1, trial=trial)
    rows = [list(row) for row in mat.rows]
    return ExactMatrix.from_rows(grow_wigner_rows(rows, scheme, rng))
