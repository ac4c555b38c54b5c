"""Concentration-inequality bound evaluators.

These are asymptotic order bounds, evaluated in double precision (exact
rationals are reserved for probabilities computed by the oracle module).
The universal constant of the underlying inequalities is a knob (``c_kr``,
default 1.0); shape checks elsewhere either use 1.0 or compare orders.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import BudgetError, ConfigError, DegenerateInputError
from .xlinalg import DEFAULT_SUBSET_BUDGET


@dataclass(frozen=True)
class BoundConstants:
    """Configuration constants; the Kesten prefactor is always derived."""

    c_kr: float = 1.0

    def __post_init__(self) -> None:
        if not self.c_kr > 0:
            raise ConfigError(f"c_kr must be positive, got {self.c_kr}")

    @property
    def kesten_factor(self) -> float:
        return 4.0 * math.sqrt(2.0) * (1.0 + 9.0 * self.c_kr)


DEFAULT_CONSTANTS = BoundConstants()


@dataclass(frozen=True)
class BoundInput:
    """Per-summand window data for the window-mass inequalities.

    ``lambdas[i]`` is the window width for summand i, ``q_at_lambda[i]`` the
    summand's window concentration at that width, and ``q_at_L[i]`` its
    concentration at the target width L (needed by the refined bound).
    ``kappas``/``kappa_deltas`` optionally carry the jump profile of each
    summand for use with the jump-based bounds.
    """

    lambdas: tuple[float, ...]
    L: float
    q_at_lambda: tuple[float, ...]
    q_at_L: tuple[float, ...] | None = None
    kappas: tuple[float, ...] | None = None
    kappa_deltas: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        k = len(self.lambdas)
        if k == 0:
            raise ConfigError("need at least one summand")
        if not self.L > 0:
            raise ConfigError(f"L must be positive, got {self.L}")
        if any(not lam > 0 for lam in self.lambdas):
            raise ConfigError("window widths must be positive")
        for name, probs in (
            ("q_at_lambda", self.q_at_lambda),
            ("q_at_L", self.q_at_L),
            ("kappas", self.kappas),
            ("kappa_deltas", self.kappa_deltas),
        ):
            if probs is None:
                continue
            if len(probs) != k:
                raise ConfigError(f"{name} must have {k} entries, got {len(probs)}")
            if any(not 0.0 <= p <= 1.0 for p in probs):
                raise ConfigError(f"{name} entries must lie in [0, 1]")


def kr_bound(inp: BoundInput, consts: BoundConstants = DEFAULT_CONSTANTS) -> float:
    """Window-mass bound  C * L * (sum_i lam_i^2 (1 - q_i(lam_i)))^(-1/2).

    Requires every window width <= L and at least one q(lam) < 1.
    """
    if any(lam > inp.L for lam in inp.lambdas):
        raise ConfigError("every window width must be <= L")
    s = sum(lam * lam * (1.0 - q) for lam, q in zip(inp.lambdas, inp.q_at_lambda))
    if s <= 0.0:
        raise DegenerateInputError("all window masses are 1; no spread to work with")
    return consts.c_kr * inp.L / math.sqrt(s)


def kesten_bound(inp: BoundInput, consts: BoundConstants = DEFAULT_CONSTANTS) -> float:
    """Refined window-mass bound

        4*sqrt(2)*(1+9C) * L * sum_i lam_i^2 (1-q_i(lam_i)) q_i(L)
                          / (sum_i lam_i^2 (1-q_i(lam_i)))^(3/2).

    Requires every window width <= 2L and per-summand concentrations at L.
    """
    if inp.q_at_L is None:
        raise ConfigError("the refined bound needs q_at_L")
    if any(lam > 2.0 * inp.L for lam in inp.lambdas):
        raise ConfigError("every window width must be <= 2L")
    spread = sum(lam * lam * (1.0 - q) for lam, q in zip(inp.lambdas, inp.q_at_lambda))
    if spread <= 0.0:
        raise DegenerateInputError("all window masses are 1; no spread to work with")
    num = sum(
        lam * lam * (1.0 - q) * qL
        for lam, q, qL in zip(inp.lambdas, inp.q_at_lambda, inp.q_at_L)
    )
    return consts.kesten_factor * inp.L * num / spread**1.5


def linear_bound(
    kappas: Sequence[float],
    kappa_deltas: Sequence[float],
    consts: BoundConstants = DEFAULT_CONSTANTS,
) -> float:
    """Jump-based bound for linear combinations:

        kesten_factor * sum_i (1-kappa_i) kappa_delta_i
                      / (sum_i (1-kappa_delta_i))^(3/2)

    over the non-degenerate summands only (kappa_delta = 1 terms are dropped;
    a fully degenerate input is an error).
    """
    if len(kappas) != len(kappa_deltas) or not kappas:
        raise ConfigError("kappas and kappa_deltas must be equal-length and nonempty")
    for k, kd in zip(kappas, kappa_deltas):
        if not 0.0 <= k <= 1.0 or not 0.0 <= kd <= 1.0:
            raise ConfigError("jump masses must lie in [0, 1]")
    live = [(k, kd) for k, kd in zip(kappas, kappa_deltas) if kd < 1.0]
    if not live:
        raise DegenerateInputError("every summand is degenerate (kappa_delta = 1)")
    num = sum((1.0 - k) * kd for k, kd in live)
    den = sum(1.0 - kd for _, kd in live)
    return consts.kesten_factor * num / den**1.5


def linear_bound_simplified(
    kappa: float, n: int, consts: BoundConstants = DEFAULT_CONSTANTS
) -> float:
    """Homogeneous-jump form  C * kappa / sqrt((1-kappa)^3 * n)."""
    _check_kappa(kappa)
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    return consts.c_kr * kappa / math.sqrt((1.0 - kappa) ** 3 * n)


@dataclass(frozen=True)
class QuadraticBound:
    """Value and term breakdown of the quadratic-form jump bound."""

    value: float
    mean_term: float
    sup_term: float
    sup_size: int


def _ratio(pairs: Sequence[tuple[float, float]]) -> float:
    """sum (1-kappa) kappa_delta / (sum (1-kappa_delta))^(3/2) over pairs."""
    num = sum((1.0 - k) * kd for k, kd in pairs)
    den = sum(1.0 - kd for _, kd in pairs)
    return num / den**1.5


def quadratic_bound(
    neighbor_jumps: Sequence[Sequence[tuple[float, float]]],
    own_jumps: Sequence[tuple[float, float]],
    consts: BoundConstants = DEFAULT_CONSTANTS,
    budget: int = DEFAULT_SUBSET_BUDGET,
) -> QuadraticBound:
    """Jump-based bound for quadratic forms, split along a partition.

    ``own_jumps[j]`` is the (kappa, kappa_delta) profile of coordinate j in
    the second block; ``neighbor_jumps[j]`` holds the difference-law profiles
    (kappa_bar, kappa_bar_delta) of its coupled first-block coordinates, which
    must be non-empty.  The value is

        sqrt( c_kr * [ (1/s) * sum_j ratio(neighbor_jumps[j])
                       + sup_D ratio(own_jumps[D]) ] )

    with s the second-block size and the sup taken exactly over all D of size
    >= s/2 (BudgetError when that enumeration would exceed ``budget``).  At
    the default c_kr = 1 this is the bare bracket to the power 1/2.
    """
    s = len(own_jumps)
    if s == 0 or len(neighbor_jumps) != s:
        raise ConfigError("need one neighbor-jump list per second-block coordinate")
    for pairs in neighbor_jumps:
        if len(pairs) == 0:
            raise ConfigError("every second-block coordinate needs a non-empty neighbor set")
        for k, kd in pairs:
            _check_jump_pair(k, kd)
    for k, kd in own_jumps:
        _check_jump_pair(k, kd)

    mean_term = sum(_ratio(pairs) for pairs in neighbor_jumps) / s

    min_size = math.ceil(s / 2)
    planned = sum(math.comb(s, d) for d in range(min_size, s + 1))
    if planned > budget:
        raise BudgetError(f"sup over subsets needs {planned} evaluations; budget is {budget}")
    sup_term = -math.inf
    sup_size = 0
    for d in range(min_size, s + 1):
        for subset in itertools.combinations(range(s), d):
            r = _ratio([own_jumps[j] for j in subset])
            if r > sup_term:
                sup_term, sup_size = r, d
    value = math.sqrt(consts.c_kr * (mean_term + sup_term))
    return QuadraticBound(value=value, mean_term=mean_term, sup_term=sup_term, sup_size=sup_size)


def quadratic_bound_simplified(
    kappa: float, n: int, eps: float = 0.0, consts: BoundConstants = DEFAULT_CONSTANTS
) -> float:
    """Homogeneous form  [ C * kappa / sqrt((1-kappa)^3 * n^(1-eps)) ]^(1/2)."""
    _check_kappa(kappa)
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not 0.0 <= eps < 1.0:
        raise ConfigError(f"eps must lie in [0, 1), got {eps}")
    inner = consts.c_kr * kappa / math.sqrt((1.0 - kappa) ** 3 * float(n) ** (1.0 - eps))
    return math.sqrt(inner)


def _check_kappa(kappa: float) -> None:
    if not 0.0 < kappa < 1.0:
        raise ConfigError(f"kappa must lie in (0, 1), got {kappa}")


def _check_jump_pair(kappa: float, kappa_delta: float) -> None:
    if not 0.0 < kappa < 1.0 or not 0.0 < kappa_delta < 1.0:
        raise ConfigError(
            f"jump pairs must lie in (0, 1) x (0, 1), got ({kappa}, {kappa_delta})"
        )


# -- rank tail bounds ---------------------------------------------------------


def ginibre_tail(kappa: float, m: int, k: int, n: int) -> tuple[float, float, float]:
    """Tail bounds for rank events of an m x k corner inside size n:

    b1 bounds the chance a fresh column stays in a rank-k span (kappa^(m-k));
    b2 bounds a single rank deficit (kappa/(1-kappa) * kappa^(m-k));
    b3 is b2 with the C(n, k) choices of the deficit location.
    """
    _check_kappa(kappa)
    if k < 0 or k > m:
        raise ConfigError(f"need 0 <= k <= m, got k={k}, m={m}")
    if n < k:
        raise ConfigError(f"need n >= k for the C(n, k) factor, got n={n}, k={k}")
    b1 = kappa ** (m - k)
    b2 = kappa / (1.0 - kappa) * b1
    b3 = float(math.comb(n, k)) * b2
    return b1, b2, b3


# -- entropy search -----------------------------------------------------------

ENTROPY_GRID = 4096


def entropy(x: float) -> float:
    """Binary entropy  -x log2 x - (1-x) log2 (1-x)  with h(0) = h(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ConfigError(f"entropy argument must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def entropy_beta(alpha: float, kappa: float) -> float:
    """Largest grid point beta in (0, alpha) with

        g(beta) = h(beta)/log2(kappa) + beta  <=  alpha/2,

    on a grid of alpha * k / 4096.  Since log2(kappa) < 0 the h-term is
    negative, so small beta always qualifies and the search cannot fail; the
    alpha/2 target leaves slack under the strict plug-back inequality
    g(beta) < alpha.
    """
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"alpha must lie in (0, 1], got {alpha}")
    _check_kappa(kappa)
    log_kappa = math.log2(kappa)
    for k in range(ENTROPY_GRID - 1, 0, -1):
        beta = alpha * k / ENTROPY_GRID
        if entropy(beta) / log_kappa + beta <= alpha / 2.0:
            return beta
    return alpha / ENTROPY_GRID  # unreachable: k = 1 always qualifies


def gamma_kappa(alpha: float, beta: float, kappa: float) -> float:
    """Exponential decay rate  (alpha - beta) log2(1/kappa) - h(beta)  of the
    2^(-n gamma) tail associated with an entropy_beta solution."""
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"alpha must lie in (0, 1], got {alpha}")
    if not 0.0 < beta < 1.0:
        raise ConfigError(f"beta must lie in (0, 1), got {beta}")
    _check_kappa(kappa)
    return (alpha - beta) * math.log2(1.0 / kappa) - entropy(beta)


# -- asymptotic rates ---------------------------------------------------------


def wigner_rate(kappa: float, n: int, eps: float) -> tuple[float, float]:
    """(f_value, final_rate) for the symmetric-matrix singularity rate:

        f_value    = kappa^((3/8)n - (1/2)n^(1-eps)) / (kappa (1-kappa))
                     + [kappa / sqrt(n^(1-eps) (1-kappa)^3)]^(1/2)
        final_rate = the second (polynomial) term alone.
    """
    _check_kappa(kappa)
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not 0.0 < eps < 1.0:
        raise ConfigError(f"eps must lie in (0, 1), got {eps}")
    exponent = 0.375 * n - 0.5 * float(n) ** (1.0 - eps)
    exp_term = kappa**exponent / (kappa * (1.0 - kappa))
    final_rate = math.sqrt(kappa / math.sqrt(float(n) ** (1.0 - eps) * (1.0 - kappa) ** 3))
    return exp_term + final_rate, final_rate


_DENSITY_FLOOR = 2.0**-32


def clipped_density(c: float, beta: float, n: int) -> float:
    """c * ln(n) / n^beta clipped into [2^-32, 1/2] (the usable regime)."""
    return min(max(c * math.log(n) / float(n) ** beta, _DENSITY_FLOOR), 0.5)


def graph_rate(c: float, beta: float, eps: float, n: int) -> float:
    """Adjacency-matrix deficiency rate: max of the exponential-ratio term and
    the quarter-power term,

        kappa^((3/8)n - (1/2)n^(1-eps)) / (kappa (1-kappa))   and
        ( kappa^2 / (n^(1-eps-beta) ln n) )^(1/4),

    where kappa = 1 - p(n) and p(n) is the density c*ln(n)/n^beta clipped into
    [2^-32, 1/2].  The clip matters: for moderate n the raw profile exceeds
    1/2 (even 1), where the unclipped expression loses its meaning and its
    monotone decay.  Requires eps + beta < 1.
    """
    if c <= 0:
        raise ConfigError(f"c must be positive, got {c}")
    if not 0.0 < beta < 1.0 or not 0.0 < eps < 1.0:
        raise ConfigError("eps and beta must lie in (0, 1)")
    if eps + beta >= 1.0:
        raise ConfigError(f"need eps + beta < 1, got {eps + beta}")
    if n < 2:
        raise ConfigError(f"n must be >= 2, got {n}")
    terms = graph_rate_terms(c, beta, eps, n)
    return max(terms["exp_term"], terms["quarter_term"])


def graph_rate_terms(c: float, beta: float, eps: float, n: int) -> dict[str, float]:
    p = clipped_density(c, beta, n)
    kappa = 1.0 - p
    exponent = 0.375 * n - 0.5 * float(n) ** (1.0 - eps)
    exp_term = kappa**exponent / (kappa * (1.0 - kappa))
    quarter_term = (kappa**2 / (float(n) ** (1.0 - eps - beta) * math.log(n))) ** 0.25
    return {"density": p, "kappa": kappa, "exp_term": exp_term, "quarter_term": quarter_term}
