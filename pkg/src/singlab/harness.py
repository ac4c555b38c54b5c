"""Seeded Monte Carlo experiments over exact-arithmetic matrix ensembles.

Every experiment is driven by per-(experiment, n, trial) counter-based
streams, so results are bit-reproducible for a given config and independent of
how trials are split across workers.  Reports carry Wilson score intervals at
95% and 99%, per-size bound evaluations, and a log-log rate fit when at least
three sizes have positive frequency.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .bounds import (
    BoundConstants,
    DEFAULT_CONSTANTS,
    graph_rate,
    linear_bound_simplified,
    wigner_rate,
)
from .dist import DiscreteDist
from .ensembles import (
    EntryScheme,
    GraphScheme,
    SeedSpec,
    draw_adjacency_rows,
    draw_square_rows,
    draw_symmetric_rows,
    grow_wigner_rows,
    kappa_n,
    scheme_from_json,
)
from .errors import ConfigError, DegenerateInputError, InsufficientDataError
from .xlinalg import ExactMatrix, classify_rows, classify_singular, rank_int_rows, rank_rows

# Two-sided normal quantiles for the Wilson score intervals.
Z95 = 1.959963984540054
Z99 = 2.5758293035489004

CSV_COLUMNS = (
    "n",
    "trials",
    "singular_count",
    "p_hat",
    "wilson95_lo",
    "wilson95_hi",
    "wilson99_lo",
    "wilson99_hi",
    "mean_deficiency",
    "bound_value",
)

KINDS = ("ginibre", "wigner", "graph", "rank_process")

_DRAWERS: dict[str, Callable] = {
    "ginibre": draw_square_rows,
    "wigner": draw_symmetric_rows,
    "graph": draw_adjacency_rows,
}


def wilson_interval(count: int, trials: int, z: float) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion; always contains p_hat."""
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    if not 0 <= count <= trials:
        raise ConfigError(f"count must lie in [0, {trials}], got {count}")
    p = count / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    # containment of p_hat is exact in real arithmetic; enforce it under
    # floating-point rounding as well (matters at count = 0 and count = trials)
    lo = min(max(0.0, center - half), p)
    hi = max(min(1.0, center + half), p)
    return lo, hi


# -- configuration --------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo experiment: a scheme, a matrix kind, a size grid."""

    scheme: EntryScheme
    kind: str
    ns: tuple[int, ...]
    trials: int = 1000
    seed: int = 0
    eps: float = 0.5
    constants: BoundConstants = DEFAULT_CONSTANTS
    classify: bool = False
    workers: int = 1
    out: str | None = None
    experiment_id: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.ns:
            raise ConfigError("size grid must be nonempty")
        if any(n < 1 for n in self.ns):
            raise ConfigError("sizes must be >= 1")
        if any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise ConfigError(f"size grid must be strictly increasing, got {self.ns}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0.0 < self.eps < 1.0:
            raise ConfigError(f"eps must lie in (0, 1), got {self.eps}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit integer, got {self.seed}")
        if self.kind == "graph":
            if not isinstance(self.scheme, GraphScheme):
                raise ConfigError("kind 'graph' needs a graph scheme")
            rule = self.scheme.rule
            if rule.c is not None and self.eps + rule.beta >= 1.0:
                raise ConfigError(
                    f"graph rate needs eps + beta < 1, got {self.eps + rule.beta}"
                )
        if self.kind in ("wigner", "rank_process") and not self.scheme.symmetric_ok():
            raise ConfigError(f"kind {self.kind!r} needs a symmetric scheme")

    @property
    def stream_id(self) -> str:
        return self.experiment_id if self.experiment_id is not None else self.kind

    def seed_spec(self) -> SeedSpec:
        return SeedSpec(self.seed, self.stream_id)

    def to_json(self) -> dict:
        out: dict = {
            "scheme": self.scheme.to_json(),
            "kind": self.kind,
            "ns": list(self.ns),
            "trials": self.trials,
            "seed": self.seed,
            "eps": self.eps,
            "c_kr": self.constants.c_kr,
            "classify": self.classify,
            "workers": self.workers,
        }
        if self.out is not None:
            out["out"] = self.out
        if self.experiment_id is not None:
            out["experiment_id"] = self.experiment_id
        return out


_CONFIG_KEYS = {
    "scheme",
    "kind",
    "ns",
    "trials",
    "seed",
    "eps",
    "c_kr",
    "classify",
    "workers",
    "out",
    "experiment_id",
}


def config_from_json(obj: object) -> ExperimentConfig:
    if not isinstance(obj, Mapping):
        raise ConfigError("config must be an object")
    unknown = set(obj) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unrecognized config keys: {sorted(unknown)}")
    for key in ("scheme", "kind", "ns"):
        if key not in obj:
            raise ConfigError(f"config is missing required key {key!r}")
    ns = obj["ns"]
    if not isinstance(ns, Sequence) or isinstance(ns, str) or not all(
        isinstance(n, int) and not isinstance(n, bool) for n in ns
    ):
        raise ConfigError("'ns' must be an array of integers")
    def _int(key: str, default: int) -> int:
        v = obj.get(key, default)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{key!r} must be an integer")
        return v
    def _float(key: str, default: float) -> float:
        v = obj.get(key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{key!r} must be a number")
        return float(v)
    classify = obj.get("classify", False)
    if not isinstance(classify, bool):
        raise ConfigError("'classify' must be a boolean")
    out = obj.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("'out' must be a string path")
    experiment_id = obj.get("experiment_id")
    if experiment_id is not None and not isinstance(experiment_id, str):
        raise ConfigError("'experiment_id' must be a string")
    return ExperimentConfig(
        scheme=scheme_from_json(obj["scheme"]),
        kind=obj["kind"] if isinstance(obj["kind"], str) else "",
        ns=tuple(ns),
        trials=_int("trials", 1000),
        seed=_int("seed", 0),
        eps=_float("eps", 0.5),
        constants=BoundConstants(c_kr=_float("c_kr", 1.0)),
        classify=classify,
        workers=_int("workers", 1),
        out=out,
        experiment_id=experiment_id,
    )


# -- reports ---------------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    """OLS fit of log p_hat against log n (natural logs)."""

    exponent: float
    stderr: float
    intercept: float
    points: int

    def to_json(self) -> dict:
        return {
            "exponent": self.exponent,
            "stderr": self.stderr,
            "intercept": self.intercept,
            "points": self.points,
        }


@dataclass(frozen=True)
class SummaryRow:
    n: int
    trials: int
    singular_count: int
    p_hat: float
    wilson95: tuple[float, float]
    wilson99: tuple[float, float]
    mean_deficiency: float
    bound_value: float
    extras: Mapping[str, object] = field(default_factory=dict)

    def csv_values(self) -> list[str]:
        return [
            str(self.n),
            str(self.trials),
            str(self.singular_count),
            repr(self.p_hat),
            repr(self.wilson95[0]),
            repr(self.wilson95[1]),
            repr(self.wilson99[0]),
            repr(self.wilson99[1]),
            repr(self.mean_deficiency),
            repr(self.bound_value),
        ]

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "trials": self.trials,
            "singular_count": self.singular_count,
            "p_hat": self.p_hat,
            "wilson95_lo": self.wilson95[0],
            "wilson95_hi": self.wilson95[1],
            "wilson99_lo": self.wilson99[0],
            "wilson99_hi": self.wilson99[1],
            "mean_deficiency": self.mean_deficiency,
            "bound_value": self.bound_value,
        }
        if self.extras:
            out["extras"] = dict(self.extras)
        return out


@dataclass(frozen=True)
class SummaryReport:
    kind: str
    seed: int
    eps: float
    c_kr: float
    scheme: dict
    rows: tuple[SummaryRow, ...]
    fit: FitResult | None
    fit_note: str = ""
    extras: Mapping[str, object] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow(row.csv_values())
        return buf.getvalue()

    def to_json(self) -> dict:
        out: dict = {
            "kind": self.kind,
            "seed": self.seed,
            "eps": self.eps,
            "c_kr": self.c_kr,
            "scheme": self.scheme,
            "rows": [row.to_json() for row in self.rows],
            "fit": self.fit.to_json() if self.fit is not None else None,
            "fit_note": self.fit_note,
        }
        if self.extras:
            out["extras"] = dict(self.extras)
        return out

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    def write_json(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")


# -- rate fitting -----------------------------------------------------------------


def fit_rate(points: Sequence[tuple[float, float]]) -> FitResult:
    """Least-squares slope of log p against log n.

    Needs at least three points, all with n > 0 and p > 0; raises
    InsufficientDataError otherwise.  The returned stderr is the usual OLS
    standard error of the slope.
    """
    if len(points) < 3:
        raise InsufficientDataError(
            f"rate fitting needs >= 3 positive points, got {len(points)}"
        )
    if any(n <= 0 or p <= 0 for n, p in points):
        raise InsufficientDataError("rate fitting needs n > 0 and p_hat > 0 at every point")
    xs = [math.log(n) for n, _ in points]
    ys = [math.log(p) for _, p in points]
    k = len(points)
    xm = sum(xs) / k
    ym = sum(ys) / k
    sxx = sum((x - xm) ** 2 for x in xs)
    if sxx == 0.0:
        raise InsufficientDataError("rate fitting needs at least two distinct sizes")
    sxy = sum((x - xm) * (y - ym) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = ym - slope * xm
    rss = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    stderr = math.sqrt(max(rss, 0.0) / (k - 2) / sxx)
    return FitResult(exponent=slope, stderr=stderr, intercept=intercept, points=k)


def _fit_positive(rows: Sequence[SummaryRow]) -> tuple[FitResult | None, str]:
    positive = [(float(r.n), r.p_hat) for r in rows if r.p_hat > 0.0]
    if len(positive) < 3:
        return None, (
            f"fit skipped: only {len(positive)} of {len(rows)} sizes have positive "
            "singularity estimates (need 3)"
        )
    return fit_rate(positive), ""


# -- shared trial machinery --------------------------------------------------------


def _int_entries_ok(scheme: EntryScheme, n: int) -> bool:
    return all(
        v.denominator == 1 for d in scheme.distinct_dists(n) for v in d.values
    )


def _rank_of(rows: list[list], int_ok: bool) -> int:
    return rank_int_rows(rows) if int_ok else rank_rows(rows)


def _bound_value(
    kind: str, scheme: EntryScheme, n: int, eps: float, consts: BoundConstants
) -> float:
    """The per-size reference bound column; NaN when no bound applies."""
    try:
        if kind == "graph":
            rule = scheme.rule  # type: ignore[attr-defined]
            if rule.c is None:
                return float("nan")
            return graph_rate(rule.c, rule.beta, eps, n)
        k = float(kappa_n(scheme, n))
        if kind == "ginibre":
            return linear_bound_simplified(k, n, consts)
        if kind == "wigner":
            return wigner_rate(k, n, eps)[1]
        return wigner_rate(k, n, eps)[0]  # rank_process tracks the full rate
    except (ConfigError, DegenerateInputError):
        return float("nan")


@dataclass
class _Tally:
    singular: int = 0
    deficiency_sum: int = 0
    zero_row_violations: int = 0
    normal: int = 0
    abnormal: int = 0
    perfect: int = 0
    imperfect: int = 0
    isolated_hist: dict[int, int] = field(default_factory=dict)
    implication_violations: int = 0

    def merge(self, other: "_Tally") -> None:
        self.singular += other.singular
        self.deficiency_sum += other.deficiency_sum
        self.zero_row_violations += other.zero_row_violations
        self.normal += other.normal
        self.abnormal += other.abnormal
        self.perfect += other.perfect
        self.imperfect += other.imperfect
        self.implication_violations += other.implication_violations
        for k, v in other.isolated_hist.items():
            self.isolated_hist[k] = self.isolated_hist.get(k, 0) + v


def _run_chunked(trials: int, workers: int, run_chunk: Callable[[int, int], _Tally]) -> _Tally:
    if workers == 1 or trials < 2 * workers:
        return run_chunk(0, trials)
    bounds = [trials * w // workers for w in range(workers + 1)]
    total = _Tally()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(run_chunk, lo, hi)
            for lo, hi in zip(bounds, bounds[1:])
            if hi > lo
        ]
        for fut in futures:
            total.merge(fut.result())
    return total


# -- singularity experiments --------------------------------------------------------


def mc_singularity(config: ExperimentConfig) -> SummaryReport:
    """Per-size singularity frequencies for square, symmetric, or adjacency draws.

    Every trial checks the zero-row implication (an all-zero row must mean a
    singular matrix); violations are counted per size and are always zero.
    With ``classify`` set, singular draws are split into normal/abnormal by
    the shortest vanishing row combination against the n^(1-eps) threshold,
    and nonsingular draws into perfect/imperfect by their leave-one-out
    dependency supports.
    """
    if config.kind == "rank_process":
        raise ConfigError("kind 'rank_process' runs via run_rank_process")
    drawer = _DRAWERS[config.kind]
    spec = config.seed_spec()
    rows_out = []
    for n in config.ns:
        int_ok = _int_entries_ok(config.scheme, n)

        def run_chunk(lo: int, hi: int, n: int = n, int_ok: bool = int_ok) -> _Tally:
            tally = _Tally()
            scheme = config.scheme
            cursor = spec.cursor()
            for t in range(lo, hi):
                rows = drawer(scheme, n, cursor.at(n, t))
                r = _rank_of(rows, int_ok)
                deficiency = n - r
                if deficiency:
                    tally.singular += 1
                    tally.deficiency_sum += deficiency
                if any(not any(row) for row in rows) and not deficiency:
                    tally.zero_row_violations += 1
                if config.classify:
                    mat = ExactMatrix.from_rows(rows)
                    if deficiency:
                        label = classify_singular(mat, config.eps).label
                        if label == "normal":
                            tally.normal += 1
                        else:
                            tally.abnormal += 1
                    elif classify_rows(mat, config.eps).perfect:
                        tally.perfect += 1
                    else:
                        tally.imperfect += 1
            return tally

        tally = _run_chunked(config.trials, config.workers, run_chunk)
        extras: dict[str, object] = {"zero_row_violations": tally.zero_row_violations}
        if config.classify:
            extras.update(
                normal=tally.normal,
                abnormal=tally.abnormal,
                perfect=tally.perfect,
                imperfect=tally.imperfect,
            )
        rows_out.append(_summary_row(config, n, tally, extras))
    fit, note = _fit_positive(rows_out)
    return SummaryReport(
        kind=config.kind,
        seed=config.seed,
        eps=config.eps,
        c_kr=config.constants.c_kr,
        scheme=config.scheme.to_json(),
        rows=tuple(rows_out),
        fit=fit,
        fit_note=note,
    )


def _summary_row(
    config: ExperimentConfig, n: int, tally: _Tally, extras: dict[str, object]
) -> SummaryRow:
    trials = config.trials
    return SummaryRow(
        n=n,
        trials=trials,
        singular_count=tally.singular,
        p_hat=tally.singular / trials,
        wilson95=wilson_interval(tally.singular, trials, Z95),
        wilson99=wilson_interval(tally.singular, trials, Z99),
        mean_deficiency=tally.deficiency_sum / trials,
        bound_value=_bound_value(config.kind, config.scheme, n, config.eps, config.constants),
        extras=extras,
    )


def graph_experiment(config: ExperimentConfig) -> SummaryReport:
    """Adjacency-matrix singularity runs with isolated-vertex bookkeeping.

    Tracks the distribution of isolated-vertex counts per size and checks the
    implication 'isolated vertex => singular' on every trial; the violation
    count is reported and always zero.
    """
    if config.kind != "graph":
        raise ConfigError(f"graph_experiment needs kind 'graph', got {config.kind!r}")
    spec = config.seed_spec()
    rows_out = []
    for n in config.ns:
        def run_chunk(lo: int, hi: int, n: int = n) -> _Tally:
            tally = _Tally()
            scheme = config.scheme
            cursor = spec.cursor()
            for t in range(lo, hi):
                rows = draw_adjacency_rows(scheme, n, cursor.at(n, t))
                r = rank_int_rows(rows)
                deficiency = n - r
                if deficiency:
                    tally.singular += 1
                    tally.deficiency_sum += deficiency
                isolated = sum(1 for row in rows if not any(row))
                tally.isolated_hist[isolated] = tally.isolated_hist.get(isolated, 0) + 1
                if isolated and not deficiency:
                    tally.implication_violations += 1
                    tally.zero_row_violations += 1
            return tally

        tally = _run_chunked(config.trials, config.workers, run_chunk)
        extras: dict[str, object] = {
            "isolated_hist": {str(k): v for k, v in sorted(tally.isolated_hist.items())},
            "implication_violations": tally.implication_violations,
            "zero_row_violations": tally.zero_row_violations,
        }
        rows_out.append(_summary_row(config, n, tally, extras))
    fit, note = _fit_positive(rows_out)
    return SummaryReport(
        kind=config.kind,
        seed=config.seed,
        eps=config.eps,
        c_kr=config.constants.c_kr,
        scheme=config.scheme.to_json(),
        rows=tuple(rows_out),
        fit=fit,
        fit_note=note,
    )


# -- growth process -------------------------------------------------------------------


def run_rank_process(config: ExperimentConfig) -> SummaryReport:
    """Grow symmetric matrices one bordering step at a time and track the
    deficiency-weighted growth statistic.

    Each trial grows a single matrix from size 1 to max(ns) on one stream,
    recording at every reported size the singularity frequency, the mean
    deficiency, and the mean of  X_n = kappa_n^(-deficiency/8)  on singular
    draws (0 otherwise) with a 95% normal CI.  Rank increments of every
    growth step are binned into {0, 1, 2}; any other increment would be a
    contract violation and is counted separately (always zero).  The bound
    column carries the full two-term rate for comparison with E[X_n].
    """
    if config.kind != "rank_process":
        raise ConfigError(f"run_rank_process needs kind 'rank_process', got {config.kind!r}")
    spec = config.seed_spec()
    n_max = config.ns[-1]
    int_ok = all(_int_entries_ok(config.scheme, n) for n in range(1, n_max + 1))
    reported = set(config.ns)
    kappas = {n: float(kappa_n(config.scheme, n)) for n in config.ns}
    growth = {
        n: k ** (-1.0 / 8.0) if 0.0 < k < 1.0 else float("nan") for n, k in kappas.items()
    }

    @dataclass
    class _ProcTally:
        singular: dict[int, int]
        deficiency_sum: dict[int, int]
        x_sum: dict[int, float]
        x_sq_sum: dict[int, float]
        increments: dict[int, dict[int, int]]
        bad_increments: int = 0

        @classmethod
        def empty(cls) -> "_ProcTally":
            return cls(
                singular={n: 0 for n in config.ns},
                deficiency_sum={n: 0 for n in config.ns},
                x_sum={n: 0.0 for n in config.ns},
                x_sq_sum={n: 0.0 for n in config.ns},
                increments={n: {0: 0, 1: 0, 2: 0} for n in range(2, n_max + 1)},
            )

        def merge(self, other: "_ProcTally") -> None:
            for n in config.ns:
                self.singular[n] += other.singular[n]
                self.deficiency_sum[n] += other.deficiency_sum[n]
                self.x_sum[n] += other.x_sum[n]
                self.x_sq_sum[n] += other.x_sq_sum[n]
            for n, hist in other.increments.items():
                for k, v in hist.items():
                    self.increments[n][k] += v
            self.bad_increments += other.bad_increments

    def run_chunk(lo: int, hi: int) -> _ProcTally:
        tally = _ProcTally.empty()
        scheme = config.scheme
        cursor = spec.cursor()
        for t in range(lo, hi):
            rng = cursor.at(0, t)
            rows: list[list] = []
            prev_rank = 0
            for size in range(1, n_max + 1):
                rows = grow_wigner_rows(rows, scheme, rng)
                r = _rank_of(rows, int_ok)
                if size >= 2:
                    inc = r - prev_rank
                    if inc in (0, 1, 2):
                        tally.increments[size][inc] += 1
                    else:
                        tally.bad_increments += 1
                if size in reported:
                    deficiency = size - r
                    if deficiency:
                        tally.singular[size] += 1
                        tally.deficiency_sum[size] += deficiency
                        x = growth[size] ** deficiency
                    else:
                        x = 0.0
                    tally.x_sum[size] += x
                    tally.x_sq_sum[size] += x * x
                prev_rank = r
        return tally

    if config.workers == 1 or config.trials < 2 * config.workers:
        total = run_chunk(0, config.trials)
    else:
        bounds = [config.trials * w // config.workers for w in range(config.workers + 1)]
        total = _ProcTally.empty()
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            futures = [
                pool.submit(run_chunk, lo, hi)
                for lo, hi in zip(bounds, bounds[1:])
                if hi > lo
            ]
            for fut in futures:
                total.merge(fut.result())

    trials = config.trials
    rows_out = []
    for n in config.ns:
        x_mean = total.x_sum[n] / trials
        if trials > 1:
            var = max(total.x_sq_sum[n] - trials * x_mean * x_mean, 0.0) / (trials - 1)
            x_half95 = Z95 * math.sqrt(var / trials)
        else:
            x_half95 = float("inf")
        extras: dict[str, object] = {
            "x_mean": x_mean,
            "x_half95": x_half95,
            "kappa": kappas[n],
        }
        if n >= 2:
            extras["increment_hist"] = {
                str(k): v for k, v in sorted(total.increments[n].items())
            }
        rows_out.append(
            SummaryRow(
                n=n,
                trials=trials,
                singular_count=total.singular[n],
                p_hat=total.singular[n] / trials,
                wilson95=wilson_interval(total.singular[n], trials, Z95),
                wilson99=wilson_interval(total.singular[n], trials, Z99),
                mean_deficiency=total.deficiency_sum[n] / trials,
                bound_value=_bound_value("rank_process", config.scheme, n, config.eps, config.constants),
                extras=extras,
            )
        )
    fit, note = _fit_positive(rows_out)
    total_hist = {0: 0, 1: 0, 2: 0}
    for hist in total.increments.values():
        for k, v in hist.items():
            total_hist[k] += v
    return SummaryReport(
        kind=config.kind,
        seed=config.seed,
        eps=config.eps,
        c_kr=config.constants.c_kr,
        scheme=config.scheme.to_json(),
        rows=tuple(rows_out),
        fit=fit,
        fit_note=note,
        extras={
            "increment_hist_total": {str(k): v for k, v in sorted(total_hist.items())},
            "bad_increments": total.bad_increments,
        },
    )


# -- bound-check battery ----------------------------------------------------------


@dataclass(frozen=True)
class CheckBoundsConfig:
    """Knobs for the empirical-versus-bound battery.

    ``pairs`` are (rows, columns) shapes for the corner experiments; ``alpha``
    sets the n^(alpha-1) density of the sparse shape scans over ``shape_ns``;
    ``gamma`` is the rank-fraction threshold of the growth scan; ``zero_ns``
    is the grid for the first-row-zero comparison at density 1/n.
    """

    trials: int = 20000
    seed: int = 0
    kappa: Fraction = Fraction(1, 2)
    pairs: tuple[tuple[int, int], ...] = ((3, 2), (4, 2), (6, 3), (8, 4))
    alpha: float = 0.8
    gamma: float = 0.5
    shape_ns: tuple[int, ...] = (8, 12, 16)
    zero_ns: tuple[int, ...] = (5, 10, 20)

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit integer, got {self.seed}")
        if not 0 < self.kappa < 1:
            raise ConfigError(f"kappa must lie in (0, 1), got {self.kappa}")
        for m, k in self.pairs:
            if not 1 <= k <= m:
                raise ConfigError(f"corner shapes need 1 <= k <= m, got ({m}, {k})")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        for grid, name in ((self.shape_ns, "shape_ns"), (self.zero_ns, "zero_ns")):
            if not grid or any(n < 2 for n in grid):
                raise ConfigError(f"{name} must be a nonempty grid of sizes >= 2")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError(f"{name} must be strictly increasing")

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "kappa": str(self.kappa),
            "pairs": [list(p) for p in self.pairs],
            "alpha": self.alpha,
            "gamma": self.gamma,
            "shape_ns": list(self.shape_ns),
            "zero_ns": list(self.zero_ns),
        }


def check_bounds_config_from_json(obj: object) -> CheckBoundsConfig:
    if not isinstance(obj, Mapping):
        raise ConfigError("config must be an object")
    from .dist import as_fraction

    kwargs: dict = {}
    known = {"trials", "seed", "kappa", "pairs", "alpha", "gamma", "shape_ns", "zero_ns"}
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"unrecognized config keys: {sorted(unknown)}")
    for key in ("trials", "seed"):
        if key in obj:
            kwargs[key] = obj[key]
    if "kappa" in obj:
        kwargs["kappa"] = as_fraction(obj["kappa"])
    if "pairs" in obj:
        kwargs["pairs"] = tuple(tuple(p) for p in obj["pairs"])
    for key in ("alpha", "gamma"):
        if key in obj:
            kwargs[key] = float(obj[key])
    for key in ("shape_ns", "zero_ns"):
        if key in obj:
            kwargs[key] = tuple(obj[key])
    return CheckBoundsConfig(**kwargs)


@dataclass(frozen=True)
class BoundCheckRow:
    """One empirical-frequency-versus-reference comparison."""

    experiment: str
    params: str
    n: int
    trials: int
    empirical: float
    reference: float
    holds: bool
    note: str = ""

    def to_json(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": self.params,
            "n": self.n,
            "trials": self.trials,
            "empirical": self.empirical,
            "reference": self.reference,
            "holds": self.holds,
            "note": self.note,
        }


@dataclass(frozen=True)
class BoundCheckReport:
    rows: tuple[BoundCheckRow, ...]

    @property
    def all_hold(self) -> bool:
        return all(row.holds for row in self.rows)

    def to_json(self) -> dict:
        return {"rows": [r.to_json() for r in self.rows], "all_hold": self.all_hold}

    def to_text(self) -> str:
        header = f"{'experiment':<22} {'params':<16} {'n':>4} {'empirical':>12} {'reference':>12}  holds"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            lines.append(
                f"{r.experiment:<22} {r.params:<16} {r.n:>4} {r.empirical:>12.6f} "
                f"{r.reference:>12.6f}  {'yes' if r.holds else 'NO'}"
                + (f"  ({r.note})" if r.note else "")
            )
        return "\n".join(lines)


def _draw_int_cells(dist: DiscreteDist, rng, count: int) -> list[int]:
    sampler = dist.sampler
    picks = sampler.draw_indices(rng, count)
    assert sampler.int_values is not None
    return sampler.int_values[picks].tolist()


def check_bounds(config: CheckBoundsConfig) -> BoundCheckReport:
    """Empirical frequencies against their closed-form references.

    * fixed_corner_fill: a fixed full-column-rank 0/1 matrix bordered by a
      random column; P(rank stays at the column count) <= kappa^(m-k).
    * random_corner_deficit: random m x k draws; P(rank < k) is bounded by
      kappa/(1-kappa) * kappa^(m-k).
    * sparse_wigner_shape: symmetric draws at density n^(alpha-1); the
      singularity frequency must not increase along the grid (up to CI noise).
    * sparse_ginibre_growth: square draws at the same density; the frequency
      of rank > gamma*n must not decrease along the grid (up to CI noise).
    * first_row_zero: square draws at density 1/n; the first-row-zero
      frequency is compared with the exact (1 - 1/n)^n, which must land
      inside the 99% Wilson interval.

    One-sided bound rows hold when the 99% Wilson lower bound does not exceed
    the reference.
    """
    rows: list[BoundCheckRow] = []
    kappa_f = float(config.kappa)
    bern = DiscreteDist.bernoulli(config.kappa)
    trials = config.trials

    # fixed corner fill: identity stacked over all-ones rows, random extra column
    spec = SeedSpec(config.seed, "check:fixed_corner_fill")
    cursor = spec.cursor()
    for m, k in config.pairs:
        fixed = [[int(i == j) for j in range(k)] for i in range(k)]
        fixed += [[1] * k for _ in range(m - k)]
        hits = 0
        for t in range(trials):
            rng = cursor.at(m, t)
            col = _draw_int_cells(bern, rng, m)
            augmented = [row + [c] for row, c in zip(fixed, col)]
            if rank_int_rows(augmented) == k:
                hits += 1
        reference = kappa_f ** (m - k)
        lo99, _ = wilson_interval(hits, trials, Z99)
        rows.append(
            BoundCheckRow(
                experiment="fixed_corner_fill",
                params=f"m={m},k={k}",
                n=m,
                trials=trials,
                empirical=hits / trials,
                reference=reference,
                holds=lo99 <= reference,
            )
        )

    # random corner deficit
    spec = SeedSpec(config.seed, "check:random_corner_deficit")
    cursor = spec.cursor()
    for m, k in config.pairs:
        hits = 0
        for t in range(trials):
            rng = cursor.at(m, t)
            flat = _draw_int_cells(bern, rng, m * k)
            mat = [flat[r * k : (r + 1) * k] for r in range(m)]
            if rank_int_rows(mat) < k:
                hits += 1
        reference = kappa_f / (1.0 - kappa_f) * kappa_f ** (m - k)
        lo99, _ = wilson_interval(hits, trials, Z99)
        rows.append(
            BoundCheckRow(
                experiment="random_corner_deficit",
                params=f"m={m},k={k}",
                n=m,
                trials=trials,
                empirical=hits / trials,
                reference=reference,
                holds=lo99 <= reference,
            )
        )

    from .ensembles import DensityRule, SparseBernoulliScheme

    # sparse symmetric shape scan: singularity frequency should not increase
    scheme = SparseBernoulliScheme(DensityRule(alpha=config.alpha))
    spec = SeedSpec(config.seed, "check:sparse_wigner_shape")
    cursor = spec.cursor()
    prev: tuple[float, float, float] | None = None  # (p_hat, lo99, hi99)
    for n in config.shape_ns:
        hits = 0
        for t in range(trials):
            rng = cursor.at(n, t)
            if rank_int_rows(draw_symmetric_rows(scheme, n, rng)) < n:
                hits += 1
        p = hits / trials
        lo99, hi99 = wilson_interval(hits, trials, Z99)
        holds = True if prev is None else lo99 <= prev[2]
        rows.append(
            BoundCheckRow(
                experiment="sparse_wigner_shape",
                params=f"alpha={config.alpha}",
                n=n,
                trials=trials,
                empirical=p,
                reference=float("nan") if prev is None else prev[0],
                holds=holds,
                note="reference = previous size's frequency",
            )
        )
        prev = (p, lo99, hi99)

    # sparse square growth scan: P(rank > gamma n) should approach 1
    spec = SeedSpec(config.seed, "check:sparse_ginibre_growth")
    cursor = spec.cursor()
    prev = None
    for n in config.shape_ns:
        cut = config.gamma * n
        hits = 0
        for t in range(trials):
            rng = cursor.at(n, t)
            if rank_int_rows(draw_square_rows(scheme, n, rng)) > cut:
                hits += 1
        p = hits / trials
        lo99, hi99 = wilson_interval(hits, trials, Z99)
        holds = True if prev is None else hi99 >= prev[1]
        rows.append(
            BoundCheckRow(
                experiment="sparse_ginibre_growth",
                params=f"alpha={config.alpha},gamma={config.gamma}",
                n=n,
                trials=trials,
                empirical=p,
                reference=1.0,
                holds=holds,
                note="frequency of rank > gamma*n; should approach 1",
            )
        )
        prev = (p, lo99, hi99)

    # first-row-zero frequency against the exact law at density 1/n
    reciprocal = SparseBernoulliScheme(DensityRule(alpha=0.0))
    spec = SeedSpec(config.seed, "check:first_row_zero")
    cursor = spec.cursor()
    for n in config.zero_ns:
        cell = reciprocal.resolve(1, 1, n)
        exact = cell.mass_at(0) ** n
        hits = 0
        for t in range(trials):
            rng = cursor.at(n, t)
            row = _draw_int_cells(cell, rng, n)
            if not any(row):
                hits += 1
        lo99, hi99 = wilson_interval(hits, trials, Z99)
        rows.append(
            BoundCheckRow(
                experiment="first_row_zero",
                params="p=1/n",
                n=n,
                trials=trials,
                empirical=hits / trials,
                reference=float(exact),
                holds=lo99 <= float(exact) <= hi99,
                note=f"exact = {exact}",
            )
        )

    return BoundCheckReport(rows=tuple(rows))
