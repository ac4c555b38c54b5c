"""Command-line workbench: a thin client over the HTTP service.

Every command builds a JSON envelope and posts it to the service — in-process
by default, or to a remote instance via ``--server URL``.  Exit codes: 0 on
success, 2 for configuration/input errors, 3 when an exact computation
exceeds its budget.
"""

from __future__ import annotations

import csv
import functools
import json
import sys

import click

from .errors import EXIT_BUDGET, EXIT_CONFIG, BudgetError, ConfigError, SinglabError


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        from .client import ServiceError

        try:
            return fn(*args, **kwargs)
        except BudgetError as exc:
            click.echo(f"error (budget): {exc}", err=True)
            sys.exit(EXIT_BUDGET)
        except ServiceError as exc:
            click.echo(f"error (service): {exc}", err=True)
            sys.exit(1)
        except SinglabError as exc:
            click.echo(f"error (config): {exc}", err=True)
            sys.exit(EXIT_CONFIG)

    return wrapper


def _client(server: str | None):
    from .client import ServiceClient

    return ServiceClient(server)


def _parse_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON for {what}: {exc}") from exc


def _load_json(path: str, what: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {what} from {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"{what} must be comma-separated numbers: {exc}") from exc


def _rationals(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip() != ""]


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"{what} must be comma-separated integers: {exc}") from exc


_server_option = click.option(
    "--server", default=None, metavar="URL", help="Remote service URL (default: in-process)."
)
_json_option = click.option("--json", "as_json", is_flag=True, help="Print the full JSON response.")


@click.group()
def cli() -> None:
    """Exact-arithmetic workbench for discrete random matrix experiments."""


# -- experiments ----------------------------------------------------------------


def _print_report(payload: dict, as_json: bool, out: str | None) -> None:
    report = payload["report"]
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(payload["csv"])
        click.echo(f"wrote {out}", err=True)
    if as_json:
        click.echo(json.dumps(payload["report"], indent=2))
        return
    click.echo(
        f"kind={report['kind']} seed={report['seed']} eps={report['eps']} c_kr={report['c_kr']}"
    )
    for row in report["rows"]:
        line = (
            f"n={row['n']:<4} trials={row['trials']:<7} p_hat={row['p_hat']:<10.6g} "
            f"95% [{row['wilson95_lo']:.6g}, {row['wilson95_hi']:.6g}] "
            f"mean_def={row['mean_deficiency']:.6g} bound={row['bound_value']:.6g}"
        )
        extras = row.get("extras", {})
        if "x_mean" in extras:
            line += f" x_mean={extras['x_mean']:.6g}±{extras['x_half95']:.3g}"
        if "increment_hist" in extras:
            line += f" inc={extras['increment_hist']}"
        if "isolated_hist" in extras:
            line += f" isolated={extras['isolated_hist']}"
        click.echo(line)
    if report["fit"] is not None:
        fit = report["fit"]
        click.echo(
            f"fit: exponent={fit['exponent']:.6g} stderr={fit['stderr']:.3g} "
            f"intercept={fit['intercept']:.6g} points={fit['points']}"
        )
    elif report.get("fit_note"):
        click.echo(report["fit_note"])


def _experiment_command(name: str, endpoint: str, help_text: str):
    @cli.command(name=name, help=help_text)
    @click.option("--config", "config_path", required=True, type=click.Path(), metavar="FILE")
    @click.option("--out", default=None, type=click.Path(), help="Write the CSV table here.")
    @_server_option
    @_json_option
    @_guarded
    def command(config_path: str, out: str | None, server: str | None, as_json: bool) -> None:
        config = _load_json(config_path, "config")
        payload = _client(server).post(endpoint, {"config": config})
        if out is None and isinstance(config, dict):
            out = config.get("out")
        _print_report(payload, as_json, out)

    return command


_experiment_command(
    "mc",
    "/experiment/mc",
    "Run the Monte Carlo singularity experiment described by a config file "
    "(kind ginibre, wigner, graph, or rank_process).",
)
_experiment_command(
    "rank-process",
    "/experiment/rank-process",
    "Grow symmetric matrices step by step and track the deficiency-weighted statistic.",
)
_experiment_command(
    "graph",
    "/experiment/graph",
    "Adjacency-matrix singularity experiment with isolated-vertex bookkeeping.",
)


@cli.command("check-bounds")
@click.option("--config", "config_path", default=None, type=click.Path(), metavar="FILE")
@_server_option
@_json_option
@_guarded
def check_bounds_cmd(config_path: str | None, server: str | None, as_json: bool) -> None:
    """Compare empirical frequencies against their closed-form references."""
    config = _load_json(config_path, "config") if config_path else {}
    payload = _client(server).post("/experiment/check-bounds", {"config": config})
    if as_json:
        click.echo(json.dumps(payload["report"], indent=2))
    else:
        click.echo(payload["text"])
        click.echo(
            "all hold" if payload["report"]["all_hold"] else "SOME CHECKS FAILED", err=True
        )


@cli.command("fit")
@click.option("--in", "in_path", required=True, type=click.Path(), metavar="FILE")
@_server_option
@_json_option
@_guarded
def fit_cmd(in_path: str, server: str | None, as_json: bool) -> None:
    """Fit a log-log rate to the (n, p_hat) columns of a results CSV."""
    points: list[tuple[float, float]] = []
    dropped: list[int] = []
    try:
        with open(in_path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"n", "p_hat"} <= set(reader.fieldnames):
                raise ConfigError(f"{in_path} needs 'n' and 'p_hat' columns")
            for record in reader:
                n = int(record["n"])
                p = float(record["p_hat"])
                if p > 0.0:
                    points.append((float(n), p))
                else:
                    dropped.append(n)
    except OSError as exc:
        raise ConfigError(f"cannot read {in_path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad numeric value in {in_path}: {exc}") from exc
    for n in dropped:
        click.echo(f"warning: dropping n={n} (p_hat = 0 cannot enter a log-log fit)", err=True)
    payload = _client(server).post("/fit", {"points": points})
    if as_json:
        click.echo(json.dumps(payload, indent=2))
    else:
        click.echo(
            f"exponent={payload['exponent']:.6g} stderr={payload['stderr']:.6g} "
            f"intercept={payload['intercept']:.6g} points={payload['points']}"
        )


# -- oracle ------------------------------------------------------------------------


@cli.group()
def oracle() -> None:
    """Exhaustive exact-probability computations for tiny instances."""


def _echo_json_or(payload: dict, as_json: bool, lines: list[str]) -> None:
    if as_json:
        click.echo(json.dumps(payload, indent=2))
    else:
        for line in lines:
            click.echo(line)


@oracle.command("singularity")
@click.option("--scheme", required=True, help="Scheme literal (JSON).")
@click.option("--n", required=True, type=int)
@click.option("--kind", required=True, type=click.Choice(["ginibre", "wigner"]))
@click.option("--budget", default=None, type=int)
@_server_option
@_json_option
@_guarded
def oracle_singularity(scheme, n, kind, budget, server, as_json) -> None:
    """Exact singularity probability by full enumeration."""
    body = {"scheme": _parse_json(scheme, "--scheme"), "n": n, "kind": kind}
    if budget is not None:
        body["budget"] = budget
    payload = _client(server).post("/oracle/singularity", body)
    _echo_json_or(
        payload, as_json, [f"P(singular) = {payload['probability']} ≈ {payload['approx']:.10g}"]
    )


@oracle.command("linear")
@click.option("--alphas", required=True, help="Comma-separated rational coefficients.")
@click.option("--dists", required=True, help="JSON array of distribution literals.")
@_server_option
@_json_option
@_guarded
def oracle_linear(alphas, dists, server, as_json) -> None:
    """Largest atom of an exact linear-combination law."""
    body = {"alphas": _rationals(alphas), "dists": _parse_json(dists, "--dists")}
    payload = _client(server).post("/oracle/linear", body)
    _echo_json_or(
        payload,
        as_json,
        [
            f"sup atom = {payload['sup_mass']} ≈ {payload['sup_mass_approx']:.10g} at {payload['at']}"
        ],
    )


@oracle.command("quadratic")
@click.option("--coeffs", required=True, help="Symmetric coefficient matrix (JSON).")
@click.option("--dists", required=True, help="JSON array of distribution literals.")
@click.option("--budget", default=None, type=int)
@_server_option
@_json_option
@_guarded
def oracle_quadratic(coeffs, dists, budget, server, as_json) -> None:
    """Largest atom of an exact quadratic-form law."""
    body = {"coeffs": _parse_json(coeffs, "--coeffs"), "dists": _parse_json(dists, "--dists")}
    if budget is not None:
        body["budget"] = budget
    payload = _client(server).post("/oracle/quadratic", body)
    _echo_json_or(
        payload,
        as_json,
        [
            f"sup atom = {payload['sup_mass']} ≈ {payload['sup_mass_approx']:.10g} at {payload['at']}"
        ],
    )


@oracle.command("decoupling")
@click.option("--coeffs", required=True, help="Symmetric coefficient matrix (JSON).")
@click.option("--dists", required=True, help="JSON array of distribution literals.")
@click.option("--s1", required=True, help="Comma-separated 1-based indices of the first block.")
@click.option("--s2", required=True, help="Comma-separated 1-based indices of the second block.")
@click.option("--lo", default=None, help="Interval lower endpoint (rational; omit for -inf).")
@click.option("--hi", default=None, help="Interval upper endpoint (rational; omit for +inf).")
@_server_option
@_json_option
@_guarded
def oracle_decoupling(coeffs, dists, s1, s2, lo, hi, server, as_json) -> None:
    """Exact check of the decoupling inequality on an interval."""
    body = {
        "coeffs": _parse_json(coeffs, "--coeffs"),
        "dists": _parse_json(dists, "--dists"),
        "s1": _ints(s1, "--s1"),
        "s2": _ints(s2, "--s2"),
        "interval": {"lo": lo, "hi": hi},
    }
    payload = _client(server).post("/oracle/decoupling", body)
    _echo_json_or(
        payload,
        as_json,
        [
            f"lhs^2 = {payload['lhs_squared']} ≈ {payload['lhs_squared_approx']:.10g}",
            f"rhs   = {payload['rhs']} ≈ {payload['rhs_approx']:.10g}",
            f"holds: {payload['holds']}",
        ],
    )


@oracle.command("border-law")
@click.option("--matrix", required=True, help="Matrix of rationals (JSON array of arrays).")
@click.option("--scheme", required=True, help="Scheme literal (JSON).")
@_server_option
@_json_option
@_guarded
def oracle_border_law(matrix, scheme, server, as_json) -> None:
    """Exact law of the rank increment under one symmetric bordering step."""
    body = {
        "matrix": _parse_json(matrix, "--matrix"),
        "scheme": _parse_json(scheme, "--scheme"),
    }
    payload = _client(server).post("/oracle/border-law", body)
    lines = [f"P(increment = {v}) = {m:.10g}" for v, m in payload["approx"].items()]
    _echo_json_or(payload, as_json, lines)


@oracle.command("rank-process")
@click.option("--scheme", required=True, help="Scheme literal (JSON).")
@click.option("--n-max", required=True, type=int)
@click.option("--kappa", default=None, type=float)
@_server_option
@_json_option
@_guarded
def oracle_rank_process(scheme, n_max, kappa, server, as_json) -> None:
    """Exact E[X_n] of the deficiency-weighted growth statistic, n = 1..n_max."""
    body = {"scheme": _parse_json(scheme, "--scheme"), "n_max": n_max}
    if kappa is not None:
        body["kappa"] = kappa
    payload = _client(server).post("/oracle/rank-process", body)
    lines = [
        f"E[X_{i + 1}] = {v:.10g}" for i, v in enumerate(payload["expectations"])
    ]
    _echo_json_or(payload, as_json, lines)


@oracle.command("first-row-zero")
@click.option("--scheme", required=True, help="Scheme literal (JSON).")
@click.option("--n", required=True, type=int)
@click.option("--kind", default="ginibre", type=click.Choice(["ginibre", "wigner"]))
@_server_option
@_json_option
@_guarded
def oracle_first_row_zero(scheme, n, kind, server, as_json) -> None:
    """Exact probability that the first row is entirely zero."""
    body = {"scheme": _parse_json(scheme, "--scheme"), "n": n, "kind": kind}
    payload = _client(server).post("/oracle/first-row-zero", body)
    _echo_json_or(
        payload, as_json, [f"P(first row zero) = {payload['probability']} ≈ {payload['approx']:.10g}"]
    )


# -- bounds -------------------------------------------------------------------------


@cli.group()
def bound() -> None:
    """Concentration-inequality bound evaluators."""


@bound.command("kr")
@click.option("--lambdas", required=True, help="Comma-separated window widths.")
@click.option("--width", "L", required=True, type=float, help="Target window width L.")
@click.option("--q", "q_at_lambda", required=True, help="Comma-separated window masses q_i(lambda_i).")
@click.option("--c-kr", default=1.0, type=float)
@_server_option
@_json_option
@_guarded
def bound_kr(lambdas, L, q_at_lambda, c_kr, server, as_json) -> None:
    """Window-mass bound C*L / sqrt(sum lambda_i^2 (1 - q_i))."""
    body = {
        "lambdas": _floats(lambdas, "--lambdas"),
        "L": L,
        "q_at_lambda": _floats(q_at_lambda, "--q"),
        "c_kr": c_kr,
    }
    payload = _client(server).post("/bound/kr", body)
    _echo_json_or(payload, as_json, [f"bound = {payload['value']:.10g}"])


@bound.command("kesten")
@click.option("--lambdas", required=True, help="Comma-separated window widths.")
@click.option("--width", "L", required=True, type=float, help="Target window width L.")
@click.option("--q", "q_at_lambda", required=True, help="Comma-separated window masses q_i(lambda_i).")
@click.option("--q-at-width", "q_at_L", required=True, help="Comma-separated window masses q_i(L).")
@click.option("--c-kr", default=1.0, type=float)
@_server_option
@_json_option
@_guarded
def bound_kesten(lambdas, L, q_at_lambda, q_at_L, c_kr, server, as_json) -> None:
    """Refined window-mass bound with the q_i(L) numerator."""
    body = {
        "lambdas": _floats(lambdas, "--lambdas"),
        "L": L,
        "q_at_lambda": _floats(q_at_lambda, "--q"),
        "q_at_L": _floats(q_at_L, "--q-at-width"),
        "c_kr": c_kr,
    }
    payload = _client(server).post("/bound/kesten", body)
    _echo_json_or(payload, as_json, [f"bound = {payload['value']:.10g}"])


@bound.command("linear")
@click.option("--kappas", required=True, help="Comma-separated jump masses.")
@click.option("--kappa-deltas", required=True, help="Comma-separated window-jump masses.")
@click.option("--c-kr", default=1.0, type=float)
@_server_option
@_json_option
@_guarded
def bound_linear(kappas, kappa_deltas, c_kr, server, as_json) -> None:
    """Jump-based bound for linear combinations."""
    body = {
        "kappas": _floats(kappas, "--kappas"),
        "kappa_deltas": _floats(kappa_deltas, "--kappa-deltas"),
        "c_kr": c_kr,
    }
    payload = _client(server).post("/bound/linear", body)
    _echo_json_or(payload, as_json, [f"bound = {payload['value']:.10g}"])


@bound.command("linear-simplified")
@click.option("--kappa", required=True, type=float)
@click.option("--n", required=True, type=int)
@click.option("--c-kr", default=1.0, type=float)
@_server_option
@_json_option
@_guarded
def bound_linear_simplified(kappa, n, c_kr, server, as_json) -> None:
    """Homogeneous-jump linear bound C*kappa / sqrt((1-kappa)^3 n)."""
    body = {"kappa": kappa, "n": n, "c_kr": c_kr}
    payload = _client(server).post("/bound/linear-simplified", body)
    _echo_json_or(payload, as_json, [f"bound = {payload['value']:.10g}"])


@bound.command("quadratic")
@click.option(
    "--neighbors",
    required=True,
    help="JSON: per second-block coordinate, a list of (kappa, kappa_delta) pairs.",
)
@click.option("--own", required=True, help="JSON: (kappa, kappa_delta) per second-block coordinate.")
@click.option("--c-kr", default=1.0, type=float)
@click.option("--budget", default=None, type=int)
@_server_option
@_json_option
@_guarded
def bound_quadratic(neighbors, own, c_kr, budget, server, as_json) -> None:
    """Jump-based bound for quadratic forms (mean + exact subset sup)."""
    body = {
        "neighbor_jumps": _parse_json(neighbors, "--neighbors"),
        "own_jumps": _parse_json(own, "--own"),
        "c_kr": c_kr,
    }
    if budget is not None:
        body["budget"] = budget
    payload = _client(server).post("/bound/quadratic", body)
    _echo_json_or(
        payload,
        as_json,
        [
            f"bound = {payload['value']:.10g} "
            f"(mean term {payload['mean_term']:.6g}, sup term {payload['sup_term']:.6g} "
            f"at subset size {payload['sup_size']})"
        ],
    )


@bound.command("quadratic-simplified")
@click.option("--kappa", required=True, type=float)
@click.option("--n", required=True, type=int)
@click.option("--eps", default=0.0, type=float)
@click.option("--c-kr", default=1.0, type=float)
@_server_option
@_json_option
@_guarded
def bound_quadratic_simplified(kappa, n, eps, c_kr, server, as_json) -> None:
    """Homogeneous-jump quadratic bound [C*kappa / sqrt((1-kappa)^3 n^(1-eps))]^(1/2)."""
    body = {"kappa": kappa, "n": n, "eps": eps, "c_kr": c_kr}
    payload = _client(server).post("/bound/quadratic-simplified", body)
    _echo_json_or(payload, as_json, [f"bound = {payload['value']:.10g}"])


@bound.command("ginibre-tail")
@click.option("--kappa", required=True, type=float)
@click.option("--m", required=True, type=int)
@click.option("--k", required=True, type=int)
@click.option("--n", required=True, type=int)
@_server_option
@_json_option
@_guarded
def bound_ginibre_tail(kappa, m, k, n, server, as_json) -> None:
    """Rank-event tail bounds for an m x k corner inside size n."""
    body = {"kappa": kappa, "m": m, "k": k, "n": n}
    payload = _client(server).post("/bound/ginibre-tail", body)
    _echo_json_or(
        payload,
        as_json,
        [
            f"fill             = {payload['fill']:.10g}",
            f"deficit          = {payload['deficit']:.10g}",
            f"deficit anywhere = {payload['deficit_anywhere']:.10g}",
        ],
    )


@bound.command("entropy-beta")
@click.option("--alpha", required=True, type=float)
@click.option("--kappa", required=True, type=float)
@_server_option
@_json_option
@_guarded
def bound_entropy_beta(alpha, kappa, server, as_json) -> None:
    """Largest grid beta with h(beta)/log2(kappa) + beta <= alpha/2, plus its decay rate."""
    body = {"alpha": alpha, "kappa": kappa}
    payload = _client(server).post("/bound/entropy-beta", body)
    _echo_json_or(
        payload, as_json, [f"beta = {payload['beta']:.10g}", f"gamma = {payload['gamma']:.10g}"]
    )


@bound.command("wigner-rate")
@click.option("--kappa", required=True, type=float)
@click.option("--n", required=True, type=int)
@click.option("--eps", required=True, type=float)
@_server_option
@_json_option
@_guarded
def bound_wigner_rate(kappa, n, eps, server, as_json) -> None:
    """Two-term symmetric-matrix singularity rate and its polynomial tail."""
    body = {"kappa": kappa, "n": n, "eps": eps}
    payload = _client(server).post("/bound/wigner-rate", body)
    _echo_json_or(
        payload,
        as_json,
        [f"f_value = {payload['f_value']:.10g}", f"final_rate = {payload['final_rate']:.10g}"],
    )


@bound.command("graph-rate")
@click.option("--c", required=True, type=float)
@click.option("--beta", required=True, type=float)
@click.option("--eps", required=True, type=float)
@click.option("--n", required=True, type=int)
@_server_option
@_json_option
@_guarded
def bound_graph_rate(c, beta, eps, n, server, as_json) -> None:
    """Adjacency-matrix deficiency rate at clipped density c*ln(n)/n^beta."""
    body = {"c": c, "beta": beta, "eps": eps, "n": n}
    payload = _client(server).post("/bound/graph-rate", body)
    _echo_json_or(
        payload,
        as_json,
        [
            f"rate = {payload['rate']:.10g} (density {payload['density']:.10g}, "
            f"kappa {payload['kappa']:.10g}, exp term {payload['exp_term']:.10g}, "
            f"quarter term {payload['quarter_term']:.10g})"
        ],
    )


# -- server ---------------------------------------------------------------------------


@cli.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
@_guarded
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


def main() -> None:
    cli(prog_name="singlab")


if __name__ == "__main__":
    main()
