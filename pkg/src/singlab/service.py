"""HTTP service exposing the exact oracles, bound evaluators, and experiments.

Request envelopes are pydantic models; rational scalars travel as strings or
integers (never floats) and composite literals (distributions, schemes,
matrices) are validated by the same parsers the library uses everywhere else.
Domain errors map to HTTP 422 with a machine-readable ``code`` of either
``config`` (bad input) or ``budget`` (exact computation too large).
"""

from __future__ import annotations

from typing import Any, Literal, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from . import __version__
from .bounds import (
    BoundConstants,
    BoundInput,
    entropy_beta,
    gamma_kappa,
    ginibre_tail,
    graph_rate,
    graph_rate_terms,
    kesten_bound,
    kr_bound,
    linear_bound,
    linear_bound_simplified,
    quadratic_bound,
    quadratic_bound_simplified,
    wigner_rate,
)
from .dist import DiscreteDist, as_fraction, dist_from_json, dist_to_json
from .ensembles import scheme_from_json
from .errors import BudgetError, SinglabError
from .harness import (
    CheckBoundsConfig,
    check_bounds,
    check_bounds_config_from_json,
    config_from_json,
    fit_rate,
    graph_experiment,
    mc_singularity,
    run_rank_process,
)
from .oracle import (
    DEFAULT_ENUM_BUDGET,
    enumerate_singularity,
    exact_border_law,
    exact_linear_concentration,
    exact_quadratic_concentration,
    exact_rank_process,
    first_row_zero_prob,
    linear_combination_law,
    quadratic_form_law,
    verify_decoupling,
)
from .xlinalg import DEFAULT_SUBSET_BUDGET, matrix_from_json


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


# -- oracle envelopes ---------------------------------------------------------


class SingularityRequest(_Model):
    scheme: dict
    n: int
    kind: Literal["ginibre", "wigner"]
    budget: int = DEFAULT_ENUM_BUDGET


class ProbabilityResponse(_Model):
    probability: str
    approx: float


class LinearConcentrationRequest(_Model):
    alphas: list[Any]
    dists: list[dict]


class ConcentrationResponse(_Model):
    sup_mass: str
    sup_mass_approx: float
    at: str
    law: dict


class QuadraticConcentrationRequest(_Model):
    coeffs: list[list[Any]]
    dists: list[dict]
    budget: int = DEFAULT_ENUM_BUDGET


class IntervalModel(_Model):
    lo: Optional[Any] = None
    hi: Optional[Any] = None


class DecouplingRequest(_Model):
    coeffs: list[list[Any]]
    dists: list[dict]
    s1: list[int]
    s2: list[int]
    interval: IntervalModel = IntervalModel()
    budget: int = DEFAULT_ENUM_BUDGET


class DecouplingResponse(_Model):
    lhs_squared: str
    rhs: str
    lhs_squared_approx: float
    rhs_approx: float
    holds: bool


class BorderLawRequest(_Model):
    matrix: list[list[Any]]
    scheme: dict
    budget: int = DEFAULT_ENUM_BUDGET


class LawResponse(_Model):
    law: dict
    approx: dict[str, float]


class RankProcessOracleRequest(_Model):
    scheme: dict
    n_max: int
    kappa: Optional[float] = None
    budget: int = DEFAULT_ENUM_BUDGET


class RankProcessOracleResponse(_Model):
    expectations: list[float]


class FirstRowZeroRequest(_Model):
    scheme: dict
    n: int
    kind: Literal["ginibre", "wigner"]


# -- bound envelopes ----------------------------------------------------------


class WindowBoundRequest(_Model):
    lambdas: list[float]
    L: float
    q_at_lambda: list[float]
    q_at_L: Optional[list[float]] = None
    c_kr: float = 1.0


class ValueResponse(_Model):
    value: float


class LinearBoundRequest(_Model):
    kappas: list[float]
    kappa_deltas: list[float]
    c_kr: float = 1.0


class SimplifiedLinearRequest(_Model):
    kappa: float
    n: int
    c_kr: float = 1.0


class QuadraticBoundRequest(_Model):
    neighbor_jumps: list[list[tuple[float, float]]]
    own_jumps: list[tuple[float, float]]
    c_kr: float = 1.0
    budget: int = DEFAULT_SUBSET_BUDGET


class QuadraticBoundResponse(_Model):
    value: float
    mean_term: float
    sup_term: float
    sup_size: int


class SimplifiedQuadraticRequest(_Model):
    kappa: float
    n: int
    eps: float = 0.0
    c_kr: float = 1.0


class GinibreTailRequest(_Model):
    kappa: float
    m: int
    k: int
    n: int


class GinibreTailResponse(_Model):
    fill: float
    deficit: float
    deficit_anywhere: float


class EntropyBetaRequest(_Model):
    alpha: float
    kappa: float


class EntropyBetaResponse(_Model):
    beta: float
    gamma: float


class WignerRateRequest(_Model):
    kappa: float
    n: int
    eps: float


class WignerRateResponse(_Model):
    f_value: float
    final_rate: float


class GraphRateRequest(_Model):
    c: float
    beta: float
    eps: float
    n: int


class GraphRateResponse(_Model):
    rate: float
    density: float
    kappa: float
    exp_term: float
    quarter_term: float


# -- experiment envelopes -------------------------------------------------------


class ExperimentRequest(_Model):
    config: dict


class ReportResponse(_Model):
    report: dict
    csv: str


class CheckBoundsRequest(_Model):
    config: dict = {}


class CheckBoundsResponse(_Model):
    report: dict
    text: str


class FitRequest(_Model):
    points: list[tuple[float, float]]


class FitResponse(_Model):
    exponent: float
    stderr: float
    intercept: float
    points: int


def _law_response(law: DiscreteDist) -> LawResponse:
    return LawResponse(
        law=dist_to_json(law),
        approx={str(v): float(m) for v, m in law.atoms},
    )


def create_app() -> FastAPI:
    app = FastAPI(title="singlab", version=__version__)

    @app.exception_handler(SinglabError)
    async def _domain_error(request: Request, exc: SinglabError) -> JSONResponse:
        code = "budget" if isinstance(exc, BudgetError) else "config"
        return JSONResponse(status_code=422, content={"detail": str(exc), "code": code})

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "version": __version__}

    # -- oracle ---------------------------------------------------------------

    @app.post("/oracle/singularity", response_model=ProbabilityResponse)
    def oracle_singularity(req: SingularityRequest) -> ProbabilityResponse:
        p = enumerate_singularity(scheme_from_json(req.scheme), req.n, req.kind, req.budget)
        return ProbabilityResponse(probability=str(p), approx=float(p))

    @app.post("/oracle/linear", response_model=ConcentrationResponse)
    def oracle_linear(req: LinearConcentrationRequest) -> ConcentrationResponse:
        dists = [dist_from_json(d) for d in req.dists]
        law = linear_combination_law(req.alphas, dists)
        mass, at = exact_linear_concentration(req.alphas, dists)
        return ConcentrationResponse(
            sup_mass=str(mass), sup_mass_approx=float(mass), at=str(at), law=dist_to_json(law)
        )

    @app.post("/oracle/quadratic", response_model=ConcentrationResponse)
    def oracle_quadratic(req: QuadraticConcentrationRequest) -> ConcentrationResponse:
        dists = [dist_from_json(d) for d in req.dists]
        law = quadratic_form_law(req.coeffs, dists, req.budget)
        mass, at = exact_quadratic_concentration(req.coeffs, dists, req.budget)
        return ConcentrationResponse(
            sup_mass=str(mass), sup_mass_approx=float(mass), at=str(at), law=dist_to_json(law)
        )

    @app.post("/oracle/decoupling", response_model=DecouplingResponse)
    def oracle_decoupling(req: DecouplingRequest) -> DecouplingResponse:
        dists = [dist_from_json(d) for d in req.dists]
        interval = (req.interval.lo, req.interval.hi)
        lhs_sq, rhs, holds = verify_decoupling(
            req.coeffs, dists, req.s1, req.s2, interval, req.budget
        )
        return DecouplingResponse(
            lhs_squared=str(lhs_sq),
            rhs=str(rhs),
            lhs_squared_approx=float(lhs_sq),
            rhs_approx=float(rhs),
            holds=holds,
        )

    @app.post("/oracle/border-law", response_model=LawResponse)
    def oracle_border_law(req: BorderLawRequest) -> LawResponse:
        law = exact_border_law(matrix_from_json(req.matrix), scheme_from_json(req.scheme), req.budget)
        return _law_response(law)

    @app.post("/oracle/rank-process", response_model=RankProcessOracleResponse)
    def oracle_rank_process(req: RankProcessOracleRequest) -> RankProcessOracleResponse:
        values = exact_rank_process(scheme_from_json(req.scheme), req.n_max, req.kappa, req.budget)
        return RankProcessOracleResponse(expectations=values)

    @app.post("/oracle/first-row-zero", response_model=ProbabilityResponse)
    def oracle_first_row_zero(req: FirstRowZeroRequest) -> ProbabilityResponse:
        p = first_row_zero_prob(scheme_from_json(req.scheme), req.n, req.kind)
        return ProbabilityResponse(probability=str(p), approx=float(p))

    # -- bounds -----------------------------------------------------------------

    @app.post("/bound/kr", response_model=ValueResponse)
    def bound_kr(req: WindowBoundRequest) -> ValueResponse:
        inp = BoundInput(
            lambdas=tuple(req.lambdas),
            L=req.L,
            q_at_lambda=tuple(req.q_at_lambda),
            q_at_L=tuple(req.q_at_L) if req.q_at_L is not None else None,
        )
        return ValueResponse(value=kr_bound(inp, BoundConstants(c_kr=req.c_kr)))

    @app.post("/bound/kesten", response_model=ValueResponse)
    def bound_kesten(req: WindowBoundRequest) -> ValueResponse:
        inp = BoundInput(
            lambdas=tuple(req.lambdas),
            L=req.L,
            q_at_lambda=tuple(req.q_at_lambda),
            q_at_L=tuple(req.q_at_L) if req.q_at_L is not None else None,
        )
        return ValueResponse(value=kesten_bound(inp, BoundConstants(c_kr=req.c_kr)))

    @app.post("/bound/linear", response_model=ValueResponse)
    def bound_linear(req: LinearBoundRequest) -> ValueResponse:
        value = linear_bound(req.kappas, req.kappa_deltas, BoundConstants(c_kr=req.c_kr))
        return ValueResponse(value=value)

    @app.post("/bound/linear-simplified", response_model=ValueResponse)
    def bound_linear_simplified(req: SimplifiedLinearRequest) -> ValueResponse:
        value = linear_bound_simplified(req.kappa, req.n, BoundConstants(c_kr=req.c_kr))
        return ValueResponse(value=value)

    @app.post("/bound/quadratic", response_model=QuadraticBoundResponse)
    def bound_quadratic(req: QuadraticBoundRequest) -> QuadraticBoundResponse:
        out = quadratic_bound(
            req.neighbor_jumps, req.own_jumps, BoundConstants(c_kr=req.c_kr), req.budget
        )
        return QuadraticBoundResponse(
            value=out.value, mean_term=out.mean_term, sup_term=out.sup_term, sup_size=out.sup_size
        )

    @app.post("/bound/quadratic-simplified", response_model=ValueResponse)
    def bound_quadratic_simplified(req: SimplifiedQuadraticRequest) -> ValueResponse:
        value = quadratic_bound_simplified(req.kappa, req.n, req.eps, BoundConstants(c_kr=req.c_kr))
        return ValueResponse(value=value)

    @app.post("/bound/ginibre-tail", response_model=GinibreTailResponse)
    def bound_ginibre_tail(req: GinibreTailRequest) -> GinibreTailResponse:
        b1, b2, b3 = ginibre_tail(req.kappa, req.m, req.k, req.n)
        return GinibreTailResponse(fill=b1, deficit=b2, deficit_anywhere=b3)

    @app.post("/bound/entropy-beta", response_model=EntropyBetaResponse)
    def bound_entropy_beta(req: EntropyBetaRequest) -> EntropyBetaResponse:
        beta = entropy_beta(req.alpha, req.kappa)
        return EntropyBetaResponse(beta=beta, gamma=gamma_kappa(req.alpha, beta, req.kappa))

    @app.post("/bound/wigner-rate", response_model=WignerRateResponse)
    def bound_wigner_rate(req: WignerRateRequest) -> WignerRateResponse:
        f_value, final_rate = wigner_rate(req.kappa, req.n, req.eps)
        return WignerRateResponse(f_value=f_value, final_rate=final_rate)

    @app.post("/bound/graph-rate", response_model=GraphRateResponse)
    def bound_graph_rate(req: GraphRateRequest) -> GraphRateResponse:
        rate = graph_rate(req.c, req.beta, req.eps, req.n)
        terms = graph_rate_terms(req.c, req.beta, req.eps, req.n)
        return GraphRateResponse(
            rate=rate,
            density=terms["density"],
            kappa=terms["kappa"],
            exp_term=terms["exp_term"],
            quarter_term=terms["quarter_term"],
        )

    # -- experiments ---------------------------------------------------------------

    @app.post("/experiment/mc", response_model=ReportResponse)
    def experiment_mc(req: ExperimentRequest) -> ReportResponse:
        config = config_from_json(req.config)
        if config.kind == "rank_process":
            report = run_rank_process(config)
        elif config.kind == "graph":
            report = graph_experiment(config)
        else:
            report = mc_singularity(config)
        return ReportResponse(report=report.to_json(), csv=report.to_csv())

    @app.post("/experiment/rank-process", response_model=ReportResponse)
    def experiment_rank_process(req: ExperimentRequest) -> ReportResponse:
        report = run_rank_process(config_from_json(req.config))
        return ReportResponse(report=report.to_json(), csv=report.to_csv())

    @app.post("/experiment/graph", response_model=ReportResponse)
    def experiment_graph(req: ExperimentRequest) -> ReportResponse:
        report = graph_experiment(config_from_json(req.config))
        return ReportResponse(report=report.to_json(), csv=report.to_csv())

    @app.post("/experiment/check-bounds", response_model=CheckBoundsResponse)
    def experiment_check_bounds(req: CheckBoundsRequest) -> CheckBoundsResponse:
        config = check_bounds_config_from_json(req.config) if req.config else CheckBoundsConfig()
        report = check_bounds(config)
        return CheckBoundsResponse(report=report.to_json(), text=report.to_text())

    @app.post("/fit", response_model=FitResponse)
    def fit(req: FitRequest) -> FitResponse:
        result = fit_rate(req.points)
        return FitResponse(
            exponent=result.exponent,
            stderr=result.stderr,
            intercept=result.intercept,
            points=result.points,
        )

    return app
