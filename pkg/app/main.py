"""FastAPI application for the K(m) benchmark toolkit.

REST endpoints for generation, parameter inference, exact emission
probabilities, satisfiability decisions and small campaigns.
"""

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field
from typing import Optional, List, Dict, Any, Tuple
import logging

from app.campaign import CampaignConfig, CampaignRunner, percentile_column
from app.config import get_settings
from app.decider import k_satisfiable
from app.errors import BoundedOracleGuardError, ModalBenchError, OracleIntractableError
from app.formula import Formula
from app.generator import generate_batch, generate_formula
from app.inference import infer_gen_params
from app.param_spec import GenParams, Method, build_specs, format_spec, normalize_spec
from app.parser import parse_formula, parse_formulas, print_formula
from app.probability_oracle import (
    ProbabilityMode,
    ProbabilityOracle,
    Widening,
    check_monotonicity,
    monte_carlo_frequency,
)
from app.visualization_service import VisualizationService

# Configure logging
logging.basicConfig(
    level=getattr(logging, get_settings().log_level.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

viz_service: VisualizationService = VisualizationService()

app = FastAPI(
    title="K(m) Benchmark Toolkit",
    description="Random CNF-box-m formula generation and K(m) satisfiability testing",
    version="1.0.0",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


# Request/Response Models
class DistributionFields(BaseModel):
    """Scalar or bracket-notation C and p; bracket notation wins."""
    depth: Optional[int] = None
    boxes: Optional[int] = None
    vars: Optional[int] = None
    clause_size: Optional[float] = None
    length_spec: Optional[str] = None
    prop_prob: Optional[float] = None
    prop_spec: Optional[str] = None
    method: Method = Method.NEW

    def has_distribution(self) -> bool:
        return any(v is not None for v in (self.clause_size, self.length_spec, self.prop_prob, self.prop_spec))

    def specs(self, d: int):
        return build_specs(
            d=d, method=self.method, clause_size=self.clause_size, length_spec=self.length_spec,
            prop_prob=self.prop_prob, prop_spec=self.prop_spec,
        )


class GenerateRequest(DistributionFields):
    clauses: int
    count: int = Field(default=1, ge=1)
    seed: int = 0


class GenerateResponse(BaseModel):
    formulas: List[str]
    params: Dict[str, Any]


class InferRequest(BaseModel):
    formula: str
    normalize: bool = False


class InferResponse(BaseModel):
    C: str
    p: str
    depth: int
    boxes: int
    vars: int
    clauses: int


class ProbabilityRequest(DistributionFields):
    formula: str
    mode: ProbabilityMode = ProbabilityMode.AS_SET
    widen_c: List[Tuple[int, int]] = []
    widen_p: List[Tuple[int, int, int]] = []
    fill: int = 1
    monte_carlo: Optional[int] = Field(default=None, ge=1)
    seed: int = 0


class ProbabilityResponse(BaseModel):
    mode: str
    probability: str
    value: float
    note: Optional[str] = None
    zero_support: List[str] = []
    monotonicity: Optional[Dict[str, Any]] = None
    monte_carlo: Optional[Dict[str, Any]] = None


class DecideRequest(BaseModel):
    formulas: str
    timeout: Optional[float] = Field(default=None, gt=0)


class DecideResponse(BaseModel):
    results: List[Dict[str, Any]]


class CampaignRequest(DistributionFields):
    l_values: List[int]
    samples: int = Field(default=20, ge=1)
    percentiles: List[float] = [50.0, 90.0]
    timeout: float = Field(default=1.0, gt=0)
    seed: int = 0


class CampaignResponse(BaseModel):
    points: List[Dict[str, Any]]
    charts: Dict[str, Any]


class StatusResponse(BaseModel):
    status: str
    limits: Dict[str, Any]


def _http_error(e: Exception, action: str) -> HTTPException:
    """Map toolkit errors to HTTP status codes."""
    if isinstance(e, (OracleIntractableError, BoundedOracleGuardError)):
        return HTTPException(status_code=422, detail=str(e))
    if isinstance(e, (ModalBenchError, ValueError)):
        return HTTPException(status_code=400, detail=str(e))
    logger.error(f"Error {action}: {e}")
    return HTTPException(status_code=500, detail=f"Error {action}: {str(e)}")


def _params_for(request: DistributionFields, phi: Formula) -> GenParams:
    inferred = infer_gen_params(phi, m=request.boxes, N=request.vars)
    if not request.has_distribution():
        return inferred
    d = inferred.d if request.depth is None else request.depth
    C, p = request.specs(d)
    return GenParams(d=d, m=inferred.m, L=phi.num_clauses, N=inferred.N, C=C, p=p, method=request.method)


# API Endpoints
@app.get("/")
async def root():
    """Root endpoint."""
    return {
        "message": "K(m) Benchmark Toolkit API",
        "version": "1.0.0",
        "endpoints": {
            "generate": "/generate",
            "infer": "/infer",
            "probability": "/probability",
            "decide": "/decide",
            "campaign": "/campaign",
            "status": "/status",
        }
    }


@app.get("/status", response_model=StatusResponse)
async def get_status():
    settings = get_settings()
    return StatusResponse(
        status="ok",
        limits={
            "default_timeout_seconds": settings.default_timeout_seconds,
            "oracle_guard": settings.oracle_guard,
            "as_set_max_clauses": settings.as_set_max_clauses,
            "api_max_campaign_formulas": settings.api_max_campaign_formulas,
        },
    )


@app.post("/generate", response_model=GenerateResponse)
def generate(request: GenerateRequest):
    """
    Generate random formulas.

    Args:
        request: Parameters, clause count, formula count and seed

    Returns:
        Formulas in text form plus the resolved parameters
    """
    try:
        if request.vars is None:
            raise ModalBenchError("vars is required")
        d = request.depth or 0
        C, p = request.specs(d)
        gp = GenParams(d=d, m=request.boxes or 1, L=request.clauses, N=request.vars, C=C, p=p,
                       method=request.method, seed=request.seed)
        formulas = generate_batch(gp, request.count) if request.count > 1 else [generate_formula(gp)]
        return GenerateResponse(
            formulas=[print_formula(f) for f in formulas],
            params={"d": gp.d, "m": gp.m, "L": gp.L, "N": gp.N, "C": format_spec(C), "p": format_spec(p),
                    "method": gp.method.value, "seed": gp.seed},
        )
    except Exception as e:
        raise _http_error(e, "generating formulas")


@app.post("/infer", response_model=InferResponse)
def infer(request: InferRequest):
    try:
        gp = infer_gen_params(parse_formula(request.formula))
        C, p = (normalize_spec(gp.C), normalize_spec(gp.p)) if request.normalize else (gp.C, gp.p)
        return InferResponse(C=format_spec(C), p=format_spec(p), depth=gp.d, boxes=gp.m, vars=gp.N, clauses=gp.L)
    except Exception as e:
        raise _http_error(e, "inferring parameters")


@app.post("/probability", response_model=ProbabilityResponse)
def probability(request: ProbabilityRequest):
    """
    Exact emission probability of a formula, with optional widening check
    and Monte Carlo estimate.

    Args:
        request: Formula, optional explicit specs, mode and widenings

    Returns:
        Probability as an exact fraction string and as a float
    """
    try:
        phi = parse_formula(request.formula)
        gp = _params_for(request, phi)
        result = ProbabilityOracle(gp).formula_probability(phi, request.mode)
        response = ProbabilityResponse(
            mode=result.mode.value,
            probability=str(result.value),
            value=float(result.value),
            note=result.note,
            zero_support=[str(c) for c in result.zero_support],
        )
        if request.widen_c or request.widen_p:
            widenings = []
            if request.widen_c:
                widenings.append(Widening("C", tuple(request.widen_c), request.fill))
            if request.widen_p:
                widenings.append(Widening("p", tuple(request.widen_p), request.fill))
            report = check_monotonicity(phi, widenings, specs=(gp.C, gp.p), m=gp.m, N=gp.N,
                                        d=gp.d if request.depth is None else request.depth)
            response.monotonicity = {
                "P": str(report.P),
                "P_widened": str(report.P_widened),
                "positive": report.positive,
                "monotone": report.monotone,
                "premise_violations": report.premise_violations,
                "notes": report.notes,
            }
        if request.monte_carlo:
            mc = monte_carlo_frequency(phi, gp, request.monte_carlo, request.seed)
            response.monte_carlo = {
                "hits": mc.hits, "samples": mc.samples, "frequency": mc.frequency,
                "ci_low": mc.ci_low, "ci_high": mc.ci_high, "confidence": mc.confidence,
            }
        return response
    except Exception as e:
        raise _http_error(e, "computing probability")


@app.post("/decide", response_model=DecideResponse)
def decide(request: DecideRequest):
    try:
        results = []
        for phi in parse_formulas(request.formulas):
            outcome = k_satisfiable(phi, request.timeout)
            results.append({
                "status": outcome.status.value,
                "trivially_sat": outcome.trivially_sat,
                "trivially_unsat": outcome.trivially_unsat,
                "elapsed_ms": outcome.elapsed * 1000,
                "branches": outcome.stats.branches,
            })
        if not results:
            raise ModalBenchError("no formula given")
        return DecideResponse(results=results)
    except Exception as e:
        raise _http_error(e, "deciding formulas")


@app.post("/campaign", response_model=CampaignResponse)
def campaign(request: CampaignRequest):
    """
    Run a small synchronous sweep.

    The total number of formulas is bounded by ``api_max_campaign_formulas``;
    larger campaigns belong on the command line.
    """
    try:
        limit = get_settings().api_max_campaign_formulas
        total = len(request.l_values) * request.samples
        if total > limit:
            raise ModalBenchError(f"campaign of {total} formulas exceeds the API limit of {limit}")
        if request.vars is None:
            raise ModalBenchError("vars is required")
        d = request.depth or 0
        C, p = request.specs(d)
        config = CampaignConfig(
            d=d, m=request.boxes or 1, N=request.vars, C=C, p=p, l_values=request.l_values,
            method=request.method, samples_per_point=request.samples, timeout=request.timeout,
            percentiles=request.percentiles, master_seed=request.seed,
        )
        points = CampaignRunner(config).run()
        rows = []
        for pt in points:
            row = {
                "L": pt.L, "L_over_N": pt.L_over_N, "n": pt.n,
                "frac_sat": pt.frac_sat, "frac_unsat": pt.frac_unsat, "frac_timeout": pt.frac_timeout,
                "frac_trivial_sat": pt.frac_trivial_sat, "frac_trivial_unsat": pt.frac_trivial_unsat,
            }
            row.update({percentile_column(q): ms for q, ms in pt.percentile_ms.items()})
            if pt.frac_gen_failure:
                row["frac_gen_failure"] = pt.frac_gen_failure
            rows.append(row)
        return CampaignResponse(points=rows, charts=viz_service.create_all_charts(points))
    except Exception as e:
        raise _http_error(e, "running campaign")


if __name__ == "__main__":
    import uvicorn
    settings = get_settings()

    uvicorn.run(
        "app.main:app",
        host=settings.app_host,
        port=settings.app_port,
        reload=settings.debug,
        reload_dirs=["app"] if settings.debug else None
    )
