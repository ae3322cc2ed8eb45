"""HTTP service exposing the decomposition pipeline.

The service is stateless: every endpoint is a pure function of its request
body, so results are reproducible given the same payload (all randomness is
seed-controlled).
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .._version import __version__
from ..core import (
    ConfigError,
    DcdlfError,
    InputError,
    NumericalError,
    RankTriple,
    ViewMatrix,
)
from ..pipeline import PipelineResult, run_decomposition, run_invariant_checks
from ..population import PopulationModel, population_decomposition, verify_tri_orthogonality
from ..pve import PveTable
from ..simulate import FactorModelSpec, generate
from . import schemas

ERROR_CODES = {
    ConfigError: "config",
    InputError: "input",
    NumericalError: "numerical",
}


def _as_matrix(data, what: str, cols: int | None = None) -> np.ndarray:
    if not data:
        return np.zeros((0, cols or 0))
    widths = {len(row) for row in data}
    if len(widths) != 1:
        raise InputError(f"{what} is ragged: row lengths {sorted(widths)}")
    arr = np.asarray(data, dtype=float)
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise InputError(
            f"{what} has a non-finite entry at row {bad[0]}, column {bad[1]}"
        )
    return arr


def _pve_model(table: PveTable) -> schemas.PveTableModel:
    return schemas.PveTableModel(
        variable_pve_c=table.variable_pve_c.tolist(),
        variable_pve_d=table.variable_pve_d.tolist(),
        view_pve_c=table.view_pve_c,
        view_pve_d=table.view_pve_d,
        weights=table.weights.tolist(),
        zero_variance=table.zero_variance.tolist(),
    )


def _decompose_response(result: PipelineResult) -> schemas.DecomposeResponse:
    dec = result.decomposition
    return schemas.DecomposeResponse(
        ranks=schemas.RanksModel(r1=result.ranks.r1, r2=result.ranks.r2,
                                 rc=result.ranks.rc),
        effective_ranks=schemas.RanksModel(
            r1=result.effective_ranks.r1, r2=result.effective_ranks.r2,
            rc=result.effective_ranks.rc),
        rho=result.rho.tolist(),
        xhat1=result.x1.xhat.values.tolist(),
        xhat2=result.x2.xhat.values.tolist(),
        chat1=dec.c1.values.tolist(),
        chat2=dec.c2.values.tolist(),
        dhat1=dec.d1.values.tolist(),
        dhat2=dec.d2.values.tolist(),
        c_factors=dec.c_factors.tolist(),
        d_factors_1=dec.d_factors_1.tolist(),
        d_factors_2=dec.d_factors_2.tolist(),
        cov_c1=dec.cov_c1.matrix.tolist(),
        cov_c2=dec.cov_c2.matrix.tolist(),
        cov_d1=dec.cov_d1.matrix.tolist(),
        cov_d2=dec.cov_d2.matrix.tolist(),
        pve1=_pve_model(result.pve1),
        pve2=_pve_model(result.pve2),
        tau1=result.x1.tau,
        tau2=result.x2.tau,
        aux_mode=result.aux_mode,
        seed=result.seed,
        diagnostics={k: int(v) for k, v in dec.diagnostics.items()},
        version=result.version,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="dcdlf", version=__version__)

    @app.exception_handler(DcdlfError)
    async def _dcdlf_error(request: Request, exc: DcdlfError) -> JSONResponse:
        code = "numerical"
        for klass, name in ERROR_CODES.items():
            if isinstance(exc, klass):
                code = name
                break
        return JSONResponse(
            status_code=400,
            content={"error_code": code, "message": str(exc)},
        )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/v1/decompose", response_model=schemas.DecomposeResponse)
    def decompose_endpoint(req: schemas.DecomposeRequest) -> schemas.DecomposeResponse:
        y1 = ViewMatrix(_as_matrix(req.view1, "view1"))
        y2 = ViewMatrix(_as_matrix(req.view2, "view2"))
        result = run_decomposition(
            y1, y2, r1=req.r1, r2=req.r2, rc=req.rc,
            rank_rule=req.rank_rule, rc_rule=req.rc_rule,
            rho_cutoff=req.rho_cutoff, aux_mode=req.aux_mode, seed=req.seed,
        )
        return _decompose_response(result)

    @app.post("/v1/simulate", response_model=schemas.SimulateResponse)
    def simulate_endpoint(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
        spec = FactorModelSpec(
            p1=req.p1, p2=req.p2,
            ranks=RankTriple(r1=req.r1, r2=req.r2, rc=req.rc),
            rho=tuple(req.rho), loading_scale=req.loading_scale,
            noise_sd=req.noise_sd, seed=req.seed,
        )
        y1, y2, truth = generate(spec, req.n)
        return schemas.SimulateResponse(
            y1=y1.values.tolist(),
            y2=y2.values.tolist(),
            truth=schemas.TruthModel(
                x1=truth.x1.values.tolist(), x2=truth.x2.values.tolist(),
                c1=truth.c1.values.tolist(), c2=truth.c2.values.tolist(),
                d1=truth.d1.values.tolist(), d2=truth.d2.values.tolist(),
                cov_c1=truth.cov_c1.tolist(), cov_c2=truth.cov_c2.tolist(),
                cov_d1=truth.cov_d1.tolist(), cov_d2=truth.cov_d2.tolist(),
                rho=truth.rho.tolist(),
            ),
            version=__version__,
        )

    @app.post("/v1/oracle", response_model=schemas.OracleResponse)
    def oracle_endpoint(req: schemas.OracleRequest) -> schemas.OracleResponse:
        model = PopulationModel(
            sigma1=_as_matrix(req.sigma1, "sigma1"),
            sigma2=_as_matrix(req.sigma2, "sigma2"),
            sigma12=_as_matrix(req.sigma12, "sigma12"),
        )
        result = population_decomposition(model, req.r1, req.r2, req.rc)
        report = verify_tri_orthogonality(model, req.r1, req.r2, req.rc)
        cca = result.cca
        return schemas.OracleResponse(
            ranks=schemas.RanksModel(r1=cca.r1, r2=cca.r2, rc=cca.rc),
            rho=cca.rho.tolist(),
            b1=cca.b1.tolist(), b2=cca.b2.tolist(),
            cov_c1=result.cov_c1.matrix.tolist(),
            cov_c2=result.cov_c2.matrix.tolist(),
            cov_d1=result.cov_d1.matrix.tolist(),
            cov_d2=result.cov_d2.matrix.tolist(),
            pve1=_pve_model(result.pve1),
            pve2=_pve_model(result.pve2),
            tri_orthogonality=schemas.TriOrthogonalityModel(
                rho=report.rho.tolist(),
                var_c=report.var_c.tolist(),
                var_d1=report.var_d1.tolist(),
                var_d2=report.var_d2.tolist(),
                max_cross_cov=report.max_cross_cov,
                max_var_c_error=report.max_var_c_error,
                max_var_d_error=report.max_var_d_error,
                tolerance=report.tolerance,
                passed=report.passed,
            ),
            version=__version__,
        )

    @app.post("/v1/check", response_model=schemas.CheckResponse)
    def check_endpoint(req: schemas.CheckRequest) -> schemas.CheckResponse:
        xhat1 = _as_matrix(req.xhat1, "xhat1")
        n = xhat1.shape[1]
        checks = run_invariant_checks(
            xhat1=xhat1,
            xhat2=_as_matrix(req.xhat2, "xhat2"),
            chat1=_as_matrix(req.chat1, "chat1"),
            chat2=_as_matrix(req.chat2, "chat2"),
            dhat1=_as_matrix(req.dhat1, "dhat1"),
            dhat2=_as_matrix(req.dhat2, "dhat2"),
            cov_c1=_as_matrix(req.cov_c1, "cov_c1"),
            cov_c2=_as_matrix(req.cov_c2, "cov_c2"),
            cov_d1=_as_matrix(req.cov_d1, "cov_d1"),
            cov_d2=_as_matrix(req.cov_d2, "cov_d2"),
            c_factors=_as_matrix(req.c_factors, "c_factors", cols=n),
            d_factors_1=_as_matrix(req.d_factors_1, "d_factors_1", cols=n),
            d_factors_2=_as_matrix(req.d_factors_2, "d_factors_2", cols=n),
            rho=np.asarray(req.rho, dtype=float),
            pve1_c=np.asarray(req.pve1_c, dtype=float),
            pve1_d=np.asarray(req.pve1_d, dtype=float),
            pve2_c=np.asarray(req.pve2_c, dtype=float),
            pve2_d=np.asarray(req.pve2_d, dtype=float),
            aux_mode=req.aux_mode,
            rc=req.rc,
        )
        items = [
            schemas.CheckItem(name=c.name, value=c.value,
                              tolerance=c.tolerance, status=c.status)
            for c in checks
        ]
        passed = all(c.status != "fail" for c in checks)
        return schemas.CheckResponse(passed=passed, checks=items,
                                     version=__version__)

    return app


app = create_app()
