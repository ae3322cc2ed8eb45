"""Pydantic request/response models for the HTTP service.

Matrices travel as nested lists of floats (rows = variables, columns =
samples).  JSON float serialization round-trips float64 exactly, so a
client can reproduce service results bit-for-bit.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

Matrix = list[list[float]]


class RanksModel(BaseModel):
    r1: int
    r2: int
    rc: int


class PveTableModel(BaseModel):
    variable_pve_c: list[float]
    variable_pve_d: list[float]
    view_pve_c: float
    view_pve_d: float
    weights: list[float]
    zero_variance: list[bool]


class DecomposeRequest(BaseModel):
    view1: Matrix
    view2: Matrix
    r1: int | None = None
    r2: int | None = None
    rc: int | None = None
    rank_rule: Literal["explicit", "eigengap"] = "explicit"
    rc_rule: Literal["explicit", "rho_cutoff"] = "explicit"
    rho_cutoff: float = 0.05
    aux_mode: Literal["raw", "projected"] = "projected"
    seed: int = 0


class DecomposeResponse(BaseModel):
    ranks: RanksModel
    effective_ranks: RanksModel
    rho: list[float]
    xhat1: Matrix
    xhat2: Matrix
    chat1: Matrix
    chat2: Matrix
    dhat1: Matrix
    dhat2: Matrix
    c_factors: Matrix
    d_factors_1: Matrix
    d_factors_2: Matrix
    cov_c1: Matrix
    cov_c2: Matrix
    cov_d1: Matrix
    cov_d2: Matrix
    pve1: PveTableModel
    pve2: PveTableModel
    tau1: float
    tau2: float
    aux_mode: str
    seed: int
    diagnostics: dict[str, int]
    version: str


class SimulateRequest(BaseModel):
    p1: int = Field(ge=1)
    p2: int = Field(ge=1)
    r1: int = Field(ge=0)
    r2: int = Field(ge=0)
    rc: int = Field(ge=0)
    rho: list[float]
    loading_scale: float = 1.0
    noise_sd: float = 1.0
    seed: int = 0
    n: int = Field(ge=2)


class TruthModel(BaseModel):
    x1: Matrix
    x2: Matrix
    c1: Matrix
    c2: Matrix
    d1: Matrix
    d2: Matrix
    cov_c1: Matrix
    cov_c2: Matrix
    cov_d1: Matrix
    cov_d2: Matrix
    rho: list[float]


class SimulateResponse(BaseModel):
    y1: Matrix
    y2: Matrix
    truth: TruthModel
    version: str


class OracleRequest(BaseModel):
    sigma1: Matrix
    sigma2: Matrix
    sigma12: Matrix
    r1: int | None = None
    r2: int | None = None
    rc: int | None = None


class TriOrthogonalityModel(BaseModel):
    rho: list[float]
    var_c: list[float]
    var_d1: list[float]
    var_d2: list[float]
    max_cross_cov: float
    max_var_c_error: float
    max_var_d_error: float
    tolerance: float
    passed: bool


class OracleResponse(BaseModel):
    ranks: RanksModel
    rho: list[float]
    b1: Matrix
    b2: Matrix
    cov_c1: Matrix
    cov_c2: Matrix
    cov_d1: Matrix
    cov_d2: Matrix
    pve1: PveTableModel
    pve2: PveTableModel
    tri_orthogonality: TriOrthogonalityModel
    version: str


class CheckRequest(BaseModel):
    xhat1: Matrix
    xhat2: Matrix
    chat1: Matrix
    chat2: Matrix
    dhat1: Matrix
    dhat2: Matrix
    cov_c1: Matrix
    cov_c2: Matrix
    cov_d1: Matrix
    cov_d2: Matrix
    c_factors: Matrix
    d_factors_1: Matrix
    d_factors_2: Matrix
    rho: list[float]
    pve1_c: list[float]
    pve1_d: list[float]
    pve2_c: list[float]
    pve2_d: list[float]
    aux_mode: Literal["raw", "projected"] = "projected"
    rc: int | None = None


class CheckItem(BaseModel):
    name: str
    value: float
    tolerance: float
    status: Literal["pass", "fail", "info"]


class CheckResponse(BaseModel):
    passed: bool
    checks: list[CheckItem]
    version: str


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorBody(BaseModel):
    error_code: Literal["config", "input", "numerical"]
    message: str
