from typing import Any, Optional

from sqlmodel import Field, SQLModel


# -----------------------
# Input files (non-table)
# -----------------------

class MeasureFile(SQLModel):
    """
    JSON shape of a discrete law:
    {"dim": 2, "atoms": [[0, 0], [1, 1]], "weights": [0.5, 0.5]}
    `dim` and `weights` are optional; weights default to uniform.
    """

    dim: Optional[int] = Field(default=None, ge=1)
    atoms: list[list[float]]
    weights: Optional[list[float]] = None


class StepFunctionFile(SQLModel):
    breakpoints: list[float] = Field(default_factory=list)
    values: list[float] = Field(default_factory=list)
    identity: bool = False


class RectComponent(SQLModel):
    lower: list[float]
    upper: list[float]
    weight: float


class RectMixtureFile(SQLModel):
    dim: int = Field(ge=1)
    components: list[RectComponent]


# -----------------------
# Run configuration
# -----------------------

class RunConfig(SQLModel):
    command: str
    inputs: list[str] = Field(default_factory=list)
    p: str = "1"
    trials: int = Field(default=1000, ge=1)
    seed: int = Field(default=20070611, ge=0)
    tol: float = Field(default=1e-9, gt=0)
    dim: int = Field(default=2, ge=1)
    support: int = Field(default=6, ge=1)
    out: Optional[str] = None
    workers: int = Field(default=1, ge=1)


# -----------------------
# Reports
# -----------------------

class MetricsReport(SQLModel):
    p: str
    marginals_common: bool
    m1: Optional[float] = None
    survival_sup: float
    survival_sup_open: float
    bl1: float
    c0: float
    c1: float
    theorem2_bound: float
    support: list[list[float]] = Field(default_factory=list)
    witness: list[float] = Field(default_factory=list)
    config: dict[str, Any] = Field(default_factory=dict)


class CovBoundsReport(SQLModel):
    cov: float
    alpha: float
    rio_bound: float
    cor2_bound: float
    d_bl: float
    theta: float
    config: dict[str, Any] = Field(default_factory=dict)


class SuiteReport(SQLModel):
    suite: str
    trials: int
    passes: int
    violations: int
    worst_slack: float
    worst_seed: Optional[int] = None
    worst_ratio: Optional[float] = None
    violating_seeds: list[int] = Field(default_factory=list)
    config: dict[str, Any] = Field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.violations == 0


class DecayRow(SQLModel):
    n: int
    coupling_bound_emp: float
    coupling_bound_se: float
    analytic_bound: float
    survival_sup: float
    theorem2_of_coupling: float
