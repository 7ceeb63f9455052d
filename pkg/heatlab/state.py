from typing import List, Dict, Optional, Any, Tuple, TypedDict, Union
from pydantic import BaseModel, Field, validator, root_validator
from dataclasses import dataclass
from enum import Enum
import hashlib
import json
import math

ARTIFACT_VERSION = "1.0"


class HeatLabError(Exception):
    """Base class for every error raised by heatlab."""


class DomainError(HeatLabError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class SeriesDivergenceError(HeatLabError):
    """The density series cannot reach the requested accuracy at this point."""

    def __init__(self, message: str, smallest_usable_x: float):
        super().__init__(message)
        self.smallest_usable_x = smallest_usable_x


class TailDomainError(HeatLabError):
    """A tail function was evaluated beyond its tabulated domain with no asymptote."""


class IllConditionedFitError(HeatLabError):
    """The least-squares design is too ill-conditioned to trust."""

    def __init__(self, message: str, condition_number: float):
        super().__init__(message)
        self.condition_number = condition_number


class MetadataMismatchError(HeatLabError):
    """A curve and an expansion describe different experiments."""


class UnsupportedRegimeError(HeatLabError):
    """No small-time theorem exists for the requested stable index."""


class Regime(str, Enum):
    """Asymptotic regime selected by the stable index."""
    HIGH_STABLE = "high_stable"
    CAUCHY = "cauchy"
    LOW_STABLE = "low_stable"


class ProcessKind(str, Enum):
    """Order in which subordination and killing are applied."""
    KILLED_SUBORDINATE = "ksbm"
    SUBORDINATE_KILLED = "skbm"


class Provenance(str, Enum):
    """How a heat curve was produced."""
    SERIES = "series"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "mc"


class TailMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"
    MONTE_CARLO_TABLE = "mc_table"


class DensityMethod(str, Enum):
    SERIES = "series"
    TAIL = "tail"
    KANTER_INTEGRAL = "kanter_integral"


class BasisTerm(str, Enum):
    """Regression columns for the defect c1 - Q(t)."""
    T_POWER = "t^(1/alpha)"
    T_LOG = "t*ln(1/t)"
    T = "t"


class StableIndex(BaseModel):
    """Stable index alpha of the symmetric stable process, alpha in (0, 2)."""
    alpha: float = Field(..., gt=0.0, lt=2.0, description="Stable index in (0, 2)")

    class Config:
        frozen = True

    @validator('alpha')
    def alpha_is_finite(cls, v):
        if not math.isfinite(v):
            raise ValueError("alpha must be finite")
        return float(v)

    @classmethod
    def of(cls, value: Union['StableIndex', float]) -> 'StableIndex':
        """Accept either a StableIndex or a bare number."""
        if isinstance(value, StableIndex):
            return value
        try:
            return cls(alpha=float(value))
        except (TypeError, ValueError) as e:
            raise DomainError(f"Invalid stable index {value!r}: alpha must lie in (0, 2)") from e

    @property
    def is_cauchy(self) -> bool:
        return abs(self.alpha - 1.0) < 1e-12

    @property
    def regime(self) -> Regime:
        if self.is_cauchy:
            return Regime.CAUCHY
        return Regime.HIGH_STABLE if self.alpha > 1.0 else Regime.LOW_STABLE

    @property
    def subordinator_index(self) -> float:
        """Index of the stable subordinator, alpha / 2."""
        return self.alpha / 2.0


class Interval(BaseModel):
    """Bounded open interval (a, b)."""
    a: float = Field(..., description="Left endpoint")
    b: float = Field(..., description="Right endpoint")

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def check_order(cls, values):
        a, b = values.get('a'), values.get('b')
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("Interval endpoints must be finite")
        if a >= b:
            raise ValueError(f"Interval requires a < b, got ({a}, {b})")
        return values

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def boundary_count(self) -> int:
        return 2

    def as_tuple(self) -> Tuple[float, float]:
        return (self.a, self.b)


class DensityEvalConfig(BaseModel):
    """Controls evaluation of the one-sided stable density."""
    series_terms: int = Field(60, ge=2, le=400, description="Number of terms in the convergent series")
    crossover: Optional[float] = Field(
        None,
        description="Switch to the large-x asymptote above this point; None calibrates it per alpha"
    )
    target_tol: float = Field(1e-10, gt=0.0, le=1e-3, description="Absolute error target")
    small_x_fallback: bool = Field(
        True,
        description="Use the Kanter integral where the series cannot meet target_tol"
    )

    class Config:
        frozen = True

    @validator('crossover')
    def crossover_positive(cls, v):
        if v is not None and not v > 0:
            raise ValueError("crossover must be positive")
        return v


class SupSampleConfig(BaseModel):
    """Monte Carlo settings for supremum sampling over [0, 1]."""
    n_steps: int = Field(..., ge=1, description="Skeleton steps")
    bridge_correction: bool = Field(True, description="Fill gaps with the Brownian-bridge maximum")
    paths: int = Field(..., ge=1, description="Number of independent paths")
    seed: int = Field(..., description="Root seed of the counter-based generator")
    block_cells: Optional[int] = Field(
        None, ge=1, description="Simulated cells per random-stream block; None reads HEATLAB_BLOCK_CELLS"
    )

    class Config:
        frozen = True


class McConfig(BaseModel):
    """
    Monte Carlo settings for heat content estimation.

    A single path is accepted; its estimate then carries stderr 0.
    """
    paths: int = Field(..., ge=1, description="Number of paths")
    n_steps: int = Field(..., ge=1, description="Skeleton steps on [0, t]")
    x_strata: int = Field(64, ge=1, description="Strata of the starting point")
    seed: int = Field(..., description="Root seed of the counter-based generator")
    block_cells: Optional[int] = Field(
        None, ge=1, description="Simulated cells per random-stream block; None reads HEATLAB_BLOCK_CELLS"
    )

    class Config:
        frozen = True

    def sup_config(self) -> "SupSampleConfig":
        return SupSampleConfig(n_steps=self.n_steps, paths=self.paths, seed=self.seed, block_cells=self.block_cells)


class DensityValue(BaseModel):
    value: float
    method: DensityMethod
    error_estimate: float = 0.0
    low_accuracy: bool = False


class HeatPoint(BaseModel):
    t: float = Field(..., gt=0.0)
    value: float
    stderr: float = Field(0.0, ge=0.0)
    bias_diag: Optional[float] = None


class HeatCurve(BaseModel):
    """Heat content Q(t) sampled on a grid of times."""
    process_kind: ProcessKind
    alpha: StableIndex
    interval: Interval
    points: List[HeatPoint]
    provenance: Provenance

    @root_validator(skip_on_failure=True)
    def check_points(cls, values):
        points = values.get('points') or []
        length = values['interval'].length
        slack = 1e-12 * max(1.0, length)
        for p in points:
            if p.value < -3.0 * p.stderr - slack or p.value > length + 3.0 * p.stderr + slack:
                raise ValueError(f"Heat content {p.value} at t={p.t} outside [0, {length}]")
        ordered = sorted(points, key=lambda p: p.t)
        for earlier, later in zip(ordered, ordered[1:]):
            band = 3.0 * math.hypot(earlier.stderr, later.stderr) + slack
            if later.value > earlier.value + band:
                raise ValueError(f"Heat content increases between t={earlier.t} and t={later.t}")
        values['points'] = ordered
        return values

    def times(self) -> List[float]:
        return [p.t for p in self.points]

    def values_list(self) -> List[float]:
        return [p.value for p in self.points]


class Expansion(BaseModel):
    """Small-time expansion Q(t) = c1 - c2 t^(1/alpha) - c2log t ln(1/t) - c3 t."""
    process_kind: ProcessKind
    alpha: StableIndex
    interval: Interval
    c1: float
    c2: float = 0.0
    c2log: float = 0.0
    c3: float = 0.0
    c2_stderr: float = Field(0.0, ge=0.0, description="Sampling error of c2 when estimated by Monte Carlo")
    source: str = Field("theorem", description="'theorem' or 'eigenseries'")
    constant_provenance: Dict[str, str] = Field(default_factory=dict)

    @root_validator(skip_on_failure=True)
    def check_regime(cls, values):
        alpha, interval = values['alpha'], values['interval']
        if not math.isclose(values['c1'], interval.length, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError("c1 must equal the interval length")
        if alpha.is_cauchy and values['c2'] != 0.0:
            raise ValueError("At alpha = 1 the t^(1/alpha) term is absorbed into t ln(1/t)")
        if not alpha.is_cauchy and values['c2log'] != 0.0:
            raise ValueError("The logarithmic term only exists at alpha = 1")
        return values

    def coefficient(self, term: BasisTerm) -> float:
        return {BasisTerm.T_POWER: self.c2, BasisTerm.T_LOG: self.c2log, BasisTerm.T: self.c3}[term]


class FitResult(BaseModel):
    coefficients: Dict[str, Tuple[float, float]] = Field(
        ..., description="Basis term -> (estimate, standard error)"
    )
    residual_norm: float
    t_window: Tuple[float, float]
    condition_number: float
    points_used: int = 0

    @validator('t_window')
    def window_ordered(cls, v):
        if not 0 < v[0] < v[1]:
            raise ValueError(f"t_window requires 0 < t_min < t_max, got {v}")
        return v


class TGrid(BaseModel):
    """Log-spaced time grid."""
    t_min: float = Field(..., gt=0.0)
    t_max: float = Field(..., gt=0.0)
    points: int = Field(..., ge=1)

    @root_validator(skip_on_failure=True)
    def check_range(cls, values):
        if values['t_min'] > values['t_max']:
            raise ValueError("t_min must not exceed t_max")
        if values['points'] > 1 and values['t_min'] == values['t_max']:
            raise ValueError("A grid with several points needs t_min < t_max")
        return values

    def values(self) -> List[float]:
        if self.points == 1:
            return [self.t_min]
        lo, hi = math.log(self.t_min), math.log(self.t_max)
        step = (hi - lo) / (self.points - 1)
        grid = [math.exp(lo + i * step) for i in range(self.points)]
        grid[0], grid[-1] = self.t_min, self.t_max
        return grid


class ExperimentSpec(BaseModel):
    """Everything needed to replay one CLI invocation."""
    command: str
    params: Dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(..., description="Root seed; always explicit")
    out: Optional[str] = None
    format: str = Field("csv", description="'csv' or 'json'")
    version: str = ARTIFACT_VERSION

    @validator('format')
    def known_format(cls, v):
        if v not in ("csv", "json"):
            raise ValueError(f"Unknown output format: {v}")
        return v

    def canonical_json(self) -> str:
        payload = self.dict(exclude={'out'})
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def spec_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def metadata(self) -> Dict[str, Any]:
        return {
            "artifact_version": self.version,
            "spec_hash": self.spec_hash(),
            "seed": self.seed,
            "command": self.command,
        }


class CriterionResult(BaseModel):
    id: str
    description: str = ""
    passed: bool = False
    measured: Dict[str, Any] = Field(default_factory=dict)
    tolerance: Dict[str, Any] = Field(default_factory=dict)
    detail: str = ""
    elapsed_s: float = 0.0
    error: Optional[str] = None


class SuiteState(TypedDict, total=False):
    """State passed between criterion nodes of the validation graph."""
    suite: str
    budgets: Dict[str, Any]
    results: List[Dict[str, Any]]
    error: Optional[str]


@dataclass
class McEstimate:
    """Monte Carlo estimate; unpacks as (estimate, stderr)."""
    estimate: float
    stderr: float
    bias_diag: Optional[float] = None
    paths: int = 0
    n_steps: int = 0

    def __iter__(self):
        return iter((self.estimate, self.stderr))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "bias_diag": self.bias_diag,
            "paths": self.paths,
            "n_steps": self.n_steps,
        }
