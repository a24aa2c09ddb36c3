"""
Pydantic schemas for nmfbench.

This module defines the validated configuration objects shared by the
solvers, the initializers and the benchmark harness, plus the request and
response models of the HTTP service. Invariants such as tol > 0 or an odd
Gabor window are field constraints, so an invalid configuration can never
reach the numerical code.
"""

import math
from datetime import datetime
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

SolverKind = Literal["sed-mu", "kl-mu", "anls"]

# Stopping threshold on ||W^k H^k - W^{k-1} H^{k-1}||_F
DEFAULT_TOL = 1e-10
# Added to multiplicative-update denominators only
DEFAULT_EPSILON_GUARD = 1e-12

# ===== SOLVER SCHEMAS =====

class SolverConfig(BaseModel):
    """
    Configuration of one NMF solver run.

    Attributes:
        kind: Update engine ('sed-mu', 'kl-mu' or 'anls')
        max_iter: Iteration cap, >= 1
        tol: Threshold on the successive-product difference, > 0
        epsilon_guard: Constant added to MU denominators, > 0
    """
    model_config = ConfigDict(frozen=True)

    kind: SolverKind = "sed-mu"
    max_iter: int = Field(default=500, ge=1)
    tol: float = Field(default=DEFAULT_TOL, gt=0)
    epsilon_guard: float = Field(default=DEFAULT_EPSILON_GUARD, gt=0)

# ===== INITIALIZER SCHEMAS =====

class DeConfig(BaseModel):
    """
    Differential evolution settings for population-based initialization.

    Attributes:
        population: Number of members (the DE engine needs at least 5)
        weight: Differential weight F
        crossover: Crossover probability CR in [0, 1]
        generations: Number of generations
        upper: Upper bound of every coordinate; None means max(X)
    """
    model_config = ConfigDict(frozen=True)

    population: int = Field(default=20, ge=5)
    weight: float = Field(default=0.8, gt=0, le=2)
    crossover: float = Field(default=0.9, ge=0, le=1)
    generations: int = Field(default=200, ge=1)
    upper: Optional[float] = Field(default=None, gt=0)


class GaborBank(BaseModel):
    """
    Gabor kernel family.

    Attributes:
        scales: Number of scales v
        orientations: Number of orientations mu
        sigma: Envelope width relative to the wavelength
        k_max: Largest wave number
        spacing: Ratio between consecutive scales
        window: Odd kernel size; None sizes the window per scale so the
            Gaussian envelope is covered to 7 standard deviations
    """
    model_config = ConfigDict(frozen=True)

    scales: int = Field(default=5, ge=1)
    orientations: int = Field(default=8, ge=1)
    sigma: float = Field(default=2 * math.pi, gt=0)
    k_max: float = Field(default=math.pi / 2, gt=0)
    spacing: float = Field(default=math.sqrt(2), gt=0)
    window: Optional[int] = Field(default=None, ge=1)

    @field_validator("window")
    @classmethod
    def window_is_odd(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value % 2 == 0:
            raise ValueError("Gabor window must be odd")
        return value

# ===== BENCHMARK SCHEMAS =====

class RunSpec(BaseModel):
    """
    One benchmark grid: a dataset, a rank, initializers, a solver and seeds.

    Attributes:
        data: Dataset reference ('csv:PATH', 'pgm:DIR' or 'synth:m,n,r,density,noise')
        rank: Factorization rank, or 'auto' for the 90% spectrum rule
        inits: Registered initializer names
        params: Initializer parameters forwarded by name (KEY -> VALUE)
        solver: Solver configuration
        seeds: Replicates for randomized initializers
        master_seed: Seed every cell seed is derived from
        train_count: Number of training columns, None for all
        timing: Record wall-clock milliseconds (breaks byte-identical reruns)
        jobs: Number of grid cells run concurrently
    """
    data: str
    rank: Union[int, Literal["auto"]] = 4
    inits: List[str] = Field(default_factory=lambda: ["random"], min_length=1)
    params: Dict[str, str] = Field(default_factory=dict)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    seeds: int = Field(default=10, ge=1)
    master_seed: int = Field(default=0, ge=0)
    train_count: Optional[int] = Field(default=None, ge=1)
    timing: bool = False
    jobs: int = Field(default=1, ge=1)

    @field_validator("rank")
    @classmethod
    def rank_is_positive(cls, value):
        if isinstance(value, int) and value < 1:
            raise ValueError("rank must be >= 1")
        return value

    @field_validator("inits")
    @classmethod
    def inits_are_registered(cls, value: List[str]) -> List[str]:
        # Imported here: the registry itself depends on this module
        from nmfbench.initializers import REGISTRY

        unknown = [name for name in value if name not in REGISTRY]
        if unknown:
            raise ValueError(f"unknown initializer(s): {', '.join(unknown)}")
        return value


class RunRecord(BaseModel):
    """
    One traced iteration of one grid cell.

    Attributes:
        dataset: Dataset name
        init: Initializer name
        solver: Solver kind
        seed: Cell seed, '-' for deterministic initializers, 'mean' for summaries
        iteration: Iteration index (0 = initializer output)
        objective: Solver objective value
        rel_error: ||X - WH||_F / ||X||_F
        elapsed_ms: Milliseconds since the solver started
        stop_reason: 'tol' or 'max_iter' on the last iteration, '' otherwise
    """
    model_config = ConfigDict(from_attributes=True)

    dataset: str
    init: str
    solver: str
    seed: str
    iteration: int = Field(ge=0)
    objective: float
    rel_error: float = Field(ge=0)
    elapsed_ms: float = Field(default=0.0, ge=0)
    stop_reason: str = ""


class CellFailure(BaseModel):
    """A grid cell that raised a domain error."""
    dataset: str
    init: str
    solver: str
    seed: str
    message: str

# ===== API SCHEMAS =====

class InitOut(BaseModel):
    """
    Registered initializer as listed by the API and the CLI.

    Attributes:
        name: Registry name
        family: 'random', 'clustering', 'heuristic' or 'low-rank'
        randomized: True if the output depends on the seed
    """
    name: str
    family: str
    randomized: bool


class RunOut(BaseModel):
    """Stored benchmark run returned by the API."""
    model_config = ConfigDict(from_attributes=True)

    id: int
    dataset: str
    rank: int
    solver: str
    inits: str
    seeds: int
    master_seed: int
    created_at: datetime
    record_count: int
    failures: List[CellFailure] = Field(default_factory=list)
