"""
Initializer registry.

Maps every registered name to a builder with one calling convention,
build(x, r, seed, params, image_shape), so the benchmark grid and the HTTP
service can treat all initialization schemes alike. `params` carries the
string-valued KEY=VALUE pairs given on the command line; each builder reads
the keys it understands and ignores the rest.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from nmfbench.errors import UnknownName
from nmfbench.initializers import clustering, heuristic, lowrank, random_schemes
from nmfbench.linalg import DenseMatrix
from nmfbench.schemas import DeConfig, GaborBank, InitOut
from nmfbench.solvers import FactorPair

Params = Mapping[str, str]
Builder = Callable[[DenseMatrix, int, int, Params, Optional[Tuple[int, int]]], FactorPair]

# Columns averaged per W column by Random Acol / Random C when q is not given
DEFAULT_Q = 5


@dataclass(frozen=True)
class InitSpec:
    """
    Registry entry.

    Attributes:
        name: Registry name
        family: 'random', 'clustering', 'heuristic' or 'low-rank'
        randomized: True if the output depends on the seed
        build: Builder with the registry calling convention
    """
    name: str
    family: str
    randomized: bool
    build: Builder

    def describe(self) -> InitOut:
        return InitOut(name=self.name, family=self.family, randomized=self.randomized)

# ===== PARAMETER HELPERS =====

def _int(params: Params, key: str, default: Optional[int]) -> Optional[int]:
    if key not in params:
        return default
    try:
        return int(params[key])
    except ValueError:
        raise ValueError(f"parameter {key} must be an integer, got {params[key]!r}")


def _float(params: Params, key: str, default: float) -> float:
    if key not in params:
        return default
    try:
        return float(params[key])
    except ValueError:
        raise ValueError(f"parameter {key} must be a number, got {params[key]!r}")


def _q(x: DenseMatrix, params: Params) -> int:
    return _int(params, "q", min(DEFAULT_Q, x.shape[1]))


def _de_config(params: Params) -> DeConfig:
    defaults = DeConfig()
    return DeConfig(
        population=_int(params, "population", defaults.population),
        generations=_int(params, "generations", defaults.generations),
    )

# ===== BUILDERS =====

def _kmeans(variant: str) -> Builder:
    def build(x, r, seed, params, image_shape=None):
        return clustering.init_kmeans(
            x, r, variant, seed,
            fuzzifier=_float(params, "fuzzifier", 2.0),
            seeding=params.get("seeding", "forgy"),
        )
    return build


def _npca(projection: lowrank.Projection) -> Builder:
    def build(x, r, seed, params, image_shape=None):
        return lowrank.init_npca(x, r, lowrank.NPCA_FALLBACK_SEED, projection=projection)
    return build


_ENTRIES: List[InitSpec] = [
    InitSpec("random", "random", True,
             lambda x, r, seed, params, shape=None: random_schemes.init_random(*x.shape, r, seed)),
    InitSpec("random-acol", "random", True,
             lambda x, r, seed, params, shape=None:
             random_schemes.init_random_acol(x, r, _q(x, params), seed)),
    InitSpec("random-c", "random", True,
             lambda x, r, seed, params, shape=None:
             random_schemes.init_random_c(x, r, _q(x, params), _int(params, "pool", None), seed)),
    InitSpec("cooc", "random", True,
             lambda x, r, seed, params, shape=None: random_schemes.init_cooccurrence(x, r, seed)),
    InitSpec("gabor", "random", True,
             lambda x, r, seed, params, shape=None:
             random_schemes.init_gabor(x, shape, r, GaborBank(), seed)),
    InitSpec("kmeans-a", "clustering", True, _kmeans("A")),
    InitSpec("kmeans-b", "clustering", True, _kmeans("B")),
    InitSpec("kmeans-c", "clustering", True, _kmeans("C")),
    InitSpec("kmeans-d", "clustering", True, _kmeans("D")),
    InitSpec("fcm", "clustering", True,
             lambda x, r, seed, params, shape=None:
             clustering.init_fcm(x, r, seed, _float(params, "fuzzifier", 2.0))),
    InitSpec("cro", "clustering", False,
             lambda x, r, seed, params, shape=None: clustering.init_cro(x, r)),
    InitSpec("pba", "heuristic", True,
             lambda x, r, seed, params, shape=None:
             heuristic.init_pba(x, r, _de_config(params), seed)),
    InitSpec("svd-abs", "low-rank", False,
             lambda x, r, seed, params, shape=None: lowrank.init_svd_abs(x, r)),
    InitSpec("nndsvd", "low-rank", False,
             lambda x, r, seed, params, shape=None: lowrank.init_nndsvd(x, r)),
    InitSpec("nnsvd-lrc", "low-rank", False,
             lambda x, r, seed, params, shape=None:
             lowrank.init_nnsvd_lrc(x, r, _int(params, "refine_steps", lowrank.LRC_REFINE_STEPS))),
    InitSpec("npca", "low-rank", False, _npca("clip")),
    InitSpec("npca-abs", "low-rank", False, _npca("abs")),
    InitSpec("nica", "low-rank", True,
             lambda x, r, seed, params, shape=None: lowrank.init_nica(x, r, seed)),
]

REGISTRY: Dict[str, InitSpec] = {entry.name: entry for entry in _ENTRIES}


def lookup(name: str) -> InitSpec:
    """
    Fetch a registry entry by name.

    Raises:
        UnknownName: If the name is not registered
    """
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownName(f"unknown initializer {name!r}; see 'python -m nmfbench list-inits'")


def build_initializer(name: str, x: DenseMatrix, r: int, seed: int,
                      params: Optional[Params] = None,
                      image_shape: Optional[Tuple[int, int]] = None) -> FactorPair:
    """Run the named initializer on x at rank r."""
    return lookup(name).build(x, r, seed, params or {}, image_shape)
