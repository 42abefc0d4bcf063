from dataclasses import dataclass, fields
from enum import Enum
from typing import Final


class Provenance(Enum):
    FROM_PRIMITIVE = "from_primitive"
    PIECEWISE_LINEAR = "piecewise_linear"
    ZERO = "zero"
    EXTERNAL = "external"
    CANDIDATE = "candidate"
    PICARD = "picard"


class Scheme(Enum):
    RV_SYMMETRIC = "rv_symmetric"
    NC_FUNCTIONAL = "nc_functional"
    CORRECTED_AVERAGED = "corrected_averaged"
    CORRECTED_GERM_SUM = "corrected_germ_sum"


DEFAULT_TOL: Final[float] = 1e-5
DEFAULT_MAX_ITER: Final[int] = 200
DEFAULT_PAIR_BUDGET: Final[int] = 1_000_000
DEFAULT_AUDIT_TRIPLES: Final[int] = 1000
DEFAULT_AUDIT_SEED: Final[int] = 0
DEFAULT_AUDIT_TOL: Final[float] = 1e-8
DEFAULT_FLOW_STEP: Final[float] = 1e-2
DEFAULT_N_CELLS: Final[int] = 1024
DEFAULT_WORKING_RADIUS: Final[float] = 100.0
DEFAULT_THREADS: Final[int] = 1

# Cap on the Newton–Côtes order: closed rules beyond it carry large alternating weights.
NC_MAX_ORDER: Final[int] = 8
FBM_MAX_CELLS: Final[int] = 8192
FBM_JITTER: Final[float] = 1e-12


@dataclass
class Config:
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    pair_budget: int = DEFAULT_PAIR_BUDGET
    audit_triples: int = DEFAULT_AUDIT_TRIPLES
    audit_seed: int = DEFAULT_AUDIT_SEED
    audit_tol: float = DEFAULT_AUDIT_TOL
    flow_step: float = DEFAULT_FLOW_STEP
    n_cells: int = DEFAULT_N_CELLS
    working_radius: float = DEFAULT_WORKING_RADIUS
    threads: int = DEFAULT_THREADS
    log_runs: bool = True

    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))
