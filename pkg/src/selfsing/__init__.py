"""Self-similar heat and Stokes fields with prescribed singular sets.

The three constructions (single point, Cantor set, circle) are described by
an immutable :class:`FieldSpec`; :mod:`selfsing.verify` measures the scaling
claims and :mod:`selfsing.cli` drives both from config files.
"""

from ._backend import BACKEND
from .field import (
    POST_T,
    FieldSpec,
    LevelOverflow,
    blowup_sequence,
    eval_f,
    eval_g,
    eval_grad_z,
    eval_z,
    eval_z_bruteforce,
    eval_Z_lifted,
    interval_index,
    support_box,
)
from .fractal import (
    CantorSpec,
    CapExceeded,
    PointCloud,
    box_counting_dimension,
    chain_point,
    generation,
    limit_set_sample,
)
from .lift import LiftedField, dz3_level_energy, lift
from .params import (
    InfeasibleError,
    ParameterError,
    RegimeReport,
    ScalingParams,
    blowup_time,
    check_regime,
    default_params,
    hausdorff_dimension,
    rho_infty,
    rho_partial,
    sigma_partial,
    suggest_params,
)
from .profile import BRIDGE, BumpProfile, eval_z0, eval_z1, forcing_f1
from .reporting import GridDescriptor, GridDump, sample_grid, sample_vector_grid

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BRIDGE", "BumpProfile", "CantorSpec", "CapExceeded", "FieldSpec",
    "GridDescriptor", "GridDump", "InfeasibleError", "LevelOverflow", "LiftedField",
    "POST_T", "ParameterError", "PointCloud", "RegimeReport", "ScalingParams",
    "blowup_sequence", "blowup_time", "box_counting_dimension", "chain_point",
    "check_regime", "default_params", "dz3_level_energy", "eval_Z_lifted", "eval_f",
    "eval_g", "eval_grad_z", "eval_z", "eval_z0", "eval_z1", "eval_z_bruteforce",
    "forcing_f1", "generation", "hausdorff_dimension", "interval_index", "lift",
    "limit_set_sample", "rho_infty", "rho_partial", "sample_grid", "sample_vector_grid",
    "sigma_partial", "suggest_params", "support_box",
]
