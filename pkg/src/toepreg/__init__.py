"""Fast solvers for Tikhonov-regularized Toeplitz least squares."""

from .extension import AssembledSystem, assemble, opt_extend, opt_extend_detail
from .nufft import NufftConfig, run_nufft
from .solver import (
    CGConfig,
    NormalOperator,
    SolveReport,
    SolverConfig,
    apply_normal_operator,
    cg_solve,
    dense_oracle,
    solve_tikhonov,
)
from .tanint import (
    DifficultPoint,
    SingularSystemError,
    TanIntDiagnostics,
    TauState,
    extract_solution,
    rec_tan_int,
    serial_tan_int,
)
from .toeplitz import (
    HermitianToeplitzSpec,
    ProblemSpec,
    ToeplitzSpec,
    adjoint_spec,
    materialize,
    toeplitz_adjoint_matvec,
    toeplitz_matvec,
)

__version__ = "0.1.0"

__all__ = [
    "AssembledSystem",
    "assemble",
    "opt_extend",
    "opt_extend_detail",
    "NufftConfig",
    "run_nufft",
    "CGConfig",
    "NormalOperator",
    "SolveReport",
    "SolverConfig",
    "apply_normal_operator",
    "cg_solve",
    "dense_oracle",
    "solve_tikhonov",
    "DifficultPoint",
    "SingularSystemError",
    "TanIntDiagnostics",
    "TauState",
    "extract_solution",
    "rec_tan_int",
    "serial_tan_int",
    "HermitianToeplitzSpec",
    "ProblemSpec",
    "ToeplitzSpec",
    "adjoint_spec",
    "materialize",
    "toeplitz_adjoint_matvec",
    "toeplitz_matvec",
    "__version__",
]
