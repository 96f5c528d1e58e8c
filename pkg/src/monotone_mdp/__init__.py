"""Monotone-policy solvers for finite-horizon Markov decision processes."""

from .admm import AdmmState, admm_setup, admm_step, primal_residual
from .dp import dp_solve
from .errors import (
    ConfigError,
    ConstrainedModelError,
    DimensionMismatch,
    GenerationFailed,
    IndexOutOfRange,
    InvalidModel,
    InvalidProbability,
    MdpError,
    ModelFileError,
    SingularSystem,
    ZeroDirection,
)
from .generator import GeneratorSpec, machine_replacement_model, random_monotone_mdp
from .isotonic import (
    RegularizedProblem,
    constraint_value_and_subgradient,
    objective,
    penalty,
    project_affine,
    sg_step,
    subgradient_objective,
)
from .lp import StandardFormLp, build_lp, devectorize, flat_index, vectorize
from .mdp import (
    Constraint,
    MdpModel,
    conditional_to_occupation,
    evaluate_expected_cost,
    is_monotone,
    occupation_to_conditional,
    policy_expectation,
    propagate_distribution,
)
from .solver import (
    IterationRecord,
    Mode,
    SolverConfig,
    Status,
    default_lambda,
    rho_sweep,
    solve,
)
from .structure import check_monotone_assumptions

__version__ = "0.1.0"
