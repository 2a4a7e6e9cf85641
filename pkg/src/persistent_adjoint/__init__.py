"""Optimising the fixed point of a parameterised contraction with the persistent adjoint method."""

from .adjoint import (
    AdjointState,
    DifferentiableSystem,
    FunctionalSystem,
    LipschitzBundle,
    LossFunction,
    ScheduleConstants,
    adjoint_gradient,
    adjoint_map,
    adjoint_norm,
    adjoint_step,
    certified_constants,
    fd_gradient,
    implicit_gradient,
    objective,
    schedule_constants,
    weight_p1,
)
from .contraction import (
    InnerLoopResult,
    NonConvergenceError,
    StepMap,
    banach_tail_bound,
    deep_solve,
    iterate_to_tolerance,
    measure_contraction_ratio,
)
from .norms import NormSpec, dual, norm, operator_norm_upper
from .optimizer import (
    DivergenceError,
    OptimizationTrace,
    RunConfig,
    RunResult,
    check_descent,
    check_direction_quality,
    read_trace_csv,
    run,
)

__version__ = "0.1.0"
