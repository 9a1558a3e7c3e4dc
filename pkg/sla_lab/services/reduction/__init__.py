from sla_lab.services.reduction.service import (
    DEFAULT_TOLERANCE,
    ReductionReport,
    TinyProblem,
    check_problem,
    gradient_check,
    loss_functions,
    reduce_check,
    tie_to_multitask_heads,
    tie_to_shared_head,
    tiny_problem,
)

__all__ = [
    "DEFAULT_TOLERANCE",
    "ReductionReport",
    "TinyProblem",
    "check_problem",
    "gradient_check",
    "loss_functions",
    "reduce_check",
    "tie_to_multitask_heads",
    "tie_to_shared_head",
    "tiny_problem",
]
