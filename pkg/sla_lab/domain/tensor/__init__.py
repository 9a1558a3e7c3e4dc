from sla_lab.domain.tensor.functional import cross_entropy, kl_divergence, log_softmax, softmax
from sla_lab.domain.tensor.gradcheck import numerical_gradient, relative_error
from sla_lab.domain.tensor.optim import OptimizerConfig, Parameter, learning_rate_at, sgd_step, zero_grad
from sla_lab.domain.tensor.tensor import Function, Tensor, is_grad_enabled, matmul, no_grad

__all__ = [
    "Function",
    "OptimizerConfig",
    "Parameter",
    "Tensor",
    "cross_entropy",
    "is_grad_enabled",
    "kl_divergence",
    "learning_rate_at",
    "log_softmax",
    "matmul",
    "no_grad",
    "numerical_gradient",
    "relative_error",
    "sgd_step",
    "softmax",
    "zero_grad",
]
