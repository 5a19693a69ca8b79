"""Minimal differentiable-computation layer backing the harmonization model."""

from .tensor import (
    DEFAULT_DTYPE,
    KernelError,
    Tensor,
    add,
    concat,
    dropout,
    exp,
    log,
    log_softmax_rows,
    matmul,
    mul,
    no_grad,
    sigmoid,
    softmax_cross_entropy,
    softmax_rows,
    sub,
    tanh,
    tmean,
    transpose,
    tsum,
    zeros,
)
from .layers import CELL_TYPE, Dropout, LinearLayer, RecurrentLayer, uniform_init
from .optim import AdamOptimizer
from .gradcheck import grad_check

__all__ = [
    "DEFAULT_DTYPE",
    "KernelError",
    "Tensor",
    "add",
    "concat",
    "dropout",
    "exp",
    "log",
    "log_softmax_rows",
    "matmul",
    "mul",
    "no_grad",
    "sigmoid",
    "softmax_cross_entropy",
    "softmax_rows",
    "sub",
    "tanh",
    "tmean",
    "transpose",
    "tsum",
    "zeros",
    "CELL_TYPE",
    "Dropout",
    "LinearLayer",
    "RecurrentLayer",
    "uniform_init",
    "AdamOptimizer",
    "grad_check",
]
