from .gradcheck import check_model_gradients, grad_check
from .optim import AdamState, adam_step, clip_global_norm, lr_schedule
from .tensor import (
    Tape,
    Tensor,
    add,
    backward,
    concat,
    constant,
    conv1d,
    cross_entropy,
    gelu,
    hadamard,
    layer_norm,
    linear,
    matmul,
    mean_pool,
    mul_scalar,
    narrow,
    param,
    relu,
    reshape,
    sigmoid,
    softmax,
    sum_all,
    tanh,
    transpose,
)

__all__ = [
    "Tape",
    "Tensor",
    "AdamState",
    "adam_step",
    "add",
    "backward",
    "check_model_gradients",
    "clip_global_norm",
    "concat",
    "constant",
    "conv1d",
    "cross_entropy",
    "gelu",
    "grad_check",
    "hadamard",
    "layer_norm",
    "linear",
    "lr_schedule",
    "matmul",
    "mean_pool",
    "mul_scalar",
    "narrow",
    "param",
    "relu",
    "reshape",
    "sigmoid",
    "softmax",
    "sum_all",
    "tanh",
    "transpose",
]
