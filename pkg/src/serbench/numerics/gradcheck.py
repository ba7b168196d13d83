"""Finite-difference verification of analytic gradients."""

from __future__ import annotations

import numpy as np

from .tensor import Tape, Tensor, backward, param


def grad_check(f, x, h: float = 1e-5) -> float:
    """Max relative error of d f / d x against central differences.

    f must be scalar-valued and smooth at x (the caller avoids kinks such
    as relu at 0). Error per coordinate is |analytic - numeric| divided by
    max(1, |analytic|); the max over coordinates is returned.
    """
    values = x.values if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)
    var = param(values.copy())
    with Tape() as tape:
        y = f(var)
    if y.values.size != 1:
        raise ValueError(f"grad_check needs a scalar-valued f, got shape {y.shape}")
    backward(y, tape)
    analytic = var.grad.copy()

    numeric = np.zeros_like(analytic)
    flat = var.values.ravel()
    num_flat = numeric.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        f_plus = float(f(var).values)
        flat[i] = orig - h
        f_minus = float(f(var).values)
        flat[i] = orig
        num_flat[i] = (f_plus - f_minus) / (2.0 * h)

    denom = np.maximum(1.0, np.abs(analytic))
    return float(np.max(np.abs(analytic - numeric) / denom))


def check_model_gradients(model, features: np.ndarray, label: int, h: float = 1e-5) -> dict[str, float]:
    """grad_check every parameter of a model through its cross-entropy loss."""
    from .tensor import cross_entropy

    errors = {}
    for name in list(model.params):
        original = model.params[name]

        def f(t, _name=name, _orig=original):
            model.params[_name] = t
            try:
                return cross_entropy(model.forward(features), label)
            finally:
                model.params[_name] = _orig

        errors[name] = grad_check(f, original, h)
        original.zero_grad()
    for p in model.params.values():
        p.zero_grad()
    return errors
