"""Gated convolutional classifier.

Each layer computes LN((x * w_s) .* sigmoid(x * w_g)): two parallel 1-D
temporal convolutions where the sigmoid branch gates the linear branch.
Mean pooling over time and one fully-connected layer produce the logits.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from ..numerics import (
    Tensor,
    add,
    conv1d,
    hadamard,
    layer_norm,
    matmul,
    mean_pool,
    sigmoid,
)
from .base import Model, xavier


def gated_conv(x: Tensor, w_s: Tensor, b_s: Tensor, w_g: Tensor, b_g: Tensor) -> Tensor:
    """Pre-normalization gated convolution: (x * w_s) .* sigmoid(x * w_g)."""
    return hadamard(conv1d(x, w_s, b_s), sigmoid(conv1d(x, w_g, b_g)))


class GatedCnn(Model):
    def _build(self, rng):
        cfg = self.cfg
        # all layers are n_kernels wide except the last, which feeds the
        # classifier with final_nodes channels
        widths = [cfg.n_kernels] * (cfg.n_layers - 1) + [cfg.final_nodes]
        in_ch = cfg.input_dim
        for i, out_ch in enumerate(widths):
            self._add_param(f"l{i}.w_s", xavier(rng, out_ch, cfg.kernel_width, in_ch))
            self._add_param(f"l{i}.b_s", np.zeros(out_ch))
            self._add_param(f"l{i}.w_g", xavier(rng, out_ch, cfg.kernel_width, in_ch))
            self._add_param(f"l{i}.b_g", np.zeros(out_ch))
            self._add_param(f"l{i}.ln_g", np.ones(out_ch))
            self._add_param(f"l{i}.ln_b", np.zeros(out_ch))
            in_ch = out_ch
        self._add_param("head.w", xavier(rng, in_ch, cfg.n_classes))
        self._add_param("head.b", np.zeros(cfg.n_classes))

    def forward(self, values: np.ndarray) -> Tensor:
        if values.shape[0] < self.cfg.kernel_width:
            raise DataError(
                f"input of {values.shape[0]} frames shorter than kernel width "
                f"{self.cfg.kernel_width}"
            )
        x = Tensor(values)
        for i in range(self.cfg.n_layers):
            gated = gated_conv(
                x, self.p(f"l{i}.w_s"), self.p(f"l{i}.b_s"),
                self.p(f"l{i}.w_g"), self.p(f"l{i}.b_g"),
            )
            x = layer_norm(gated, self.p(f"l{i}.ln_g"), self.p(f"l{i}.ln_b"))
        pooled = mean_pool(x, axis=0)
        return add(matmul(pooled, self.p("head.w")), self.p("head.b"))
