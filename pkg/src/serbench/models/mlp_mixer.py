"""MLP-mixer over patched time-frequency input.

The time axis is cropped or padded to a fixed length, consecutive frames
are grouped into tokens, and each block mixes first across tokens and then
across channels through two residual MLPs. Global average pooling over
tokens and a linear head produce the logits.
"""

from __future__ import annotations

import numpy as np

from ..numerics import (
    Tensor,
    add,
    gelu,
    layer_norm,
    matmul,
    mean_pool,
    sigmoid,
    transpose,
)
from .base import Model, xavier


def crop_or_pad(values: np.ndarray, fixed_t: int) -> np.ndarray:
    """Center-crop longer inputs; zero-pad shorter ones at the end."""
    t = values.shape[0]
    if t == fixed_t:
        return values
    if t > fixed_t:
        start = (t - fixed_t) // 2
        return values[start : start + fixed_t]
    return np.pad(values, ((0, fixed_t - t), (0, 0)))


class MlpMixer(Model):
    def _build(self, rng):
        cfg = self.cfg
        self.n_tokens = cfg.fixed_T // cfg.patch_t
        self.token_dim = cfg.patch_t * cfg.input_dim
        hid = cfg.mixer_hidden
        for i in range(cfg.n_layers):
            self._add_param(f"b{i}.ln1_g", np.ones(self.token_dim))
            self._add_param(f"b{i}.ln1_b", np.zeros(self.token_dim))
            # token mixing acts on the transposed (C, T') view, so the
            # weights are stored right-multiplied: (T', hid) then (hid, T')
            self._add_param(f"b{i}.w1", xavier(rng, self.n_tokens, hid))
            self._add_param(f"b{i}.w2", xavier(rng, hid, self.n_tokens))
            self._add_param(f"b{i}.ln2_g", np.ones(self.token_dim))
            self._add_param(f"b{i}.ln2_b", np.zeros(self.token_dim))
            self._add_param(f"b{i}.w4", xavier(rng, self.token_dim, hid))
            self._add_param(f"b{i}.w3", xavier(rng, hid, self.token_dim))
        self._add_param("head.w", xavier(rng, self.token_dim, cfg.n_classes))
        self._add_param("head.b", np.zeros(cfg.n_classes))

    def _act(self, t: Tensor) -> Tensor:
        return gelu(t) if self.cfg.activation == "gelu" else sigmoid(t)

    def block(self, x: Tensor, i: int) -> Tensor:
        """One mixer block: residual token mixing, then residual channel mixing."""
        y = layer_norm(x, self.p(f"b{i}.ln1_g"), self.p(f"b{i}.ln1_b"))
        mixed = matmul(self._act(matmul(transpose(y), self.p(f"b{i}.w1"))), self.p(f"b{i}.w2"))
        u = add(x, transpose(mixed))
        y2 = layer_norm(u, self.p(f"b{i}.ln2_g"), self.p(f"b{i}.ln2_b"))
        mixed2 = matmul(self._act(matmul(y2, self.p(f"b{i}.w4"))), self.p(f"b{i}.w3"))
        return add(u, mixed2)

    def forward(self, values: np.ndarray) -> Tensor:
        cfg = self.cfg
        padded = crop_or_pad(values, cfg.fixed_T)
        tokens = padded.reshape(self.n_tokens, self.token_dim)
        x = Tensor(tokens)
        for i in range(cfg.n_layers):
            x = self.block(x, i)
        pooled = mean_pool(x, axis=0)
        return add(matmul(pooled, self.p("head.w")), self.p("head.b"))
