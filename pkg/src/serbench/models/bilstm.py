"""Bidirectional LSTM with learned attention pooling.

Standard peephole-free LSTM cells run forward and backward over the frame
sequence; the concatenated hidden states are pooled by softmax attention
against a learnable vector and classified by a small feed-forward head.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from ..numerics import (
    Tape,
    Tensor,
    add,
    concat,
    hadamard,
    matmul,
    narrow,
    relu,
    reshape,
    sigmoid,
    softmax,
    tanh,
)
from .base import Model, xavier


def attention_pool(h: Tensor, u: Tensor) -> tuple[Tensor, np.ndarray]:
    """Softmax(H u) weighted sum of hidden states.

    Returns the pooled (D,) vector and a detached copy of the attention
    weights for inspection.
    """
    if h.values.shape[0] == 0:
        raise DataError("attention_pool needs at least one time step")
    scores = matmul(h, u)  # (T,)
    alpha = softmax(scores, axis=0)
    pooled = matmul(alpha, h)  # (D,)
    return pooled, alpha.values.copy()


def lstm_cell(x_t, h_prev, c_prev, w, u, b, n_cells):
    """One step: gates in i, f, g, o order from a single fused projection."""
    acts = add(add(matmul(x_t, w), matmul(h_prev, u)), b)  # (1, 4H)
    i = sigmoid(narrow(acts, 1, 0, n_cells))
    f = sigmoid(narrow(acts, 1, n_cells, n_cells))
    g = tanh(narrow(acts, 1, 2 * n_cells, n_cells))
    o = sigmoid(narrow(acts, 1, 3 * n_cells, n_cells))
    c = add(hadamard(f, c_prev), hadamard(i, g))
    h = hadamard(o, tanh(c))
    return h, c


class BiLstm(Model):
    def _build(self, rng):
        cfg = self.cfg
        n = cfg.lstm_cells
        in_dim = cfg.input_dim
        for layer in range(cfg.n_layers):
            for d in ("fwd", "bwd"):
                self._add_param(f"l{layer}.{d}.w", xavier(rng, in_dim, 4 * n))
                self._add_param(f"l{layer}.{d}.u", xavier(rng, n, 4 * n))
                bias = np.zeros(4 * n)
                bias[n : 2 * n] = 1.0  # forget-gate bias, stabilizes early training
                self._add_param(f"l{layer}.{d}.b", bias)
            in_dim = 2 * n
        self._add_param("attn.u", rng.standard_normal(2 * n) / np.sqrt(2 * n))
        self._add_param("head.w1", xavier(rng, 2 * n, cfg.final_nodes))
        self._add_param("head.b1", np.zeros(cfg.final_nodes))
        self._add_param("head.w2", xavier(rng, cfg.final_nodes, cfg.n_classes))
        self._add_param("head.b2", np.zeros(cfg.n_classes))

    def _direction(self, x: Tensor, layer: int, d: str, t_len: int) -> list[Tensor]:
        n = self.cfg.lstm_cells
        w, u, b = self.p(f"l{layer}.{d}.w"), self.p(f"l{layer}.{d}.u"), self.p(f"l{layer}.{d}.b")
        h = Tensor(np.zeros((1, n)))
        c = Tensor(np.zeros((1, n)))
        steps = range(t_len) if d == "fwd" else range(t_len - 1, -1, -1)
        out: list[Tensor] = [None] * t_len  # type: ignore[list-item]
        for t in steps:
            h, c = lstm_cell(narrow(x, 0, t, 1), h, c, w, u, b, n)
            out[t] = h
        return out

    def hidden_states(self, values: np.ndarray) -> Tensor:
        """(T, 2H) concatenated forward/backward states of the top layer."""
        t_len = values.shape[0]
        if t_len == 0:
            raise DataError("empty input sequence")
        x = Tensor(values)
        for layer in range(self.cfg.n_layers):
            fwd = self._direction(x, layer, "fwd", t_len)
            bwd = self._direction(x, layer, "bwd", t_len)
            rows = [concat([fwd[t], bwd[t]], axis=1) for t in range(t_len)]
            x = concat(rows, axis=0)  # (T, 2H)
        return x

    def forward(self, values: np.ndarray) -> Tensor:
        h = self.hidden_states(values)
        pooled, _ = attention_pool(h, self.p("attn.u"))
        z = reshape(pooled, (1, pooled.size))
        hid = relu(add(matmul(z, self.p("head.w1")), self.p("head.b1")))
        logits = add(matmul(hid, self.p("head.w2")), self.p("head.b2"))
        return reshape(logits, (self.cfg.n_classes,))

    def attention_weights(self, values: np.ndarray) -> np.ndarray:
        """Attention weights for one utterance (runs without a tape)."""
        _, alpha = attention_pool(self.hidden_states(values), self.p("attn.u"))
        return alpha
