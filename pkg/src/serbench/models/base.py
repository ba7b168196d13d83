"""Model configuration, construction, and checkpoint serialization."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace

import numpy as np

from ..errors import DataError
from ..numerics import Tensor, param
from ..util import config_hash

ARCHS = ("gated_cnn", "mlp_mixer", "bilstm", "transformer")

# Per-architecture defaults for the tunable surface (depth, widths, heads,
# cells, patching). All are desk-scale CPU sizes; override any via config.
_DEFAULTS = {
    "gated_cnn": {"n_layers": 3, "n_kernels": 64, "kernel_width": 7, "final_nodes": 64},
    "mlp_mixer": {"n_layers": 4, "fixed_T": 200, "patch_t": 4, "mixer_hidden": 128},
    "bilstm": {"n_layers": 2, "lstm_cells": 128, "final_nodes": 64},
    "transformer": {"n_layers": 2, "d_model": 64, "n_heads": 4, "ffn_dim": 128},
}


@dataclass(frozen=True)
class ModelConfig:
    """Architecture choice plus its hyperparameter surface.

    Fields default to None and are filled per architecture by resolved().
    input_dim is the feature dimension the model is built for.
    """

    arch: str
    n_classes: int = 4
    input_dim: int = 23
    n_layers: int | None = None
    final_nodes: int | None = None
    n_kernels: int | None = None
    kernel_width: int | None = None
    n_heads: int | None = None
    d_model: int | None = None
    ffn_dim: int | None = None
    lstm_cells: int | None = None
    patch_t: int | None = None
    fixed_T: int | None = None
    mixer_hidden: int | None = None
    activation: str = "gelu"  # mixer block activation: gelu | sigmoid
    use_positions: bool = True  # transformer positional encoding switch

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise DataError(f"unknown architecture {self.arch!r}; expected one of {ARCHS}")
        if self.activation not in ("gelu", "sigmoid"):
            raise DataError(f"activation must be gelu or sigmoid, got {self.activation!r}")

    def resolved(self) -> "ModelConfig":
        """Fill unset fields with the architecture defaults and validate."""
        fills = {
            k: v for k, v in _DEFAULTS[self.arch].items() if getattr(self, k) is None
        }
        cfg = replace(self, **fills) if fills else self
        for key in _DEFAULTS[self.arch]:
            if getattr(cfg, key) <= 0:
                raise DataError(f"{self.arch}: {key} must be positive")
        if cfg.n_classes < 2 or cfg.input_dim < 1:
            raise DataError("need n_classes >= 2 and input_dim >= 1")
        if cfg.arch == "transformer" and cfg.d_model % cfg.n_heads != 0:
            raise DataError(
                f"d_model={cfg.d_model} not divisible by n_heads={cfg.n_heads}"
            )
        if cfg.arch == "mlp_mixer" and cfg.fixed_T % cfg.patch_t != 0:
            raise DataError(
                f"fixed_T={cfg.fixed_T} not divisible by patch_t={cfg.patch_t}"
            )
        return cfg

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise DataError(f"unknown model config field(s): {', '.join(sorted(unknown))}")
        return cls(**d)

    def hash(self) -> str:
        return config_hash(self.resolved().to_dict())


def xavier(rng: np.random.Generator, *shape: int) -> np.ndarray:
    fan_in = int(np.prod(shape[:-1])) if len(shape) > 1 else shape[0]
    fan_out = shape[-1]
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, shape)


class Model:
    """Common surface: an ordered parameter dict plus forward() to logits."""

    cfg: ModelConfig

    def __init__(self, cfg: ModelConfig, seed: int):
        self.cfg = cfg.resolved()
        self.params: dict[str, Tensor] = {}
        self._build(np.random.default_rng(seed))

    def _build(self, rng: np.random.Generator) -> None:
        raise NotImplementedError

    def forward(self, values: np.ndarray) -> Tensor:
        raise NotImplementedError

    def _add_param(self, name: str, values: np.ndarray) -> Tensor:
        t = param(values, name=name)
        self.params[name] = t
        return t

    def p(self, name: str) -> Tensor:
        return self.params[name]

    def param_list(self) -> list[Tensor]:
        return list(self.params.values())

    def param_count(self) -> int:
        return sum(t.size for t in self.params.values())

    def zero_grads(self) -> None:
        for t in self.params.values():
            t.zero_grad()

    def predict(self, values: np.ndarray) -> int:
        return int(np.argmax(self.forward(values).values))


def build_model(cfg: ModelConfig, seed: int) -> Model:
    from .bilstm import BiLstm
    from .gated_cnn import GatedCnn
    from .mlp_mixer import MlpMixer
    from .transformer import Transformer

    cls = {
        "gated_cnn": GatedCnn,
        "mlp_mixer": MlpMixer,
        "bilstm": BiLstm,
        "transformer": Transformer,
    }[cfg.resolved().arch]
    return cls(cfg, seed)


def save_checkpoint(path, model: Model, epoch: int = 0, extra: dict | None = None) -> None:
    """JSON header line + little-endian float64 blob in parameter order."""
    header = {
        "architecture": model.cfg.arch,
        "config": model.cfg.to_dict(),
        "config_hash": model.cfg.hash(),
        "epoch": epoch,
        "params": [[name, list(t.shape)] for name, t in model.params.items()],
    }
    if extra:
        header.update(extra)
    with open(path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for t in model.params.values():
            f.write(t.values.astype("<f8").tobytes())


def load_checkpoint(path) -> tuple[Model, dict]:
    """Rebuild the model described by a checkpoint and restore its parameters."""
    with open(path, "rb") as f:
        header = json.loads(f.readline().decode("utf-8"))
        blob = f.read()
    cfg = ModelConfig.from_dict(header["config"])
    model = build_model(cfg, seed=0)
    names = [name for name, _ in header["params"]]
    if names != list(model.params):
        raise DataError(f"{path}: checkpoint parameter order does not match architecture")
    offset = 0
    for name, shape in header["params"]:
        n = int(np.prod(shape))
        values = np.frombuffer(blob, dtype="<f8", count=n, offset=offset).reshape(shape)
        offset += n * 8
        model.params[name].values = values.astype(np.float64)
    if offset != len(blob):
        raise DataError(f"{path}: checkpoint blob size mismatch")
    return model, header
