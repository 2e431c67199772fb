"""Block-structured critic network computing T(v, y).

One small sub-network per experimental block compresses that block's 2T-length
encoding into a few learned summary statistics; the concatenated summaries and
the encoded inference target feed a fully-connected head that outputs the
scalar critic value.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

_FORMAT = "banditboed-critic"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class CriticArchitecture:
    n_blocks: int
    block_input_dim: int
    summary_dim: int
    v_dim: int
    block_hidden: tuple = (64, 32)
    head_hidden: tuple = (32, 32)

    def __post_init__(self):
        object.__setattr__(self, "block_hidden", tuple(self.block_hidden))
        object.__setattr__(self, "head_hidden", tuple(self.head_hidden))

    @property
    def head_input_dim(self) -> int:
        return self.n_blocks * self.summary_dim + self.v_dim

    @property
    def y_dim(self) -> int:
        return self.n_blocks * self.block_input_dim

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CriticArchitecture":
        return cls(**d)


def _mlp(sizes) -> nn.Sequential:
    layers = []
    for i in range(len(sizes) - 1):
        layers.append(nn.Linear(sizes[i], sizes[i + 1]))
        if i < len(sizes) - 2:
            layers.append(nn.ReLU())
    return nn.Sequential(*layers)


def _init_fan_in(module: nn.Module, gen: torch.Generator) -> None:
    for m in module.modules():
        if isinstance(m, nn.Linear):
            bound = 1.0 / math.sqrt(m.in_features)
            with torch.no_grad():
                m.weight.uniform_(-bound, bound, generator=gen)
                m.bias.uniform_(-bound, bound, generator=gen)


class CriticNetwork(nn.Module):
    def __init__(self, architecture: CriticArchitecture, seed: int = 0):
        super().__init__()
        self.architecture = architecture
        a = architecture
        self.block_nets = nn.ModuleList(
            _mlp((a.block_input_dim, *a.block_hidden, a.summary_dim))
            for _ in range(a.n_blocks)
        )
        self.head = _mlp((a.head_input_dim, *a.head_hidden, 1))
        gen = torch.Generator().manual_seed(int(seed))
        _init_fan_in(self, gen)

    def summaries(self, y: torch.Tensor) -> torch.Tensor:
        """Per-block learned summary statistics, concatenated to (n, B * summary_dim)."""
        a = self.architecture
        parts = []
        for b, net in enumerate(self.block_nets):
            seg = y[:, b * a.block_input_dim : (b + 1) * a.block_input_dim]
            parts.append(net(seg))
        return torch.cat(parts, dim=1)

    def head_values(self, v: torch.Tensor, summaries: torch.Tensor) -> torch.Tensor:
        return self.head(torch.cat([summaries, v], dim=1)).squeeze(-1)

    def forward(self, v: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
        return self.head_values(v, self.summaries(y))


def _flat_weights(net: CriticNetwork) -> np.ndarray:
    with torch.no_grad():
        return np.concatenate(
            [p.detach().cpu().numpy().astype(np.float32).reshape(-1) for p in net.parameters()]
        )


def save_critic(net: CriticNetwork, path) -> None:
    """Write a critic as a one-line JSON header followed by flat float32 weights."""
    weights = _flat_weights(net)
    header = {
        "format": _FORMAT,
        "version": _FORMAT_VERSION,
        "architecture": net.architecture.to_dict(),
        "dtype": "float32",
        "n_values": int(weights.size),
    }
    with Path(path).open("wb") as fh:
        fh.write((json.dumps(header) + "\n").encode())
        fh.write(weights.tobytes())


def load_critic(path) -> CriticNetwork:
    """Bit-exact reload of a serialized critic."""
    with Path(path).open("rb") as fh:
        header = json.loads(fh.readline().decode())
        payload = fh.read()
    if header.get("format") != _FORMAT or header.get("version") != _FORMAT_VERSION:
        raise ValueError(f"unsupported critic file: {path}")
    arch = CriticArchitecture.from_dict(header["architecture"])
    net = CriticNetwork(arch, seed=0)
    flat = np.frombuffer(payload, dtype=np.float32)
    if flat.size != header["n_values"]:
        raise ValueError("critic payload is truncated")
    offset = 0
    with torch.no_grad():
        for p in net.parameters():
            n = p.numel()
            p.copy_(torch.from_numpy(flat[offset : offset + n].copy()).view_as(p))
            offset += n
    if offset != flat.size:
        raise ValueError("critic payload does not match the architecture")
    net.eval()
    return net
