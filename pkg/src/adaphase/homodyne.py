"""Seeded homodyne sampling of the squeezed thermal probe.

Generator pinned for reproducibility: numpy ``PCG64`` bit generator seeded with
the 64-bit stream seed, Gaussian variates from ``Generator.standard_normal``
(ziggurat), scaled by the quadrature standard deviation. Repetition ``k`` of an
experiment with master seed ``s`` uses seed ``s XOR k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gaussian import SqueezedThermalProbe, quadrature_variance

SEED_MASK = (1 << 64) - 1


def derive_seed(master_seed: int, index: int) -> int:
    return (int(master_seed) ^ int(index)) & SEED_MASK


class RandomStream:
    """Single-owner source of standard normal draws.

    ``position`` counts the variates handed out so far.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & SEED_MASK
        self.position = 0
        self._rng = np.random.Generator(np.random.PCG64(self.seed))

    def standard_normal(self, m: int) -> np.ndarray:
        out = self._rng.standard_normal(m)
        self.position += m
        return out

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, position={self.position})"


@dataclass
class HomodyneBatch:
    samples: np.ndarray
    measured_phase: float
    probe_tag: tuple[float, float] = field(default=(0.0, 0.0))

    def __len__(self):
        return len(self.samples)

    def to_text(self) -> str:
        return "".join(f"{x!r}\n" for x in self.samples.tolist())

    def write_text(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def read_text(cls, path, measured_phase: float = float("nan"), probe_tag=(0.0, 0.0)):
        values = [float(line) for line in Path(path).read_text().split()]
        return cls(np.asarray(values, dtype=float), measured_phase, probe_tag)


def sample_homodyne(
    probe: SqueezedThermalProbe, phi: float, m: int, stream: RandomStream
) -> HomodyneBatch:
    """Draw ``m`` quadrature outcomes at relative phase ``phi``."""
    if m < 0:
        raise ValueError(f"sample count must be >= 0, got {m}")
    sigma = np.sqrt(quadrature_variance(probe, phi))
    x = sigma * stream.standard_normal(m)
    return HomodyneBatch(samples=x, measured_phase=float(phi), probe_tag=probe.tag)
