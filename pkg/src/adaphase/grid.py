from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidConfigError

HALF_PI = 0.5 * np.pi
DEFAULT_GRID_POINTS = 2048


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform phase grid on [0, pi/2], both endpoints included."""

    points: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 2:
            raise InvalidConfigError(f"grid needs at least 2 points, got {self.points}")

    @property
    def lo(self) -> float:
        return 0.0

    @property
    def hi(self) -> float:
        return HALF_PI

    @property
    def step(self) -> float:
        return HALF_PI / (self.points - 1)

    @cached_property
    def values(self) -> np.ndarray:
        v = np.linspace(0.0, HALF_PI, self.points)
        v.setflags(write=False)
        return v

    def __len__(self) -> int:
        return self.points
