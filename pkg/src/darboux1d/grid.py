"""Computational domain: a finite interval with uniform sample nodes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_N_NODES = 2001


@dataclass(frozen=True)
class Interval:
    """[a, b] with n_nodes uniform nodes, endpoints included.

    The grid is for sampling and output only; integration accuracy is
    controlled by the adaptive stepper, never by this grid.
    """

    a: float
    b: float
    n_nodes: int = DEFAULT_N_NODES
    _nodes: np.ndarray = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        if not (self.a < self.b):
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        if self.n_nodes < 3:
            raise ValueError(f"need n_nodes >= 3, got {self.n_nodes}")
        nodes = self.a + (self.b - self.a) / (self.n_nodes - 1) * np.arange(self.n_nodes)
        nodes[-1] = self.b
        nodes.setflags(write=False)
        object.__setattr__(self, "_nodes", nodes)

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n_nodes - 1)

    @property
    def length(self) -> float:
        return self.b - self.a

    def same_grid(self, other: "Interval") -> bool:
        return (
            self.a == other.a and self.b == other.b and self.n_nodes == other.n_nodes
        )


def default_interval(n_nodes: int = DEFAULT_N_NODES) -> Interval:
    """The [-pi, pi] working interval used by all built-in closed forms."""
    return Interval(-np.pi, np.pi, n_nodes)
