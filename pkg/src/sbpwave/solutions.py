"""Closed-form standing waves used as manufactured solutions.

Both solutions satisfy the homogeneous wave equation, so the forcing is zero
and all data comes from boundary traces and the initial state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StandingWave1D:
    """``U = cos(k x + a) cos(k t + b)`` on the line."""

    k: float = 10 * np.pi
    phase_x: float = 1.0
    phase_t: float = 2.0
    id: str = "wave1d"
    dim: int = 1

    def u(self, x, t):
        return np.cos(self.k * x + self.phase_x) * np.cos(self.k * t + self.phase_t)

    def u_t(self, x, t):
        return -self.k * np.cos(self.k * x + self.phase_x) * np.sin(self.k * t + self.phase_t)

    def u_tt(self, x, t):
        return -self.k**2 * self.u(x, t)

    def u_x(self, x, t):
        return -self.k * np.sin(self.k * x + self.phase_x) * np.cos(self.k * t + self.phase_t)

    def laplacian(self, x, t):
        return -self.k**2 * self.u(x, t)

    def forcing(self, x, t):
        return np.zeros_like(np.asarray(x, float))


@dataclass(frozen=True)
class StandingWave2D:
    """``U = cos(kx x + a) cos(ky y + b) cos(w t + c)`` with ``w**2 = kx**2 + ky**2``."""

    kx: float = 12.0
    ky: float = 4 * np.pi
    phase_x: float = 1.0
    phase_y: float = 2.0
    phase_t: float = 3.0
    id: str = "wave2d"
    dim: int = 2

    @property
    def omega(self) -> float:
        return float(np.hypot(self.kx, self.ky))

    def _space(self, x, y):
        return np.cos(self.kx * x + self.phase_x) * np.cos(self.ky * y + self.phase_y)

    def u(self, x, y, t):
        return self._space(x, y) * np.cos(self.omega * t + self.phase_t)

    def u_t(self, x, y, t):
        return -self.omega * self._space(x, y) * np.sin(self.omega * t + self.phase_t)

    def u_tt(self, x, y, t):
        return -self.omega**2 * self.u(x, y, t)

    def u_x(self, x, y, t):
        return (
            -self.kx
            * np.sin(self.kx * x + self.phase_x)
            * np.cos(self.ky * y + self.phase_y)
            * np.cos(self.omega * t + self.phase_t)
        )

    def laplacian(self, x, y, t):
        return -(self.kx**2 + self.ky**2) * self.u(x, y, t)

    def forcing(self, x, y, t):
        return np.zeros(np.broadcast(x, y).shape)


SOLUTIONS = {"wave1d": StandingWave1D, "wave2d": StandingWave2D}


def get_solution(name: str, **params):
    try:
        cls = SOLUTIONS[name]
    except KeyError:
        from .errors import ConfigError

        raise ConfigError(f"unknown solution {name!r}; choose one of {sorted(SOLUTIONS)}") from None
    return cls(**params)
