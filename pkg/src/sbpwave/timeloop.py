"""Classical fourth-order Runge--Kutta integration of ``u_tt = rhs(u, t)``.

The second-order system is advanced as the first-order pair ``(u, v)`` with
``u_t = v`` and ``v_t = rhs(u, v, t)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .discretization import SemiDiscreteSystem, StateVector, _accel, discrete_energy
from .errors import ConfigError, LayoutMismatch, NonFiniteState, UnstablePenalty

#: A state whose max-norm grows beyond this factor of the initial one is treated as blown up.
BLOWUP_FACTOR = 1e6


@dataclass(frozen=True)
class TimeGrid:
    """Uniform steps from ``t0`` to ``tf``; the last step is shortened to land on ``tf``."""

    t0: float
    tf: float
    dt: float

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"time step must be positive, got {self.dt}")
        if self.tf < self.t0:
            raise ConfigError("final time precedes initial time")

    @classmethod
    def from_courant(cls, h: float, courant: float, tf: float, t0: float = 0.0) -> "TimeGrid":
        return cls(t0, tf, courant * h)

    @property
    def n_steps(self) -> int:
        span = self.tf - self.t0
        if span == 0:
            return 0
        # guard against 2/0.1 style round-off producing an extra tiny step
        return max(1, math.ceil(span / self.dt - 1e-6))

    def steps(self):
        """Yield ``(t, dt)`` for every step."""
        n = self.n_steps
        for k in range(n):
            t = self.t0 + k * self.dt
            yield t, (self.dt if k < n - 1 else self.tf - t)


def rk4_step(system: SemiDiscreteSystem, state: StateVector, dt: float) -> StateVector:
    """One classical RK4 step of ``(u, v)``."""
    if not dt > 0:
        raise ConfigError(f"time step must be positive, got {dt}")
    u, v, t = np.asarray(state.u, float).ravel(), np.asarray(state.v, float).ravel(), state.t
    if u.size != system.size or v.size != system.size:
        raise LayoutMismatch(f"state has sizes ({u.size}, {v.size}), system expects {system.size}")
    u, v = _rk4(system, u, v, t, dt)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise NonFiniteState(0, t + dt, float(np.max(np.abs(np.nan_to_num(u, nan=np.inf)))))
    return StateVector(u, v, t + dt)


def _rk4(system, u, v, t, dt):
    half = 0.5 * dt
    a1 = _accel(system, u, v, t)
    u2, v2 = u + half * v, v + half * a1
    a2 = _accel(system, u2, v2, t + half)
    u3, v3 = u + half * v2, v + half * a2
    a3 = _accel(system, u3, v3, t + half)
    u4, v4 = u + dt * v3, v + dt * a3
    a4 = _accel(system, u4, v4, t + dt)
    u_new = u + dt / 6 * (v + 2 * v2 + 2 * v3 + v4)
    v_new = v + dt / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
    return u_new, v_new


@dataclass
class SimulationResult:
    final: StateVector
    energy_trace: list = field(default_factory=list)
    steps: int = 0

    def write_energy_csv(self, path) -> None:
        write_energy_csv(self.energy_trace, path)


def simulate(
    system: SemiDiscreteSystem,
    timegrid: TimeGrid,
    trace_energy: bool = False,
    *,
    initial: Optional[StateVector] = None,
    allow_unstable: bool = False,
    check_every: int = 50,
) -> SimulationResult:
    """Integrate from ``timegrid.t0`` to ``timegrid.tf``.

    Raises :class:`NonFiniteState` when the state stops being finite or grows
    by more than ``BLOWUP_FACTOR`` over its initial size.
    """
    if not system.penalty.stable and not allow_unstable:
        raise UnstablePenalty(
            f"tau={system.penalty.tau:.6g} is below the stability limit {system.penalty.threshold:.6g}"
        )
    state = initial if initial is not None else system.initial_state(timegrid.t0)
    u, v = np.asarray(state.u, float).ravel().copy(), np.asarray(state.v, float).ravel().copy()
    if u.size != system.size or v.size != system.size:
        raise LayoutMismatch(f"state has sizes ({u.size}, {v.size}), system expects {system.size}")
    t = timegrid.t0
    trace = []
    if trace_energy:
        trace.append((t, discrete_energy(system, StateVector(u, v, t))))
    ref = max(float(np.max(np.abs(u), initial=0.0)), float(np.max(np.abs(v), initial=0.0)) * system.h_min, 1.0)
    k = 0
    for k, (t, dt) in enumerate(timegrid.steps(), start=1):
        u, v = _rk4(system, u, v, t, dt)
        t = t + dt
        if k % check_every == 0 or k == timegrid.n_steps:
            amax = float(np.max(np.abs(u)))
            if not np.isfinite(amax) or amax > BLOWUP_FACTOR * ref:
                raise NonFiniteState(k, t, amax)
        if trace_energy:
            trace.append((t, discrete_energy(system, StateVector(u, v, t))))
    t = timegrid.tf if timegrid.n_steps else timegrid.t0
    return SimulationResult(StateVector(u, v, t), trace, k)


def write_energy_csv(trace, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "energy"])
        for t, e in trace:
            writer.writerow([f"{t:.17g}", f"{e:.17g}"])
