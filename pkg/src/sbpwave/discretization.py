"""SAT-penalised semi-discretisations of the wave equation.

Four problem kinds are assembled into a :class:`SemiDiscreteSystem` whose
acceleration is

    u_tt = K u - damping * u_t + sum_b w_b (x) g_b(t) + F(t)

``K`` already contains every penalty term acting on ``u``; boundary data enter
through lifting vectors ``w_b``.  In two dimensions ``K`` is applied as a sum of
Kronecker factors and ``g_b`` returns values along the boundary line.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, LayoutMismatch, UnstablePenalty, UnsupportedOrder
from .operators import (
    SbpOperatorSet,
    borrowing_constant,
    build_periodic,
    build_sbp,
    _check_order,
)
from .solutions import get_solution


class ProblemKind(str, enum.Enum):
    Dirichlet1D = "dirichlet"
    Neumann1D = "neumann"
    Interface1D = "interface"
    Dirichlet2DPeriodicY = "dirichlet2d"

    @classmethod
    def parse(cls, value) -> "ProblemKind":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("_", "").replace("-", "")
        for kind in cls:
            if key in (kind.value, kind.name.lower()):
                return kind
        raise ConfigError(f"unknown problem kind {value!r}")


def min_penalty(kind, order: int, h_L: float = 1.0, h_R: float = 1.0) -> float:
    """Smallest stable penalty for the given configuration."""
    kind = ProblemKind.parse(kind)
    _check_order(order)
    alpha = borrowing_constant(order)
    if kind is ProblemKind.Neumann1D:
        return 0.0
    if kind is ProblemKind.Interface1D:
        return (h_L + h_R) / (4 * alpha * h_L * h_R)
    return 1.0 / alpha


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty strength and its stability threshold, in the same units.

    Dirichlet penalties are dimensionless (the SAT carries ``tau/h``).
    Interface penalties have units of 1/length.
    """

    tau: float
    threshold: float
    outer_tau: Optional[float] = None

    @property
    def multiple(self) -> float:
        return self.tau / self.threshold if self.threshold else float("nan")

    @property
    def stable(self) -> bool:
        return self.tau >= self.threshold * (1 - 1e-12)


@dataclass(frozen=True)
class GridBlock:
    """One 1D grid segment and its position in the state vector."""

    name: str
    x: np.ndarray
    h: float
    start: int

    @property
    def size(self) -> int:
        return len(self.x)

    @property
    def slice(self) -> slice:
        return slice(self.start, self.start + self.size)


@dataclass(frozen=True)
class Lift:
    """Boundary data insertion ``w (x) g(t)``."""

    weights: np.ndarray
    data: Callable[[float], object]
    name: str = ""


class KroneckerSum:
    """Matrix-free ``Kx (x) I + I (x) Ky`` acting on flattened ``(nx, ny)`` fields."""

    def __init__(self, Kx, Ky):
        self.Kx = sp.csr_matrix(Kx)
        self.Ky = sp.csr_matrix(Ky)
        self.nx, self.ny = self.Kx.shape[0], self.Ky.shape[0]
        self.shape = (self.nx * self.ny,) * 2

    def __matmul__(self, u):
        U = np.reshape(u, (self.nx, self.ny))
        return (self.Kx @ U + (self.Ky @ U.T).T).ravel()

    def tocsr(self):
        return (sp.kron(self.Kx, sp.identity(self.ny)) + sp.kron(sp.identity(self.nx), self.Ky)).tocsr()

    def toarray(self):
        return self.tocsr().toarray()


@dataclass(frozen=True)
class StateVector:
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0


@dataclass(frozen=True, eq=False)
class SemiDiscreteSystem:
    kind: ProblemKind
    order: int
    operators: tuple
    penalty: PenaltyConfig
    blocks: tuple
    stiffness: object
    lifts: tuple = ()
    damping: Optional[np.ndarray] = None
    forcing: Optional[Callable[[float], np.ndarray]] = None
    y: Optional[np.ndarray] = None
    hy: Optional[float] = None
    periodic: object = None
    solution: object = None

    @property
    def size(self) -> int:
        return self.stiffness.shape[0]

    @property
    def dim(self) -> int:
        return 1 if self.y is None else 2

    @property
    def h_min(self) -> float:
        return min(b.h for b in self.blocks)

    @property
    def shape(self) -> tuple:
        nx = sum(b.size for b in self.blocks)
        return (nx,) if self.y is None else (nx, len(self.y))

    def coordinates(self):
        """Grid coordinates in state order (``x`` or the pair ``(X, Y)``)."""
        x = np.concatenate([b.x for b in self.blocks])
        if self.y is None:
            return x
        X, Y = np.meshgrid(x, self.y, indexing="ij")
        return X, Y

    def sample(self, func, t: float) -> np.ndarray:
        """Evaluate ``func(x[, y], t)`` on the grid as a flat state vector."""
        if self.y is None:
            return np.asarray(func(self.coordinates(), t), float)
        X, Y = self.coordinates()
        return np.asarray(func(X, Y, t), float).ravel()

    def initial_state(self, t0: float = 0.0) -> StateVector:
        if self.solution is None:
            raise ConfigError("system has no manufactured solution for initial data")
        return StateVector(self.sample(self.solution.u, t0), self.sample(self.solution.u_t, t0), t0)


def _lift_vector(w: np.ndarray, g):
    return np.multiply.outer(w, g).ravel()


def rhs(system: SemiDiscreteSystem, state: StateVector) -> np.ndarray:
    """Acceleration ``u_tt`` of the semi-discrete system."""
    u, v = np.asarray(state.u), np.asarray(state.v)
    if u.size != system.size or v.size != system.size:
        raise LayoutMismatch(f"state has sizes ({u.size}, {v.size}), system expects {system.size}")
    return _accel(system, u.ravel(), v.ravel(), state.t)


def _accel(system, u, v, t):
    acc = system.stiffness @ u
    for lift in system.lifts:
        acc = acc + _lift_vector(lift.weights, lift.data(t))
    if system.damping is not None:
        acc = acc - system.damping * v
    if system.forcing is not None:
        acc = acc + system.forcing(t)
    return acc


# --------------------------------------------------------------------------
# assembly


def _dirichlet_pieces(op: SbpOperatorSet, tau: float, left=True, right=True):
    """Stiffness and lifting vectors for weak Dirichlet conditions on one block."""
    n, h = op.n, op.h
    K = op.D.tocsr()
    wL = wR = None
    if left:
        wL = op.left_derivative / op.H
        wL[0] += tau / (h * op.H[0])
        K = K - _outer(wL, _unit(n, 0))
    if right:
        wR = -op.right_derivative / op.H
        wR[-1] += tau / (h * op.H[-1])
        K = K - _outer(wR, _unit(n, n - 1))
    return K.tocsr(), wL, wR


def _unit(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


def _grid(order, n, domain):
    a, b = map(float, domain)
    if not b > a:
        raise ConfigError(f"empty domain {domain}")
    h = (b - a) / (n - 1)
    return build_sbp(order, n, h), a + h * np.arange(n)


def dirichlet_1d(
    order: int,
    n: int,
    *,
    tau: Optional[float] = None,
    tau_mult: float = 1.2,
    domain=(0.0, 1.0),
    g_left: Optional[Callable] = None,
    g_right: Optional[Callable] = None,
    solution=None,
) -> SemiDiscreteSystem:
    """Weak Dirichlet conditions at both ends; ``tau`` is dimensionless."""
    op, x = _grid(order, n, domain)
    threshold = min_penalty(ProblemKind.Dirichlet1D, order)
    tau = tau_mult * threshold if tau is None else float(tau)
    K, wL, wR = _dirichlet_pieces(op, tau)
    if solution is not None:
        a, b = x[0], x[-1]
        g_left = g_left or (lambda t, s=solution, a=a: s.u(a, t))
        g_right = g_right or (lambda t, s=solution, b=b: s.u(b, t))
    lifts = tuple(Lift(w, g, nm) for w, g, nm in ((wL, g_left, "left"), (wR, g_right, "right")) if g is not None)
    return SemiDiscreteSystem(
        kind=ProblemKind.Dirichlet1D,
        order=order,
        operators=(op,),
        penalty=PenaltyConfig(tau, threshold),
        blocks=(GridBlock("x", x, op.h, 0),),
        stiffness=K,
        lifts=lifts,
        solution=solution,
    )


def neumann_1d(
    order: int,
    n: int,
    *,
    domain=(0.0, 1.0),
    op: Optional[SbpOperatorSet] = None,
    damping_magnitude: float = 0.0,
    g_left: Optional[Callable] = None,
    g_right: Optional[Callable] = None,
    solution=None,
) -> SemiDiscreteSystem:
    """Weak Neumann conditions ``u_x = g`` at both ends.

    ``op`` may carry a boundary damping diagonal (see
    :func:`perturb_neumann_boundary`); alternatively pass ``damping_magnitude``.
    """
    grid_op, x = _grid(order, n, domain)
    op = grid_op if op is None else op
    if op.n != n:
        raise LayoutMismatch(f"operator has {op.n} points, grid has {n}")
    if damping_magnitude:
        op = perturb_neumann_boundary(op, damping_magnitude)
    Hinv = sp.diags(op.Hinv)
    e0 = sp.csr_matrix(([1.0], ([0], [0])), shape=(n, 1))
    eN = sp.csr_matrix(([1.0], ([n - 1], [0])), shape=(n, 1))
    S0 = sp.csr_matrix(op.left_derivative[None, :])
    SN = sp.csr_matrix(op.right_derivative[None, :])
    K = (op.D + Hinv @ (e0 @ S0) - Hinv @ (eN @ SN)).tocsr()
    wL = np.zeros(n)
    wL[0] = -1.0 / op.H[0]
    wR = np.zeros(n)
    wR[-1] = 1.0 / op.H[-1]
    if solution is not None:
        a, b = x[0], x[-1]
        g_left = g_left or (lambda t, s=solution, a=a: s.u_x(a, t))
        g_right = g_right or (lambda t, s=solution, b=b: s.u_x(b, t))
    lifts = tuple(Lift(w, g, nm) for w, g, nm in ((wL, g_left, "left"), (wR, g_right, "right")) if g is not None)
    damping = None if op.boundary_damping is None else op.boundary_damping / op.H
    return SemiDiscreteSystem(
        kind=ProblemKind.Neumann1D,
        order=order,
        operators=(op,),
        penalty=PenaltyConfig(0.0, 0.0),
        blocks=(GridBlock("x", x, op.h, 0),),
        stiffness=K,
        lifts=lifts,
        damping=damping,
        solution=solution,
    )


def interface_1d(
    order: int,
    n_left: int,
    n_right: Optional[int] = None,
    *,
    ratio: int = 2,
    tau: Optional[float] = None,
    tau_mult: float = 1.2,
    outer_tau_mult: Optional[float] = 1.2,
    domain=(0.0, 1.0),
    interface: float = 0.5,
    solution=None,
) -> SemiDiscreteSystem:
    """Two conforming blocks coupled by SAT at ``x = interface``.

    By default the right block has ``ratio`` times finer spacing.  ``tau`` has
    units of 1/length.  Outer ends get weak Dirichlet conditions with penalty
    ``outer_tau_mult / alpha``; pass ``None`` to leave them free (closure rows
    only, used for half-line analysis).
    """
    a, b = map(float, domain)
    if not a < interface < b:
        raise ConfigError("interface must lie inside the domain")
    if n_right is None:
        hL = (interface - a) / (n_left - 1)
        n_right = int(round((b - interface) / (hL / ratio))) + 1
    opL, xL = _grid(order, n_left, (a, interface))
    opR, xR = _grid(order, n_right, (interface, b))
    hL, hR = opL.h, opR.h
    nL, nR = n_left, n_right
    threshold = min_penalty(ProblemKind.Interface1D, order, hL, hR)
    tau = tau_mult * threshold if tau is None else float(tau)

    if outer_tau_mult is None:
        KL, KR = opL.D.tocsr(), opR.D.tocsr()
        wL = wR = None
        outer_tau = None
    else:
        outer_tau = outer_tau_mult * min_penalty(ProblemKind.Dirichlet1D, order)
        KL, wL, _ = _dirichlet_pieces(opL, outer_tau, left=True, right=False)
        KR, _, wR = _dirichlet_pieces(opR, outer_tau, left=False, right=True)
    K = sp.block_diag([KL, KR], format="lil")

    n = nL + nR
    jump = np.zeros(n)
    jump[nL - 1], jump[nL] = 1.0, -1.0
    sjump = np.zeros(n)
    sjump[:nL] = opL.right_derivative
    sjump[nL:] = -opR.left_derivative
    left_cols = np.zeros(n)
    left_cols[:nL] = opL.right_derivative / opL.H
    right_cols = np.zeros(n)
    right_cols[nL:] = opR.left_derivative / opR.H
    eLN = np.zeros(n)
    eLN[nL - 1] = 1.0 / opL.H[-1]
    eR0 = np.zeros(n)
    eR0[nL] = 1.0 / opR.H[0]
    C = (
        0.5 * _outer(left_cols, jump)
        - 0.5 * _outer(eLN, sjump)
        - tau * _outer(eLN, jump)
        + 0.5 * _outer(right_cols, jump)
        - 0.5 * _outer(eR0, sjump)
        + tau * _outer(eR0, jump)
    )
    K = (K.tocsr() + C).tocsr()

    lifts = ()
    if solution is not None and outer_tau is not None:
        wl = np.zeros(n)
        wl[:nL] = wL
        wr = np.zeros(n)
        wr[nL:] = wR
        lifts = (
            Lift(wl, lambda t, s=solution, a=xL[0]: s.u(a, t), "left"),
            Lift(wr, lambda t, s=solution, b=xR[-1]: s.u(b, t), "right"),
        )
    return SemiDiscreteSystem(
        kind=ProblemKind.Interface1D,
        order=order,
        operators=(opL, opR),
        penalty=PenaltyConfig(tau, threshold, outer_tau),
        blocks=(GridBlock("left", xL, hL, 0), GridBlock("right", xR, hR, nL)),
        stiffness=K,
        lifts=lifts,
        solution=solution,
    )


def _outer(a: np.ndarray, b: np.ndarray) -> sp.csr_matrix:
    return sp.csr_matrix(a[:, None]) @ sp.csr_matrix(b[None, :])


def dirichlet_2d_periodic(
    order: int,
    nx: int,
    ny: Optional[int] = None,
    *,
    tau: Optional[float] = None,
    tau_mult: float = 1.2,
    x_domain=(0.0, 1.0),
    y_period: float = 1.0,
    solution=None,
) -> SemiDiscreteSystem:
    """Weak Dirichlet conditions in x, periodic in y.

    ``ny`` counts unique periodic points; by default it is chosen so that
    ``hy == hx``.  The state is an ``(nx, ny)`` field flattened with y fastest.
    """
    op, x = _grid(order, nx, x_domain)
    if ny is None:
        ny = int(round(y_period / op.h))
    hy = y_period / ny
    per = build_periodic(order, ny, hy)
    y = hy * np.arange(ny)
    threshold = min_penalty(ProblemKind.Dirichlet2DPeriodicY, order)
    tau = tau_mult * threshold if tau is None else float(tau)
    Kx, wL, wR = _dirichlet_pieces(op, tau)
    lifts = ()
    if solution is not None:
        a, b = x[0], x[-1]
        lifts = (
            Lift(wL, lambda t, s=solution, a=a, y=y: s.u(a, y, t), "left"),
            Lift(wR, lambda t, s=solution, b=b, y=y: s.u(b, y, t), "right"),
        )
    return SemiDiscreteSystem(
        kind=ProblemKind.Dirichlet2DPeriodicY,
        order=order,
        operators=(op,),
        penalty=PenaltyConfig(tau, threshold),
        blocks=(GridBlock("x", x, op.h, 0),),
        stiffness=KroneckerSum(Kx, per.D),
        lifts=lifts,
        y=y,
        hy=hy,
        periodic=per,
        solution=solution,
    )


# --------------------------------------------------------------------------
# energy


def _check_stable(system):
    if not system.penalty.stable:
        raise UnstablePenalty(
            f"tau={system.penalty.tau:.6g} is below the stability limit {system.penalty.threshold:.6g}; "
            "the discrete energy may be indefinite"
        )


def _dirichlet_boundary_energy(op, u, tau, alpha, sides=("left", "right")):
    """Borrowed boundary contributions, including ``||u||_A`` minus the borrowed part."""
    h = op.h
    total = float(u @ (op.A @ u))
    for side in sides:
        if side == "left":
            bs, ub = -(op.left_derivative @ u), u[0]
        else:
            bs, ub = op.right_derivative @ u, u[-1]
        total -= h * alpha * bs**2
        total += (np.sqrt(h * alpha) * bs - ub / np.sqrt(h * alpha)) ** 2 + (tau - 1 / alpha) * ub**2 / h
    return total


def discrete_energy(system: SemiDiscreteSystem, state: StateVector) -> float:
    """Discrete energy of the homogeneous problem.

    Conserved by the semi-discrete flow without damping and non-increasing
    with it.  Dirichlet contributions are evaluated in the borrowed form so
    that every term is visibly non-negative for ``tau >= tau_2p``.
    """
    u, v = np.asarray(state.u, float).ravel(), np.asarray(state.v, float).ravel()
    if u.size != system.size or v.size != system.size:
        raise LayoutMismatch(f"state has sizes ({u.size}, {v.size}), system expects {system.size}")
    kind = system.kind
    if kind is ProblemKind.Neumann1D:
        op = system.operators[0]
        return float(v @ (op.H * v) + u @ (op.A @ u))
    _check_stable(system)
    alpha = borrowing_constant(system.order)
    if kind is ProblemKind.Dirichlet1D:
        op = system.operators[0]
        return float(v @ (op.H * v)) + _dirichlet_boundary_energy(op, u, system.penalty.tau, alpha)
    if kind is ProblemKind.Dirichlet2DPeriodicY:
        op, per = system.operators[0], system.periodic
        U = u.reshape(system.shape)
        V = v.reshape(system.shape)
        hy = system.hy
        e = float(np.sum(op.H[:, None] * V**2) * hy)
        e += hy * sum(_dirichlet_boundary_energy(op, U[:, j], system.penalty.tau, alpha) for j in range(U.shape[1]))
        # periodic part: -hy * D_yy is symmetric positive semi-definite
        e -= float(np.sum(op.H[:, None] * U * (per.D @ U.T).T) * hy)
        return e
    # interface
    opL, opR = system.operators
    bl, br = system.blocks
    uL, uR = u[bl.slice], u[br.slice]
    vL, vR = v[bl.slice], v[br.slice]
    e = float(vL @ (opL.H * vL) + vR @ (opR.H * vR) + uL @ (opL.A @ uL) + uR @ (opR.A @ uR))
    jump = uL[-1] - uR[0]
    e += -jump * (opL.right_derivative @ uL + opR.left_derivative @ uR) + system.penalty.tau * jump**2
    tau_o = system.penalty.outer_tau
    if tau_o is not None:
        e += tau_o / opL.h * uL[0] ** 2 + 2 * uL[0] * (opL.left_derivative @ uL)
        e += tau_o / opR.h * uR[-1] ** 2 - 2 * uR[-1] * (opR.right_derivative @ uR)
    return float(e)


# --------------------------------------------------------------------------
# perturbation


def reference_damping(order: int, wavenumber: float = 10 * np.pi) -> float:
    """Damping magnitude ``k**(p+1)`` matching the boundary truncation error of a mode ``e^{ikx}``.

    With this choice the added term and the original closure error have the
    same size for the resolved wave, so the experiment isolates the effect of
    the error direction rather than its magnitude.
    """
    return float(wavenumber) ** (order // 2 + 1)


def perturb_neumann_boundary(op: SbpOperatorSet, magnitude: float) -> SbpOperatorSet:
    """Add dissipative boundary damping ``Q = magnitude h^(p+1) (e0 e0^T + eN eN^T)``.

    The Neumann scheme becomes ``u_tt = -H^{-1} A u - H^{-1} Q u_t + data``.
    ``Q`` is diagonal and non-negative, so the energy rate is
    ``-2 v^T Q v <= 0``.  The truncation error gains a term proportional to
    ``u_t`` in the first and last rows, of the same order ``h^p`` as the
    closure error, but its boundary-system image is not in the column space of
    ``C(0)`` because its norm-weighted sum does not vanish.
    """
    if op.order not in (4, 6):
        raise UnsupportedOrder(op.order, (4, 6))
    if magnitude == 0:
        return op
    if magnitude < 0:
        raise ConfigError("damping magnitude must be non-negative")
    q = np.zeros(op.n)
    q[0] = q[-1] = magnitude * op.h ** (op.p + 1)
    return op.with_damping(q)


# --------------------------------------------------------------------------
# problem files


@dataclass
class ProblemSpec:
    """Declarative problem definition, loadable from JSON."""

    kind: ProblemKind = ProblemKind.Dirichlet1D
    order: int = 2
    n: int = 51
    n_right: Optional[int] = None
    tau_mult: float = 1.2
    outer_tau_mult: float = 1.2
    domain: Sequence[float] = (0.0, 1.0)
    interface: float = 0.5
    ratio: int = 2
    y_period: float = 1.0
    tf: float = 2.0
    t0: float = 0.0
    courant: Optional[float] = 0.1
    dt: Optional[float] = None
    solution: Optional[str] = None
    perturbation: float = 0.0

    def __post_init__(self):
        self.kind = ProblemKind.parse(self.kind)
        if self.order not in (2, 4, 6):
            raise UnsupportedOrder(self.order)
        if self.solution is None:
            self.solution = "wave2d" if self.kind is ProblemKind.Dirichlet2DPeriodicY else "wave1d"
        self.domain = tuple(float(d) for d in self.domain)

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemSpec":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown problem keys: {sorted(extra)}")
        return cls(**data)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["kind"] = self.kind.value
        d["domain"] = list(self.domain)
        return d


def load_problem(path) -> ProblemSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read problem file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("problem file must hold a JSON object")
    return ProblemSpec.from_dict(data)


def assemble(spec: ProblemSpec) -> SemiDiscreteSystem:
    """Build the semi-discrete system described by ``spec``."""
    sol = get_solution(spec.solution)
    kind = spec.kind
    if kind is ProblemKind.Dirichlet1D:
        return dirichlet_1d(spec.order, spec.n, tau_mult=spec.tau_mult, domain=spec.domain, solution=sol)
    if kind is ProblemKind.Neumann1D:
        return neumann_1d(
            spec.order, spec.n, domain=spec.domain, damping_magnitude=spec.perturbation, solution=sol
        )
    if kind is ProblemKind.Interface1D:
        return interface_1d(
            spec.order,
            spec.n,
            spec.n_right,
            ratio=spec.ratio,
            tau_mult=spec.tau_mult,
            outer_tau_mult=spec.outer_tau_mult,
            domain=spec.domain,
            interface=spec.interface,
            solution=sol,
        )
    return dirichlet_2d_periodic(
        spec.order, spec.n, tau_mult=spec.tau_mult, x_domain=spec.domain, y_period=spec.y_period, solution=sol
    )
