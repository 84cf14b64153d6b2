"""Laplace-space boundary systems and convergence-rate prediction.

Near a boundary (or interface) the Laplace-transformed error equation
``s~**2 rho eps = h**2 L eps + h**(p+2) T`` is solved by

* leaving the first ``k`` grid values ``eps_0..eps_{k-1}`` free, and
* writing ``eps_j = sum_q sigma_q kappa_q**(j-k)`` for ``j >= k``, with the
  ``p`` admissible roots ``kappa_q`` of the interior characteristic equation.

The ``k + p`` closure rows then give a square system ``C(s~) Sigma = T``.  Its
behaviour at ``s~ = 0`` (rank, SVD coupling with ``C'(0)``, column-space
membership of the truncation direction) decides how many orders the boundary
error gains over the truncation error.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import discretization as disc
from .errors import InvalidSymbol, RankDeficiencyNotOne, UnsupportedPair
from .operators import borrowing_constant, interior_stencil, _check_order

RANK_TOL = 1e-8
MEMBER_TOL = 1e-8
FD_STEP = 1e-5

# --------------------------------------------------------------------------
# characteristic roots


def characteristic_polynomial(order: int, s) -> np.ndarray:
    """Coefficients (highest degree first) of ``sum_j c_j kappa**(j+p) - s~**2 kappa**p``."""
    c = interior_stencil(order).astype(complex)
    p = order // 2
    c[p] -= complex(s) ** 2
    return c[::-1]


def _polish(poly, roots, iters=3):
    dpoly = np.polyder(poly)
    out = np.array(roots, complex)
    for _ in range(iters):
        d = np.polyval(dpoly, out)
        ok = np.abs(d) > 1e-14
        out[ok] -= np.polyval(poly, out[ok]) / d[ok]
    return out


def _all_roots(order: int, s) -> np.ndarray:
    poly = characteristic_polynomial(order, s)
    if s == 0:
        # kappa = 1 is a double root; deflate it so the rest stays accurate
        q, _ = np.polydiv(poly, np.array([1.0, -2.0, 1.0]))
        rest = _polish(q, np.roots(q))
        return np.concatenate([[1.0 + 0j, 1.0 + 0j], rest])
    return _polish(poly, np.roots(poly))


def _reference_roots(order: int) -> list:
    """Admissible roots at ``s~ = 0`` ordered as the unknowns: ``1`` first, then by (Re, Im)."""
    r = _all_roots(order, 0)
    inside = [z for z in r if abs(z) < 1 - 1e-6]
    inside.sort(key=lambda z: (round(z.real, 8), z.imag))
    return [1.0 + 0j] + inside


def tracked_roots(order: int, s) -> np.ndarray:
    """The ``p`` roots continued from their ``s~ = 0`` values.

    ``kappa_1`` follows ``1 - s~``; the others follow their limits.  The
    assignment is by nearest distance and is valid for small ``|s~|``.
    """
    s = complex(s)
    if s == 0:
        return np.array(_reference_roots(order))
    pool = list(_all_roots(order, s))
    guesses = [1 - s] + _reference_roots(order)[1:]
    out = []
    for g in guesses:
        i = int(np.argmin([abs(z - g) for z in pool]))
        out.append(pool.pop(i))
    return np.array(out)


@dataclass(frozen=True)
class CharacteristicRoots:
    order: int
    s: complex
    all_roots: np.ndarray
    admissible: np.ndarray
    limit_root: Optional[complex] = None
    residual: float = 0.0


def characteristic_roots(order: int, s) -> CharacteristicRoots:
    """All roots of the interior characteristic equation and the admissible ones.

    At ``s~ = 0`` the double root ``kappa = 1`` is the limit of the admissible
    branch ``kappa_1``; it is included first in ``admissible`` and also
    reported as ``limit_root``.
    """
    _check_order(order)
    s = complex(s)
    r = _all_roots(order, s)
    poly = characteristic_polynomial(order, s)
    residual = float(np.max(np.abs(np.polyval(poly, r))))
    if s == 0:
        adm = np.array(_reference_roots(order))
        return CharacteristicRoots(order, s, r, adm, 1.0 + 0j, residual)
    inside = [z for z in r if abs(z) < 1]
    tracked = tracked_roots(order, s)
    # keep the tracked ordering for admissible roots when it agrees
    if len(inside) == len(tracked) and all(abs(t) < 1 for t in tracked):
        adm = tracked
    else:
        adm = np.array(sorted(inside, key=lambda z: -abs(z)))
    return CharacteristicRoots(order, s, r, adm, None, residual)


def root_decay_margin(order: int, s) -> float:
    """``1 - |kappa_1|**2 - 2 Re(s~)``; of size ``O(|s~|**2)`` for small ``s~``."""
    k1 = tracked_roots(order, s)[0]
    return float(1 - abs(k1) ** 2 - 2 * complex(s).real)


def s_plus(s, symbol: float, h: float) -> complex:
    """``sqrt(s~**2 - h**2 * symbol)`` on the principal branch."""
    if symbol > 0:
        raise InvalidSymbol(f"Fourier symbol must be non-positive, got {symbol}")
    return complex(np.sqrt(complex(s) ** 2 - h**2 * symbol))


# --------------------------------------------------------------------------
# boundary systems


class BoundaryKind(str, enum.Enum):
    Dirichlet = "dirichlet"
    Neumann = "neumann"
    Interface = "interface"

    @classmethod
    def parse(cls, value) -> "BoundaryKind":
        if isinstance(value, cls):
            return value
        if isinstance(value, disc.ProblemKind):
            value = {"dirichlet2d": "dirichlet"}.get(value.value, value.value)
        try:
            return cls(str(value).lower())
        except ValueError:
            raise UnsupportedPair(f"no boundary system for kind {value!r}") from None


#: number of free grid values per side
_FREE = {
    ("dirichlet", 2): 2,
    ("dirichlet", 4): 2,
    ("dirichlet", 6): 3,
    ("neumann", 2): 0,
    ("neumann", 4): 2,
    ("neumann", 6): 3,
    ("interface", 2): 2,
    ("interface", 4): 2,
}

_HALF_LINE_POINTS = 40


@dataclass(frozen=True)
class _Side:
    nodes: np.ndarray  # state indices ordered by distance from the boundary
    coords: np.ndarray  # x of those nodes with h_L = 1
    rho: float  # weight of s~**2 in the row (1/r**2 on the fine side)
    s_scale: float  # s~ on this side relative to s~_L
    k: int
    tag: str  # "", "L" or "R"
    sign: int  # +1 for increasing index labels, -1 for mirrored


@dataclass(frozen=True, eq=False)
class BoundarySystem:
    """Square system ``C(s~) Sigma = T`` of one boundary or interface.

    ``truncation`` maps the name of a solution derivative to the vector of
    coefficients multiplying it; the main entry is the closure error
    (``U_xxx`` for order 2, ``U_xxxx`` for order 4, ...).
    """

    kind: BoundaryKind
    order: int
    tau: Optional[float]
    r: float
    unknowns: tuple
    rows: tuple
    evaluate: Callable = field(repr=False)
    truncation: dict = field(default_factory=dict)
    damping: float = 0.0

    def matrix(self, s) -> np.ndarray:
        return self.evaluate(complex(s))

    @cached_property
    def C0(self) -> np.ndarray:
        return self.matrix(0.0)

    def derivative(self, step: float = FD_STEP) -> np.ndarray:
        """Central difference of ``C`` at ``s~ = 0``."""
        return (self.matrix(step) - self.matrix(-step)) / (2 * step)

    @cached_property
    def C_prime(self) -> np.ndarray:
        return self.derivative(FD_STEP)

    def derivative_check(self) -> float:
        """Max difference between the derivative at step ``h`` and ``2h``; ``O(h**2)`` when smooth."""
        return float(np.max(np.abs(self.derivative(FD_STEP) - self.derivative(2 * FD_STEP))))

    @property
    def T_hat(self) -> np.ndarray:
        return next(iter(self.truncation.values()))

    @property
    def dimension(self) -> int:
        return len(self.unknowns)


def _half_line_sides(n, k):
    j = np.arange(n)
    return [_Side(j, j.astype(float), 1.0, 1.0, k, "", 1)]


def _assemble(L: np.ndarray, sides, order: int, s: complex) -> np.ndarray:
    p = order // 2
    nrow = sum(sd.k + p for sd in sides)
    C = np.zeros((nrow, nrow), complex)
    rows = [(sd, i) for sd in sides for i in range(sd.k + p)]
    col = 0
    colmap = []
    for sd in sides:
        for j in range(sd.k):
            colmap.append(("eps", sd, j))
        for q in range(p):
            colmap.append(("sigma", sd, q))
    roots = {id(sd): tracked_roots(order, s * sd.s_scale) for sd in sides}
    for a, (sd_row, i) in enumerate(rows):
        row_node = sd_row.nodes[i]
        Lrow = L[row_node]
        for col, (what, sd, j) in enumerate(colmap):
            if what == "eps":
                v = -Lrow[sd.nodes[j]]
                if sd is sd_row and i == j:
                    v += sd.rho * s * s
            else:
                kq = roots[id(sd)][j]
                tail = sd.nodes[sd.k :]
                powers = kq ** np.arange(len(tail))
                v = -np.sum(Lrow[tail] * powers)
                if sd is sd_row and i >= sd.k:
                    v += sd.rho * s * s * kq ** (i - sd.k)
            C[a, col] = v
    return C


def _column_names(sides, p):
    names = []
    for sd in sides:
        suffix = f"_{sd.tag}" if sd.tag else ""
        names += [f"eps{sd.sign * j}{suffix}" for j in range(sd.k)]
        names += [f"sigma{q + 1}{suffix}" for q in range(p)]
    return names


def _truncation_vector(L, sides, order):
    """Coefficients of ``U^(p+2)(0)`` in ``rho U_xx - L U`` on the closure rows."""
    p = order // 2
    deg = p + 2
    x = np.zeros(L.shape[0])
    for sd in sides:
        x[sd.nodes] = sd.coords
    U = x**deg / math.factorial(deg)
    Uxx = x ** (deg - 2) / math.factorial(deg - 2)
    T = []
    for sd in sides:
        for i in range(sd.k + p):
            node = sd.nodes[i]
            T.append(sd.rho * Uxx[node] - L[node] @ U)
    return np.array(T)


_DERIVATIVE_NAMES = {2: "U_xxx", 4: "U_xxxx", 6: "U_xxxxx"}

#: column layouts matching the tabulated matrices
_LAYOUT = {
    ("dirichlet", 2): ["sigma1", "eps0", "eps1"],
    ("dirichlet", 4): ["sigma1", "sigma2", "eps0", "eps1"],
    ("interface", 2): ["sigma1_L", "sigma1_R", "eps0_L", "eps-1_L", "eps0_R", "eps1_R"],
    ("interface", 4): [
        "sigma1_L",
        "sigma2_L",
        "sigma1_R",
        "sigma2_R",
        "eps0_L",
        "eps-1_L",
        "eps0_R",
        "eps1_R",
    ],
}


def build_boundary_system(kind, order: int, tau: Optional[float] = None, r: float = 1.0, *, damping: float = 0.0):
    """Assemble the boundary system of a half-line or interface problem.

    ``tau`` is the dimensionless Dirichlet penalty, or ``tau * h_L`` for the
    interface (``r = h_L / h_R``).  Neumann systems ignore ``tau``;
    ``damping`` adds the boundary damping of
    :func:`sbpwave.discretization.perturb_neumann_boundary`, whose truncation
    contribution is reported under the key ``"U_t"``.
    """
    kind = BoundaryKind.parse(kind)
    key = (kind.value, order)
    if key not in _FREE:
        raise UnsupportedPair(f"no boundary system for {kind.value} order {order}")
    p = order // 2
    k = _FREE[key]
    n = _HALF_LINE_POINTS
    extra = {}
    if kind is BoundaryKind.Dirichlet:
        if tau is None:
            tau = 1.2 * disc.min_penalty(disc.ProblemKind.Dirichlet1D, order)
        system = disc.dirichlet_1d(order, n, tau=tau, domain=(0.0, n - 1.0))
        L = system.stiffness.toarray()
        sides = _half_line_sides(n, k)
    elif kind is BoundaryKind.Neumann:
        system = disc.neumann_1d(order, n, domain=(0.0, n - 1.0))
        L = system.stiffness.toarray()
        sides = _half_line_sides(n, k)
        if damping:
            op = disc.perturb_neumann_boundary(system.operators[0], damping)
            # -H^{-1} Q u_t enters the truncation error as +H^{-1} Q U_t, scaled by h**2 / h**(p+2)
            q = op.boundary_damping / op.H / op.h ** (p + 1)
            extra["U_t"] = np.array([q[sides[0].nodes[i]] for i in range(k + p)])
    else:
        if tau is None:
            tau = 1.2 * (r + 1) / (4 * borrowing_constant(order))
        system = disc.interface_1d(
            order,
            n,
            n,
            tau=tau,
            outer_tau_mult=None,
            domain=(-(n - 1.0), (n - 1.0) / r),
            interface=0.0,
        )
        L = system.stiffness.toarray()
        L[n:] /= r**2  # right rows carry h_R**2
        left = np.arange(n - 1, -1, -1)
        right = np.arange(n, 2 * n)
        sides = [
            _Side(left, -np.arange(n, dtype=float), 1.0, 1.0, k, "L", -1),
            _Side(right, np.arange(n) / r, 1.0 / r**2, 1.0 / r, k, "R", 1),
        ]

    natural = _column_names(sides, p)
    layout = _LAYOUT.get(key, natural)
    perm = [natural.index(nm) for nm in layout]
    row_sign = np.ones(len(natural))
    if key == ("dirichlet", 2):
        # the tabulated second-order system writes its last row with flipped sign
        row_sign[2] = -1.0
    row_names = []
    for sd in sides:
        suffix = f"_{sd.tag}" if sd.tag else ""
        row_names += [f"row{sd.sign * i}{suffix}" for i in range(sd.k + p)]

    def evaluate(s, L=L, sides=sides, perm=perm, row_sign=row_sign):
        C = _assemble(L, sides, order, s)
        return (C * row_sign[:, None])[:, perm]

    truncation = {_DERIVATIVE_NAMES[order]: _truncation_vector(L, sides, order) * row_sign}
    truncation.update({name: vec * row_sign for name, vec in extra.items()})
    return BoundarySystem(
        kind=kind,
        order=order,
        tau=None if kind is BoundaryKind.Neumann else float(tau),
        r=float(r),
        unknowns=tuple(layout),
        rows=tuple(row_names),
        evaluate=evaluate,
        truncation=truncation,
        damping=float(damping),
    )


# --------------------------------------------------------------------------
# analysis at s~ = 0


@dataclass(frozen=True)
class DeterminantCheck:
    nonsingular: bool
    rank: int
    det_at_zero: complex
    singular_values: np.ndarray

    @property
    def deficiency(self) -> int:
        return len(self.singular_values) - self.rank


def determinant_condition(sys: BoundarySystem) -> DeterminantCheck:
    C0 = sys.C0
    sv = np.linalg.svd(C0, compute_uv=False)
    rank = int(np.sum(sv > RANK_TOL * sv[0])) if sv[0] > 0 else 0
    det = complex(np.linalg.det(C0))
    return DeterminantCheck(rank == C0.shape[0], rank, det, sv)


def _phase_normalise(vec):
    i = int(np.argmax(np.abs(vec)))
    return vec * np.exp(-1j * np.angle(vec[i]))


def null_vectors(sys: BoundarySystem):
    """Left and right singular vectors of the smallest singular value, phase-normalised."""
    U, _, Vh = np.linalg.svd(sys.C0)
    return _phase_normalise(U[:, -1]), _phase_normalise(Vh[-1].conj())


def svd_coupling(sys: BoundarySystem) -> complex:
    """``u^* C'(0) v`` for the null singular pair of ``C(0)``.

    Each singular vector is scaled so that its largest entry is real and
    positive; only the modulus is independent of that choice.
    """
    check = determinant_condition(sys)
    if check.deficiency != 1:
        raise RankDeficiencyNotOne(check.deficiency)
    u, v = null_vectors(sys)
    return complex(u.conj() @ sys.C_prime @ v)


@dataclass(frozen=True)
class Membership:
    member: bool
    residual: float
    relative: float


def column_space_membership(sys: BoundarySystem, vector=None) -> Membership:
    """Least-squares residual of the truncation direction(s) against the range of ``C(0)``.

    Directions whose singular values fall below ``RANK_TOL * sigma_max`` are
    not counted as part of the range.  With several truncation terms the
    worst relative residual is reported.
    """
    U, sv, _ = np.linalg.svd(sys.C0)
    rank = int(np.sum(sv > RANK_TOL * sv[0]))
    Ur = U[:, :rank]
    vectors = [np.asarray(vector, complex)] if vector is not None else [np.asarray(v, complex) for v in sys.truncation.values()]
    worst_abs, worst_rel = 0.0, 0.0
    for t in vectors:
        nt = np.linalg.norm(t)
        res = float(np.linalg.norm(t - Ur @ (Ur.conj().T @ t)))
        rel = res / nt if nt else 0.0
        if rel >= worst_rel:
            worst_abs, worst_rel = res, rel
    return Membership(bool(worst_rel <= MEMBER_TOL), float(worst_abs), float(worst_rel))


class Rationale(str, enum.Enum):
    DeterminantConditionHolds = "DeterminantConditionHolds"
    SingularWithCouplingAndMembership = "SingularWithCouplingAndMembership"
    SingularCouplingNoMembership = "SingularCouplingNoMembership"
    RankDeficientAtLimit = "RankDeficientAtLimit"


@dataclass(frozen=True)
class RatePrediction:
    boundary_gain: float
    boundary_order: float
    interior_order: int
    overall: float
    rationale: Rationale


COUPLING_TOL = 1e-6


def predict_from_system(sys: BoundarySystem) -> RatePrediction:
    """Decision tree on ``C(0)``: rank, then coupling, then membership."""
    p = sys.order // 2
    check = determinant_condition(sys)
    if check.nonsingular:
        gain, why = 2.0, Rationale.DeterminantConditionHolds
    elif check.deficiency == 1 and abs(svd_coupling(sys)) > COUPLING_TOL:
        if column_space_membership(sys).member:
            gain, why = 2.0, Rationale.SingularWithCouplingAndMembership
        else:
            gain, why = 1.0, Rationale.SingularCouplingNoMembership
    else:
        # either two null directions or a null direction that C'(0) cannot lift:
        # only the energy estimate applies
        gain, why = 0.5, Rationale.RankDeficientAtLimit
    return RatePrediction(float(gain), float(p + gain), 2 * p, float(min(2 * p, p + gain)), why)


def predict_rate(kind, order: int, tau: Optional[float] = None, r: float = 1.0, *, damping: float = 0.0) -> RatePrediction:
    return predict_from_system(build_boundary_system(kind, order, tau, r, damping=damping))


def analysis_threshold(kind, order: int, r: float = 1.0) -> float:
    """Stability limit in the units used by :func:`build_boundary_system`."""
    kind = BoundaryKind.parse(kind)
    if kind is BoundaryKind.Neumann:
        return 0.0
    alpha = borrowing_constant(order)
    if kind is BoundaryKind.Interface:
        return (r + 1) / (4 * alpha)
    return 1 / alpha


def _cjson(z):
    z = complex(z)
    return [float(f"{z.real:.17g}"), float(f"{z.imag:.17g}")]


def analyze_report(sys: BoundarySystem) -> dict:
    """JSON-ready summary of the analysis at ``s~ = 0``."""
    check = determinant_condition(sys)
    thr = analysis_threshold(sys.kind, sys.order, sys.r)
    try:
        coupling = svd_coupling(sys)
        coupling_out = {"value": _cjson(coupling), "abs": abs(coupling)}
    except RankDeficiencyNotOne as exc:
        coupling_out = {"value": None, "abs": None, "note": str(exc)}
    memb = column_space_membership(sys)
    pred = predict_from_system(sys)
    return {
        "kind": sys.kind.value,
        "order": sys.order,
        "tau": sys.tau,
        "tau_ratio": (sys.tau / thr) if (sys.tau is not None and thr) else None,
        "r": sys.r,
        "damping": sys.damping,
        "unknowns": list(sys.unknowns),
        "det_at_zero": _cjson(check.det_at_zero),
        "rank": check.rank,
        "dimension": sys.dimension,
        "singular_values": [float(v) for v in check.singular_values],
        "coupling": coupling_out,
        "membership": {"member": memb.member, "residual": memb.residual, "relative": memb.relative},
        "truncation": {k: [float(x) for x in np.real(v)] for k, v in sys.truncation.items()},
        "prediction": {
            "boundary_gain": pred.boundary_gain,
            "boundary_order": pred.boundary_order,
            "interior_order": pred.interior_order,
            "overall": pred.overall,
            "rationale": pred.rationale.value,
        },
        "C0": [[_cjson(z) for z in row] for row in sys.C0],
    }
