"""Diagonal-norm SBP second-derivative operators and periodic companions.

The second derivative on ``n`` equispaced points is written as

    D = H^{-1} (-A + B S)

with ``H`` a positive diagonal norm, ``A`` symmetric positive semi-definite,
``B = diag(-1, 0, ..., 0, 1)`` and ``S`` carrying one-sided first-derivative
stencils in its first and last rows.  Only those two rows of ``S`` enter the
decomposition, so interior rows are stored as zeros.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import _coefficients as coef
from .errors import DimensionMismatch, GridTooSmall, UnsupportedOrder

SUPPORTED_ORDERS = (2, 4, 6)
TOL_PSD = 1e-10


def _check_order(order, supported=SUPPORTED_ORDERS):
    if order not in supported:
        raise UnsupportedOrder(order, supported)


def min_grid_points(order: int) -> int:
    """Smallest n for which the two boundary closures do not overlap."""
    _check_order(order)
    return 2 * coef.CLOSURE_WIDTH[order] + 1


def _as_float(values):
    return np.array([float(v) for v in values])


def closure_block(order: int) -> np.ndarray:
    """Left boundary block of ``h**2 * D`` as a dense ``m x w`` array."""
    _check_order(order)
    rows = coef.CLOSURE[order]
    width = max(len(r) for r in rows)
    block = np.zeros((len(rows), width))
    for i, r in enumerate(rows):
        block[i, : len(r)] = _as_float(r)
    return block


def interior_stencil(order: int) -> np.ndarray:
    """Central stencil of ``h**2 * D`` at offsets ``-p..p``."""
    _check_order(order)
    return _as_float(coef.INTERIOR[order])


def norm_weights(order: int) -> np.ndarray:
    _check_order(order)
    return _as_float(coef.NORM[order])


def boundary_derivative_stencil(order: int) -> np.ndarray:
    """Left one-sided first-derivative stencil of ``h * S``."""
    _check_order(order)
    return _as_float(coef.BOUNDARY_DERIVATIVE[order])


@dataclass(frozen=True, eq=False)
class SbpOperatorSet:
    """Immutable bundle of SBP matrices on one grid.

    ``H`` and ``B`` are stored as diagonals.  ``boundary_damping`` holds the
    diagonal of an optional dissipative matrix ``Q`` acting on the velocity,
    see :func:`sbpwave.discretization.perturb_neumann_boundary`.
    """

    order: int
    n: int
    h: float
    D: sp.csr_matrix
    H: np.ndarray
    A: sp.csr_matrix
    S: sp.csr_matrix
    B: np.ndarray
    m: int
    boundary_damping: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return self.order // 2

    @property
    def x(self) -> np.ndarray:
        """Grid coordinates relative to the left boundary."""
        return self.h * np.arange(self.n)

    @property
    def Hinv(self) -> np.ndarray:
        return 1.0 / self.H

    @property
    def left_derivative(self) -> np.ndarray:
        """Dense row of ``S`` at the left boundary, ``(Su)_0 = row @ u``."""
        return self.S.getrow(0).toarray().ravel()

    @property
    def right_derivative(self) -> np.ndarray:
        return self.S.getrow(self.n - 1).toarray().ravel()

    def with_damping(self, damping) -> "SbpOperatorSet":
        return replace(self, boundary_damping=None if damping is None else np.asarray(damping, float))

    def dense(self, name: str) -> np.ndarray:
        """Return the named matrix (``D``, ``H``, ``A``, ``S``, ``B``) as a dense array."""
        mat = getattr(self, name)
        if isinstance(mat, np.ndarray):
            return np.diag(mat)
        return mat.toarray()


def build_sbp(order: int, n: int, h: float) -> SbpOperatorSet:
    """Assemble the diagonal-norm SBP second-derivative operator."""
    _check_order(order)
    n_min = min_grid_points(order)
    if n < n_min:
        raise GridTooSmall(n, n_min)
    if not h > 0:
        raise ValueError("grid spacing must be positive")
    p = order // 2
    m = coef.CLOSURE_WIDTH[order]
    block = closure_block(order)
    stencil = interior_stencil(order)
    w = block.shape[1]

    inner = np.arange(m, n - m)
    offsets = np.arange(-p, p + 1)
    cols_w = np.arange(w)
    rows = [np.repeat(inner, 2 * p + 1), np.repeat(np.arange(m), w), np.repeat(n - 1 - np.arange(m), w)]
    cols = [(inner[:, None] + offsets).ravel(), np.tile(cols_w, m), np.tile(n - 1 - cols_w, m)]
    vals = [np.tile(stencil, inner.size), block[:m].ravel(), block[:m].ravel()]
    D = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsr()
    D.eliminate_zeros()
    D = D / h**2

    weights = norm_weights(order)
    H = np.ones(n)
    H[:m] = weights
    H[n - m :] = weights[::-1]
    H *= h

    s0 = boundary_derivative_stencil(order)
    k = np.arange(len(s0))
    S = sp.csr_matrix(
        (np.concatenate([s0, -s0]), (np.repeat([0, n - 1], len(s0)), np.concatenate([k, n - 1 - k]))), shape=(n, n)
    )
    S = S / h

    B = np.zeros(n)
    B[0], B[-1] = -1.0, 1.0
    A = (sp.diags(B) @ S - sp.diags(H) @ D).tocsr()
    # remove round-off asymmetry so that A is symmetric to the last bit
    A = ((A + A.T) * 0.5).tocsr()
    A.eliminate_zeros()
    return SbpOperatorSet(order=order, n=n, h=float(h), D=D, H=H, A=A, S=S, B=B, m=m)


def borrowing_constant(order: int) -> float:
    """Largest alpha keeping ``A - h*alpha*(E0 S)^T (E0 S)`` positive semi-definite."""
    _check_order(order, tuple(coef.BORROWING))
    return coef.BORROWING[order]


@dataclass(frozen=True)
class BorrowingCheck:
    psd: bool
    min_eigenvalue: float


def verify_borrowing(op: SbpOperatorSet, alpha: float, *, margin_rows: int = 20) -> BorrowingCheck:
    """Check positive semi-definiteness of the borrowed matrix near the left boundary.

    The borrowed term only touches the leading ``len(S row)`` entries, so the
    smallest eigenvalue is taken from a leading principal block of size
    ``m + p + margin_rows``.
    """
    k = min(op.n, op.m + op.p + margin_rows)
    block = op.A[:k, :k].toarray()
    s = op.left_derivative[:k]
    block = block - op.h * alpha * np.outer(s, s)
    lam = float(sla.eigvalsh(block, subset_by_index=[0, 0])[0])
    scale = float(abs(op.A).sum(axis=1).max())
    return BorrowingCheck(psd=lam >= -TOL_PSD * scale, min_eigenvalue=lam)


def max_borrowing(op: SbpOperatorSet, *, lo=0.0, hi=1.0, tol=1e-12) -> float:
    """Bisection for the largest alpha that keeps the borrowed block PSD."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if verify_borrowing(op, mid).psd:
            lo = mid
        else:
            hi = mid
    return lo


def sbp_residual(op: SbpOperatorSet) -> float:
    """Max-norm of ``H D + A - B S``."""
    R = sp.diags(op.H) @ op.D + op.A - sp.diags(op.B) @ op.S
    return float(abs(R).max()) if R.nnz else 0.0


def dump_operator(op: SbpOperatorSet, stream=None, names=("D", "H", "A", "S")) -> str:
    """Plain-text export: one header line per matrix then rows in ``%.16e``."""
    out = io.StringIO() if stream is None else stream
    out.write(f"# order {op.order} n {op.n} h {op.h:.16e}\n")
    for name in names:
        mat = op.dense(name)
        out.write(f"# {name} {mat.shape[0]} {mat.shape[1]}\n")
        np.savetxt(out, mat, fmt="%.16e")
    return out.getvalue() if stream is None else ""


# --------------------------------------------------------------------------
# periodic central operators


def periodic_symbol(order: int, omega, h: float):
    """Closed-form Fourier symbol of the periodic central second derivative."""
    _check_order(order)
    s2 = np.sin(0.5 * np.asarray(omega) * h) ** 2
    factor = {2: 1.0, 4: 1.0 + s2 / 3.0, 6: 1.0 + s2 / 3.0 + 8.0 * s2**2 / 45.0}[order]
    return -4.0 / h**2 * s2 * factor


@dataclass(frozen=True, eq=False)
class PeriodicOperator:
    order: int
    n: int
    h: float
    stencil: np.ndarray
    D: sp.csr_matrix

    def fourier_symbol(self, omega):
        return periodic_symbol(self.order, omega, self.h)

    def dft_symbol(self) -> np.ndarray:
        """Eigenvalues of the circulant matrix at the grid frequencies ``2*pi*k/(n*h)``."""
        col = np.zeros(self.n)
        p = self.order // 2
        for j, c in zip(range(-p, p + 1), self.stencil):
            col[j % self.n] += c
        return np.fft.fft(col).real

    @property
    def frequencies(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.h)


def build_periodic(order: int, n: int, h: float) -> PeriodicOperator:
    """Circulant central second-derivative on ``n`` unique periodic points."""
    _check_order(order)
    p = order // 2
    if n < 2 * p + 1:
        raise GridTooSmall(n, 2 * p + 1)
    stencil = interior_stencil(order) / h**2
    offsets = range(-p, p + 1)
    D = sp.lil_matrix((n, n))
    idx = np.arange(n)
    for j, c in zip(offsets, stencil):
        D[idx, (idx + j) % n] = c
    return PeriodicOperator(order=order, n=n, h=float(h), stencil=stencil, D=D.tocsr())


# --------------------------------------------------------------------------
# tensor-product action


def _matrix_of(op):
    if op is None:
        return None
    if isinstance(op, (SbpOperatorSet, PeriodicOperator)):
        return op.D
    return op


def apply_2d(op_x, op_y, field: np.ndarray) -> np.ndarray:
    """Action of ``op_x (x) op_y`` on a field stored as ``(nx, ny)``.

    ``None`` stands for the identity.  Operator sets contribute their second
    derivative ``D``.  The Kronecker product is never formed.
    """
    F = np.asarray(field)
    if F.ndim != 2:
        raise DimensionMismatch(f"field must be 2D, got shape {F.shape}")
    Ax, Ay = _matrix_of(op_x), _matrix_of(op_y)
    if Ax is not None and Ax.shape[1] != F.shape[0]:
        raise DimensionMismatch(f"x operator has {Ax.shape[1]} columns, field has {F.shape[0]} rows")
    if Ay is not None and Ay.shape[1] != F.shape[1]:
        raise DimensionMismatch(f"y operator has {Ay.shape[1]} columns, field has {F.shape[1]} columns")
    out = F if Ax is None else Ax @ F
    if Ay is not None:
        out = (Ay @ out.T).T
    return np.asarray(out)


def laplacian_2d(op_x, op_y, field: np.ndarray) -> np.ndarray:
    """``(Dx (x) I + I (x) Dy) field``."""
    return apply_2d(op_x, None, field) + apply_2d(None, op_y, field)
