"""Build the SBP second-derivative operators and check what makes them work.

Each operator is D = H^-1 (-A + B S): H is a diagonal quadrature, A is
symmetric positive semi-definite and S holds the boundary first derivative.
"""
import numpy as np

from sbpwave import borrowing_constant, build_sbp, verify_borrowing
from sbpwave.operators import max_borrowing, sbp_residual

n = 101
h = 1.0 / (n - 1)

for order in (2, 4, 6):
    op = build_sbp(order, n, h)
    A = op.A.toarray()
    print(f"order {order}: {op.m} closure rows, min eig(A) = {np.linalg.eigvalsh(A)[0]:.1e}")
    print(f"  H D + A - B S residual  {sbp_residual(op):.1e}")

    # H integrates smooth functions to the operator's order
    x = op.x
    print(f"  sum(H * sin(x)) - (1 - cos 1) = {op.H @ np.sin(x) - (1 - np.cos(1)):.1e}")

    # the interior stencil is exact up to degree 2p + 1, the closure up to degree p + 1
    err = np.abs(op.D @ x**4 - 12 * x**2)
    print(f"  D x^4 error: interior {err[op.m:-op.m].max():.1e}, boundary {err[:op.m].max():.1e}")

    # the borrowing constant is how much boundary-derivative energy A can lend
    alpha = borrowing_constant(order)
    ok = verify_borrowing(op, alpha).psd and not verify_borrowing(op, 1.2 * alpha).psd
    print(f"  alpha = {alpha:.10f}, tight: {ok}, bisection: {max_borrowing(op):.10f}")
