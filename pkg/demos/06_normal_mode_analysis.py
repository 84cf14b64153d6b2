"""Predict convergence rates from the boundary system at s = 0.

For each closure the half-line problem reduces to C(s) Sigma = h^(p+2) T.
If C(0) is invertible the boundary gains two orders.  If it is singular the
gain depends on the coupling u* C'(0) v and on whether T lies in range C(0).
"""
import numpy as np

from sbpwave import build_boundary_system, characteristic_roots, column_space_membership, determinant_condition
from sbpwave import predict_rate, svd_coupling
from sbpwave.normal_mode import analysis_threshold

for order in (2, 4, 6):
    roots = characteristic_roots(order, 0.01)
    print(f"order {order}: decaying roots at s = 0.01: {np.round(roots.admissible, 4)}")

print()
cases = [("dirichlet", 4, 1.0), ("dirichlet", 4, 1.2), ("neumann", 4, None), ("neumann", 6, None),
         ("interface", 2, 1.2), ("interface", 4, 1.2)]
for kind, order, mult in cases:
    tau = None if mult is None else mult * analysis_threshold(kind, order, 2.0)
    system = build_boundary_system(kind, order, tau, 2.0)
    check = determinant_condition(system)
    line = f"{kind:9s} {order}  rank {check.rank}/{system.dimension}"
    if check.deficiency == 1:
        line += f"  |coupling| {abs(svd_coupling(system)):.4f}  member {column_space_membership(system).member}"
    pred = predict_rate(kind, order, tau, 2.0)
    print(f"{line}  -> rate {pred.overall} ({pred.rationale.value})")
