"""Neumann boundaries, and what a small boundary damping does to accuracy.

The unperturbed fourth-order boundary system is singular, but its truncation
error lies in the range of C(0), so the scheme keeps fourth-order accuracy.
Damping at the boundary points adds a truncation term outside that range and
the rate falls by one.
"""
from sbpwave import StudyConfig, build_boundary_system, column_space_membership, predict_rate, run_study
from sbpwave.discretization import reference_damping

for order in (4, 6):
    plain = build_boundary_system("neumann", order)
    damped = build_boundary_system("neumann", order, damping=1.0)
    print(f"order {order}: member without damping {column_space_membership(plain).member}, "
          f"with damping {column_space_membership(damped).member}")
    print(f"  predicted rates {predict_rate('neumann', order).overall} -> "
          f"{predict_rate('neumann', order, damping=1.0).overall}")

levels = (51, 101, 201, 401)
for order in (4, 6):
    courant = 0.05 if order == 6 else 0.1
    for eta in (0.0, reference_damping(order)):
        rep = run_study(StudyConfig("neumann", order, levels=levels, courant=courant, perturbation=eta))
        tag = "damped" if eta else "plain "
        print(f"order {order} {tag}: rates " + " ".join(f"{q:5.2f}" for q in rep.rates_l2))
