import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbpwave import discretization as disc
from sbpwave import normal_mode as nm
from sbpwave import reference as ref
from sbpwave.errors import InvalidSymbol, RankDeficiencyNotOne, UnsupportedPair
from sbpwave.operators import borrowing_constant, periodic_symbol

ORDERS = (2, 4, 6)
S3 = np.sqrt(3.0)


def rel_err(a, b):
    a, b = np.asarray(a, complex), np.asarray(b, complex)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def tau_dirichlet(order, mult=1.0):
    return mult / borrowing_constant(order)


def tau_interface(order, r, mult=1.0):
    return mult * nm.analysis_threshold("interface", order, r)


# --------------------------------------------------------------------------
# characteristic roots


def test_polynomials_match_closed_forms():
    s = 0.3 + 0.2j
    s2 = s * s
    closed = {
        2: [1, -(2 + s2), 1],
        4: np.array([1, -16, 30 + 12 * s2, -16, 1]) * (-1 / 12),
        6: np.array([2, -27, 270, -(180 * s2 + 490), 270, -27, 2]) / 180,
    }
    for order, coeffs in closed.items():
        assert np.allclose(nm.characteristic_polynomial(order, s), coeffs)


def test_roots_at_zero():
    r2 = nm.characteristic_roots(2, 0)
    assert np.allclose(r2.all_roots, [1, 1])
    assert r2.limit_root == 1
    r4 = nm.characteristic_roots(4, 0)
    assert np.allclose(sorted(r4.admissible, key=abs), [7 - 4 * S3, 1])
    r6 = nm.characteristic_roots(6, 0)
    pair = sorted(r6.admissible[1:], key=lambda z: z.imag)
    assert np.allclose(pair, [0.0519 - 0.0801j, 0.0519 + 0.0801j], atol=1e-4)


def test_root_branch_near_zero():
    k1 = nm.tracked_roots(2, 0.01)[0]
    assert abs(k1 - (1 - 0.01)) <= 1e-4
    roots = nm.characteristic_roots(2, 0.01)
    assert roots.residual < 1e-12
    assert len(roots.admissible) == 1


@settings(max_examples=200, deadline=None)
@given(
    order=st.sampled_from(ORDERS),
    re=st.floats(1e-4, 0.2),
    im=st.floats(-0.2, 0.2),
)
def test_admissible_root_count(order, re, im):
    roots = nm.characteristic_roots(order, complex(re, im))
    assert len(roots.admissible) == order // 2
    assert np.all(np.abs(roots.admissible) < 1)
    assert len(roots.all_roots) == order
    # the remaining roots lie outside the unit circle
    assert np.sum(np.abs(roots.all_roots) < 1) == order // 2


@settings(max_examples=200, deadline=None)
@given(order=st.sampled_from(ORDERS), re=st.floats(1e-4, 0.2), im=st.floats(-0.2, 0.2))
def test_conjugate_symmetry_of_roots(order, re, im):
    s = complex(re, im)
    a = nm.characteristic_roots(order, s).all_roots
    b = np.conj(nm.characteristic_roots(order, s.conjugate()).all_roots)
    dist = np.abs(a[:, None] - b[None, :])
    assert dist.min(axis=1).max() <= 1e-9 and dist.min(axis=0).max() <= 1e-9


@settings(max_examples=200, deadline=None)
@given(order=st.sampled_from(ORDERS), re=st.floats(1e-4, 0.1), im=st.floats(-0.1, 0.1))
def test_conjugate_symmetry_of_boundary_systems(order, re, im):
    """C(conj s) = conj C(s); for order 6 the two complex-root columns trade places."""
    s = complex(re, im)
    if abs(s) > 0.1:
        s = s / abs(s) * 0.1
    system = nm.build_boundary_system("dirichlet", order, tau_dirichlet(order, 1.2))
    a = system.matrix(s.conjugate())
    b = np.conj(system.matrix(s))
    if order == 6:
        cols = list(system.unknowns)
        i, j = cols.index("sigma2"), cols.index("sigma3")
        perm = list(range(len(cols)))
        perm[i], perm[j] = j, i
        b = b[:, perm]
    assert np.allclose(a, b, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(order=st.sampled_from(ORDERS), radius=st.floats(1e-4, 0.1), angle=st.floats(-1.55, 1.55))
def test_root_decay_margin(order, radius, angle):
    s = radius * np.exp(1j * angle)
    assert nm.root_decay_margin(order, s) >= -10 * abs(s) ** 2


def test_root_decay_margin_examples():
    assert nm.root_decay_margin(2, 0.01) >= -10 * 0.01**2
    s = 0.001 + 0.01j
    assert nm.root_decay_margin(2, s) >= -10 * abs(s) ** 2
    margins = [abs(nm.root_decay_margin(2, x)) for x in (1e-2, 1e-3, 1e-4)]
    assert margins[0] > margins[1] > margins[2] and margins[2] < 1e-7


@settings(max_examples=200, deadline=None)
@given(
    order=st.sampled_from(ORDERS),
    re=st.floats(1e-4, 1.0),
    im=st.floats(-1.0, 1.0),
    wh=st.floats(0, np.pi),
    h=st.floats(1e-3, 0.5),
)
def test_s_plus_has_positive_real_part(order, re, im, wh, h):
    symbol = float(periodic_symbol(order, wh / h, h))
    assert nm.s_plus(complex(re, im), symbol, h).real > 0


def test_s_plus_examples():
    assert nm.s_plus(0.1 + 0.2j, 0.0, 0.1) == pytest.approx(0.1 + 0.2j)
    h = 0.1
    assert nm.s_plus(0.1, -4 / h**2, h) == pytest.approx(np.sqrt(0.01 + 4))
    with pytest.raises(InvalidSymbol):
        nm.s_plus(0.1, 1.0, h)


# --------------------------------------------------------------------------
# boundary systems against the tabulated matrices


def test_dimensions():
    dims = {
        ("dirichlet", 2): 3,
        ("dirichlet", 4): 4,
        ("dirichlet", 6): 6,
        ("neumann", 2): 1,
        ("neumann", 4): 4,
        ("neumann", 6): 6,
        ("interface", 2): 6,
        ("interface", 4): 8,
    }
    for (kind, order), dim in dims.items():
        assert nm.build_boundary_system(kind, order, r=2.0).dimension == dim


@pytest.mark.parametrize("tau", [2.0, 2.5, 3.0, 4.7, 6.0])
def test_second_order_dirichlet(tau):
    system = nm.build_boundary_system("dirichlet", 2, tau)
    assert system.unknowns == ("sigma1", "eps0", "eps1")
    assert np.array_equal(system.C0, ref.c2d(tau))
    assert np.linalg.det(system.C0) == pytest.approx(5 - 2 * tau, abs=1e-12)


def test_det_c2d_on_interval():
    for tau in np.linspace(2, 6, 41):
        det = np.linalg.det(nm.build_boundary_system("dirichlet", 2, tau).C0)
        assert abs(det - (5 - 2 * tau)) <= 1e-12


@pytest.mark.parametrize("tau", [ref.TAU4_CLOSED_FORM, 4.5, 8.0])
def test_fourth_order_dirichlet(tau):
    system = nm.build_boundary_system("dirichlet", 4, tau)
    assert rel_err(system.C0, ref.c4d(tau)) <= 1e-7
    assert rel_err(system.T_hat, ref.t4d()) <= 1e-7


def test_fourth_order_determinant_vanishes_at_closed_form():
    tau4 = ref.TAU4_CLOSED_FORM
    assert tau4 == pytest.approx(1 / borrowing_constant(4), rel=1e-9)
    system = nm.build_boundary_system("dirichlet", 4, tau4)
    assert abs(np.linalg.det(system.C0)) <= 1e-9
    assert abs(np.linalg.det(system.matrix(0))) <= 1e-9


def test_raw_c4d_entry_is_inconsistent():
    """The raw tabulated matrix is nonsingular at the closed-form tau; the corrected entry is not."""
    tau4 = ref.TAU4_CLOSED_FORM
    assert abs(np.linalg.det(ref.c4d(tau4, raw=True))) > 1e-3
    assert abs(np.linalg.det(ref.c4d(tau4))) <= 1e-9


@pytest.mark.parametrize("mult", [1.0, 1.2, 3.0])
def test_sixth_order_dirichlet(mult):
    tau = tau_dirichlet(6, mult)
    assert rel_err(nm.build_boundary_system("dirichlet", 6, tau).C0, ref.c6d(tau)) <= 1e-7


def test_neumann_matrices():
    n4 = nm.build_boundary_system("neumann", 4)
    assert rel_err(n4.C0, ref.c4n()) <= 1e-7
    assert np.allclose(n4.C0[0], [54 / 17, -59 / 17, 5 / 17, (11 - 4 * S3) / 17])
    assert rel_err(n4.T_hat, ref.t4n()) <= 1e-7
    # the tabulated derivative is rounded to four digits
    assert rel_err(n4.C_prime, ref.c4n_prime()) <= 1e-4
    n6 = nm.build_boundary_system("neumann", 6)
    assert rel_err(n6.C0, ref.c6n()) <= 1e-7
    assert rel_err(n6.C_prime, ref.c6n_prime()) <= 1e-7
    assert rel_err(n6.T_hat, ref.t6n()) <= 1e-7


def test_second_order_neumann_truncation():
    """The one-unknown system: C = (-1), T = -1/3, consistent with the rhs residual."""
    system = nm.build_boundary_system("neumann", 2)
    assert system.T_hat[0] == pytest.approx(-1 / 3)


@pytest.mark.parametrize("r", [1.0, 2.0, 3.0])
@pytest.mark.parametrize("mult", [1.0, 1.2, 3.0])
def test_interface_matrices(r, mult):
    th = tau_interface(2, r, mult)
    i2 = nm.build_boundary_system("interface", 2, th, r)
    assert rel_err(i2.C0, ref.c2i(th, r)) <= 1e-7
    assert i2.C0[0, 2] == pytest.approx(-1 + 2 * th)
    assert rel_err(i2.C_prime, ref.c2i_prime(r)) <= 1e-6
    assert rel_err(i2.T_hat, ref.t2i(r, raw=False)) <= 1e-7
    th = tau_interface(4, r, mult)
    i4 = nm.build_boundary_system("interface", 4, th, r)
    assert rel_err(i4.C0, ref.c4i(th, r)) <= 1e-7
    assert rel_err(i4.C_prime, ref.c4i_prime(r)) <= 1e-5
    assert rel_err(i4.T_hat, ref.t4i(r)) <= 1e-7


def test_interface_truncation_scaling():
    """Row 3 of the second-order interface vector is the tabulated value divided by r^2."""
    r = 2.0
    t = nm.build_boundary_system("interface", 2, None, r).T_hat
    assert t[3] == pytest.approx(-2 / (3 * r**3) - 1 / (3 * r))
    assert t[3] * r**2 == pytest.approx(ref.t2i(r)[3])
    # at r = 1 both readings agree
    assert np.allclose(ref.t2i(1.0), ref.t2i(1.0, raw=False))


@pytest.mark.parametrize("kind,order", [("dirichlet", 4), ("neumann", 6), ("interface", 4)])
def test_derivative_richardson(kind, order):
    system = nm.build_boundary_system(kind, order, r=2.0)
    assert system.derivative_check() <= 1e-5 * max(1.0, np.abs(system.C_prime).max())


def test_unsupported_pair():
    with pytest.raises(UnsupportedPair):
        nm.build_boundary_system("interface", 6)


def test_boundary_system_follows_discretization():
    """Row 0 of the fourth-order Dirichlet system equals the scheme's scaled row 0."""
    tau = 4.4
    system = nm.build_boundary_system("dirichlet", 4, tau)
    K = disc.dirichlet_1d(4, 40, tau=tau, domain=(0.0, 39.0)).stiffness.toarray()
    # rows of C carry s~^2 - h^2 L, so the eps0 entry of row 0 is -h^2 K[0, 0]
    assert system.C0[0, system.unknowns.index("eps0")] == pytest.approx(-K[0, 0])


# --------------------------------------------------------------------------
# rank, coupling and membership


def test_dirichlet_ranks():
    for order in ORDERS:
        at_limit = nm.determinant_condition(nm.build_boundary_system("dirichlet", order, tau_dirichlet(order)))
        above = nm.determinant_condition(nm.build_boundary_system("dirichlet", order, tau_dirichlet(order, 1.2)))
        assert not at_limit.nonsingular and at_limit.deficiency == 1
        assert above.nonsingular and above.rank == above.singular_values.size


def test_neumann_rank_coupling_membership():
    for order, rank in ((4, 3), (6, 5)):
        system = nm.build_boundary_system("neumann", order)
        check = nm.determinant_condition(system)
        assert check.rank == rank
        assert abs(nm.svd_coupling(system)) == pytest.approx(ref.COUPLING_NEUMANN[order], abs=1e-3)
        assert nm.column_space_membership(system).member


def test_interface_ranks_and_membership():
    r = 2.0
    i2 = nm.build_boundary_system("interface", 2, tau_interface(2, r, 1.2), r)
    assert nm.determinant_condition(i2).rank == 5
    memb = nm.column_space_membership(i2)
    assert not memb.member and memb.relative > 1e-6
    assert nm.determinant_condition(nm.build_boundary_system("interface", 2, tau_interface(2, r), r)).rank == 4
    i4 = nm.build_boundary_system("interface", 4, tau_interface(4, r, 1.2), r)
    assert nm.determinant_condition(i4).rank == 7
    assert nm.column_space_membership(i4).member
    assert nm.determinant_condition(nm.build_boundary_system("interface", 4, tau_interface(4, r), r)).rank == 6


@pytest.mark.parametrize("mult", [1.1, 1.5, 2.0, 3.0, 4.0, 5.0])
def test_interface_coupling_nonzero(mult):
    r = 2.0
    system = nm.build_boundary_system("interface", 2, tau_interface(2, r, mult), r)
    assert abs(nm.svd_coupling(system)) > 1e-3


def test_coupling_requires_single_null_direction():
    r = 2.0
    with pytest.raises(RankDeficiencyNotOne):
        nm.svd_coupling(nm.build_boundary_system("interface", 2, tau_interface(2, r), r))
    with pytest.raises(RankDeficiencyNotOne):
        nm.svd_coupling(nm.build_boundary_system("dirichlet", 4, tau_dirichlet(4, 1.2)))


def test_null_vectors_are_phase_normalised():
    u, v = nm.null_vectors(nm.build_boundary_system("neumann", 6))
    for vec in (u, v):
        i = int(np.argmax(np.abs(vec)))
        assert vec[i].imag == pytest.approx(0, abs=1e-14) and vec[i].real > 0
        assert np.linalg.norm(vec) == pytest.approx(1)


@pytest.mark.parametrize("order", [4, 6])
def test_boundary_damping_leaves_column_space(order):
    plain = nm.build_boundary_system("neumann", order)
    damped = nm.build_boundary_system("neumann", order, damping=1.0)
    assert np.allclose(plain.C0, damped.C0)
    t = damped.truncation["U_t"]
    assert np.linalg.norm(t) > 0
    memb = nm.column_space_membership(damped, t)
    assert not memb.member and memb.relative > 1e-6
    assert not nm.column_space_membership(damped).member


def test_membership_of_range_vectors():
    system = nm.build_boundary_system("neumann", 4)
    rng = np.random.default_rng(0)
    in_range = system.C0 @ rng.standard_normal(4)
    assert nm.column_space_membership(system, in_range).member
    u, _ = nm.null_vectors(system)
    assert not nm.column_space_membership(system, u).member


# --------------------------------------------------------------------------
# rate predictions


PREDICTED_RATES = [
    ("dirichlet", 2, 1.2, 2.0),
    ("dirichlet", 4, 1.2, 4.0),
    ("dirichlet", 6, 1.2, 5.0),
    ("dirichlet", 2, 1.0, 1.5),
    ("dirichlet", 4, 1.0, 2.5),
    ("dirichlet", 6, 1.0, 3.5),
    ("interface", 2, 1.2, 2.0),
    ("interface", 4, 1.2, 4.0),
    ("interface", 2, 1.0, 1.5),
    ("interface", 4, 1.0, 2.5),
]


@pytest.mark.parametrize("kind,order,mult,expected", PREDICTED_RATES)
def test_predicted_rate_table(kind, order, mult, expected):
    r = 2.0
    tau = mult * nm.analysis_threshold(kind, order, r)
    pred = nm.predict_rate(kind, order, tau, r)
    assert pred.overall == expected
    assert pred.interior_order == order
    assert pred.boundary_order == order // 2 + pred.boundary_gain


def test_prediction_rationales():
    r = 2.0
    i2 = nm.predict_rate("interface", 2, tau_interface(2, r, 1.2), r)
    assert i2.boundary_gain == 1 and i2.rationale is nm.Rationale.SingularCouplingNoMembership
    n2 = nm.predict_rate("neumann", 2)
    assert n2.overall == 2 and n2.boundary_gain == 1
    n4 = nm.predict_rate("neumann", 4)
    assert n4.overall == 4 and n4.rationale is nm.Rationale.SingularWithCouplingAndMembership
    assert nm.predict_rate("neumann", 6).overall == 5
    d6 = nm.predict_rate("dirichlet", 6, tau_dirichlet(6, 3.0))
    assert d6.rationale is nm.Rationale.DeterminantConditionHolds
    d4 = nm.predict_rate("dirichlet", 4, tau_dirichlet(4))
    assert d4.rationale is nm.Rationale.RankDeficientAtLimit
    assert nm.predict_rate("neumann", 4, damping=1.0).overall == 3
    assert nm.predict_rate("neumann", 6, damping=1.0).overall == 4


def test_interface_prediction_above_threshold_range():
    r = 2.0
    for mult in (1.1, 2.0, 5.0):
        assert nm.predict_rate("interface", 2, tau_interface(2, r, mult), r).overall == 2
        assert nm.predict_rate("interface", 4, tau_interface(4, r, mult), r).overall == 4


def test_analyze_report_is_json():
    report = nm.analyze_report(nm.build_boundary_system("neumann", 4))
    text = json.dumps(report)
    back = json.loads(text)
    assert back["rank"] == 3
    assert back["membership"]["member"] is True
    assert back["prediction"]["overall"] == 4
    assert back["coupling"]["abs"] == pytest.approx(0.3095, abs=1e-3)
    assert len(back["C0"]) == 4
    at_limit = nm.analyze_report(nm.build_boundary_system("interface", 2, tau_interface(2, 2.0), 2.0))
    assert at_limit["coupling"]["value"] is None
    assert at_limit["tau_ratio"] == pytest.approx(1.0)
