import numpy as np
import pytest

from thurston_flows.curvature import curvature_tensors
from thurston_flows.errors import NoClosedFormError, OutOfDomainError
from thurston_flows.flow import (
    FlowKind,
    IntegratorConfig,
    asymptotic_reference,
    closed_form,
    integrate,
    rhs,
)
from thurston_flows.geometry import DiagonalMetric

from conftest import FLOWABLE

# 30-digit mpmath evaluations of the closed forms
NIL_RF_T1 = (0.629960524947436582, 1.58740105196819947)  # 4^(-1/3), 4^(1/3)
NIL_XCF_T4 = (0.861972821246977724, 1.56141836431142018)  # 8^(-1/14), 8^(3/14)
NIL_RF_211_T1 = (1.04551591714942043, 1.91293118277238910)  # 2 * 7^(-1/3), 7^(1/3)


def test_flow_kind():
    assert FlowKind.parse("xcf") is FlowKind.XCF_MINUS
    assert FlowKind.RF.p == 0 and FlowKind.XCF_PLUS.p == -1
    with pytest.raises(ValueError):
        FlowKind.parse("mcf")


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=-1)
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler")


def test_rhs_nil_rf():
    np.testing.assert_allclose(rhs("rf", "nil", DiagonalMetric(1, 1, 1)), [-1, 1, 1])


def test_rhs_nil_xcf():
    np.testing.assert_allclose(rhs("xcf-", "nil", DiagonalMetric(1, 1, 1)), [-1 / 8, 3 / 8, 3 / 8])


def test_rhs_flat_fixed_point():
    for flow in ("rf", "xcf-", "xcf+"):
        assert np.all(rhs(flow, "isome2tilde", DiagonalMetric(2, 2, 0.3)) == 0)


def test_product_geometry_has_zero_cross_curvature():
    for g in [DiagonalMetric(1, 2, 2), DiagonalMetric(0.3, 5, 5)]:
        assert np.all(curvature_tensors("h2xr", g).h_diag == 0)


@pytest.mark.parametrize("kind", FLOWABLE)
def test_xcf_sign_symmetry(kind, rng):
    for _ in range(50):
        g = DiagonalMetric(*rng.uniform(0.1, 10, 3))
        assert np.array_equal(rhs("xcf+", kind, g), -rhs("xcf-", kind, g))


def test_integrate_nil_rf_t1():
    traj = integrate("rf", "nil", DiagonalMetric(1, 1, 1), 1.0)
    np.testing.assert_allclose(traj.coeffs[-1], [NIL_RF_T1[0], NIL_RF_T1[1], NIL_RF_T1[1]], rtol=1e-8)
    assert traj.status == "horizon" and traj.T0 is None


def test_integrate_flat_stays_put():
    traj = integrate("rf", "isome2tilde", DiagonalMetric(1, 1, 1), 10.0)
    np.testing.assert_allclose(traj.coeffs[-1], [1, 1, 1], atol=1e-14)


def test_sol_xcf_blows_up():
    traj = integrate("xcf-", "sol", DiagonalMetric(2, 1, 1), 1e6)
    assert traj.status == "blowup"
    assert np.isfinite(traj.T0) and traj.T0 > traj.t[-1]
    # XCF is invariant under g -> c g, t -> c^2 t
    big = integrate("xcf-", "sol", DiagonalMetric(8, 4, 4), 1e6)
    assert big.T0 == pytest.approx(16 * traj.T0, rel=1e-6)
    assert big.T0 > 1


def test_trajectory_samples(rng):
    traj = integrate("rf", "sl2tilde", DiagonalMetric(1, 2, 1), 50.0)
    assert np.all(np.diff(traj.t) > 0)
    assert np.all(traj.coeffs > 0)
    ts = np.sort(rng.uniform(0, 50, 20))
    dense = traj.at(ts)
    assert dense.shape == (20, 3) and np.all(dense > 0)
    with pytest.raises(OutOfDomainError):
        traj.at([51.0])


def test_closed_form_values():
    np.testing.assert_array_equal(closed_form("nil", "rf", DiagonalMetric(1, 1, 1), 0.0).as_array(), [1, 1, 1])
    g = closed_form("nil", "xcf-", DiagonalMetric(1, 1, 1), 4.0)
    np.testing.assert_allclose(g.as_array(), [NIL_XCF_T4[0], NIL_XCF_T4[1], NIL_XCF_T4[1]], rtol=1e-14)
    g = closed_form("nil", "rf", DiagonalMetric(2, 1, 1), 1.0)
    np.testing.assert_allclose(g.as_array(), [NIL_RF_211_T1[0], NIL_RF_211_T1[1], NIL_RF_211_T1[1]], rtol=1e-14)


def test_closed_form_only_on_nil():
    with pytest.raises(NoClosedFormError):
        closed_form("sol", "rf", DiagonalMetric(1, 1, 1), 1.0)


@pytest.mark.parametrize("flow", ["rf", "xcf-"])
@pytest.mark.parametrize("g0", [(1, 1, 1), (2, 1, 3), (0.5, 4, 0.7)])
def test_closed_form_agreement(flow, g0):
    g0 = DiagonalMetric(*g0)
    traj = integrate(flow, "nil", g0, 100.0)
    ts = np.concatenate([[0.0], np.geomspace(1e-3, 100, 60)])
    num = traj.at(ts)
    exact = np.array([closed_form("nil", flow, g0, t).as_array() for t in ts])
    assert np.max(np.abs(num / exact - 1)) < 1e-6


def test_asymptotic_reference_examples():
    sol = asymptotic_reference("sol", "rf")
    assert sol.term("A").exponent == 0 and sol.term("C").exponent == 0
    assert sol.term("B").exponent == 1 and sol.term("B").coefficient == 4
    assert sol.term("A-C").exponent == -1
    sl2 = asymptotic_reference("sl2tilde", "xcf-", case="b=c")
    assert sl2.term("B").exponent == pytest.approx(1 / 3)
    assert sl2.term("B").coefficient_expr == "(3*A_inf/2)**(1/3)"
    e2 = asymptotic_reference("isome2tilde", "xcf-")
    assert e2.term("C").exponent == pytest.approx(1 / 3)
    assert e2.term("A-B").exponent == pytest.approx(-1 / 6)
    with pytest.raises(ValueError):
        asymptotic_reference("sl2tilde", "xcf-")


def _quantity(coeffs, q):
    idx = {"A": 0, "B": 1, "C": 2}
    if "-" in q:
        a, b = q.split("-")
        return np.abs(coeffs[:, idx[a]] - coeffs[:, idx[b]])
    return coeffs[:, idx[q]]


ASYMPTOTIC_RUNS = [
    ("nil", "rf", None, (1, 1, 1)),
    ("nil", "xcf-", None, (1, 1, 1)),
    ("sol", "rf", None, (2, 1, 1)),
    ("sl2tilde", "rf", None, (1, 2, 1)),
    ("sl2tilde", "xcf-", "b=c", (1, 2, 2)),
    ("isome2tilde", "xcf-", None, (2, 1, 1)),
]


@pytest.mark.parametrize("kind,flow,case,g0", ASYMPTOTIC_RUNS)
def test_asymptotic_exponents(kind, flow, case, g0):
    ref = asymptotic_reference(kind, flow, case)
    assert not ref.singular
    traj = integrate(flow, kind, DiagonalMetric(*g0), 1e6)
    ts = np.geomspace(1e3, 1e6, 40)
    C = traj.at(ts)
    for term in ref.terms:
        if term.model != "power":
            continue
        slope = np.polyfit(np.log(ts), np.log(_quantity(C, term.quantity)), 1)[0]
        assert slope == pytest.approx(term.exponent, abs=0.01), term.quantity


def test_sol_rf_leading_coefficient():
    traj = integrate("rf", "sol", DiagonalMetric(2, 1, 1), 1e6)
    B = traj.at([1e6])[0, 1]
    assert B / 1e6 == pytest.approx(4.0, rel=1e-3)


def test_isome2_rf_limits():
    traj = integrate("rf", "isome2tilde", DiagonalMetric(2, 1, 1), 10.0)
    A, B, C = traj.coeffs[-1]
    assert A == pytest.approx(np.sqrt(2), rel=1e-8)
    assert B == pytest.approx(np.sqrt(2), rel=1e-8)
    assert C == pytest.approx(0.5 * (np.sqrt(2) + np.sqrt(0.5)), rel=1e-8)
