import numpy as np
import pytest

from thurston_flows.errors import UnsupportedFieldError
from thurston_flows.geometry import DiagonalMetric
from thurston_flows.soliton import (
    CERTIFICATES,
    FD_TOL,
    SELF_SIMILAR_TOL,
    AffineField,
    as_affine_field,
    certify,
    lie_derivative,
    sigma,
    sigma_defect,
    verify_soliton_equation,
)

NIL_X = AffineField(np.diag([-1 / 3, -1 / 3, -2 / 3]))


@pytest.mark.parametrize("name", list(CERTIFICATES))
def test_certificates_self_similar(name):
    cert = certify(name)
    assert cert.verified
    assert cert.residual < SELF_SIMILAR_TOL


@pytest.mark.parametrize("name", list(CERTIFICATES))
@pytest.mark.parametrize("method,tol", [("analytic", SELF_SIMILAR_TOL), ("fd", FD_TOL)])
def test_certificates_solve_soliton_equation(name, method, tol):
    cert = certify(name)
    r = verify_soliton_equation(cert.geometry, cert.base_metric, cert.generator(), cert.alpha, cert.flow,
                                method=method)
    assert r < tol


def test_nil_rf_soliton_example():
    r = verify_soliton_equation("nil", DiagonalMetric(1 / 3, 1, 1), NIL_X, 1.0, "rf")
    assert r < 1e-10


def test_nil_unit_coefficient_is_not_a_soliton():
    # with X and alpha fixed, only A = 1/3 balances the equation
    assert verify_soliton_equation("nil", DiagonalMetric(1, 1, 1), NIL_X, 1.0, "rf") > 0.1


def test_flat_steady_soliton():
    r = verify_soliton_equation("isome2tilde", DiagonalMetric(1, 1, 1), np.zeros((3, 3)), 0.0, "rf")
    assert r == 0


def test_sol_rf_soliton():
    cert = CERTIFICATES["sol-rf"]
    X = AffineField(np.diag([-0.5, -0.5, 0.0]))
    assert verify_soliton_equation("sol", cert.base_metric, X, 1.0, "rf") < 1e-10


def test_wrong_flow_fails():
    cert = CERTIFICATES["sol-xcf-limit"]
    assert verify_soliton_equation("sol", cert.base_metric, cert.generator(), cert.alpha, "xcf-") > 1.0


@pytest.mark.parametrize("p", [0, -1])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_sigma_ode(p, alpha):
    assert sigma_defect(alpha, p, "g0") < 1e-12
    assert sigma_defect(alpha, p, "g1") < 1e-12


def test_sigma_forms():
    t = np.linspace(0, 5, 11)
    np.testing.assert_allclose(sigma(t, 0.7, 0, "g0"), 1 + 0.7 * t, rtol=1e-15)
    np.testing.assert_allclose(sigma(t, 0.7, -1, "g0"), np.sqrt(1 + 1.4 * t), rtol=1e-15)


@pytest.mark.parametrize("name", list(CERTIFICATES))
def test_lie_derivative_routes_agree(name, rng):
    cert = CERTIFICATES[name]
    X = cert.generator()
    for _ in range(10):
        p = rng.uniform(-1, 1, 3)
        if cert.geometry.value == "h2xr":
            p[1] = np.exp(p[1])
        a = lie_derivative(cert.geometry, cert.base_metric, X, p, "analytic")
        f = lie_derivative(cert.geometry, cert.base_metric, X, p, "fd")
        np.testing.assert_allclose(f, a, rtol=1e-6, atol=1e-6 * np.abs(a).max())


def test_affine_field_coercion():
    f = as_affine_field(lambda p: np.array([2 * p[0] + 1, -p[2], 0.0]))
    np.testing.assert_allclose(f.M, [[2, 0, 0], [0, 0, -1], [0, 0, 0]])
    np.testing.assert_allclose(f.b, [1, 0, 0])
    assert isinstance(as_affine_field(np.eye(3)), AffineField)
    with pytest.raises(UnsupportedFieldError):
        as_affine_field(lambda p: np.array([p[0] ** 2, 0.0, 0.0]))
    with pytest.raises(UnsupportedFieldError):
        as_affine_field("x d/dx")


def test_certificate_invariant():
    cert = CERTIFICATES["nil-rf"]
    with pytest.raises(ValueError):
        type(cert)(cert.name, cert.geometry, cert.flow, cert.alpha, cert.psi_family, cert.base_name,
                   cert.solution, verified=True, residual=1.0)


def test_certificate_json():
    d = certify("h2xr-rf").to_dict()
    assert d["verified"] is True and d["name"] == "h2xr-rf"
