import numpy as np
import pytest

from thurston_flows.errors import FitDomainError, InsufficientWindowError
from thurston_flows.flow import integrate
from thurston_flows.geometry import DiagonalMetric
from thurston_flows.singularity import (
    AsymptoticFit,
    classify,
    curvature_norm,
    fit_exponential,
    fit_power_law,
    run_and_classify,
)


def test_curvature_norm_examples():
    assert curvature_norm("nil", DiagonalMetric(1, 1, 1)) == 0.75
    assert curvature_norm("isome2tilde", DiagonalMetric(2, 2, 1)) == 0
    assert curvature_norm("sl2tilde", DiagonalMetric(1, 1, 1)) == 1.75


def test_fit_exact_power_law():
    t = np.geomspace(1, 1e3, 50)
    f = fit_power_law(t, 5 * t**2)
    assert f.exponent == pytest.approx(2.0, abs=1e-12)
    assert f.coefficient == pytest.approx(5.0, rel=1e-12)
    assert f.residual < 1e-12


def test_fit_exponential():
    t = np.linspace(0, 5, 40)
    f = fit_exponential(t, 3 * np.exp(-2 * t))
    assert f.exponent == pytest.approx(-2, abs=1e-12)
    assert f.coefficient == pytest.approx(3, rel=1e-12)


def test_fit_errors():
    with pytest.raises(InsufficientWindowError):
        fit_power_law(np.arange(1, 5), np.arange(1, 5))
    with pytest.raises(FitDomainError):
        fit_power_law(np.arange(1, 30), -np.arange(1, 30.0))
    with pytest.raises(ValueError):
        AsymptoticFit(1.0, 1.0, -1.0, (0, 1))


@pytest.mark.parametrize("flow,expected", [("rf", -1.0), ("xcf-", -0.5)])
def test_nil_curvature_decay(flow, expected):
    traj = integrate(flow, "nil", DiagonalMetric(1, 1, 1), 1e6)
    f = fit_power_law(traj.t, traj.curvature_norm_history(), window=(1e4, 1e6))
    assert f.exponent == pytest.approx(expected, abs=0.01)


@pytest.mark.parametrize("kind,flow,g0,expected", [
    ("nil", "rf", (1, 1, 1), "III"),
    ("sol", "xcf-", (2, 1, 1), "I"),
    ("sl2tilde", "xcf-", (1, 2, 2), "IIb"),
    ("isome2tilde", "xcf-", (2, 1, 1), "III"),
])
def test_classify_examples(kind, flow, g0, expected):
    rep = run_and_classify(kind, flow, DiagonalMetric(*g0))
    assert rep.singularity_type == expected
    assert rep.residual < 0.02
    assert (rep.T0 is not None) == (expected in ("I", "IIa"))


def test_scaled_exponent_uses_flow_p():
    # Nil RF: t M(t) is bounded; Nil XCF: t^(1/2) M(t) is bounded
    for flow in ("rf", "xcf-"):
        rep = run_and_classify("nil", flow, DiagonalMetric(1, 1, 1))
        assert rep.p == (0 if flow == "rf" else -1)
        assert abs(rep.exponent) < 0.05


def test_sol_xcf_note():
    rep = run_and_classify("sol", "xcf-", DiagonalMetric(2, 1, 1))
    assert any("IIa" in n for n in rep.notes)


def test_classify_is_deterministic():
    traj = integrate("xcf-", "sl2tilde", DiagonalMetric(1, 2, 1), 10.0)
    assert classify(traj).to_json() == classify(traj).to_json()


def test_report_invariant():
    rep = run_and_classify("nil", "rf", DiagonalMetric(1, 1, 1))
    with pytest.raises(ValueError):
        type(rep)(rep.geometry, rep.flow, "I", rep.p, None, rep.m_history, rep.scaled_fit)


def test_report_json_fields():
    d = run_and_classify("sol", "xcf-", DiagonalMetric(2, 1, 1)).to_dict()
    assert {"geometry", "flow", "type", "p", "T0", "exponent", "residual"} <= set(d)
