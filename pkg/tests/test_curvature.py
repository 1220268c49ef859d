import numpy as np
import pytest

from thurston_flows.curvature import adjugate, curvature_tensors, sectional, sectional_generic
from thurston_flows.geometry import DiagonalMetric, structure_constants

from conftest import FLOWABLE


def test_nil_unit_metric():
    np.testing.assert_allclose(sectional("nil", DiagonalMetric(1, 1, 1)).as_array(), [-0.75, 0.25, 0.25])


def test_nil_scaled_metric():
    np.testing.assert_allclose(sectional("nil", DiagonalMetric(1, 2, 2)).as_array(), [-3 / 16, 1 / 16, 1 / 16])


def test_sl2_unit_metric():
    np.testing.assert_allclose(sectional("sl2tilde", DiagonalMetric(1, 1, 1)).as_array(), [-1.75, 0.25, 0.25])


def test_isome2_flat_when_a_equals_b():
    for c in (0.3, 1.0, 7.0):
        assert np.all(sectional("isome2tilde", DiagonalMetric(2.5, 2.5, c)).as_array() == 0)


def test_generic_route_nil():
    k = sectional_generic(structure_constants("nil"), DiagonalMetric(1, 1, 1)).as_array()
    np.testing.assert_allclose(k, [-0.75, 0.25, 0.25], atol=1e-15)


def test_generic_route_sol_k31():
    # (A + C)^2 / (4 A B C) with A = C equals 1 / B
    for A, B in [(2.0, 3.0), (0.4, 1.7)]:
        k = sectional_generic(structure_constants("sol"), DiagonalMetric(A, B, A))
        assert k.K31 == pytest.approx(1 / B, rel=1e-14)


def test_generic_route_flat():
    k = sectional_generic(structure_constants("isome2tilde"), DiagonalMetric(1, 1, 1)).as_array()
    np.testing.assert_allclose(k, 0, atol=1e-15)


def test_nil_tensors():
    ct = curvature_tensors("nil", DiagonalMetric(1, 1, 1))
    np.testing.assert_allclose(ct.h_diag, [1 / 16, -3 / 16, -3 / 16], atol=1e-15)
    np.testing.assert_allclose(ct.ricci_diag, [0.5, -0.5, -0.5], atol=1e-15)
    assert ct.scalar == pytest.approx(-0.5)
    np.testing.assert_allclose(ct.p_diag, [-0.75, 0.25, 0.25])


def test_flat_tensors():
    ct = curvature_tensors("isome2tilde", DiagonalMetric(3, 3, 1))
    assert np.all(ct.h_diag == 0) and np.all(ct.ricci_diag == 0)


def test_h2xr_product_metric():
    # H2 of curvature -1/2 times a line
    ct = curvature_tensors("h2xr", DiagonalMetric(1, 2, 2))
    np.testing.assert_allclose(ct.p_diag, [-0.5, 0, 0], atol=1e-15)
    np.testing.assert_allclose(ct.ricci_diag, [0, -1, -1], atol=1e-15)


def test_adjugate_matches_inverse(rng):
    for _ in range(20):
        M = rng.normal(size=(3, 3))
        np.testing.assert_allclose(adjugate(M), np.linalg.det(M) * np.linalg.inv(M), atol=1e-12)


@pytest.mark.parametrize("kind", FLOWABLE)
def test_oracle_agreement(kind, rng):
    sc = structure_constants(kind)
    for _ in range(2500):
        g = DiagonalMetric(*rng.uniform(0.1, 10, 3))
        np.testing.assert_allclose(sectional(kind, g).as_array(), sectional_generic(sc, g).as_array(),
                                   rtol=0, atol=1e-10)


@pytest.mark.parametrize("kind", FLOWABLE)
def test_h_scaling(kind, rng):
    for _ in range(500):
        g = DiagonalMetric(*rng.uniform(0.1, 10, 3))
        c = rng.uniform(0.1, 10)
        h1, h2 = curvature_tensors(kind, g).h_diag, curvature_tensors(kind, g.scaled(c)).h_diag
        np.testing.assert_allclose(h2, h1 / c, rtol=1e-10, atol=1e-300)


@pytest.mark.parametrize("kind", FLOWABLE)
def test_ricci_frame_components_scale_invariant(kind, rng):
    for _ in range(200):
        g = DiagonalMetric(*rng.uniform(0.1, 10, 3))
        c = rng.uniform(0.1, 10)
        np.testing.assert_allclose(curvature_tensors(kind, g.scaled(c)).ricci_diag,
                                   curvature_tensors(kind, g).ricci_diag, rtol=1e-10, atol=1e-13)


@pytest.mark.parametrize("kind", FLOWABLE)
def test_h_product_identity(kind, rng):
    for _ in range(500):
        g = DiagonalMetric(*rng.uniform(0.1, 10, 3))
        ct = curvature_tensors(kind, g)
        K23, K31, K12 = ct.p_diag
        if min(abs(K23), abs(K31), abs(K12)) <= 1e-8:
            continue
        prod = np.array([g.A * K12 * K31, g.B * K12 * K23, g.C * K23 * K31])
        np.testing.assert_allclose(ct.h_diag, prod, rtol=1e-12)
