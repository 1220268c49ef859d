import math

import numpy as np
import pytest

from thurston_flows.errors import InvalidMatrixError, InvalidPointError
from thurston_flows.groups import (
    STANDARD_LATTICES,
    CollapseReport,
    GroupElement,
    Lattice,
    act,
    collapse_analysis,
    compose,
    conjugated_action,
    identity,
    inverse,
    limit_action,
    limit_setup,
    min_displacement,
    mu3_lift,
    phi_chart,
    phi_chart_inverse,
    standard_lattice,
)

from conftest import FLOWABLE, random_point


def test_nil_action():
    np.testing.assert_array_equal(act("nil", (1, 0, 0), (0, 2, 0)), [1, 2, 2])


def test_sol_action():
    np.testing.assert_allclose(act("sol", (0, 0, 1), (1, 1, 0)), [1 / math.e, math.e, 1], rtol=1e-15)


@pytest.mark.parametrize("kind", FLOWABLE)
def test_identity_fixes_points(kind, rng):
    e = identity(kind)
    for _ in range(20):
        p = random_point(kind, rng)
        np.testing.assert_allclose(act(kind, e, p), p, rtol=0, atol=1e-15)


def test_sl2_element_needs_positive_b():
    with pytest.raises(ValueError):
        GroupElement("sl2tilde", (0.0, -1.0, 0.0))
    with pytest.raises(InvalidPointError):
        mu3_lift(0.0, 0.0, -1.0, 0.0)


def test_mu3_identity_normalization():
    for th in (-40.0, -1.0, 0.0, 0.3, 7.5, 123.0):
        assert mu3_lift(0.0, 0.0, 1.0, th) == th


def test_mu3_equivariance_samples(rng):
    for _ in range(1000):
        tau, th = rng.uniform(-30, 30, 2)
        x, y = rng.uniform(-3, 3), math.exp(rng.uniform(-2, 2))
        lhs = mu3_lift(tau + 2 * math.pi, x, y, th)
        rhs = mu3_lift(tau, x, y, th) + 2 * math.pi
        # the shift is exact in exact arithmetic; tau + 2 pi itself is rounded
        assert abs(lhs - rhs) <= 64 * np.spacing(max(abs(lhs), 2 * math.pi)) * (1 + y)


def test_mu3_continuous_in_tau():
    taus = np.linspace(-20, 20, 200001)
    mu = mu3_lift(taus, 0.7, 0.3, 0.0)
    # smooth steps are at most ~5 * 2e-4; a branch jump would be 2 pi
    assert np.max(np.abs(np.diff(mu))) < 1e-2
    assert np.all(np.diff(mu) > 0)


def test_phi_chart_examples():
    x, y, th = phi_chart(np.eye(2))
    assert (x, y, th) == (0.0, 1.0, 0.0)
    for y0 in (0.25, 1.0, 9.0):
        x, y, th = phi_chart(np.diag([math.sqrt(y0), 1 / math.sqrt(y0)]))
        assert x == pytest.approx(0, abs=1e-15) and y == pytest.approx(y0) and th == pytest.approx(0, abs=1e-15)
    with pytest.raises(InvalidMatrixError):
        phi_chart(np.diag([2.0, 1.0]))


def test_phi_chart_round_trip(rng):
    for _ in range(10000):
        x, y, th = rng.uniform(-3, 3), math.exp(rng.uniform(-2, 2)), rng.uniform(0, 2 * math.pi)
        X, Y, T = phi_chart(phi_chart_inverse(x, y, th))
        assert X == pytest.approx(x, abs=1e-12) and Y == pytest.approx(y, rel=1e-12)
        assert abs((T - th + math.pi) % (2 * math.pi) - math.pi) < 1e-12


def test_phi_chart_sign_ambiguity(rng):
    M = phi_chart_inverse(0.4, 1.3, 2.0)
    np.testing.assert_allclose(phi_chart(-M)[:2], phi_chart(M)[:2])


@pytest.mark.parametrize("kind", FLOWABLE)
def test_inverse_and_compose(kind, rng):
    from conftest import random_element

    for _ in range(200):
        g = random_element(kind, rng)
        e = compose(kind, inverse(kind, g), g).as_array()
        np.testing.assert_allclose(e, identity(kind).as_array(), atol=1e-12)


def test_nil_conjugation_example():
    sc = limit_setup("nil", "rf")[0]
    for s in (1e3, 1e6, 1e9):
        p = np.array([0.1, 0.2, 0.3])
        q = conjugated_action("nil", "rf", sc, (s ** (1 / 3), 0, 0), s, p)
        np.testing.assert_allclose(q, [1.1, 0.2, 0.3 + 0.2], rtol=1e-12)


def test_sol_conjugation_example(rng):
    sc = limit_setup("sol", "rf")[0]
    a, b, c = 1.3, -0.4, 0.7
    for s in (1e2, 1e4):
        p = rng.uniform(-1, 1, 3)
        q = conjugated_action("sol", "rf", sc, (a, b, c), s, p)
        expect = [math.exp(-c) * p[0] + a / math.sqrt(s), math.exp(c) * p[1] + b / math.sqrt(s), p[2] + c]
        np.testing.assert_allclose(q, expect, rtol=1e-12)


@pytest.mark.parametrize("kind,flow,case", [("nil", "rf", None), ("sl2tilde", "xcf-", "b!=c"),
                                            ("isome2tilde", "xcf-", None)])
def test_identity_conjugates_to_identity(kind, flow, case, rng):
    sc = limit_setup(kind, flow, case)[0]
    for s in (1e-3, 1.0, 1e3):
        p = random_point("sl2tilde" if kind == "sl2tilde" and case != "b!=c" else "nil", rng)
        if kind == "sl2tilde":
            p[1] = abs(p[1]) + 0.5
        np.testing.assert_allclose(conjugated_action(kind, flow, sc, identity(kind), s, p), p, atol=1e-12)


def test_limit_action_nil_floor_schedule():
    u, v, w = 0.37, -0.81, 1.3
    r = limit_action("nil", "rf",
                     lambda s: (math.floor(u * s ** (1 / 3)), math.floor(v * s ** (1 / 3)), math.floor(w * s ** (2 / 3))),
                     10.0 ** np.arange(3, 16))
    assert r.converged and not r.diverged
    assert r.parameters["u"] == pytest.approx(u, abs=1e-4)
    assert r.parameters["v"] == pytest.approx(v, abs=1e-4)


def test_limit_action_sol_xcf():
    r = limit_action("sol", "xcf-", lambda s: (1.0, 2.0, 0.5), 10.0 ** -np.arange(1, 10))
    assert r.diverged and not r.converged
    r = limit_action("sol", "xcf-", lambda s: (0.0, 0.0, 0.5), 10.0 ** -np.arange(1, 10))
    assert r.converged and r.parameters["c"] == pytest.approx(0.5, abs=1e-9)


def test_limit_action_sl2_case2():
    u, v, d = 0.3, -0.2, 0.4
    r = limit_action("sl2tilde", "xcf-",
                     lambda s: (math.exp(d) * math.sqrt(s) * (u + v), math.exp(d), 2 * u * math.sqrt(s)),
                     10.0 ** -np.arange(1, 14), case="b!=c")
    assert r.converged
    assert r.family == "gamma_uvd"
    for k, val in {"u": u, "v": v, "d": d}.items():
        assert r.parameters[k] == pytest.approx(val, abs=1e-6)


def test_sl2_xcf_needs_case():
    with pytest.raises(ValueError):
        limit_setup("sl2tilde", "xcf-")


@pytest.mark.parametrize("kind", FLOWABLE)
def test_standard_lattices_are_discrete(kind):
    lat = standard_lattice(kind)
    assert min_displacement(lat) > 1e-3
    assert STANDARD_LATTICES[lat.kind].name == lat.name


def test_sl2_lattice_is_marked_illustrative():
    assert standard_lattice("sl2tilde").illustrative


def test_lattice_json_round_trip():
    lat = standard_lattice("sol")
    back = Lattice.from_json("sol", lat.to_json())
    for a, b in zip(lat.generators, back.generators):
        np.testing.assert_array_equal(a.as_array(), b.as_array())


@pytest.mark.parametrize("kind,flow,case,entries", [
    ("nil", "rf", None, ("Yes (0)", "Yes")),
    ("sol", "xcf-", None, ("No", "No")),
    ("sl2tilde", "rf", None, ("Yes (2)", "Yes")),
])
def test_collapse_examples(kind, flow, case, entries):
    rep = collapse_analysis(kind, flow, case=case)
    assert rep.table_entries() == entries
    assert rep.collapses == (rep.orbit_space_dimension < 3)


def test_collapse_report_invariant():
    with pytest.raises(ValueError):
        CollapseReport("nil", "rf", None, True, 3, True, "gamma_uvw", 0, [])
