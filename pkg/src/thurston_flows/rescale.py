"""
Rescaled solutions, pullbacks through coordinate scalings, and numeric limits.

A rescaling family turns a solution ``g`` into ``g_s(t) = f(s) g(tau_s(t))``
with ``f(s) = s^q``. Forward families (immortal solutions, ``s -> inf``) use
``tau_s(t) = (t - 1) / f(s)^(1-p) + s``; backward families (finite ``T0``,
``s -> 0``) use ``T0 - tau_s(t)``. With the default ``q = -1/(1-p)`` these
reduce to ``s^q g(s t)`` and ``s^q g(T0 - s t)``.

Limits are taken in coordinates: ``g_s`` is expanded into its chart matrix,
pulled back through ``phi_s`` (a per-coordinate power scaling, optionally
preceded by a fixed normalizing map ``psi``), and the resulting matrices are
tracked over a schedule of ``s``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.optimize import least_squares

from .errors import DivergedError, OutOfDomainError
from .flow import FlowKind, IntegratorConfig, Trajectory, integrate
from .geometry import (
    DiagonalMetric,
    GeometryKind,
    check_point,
    coordinate_metric,
    euclidean_metric,
    h2xr_metric,
    sol_limit_metric,
)

__all__ = [
    "Direction",
    "RescalingFamily",
    "PostMap",
    "CoordinateScaling",
    "LimitReference",
    "LimitComparison",
    "LimitCase",
    "rescaled_metric",
    "pullback",
    "pulled_back_rescaled",
    "limit_metric",
    "nil_rf_normalizer",
    "nil_xcf_normalizer",
    "sl2_sol_map",
    "REFERENCES",
    "LIMIT_CASES",
    "run_limit_case",
    "sample_points",
]


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class RescalingFamily:
    """``g_s(t) = s^q g(tau_s(t))``.

    Parameters
    ----------
    direction : Direction
    p : int
        Scaling exponent of the flow (0 for Ricci flow, -1 for XCF).
    q : float, optional
        Exponent of ``f(s) = s^q``; defaults to ``-1/(1-p)``.
    T0 : float, optional
        Singular time; required for backward families.
    """

    direction: Direction
    p: int
    q: float | None = None
    T0: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        if self.q is None:
            object.__setattr__(self, "q", -1.0 / (1 - self.p))
        if self.direction is Direction.BACKWARD and (self.T0 is None or not math.isfinite(self.T0)):
            raise ValueError("a backward family needs a finite T0")

    @classmethod
    def forward(cls, flow, q=None):
        return cls(Direction.FORWARD, FlowKind.parse(flow).p, q)

    @classmethod
    def backward(cls, flow, T0, q=None):
        return cls(Direction.BACKWARD, FlowKind.parse(flow).p, q, T0)

    def f(self, s: float) -> float:
        return s ** self.q

    def mapped_time(self, s: float, t: float) -> float:
        if not s > 0:
            raise ValueError("s must be positive")
        u = (t - 1.0) / self.f(s) ** (1 - self.p) + s
        return u if self.direction is Direction.FORWARD else self.T0 - u

    def to_dict(self) -> dict:
        return {"direction": self.direction.value, "p": self.p, "q": self.q, "T0": self.T0}


def rescaled_metric(solution, family: RescalingFamily, s: float, t: float) -> DiagonalMetric:
    """Frame coefficients of ``g_s(t) = f(s) g(tau_s(t))``.

    Parameters
    ----------
    solution : Trajectory or callable
        A trajectory (dense output is used) or a function ``t -> DiagonalMetric``.

    Raises
    ------
    OutOfDomainError
        If the mapped time is outside the solution's interval.
    """
    u = family.mapped_time(s, t)
    if isinstance(solution, Trajectory):
        if not (solution.t[0] <= u <= solution.t[-1]):
            raise OutOfDomainError(
                f"s={s:.3g}, t={t:.3g} maps to time {u!r} outside [{solution.t[0]}, {solution.t[-1]}]"
            )
        g = solution.at([u])[0]
    else:
        if u < 0:
            raise OutOfDomainError(f"s={s:.3g}, t={t:.3g} maps to negative time {u!r}")
        g = solution(u).as_array()
    return DiagonalMetric.from_array(family.f(s) * np.asarray(g, dtype=float))


# -- coordinate maps -----------------------------------------------------------


@dataclass(frozen=True)
class PostMap:
    """A fixed diffeomorphism ``psi`` with its Jacobian and inverse."""

    name: str
    forward: Callable
    jacobian: Callable
    inverse: Callable

    def __call__(self, p):
        return self.forward(np.asarray(p, dtype=float))


def _diagonal_map(name, factors) -> PostMap:
    k = np.asarray(factors, dtype=float)
    return PostMap(name, lambda p: k * p, lambda p: np.diag(k), lambda q: np.asarray(q, dtype=float) / k)


def nil_rf_normalizer(g0: DiagonalMetric) -> PostMap:
    """Linear map sending the Nil Ricci-flow limit to the unit soliton."""
    A0, B0, C0 = g0
    k = 3.0 * A0 / (B0 * C0)
    return _diagonal_map(
        "nil-rf-normalizer",
        (C0**-0.5 * k ** (-1 / 6), B0**-0.5 * k ** (-1 / 6), (B0 * C0) ** -0.5 * k ** (-1 / 3)),
    )


def nil_xcf_normalizer(g0: DiagonalMetric) -> PostMap:
    """Linear map sending the Nil XCF limit to the unit XC soliton."""
    A0, B0, C0 = g0
    k = 7.0 * (A0 / (2.0 * B0 * C0)) ** 2
    return _diagonal_map(
        "nil-xcf-normalizer",
        (C0**-0.5 * k ** (-3 / 28), B0**-0.5 * k ** (-3 / 28), (B0 * C0) ** -0.5 * k ** (-3 / 14)),
    )


def _sl2_sol_forward(p):
    x, y, th = p
    ey = math.exp(y)
    return np.array([ey * x, ey, th + x])


def _sl2_sol_jacobian(p):
    x, y, _ = p
    ey = math.exp(y)
    return np.array([[ey, ey * x, 0.0], [0.0, ey, 0.0], [1.0, 0.0, 1.0]])


def _sl2_sol_inverse(q):
    x, y, th = q
    if y <= 0:
        raise OutOfDomainError("the inverse needs y > 0")
    return np.array([x / y, math.log(y), th - x / y])


def sl2_sol_map() -> PostMap:
    """``(x, y, theta) -> (e^y x, e^y, theta + x)``, from Sol-type to SL2 coordinates."""
    return PostMap("sl2-sol", _sl2_sol_forward, _sl2_sol_jacobian, _sl2_sol_inverse)


@dataclass(frozen=True)
class CoordinateScaling:
    """``phi_s(p) = (s^e1 p1, s^e2 p2, s^e3 p3)``, applied after ``post_map``.

    The full point map is ``phi_s o psi``, so pulling back by it equals
    pulling back by ``phi_s`` and then by ``psi``.
    """

    exponents: tuple
    post_map: PostMap | None = None

    def __post_init__(self):
        e = tuple(float(v) for v in self.exponents)
        if len(e) != 3:
            raise ValueError("three exponents are required")
        object.__setattr__(self, "exponents", e)

    def factors(self, s: float) -> np.ndarray:
        return np.array([s**e for e in self.exponents])

    def apply(self, s: float, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.post_map is not None:
            p = self.post_map(p)
        return self.factors(s) * p

    def jacobian(self, s: float, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        J = np.diag(self.factors(s))
        if self.post_map is not None:
            J = J @ self.post_map.jacobian(p)
        return J

    def inverse(self, s: float, q) -> np.ndarray:
        p = np.asarray(q, dtype=float) / self.factors(s)
        if self.post_map is not None:
            p = self.post_map.inverse(p)
        return p

    def to_dict(self) -> dict:
        return {"exponents": list(self.exponents),
                "post_map": None if self.post_map is None else self.post_map.name}


def pullback(metric_fn, scaling: CoordinateScaling, s: float, point) -> np.ndarray:
    """``(phi_s^* g)(p) = J^T g(phi_s(p)) J``.

    Parameters
    ----------
    metric_fn : callable
        ``q -> 3x3`` chart matrix.
    """
    J = scaling.jacobian(s, point)
    G = J.T @ metric_fn(scaling.apply(s, point)) @ J
    return 0.5 * (G + G.T)


def pulled_back_rescaled(kind, solution, family, scaling, s, t, point) -> np.ndarray:
    """``phi_s^* g_s(t)`` at ``point`` as a chart matrix."""
    g = rescaled_metric(solution, family, s, t)
    return pullback(lambda q: coordinate_metric(kind, g, q), scaling, s, point)


# -- reference limit metrics ---------------------------------------------------


def _forms_metric(coeffs, rows):
    G = sum(c * np.outer(r, r) for c, r in zip(coeffs, rows))
    return 0.5 * (G + G.T)


def _nil_rf_limit(p, t, c, g0):
    A0, B0, C0 = g0
    u = 3.0 * A0 / (B0 * C0) * t
    return coordinate_metric("nil", DiagonalMetric(A0 * u ** (-1 / 3), B0 * u ** (1 / 3), C0 * u ** (1 / 3)), p)


def _nil_soliton(p, t, c, g0):
    return coordinate_metric("nil", DiagonalMetric(t ** (-1 / 3) / 3.0, t ** (1 / 3), t ** (1 / 3)), p)


def _nil_xcf_limit(p, t, c, g0):
    A0, B0, C0 = g0
    u = 7.0 * (A0 / (2.0 * B0 * C0)) ** 2 * t
    return coordinate_metric("nil", DiagonalMetric(A0 * u ** (-1 / 14), B0 * u ** (3 / 14), C0 * u ** (3 / 14)), p)


def _nil_xc_soliton(p, t, c, g0):
    return coordinate_metric("nil", DiagonalMetric(2 / math.sqrt(7) * t ** (-1 / 14), t ** (3 / 14),
                                                   t ** (3 / 14)), p)


def _sl2_xcf_limit(p, t, c, g0):
    x, y, th = check_point("sl2tilde", p)
    E = c["E"]
    rows = ([-1 / y, 0.0, 1.0], [1 / y, -th / y, 0.0], [0.0, 1 / y, 0.0])
    return _forms_metric((E * t**-0.5, E * t**-0.5, 2 * t**0.5), [np.array(r) for r in rows])


def _sol_xc_soliton(p, t, c, g0):
    x, y, th = np.asarray(p, dtype=float)
    E = c["E"]
    rows = ([0.0, -x, 1.0], [1.0, -th, 0.0], [0.0, 1.0, 0.0])
    return _forms_metric((E * t**-0.5, E * t**-0.5, 2 * t**0.5), [np.array(r) for r in rows])


@dataclass(frozen=True)
class LimitReference:
    """A named limit metric with free constants fitted by least squares.

    ``metric(p, t, consts, g0)`` returns a chart matrix. ``predict(g0, traj)``
    gives independent predictions of the constants where they are known
    (closed forms in ``g0`` or a coefficient's limit along the trajectory).
    """

    name: str
    chart: GeometryKind
    constants: tuple
    metric: Callable
    formula: str
    guess: Callable = None
    predict: Callable = None


def _final(i):
    return lambda g0, traj: traj.coeffs[-1, i]


REFERENCES = {
    r.name: r
    for r in [
        LimitReference("nil-rf-limit", GeometryKind.NIL, (), _nil_rf_limit,
                       "A0 u^(-1/3) (dz - x dy)^2 + B0 u^(1/3) dy^2 + C0 u^(1/3) dx^2, u = 3 A0 t/(B0 C0)"),
        LimitReference("nil-soliton", GeometryKind.NIL, (), _nil_soliton,
                       "(1/3) t^(-1/3) (dz - x dy)^2 + t^(1/3) (dy^2 + dx^2)"),
        LimitReference("nil-xcf-limit", GeometryKind.NIL, (), _nil_xcf_limit,
                       "A0 u^(-1/14) (dz - x dy)^2 + B0 u^(3/14) dy^2 + C0 u^(3/14) dx^2, u = 7 R0^2 t"),
        LimitReference("nil-xc-soliton", GeometryKind.NIL, (), _nil_xc_soliton,
                       "(2/sqrt 7) t^(-1/14) (dz - x dy)^2 + t^(3/14) (dy^2 + dx^2)"),
        LimitReference("sol-rf-limit", GeometryKind.SOL_LIMIT, ("a",),
                       lambda p, t, c, g0: sol_limit_metric(p, c["a"], 4 * t),
                       "a (e^(2z) dx^2 + e^(-2z) dy^2) + 4 t dz^2",
                       guess=lambda g0, traj: {"a": 2 * math.sqrt(g0.A * g0.C)},
                       predict=lambda g0, traj: {"a": 2 * math.sqrt(g0.A * g0.C)}),
        LimitReference("sol-xcf-limit", GeometryKind.SOL_LIMIT, ("a",),
                       lambda p, t, c, g0: sol_limit_metric(p, c["a"] * t**-0.5, 2 * t**0.5),
                       "a t^(-1/2) (e^(2z) dx^2 + e^(-2z) dy^2) + 2 t^(1/2) dz^2",
                       guess=lambda g0, traj: {"a": 1.0}),
        LimitReference("h2xr", GeometryKind.H2XR, ("a",),
                       lambda p, t, c, g0: h2xr_metric(p, c["a"], 2 * t),
                       "a dtheta^2 + (2 t / y^2)(dx^2 + dy^2)",
                       guess=lambda g0, traj: {"a": 1.0},
                       predict=lambda g0, traj: {"a": traj.coeffs[-1, 0]}),
        LimitReference("h2xr-xcf", GeometryKind.H2XR, ("a",),
                       lambda p, t, c, g0: h2xr_metric(p, c["a"], (1.5 * c["a"]) ** (1 / 3)),
                       "a dtheta^2 + (3a/2)^(1/3) y^-2 (dx^2 + dy^2)",
                       guess=lambda g0, traj: {"a": 1.0},
                       predict=lambda g0, traj: {"a": traj.coeffs[-1, 0]}),
        LimitReference("sl2-xcf-limit", GeometryKind.SL2TILDE, ("E",), _sl2_xcf_limit,
                       "E t^(-1/2) (dtheta - dx/y)^2 + E t^(-1/2) (dx/y - theta dy/y)^2 + 2 t^(1/2) (dy/y)^2",
                       guess=lambda g0, traj: {"E": 1.0}),
        LimitReference("sol-xc-soliton", GeometryKind.SOL_LIMIT, ("E",), _sol_xc_soliton,
                       "E t^(-1/2) (dtheta - x dy)^2 + E t^(-1/2) (dx - theta dy)^2 + 2 t^(1/2) dy^2",
                       guess=lambda g0, traj: {"E": 1.0}),
        LimitReference("e3-rf", GeometryKind.EUCLIDEAN3, ("e1", "e2"),
                       lambda p, t, c, g0: euclidean_metric(p, c["e1"], c["e2"]),
                       "e1 (dx^2 + dy^2) + e2 dtheta^2",
                       guess=lambda g0, traj: {"e1": 1.0, "e2": 1.0},
                       predict=lambda g0, traj: {
                           "e1": math.sqrt(g0.A * g0.B),
                           "e2": g0.C / 2 * (math.sqrt(g0.A / g0.B) + math.sqrt(g0.B / g0.A))}),
        LimitReference("e3-xcf", GeometryKind.EUCLIDEAN3, ("e1", "k"),
                       lambda p, t, c, g0: euclidean_metric(p, c["e1"], c["k"] * t ** (1 / 3)),
                       "e1 (dx^2 + dy^2) + k t^(1/3) dtheta^2",
                       guess=lambda g0, traj: {"e1": 1.0, "k": 1.0}),
    ]
}


# -- limits --------------------------------------------------------------------


@dataclass
class LimitComparison:
    """Outcome of :func:`limit_metric`.

    ``differences[k]`` is the sup-norm change of the sampled matrices between
    ``s_schedule[k]`` and ``s_schedule[k+1]``; ``sup_error`` compares the
    last sample with the fitted reference.
    """

    geometry: GeometryKind
    flow: FlowKind
    reference: str
    sample_points: np.ndarray
    sample_times: tuple
    s_schedule: tuple
    scaling: CoordinateScaling
    fitted_constants: dict
    predicted_constants: dict
    differences: np.ndarray
    cauchy: bool
    sup_error: float
    tol: float
    converged: bool
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.converged and not self.sup_error < self.tol:
            raise ValueError("converged comparisons must have sup_error below tol")

    @property
    def final_difference(self) -> float:
        return float(self.differences[-1])

    def to_dict(self) -> dict:
        return {
            "geometry": self.geometry.value,
            "flow": self.flow.value,
            "scaling_exponents": list(self.scaling.exponents),
            "post_map": None if self.scaling.post_map is None else self.scaling.post_map.name,
            "reference_name": self.reference,
            "fitted_constants": {k: float(v) for k, v in self.fitted_constants.items()},
            "predicted_constants": {k: float(v) for k, v in self.predicted_constants.items()},
            "s_schedule": [float(s) for s in self.s_schedule],
            "differences": [float(d) for d in self.differences],
            "final_difference": self.final_difference,
            "cauchy": bool(self.cauchy),
            "sup_error": float(self.sup_error),
            "tol": self.tol,
            "converged": bool(self.converged),
            "notes": list(self.notes),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _check_schedule(family: RescalingFamily, s_schedule):
    s = np.asarray(s_schedule, dtype=float)
    if len(s) < 2 or np.any(s <= 0):
        raise ValueError("s_schedule needs at least two positive values")
    step = np.diff(np.log10(s))
    toward = step > 0 if family.direction is Direction.FORWARD else step < 0
    if not np.all(toward):
        raise ValueError("s_schedule must move monotonically toward the limit")
    if abs(np.log10(s[-1] / s[0])) < 4:
        raise ValueError("s_schedule must span at least four decades")
    return s


def _fit_reference(ref: LimitReference, G, points, times, g0, traj):
    consts = dict(ref.guess(g0, traj)) if ref.guess else {}

    def model(c):
        d = dict(zip(ref.constants, c))
        return np.array([[ref.metric(p, t, d, g0) for p in points] for t in times])

    if ref.constants:
        x0 = np.array([consts[k] for k in ref.constants], dtype=float)
        sol = least_squares(lambda c: (model(c) - G).ravel(), x0, x_scale="jac",
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        consts = dict(zip(ref.constants, (float(v) for v in sol.x)))
    R = model([consts[k] for k in ref.constants])
    return consts, R


def limit_metric(kind, flow, solution, family: RescalingFamily, scaling: CoordinateScaling,
                 reference, points, times, s_schedule, tol: float = 1e-6, g0=None,
                 noise_floor: float = 1e-10, strict: bool = False) -> LimitComparison:
    """Track ``phi_s^* g_s(t)`` along ``s_schedule`` and compare with a reference.

    The sequence passes the Cauchy test when the successive sup-differences
    decrease monotonically and the last one is below ``tol``. Differences
    below ``noise_floor`` times the size of the matrices count as converged
    rounding noise and are exempt from the monotonicity requirement.

    Parameters
    ----------
    reference : str or LimitReference
    points : array_like, shape (n, 3)
    times : sequence of float
    s_schedule : sequence of float
        Increasing for forward families, decreasing for backward ones, and
        spanning at least four decades.
    g0 : DiagonalMetric, optional
        Initial data for references that depend on it; defaults to the
        trajectory's first sample.
    strict : bool
        Raise :class:`DivergedError` instead of returning an unconverged result.
    """
    kind = GeometryKind.parse(kind)
    flow = FlowKind.parse(flow)
    ref = REFERENCES[reference] if isinstance(reference, str) else reference
    s_arr = _check_schedule(family, s_schedule)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    times = tuple(float(t) for t in times)
    traj = solution if isinstance(solution, Trajectory) else None
    if g0 is None and traj is not None:
        g0 = traj.g0

    def sample(s):
        return np.array([[pulled_back_rescaled(kind, solution, family, scaling, s, t, p) for p in points]
                         for t in times])

    Gs = [sample(s) for s in s_arr]
    diffs = np.array([np.abs(b - a).max() for a, b in zip(Gs[:-1], Gs[1:])])
    scale = max(1.0, float(np.abs(Gs[-1]).max()))
    floor = noise_floor * scale
    above = diffs[diffs > floor]
    monotone = bool(np.all(np.diff(above) < 0)) if len(above) > 1 else True
    cauchy = monotone and diffs[-1] < tol
    notes = []
    if not monotone:
        notes.append("successive differences do not decrease monotonically")
    if diffs[-1] >= tol:
        notes.append(f"final difference {diffs[-1]:.3g} is not below {tol:g}")
    consts, R = _fit_reference(ref, Gs[-1], points, times, g0, traj)
    sup_error = float(np.abs(Gs[-1] - R).max())
    if sup_error >= tol:
        notes.append(f"distance to the fitted reference {sup_error:.3g} is not below {tol:g}")
    predicted = ref.predict(g0, traj) if ref.predict and traj is not None else {}
    result = LimitComparison(
        kind, flow, ref.name, points, times, tuple(float(s) for s in s_arr), scaling, consts, predicted,
        diffs, cauchy, sup_error, tol, bool(cauchy and sup_error < tol), notes,
    )
    if strict and not result.converged:
        raise DivergedError("limit did not converge: " + "; ".join(notes), diagnostics=result.to_dict())
    return result


# -- the standard limit computations -------------------------------------------


def sample_points(kind, n: int, seed: int = 42, half_width: float = 1.0) -> np.ndarray:
    """Seeded random chart points in a box around the chart's base point."""
    kind = GeometryKind.parse(kind)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-half_width, half_width, size=(n, 3))
    if kind in (GeometryKind.SL2TILDE, GeometryKind.H2XR):
        pts[:, 1] = np.exp(pts[:, 1] * math.log(2.0))  # y in [1/2, 2]
    return pts


@dataclass(frozen=True)
class LimitCase:
    """One of the standard rescaled-limit computations.

    ``s_schedule`` is ``(first exponent, last exponent, step)`` in powers of
    ten; ``post_map`` builds the fixed normalizing map from ``g0``.

    Backward cases sample ``g`` at ``T0 - s t``, so at the smallest ``s`` the
    sample times sit a few thousand ulps below ``T0``; initial data with a
    small ``T0`` keeps that spacing as fine as possible.
    """

    name: str
    kind: GeometryKind
    flow: FlowKind
    g0: tuple
    direction: Direction
    exponents: tuple
    reference: str
    s_schedule: tuple
    q: float | None = None
    post_map: Callable | None = None
    times: tuple = (0.5, 1.0, 2.0)

    def schedule(self) -> np.ndarray:
        a, b, step = self.s_schedule
        return 10.0 ** np.arange(a, b + (step / 2 if step > 0 else step / 2), step)

    def family(self, T0=None) -> RescalingFamily:
        return RescalingFamily(self.direction, self.flow.p, self.q, T0)

    def scaling(self) -> CoordinateScaling:
        pm = self.post_map(DiagonalMetric(*self.g0)) if self.post_map else None
        return CoordinateScaling(self.exponents, pm)


def _case(name, kind, flow, g0, direction, exponents, reference, sched, **kw):
    return LimitCase(name, GeometryKind(kind), FlowKind(flow), g0, Direction(direction), exponents,
                     reference, sched, **kw)


LIMIT_CASES = {
    c.name: c
    for c in [
        _case("nil-rf", "nil", "rf", (1.0, 1.0, 1.0), "forward", (1 / 3, 1 / 3, 2 / 3), "nil-rf-limit", (1, 8, 1)),
        _case("nil-rf-soliton", "nil", "rf", (2.0, 1.0, 3.0), "forward", (1 / 3, 1 / 3, 2 / 3), "nil-soliton",
              (1, 8, 1), post_map=nil_rf_normalizer),
        _case("nil-xcf", "nil", "xcf-", (1.0, 1.0, 1.0), "forward", (1 / 7, 1 / 7, 2 / 7), "nil-xcf-limit",
              (1, 8, 1)),
        _case("nil-xcf-soliton", "nil", "xcf-", (2.0, 1.0, 3.0), "forward", (1 / 7, 1 / 7, 2 / 7),
              "nil-xc-soliton", (1, 8, 1), post_map=nil_xcf_normalizer),
        _case("sol-rf", "sol", "rf", (2.0, 1.0, 1.0), "forward", (0.5, 0.5, 0.0), "sol-rf-limit", (1, 8, 1)),
        _case("sol-xcf", "sol", "xcf-", (2.0, 1.0, 1.0), "backward", (0.5, 0.5, 0.0), "sol-xcf-limit",
              (-1, -8, -1)),
        _case("sl2-rf", "sl2tilde", "rf", (1.0, 2.0, 1.0), "forward", (0.0, 0.0, 0.5), "h2xr", (2, 16, 1)),
        _case("sl2-xcf-b=c", "sl2tilde", "xcf-", (1.0, 2.0, 2.0), "forward", (0.0, 0.0, 1 / 6), "h2xr-xcf",
              (2, 40, 2), q=-1 / 3),
        _case("sl2-xcf-b!=c", "sl2tilde", "xcf-", (1.0, 2.0, 1.0), "backward", (0.5, 0.0, 0.5),
              "sol-xc-soliton", (-1, -9, -1), post_map=lambda g0: sl2_sol_map()),
        _case("isome2-rf", "isome2tilde", "rf", (2.0, 1.0, 1.0), "forward", (0.5, 0.5, 0.5), "e3-rf", (1, 6, 1)),
        _case("isome2-xcf", "isome2tilde", "xcf-", (2.0, 1.0, 1.0), "forward", (0.25, 0.25, 1 / 12), "e3-xcf",
              (2, 40, 2)),
    ]
}


def run_limit_case(name: str, n_points: int = 20, seed: int = 42, tol: float = 1e-6,
                   cfg: IntegratorConfig | None = None) -> LimitComparison:
    """Integrate the case's flow and run :func:`limit_metric` on it.

    Forward cases integrate up to ``1.01 * max(s) * max(t)`` with the blow-up
    threshold raised, since the coefficients legitimately grow or shrink by
    many orders of magnitude there. Backward cases integrate until the
    blow-up and take ``T0`` from the trajectory.
    """
    case = LIMIT_CASES[name]
    s = case.schedule()
    g0 = DiagonalMetric(*case.g0)
    if case.direction is Direction.FORWARD:
        fam = case.family()
        t_end = 1.01 * max(fam.mapped_time(s[-1], t) for t in case.times)
        cfg = cfg or IntegratorConfig(blowup_threshold=1e300, max_steps=10**6)
        traj = integrate(case.flow, case.kind, g0, t_end, cfg)
    else:
        cfg = cfg or IntegratorConfig()
        traj = integrate(case.flow, case.kind, g0, 1e6, cfg)
        if not traj.blew_up:
            raise DivergedError(f"{name}: expected a finite-time singularity")
        fam = case.family(traj.T0)
    # points live in the chart of the limit, which is where phi_s o psi starts
    pts = sample_points(REFERENCES[case.reference].chart, n_points, seed)
    return limit_metric(case.kind, case.flow, traj, fam, case.scaling(), case.reference, pts, case.times, s,
                        tol=tol, g0=g0)
