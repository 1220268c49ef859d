"""
Soliton certificates.

A certificate states a solution ``g(t)`` together with the data that makes it
self-similar: ``g(t) = sigma(t) psi_t^* g(1)`` with ``psi_t`` a coordinate
power map ``p -> t^e * p`` and ``sigma(t) = ((1-p) alpha t)^(1/(1-p))``.
Two checks are offered. :func:`verify_self_similar` compares both sides of that
identity at sample points. :func:`verify_soliton_equation` checks
``-2 v(g) = L_X g + alpha g`` at ``t = 1``, where ``X = e * p`` generates
``psi_t``. It computes ``L_X g`` either exactly or by finite differences of
pullbacks.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .curvature import curvature_tensors
from .errors import UnsupportedFieldError
from .flow import FlowKind
from .geometry import DiagonalMetric, GeometryKind, coframe_unchecked, coordinate_metric
from .rescale import CoordinateScaling, sample_points

__all__ = [
    "AffineField",
    "SolitonCertificate",
    "CERTIFICATES",
    "sigma",
    "sigma_defect",
    "as_affine_field",
    "lie_derivative",
    "velocity_metric",
    "verify_self_similar",
    "verify_soliton_equation",
    "certify",
    "SELF_SIMILAR_TOL",
    "FD_TOL",
]

SELF_SIMILAR_TOL = 1e-10
FD_TOL = 1e-6
_FD_EPS = 1e-6
_CS_STEP = 1e-30


def sigma(t, alpha: float, p: int, base: str = "g1"):
    """Scale factor of a self-similar solution.

    ``base="g0"`` gives ``(1 + (1-p) alpha t)^(1/(1-p))`` with ``sigma(0) = 1``;
    ``base="g1"`` gives ``((1-p) alpha t)^(1/(1-p))``, which equals 1 at
    ``t = 1`` when ``(1-p) alpha = 1``. Both satisfy ``sigma' = alpha sigma^p``.
    """
    c = {"g0": 1.0, "g1": 0.0}[base]
    return (c + (1 - p) * alpha * t) ** (1.0 / (1 - p))


def sigma_defect(alpha: float, p: int, base: str = "g1", n: int = 100, seed: int = 42) -> float:
    """Largest relative violation of ``sigma' = alpha sigma^p`` at ``n`` random times.

    The derivative is taken by complex step, so the check is exact to rounding.
    """
    t = np.random.default_rng(seed).uniform(0.1, 10.0, n)
    d = sigma(t + 1j * _CS_STEP, alpha, p, base).imag / _CS_STEP
    rhs = alpha * sigma(t, alpha, p, base) ** p
    return float(np.max(np.abs(d - rhs) / np.maximum(np.abs(rhs), 1e-300)))


@dataclass(frozen=True)
class AffineField:
    """``X(p) = M p + b`` on a chart."""

    M: np.ndarray
    b: np.ndarray = None

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        b = np.zeros(3) if self.b is None else np.array(self.b, dtype=float)
        if M.shape != (3, 3) or b.shape != (3,):
            raise UnsupportedFieldError("affine fields need a 3x3 matrix and a 3-vector")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "b", b)

    def __call__(self, p):
        return self.M @ np.asarray(p) + self.b


def as_affine_field(field, probe_scale: float = 1.0) -> AffineField:
    """Coerce ``field`` into an :class:`AffineField`.

    Accepts an :class:`AffineField`, an ``(M, b)`` pair, a 3x3 matrix, or a
    callable. A callable is probed at a few points and rejected if it is not
    affine there.

    Raises
    ------
    UnsupportedFieldError
    """
    if isinstance(field, AffineField):
        return field
    if callable(field):
        base = np.zeros(3)
        try:
            b = np.asarray(field(base), dtype=float)
            M = np.column_stack([np.asarray(field(probe_scale * e), dtype=float) - b for e in np.eye(3)])
            M /= probe_scale
            rng = np.random.default_rng(0)
            for q in rng.uniform(-2, 2, (4, 3)):
                if not np.allclose(field(q), M @ q + b, rtol=1e-9, atol=1e-12):
                    raise UnsupportedFieldError("vector field is not affine in the chart coordinates")
        except UnsupportedFieldError:
            raise
        except Exception as exc:
            raise UnsupportedFieldError(f"could not evaluate vector field: {exc}") from exc
        return AffineField(M, b)
    if isinstance(field, tuple) and len(field) == 2:
        return AffineField(*field)
    try:
        arr = np.asarray(field, dtype=float)
    except (TypeError, ValueError) as exc:
        raise UnsupportedFieldError(f"unsupported vector field {field!r}") from exc
    if arr.shape == (3, 3):
        return AffineField(arr)
    raise UnsupportedFieldError(f"unsupported vector field {field!r}")


def _coord_metric_complex(kind, coeffs, p):
    W = coframe_unchecked(kind, p[0], p[1], p[2])
    return W.T @ (np.asarray(coeffs)[:, None] * W)


def _metric_gradient(kind, g: DiagonalMetric, p) -> np.ndarray:
    # dG/dp_j by complex step; shape (3, 3, 3) with the derivative index last
    p = np.asarray(p, dtype=float)
    coeffs = g.as_array()
    out = np.empty((3, 3, 3))
    for j in range(3):
        q = p.astype(complex)
        q[j] += 1j * _CS_STEP
        out[:, :, j] = _coord_metric_complex(kind, coeffs, q).imag / _CS_STEP
    return out


def lie_derivative(kind, g: DiagonalMetric, field, p, method: str = "analytic") -> np.ndarray:
    """``L_X g`` at ``p`` for a left-invariant ``g`` and an affine field ``X``.

    ``method="analytic"`` evaluates ``(X . grad) g + M^T g + g M`` with the
    gradient taken by complex step. ``method="fd"`` differences the pullbacks
    by ``p -> p +- eps X(p)`` with ``eps = 1e-6``.
    """
    kind = GeometryKind.parse(kind)
    X = as_affine_field(field)
    p = np.asarray(p, dtype=float)
    G = coordinate_metric(kind, g, p)
    if method == "analytic":
        L = _metric_gradient(kind, g, p) @ X(p) + X.M.T @ G + G @ X.M
    elif method == "fd":
        e = _FD_EPS
        I = np.eye(3)
        Jp, Jm = I + e * X.M, I - e * X.M
        Gp = coordinate_metric(kind, g, p + e * X(p))
        Gm = coordinate_metric(kind, g, p - e * X(p))
        L = (Jp.T @ Gp @ Jp - Jm.T @ Gm @ Jm) / (2 * e)
    else:
        raise ValueError(f"unknown method {method!r}")
    return 0.5 * (L + L.T)


def velocity_metric(kind, g: DiagonalMetric, flow, p) -> np.ndarray:
    """Coordinate matrix of ``v(g)``: ``Rc`` for RF, ``h`` for XCF-, ``-h`` for XCF+."""
    kind = GeometryKind.parse(kind)
    flow = FlowKind.parse(flow)
    ct = curvature_tensors(kind, g)
    if flow is FlowKind.RF:
        v = ct.ricci_diag
    elif flow is FlowKind.XCF_MINUS:
        v = ct.h_diag
    else:
        v = -ct.h_diag
    return _coord_metric_complex(kind, v, np.asarray(p, dtype=float)).real


def _default_points(kind, points):
    if points is None:
        return sample_points(kind, 20, 42)
    return np.atleast_2d(np.asarray(points, dtype=float))


def verify_soliton_equation(kind, base_metric: DiagonalMetric, vector_field, alpha: float, flow,
                            points=None, method: str = "analytic") -> float:
    """Sup over ``points`` of ``|-2 v(g) - L_X g - alpha g|``, componentwise.

    Raises
    ------
    UnsupportedFieldError
        If ``vector_field`` is not affine.
    """
    kind = GeometryKind.parse(kind)
    X = as_affine_field(vector_field)
    res = 0.0
    for p in _default_points(kind, points):
        lhs = -2.0 * velocity_metric(kind, base_metric, flow, p)
        rhs = lie_derivative(kind, base_metric, X, p, method) + alpha * coordinate_metric(kind, base_metric, p)
        res = max(res, float(np.abs(lhs - rhs).max()))
    return res


@dataclass(frozen=True)
class SolitonCertificate:
    """A named self-similar solution.

    Attributes
    ----------
    name : str
    geometry : GeometryKind
        Chart and frame in which ``solution`` and ``base_metric`` are diagonal.
    flow : FlowKind
    alpha : float
    psi_family : CoordinateScaling
        ``psi_t`` is ``psi_family`` evaluated at ``s = t``.
    base_name : str
        Readable form of ``g(1)``.
    solution : callable
        ``t -> DiagonalMetric``; the solution as stated, independent of
        ``psi_family`` and ``sigma``.
    residual, verified
        Filled in by :func:`certify`.
    """

    name: str
    geometry: GeometryKind
    flow: FlowKind
    alpha: float
    psi_family: CoordinateScaling
    base_name: str
    solution: Callable
    sigma_base: str = "g1"
    residual: float | None = None
    verified: bool = False
    tol: float = SELF_SIMILAR_TOL

    def __post_init__(self):
        if self.verified and not (self.residual is not None and self.residual < self.tol):
            raise ValueError("a verified certificate needs a residual below its tolerance")

    @property
    def p(self) -> int:
        return self.flow.p

    @property
    def base_metric(self) -> DiagonalMetric:
        return self.solution(1.0)

    def sigma(self, t):
        return sigma(t, self.alpha, self.p, self.sigma_base)

    def generator(self) -> AffineField:
        """``X = d/dt psi_t`` at ``t = 1``, i.e. ``X(p) = e * p``."""
        if self.sigma_base != "g1" or self.psi_family.post_map is not None:
            raise UnsupportedFieldError("the generator is only derived for power maps based at t = 1")
        return AffineField(np.diag(self.psi_family.exponents))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "geometry": self.geometry.value,
            "flow": self.flow.value,
            "alpha": self.alpha,
            "p": self.p,
            "psi_exponents": list(self.psi_family.exponents),
            "base_metric": self.base_name,
            "residual": self.residual,
            "verified": self.verified,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def verify_self_similar(cert: SolitonCertificate, points=None, times=None) -> float:
    """Sup over ``(point, t)`` of ``|g(t) - sigma(t) psi_t^* g(1)|``, componentwise."""
    kind = cert.geometry
    pts = _default_points(kind, points)
    times = np.geomspace(0.25, 4.0, 9) if times is None else np.asarray(times, dtype=float)
    g1 = cert.base_metric
    res = 0.0
    for t in times:
        gt = cert.solution(float(t))
        for p in pts:
            J = cert.psi_family.jacobian(t, p)
            rhs = cert.sigma(t) * (J.T @ coordinate_metric(kind, g1, cert.psi_family.apply(t, p)) @ J)
            res = max(res, float(np.abs(coordinate_metric(kind, gt, p) - rhs).max()))
    return res


def certify(name_or_cert, points=None, times=None) -> SolitonCertificate:
    """Run :func:`verify_self_similar` and return the certificate with its outcome."""
    cert = CERTIFICATES[name_or_cert] if isinstance(name_or_cert, str) else name_or_cert
    r = verify_self_similar(cert, points, times)
    return replace(cert, residual=r, verified=bool(r < cert.tol))


def _cert(name, kind, flow, alpha, exps, base_name, solution):
    return SolitonCertificate(name, GeometryKind(kind), FlowKind(flow), alpha, CoordinateScaling(exps),
                              base_name, solution)


_R7 = 2.0 / math.sqrt(7.0)

CERTIFICATES = {
    c.name: c
    for c in [
        _cert("nil-rf", "nil", "rf", 1.0, (-1 / 3, -1 / 3, -2 / 3),
              "(1/3)(dz - x dy)^2 + dy^2 + dx^2",
              lambda t: DiagonalMetric(t ** (-1 / 3) / 3.0, t ** (1 / 3), t ** (1 / 3))),
        _cert("nil-xcf", "nil", "xcf-", 0.5, (-1 / 7, -1 / 7, -2 / 7),
              "(2/sqrt 7)(dz - x dy)^2 + dy^2 + dx^2",
              lambda t: DiagonalMetric(_R7 * t ** (-1 / 14), t ** (3 / 14), t ** (3 / 14))),
        _cert("sol-rf", "sol", "rf", 1.0, (-0.5, -0.5, 0.0),
              "e^(2z) dx^2 + e^(-2z) dy^2 + 4 dz^2",
              lambda t: DiagonalMetric(0.5, 4.0 * t, 0.5)),
        _cert("sol-xcf-limit", "sol", "xcf+", 0.5, (-0.5, -0.5, 0.0),
              "e^(2z) dx^2 + e^(-2z) dy^2 + 2 dz^2",
              lambda t: DiagonalMetric(0.5 * t**-0.5, 2.0 * t**0.5, 0.5 * t**-0.5)),
        _cert("h2xr-rf", "h2xr", "rf", 1.0, (0.0, 0.0, -0.5),
              "dtheta^2 + 2 y^-2 (dx^2 + dy^2)",
              lambda t: DiagonalMetric(1.0, 2.0 * t, 2.0 * t)),
    ]
}
