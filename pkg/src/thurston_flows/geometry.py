"""
Geometry core: the four flowable Lie groups and their left-invariant metrics.

Each geometry is presented in a single global chart, ``(x, y, z)`` for Nil and
Sol and ``(x, y, theta)`` for the universal covers of SL(2,R) and Isom(E^2).
A left-invariant metric is stored by its three coefficients ``(A, B, C)`` with
respect to a fixed invariant coframe, and :func:`coordinate_metric` expands it
into a symmetric 3x3 matrix in the chart basis.

Conventions
-----------
Frame indices are 0-based in code: ``c[i, j, k]`` is the coefficient of
``F_{k+1}`` in ``[F_{i+1}, F_{j+1}]``.

The metric coframes are the one-forms multiplying ``A``, ``B``, ``C`` in the
coordinate expressions. They are not always the dual basis of the frame:
on Nil the forms for ``B`` and ``C`` pair with ``F_3`` and ``F_2``, and on Sol
the forms for ``A`` and ``C`` evaluate to 2 on ``F_1`` and ``F_3``. Neither
affects curvature (see :func:`frame_metric`).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidPointError, UnsupportedGeometryError

__all__ = [
    "GeometryKind",
    "DiagonalMetric",
    "StructureConstants",
    "structure_constants",
    "check_point",
    "metric_coframe",
    "coframe_unchecked",
    "coordinate_metric",
    "frame",
    "frame_metric",
    "sol_to_tilde",
    "sol_from_tilde",
    "sol_from_tilde_jacobian",
    "sol_tilde_metric",
    "h2xr_metric",
    "euclidean_metric",
    "sol_limit_metric",
]


class GeometryKind(str, Enum):
    """Geometry tags; the first four can be flowed."""

    NIL = "nil"
    SOL = "sol"
    SL2TILDE = "sl2tilde"
    ISOME2TILDE = "isome2tilde"
    # limit-only references
    H2XR = "h2xr"
    EUCLIDEAN3 = "euclidean3"
    SOL_LIMIT = "sollimit"

    @property
    def flowable(self) -> bool:
        return self in _FLOWABLE

    @classmethod
    def parse(cls, name) -> "GeometryKind":
        """Accept a tag, its lowercase value, or a few common spellings."""
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "").replace("-", "")
        aliases = {
            "sl2": "sl2tilde",
            "sl2r": "sl2tilde",
            "isome2": "isome2tilde",
            "e2": "isome2tilde",
            "h2r": "h2xr",
            "e3": "euclidean3",
        }
        key = aliases.get(key, key)
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown geometry {name!r}")

    def require_flowable(self) -> None:
        if not self.flowable:
            raise UnsupportedGeometryError(
                f"{self.value} is a limit-only geometry and cannot be flowed"
            )


_FLOWABLE = frozenset(
    {GeometryKind.NIL, GeometryKind.SOL, GeometryKind.SL2TILDE, GeometryKind.ISOME2TILDE}
)


@dataclass(frozen=True)
class DiagonalMetric:
    """Coefficients of a left-invariant metric that is diagonal in the frame.

    Parameters
    ----------
    A, B, C : float
        Positive coefficients of the first, second and third coframe forms.
    """

    A: float
    B: float
    C: float

    def __post_init__(self):
        for name in ("A", "B", "C"):
            v = float(getattr(self, name))
            if not (np.isfinite(v) and v > 0.0):
                raise ValueError(f"metric coefficient {name}={v!r} must be positive")
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, a) -> "DiagonalMetric":
        a = np.asarray(a, dtype=float)
        return cls(a[0], a[1], a[2])

    def as_array(self) -> np.ndarray:
        return np.array([self.A, self.B, self.C])

    def scaled(self, c: float) -> "DiagonalMetric":
        return DiagonalMetric(c * self.A, c * self.B, c * self.C)

    def __iter__(self):
        return iter((self.A, self.B, self.C))


@dataclass(frozen=True, eq=False)
class StructureConstants:
    """Bracket table ``c[i, j, k]`` of an invariant frame, entries in {-1, 0, 1}."""

    c: np.ndarray

    def __post_init__(self):
        arr = np.array(self.c, dtype=np.int64)
        if arr.shape != (3, 3, 3):
            raise ValueError("structure constants must have shape (3, 3, 3)")
        arr.setflags(write=False)
        object.__setattr__(self, "c", arr)

    def antisymmetry_defect(self) -> int:
        """Largest ``|c[i,j,k] + c[j,i,k]|``; zero for a valid table."""
        return int(np.abs(self.c + self.c.transpose(1, 0, 2)).max())

    def jacobi_defect(self) -> int:
        """Largest entry of the cyclic sum of ``[[F_i, F_j], F_k]``."""
        c = self.c
        # [[F_i,F_j],F_k] = c_ij^m c_mk^n F_n
        t = np.einsum("ijm,mkn->ijkn", c, c)
        cyc = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
        return int(np.abs(cyc).max())

    def __eq__(self, other):
        return isinstance(other, StructureConstants) and np.array_equal(self.c, other.c)

    def __hash__(self):
        return hash(self.c.tobytes())


def _table(brackets):
    c = np.zeros((3, 3, 3), dtype=np.int64)
    for (i, j), vec in brackets.items():
        for k, v in enumerate(vec):
            c[i - 1, j - 1, k] = v
            c[j - 1, i - 1, k] = -v
    return StructureConstants(c)


_BRACKETS = {
    # [F2,F3] = F1
    GeometryKind.NIL: {(2, 3): (1, 0, 0)},
    # [F1,F2] = -F3, [F2,F3] = F1, [F3,F1] = 0
    GeometryKind.SOL: {(1, 2): (0, 0, -1), (2, 3): (1, 0, 0)},
    # [F1,F2] = F3, [F2,F3] = -F1, [F3,F1] = F2
    GeometryKind.SL2TILDE: {(1, 2): (0, 0, 1), (2, 3): (-1, 0, 0), (3, 1): (0, 1, 0)},
    # [F2,F3] = F1, [F3,F1] = F2
    GeometryKind.ISOME2TILDE: {(2, 3): (1, 0, 0), (3, 1): (0, 1, 0)},
    # frame (d/dtheta, y d/dx, y d/dy) of H2 x R: [F2,F3] = -F2
    GeometryKind.H2XR: {(2, 3): (0, -1, 0)},
}


def structure_constants(kind) -> StructureConstants:
    """Bracket table of the invariant frame of a flowable geometry or of H2 x R.

    Examples
    --------
    >>> int(structure_constants("nil").c[1, 2, 0])
    1
    """
    kind = GeometryKind.parse(kind)
    if kind not in _BRACKETS:
        kind.require_flowable()
    return _table(_BRACKETS[kind])


def check_point(kind, p) -> np.ndarray:
    """Return ``p`` as a float array, raising if it lies outside the chart."""
    kind = GeometryKind.parse(kind)
    p = np.asarray(p, dtype=float)
    if p.shape != (3,) or not np.all(np.isfinite(p)):
        raise InvalidPointError(f"chart points are finite triples, got {p!r}")
    if kind in (GeometryKind.SL2TILDE, GeometryKind.H2XR) and p[1] <= 0.0:
        raise InvalidPointError(f"upper half-plane chart needs y > 0, got y={p[1]}")
    return p


def metric_coframe(kind, p) -> np.ndarray:
    """Rows are the one-forms multiplying ``A``, ``B``, ``C`` at ``p``.

    Defined for the flowable geometries and for H2 x R, the one limit
    geometry that also carries an invariant frame here.
    """
    kind = GeometryKind.parse(kind)
    if kind is not GeometryKind.H2XR:
        kind.require_flowable()
    return coframe_unchecked(kind, *check_point(kind, p))


def coframe_unchecked(kind: GeometryKind, x, y, w) -> np.ndarray:
    # no validation and no dtype coercion, so complex-step derivatives work
    zero, one = 0.0 * x, 1.0 + 0.0 * x
    if kind is GeometryKind.NIL:
        # dz - x dy, dy, dx
        return np.array([[zero, -x, one], [zero, one, zero], [one, zero, zero]])
    if kind is GeometryKind.SOL:
        ez, emz = np.exp(w), np.exp(-w)
        # e^z dx + e^-z dy, dz, e^z dx - e^-z dy
        return np.array([[ez, emz, zero], [zero, zero, one], [ez, -emz, zero]])
    if kind is GeometryKind.SL2TILDE:
        c, s = np.cos(w), np.sin(w)
        # dtheta - dx/y, (cos dx - sin dy)/y, (sin dx + cos dy)/y
        return np.array([[-1.0 / y, zero, one], [c / y, -s / y, zero], [s / y, c / y, zero]])
    if kind is GeometryKind.H2XR:
        # dtheta, dx/y, dy/y
        return np.array([[zero, zero, one], [1.0 / y, zero, zero], [zero, 1.0 / y, zero]])
    c, s = np.cos(w), np.sin(w)
    # sin dx + cos dy, cos dx - sin dy, dtheta
    return np.array([[s, c, zero], [c, -s, zero], [zero, zero, one]])


def coordinate_metric(kind, g: DiagonalMetric, p) -> np.ndarray:
    """Chart components of the left-invariant metric ``g`` at ``p``.

    Parameters
    ----------
    kind : GeometryKind or str
    g : DiagonalMetric
    p : array_like, shape (3,)

    Returns
    -------
    ndarray, shape (3, 3)
        Symmetric positive-definite matrix in the ``(x, y, z)`` or
        ``(x, y, theta)`` ordering.
    """
    W = metric_coframe(kind, p)
    G = W.T @ (np.array([g.A, g.B, g.C])[:, None] * W)
    return 0.5 * (G + G.T)


def frame(kind, p) -> np.ndarray:
    """Columns are the invariant vector fields ``F_1, F_2, F_3`` at ``p``."""
    kind = GeometryKind.parse(kind)
    kind.require_flowable()
    x, y, w = check_point(kind, p)
    if kind is GeometryKind.NIL:
        cols = [(0.0, 0.0, 1.0), (1.0, 0.0, 0.0), (0.0, 1.0, x)]
    elif kind is GeometryKind.SOL:
        ez, emz = np.exp(w), np.exp(-w)
        cols = [(emz, ez, 0.0), (0.0, 0.0, -1.0), (emz, -ez, 0.0)]
    elif kind is GeometryKind.SL2TILDE:
        c, s = np.cos(w), np.sin(w)
        cols = [(0.0, 0.0, -1.0), (y * c, -y * s, c), (y * s, y * c, s)]
    else:
        c, s = np.cos(w), np.sin(w)
        cols = [(s, c, 0.0), (c, -s, 0.0), (0.0, 0.0, 1.0)]
    return np.array(cols).T


def frame_metric(kind, g: DiagonalMetric, p=None) -> np.ndarray:
    """Gram matrix ``g(F_i, F_j)`` of the invariant frame.

    Constant in ``p`` because both the frame and the metric are invariant.
    On Nil it is ``diag(A, C, B)``, on Sol ``diag(4A, B, 4C)``; both rescalings
    leave the sectional curvatures unchanged.
    """
    kind = GeometryKind.parse(kind)
    if p is None:
        p = (0.3, 1.2, 0.4)
    F = frame(kind, p)
    return F.T @ coordinate_metric(kind, g, p) @ F


# -- Sol: change to the alternate chart ---------------------------------------


def sol_to_tilde(p, g: DiagonalMetric) -> np.ndarray:
    """Map a Sol point ``(x, y, z)`` to the alternate chart ``(xt, yt, zt)``."""
    x, y, z = check_point(GeometryKind.SOL, p)
    ez, emz = np.exp(z), np.exp(-z)
    return np.array(
        [
            0.5 * np.sqrt(g.C) * (ez * x - emz * y),
            np.sqrt(g.B) * z,
            0.5 * np.sqrt(g.A) * (ez * x + emz * y),
        ]
    )


def sol_from_tilde(q, g: DiagonalMetric) -> np.ndarray:
    """Inverse of :func:`sol_to_tilde`."""
    xt, yt, zt = check_point(GeometryKind.SOL, q)
    u = yt / np.sqrt(g.B)
    a, c = xt / np.sqrt(g.C), zt / np.sqrt(g.A)
    return np.array([np.exp(-u) * (a + c), np.exp(u) * (c - a), u])


def sol_from_tilde_jacobian(q, g: DiagonalMetric) -> np.ndarray:
    xt, yt, zt = check_point(GeometryKind.SOL, q)
    sa, sb, sc = np.sqrt(g.A), np.sqrt(g.B), np.sqrt(g.C)
    u = yt / sb
    em, ep = np.exp(-u), np.exp(u)
    a, c = xt / sc, zt / sa
    return np.array(
        [
            [em / sc, -em * (a + c) / sb, em / sa],
            [-ep / sc, ep * (c - a) / sb, ep / sa],
            [0.0, 1.0 / sb, 0.0],
        ]
    )


def sol_tilde_metric(q, g: DiagonalMetric) -> np.ndarray:
    """The Sol metric written in the alternate chart.

    Equals ``4(dzt - k1 xt dyt)^2 + dyt^2 + 4(dxt - k3 zt dyt)^2`` with
    ``k1 = sqrt(A/(B C))`` and ``k3 = sqrt(C/(A B))``.
    """
    xt, yt, zt = check_point(GeometryKind.SOL, q)
    k1 = np.sqrt(g.A / (g.B * g.C))
    k3 = np.sqrt(g.C / (g.A * g.B))
    w1 = np.array([0.0, -k1 * xt, 1.0])
    w2 = np.array([0.0, 1.0, 0.0])
    w3 = np.array([1.0, -k3 * zt, 0.0])
    return 4.0 * np.outer(w1, w1) + np.outer(w2, w2) + 4.0 * np.outer(w3, w3)


# -- limit-only reference metrics ---------------------------------------------


def h2xr_metric(p, a: float, b: float) -> np.ndarray:
    """``a dtheta^2 + (b / y^2)(dx^2 + dy^2)`` on H^2 x R."""
    x, y, w = check_point(GeometryKind.H2XR, p)
    k = b / (y * y)
    return np.diag([k, k, a])


def euclidean_metric(p, e_xy: float, e_theta: float) -> np.ndarray:
    """``e_xy (dx^2 + dy^2) + e_theta dtheta^2``."""
    return np.diag([e_xy, e_xy, e_theta])


def sol_limit_metric(p, a: float, b: float) -> np.ndarray:
    """``a (e^{2z} dx^2 + e^{-2z} dy^2) + b dz^2``."""
    z = np.asarray(p, dtype=float)[2]
    return np.diag([a * np.exp(2 * z), a * np.exp(-2 * z), b])
