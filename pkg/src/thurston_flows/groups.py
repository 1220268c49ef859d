"""
Group laws, conjugated actions, their limits, and collapse of compact quotients.

Each flowable geometry is a Lie group whose chart coordinates are also group
coordinates, so left translation ``act(kind, gamma, p)`` is the group product
``gamma * p``. For the universal cover of SL(2, R) the chart is the lifted
unit tangent bundle of the upper half plane; the angle of a product is lifted
by :func:`mu3_lift`.

Along a rescaling ``phi_s`` the lattice acts through ``phi_s^-1 o gamma o
phi_s``. :func:`limit_action` follows such conjugates along a schedule of
group elements and fits the limit family, and :func:`collapse_analysis`
reads off, from the lattice generators, how much of the limit group survives
and what that does to the orbit space.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import least_squares

from .errors import InvalidMatrixError, InvalidPointError
from .flow import FlowKind
from .geometry import DiagonalMetric, GeometryKind, check_point
from .rescale import LIMIT_CASES, REFERENCES, CoordinateScaling, Direction, sample_points

__all__ = [
    "GroupElement",
    "identity",
    "act",
    "act_jacobian",
    "compose",
    "inverse",
    "mu3_lift",
    "sl2_inverse_angle",
    "phi_chart",
    "phi_chart_inverse",
    "sol_tilde_isometry",
    "conjugated_action",
    "LimitFamily",
    "LIMIT_FAMILIES",
    "LimitActionFamily",
    "limit_action",
    "Lattice",
    "STANDARD_LATTICES",
    "standard_lattice",
    "min_displacement",
    "GeneratorFate",
    "CollapseReport",
    "collapse_analysis",
    "limit_setup",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GroupElement:
    """Parameters ``(a, b, c)`` or ``(a, b, tau)`` of a group element.

    For SL2 the second parameter is the ``y`` coordinate and must be positive;
    for SL2 and Isom(E2) the third is an unreduced angle.
    """

    kind: GeometryKind
    params: tuple

    def __post_init__(self):
        kind = GeometryKind.parse(self.kind)
        kind.require_flowable()
        p = tuple(float(v) for v in self.params)
        if len(p) != 3 or not all(math.isfinite(v) for v in p):
            raise InvalidPointError(f"group elements have three finite parameters, got {self.params!r}")
        if kind is GeometryKind.SL2TILDE and p[1] <= 0:
            raise InvalidPointError(f"SL2 elements need b > 0, got b={p[1]}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", p)

    def as_array(self) -> np.ndarray:
        return np.array(self.params)

    def __iter__(self):
        return iter(self.params)


def _element(kind, gamma) -> GroupElement:
    if isinstance(gamma, GroupElement):
        if gamma.kind is not GeometryKind.parse(kind):
            raise ValueError(f"element of {gamma.kind.value} used on {GeometryKind.parse(kind).value}")
        return gamma
    return GroupElement(kind, tuple(gamma))


def identity(kind) -> GroupElement:
    kind = GeometryKind.parse(kind)
    return GroupElement(kind, (0.0, 1.0, 0.0) if kind is GeometryKind.SL2TILDE else (0.0, 0.0, 0.0))


# -- SL2 angle lift ----------------------------------------------------------


def _half_angle_lift(tau, x, y):
    # L with mu3 = theta + 2 L(tau, x, y). Writing tau = 2 pi n + r with
    # r in [-pi, pi), L = pi n + atan2(y sin(r/2), cos(r/2) + x sin(r/2)).
    # The numerator has the sign of r, so the atan2 never crosses its cut and
    # L is continuous in r; at r = +-pi the branches n and n + 1 meet.
    n = np.floor((tau + math.pi) / TWO_PI)
    r = tau - TWO_PI * n
    h = 0.5 * r
    sh, ch = np.sin(h), np.cos(h)
    return math.pi * n + np.arctan2(y * sh, ch + x * sh)


def mu3_lift(tau, x, y, theta):
    """Lifted angle of ``(a, b, tau) * (x, y, theta)``.

    Equals ``theta + 2 atan(y / (x + cot(tau / 2)))`` modulo ``2 pi``, is
    continuous in all arguments, and is normalized by
    ``mu3_lift(0, 0, 1, 0) = 0``. It does not depend on ``a`` or ``b``.

    Examples
    --------
    >>> float(mu3_lift(0.0, 0.0, 1.0, 1.25))
    1.25
    """
    tau, x, y, theta = (np.asarray(v, dtype=float) for v in (tau, x, y, theta))
    if np.any(y <= 0):
        raise InvalidPointError("mu3_lift needs y > 0")
    out = theta + 2.0 * _half_angle_lift(tau, x, y)
    return float(out) if out.ndim == 0 else out


def sl2_inverse_angle(target, x, y):
    """Solve ``L(tau, x, y) = target`` for ``tau``.

    ``L`` increases strictly in ``tau`` (its derivative is ``y`` over a
    positive quantity) and gains ``pi`` per ``2 pi``, so the solution is
    unique.
    """
    s, c = math.sin(target), math.cos(target)
    tau = 2.0 * math.atan2(s, y * c - x * s)
    # the atan2 above fixes tau mod 2 pi; move to the branch with the right L
    k = round((target - float(_half_angle_lift(tau, x, y))) / math.pi)
    return tau + TWO_PI * k


def phi_chart(M) -> tuple:
    """``(x, y, angle mod 2 pi)`` of a unit-determinant matrix, via its action on ``(i, [0])``.

    The angle is ``2 atan2(c, d)``, which is unchanged by ``M -> -M`` modulo
    ``2 pi``.

    Raises
    ------
    InvalidMatrixError
        If ``|det M - 1| > 1e-12``.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2):
        raise InvalidMatrixError("expected a 2x2 matrix")
    (a, b), (c, d) = M
    det = a * d - b * c
    if not abs(det - 1.0) <= 1e-12:
        raise InvalidMatrixError(f"determinant {det!r} is not 1")
    n = c * c + d * d
    return (a * c + b * d) / n, 1.0 / n, (2.0 * math.atan2(c, d)) % TWO_PI


def phi_chart_inverse(x, y, theta) -> np.ndarray:
    """A matrix representative of the element at ``(x, y, theta)`` (defined up to sign)."""
    if y <= 0:
        raise InvalidPointError(f"y must be positive, got {y}")
    sh, ch = math.sin(theta / 2), math.cos(theta / 2)
    return np.array([[x * sh + y * ch, x * ch - y * sh], [sh, ch]]) / math.sqrt(y)


# -- group laws ----------------------------------------------------------------


def _sl2_planar(a, b, tau, x, y):
    h = 0.5 * tau
    sh, ch = math.sin(h), math.cos(h)
    # sin^2(tau/2)((x + cot(tau/2))^2 + y^2), written without the cotangent
    D = (x * sh + ch) ** 2 + (y * sh) ** 2
    num = x * math.cos(tau) + 0.5 * (x * x + y * y - 1.0) * math.sin(tau)
    return a + b * num / D, b * y / D


def act(kind, gamma, p) -> np.ndarray:
    """Left translation ``gamma * p``.

    Examples
    --------
    >>> act("nil", (1, 0, 0), (0, 2, 0)).tolist()
    [1.0, 2.0, 2.0]
    """
    kind = GeometryKind.parse(kind)
    a, b, c = _element(kind, gamma).params
    x, y, z = check_point(kind, p)
    if kind is GeometryKind.NIL:
        return np.array([x + a, y + b, z + c + a * y])
    if kind is GeometryKind.SOL:
        return np.array([math.exp(-c) * x + a, math.exp(c) * y + b, z + c])
    if kind is GeometryKind.SL2TILDE:
        X, Y = _sl2_planar(a, b, c, x, y)
        return np.array([X, Y, mu3_lift(c, x, y, z)])
    cs, sn = math.cos(c), math.sin(c)
    return np.array([x * cs + y * sn + a, -x * sn + y * cs + b, z + c])


def act_jacobian(kind, gamma, p, eps: float = 1e-6) -> np.ndarray:
    """Jacobian of ``p -> gamma * p`` by central differences with step ``eps``.

    The SL2 angle lift goes through ``floor``, which rules out complex steps.
    """
    p = np.asarray(p, dtype=float)
    J = np.empty((3, 3))
    for j in range(3):
        d = np.zeros(3)
        d[j] = eps
        J[:, j] = (act(kind, gamma, p + d) - act(kind, gamma, p - d)) / (2 * eps)
    return J


def compose(kind, g, h) -> GroupElement:
    """The product ``g * h`` as a group element."""
    kind = GeometryKind.parse(kind)
    return GroupElement(kind, tuple(act(kind, g, _element(kind, h).params)))


def inverse(kind, g) -> GroupElement:
    """``g^-1`` in closed form."""
    kind = GeometryKind.parse(kind)
    a, b, c = _element(kind, g).params
    if kind is GeometryKind.NIL:
        return GroupElement(kind, (-a, -b, a * b - c))
    if kind is GeometryKind.SOL:
        return GroupElement(kind, (-math.exp(c) * a, -math.exp(-c) * b, -c))
    if kind is GeometryKind.SL2TILDE:
        M = np.linalg.inv(phi_chart_inverse(a, b, c))
        x, y, _ = phi_chart(M / math.sqrt(np.linalg.det(M)))
        # the angle of g^-1 * g must lift to 0: c + 2 L(tau', a, b) = 0
        return GroupElement(kind, (x, y, sl2_inverse_angle(-0.5 * c, a, b)))
    cs, sn = math.cos(c), math.sin(c)
    return GroupElement(kind, (-(a * cs - b * sn), -(a * sn + b * cs), -c))


def sol_tilde_isometry(gamma, q, g: DiagonalMetric) -> np.ndarray:
    """Sol left translation written in the alternate chart of :func:`geometry.sol_to_tilde`.

    ``(xt + (sqrt C / 2)(E a - b / E), yt + sqrt(B) c, zt + (sqrt A / 2)(E a + b / E))``
    with ``E = exp(yt / sqrt B + c)``.
    """
    a, b, c = _element("sol", gamma).params
    xt, yt, zt = check_point("sol", q)
    E = math.exp(yt / math.sqrt(g.B) + c)
    return np.array([
        xt + 0.5 * math.sqrt(g.C) * (E * a - b / E),
        yt + math.sqrt(g.B) * c,
        zt + 0.5 * math.sqrt(g.A) * (E * a + b / E),
    ])


# -- rescaled actions ----------------------------------------------------------


_CASE_KEYS = {
    (GeometryKind.NIL, FlowKind.RF, None): "nil-rf",
    (GeometryKind.NIL, FlowKind.XCF_MINUS, None): "nil-xcf",
    (GeometryKind.SOL, FlowKind.RF, None): "sol-rf",
    (GeometryKind.SOL, FlowKind.XCF_MINUS, None): "sol-xcf",
    (GeometryKind.SL2TILDE, FlowKind.RF, None): "sl2-rf",
    (GeometryKind.SL2TILDE, FlowKind.XCF_MINUS, "b=c"): "sl2-xcf-b=c",
    (GeometryKind.SL2TILDE, FlowKind.XCF_MINUS, "b!=c"): "sl2-xcf-b!=c",
    (GeometryKind.ISOME2TILDE, FlowKind.RF, None): "isome2-rf",
    (GeometryKind.ISOME2TILDE, FlowKind.XCF_MINUS, None): "isome2-xcf",
}


def _case_key(kind, flow, case):
    kind, flow = GeometryKind.parse(kind), FlowKind.parse(flow)
    if kind is GeometryKind.SL2TILDE and flow is FlowKind.XCF_MINUS:
        key = {"b=c": "b=c", "b==c": "b=c", "beqc": "b=c", "1": "b=c",
               "b!=c": "b!=c", "b>c": "b!=c", "bneqc": "b!=c", "2": "b!=c"}.get(
            str(case).lower() if case is not None else None)
        if key is None:
            raise ValueError("SL2 cross curvature flow needs case 'b=c' or 'b!=c'")
        return kind, flow, key
    if (kind, flow, None) not in _CASE_KEYS:
        raise ValueError(f"no limit is defined for {kind.value} under {flow.value}")
    return kind, flow, None


def limit_setup(kind, flow, case=None):
    """Coordinate scaling, direction and limit family used for ``(kind, flow)``.

    The scaling is the one of the matching rescaled-limit computation, without
    the metric normalizers, which do not affect which actions survive.
    """
    k = _case_key(kind, flow, case)
    lc = LIMIT_CASES[_CASE_KEYS[k]]
    pm = lc.post_map(DiagonalMetric(*lc.g0)) if lc.name == "sl2-xcf-b!=c" else None
    return CoordinateScaling(lc.exponents, pm), lc.direction, LIMIT_FAMILIES[_FAMILY_OF[k]], lc


def conjugated_action(kind, flow, scaling: CoordinateScaling | None, gamma, s: float, p, case=None) -> np.ndarray:
    """``phi_s^-1(gamma * phi_s(p))``.

    ``scaling`` defaults to the standard one for ``(kind, flow, case)``.
    """
    if not s > 0:
        raise ValueError("s must be positive")
    if scaling is None:
        scaling = limit_setup(kind, flow, case)[0]
    q = scaling.apply(s, p)
    return scaling.inverse(s, act(kind, gamma, q))


# -- limit families ------------------------------------------------------------


def _nil_family(q, p):
    u, v, w = q
    x, y, z = p
    return np.array([x + u, y + v, z + w + u * y])


def _sol_family(q, p):
    u, v, c = q
    x, y, z = p
    return np.array([math.exp(-c) * x + u, math.exp(c) * y + v, z + c])


def _h2xr_family(q, p):
    a, b, tau, u = q
    x, y, th = p
    X, Y = _sl2_planar(a, b, tau, x, y)
    return np.array([X, Y, th + u])


def _sollimit_family(q, p):
    u, v, d = q
    x, y, th = p
    ey = math.exp(y)
    return np.array([x + ey * u + v / ey, y + d, th + ey * u - v / ey])


def _e3_family(q, p):
    tau, u, v, w = q
    x, y, th = p
    cs, sn = math.cos(tau), math.sin(tau)
    return np.array([x * cs + y * sn + u, -x * sn + y * cs + v, th + w])


@dataclass(frozen=True)
class LimitFamily:
    """A closed-form family of limit isometries.

    ``discrete`` lists the parameters that compact quotients can only reach
    on a discrete set; ``periodic`` those defined modulo ``2 pi``.
    """

    name: str
    geometry_of_limit: str
    parameters: tuple
    discrete: tuple
    formula: str
    evaluate: Callable
    base_point: tuple
    periodic: tuple = ()


LIMIT_FAMILIES = {
    f.name: f
    for f in [
        LimitFamily("gamma_uvw", "nil", ("u", "v", "w"), (), "(x + u, y + v, z + w + u y)", _nil_family,
                    (0.0, 0.0, 0.0)),
        LimitFamily("gamma_uvc", "sol", ("u", "v", "c"), ("c",), "(e^-c x + u, e^c y + v, z + c)", _sol_family,
                    (0.0, 0.0, 0.0)),
        LimitFamily("gamma_abtu", "h2xr", ("a", "b", "tau", "u"), ("a", "b", "tau"),
                    "(PSL(2,R) action of (a, b, tau) on (x, y), theta + u)", _h2xr_family, (0.0, 1.0, 0.0),
                    periodic=("tau",)),
        LimitFamily("gamma_uvd", "sollimit", ("u", "v", "d"), ("d",),
                    "(x + e^y u + e^-y v, y + d, theta + e^y u - e^-y v)", _sollimit_family, (0.0, 0.0, 0.0)),
        LimitFamily("gamma_tuvw", "euclidean3", ("tau", "u", "v", "w"), ("tau",),
                    "(x cos tau + y sin tau + u, -x sin tau + y cos tau + v, theta + w)", _e3_family,
                    (0.0, 0.0, 0.0), periodic=("tau",)),
    ]
}

_FAMILY_OF = {
    (GeometryKind.NIL, FlowKind.RF, None): "gamma_uvw",
    (GeometryKind.NIL, FlowKind.XCF_MINUS, None): "gamma_uvw",
    (GeometryKind.SOL, FlowKind.RF, None): "gamma_uvc",
    (GeometryKind.SOL, FlowKind.XCF_MINUS, None): "gamma_uvc",
    (GeometryKind.SL2TILDE, FlowKind.RF, None): "gamma_abtu",
    (GeometryKind.SL2TILDE, FlowKind.XCF_MINUS, "b=c"): "gamma_abtu",
    (GeometryKind.SL2TILDE, FlowKind.XCF_MINUS, "b!=c"): "gamma_uvd",
    (GeometryKind.ISOME2TILDE, FlowKind.RF, None): "gamma_tuvw",
    (GeometryKind.ISOME2TILDE, FlowKind.XCF_MINUS, None): "gamma_tuvw",
}


def _family_guess(fam: LimitFamily, limit_map: Callable):
    # initial parameters read off from the images of one or two points
    o = limit_map(np.array(fam.base_point))
    if fam.name == "gamma_uvw" or fam.name == "gamma_uvc":
        return [list(o)]
    if fam.name == "gamma_uvd":
        return [[(o[0] + o[2]) / 2, (o[0] - o[2]) / 2, o[1]]]
    if fam.name == "gamma_tuvw":
        e = limit_map(np.array([1.0, 0.0, 0.0]))
        return [[math.atan2(-(e[1] - o[1]), e[0] - o[0]), o[0], o[1], o[2]]]
    # (0, 1, theta) -> (a, b, theta + u) for every tau; tau needs a second point
    return [[o[0], o[1], t, o[2]] for t in np.linspace(0.0, TWO_PI, 8, endpoint=False)]


def _fit_family(fam: LimitFamily, points, images, limit_map):
    def resid(q):
        return np.concatenate([fam.evaluate(q, p) - im for p, im in zip(points, images)])

    best = None
    for x0 in _family_guess(fam, limit_map):
        x0 = np.asarray(x0, dtype=float)
        if not np.all(np.isfinite(x0)):
            continue
        sol = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        r = float(np.abs(sol.fun).max())
        if best is None or r < best[1]:
            best = (sol.x, r)
    if best is None:
        return None, math.inf
    q = dict(zip(fam.parameters, (float(v) for v in best[0])))
    for name in fam.periodic:
        q[name] = q[name] % TWO_PI
    return q, best[1]


@dataclass
class LimitActionFamily:
    """Numeric limit of conjugated group elements, matched to a closed-form family."""

    geometry_of_limit: str
    family: str
    formula: str
    parameters: dict
    discrete_parameters: tuple
    converged: bool
    diverged: bool
    fit_residual: float
    differences: np.ndarray
    s_schedule: tuple
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "geometry_of_limit": self.geometry_of_limit,
            "family": self.family,
            "formula": self.formula,
            "parameters": self.parameters,
            "discrete_parameters": list(self.discrete_parameters),
            "converged": self.converged,
            "diverged": self.diverged,
            "fit_residual": self.fit_residual,
            "differences": [float(d) for d in self.differences],
            "s_schedule": [float(s) for s in self.s_schedule],
            "notes": list(self.notes),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def limit_action(kind, flow, element_schedule: Callable, s_schedule, case=None, points=None,
                 tol: float = 1e-3, escape_radius: float = 1e3, n_points: int = 20,
                 seed: int = 42) -> LimitActionFamily:
    """Follow ``phi_s^-1 o gamma(s) o phi_s`` along ``s_schedule`` and fit the limit family.

    Parameters
    ----------
    element_schedule : callable
        ``s -> GroupElement`` (or parameter triple).
    s_schedule : sequence of float
        Moving toward the limit of the family's direction.
    tol : float
        Bound on the last change of the sampled images and on the fit residual.
        Integer schedules such as ``floor(u s^(1/3))`` converge only like the
        rounding step, so this is looser than the metric limits.
    escape_radius : float
        A schedule whose images move some point further than this is reported
        as diverged.
    """
    kind, flow = GeometryKind.parse(kind), FlowKind.parse(flow)
    scaling, direction, fam, lc = limit_setup(kind, flow, case)
    if points is None:
        points = sample_points(REFERENCES[lc.reference].chart, n_points, seed)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    s_arr = np.asarray(s_schedule, dtype=float)
    notes = []
    images = []
    for s in s_arr:
        g = element_schedule(s)
        images.append(np.array([conjugated_action(kind, flow, scaling, g, s, p) for p in points]))
    images = np.array(images)
    disp = np.abs(images - points[None]).max(axis=(1, 2))
    diffs = np.abs(np.diff(images, axis=0)).max(axis=(1, 2))
    diverged = bool(not np.all(np.isfinite(images)) or disp[-1] > escape_radius)
    if diverged:
        notes.append(f"images leave every ball: displacement {disp[-1]:.3g} at s={s_arr[-1]:.3g}")
        return LimitActionFamily(fam.geometry_of_limit, fam.name, fam.formula, {}, fam.discrete, False, True,
                                 math.inf, diffs, tuple(s_arr), notes)
    g_last = element_schedule(s_arr[-1])

    def limit_map(p):
        return conjugated_action(kind, flow, scaling, g_last, s_arr[-1], p)

    params, res = _fit_family(fam, points, images[-1], limit_map)
    converged = bool(diffs[-1] < tol and res < tol)
    if diffs[-1] >= tol:
        notes.append(f"last change {diffs[-1]:.3g} is not below {tol:g}")
    if res >= tol:
        notes.append(f"family fit residual {res:.3g} is not below {tol:g}")
    return LimitActionFamily(fam.geometry_of_limit, fam.name, fam.formula, params, fam.discrete, converged,
                             False, res, diffs, tuple(s_arr), notes)


# -- lattices and collapse -----------------------------------------------------


@dataclass(frozen=True)
class Lattice:
    """Generators of a cocompact discrete subgroup."""

    kind: GeometryKind
    generators: tuple
    name: str = "custom"
    illustrative: bool = False
    description: str = ""

    def __post_init__(self):
        kind = GeometryKind.parse(self.kind)
        gens = tuple(_element(kind, g) for g in self.generators)
        if not gens:
            raise ValueError("a lattice needs at least one generator")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "generators", gens)

    @classmethod
    def from_json(cls, kind, text, name="custom") -> "Lattice":
        return cls(kind, tuple(tuple(g) for g in json.loads(text)), name)

    def to_json(self) -> str:
        return json.dumps([list(g.params) for g in self.generators])


def _sol_lattice() -> Lattice:
    # Z^2 in the eigen-coordinates of [[2, 1], [1, 1]]; conjugation by
    # (0, 0, log lam) acts on translations by diag(1/lam, lam), i.e. by the matrix
    lam = (3.0 + math.sqrt(5.0)) / 2.0
    w_minus = np.array([1.0, 1.0 / lam - 2.0])
    w_plus = np.array([1.0, lam - 2.0])
    t1 = (w_minus[0], w_plus[0], 0.0)
    t2 = (w_minus[1], w_plus[1], 0.0)
    return Lattice("sol", (t1, t2, (0.0, 0.0, math.log(lam))), "sol-anosov",
                   description="translations Z^2 twisted by [[2,1],[1,1]], plus (0, 0, log lambda)")


def _sl2_lattice() -> Lattice:
    # genus-2 surface group: the regular octagon side pairings in the disk,
    # conjugated to the upper half plane so that the first has the imaginary
    # axis as its axis; lifted to the cover, together with the central (0, 1, 2 pi)
    al = 1.0 + math.sqrt(2.0)
    be = math.sqrt(al * al - 1.0)
    A0 = np.array([[al, be], [be, al]], dtype=complex)
    K = np.array([[1j, 1j], [-1.0, 1.0]])
    Kinv = np.linalg.inv(K)
    gens = []
    for k in range(4):
        ph = np.exp(1j * k * math.pi / 8)
        R = np.diag([ph, 1 / ph])
        A = K @ (R @ A0 @ np.linalg.inv(R)) @ Kinv
        A = A / np.sqrt(np.linalg.det(A))
        if np.max(np.abs(A.imag)) > 1e-9 * np.max(np.abs(A)):
            A = A / 1j
        M = A.real
        x, y, th = phi_chart(M / math.sqrt(np.linalg.det(M)))
        gens.append((x, y, th if th <= math.pi else th - TWO_PI))
    gens.append((0.0, 1.0, TWO_PI))
    return Lattice("sl2tilde", tuple(gens), "sl2-genus2", illustrative=True,
                   description="lift of a genus-2 Fuchsian group (regular octagon) plus the center; illustrative")


STANDARD_LATTICES = {
    GeometryKind.NIL: Lattice("nil", ((1, 0, 0), (0, 1, 0), (0, 0, 1)), "nil-integer",
                              description="integer Heisenberg lattice"),
    GeometryKind.SOL: _sol_lattice(),
    GeometryKind.SL2TILDE: _sl2_lattice(),
    GeometryKind.ISOME2TILDE: Lattice("isome2tilde", ((1, 0, 0), (0, 1, 0), (0, 0, TWO_PI)), "e2-translations",
                                      description="Z^2 translations and the full turn"),
}


def standard_lattice(kind) -> Lattice:
    return STANDARD_LATTICES[GeometryKind.parse(kind)]


def _ball_points(kind, radius, n, seed):
    kind = GeometryKind.parse(kind)
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(n, 3))
    d *= (radius * rng.uniform(0, 1, n) ** (1 / 3) / np.linalg.norm(d, axis=1))[:, None]
    base = np.array(identity(kind).params)
    pts = base + d
    if kind is GeometryKind.SL2TILDE:
        pts = pts[pts[:, 1] > 0.1]
    return pts


def min_displacement(lattice: Lattice, radius: float = 10.0, n: int = 2000, seed: int = 42) -> float:
    """Smallest ``|g p - p|`` over generators ``g`` and sampled ``p`` in a ball around the base point."""
    pts = _ball_points(lattice.kind, radius, n, seed)
    return float(min(np.linalg.norm(act(lattice.kind, g, p) - p) for g in lattice.generators for p in pts))


@dataclass
class GeneratorFate:
    """How one lattice generator behaves under the conjugation.

    ``status`` is ``"continuous"`` (its conjugate tends to the identity, so its
    powers fill a line), ``"discrete"`` (the conjugate has a nontrivial limit)
    or ``"escapes"`` (the conjugate moves the base point out of every ball).
    """

    generator: tuple
    status: str
    displacements: np.ndarray
    direction: np.ndarray | None
    limit_parameters: dict | None

    def to_dict(self) -> dict:
        return {
            "generator": list(self.generator),
            "status": self.status,
            "displacements": [float(d) for d in self.displacements],
            "direction": None if self.direction is None else [float(v) for v in self.direction],
            "limit_parameters": self.limit_parameters,
        }


@dataclass
class CollapseReport:
    """Collapse verdict for a compact quotient under a rescaled limit."""

    geometry: GeometryKind
    flow: FlowKind
    case: str | None
    collapses: bool
    orbit_space_dimension: int
    stays_compact: bool
    limit_family: str
    continuous_parameters: int
    generators: list
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.collapses != (self.orbit_space_dimension < 3):
            raise ValueError("collapses must agree with orbit_space_dimension < 3")

    def table_entries(self) -> tuple:
        """``("Yes (d)" or "No", "Yes" or "No")`` as in the summary tables."""
        col = f"Yes ({self.orbit_space_dimension})" if self.collapses else "No"
        return col, "Yes" if self.stays_compact else "No"

    def to_dict(self) -> dict:
        col, comp = self.table_entries()
        return {
            "geometry": self.geometry.value,
            "flow": self.flow.value,
            "case": self.case,
            "collapses": self.collapses,
            "orbit_space_dimension": self.orbit_space_dimension,
            "stays_compact": self.stays_compact,
            "collapsing_limit": col,
            "compact_limit": comp,
            "limit_family": self.limit_family,
            "continuous_parameters": self.continuous_parameters,
            "generators": [g.to_dict() for g in self.generators],
            "notes": list(self.notes),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _default_action_schedule(direction: Direction) -> np.ndarray:
    # far enough that 2 pi s^(-1/12) (the slowest continuous direction) is < 1e-3
    if direction is Direction.FORWARD:
        return 10.0 ** np.arange(0, 61, 4)
    return 10.0 ** -np.arange(0, 31, 2)


def collapse_analysis(kind, flow, lattice: Lattice | None = None, case=None, s_schedule=None,
                      radius: float = 10.0, dense_step: float = 1e-3) -> CollapseReport:
    """Decide collapse and compactness of the rescaled limit of a compact quotient.

    Each generator is conjugated along the schedule and its displacement of
    the base point tracked. A generator whose displacement falls below
    ``dense_step`` is continuous: its powers reach a ``dense_step``-dense set
    of a one-parameter limit subgroup. One whose displacement exceeds
    ``radius`` escapes; the rest keep a nontrivial discrete limit. The orbit
    space dimension is three minus the rank of the directions in which the
    continuous generators move the base point, and the limit stays compact
    when no generator escapes.
    """
    kind, flow = GeometryKind.parse(kind), FlowKind.parse(flow)
    scaling, direction, fam, lc = limit_setup(kind, flow, case)
    lattice = lattice or standard_lattice(kind)
    if lattice.kind is not kind:
        raise ValueError("lattice and geometry differ")
    notes = []
    md = min_displacement(lattice, radius)
    if not md > 1e-3:
        notes.append(f"generators move some point of the radius-{radius:g} ball by only {md:.3g}; "
                     "the lattice may not act properly discontinuously")
    s_arr = np.asarray(_default_action_schedule(direction) if s_schedule is None else s_schedule, dtype=float)
    p0 = np.array(fam.base_point)
    fates = []
    dirs = []
    for g in lattice.generators:
        imgs = np.array([conjugated_action(kind, flow, scaling, g, s, p0) for s in s_arr])
        disp = np.linalg.norm(imgs - p0, axis=1)
        if disp[-1] > radius and disp[-1] > disp[0]:
            status, dvec, params = "escapes", None, None
        elif disp[-1] < dense_step and disp[-1] < disp[0]:
            status = "continuous"
            dvec = (imgs[-1] - p0) / disp[-1]
            dirs.append(dvec)
            params = None
        else:
            status, dvec = "discrete", None
            lim = lambda p, g=g: conjugated_action(kind, flow, scaling, g, s_arr[-1], p)
            pts = sample_points(REFERENCES[lc.reference].chart, 8, 42)
            params, _ = _fit_family(fam, pts, np.array([lim(p) for p in pts]), lim)
            if abs(disp[-1] - disp[-2]) > 1e-6 * max(1.0, disp[-1]):
                notes.append(f"generator {g.params} has not settled: displacement still changing")
        fates.append(GeneratorFate(g.params, status, disp, dvec, params))
    rank = int(np.linalg.matrix_rank(np.array(dirs), tol=1e-6)) if dirs else 0
    dim = 3 - rank
    compact = not any(f.status == "escapes" for f in fates)
    if not compact:
        notes.append("some generators leave every ball, so their directions are not closed up in the limit")
    return CollapseReport(kind, flow, _case_key(kind, flow, case)[2], dim < 3, dim, compact, fam.name, rank,
                          fates, notes)
