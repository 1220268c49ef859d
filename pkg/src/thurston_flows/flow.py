"""
Ricci flow and cross curvature flow as ODEs on the coefficients (A, B, C).

Both flows keep a frame-diagonal metric diagonal, so the state is three
positive numbers. Integration runs on ``log(A, B, C)``: the coefficients span
many orders of magnitude, and an absolute error in the logarithm is a relative
error in the coefficient.

Sign conventions
----------------
``dg/dt = -2 v`` with ``v = Rc`` for Ricci flow and ``v = h`` for the negative
cross curvature flow (``xcf-``). The positive flow ``xcf+`` flips the sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import RK45, Radau

from .curvature import sectional_arrays
from .errors import IncompleteIntegrationError, NoClosedFormError, OutOfDomainError
from .geometry import DiagonalMetric, GeometryKind

__all__ = [
    "FlowKind",
    "IntegratorConfig",
    "Trajectory",
    "AsymptoticTerm",
    "AsymptoticSpec",
    "rhs",
    "log_rhs",
    "curvature_rates",
    "integrate",
    "closed_form",
    "asymptotic_reference",
    "estimate_blowup_time",
]


class FlowKind(str, Enum):
    """Which flow to run. ``p`` is the scaling exponent of ``v``."""

    RF = "rf"
    XCF_MINUS = "xcf-"
    XCF_PLUS = "xcf+"

    @property
    def p(self) -> int:
        return 0 if self is FlowKind.RF else -1

    @property
    def sign(self) -> int:
        return 1 if self is FlowKind.XCF_PLUS else -1

    @classmethod
    def parse(cls, name) -> "FlowKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        aliases = {"ricci": "rf", "xcf": "xcf-", "-xcf": "xcf-", "+xcf": "xcf+", "xcfminus": "xcf-",
                   "xcfplus": "xcf+"}
        key = aliases.get(key, key)
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown flow {name!r}")


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and limits for :func:`integrate`.

    ``rel_tol``/``abs_tol`` act on the log-coefficients. The run is declared a
    blow-up when any coefficient or its reciprocal exceeds
    ``blowup_threshold``, or when the step size collapses against the spacing
    of floating-point times.

    ``method`` is ``"rk45"`` (Dormand-Prince 5(4)), ``"radau"`` (Radau IIA,
    order 5, for stiff problems) or ``"auto"``. Ricci flow on SL2 and Isom E2
    has a difference mode decaying at a constant rate while the solution
    lives on ever longer time scales, so ``"auto"`` uses Radau there.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    blowup_threshold: float = 1e12
    max_steps: int = 200_000
    first_step: float | None = None
    method: str = "auto"

    def __post_init__(self):
        if self.method not in ("auto", "rk45", "radau"):
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_step > 0):
            raise ValueError("tolerances and max_step must be positive")
        if self.blowup_threshold <= 1 or self.max_steps <= 0:
            raise ValueError("blowup_threshold must exceed 1 and max_steps be positive")


# -- right-hand sides ----------------------------------------------------------


def log_rhs(flow, kind, A, B, C):
    """``d/dt log(A, B, C)``; inputs may be floats or arrays."""
    k23, k31, k12 = sectional_arrays(kind, A, B, C)
    if flow is FlowKind.RF:
        r = (-2 * (k12 + k31), -2 * (k12 + k23), -2 * (k23 + k31))
    else:
        s = 2 * flow.sign
        r = (s * k12 * k31, s * k12 * k23, s * k23 * k31)
    return r


def rhs(flow, kind, g: DiagonalMetric) -> np.ndarray:
    """``(dA/dt, dB/dt, dC/dt)`` for the chosen flow.

    Examples
    --------
    >>> rhs("rf", "nil", DiagonalMetric(1, 1, 1))
    array([-1.,  1.,  1.])
    """
    flow = FlowKind.parse(flow)
    kind = GeometryKind.parse(kind)
    kind.require_flowable()
    r = log_rhs(flow, kind, g.A, g.B, g.C)
    return np.array([g.A * r[0], g.B * r[1], g.C * r[2]])


def curvature_rates(flow, kind, coeffs) -> np.ndarray:
    """Time derivatives of ``(K23, K31, K12)`` along the flow.

    Uses complex-step differentiation of the explicit curvature formulas,
    which is exact to rounding because they are rational in ``A, B, C``.
    """
    flow = FlowKind.parse(flow)
    kind = GeometryKind.parse(kind)
    a = np.asarray(coeffs, dtype=float)
    r = np.array(log_rhs(flow, kind, *a))
    out = np.zeros(3)
    h = 1e-30
    for i in range(3):
        z = a.astype(complex)
        z[i] += 1j * h * a[i]  # derivative w.r.t. log of coefficient i
        dk = np.imag(np.array(sectional_arrays(kind, *z))) / h
        out += dk * r[i]
    return out


# -- trajectories --------------------------------------------------------------


@dataclass
class Trajectory:
    """Accepted steps of a flow solution plus dense output.

    Attributes
    ----------
    flow, kind
        What was integrated.
    t : ndarray, shape (N,)
        Strictly increasing sample times.
    coeffs : ndarray, shape (N, 3)
        ``(A, B, C)`` at each sample.
    status : {"horizon", "blowup"}
    t_end : float
        Requested horizon.
    T0 : float or None
        Estimated singular time when ``status == "blowup"``.
    T0_residual : float or None
        RMS residual of the fit that produced ``T0``.
    """

    flow: FlowKind
    kind: GeometryKind
    t: np.ndarray
    coeffs: np.ndarray
    status: str
    t_end: float
    T0: float | None = None
    T0_residual: float | None = None
    _dense: list = field(default_factory=list, repr=False)

    @property
    def blew_up(self) -> bool:
        return self.status == "blowup"

    @property
    def g0(self) -> DiagonalMetric:
        return DiagonalMetric.from_array(self.coeffs[0])

    @property
    def final(self) -> DiagonalMetric:
        return DiagonalMetric.from_array(self.coeffs[-1])

    def metrics(self):
        return [DiagonalMetric.from_array(c) for c in self.coeffs]

    def sectional_history(self) -> np.ndarray:
        """``(N, 3)`` array of ``(K23, K31, K12)`` at the samples."""
        A, B, C = self.coeffs.T
        return np.column_stack(sectional_arrays(self.kind, A, B, C))

    def curvature_norm_history(self) -> np.ndarray:
        return np.abs(self.sectional_history()).max(axis=1)

    def at(self, times) -> np.ndarray:
        """Dense-output coefficients at arbitrary times inside the samples.

        Returns an array of shape ``(len(times), 3)``.
        """
        times = np.atleast_1d(np.asarray(times, dtype=float))
        lo, hi = self.t[0], self.t[-1]
        if np.any(times < lo) or np.any(times > hi):
            bad = times[(times < lo) | (times > hi)]
            raise OutOfDomainError(f"times {bad[:3]} outside [{lo}, {hi}]")
        idx = np.clip(np.searchsorted(self.t, times, side="right") - 1, 0, len(self._dense) - 1)
        out = np.empty((len(times), 3))
        for j, (tt, i) in enumerate(zip(times, idx)):
            if tt == self.t[i]:
                out[j] = self.coeffs[i]
            elif tt == self.t[i + 1]:
                out[j] = self.coeffs[i + 1]
            else:
                out[j] = np.exp(self._dense[i](tt))
        return out

    def metric_at(self, t: float) -> DiagonalMetric:
        return DiagonalMetric.from_array(self.at([t])[0])


def estimate_blowup_time(traj_t, coeffs, flow, kind, window_decades=1.0):
    """Estimate the singular time from the growth of the curvature norm.

    If ``M ~ c (T0 - t)^(-beta)`` then ``1 / (d log M / dt) = (T0 - t) / beta``
    is linear in ``t``. The rate is computed exactly from the ODE, a line is
    fitted over the last ``window_decades`` of ``T0 - t`` and the intercept
    gives ``T0``.

    Returns
    -------
    T0, beta, residual : float
    """
    A, B, C = coeffs.T
    K = np.column_stack(sectional_arrays(kind, A, B, C))
    m_idx = np.abs(K).argmax(axis=1)
    q = np.empty(len(traj_t))
    for i, c in enumerate(coeffs):
        rates = curvature_rates(flow, kind, c)
        q[i] = rates[m_idx[i]] / K[i, m_idx[i]]
    ok = q > 0
    t = np.asarray(traj_t, dtype=float)[ok]
    inv = 1.0 / q[ok]
    if len(t) < 8:
        raise ValueError("not enough growing samples to estimate the blow-up time")
    t_ref = t[-1]
    tau = t - t_ref  # centred regressor keeps the fit well conditioned

    def fit(sel):
        b, a = np.polyfit(tau[sel], inv[sel], 1)
        return t_ref - a / b, -1.0 / b

    sel = np.arange(len(t) - 8, len(t))
    T0, beta = fit(sel)
    for _ in range(3):
        sigma = T0 - t
        s_last = max(sigma[-1], np.finfo(float).eps * max(abs(T0), 1.0))
        cand = np.nonzero((sigma <= s_last * 10**window_decades) & (sigma > 0))[0]
        sel = cand if len(cand) >= 8 else np.arange(len(t) - 8, len(t))
        T0, beta = fit(sel)
    b, a = np.polyfit(tau[sel], inv[sel], 1)
    pred = a + b * tau[sel]
    resid = float(np.sqrt(np.mean(((inv[sel] - pred) / np.abs(pred)) ** 2)))
    return float(T0), float(beta), resid


_STIFF = {("sl2tilde", "rf"), ("isome2tilde", "rf")}


def integrate(flow, kind, g0: DiagonalMetric, t_end: float, cfg: IntegratorConfig | None = None,
              t0: float = 0.0) -> Trajectory:
    """Integrate the flow from ``g0`` until ``t_end`` or a blow-up.

    Parameters
    ----------
    flow : FlowKind or str
    kind : GeometryKind or str
    g0 : DiagonalMetric
    t_end : float
        Horizon; must exceed ``t0``.
    cfg : IntegratorConfig, optional

    Returns
    -------
    Trajectory

    Raises
    ------
    IncompleteIntegrationError
        If ``cfg.max_steps`` accepted steps do not reach ``t_end``.
    """
    flow = FlowKind.parse(flow)
    kind = GeometryKind.parse(kind)
    kind.require_flowable()
    cfg = cfg or IntegratorConfig()
    if not t_end > t0:
        raise ValueError("t_end must exceed the start time")

    def f(_t, y):
        e = np.exp(y)
        return np.array(log_rhs(flow, kind, e[0], e[1], e[2]))

    def jac(_t, y):
        # complex step: exact to rounding since the right-hand side is analytic
        J = np.empty((3, 3))
        for i in range(3):
            z = y.astype(complex)
            z[i] += 1e-30j
            e = np.exp(z)
            J[:, i] = np.imag(np.array(log_rhs(flow, kind, e[0], e[1], e[2]))) / 1e-30
        return J

    y0 = np.log(g0.as_array())
    method = cfg.method
    if method == "auto":
        method = "radau" if (kind.value, flow.value) in _STIFF else "rk45"
    kw = dict(rtol=cfg.rel_tol, atol=cfg.abs_tol, max_step=cfg.max_step)
    if cfg.first_step is not None:
        kw["first_step"] = cfg.first_step
    if method == "radau":
        kw["jac"] = jac
    solver = (RK45 if method == "rk45" else Radau)(f, t0, y0, t_end, **kw)
    ts, ys, dense = [t0], [y0.copy()], []
    log_thr = math.log(cfg.blowup_threshold)
    status = "horizon"
    steps = 0
    while solver.status == "running":
        solver.step()
        if solver.status == "failed":
            # step size collapsed against the floating-point spacing of t
            status = "blowup"
            break
        steps += 1
        ts.append(solver.t)
        ys.append(solver.y.copy())
        dense.append(solver.dense_output())
        if not np.all(np.isfinite(solver.y)) or np.abs(solver.y).max() > log_thr:
            status = "blowup"
            break
        if steps >= cfg.max_steps and solver.status == "running":
            partial = Trajectory(flow, kind, np.array(ts), np.exp(np.array(ys)), "incomplete",
                                 t_end, _dense=dense)
            raise IncompleteIntegrationError(
                f"max_steps={cfg.max_steps} reached at t={solver.t:.6g} < t_end={t_end:.6g}",
                partial=partial,
            )
    t_arr = np.array(ts)
    coeffs = np.exp(np.array(ys))
    traj = Trajectory(flow, kind, t_arr, coeffs, status, float(t_end), _dense=dense)
    if status == "blowup":
        try:
            T0, _beta, resid = estimate_blowup_time(t_arr, coeffs, flow, kind)
        except ValueError:
            # a coefficient crossed the threshold but curvature is not blowing up
            T0, resid = math.inf, math.nan
        # the singular time cannot precede the last time actually reached
        traj.T0 = max(T0, float(np.nextafter(t_arr[-1], np.inf)))
        traj.T0_residual = resid
    return traj


# -- closed forms and asymptotics ----------------------------------------------


def closed_form(kind, flow, g0: DiagonalMetric, t) -> DiagonalMetric:
    """Explicit solutions on Nil for Ricci flow and the negative XCF.

    Examples
    --------
    >>> round(closed_form("nil", "rf", DiagonalMetric(2, 1, 1), 1.0).A, 6)  # 2 * 7**(-1/3)
    1.045516
    """
    kind = GeometryKind.parse(kind)
    flow = FlowKind.parse(flow)
    if kind is not GeometryKind.NIL or flow is FlowKind.XCF_PLUS:
        raise NoClosedFormError(f"no closed form for {kind.value}/{flow.value}")
    if t < 0:
        raise ValueError("t must be nonnegative")
    A0, B0, C0 = g0
    if flow is FlowKind.RF:
        u = 3.0 * A0 / (B0 * C0) * t + 1.0
        return DiagonalMetric(A0 * u ** (-1 / 3), B0 * u ** (1 / 3), C0 * u ** (1 / 3))
    R0 = -A0 / (2.0 * B0 * C0)
    u = 1.0 + 7.0 * R0 * R0 * t
    return DiagonalMetric(A0 * u ** (-1 / 14), B0 * u ** (3 / 14), C0 * u ** (3 / 14))


@dataclass(frozen=True)
class AsymptoticTerm:
    """One asymptotic statement ``quantity ~ coefficient * variable^exponent``.

    ``quantity`` is ``"A"``, ``"B"``, ``"C"`` or a difference such as
    ``"A-C"``. ``variable`` is ``"t"`` or ``"T0-t"``. When ``model`` is
    ``"exponential"`` the statement is ``~ E exp(-rate t)`` instead.
    ``coefficient`` is ``None`` when it must be fitted; ``coefficient_expr``
    records a known dependence on other fitted constants.
    """

    quantity: str
    exponent: float
    variable: str = "t"
    coefficient: float | None = None
    coefficient_expr: str | None = None
    model: str = "power"


@dataclass(frozen=True)
class AsymptoticSpec:
    kind: GeometryKind
    flow: FlowKind
    singular: bool
    terms: tuple
    case: str | None = None

    def term(self, quantity: str) -> AsymptoticTerm:
        for t in self.terms:
            if t.quantity == quantity:
                return t
        raise KeyError(quantity)


def _T(q, e, **kw):
    return AsymptoticTerm(q, e, **kw)


_ASYMPTOTICS = {
    ("nil", "rf", None): (False, (_T("A", -1 / 3), _T("B", 1 / 3), _T("C", 1 / 3))),
    ("nil", "xcf-", None): (False, (_T("A", -1 / 14), _T("B", 3 / 14), _T("C", 3 / 14))),
    ("sol", "rf", None): (
        False,
        (_T("A", 0.0, coefficient_expr="sqrt(A0*C0)"), _T("C", 0.0, coefficient_expr="sqrt(A0*C0)"),
         _T("B", 1.0, coefficient=4.0), _T("A-C", -1.0)),
    ),
    ("sol", "xcf-", None): (
        True,
        (_T("B", 0.5, variable="T0-t", coefficient=2.0), _T("A", -0.5, variable="T0-t"),
         _T("C", -0.5, variable="T0-t"), _T("A-C", 0.5, variable="T0-t")),
    ),
    ("sl2tilde", "rf", None): (
        False,
        (_T("A", 0.0), _T("B", 1.0, coefficient=2.0), _T("C", 1.0, coefficient=2.0),
         _T("B-C", 0.0, model="exponential")),
    ),
    ("sl2tilde", "xcf-", "b=c"): (
        False,
        (_T("A", 0.0, coefficient_expr="A_inf"),
         _T("B", 1 / 3, coefficient_expr="(3*A_inf/2)**(1/3)"),
         _T("C", 1 / 3, coefficient_expr="(3*A_inf/2)**(1/3)")),
    ),
    ("sl2tilde", "xcf-", "b!=c"): (
        True,
        (_T("A", -0.5, variable="T0-t"), _T("B", -0.5, variable="T0-t"),
         _T("C", 0.5, variable="T0-t", coefficient=2.0)),
    ),
    ("isome2tilde", "rf", None): (
        False,
        (_T("A", 0.0, coefficient_expr="sqrt(A0*B0)"), _T("B", 0.0, coefficient_expr="sqrt(A0*B0)"),
         _T("C", 0.0, coefficient_expr="C0/2*(sqrt(A0/B0)+sqrt(B0/A0))"),
         _T("A-B", 0.0, model="exponential", coefficient_expr="rate=4/E2")),
    ),
    ("isome2tilde", "xcf-", None): (
        False,
        (_T("A", 0.0), _T("B", 0.0), _T("C", 1 / 3), _T("A-B", -1 / 6)),
    ),
}


def asymptotic_reference(kind, flow, case: str | None = None) -> AsymptoticSpec:
    """Large-time (or near-singularity) exponents of the coefficients.

    Parameters
    ----------
    case : {"b=c", "b!=c"}, optional
        Required for SL2 under the negative XCF, whose behaviour depends on
        whether the initial ``B`` and ``C`` agree.
    """
    kind = GeometryKind.parse(kind)
    flow = FlowKind.parse(flow)
    key = (kind.value, flow.value, case)
    if kind is GeometryKind.SL2TILDE and flow is FlowKind.XCF_MINUS and case is None:
        raise ValueError("sl2tilde/xcf- needs case='b=c' or case='b!=c'")
    if key not in _ASYMPTOTICS:
        raise NoClosedFormError(f"no asymptotic statement for {kind.value}/{flow.value}")
    singular, terms = _ASYMPTOTICS[key]
    return AsymptoticSpec(kind, flow, singular, terms, case)
