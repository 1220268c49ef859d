"""
Singularity classification by the growth of the curvature norm.

``M(t)`` is the largest absolute sectional curvature of the frame planes. In
dimension three a frame-diagonal curvature operator has the frame-plane
curvatures as its eigenvalues, so this is the largest curvature anywhere, and
by homogeneity it does not depend on the point.

With ``e = 1 / (1 - p)`` the scaled quantity is ``(T0 - t)^e M`` for a finite
singular time and ``t^e M`` for an immortal solution. A power law is fitted to
it over the last two decades, and its exponent decides boundedness.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .curvature import sectional_arrays
from .errors import FitDomainError, InsufficientWindowError
from .flow import FlowKind, IntegratorConfig, Trajectory, integrate
from .geometry import DiagonalMetric, GeometryKind

__all__ = [
    "AsymptoticFit",
    "SingularityReport",
    "curvature_norm",
    "curvature_norm_arrays",
    "fit_power_law",
    "fit_exponential",
    "classify",
    "run_and_classify",
    "default_horizon",
    "BOUND_TOL",
]

BOUND_TOL = 0.05
MIN_SAMPLES = 16
# Finite-time windows stop where T0 - t is still resolvable against T0 in
# double precision.
_SIGMA_FLOOR = 1e-8


@dataclass(frozen=True)
class AsymptoticFit:
    """Result of a least-squares fit.

    For ``model == "power"`` the fit is ``value ~ coefficient * x^exponent``
    in log-log coordinates. For ``model == "exponential"`` it is
    ``value ~ coefficient * exp(exponent * x)``, fitted as a line in
    ``(x, log value)``. ``residual`` is the RMS deviation in ``log value``.
    """

    exponent: float
    coefficient: float
    residual: float
    window: tuple
    model: str = "power"
    n: int = 0

    def __post_init__(self):
        if not self.window[0] < self.window[1]:
            raise ValueError("fit window must be nonempty")
        if not self.residual >= 0:
            raise ValueError("residual must be nonnegative")


def curvature_norm_arrays(kind, A, B, C):
    k = sectional_arrays(kind, A, B, C)
    return np.max(np.abs(np.array(k)), axis=0)


def curvature_norm(kind, g: DiagonalMetric) -> float:
    """``max(|K23|, |K31|, |K12|)``.

    Examples
    --------
    >>> curvature_norm("nil", DiagonalMetric(1, 1, 1))
    0.75
    """
    return float(curvature_norm_arrays(kind, g.A, g.B, g.C))


def _select(x, y, window):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is not None:
        lo, hi = window
        keep = (x >= lo) & (x <= hi)
        x, y = x[keep], y[keep]
    if len(x) < MIN_SAMPLES:
        raise InsufficientWindowError(f"{len(x)} samples in window, need at least {MIN_SAMPLES}")
    return x, y


def fit_power_law(t, values, window=None) -> AsymptoticFit:
    """Fit ``values ~ c * t^k`` by least squares on ``(log t, log values)``.

    Parameters
    ----------
    t, values : array_like
    window : (lo, hi), optional
        Only samples with ``lo <= t <= hi`` are used.

    Examples
    --------
    >>> t = np.geomspace(1, 100, 20)
    >>> f = fit_power_law(t, 5 * t**2)
    >>> round(f.exponent, 12), round(f.coefficient, 12)
    (2.0, 5.0)
    """
    x, y = _select(t, values, window)
    if np.any(x <= 0) or np.any(y <= 0):
        raise FitDomainError("power-law fits need positive abscissae and values")
    lx, ly = np.log(x), np.log(y)
    slope, icpt = np.polyfit(lx, ly, 1)
    res = float(np.sqrt(np.mean((ly - (icpt + slope * lx)) ** 2)))
    return AsymptoticFit(float(slope), float(np.exp(icpt)), res, (float(x.min()), float(x.max())),
                         "power", len(x))


def fit_exponential(t, values, window=None) -> AsymptoticFit:
    """Fit ``values ~ c * exp(k t)`` by least squares on ``(t, log values)``."""
    x, y = _select(t, values, window)
    if np.any(y <= 0):
        raise FitDomainError("exponential fits need positive values")
    ly = np.log(y)
    slope, icpt = np.polyfit(x, ly, 1)
    res = float(np.sqrt(np.mean((ly - (icpt + slope * x)) ** 2)))
    return AsymptoticFit(float(slope), float(np.exp(icpt)), res, (float(x.min()), float(x.max())),
                         "exponential", len(x))


@dataclass
class SingularityReport:
    """Outcome of :func:`classify`.

    Attributes
    ----------
    singularity_type : {"I", "IIa", "IIb", "III"}
    p : int
    T0 : float or None
        Present exactly for the finite-time types I and IIa.
    m_history : ndarray, shape (N, 2)
        Columns ``t`` and ``M(t)`` at the accepted steps.
    scaled_fit : AsymptoticFit
        Fit of the scaled curvature against ``T0 - t`` or ``t``.
    notes : list of str
    """

    geometry: GeometryKind
    flow: FlowKind
    singularity_type: str
    p: int
    T0: float | None
    m_history: np.ndarray
    scaled_fit: AsymptoticFit
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if (self.T0 is not None) != (self.singularity_type in ("I", "IIa")):
            raise ValueError("T0 is reported exactly for types I and IIa")

    @property
    def exponent(self) -> float:
        return self.scaled_fit.exponent

    @property
    def residual(self) -> float:
        return self.scaled_fit.residual

    def to_dict(self) -> dict:
        return {
            "geometry": self.geometry.value,
            "flow": self.flow.value,
            "type": self.singularity_type,
            "p": self.p,
            "T0": self.T0,
            "exponent": self.exponent,
            "residual": self.residual,
            "model": self.scaled_fit.model,
            "window": list(self.scaled_fit.window),
            "notes": list(self.notes),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _type_from_exponent(finite: bool, fit: AsymptoticFit, tol: float) -> str:
    k = fit.exponent
    if fit.model == "zero":
        bounded = True
    elif fit.model == "exponential":
        # exponential decay beats any power of t; growth is unbounded
        bounded = k < 0
    elif finite:
        # (T0 - t)^e M ~ sigma^k stays bounded as sigma -> 0 iff k >= 0
        bounded = k >= -tol
    else:
        bounded = k <= tol
    if finite:
        return "I" if bounded else "IIa"
    return "III" if bounded else "IIb"


def _finite_fit(t, M, T0, e, t_last):
    sigma = T0 - t
    s_lo = max(T0 - t_last, _SIGMA_FLOOR * max(abs(T0), 1.0))
    win = (s_lo, 100.0 * s_lo)
    keep = sigma > 0
    return fit_power_law(sigma[keep], sigma[keep] ** e * M[keep], win)


def _exponential_tail(traj: Trajectory, M, n: int = 32):
    # For a decaying M the last two decades are taken in M itself, stopping
    # where M falls below 1e-10 of its peak: past that point the coefficient
    # differences that produce M are mostly rounding.
    if not np.any(M > 0):
        return None
    floor = max(M[-1], 1e-10 * M.max())
    above = np.nonzero(M >= floor)[0]
    i_hi = above[-1]
    t_hi = traj.t[i_hi]
    below = np.nonzero((M > 100 * floor) & (traj.t < t_hi))[0]
    if len(below) == 0 or t_hi <= traj.t[below[-1]]:
        return None
    ts = np.linspace(traj.t[below[-1]], t_hi, n)
    A, B, C = traj.at(ts).T
    Ms = curvature_norm_arrays(traj.kind, A, B, C)
    if np.any(Ms <= 0):
        return None
    return fit_exponential(ts, Ms)


def classify(traj: Trajectory, tol: float = BOUND_TOL, residual_cap: float = 0.02) -> SingularityReport:
    """Assign Hamilton's singularity type, generalized by the exponent ``p``.

    The scaled curvature is fitted over the last two decades of ``t`` (immortal
    solutions) or of ``T0 - t`` (finite-time blow-up). For finite-time runs
    the fit is repeated with ``T0`` shifted by its uncertainty in both
    directions, and a disagreement is recorded in the notes.

    Immortal solutions whose scaled curvature decays faster than any power
    are recognised by a log-linear fit in ``t``; this is used when the
    power-law residual exceeds ``residual_cap`` and the exponential model
    fits better.

    Raises
    ------
    InsufficientWindowError
        If fewer than 16 accepted steps fall inside the fit window.
    """
    flow, kind = traj.flow, traj.kind
    e = 1.0 / (1 - flow.p)
    t = np.asarray(traj.t, dtype=float)
    M = traj.curvature_norm_history()
    hist = np.column_stack([t, M])
    notes = []
    if traj.blew_up:
        T0 = traj.T0
        if T0 is None or not math.isfinite(T0):
            raise InsufficientWindowError("blow-up trajectory without a finite T0 estimate")
        fit = _finite_fit(t, M, T0, e, t[-1])
        stype = _type_from_exponent(True, fit, tol)
        s_lo = fit.window[0]
        res = traj.T0_residual if traj.T0_residual is not None and math.isfinite(traj.T0_residual) else 0.0
        dT = max(res * s_lo, 64 * np.spacing(T0))
        for shift in (-dT, dT):
            alt = _type_from_exponent(True, _finite_fit(t, M, T0 + shift, e, t[-1]), tol)
            if alt != stype:
                notes.append(f"type changes to {alt} when T0 is shifted by {shift:+.3g}")
        if kind is GeometryKind.SOL and flow is FlowKind.XCF_MINUS:
            notes.append(
                "the blow-up rate 1/sqrt(T0 - t) gives a bounded scaled curvature, so this is "
                "Type I rather than IIa"
            )
        return SingularityReport(kind, flow, stype, flow.p, float(T0), hist, fit, notes)

    t_hi = t[-1]
    win = (t_hi / 100.0, t_hi)
    pos = t > 0
    fit = None
    if np.all(M[pos & (t >= win[0])] > 0):
        fit = fit_power_law(t[pos], t[pos] ** e * M[pos], win)
    if fit is None or fit.residual > residual_cap:
        alt = _exponential_tail(traj, M)
        if alt is not None and (fit is None or alt.residual < fit.residual):
            notes.append("scaled curvature decays exponentially; a power law does not fit")
            fit = alt
    if fit is None and not np.any(M[t >= win[0]] != 0):
        # flat for the whole window: the scaled curvature is identically zero
        notes.append("curvature vanishes identically in the fit window")
        n = int(np.count_nonzero(t >= win[0]))
        fit = AsymptoticFit(0.0, 0.0, 0.0, win, "zero", n)
    if fit is None:
        raise InsufficientWindowError("no usable fit of the scaled curvature")
    stype = _type_from_exponent(False, fit, tol)
    if fit.residual > residual_cap:
        notes.append(f"fit residual {fit.residual:.3g} exceeds {residual_cap}")
    return SingularityReport(kind, flow, stype, flow.p, None, hist, fit, notes)


# Horizons long enough for a clean two-decade window. Isom(E2) Ricci flow is
# stopped early because its curvature decays exponentially and reaches the
# rounding floor of the coefficient differences within t ~ 10.
_HORIZONS = {
    (GeometryKind.NIL, FlowKind.RF): 1e6,
    (GeometryKind.SOL, FlowKind.RF): 1e6,
    (GeometryKind.SL2TILDE, FlowKind.RF): 1e5,
    (GeometryKind.ISOME2TILDE, FlowKind.RF): 10.0,
    (GeometryKind.NIL, FlowKind.XCF_MINUS): 1e6,
    (GeometryKind.SOL, FlowKind.XCF_MINUS): 1e6,
    (GeometryKind.SL2TILDE, FlowKind.XCF_MINUS): 1e9,
    (GeometryKind.ISOME2TILDE, FlowKind.XCF_MINUS): 1e9,
}


def default_horizon(kind, flow) -> float:
    """Integration horizon used by :func:`run_and_classify` when none is given.

    Runs that blow up stop at the singularity regardless of the horizon.
    """
    key = (GeometryKind.parse(kind), FlowKind.parse(flow))
    return _HORIZONS.get(key, 1e6)


def run_and_classify(kind, flow, g0: DiagonalMetric, t_end: float | None = None,
                     cfg: IntegratorConfig | None = None, tol: float = BOUND_TOL) -> SingularityReport:
    """Integrate from ``g0`` and classify the result."""
    t_end = default_horizon(kind, flow) if t_end is None else t_end
    return classify(integrate(flow, kind, g0, t_end, cfg), tol)
