"""
Curvature of diagonal left-invariant metrics.

Two independent routes are provided. :func:`sectional` evaluates the explicit
per-geometry formulas, and :func:`sectional_generic` runs the Koszul formula on
an arbitrary bracket table. They should agree to rounding on every flowable
geometry, which is how the explicit formulas are checked.

All tensors are reported by their frame components, with ``g_ii`` taken to be
the metric coefficients ``(A, B, C)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DiagonalMetric, GeometryKind, StructureConstants, structure_constants

__all__ = [
    "SectionalCurvatures",
    "CurvatureTensors",
    "sectional",
    "sectional_arrays",
    "sectional_generic",
    "curvature_tensors",
    "adjugate",
]


@dataclass(frozen=True)
class SectionalCurvatures:
    """Sectional curvatures of the planes F2^F3, F3^F1 and F1^F2."""

    K23: float
    K31: float
    K12: float

    def as_array(self) -> np.ndarray:
        return np.array([self.K23, self.K31, self.K12])

    def __iter__(self):
        return iter((self.K23, self.K31, self.K12))


@dataclass(frozen=True)
class CurvatureTensors:
    """Frame-diagonal curvature data.

    Attributes
    ----------
    ricci_diag : ndarray
        ``Rc(F_i, F_i)``.
    scalar : float
        Scalar curvature.
    p_diag : ndarray
        ``P`` in orthonormal normalization; entry ``i`` is ``K(F_j ^ F_k)``.
    h_diag : ndarray
        Cross curvature tensor ``h(F_i, F_i)``.
    """

    ricci_diag: np.ndarray
    scalar: float
    p_diag: np.ndarray
    h_diag: np.ndarray


def sectional_arrays(kind, A, B, C):
    """Explicit sectional curvatures, vectorized over ``A, B, C``.

    Inputs may be floats, arrays or complex arrays (for complex-step
    differentiation); they are used as given.

    Returns
    -------
    (K23, K31, K12) : tuple of float or ndarray
    """
    kind = GeometryKind.parse(kind)
    kind.require_flowable()
    # Each formula is written so that swapping the two coefficients of a
    # symmetric pair swaps the outputs bitwise; this keeps the invariant sets
    # B = C (Nil, SL2), A = C (Sol) and A = B (Isom E2) exactly invariant
    # under integration.
    d = 4.0 * A * B * C
    if kind is GeometryKind.NIL:
        k = A * A / d
        return -3.0 * k, k, k
    if kind is GeometryKind.SOL:
        amc2 = (A - C) ** 2
        return (amc2 - 4 * (A * A)) / d, (A + C) ** 2 / d, (amc2 - 4 * (C * C)) / d
    if kind is GeometryKind.SL2TILDE:
        # grouped around B - C: the expanded numerators cancel terms of size
        # B^2 down to size A B, which costs accuracy once B >> A
        k23 = ((B - C) ** 2 - A * (3 * A + 2 * (B + C))) / d
        return k23, _sl2_side(A, B, C) / d, _sl2_side(A, C, B) / d
    return (B - A) * (B + 3 * A) / d, (A - B) * (A + 3 * B) / d, (A - B) ** 2 / d


def _sl2_side(A, X, Y):
    # K(F3^F1) numerator with (X, Y) = (B, C); K(F1^F2) with (X, Y) = (C, B)
    D = X - Y
    return (A - D) ** 2 - 4 * X * D


def _unwrap(v):
    return float(v) if np.ndim(v) == 0 else v


def sectional(kind, g: DiagonalMetric) -> SectionalCurvatures:
    """Sectional curvatures of the frame planes from the explicit formulas.

    Examples
    --------
    >>> sectional("nil", DiagonalMetric(1, 1, 1))
    SectionalCurvatures(K23=-0.75, K31=0.25, K12=0.25)
    """
    k = sectional_arrays(kind, g.A, g.B, g.C)
    return SectionalCurvatures(*(_unwrap(v) for v in k))


def _christoffel(c: np.ndarray, gd: np.ndarray) -> np.ndarray:
    # Koszul for an orthogonal invariant frame:
    # 2 g(D_i F_j, F_k) = g([F_i,F_j],F_k) - g([F_j,F_k],F_i) + g([F_k,F_i],F_j)
    t1 = c * gd[None, None, :]  # c_ij^k g_k
    t2 = np.einsum("jki,i->ijk", c, gd)  # c_jk^i g_i
    t3 = np.einsum("kij,j->ijk", c, gd)  # c_ki^j g_j
    return 0.5 * (t1 - t2 + t3) / gd[None, None, :]


def sectional_generic(sc: StructureConstants, g: DiagonalMetric) -> SectionalCurvatures:
    """Sectional curvatures from the bracket table alone.

    Uses the Levi-Civita connection of an invariant orthogonal frame with
    ``g(F_i, F_i) = (A, B, C)_i`` and
    ``K(X, Y) = g(R(X, Y)Y, X) / (|X|^2 |Y|^2)``.
    """
    c = np.asarray(sc.c, dtype=float)
    gd = np.array([g.A, g.B, g.C])
    G = _christoffel(c, gd)  # G[i, j, :] are the components of D_{F_i} F_j

    def K(i, j):
        # R(F_i,F_j)F_j = D_i D_j F_j - D_j D_i F_j - D_[F_i,F_j] F_j
        r = G[j, j] @ G[i] - G[i, j] @ G[j] - c[i, j] @ G[:, j, :]
        return r[i] * gd[i] / (gd[i] * gd[j])

    return SectionalCurvatures(float(K(1, 2)), float(K(2, 0)), float(K(0, 1)))


def adjugate(M: np.ndarray) -> np.ndarray:
    """Classical adjugate (transpose of the cofactor matrix) of a 3x3 matrix."""
    M = np.asarray(M, dtype=float)
    cof = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            minor = np.delete(np.delete(M, i, axis=0), j, axis=1)
            cof[i, j] = (-1) ** (i + j) * (minor[0, 0] * minor[1, 1] - minor[0, 1] * minor[1, 0])
    return cof.T


def curvature_tensors(kind, g: DiagonalMetric) -> CurvatureTensors:
    """Ricci, scalar curvature, ``P`` and the cross curvature tensor ``h``.

    ``h`` is built as ``det(g_ij) * adj(P^ij)``, the form of
    ``(det P / det g) P^{-1}`` that stays defined when ``P`` is singular.
    Limit geometries with a bracket table (H2 x R) go through
    :func:`sectional_generic`.
    """
    kind = GeometryKind.parse(kind)
    if kind.flowable:
        k = sectional(kind, g).as_array()
    else:
        k = sectional_generic(structure_constants(kind), g).as_array()
    K23, K31, K12 = k
    gd = np.array([g.A, g.B, g.C])
    ricci = gd * np.array([K12 + K31, K12 + K23, K23 + K31])
    scalar = 2.0 * (K23 + K31 + K12)
    # contravariant P^{ii} = K_jk / g_ii in the (non-normalized) frame
    P_up = np.diag(k / gd)
    h = np.prod(gd) * np.diag(adjugate(P_up))
    return CurvatureTensors(ricci_diag=ricci, scalar=float(scalar), p_diag=k.copy(), h_diag=h)
