"""Ricci and cross curvature flows on homogeneous Thurston geometries."""
from .curvature import CurvatureTensors, SectionalCurvatures, curvature_tensors, sectional, sectional_generic
from .errors import *  # noqa: F401,F403
from .flow import FlowKind, IntegratorConfig, Trajectory, closed_form, integrate
from .geometry import DiagonalMetric, GeometryKind, coordinate_metric, structure_constants
from .groups import (
    CollapseReport,
    GroupElement,
    Lattice,
    act,
    collapse_analysis,
    compose,
    identity,
    inverse,
    limit_action,
    mu3_lift,
    phi_chart,
    standard_lattice,
)
from .rescale import LIMIT_CASES, REFERENCES, CoordinateScaling, LimitComparison, RescalingFamily, run_limit_case
from .singularity import SingularityReport, classify, run_and_classify
from .soliton import CERTIFICATES, SolitonCertificate, certify, verify_soliton_equation

__version__ = "0.1.0"
