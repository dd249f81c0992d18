"""Second-order shape analysis of the two-phase torsion problem on the unit ball."""

import json

from ._core import (
    BallGeometry,
    DegenerateSystemError,
    DomainError,
    FitError,
    Medium,
    MeshError,
    SolverError,
    __version__,
    b_coefficient,
    classify,
    estimate_q,
    extrapolated_energy,
    harmonic_multiplicity,
    j_function,
    q_perimeter,
    q_volume,
    solve_mode_coefficients,
    solve_radial,
    stress_function,
    torsional_rigidity_concentric,
    volume_sap_coefficient,
)
from . import _core


def qcurve(**kwargs):
    """Rows (k, q_volume, q_perimeter) as a list of dicts."""
    return json.loads(_core.cmd_qcurve(**kwargs))["result"]["rows"]


def classify_report(**kwargs):
    return json.loads(_core.cmd_classify(**kwargs))["result"]


def sweep(**kwargs):
    return json.loads(_core.cmd_sweep(**kwargs))["result"]["cells"]


__all__ = [
    "BallGeometry",
    "DegenerateSystemError",
    "DomainError",
    "FitError",
    "Medium",
    "MeshError",
    "SolverError",
    "__version__",
    "b_coefficient",
    "classify",
    "classify_report",
    "estimate_q",
    "extrapolated_energy",
    "harmonic_multiplicity",
    "j_function",
    "q_perimeter",
    "q_volume",
    "qcurve",
    "solve_mode_coefficients",
    "solve_radial",
    "stress_function",
    "sweep",
    "torsional_rigidity_concentric",
    "volume_sap_coefficient",
]
