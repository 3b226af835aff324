"""Boundary-layer cell problems on the periodic strip and their constants."""

from .closed import (
    A0,
    a0_constant,
    disk_lambda_refined,
    disk_lambda_small,
    perpendicular_phi_plus,
    perpendicular_sigma_tau,
    small_delta_sigma_tau,
    tangential_lambda,
    tangential_phi_plus,
    tangential_psi,
    tangential_sigma_tau,
    wire_area,
)
from .constants import (
    CellSolution,
    FarFieldConstants,
    FitResult,
    GridSpec,
    cell_dirichlet_analytic,
    cell_dirichlet_numeric,
    cell_dirichlet_tilde,
    cell_neumann,
    cell_neumann_higher,
    delta_for_tau,
    dirichlet_constants,
    far_field_fit,
    gap_fraction_for_tau,
    neumann_lambda,
)

__all__ = [name for name in dir() if not name.startswith("_")]
