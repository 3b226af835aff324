"""Closed-form cell solutions and their far-field constants.

Conformal-map solutions exist for both slit orientations; disks and squares
need the numerical engines.  The slit evaluators double as oracles for the
finite-difference solver.

Conventions: the cell is the periodic strip |S| <= 1/2 with one scaled wire
delta*K at the origin.  Phi+ grows like N + sigma_plus on the right and
tends to tau_plus on the left; Psi (Neumann) behaves like N +- lambda.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gamma

from ..errors import DomainError
from ..geometry import DELTA_MAX, WireShape

__all__ = [
    "A0",
    "a0_constant",
    "perpendicular_sigma_tau",
    "tangential_sigma_tau",
    "tangential_lambda",
    "small_delta_sigma_tau",
    "disk_lambda_small",
    "disk_lambda_refined",
    "tangential_phi_plus",
    "tangential_psi",
    "perpendicular_phi_plus",
    "wire_area",
]

# Logarithmic-capacity constants a0 = -log c(K) of the unit-circumradius
# reference shapes: c(disk) = 1, c(segment of length 2) = 1/2,
# c(square of side a) = Gamma(1/4)^2 a / (4 pi^(3/2)) with a = sqrt(2).
_C_SQUARE = gamma(0.25) ** 2 * math.sqrt(2.0) / (4.0 * math.pi ** 1.5)

A0 = {
    WireShape.DISK: 0.0,
    WireShape.PERPENDICULAR_SEGMENT: math.log(2.0),
    WireShape.TANGENTIAL_SEGMENT: math.log(2.0),
    WireShape.SQUARE: -math.log(_C_SQUARE),
}


def a0_constant(shape: WireShape) -> float:
    return A0[shape]


def _check_delta(delta, shape):
    if delta <= 0.0:
        raise DomainError("delta must be positive")
    if delta > DELTA_MAX[shape] + 1e-15:
        raise DomainError(f"delta = {delta} beyond touching limit for {shape.value}")


def perpendicular_sigma_tau(delta):
    """(sigma, tau) for perpendicular slit wires of half-length delta."""
    _check_delta(delta, WireShape.PERPENDICULAR_SEGMENT)
    sigma = -math.log(math.sinh(2.0 * math.pi * delta) / 2.0) / (2.0 * math.pi)
    tau = -math.log(math.tanh(math.pi * delta)) / (2.0 * math.pi)
    return sigma, tau


def tangential_sigma_tau(delta):
    """(sigma, tau) for tangential slit wires of half-length delta; sigma = tau."""
    _check_delta(delta, WireShape.TANGENTIAL_SEGMENT)
    sigma = -math.log(math.sin(math.pi * delta)) / (2.0 * math.pi)
    return sigma, sigma


def tangential_lambda(delta):
    """Blockage coefficient for tangential slit wires."""
    _check_delta(delta, WireShape.TANGENTIAL_SEGMENT)
    if delta >= 0.5:
        raise DomainError("tangential lambda diverges at delta = 1/2")
    return -math.log(math.cos(math.pi * delta)) / math.pi


def small_delta_sigma_tau(delta, a0=0.0):
    """Leading small-delta value shared by sigma and tau."""
    if delta <= 0.0:
        raise DomainError("delta must be positive")
    return (math.log(1.0 / (2.0 * math.pi * delta)) + a0) / (2.0 * math.pi)


def disk_lambda_small(delta):
    return math.pi * delta ** 2


def disk_lambda_refined(delta):
    return math.pi * delta ** 2 / (1.0 - (math.pi * delta) ** 2 / 3.0)


def wire_area(shape: WireShape, delta) -> float:
    """Area of the scaled wire delta*K."""
    if shape == WireShape.DISK:
        return math.pi * delta ** 2
    if shape == WireShape.SQUARE:
        return 2.0 * delta ** 2  # side sqrt(2)*delta
    return 0.0


def _zeta_tangential(Z, delta):
    return np.sqrt(
        np.sin(np.pi * (1j * Z + delta)) / np.sin(np.pi * (1j * Z - delta))
    )


def tangential_phi_plus(Z, delta):
    """Conformal Phi+ for the tangential slit, evaluated at Z = N + iS."""
    _check_delta(delta, WireShape.TANGENTIAL_SEGMENT)
    Z = np.asarray(Z, dtype=complex)
    zeta = _zeta_tangential(Z, delta)
    e = np.exp(1j * np.pi * delta)
    w = (e + zeta) / (np.conj(e) - zeta)
    return np.log(np.abs(w)) / (2.0 * np.pi)


def tangential_psi(Z, delta):
    """Conformal Neumann cell solution Psi for the tangential slit."""
    _check_delta(delta, WireShape.TANGENTIAL_SEGMENT)
    Z = np.asarray(Z, dtype=complex)
    zeta = _zeta_tangential(Z, delta)
    e = np.exp(1j * np.pi * delta)
    w = ((e - zeta) * (np.conj(e) + zeta)) / ((np.conj(e) - zeta) * (e + zeta))
    return np.log(np.abs(w)) / (2.0 * np.pi)


def perpendicular_phi_plus(Z, delta):
    """Conformal Phi+ for the perpendicular slit, evaluated at Z = N + iS."""
    _check_delta(delta, WireShape.PERPENDICULAR_SEGMENT)
    Z = np.asarray(Z, dtype=complex)
    zeta = np.sqrt(np.sinh(np.pi * (Z - delta)) / np.sinh(np.pi * (Z + delta)))
    e = math.exp(-math.pi * delta)
    w = (e + zeta) / (e - zeta)
    return np.log(np.abs(w)) / (2.0 * np.pi)
