"""Cage geometry: wire placement along the boundary curve and the two wire models.

The cage curve is either the unit circle (length 2*pi) or the square
[-1, 1]^2 (length 8; its interior Dirichlet eigenvalues are
(pi/2)^2 (l^2 + m^2), which is the convention the resonance module relies
on).  Wires are copies of a reference shape of unit circumradius, scaled to
radius r = delta * epsilon and placed at equal arc-length spacing
epsilon = |Gamma| / M.

Model 1 places the scaled shape rigidly in the local Cartesian frame of the
wire centre; Model 2 places it in curvilinear (normal, arc-length)
coordinates, so e.g. tangential segments become arcs hugging the curve.
Both agree to O(epsilon^2) on smooth parts of the curve.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidCount, OutOfReach, WireOverlap

__all__ = [
    "Curve",
    "WireShape",
    "WireModel",
    "BoundaryKind",
    "DELTA_MAX",
    "CageConfig",
    "CageGeometry",
    "build_cage",
    "curve_length",
    "curve_point",
    "curvilinear_map",
    "curvilinear_inverse",
    "reference_wire_boundary",
    "wire_boundary",
]


class Curve(str, enum.Enum):
    UNIT_CIRCLE = "circle"
    UNIT_SQUARE = "square"


class WireShape(str, enum.Enum):
    DISK = "disk"
    PERPENDICULAR_SEGMENT = "perpendicular"
    TANGENTIAL_SEGMENT = "tangential"
    SQUARE = "square"


class WireModel(enum.IntEnum):
    MODEL1 = 1
    MODEL2 = 2


class BoundaryKind(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


# Touching limits for the scaled radius delta (wire circumradius / spacing).
DELTA_MAX = {
    WireShape.DISK: 0.5,
    WireShape.TANGENTIAL_SEGMENT: 0.5,
    WireShape.SQUARE: 1.0 / math.sqrt(2.0),
    WireShape.PERPENDICULAR_SEGMENT: math.inf,
}


def curve_length(curve: Curve) -> float:
    return 2.0 * math.pi if curve == Curve.UNIT_CIRCLE else 8.0


def curve_point(curve: Curve, s):
    """Point z(s) on the curve and outward-normal angle theta(s).

    s is arc length measured counterclockwise from z = 1 (circle) or from
    the midpoint (1, 0) of the right edge (square).  At square corners the
    normal is the outward corner bisector.
    """
    s = np.asarray(s, dtype=float)
    if curve == Curve.UNIT_CIRCLE:
        z = np.exp(1j * s)
        theta = np.mod(s, 2.0 * np.pi)
        return (z, theta) if z.ndim else (complex(z), float(theta))

    u = np.mod(s, 8.0)
    z = np.empty(u.shape, dtype=complex)
    theta = np.empty(u.shape, dtype=float)
    seg = np.floor((u + 1.0) / 2.0).astype(int) % 4  # 0:right 1:top 2:left 3:bottom
    t = np.mod(u + 1.0, 2.0) - 1.0  # position along the edge in [-1, 1)
    right, top, left, bottom = (seg == 0), (seg == 1), (seg == 2), (seg == 3)
    z[right] = 1.0 + 1j * t[right]
    z[top] = -t[top] + 1j
    z[left] = -1.0 - 1j * t[left]
    z[bottom] = t[bottom] - 1j
    theta[right] = 0.0
    theta[top] = 0.5 * np.pi
    theta[left] = np.pi
    theta[bottom] = 1.5 * np.pi
    corner = np.isclose(np.mod(u + 1.0, 2.0), 0.0, atol=1e-12)
    # corner s in {1, 3, 5, 7}: bisector normals pi/4, 3pi/4, ...
    theta[corner] = (np.floor(u[corner] / 2.0) * 0.5 * np.pi + 0.25 * np.pi) % (2 * np.pi)
    if z.ndim:
        return z, theta
    return complex(z), float(theta)


@dataclass(frozen=True)
class CageConfig:
    curve: Curve = Curve.UNIT_CIRCLE
    M: int = 30
    delta: float = 0.1
    wire_shape: WireShape = WireShape.DISK
    wire_model: WireModel = WireModel.MODEL1
    bc: BoundaryKind = BoundaryKind.DIRICHLET
    start_arclength: float = 0.0  # phase of wire placement: wire centre at s = start

    def __post_init__(self):
        if self.M != 0 and self.M < 3:
            raise InvalidCount(f"M = {self.M}: need M >= 3 (or M = 0 for no cage)")
        if self.delta <= 0.0:
            raise DomainError("delta must be positive")
        if self.delta >= DELTA_MAX[self.wire_shape]:
            raise WireOverlap(
                f"delta = {self.delta} >= delta_max = {DELTA_MAX[self.wire_shape]}"
                f" for {self.wire_shape.value} wires"
            )

    @property
    def epsilon(self) -> float:
        if self.M == 0:
            return math.nan
        return curve_length(self.curve) / self.M

    @property
    def wire_radius(self) -> float:
        return self.delta * self.epsilon


@dataclass(frozen=True)
class CageGeometry:
    config: CageConfig
    centers: np.ndarray = field(repr=False)  # complex wire centres z_j
    normal_angles: np.ndarray = field(repr=False)  # outward normal angle theta_j
    arclengths: np.ndarray = field(repr=False)  # s_j along the curve
    epsilon: float = math.nan
    wire_radius: float = math.nan

    @property
    def M(self) -> int:
        return len(self.centers)

    @property
    def is_empty(self) -> bool:
        return self.M == 0

    def wire_boundary(self, j, n_pts=64, model=None):
        return wire_boundary(self, j, n_pts=n_pts, model=model)


def build_cage(config: CageConfig) -> CageGeometry:
    """Place M wire centres at equal arc-length spacing along the curve."""
    if config.M == 0:
        empty = np.empty(0)
        return CageGeometry(config, empty.astype(complex), empty, empty)
    s = config.start_arclength + config.epsilon * np.arange(config.M)
    z, theta = curve_point(config.curve, s)
    return CageGeometry(
        config,
        centers=np.asarray(z),
        normal_angles=np.asarray(theta),
        arclengths=np.mod(s, curve_length(config.curve)),
        epsilon=config.epsilon,
        wire_radius=config.wire_radius,
    )


def curvilinear_map(curve: Curve, n, s):
    """Map curvilinear (n, s) to a point z; n > 0 is outside the curve."""
    n = np.asarray(n, dtype=float)
    if curve == Curve.UNIT_CIRCLE:
        if np.any(n <= -1.0):
            raise OutOfReach("unit circle reach requires n > -1")
        out = (1.0 + n) * np.exp(1j * np.asarray(s, dtype=float))
    else:
        if np.any(n <= -1.0):
            raise OutOfReach("unit square inward reach requires n > -1")
        z0, theta = curve_point(curve, s)
        out = np.asarray(z0) + n * np.exp(1j * np.asarray(theta))
    return out if out.ndim else complex(out)


def curvilinear_inverse(curve: Curve, z):
    """Recover (n, s) with s in [0, |Gamma|) from a point z near the curve."""
    if curve == Curve.UNIT_CIRCLE:
        r = abs(z)
        if r == 0.0:
            raise OutOfReach("projection ambiguous at the circle centre")
        return r - 1.0, float(np.mod(np.angle(z), 2.0 * np.pi))

    x, y = z.real, z.imag
    ax, ay = abs(x), abs(y)
    if math.isclose(ax, ay, rel_tol=0.0, abs_tol=1e-14) and ax < 1.0:
        raise OutOfReach("projection ambiguous on the square diagonals")
    if ax >= 1.0 and ay >= 1.0:
        # outside a corner: nearest point is the vertex
        vx, vy = math.copysign(1.0, x), math.copysign(1.0, y)
        n = math.hypot(x - vx, y - vy)
        s = _square_arclength(vx + 1j * vy)
        return n, s
    if ax >= ay:
        proj = math.copysign(1.0, x) + 1j * y
        n = ax - 1.0
    else:
        proj = x + 1j * math.copysign(1.0, y)
        n = ay - 1.0
    return n, _square_arclength(proj)


def _square_arclength(z) -> float:
    """Arc length s in [0, 8) of a point on the boundary of [-1, 1]^2."""
    x, y = z.real, z.imag
    if math.isclose(x, 1.0, abs_tol=1e-12):
        s = y
    elif math.isclose(y, 1.0, abs_tol=1e-12):
        s = 2.0 - x
    elif math.isclose(x, -1.0, abs_tol=1e-12):
        s = 4.0 - y
    elif math.isclose(y, -1.0, abs_tol=1e-12):
        s = 6.0 + x
    else:
        raise OutOfReach(f"{z} not on the square boundary")
    return float(np.mod(s, 8.0))


def reference_wire_boundary(shape: WireShape, n_pts=64):
    """Points on the boundary of the unit-circumradius reference shape K.

    Returned as xi + i*eta; xi is the outward-normal direction of the cage
    curve, eta the tangential direction.  Segments are double-sided slits
    traced end to end and back.
    """
    if shape == WireShape.DISK:
        t = 2.0 * np.pi * np.arange(n_pts) / n_pts
        return np.exp(1j * t)
    if shape == WireShape.PERPENDICULAR_SEGMENT:
        half = max(2, n_pts // 2)
        t = np.linspace(-1.0, 1.0, half)
        return np.concatenate([t, t[::-1][1:-1]]).astype(complex)
    if shape == WireShape.TANGENTIAL_SEGMENT:
        half = max(2, n_pts // 2)
        t = np.linspace(-1.0, 1.0, half)
        return 1j * np.concatenate([t, t[::-1][1:-1]])
    # square of side sqrt(2), vertices on the unit circle
    w = 1.0 / math.sqrt(2.0)
    per_side = max(1, n_pts // 4)
    t = np.linspace(-w, w, per_side, endpoint=False)
    return np.concatenate(
        [w + 1j * t, -t + 1j * w, -w - 1j * t, t - 1j * w]
    )


def wire_boundary(geom: CageGeometry, j, n_pts=64, model=None):
    """Boundary points of wire j in global coordinates.

    Model 1 is the rigid map z_j + e^{i theta_j} (r K).  Model 2 pushes r K
    through the curvilinear coordinates; on straight edges of the square the
    two coincide, and corner wires always use Model 1 (the curvilinear frame
    degenerates there).
    """
    if geom.is_empty:
        raise InvalidCount("empty cage has no wires")
    model = geom.config.wire_model if model is None else model
    ref = reference_wire_boundary(geom.config.wire_shape, n_pts)
    r = geom.wire_radius
    zj = geom.centers[j]
    theta_j = geom.normal_angles[j]
    if model == WireModel.MODEL1 or _on_square_corner(geom, j):
        return zj + np.exp(1j * theta_j) * (r * ref)
    n_local = r * ref.real
    s_local = geom.arclengths[j] + r * ref.imag
    return curvilinear_map(geom.config.curve, n_local, s_local)


def _on_square_corner(geom: CageGeometry, j) -> bool:
    if geom.config.curve != Curve.UNIT_SQUARE:
        return False
    return bool(np.isclose(np.mod(geom.arclengths[j] + 1.0, 2.0), 0.0, atol=1e-12))
