"""Second-order finite differences on the truncated periodic strip.

Serves the wire shapes the multipole engine cannot: squares, zero-thickness
slits, and disks near the touching limit.  Uniform grid, 5-point Laplacian,
periodic in S; curved or offset boundaries enter through Shortley-Weller
leg cutting, slit wires through blocked links on the N = 0 interface (the
grid is cell-centred in N, so no column lies on the slit), and the strip is
closed at N = +-n_max by one-sided slope conditions matching the known
far-field behaviour (the neglected tail is O(exp(-2 pi n_max))).

Slit tips carry a square-root singularity, so far-field constants converge
at a reduced, empirically fitted rate; the Richardson driver in
constants.py extrapolates over a grid sequence with a per-shape order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import DomainError
from ..geometry import WireShape

__all__ = ["StripFD", "fd_profile_fit"]

_TMIN = 1e-8  # Shortley-Weller leg clamp at near-tangency

# leg kinds
_REG = 0      # ordinary neighbour
_DIR0 = 1     # leg cut by a Dirichlet wire boundary (value 0 at fraction t)
_NEG = 2      # slit Dirichlet interface: u_nb = -u_c
_MIRROR = 3   # Neumann face between the nodes: u_nb = +u_c
_GHOST = 4    # strip closure: u_nb = u_c + sign*h*slope


def _disk_inside(N, S, delta):
    d2 = np.minimum(
        np.minimum(N ** 2 + (S - 1.0) ** 2, N ** 2 + (S + 1.0) ** 2),
        N ** 2 + S ** 2,
    )
    return d2 < delta ** 2 - 1e-14


def _disk_cut(p, d, h, delta):
    """Smallest t in (0,1] with |p + t*h*d - i*m| = delta for m in {-1,0,1}."""
    best = None
    for m in (-1.0, 0.0, 1.0):
        px, py = p[0], p[1] - m
        dx, dy = d
        a = h * h * (dx * dx + dy * dy)
        b = 2.0 * h * (px * dx + py * dy)
        c = px * px + py * py - delta * delta
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            continue
        sq = math.sqrt(disc)
        for t in ((-b - sq) / (2 * a), (-b + sq) / (2 * a)):
            if 0.0 < t <= 1.0 and (best is None or t < best):
                best = t
    return best


def _square_inside(N, S, w):
    inside = np.zeros(np.shape(N), dtype=bool)
    for m in (-1.0, 0.0, 1.0):
        inside |= (np.abs(N) < w - 1e-14) & (np.abs(S - m) < w - 1e-14)
    return inside


def _square_cut(p, d, h, w):
    best = None
    for m in (-1.0, 0.0, 1.0):
        px, py = p[0], p[1] - m
        dx, dy = d
        if dx != 0.0:
            for face in (-w, w):
                t = (face - px) / (h * dx)
                if 0.0 < t <= 1.0 and abs(py) < w + 1e-14:
                    best = t if best is None else min(best, t)
        else:
            for face in (-w, w):
                t = (face - py) / (h * dy)
                if 0.0 < t <= 1.0 and abs(px) < w + 1e-14:
                    best = t if best is None else min(best, t)
    return best


@dataclass
class StripFD:
    """One finite-difference solve of a cell problem on the strip.

    shape/delta give the wire (delta may equal the touching limit here);
    bc is 'dirichlet' or 'neumann' on the wire; slope_left/right are the
    imposed dPhi/dN at the strip ends.  Squares use a cell-centred S grid so
    that snapped Neumann faces exist; slits need S nodes at the tips.
    """

    shape: WireShape
    delta: float
    bc: str
    slope_left: float
    slope_right: float
    n: int = 64
    n_max: float = 2.0
    snap_half_width: float | None = None  # Neumann square: side on grid faces
    forcing: object = None  # optional vectorised f(N, S) for the Poisson right-hand side

    N: np.ndarray = field(init=False, repr=False)
    S: np.ndarray = field(init=False, repr=False)
    values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.shape == WireShape.PERPENDICULAR_SEGMENT:
            raise DomainError("perpendicular slit has closed forms; no FD path")
        if self.shape == WireShape.DISK and self.bc == "neumann":
            raise DomainError("disk Neumann cell problems use the multipole engine")
        self.cell_centered_s = self.shape == WireShape.SQUARE
        h = 1.0 / self.n
        self.h = h
        n_cols = int(round(2.0 * self.n_max * self.n))
        self.N = -self.n_max + (np.arange(n_cols) + 0.5) * h
        if self.cell_centered_s:
            self.S = -0.5 + (np.arange(self.n) + 0.5) * h
        else:
            self.S = -0.5 + np.arange(self.n) * h
        self._solve()

    def _half_width(self):
        w = self.snap_half_width
        return self.delta / math.sqrt(2.0) if w is None else w

    def _inside_mask(self):
        NN, SS = np.meshgrid(self.N, self.S, indexing="ij")
        if self.shape == WireShape.DISK:
            return _disk_inside(NN, SS, self.delta)
        if self.shape == WireShape.SQUARE:
            return _square_inside(NN, SS, self._half_width())
        return np.zeros(NN.shape, dtype=bool)  # slits occupy no nodes

    def _cut_fraction(self, p, d):
        if self.shape == WireShape.DISK:
            return _disk_cut(p, d, self.h, self.delta)
        if self.shape == WireShape.SQUARE:
            return _square_cut(p, d, self.h, self._half_width())
        return None

    def _slit_blocked_fraction(self, i, i2, j):
        """Covered fraction of the face between N-columns i and i2 at S_j.

        The link flux crosses a face of width h centred on the node; the
        finite-volume weighting of partially covered tip faces removes the
        O(h) bias of a binary blocked/open decision.
        """
        if self.shape != WireShape.TANGENTIAL_SEGMENT:
            return 0.0
        lo, hi = (i, i2) if self.N[i] < self.N[i2] else (i2, i)
        if not (self.N[lo] < 0.0 < self.N[hi]):
            return 0.0
        s = self.S[j]
        s = min(abs(s), abs(s - 1.0), abs(s + 1.0))
        half = 0.5 * self.h
        overlap = min(s + half, self.delta) - max(s - half, -self.delta)
        return float(np.clip(overlap / self.h, 0.0, 1.0))

    def _solve(self):
        h = self.h
        nN, nS = len(self.N), len(self.S)
        inside = self._inside_mask()
        idx = -np.ones((nN, nS), dtype=int)
        idx[~inside] = np.arange(np.count_nonzero(~inside))
        n_unk = int(np.count_nonzero(~inside))
        rows, cols, vals = [], [], []
        b = np.zeros(n_unk)
        dirichlet_wire = self.bc == "dirichlet"
        if self.forcing is not None:
            NN, SS = np.meshgrid(self.N, self.S, indexing="ij")
            f_grid = np.asarray(self.forcing(NN, SS), dtype=float)
            b[idx[~inside]] += f_grid[~inside]

        for i in range(nN):
            for j in range(nS):
                k = idx[i, j]
                if k < 0:
                    continue
                p = (self.N[i], self.S[j])
                legs = []  # (t, kind, neighbour, payload)
                for step, slope, sign in ((-1, self.slope_left, -1.0),
                                          (+1, self.slope_right, +1.0)):
                    i2 = i + step
                    if i2 < 0 or i2 >= nN:
                        legs.append((1.0, _GHOST, None, sign * slope))
                        continue
                    frac = self._slit_blocked_fraction(i, i2, j)
                    if frac > 0.0:
                        kind = _NEG if dirichlet_wire else _MIRROR
                        legs.append((1.0, kind, idx[i2, j], frac))
                    elif idx[i2, j] >= 0:
                        legs.append((1.0, _REG, idx[i2, j], None))
                    else:
                        t = self._cut_fraction(p, (float(step), 0.0))
                        t = max(t if t is not None else 1.0, _TMIN)
                        if dirichlet_wire:
                            legs.append((t, _DIR0, None, None))
                        else:
                            legs.append((1.0, _MIRROR, None, None))
                for step in (-1, +1):
                    j2 = (j + step) % nS
                    if idx[i, j2] >= 0:
                        legs.append((1.0, _REG, idx[i, j2], None))
                    else:
                        t = self._cut_fraction(p, (0.0, float(step)))
                        t = max(t if t is not None else 1.0, _TMIN)
                        if dirichlet_wire:
                            legs.append((t, _DIR0, None, None))
                        else:
                            legs.append((1.0, _MIRROR, None, None))

                for a in (0, 2):
                    ta, tb = legs[a][0], legs[a + 1][0]
                    denom = 0.5 * (ta + tb)
                    for t, kind, nb, payload in (legs[a], legs[a + 1]):
                        coeff = 1.0 / (t * denom * h * h)
                        if kind == _REG:
                            rows.append(k); cols.append(nb); vals.append(coeff)
                            rows.append(k); cols.append(k); vals.append(-coeff)
                        elif kind == _DIR0:
                            rows.append(k); cols.append(k); vals.append(-coeff)
                        elif kind == _NEG:
                            # face covered fraction payload: open part couples,
                            # covered part reflects (u_ghost = -u_c)
                            frac = payload
                            if nb is not None and frac < 1.0:
                                rows.append(k); cols.append(nb)
                                vals.append((1.0 - frac) * coeff)
                            rows.append(k); cols.append(k)
                            vals.append(-(1.0 + frac) * coeff)
                        elif kind == _MIRROR:
                            frac = payload if payload is not None else 1.0
                            if nb is not None and frac < 1.0:
                                rows.append(k); cols.append(nb)
                                vals.append((1.0 - frac) * coeff)
                                rows.append(k); cols.append(k)
                                vals.append(-(1.0 - frac) * coeff)
                            # covered part: mirrored, contributes nothing
                        else:  # _GHOST: u_nb = u_c + h*payload
                            b[k] -= coeff * h * payload

        A = sp.csr_matrix((vals, (rows, cols)), shape=(n_unk, n_unk))
        if not dirichlet_wire:
            # pure Neumann: pin one far corner node; the additive constant
            # drops out of the antisymmetric lambda extraction
            k0 = idx[0, 0]
            A = A.tolil()
            A.rows[k0] = [k0]
            A.data[k0] = [1.0]
            b[k0] = 0.0
            A = A.tocsr()
        u = spla.spsolve(A, b)
        self.values = np.full((nN, nS), np.nan)
        self.values[~inside] = u

    # --- extraction --------------------------------------------------------
    def side_profile(self, side, width=1.0):
        """S-averaged profile on the far-field window at the given side."""
        prof = np.nanmean(self.values, axis=1)
        if side == "right":
            mask = self.N >= self.n_max - width
        else:
            mask = self.N <= -self.n_max + width
        return self.N[mask], prof[mask]

    def fit_constant(self, side, slope):
        """Far-field constant after removing the known linear slope."""
        Nw, pw = self.side_profile(side)
        return float(np.mean(pw - slope * Nw))

    def dirichlet_constants(self):
        """(sigma, tau): right constant after slope removal, left constant."""
        sigma = self.fit_constant("right", self.slope_right)
        tau = self.fit_constant("left", self.slope_left)
        return sigma, tau

    def neumann_lambda(self):
        """lambda from the antisymmetric combination of the two constants."""
        c_r = self.fit_constant("right", self.slope_right)
        c_l = self.fit_constant("left", self.slope_left)
        return 0.5 * (c_r - c_l)


def fd_profile_fit(N, prof, order):
    """Least-squares polynomial fit of a far-field profile; see far_field_fit."""
    if order < 0 or order > 2:
        raise DomainError("polynomial order must be 0, 1 or 2")
    coeffs = np.polyfit(N, prof, order)
    resid = float(np.max(np.abs(np.polyval(coeffs, N) - prof)))
    return coeffs[::-1], resid  # ascending powers
