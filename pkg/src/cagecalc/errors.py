"""Exception types shared across the toolkit."""


class CageError(Exception):
    """Base class for toolkit errors."""


class InvalidCount(CageError):
    """Wire count too small to form a cage."""


class WireOverlap(CageError):
    """Scaled radius at or beyond the touching limit for the wire shape."""


class OutOfReach(CageError):
    """Point outside the region where curvilinear coordinates are single-valued."""


class DomainError(CageError):
    """Argument outside the mathematical domain of a kernel."""


class RankDeficient(CageError):
    def __init__(self, rank, ncols, message=None):
        self.rank = rank
        self.ncols = ncols
        super().__init__(message or f"effective rank {rank} < {ncols} columns")


class NoConvergence(CageError):
    """Refinement failed to reach the requested tolerance."""


class WindowTooClose(CageError):
    """Far-field fit window still contaminated by near-field decay."""


class InvalidRegime(CageError):
    def __init__(self, message, delta_inf=None):
        super().__init__(message)
        self.delta_inf = delta_inf


class NearResonance(CageError):
    def __init__(self, m, k_zero, message=None):
        self.m = m
        self.k_zero = k_zero
        super().__init__(
            message or f"wavenumber within guard distance of J_{m} zero at {k_zero:.6f}"
        )


class DegenerateMode(CageError):
    """Second-order resonance analysis refused for a degenerate eigenvalue."""


class ZeroDamping(CageError):
    """Im(I4) vanished; the Lorentzian width is undefined."""


class IllConditioned(CageError):
    def __init__(self, cond, message=None):
        self.cond = cond
        super().__init__(message or f"collocation matrix condition estimate {cond:.3g}")


class InsideWire(CageError):
    """Field evaluation requested inside a wire."""


class NearSingularBasis(CageError):
    """Hankel basis guard tripped (k*r too small to evaluate stably)."""


class ConfigError(CageError):
    """Malformed configuration (CLI exit code 2)."""


class SolverFailure(CageError):
    """Solver failed during a sweep sample (CLI exit code 3)."""


class RegimeWarning(UserWarning):
    """Asymptotic validity of the requested regime is doubtful."""
