"""cagecalc: Faraday-cage shielding calculator.

Discrete many-wire Laplace/Helmholtz solves, homogenized continuum models,
boundary-layer cell problems, and near-resonance perturbation analysis for
two-dimensional wire cages.
"""

__version__ = "0.1.0"
