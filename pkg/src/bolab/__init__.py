"""Pseudospectral lab for a third-order Benjamin-Ono-type equation on the torus.

Modules
-------
spectral      Fourier-side fields, multipliers and products.
energy        Modified energies with correction terms and their calibration.
dynamics      Right-hand side, propagator, time steppers and the Duhamel iteration.
inequalities  Exact identities and empirical commutator constants.
experiments   Scenario runners producing traces and reports.
config, storage, cli
              Configuration parsing, file formats and the command line.
"""

from .dynamics import EquationParams, SolverConfig, Trajectory, picard_solve, propagator, rhs, solve, step
from .energy import EnergyCalibration, EnergyReport, calibrate, energy_pair, energy_single, energy_tilde, lambda_coeff
from .fields import make_initial_data
from .spectral import (
    MollifierSpec,
    SpectralField,
    bessel_inverse,
    dx,
    fractional_derivative,
    hilbert,
    inner_l2,
    mollify,
    multiply,
    sobolev_norm,
)

__version__ = "0.1.0"

__all__ = [
    "EnergyCalibration", "EnergyReport", "EquationParams", "MollifierSpec", "SolverConfig", "SpectralField",
    "Trajectory", "bessel_inverse", "calibrate", "dx", "energy_pair", "energy_single", "energy_tilde",
    "fractional_derivative", "hilbert", "inner_l2", "lambda_coeff", "make_initial_data", "mollify",
    "multiply", "picard_solve", "propagator", "rhs", "sobolev_norm", "solve", "step",
]
