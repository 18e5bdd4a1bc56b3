"""Single-atom cavity QED source of N-photon, 0N and binomial-code pulses.

Simulation layers:

* ``hilbert``      -- labeled tensor-product spaces and dense operator algebra
* ``angular``      -- Wigner 3j/6j symbols and Clebsch-Gordan coefficients
* ``atom``         -- alkali hyperfine structure and dipole transition operators
* ``fullmodel``    -- the full hyperfine master equation (atom x cavity)
* ``effective``    -- reduced (anti-)Tavis-Cummings model and effective decay
* ``evolve``       -- Lindblad generators, adaptive integration, observables
* ``trajectories`` -- photon-counting and homodyne Monte Carlo unravelings
* ``tomography``   -- temporal-mode filter, marginals, Radon/MLE reconstruction
* ``capture``      -- cascaded virtual-cavity pulse capture
* ``presets``      -- canonical scenarios
* ``cli``          -- command-line front end

Internal units: angular frequencies in rad/us (config files quote rates in
units of 2*pi*MHz), times in microseconds.
"""

__version__ = "0.1.0"

from .hilbert import LabeledSpace, Operator, QuantumState, tensor, annihilation, spin_operators, expect, dissipator
from .angular import wigner3j, wigner6j, clebsch_gordan
from .atom import AtomSpec, DipoleOperatorSet, atom_spec, dipole_element, build_dipole_operators

__all__ = [
    "LabeledSpace", "Operator", "QuantumState", "tensor", "annihilation",
    "spin_operators", "expect", "dissipator",
    "wigner3j", "wigner6j", "clebsch_gordan",
    "AtomSpec", "DipoleOperatorSet", "atom_spec", "dipole_element",
    "build_dipole_operators",
]
