"""Full hyperfine master equation on atom (x) cavity.

The interaction-picture Hamiltonian (sigma+/- drive selected by the laser
polarization) contains the cavity detuning, ground hyperfine splitting,
excited manifold detunings -Delta_F' (computed from the stored Delta and
the excited splitting table), the laser drive (Omega/2) D_{+-1} + h.c.,
the cavity coupling g a^dag D_0 + h.c., and a linear Zeeman shift
omega_Z * m_F on the ground manifolds.

Convention: Delta is the laser detuning from the upper-ground -> lowest-F'
transition, i.e. Delta = Delta_F'(lowest) + omega_GHS, so
Delta_F' = Delta - omega_GHS - excited_offset(F').
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .atom import AtomSpec, atomic_states, atomic_space, build_dipole_operators, state_index
from .evolve import Generator, RampSpec
from .hilbert import LabeledSpace, annihilation, fock_space


@dataclass(frozen=True)
class FullSystemParams:
    """Physical knobs of the full model (angular frequencies, rad/us)."""

    atom: AtomSpec
    kappa: float
    g: float
    omega_rabi: complex              # Omega = |Omega| e^{i phi}
    laser_polarization: int          # +1 (sigma+) or -1 (sigma-)
    delta_c: float
    delta: float                     # Delta = Delta_F'(lowest) + omega_GHS
    omega_z: float = 0.0
    n_max: int = -1                  # Fock cutoff; -1 -> 2*F_upper + 3
    ramp: RampSpec = field(default_factory=RampSpec)

    def __post_init__(self):
        if self.kappa <= 0 or self.g <= 0:
            raise ValueError("kappa and g must be positive")
        if self.laser_polarization not in (+1, -1):
            raise ValueError("laser_polarization must be +1 or -1")
        if self.n_max == -1:
            object.__setattr__(self, "n_max", int(round(2 * self.atom.f_upper)) + 3)
        if self.n_max < int(round(2 * self.atom.f_upper)) + 1:
            raise ValueError("n_max must be at least 2F+1 of the upper ground manifold")

    def with_(self, **kw) -> "FullSystemParams":
        return replace(self, **kw)

    def delta_fprime(self, f_excited: float) -> float:
        """Laser detuning from the lower-ground -> F' transition."""
        return self.delta - self.atom.omega_ghs - self.atom.excited_offset(f_excited)


def _atomic_diagonals(p: FullSystemParams):
    """(level-energy diagonal, ground Zeeman m_F diagonal) on the atomic space."""
    spec = p.atom
    states = atomic_states(spec)
    energy = np.zeros(len(states))
    zeeman = np.zeros(len(states))
    f_up = spec.f_upper
    for i, (kind, F, m) in enumerate(states):
        if kind == "g":
            if abs(F - f_up) < 1e-9:
                energy[i] = spec.omega_ghs
            zeeman[i] = m
        else:
            energy[i] = -p.delta_fprime(F)
    return energy, zeeman


def full_space(p: FullSystemParams) -> LabeledSpace:
    at = atomic_space(p.atom)
    return LabeledSpace(at.factors + fock_space(p.n_max).factors)


def build_full_hamiltonian(p: FullSystemParams, ramp_value: float = 1.0) -> np.ndarray:
    """H_+- on atom (x) cavity for a fixed ramp value r (drive scaled by r)."""
    spec = p.atom
    dset = build_dipole_operators(spec)
    na = dset.space.total_dim
    nf = p.n_max + 1
    a = annihilation(p.n_max).matrix
    Ia, If = np.eye(na), np.eye(nf)

    energy, zeeman = _atomic_diagonals(p)
    H = np.kron(np.diag(energy + p.omega_z * zeeman), If).astype(complex)
    H += p.delta_c * np.kron(Ia, a.conj().T @ a)
    drive = (ramp_value * p.omega_rabi / 2.0) * dset.l(p.laser_polarization).matrix
    H += np.kron(drive, If) + np.kron(drive.conj().T, If)
    cav = p.g * np.kron(dset.l(0).matrix, a.conj().T)
    H += cav + cav.conj().T
    return H


def build_full_liouvillian(p: FullSystemParams) -> Generator:
    """Generator for rho' = -i[H,rho] + kappa D[a] + (gamma/2) sum_q D[L_q]."""
    spec = p.atom
    dset = build_dipole_operators(spec)
    na = dset.space.total_dim
    nf = p.n_max + 1
    a = annihilation(p.n_max).matrix
    Ia, If = np.eye(na), np.eye(nf)
    space = full_space(p)

    gen = Generator(space=space, kappa=p.kappa)
    H0 = build_full_hamiltonian(p, ramp_value=0.0)
    drive = (p.omega_rabi / 2.0) * dset.l(p.laser_polarization).matrix
    Hdrive = np.kron(drive, If) + np.kron(drive.conj().T, If)
    gen.add_hamiltonian(H0)
    if p.ramp.is_trivial:
        gen.add_hamiltonian(Hdrive)
    else:
        gen.add_hamiltonian(Hdrive, coeff=lambda t, _r=p.ramp: _r.value(t))

    a_full = np.kron(Ia, a)
    gen.add_collapse(p.kappa, a_full)
    for q in (-1, 0, 1):
        gen.add_collapse(spec.gamma / 2.0, np.kron(dset.l(q).matrix, If))

    gen.number_op = a_full.conj().T @ a_full
    states = atomic_states(spec)
    fock_diag = np.ones(nf)
    for i, (kind, F, m) in enumerate(states):
        ind = np.zeros(na)
        ind[i] = 1.0
        gen.populations.append((f"{kind}:F={F:g},m={m:+g}", np.kron(ind, fock_diag)))
    exc = np.zeros(na)
    for i, (kind, F, m) in enumerate(states):
        if kind == "e":
            exc[i] = 1.0
    gen.excited_diag = np.kron(exc, fock_diag)
    top = np.zeros(nf)
    top[-1] = 1.0
    gen.top_level_diags.append(("cavity", np.kron(np.ones(na), top)))
    return gen


def full_initial_state(p: FullSystemParams, amplitudes: dict[float, complex],
                       manifold_f: float | None = None) -> np.ndarray:
    """Pure atom (x) vacuum ket from {m_F: amplitude} on one ground manifold."""
    spec = p.atom
    F = manifold_f if manifold_f is not None else spec.f_upper
    na = atomic_space(spec).total_dim
    nf = p.n_max + 1
    psi_at = np.zeros(na, dtype=complex)
    for m, amp in amplitudes.items():
        psi_at[state_index(spec, "g", F, m)] = amp
    psi_at /= np.linalg.norm(psi_at)
    psi = np.kron(psi_at, np.eye(nf)[0])
    return np.outer(psi, psi.conj())
