"""Reduced (anti-)Tavis-Cummings dynamics for one ground hyperfine manifold.

Adiabatic elimination of the far-detuned excited manifolds maps the full
model onto a collective spin F coupled to the cavity mode,

    H = omega a^dag a + omega0 Sz
        + lambda (e^{-i phi} a S_-+ + e^{i phi} a^dag S_+-),

with sigma+ drive giving the anti-Tavis-Cummings pairing (a^dag S+) and
sigma- the Tavis-Cummings one.  Two derivation paths are provided:

* a closed form for J = J' = 1/2 lines (D1), which for Rb87 D1 reads
  omega = Delta_c + g^2/(3 Delta), omega0 = omega_Z -+ |Omega|^2/(24 Delta),
  lambda = g|Omega|/(12 sqrt2 Delta);
* a generic numeric elimination that projects the second-order process
  amplitudes through the excited manifold at uniform detuning Delta and
  fits the resulting ground-manifold operator to the form above,
  returning the fit residual.

Spontaneous emission enters through second-order decay channels
L_q_eff = L_q Hfrak^{-1} V_+ (rate gamma/2 each) assembled in the full
atomic basis and projected onto the chosen manifold; decay to the other
ground manifold is dropped.  The energy denominators in Hfrak are
referenced to the chosen manifold by default (detuning Delta minus the
excited-state splitting offsets); the literal lower-ground reference is
available as an option.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .atom import atomic_states, build_dipole_operators, state_index
from .evolve import Generator, RampSpec
from .fullmodel import FullSystemParams
from .hilbert import LabeledSpace, annihilation, fock_space, spin_operators, spin_space

TCM_FIT_TOL = 1e-8


class TcmStructureError(RuntimeError):
    """Second-order operator does not fit the Tavis-Cummings form."""


@dataclass(frozen=True)
class EffectiveParams:
    """Parameters of the reduced model (angular frequencies, rad/us).

    ``lam`` is real and signed (negative for red detuning); ``phi`` is the
    coupling phase of e^{i phi} a^dag S_+-.  ``omega0`` splits into the
    Zeeman part ``omega_z`` and the |Omega|^2 light shift ``omega0_light``
    so that a laser ramp r(t) can scale them as r^0 and r^2.
    """

    omega: float
    omega0: float
    lam: float
    phi: float
    big_f: float
    kappa: float
    polarization: int
    omega_z: float = 0.0
    fit_residual: float = 0.0

    @property
    def omega0_light(self) -> float:
        return self.omega0 - self.omega_z

    def with_(self, **kw) -> "EffectiveParams":
        return replace(self, **kw)


def manifold_detuning(p: FullSystemParams, manifold_f: float) -> float:
    """Uniform elimination detuning for the chosen ground manifold."""
    if abs(manifold_f - p.atom.f_upper) < 1e-9:
        return p.delta
    return p.delta - p.atom.omega_ghs


def _second_order_blocks(p: FullSystemParams, manifold_f: float):
    """Ground-manifold blocks of V_- P_e V_+ / Delta at uniform detuning.

    Returns (W_laser, W_cavity, C_cross) as (2F+1)x(2F+1) matrices:
    the |Omega|^2/4 laser shift, the g^2 shift multiplying a^dag a, and
    the (g Omega*/2) cross block multiplying a^dag.
    """
    spec = p.atom
    dset = build_dipole_operators(spec)
    delta = manifold_detuning(p, manifold_f)
    if abs(delta) < 10 * max(o for _, o in spec.excited_f_levels):
        warnings.warn("elimination detuning is not large compared to the "
                      "excited-state hyperfine splitting; the reduced model "
                      "may be inaccurate", stacklevel=2)
    rows = [state_index(spec, "g", manifold_f, m)
            for m in np.arange(-manifold_f, manifold_f + 1)]
    Dpol = dset.l(p.laser_polarization).matrix
    D0 = dset.l(0).matrix
    om = p.omega_rabi
    # H_eff = V_- V_+ / Delta on the manifold (E_ground - E_excited = +Delta)
    W_laser = (abs(om) ** 2 / 4.0) * (Dpol @ Dpol.conj().T)[np.ix_(rows, rows)] / delta
    W_cav = (p.g ** 2) * (D0 @ D0.conj().T)[np.ix_(rows, rows)] / delta
    C_cross = (p.g * np.conj(om) / 2.0) * (D0 @ Dpol.conj().T)[np.ix_(rows, rows)] / delta
    return W_laser, W_cav, C_cross


def _fit_tcm(p: FullSystemParams, manifold_f: float):
    """Fit the second-order blocks to the TCM structure.

    Returns (omega_cavity_shift, omega0_slope, C_coupling, residual).
    """
    W_laser, W_cav, C_cross = _second_order_blocks(p, manifold_f)
    F = manifold_f
    m = np.arange(-F, F + 1)
    d = len(m)
    scale = max(np.abs(W_laser).max(), np.abs(W_cav).max(), np.abs(C_cross).max(), 1e-300)

    # cavity shift: proportional to the identity
    w_cav = float(np.mean(np.diag(W_cav)).real)
    res = np.abs(W_cav - w_cav * np.eye(d)).max()

    # laser shift: linear in m (constant part is a global phase, dropped)
    diag = np.diag(W_laser).real
    c1, c0 = np.polyfit(m, diag, 1)
    res = max(res, np.abs(diag - (c0 + c1 * m)).max(),
              np.abs(W_laser - np.diag(np.diag(W_laser))).max())

    # coupling: C_cross couples m -> m +- 1 proportionally to S_+- elements
    sp, sm, _ = (o.matrix for o in spin_operators(F))
    ladder = sp if p.laser_polarization == +1 else sm
    mask = ladder > 0
    ratios = C_cross[mask] / ladder[mask]
    C = complex(np.mean(ratios))
    res = max(res, np.abs(C_cross - C * ladder).max())
    if res > TCM_FIT_TOL * scale:
        raise TcmStructureError(
            f"second-order operator deviates from the Tavis-Cummings form "
            f"(relative residual {res / scale:.2e}); the drive/cavity "
            f"polarization pattern does not reduce to spin ladder operators")
    return w_cav, float(c1), C, res / scale


def derive_effective_params(p: FullSystemParams, manifold_f: float | None = None,
                            method: str = "numeric") -> EffectiveParams:
    """Effective (omega, omega0, lambda, phi) for the chosen manifold.

    ``method='numeric'`` performs the generic elimination and structure
    fit; ``method='closed_form'`` evaluates the J = J' = 1/2 expressions
    (Rb87/Cs133 D1).  Both agree to rounding for D1 lines.
    """
    F = manifold_f if manifold_f is not None else p.atom.f_upper
    if method == "closed_form":
        if abs(p.atom.j_ground - 0.5) > 1e-9 or abs(p.atom.j_excited - 0.5) > 1e-9:
            raise ValueError("closed form implemented for J = J' = 1/2 lines only")
        delta = manifold_detuning(p, F)
        om = abs(p.omega_rabi)
        lam = p.g * om / (6.0 * math.sqrt(2.0) * F * delta)
        light = -p.laser_polarization * om ** 2 / (12.0 * F * delta)
        phi = _wrap(math.pi - cmath.phase(p.omega_rabi) - (math.pi if lam < 0 else 0.0))
        return EffectiveParams(
            omega=p.delta_c + p.g ** 2 / (3.0 * delta),
            omega0=p.omega_z + light, lam=lam, phi=phi, big_f=F,
            kappa=p.kappa, polarization=p.laser_polarization,
            omega_z=p.omega_z, fit_residual=0.0)
    if method != "numeric":
        raise ValueError(f"unknown method {method!r}")
    w_cav, c1, C, res = _fit_tcm(p, F)
    delta = manifold_detuning(p, F)
    lam = math.copysign(abs(C), delta)
    phi = _wrap(cmath.phase(C / lam)) if lam != 0 else 0.0
    return EffectiveParams(
        omega=p.delta_c + w_cav, omega0=p.omega_z + c1, lam=lam, phi=phi,
        big_f=F, kappa=p.kappa, polarization=p.laser_polarization,
        omega_z=p.omega_z, fit_residual=res)


def _wrap(phi: float) -> float:
    return (phi + math.pi) % (2.0 * math.pi) - math.pi


def resonance_tuning(p: FullSystemParams, manifold_f: float | None = None):
    """(delta_c*, omega_z*) that zero the effective omega and omega0."""
    F = manifold_f if manifold_f is not None else p.atom.f_upper
    w_cav, c1, _, _ = _fit_tcm(p, F)
    return -w_cav, -c1


@dataclass(frozen=True)
class EffectiveSpontOp:
    """One second-order decay channel on spin (x) Fock.

    ``laser`` carries the laser-excitation pathway (scales with the ramp),
    ``cavity`` the cavity-photon-absorption pathway (ramp-independent).
    ``photon_cost`` is the output-pulse photon deficit per jump.
    """

    q: int
    laser: np.ndarray
    cavity: np.ndarray
    photon_cost: int

    @property
    def full(self) -> np.ndarray:
        return self.laser + self.cavity


def build_effective_spont_ops(p: FullSystemParams, manifold_f: float | None = None,
                              n_max: int = 3, reference: str = "manifold"
                              ) -> list[EffectiveSpontOp]:
    """Assemble L_q_eff = L_q Hfrak^{-1} V_+ projected onto the manifold.

    ``reference`` selects the energy denominators of Hfrak: "manifold"
    (default) measures excited energies from the chosen ground manifold
    (detuning Delta minus excited offsets); "lower_ground" uses the
    lower-ground reference Delta_F' literally.
    """
    spec = p.atom
    F = manifold_f if manifold_f is not None else spec.f_upper
    dset = build_dipole_operators(spec)
    na = dset.space.total_dim
    nf = n_max + 1
    a = annihilation(n_max).matrix
    If = np.eye(nf)

    hinv = np.zeros((na, na))
    for fp, off in spec.excited_f_levels:
        if reference == "manifold":
            den = -(manifold_detuning(p, F) - off)
        elif reference == "lower_ground":
            den = -(p.delta - spec.omega_ghs - off)
        else:
            raise ValueError(f"unknown reference {reference!r}")
        for m in np.arange(-fp, fp + 1):
            i = state_index(spec, "e", fp, m)
            hinv[i, i] = 1.0 / den
    if not np.isfinite(hinv).all():
        raise ValueError("Hfrak is singular on the excited manifold")

    Dpol = dset.l(p.laser_polarization).matrix
    D0 = dset.l(0).matrix
    v_laser = np.kron(hinv @ ((np.conj(p.omega_rabi) / 2.0) * Dpol.conj().T), If)
    v_cav = np.kron(hinv @ (p.g * D0.conj().T), a)

    rows = [state_index(spec, "g", F, m) * nf + k
            for m in np.arange(-F, F + 1) for k in range(nf)]
    out = []
    for q in (-1, 0, 1):
        Lq = np.kron(dset.l(q).matrix, If)
        cost = abs(q - p.laser_polarization)  # sigma+: (+1,0,-1) -> (0,1,2)
        out.append(EffectiveSpontOp(
            q=q,
            laser=(Lq @ v_laser)[np.ix_(rows, rows)],
            cavity=(Lq @ v_cav)[np.ix_(rows, rows)],
            photon_cost=cost))
    return out


def effective_space(big_f: float, n_max: int) -> LabeledSpace:
    return LabeledSpace(spin_space(big_f).factors + fock_space(n_max).factors)


def build_tcm_generator(e: EffectiveParams, n_max: int,
                        spont_ops: list[EffectiveSpontOp] | None = None,
                        gamma: float = 0.0,
                        ramp: RampSpec | None = None) -> Generator:
    """Cavity-damped (anti-)TCM generator, optionally with decay channels.

    With a ramp r(t): lambda scales as r, the |Omega|^2 light shift in
    omega0 as r^2, and the laser pathway of each decay channel as r.
    """
    ramp = ramp or RampSpec()
    F = e.big_f
    ds = int(round(2 * F)) + 1
    nf = n_max + 1
    sp_, sm_, sz_ = (o.matrix for o in spin_operators(F))
    a = annihilation(n_max).matrix
    Is, If = np.eye(ds), np.eye(nf)
    A = np.kron(Is, a)
    SZ = np.kron(sz_, If)
    Sr = np.kron(sp_ if e.polarization == +1 else sm_, If)  # raising partner of a^dag

    space = effective_space(F, n_max)
    gen = Generator(space=space, kappa=e.kappa)
    num = A.conj().T @ A
    gen.add_hamiltonian(e.omega * num + e.omega_z * SZ)
    coupling = e.lam * cmath.exp(1j * e.phi) * (A.conj().T @ Sr)
    Hcpl = coupling + coupling.conj().T
    if ramp.is_trivial:
        gen.add_hamiltonian(e.omega0_light * SZ + Hcpl)
    else:
        gen.add_hamiltonian(e.omega0_light * SZ, coeff=lambda t: ramp.value(t) ** 2)
        gen.add_hamiltonian(Hcpl, coeff=lambda t: ramp.value(t))

    gen.add_collapse(e.kappa, A)
    if spont_ops and gamma > 0:
        for op in spont_ops:
            if ramp.is_trivial:
                gen.add_collapse(gamma / 2.0, op.full)
            else:
                gen.add_collapse(gamma / 2.0, op.cavity)
                gen.add_collapse(gamma / 2.0, op.laser, coeff=lambda t: ramp.value(t) ** 2)
                half = gamma / 2.0
                gen.add_cross(lambda t, _h=half: _h * ramp.value(t), op.laser, op.cavity)
                gen.add_cross(lambda t, _h=half: _h * ramp.value(t), op.cavity, op.laser)

    gen.number_op = num
    fock_diag = np.ones(nf)
    for i, m in enumerate(np.arange(-F, F + 1)):
        ind = np.zeros(ds)
        ind[i] = 1.0
        gen.populations.append((f"m={m:+g}", np.kron(ind, fock_diag)))
    top = np.zeros(nf)
    top[-1] = 1.0
    gen.top_level_diags.append(("cavity", np.kron(np.ones(ds), top)))
    return gen


def effective_initial_state(big_f: float, amplitudes: dict[float, complex],
                            n_max: int) -> np.ndarray:
    """Density matrix for a spin superposition (x) cavity vacuum."""
    ds = int(round(2 * big_f)) + 1
    psi_s = np.zeros(ds, dtype=complex)
    for m, amp in amplitudes.items():
        idx = int(round(m + big_f))
        if not 0 <= idx < ds:
            raise ValueError(f"m={m} outside manifold F={big_f}")
        psi_s[idx] = amp
    psi_s /= np.linalg.norm(psi_s)
    psi = np.kron(psi_s, np.eye(n_max + 1)[0])
    return np.outer(psi, psi.conj())


def pulse_width_estimate(e: EffectiveParams) -> float:
    """Half of the characteristic superradiant duration kappa/(F lambda^2)."""
    if e.lam == 0:
        raise ValueError("lambda = 0: no pulse")
    return 0.5 * e.kappa / (e.big_f * e.lam ** 2)


def default_horizon(e: EffectiveParams) -> float:
    return 12.0 * pulse_width_estimate(e)
