"""Lindblad generators, adaptive master-equation integration, observables.

A :class:`Generator` collects Hamiltonian terms, dissipator channels and
(for cascaded systems) cross-dissipator channels, each with an optional
time-dependent coefficient.  The right-hand side is assembled once into
constant sparse superoperator pieces (row-major vec convention,
``vec(A rho B) = (A kron B^T) vec(rho)``) and combined with scalar
coefficients per evaluation, which keeps the full 128-dimensional
hyperfine model tractable on one core.

Integration uses adaptive embedded Runge-Kutta (DOP853) at rtol 1e-8 by
default.  The integrator enforces the Fock-cutoff contract: if the top
level of any bosonic factor accumulates population >= 1e-6 the run fails
with instructions to enlarge the cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.optimize import curve_fit

from .hilbert import LabeledSpace

TOP_LEVEL_POP_MAX = 1e-6
DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-11


class StiffnessError(RuntimeError):
    """Integrator could not proceed (step-size underflow or failure)."""


class CutoffError(RuntimeError):
    """A bosonic factor's top level exceeded the population bound."""


@dataclass(frozen=True)
class RampSpec:
    """Laser turn-on envelope r(t): instantaneous, or sine ramp over t_r."""

    shape: str = "instantaneous"   # "instantaneous" | "sine"
    t_r: float = 0.0               # us

    def __post_init__(self):
        if self.shape not in ("instantaneous", "sine"):
            raise ValueError(f"unknown ramp shape {self.shape!r}")
        if self.shape == "sine" and self.t_r <= 0:
            raise ValueError("sine ramp requires t_r > 0")

    def value(self, t: float) -> float:
        if self.shape == "instantaneous" or t >= self.t_r:
            return 1.0
        if t <= 0.0:
            return 0.0
        return math.sin(0.5 * math.pi * t / self.t_r)

    @property
    def is_trivial(self) -> bool:
        return self.shape == "instantaneous"


def ham_superop(H: np.ndarray) -> sp.csr_matrix:
    """-i[H, .] as a sparse superoperator (row-major vec)."""
    Hs = sp.csr_matrix(H)
    I = sp.identity(H.shape[0], format="csr")
    return (-1j * (sp.kron(Hs, I) - sp.kron(I, Hs.T))).tocsr()


def dissipator_superop(L: np.ndarray) -> sp.csr_matrix:
    """D[L] = 2 L . L^dag - {L^dag L, .} as a sparse superoperator."""
    Ls = sp.csr_matrix(L)
    LdL = sp.csr_matrix(L.conj().T @ L)
    I = sp.identity(L.shape[0], format="csr")
    return (2 * sp.kron(Ls, Ls.conj()) - sp.kron(LdL, I) - sp.kron(I, LdL.T)).tocsr()


def cross_dissipator_superop(A: np.ndarray, B: np.ndarray) -> sp.csr_matrix:
    """Generalized two-operator Lindblad piece 2 A . B^dag - {B^dag A, .}.

    This is the pairing produced by expanding D[c] for a collective jump
    operator c = alpha A + beta B: the alpha*conj(beta) coefficient
    multiplies exactly this combination.
    """
    As = sp.csr_matrix(A)
    Bs = sp.csr_matrix(B)
    BdA = sp.csr_matrix(B.conj().T @ A)
    I = sp.identity(A.shape[0], format="csr")
    return (2 * sp.kron(As, Bs.conj()) - sp.kron(BdA, I) - sp.kron(I, BdA.T)).tocsr()


Coeff = Callable[[float], complex] | None


@dataclass
class Generator:
    """Lindblad generator with optional time-dependent term coefficients.

    ``ham_terms``: list of (coeff, H) pairs, rho' += coeff(t) * (-i)[H, rho]
    ``collapse_terms``: list of (coeff, rate, L): rho' += coeff(t)*rate*D[L]
    ``cross_terms``: list of (coeff, A, B): rho' += coeff(t)*(2 A rho B^dag - {B^dag A, rho})

    A ``None`` coefficient means the constant 1.  Coefficients of
    Hamiltonian terms must be real; cross-term coefficients may be complex
    (their Hermitian partner must be supplied explicitly).
    """

    space: LabeledSpace
    ham_terms: list = field(default_factory=list)
    collapse_terms: list = field(default_factory=list)
    cross_terms: list = field(default_factory=list)
    kappa: float = 0.0
    number_op: np.ndarray | None = None
    populations: list = field(default_factory=list)   # (label, diagonal weight vector)
    excited_diag: np.ndarray | None = None
    top_level_diags: list = field(default_factory=list)  # (factor name, diagonal indicator)
    _pieces: list = field(default_factory=list, repr=False)

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def add_hamiltonian(self, H: np.ndarray, coeff: Coeff = None):
        self.ham_terms.append((coeff, np.asarray(H, dtype=complex)))

    def add_collapse(self, rate: float, L: np.ndarray, coeff: Coeff = None):
        self.collapse_terms.append((coeff, float(rate), np.asarray(L, dtype=complex)))

    def add_cross(self, coeff: Coeff, A: np.ndarray, B: np.ndarray):
        self.cross_terms.append((coeff, np.asarray(A, dtype=complex), np.asarray(B, dtype=complex)))

    # -- superoperator assembly ------------------------------------------------
    def compile(self):
        """Assemble constant sparse pieces; group the time-independent ones."""
        pieces = []
        for coeff, H in self.ham_terms:
            pieces.append((coeff, ham_superop(H)))
        for coeff, rate, L in self.collapse_terms:
            pieces.append((coeff, rate * dissipator_superop(L)))
        for coeff, A, B in self.cross_terms:
            pieces.append((coeff, cross_dissipator_superop(A, B)))
        const = None
        dyn = []
        for coeff, S in pieces:
            if coeff is None:
                const = S if const is None else const + S
            else:
                dyn.append((coeff, S))
        self._pieces = ([(None, const.tocsr())] if const is not None else []) + dyn
        return self

    def rhs(self, t: float, v: np.ndarray) -> np.ndarray:
        if not self._pieces:
            self.compile()
        out = None
        for coeff, S in self._pieces:
            term = S @ v
            if coeff is not None:
                term = term * coeff(t)
            out = term if out is None else out + term
        return out

    @property
    def is_time_dependent(self) -> bool:
        return any(c is not None for c, *_ in self.ham_terms) or \
            any(c is not None for c, *_ in self.collapse_terms) or \
            bool(self.cross_terms and any(c is not None for c, *_ in self.cross_terms))

    # -- views for trajectory engines ------------------------------------------
    def hamiltonian(self, t: float = 0.0) -> np.ndarray:
        H = np.zeros((self.dim, self.dim), dtype=complex)
        for coeff, Hk in self.ham_terms:
            H += Hk if coeff is None else coeff(t) * Hk
        return H

    def collapse_ops(self, t: float = 0.0) -> list[tuple[float, np.ndarray]]:
        out = []
        for coeff, rate, L in self.collapse_terms:
            r = rate if coeff is None else rate * float(np.real(coeff(t)))
            out.append((r, L))
        return out


@dataclass
class EvolutionResult:
    """Time series produced by a master-equation run."""

    times: np.ndarray
    flux: np.ndarray                     # 2*kappa*<a^dag a>(t), 1/us
    nbar_series: np.ndarray              # cumulative trapezoid of flux
    populations: dict                    # label -> series
    excited_population: np.ndarray | None
    states: list | None                  # optional thinned (t, rho) snapshots
    trace_drift: float

    @property
    def nbar(self) -> float:
        return float(self.nbar_series[-1])


def _cumtrapz(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
    return out


def integrate(gen: Generator, rho0: np.ndarray, t_grid: np.ndarray,
              rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
              method: str = "DOP853", store_states: int = 0,
              check_cutoff: bool = True) -> EvolutionResult:
    """Integrate rho' = L(t) rho on the output grid and record observables.

    ``store_states``: 0 keeps no snapshots, N > 0 keeps every N-th grid state.
    """
    gen.compile()
    t_grid = np.asarray(t_grid, dtype=float)
    n = gen.dim
    rho0 = np.asarray(rho0, dtype=complex).reshape(n, n)
    sol = solve_ivp(gen.rhs, (t_grid[0], t_grid[-1]), rho0.ravel(),
                    t_eval=t_grid, method=method, rtol=rtol, atol=atol)
    if not sol.success:
        raise StiffnessError(
            "master-equation integration failed (" + sol.message + "); "
            "for very stiff full-model runs use a reduced-|Delta| scenario "
            "or a tighter rotating frame")
    rhos = sol.y.T.reshape(-1, n, n)

    diag = np.einsum("tii->ti", rhos).real
    tr = diag.sum(axis=1)
    trace_drift = float(np.abs(tr - tr[0]).max())

    flux = np.zeros(len(t_grid))
    if gen.number_op is not None:
        nexp = np.einsum("tij,ji->t", rhos, gen.number_op).real
        flux = 2.0 * gen.kappa * nexp
    pops = {label: diag @ w for label, w in gen.populations}
    excited = diag @ gen.excited_diag if gen.excited_diag is not None else None

    if check_cutoff:
        for name, ind in gen.top_level_diags:
            top = diag @ ind
            if top.max() >= TOP_LEVEL_POP_MAX:
                raise CutoffError(
                    f"top Fock level of factor {name!r} reached population "
                    f"{top.max():.2e} >= {TOP_LEVEL_POP_MAX}; increase the cutoff")

    states = None
    if store_states:
        states = [(t_grid[i], rhos[i]) for i in range(0, len(t_grid), store_states)]
    return EvolutionResult(times=t_grid, flux=flux, nbar_series=_cumtrapz(flux, t_grid),
                           populations=pops, excited_population=excited,
                           states=states, trace_drift=trace_drift)


def observables(result: EvolutionResult):
    """(flux series, N-bar, population series) view of an EvolutionResult."""
    return result.flux, result.nbar, result.populations


@dataclass(frozen=True)
class Sech2Fit:
    amplitude: float
    t0: float
    tau: float
    r_squared: float


def fit_sech2(times: np.ndarray, flux: np.ndarray) -> Sech2Fit:
    """Least-squares fit of A*sech((t-t0)/tau)^2 to a flux curve."""

    def model(t, A, t0, tau):
        return A / np.cosh((t - t0) / tau) ** 2

    imax = int(np.argmax(flux))
    above = flux >= 0.5 * flux[imax]
    fwhm = times[above][-1] - times[above][0] if above.sum() > 1 else (times[-1] - times[0]) / 4
    p0 = [float(flux[imax]), float(times[imax]), max(fwhm / 1.7627, 1e-9)]
    popt, _ = curve_fit(model, times, flux, p0=p0, maxfev=20000)
    resid = flux - model(times, *popt)
    ss_tot = float(np.sum((flux - flux.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return Sech2Fit(amplitude=float(popt[0]), t0=float(popt[1]),
                    tau=float(abs(popt[2])), r_squared=r2)


def run_with_tail_check(gen: Generator, rho0: np.ndarray, horizon: float,
                        npts: int = 1600, tail_fraction: float = 1e-4,
                        max_extensions: int = 3, **kw) -> EvolutionResult:
    """Integrate to ``horizon``, extending by 1.5x while the tail flux is hot."""
    T = horizon
    for _ in range(max_extensions + 1):
        res = integrate(gen, rho0, np.linspace(0.0, T, npts), **kw)
        peak = res.flux.max()
        if peak <= 0 or res.flux[-1] < tail_fraction * peak:
            return res
        T *= 1.5
    return res
