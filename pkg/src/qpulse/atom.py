"""Alkali hyperfine structure and normalized dipole transition operators.

The lowering operator for polarization q couples ground |F,m> to excited
|F',m+q>.  Matrix elements use the standard hyperfine factorization
(Wigner-Eckart over F, 6j reduction over J, J', I) in units of the
J-reduced dipole element with the Clebsch-Gordan convention, so that

* the stretched cycling transition of a D2 line (e.g. |2,+2> <-> |3',+3>
  for Rb87) has matrix element exactly 1, and
* the total decay strength out of any excited sublevel is exactly 1
  (isotropic decay at the line's own rate gamma).

D1 lines have no cycling transition; they inherit the same convention
(elements in units of their own J-reduced dipole element), which is the
unique choice that keeps the decay isotropy sum at 1.  Any global
rescaling would be absorbed into g and Omega.

Built-in hyperfine constants cover Rb87 D1/D2 and Cs133 D1 and can be
overridden via the scenario config.  Angular frequencies are stored in
rad/us (table entries quoted in 2*pi*MHz).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .angular import clebsch_gordan, wigner6j
from .hilbert import LabeledSpace, Operator

TWO_PI = 2.0 * math.pi


class UnknownLevelError(KeyError):
    """Requested hyperfine level not present in the atom spec."""


@dataclass(frozen=True)
class AtomSpec:
    """Species-level hyperfine structure for one D line.

    Energy offsets are angular frequencies (rad/us): ground offsets are
    measured from the lower ground level (zero of energy), excited offsets
    from the lowest listed F'.
    """

    species: str
    line: str                       # "D1" | "D2"
    nuclear_spin: float             # I
    j_ground: float                 # J
    j_excited: float                # J'
    ground_f_levels: tuple[tuple[float, float], ...]   # (F, offset)
    excited_f_levels: tuple[tuple[float, float], ...]  # (F', offset above lowest F')
    gamma: float                    # free-space decay rate (rad/us)

    def __post_init__(self):
        I, J, Jp = self.nuclear_spin, self.j_ground, self.j_excited
        for F, _ in self.ground_f_levels:
            if not (abs(J - I) - 1e-9 <= F <= J + I + 1e-9):
                raise ValueError(f"ground F={F} violates |J-I| <= F <= J+I")
        for Fp, _ in self.excited_f_levels:
            if not (abs(Jp - I) - 1e-9 <= Fp <= Jp + I + 1e-9):
                raise ValueError(f"excited F'={Fp} violates |J'-I| <= F' <= J'+I")
        if self.omega_ghs <= 0:
            raise ValueError("ground hyperfine splitting must be positive")
        offs = [o for _, o in self.excited_f_levels]
        if offs != sorted(offs) or min(offs) != 0.0:
            raise ValueError("excited offsets must be ascending with the lowest at 0")

    @property
    def omega_ghs(self) -> float:
        """Upper minus lower ground hyperfine level (rad/us)."""
        offs = sorted(o for _, o in self.ground_f_levels)
        return offs[-1] - offs[0]

    @property
    def f_lower(self) -> float:
        return min(self.ground_f_levels)[0]

    @property
    def f_upper(self) -> float:
        return max(self.ground_f_levels)[0]

    def ground_fs(self) -> list[float]:
        return [F for F, _ in self.ground_f_levels]

    def excited_fs(self) -> list[float]:
        return [F for F, _ in self.excited_f_levels]

    def excited_offset(self, f_excited: float) -> float:
        for Fp, off in self.excited_f_levels:
            if abs(Fp - f_excited) < 1e-9:
                return off
        raise UnknownLevelError(f"excited F'={f_excited} not in spec")


# Hyperfine constants in 2*pi*MHz (splittings) from standard alkali line data.
_TABLE = {
    ("Rb87", "D1"): dict(
        nuclear_spin=1.5, j_ground=0.5, j_excited=0.5,
        ground=((1.0, 0.0), (2.0, 6834.682610904290)),
        excited=((1.0, 0.0), (2.0, 814.5)),
        gamma=5.746,
    ),
    ("Rb87", "D2"): dict(
        nuclear_spin=1.5, j_ground=0.5, j_excited=1.5,
        ground=((1.0, 0.0), (2.0, 6834.682610904290)),
        excited=((0.0, 0.0), (1.0, 72.218), (2.0, 229.1649), (3.0, 495.8147)),
        gamma=6.0666,
    ),
    ("Cs133", "D1"): dict(
        nuclear_spin=3.5, j_ground=0.5, j_excited=0.5,
        ground=((3.0, 0.0), (4.0, 9192.631770)),
        excited=((3.0, 0.0), (4.0, 1167.68)),
        gamma=4.575,
    ),
}


def atom_spec(species: str, line: str, gamma: float | None = None,
              omega_ghs: float | None = None,
              excited_splittings: tuple[float, ...] | None = None) -> AtomSpec:
    """Build an AtomSpec from the built-in table, with optional overrides.

    ``gamma`` and ``omega_ghs`` are angular frequencies in rad/us;
    ``excited_splittings`` lists offsets above the lowest F' (rad/us).
    """
    key = (species, line)
    if key not in _TABLE:
        raise UnknownLevelError(f"no built-in data for {species} {line}")
    t = _TABLE[key]
    ground = tuple((F, off * TWO_PI) for F, off in t["ground"])
    excited = tuple((F, off * TWO_PI) for F, off in t["excited"])
    if omega_ghs is not None:
        lo = min(ground)[0]
        ground = tuple((F, 0.0 if F == lo else omega_ghs) for F, _ in ground)
    if excited_splittings is not None:
        if len(excited_splittings) != len(excited):
            raise ValueError("excited_splittings length mismatch")
        excited = tuple((F, s) for (F, _), s in zip(excited, excited_splittings))
    return AtomSpec(
        species=species, line=line,
        nuclear_spin=t["nuclear_spin"], j_ground=t["j_ground"], j_excited=t["j_excited"],
        ground_f_levels=ground, excited_f_levels=excited,
        gamma=(gamma if gamma is not None else t["gamma"] * TWO_PI),
    )


def _mrange(F: float):
    n = int(round(2 * F)) + 1
    return [m - F for m in range(n)]


def atomic_states(spec: AtomSpec) -> list[tuple[str, float, float]]:
    """Basis ordering: lower-F ground, upper-F ground, then excited manifolds."""
    states = []
    for F, _ in sorted(spec.ground_f_levels):
        states += [("g", F, m) for m in _mrange(F)]
    for Fp, _ in spec.excited_f_levels:
        states += [("e", Fp, m) for m in _mrange(Fp)]
    return states


def atomic_space(spec: AtomSpec, name: str = "atom") -> LabeledSpace:
    labels = [f"{k}:F={F:g},m={m:+g}" for k, F, m in atomic_states(spec)]
    return LabeledSpace.single(name, labels)


def state_index(spec: AtomSpec, kind: str, F: float, m: float) -> int:
    for i, (k, Fi, mi) in enumerate(atomic_states(spec)):
        if k == kind and abs(Fi - F) < 1e-9 and abs(mi - m) < 1e-9:
            return i
    raise UnknownLevelError(f"state ({kind}, F={F}, m={m}) not in spec")


def dipole_element(spec: AtomSpec, F: float, m: float, f_excited: float,
                   m_excited: float, q: int) -> float:
    """<F,m| mu_q |F',m'> in normalized (cycling-transition = 1) units.

    Zero unless m' = m + q, |Delta F| <= 1 and both levels exist in the spec.
    """
    if not any(abs(F - Fi) < 1e-9 for Fi in spec.ground_fs()):
        raise UnknownLevelError(f"ground F={F} not in spec")
    if not any(abs(f_excited - Fi) < 1e-9 for Fi in spec.excited_fs()):
        raise UnknownLevelError(f"excited F'={f_excited} not in spec")
    if abs(m) > F + 1e-9 or abs(m_excited) > f_excited + 1e-9:
        return 0.0
    if abs(m_excited - (m + q)) > 1e-9:
        return 0.0
    J, Jp, I = spec.j_ground, spec.j_excited, spec.nuclear_spin
    phase = -1.0 if int(round(f_excited + 1 + Jp - J + q)) % 2 else 1.0
    red = math.sqrt((2 * f_excited + 1) * (2 * Jp + 1)) * wigner6j(J, Jp, 1, f_excited, F, I)
    return phase * red * clebsch_gordan(f_excited, m_excited, 1, -q, F, m)


@dataclass(frozen=True)
class DipoleOperatorSet:
    """All D_q(F,F') blocks plus the aggregated decay operators L_q."""

    space: LabeledSpace
    ops: dict = field(repr=False)        # (q, F, F') -> Operator (lowering)
    aggregated: dict = field(repr=False)  # q -> Operator, L_q = sum_{F,F'} D_q(F,F')

    def d(self, q: int, F: float, f_excited: float) -> Operator:
        return self.ops[(q, float(F), float(f_excited))]

    def l(self, q: int) -> Operator:
        return self.aggregated[q]


def build_dipole_operators(spec: AtomSpec) -> DipoleOperatorSet:
    space = atomic_space(spec)
    n = space.total_dim
    ops = {}
    aggregated = {}
    for q in (-1, 0, 1):
        total = np.zeros((n, n))
        for F in spec.ground_fs():
            for Fp in spec.excited_fs():
                blk = np.zeros((n, n))
                for m in _mrange(F):
                    mp = m + q
                    if abs(mp) > Fp + 1e-9:
                        continue
                    el = dipole_element(spec, F, m, Fp, mp, q)
                    if el != 0.0:
                        blk[state_index(spec, "g", F, m), state_index(spec, "e", Fp, mp)] = el
                ops[(q, float(F), float(Fp))] = Operator(space, blk)
                total += blk
        aggregated[q] = Operator(space, total)
    return DipoleOperatorSet(space=space, ops=ops, aggregated=aggregated)


def ground_projector(spec: AtomSpec, F: float) -> Operator:
    space = atomic_space(spec)
    d = np.zeros(space.total_dim)
    for m in _mrange(F):
        d[state_index(spec, "g", F, m)] = 1.0
    return Operator(space, np.diag(d))


def excited_projector(spec: AtomSpec) -> Operator:
    space = atomic_space(spec)
    d = np.zeros(space.total_dim)
    for k, F, m in atomic_states(spec):
        if k == "e":
            d[state_index(spec, "e", F, m)] = 1.0
    return Operator(space, np.diag(d))
