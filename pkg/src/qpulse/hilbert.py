"""Dense operator algebra over labeled finite-dimensional Hilbert spaces.

A :class:`LabeledSpace` is an ordered tensor product of named factors, each
with a list of basis labels (e.g. atomic levels ``g:F=2,m=-2`` or Fock
states ``n=3``).  Operators and states carry their space, which makes
tensor-index bookkeeping explicit and lets mismatches fail loudly.

Conventions used throughout the package:

* dissipator with the factor-2 normalization
  ``D[L] rho = 2 L rho L^dag - rho L^dag L - L^dag L rho``,
  so the master-equation term ``kappa*D[a]`` gives photon flux
  ``2*kappa*<a^dag a>``;
* spin operators with ``S+|F,m> = sqrt(F(F+1)-m(m+1)) |F,m+1>``.

All operators are immutable after construction (arrays are marked
read-only) and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
PURE_NORM_TOL = 1e-10
DENSITY_TOL = 1e-10
DENSITY_EIG_TOL = 1e-8
DEFAULT_DIM_CAP = 65536


class SpaceMismatchError(ValueError):
    """Raised when operators or states live on different spaces."""


class DimensionCapError(ValueError):
    """Raised when a tensor product would exceed the configured dimension cap."""


@dataclass(frozen=True)
class LabeledSpace:
    """Ordered tensor product of named factors with basis labels."""

    factors: tuple[tuple[str, int, tuple[str, ...]], ...]

    def __post_init__(self):
        for name, dim, labels in self.factors:
            if len(labels) != dim:
                raise ValueError(f"factor {name!r}: {len(labels)} labels for dimension {dim}")
            if len(set(labels)) != dim:
                raise ValueError(f"factor {name!r}: basis labels not unique")

    @staticmethod
    def single(name: str, labels: Sequence[str]) -> "LabeledSpace":
        labels = tuple(str(l) for l in labels)
        return LabeledSpace(((name, len(labels), labels),))

    @property
    def total_dim(self) -> int:
        d = 1
        for _, dim, _ in self.factors:
            d *= dim
        return d

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _, _ in self.factors)

    def basis_labels(self) -> list[str]:
        """Full-space labels, slowest factor first (row-major kron order)."""
        out = [""]
        for _, _, labels in self.factors:
            out = [f"{a}|{l}" if a else l for a in out for l in labels]
        return out

    def factor_index(self, name: str) -> int:
        for i, (n, _, _) in enumerate(self.factors):
            if n == name:
                return i
        raise KeyError(f"no factor named {name!r}")

    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim, _ in self.factors)


def _combine(a: LabeledSpace, b: LabeledSpace, cap: int) -> LabeledSpace:
    overlap = set(a.names) & set(b.names)
    if overlap:
        raise SpaceMismatchError(f"factor names overlap in tensor product: {sorted(overlap)}")
    if a.total_dim * b.total_dim > cap:
        raise DimensionCapError(
            f"tensor product dimension {a.total_dim * b.total_dim} exceeds cap {cap}")
    return LabeledSpace(a.factors + b.factors)


@dataclass(frozen=True)
class Operator:
    """Dense complex operator on a labeled space."""

    space: LabeledSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.space.total_dim
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match space dim {n}")
        m = np.ascontiguousarray(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        scale = max(np.abs(self.matrix).max(), 1.0)
        return np.abs(self.matrix - self.matrix.conj().T).max() <= tol * scale

    def __add__(self, other):
        self._check(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other):
        self._check(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar):
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return Operator(self.space, -self.matrix)

    def __matmul__(self, other):
        self._check(other)
        return Operator(self.space, self.matrix @ other.matrix)

    def _check(self, other):
        if not isinstance(other, Operator):
            raise TypeError("expected Operator")
        if other.space != self.space:
            raise SpaceMismatchError("operators live on different spaces")


@dataclass(frozen=True)
class QuantumState:
    """Pure ket or density matrix on a labeled space."""

    kind: str  # "pure" | "density"
    space: LabeledSpace
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.asarray(self.data, dtype=complex)
        n = self.space.total_dim
        if self.kind == "pure":
            if d.shape != (n,):
                raise ValueError(f"ket shape {d.shape}, expected ({n},)")
            nrm = np.linalg.norm(d)
            if abs(nrm - 1.0) > PURE_NORM_TOL:
                raise ValueError(f"ket norm {nrm} deviates from 1 beyond {PURE_NORM_TOL}")
        elif self.kind == "density":
            if d.shape != (n, n):
                raise ValueError(f"density shape {d.shape}, expected ({n},{n})")
            tr = np.trace(d)
            if abs(tr - 1.0) > DENSITY_TOL:
                raise ValueError(f"trace {tr} deviates from 1 beyond {DENSITY_TOL}")
            if np.abs(d - d.conj().T).max() > DENSITY_TOL:
                raise ValueError("density matrix not Hermitian within tolerance")
            if np.linalg.eigvalsh(d).min() < -DENSITY_EIG_TOL:
                raise ValueError("density matrix has negative eigenvalue beyond tolerance")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")
        d = np.ascontiguousarray(d)
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @staticmethod
    def pure(space: LabeledSpace, amplitudes) -> "QuantumState":
        v = np.asarray(amplitudes, dtype=complex)
        return QuantumState("pure", space, v / np.linalg.norm(v))

    def to_density(self) -> "QuantumState":
        if self.kind == "density":
            return self
        return QuantumState("density", self.space, np.outer(self.data, self.data.conj()))

    @property
    def density_matrix(self) -> np.ndarray:
        return self.to_density().data


def tensor(a: Operator, b: Operator, dim_cap: int = DEFAULT_DIM_CAP) -> Operator:
    """Kronecker product on the concatenated space (factor order preserved)."""
    space = _combine(a.space, b.space, dim_cap)
    return Operator(space, np.kron(a.matrix, b.matrix))


def tensor_state(a: QuantumState, b: QuantumState, dim_cap: int = DEFAULT_DIM_CAP) -> QuantumState:
    space = _combine(a.space, b.space, dim_cap)
    if a.kind == "pure" and b.kind == "pure":
        return QuantumState("pure", space, np.kron(a.data, b.data))
    return QuantumState("density", space, np.kron(a.density_matrix, b.density_matrix))


def identity(space: LabeledSpace) -> Operator:
    return Operator(space, np.eye(space.total_dim))


def fock_space(n_max: int, name: str = "cavity") -> LabeledSpace:
    return LabeledSpace.single(name, [f"n={n}" for n in range(n_max + 1)])


def annihilation(n_max: int, name: str = "cavity") -> Operator:
    """Bosonic annihilation operator with Fock cutoff n_max: <n-1|a|n> = sqrt(n)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    d = n_max + 1
    a = np.zeros((d, d))
    a[np.arange(d - 1), np.arange(1, d)] = np.sqrt(np.arange(1, d))
    return Operator(fock_space(n_max, name), a)


def spin_space(F: float, name: str = "spin") -> LabeledSpace:
    ms = [m - F for m in range(int(round(2 * F)) + 1)]
    return LabeledSpace.single(name, [f"m={m:+g}" for m in ms])


def spin_operators(F: float, name: str = "spin") -> tuple[Operator, Operator, Operator]:
    """(S+, S-, Sz) for a spin of size F (integer or half-integer)."""
    twoF = 2 * F
    if abs(twoF - round(twoF)) > 1e-12 or F < 0:
        raise ValueError("2F must be a nonnegative integer")
    d = int(round(twoF)) + 1
    m = np.arange(d) - F
    sp = np.zeros((d, d))
    sp[np.arange(1, d), np.arange(d - 1)] = np.sqrt(F * (F + 1) - m[:-1] * (m[:-1] + 1))
    space = spin_space(F, name)
    return Operator(space, sp), Operator(space, sp.T), Operator(space, np.diag(m))


def dissipator_matrix(L: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """D[L] rho = 2 L rho L^dag - rho L^dag L - L^dag L rho (factor-2 convention)."""
    LdL = L.conj().T @ L
    return 2.0 * L @ rho @ L.conj().T - rho @ LdL - LdL @ rho


def dissipator(L: Operator, rho: QuantumState) -> Operator:
    """Apply the dissipator to a density state; returns the (traceless) increment."""
    if rho.kind != "density":
        raise ValueError("dissipator expects a density-kind state")
    if L.space != rho.space:
        raise SpaceMismatchError("dissipator: operator and state spaces differ")
    return Operator(L.space, dissipator_matrix(L.matrix, rho.data))


def expect(op: Operator, state: QuantumState) -> complex:
    """<psi|O|psi> for pure states, Tr(O rho) for density matrices."""
    if op.space != state.space:
        raise SpaceMismatchError("expect: operator and state spaces differ")
    if state.kind == "pure":
        return complex(state.data.conj() @ (op.matrix @ state.data))
    return complex(np.trace(op.matrix @ state.data))


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out all factors not listed in ``keep`` (indices into ``dims``)."""
    dims = tuple(dims)
    keep = tuple(sorted(keep))
    n = len(dims)
    t = rho.reshape(dims + dims)
    traced = 0
    for i in range(n):
        if i not in keep:
            ax = i - traced
            t = np.trace(t, axis1=ax, axis2=ax + (n - traced))
            traced += 1
    d = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(d, d)


def ptrace(state: QuantumState, keep_names: Sequence[str]) -> QuantumState:
    """Partial trace keeping the named factors (in their original order)."""
    dims = state.space.dims()
    keep = sorted(state.space.factor_index(nm) for nm in keep_names)
    sub = LabeledSpace(tuple(state.space.factors[i] for i in keep))
    return QuantumState("density", sub, partial_trace(state.density_matrix, dims, keep))
