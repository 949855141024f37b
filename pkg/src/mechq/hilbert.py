"""Hilbert-space primitives: operators, states, exact diagonalization.

Composite space is qubit (x) Fock with the qubit index major:
basis state ``i = q * dim_fock + n`` for qubit level ``q`` (0 = ground,
1 = excited) and phonon number ``n``.  ``sigma_z`` is +1 on the excited
level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

DEFAULT_FOCK_DIM = 10

HERMITICITY_TOL = 1e-12
KET_NORM_TOL = 1e-10
DENSITY_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-9


class ContractViolationError(ValueError):
    """An input or result violates one of the module contracts."""


class InvalidDimensionError(ContractViolationError):
    """Requested Hilbert-space dimension is not usable."""


# ---------------------------------------------------------------------------
# elementary operators


def annihilation(dim_fock: int) -> np.ndarray:
    """Fock-space annihilation operator, sqrt(n) on the superdiagonal."""
    if dim_fock < 2:
        raise InvalidDimensionError(
            f"annihilation needs dim_fock >= 2, got {dim_fock}"
        )
    return np.diag(np.sqrt(np.arange(1, dim_fock, dtype=float)), k=1).astype(complex)


def creation(dim_fock: int) -> np.ndarray:
    return annihilation(dim_fock).conj().T


def number(dim_fock: int) -> np.ndarray:
    if dim_fock < 2:
        raise InvalidDimensionError(f"number needs dim_fock >= 2, got {dim_fock}")
    return np.diag(np.arange(dim_fock, dtype=float)).astype(complex)


def identity(dim: int) -> np.ndarray:
    if dim < 1:
        raise InvalidDimensionError(f"identity needs dim >= 1, got {dim}")
    return np.eye(dim, dtype=complex)


def sigma_z() -> np.ndarray:
    """diag(-1, +1) in the (ground, excited) ordering."""
    return np.diag([-1.0 + 0j, 1.0 + 0j])


def sigma_minus() -> np.ndarray:
    """Lowers excited -> ground."""
    m = np.zeros((2, 2), dtype=complex)
    m[0, 1] = 1.0
    return m


def sigma_plus() -> np.ndarray:
    return sigma_minus().conj().T


def sigma_x() -> np.ndarray:
    return sigma_minus() + sigma_plus()


def sigma_y() -> np.ndarray:
    # ground-state-first ordering: sigma_pm = (sigma_x pm i sigma_y) / 2
    # and [sigma_x, sigma_y] = 2i sigma_z with sigma_z = diag(-1, +1)
    return 1j * sigma_minus() - 1j * sigma_plus()


def tensor(qubit_part: np.ndarray, fock_part: np.ndarray) -> np.ndarray:
    """Kronecker product in the fixed qubit (x) Fock order."""
    qubit_part = np.asarray(qubit_part, dtype=complex)
    fock_part = np.asarray(fock_part, dtype=complex)
    if qubit_part.shape != (2, 2):
        raise InvalidDimensionError(
            f"qubit factor must be 2x2, got {qubit_part.shape}"
        )
    return np.kron(qubit_part, fock_part)


def basis_index(qubit_level: int, n: int, dim_fock: int) -> int:
    """Flat index of |qubit_level, n> in the qubit-major composite basis."""
    if qubit_level not in (0, 1):
        raise InvalidDimensionError(f"qubit level must be 0 or 1, got {qubit_level}")
    if not 0 <= n < dim_fock:
        raise InvalidDimensionError(f"Fock index {n} outside [0, {dim_fock})")
    return qubit_level * dim_fock + n


def fock_ket(n: int, dim: int) -> np.ndarray:
    if not 0 <= n < dim:
        raise InvalidDimensionError(f"Fock index {n} outside [0, {dim})")
    ket = np.zeros(dim, dtype=complex)
    ket[n] = 1.0
    return ket


def composite_ket(qubit_level: int, n: int, dim_fock: int) -> np.ndarray:
    ket = np.zeros(2 * dim_fock, dtype=complex)
    ket[basis_index(qubit_level, n, dim_fock)] = 1.0
    return ket


# ---------------------------------------------------------------------------
# wrapped operator with serialization


@dataclass
class ComplexOperator:
    """Dense operator on the composite qubit (x) Fock space.

    Carries its factor dimensions so serialized operators can be
    reconstructed without out-of-band metadata.
    """

    dim_qubit: int
    dim_fock: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if self.dim_qubit != 2:
            raise InvalidDimensionError(
                f"composite operators have dim_qubit = 2, got {self.dim_qubit}"
            )
        if self.dim_fock < 2:
            raise InvalidDimensionError(
                f"dim_fock must be >= 2, got {self.dim_fock}"
            )
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dim = self.dim_qubit * self.dim_fock
        if self.matrix.shape != (dim, dim):
            raise ContractViolationError(
                f"matrix shape {self.matrix.shape} does not match "
                f"dim_qubit * dim_fock = {dim}"
            )

    @property
    def dim(self) -> int:
        return self.dim_qubit * self.dim_fock

    def dagger(self) -> "ComplexOperator":
        return ComplexOperator(self.dim_qubit, self.dim_fock, self.matrix.conj().T)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def require_hermitian(self, tol: float = HERMITICITY_TOL) -> "ComplexOperator":
        defect = self.hermiticity_defect()
        if defect > tol:
            raise ContractViolationError(
                f"operator is not Hermitian: max |H - H^dag| = {defect:.3e} > {tol:.0e}"
            )
        return self

    def to_json(self) -> str:
        payload = {
            "dim_qubit": self.dim_qubit,
            "dim_fock": self.dim_fock,
            "re": self.matrix.real.reshape(-1).tolist(),
            "im": self.matrix.imag.reshape(-1).tolist(),
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "ComplexOperator":
        payload = json.loads(text)
        dim = payload["dim_qubit"] * payload["dim_fock"]
        re = np.asarray(payload["re"], dtype=float).reshape(dim, dim)
        im = np.asarray(payload["im"], dtype=float).reshape(dim, dim)
        return cls(payload["dim_qubit"], payload["dim_fock"], re + 1j * im)


# ---------------------------------------------------------------------------
# states


@dataclass
class QuantumState:
    """Ket or density matrix with contract validation on construction."""

    kind: str
    data: np.ndarray

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=complex)
        if self.kind == "ket":
            if self.data.ndim != 1:
                raise ContractViolationError("ket data must be one-dimensional")
            norm = float(np.linalg.norm(self.data))
            if abs(norm - 1.0) > KET_NORM_TOL:
                raise ContractViolationError(
                    f"ket norm {norm} deviates from 1 by more than {KET_NORM_TOL:.0e}"
                )
        elif self.kind == "density":
            if self.data.ndim != 2 or self.data.shape[0] != self.data.shape[1]:
                raise ContractViolationError("density data must be a square matrix")
            defect = float(np.max(np.abs(self.data - self.data.conj().T)))
            if defect > DENSITY_TOL:
                raise ContractViolationError(
                    f"density matrix Hermiticity defect {defect:.3e}"
                )
            trace = complex(np.trace(self.data))
            if abs(trace - 1.0) > DENSITY_TOL:
                raise ContractViolationError(
                    f"density matrix trace {trace} deviates from 1"
                )
            min_eig = float(np.linalg.eigvalsh(self.data).min())
            if min_eig < EIGENVALUE_FLOOR:
                raise ContractViolationError(
                    f"density matrix has eigenvalue {min_eig:.3e} below "
                    f"{EIGENVALUE_FLOOR:.0e}"
                )
        else:
            raise ContractViolationError(
                f"state kind must be 'ket' or 'density', got {self.kind!r}"
            )

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def to_density(self) -> np.ndarray:
        if self.kind == "ket":
            return np.outer(self.data, self.data.conj())
        return self.data.copy()


# ---------------------------------------------------------------------------
# diagonalization


def eigh(operator) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian operator.

    Returns eigenvalues in ascending order and eigenvectors as columns,
    each rephased so its largest-magnitude component is real positive
    (deterministic output across LAPACK builds).  Non-Hermitian input is
    a contract violation.
    """
    matrix = operator.matrix if isinstance(operator, ComplexOperator) else operator
    matrix = np.asarray(matrix, dtype=complex)
    defect = float(np.max(np.abs(matrix - matrix.conj().T)))
    if defect > HERMITICITY_TOL:
        raise ContractViolationError(
            f"eigh requires a Hermitian matrix; defect {defect:.3e}"
        )
    values, vectors = np.linalg.eigh(matrix)
    for k in range(vectors.shape[1]):
        col = vectors[:, k]
        j = int(np.argmax(np.abs(col)))
        phase = col[j] / abs(col[j])
        vectors[:, k] = col / phase
    return values, vectors
