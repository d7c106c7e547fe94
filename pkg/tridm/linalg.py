import math
from enum import IntEnum
from typing import Iterable, Literal, NamedTuple, Sequence, Union

import numpy as np

# Dense complex linear algebra for the 2-, 4- and 8-dimensional operators of the
# three-qubit model. Basis convention: |e> = |0> = (1, 0), |g> = |1> = (0, 1);
# tensor order A (x) B (x) C with A the most significant subsystem.

HERMITIAN_ATOL = 1e-9
UNITARY_ATOL = 1e-10
EQUALITY_ATOL = 1e-10
MAX_GENERAL_DIM = 8

Axis = Literal["x", "y", "z"]
Number = Union[int, float, complex]


class LinalgError(ArithmeticError):
    """Base class for numerical failures raised by the linear algebra layer."""


class NotHermitianError(LinalgError):
    def __init__(self, deviation: float, atol: float = HERMITIAN_ATOL):
        super().__init__(f"Matrix is not Hermitian: max |M - M^dagger| = {deviation:.3e} > {atol:.1e}")
        self.deviation = deviation


class NotUnitaryError(LinalgError):
    def __init__(self, deviation: float, atol: float = UNITARY_ATOL):
        super().__init__(f"Matrix is not unitary: max |U^dagger U - I| = {deviation:.3e} > {atol:.1e}")
        self.deviation = deviation


class NoConvergenceError(LinalgError):
    """Raised when the general eigenvalue iteration does not converge."""


class DimensionMismatchError(ValueError):
    """Raised when operand shapes or subsystem dimensions are incompatible."""


class Subsystem(IntEnum):
    FIRST = 0
    SECOND = 1


class ComplexMatrix:
    """
    Immutable dense square complex matrix.

    Entries are stored in a read-only ``numpy.complex128`` array. Equality uses an
    absolute tolerance (``EQUALITY_ATOL``), never exact float comparison.
    """

    __slots__ = ("_data",)

    def __init__(self, entries) -> None:
        data = np.array(entries, dtype=np.complex128)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] == 0:
            raise DimensionMismatchError(f"ComplexMatrix needs a non-empty square array, got shape {data.shape}")
        data.setflags(write=False)
        self._data = data

    @classmethod
    def identity(cls, dim: int) -> "ComplexMatrix":
        return cls(np.eye(dim, dtype=np.complex128))

    @classmethod
    def projector(cls, vector: Sequence[Number]) -> "ComplexMatrix":
        """Return |v><v| for a (not necessarily normalized) ket."""
        ket_ = np.asarray(vector, dtype=np.complex128).reshape(-1)
        return cls(np.outer(ket_, ket_.conj()))

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def entries(self) -> tuple[complex, ...]:
        return tuple(complex(value) for value in self._data.reshape(-1))

    def __getitem__(self, index: tuple[int, int]) -> complex:
        return complex(self._data[index])

    def __matmul__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        self._check_same_dim(other)
        return ComplexMatrix(self._data @ other._data)

    def __add__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        self._check_same_dim(other)
        return ComplexMatrix(self._data + other._data)

    def __sub__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        self._check_same_dim(other)
        return ComplexMatrix(self._data - other._data)

    def __mul__(self, scalar: Number) -> "ComplexMatrix":
        if isinstance(scalar, ComplexMatrix):
            raise TypeError("Use @ for matrix products")
        return ComplexMatrix(self._data * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "ComplexMatrix":
        return ComplexMatrix(-self._data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ComplexMatrix):
            return NotImplemented
        return self.isclose(other)

    __hash__ = None

    def __repr__(self) -> str:
        return f"ComplexMatrix(dim={self.dim}, entries={self._data.tolist()!r})"

    def dagger(self) -> "ComplexMatrix":
        return ComplexMatrix(self._data.conj().T)

    def conj(self) -> "ComplexMatrix":
        return ComplexMatrix(self._data.conj())

    def transpose(self) -> "ComplexMatrix":
        return ComplexMatrix(self._data.T)

    def trace(self) -> complex:
        return complex(np.trace(self._data))

    def frobenius_distance(self, other: "ComplexMatrix") -> float:
        self._check_same_dim(other)
        return float(np.linalg.norm(self._data - other._data))

    def isclose(self, other: "ComplexMatrix", atol: float = EQUALITY_ATOL) -> bool:
        if self.dim != other.dim:
            return False
        return bool(np.max(np.abs(self._data - other._data)) <= atol)

    def hermiticity_deviation(self) -> float:
        return float(np.max(np.abs(self._data - self._data.conj().T)))

    def _check_same_dim(self, other: "ComplexMatrix") -> None:
        if not isinstance(other, ComplexMatrix):
            raise TypeError(f"Expected ComplexMatrix, got {type(other).__name__}")
        if self.dim != other.dim:
            raise DimensionMismatchError(f"Dimension mismatch: {self.dim} vs {other.dim}")


class EigenDecomposition(NamedTuple):
    eigenvalues: tuple
    eigenvectors: ComplexMatrix


_PAULI = {
    "x": ((0, 1), (1, 0)),
    # Sign convention of the model's Hamiltonian display: sigma_y = i(|0><1| - |1><0|).
    "y": ((0, 1j), (-1j, 0)),
    "z": ((1, 0), (0, -1)),
}


def pauli(axis: Axis) -> ComplexMatrix:
    try:
        return ComplexMatrix(_PAULI[axis])
    except KeyError:
        raise ValueError(f"Unknown Pauli axis {axis!r}; expected one of 'x', 'y', 'z'") from None


def ket(bits: str) -> np.ndarray:
    """Computational basis ket for a bit string, e.g. ``ket('011')`` = |e g g>."""
    if not bits or any(bit not in "01" for bit in bits):
        raise ValueError(f"Invalid basis label {bits!r}")
    vector = np.zeros(2 ** len(bits), dtype=np.complex128)
    vector[int(bits, 2)] = 1.0
    return vector


def kron(a: ComplexMatrix, b: ComplexMatrix, *more: ComplexMatrix) -> ComplexMatrix:
    result = np.kron(a.data, b.data)
    for factor in more:
        result = np.kron(result, factor.data)
    return ComplexMatrix(result)


def is_hermitian(m: ComplexMatrix, atol: float = HERMITIAN_ATOL) -> bool:
    return m.hermiticity_deviation() <= atol


def unitarity_deviation(u: ComplexMatrix) -> float:
    return float(np.max(np.abs(u.data.conj().T @ u.data - np.eye(u.dim))))


def is_unitary(u: ComplexMatrix, atol: float = UNITARY_ATOL) -> bool:
    return unitarity_deviation(u) <= atol


def require_unitary(u: ComplexMatrix, atol: float = UNITARY_ATOL) -> ComplexMatrix:
    deviation = unitarity_deviation(u)
    if deviation > atol:
        raise NotUnitaryError(deviation, atol)
    return u


def hermitian_eig(m: ComplexMatrix) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending."""
    deviation = m.hermiticity_deviation()
    if deviation > HERMITIAN_ATOL:
        raise NotHermitianError(deviation)
    hermitian = 0.5 * (m.data + m.data.conj().T)
    values, vectors = np.linalg.eigh(hermitian)
    order = np.argsort(values, kind="stable")[::-1]
    return EigenDecomposition(
        eigenvalues=tuple(float(value) for value in values[order]),
        eigenvectors=ComplexMatrix(vectors[:, order]),
    )


def general_eigvals(m: ComplexMatrix) -> tuple[complex, ...]:
    """All eigenvalues of a (possibly non-Hermitian) matrix, unordered."""
    if m.dim > MAX_GENERAL_DIM:
        raise DimensionMismatchError(f"general_eigvals supports dim <= {MAX_GENERAL_DIM}, got {m.dim}")
    try:
        values = np.linalg.eigvals(m.data)
    except np.linalg.LinAlgError as e:
        condition = np.linalg.cond(m.data)
        raise NoConvergenceError(f"Eigenvalue iteration did not converge (condition number {condition:.3e})") from e
    return tuple(complex(value) for value in values)


def expm_hermitian_times_minus_i_t(h: ComplexMatrix, t: float) -> ComplexMatrix:
    """Return exp(-i h t) = V diag(exp(-i lambda_k t)) V^dagger for Hermitian h."""
    values, vectors = hermitian_eig(h)
    phases = np.exp(-1j * np.asarray(values) * t)
    v = vectors.data
    return require_unitary(ComplexMatrix((v * phases) @ v.conj().T))


def pauli_exponential(p: ComplexMatrix, angle: float) -> ComplexMatrix:
    """exp(-i angle P) = cos(angle) I - i sin(angle) P for an involutory P (P @ P = I)."""
    return ComplexMatrix(math.cos(angle) * np.eye(p.dim) - 1j * math.sin(angle) * p.data)


def partial_trace(rho: ComplexMatrix, dims: Sequence[int], keep: Iterable[int]) -> ComplexMatrix:
    """Reduce ``rho`` to the subsystems in ``keep``, preserving their relative order."""
    dims = [int(d) for d in dims]
    keep = set(keep)
    if math.prod(dims) != rho.dim:
        raise DimensionMismatchError(f"Subsystem dims {dims} do not multiply to {rho.dim}")
    if not keep or not keep <= set(range(len(dims))):
        raise DimensionMismatchError(f"Invalid subsystems to keep {sorted(keep)} for {len(dims)} subsystems")

    tensor = rho.data.reshape(dims + dims)
    # Highest index first so the remaining axis numbers stay valid.
    for index in sorted(set(range(len(dims))) - keep, reverse=True):
        half = tensor.ndim // 2
        tensor = np.trace(tensor, axis1=index, axis2=index + half)
    kept_dim = math.prod(dims[index] for index in sorted(keep))
    return ComplexMatrix(tensor.reshape(kept_dim, kept_dim))


def partial_transpose(
    rho: ComplexMatrix,
    dims: Sequence[int] = (2, 2),
    subsystem: Subsystem = Subsystem.FIRST,
) -> ComplexMatrix:
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2 or math.prod(dims) != rho.dim or rho.dim != 4:
        raise DimensionMismatchError(f"partial_transpose needs a 4x4 matrix with dims (2, 2), got dim {rho.dim}, dims {dims}")
    subsystem = Subsystem(subsystem)
    tensor = rho.data.reshape(dims + dims)
    if subsystem is Subsystem.FIRST:
        tensor = tensor.transpose(2, 1, 0, 3)
    else:
        tensor = tensor.transpose(0, 3, 2, 1)
    return ComplexMatrix(tensor.reshape(rho.dim, rho.dim))
