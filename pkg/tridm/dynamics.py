import math
from typing import Iterable, Optional

import numpy as np

from . import linalg
from .linalg import ComplexMatrix, kron, pauli
from .logging_utils import get_logger
from .models import (
    CLOSED_FORM_CONVENTIONS,
    PAIRS,
    PartitionId,
    Propagator,
    SystemParams,
    ValidityReport,
)

# Hamiltonian, initial state, propagators and marginals of the three-qubit model:
# qubits A and B are XX (dipole) coupled, A and the control qubit C through a
# z-polarized Dzyaloshinskii-Moriya term.

STATE_ATOL = 1e-9
EVOLVE_UNITARY_ATOL = 1e-9
ORACLE_ATOL = 1e-9
QUBIT_DIMS = (2, 2, 2)

_I2 = ComplexMatrix.identity(2)
_X = pauli("x")
_Y = pauli("y")

XX_I = kron(_X, _X, _I2)
YY_I = kron(_Y, _Y, _I2)
X_I_Y = kron(_X, _I2, _Y)
Y_I_X = kron(_Y, _I2, _X)


class InvalidStateError(ArithmeticError):
    """Raised when a matrix violates the density-matrix invariants."""


class InvalidPartitionError(ValueError):
    """Raised when a partition is not available for the requested operation."""


class DensityMatrix:
    """
    A ComplexMatrix tagged with its qubit count.

    Construction validates Hermiticity, unit trace and positivity within 1e-9.
    """

    __slots__ = ("matrix", "n_qubits")

    def __init__(self, matrix: ComplexMatrix, n_qubits: int, *, validate: bool = True) -> None:
        if n_qubits not in (1, 2, 3):
            raise ValueError(f"n_qubits must be 1, 2 or 3, got {n_qubits}")
        if matrix.dim != 2**n_qubits:
            raise linalg.DimensionMismatchError(f"{n_qubits} qubits need dim {2 ** n_qubits}, got {matrix.dim}")
        self.matrix = matrix
        self.n_qubits = n_qubits
        if validate:
            self._validate()

    @classmethod
    def unchecked(cls, matrix: ComplexMatrix, n_qubits: int) -> "DensityMatrix":
        """Wrap a candidate matrix without enforcing the invariants (closed-form fixtures)."""
        return cls(matrix, n_qubits, validate=False)

    def _validate(self) -> None:
        trace_deviation, hermiticity_deviation, min_eigenvalue = self.violations()
        if hermiticity_deviation > STATE_ATOL:
            raise InvalidStateError(f"density matrix not Hermitian (deviation {hermiticity_deviation:.3e})")
        if trace_deviation > STATE_ATOL:
            raise InvalidStateError(f"density matrix trace deviates from 1 by {trace_deviation:.3e}")
        if min_eigenvalue < -STATE_ATOL:
            raise InvalidStateError(f"density matrix has negative eigenvalue {min_eigenvalue:.3e}")

    def require_valid(self) -> "DensityMatrix":
        """Apply the construction-time checks to an unchecked matrix; returns self."""
        self._validate()
        return self

    def violations(self) -> tuple[float, float, float]:
        """(|tr - 1|, max |M - M^dagger|, smallest eigenvalue of the Hermitian part)."""
        data = self.matrix.data
        hermitian_part = 0.5 * (data + data.conj().T)
        return (
            abs(self.matrix.trace() - 1.0),
            self.matrix.hermiticity_deviation(),
            float(np.linalg.eigvalsh(hermitian_part)[0]),
        )

    def eigenvalues(self) -> tuple[float, ...]:
        return linalg.hermitian_eig(self.matrix).eigenvalues

    def purity(self) -> float:
        data = self.matrix.data
        return float(np.real(np.trace(data @ data)))

    def __repr__(self) -> str:
        return f"DensityMatrix(n_qubits={self.n_qubits}, matrix={self.matrix!r})"


def build_hamiltonian(p: SystemParams) -> ComplexMatrix:
    """(omega/2)(XXI + YYI) + D_z (X I Y - Y I X): the z part of D . (sigma_A x sigma_C)."""
    return 0.5 * p.omega * (XX_I + YY_I) + p.dz * (X_I_Y - Y_I_X)


def initial_state(p: SystemParams) -> DensityMatrix:
    phi_ab = math.cos(p.alpha) * linalg.ket("01") + math.sin(p.alpha) * linalg.ket("10")
    rho_ab = p.kappa * ComplexMatrix.projector(phi_ab) + (0.25 * (1.0 - p.kappa)) * ComplexMatrix.identity(4)
    phi_c = math.cos(p.gamma) * linalg.ket("0") + math.sin(p.gamma) * linalg.ket("1")
    return DensityMatrix(kron(rho_ab, ComplexMatrix.projector(phi_c)), 3)


def exact_propagator(p: SystemParams, t: float) -> ComplexMatrix:
    return linalg.expm_hermitian_times_minus_i_t(build_hamiltonian(p), t)


def factorized_propagator(p: SystemParams, t: float) -> ComplexMatrix:
    """
    Ordered product alpha_1 beta_1 alpha_2 beta_2 of single-term exponentials.

    The printed form reads as a sum over i of alpha_i beta_i, but a sum of unitaries
    is not unitary; the product is the reading that reproduces exp(-iHt) whenever
    the dipole and DM terms commute (omega = 0 or D_z = 0). In general the two
    groups do not commute and this is a first-order Trotter-like approximation.
    """
    half_omega_t = 0.5 * p.omega * t
    dz_t = p.dz * t
    alpha_1 = linalg.pauli_exponential(XX_I, half_omega_t)
    beta_1 = linalg.pauli_exponential(YY_I, half_omega_t)
    alpha_2 = linalg.pauli_exponential(X_I_Y, dz_t)
    beta_2 = linalg.pauli_exponential(Y_I_X, -dz_t)
    return linalg.require_unitary(alpha_1 @ beta_1 @ alpha_2 @ beta_2)


def propagator(p: SystemParams, t: float, kind: Propagator = Propagator.EXACT) -> ComplexMatrix:
    if kind is Propagator.EXACT:
        return exact_propagator(p, t)
    if kind is Propagator.FACTORIZED:
        return factorized_propagator(p, t)
    raise ValueError(f"{kind.value} is not a unitary propagator")


def propagator_disagreement(p: SystemParams, times: Iterable[float]) -> float:
    """Maximum Frobenius distance between the factorized and exact propagators over ``times``."""
    return max(factorized_propagator(p, t).frobenius_distance(exact_propagator(p, t)) for t in times)


def evolve(rho0: DensityMatrix, u: ComplexMatrix) -> DensityMatrix:
    if u.dim != rho0.matrix.dim:
        raise linalg.DimensionMismatchError(f"propagator dim {u.dim} does not match state dim {rho0.matrix.dim}")
    linalg.require_unitary(u, EVOLVE_UNITARY_ATOL)
    data = u.data @ rho0.matrix.data @ u.data.conj().T
    return DensityMatrix(ComplexMatrix(0.5 * (data + data.conj().T)), rho0.n_qubits)


def evolve_state(p: SystemParams, t: float, kind: Propagator = Propagator.EXACT) -> DensityMatrix:
    return evolve(initial_state(p), propagator(p, t, kind))


def marginal(rho: DensityMatrix, part: PartitionId) -> DensityMatrix:
    if rho.n_qubits != 3:
        raise InvalidPartitionError(f"marginals are taken from the 3-qubit state, got {rho.n_qubits} qubits")
    if part is PartitionId.ABC:
        raise InvalidPartitionError("ABC is the full state, not a marginal")
    reduced = linalg.partial_trace(rho.matrix, QUBIT_DIMS, part.qubits)
    return DensityMatrix(ComplexMatrix(0.5 * (reduced.data + reduced.data.conj().T)), part.n_qubits)


def closed_form_elements(kappa: float, dz: float, t: float, part: PartitionId) -> dict[str, complex]:
    """
    The printed non-zero X-matrix elements (00, 11, 22, 21, 33; 12 is the conjugate of 21).

    Transcribed as printed, including apparent typos; a bare "D" is read as D_z and the
    second "rho_33^ac" label in the BC list as rho_33^bc.
    """
    k = kappa
    sqrt3 = math.sqrt(3.0)
    s2t, c2t = math.sin(2 * t), math.cos(2 * t)
    s2d, c2d = math.sin(2 * dz * t), math.cos(2 * dz * t)
    if part is PartitionId.AB:
        return {
            "00": 0.25 * k * c2d**2,
            "11": (2 * c2t**2 * c2d**2 + (3 + 3 * k - (1 - k) * math.cos(4 * dz * t)) * s2t**2) / 8,
            "22": (2 * s2t**2 * c2d**2 + (3 + 3 * k - (1 - k) * math.cos(4 * dz * t)) * c2t**2) / 8,
            "21": (2 * sqrt3 * k * c2d) / 8
            - 1j * math.sin(4 * t) * (-0.5 * k * (3 + math.cos(4 * dz * t) - 2 * s2d**2)),
            "33": 0.25 * (1 - k + s2d**2),
        }
    if part is PartitionId.AC:
        return {
            "00": 0.25 * (1 - k) * s2t**2 * s2d**2,
            "11": 0.25 * ((1 - k + c2t**2) * c2d**2 + (1 + 2 * k) * s2t**2),
            "22": (2j * sqrt3 * k * s2t * s2d + (k - 2) * c2t * math.sin(4 * dz * t)) / 8,
            "21": -(k - 3 - (1 - k) * math.cos(4 * t)) * s2d**2 / 8,
            "33": (7 + (1 + 4 * k) * math.cos(4 * t) + 8 * math.cos(t) ** 2 * math.cos(4 * dz * t) * math.sin(t) ** 2) / 16,
        }
    if part is PartitionId.BC:
        return {
            "00": 0.25 * (1 - k) * c2t**2 * s2d**2,
            "11": 0.25 * ((1 - k + s2t**2) * c2d**2 + (1 + 2 * k) * c2t**2),
            "22": k * s2d * (-2 * sqrt3 * c2t + 1j * (math.sin(2 * (1 + dz) * t) + math.sin(2 * (1 - dz) * t))) / 8,
            "21": 0.25 * (1 + (1 - k) * s2t**2) * s2d**2,
            "33": (3 - (1 + 2 * k) * math.cos(4 * t) + 2 * c2t**2 * c2d) / 8,
        }
    raise InvalidPartitionError(f"closed forms exist for AB, AC and BC only, got {part.value}")


def _assemble_x_matrix(elements: dict[str, complex]) -> ComplexMatrix:
    m = np.zeros((4, 4), dtype=np.complex128)
    m[0, 0] = elements["00"]
    m[1, 1] = elements["11"]
    m[2, 2] = elements["22"]
    m[2, 1] = elements["21"]
    m[1, 2] = np.conj(elements["21"])
    m[3, 3] = elements["33"]
    return ComplexMatrix(m)


def closed_form_state(kappa: float, dz: float, t: float, part: PartitionId) -> DensityMatrix:
    if part not in PAIRS:
        raise InvalidPartitionError(f"closed forms exist for AB, AC and BC only, got {part.value}")
    return DensityMatrix.unchecked(_assemble_x_matrix(closed_form_elements(kappa, dz, t, part)), 2)


def closed_form_conventions(p: SystemParams) -> SystemParams:
    return p.with_overrides(**CLOSED_FORM_CONVENTIONS)


def closed_form_marginal(
    p: SystemParams,
    t: float,
    part: PartitionId,
    propagator_kind: Propagator = Propagator.EXACT,
    oracle: Optional[DensityMatrix] = None,
) -> tuple[DensityMatrix, ValidityReport]:
    """
    Evaluate the printed closed-form marginal and report how far it is from physical.

    The oracle is the propagator-derived marginal under the inferred conventions
    (alpha=pi/3, gamma=pi/2, omega=2) with the caller's kappa and D_z. Problems are
    reported, never raised.
    """
    candidate = closed_form_state(p.kappa, p.dz, t, part)
    if oracle is None:
        oracle = marginal(evolve_state(closed_form_conventions(p), t, propagator_kind), part)
    trace_deviation, hermiticity_deviation, min_eigenvalue = candidate.violations()
    distance = candidate.matrix.frobenius_distance(oracle.matrix)
    report = ValidityReport(
        partition=part,
        t=t,
        kappa=p.kappa,
        dz=p.dz,
        trace_deviation=trace_deviation,
        hermiticity_deviation=hermiticity_deviation,
        min_eigenvalue=min_eigenvalue,
        distance=distance,
        propagator=propagator_kind,
        conventions_matched=p.matches_closed_form_conventions(),
        oracle_consistent=distance <= ORACLE_ATOL,
    )
    if not report.oracle_consistent:
        get_logger().debug(
            "Closed form %s at t=%g (kappa=%g, dz=%g) deviates from the %s oracle by %.3e",
            part.value, t, p.kappa, p.dz, propagator_kind.value, distance,
        )
    return candidate, report
