import math

from . import linalg
from .dynamics import DensityMatrix
from .linalg import ComplexMatrix, kron, pauli
from .logging_utils import get_logger
from .models import InfoMode, MeasureSet

# Entanglement quantifiers of two-qubit states (concurrence, entanglement of
# formation, negativity) and the purity-based information measures.

IMAG_ATOL = 1e-8
NEGATIVE_CLAMP = 1e-10
# Spin-flip eigenvalues below this are roundoff of an exact zero.
ROUNDOFF_FLOOR = 1e-14
NEGATIVE_ERROR = 1e-6
UNIT_SLACK = 1e-9
ENTROPY_SLACK = 1e-12

_YY = kron(pauli("y"), pauli("y"))


class MeasureDomainError(ArithmeticError):
    """Raised when a quantifier leaves its domain by more than the numerical slack."""


class EntropyDomainError(MeasureDomainError):
    pass


def _require_qubits(rho: DensityMatrix, n_qubits: int, name: str) -> None:
    if rho.n_qubits != n_qubits:
        raise linalg.DimensionMismatchError(f"{name} needs a {n_qubits}-qubit state, got {rho.n_qubits} qubits")


def _clamp_unit(value: float, name: str) -> float:
    if value < -UNIT_SLACK or value > 1.0 + UNIT_SLACK:
        raise MeasureDomainError(f"{name} = {value!r} outside [0,1] beyond slack {UNIT_SLACK}")
    return min(1.0, max(0.0, value))


def spin_flip_product(rho: DensityMatrix) -> ComplexMatrix:
    """rho (sigma_y x sigma_y) rho* (sigma_y x sigma_y)."""
    return rho.matrix @ _YY @ rho.matrix.conj() @ _YY


def concurrence(rho: DensityMatrix) -> float:
    _require_qubits(rho, 2, "concurrence")
    eigenvalues = linalg.general_eigvals(spin_flip_product(rho))
    roots = []
    for value in eigenvalues:
        if abs(value.imag) > IMAG_ATOL:
            raise MeasureDomainError(f"spin-flip eigenvalue {value} has imaginary part above {IMAG_ATOL}")
        if value.real < -NEGATIVE_ERROR:
            raise MeasureDomainError(f"spin-flip eigenvalue {value.real} is negative beyond {NEGATIVE_ERROR}")
        if value.real < -NEGATIVE_CLAMP:
            get_logger().debug("Clamping spin-flip eigenvalue %.3e to zero", value.real)
        roots.append(math.sqrt(value.real) if value.real > ROUNDOFF_FLOOR else 0.0)
    roots.sort(reverse=True)
    return _clamp_unit(max(0.0, roots[0] - roots[1] - roots[2] - roots[3]), "concurrence")


def binary_entropy(x: float) -> float:
    if x < -ENTROPY_SLACK or x > 1.0 + ENTROPY_SLACK:
        raise EntropyDomainError(f"binary entropy argument {x!r} outside [0,1]")
    x = min(1.0, max(0.0, x))
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def eof_from_concurrence(c: float) -> float:
    c = _clamp_unit(c, "concurrence")
    return _clamp_unit(binary_entropy(0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - c * c)))), "entanglement of formation")


def eof(rho: DensityMatrix) -> float:
    return eof_from_concurrence(concurrence(rho))


def negativity(rho: DensityMatrix) -> float:
    """Twice the absolute sum of the negative eigenvalues of the partial transpose."""
    _require_qubits(rho, 2, "negativity")
    spectrum = linalg.hermitian_eig(linalg.partial_transpose(rho.matrix)).eigenvalues
    return _clamp_unit(2.0 * sum(max(0.0, -value) for value in spectrum), "negativity")


def x_state_concurrence(rho: DensityMatrix) -> float:
    """Closed-form concurrence of an X-shaped two-qubit matrix."""
    _require_qubits(rho, 2, "x_state_concurrence")
    m = rho.matrix.data
    inner = abs(m[1, 2]) - math.sqrt(max(0.0, (m[0, 0] * m[3, 3]).real))
    outer = abs(m[0, 3]) - math.sqrt(max(0.0, (m[1, 1] * m[2, 2]).real))
    return _clamp_unit(2.0 * max(0.0, inner, outer), "concurrence")


def purity(rho: DensityMatrix) -> float:
    return rho.purity()


def bz_total_information(rho: DensityMatrix) -> float:
    """Operational information n * 2^n/(2^n - 1) * (tr rho^2 - 2^-n); n for pure states, 0 if maximally mixed."""
    n = rho.n_qubits
    dim = 2**n
    value = n * dim / (dim - 1) * (rho.purity() - 1.0 / dim)
    return min(float(n), max(0.0, value))


def single_qubit_marginals(rho: DensityMatrix) -> list[DensityMatrix]:
    dims = [2] * rho.n_qubits
    marginals = []
    for index in range(rho.n_qubits):
        reduced = linalg.partial_trace(rho.matrix, dims, {index}).data
        marginals.append(DensityMatrix(ComplexMatrix(0.5 * (reduced + reduced.conj().T)), 1))
    return marginals


def nonlocal_information(rho: DensityMatrix, mode: InfoMode = InfoMode.TOTAL) -> float:
    if rho.n_qubits not in (2, 3):
        raise linalg.DimensionMismatchError(f"non-local information needs 2 or 3 qubits, got {rho.n_qubits}")
    total = bz_total_information(rho)
    if mode is InfoMode.TOTAL:
        return total
    return total - sum(bz_total_information(local) for local in single_qubit_marginals(rho))


def measure_all(rho: DensityMatrix, mode: InfoMode = InfoMode.TOTAL) -> MeasureSet:
    _require_qubits(rho, 2, "measure_all")
    c = concurrence(rho)
    return MeasureSet(
        concurrence=c,
        negativity=negativity(rho),
        eof=eof_from_concurrence(c),
        purity=purity(rho),
        info_total=bz_total_information(rho),
        info_nonlocal=nonlocal_information(rho, mode),
    )


def measure_information(rho: DensityMatrix, mode: InfoMode = InfoMode.TOTAL) -> MeasureSet:
    """Purity and information content of a state of any size; entanglement fields stay None."""
    if rho.n_qubits == 2:
        return measure_all(rho, mode)
    info_total = bz_total_information(rho)
    return MeasureSet(
        purity=purity(rho),
        info_total=info_total,
        info_nonlocal=info_total if rho.n_qubits == 1 else nonlocal_information(rho, mode),
    )
