import numpy as np

from tridm.linalg import ComplexMatrix


def random_density(rng: np.random.Generator, dim: int) -> ComplexMatrix:
    """Full-rank Ginibre-ensemble state G G^dagger / tr(G G^dagger)."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    return ComplexMatrix(m / np.trace(m).real)


def random_hermitian(rng: np.random.Generator, dim: int) -> ComplexMatrix:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return ComplexMatrix(0.5 * (g + g.conj().T))


def random_x_state(rng: np.random.Generator) -> ComplexMatrix:
    """Random physical X-shaped two-qubit state."""
    p = rng.dirichlet(np.ones(4))
    inner = rng.uniform(0, 1) * np.sqrt(p[1] * p[2]) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    outer = rng.uniform(0, 1) * np.sqrt(p[0] * p[3]) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    m = np.diag(p).astype(np.complex128)
    m[1, 2], m[2, 1] = inner, np.conj(inner)
    m[0, 3], m[3, 0] = outer, np.conj(outer)
    return ComplexMatrix(m)


def random_unitary(rng: np.random.Generator, dim: int) -> ComplexMatrix:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    phases = np.diag(r) / np.abs(np.diag(r))
    return ComplexMatrix(q * phases)


def random_ket(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
