"""Small Hermitian-matrix helpers shared across the solvers."""

import numpy as np

# Relative eigenvalue floor for matrix inverse square roots; keeps
# near-singular matrices from producing NaNs.
EIG_FLOOR = 1e-14


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def crandn(rng: np.random.Generator, *shape) -> np.ndarray:
    """Circularly symmetric complex Gaussian with unit entry variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix (eigenvalues clipped at 0)."""
    w, v = np.linalg.eigh(hermitize(a))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def psd_inv_sqrt(a: np.ndarray) -> np.ndarray:
    """Inverse square root of a Hermitian PD matrix with a relative eigenvalue floor."""
    w, v = np.linalg.eigh(hermitize(a))
    floor = EIG_FLOOR * max(w[-1], 0.0)
    if w[-1] <= 0.0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    w = np.maximum(w, floor if floor > 0 else EIG_FLOOR)
    return (v / np.sqrt(w)) @ v.conj().T


def min_eig(a: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitize(a))[0])
