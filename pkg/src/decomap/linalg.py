"""Dense complex linear algebra kernels.

Everything downstream (modular data, cone tests, map hierarchies) is built
on Hermitian spectral decompositions, fractional powers of positive
matrices, PSD projections, partial transposes and seeded Ginibre
ensembles, all collected here.  Matrices are plain complex numpy arrays;
tolerances come from a single :class:`Tolerances` record.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    LayoutMismatch,
    NonFinite,
    NotHermitian,
    NotPositiveDefinite,
    ShapeMismatch,
)


@dataclass(frozen=True)
class Tolerances:
    """Central numerical tolerances; every test references these defaults."""

    eig_rel: float = 1e-12        # spectral reconstruction, relative
    herm_rel: float = 1e-10       # Hermitian deviation, relative
    pd_floor: float = 1e-12       # strict positivity floor
    kernel: float = 1e-10         # Gram-form kernel cutoff
    cone: float = 1e-8            # default cone membership tolerance
    dykstra_progress: float = 1e-12   # relative decrease counted as progress
    dykstra_window: int = 100     # stagnation window (iterations)
    max_iter: int = 5000          # default Dykstra iteration cap


DEFAULT = Tolerances()


@dataclass(frozen=True)
class TensorLayout:
    """Ordered factor dimensions of a tensor-product matrix side."""

    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if any(d < 1 for d in self.dims):
            raise LayoutMismatch(f"factor dimensions must be positive: {self.dims}")

    @property
    def side(self) -> int:
        return int(np.prod(self.dims))

    def check(self, x: np.ndarray) -> None:
        if x.shape != (self.side, self.side):
            raise LayoutMismatch(
                f"layout {self.dims} annotates side {self.side}, matrix is {x.shape}"
            )


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _as_matrix(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2:
        raise ShapeMismatch(f"expected a matrix, got ndim={x.ndim}")
    if not np.all(np.isfinite(x)):
        raise NonFinite("matrix contains NaN or Inf entries")
    return x


def frobenius(x: np.ndarray) -> float:
    return float(np.linalg.norm(x))


def herm_part(x: np.ndarray) -> np.ndarray:
    return (x + x.conj().T) / 2


def herm_deviation(x: np.ndarray) -> float:
    """Frobenius distance to the Hermitian part."""
    return float(np.linalg.norm(x - x.conj().T)) / 2


def require_hermitian(x, tol: Tolerances = DEFAULT) -> np.ndarray:
    x = _as_matrix(x)
    if x.shape[0] != x.shape[1]:
        raise NotHermitian(f"matrix is not square: {x.shape}")
    bound = tol.herm_rel * max(1.0, frobenius(x))
    dev = float(np.linalg.norm(x - x.conj().T))
    if dev > bound:
        raise NotHermitian(f"Hermitian deviation {dev:.3e} exceeds {bound:.3e}")
    return herm_part(x)


def herm_eig(h, tol: Tolerances = DEFAULT) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix, eigenvalues ascending."""
    h = require_hermitian(h, tol)
    w, v = np.linalg.eigh(h)
    return SpectralDecomposition(eigenvalues=w, eigenvectors=v)


def frac_power(p, t: float, tol: Tolerances = DEFAULT) -> np.ndarray:
    """p**t for positive-definite p via the spectral calculus."""
    dec = herm_eig(p, tol)
    if dec.eigenvalues.min() <= tol.pd_floor:
        raise NotPositiveDefinite(
            f"minimum eigenvalue {dec.eigenvalues.min():.3e} at or below "
            f"floor {tol.pd_floor:.1e}"
        )
    v = dec.eigenvectors
    return (v * dec.eigenvalues**t) @ v.conj().T


def psd_project(h, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Frobenius-nearest PSD matrix: clip negative eigenvalues to zero."""
    dec = herm_eig(h, tol)
    v = dec.eigenvectors
    return (v * np.maximum(dec.eigenvalues, 0.0)) @ v.conj().T


def min_eig(h: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part."""
    return float(np.linalg.eigvalsh(herm_part(h))[0])


def psd_deficit(h: np.ndarray) -> float:
    """|most negative eigenvalue| of the Hermitian part, 0 if PSD."""
    return max(0.0, -min_eig(h))


def partial_transpose(x, layout: TensorLayout, factor: int) -> np.ndarray:
    """Transpose the indices of one tensor factor (1-based) only."""
    x = _as_matrix(x)
    layout.check(x)
    k = len(layout.dims)
    if not 1 <= factor <= k:
        raise LayoutMismatch(f"factor {factor} out of range for {layout.dims}")
    t = x.reshape(layout.dims + layout.dims)
    t = np.swapaxes(t, factor - 1, k + factor - 1)
    return t.reshape(layout.side, layout.side)


def hs_inner(x, y) -> complex:
    """Hilbert-Schmidt inner product Tr(x* y)."""
    x = _as_matrix(x)
    y = _as_matrix(y)
    if x.shape != y.shape:
        raise ShapeMismatch(f"shapes {x.shape} and {y.shape} differ")
    return complex(np.sum(x.conj() * y))


def sample_ginibre(rows: int, cols: int, seed) -> np.ndarray:
    """Complex Ginibre matrix: i.i.d. standard complex Gaussian entries."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def sample_psd(n: int, seed) -> np.ndarray:
    """Random PSD matrix G G* with G complex Ginibre; deterministic in seed."""
    g = sample_ginibre(n, n, seed)
    return g @ g.conj().T


def sample_hermitian(n: int, seed) -> np.ndarray:
    """Random Hermitian matrix, GUE-style (Hermitian part of Ginibre)."""
    return herm_part(sample_ginibre(n, n, seed))


def sample_unitary(n: int, seed) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix, phases fixed."""
    q, r = np.linalg.qr(sample_ginibre(n, n, seed))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def sample_density(n: int, seed, ridge: float = 0.0) -> np.ndarray:
    """Random faithful density matrix (GG* + ridge * I, trace-normalized)."""
    w = sample_psd(n, seed)
    w = w + ridge * (np.trace(w).real / n) * np.eye(n)
    return w / np.trace(w).real


def kron_all(*mats: np.ndarray) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out
