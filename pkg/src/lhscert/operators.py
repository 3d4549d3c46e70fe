"""Dense Hermitian operators on small bipartite systems.

Operators are plain complex numpy arrays.  The composite ordering is the
Kronecker ordering ``|a, b> -> a * dim_b + b`` with Alice first.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

HERMITIAN_TOL = 1e-12

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


class DimensionError(ValueError):
    pass


def hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(m + m^dag) / 2`` after checking that ``m`` is Hermitian to ``tol``.

    The drift guard is absolute on the largest entry of ``m - m^dag``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    drift = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if drift > tol:
        raise ValueError(f"matrix is not Hermitian (max drift {drift:.3e})")
    return (m + m.conj().T) / 2


@dataclass(frozen=True, eq=False)
class Bipartite:
    """Hermitian operator on ``C^dim_a (x) C^dim_b``."""

    mat: np.ndarray
    dim_a: int
    dim_b: int

    def __post_init__(self):
        n = self.dim_a * self.dim_b
        if self.mat.shape != (n, n):
            raise DimensionError(
                f"matrix shape {self.mat.shape} does not match dims ({self.dim_a}, {self.dim_b})"
            )
        object.__setattr__(self, "mat", hermitian(self.mat))
        self.mat.setflags(write=False)

    @property
    def dims(self) -> tuple[int, int]:
        return self.dim_a, self.dim_b

    def trace(self) -> float:
        return float(np.real(np.trace(self.mat)))

    def blocks(self) -> np.ndarray:
        """View as a rank-4 tensor ``[a, b, a', b']``."""
        return self.mat.reshape(self.dim_a, self.dim_b, self.dim_a, self.dim_b)

    def __add__(self, other: Bipartite) -> Bipartite:
        _check_same(self, other)
        return Bipartite(self.mat + other.mat, self.dim_a, self.dim_b)

    def __sub__(self, other: Bipartite) -> Bipartite:
        _check_same(self, other)
        return Bipartite(self.mat - other.mat, self.dim_a, self.dim_b)

    def __mul__(self, s: float) -> Bipartite:
        return Bipartite(float(s) * self.mat, self.dim_a, self.dim_b)

    __rmul__ = __mul__

    def __neg__(self) -> Bipartite:
        return Bipartite(-self.mat, self.dim_a, self.dim_b)

    def allclose(self, other: Bipartite, atol: float = 1e-12) -> bool:
        return self.dims == other.dims and np.allclose(self.mat, other.mat, rtol=0, atol=atol)

    def __repr__(self):
        return f"Bipartite(dims={self.dims}, trace={self.trace():.6g})"


def _check_same(x: Bipartite, y: Bipartite):
    if x.dims != y.dims:
        raise DimensionError(f"dims differ: {x.dims} vs {y.dims}")


def tensor(a, b) -> Bipartite:
    a = hermitian(a)
    b = hermitian(b)
    return Bipartite(np.kron(a, b), a.shape[0], b.shape[0])


def partial_trace_a(x: Bipartite) -> np.ndarray:
    return hermitian(np.einsum("ibic->bc", x.blocks()))


def partial_trace_b(x: Bipartite) -> np.ndarray:
    return hermitian(np.einsum("aibi->ab", x.blocks()))


def conditional_bob(rho: Bipartite, effect) -> np.ndarray:
    """Bob's (unnormalised) conditional operator ``tr_A[rho (E (x) 1)]``."""
    effect = hermitian(effect)
    if effect.shape[0] != rho.dim_a:
        raise DimensionError(f"effect has dim {effect.shape[0]}, Alice has {rho.dim_a}")
    # tr_A[rho (E x 1)]_{bc} = sum_{a,a'} rho[a b, a' c] E[a', a]
    return hermitian(np.einsum("ibjc,ji->bc", rho.blocks(), effect))


def alice_operator(rho: Bipartite, z) -> np.ndarray:
    """``tr_B[rho (1 (x) Z)]`` as a dim_a x dim_a Hermitian matrix."""
    z = hermitian(z)
    if z.shape[0] != rho.dim_b:
        raise DimensionError(f"Z has dim {z.shape[0]}, Bob has {rho.dim_b}")
    return hermitian(np.einsum("aibj,ji->ab", rho.blocks(), z))


def eigenvalues(h) -> np.ndarray:
    """Real spectrum of a Hermitian matrix in ascending order."""
    return np.linalg.eigvalsh(hermitian(h))


def is_psd(h, tol: float = 1e-10) -> bool:
    return bool(eigenvalues(h)[0] >= -tol)


def ket(d: int, i: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i] = 1
    return v


def proj(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """Orthonormal Hermitian basis; ``elements[0]`` is ``I / sqrt(dim)``, the rest are traceless."""

    dim: int
    elements: np.ndarray  # shape (dim**2, dim, dim)

    @property
    def traceless(self) -> np.ndarray:
        return self.elements[1:]

    def expand(self, h) -> np.ndarray:
        h = hermitian(h)
        if h.shape[0] != self.dim:
            raise DimensionError(f"operator has dim {h.shape[0]}, basis has {self.dim}")
        return np.real(np.einsum("kij,ji->k", self.elements, h))

    def reconstruct(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (self.dim**2,):
            raise DimensionError(f"expected {self.dim ** 2} coordinates, got {coords.shape}")
        return hermitian(np.einsum("k,kij->ij", coords, self.elements))


@lru_cache(maxsize=None)
def operator_basis(dim: int) -> OperatorBasis:
    """Generalised Gell-Mann basis normalised to ``tr(B_i B_j) = delta_ij``."""
    els = [np.eye(dim, dtype=complex) / np.sqrt(dim)]
    for j in range(dim):
        for k in range(j + 1, dim):
            m = np.zeros((dim, dim), dtype=complex)
            m[j, k] = m[k, j] = 1 / np.sqrt(2)
            els.append(m)
            m = np.zeros((dim, dim), dtype=complex)
            m[j, k] = -1j / np.sqrt(2)
            m[k, j] = 1j / np.sqrt(2)
            els.append(m)
    for l in range(1, dim):
        diag = np.zeros(dim)
        diag[:l] = 1
        diag[l] = -l
        els.append(np.diag(diag).astype(complex) / np.sqrt(l * (l + 1)))
    arr = np.array(els)
    arr.setflags(write=False)
    return OperatorBasis(dim, arr)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (g + g.conj().T) / 2


def random_state(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the induced (Ginibre) measure."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return hermitian(rho / np.trace(rho).real, tol=1e-9)
