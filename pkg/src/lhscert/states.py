"""Qutrit-qubit state family, the filter, and closed-form locality boundaries."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import (
    Bipartite,
    DimensionError,
    hermitian,
    ket,
    partial_trace_a,
    proj,
    tensor,
)

# the two-qubit Werner state has a local model for all POVMs up to this visibility
MU_POVM_LOCAL = 5 / 12
MU_TOUCH = math.sqrt(22) / 4 - 1 / 2
Q_TOUCH = 1 - math.sqrt(22) / 6
MU_CHSH = 1 / math.sqrt(2)
MU_SEPARABLE = 1 / 3


def _check_unit(name: str, x: float):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")


@dataclass(frozen=True)
class StateParams:
    mu: float
    q: float

    def __post_init__(self):
        _check_unit("mu", self.mu)
        _check_unit("q", self.q)


@dataclass(frozen=True)
class Barycentric:
    """Weights on the singlet, the plane ``Pi (x) 1 / 4`` and the vacuum ``|2><2| (x) 1 / 2``."""

    w_singlet: float
    w_plane: float
    w_vacuum: float

    def __post_init__(self):
        w = (self.w_singlet, self.w_plane, self.w_vacuum)
        if min(w) < -1e-12 or abs(sum(w) - 1) > 1e-12:
            raise ValueError(f"not barycentric: {w}")


def singlet(dim_a: int = 2) -> np.ndarray:
    """``|psi-> = (|0,1> - |1,0>) / sqrt 2`` with Alice's space of dimension ``dim_a``."""
    v = (np.kron(ket(dim_a, 0), ket(2, 1)) - np.kron(ket(dim_a, 1), ket(2, 0))) / math.sqrt(2)
    return proj(v)


def werner(mu: float, embedded: bool = False) -> Bipartite:
    _check_unit("mu", mu)
    dim_a = 3 if embedded else 2
    plane = np.zeros((dim_a, dim_a), dtype=complex)
    plane[0, 0] = plane[1, 1] = 1
    mat = mu * singlet(dim_a) + (1 - mu) * np.kron(plane, np.eye(2)) / 4
    return Bipartite(mat, dim_a, 2)


def vacuum_state() -> Bipartite:
    return tensor(proj(ket(3, 2)), np.eye(2) / 2)


def family_state(p: StateParams) -> Bipartite:
    return p.q * werner(p.mu, embedded=True) + (1 - p.q) * vacuum_state()


def reduce_tilde(rho: Bipartite) -> Bipartite:
    """``3 rho - 2 |2><2| (x) tr_A rho``: LHS_2 for this operator implies LHS for ``rho``."""
    if rho.dims != (3, 2):
        raise DimensionError(f"reduction needs a 3x2 operator, got {rho.dims}")
    return 3 * rho - 2 * tensor(proj(ket(3, 2)), partial_trace_a(rho))


def lemma_mix(rho: Bipartite, sigma_a) -> Bipartite:
    """``rho / d_A + (d_A - 1) / d_A * sigma_A (x) rho_B``."""
    sigma_a = hermitian(sigma_a)
    if sigma_a.shape[0] != rho.dim_a:
        raise DimensionError(f"sigma_A has dim {sigma_a.shape[0]}, Alice has {rho.dim_a}")
    if abs(np.trace(sigma_a).real - 1) > 1e-10 or np.linalg.eigvalsh(sigma_a)[0] < -1e-10:
        raise ValueError("sigma_A must be a density matrix")
    d = rho.dim_a
    return (1 / d) * rho + ((d - 1) / d) * tensor(sigma_a, partial_trace_a(rho))


def local_filter(rho: Bipartite, tol: float = 1e-12) -> tuple[Bipartite, float]:
    """Post-select Alice on ``1 - |2><2|``; returns the 2x2 state and the success probability."""
    if rho.dims != (3, 2):
        raise DimensionError(f"filter acts on 3x2 states, got {rho.dims}")
    keep = rho.blocks()[:2, :, :2, :].reshape(4, 4)
    prob = float(np.trace(keep).real)
    if prob <= tol:
        raise ZeroDivisionError(f"filter success probability {prob:.3e} is zero")
    return Bipartite(keep / prob, 2, 2), prob


def boundary_dichotomic(mu: float) -> float:
    """Largest q with a known LHS model for two-outcome measurements."""
    _check_unit("mu", mu)
    if mu <= 0.5:
        return 1.0
    return min(1.0, 2 * (1 - mu))


def boundary_povm_dotted(mu: float) -> float:
    """Largest q with a known LHS model for all POVMs, from the dichotomic one via the lemma."""
    _check_unit("mu", mu)
    if mu <= 0.5:
        return 1 / 3
    return min(1.0, 2 * (1 - mu) / 3)


_S22 = math.sqrt(22)


def boundary_hull_line(mu: float) -> float:
    """Hull tangent through ``(5/12, 1)`` and ``(mu_0, q_0)`` in (mu, q) coordinates."""
    return (-29 + 6 * _S22) / (-24 + 6 * _S22 - 12 * mu)


def boundary_extended(mu: float) -> float:
    """Reduction region enlarged by its convex hull with the point ``(5/12, 1)``."""
    _check_unit("mu", mu)
    if mu <= MU_POVM_LOCAL:
        return 1.0
    if mu < MU_TOUCH:
        return min(1.0, boundary_hull_line(mu))
    return boundary_povm_dotted(mu)


def to_barycentric(p: StateParams) -> Barycentric:
    return Barycentric(p.q * p.mu, p.q * (1 - p.mu), 1 - p.q)


def from_barycentric(b: Barycentric) -> StateParams:
    """Inverse of :func:`to_barycentric`; mu is undefined on the vacuum vertex."""
    q = b.w_singlet + b.w_plane
    if q <= 1e-12:
        raise ValueError("mu is undefined at q = 0 (vacuum vertex)")
    return StateParams(min(1.0, max(0.0, b.w_singlet / q)), min(1.0, q))


def barycentric_state(b: Barycentric) -> Bipartite:
    plane = np.diag([1, 1, 0]).astype(complex)
    mat = (
        b.w_singlet * singlet(3)
        + b.w_plane * np.kron(plane, np.eye(2)) / 4
        + b.w_vacuum * vacuum_state().mat
    )
    return Bipartite(mat, 3, 2)
