"""Chi-square statistics, the confidence hyperoctahedron and sample-count planning."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special

from .operators import Bipartite, operator_basis
from .tomography import TomographyDesign, image

ELL = 35
N_SETTINGS = 24
CONVENTIONS = ("paper-numbers", "paper-text")


def chi2_cdf(ell: int, y: float) -> float:
    """``F_ell(y)`` via the regularised lower incomplete gamma function."""
    if ell < 1:
        raise ValueError("degrees of freedom must be positive")
    if y < 0:
        raise ValueError("chi-square argument must be nonnegative")
    return float(special.gammainc(ell / 2, y / 2))


def chi2_quantile(ell: int, gamma: float) -> float:
    if ell < 1:
        raise ValueError("degrees of freedom must be positive")
    if not 0 < gamma < 1:
        raise ValueError("confidence level must lie in (0, 1)")
    return float(2 * special.gammaincinv(ell / 2, gamma))


def alpha_for(gamma: float, shots: int, ell: int = ELL) -> float:
    """Polytope radius with ``F_ell(2 N alpha^2 / ell) = gamma``."""
    if shots <= 0:
        raise ValueError("shot count must be positive")
    return math.sqrt(ell * chi2_quantile(ell, gamma) / (2 * shots))


@dataclass(frozen=True, eq=False)
class OctahedronBasis:
    """Traceless ``Y_i`` whose images ``p(Y_i)`` are orthonormal.

    ``coords`` holds the traceless operator-basis coordinates of each ``Y_i``.
    """

    coords: np.ndarray  # (35, 35)
    seed: int | None

    def operators(self) -> list[Bipartite]:
        tl = operator_basis(6).traceless
        return [Bipartite(np.einsum("k,kij->ij", c, tl), 3, 2) for c in self.coords]

    def images(self, design: TomographyDesign) -> np.ndarray:
        """Rows are ``p(Y_i)``."""
        return self.coords @ design.traceless_map.T

    def to_json(self) -> str:
        return json.dumps({"seed": self.seed, "operators": self.coords.tolist()})

    @classmethod
    def from_json(cls, text: str) -> OctahedronBasis:
        data = json.loads(text)
        coords = np.array(data["operators"], dtype=float)
        if coords.shape != (ELL, ELL):
            raise ValueError(f"expected 35 coefficient vectors of length 35, got {coords.shape}")
        return cls(coords, data.get("seed"))


def load_basis(path) -> OctahedronBasis:
    return OctahedronBasis.from_json(Path(path).read_text())


def build_basis(design: TomographyDesign, seed: int = 0, max_tries: int = 5) -> OctahedronBasis:
    """Gram-Schmidt (via QR) on the images of random traceless Hermitian operators."""
    rng = np.random.default_rng(seed)
    m = design.traceless_map
    for _ in range(max_tries):
        x = rng.normal(size=(ELL, ELL))  # columns: random traceless operators
        q, r = np.linalg.qr(m @ x)
        diag = np.abs(np.diag(r))
        if diag.min() > 1e-8 * diag.max():
            y = np.linalg.solve(r.T, x.T)  # rows: coords with p(Y_i) = q[:, i]
            return OctahedronBasis(y, seed)
    raise RuntimeError("random operators kept collapsing in rank")


@dataclass(frozen=True, eq=False)
class ConfidencePolytope:
    center: Bipartite
    alpha: float
    basis: OctahedronBasis
    gamma: float | None = None
    shots: int | None = None

    def vertices(self) -> list[tuple[int, int, Bipartite]]:
        """``(index, sign, rho_hat + sign * alpha * Y_index)`` for all 70 vertices."""
        out = []
        for i, y in enumerate(self.basis.operators()):
            for s in (1, -1):
                out.append((i, s, self.center + (s * self.alpha) * y))
        return out


def make_confidence_polytope(design, center: Bipartite, gamma: float, shots: int,
                             basis: OctahedronBasis) -> ConfidencePolytope:
    return ConfidencePolytope(center, alpha_for(gamma, shots), basis, gamma, shots)


def polytope_vertices(cp: ConfidencePolytope) -> list[Bipartite]:
    return [v for _, _, v in cp.vertices()]


def octahedron_coefficients(design: TomographyDesign, cp: ConfidencePolytope,
                            rho: Bipartite) -> tuple[np.ndarray, float]:
    """Coordinates ``c`` of ``rho - rho_hat`` along ``Y_i`` and the image-space residual norm."""
    v = image(design, rho - cp.center)
    b = cp.basis.images(design)
    c = b @ v
    return c, float(np.linalg.norm(v - b.T @ c))


def contains(design: TomographyDesign, cp: ConfidencePolytope, rho: Bipartite) -> bool:
    c, resid = octahedron_coefficients(design, cp, rho)
    return bool(np.abs(c).sum() <= cp.alpha + 1e-10 and resid <= 1e-8)


def _check_convention(convention: str):
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")


def epsilon_scale(convention: str, ell: int = ELL) -> float:
    """Factor taking a step along unit-image directions to the reported epsilon.

    ``paper-text`` reports the step itself.  ``paper-numbers`` measures it in
    units of the inflated vertices ``sqrt(ell) Y_i``, so that the budget formula
    without the factor ``ell`` gives the same number of preparations.
    """
    _check_convention(convention)
    return 1.0 if convention == "paper-text" else 1 / math.sqrt(ell)


def sample_count(gamma: float, epsilon_star: float, ell: int = ELL, settings: int = N_SETTINGS,
                 convention: str = "paper-numbers") -> float:
    """Total preparations so that a polytope of radius ``epsilon_star`` reaches confidence ``gamma``.

    ``paper-text``: ``settings * ell * F^-1(gamma) / (2 eps^2)``.
    ``paper-numbers``: the same without ``ell`` (``eps`` in inflated units, see
    :func:`epsilon_scale`).
    """
    if epsilon_star <= 0:
        raise ValueError("epsilon_star must be positive")
    _check_convention(convention)
    factor = ell if convention == "paper-text" else 1
    return settings * factor * chi2_quantile(ell, gamma) / (2 * epsilon_star**2)
