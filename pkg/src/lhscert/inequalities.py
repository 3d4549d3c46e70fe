"""CHSH values of two-qubit states and linear steering bounds for Werner states."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bloch import PHI
from .operators import PAULIS, Bipartite, DimensionError

MAX_DIRECTIONS = 20


def _two_qubit(rho: Bipartite):
    if rho.dims != (2, 2):
        raise DimensionError(f"expected a two-qubit operator, got {rho.dims}")


def correlation_matrix(rho: Bipartite) -> np.ndarray:
    """``T_ij = tr[rho (sigma_i (x) sigma_j)]``."""
    _two_qubit(rho)
    return np.array(
        [[np.real(np.trace(rho.mat @ np.kron(a, b))) for b in PAULIS] for a in PAULIS]
    )


def chsh_max(rho: Bipartite) -> float:
    """Maximal CHSH value ``2 sqrt(t1 + t2)`` over projective measurements."""
    t = correlation_matrix(rho)
    ev = np.sort(np.linalg.eigvalsh(t.T @ t))[::-1]
    return float(2 * math.sqrt(max(ev[0] + ev[1], 0.0)))


@dataclass(frozen=True, eq=False)
class DirectionSet:
    directions: np.ndarray  # (M, 3) unit vectors
    name: str = "custom"

    def __post_init__(self):
        d = np.atleast_2d(np.asarray(self.directions, dtype=float))
        if d.shape[1] != 3 or len(d) < 1:
            raise ValueError("directions must be a nonempty list of 3-vectors")
        if np.max(np.abs(np.linalg.norm(d, axis=1) - 1)) > 1e-12:
            raise ValueError("directions must be unit vectors")
        d.setflags(write=False)
        object.__setattr__(self, "directions", d)

    @property
    def m(self) -> int:
        return len(self.directions)

    def to_json(self) -> str:
        return json.dumps({"M": self.m, "directions": self.directions.tolist()})


def load_directions(path) -> DirectionSet:
    data = json.loads(Path(path).read_text())
    d = np.array(data["directions"], dtype=float)
    if "M" in data and int(data["M"]) != len(d):
        raise ValueError(f"M = {data['M']} but {len(d)} directions given")
    return DirectionSet(d, Path(path).stem)


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def direction_set(name: str) -> DirectionSet:
    """Built-in sets: ``square`` (x, y), ``octahedron-axes`` (+-e_i), ``icosahedron-axes``."""
    if name == "square":
        return DirectionSet(np.eye(3)[:2], name)
    if name == "octahedron-axes":
        e = np.eye(3)
        return DirectionSet(np.concatenate([e, -e]), name)
    if name == "icosahedron-axes":
        # one vertex from each antipodal pair of the icosahedron
        pts = [(0, 1, PHI), (0, 1, -PHI), (1, PHI, 0), (1, -PHI, 0), (PHI, 0, 1), (-PHI, 0, 1)]
        return DirectionSet(_unit(pts), name)
    raise ValueError(f"unknown direction set {name!r}")


BUILTIN_DIRECTION_SETS = ("square", "octahedron-axes", "icosahedron-axes")


def steering_bound(dirs: DirectionSet) -> float:
    """``C_M = max_A |sum_k A_k n_k| / M`` over sign patterns ``A``.

    For fixed signs the best hidden qubit state points along the signed sum,
    so the hidden-state maximisation is exact.
    """
    if dirs.m > MAX_DIRECTIONS:
        raise ValueError(f"exhaustive search limited to M <= {MAX_DIRECTIONS}")
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=dirs.m)))
    sums = signs @ dirs.directions
    return float(np.max(np.linalg.norm(sums, axis=1)) / dirs.m)


def werner_steering_value(mu: float) -> float:
    """``S_M`` attained by the two-qubit Werner state when Alice measures ``-n_k``."""
    if not 0 <= mu <= 1:
        raise ValueError(f"mu must lie in [0, 1], got {mu!r}")
    return float(mu)


def steering_value(rho: Bipartite, dirs: DirectionSet) -> float:
    """``(1/M) sum_k tr[rho (-n_k . sigma) (x) (n_k . sigma)]`` evaluated on the operator."""
    _two_qubit(rho)
    total = 0.0
    for n in dirs.directions:
        ns = sum(c * s for c, s in zip(n, PAULIS))
        total += np.real(np.trace(rho.mat @ np.kron(-ns, ns)))
    return float(total / dirs.m)


def steerable_by(dirs: DirectionSet, mu: float) -> bool:
    return werner_steering_value(mu) > steering_bound(dirs)
