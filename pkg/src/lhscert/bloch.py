"""Polytope approximations of the qubit Bloch sphere and their plane functionals.

A plane functional ``Z = z0 * 1 + z . sigma`` evaluates on the Bloch state with
vector ``r`` as ``tr(Z sigma_r) = z0 + z . r``.  The critical-radius LP only
needs the functionals whose zero plane passes through three or more vertices.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .operators import PAULIS, hermitian

PHI = (1 + math.sqrt(5)) / 2
POLYTOPE_NAMES = (
    "tetrahedron",
    "octahedron",
    "cube",
    "icosahedron",
    "dodecahedron",
    "icosidodecahedron",
)
DUPLICATE_TOL = 1e-9
ANGLE_TOL = 1e-8
ZERO_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Polytope:
    name: str
    kind: str  # "inner" or "outer"
    vertices: np.ndarray  # (N_P, 3)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3 or len(v) < 4:
            raise ValueError("a polytope needs at least four 3d vertices")
        if self.kind not in ("inner", "outer"):
            raise ValueError(f"kind must be 'inner' or 'outer', got {self.kind!r}")
        d = np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)
        d[np.diag_indices(len(v))] = np.inf
        if d.min() <= DUPLICATE_TOL:
            raise ValueError("duplicate vertices")
        norms = np.linalg.norm(v, axis=1)
        if self.kind == "inner" and np.max(np.abs(norms - 1)) > 1e-12:
            raise ValueError("inner polytope vertices must lie on the unit sphere")
        if self.kind == "outer" and norms.min() < 1 - 1e-12:
            raise ValueError("outer polytope vertices must lie outside the unit sphere")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        if inradius(self) <= 0:
            raise ValueError("origin is not interior to the polytope")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def to_json(self) -> str:
        return json.dumps(
            {"name": self.name, "kind": self.kind, "vertices": self.vertices.tolist()}
        )


def load_polytope(path) -> Polytope:
    data = json.loads(Path(path).read_text())
    return Polytope(data["name"], data["kind"], np.array(data["vertices"], dtype=float))


def _cyclic(v):
    x, y, z = v
    return [(x, y, z), (y, z, x), (z, x, y)]


def _signed(points):
    """All sign flips of the nonzero coordinates, deduplicated."""
    out = set()
    for p in points:
        nz = [i for i, c in enumerate(p) if c != 0]
        for signs in itertools.product((1, -1), repeat=len(nz)):
            q = list(p)
            for i, s in zip(nz, signs):
                q[i] = s * q[i]
            out.add(tuple(q))
    return sorted(out)


def _raw_vertices(name: str) -> np.ndarray:
    if name == "tetrahedron":
        pts = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    elif name == "octahedron":
        pts = _signed(_cyclic((1, 0, 0)))
    elif name == "cube":
        pts = _signed([(1, 1, 1)])
    elif name == "icosahedron":
        pts = _signed(_cyclic((0, 1, PHI)))
    elif name == "dodecahedron":
        pts = _signed([(1, 1, 1)] + _cyclic((0, 1 / PHI, PHI)))
    elif name == "icosidodecahedron":
        pts = _signed(_cyclic((0, 0, PHI)) + _cyclic((0.5, PHI / 2, PHI**2 / 2)))
    else:
        raise ValueError(f"unknown polytope {name!r}; choose from {POLYTOPE_NAMES}")
    v = np.array(pts, dtype=float)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def inradius(p: Polytope | np.ndarray) -> float:
    """Distance from the origin to the nearest facet plane of the convex hull."""
    v = p.vertices if isinstance(p, Polytope) else np.asarray(p, dtype=float)
    try:
        hull = ConvexHull(v)
    except QhullError as exc:
        raise ValueError(f"vertices do not span a 3d body: {exc}") from exc
    # equations rows: unit normal n, offset c with n.x + c <= 0 inside
    return float(np.min(-hull.equations[:, 3]))


def make_polytope(name: str, kind: str = "inner") -> Polytope:
    v = _raw_vertices(name)
    if kind == "outer":
        v = v / inradius(v)
    elif kind != "inner":
        raise ValueError(f"kind must be 'inner' or 'outer', got {kind!r}")
    return Polytope(name, kind, v)


@dataclass(frozen=True, eq=False)
class FacetSet:
    """Plane functionals through >= 3 polytope vertices, rows ``(z0, zx, zy, zz)``."""

    functionals: np.ndarray
    polytope: str

    def __len__(self):
        return len(self.functionals)

    def values(self, vertices) -> np.ndarray:
        """``<Z_j, sigma_k> = z0 + z . r_k`` as a (n_functionals, n_vertices) array."""
        v = np.asarray(vertices, dtype=float)
        return self.functionals[:, :1] + self.functionals[:, 1:] @ v.T


def facet_functionals(p: Polytope) -> FacetSet:
    v = p.vertices
    n = len(v)
    triples = np.array(list(itertools.combinations(range(n), 3)))
    aff = np.concatenate([np.ones((n, 1)), v], axis=1)  # rows (1, r_k)
    mats = aff[triples]  # (T, 3, 4)
    _, s, vh = np.linalg.svd(mats)
    # a single 1d nullspace needs three nonzero singular values
    ok = s[:, 2] > 1e-9 * np.maximum(s[:, 0], 1.0)
    cand = vh[ok, 3, :]
    cand = cand / np.linalg.norm(cand, axis=1, keepdims=True)
    # canonical sign: first significant component positive
    first = np.argmax(np.abs(cand) > 1e-9, axis=1)
    sign = np.sign(cand[np.arange(len(cand)), first])
    cand = cand * sign[:, None]

    unique: list[np.ndarray] = []
    for z in cand:
        if unique:
            arr = np.asarray(unique)
            if np.min(np.linalg.norm(arr - z, axis=1)) < ANGLE_TOL:
                continue
        unique.append(z)
    planes = np.asarray(unique)
    both = np.concatenate([planes, -planes])
    both = np.where(np.abs(both) < 1e-15, 0.0, both)
    order = np.lexsort(both.T[::-1])
    out = both[order]
    out.setflags(write=False)
    return FacetSet(out, p.name)


def bloch_to_state(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return hermitian((np.eye(2) + sum(c * s for c, s in zip(r, PAULIS))) / 2)


def functional_to_operator(f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    return hermitian(f[0] * np.eye(2) + sum(c * s for c, s in zip(f[1:], PAULIS)))


def operator_to_functional(z) -> np.ndarray:
    z = hermitian(z)
    return np.real([np.trace(z) / 2] + [np.trace(z @ s) / 2 for s in PAULIS])


def bloch_vector(sigma) -> np.ndarray:
    sigma = hermitian(sigma)
    return np.real([np.trace(sigma @ s) for s in PAULIS])
