"""Qutrit-qubit product-Pauli tomography: design, sampling and the free least-squares estimate."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .operators import PAULIS, Bipartite, DimensionError, hermitian, operator_basis

AXES = ("x", "y", "z")
# (level, axis) pairs of the qutrit observables used by the design.  sigma_{0,z} and
# sigma_{1,z} coincide (both diag(1, 1, -1)), so sigma_{2,z} = diag(1, -1, 1) takes the
# place of sigma_{1,z}; with the duplicate the map would have rank 31 instead of 35.
QUTRIT_SETTINGS = ((0, "x"), (0, "y"), (0, "z"), (1, "x"), (1, "y"), (2, "x"), (2, "y"), (2, "z"))
N_SETTINGS = 24
KEPT_PER_SETTING = 3
# outcome order per setting: (+,+), (+,-), (-,+), (-,-); the last one is dropped
OUTCOMES = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def qutrit_operator(level: int, axis: str) -> np.ndarray:
    """Fixes ``|level>`` and acts as the Pauli ``axis`` on the other two levels in order."""
    if level not in (0, 1, 2) or axis not in AXES:
        raise ValueError(f"invalid qutrit observable ({level!r}, {axis!r})")
    rest = [j for j in range(3) if j != level]
    pauli = PAULIS[AXES.index(axis)]
    op = np.zeros((3, 3), dtype=complex)
    op[level, level] = 1
    for r, j in enumerate(rest):
        for c, k in enumerate(rest):
            op[j, k] = pauli[r, c]
    return op


def _spectral_projectors(op: np.ndarray) -> dict[int, np.ndarray]:
    vals, vecs = np.linalg.eigh(op)
    out = {}
    for s in (1, -1):
        v = vecs[:, np.isclose(vals, s)]
        out[s] = hermitian(v @ v.conj().T, tol=1e-12)
    return out


@dataclass(frozen=True, eq=False)
class TomographyDesign:
    settings: tuple  # ((level, axis), bob_axis) per setting
    full_effects: np.ndarray  # (24, 4, 6, 6)
    kept_effects: np.ndarray  # (72, 6, 6)
    map_matrix: np.ndarray  # (72, 36): tr(E_k B_j) over the operator basis
    traceless_map: np.ndarray  # (72, 35)
    pinv_traceless: np.ndarray  # (35, 72)

    @property
    def n_settings(self) -> int:
        return len(self.settings)

    def setting_of(self, k: int) -> int:
        return k // KEPT_PER_SETTING


@lru_cache(maxsize=None)
def build_design() -> TomographyDesign:
    settings, full = [], []
    for lv, ax in QUTRIT_SETTINGS:
        pa = _spectral_projectors(qutrit_operator(lv, ax))
        for b, sb in enumerate(PAULIS):
            pb = _spectral_projectors(sb)
            settings.append(((lv, ax), AXES[b]))
            full.append([np.kron(pa[s], pb[t]) for s, t in OUTCOMES])
    full = np.array(full)
    kept = full[:, :KEPT_PER_SETTING].reshape(-1, 6, 6)
    basis = operator_basis(6).elements
    m = np.real(np.einsum("kij,bji->kb", kept, basis))
    mt = m[:, 1:]
    rank = np.linalg.matrix_rank(mt, tol=1e-10)
    if rank != 35:
        raise RuntimeError(f"tomography map has rank {rank} over traceless operators, expected 35")
    for arr in (full, kept, m, mt):
        arr.setflags(write=False)
    pinv = np.linalg.pinv(mt)
    pinv.setflags(write=False)
    return TomographyDesign(tuple(settings), full, kept, m, mt, pinv)


def _check(rho: Bipartite):
    if rho.dims != (3, 2):
        raise DimensionError(f"tomography acts on 3x2 operators, got {rho.dims}")


def probabilities(design: TomographyDesign, rho: Bipartite) -> np.ndarray:
    """Kept-outcome probabilities ``tr(E_k rho)`` (linear, defined for any Hermitian input)."""
    _check(rho)
    return np.real(np.einsum("kij,ji->k", design.kept_effects, rho.mat))


def image(design: TomographyDesign, y: Bipartite) -> np.ndarray:
    """The map ``Y -> p(Y)``; identical to :func:`probabilities`, named for traceless inputs."""
    return probabilities(design, y)


@dataclass(frozen=True, eq=False)
class Frequencies:
    """Kept-outcome counts per setting with ``shots`` repetitions of every setting."""

    counts: np.ndarray  # (72,) int
    shots: int

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (N_SETTINGS * KEPT_PER_SETTING,):
            raise ValueError(f"expected 72 counts, got shape {c.shape}")
        if self.shots < 1 or np.any(c < 0):
            raise ValueError("counts must be nonnegative and shots positive")
        if np.any(c.reshape(N_SETTINGS, KEPT_PER_SETTING).sum(axis=1) > self.shots):
            raise ValueError("kept counts exceed the number of shots in some setting")

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.shots


def simulate(design: TomographyDesign, rho: Bipartite, shots: int, seed: int) -> Frequencies:
    """Multinomial sampling of every setting; one independent stream per setting."""
    _check(rho)
    if shots < 1:
        raise ValueError("shots must be positive")
    if abs(rho.trace() - 1) > 1e-10 or np.linalg.eigvalsh(rho.mat)[0] < -1e-10:
        raise ValueError("simulation requires a density matrix")
    probs = np.real(np.einsum("skij,ji->sk", design.full_effects, rho.mat))
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum(axis=1, keepdims=True)
    streams = np.random.SeedSequence(seed).spawn(design.n_settings)
    counts = np.empty((design.n_settings, KEPT_PER_SETTING), dtype=np.int64)
    for s, ss in enumerate(streams):
        gen = np.random.Generator(np.random.Philox(ss))  # counter-based, one stream per setting
        counts[s] = gen.multinomial(shots, probs[s])[:KEPT_PER_SETTING]
    return Frequencies(counts.reshape(-1), shots)


def estimate(design: TomographyDesign, f: Frequencies | np.ndarray) -> Bipartite:
    """Free least-squares estimate over unit-trace Hermitian operators (possibly not PSD)."""
    fv = f.values if isinstance(f, Frequencies) else np.asarray(f, dtype=float)
    basis = operator_basis(6)
    centre = np.eye(6) / 6
    p0 = np.real(np.einsum("kij,ji->k", design.kept_effects, centre))
    x = design.pinv_traceless @ (fv - p0)
    mat = centre + np.einsum("k,kij->ij", x, basis.traceless)
    return Bipartite(mat, 3, 2)


CSV_HEADER = ("setting_index", "outcome_index", "count", "shots")


def frequencies_csv(f: Frequencies) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for k, c in enumerate(np.asarray(f.counts)):
        s, a = divmod(k, KEPT_PER_SETTING)
        w.writerow((s, a, int(c), f.shots))
    return buf.getvalue()


def write_frequencies(path, f: Frequencies):
    with open(path, "w", newline="") as fh:
        fh.write(frequencies_csv(f))


def read_frequencies(path) -> Frequencies:
    counts = np.zeros(N_SETTINGS * KEPT_PER_SETTING, dtype=np.int64)
    seen = np.zeros_like(counts, dtype=bool)
    shots = set()
    with open(Path(path), newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"expected header {','.join(CSV_HEADER)}")
        for row in reader:
            s, a = int(row["setting_index"]), int(row["outcome_index"])
            if not (0 <= s < N_SETTINGS and 0 <= a < KEPT_PER_SETTING):
                raise ValueError(f"bad setting/outcome index ({s}, {a})")
            k = s * KEPT_PER_SETTING + a
            counts[k] = int(row["count"])
            seen[k] = True
            shots.add(int(row["shots"]))
    if not seen.all():
        raise ValueError("frequency file is missing some (setting, outcome) rows")
    if len(shots) != 1:
        raise ValueError("all rows must share the same shot count")
    return Frequencies(counts, shots.pop())
