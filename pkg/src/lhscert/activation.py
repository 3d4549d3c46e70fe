"""Robustness of the certificate under tomographic noise, (mu, q) sweeps and certification runs."""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .confidence import (
    CONVENTIONS,
    ELL,
    OctahedronBasis,
    alpha_for,
    build_basis,
    epsilon_scale,
    sample_count,
)
from .inequalities import chsh_max, direction_set, steering_bound, werner_steering_value
from .lp import IterationCapExceeded
from .operators import Bipartite
from .radius import (
    CERTIFIED,
    DEFAULT_POLYTOPE,
    NOT_CERTIFIED,
    NotCertifiable,
    center_radius,
    lower_radius_povm,
    max_epsilon_on_ray,
)
from .states import StateParams, family_state, werner
from .tomography import Frequencies, build_design, estimate, simulate

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-4
SWEEP_HEADER = ("mu", "q", "eps_star", "status")


def _map(fn, items, jobs: int):
    """Order-preserving map, in worker processes when ``jobs > 1``."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(*it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, *zip(*items)))


def signed_directions(basis: OctahedronBasis) -> list[tuple[int, int, Bipartite]]:
    return [(i, s, s * y) for i, y in enumerate(basis.operators()) for s in (1, -1)]


def _ray(rho, direction, tol, polytope, center):
    return max_epsilon_on_ray(rho, direction, tol=tol, polytope=polytope, center=center)


@dataclass
class EpsilonResult:
    eps_star: float  # in the units of ``convention``
    eps_unit: float  # step along unit-image directions
    convention: str
    per_direction: np.ndarray  # (70,) unit steps, ordered (i, +), (i, -)
    flags: list[str] = field(default_factory=list)
    lp_solves: int = 0

    @property
    def status(self) -> str:
        for f in ("center_not_certified", "below_tol"):
            if f in self.flags:
                return f
        return "ok"


def epsilon_star_detail(params: StateParams, basis: OctahedronBasis,
                        polytope: str = DEFAULT_POLYTOPE, tol: float = DEFAULT_TOL,
                        convention: str = "paper-numbers", jobs: int = 1) -> EpsilonResult:
    """Minimum over the 70 signed basis directions of the certified step from ``rho_{mu,q}``.

    ``tol`` applies to the unit step.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    scale = epsilon_scale(convention)
    rho = family_state(params)
    center = center_radius(rho, polytope)
    dirs = signed_directions(basis)
    if center[0] is None or center[0] < 1.0:
        return EpsilonResult(0.0, 0.0, convention, np.zeros(len(dirs)), ["center_not_certified"], 1)
    rays = _map(_ray, [(rho, d, tol, polytope, center) for _, _, d in dirs], jobs)
    per = np.array([r.epsilon for r in rays])
    flags = sorted({f for r in rays for f in r.flags})
    eps = float(per.min())
    if eps < tol:
        flags = sorted(set(flags) | {"below_tol"})
    return EpsilonResult(eps * scale, eps, convention, per, flags, 1 + sum(r.lp_solves for r in rays))


def epsilon_star(params: StateParams, basis: OctahedronBasis, polytope: str = DEFAULT_POLYTOPE,
                 tol: float = DEFAULT_TOL, convention: str = "paper-numbers", jobs: int = 1) -> float:
    return epsilon_star_detail(params, basis, polytope, tol, convention, jobs).eps_star


# ---------------------------------------------------------------- sweeps


def grid(lo: float, hi: float, step: float) -> list[float]:
    """``lo, lo + step, ...`` up to and including ``hi`` (to rounding).

    Interior points are rounded to 12 digits to strip float noise; the end
    points are returned exactly.
    """
    if step <= 0 or hi < lo:
        raise ValueError("need step > 0 and hi >= lo")
    n = int(math.floor((hi - lo) / step + 1e-9))
    out = [lo] + [round(lo + k * step, 12) for k in range(1, n + 1)]
    if abs(out[-1] - hi) < 1e-9:
        out[-1] = hi
    return out


@dataclass
class SweepConfig:
    mu_min: float = 0.71
    mu_max: float = 0.95
    mu_step: float = 0.06
    q_min: float = 0.02
    q_max: float = 0.18
    q_step: float = 0.04
    polytope: str = DEFAULT_POLYTOPE
    tol: float = DEFAULT_TOL
    basis_seed: int = 0
    jobs: int = 1
    convention: str = "paper-numbers"

    def __post_init__(self):
        for name in ("mu_min", "mu_max", "q_min", "q_max"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.mu_step <= 0 or self.q_step <= 0:
            raise ValueError("grid steps must be positive")
        if self.mu_max < self.mu_min or self.q_max < self.q_min:
            raise ValueError("grid ranges must be nondecreasing")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")

    def points(self) -> list[tuple[float, float]]:
        return [(m, q) for m in grid(self.mu_min, self.mu_max, self.mu_step)
                for q in grid(self.q_min, self.q_max, self.q_step)]

    @classmethod
    def from_dict(cls, d: dict) -> SweepConfig:
        known = set(cls.__dataclass_fields__)
        bad = set(d) - known
        if bad:
            raise ValueError(f"unknown sweep config keys: {sorted(bad)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def _fmt(x: float) -> str:
    return repr(float(x))


def _sweep_row(mu, q, basis, polytope, tol, convention):
    try:
        res = epsilon_star_detail(StateParams(mu, q), basis, polytope, tol, convention)
    except IterationCapExceeded:
        return (mu, q, float("nan"), "lp_iteration_cap")
    except (ArithmeticError, ValueError, RuntimeError) as exc:  # recorded, never fatal
        log.warning("sweep point (%s, %s) failed: %s", mu, q, exc)
        return (mu, q, float("nan"), f"error:{type(exc).__name__}")
    return (mu, q, res.eps_star, res.status)


def read_sweep(path) -> list[tuple[float, float, float, str]]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != SWEEP_HEADER:
            raise ValueError(f"{path}: expected header {','.join(SWEEP_HEADER)}")
        for r in reader:
            if len(r) == 4:
                rows.append((float(r[0]), float(r[1]), float(r[2]), r[3]))
    return rows


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for mu, q, eps, status in rows:
        w.writerow((_fmt(mu), _fmt(q), _fmt(eps), status))
    return buf.getvalue()


def atomic_write(path, text: str):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def sweep(config: SweepConfig, out=None, resume: bool = False,
          basis: OctahedronBasis | None = None) -> list[tuple[float, float, float, str]]:
    """One row ``(mu, q, eps_star, status)`` per grid point, in grid order.

    With ``out``, finished rows are also appended to ``out.partial`` so that an
    interrupted sweep can be continued with ``resume=True``; the final table is
    written to ``out`` in one step.
    """
    if basis is None:
        basis = build_basis(build_design(), config.basis_seed)
    pts = config.points()
    done = {}
    partial = Path(str(out) + ".partial") if out is not None else None
    if resume and out is not None:
        for src in (Path(out), partial):
            if src.exists():
                for row in read_sweep(src):
                    done[(row[0], row[1])] = row
    todo = [(m, q) for m, q in pts if (m, q) not in done]
    if partial is not None:
        if not partial.exists() or not resume:
            atomic_write(partial, sweep_csv([]))

    args = [(m, q, basis, config.polytope, config.tol, config.convention) for m, q in todo]
    if config.jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as ex:
            results = ex.map(_sweep_row, *zip(*args))
            for row in results:
                done[(row[0], row[1])] = row
                _append(partial, row)
    else:
        for a in args:
            row = _sweep_row(*a)
            done[(row[0], row[1])] = row
            _append(partial, row)

    rows = [done[p] for p in pts]
    if out is not None:
        atomic_write(out, sweep_csv(rows))
        if partial.exists():
            partial.unlink()
    return rows


def _append(partial, row):
    if partial is None:
        return
    with open(partial, "a", newline="") as fh:
        fh.write(sweep_csv([row]).split("\n", 1)[1])


# ---------------------------------------------------------------- certification


def _vertex_check(index, sign, rho, polytope):
    try:
        rb = lower_radius_povm(rho, polytope)
    except NotCertifiable:
        return {"index": index, "sign": sign, "verdict": NOT_CERTIFIED, "R_lower": None,
                "note": "bob_marginal_not_psd"}
    except IterationCapExceeded:
        return {"index": index, "sign": sign, "verdict": NOT_CERTIFIED, "R_lower": None,
                "note": "lp_iteration_cap"}
    except RuntimeError as exc:
        return {"index": index, "sign": sign, "verdict": NOT_CERTIFIED, "R_lower": None,
                "note": f"lp_failure:{exc}"}
    if rb.status == "infeasible":
        return {"index": index, "sign": sign, "verdict": NOT_CERTIFIED, "R_lower": None,
                "note": "lp_infeasible"}
    ok = rb.value >= 1.0
    return {"index": index, "sign": sign, "verdict": CERTIFIED if ok else NOT_CERTIFIED,
            "R_lower": float(rb.value)}


@dataclass
class CertificationReport:
    gamma: float | None
    shots: int | None  # repetitions per setting
    alpha: float
    vertices: list[dict]
    verdict: str
    seeds: dict
    convention: str
    polytope: str
    estimate: Bipartite | None = None

    @property
    def epsilon_available(self) -> float:
        return self.alpha * epsilon_scale(self.convention)

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "N": self.shots,
            "N_total": None if self.shots is None else self.shots * build_design().n_settings,
            "alpha": self.alpha,
            "epsilon_available": self.epsilon_available,
            "vertices": self.vertices,
            "verdict": self.verdict,
            "seeds": self.seeds,
            "convention": self.convention,
            "polytope": self.polytope,
        }


def certify(frequencies: Frequencies | None = None, *, true_state: Bipartite | None = None,
            shots: int | None = None, seed: int = 0, gamma: float = 0.997, basis_seed: int = 0,
            basis: OctahedronBasis | None = None, polytope: str = DEFAULT_POLYTOPE,
            convention: str = "paper-numbers", alpha: float | None = None,
            jobs: int = 1) -> CertificationReport:
    """Certify every vertex ``rho_hat +- alpha Y_i`` of the confidence polytope.

    Either measured ``frequencies`` or a simulation spec (``true_state``,
    ``shots`` per setting, ``seed``) must be given.  ``alpha`` overrides the
    radius obtained from ``gamma`` and the shot count.
    """
    epsilon_scale(convention)
    design = build_design()
    if frequencies is None:
        if true_state is None or shots is None:
            raise ValueError("give frequencies or a simulation spec (true_state, shots)")
        frequencies = simulate(design, true_state, shots, seed)
        seeds = {"simulation": seed, "basis": basis_seed}
    else:
        seeds = {"simulation": None, "basis": basis_seed}
    if basis is None:
        basis = build_basis(design, basis_seed)
    rho_hat = estimate(design, frequencies)
    if alpha is None:
        alpha = alpha_for(gamma, frequencies.shots, ELL)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    tasks = [(i, s, rho_hat + (s * alpha) * y, polytope) for i, y in enumerate(basis.operators())
             for s in (1, -1)]
    vertices = _map(_vertex_check, tasks, jobs)
    verdict = CERTIFIED if all(v["verdict"] == CERTIFIED for v in vertices) else NOT_CERTIFIED
    return CertificationReport(gamma, frequencies.shots, float(alpha), vertices, verdict, seeds,
                               convention, polytope, rho_hat)


# ---------------------------------------------------------------- sample budgets


def required_samples(params: StateParams, gamma: float, mode: str = "chsh",
                     basis: OctahedronBasis | None = None, polytope: str = DEFAULT_POLYTOPE,
                     tol: float = DEFAULT_TOL, convention: str = "paper-numbers",
                     eps_star: float | None = None, directions: str = "icosahedron-axes",
                     jobs: int = 1) -> dict:
    """Preparations needed to certify ``rho_{mu,q}`` and the margin of the filtered Werner state.

    ``eps_star`` (in ``convention`` units) skips the robustness search.
    """
    if mode not in ("chsh", "steering"):
        raise ValueError("mode must be 'chsh' or 'steering'")
    if eps_star is None:
        if basis is None:
            basis = build_basis(build_design(), 0)
        eps_star = epsilon_star(params, basis, polytope, tol, convention, jobs)
    if eps_star <= 0:
        raise ValueError(f"eps_star = 0 at (mu={params.mu}, q={params.q}): nothing to certify")
    n = sample_count(gamma, eps_star, convention=convention)
    out = {"mu": params.mu, "q": params.q, "gamma": gamma, "eps_star": eps_star,
           "convention": convention, "N_total": n, "mode": mode}
    if mode == "chsh":
        out["chsh_margin"] = chsh_max(werner(params.mu)) - 2
    else:
        c = steering_bound(direction_set(directions))
        out["directions"] = directions
        out["C_M"] = c
        out["steering_margin"] = werner_steering_value(params.mu) - c
    return out
