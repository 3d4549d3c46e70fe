"""Critical radius of qudit-qubit operators for two-outcome LHS models.

For ``rho_t = t rho + (1 - t) 1/d_A (x) rho_B`` the radius ``R(rho)`` is the
largest ``t`` for which ``rho_t`` admits an LHS model for dichotomic
measurements.  Replacing Bob's Bloch sphere by a polytope turns the search
for the hidden-state ensemble into a finite LP over vertex weights ``p_k``:

    sum_k p_k max(<Z, sigma_k>, 0)  >=  t eta_l(Z) + (1 - t) l/d_A tr(rho_B Z)

for every plane functional ``Z`` of the polytope and ``l = 1..d_A``, where
``eta_l(Z)`` is the sum of the ``l`` largest eigenvalues of
``tr_B[rho (1 (x) Z)]``.  Inner polytopes give lower bounds on ``R``, outer
ones upper bounds.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .bloch import FacetSet, Polytope, facet_functionals, make_polytope
from .lp import LinearProgram, LPSolution, solve_lp
from .operators import PAULIS, Bipartite, alice_operator, hermitian, partial_trace_a

log = logging.getLogger(__name__)

T_CAP = 100.0
DEFAULT_POLYTOPE = "icosidodecahedron"


class NotCertifiable(ValueError):
    """Bob's marginal is not positive, so no LHS model can exist."""


@dataclass(frozen=True)
class _PolytopeData:
    polytope: Polytope
    facets: FacetSet
    capacity: np.ndarray  # (n_functionals, n_vertices): max(<Z_j, sigma_k>, 0)


@lru_cache(maxsize=None)
def polytope_data(name: str, kind: str) -> _PolytopeData:
    p = make_polytope(name, kind)
    return _prepare(p)


_CUSTOM: dict = {}


def _prepare_custom(p: Polytope) -> _PolytopeData:
    key = (p.kind, p.vertices.shape, p.vertices.tobytes())
    if key not in _CUSTOM:
        _CUSTOM[key] = _prepare(p)
    return _CUSTOM[key]


def _prepare(p: Polytope) -> _PolytopeData:
    f = facet_functionals(p)
    cap = np.maximum(f.values(p.vertices), 0.0)
    cap[cap < 1e-13] = 0.0
    return _PolytopeData(p, f, cap)


def eta(rho: Bipartite, z, l: int) -> float:
    """Largest value of ``tr[rho (E (x) Z)]`` over rank-``l`` projectors ``E``."""
    if not 0 <= l <= rho.dim_a:
        raise ValueError(f"l must lie in 0..{rho.dim_a}, got {l}")
    if l == 0:
        return 0.0
    ev = np.linalg.eigvalsh(alice_operator(rho, z))
    return float(ev[::-1][:l].sum())


def _alice_operators(rho: Bipartite, functionals: np.ndarray) -> np.ndarray:
    """``tr_B[rho (1 (x) Z_j)]`` for every functional row, shape (n, d_A, d_A)."""
    basis = [np.eye(2, dtype=complex), *PAULIS]
    m = np.array([alice_operator(rho, b) for b in basis])
    return np.einsum("jk,kab->jab", functionals, m)


def eta_table(rho: Bipartite, functionals: np.ndarray) -> np.ndarray:
    """``eta_l(Z_j)`` for ``l = 0..d_A``, shape (n, d_A + 1)."""
    ops = _alice_operators(rho, functionals)
    ev = np.linalg.eigvalsh(ops)[:, ::-1]
    return np.concatenate([np.zeros((len(ev), 1)), np.cumsum(ev, axis=1)], axis=1)


@dataclass(frozen=True)
class SteeringProblem:
    rho_tilde: Bipartite
    polytope: Polytope
    facets: FacetSet
    capacity: np.ndarray
    t_cap: float = T_CAP

    def __post_init__(self):
        if self.rho_tilde.dim_b != 2:
            raise ValueError("Bob must hold a qubit")
        if self.t_cap <= 1:
            raise ValueError("t_cap must exceed 1")
        rho_b = partial_trace_a(self.rho_tilde)
        if np.linalg.eigvalsh(rho_b)[0] < -1e-12:
            raise NotCertifiable("Bob's marginal is not positive semidefinite")


def make_problem(rho_tilde: Bipartite, polytope: str | Polytope = DEFAULT_POLYTOPE,
                 kind: str = "inner", t_cap: float = T_CAP) -> SteeringProblem:
    data = polytope_data(polytope, kind) if isinstance(polytope, str) else _prepare_custom(polytope)
    return SteeringProblem(rho_tilde, data.polytope, data.facets, data.capacity, t_cap)


def assemble_lp(prob: SteeringProblem) -> LinearProgram:
    """Variables ``(t, p_1..p_N)``; one inequality row per (functional, l) with ``l = 1..d_A - 1``.

    At ``l = d_A`` Alice's effect is the identity, the conditional state is
    ``rho_B`` itself, and those rows together force ``sum_k p_k sigma_k = rho_B``.
    As inequalities that feasible set has empty interior and solvers misreport
    it under rounding, so the rows are replaced by the equivalent equalities
    on the Bloch vector.
    """
    d = prob.rho_tilde.dim_a
    n_f, n_p = prob.capacity.shape
    etas = eta_table(prob.rho_tilde, prob.facets.functionals)  # (n_f, d + 1)
    trace_b = etas[:, d]  # eta_{d_A}(Z) = tr(rho_B Z)
    ls = np.arange(1, d)
    mixed = trace_b[:, None] * ls[None, :] / d  # (n_f, d - 1)
    t_coef = -(etas[:, 1:d] - mixed)

    a = np.empty((n_f * (d - 1), 1 + n_p))
    a[:, 0] = t_coef.reshape(-1)
    a[:, 1:] = np.repeat(prob.capacity, d - 1, axis=0)
    b = mixed.reshape(-1)
    a[np.abs(a) < 1e-15] = 0.0

    rho_b = partial_trace_a(prob.rho_tilde)
    r_b = np.real([np.trace(rho_b @ s) for s in PAULIS]) / np.real(np.trace(rho_b))
    a_eq = np.zeros((4, 1 + n_p))
    a_eq[0, 1:] = 1.0
    a_eq[1:, 1:] = prob.polytope.vertices.T
    b_eq = np.concatenate([[1.0], r_b])
    bounds = ((0.0, prob.t_cap),) + ((0.0, None),) * n_p
    objective = np.zeros(1 + n_p)
    objective[0] = 1.0
    return LinearProgram(objective, a, b, a_eq, b_eq, bounds)


@dataclass
class RadiusBound:
    value: float  # nan when the LP is infeasible
    status: str  # optimal | infeasible | cap_hit
    weights: np.ndarray | None = None
    solution: LPSolution | None = None

    @property
    def cap_hit(self) -> bool:
        return self.status == "cap_hit"


def radius_bound(rho_tilde: Bipartite, polytope: str | Polytope = DEFAULT_POLYTOPE,
                 kind: str = "inner", t_cap: float = T_CAP, x0=None) -> RadiusBound:
    prob = make_problem(rho_tilde, polytope, kind, t_cap)
    lp = assemble_lp(prob)
    if x0 is None:
        x0 = np.concatenate([[1.0], np.full(prob.polytope.n_vertices, 1 / prob.polytope.n_vertices)])
    sol = solve_lp(lp, x0=x0)
    if sol.status == "infeasible":
        # t = 0 is infeasible: even the fully mixed direction cannot be simulated
        return RadiusBound(float("nan"), "infeasible", solution=sol)
    if sol.status != "optimal":
        raise RuntimeError(f"unexpected LP status {sol.status}")
    t = sol.x[0]
    w = np.clip(sol.x[1:], 0.0, None)
    w = w / w.sum()
    status = "cap_hit" if t >= t_cap - 1e-9 else "optimal"
    return RadiusBound(float(t), status, w, sol)


@dataclass
class CriticalRadiusResult:
    lower: float
    upper: float | None
    weights: np.ndarray | None
    flags: list[str] = field(default_factory=list)
    polytope: str = DEFAULT_POLYTOPE

    def to_dict(self) -> dict:
        return {
            "lower": None if np.isnan(self.lower) else self.lower,
            "upper": self.upper,
            "weights": None if self.weights is None else self.weights.tolist(),
            "flags": list(self.flags),
            "polytope": self.polytope,
        }


def critical_radius(rho_tilde: Bipartite, polytope: str = DEFAULT_POLYTOPE,
                    both_bounds: bool = True, t_cap: float = T_CAP) -> CriticalRadiusResult:
    """Lower bound from the inner polytope and, optionally, upper bound from the outer one.

    Raises :class:`NotCertifiable` if Bob's marginal is not positive.
    """
    lo = radius_bound(rho_tilde, polytope, "inner", t_cap)
    flags = []
    if lo.cap_hit:
        flags.append("lower_cap_hit")
    if lo.status == "infeasible":
        flags.append("lower_infeasible")
    upper = None
    if both_bounds:
        hi = radius_bound(rho_tilde, polytope, "outer", t_cap)
        if hi.cap_hit:
            flags.append("upper_cap_hit")
        if hi.status == "infeasible":
            flags.append("upper_infeasible")
            upper = 0.0
        else:
            upper = hi.value
    lower = lo.value if lo.status != "infeasible" else 0.0
    return CriticalRadiusResult(lower, upper, lo.weights, flags, polytope)


CERTIFIED = "certified_local"
NOT_CERTIFIED = "not_certified"


def lower_radius_povm(rho: Bipartite, polytope: str = DEFAULT_POLYTOPE, x0=None) -> RadiusBound:
    """Inner-polytope lower bound on ``R(reduce_tilde(rho))`` for a 3x2 operator."""
    from .states import reduce_tilde

    return radius_bound(reduce_tilde(rho), polytope, "inner", x0=x0)


def has_lhs_povm(rho: Bipartite, polytope: str = DEFAULT_POLYTOPE) -> str:
    """One-sided certificate of an LHS model for all POVMs on Alice's qutrit."""
    return CERTIFIED if _certified(rho, polytope)[0] else NOT_CERTIFIED


def _certified(rho: Bipartite, polytope: str, x0=None) -> tuple[bool, np.ndarray | None]:
    try:
        rb = lower_radius_povm(rho, polytope, x0=x0)
    except NotCertifiable:
        return False, None
    if rb.status == "infeasible":
        return False, None
    x = rb.solution.x if rb.solution is not None else None
    return bool(rb.value >= 1.0), x


@dataclass
class RayResult:
    epsilon: float
    flags: list[str] = field(default_factory=list)
    lp_solves: int = 0


def center_radius(rho: Bipartite, polytope: str = DEFAULT_POLYTOPE):
    """``(R, lp_x)`` of the reduced operator, or ``(None, None)`` when no radius exists."""
    return _radius_or_none(rho, polytope)


def _radius_or_none(rho: Bipartite, polytope: str, x0=None):
    try:
        rb = lower_radius_povm(rho, polytope, x0=x0)
    except NotCertifiable:
        return None, None
    if rb.status == "infeasible":
        return None, None
    return rb.value, rb.solution.x


def max_epsilon_on_ray(rho: Bipartite, direction: Bipartite, tol: float = 1e-4,
                       polytope: str = DEFAULT_POLYTOPE, eps_max: float = 0.25,
                       eps_guess: float = 0.02, center=None) -> RayResult:
    """Largest ``eps`` (to ``tol``) such that ``rho + eps * direction`` is certified.

    The certified set is convex, so along a ray from a certified point it is an
    interval ``[0, eps*]``.  A bracket ``[lo, hi]`` with ``lo`` certified and
    ``hi`` not is grown geometrically from ``eps_guess`` and then shrunk by false
    position on ``R - 1``; after each interpolated point a probe one tolerance
    away tries to close the bracket, and bisection takes over whenever a radius
    is unavailable or the bracket stops shrinking.  ``center`` may carry a
    precomputed ``(R, lp_solution)`` for ``rho`` when many rays share it.
    """
    solves = 0

    def radius_at(eps, x0):
        nonlocal solves
        solves += 1
        return _radius_or_none(rho + eps * direction, polytope, x0=x0)

    if center is None:
        center = _radius_or_none(rho, polytope)
        solves += 1
    r0, x = center
    if r0 is None or r0 < 1.0:
        return RayResult(0.0, ["center_not_certified"], solves)
    if np.max(np.abs(direction.mat)) == 0:
        return RayResult(eps_max, ["zero_direction"], solves)

    lo, f_lo = 0.0, r0 - 1.0
    hi, f_hi = None, None
    probe = min(eps_guess, eps_max)
    while hi is None:
        r, xr = radius_at(probe, x)
        if r is not None and r >= 1.0:
            lo, f_lo, x = probe, r - 1.0, xr
            if probe >= eps_max:
                return RayResult(eps_max, ["bracket_certified"], solves)
            probe = min(4 * probe, eps_max)
        else:
            hi, f_hi = probe, (None if r is None else r - 1.0)

    interpolate = True
    while hi - lo > tol:
        width = hi - lo
        if interpolate and f_hi is not None and f_lo > f_hi:
            mid = lo + width * f_lo / (f_lo - f_hi)
            mid = min(max(mid, lo + 0.5 * tol), hi - 0.5 * tol)
        else:
            mid = 0.5 * (lo + hi)
        r, xr = radius_at(mid, x)
        ok = r is not None and r >= 1.0
        if ok:
            lo, f_lo, x = mid, r - 1.0, xr
            probe = lo + 0.9 * tol
        else:
            hi, f_hi = mid, (None if r is None else r - 1.0)
            probe = hi - 0.9 * tol
        if lo < probe < hi and hi - lo > tol:
            r, xr = radius_at(probe, x)
            if r is not None and r >= 1.0:
                lo, f_lo, x = probe, r - 1.0, xr
            else:
                hi, f_hi = probe, (None if r is None else r - 1.0)
        interpolate = hi - lo < 0.5 * width
    return RayResult(lo, [], solves)
