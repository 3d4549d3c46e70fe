"""Acceptance criteria, each at its stated tolerance; one PASS/FAIL line per criterion."""
import math
import time

import numpy as np
import pytest

from lhscert.activation import epsilon_star_detail
from lhscert.confidence import (
    ELL, build_basis, contains, make_confidence_polytope, sample_count,
)
from lhscert.inequalities import chsh_max, direction_set, steering_bound
from lhscert.operators import Bipartite, random_hermitian
from lhscert.radius import critical_radius
from lhscert.states import (
    MU_POVM_LOCAL, MU_TOUCH, Q_TOUCH, StateParams, boundary_extended, family_state, reduce_tilde, werner,
)
from lhscert.tomography import build_design, estimate, probabilities, simulate

from test_inequalities import hidden_state_oracle

DESIGN = build_design()


def record(log, n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    log.append(line)
    return ok


def test_c01_boundary_anchors(acceptance_log):
    err = abs(boundary_extended(MU_TOUCH) - Q_TOUCH)
    at_corner = boundary_extended(5 / 12)
    ok = err <= 1e-10 and at_corner == 1 and MU_POVM_LOCAL == 5 / 12
    assert record(acceptance_log, 1, ok,
                  f"|q_ext(mu0) - q0| = {err:.1e}, q_ext(5/12) = {at_corner!r}")


def test_c02_werner_radius(acceptance_log):
    t0 = time.time()
    parts, ok = [], True
    for mu in (0.6, 0.8, 1.0):
        res = critical_radius(werner(mu))
        target = 1 / (2 * mu)
        gap = (res.upper - res.lower) / target
        good = res.lower <= target <= res.upper and gap <= 0.05
        ok &= good
        parts.append(f"mu={mu}: [{res.lower:.4f}, {res.upper:.4f}] vs {target:.4f}, gap {100 * gap:.1f}%")
    dt = time.time() - t0
    ok &= dt <= 300
    assert record(acceptance_log, 2, ok, "; ".join(parts) + f" ({dt:.0f}s)")


C3_MUS = (0.6, 0.675, 0.75, 0.825, 0.9)


def test_c03_reduction_consistency(acceptance_log):
    t0 = time.time()
    lows, ups = [], []
    for mu in C3_MUS:
        b = 2 / 3 * (1 - mu)
        lows.append(critical_radius(reduce_tilde(family_state(StateParams(mu, 0.9 * b))), both_bounds=False).lower)
        ups.append(critical_radius(reduce_tilde(family_state(StateParams(mu, 1.2 * b)))).upper)
    n_low = sum(v >= 1 for v in lows)
    n_up = sum(v < 1 for v in ups)
    dt = time.time() - t0
    ok = n_low == 5 and n_up == 5 and dt <= 900
    detail = (f"lower>=1 at q=0.9b: {n_low}/5 {[round(v, 4) for v in lows]}; "
              f"upper<1 at q=1.2b: {n_up}/5 {[round(v, 4) for v in ups]} (mu={list(C3_MUS)})")
    assert record(acceptance_log, 3, ok, detail)


@pytest.fixture(scope="module")
def basis0():
    return build_basis(DESIGN, 0)


def test_c04a_epsilon_star_activable_point(acceptance_log, basis0):
    t0 = time.time()
    res = epsilon_star_detail(StateParams(0.72, 0.12), basis0, tol=1e-4)
    dt = time.time() - t0
    ok = 0.0005 <= res.eps_star <= 0.002 and dt <= 1800
    assert record(acceptance_log, 4, ok,
                  f"(a) eps*(0.72, 0.12) = {res.eps_star:.5f} in [0.0005, 0.002] "
                  f"[paper-numbers, basis seed 0, {dt:.0f}s]")


def test_c04b_epsilon_star_steering_optimum(acceptance_log, basis0):
    t0 = time.time()
    res = epsilon_star_detail(StateParams(0.5410, 0.1836), basis0, tol=1e-4)
    dt = time.time() - t0
    rel = res.eps_star / 0.0048 - 1
    ok = abs(rel) <= 0.25 and dt <= 1800
    assert record(acceptance_log, 4, ok,
                  f"(b) eps*(0.5410, 0.1836) = {res.eps_star:.5f} vs 0.0048 ({100 * rel:+.0f}%, "
                  f"allowed +-25%) [paper-numbers, basis seed 0, {dt:.0f}s]")


def test_c05_sample_counts(acceptance_log):
    anchors = {(0.997, 0.001): 7.5e8, (0.683, 0.001): 4.6e8,
               (0.997, 0.0048): 3.2e7, (0.683, 0.0048): 2.0e7}
    parts, ok = [], True
    for (g, e), want in anchors.items():
        got = sample_count(g, e, convention="paper-numbers")
        ok &= abs(got / want - 1) <= 0.05
        parts.append(f"{got:.3g}/{want:.2g}")
    ratio = sample_count(0.997, 0.001) / sample_count(0.997, 0.0048)
    ok &= 22 <= ratio <= 25
    assert record(acceptance_log, 5, ok, ", ".join(parts) + f"; ratio {ratio:.2f}")


def test_c06_steering_bounds(acceptance_log):
    ico = steering_bound(direction_set("icosahedron-axes"))
    octa = direction_set("octahedron-axes")
    c_oct = steering_bound(octa)
    oracle = hidden_state_oracle(octa)
    sq = steering_bound(direction_set("square"))
    ok = (abs(ico - 0.5393) <= 1e-3 and abs(c_oct - math.sqrt(3) / 3) <= 1e-9
          and abs(oracle - math.sqrt(3) / 3) <= 1e-9 and sq == math.sqrt(0.5))
    assert record(acceptance_log, 6, ok,
                  f"C6(ico) = {ico:.6f}, C6(oct) = {c_oct:.12f} (oracle {oracle:.12f}), C2 = {sq!r}")


def test_c07_chsh(acceptance_log):
    mus = np.linspace(0, 1, 101)
    err = max(abs(chsh_max(werner(m)) - 2 * math.sqrt(2) * m) for m in mus)
    t = 1 / math.sqrt(2)
    cross = chsh_max(werner(t - 1e-9)) <= 2 < chsh_max(werner(t + 1e-9))
    ok = err <= 1e-8 and cross
    assert record(acceptance_log, 7, ok, f"max error {err:.1e}, crossing at 1/sqrt2: {cross}")


def test_c08_tomography(acceptance_log):
    rank = np.linalg.matrix_rank(DESIGN.traceless_map, tol=1e-10)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        h = random_hermitian(6, rng)
        h += (1 - np.trace(h).real) / 6 * np.eye(6)
        rho = Bipartite(h, 3, 2)
        worst = max(worst, np.max(np.abs(estimate(DESIGN, probabilities(DESIGN, rho)).mat - rho.mat)))
    ok = rank == 35 and worst <= 1e-9
    assert record(acceptance_log, 8, ok, f"rank {rank}, max round-trip error {worst:.1e}")


def test_c09_coverage(acceptance_log, basis0):
    gamma, shots, runs = 0.9, 10**5, 200
    rho = family_state(StateParams(0.72, 0.12))
    hits = 0
    for s in range(runs):
        f = simulate(DESIGN, rho, shots, seed=1000 + s)
        cp = make_confidence_polytope(DESIGN, estimate(DESIGN, f), gamma, shots, basis0)
        hits += contains(DESIGN, cp, rho)
    floor = gamma - 3 * math.sqrt(gamma * (1 - gamma) / runs)
    ok = hits / runs >= floor
    assert record(acceptance_log, 9, ok, f"coverage {hits}/{runs} = {hits / runs:.3f} >= {floor:.3f}")


def test_c10_containment(acceptance_log, basis0):
    rng = np.random.default_rng(99)
    center = family_state(StateParams(0.72, 0.12))
    cp = make_confidence_polytope(DESIGN, center, 0.9, 10**5, basis0)
    mats = np.array([y.mat for y in basis0.operators()])
    inside = 0
    for _ in range(1000):
        c = rng.normal(size=ELL)
        c /= np.linalg.norm(c)
        step = np.einsum("i,iab->ab", cp.alpha / math.sqrt(ELL) * c, mats)
        inside += contains(DESIGN, cp, Bipartite(center.mat + step, 3, 2))
    ok = inside == 1000
    assert record(acceptance_log, 10, ok, f"{inside}/1000 ellipsoid points inside")
