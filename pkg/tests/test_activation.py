import json
import math

import numpy as np
import pytest

from lhscert.activation import (
    SweepConfig, certify, epsilon_star_detail, grid, read_sweep, required_samples, signed_directions,
    sweep, sweep_csv,
)
from lhscert.confidence import build_basis, epsilon_scale
from lhscert.radius import CERTIFIED, NOT_CERTIFIED, has_lhs_povm, max_epsilon_on_ray
from lhscert.states import StateParams, boundary_extended, family_state, werner
from lhscert.tomography import build_design, estimate, simulate

DESIGN = build_design()
BASIS = build_basis(DESIGN, 0)


@pytest.fixture(scope="module")
def eps_072():
    return epsilon_star_detail(StateParams(0.72, 0.12), BASIS)


def test_epsilon_star_is_the_minimum(eps_072):
    assert eps_072.status == "ok"
    assert eps_072.eps_unit == eps_072.per_direction.min()
    assert eps_072.eps_star == pytest.approx(eps_072.eps_unit * epsilon_scale("paper-numbers"))
    rho = family_state(StateParams(0.72, 0.12))
    dirs = signed_directions(BASIS)
    for k in (3, 40):
        r = max_epsilon_on_ray(rho, dirs[k][2])
        assert eps_072.eps_unit <= r.epsilon + 1e-12


def test_vertices_at_tolerance_are_certified(eps_072):
    rho = family_state(StateParams(0.72, 0.12))
    dirs = signed_directions(BASIS)
    tol = 1e-4
    assert eps_072.eps_unit > tol
    pick = np.random.default_rng(0).choice(len(dirs), size=5, replace=False)
    for k in pick:
        assert has_lhs_povm(rho + tol * dirs[k][2]) == CERTIFIED
    k = int(np.argmin(eps_072.per_direction))
    assert has_lhs_povm(rho + eps_072.eps_unit * dirs[k][2]) == CERTIFIED


def test_uncertified_center_gives_zero():
    res = epsilon_star_detail(StateParams(0.9, 0.5), BASIS)
    assert res.eps_star == 0 and res.status == "center_not_certified"


def test_grid_inclusive():
    assert grid(0.1, 0.3, 0.1) == [0.1, 0.2, 0.3]
    with pytest.raises(ValueError):
        grid(0.3, 0.1, 0.1)


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(mu_max=1.5)
    with pytest.raises(ValueError):
        SweepConfig(tol=0)
    with pytest.raises(ValueError):
        SweepConfig.from_dict({"bogus": 1})


CHEAP = SweepConfig(mu_min=0.9, mu_max=0.9, mu_step=0.1, q_min=0.3, q_max=0.5, q_step=0.2)


def test_sweep_outside_region_is_zero_and_deterministic(tmp_path):
    rows = sweep(CHEAP, out=tmp_path / "a.csv", basis=BASIS)
    assert [(r[0], r[1]) for r in rows] == [(0.9, 0.3), (0.9, 0.5)]
    for mu, q, eps, status in rows:
        assert q > boundary_extended(mu)
        assert eps == 0 and status == "center_not_certified"
    sweep(CHEAP, out=tmp_path / "b.csv", basis=BASIS)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert not (tmp_path / "a.csv.partial").exists()


def test_sweep_parallel_matches_serial(tmp_path):
    par = SweepConfig(**{**CHEAP.to_dict(), "jobs": 2})
    assert sweep(par, basis=BASIS) == sweep(CHEAP, basis=BASIS)


def test_sweep_resume_skips_done_rows(tmp_path):
    out = tmp_path / "s.csv"
    partial = tmp_path / "s.csv.partial"
    partial.write_text(sweep_csv([(0.9, 0.3, 0.123, "ok")]))
    rows = sweep(CHEAP, out=out, resume=True, basis=BASIS)
    assert rows[0] == (0.9, 0.3, 0.123, "ok")
    assert read_sweep(out) == rows


def test_certify_with_zero_alpha_is_a_point_check():
    f = simulate(DESIGN, family_state(StateParams(0.72, 0.12)), 10**6, 1)
    rep = certify(f, alpha=0.0, basis=BASIS)
    assert rep.verdict == has_lhs_povm(estimate(DESIGN, f))
    assert len(rep.vertices) == 70
    assert len({v["R_lower"] for v in rep.vertices}) == 1


def test_certify_report_fields():
    rep = certify(true_state=werner(0.9, embedded=True), shots=10**8, seed=0, gamma=0.683, basis=BASIS)
    assert rep.verdict == NOT_CERTIFIED
    d = rep.to_dict()
    for key in ("gamma", "N", "alpha", "vertices", "verdict", "seeds", "convention"):
        assert key in d
    assert set(d["vertices"][0]) >= {"index", "sign", "verdict", "R_lower"}
    json.dumps(d)


def test_certify_needs_data_or_spec():
    with pytest.raises(ValueError):
        certify()


def test_required_samples_with_given_epsilon():
    p = StateParams(0.72, 0.12)
    out = required_samples(p, 0.997, "chsh", eps_star=0.001)
    assert out["N_total"] == pytest.approx(7.5e8, rel=0.05)
    assert out["chsh_margin"] == pytest.approx(2 * math.sqrt(2) * 0.72 - 2)
    st = required_samples(StateParams(0.541, 0.1836), 0.997, "steering", eps_star=0.0048)
    assert st["N_total"] == pytest.approx(3.2e7, rel=0.05)
    assert st["steering_margin"] == pytest.approx(0.541 - st["C_M"])
    with pytest.raises(ValueError):
        required_samples(p, 0.997, "chsh", eps_star=0.0)


def test_certify_parallel_matches_serial():
    f = simulate(DESIGN, family_state(StateParams(0.72, 0.12)), 10**8, 2)
    a = certify(f, gamma=0.683, basis=BASIS, jobs=1)
    b = certify(f, gamma=0.683, basis=BASIS, jobs=2)
    assert a.to_dict() == b.to_dict()
