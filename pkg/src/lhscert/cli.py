"""Command-line front end.

    python3 -m lhscert <command> [flags]

Exit codes: 0 success, 1 not_certified verdict (certify), 2 usage error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from . import activation, confidence, inequalities, radius, states, tomography
from .lp import IterationCapExceeded
from .operators import Bipartite

EXIT_OK, EXIT_NOT_CERTIFIED, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

# built-in defaults; a JSON config overrides these and flags override the config
DEFAULTS = {
    "seed": 0,
    "jobs": 1,
    "out": None,
    "format": None,
    "polytope": radius.DEFAULT_POLYTOPE,
    "tol": activation.DEFAULT_TOL,
    "convention": "paper-numbers",
    "resume": False,
    # region
    "mu_min": 0.0, "mu_max": 1.0, "mu_step": 0.01,
    # radius / epsilon-star / simulate / certify / samples
    "state": "family", "mu": None, "q": None, "reduce": False, "upper": True,
    "basis_seed": None, "shots": None, "data": None, "gamma": 0.997, "alpha": None,
    "eps": None, "mode": "chsh",
    # sweep
    "q_min": 0.02, "q_max": 0.18, "q_step": 0.04,
    # steering-bound
    "directions": None, "set": "icosahedron-axes",
}


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    sup = argparse.SUPPRESS
    common.add_argument("--config", help="JSON file of defaults; flags override its keys")
    common.add_argument("--seed", type=int, default=sup)
    common.add_argument("--jobs", type=int, default=sup)
    common.add_argument("--out", default=sup, help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=sup)
    common.add_argument("--polytope", default=sup)
    common.add_argument("--tol", type=float, default=sup)
    common.add_argument("--convention", choices=confidence.CONVENTIONS, default=sup)
    common.add_argument("--resume", action="store_true", default=sup)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="lhscert", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_, argument_default=sup)

    r = add("region", "analytic locality boundaries on a mu grid (CSV)")
    for k in ("--mu-min", "--mu-max", "--mu-step"):
        r.add_argument(k, type=float)

    r = add("radius", "critical-radius bounds of a named state (JSON)")
    r.add_argument("--state", choices=("family", "werner", "werner-embedded"))
    r.add_argument("--mu", type=float)
    r.add_argument("--q", type=float)
    r.add_argument("--reduce", action="store_true", help="apply the qutrit reduction first")
    r.add_argument("--no-upper", dest="upper", action="store_false")

    r = add("epsilon-star", "robustness of the certificate at (mu, q) (JSON)")
    r.add_argument("--mu", type=float)
    r.add_argument("--q", type=float)
    r.add_argument("--basis-seed", type=int)

    r = add("sweep", "epsilon* over a (mu, q) grid (CSV)")
    for k in ("--mu-min", "--mu-max", "--mu-step", "--q-min", "--q-max", "--q-step"):
        r.add_argument(k, type=float)
    r.add_argument("--basis-seed", type=int)

    r = add("simulate", "simulated tomography frequencies (CSV)")
    r.add_argument("--mu", type=float)
    r.add_argument("--q", type=float)
    r.add_argument("--shots", type=int, help="repetitions per setting")

    r = add("certify", "certify a confidence polytope from data or a simulation (JSON)")
    r.add_argument("--data", help="frequency CSV; otherwise simulate from --mu/--q/--shots")
    r.add_argument("--mu", type=float)
    r.add_argument("--q", type=float)
    r.add_argument("--shots", type=int)
    r.add_argument("--gamma", type=float)
    r.add_argument("--alpha", type=float)
    r.add_argument("--basis-seed", type=int)

    r = add("samples", "required preparations for a given epsilon* or (mu, q) (JSON)")
    r.add_argument("--gamma", type=float)
    r.add_argument("--eps", type=float, help="epsilon* in --convention units")
    r.add_argument("--mu", type=float)
    r.add_argument("--q", type=float)
    r.add_argument("--mode", choices=("chsh", "steering"))
    r.add_argument("--basis-seed", type=int)

    r = add("steering-bound", "LHS bound C_M of a direction set (JSON)")
    r.add_argument("--directions", help='JSON file {"M": ..., "directions": [[x, y, z], ...]}')
    r.add_argument("--set", choices=inequalities.BUILTIN_DIRECTION_SETS)
    return p


def _settings(ns: argparse.Namespace) -> dict:
    cfg = {}
    if getattr(ns, "config", None):
        try:
            with open(ns.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        cfg.pop("command", None)
        bad = set(cfg) - set(DEFAULTS)
        if bad:
            raise UsageError(f"unknown config keys: {sorted(bad)}")
    s = dict(DEFAULTS)
    s.update(cfg)
    s.update({k: v for k, v in vars(ns).items() if k not in ("config", "verbose")})
    return s


def _need(s, *keys):
    missing = [k for k in keys if s.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _params(s) -> states.StateParams:
    _need(s, "mu", "q")
    return states.StateParams(float(s["mu"]), float(s["q"]))


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")


def _clean(obj):
    """Replace non-finite floats by None so that the JSON stays standard."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _emit(s, text: str):
    if s["out"]:
        activation.atomic_write(s["out"], text)
    else:
        sys.stdout.write(text)


def _format(s, default: str, allowed=("csv", "json")) -> str:
    fmt = s["format"] or default
    if fmt not in allowed:
        raise UsageError(f"this command supports --format {'/'.join(allowed)}")
    return fmt


# ---------------------------------------------------------------- commands


def cmd_region(s) -> int:
    fmt = _format(s, "csv")
    mus = activation.grid(float(s["mu_min"]), float(s["mu_max"]), float(s["mu_step"]))
    for m in mus:
        if not 0 <= m <= 1:
            raise UsageError("mu grid must lie in [0, 1]")
    rows = [(m, states.boundary_dichotomic(m), states.boundary_povm_dotted(m),
             states.boundary_extended(m)) for m in mus]
    cols = ("mu", "q_dichotomic", "q_dotted", "q_extended")
    if fmt == "json":
        _emit(s, _dump_json([dict(zip(cols, r)) for r in rows]))
    else:
        lines = [",".join(cols)] + [",".join(repr(float(v)) for v in r) for r in rows]
        _emit(s, "\n".join(lines) + "\n")
    return EXIT_OK


def _named_state(s) -> Bipartite:
    kind = s["state"]
    if kind == "family":
        return states.family_state(_params(s))
    _need(s, "mu")
    return states.werner(float(s["mu"]), embedded=(kind == "werner-embedded"))


def cmd_radius(s) -> int:
    _format(s, "json", ("json",))
    rho = _named_state(s)
    if s["reduce"]:
        rho = states.reduce_tilde(rho)
    res = radius.critical_radius(rho, s["polytope"], both_bounds=bool(s["upper"]))
    out = res.to_dict()
    out["state"] = {"kind": s["state"], "mu": s["mu"], "q": s["q"], "reduced": bool(s["reduce"])}
    out["certified"] = bool(res.lower >= 1.0)
    _emit(s, _dump_json(_clean(out)))
    return EXIT_OK


def _basis(s):
    seed = s["basis_seed"] if s["basis_seed"] is not None else s["seed"]
    return int(seed), confidence.build_basis(tomography.build_design(), int(seed))


def cmd_epsilon_star(s) -> int:
    _format(s, "json", ("json",))
    p = _params(s)
    seed, basis = _basis(s)
    res = activation.epsilon_star_detail(p, basis, s["polytope"], float(s["tol"]),
                                         s["convention"], int(s["jobs"]))
    out = {"mu": p.mu, "q": p.q, "eps_star": res.eps_star, "eps_unit": res.eps_unit,
           "convention": res.convention, "status": res.status, "flags": res.flags,
           "tol": float(s["tol"]), "basis_seed": seed, "polytope": s["polytope"],
           "lp_solves": res.lp_solves}
    _emit(s, _dump_json(out))
    return EXIT_OK


def cmd_sweep(s) -> int:
    _format(s, "csv", ("csv",))
    keys = activation.SweepConfig.__dataclass_fields__
    cfg = {k: s[k] for k in keys if k in s and s[k] is not None}
    if s["basis_seed"] is None:
        cfg["basis_seed"] = s["seed"]
    try:
        config = activation.SweepConfig.from_dict(cfg)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if s["resume"] and not s["out"]:
        raise UsageError("--resume needs --out")
    rows = activation.sweep(config, out=s["out"], resume=bool(s["resume"]))
    if not s["out"]:
        sys.stdout.write(activation.sweep_csv(rows))
    return EXIT_OK


def cmd_simulate(s) -> int:
    _format(s, "csv", ("csv",))
    _need(s, "shots")
    rho = states.family_state(_params(s))
    f = tomography.simulate(tomography.build_design(), rho, int(s["shots"]), int(s["seed"]))
    _emit(s, tomography.frequencies_csv(f))
    return EXIT_OK


def cmd_certify(s) -> int:
    _format(s, "json", ("json",))
    seed, basis = _basis(s)
    common = dict(gamma=float(s["gamma"]), basis_seed=seed, basis=basis, polytope=s["polytope"],
                  convention=s["convention"], jobs=int(s["jobs"]),
                  alpha=None if s["alpha"] is None else float(s["alpha"]))
    if s["data"]:
        try:
            f = tomography.read_frequencies(s["data"])
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read frequencies {s['data']}: {exc}") from exc
        rep = activation.certify(f, **common)
    else:
        _need(s, "shots")
        rep = activation.certify(true_state=states.family_state(_params(s)), shots=int(s["shots"]),
                                 seed=int(s["seed"]), **common)
    out = rep.to_dict()
    if not s["data"]:
        out["simulated_state"] = {"mu": float(s["mu"]), "q": float(s["q"])}
    _emit(s, _dump_json(_clean(out)))
    return EXIT_OK if rep.verdict == radius.CERTIFIED else EXIT_NOT_CERTIFIED


def cmd_samples(s) -> int:
    _format(s, "json", ("json",))
    gamma = float(s["gamma"])
    if s["eps"] is not None and s["mu"] is None:
        eps = float(s["eps"])
        n = confidence.sample_count(gamma, eps, convention=s["convention"])
        out = {"gamma": gamma, "eps_star": eps, "convention": s["convention"], "N_total": n,
               "ell": confidence.ELL, "settings": confidence.N_SETTINGS}
    else:
        p = _params(s)
        _, basis = _basis(s)
        out = activation.required_samples(
            p, gamma, s["mode"], basis=basis, polytope=s["polytope"], tol=float(s["tol"]),
            convention=s["convention"], eps_star=None if s["eps"] is None else float(s["eps"]),
            jobs=int(s["jobs"]))
    _emit(s, _dump_json(out))
    return EXIT_OK


def cmd_steering_bound(s) -> int:
    _format(s, "json", ("json",))
    if s["directions"]:
        try:
            d = inequalities.load_directions(s["directions"])
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read directions {s['directions']}: {exc}") from exc
    else:
        d = inequalities.direction_set(s["set"])
    c = inequalities.steering_bound(d)
    out = {"name": d.name, "M": d.m, "C_M": c,
           "werner_mu_threshold": c, "directions": d.directions.tolist()}
    _emit(s, _dump_json(out))
    return EXIT_OK


COMMANDS = {
    "region": cmd_region,
    "radius": cmd_radius,
    "epsilon-star": cmd_epsilon_star,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "certify": cmd_certify,
    "samples": cmd_samples,
    "steering-bound": cmd_steering_bound,
}


def main(argv=None) -> int:
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        s = _settings(ns)
        if int(s["jobs"]) < 1:
            raise UsageError("--jobs must be at least 1")
        return COMMANDS[ns.command](s)
    except UsageError as exc:
        print(f"lhscert {ns.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IterationCapExceeded, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"lhscert {ns.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, TypeError, OSError) as exc:
        print(f"lhscert {ns.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
