"""epsilon* at the two reference points for several basis seeds, with the implied budgets."""
import argparse
import time

import numpy as np

from lhscert.activation import epsilon_star_detail, required_samples
from lhscert.confidence import build_basis
from lhscert.states import StateParams
from lhscert.tomography import build_design

POINTS = {"chsh": StateParams(0.72, 0.12), "steering": StateParams(0.5410, 0.1836)}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--tol", type=float, default=1e-4)
    ap.add_argument("--convention", default="paper-numbers")
    args = ap.parse_args()

    design = build_design()
    for mode, p in POINTS.items():
        vals = []
        for seed in args.seeds:
            t = time.time()
            res = epsilon_star_detail(p, build_basis(design, seed), tol=args.tol, convention=args.convention)
            vals.append(res.eps_star)
            n = required_samples(p, 0.997, mode, eps_star=res.eps_star, convention=args.convention)
            print(f"{mode:8s} mu={p.mu} q={p.q} seed={seed} eps*={res.eps_star:.5f} "
                  f"(unit step {res.eps_unit:.5f}) N'(3 sigma)={n['N_total']:.2e} ({time.time() - t:.0f}s)",
                  flush=True)
        vals = np.array(vals)
        print(f"{mode:8s} mean {vals.mean():.5f} min {vals.min():.5f} max {vals.max():.5f}")


if __name__ == "__main__":
    main()
