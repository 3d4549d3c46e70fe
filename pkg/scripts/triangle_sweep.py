"""epsilon* on a coarse 5x5 grid over the activable triangle.

mu runs over [1/sqrt 2, 0.95]; q over fractions of the dotted boundary 2(1 - mu)/3.
"""
import argparse
import math
import time

from lhscert.activation import atomic_write, epsilon_star_detail, sweep_csv
from lhscert.confidence import build_basis
from lhscert.states import StateParams, boundary_povm_dotted
from lhscert.tomography import build_design

FRACTIONS = (0.1, 0.3, 0.5, 0.7, 0.9)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="triangle_sweep.csv")
    ap.add_argument("--basis-seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=1e-4)
    args = ap.parse_args()

    basis = build_basis(build_design(), args.basis_seed)
    lo = 1 / math.sqrt(2)
    mus = [lo + k * (0.95 - lo) / 4 for k in range(5)]
    rows = []
    for mu in mus:
        for f in FRACTIONS:
            q = f * boundary_povm_dotted(mu)
            t = time.time()
            res = epsilon_star_detail(StateParams(mu, q), basis, tol=args.tol)
            rows.append((mu, q, res.eps_star, res.status))
            print(f"mu={mu:.4f} q={q:.4f} eps*={res.eps_star:.5f} {res.status} ({time.time() - t:.0f}s)",
                  flush=True)
    atomic_write(args.out, sweep_csv(rows))


if __name__ == "__main__":
    main()
