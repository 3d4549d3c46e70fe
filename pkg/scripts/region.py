"""Analytic locality boundaries of the state family on a fine mu grid (CSV)."""
import sys

from lhscert.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "region.csv"
    sys.exit(main(["region", "--mu-step", "0.005", "--out", out]))
