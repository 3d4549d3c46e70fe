"""Inner/outer critical-radius bounds of two-qubit Werner states for every built-in polytope."""
from lhscert.bloch import POLYTOPE_NAMES, inradius, make_polytope
from lhscert.radius import critical_radius
from lhscert.states import werner


def main():
    print("polytope,n_vertices,inradius,mu,lower,upper,exact,rel_gap")
    for name in POLYTOPE_NAMES:
        p = make_polytope(name)
        for mu in (0.6, 0.8, 1.0):
            res = critical_radius(werner(mu), name)
            exact = 1 / (2 * mu)
            print(f"{name},{len(p.vertices)},{inradius(p):.5f},{mu},{res.lower:.5f},{res.upper:.5f},"
                  f"{exact:.5f},{(res.upper - res.lower) / exact:.4f}")


if __name__ == "__main__":
    main()
