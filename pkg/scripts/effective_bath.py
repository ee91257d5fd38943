"""Low-frequency slope of the effective spin bath versus bath size.

Prints the ratio of the reconstructed slope to alpha_eff/2 for several N.

    python scripts/effective_bath.py --g 0.3 0.5 --n 100 200 400 800
"""
import argparse

from oqrm.bath import BathParams, discretize_star, low_frequency_slope, normal_modes


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--g", type=float, nargs="+", default=[0.3, 0.5])
    p.add_argument("--n", type=int, nargs="+", default=[200, 400, 800])
    p.add_argument("--omega-0", type=float, default=0.75)
    p.add_argument("--omega-max", type=float, default=0.1)
    args = p.parse_args()

    print(f"{'g':>6} {'N':>6} {'alpha_eff':>10} {'slope':>10} {'ratio':>8}")
    for g in args.g:
        for n in args.n:
            eff = normal_modes(args.omega_0, g, discretize_star(BathParams(0.2, 10.0, n)))
            slope = low_frequency_slope(eff, args.omega_max)
            print(f"{g:6.3f} {n:6d} {eff.alpha_eff:10.5f} {slope:10.5f} {slope / (eff.alpha_eff / 2):8.4f}")


if __name__ == "__main__":
    main()
