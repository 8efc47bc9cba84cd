"""Sweep Rokhlin castle parameters for odometers and report exact bounds.

Usage: python scripts/castle_scaling.py [--shift K] [--max-n 5]
"""

import argparse
import time
from fractions import Fraction

from cantordyn.space import DYADIC
from cantordyn.measure import Mixture, ProductMeasure
from cantordyn.homeo import Odometer
from cantordyn.synth import rokhlin_castle


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--shift", type=int, default=1)
    ap.add_argument("--max-n", type=int, default=5)
    args = ap.parse_args()

    T = Odometer(DYADIC, args.shift)
    uni = ProductMeasure.uniform(DYADIC)
    skew = ProductMeasure.make(DYADIC, [], [(Fraction(1, 3), Fraction(2, 3))])
    mix = Mixture.make(DYADIC, [(Fraction(1, 2), uni), (Fraction(1, 2), skew)])

    print(f"target: odometer shift {args.shift} on the dyadic group")
    print(f"{'n':>3} {'eps':>6} {'measures':>9} {'towers':>7} "
          f"{'heights':>14} {'min bound':>12} {'sec':>7}")
    for n in range(2, args.max_n + 1):
        for eps in (Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)):
            for name, ms in (("uniform", [uni]), ("uni+mix", [uni, mix])):
                t0 = time.monotonic()
                c = rokhlin_castle(T, n, ms, eps)
                dt = time.monotonic() - t0
                hs = sorted({h for _, h, _ in c.towers})
                print(f"{n:>3} {str(eps):>6} {name:>9} {len(c.towers):>7} "
                      f"{str(hs):>14} {str(min(c.bound)):>12} {dt:>7.3f}")


if __name__ == "__main__":
    main()
