"""Checks the diagonal main term against its two-term parent formula.

Along s1 = 1/2 + d/2 + it, s2 = 1/2 + d/2 - it the two-term main term must
approach the diagonal limit as d -> 0.  Both derivative interpretations are
printed so the gap shows which one is the actual limit.

    python3 scripts/diagonal_check.py --q 101 --t 0.1
"""

import argparse

from lfmoments.hecke import delta_coefficients
from lfmoments.moments import MainTermEvaluator, MomentTask, main_term_diagonal_limit, main_term_theorem
from lfmoments.special import NORMALIZATIONS


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--q", type=int, default=101)
    parser.add_argument("--t", type=float, default=0.1)
    parser.add_argument("--twists", default="1:1,2:1,3:2")
    args = parser.parse_args()
    coeffs = delta_coefficients(200_000)
    for norm in NORMALIZATIONS:
        specials = MainTermEvaluator(coeffs, norm)
        for pair in args.twists.split(","):
            a, b = (int(v) for v in pair.split(":"))
            limits = {i: main_term_diagonal_limit(args.q, args.t, a, b, specials, i) for i in ("log", "raw")}
            for d in (1e-2, 1e-3, 1e-4):
                task = MomentTask(args.q, a, b, complex(0.5 + d / 2, args.t), complex(0.5 + d / 2, -args.t))
                near = main_term_theorem(task, specials).total
                gaps = "  ".join(f"{i}: {abs(near - v) / abs(v):.2e}" for i, v in limits.items())
                print(f"{norm:15s} (a,b)=({a},{b}) d={d:.0e}  two-term={near.real:10.4f}  relative gap  {gaps}")


if __name__ == "__main__":
    main()
