"""Mollified first moment against its diagonal prediction for several block cutoffs.

The default cutoff is q^{2/l_1}; fixed cutoffs show how much the residual
depends on the choice.

    python3 scripts/mollifier_scan.py --primes 101,211,401 --cutoffs desk,7,11,13,17
"""

import argparse

from lfmoments.dirichlet import build_group
from lfmoments.hecke import delta_coefficients
from lfmoments.mollifier import build_spec, desk_max_prime, mollified_first_moment, mollified_second_moment_terms


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--primes", default="101,211,401")
    parser.add_argument("--cutoffs", default="desk,7,11,13,17")
    parser.add_argument("--k", type=float, default=0.5)
    parser.add_argument("--ts", default="0,0.3")
    parser.add_argument("--threads", type=int, default=4)
    args = parser.parse_args()
    coeffs = delta_coefficients(200_000)
    for cut in args.cutoffs.split(","):
        for q in (int(v) for v in args.primes.split(",")):
            group = build_group(q)
            max_prime = desk_max_prime(q) if cut == "desk" else float(cut)
            spec = build_spec(q, 1, 1, args.k, coeffs, max_prime=max_prime)
            for t in (float(v) for v in args.ts.split(",")):
                r = mollified_first_moment(q, t, args.k, spec, group, coeffs, threads=args.threads)
                sq = mollified_second_moment_terms(q, t, args.k, spec.R, spec, group, coeffs, threads=args.threads)
                print(
                    f"cutoff={cut:>5s} q={q:4d} t={t:.1f} primes={spec.primes} support={r.support_y:5d} "
                    f"lhs={r.lhs.real:9.3f} prediction={r.prediction:9.3f} rel={r.relative_residual:.4f} "
                    f"normalized |LN|^2={sq.mollified_square / len(group.primitive_index):.4f}"
                )


if __name__ == "__main__":
    main()
