"""Normalized 2k-th moments sum |L(1/2+it)|^{2k} / (phi*(q) (log q)^{k^2}) over primes.

    python3 scripts/kmoment_scan.py --ks 0,0.5,1 --ts 0,0.3
"""

import argparse

from lfmoments.dirichlet import build_group
from lfmoments.hecke import delta_coefficients
from lfmoments.moments import kth_moment_sum


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--primes", default="101,211,401,809")
    parser.add_argument("--ks", default="0,0.5,1")
    parser.add_argument("--ts", default="0,0.3")
    parser.add_argument("--threads", type=int, default=4)
    args = parser.parse_args()
    coeffs = delta_coefficients(200_000)
    ks = [float(k) for k in args.ks.split(",")]
    ts = [float(t) for t in args.ts.split(",")]
    table = {}
    for q in (int(v) for v in args.primes.split(",")):
        group = build_group(q)
        for t in ts:
            for k in ks:
                res = kth_moment_sum(q, t, k, group, coeffs, threads=args.threads)
                table.setdefault((k, t), []).append(res.normalized)
                print(f"q={q:4d} t={t:.2f} k={k:.2f} sum={res.value:14.4f} normalized={res.normalized:.4f}")
    for (k, t), vals in sorted(table.items()):
        print(f"k={k:.2f} t={t:.2f} band max/min = {max(vals) / min(vals):.3f}")


if __name__ == "__main__":
    main()
