"""Second-moment scan over primes: brute force against the main terms.

Writes one CSV per (normalization, a, b) with every MomentReport field, and
prints which derivative interpretation wins at each q.

    python3 scripts/moment_scan.py --primes 101,211,401,809 --out results/
"""

import argparse
import dataclasses
from pathlib import Path

from lfmoments.cli import rows_to_csv
from lfmoments.hecke import delta_coefficients
from lfmoments.moments import MainTermEvaluator, MomentReport, moment_scan
from lfmoments.special import NORMALIZATIONS


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--primes", default="101,211,401,809")
    parser.add_argument("--twists", default="1:1,2:1,3:2", help="comma-separated a:b pairs")
    parser.add_argument("--t", type=float, default=0.0)
    parser.add_argument("--threads", type=int, default=4)
    parser.add_argument("--limit", type=int, default=200_000)
    parser.add_argument("--out", default="results")
    args = parser.parse_args()

    primes = [int(q) for q in args.primes.split(",")]
    twists = [tuple(int(v) for v in pair.split(":")) for pair in args.twists.split(",")]
    coeffs = delta_coefficients(args.limit)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fields = [f.name for f in dataclasses.fields(MomentReport)]
    for norm in NORMALIZATIONS:
        specials = MainTermEvaluator(coeffs, norm)
        for a, b in twists:
            entries = moment_scan(primes, args.t, a, b, coeffs, specials, threads=args.threads)
            rows = []
            for e in entries:
                row = {f: getattr(e.report, f) for f in fields} if e.report else {"q": e.q}
                row["status"] = e.status
                rows.append(row)
                if e.report:
                    r = e.report
                    win = r.interpretation if r.relative_residual <= r.alt_relative_residual else r.alt_interpretation
                    print(
                        f"{norm:15s} (a,b)=({a},{b}) q={e.q:4d} lhs={r.lhs.real:10.3f} main={r.main_sum.real:10.3f} "
                        f"rel={r.relative_residual:.4f} alt={r.alt_relative_residual:.4f} winner={win}"
                    )
                else:
                    print(f"{norm:15s} (a,b)=({a},{b}) q={e.q:4d} {e.status}")
            path = out / f"moment_scan_{norm}_{a}_{b}.csv"
            path.write_text(rows_to_csv(fields, rows))


if __name__ == "__main__":
    main()
