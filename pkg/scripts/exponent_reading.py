"""Compares both readings of the local factor H_p with the truncated diagonal ratio.

    python3 scripts/exponent_reading.py
"""

import numpy as np

from lfmoments.hecke import delta_coefficients
from lfmoments.special import euler_H


def main():
    coeffs = delta_coefficients(200_000)
    lam = coeffs.lam
    for s in (2.0, 2.0 + 0.5j, 3.0):
        for a in (2, 3, 4, 5):
            n = np.arange(1, 100_000 // a + 1)
            w = n.astype(float) ** (-s)
            ratio = np.sum(lam[a * n] * lam[n] * w) / np.sum(lam[n] ** 2 * w)
            cells = []
            for norm in ("rankin_selberg", "zeta_sym2"):
                for reading in ("standard", "literal"):
                    try:
                        h = euler_H(s, 1, a, 1, coeffs, normalization=norm, reading=reading).product
                        cells.append(f"{norm}/{reading}: {abs(h - ratio):.1e}")
                    except ValueError:
                        cells.append(f"{norm}/{reading}: undefined")
            print(f"s={s} a={a}  " + "  ".join(cells))


if __name__ == "__main__":
    main()
