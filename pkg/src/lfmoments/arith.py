"""Sieves and multiplicative-function tables."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class MultiplicativeTables:
    """Dense tables of arithmetic functions on ``0..limit`` (index 0 unused).

    Attributes:
        limit: largest tabulated integer.
        primes: ascending primes up to ``limit``.
        mobius, totient, divisor_count, omega: the usual functions.
        spf: smallest prime factor (``spf[1] == 1``).
    """

    limit: int
    primes: np.ndarray
    mobius: np.ndarray
    totient: np.ndarray
    divisor_count: np.ndarray
    omega: np.ndarray
    spf: np.ndarray

    def factorize(self, n: int) -> list[tuple[int, int]]:
        """Prime factorization of ``n <= limit`` as ``[(p, e), ...]``."""
        if not 1 <= n <= self.limit:
            raise ValueError(f"n={n} outside table range 1..{self.limit}")
        out = []
        while n > 1:
            p = int(self.spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out

    def divisors(self, n: int) -> list[int]:
        divs = [1]
        for p, e in self.factorize(n):
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)


def build_tables(limit: int) -> MultiplicativeTables:
    """Linear (Euler) sieve filling mu, phi, d, omega and spf in one pass."""
    if limit < 2:
        raise ValueError(f"limit must be at least 2, got {limit}")
    n1 = limit + 1
    spf = [0] * n1
    mu = [0] * n1
    phi = [0] * n1
    d = [0] * n1
    om = [0] * n1
    # exponent of the smallest prime, needed to update d(n) multiplicatively
    spf_exp = [0] * n1
    primes: list[int] = []
    spf[1], mu[1], phi[1], d[1] = 1, 1, 1, 1
    for i in range(2, n1):
        if spf[i] == 0:
            spf[i] = i
            primes.append(i)
            mu[i] = -1
            phi[i] = i - 1
            d[i] = 2
            om[i] = 1
            spf_exp[i] = 1
        si = spf[i]
        for p in primes:
            m = i * p
            if p > si or m > limit:
                break
            spf[m] = p
            if p == si:
                mu[m] = 0
                phi[m] = phi[i] * p
                spf_exp[m] = spf_exp[i] + 1
                d[m] = d[i] // (spf_exp[i] + 1) * (spf_exp[i] + 2)
                om[m] = om[i]
            else:
                mu[m] = -mu[i]
                phi[m] = phi[i] * (p - 1)
                spf_exp[m] = 1
                d[m] = d[i] * 2
                om[m] = om[i] + 1
    return MultiplicativeTables(
        limit=limit,
        primes=np.array(primes, dtype=np.int64),
        mobius=np.array(mu, dtype=np.int8),
        totient=np.array(phi, dtype=np.int64),
        divisor_count=np.array(d, dtype=np.int64),
        omega=np.array(om, dtype=np.int64),
        spf=np.array(spf, dtype=np.int64),
    )


@lru_cache(maxsize=4)
def cached_tables(limit: int) -> MultiplicativeTables:
    return build_tables(limit)


def primitive_character_count(q: int, tables: MultiplicativeTables) -> int:
    """Number of primitive characters mod q: sum over c | q of mu(q/c) phi(c)."""
    if q < 1 or q > tables.limit:
        raise ValueError(f"q={q} must lie in 1..{tables.limit}")
    return int(sum(int(tables.mobius[q // c]) * int(tables.totient[c]) for c in tables.divisors(q)))


def factorize(n: int) -> list[tuple[int, int]]:
    """Trial-division factorization for integers outside any table."""
    if n < 1:
        raise ValueError("n must be positive")
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == [(n, 1)]


def divisor_power_bound(r: int, delta: float) -> float:
    """Constant C with d_r(n) <= C n^delta for every n >= 1.

    d_r is the r-fold divisor function, d_r(p^k) = binom(k + r - 1, r - 1).
    C is the product over primes of max_k d_r(p^k) p^{-k delta}; only primes
    with r > p^delta contribute a factor above 1.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    const = 1.0
    p = 2
    while r > p**delta:
        if is_prime(p):
            best, k = 1.0, 1
            while True:
                val = math.comb(k + r - 1, r - 1) / p ** (k * delta)
                if val < best and k > 1 and val < 1:
                    break
                best = max(best, val)
                k += 1
            const *= best
        p += 1
    return const
