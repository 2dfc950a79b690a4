"""Normalized Hecke eigenvalues of a level-1 cusp form.

The default form is Delta (weight 12), whose raw coefficients tau(n) come
from the exact expansion q * prod (1 - q^m)^24.  Series multiplication is
done by Kronecker substitution on GMP integers, so no coefficient is ever
rounded before normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import gmpy2
import numpy as np

from .arith import factorize
from .errors import CapabilityError

# slot width for Kronecker packing; |tau(n)| <= d(n) n^{11/2} < 2^126 for n < 10^7
_SLOT_BITS = 128


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """lam[n] = lambda_f(n) for 1 <= n <= limit (lam[0] is unused and zero)."""

    kappa: int
    limit: int
    lam: np.ndarray
    raw: list[int] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kappa % 2:
            raise ValueError(f"weight must be even, got {self.kappa}")

    def prime_power(self, p: int, j: int) -> float:
        """lambda_f(p^j) by the Hecke recursion from lambda_f(p)."""
        if p > self.limit:
            raise CapabilityError(f"lambda_f({p}) unavailable: table limit {self.limit}", required=p)
        if p**j <= self.limit:
            return float(self.lam[p**j])
        prev, cur = 1.0, float(self.lam[p])
        for _ in range(j - 1):
            prev, cur = cur, float(self.lam[p]) * cur - prev
        return cur if j >= 1 else 1.0


def pentagonal_series(length: int) -> np.ndarray:
    """Coefficients of prod_{m>=1} (1 - q^m) up to degree ``length - 1``."""
    c = np.zeros(length, dtype=np.int64)
    c[0] = 1
    k = 1
    while True:
        sign = -1 if k % 2 else 1
        g1 = k * (3 * k - 1) // 2
        if g1 >= length:
            break
        c[g1] += sign
        g2 = k * (3 * k + 1) // 2
        if g2 < length:
            c[g2] += sign
        k += 1
    return c


def _offset_int(length: int) -> gmpy2.mpz:
    words = np.zeros((length, 2), dtype=np.uint64)
    words[:, 1] = np.uint64(1 << 63)
    return gmpy2.mpz(int.from_bytes(words.tobytes(), "little"))


def _pack_unit_series(c: np.ndarray, offset: gmpy2.mpz) -> gmpy2.mpz:
    # c has entries in {-1, 0, 1}; store c + 2^127 per slot, then remove the offset
    lo = np.zeros(len(c), dtype=np.uint64)
    hi = np.full(len(c), np.uint64(1 << 63))
    lo[c > 0] = 1
    neg = c < 0
    lo[neg] = np.uint64(2**64 - 1)
    hi[neg] = np.uint64((1 << 63) - 1)
    words = np.stack([lo, hi], axis=1)
    return gmpy2.mpz(int.from_bytes(words.tobytes(), "little")) - offset


def _unpack(value: gmpy2.mpz, length: int, offset: gmpy2.mpz) -> list[int]:
    bits = _SLOT_BITS * length
    shifted = gmpy2.f_mod_2exp(value + offset, bits)
    words = np.frombuffer(int(shifted).to_bytes(bits // 8, "little"), dtype=np.uint64).reshape(length, 2)
    half = 1 << (_SLOT_BITS - 1)
    return [((int(h) << 64) | int(lo)) - half for lo, h in words.tolist()]


def eta24_coefficients(length: int) -> list[int]:
    """Exact coefficients of prod (1 - q^m)^24 up to degree ``length - 1``."""
    bits = _SLOT_BITS * length
    offset = _offset_int(length)
    base = _pack_unit_series(pentagonal_series(length), offset)

    def trunc(x):
        return gmpy2.f_mod_2exp(x, bits)

    p2 = trunc(base * base)
    p4 = trunc(p2 * p2)
    p8 = trunc(p4 * p4)
    p16 = trunc(p8 * p8)
    p24 = trunc(p16 * p8)
    return _unpack(p24, length, offset)


def build_delta_coefficients(limit: int) -> CoefficientTable:
    """Coefficients of Delta = q prod (1 - q^m)^24, normalized by n^{11/2}."""
    if limit < 1:
        raise ValueError("limit must be at least 1")
    if limit >= 10**7:
        raise ValueError("limit too large for 128-bit coefficient slots")
    series = eta24_coefficients(limit)
    raw = [0] + series  # raw[n] is the coefficient of q^n
    return CoefficientTable(kappa=12, limit=limit, lam=_normalize(raw, 12), raw=raw)


def _normalize(raw: list[int], kappa: int) -> np.ndarray:
    lam = np.zeros(len(raw))
    n = np.arange(1, len(raw), dtype=np.float64)
    lam[1:] = np.array([float(r) for r in raw[1:]]) / n ** ((kappa - 1) / 2)
    return lam


@lru_cache(maxsize=3)
def delta_coefficients(limit: int) -> CoefficientTable:
    """Memoized :func:`build_delta_coefficients`."""
    return build_delta_coefficients(limit)


def coefficient_at(table: CoefficientTable, n: int) -> float:
    """lambda_f(n), extended past the table by multiplicativity and the Hecke recursion."""
    if n < 1:
        raise ValueError("n must be positive")
    if n <= table.limit:
        return float(table.lam[n])
    value = 1.0
    for p, e in factorize(n):
        value *= table.prime_power(p, e)
    return value


def _divisor_count(n: int) -> int:
    return math.prod(e + 1 for _, e in factorize(n))


def load_coefficients(path: str | Path) -> CoefficientTable:
    """Read a coefficient file: header ``kappa K`` then lines ``n raw``.

    Every n from 1 to the largest listed index must be present.  Values are
    normalized by n^{(K-1)/2} and checked against the Deligne bound.
    """
    kappa = None
    entries: dict[int, int] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0].lower() == "kappa":
            kappa = int(parts[1])
            continue
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'n raw', got {line!r}")
        entries[int(parts[0])] = int(parts[1])
    if kappa is None:
        raise ValueError(f"{path}: missing 'kappa K' header")
    if not entries:
        raise ValueError(f"{path}: no coefficients")
    limit = max(entries)
    missing = [n for n in range(1, limit + 1) if n not in entries]
    if missing:
        raise ValueError(f"{path}: missing coefficients for n={missing[:5]}...")
    raw = [0] + [entries[n] for n in range(1, limit + 1)]
    lam = _normalize(raw, kappa)
    for n in range(1, limit + 1):
        if abs(lam[n]) > _divisor_count(n) * (1 + 1e-9):
            raise ValueError(f"{path}: coefficient at n={n} violates the Deligne bound")
    if abs(lam[1] - 1) > 1e-12:
        raise ValueError(f"{path}: form is not normalized (lambda(1) != 1)")
    return CoefficientTable(kappa=kappa, limit=limit, lam=lam, raw=raw)


def write_coefficients(table: CoefficientTable, path: str | Path) -> None:
    if table.raw is None:
        raise ValueError("table has no raw integer coefficients")
    lines = [f"kappa {table.kappa}"] + [f"{n} {table.raw[n]}" for n in range(1, table.limit + 1)]
    Path(path).write_text("\n".join(lines) + "\n")
