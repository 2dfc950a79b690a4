"""Mollifiers built from truncated exponentials of short prime sums.

For block lengths l_1 > l_2 > ... > l_R and prime blocks P_j,

    P_j(t, chi)     = sum_{p in P_j} lambda_f(p) chi(p) p^{-1/2-it}
    N_j(t, chi, a)  = E_{l_j}(a P_j(t, chi)),   E_l(x) = sum_{i <= l} x^i / i!
    Q_j(t, chi, k)  = (c_k P_j(t, chi) / l_j)^{r_k l_j}

and N = prod_j N_j.  Expanding N as a Dirichlet polynomial gives t-free
coefficients x_a with N(t, chi, a) = sum_a x_a a^{-1/2-it} chi(a).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .afe import LVALUE_DAMPING, twisted_l_values
from .arith import cached_tables
from .dirichlet import CharacterGroup
from .errors import CapabilityError
from .hecke import CoefficientTable

DEFAULT_SUPPORT_LIMIT = 200_000


def block_lengths(q: int, N: int, M: int) -> tuple[int, ...]:
    """l_1 = 2 ceil(N log log q), l_{j+1} = 2 ceil(N log l_j), kept while l_j > 10^M.

    When l_1 itself is at most 10^M the sequence is cut to (l_1,), the
    single-block shape used at small q.
    """
    if q < 16:
        raise ValueError(f"q={q} too small: need log log q > 0 comfortably (q >= 16)")
    if N < 1 or M < 1:
        raise ValueError("N and M must be at least 1")
    lengths = [2 * math.ceil(N * math.log(math.log(q)))]
    if lengths[0] <= 10**M:
        return tuple(lengths)
    while True:
        nxt = 2 * math.ceil(N * math.log(lengths[-1]))
        if nxt <= 10**M:
            break
        if nxt >= lengths[-1]:
            raise ValueError(f"block lengths stop decreasing at {lengths[-1]} (N={N} too large for M={M})")
        lengths.append(nxt)
    return tuple(lengths)


def exponent_r(k: float) -> int:
    """r_k: 2 for k >= 1, ceil(1 + 1/k) + 1 for 0 < k < 1."""
    if k <= 0:
        raise ValueError("k must be positive")
    if k >= 1:
        return 2
    return math.ceil(1 + 1 / k) + 1


def desk_max_prime(q: int, N: int = 1, M: int = 1) -> float:
    """q^{2 / l_1}: block cutoff whose exponentials have support at most q^2.

    At moderate q the thresholds q^{1/l_j^2} fall below 3 and every block is
    empty; this cutoff keeps the same q-power scaling with a usable exponent.
    """
    return q ** (2 / block_lengths(q, N, M)[0])


@dataclass(frozen=True)
class MollifierSpec:
    q: int
    N: int
    M: int
    k: float
    lengths: tuple[int, ...]
    thresholds: tuple[float, ...]
    blocks: tuple[tuple[int, ...], ...]
    c_k: float
    r_k: int
    degenerate: bool
    max_prime: int | None = None
    x: dict = field(default_factory=dict, repr=False, compare=False)
    y: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def R(self) -> int:
        return len(self.lengths)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for blk in self.blocks for p in blk)


def build_spec(
    q: int,
    N: int,
    M: int,
    k: float,
    coeffs: CoefficientTable | None = None,
    max_prime: int | None = None,
    support_limit: int = DEFAULT_SUPPORT_LIMIT,
) -> MollifierSpec:
    """Block lengths, prime blocks and (if ``coeffs`` is given) the tables x_a, y_b.

    Blocks are the odd primes in (T_{j-1}, T_j] with T_j = q^{1/l_j^2}.
    ``max_prime`` replaces the thresholds by T_j = max_prime^{(l_R / l_j)^2},
    which keeps the nesting of the blocks but lets them be non-empty at small q.
    """
    lengths = block_lengths(q, N, M)
    if max_prime is None:
        thresholds = tuple(q ** (1 / l**2) for l in lengths)
    else:
        thresholds = tuple(max_prime ** ((lengths[-1] / l) ** 2) for l in lengths)
    top = int(math.floor(thresholds[-1] + 1e-9))
    primes = [int(p) for p in cached_tables(max(top, 2)).primes if p % 2 == 1 and p <= top]
    blocks = []
    lo = 0.0
    for hi in thresholds:
        blocks.append(tuple(p for p in primes if lo < p <= hi + 1e-9))
        lo = hi + 1e-9
    spec = MollifierSpec(
        q=q,
        N=N,
        M=M,
        k=k,
        lengths=lengths,
        thresholds=thresholds,
        blocks=tuple(blocks),
        c_k=64 * max(1.0, k),
        r_k=exponent_r(k),
        degenerate=len(lengths) == 1 and lengths[0] <= 10**M,
        max_prime=max_prime,
    )
    if coeffs is not None:
        spec.x.update(coefficient_expansion(spec, k - 1, coeffs, support_limit))
        spec.y.update(coefficient_expansion(spec, k, coeffs, support_limit))
    return spec


def truncated_exponential(l: int, x: complex) -> complex:
    """E_l(x) by Horner's rule."""
    if l < 0:
        raise ValueError("l must be non-negative")
    acc = 1.0 + 0j
    for i in range(l, 0, -1):
        acc = 1 + acc * x / i
    return acc


def _block_values(spec: MollifierSpec, j: int, t: float, group: CharacterGroup, indices, coeffs) -> np.ndarray:
    blk = spec.blocks[j - 1]
    if not blk:
        return np.zeros(len(indices), dtype=complex)
    p = np.array(blk)
    weights = coeffs.lam[p] * np.exp(-complex(0.5, t) * np.log(p.astype(float)))
    vals = group.value_table(indices, p)
    return (vals * weights).sum(axis=1)


def block_polynomial(spec: MollifierSpec, j: int, t: float, chi, coeffs: CoefficientTable) -> complex:
    """P_j(t, chi) by direct summation over the block."""
    if not 1 <= j <= spec.R:
        raise ValueError(f"block index {j} outside 1..{spec.R}")
    return complex(_block_values(spec, j, t, chi.group, [chi.index], coeffs)[0])


def block_N(spec: MollifierSpec, j: int, t: float, chi, alpha: float, coeffs: CoefficientTable) -> complex:
    return truncated_exponential(spec.lengths[j - 1], alpha * block_polynomial(spec, j, t, chi, coeffs))


def log_block_Q(spec: MollifierSpec, value: complex, j: int) -> complex:
    """log Q_j for a given P_j value (-inf real part when P_j = 0)."""
    if spec.r_k * spec.lengths[j - 1] == 0:
        return 0j
    z = spec.c_k * value / spec.lengths[j - 1]
    if z == 0:
        return complex(-math.inf, 0)
    return spec.r_k * spec.lengths[j - 1] * cmath.log(z)


def block_Q(spec: MollifierSpec, j: int, t: float, chi, coeffs: CoefficientTable) -> complex:
    """Q_j(t, chi, k) evaluated as exp of its logarithm; Q_{R+1} = 1."""
    if j == spec.R + 1:
        return 1 + 0j
    lq = log_block_Q(spec, block_polynomial(spec, j, t, chi, coeffs), j)
    return 0j if lq.real == -math.inf else cmath.exp(lq)


def _block_expansion(primes, length, alpha, lam, budget, j) -> dict[int, float]:
    """Terms alpha^Omega(a) prod lambda_f(p)^e / e! over a with Omega(a) <= length."""
    out = {}

    def walk(i, a, x, omega):
        if i == len(primes):
            out[a] = x
            if len(out) > budget:
                raise CapabilityError(f"block {j} expansion exceeds {budget} terms", required=len(out))
            return
        p, lp = primes[i], float(lam[primes[i]])
        term = 1.0
        for e in range(length - omega + 1):
            if e:
                term *= alpha * lp / e
                a *= p
            walk(i + 1, a, x * term, omega + e)

    walk(0, 1, 1.0, 0)
    return out


def coefficient_expansion(
    spec: MollifierSpec, alpha: float, coeffs: CoefficientTable, support_limit: int = DEFAULT_SUPPORT_LIMIT
) -> dict[int, float]:
    """x_a with prod_j E_{l_j}(alpha P_j) = sum_a x_a a^{-1/2-it} chi(a).

    Within a block, (sum_p z_p)^i / i! expands over prime multisets as
    prod_p z_p^{e_p} / e_p!, so a = prod p^{e_p} with Omega(a) = i <= l_j
    carries alpha^i prod lambda_f(p)^{e_p} / e_p!.  Blocks use disjoint primes,
    so their tables multiply by Dirichlet convolution of coprime supports.
    """
    table = {1: 1.0}
    for j, blk in enumerate(spec.blocks, start=1):
        local = _block_expansion(blk, spec.lengths[j - 1], alpha, coeffs.lam, support_limit, j)
        if len(table) * len(local) > support_limit:
            raise CapabilityError(
                f"expansion through block {j} exceeds {support_limit} terms", required=len(table) * len(local)
            )
        table = {a * b: x * y for a, x in table.items() for b, y in local.items()}
    return dict(sorted(table.items()))


def dirichlet_polynomial(table: dict[int, float], t: float, chi) -> complex:
    """sum_a x_a a^{-1/2-it} chi(a)."""
    a = np.array(list(table), dtype=np.int64)
    x = np.array(list(table.values()))
    vals = chi.group.value_table([chi.index], a)[0]
    terms = x * vals * np.exp(-complex(0.5, t) * np.log(a.astype(float)))
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def _lambda_smooth(m: int, primes, coeffs: CoefficientTable) -> float:
    """lambda_f(m) for m factoring over ``primes``, via the Hecke recursion at each prime."""
    if m <= coeffs.limit:
        return float(coeffs.lam[m])
    out = 1.0
    for p in primes:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            lp, prev, cur = float(coeffs.lam[p]), 1.0, float(coeffs.lam[p])
            for _ in range(e - 1):
                prev, cur = cur, lp * cur - prev
            out *= cur
    if m != 1:
        raise ValueError("m does not factor over the mollifier primes")
    return out


def diagonal_prediction(spec: MollifierSpec, coeffs: CoefficientTable, phi_star: int) -> float:
    """phi*(q) sum_{(b,q)=1} (y_b / b) sum_{am = b} lambda_f(m) x_a; free of t."""
    total = []
    for b, yb in spec.y.items():
        if math.gcd(b, spec.q) != 1:
            continue
        inner = [x * _lambda_smooth(b // a, spec.primes, coeffs) for a, x in spec.x.items() if b % a == 0]
        total.append(yb / b * math.fsum(inner))
    return phi_star * math.fsum(total)


@dataclass(frozen=True)
class FirstMomentResult:
    q: int
    t: float
    k: float
    lhs: complex
    prediction: float
    relative_residual: float
    support_x: int
    support_y: int
    max_support: int
    max_abs_coefficient: float


def _products(spec, t, group, idx, coeffs):
    P = [_block_values(spec, j, t, group, idx, coeffs) for j in range(1, spec.R + 1)]
    return P


def _E(l: int, z: np.ndarray) -> np.ndarray:
    acc = np.ones_like(z)
    for i in range(l, 0, -1):
        acc = 1 + acc * z / i
    return acc


def mollified_first_moment(
    q: int,
    t: float,
    k: float,
    spec: MollifierSpec,
    group: CharacterGroup,
    coeffs: CoefficientTable,
    damping: float = LVALUE_DAMPING,
    threads: int = 1,
) -> FirstMomentResult:
    """sum* L(1/2+it) N(t, chi, k-1) N(-t, chi-bar, k) and its diagonal prediction."""
    if spec.q != q or group.q != q:
        raise ValueError("spec, group and q disagree")
    if not spec.x:
        spec.x.update(coefficient_expansion(spec, k - 1, coeffs))
        spec.y.update(coefficient_expansion(spec, k, coeffs))
    idx = list(group.primitive_index)
    L = twisted_l_values(complex(0.5, t), group, coeffs, idx, damping=damping, threads=threads).values
    P = _products(spec, t, group, idx, coeffs)
    n1 = np.ones(len(idx), dtype=complex)
    n2 = np.ones(len(idx), dtype=complex)
    for j, pj in enumerate(P):
        n1 *= _E(spec.lengths[j], (k - 1) * pj)
        # N(-t, chi-bar, k) is the conjugate of N(t, chi, k)
        n2 *= np.conj(_E(spec.lengths[j], k * pj))
    terms = L * n1 * n2
    lhs = complex(math.fsum(terms.real), math.fsum(terms.imag))
    pred = diagonal_prediction(spec, coeffs, len(idx))
    rel = abs(lhs - pred) / abs(pred) if pred else float("inf")
    coeff_max = max([abs(v) for v in spec.x.values()] + [abs(v) for v in spec.y.values()])
    return FirstMomentResult(
        q, t, k, lhs, pred, rel, len(spec.x), len(spec.y), max(max(spec.x), max(spec.y)), coeff_max
    )


@dataclass(frozen=True)
class SecondMomentTerms:
    q: int
    t: float
    k: float
    v: int
    with_L: float  # sum* |L|^2 prod_{j<=v} |N_j(k-1)|^2 |Q_{v+1}|^2
    without_L: float  # sum* prod_{j<=v} |N_j(k)|^2 |Q_{v+1}|^2
    product_form: float  # sum* prod_j (|N_j(k)|^2 + |Q_j|^2)
    mollified_square: float  # sum* |L N(k-1)|^2
    normalized_with_L: float  # with_L / (phi* (log q)^{k^2})


def mollified_second_moment_terms(
    q: int,
    t: float,
    k: float,
    v: int,
    spec: MollifierSpec,
    group: CharacterGroup,
    coeffs: CoefficientTable,
    damping: float = LVALUE_DAMPING,
    threads: int = 1,
) -> SecondMomentTerms:
    """Constituent character sums of the mollified second-moment bounds."""
    if not 0 <= v <= spec.R:
        raise ValueError(f"v must lie in 0..{spec.R}")
    idx = list(group.primitive_index)
    L = twisted_l_values(complex(0.5, t), group, coeffs, idx, damping=damping, threads=threads).values
    P = _products(spec, t, group, idx, coeffs)
    L2 = np.abs(L) ** 2

    def logQ(j):  # log |Q_j|^2 for j = 1..R+1
        if j == spec.R + 1:
            return np.zeros(len(idx))
        expo = spec.r_k * spec.lengths[j - 1]
        with np.errstate(divide="ignore"):
            return 2 * expo * np.log(np.abs(spec.c_k * P[j - 1] / spec.lengths[j - 1]))

    def prod_N(alpha, upto):
        out = np.ones(len(idx))
        for j in range(upto):
            out *= np.abs(_E(spec.lengths[j], alpha * P[j])) ** 2
        return out

    q_part = np.exp(logQ(v + 1))
    with_L = math.fsum(L2 * prod_N(k - 1, v) * q_part)
    without_L = math.fsum(prod_N(k, v) * q_part)
    pf = np.ones(len(idx))
    for j in range(spec.R):
        pf *= np.abs(_E(spec.lengths[j], k * P[j])) ** 2 + np.exp(logQ(j + 1))
    product_form = math.fsum(pf)
    msq = math.fsum(L2 * prod_N(k - 1, spec.R))
    norm = with_L / (len(idx) * math.log(q) ** (k * k))
    return SecondMomentTerms(q, t, k, v, with_L, without_L, product_form, msq, norm)
