"""Smoothed approximate functional equations for L(s, f x chi).

With g = (kappa - 1)/2 and the completed function
Lambda(s, f x chi) = (q / 2 pi)^s Gamma(g + s) L(s, f x chi) = iota_chi Lambda(1 - s, f x chi-bar),
shifting a damped Mellin integral across u = 0 gives, for every X > 0,

    L(s, f x chi) = sum_n lambda(n) chi(n) n^{-s} V_s(n / (q X))
                  + iota_chi (q / 2 pi)^{1 - 2s} Gamma(g + 1 - s) / Gamma(g + s)
                    * sum_n lambda(n) chi-bar(n) n^{s - 1} V_{1-s}(n X / q),

    V_s(y) = (1 / 2 pi i) int_{(c)} Gamma(g + s + u) / Gamma(g + s) G(u) (2 pi y)^{-u} du / u.

At s = 1/2 + it the shift g + s equals kappa/2 + it, so V_s is the usual W_t.
The damper is G(u) = exp(a u^2); a = 1 is the classical choice, smaller a
shortens the sums (see ``LVALUE_DAMPING``).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from .contour import MellinKernel, truncation_length
from .dirichlet import Character, CharacterGroup, GaussData, gauss_root_data
from .errors import CapabilityError
from .hecke import CoefficientTable
from .special import log_gamma

# damping used by every L-value pipeline; with a = 1 certified sums at
# q ~ 10^3 run past 10^7 terms, with a = 1/8 they stop near 100 q
LVALUE_DAMPING = 0.125
DEFAULT_TOL = 1e-10
CHARACTER_CHUNK = 64


def _ratio_log(shifts: tuple[complex, ...]):
    base = sum(log_gamma(z) for z in shifts)

    def log_ratio(u):
        u = np.asarray(u, dtype=complex)
        return sum(log_gamma(z + u) for z in shifts) - base

    return log_ratio


@lru_cache(maxsize=256)
def mellin_kernel(
    shifts: tuple[complex, ...], scale: float, damping: float, abscissa: float = 2.0, step: float = 1.0 / 16
) -> MellinKernel:
    """Kernel for prod_i Gamma(z_i + u)/Gamma(z_i) exp(a u^2) (scale y)^{-u} du/u."""
    left = min(abscissa, 0.5 * min(z.real for z in shifts))
    return MellinKernel(
        log_ratio=_ratio_log(shifts),
        scale=scale,
        damping=damping,
        abscissa=abscissa,
        left_abscissa=left if left > 0.05 else None,
        step=step,
    )


@dataclass
class WeightEvaluator:
    """W_t (kind "single") or the pair weight W_{s1,s2} (kind "pair").

    The single weight is built from Gamma(kappa/2 + it + u)/Gamma(kappa/2 + it)
    with (2 pi x)^{-u}; the pair weight from the product of the two ratios at
    g + s1, g + s2 with (2 pi)^{-2u} x^{-u}.
    """

    kind: str
    params: tuple
    kappa: int = 12
    contour_abscissa: float = 2.0
    quadrature_step: float = 1.0 / 16
    damping: float = 1.0
    truncation_height: float = field(init=False)

    def __post_init__(self):
        g = (self.kappa - 1) / 2
        if self.kind == "single":
            (t,) = self.params
            shifts, scale = (complex(self.kappa / 2, t),), 2 * math.pi
        elif self.kind == "pair":
            s1, s2 = (complex(z) for z in self.params)
            shifts, scale = (g + s1, g + s2), (2 * math.pi) ** 2
        else:
            raise ValueError(f"kind must be 'single' or 'pair', got {self.kind!r}")
        self.kernel = mellin_kernel(shifts, scale, self.damping, self.contour_abscissa, self.quadrature_step)
        self.truncation_height = self.kernel.height(self.contour_abscissa)

    @classmethod
    def single(cls, t: float, **kwargs) -> "WeightEvaluator":
        return cls("single", (float(t),), **kwargs)

    @classmethod
    def pair(cls, s1: complex, s2: complex, **kwargs) -> "WeightEvaluator":
        return cls("pair", (complex(s1), complex(s2)), **kwargs)

    def __call__(self, x) -> tuple[np.ndarray, float]:
        """Weight values and the step-halving certificate."""
        return self.kernel.evaluate(x)


def weight_single(t: float, x: float, evaluator: WeightEvaluator | None = None) -> complex:
    ev = evaluator or WeightEvaluator.single(t)
    if ev.kind != "single" or ev.params[0] != float(t):
        raise ValueError("evaluator does not match the requested weight")
    if x <= 0:
        raise ValueError("x must be positive")
    return complex(ev(x)[0][0])


def weight_pair(s1: complex, s2: complex, x: float, evaluator: WeightEvaluator | None = None) -> complex:
    ev = evaluator or WeightEvaluator.pair(s1, s2)
    if ev.kind != "pair" or ev.params != (complex(s1), complex(s2)):
        raise ValueError("evaluator does not match the requested weight")
    if x <= 0:
        raise ValueError("x must be positive")
    return complex(ev(x)[0][0])


@dataclass(frozen=True)
class LValueResult:
    s: complex
    character: int
    value: complex
    balance: float
    lengths: tuple[int, int]
    truncation_error: float
    quadrature_error: float


@dataclass(frozen=True)
class LValueBatch:
    """L(s, f x chi) for a list of characters of one group."""

    s: complex
    q: int
    indices: tuple[int, ...]
    values: np.ndarray
    balance: float
    lengths: tuple[int, int]
    truncation_error: float
    quadrature_error: float

    def result(self, position: int) -> LValueResult:
        return LValueResult(
            self.s,
            self.indices[position],
            complex(self.values[position]),
            self.balance,
            self.lengths,
            self.truncation_error,
            self.quadrature_error,
        )

    def by_index(self) -> dict[int, complex]:
        return {i: complex(v) for i, v in zip(self.indices, self.values)}


def _chunks(seq, size):
    return [seq[i : i + size] for i in range(0, len(seq), size)]


def parallel_map(func, items, threads: int = 1):
    """Ordered map; results never depend on the thread count."""
    if threads <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def _fsum(z: np.ndarray) -> complex:
    return complex(math.fsum(z.real), math.fsum(z.imag))


def gauss_sums(group: CharacterGroup, indices, threads: int = 1) -> np.ndarray:
    """tau(chi) for many characters, with exact integer angles per term."""
    q, E = group.q, group.exponent
    if q == 1:
        return np.ones(len(indices), dtype=complex)
    h = np.arange(q)

    def run(chunk):
        ang = group.angle_table(chunk)
        num = (ang * q + h * E) % (E * q)
        terms = np.exp(2j * np.pi * num / (E * q))
        terms[ang < 0] = 0
        return np.array([_fsum(row) for row in terms])

    parts = parallel_map(run, _chunks(list(indices), CHARACTER_CHUNK), threads)
    return np.concatenate(parts) if parts else np.zeros(0, dtype=complex)


def root_numbers(group: CharacterGroup, indices, kappa: int, threads: int = 1) -> np.ndarray:
    tau = gauss_sums(group, indices, threads)
    return (1j**kappa) * tau * tau / group.q


def _residue_buckets(n: np.ndarray, terms: np.ndarray, q: int) -> np.ndarray:
    # bincount sums each class in index order, so buckets are reproducible
    h = n % q
    return np.bincount(h, weights=terms.real, minlength=q) + 1j * np.bincount(h, weights=terms.imag, minlength=q)


def _character_sums(group: CharacterGroup, indices, buckets: np.ndarray, conjugate: bool, threads: int):
    E = group.exponent

    def run(chunk):
        ang = group.angle_table(chunk)
        if conjugate:
            ang = np.where(ang < 0, -1, (-ang) % E)
        vals = group.roots[np.where(ang < 0, 0, ang)]
        vals[ang < 0] = 0
        return (vals * buckets).sum(axis=1)

    parts = parallel_map(run, _chunks(list(indices), CHARACTER_CHUNK), threads)
    return np.concatenate(parts) if parts else np.zeros(0, dtype=complex)


FAST_GRID_DENSITY = 64


def grid_weights(kernel: MellinKernel, y: np.ndarray, density: int = FAST_GRID_DENSITY) -> tuple[np.ndarray, float]:
    """Kernel values by monotone cubic interpolation on a geometric grid in y.

    The returned error is the quadrature certificate plus the largest
    interpolation error observed at the grid midpoints.
    """
    logy = np.log(y)
    lo, hi = float(logy.min()), float(logy.max())
    count = max(4, math.ceil((hi - lo) * density) + 2)
    grid = np.linspace(lo, hi, count)
    vals, qerr = kernel.evaluate(np.exp(grid))
    mid = 0.5 * (grid[:-1] + grid[1:])
    exact, qmid = kernel.evaluate(np.exp(mid))
    re, im = PchipInterpolator(grid, vals.real), PchipInterpolator(grid, vals.imag)
    ierr = float(np.max(np.abs(re(mid) + 1j * im(mid) - exact)))
    return re(logy) + 1j * im(logy), max(qerr, qmid) + ierr


def _single_kernel(shift: complex, damping: float, step: float) -> MellinKernel:
    return mellin_kernel((shift,), 2 * math.pi, damping, 2.0, step)


def afe_lengths(
    s: complex,
    q: int,
    kappa: int,
    balance: float = 1.0,
    damping: float = LVALUE_DAMPING,
    step: float = 1.0 / 16,
    tol: float = DEFAULT_TOL,
) -> tuple[int, int, float]:
    """Certified lengths of both sums and their combined tail bound."""
    g = (kappa - 1) / 2
    s = complex(s)
    k1 = _single_kernel(g + s, damping, step)
    k2 = _single_kernel(g + 1 - s, damping, step)
    dual = abs(_dual_factor(s, q, kappa))
    n1, e1 = truncation_length(k1, s.real, 1 / (q * balance), tol / 2, divisor_order=2)
    n2, e2 = truncation_length(k2, 1 - s.real, balance / q, tol / (2 * max(dual, 1e-300)), divisor_order=2)
    return n1, n2, e1 + dual * e2


def _dual_factor(s: complex, q: int, kappa: int) -> complex:
    g = (kappa - 1) / 2
    return complex(
        np.exp((1 - 2 * s) * math.log(q / (2 * math.pi)) + log_gamma(g + 1 - s) - log_gamma(g + s))
    )


def twisted_l_values(
    s: complex,
    group: CharacterGroup,
    coeffs: CoefficientTable,
    indices=None,
    balance: float = 1.0,
    iotas: np.ndarray | None = None,
    damping: float = LVALUE_DAMPING,
    step: float = 1.0 / 16,
    tol: float = DEFAULT_TOL,
    threads: int = 1,
    fast_weights: bool = False,
) -> LValueBatch:
    """L(s, f x chi) for primitive characters of ``group`` (default: all of them).

    Both AFE sums are first collapsed into residue classes mod q, then each
    character contributes one length-q inner product, so the cost is
    O(N + q |indices|) rather than O(N |indices|).  ``fast_weights`` replaces
    exact per-term weights by :func:`grid_weights`, whose measured error enters
    the quadrature certificate.
    """
    q = group.q
    s = complex(s)
    if indices is None:
        indices = list(group.primitive_index)
    indices = list(indices)
    for i in indices:
        if group.characters[i].conductor != q:
            raise ValueError(f"character {i} mod {q} is not primitive")
    g = (coeffs.kappa - 1) / 2
    n1, n2, trunc = afe_lengths(s, q, coeffs.kappa, balance, damping, step, tol)
    need = max(n1, n2)
    if need > coeffs.limit:
        raise CapabilityError(f"L({s}, f x chi) mod {q} needs {need} coefficients, table has {coeffs.limit}", required=need)
    k1 = _single_kernel(g + s, damping, step)
    k2 = _single_kernel(g + 1 - s, damping, step)

    def weights(kernel, y):
        if fast_weights:
            return grid_weights(kernel, y)
        parts = parallel_map(lambda ys: kernel.evaluate(ys), _chunks(y, 8192), threads)
        vals = np.concatenate([p[0] for p in parts])
        return vals, max(p[1] for p in parts)

    n = np.arange(1, need + 1)
    logn = np.log(n.astype(float))
    lam = coeffs.lam[1 : need + 1]
    w1, qe1 = weights(k1, n[:n1] / (q * balance))
    w2, qe2 = weights(k2, n[:n2] * balance / q)
    a1 = lam[:n1] * np.exp(-s * logn[:n1])
    a2 = lam[:n2] * np.exp((s - 1) * logn[:n2])
    b1 = _residue_buckets(n[:n1], a1 * w1, q)
    b2 = _residue_buckets(n[:n2], a2 * w2, q)
    first = _character_sums(group, indices, b1, conjugate=False, threads=threads)
    second = _character_sums(group, indices, b2, conjugate=True, threads=threads)
    if iotas is None:
        iotas = root_numbers(group, indices, coeffs.kappa, threads)
    dual = _dual_factor(s, q, coeffs.kappa)
    values = first + iotas * dual * second
    quad = qe1 * float(np.abs(a1).sum()) + abs(dual) * qe2 * float(np.abs(a2).sum())
    return LValueBatch(s, q, tuple(indices), values, balance, (n1, n2), float(trunc), float(quad))


def l_value(
    s: complex,
    chi: Character,
    X: float,
    coeffs: CoefficientTable,
    gauss: GaussData | None = None,
    **kwargs,
) -> LValueResult:
    """L(s, f x chi) for one primitive character, with truncation and quadrature certificates."""
    if not chi.is_primitive:
        raise ValueError(f"character {chi.index} mod {chi.q} is not primitive (conductor {chi.conductor})")
    gauss = gauss or gauss_root_data(chi, coeffs.kappa)
    batch = twisted_l_values(
        s, chi.group, coeffs, [chi.index], balance=X, iotas=np.array([gauss.root_number]), **kwargs
    )
    return batch.result(0)


def _pair_dual_factor(s1: complex, s2: complex, q: int, kappa: int) -> complex:
    g = (kappa - 1) / 2
    return complex(
        np.exp(
            2 * (1 - s1 - s2) * math.log(q / (2 * math.pi))
            + log_gamma(g + 1 - s1)
            + log_gamma(g + 1 - s2)
            - log_gamma(g + s1)
            - log_gamma(g + s2)
        )
    )


def _convolve(x: np.ndarray, y: np.ndarray, limit: int) -> np.ndarray:
    """c[N] = sum_{mn = N} x[m] y[n] for N <= limit (index 0 unused)."""
    out = np.zeros(limit + 1, dtype=complex)
    for m in range(1, limit + 1):
        if x[m] == 0:
            continue
        top = limit // m
        out[m : m * top + 1 : m] += x[m] * y[1 : top + 1]
    return out


@lru_cache(maxsize=8)
def _pair_weights(shifts, damping, step, count, rho) -> tuple[np.ndarray, float]:
    # shared by every character of one modulus
    kernel = mellin_kernel(shifts, (2 * math.pi) ** 2, damping, 2.0, step)
    vals, err = kernel.evaluate(np.arange(1, count + 1) * rho)
    vals.setflags(write=False)
    return vals, err


def l_pair_value(
    s1: complex,
    s2: complex,
    chi: Character,
    coeffs: CoefficientTable,
    X: float = 1.0,
    damping: float = LVALUE_DAMPING,
    step: float = 1.0 / 16,
    tol: float = DEFAULT_TOL,
) -> LValueResult:
    """L(s1, f x chi) L(s2, f x chi-bar) from the product-form AFE.

    The double sum over (m, n) is grouped by N = mn: each block is a
    Dirichlet convolution evaluated once and weighted by W_{s1,s2}(N / (q^2 X)).
    No root number enters because iota_chi iota_{chi-bar} = 1 for even weight.
    """
    if not chi.is_primitive:
        raise ValueError(f"character {chi.index} mod {chi.q} is not primitive (conductor {chi.conductor})")
    s1, s2 = complex(s1), complex(s2)
    q = chi.q
    g = (coeffs.kappa - 1) / 2
    scale = (2 * math.pi) ** 2
    k1 = mellin_kernel((g + s1, g + s2), scale, damping, 2.0, step)
    k2 = mellin_kernel((g + 1 - s1, g + 1 - s2), scale, damping, 2.0, step)
    dual = _pair_dual_factor(s1, s2, q, coeffs.kappa)
    sig1 = min(s1.real, s2.real)
    sig2 = min(1 - s1.real, 1 - s2.real)
    n1, e1 = truncation_length(k1, sig1, 1 / (q * q * X), tol / 2, divisor_order=4)
    n2, e2 = truncation_length(k2, sig2, X / (q * q), tol / (2 * max(abs(dual), 1e-300)), divisor_order=4)
    need = max(n1, n2)
    if need > coeffs.limit:
        raise CapabilityError(f"pair AFE mod {q} needs {need} coefficients", required=need)
    grp = chi.group
    n = np.arange(need + 1)
    vals = grp.value_table([chi.index], n % q)[0]
    vals[0] = 0
    lam = coeffs.lam[: need + 1].copy()
    lam[0] = 0
    logn = np.log(np.maximum(n, 1).astype(float))
    chi_n, chib_n = vals, np.conj(vals)

    def block(sa, sb, xa, xb, length):
        x = lam[: length + 1] * xa[: length + 1] * np.exp(-sa * logn[: length + 1])
        y = lam[: length + 1] * xb[: length + 1] * np.exp(-sb * logn[: length + 1])
        return _convolve(x, y, length)

    c1 = block(s1, s2, chi_n, chib_n, n1)
    c2 = block(1 - s1, 1 - s2, chib_n, chi_n, n2)
    w1, qe1 = _pair_weights((g + s1, g + s2), damping, step, n1, 1 / (q * q * X))
    w2, qe2 = _pair_weights((g + 1 - s1, g + 1 - s2), damping, step, n2, X / (q * q))
    value = _fsum(c1[1:] * w1) + dual * _fsum(c2[1:] * w2)
    quad = qe1 * float(np.abs(c1).sum()) + abs(dual) * qe2 * float(np.abs(c2).sum())
    return LValueResult(s1, chi.index, value, X, (n1, n2), float(e1 + abs(dual) * e2), quad)
