"""Twisted second moments over primitive characters and their main terms."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import cached_property

import numpy as np

from .afe import LVALUE_DAMPING, root_numbers, twisted_l_values
from .arith import cached_tables, factorize, is_prime, primitive_character_count
from .dirichlet import CharacterGroup, build_group
from .hecke import CoefficientTable
from .special import (
    DerivativeEstimate,
    digamma,
    euler_H,
    euler_H_log_derivative,
    log_gamma,
    richardson_derivative,
    sym_square_L,
    sym_square_L_derivative_ratio,
    zeta,
)

EULER_GAMMA = 0.57721566490153286
INTERPRETATIONS = ("log", "raw")


class TaskError(ValueError):
    """A moment task violates the hypotheses it is evaluated under."""


def validate_modulus(q: int) -> None:
    if q < 1:
        raise TaskError(f"q must be positive, got {q}")
    if q % 4 == 2:
        raise TaskError(f"q={q} ≡ 2 (mod 4): there are no primitive characters to this modulus")


def validate_twist(q: int, a: int, b: int) -> None:
    if a < 1 or b < 1:
        raise TaskError("a and b must be positive")
    if math.gcd(a, b) != 1 or math.gcd(a * b, q) != 1:
        raise TaskError(f"need (a,b) = (ab,q) = 1, got q={q}, a={a}, b={b}")


@dataclass(frozen=True)
class ConditionCheck:
    """Which size hypothesis of the asymptotic formula holds, and its slack.

    ``case`` is "i" (a divisor q0 with q/q0 odd and q^eta <= q0 <= q^{1/2-eta}),
    "ii" (q prime, eta = 1/144) or "none".  ``eps0`` is the slack left in the
    bound on (|s1|+1)(|s2|+1); ``size_ok`` says whether it lies in the allowed
    open interval.  The implied constants are unknown, so none of these gate
    the computation.
    """

    case: str
    q0: int
    eta: float
    eps0: float
    size_ok: bool
    twist_ok: bool

    def error_scale(self, q: int) -> float:
        if self.case == "i":
            return q ** (1 - self.eta / 100) + q ** (1 - self.eps0)
        if self.case == "ii":
            return q ** (1 - self.eta / 100)
        return float("nan")


def _q0_candidate(q: int) -> int:
    """Divisor q0 with q/q0 odd whose logarithm is closest to (log q)/4."""
    divs = [1]
    for p, e in factorize(q) if q > 1 else []:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    target = math.log(q) / 4 if q > 1 else 0.0
    ok = [d for d in divs if (q // d) % 2 == 1]
    return min(ok, key=lambda d: (abs(math.log(d) - target), d))


def check_conditions(q: int, a: int, b: int, s1: complex, s2: complex) -> ConditionCheck:
    size = math.log((abs(s1) + 1) * (abs(s2) + 1))
    logq = math.log(q) if q > 1 else 0.0
    q0 = _q0_candidate(q)
    eta = 0.0
    if q > 1:
        r = math.log(q0) / logq
        eta = min(r, 0.5 - r)
    if q > 1 and eta > 0:
        eps0 = 19 * eta / 5 - size / logq
        return ConditionCheck("i", q0, eta, eps0, 0 < eps0 < 19 * eta / 5, True)
    if is_prime(q):
        eps0 = 0.25 - size / logq
        return ConditionCheck("ii", q0, 1 / 144, eps0, 0 < eps0 < 0.25, max(a, b) <= q**0.25)
    return ConditionCheck("none", q0, eta, float("nan"), False, False)


@dataclass(frozen=True)
class MomentTask:
    q: int
    a: int = 1
    b: int = 1
    s1: complex = 0.5
    s2: complex = 0.5

    def __post_init__(self):
        validate_modulus(self.q)
        validate_twist(self.q, self.a, self.b)
        object.__setattr__(self, "s1", complex(self.s1))
        object.__setattr__(self, "s2", complex(self.s2))
        for s in (self.s1, self.s2):
            if not 0 < s.real < 1:
                raise TaskError(f"real parts must lie in (0, 1), got {s}")

    @classmethod
    def critical(cls, q: int, t: float, a: int = 1, b: int = 1) -> "MomentTask":
        """The |L(1/2 + it)|^2 task: s1 = 1/2 + it, s2 = 1/2 - it."""
        return cls(q, a, b, complex(0.5, t), complex(0.5, -t))

    @cached_property
    def conditions(self) -> ConditionCheck:
        return check_conditions(self.q, self.a, self.b, self.s1, self.s2)

    @property
    def on_critical_line(self) -> bool:
        return self.s1.real == 0.5 and self.s2.real == 0.5

    @property
    def is_diagonal_limit(self) -> bool:
        return self.on_critical_line and self.s1.imag + self.s2.imag == 0


@dataclass
class MainTermEvaluator:
    """Shared special-function values for main terms of one coefficient table.

    ``normalization="rankin_selberg"`` pairs the corrected H with
    zeta(s) L(s, sym^2 f) / zeta(2s); ``"zeta_sym2"`` pairs the literal local
    factors with zeta(s) L(s, sym^2 f).
    """

    coeffs: CoefficientTable
    normalization: str = "rankin_selberg"
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.normalization not in ("rankin_selberg", "zeta_sym2"):
            raise ValueError(f"unknown normalization {self.normalization!r}")

    def sym2(self, s: complex) -> complex:
        key = ("sym2", complex(s))
        if key not in self._cache:
            self._cache[key] = sym_square_L(complex(s), self.coeffs)
        return self._cache[key]

    def degree_two(self, s: complex) -> complex:
        """The L-factor multiplying zeta(s) H(s) in the first main term."""
        val = self.sym2(s)
        if self.normalization == "rankin_selberg":
            val = val / zeta(2 * complex(s))
        return val

    def H(self, s: complex, q: int, a: int, b: int) -> complex:
        return euler_H(s, q, a, b, self.coeffs, normalization=self.normalization).product

    @cached_property
    def degree_two_derivative(self) -> DerivativeEstimate:
        """(log) derivative at 1 of the factor returned by :meth:`degree_two`."""
        sym = sym_square_L_derivative_ratio(self.coeffs)
        if self.normalization == "zeta_sym2":
            return sym
        z = richardson_derivative(lambda x: zeta(x).real, 2.0)
        ratio = sym.ratio - 2 * z.ratio
        value = sym.value / z.value
        return DerivativeEstimate(1.0, value, ratio * value, ratio, sym.step, sym.certificate + 2 * z.certificate)

    def H_derivative(self, q: int, a: int, b: int) -> DerivativeEstimate:
        key = ("dH", q, a, b)
        if key not in self._cache:
            self._cache[key] = euler_H_log_derivative(q, a, b, self.coeffs, normalization=self.normalization)
        return self._cache[key]


@dataclass(frozen=True)
class MainTerms:
    term1: complex
    term2: complex
    error_scale_R: float

    @property
    def total(self) -> complex:
        return self.term1 + self.term2


def _phi_star(q: int) -> int:
    return primitive_character_count(q, cached_tables(max(q, 2)))


def main_term_theorem(task: MomentTask, specials: MainTermEvaluator) -> MainTerms:
    """Both main terms of the twisted second moment for s1 + s2 != 1."""
    s1, s2, q, a, b = task.s1, task.s2, task.q, task.a, task.b
    S = s1 + s2
    if abs(S - 1) < 1e-12:
        raise TaskError("s1 + s2 = 1: use the diagonal limit form")
    g = (specials.coeffs.kappa - 1) / 2
    ps = _phi_star(q)
    f1 = zeta(S) * specials.degree_two(S) * specials.H(S, q, a, b)
    term1 = ps * np.exp(-s1 * math.log(b) - s2 * math.log(a)) * f1
    gam = log_gamma(g + 1 - s1) + log_gamma(g + 1 - s2) - log_gamma(g + s1) - log_gamma(g + s2)
    pref = np.exp(2 * (1 - S) * math.log(q / (2 * math.pi)) + gam - (1 - s1) * math.log(a) - (1 - s2) * math.log(b))
    f2 = zeta(2 - S) * specials.degree_two(2 - S) * specials.H(2 - S, q, a, b)
    term2 = ps * pref * f2
    return MainTerms(complex(term1), complex(term2), task.conditions.error_scale(q))


def main_term_diagonal_limit(
    q: int, t: float, a: int, b: int, specials: MainTermEvaluator, interpretation: str = "log"
) -> complex:
    """Limit of the two main terms as s1 = 1/2 + it, s2 -> 1/2 - it.

    ``interpretation="log"`` uses logarithmic derivatives of the degree-two
    factor and of H; ``"raw"`` uses the plain derivatives.  In the
    ``rankin_selberg`` normalization the bracket also carries 2 gamma from the
    constant term of zeta at 1; the ``zeta_sym2`` normalization omits it.
    """
    validate_modulus(q)
    validate_twist(q, a, b)
    if interpretation not in INTERPRETATIONS:
        raise ValueError(f"interpretation must be one of {INTERPRETATIONS}")
    kappa = specials.coeffs.kappa
    ps = _phi_star(q)
    dl = specials.degree_two_derivative
    dh = specials.H_derivative(q, a, b)
    L1 = dl.value
    H1 = specials.H(1.0, q, a, b).real
    if interpretation == "log":
        d_l, d_h = dl.ratio, dh.ratio
    else:
        d_l, d_h = dl.raw, dh.raw
    bracket = (
        2 * math.log(q / (2 * math.pi))
        + 2 * d_l
        + 2 * d_h
        + digamma(complex(kappa / 2, t))
        + digamma(complex(kappa / 2, -t))
        - math.log(a * b)
    )
    if specials.normalization == "rankin_selberg":
        bracket += 2 * EULER_GAMMA
    pref = ps * np.exp(-complex(0.5, -t) * math.log(a) - complex(0.5, t) * math.log(b))
    return complex(pref * L1 * H1 * bracket)


@dataclass(frozen=True)
class MomentValue:
    value: complex
    lengths: tuple[int, int]
    truncation_error: float
    quadrature_error: float


def brute_force_twisted_moment(
    task: MomentTask,
    group: CharacterGroup,
    coeffs: CoefficientTable,
    damping: float = LVALUE_DAMPING,
    step: float = 1.0 / 16,
    threads: int = 1,
    fast_weights: bool = False,
) -> MomentValue:
    """sum over primitive chi of L(s1, f x chi) L(s2, f x chi-bar) chi(a) chi-bar(b).

    Terms are produced in the fixed enumeration order of ``group`` and summed
    with an exactly rounded float sum, so the result is independent of the
    thread count.
    """
    if group.q != task.q:
        raise ValueError("group modulus does not match the task")
    idx = list(group.primitive_index)
    if not idx:
        return MomentValue(0j, (0, 0), 0.0, 0.0)
    iotas = root_numbers(group, idx, coeffs.kappa, threads)
    opts = dict(iotas=iotas, damping=damping, step=step, threads=threads, fast_weights=fast_weights)
    first = twisted_l_values(task.s1, group, coeffs, idx, **opts)
    if task.s2 == task.s1.conjugate():
        # L(conj s, chi-bar) = conj L(s, chi)
        second_vals = np.conj(first.values)
        second = first
    else:
        second = twisted_l_values(task.s2, group, coeffs, idx, **opts)
        pos = {i: k for k, i in enumerate(idx)}
        second_vals = second.values[[pos[int(group.conj_index[i])] for i in idx]]
    E = group.exponent
    ang = (group.angle_table(idx, [task.a])[:, 0] - group.angle_table(idx, [task.b])[:, 0]) % E
    twist = group.roots[ang]
    terms = first.values * second_vals * twist
    value = complex(math.fsum(terms.real), math.fsum(terms.imag))
    mags = np.abs(first.values) + np.abs(second_vals) + 1
    trunc = float(np.sum(mags)) * max(first.truncation_error, second.truncation_error)
    quad = float(np.sum(mags)) * max(first.quadrature_error, second.quadrature_error)
    return MomentValue(value, first.lengths, trunc, quad)


@dataclass(frozen=True)
class MomentReport:
    q: int
    a: int
    b: int
    s1: complex
    s2: complex
    form: str
    normalization: str
    interpretation: str
    phi_star: int
    lhs: complex
    main_term_1: complex
    main_term_2: complex
    main_sum: complex
    residual: complex
    relative_residual: float
    alt_interpretation: str
    alt_relative_residual: float
    error_scale_R: float
    condition: str
    eta: float
    eps0: float
    afe_length_1: int
    afe_length_2: int
    truncation_error: float
    quadrature_error: float
    status: str = "ok"

    def as_dict(self) -> dict:
        return asdict(self)


def _relative(lhs: complex, main: complex) -> float:
    return abs(lhs - main) / abs(main) if main != 0 else float("inf")


def moment_compare(
    task: MomentTask,
    coeffs: CoefficientTable,
    specials: MainTermEvaluator | None = None,
    group: CharacterGroup | None = None,
    interpretation: str = "log",
    damping: float = LVALUE_DAMPING,
    step: float = 1.0 / 16,
    threads: int = 1,
    fast_weights: bool = False,
) -> MomentReport:
    """Brute force against the applicable main-term formula.

    The diagonal limit is used when s1 = 1/2 + it, s2 = 1/2 - it; otherwise the
    two-term formula.  Failures are re-raised with the stage that failed.
    """
    specials = specials or MainTermEvaluator(coeffs)
    stage = "character group"
    try:
        group = group or build_group(task.q)
        stage = "brute force"
        bf = brute_force_twisted_moment(task, group, coeffs, damping, step, threads, fast_weights)
        stage = "main terms"
        if task.is_diagonal_limit:
            t = task.s1.imag
            main = main_term_diagonal_limit(task.q, t, task.a, task.b, specials, interpretation)
            alt_name = "raw" if interpretation == "log" else "log"
            alt = main_term_diagonal_limit(task.q, t, task.a, task.b, specials, alt_name)
            terms = MainTerms(main, 0j, task.conditions.error_scale(task.q))
            form, alt_rel = "limit", _relative(bf.value, alt)
        else:
            terms = main_term_theorem(task, specials)
            form = "critical" if task.on_critical_line else "general"
            alt_name, alt_rel = "", float("nan")
    except TaskError:
        raise
    except Exception as exc:
        raise RuntimeError(f"moment_compare failed during {stage}: {exc}") from exc
    cond = task.conditions
    main_sum = terms.total
    return MomentReport(
        q=task.q,
        a=task.a,
        b=task.b,
        s1=task.s1,
        s2=task.s2,
        form=form,
        normalization=specials.normalization,
        interpretation=interpretation if form == "limit" else "",
        phi_star=_phi_star(task.q),
        lhs=bf.value,
        main_term_1=terms.term1,
        main_term_2=terms.term2,
        main_sum=main_sum,
        residual=bf.value - main_sum,
        relative_residual=_relative(bf.value, main_sum),
        alt_interpretation=alt_name,
        alt_relative_residual=alt_rel,
        error_scale_R=terms.error_scale_R,
        condition=cond.case,
        eta=cond.eta,
        eps0=cond.eps0,
        afe_length_1=bf.lengths[0],
        afe_length_2=bf.lengths[1],
        truncation_error=bf.truncation_error,
        quadrature_error=bf.quadrature_error,
    )


@dataclass(frozen=True)
class ScanEntry:
    q: int
    report: MomentReport | None
    status: str


def moment_scan(
    q_list,
    t: float,
    a: int,
    b: int,
    coeffs: CoefficientTable,
    specials: MainTermEvaluator | None = None,
    interpretation: str = "log",
    damping: float = LVALUE_DAMPING,
    threads: int = 1,
    fast_weights: bool = False,
) -> list[ScanEntry]:
    """One comparison per q, in input order; a failing q is recorded and skipped."""
    specials = specials or MainTermEvaluator(coeffs)
    out = []
    for q in q_list:
        try:
            task = MomentTask.critical(q, t, a, b)
            rep = moment_compare(
                task, coeffs, specials, interpretation=interpretation, damping=damping, threads=threads,
                fast_weights=fast_weights,
            )
            out.append(ScanEntry(q, rep, "ok"))
        except Exception as exc:  # noqa: BLE001 - isolation is the point of a scan
            out.append(ScanEntry(q, None, f"error: {exc}"))
    return out


@dataclass(frozen=True)
class KMomentResult:
    q: int
    t: float
    k: float
    phi_star: int
    value: float
    normalized: float
    afe_length_1: int
    afe_length_2: int
    truncation_error: float
    quadrature_error: float
    in_t_range: bool


def kth_moment_sum(
    q: int,
    t: float,
    k: float,
    group: CharacterGroup,
    coeffs: CoefficientTable,
    damping: float = LVALUE_DAMPING,
    threads: int = 1,
    fast_weights: bool = False,
) -> KMomentResult:
    """sum over primitive chi of |L(1/2 + it, f x chi)|^{2k} and its ratio to phi*(q) (log q)^{k^2}."""
    validate_modulus(q)
    if k < 0:
        raise ValueError("k must be non-negative")
    idx = list(group.primitive_index)
    ps = len(idx)
    cond = check_conditions(q, 1, 1, complex(0.5, t), complex(0.5, -t))
    if k == 0:
        value, lengths, trunc, quad = float(ps), (0, 0), 0.0, 0.0
    else:
        batch = twisted_l_values(
            complex(0.5, t), group, coeffs, idx, damping=damping, threads=threads, fast_weights=fast_weights
        )
        mags = np.abs(batch.values)
        value = math.fsum(mags ** (2 * k))
        lengths, trunc, quad = batch.lengths, batch.truncation_error, batch.quadrature_error
    norm = value / (ps * math.log(q) ** (k * k)) if ps and q > 1 else float("nan")
    return KMomentResult(q, t, k, ps, value, norm, lengths[0], lengths[1], trunc, quad, cond.size_ok)
