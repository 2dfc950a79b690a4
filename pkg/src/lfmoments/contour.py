"""Trapezoid quadrature of Mellin integrals along vertical lines.

Every smoothing weight in the package has the shape

    V(y) = (1/2 pi i) int_{(c)} R(u) exp(a u^2) (scale * y)^{-u} du / u

with R an entire-near-the-line Gamma ratio satisfying R(0) = 1.  The
integrand decays like a Gaussian on the line, so the trapezoid rule
converges geometrically in the step.  For scale * y < 1 the line is moved to
Re u = -c_left, picking up the residue 1 at u = 0; that avoids the large
cancellation that the right-hand line would suffer for tiny y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .arith import divisor_power_bound
from .errors import QuadratureError

# relative size of the Gaussian factor at which the line is cut
_CUTOFF = 1e-18
_CHUNK = 2048


@dataclass
class MellinKernel:
    """Vectorized evaluator of one Mellin weight.

    Args:
        log_ratio: log R(u) for complex arrays u (principal logs are fine,
            only exp(log_ratio) is used).
        scale: constant multiplying y inside (scale * y)^{-u}.
        damping: a in the damper exp(a u^2).
        abscissa: c > 0 for the right-hand line.
        left_abscissa: c_left > 0 for the shifted line; must stay left of 0
            and right of every pole of R.  ``None`` keeps every point on the
            right-hand line.
        step: trapezoid step in Im u.
        tolerance: accepted step-halving disagreement.
    """

    log_ratio: Callable[[np.ndarray], np.ndarray]
    scale: float = 1.0
    damping: float = 1.0
    abscissa: float = 2.0
    left_abscissa: float | None = 0.5
    step: float = 1.0 / 16
    tolerance: float = 1e-9
    max_halvings: int = 4
    _nodes: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.damping <= 0:
            raise ValueError("damping must be positive")
        if self.abscissa <= 0 or (self.left_abscissa is not None and self.left_abscissa <= 0):
            raise ValueError("contour abscissae must be positive")

    def _integrand(self, u: np.ndarray) -> np.ndarray:
        return np.exp(self.log_ratio(u) + self.damping * u * u) / u

    def height(self, c: float) -> float:
        """Half-length of the line Re u = c beyond which the integrand is negligible."""
        v = math.sqrt(math.log(1 / _CUTOFF) / self.damping + c * c)
        probe = np.linspace(0, v, 64)
        peak = np.max(np.abs(self._integrand(c + 1j * probe)))
        for _ in range(40):
            edge = np.abs(self._integrand(c + 1j * np.array([-v, v])))
            if np.max(edge) < _CUTOFF * peak:
                return v
            v *= 1.25
        raise QuadratureError(f"integrand does not decay on Re u = {c}")

    def _line(self, c: float, h: float):
        key = (c, h)
        if key not in self._nodes:
            v_max = self.height(c)
            j = math.ceil(v_max / h)
            v = h * np.arange(-j, j + 1)
            u = c + 1j * v
            w = self._integrand(u) * (h / (2 * math.pi))
            self._nodes[key] = (u, w)
        return self._nodes[key]

    def _sum_line(self, logy: np.ndarray, c: float, h: float) -> np.ndarray:
        u, w = self._line(c, h)
        out = np.empty(len(logy), dtype=complex)
        for start in range(0, len(logy), _CHUNK):
            ly = logy[start : start + _CHUNK]
            # fixed-order row sums keep results independent of BLAS threading
            out[start : start + _CHUNK] = (np.exp(-np.outer(ly, u)) * w).sum(axis=1)
        return out

    def _evaluate_at_step(self, logy: np.ndarray, h: float) -> np.ndarray:
        right = logy >= 0 if self.left_abscissa is not None else np.ones(len(logy), dtype=bool)
        out = np.empty(len(logy), dtype=complex)
        if right.any():
            out[right] = self._sum_line(logy[right], self.abscissa, h)
        if (~right).any():
            out[~right] = 1.0 + self._sum_line(logy[~right], -self.left_abscissa, h)
        return out

    def evaluate(self, y, certify: bool = True) -> tuple[np.ndarray, float]:
        """V at each y > 0, with the step-halving disagreement as certificate.

        The step is halved automatically (up to ``max_halvings`` times) while
        the disagreement exceeds ``tolerance``; beyond that a
        :class:`QuadratureError` is raised.
        """
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if np.any(y <= 0):
            raise ValueError("weight argument must be positive")
        logy = np.log(self.scale * y)
        h = self.step
        coarse = self._evaluate_at_step(logy, h)
        if not certify:
            return coarse, float("nan")
        for _ in range(self.max_halvings + 1):
            fine = self._evaluate_at_step(logy, h / 2)
            err = float(np.max(np.abs(fine - coarse))) if len(y) else 0.0
            if err <= self.tolerance:
                return fine, err
            coarse, h = fine, h / 2
        raise QuadratureError(f"step-halving disagreement {err:.3e} exceeds {self.tolerance:.1e}")

    def decay_constant(self, c: float, h: float | None = None) -> float:
        """M_c with |V(y)| <= M_c (scale * y)^{-c} for every y > 0."""
        h = h or self.step
        v_max = self.height(c)
        v = h * np.arange(-math.ceil(v_max / h), math.ceil(v_max / h) + 1)
        vals = np.abs(self._integrand(c + 1j * v))
        return float(math.fsum(vals) * h / (2 * math.pi))


def truncation_length(
    kernel: MellinKernel,
    sigma: float,
    rho: float,
    tol: float,
    divisor_order: int,
    abscissae=(2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 12.0, 16.0),
) -> tuple[int, float]:
    """Smallest N certifying sum_{n > N} d_r(n) n^{-sigma} |V(rho n)| < tol.

    Combines |V(y)| <= M_c (scale y)^{-c} with d_r(n) <= C_delta n^delta and
    the integral bound for the remaining power sum; the best (c, delta) from a
    small grid wins.  Returns (N, certified tail bound).
    """
    best = None
    for delta in (0.25, 0.5):
        cd = divisor_power_bound(divisor_order, delta)
        for c in abscissae:
            expo = sigma + c - 1 - delta
            if expo <= 0.5:
                continue
            const = cd * kernel.decay_constant(c) * (kernel.scale * rho) ** (-c) / expo
            n = max(2, math.ceil((const / tol) ** (1 / expo)))
            if best is None or n < best[0]:
                best = (n, const * n ** (-expo))
    if best is None:
        raise ValueError(f"no admissible contour for sigma={sigma}")
    return best
