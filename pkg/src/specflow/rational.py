"""
The resolvent form Q(lambda) = p_uv(lambda) / m_A(lambda) in lowest terms.
"""

import logging
from math import comb, factorial
from typing import List, Tuple

import numpy as np

from .errors import PoleError
from .poly import Poly, derivative, evaluate, multiplicity_of, roots

logger = logging.getLogger(__name__)


class QFunction:
    """
    Q = num / den after dividing out the roots shared by m_A and p_uv.

    Poles are the roots of ``den``: roots of m_A that p_uv does not fully cancel.
    """

    def __init__(self, mA: Poly, puv: Poly, cancel_tol: float, pole_tol: float):
        self.pole_tol = pole_tol
        self.cancelled: List[Tuple[complex, int]] = []
        if puv.is_zero:
            num, den = Poly(), Poly.constant(1.0)
        else:
            num, den = puv, mA
            if puv.degree >= 1:
                for c, mult_m in roots(mA):
                    k = min(mult_m, multiplicity_of(puv, c, cancel_tol))
                    if k:
                        factor = Poly.from_roots([c] * k)
                        num, _ = divmod(num, factor)
                        den, _ = divmod(den, factor)
                        self.cancelled.append((c, k))
        self.num = num
        self.den = den
        self.poles = [r for r, _ in roots(den)] if den.degree >= 1 else []
        if self.cancelled:
            logger.debug("Cancelled common roots of m_A and p_uv: %s", self.cancelled)

    def distance_to_poles(self, z: complex) -> float:
        if not self.poles:
            return float("inf")
        return float(np.min(np.abs(np.asarray(self.poles) - z)))

    def __call__(self, z):
        """Q at a scalar or array of points (no pole check)."""
        with np.errstate(all="ignore"):
            return evaluate(self.num, z) / evaluate(self.den, z)

    def derivatives(self, z: complex, order: int = 0) -> np.ndarray:
        """
        (Q(z), Q'(z), ..., Q^(order)(z)) from Leibniz' rule on Q * den = num:
        Q^(v) = (num^(v) - sum_{j<v} C(v, j) Q^(j) den^(v-j)) / den.
        """
        if self.distance_to_poles(z) <= self.pole_tol:
            raise PoleError(f"Q evaluated within {self.pole_tol:.1e} of a pole at z = {z}")
        num_d = [evaluate(self.num, z)] + [
            evaluate(derivative(self.num, j), z) for j in range(1, order + 1)
        ]
        den_d = [evaluate(self.den, z)] + [
            evaluate(derivative(self.den, j), z) for j in range(1, order + 1)
        ]
        out = np.zeros(order + 1, dtype=complex)
        for nu in range(order + 1):
            acc = num_d[nu] - sum(comb(nu, j) * out[j] * den_d[nu - j] for j in range(nu))
            out[nu] = acc / den_d[0]
        return out

    def taylor(self, z: complex, order: int) -> np.ndarray:
        """Taylor coefficients Q^(j)(z) / j! for j = 0..order."""
        d = self.derivatives(z, order)
        return np.array([d[j] / factorial(j) for j in range(order + 1)])

    def derivative_numerator(self) -> Poly:
        """num' den - num den': the numerator of Q' in lowest terms."""
        if self.num.is_zero:
            return Poly()
        return derivative(self.num) * self.den - self.num * derivative(self.den)
