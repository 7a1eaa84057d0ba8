# file: utils/numerics.py

import math
from typing import Callable

from scipy import integrate


class NumericTools:
    @staticmethod
    def integrate(func: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> float:
        """Integral of func over [a, b] by adaptive quadrature"""
        value, _ = integrate.quad(func, a, b, epsabs=tol, epsrel=tol, limit=200)
        return value

    @staticmethod
    def ks_critical(n: int, coefficient: float = 1.63) -> float:
        """Asymptotic KS critical value, 1.63 / sqrt(n) is alpha ~ 0.01"""
        return coefficient / math.sqrt(n)
