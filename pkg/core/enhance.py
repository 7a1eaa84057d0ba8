# file: core/enhance.py
"""
Enhanced forecasts built from a base forecast and a betting line.

With F the base cdf, f its density and b the line handed out by the
martingale before the outcome is seen, the enhanced forecast has density
b(F) f and distribution function B(F), where B(v) = (1 - eps/2) v + (eps/2) v^2.
"""

import math
from dataclasses import dataclass
from typing import Iterable

import numpy

from core.forecast import ContinuousForecast, clamp_pit
from core.martingale import BettingLine

# below this |eps| the betting quantile is the identity
EPS_ZERO = 1e-9


def betting_integral(line: BettingLine, v: float) -> float:
    return line.integral(v)


def betting_quantile(line: BettingLine, q: float) -> float:
    """The v in (0, 1) with B(v) = q."""
    eps = line.eps_eff
    if abs(eps) < EPS_ZERO:
        return q
    a = 1.0 - 0.5 * eps
    # (-a + sqrt(a^2 + 2 eps q)) / eps, rationalized: a >= 0 for |eps| <= 2
    v = 2.0 * q / (a + math.sqrt(a * a + 2.0 * eps * q))
    return min(max(v, 0.0), 1.0)


@dataclass(frozen=True)
class EnhancedForecast(ContinuousForecast):
    base: ContinuousForecast
    line: BettingLine

    def _u(self, y: float) -> float:
        return clamp_pit(self.base.cdf(y))

    def density(self, y: float) -> float:
        return self.line.density(self._u(y)) * self.base.density(y)

    def log_density(self, y: float) -> float:
        return math.log(self.line.density(self._u(y))) + self.base.log_density(y)

    def cdf(self, y: float) -> float:
        return self.line.integral(self.base.cdf(y))

    def quantile(self, p: float) -> float:
        return self.base.quantile(betting_quantile(self.line, p))


def enhance(base: ContinuousForecast, line: BettingLine) -> EnhancedForecast:
    return EnhancedForecast(base=base, line=line)


def enhanced_density(e: EnhancedForecast, y: float) -> float:
    return e.density(y)


def enhanced_quantile(e: EnhancedForecast, q: float) -> float:
    return e.quantile(q)


def density_grid(base: ContinuousForecast, eps_values: Iterable[float], ys) -> numpy.ndarray:
    """Enhanced densities, one row per eps, one column per y."""
    ys = numpy.asarray(ys, dtype=float)
    rows = []
    for eps in eps_values:
        e = enhance(base, BettingLine(float(eps)))
        rows.append([e.density(float(y)) for y in ys])
    return numpy.array(rows).reshape(-1, ys.size)


def density_mode(e: ContinuousForecast, lo: float = -6.0, hi: float = 6.0, n: int = 12001) -> float:
    ys = numpy.linspace(lo, hi, n)
    values = numpy.array([e.density(float(y)) for y in ys])
    return float(ys[int(numpy.argmax(values))])
