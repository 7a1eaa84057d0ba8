# file: core/forecast.py
"""
Continuous predictive distributions and the probability integral transform.

Every forecaster in the project hands out objects satisfying the
ContinuousForecast contract: density, cdf and quantile over the real line.
Gaussian is the only concrete family shipped; the enhancement machinery
only relies on the contract.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

from core.errors import DomainError, ParameterError

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)
LOG_SQRT2PI = 0.5 * math.log(2.0 * math.pi)

# PIT values are kept this far away from {0, 1} before betting on them
PIT_DELTA = 1e-15

# Rational approximation of the normal quantile (Acklam), |rel err| < 1.15e-9
_Q_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
        1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_Q_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
        6.680131188771972e+01, -1.328068155288572e+01)
_Q_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
        -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_Q_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
        3.754408661907416e+00)
_Q_LOW = 0.02425
_HALLEY_STEPS = 2
# above this exp(0.5 * x * x) overflows and the rational estimate is returned unrefined
_HALLEY_EXP_LIMIT = 700.0


def gaussian_cdf(x: float) -> float:
    """Standard normal distribution function."""
    z = x / SQRT2
    if abs(z) < 1.0 / SQRT2:
        return 0.5 + 0.5 * math.erf(z)
    # erfc keeps full relative precision in the tails
    y = 0.5 * math.erfc(abs(z))
    return 1.0 - y if x > 0 else y


def gaussian_pdf(x: float) -> float:
    """Standard normal density."""
    return math.exp(-0.5 * x * x) / SQRT2PI


def _rational_quantile(p: float) -> float:
    if p < _Q_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        c, d = _Q_C, _Q_D
        return ((((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
                / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0))
    if p > 1.0 - _Q_LOW:
        q = math.sqrt(-2.0 * math.log1p(-p))
        c, d = _Q_C, _Q_D
        return -((((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
                 / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0))
    q = p - 0.5
    r = q * q
    a, b = _Q_A, _Q_B
    return ((((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0))


def gaussian_quantile(p: float) -> float:
    """Standard normal quantile: rational estimate refined by Halley steps."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {p!r}")
    x = _rational_quantile(p)
    for _ in range(_HALLEY_STEPS):
        if 0.5 * x * x > _HALLEY_EXP_LIMIT:
            break
        e = gaussian_cdf(x) - p
        u = e * SQRT2PI * math.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return x


class ContinuousForecast(ABC):
    """A one-dimensional predictive distribution with a continuous cdf."""

    @abstractmethod
    def density(self, y: float) -> float:
        ...

    @abstractmethod
    def cdf(self, y: float) -> float:
        ...

    @abstractmethod
    def quantile(self, p: float) -> float:
        ...

    def log_density(self, y: float) -> float:
        """Natural log of the density; -inf where the density vanishes"""
        d = self.density(y)
        return math.log(d) if d > 0.0 else -math.inf

    def median(self) -> float:
        return self.quantile(0.5)


@dataclass(frozen=True)
class GaussianForecast(ContinuousForecast):
    mean: float = 0.0
    stddev: float = 1.0

    def __post_init__(self):
        if not (self.stddev > 0.0 and math.isfinite(self.stddev)):
            raise ParameterError(f"stddev must be positive and finite, got {self.stddev!r}")
        if not math.isfinite(self.mean):
            raise ParameterError(f"mean must be finite, got {self.mean!r}")

    def density(self, y: float) -> float:
        return gaussian_pdf((y - self.mean) / self.stddev) / self.stddev

    def log_density(self, y: float) -> float:
        z = (y - self.mean) / self.stddev
        return -0.5 * z * z - LOG_SQRT2PI - math.log(self.stddev)

    def cdf(self, y: float) -> float:
        return gaussian_cdf((y - self.mean) / self.stddev)

    def quantile(self, p: float) -> float:
        return self.mean + self.stddev * gaussian_quantile(p)

    def __str__(self):
        return f"N({self.mean:g},{self.stddev:g}^2)"


def pit(forecast: ContinuousForecast, y: float) -> float:
    """Probability integral transform of the outcome y under the forecast."""
    return forecast.cdf(y)


def clamp_pit(u: float, delta: float = PIT_DELTA) -> float:
    """Keep a PIT value inside [delta, 1 - delta] so betting never hits log(0)"""
    if u < delta:
        return delta
    if u > 1.0 - delta:
        return 1.0 - delta
    return u
