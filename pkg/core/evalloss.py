# file: core/evalloss.py
"""
Log-loss accounting for the base, enhanced and oracle forecasters.

The enhanced forecaster's density is b(u) times the base density, so the
gap between the cumulative base and enhanced losses is exactly the log
capital of the martingale that drives the enhancement.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from core.enhance import enhance
from core.errors import InvariantError, ParameterError
from core.forecast import ContinuousForecast, GaussianForecast, clamp_pit, pit

logger = logging.getLogger(__name__)

LN10 = math.log(10.0)
INFINITE_LOSS = math.inf


def log_loss(density_value: float, base10: bool = True) -> float:
    """-log of the predictive density; inf (not an exception) when it vanishes"""
    if not density_value > 0.0:
        return INFINITE_LOSS
    return -math.log10(density_value) if base10 else -math.log(density_value)


def _loss_from_log_density(log_density: float, base10: bool) -> float:
    if log_density == -math.inf or math.isnan(log_density):
        return INFINITE_LOSS
    return -log_density / LN10 if base10 else -log_density


class ForecastPolicy(ABC):
    """Hands out the forecast for step n (1-based)."""

    @abstractmethod
    def forecast_for(self, step: int) -> ContinuousForecast:
        ...


class ConstantPolicy(ForecastPolicy):
    def __init__(self, forecast: ContinuousForecast = None):
        self.forecast = forecast if forecast is not None else GaussianForecast(0.0, 1.0)

    def forecast_for(self, step: int) -> ContinuousForecast:
        return self.forecast

    def __repr__(self):
        return f"ConstantPolicy({self.forecast})"


class PiecewisePolicy(ForecastPolicy):
    """before for steps 1..changepoint, after for the rest"""

    def __init__(self, changepoint: int, before: ContinuousForecast, after: ContinuousForecast):
        if changepoint < 0:
            raise ParameterError(f"changepoint must be nonnegative, got {changepoint}")
        self.changepoint = changepoint
        self.before = before
        self.after = after

    def forecast_for(self, step: int) -> ContinuousForecast:
        return self.before if step <= self.changepoint else self.after

    def __repr__(self):
        return f"PiecewisePolicy({self.changepoint}, {self.before}, {self.after})"


@dataclass
class TrajectoryRow:
    step: int
    y: float
    u: float
    eps_eff: float
    log10_capital: float
    loss_base: float
    loss_enhanced: float
    loss_oracle: float
    median_enhanced: float


@dataclass
class LossLedger:
    cum_base: float = 0.0
    cum_enhanced: float = 0.0
    cum_oracle: float = 0.0
    per_step: List[TrajectoryRow] = field(default_factory=list)
    base10: bool = True
    degenerate_steps: int = 0
    min_log10_capital: float = 0.0
    changepoint: Optional[int] = None
    changepoint_log10_capital: Optional[float] = None

    @property
    def steps(self) -> int:
        return len(self.per_step)

    @property
    def final_log10_capital(self) -> float:
        return self.per_step[-1].log10_capital if self.per_step else 0.0

    def capital_gap(self) -> float:
        """Loss gap cum_base - cum_enhanced expressed in log10 units"""
        gap = self.cum_base - self.cum_enhanced
        return gap if self.base10 else gap / LN10

    def record(self, row: TrajectoryRow):
        """Append a row and update the running totals"""
        losses = (row.loss_base, row.loss_enhanced, row.loss_oracle)
        if any(math.isinf(v) for v in losses):
            # sentinel rows stay in the trajectory but not in the totals
            self.degenerate_steps += 1
            logger.warning("Degenerate loss at step %d (y=%r)", row.step, row.y)
        else:
            self.cum_base += row.loss_base
            self.cum_enhanced += row.loss_enhanced
            self.cum_oracle += row.loss_oracle
        self.min_log10_capital = min(self.min_log10_capital, row.log10_capital)
        if self.changepoint is not None and row.step == self.changepoint:
            self.changepoint_log10_capital = row.log10_capital
        self.per_step.append(row)

    def check_identity(self, tol: float = 1e-9):
        gap = self.capital_gap()
        if self.degenerate_steps == 0 and abs(gap - self.final_log10_capital) > tol:
            raise InvariantError(
                f"loss gap {gap!r} differs from log10 capital {self.final_log10_capital!r}")

    def summary(self) -> Dict:
        cp = self.changepoint_log10_capital
        return {
            "steps": self.steps,
            "final_log10_capital": self.final_log10_capital,
            "final_capital": _pow10(self.final_log10_capital),
            "changepoint": self.changepoint,
            "changepoint_log10_capital": cp,
            "changepoint_capital": None if cp is None else _pow10(cp),
            "min_log10_capital": self.min_log10_capital,
            "cum_base": self.cum_base,
            "cum_enhanced": self.cum_enhanced,
            "cum_oracle": self.cum_oracle,
            "loss_base10": self.base10,
            "degenerate_steps": self.degenerate_steps,
        }


def _pow10(x: float) -> float:
    try:
        return math.pow(10.0, x)
    except OverflowError:
        return math.inf


def run_experiment(observations: Sequence[float], base: ForecastPolicy, martingale,
                   oracle: ForecastPolicy, base10: bool = True,
                   changepoint: Optional[int] = None) -> LossLedger:
    """Run base, enhanced and oracle forecasters over the observations.

    The betting line for step n is peeked before y_n is looked at; the
    martingale is stepped with the clamped PIT of y_n afterwards.
    """
    if len(observations) == 0:
        raise ParameterError("observations must be nonempty")

    ledger = LossLedger(base10=base10, changepoint=changepoint)
    for step, y in enumerate(observations, start=1):
        y = float(y)
        forecast = base.forecast_for(step)
        line = martingale.peek()
        enhanced = enhance(forecast, line)

        loss_base = _loss_from_log_density(forecast.log_density(y), base10)
        loss_enhanced = _loss_from_log_density(enhanced.log_density(y), base10)
        loss_oracle = _loss_from_log_density(oracle.forecast_for(step).log_density(y), base10)
        median = enhanced.median()

        u = clamp_pit(pit(forecast, y))
        martingale.update(u)

        ledger.record(TrajectoryRow(
            step=step,
            y=y,
            u=u,
            eps_eff=line.eps_eff,
            log10_capital=martingale.log10_capital,
            loss_base=loss_base,
            loss_enhanced=loss_enhanced,
            loss_oracle=loss_oracle,
            median_enhanced=median,
        ))

    logger.debug("Experiment done: %d steps, final log10 capital %.6f",
                 ledger.steps, ledger.final_log10_capital)
    return ledger
