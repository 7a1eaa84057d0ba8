# file: core/martingale.py
"""
Simple Jumper and Mean Jumper betting martingales over PIT values.

The Simple Jumper keeps three weights for the bets eps in {-E, 0, +E}.
Weights are stored normalized and the capital is carried as log10 so that
values around 10^91 (and far beyond on long streams) never overflow.
The raw, unnormalized recursion is kept in raw_jumper_trajectory and only
used as a reference.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy

from core.errors import DomainError, ParameterError

logger = logging.getLogger(__name__)

DEFAULT_JUMP_RATE = 0.01
DEFAULT_EPS_RANGE = 1.0
DEFAULT_JUMP_RATES = (0.001, 0.01, 0.1, 1.0)
MAX_EPS = 2.0

# tolerance on |eps| > 2 coming from float mixing of valid lines
_EPS_SLACK = 1e-12


def capital_from_log10(log10_capital: float) -> float:
    """10 ** log10_capital, inf when it does not fit in a float"""
    try:
        return math.pow(10.0, log10_capital)
    except OverflowError:
        return math.inf


def _log10_mean(log10_values: Sequence[float]) -> float:
    # log-sum-exp in base 10
    top = max(log10_values)
    total = math.fsum(math.pow(10.0, v - top) for v in log10_values)
    return top + math.log10(total) - math.log10(len(log10_values))


@dataclass(frozen=True)
class BettingLine:
    """The linear betting function b(u) = 1 + eps_eff * (u - 0.5)."""
    eps_eff: float = 0.0

    def __post_init__(self):
        if not abs(self.eps_eff) <= MAX_EPS + _EPS_SLACK:
            raise ParameterError(f"betting line slope must satisfy |eps| <= 2, got {self.eps_eff!r}")
        # the stored slope lies in [-2, 2], so b(u) >= 0 on [0, 1]
        object.__setattr__(self, "eps_eff", min(MAX_EPS, max(-MAX_EPS, float(self.eps_eff))))

    def density(self, u: float) -> float:
        return 1.0 + self.eps_eff * (u - 0.5)

    def integral(self, v: float) -> float:
        """B(v), the integral of b over [0, v]"""
        half = 0.5 * self.eps_eff
        return (1.0 - half) * v + half * v * v


@dataclass(frozen=True)
class SimpleJumperState:
    weights: Tuple[float, float, float]
    jump_rate: float
    eps_range: float
    log10_capital: float = 0.0
    steps: int = 0

    @property
    def capital(self) -> float:
        return capital_from_log10(self.log10_capital)


@dataclass(frozen=True)
class MeanJumperState:
    components: Tuple[SimpleJumperState, ...]

    @property
    def eps_range(self) -> float:
        return self.components[0].eps_range

    @property
    def jump_rates(self) -> Tuple[float, ...]:
        return tuple(c.jump_rate for c in self.components)

    @property
    def steps(self) -> int:
        return self.components[0].steps

    @property
    def log10_capital(self) -> float:
        return _log10_mean([c.log10_capital for c in self.components])

    @property
    def capital(self) -> float:
        return capital_from_log10(self.log10_capital)


def _check_jump_rate(J: float):
    if not 0.0 < J <= 1.0:
        raise ParameterError(f"jump rate J must lie in (0, 1], got {J!r}")


def _check_eps_range(E: float):
    if not 0.0 < E <= MAX_EPS:
        raise ParameterError(f"epsilon range E must lie in (0, 2], got {E!r}")


def _check_pit(u: float):
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"PIT value must lie in [0, 1], got {u!r}")


def _mix(weights: Sequence[float], J: float) -> Tuple[float, float, float]:
    # Jump mixing on normalized weights (total capital is 1 in these units)
    share = J / 3.0
    keep = 1.0 - J
    return tuple(keep * w + share for w in weights)


# ----------------------------------------------------------------------
# Simple Jumper
# ----------------------------------------------------------------------

def jumper_init(J: float, E: float) -> SimpleJumperState:
    _check_jump_rate(J)
    _check_eps_range(E)
    third = 1.0 / 3.0
    return SimpleJumperState(weights=(third, third, third), jump_rate=float(J), eps_range=float(E))


def jumper_mixed_weights(state: SimpleJumperState) -> Tuple[float, float, float]:
    """Weights after jump mixing, the ones the next bet is placed with.

    Each is at least J/3, so they stay positive even when a boundary PIT with
    E = 2 has zeroed one of the stored post-bet weights.
    """
    return _mix(state.weights, state.jump_rate)


def jumper_peek_betting(state: SimpleJumperState) -> BettingLine:
    """The line the next jumper_step will bet with; the state is not touched."""
    w_neg, w_zero, w_pos = jumper_mixed_weights(state)
    eps = (w_pos - w_neg) / (w_neg + w_zero + w_pos) * state.eps_range
    return BettingLine(eps)


def jumper_step(state: SimpleJumperState, u: float) -> Tuple[SimpleJumperState, float]:
    _check_pit(u)
    E = state.eps_range
    w_neg, w_zero, w_pos = jumper_mixed_weights(state)
    w_neg *= 1.0 - E * (u - 0.5)
    w_pos *= 1.0 + E * (u - 0.5)
    factor = w_neg + w_zero + w_pos
    new_state = replace(
        state,
        weights=(w_neg / factor, w_zero / factor, w_pos / factor),
        log10_capital=state.log10_capital + math.log10(factor),
        steps=state.steps + 1,
    )
    return new_state, new_state.capital


def jumper_capital(state: SimpleJumperState) -> float:
    return state.capital


# ----------------------------------------------------------------------
# Mean Jumper
# ----------------------------------------------------------------------

def mean_jumper_init(Js: Iterable[float], E: float) -> MeanJumperState:
    rates = sorted(set(float(J) for J in Js))
    if not rates:
        raise ParameterError("the set of jump rates is empty")
    if 1.0 not in rates:
        raise ParameterError(f"the set of jump rates must include J=1, got {rates}")
    return MeanJumperState(components=tuple(jumper_init(J, E) for J in rates))


def mean_jumper_step(state: MeanJumperState, u: float) -> Tuple[MeanJumperState, float]:
    _check_pit(u)
    components = tuple(jumper_step(c, u)[0] for c in state.components)
    new_state = MeanJumperState(components=components)
    return new_state, new_state.capital


def mean_jumper_peek_betting(state: MeanJumperState) -> BettingLine:
    """Capital-weighted mixture of the component lines."""
    logs = [c.log10_capital for c in state.components]
    top = max(logs)
    caps = [math.pow(10.0, v - top) for v in logs]
    eps = [jumper_peek_betting(c).eps_eff for c in state.components]
    mixed = math.fsum(c * e for c, e in zip(caps, eps)) / math.fsum(caps)
    return BettingLine(mixed)


def mean_jumper_capital(state: MeanJumperState) -> float:
    return state.capital


# ----------------------------------------------------------------------
# Snapshots
# ----------------------------------------------------------------------

def state_to_dict(state) -> Dict:
    """Flat JSON-ready record of a jumper state"""
    if isinstance(state, MeanJumperState):
        return {"components": [state_to_dict(c) for c in state.components]}
    return {
        "weights": list(state.weights),
        "J": state.jump_rate,
        "E": state.eps_range,
        "log10_capital": state.log10_capital,
        "steps": state.steps,
    }


def state_from_dict(record: Dict):
    if "components" in record:
        return MeanJumperState(components=tuple(state_from_dict(c) for c in record["components"]))
    try:
        weights = tuple(float(w) for w in record["weights"])
        J, E = float(record["J"]), float(record["E"])
        log10_capital = float(record["log10_capital"])
        steps = int(record["steps"])
    except (KeyError, TypeError, ValueError) as e:
        raise ParameterError(f"malformed jumper snapshot: {e}") from e
    _check_jump_rate(J)
    _check_eps_range(E)
    if len(weights) != 3 or min(weights) < 0.0 or abs(sum(weights) - 1.0) > 1e-9:
        raise ParameterError(f"snapshot weights must be three normalized nonnegative reals, got {weights}")
    return SimpleJumperState(weights=weights, jump_rate=J, eps_range=E,
                             log10_capital=log10_capital, steps=steps)


# ----------------------------------------------------------------------
# Stateful drivers used by the experiment loop
# ----------------------------------------------------------------------

class SimpleJumper:
    """Mutable wrapper around SimpleJumperState"""

    kind = "simple"

    def __init__(self, jump_rate: float = DEFAULT_JUMP_RATE, eps_range: float = DEFAULT_EPS_RANGE):
        self.state = jumper_init(jump_rate, eps_range)

    def peek(self) -> BettingLine:
        return jumper_peek_betting(self.state)

    def update(self, u: float) -> float:
        self.state, capital = jumper_step(self.state, u)
        return capital

    @property
    def log10_capital(self) -> float:
        return self.state.log10_capital

    @property
    def capital(self) -> float:
        return self.state.capital

    @property
    def floor(self) -> float:
        return 0.0

    def snapshot(self) -> Dict:
        return state_to_dict(self.state)


class MeanJumper:
    """Mutable wrapper around MeanJumperState"""

    kind = "mean"

    def __init__(self, jump_rates: Iterable[float] = DEFAULT_JUMP_RATES,
                 eps_range: float = DEFAULT_EPS_RANGE):
        self.state = mean_jumper_init(jump_rates, eps_range)

    def peek(self) -> BettingLine:
        return mean_jumper_peek_betting(self.state)

    def update(self, u: float) -> float:
        self.state, capital = mean_jumper_step(self.state, u)
        return capital

    @property
    def log10_capital(self) -> float:
        return self.state.log10_capital

    @property
    def capital(self) -> float:
        return self.state.capital

    @property
    def floor(self) -> float:
        return 1.0 / len(self.state.components)

    def snapshot(self) -> Dict:
        return state_to_dict(self.state)


MARTINGALE_KINDS = {
    "simple": lambda jump_rate, jump_rates, eps_range: SimpleJumper(jump_rate, eps_range),
    "mean": lambda jump_rate, jump_rates, eps_range: MeanJumper(jump_rates, eps_range),
}


def build_martingale(kind: str = "simple", jump_rate: float = DEFAULT_JUMP_RATE,
                     jump_rates: Iterable[float] = DEFAULT_JUMP_RATES,
                     eps_range: float = DEFAULT_EPS_RANGE):
    """Create a fresh martingale driver of the given kind"""
    if kind not in MARTINGALE_KINDS:
        raise ParameterError(f"unknown martingale kind {kind!r}, expected one of {sorted(MARTINGALE_KINDS)}")
    logger.debug("Building %s jumper (J=%s, Js=%s, E=%s)", kind, jump_rate, list(jump_rates), eps_range)
    return MARTINGALE_KINDS[kind](jump_rate, jump_rates, eps_range)


# ----------------------------------------------------------------------
# Batch and reference trajectories
# ----------------------------------------------------------------------

def jumper_trajectory_batch(us, J: float = DEFAULT_JUMP_RATE, E: float = DEFAULT_EPS_RANGE) -> numpy.ndarray:
    """log10 capitals of independent Simple Jumpers, one per row of us.

    Same normalized update as jumper_step, vectorized over streams.
    """
    _check_jump_rate(J)
    _check_eps_range(E)
    us = numpy.atleast_2d(numpy.asarray(us, dtype=float))
    if us.size and (us.min() < 0.0 or us.max() > 1.0):
        raise DomainError("PIT values must lie in [0, 1]")
    n_streams, n_steps = us.shape
    eps = numpy.array([-E, 0.0, E])
    weights = numpy.full((n_streams, 3), 1.0 / 3.0)
    log_capital = numpy.zeros(n_streams)
    out = numpy.empty((n_streams, n_steps))
    for t in range(n_steps):
        weights = (1.0 - J) * weights + J / 3.0
        weights *= 1.0 + eps * (us[:, t:t + 1] - 0.5)
        total = weights.sum(axis=1)
        weights /= total[:, None]
        log_capital += numpy.log10(total)
        out[:, t] = log_capital
    return out


def raw_jumper_trajectory(us: Iterable[float], J: float = DEFAULT_JUMP_RATE,
                          E: float = DEFAULT_EPS_RANGE) -> List[float]:
    """Unnormalized recursion on the raw C values; returns log10 S_n per step"""
    C = {-E: 1.0 / 3.0, 0.0: 1.0 / 3.0, E: 1.0 / 3.0}
    total = 1.0
    out = []
    for u in us:
        for eps in C:
            C[eps] = (1.0 - J) * C[eps] + (J / 3.0) * total
        for eps in C:
            C[eps] *= 1.0 + eps * (u - 0.5)
        total = sum(C.values())
        out.append(math.log10(total))
    return out
