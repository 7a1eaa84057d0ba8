# file: core/errors.py

class BettingEnhancerError(Exception):
    """Base class for every error raised by the library"""


class ParameterError(BettingEnhancerError, ValueError):
    """A jump rate, epsilon range or dataset parameter is out of range"""


class DomainError(BettingEnhancerError, ValueError):
    """A value handed to a distribution or martingale is outside its domain"""


class ConfigError(BettingEnhancerError):
    """Experiment configuration could not be parsed or validated"""


class InvariantError(BettingEnhancerError):
    """A post-run invariant (likelihood-ratio identity, floor) does not hold"""
