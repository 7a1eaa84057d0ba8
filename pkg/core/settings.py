# file: core/settings.py
"""Experiment configuration: defaults, JSON config file, environment, flags"""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional, Tuple

from core.errors import ConfigError, ParameterError
from core.simgen import ChangepointSpec, MASK64

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "BETTING_ENHANCER_SEED"


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: Optional[str] = None
    n_pre: int = 1000
    n_post: int = 1000
    mean_pre: float = 0.0
    sd_pre: float = 1.0
    mean_post: float = 1.0
    sd_post: float = 1.0
    seed: int = 2021
    martingale_kind: str = "simple"
    jump_rate: float = 0.01
    jump_rates: Tuple[float, ...] = (0.001, 0.01, 0.1, 1.0)
    eps_range: float = 1.0
    base_mean: float = 0.0
    base_sd: float = 1.0
    # None: the oracle follows the generating changepoint spec
    oracle_changepoint: Optional[int] = None
    oracle_before: Optional[Tuple[float, float]] = None
    oracle_after: Optional[Tuple[float, float]] = None
    loss_base10: bool = True
    output: str = "trajectory.csv"
    summary: Optional[str] = None
    seeds: int = 1
    jobs: int = 1

    def validate(self) -> "ExperimentConfig":
        for name in sorted(_INT_FIELDS):
            value = getattr(self, name)
            if value is not None and (isinstance(value, bool) or not isinstance(value, int)):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if self.martingale_kind not in ("simple", "mean"):
            raise ConfigError(f"martingale_kind must be 'simple' or 'mean', got {self.martingale_kind!r}")
        if not 0.0 < self.jump_rate <= 1.0:
            raise ConfigError(f"jump_rate must lie in (0, 1], got {self.jump_rate!r}")
        if not self.jump_rates or any(not 0.0 < J <= 1.0 for J in self.jump_rates):
            raise ConfigError(f"jump_rates must be a nonempty list in (0, 1], got {list(self.jump_rates)}")
        if self.martingale_kind == "mean" and 1.0 not in self.jump_rates:
            raise ConfigError("jump_rates must include 1 for the mean jumper")
        if not 0.0 < self.eps_range <= 2.0:
            raise ConfigError(f"eps_range must lie in (0, 2], got {self.eps_range!r}")
        if not (self.base_sd > 0 and math.isfinite(self.base_mean)):
            raise ConfigError(f"base forecast N({self.base_mean}, {self.base_sd}) is invalid")
        for name in ("oracle_before", "oracle_after"):
            pair = getattr(self, name)
            if pair is not None and (len(pair) != 2 or not pair[1] > 0):
                raise ConfigError(f"{name} must be [mean, sd] with sd > 0, got {pair}")
        if self.oracle_changepoint is not None and self.oracle_changepoint < 0:
            raise ConfigError(f"oracle_changepoint must be nonnegative, got {self.oracle_changepoint}")
        if self.seeds < 1 or self.jobs < 1:
            raise ConfigError("seeds and jobs must be positive")
        if self.dataset is None:
            try:
                self.changepoint_spec()
            except ParameterError as e:
                raise ConfigError(str(e)) from e
        return self

    def changepoint_spec(self, seed: Optional[int] = None) -> ChangepointSpec:
        return ChangepointSpec(
            n_pre=self.n_pre, n_post=self.n_post,
            mean_pre=self.mean_pre, sd_pre=self.sd_pre,
            mean_post=self.mean_post, sd_post=self.sd_post,
            seed=self.seed if seed is None else seed,
        )

    def summary_path(self) -> str:
        if self.summary:
            return self.summary
        root, _ = os.path.splitext(self.output)
        return root + ".json"

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["jump_rates"] = list(self.jump_rates)
        return d


_TUPLE_FIELDS = {"jump_rates", "oracle_before", "oracle_after"}
_INT_FIELDS = {"n_pre", "n_post", "seed", "seeds", "jobs", "oracle_changepoint"}
_FLOAT_FIELDS = {"mean_pre", "sd_pre", "mean_post", "sd_post", "jump_rate", "eps_range",
                 "base_mean", "base_sd"}
_STR_FIELDS = {"dataset", "martingale_kind", "output", "summary"}
_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}


def _as_int(key: str, value: Any) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise ConfigError(f"{key} must be an integer, got {value!r}")


def _as_float(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key} must be a finite number, got {value!r}")
    return float(value)


def coerce_setting(key: str, value: Any) -> Any:
    """Value converted to the field's type; ConfigError when it cannot be"""
    if value is None:
        return None
    if key in _INT_FIELDS:
        return _as_int(key, value)
    if key in _FLOAT_FIELDS:
        return _as_float(key, value)
    if key in _TUPLE_FIELDS:
        if isinstance(value, (str, bytes)) or not hasattr(value, "__iter__"):
            raise ConfigError(f"{key} must be a list of numbers, got {value!r}")
        return tuple(_as_float(key, v) for v in value)
    if key in _STR_FIELDS and not isinstance(value, str):
        raise ConfigError(f"{key} must be a string, got {value!r}")
    if key == "loss_base10" and not isinstance(value, bool):
        raise ConfigError(f"loss_base10 must be true or false, got {value!r}")
    return value


class SettingsManager:
    """Layers config sources: defaults, JSON file, environment, explicit flags"""

    def __init__(self):
        self.settings: Dict[str, Any] = {}
        self.load_defaults()

    def load_defaults(self):
        """Load default settings"""
        self.settings = ExperimentConfig().to_dict()

    def get(self, key, default=None):
        return self.settings.get(key, default)

    def set(self, key, value):
        if key not in _FIELD_NAMES:
            raise ConfigError(f"unknown configuration key {key!r}")
        self.settings[key] = coerce_setting(key, value)

    def load_file(self, path: str):
        """Merge a JSON config file; keys are the ExperimentConfig field names"""
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except OSError as e:
            raise ConfigError(f"could not read config file {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        for key, value in data.items():
            self.set(key.replace("-", "_"), value)
        logger.debug("Loaded config file %s", path)

    def load_environment(self, environ=None):
        environ = os.environ if environ is None else environ
        raw = environ.get(SEED_ENV_VAR)
        if raw is None or raw == "":
            return
        try:
            seed = int(raw, 0)
        except ValueError as e:
            raise ConfigError(f"{SEED_ENV_VAR}={raw!r} is not an integer") from e
        if not 0 <= seed <= MASK64:
            raise ConfigError(f"{SEED_ENV_VAR}={raw!r} is not a 64-bit unsigned integer")
        logger.debug("Seed overridden from environment: %d", seed)
        self.settings["seed"] = seed

    def apply_overrides(self, overrides: Dict[str, Any]):
        for key, value in overrides.items():
            if value is not None:
                self.set(key, value)

    def build(self) -> ExperimentConfig:
        try:
            return ExperimentConfig(**self.settings).validate()
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid configuration: {e}") from e


def load_config(config_file: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None,
                environ=None) -> ExperimentConfig:
    manager = SettingsManager()
    if config_file:
        manager.load_file(config_file)
    manager.load_environment(environ)
    manager.apply_overrides(overrides or {})
    return manager.build()
