# file: core/simgen.py
"""
Deterministic data for the changepoint study and for fuzzing.

The core generator is xoshiro256++ seeded through splitmix64. Uniforms take
the top 53 bits of each draw and Gaussians are the inverse normal cdf of
those uniforms, so every stream is a pure function of the seed.
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy

from core.errors import ParameterError
from core.forecast import gaussian_quantile

logger = logging.getLogger(__name__)

MASK64 = 0xFFFFFFFFFFFFFFFF
TWO_POW_53 = float(1 << 53)
DEFAULT_SEED = 2021


def rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def splitmix64(state: int) -> Tuple[int, int]:
    """One splitmix64 step: returns (new_state, output)"""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


class Xoshiro256pp:
    """xoshiro256++ with a splitmix64-expanded 64-bit seed"""

    def __init__(self, seed: int = DEFAULT_SEED):
        if not 0 <= seed <= MASK64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.s = [0] * 4
        sm = seed
        for i in range(4):
            sm, self.s[i] = splitmix64(sm)

    def next_u64(self) -> int:
        s = self.s
        result = (rotl((s[0] + s[3]) & MASK64, 23) + s[0]) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        return result

    def next_double(self) -> float:
        """Uniform in [0, 1) from the top 53 bits"""
        return (self.next_u64() >> 11) / TWO_POW_53

    def next_gaussian(self, mean: float = 0.0, sd: float = 1.0) -> float:
        u = self.next_double()
        while u == 0.0:
            u = self.next_double()
        return mean + sd * gaussian_quantile(u)


@dataclass(frozen=True)
class ChangepointSpec:
    n_pre: int = 1000
    n_post: int = 1000
    mean_pre: float = 0.0
    sd_pre: float = 1.0
    mean_post: float = 1.0
    sd_post: float = 1.0
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.n_pre < 0 or self.n_post < 0:
            raise ParameterError(f"block sizes must be nonnegative, got {self.n_pre}, {self.n_post}")
        if not (self.sd_pre > 0 and self.sd_post > 0):
            raise ParameterError(f"standard deviations must be positive, got {self.sd_pre}, {self.sd_post}")
        if not 0 <= self.seed <= MASK64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def changepoint(self) -> int:
        return self.n_pre

    def describe(self) -> str:
        return (f"n_pre={self.n_pre} n_post={self.n_post} mean_pre={self.mean_pre!r} "
                f"sd_pre={self.sd_pre!r} mean_post={self.mean_post!r} sd_post={self.sd_post!r} "
                f"seed={self.seed}")

    @classmethod
    def from_description(cls, text: str) -> "ChangepointSpec":
        """Inverse of describe(); raises ParameterError on anything else"""
        try:
            pairs = dict(token.split("=", 1) for token in text.split())
            return cls(
                n_pre=int(pairs["n_pre"]), n_post=int(pairs["n_post"]),
                mean_pre=float(pairs["mean_pre"]), sd_pre=float(pairs["sd_pre"]),
                mean_post=float(pairs["mean_post"]), sd_post=float(pairs["sd_post"]),
                seed=int(pairs["seed"]),
            )
        except (KeyError, ValueError) as e:
            raise ParameterError(f"not a changepoint description: {text!r}") from e


def generate(spec: ChangepointSpec) -> List[float]:
    """n_pre draws from the first Gaussian followed by n_post from the second"""
    rng = Xoshiro256pp(spec.seed)
    values = [rng.next_gaussian(spec.mean_pre, spec.sd_pre) for _ in range(spec.n_pre)]
    values += [rng.next_gaussian(spec.mean_post, spec.sd_post) for _ in range(spec.n_post)]
    logger.debug("Generated %d observations (%s)", len(values), spec.describe())
    return values


def uniform_stream(seed: int, n: int) -> List[float]:
    if n < 0:
        raise ParameterError(f"stream length must be nonnegative, got {n}")
    rng = Xoshiro256pp(seed)
    return [rng.next_double() for _ in range(n)]


def block_means(values, n_pre: int) -> Tuple[float, float]:
    """Sample means of the two blocks (nan for an empty block)"""
    arr = numpy.asarray(values, dtype=float)
    pre, post = arr[:n_pre], arr[n_pre:]
    return (float(pre.mean()) if pre.size else float("nan"),
            float(post.mean()) if post.size else float("nan"))
