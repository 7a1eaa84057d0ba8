# tests/conftest.py

import sys
from pathlib import Path

import pytest

# Add project root to Python path
project_root = str(Path(__file__).parent.parent)
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from core.simgen import ChangepointSpec, generate, uniform_stream  # noqa: E402


@pytest.fixture(scope="session")
def study_spec():
    return ChangepointSpec(n_pre=1000, n_post=1000, mean_pre=0.0, sd_pre=1.0,
                           mean_post=1.0, sd_post=1.0, seed=2021)


@pytest.fixture(scope="session")
def study_dataset(study_spec):
    return generate(study_spec)


def adversarial_streams(n: int = 2000, count: int = 100):
    """Mixtures of uniform and adversarial PIT values, deterministic"""
    streams = [[0.0] * n, [1.0] * n, [float(i % 2) for i in range(n)]]
    for k in range(count - len(streams)):
        us = uniform_stream(500 + k, n)
        mode = k % 4
        if mode == 1:
            us = [u * u for u in us]
        elif mode == 2:
            us = [1.0 - u * u for u in us]
        elif mode == 3:
            half = n // 2
            us = [0.0 if u < 0.5 else 1.0 for u in us[:half]] + us[half:]
        streams.append(us)
    return streams


@pytest.fixture(scope="session")
def fuzz_streams():
    return adversarial_streams()
