# file: core/selftest.py
"""
Quick self-check of the numerical core, run by `main.py selftest`.

Each check returns (passed, detail). The report lists every check by name so
a failure points at the piece that broke.
"""

import logging
import math
import os
from typing import Callable, List, Tuple

from rich.console import Console
from rich.table import Table
from scipy import stats

from core.enhance import betting_quantile, enhance
from core.evalloss import ConstantPolicy, PiecewisePolicy, run_experiment
from core.forecast import GaussianForecast, pit
from core.martingale import (BettingLine, MeanJumper, SimpleJumper, jumper_init,
                             jumper_step, raw_jumper_trajectory)
from core.simgen import ChangepointSpec, Xoshiro256pp, generate, uniform_stream
from utils.export import format_float
from utils.numerics import NumericTools

logger = logging.getLogger(__name__)

GOLDEN_FILE = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                           "assets", "golden_seed2021.txt")
GOLDEN_SEED = 2021

CheckResult = Tuple[bool, str]


def check_hand_trace() -> CheckResult:
    """S_2 = 1.165 for u = 1, 1 with J = 0.01, E = 1"""
    state = jumper_init(0.01, 1.0)
    state, s1 = jumper_step(state, 1.0)
    state, s2 = jumper_step(state, 1.0)
    ok = abs(s1 - 1.0) <= 1e-12 and abs(s2 - 1.165) <= 1e-12
    return ok, f"S_1={s1:.15f} S_2={s2:.15f}"


def check_raw_equivalence(n_streams: int = 200, length: int = 100) -> CheckResult:
    worst = 0.0
    for k in range(n_streams):
        us = uniform_stream(10_000 + k, length)
        raw = raw_jumper_trajectory(us, 0.01, 1.0)
        state = jumper_init(0.01, 1.0)
        for u, expected in zip(us, raw):
            state, _ = jumper_step(state, u)
            worst = max(worst, abs(state.log10_capital - expected))
    return worst <= 1e-9, f"max |log10 diff| = {worst:.3e} over {n_streams} streams"


def check_normalization() -> CheckResult:
    base = GaussianForecast(0.0, 1.0)
    worst = 0.0
    for eps in (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0):
        e = enhance(base, BettingLine(eps))
        total = NumericTools.integrate(e.density, -10.0, 10.0, tol=1e-10)
        worst = max(worst, abs(total - 1.0))
    return worst <= 1e-8, f"max |integral - 1| = {worst:.3e}"


def check_median_closed_form() -> CheckResult:
    worst = 0.0
    for i in range(1, 21):
        eps = -2.0 + 0.2 * i if i != 10 else 0.5
        closed = (eps - 2.0 + math.sqrt(eps * eps + 4.0)) / (2.0 * eps)
        worst = max(worst, abs(betting_quantile(BettingLine(eps), 0.5) - closed))
    return worst <= 1e-12, f"max |v - closed form| = {worst:.3e}"


def check_likelihood_ratio_identity() -> CheckResult:
    spec = ChangepointSpec()
    values = generate(spec)
    worst = 0.0
    for martingale in (SimpleJumper(0.01, 1.0), MeanJumper((0.001, 0.01, 0.1, 1.0), 1.0)):
        oracle = PiecewisePolicy(spec.changepoint, GaussianForecast(0.0, 1.0), GaussianForecast(1.0, 1.0))
        ledger = run_experiment(values, ConstantPolicy(), martingale, oracle)
        gap = 0.0
        for row in ledger.per_step:
            gap += row.loss_base - row.loss_enhanced
            worst = max(worst, abs(gap - row.log10_capital))
    return worst <= 1e-9, f"max |loss gap - log10 capital| = {worst:.3e}"


def check_mean_jumper_floor() -> CheckResult:
    streams = {
        "zeros": [0.0] * 500,
        "ones": [1.0] * 500,
        "alternating": [float(i % 2) for i in range(500)],
        "uniform": uniform_stream(7, 500),
    }
    lowest = math.inf
    for us in streams.values():
        mj = MeanJumper((0.001, 0.01, 0.1, 1.0), 1.0)
        for u in us:
            lowest = min(lowest, mj.update(u))
    return lowest >= 0.25 - 1e-12, f"min capital = {lowest:.6f}"


def check_golden_file(path: str = GOLDEN_FILE) -> CheckResult:
    try:
        with open(path, "r", encoding="utf-8") as f:
            expected = [line.strip() for line in f if line.strip() and not line.startswith("#")]
    except OSError as e:
        return False, f"cannot read {path}: {e}"
    rng = Xoshiro256pp(GOLDEN_SEED)
    actual = []
    for _ in range(len(expected)):
        raw = rng.next_u64()
        actual.append(f"{raw} {format_float((raw >> 11) / float(1 << 53))}")
    ok = len(expected) == 20 and actual == expected
    mismatch = next((i for i, (a, b) in enumerate(zip(actual, expected)) if a != b), None)
    detail = "20 draws match" if ok else f"mismatch at draw {mismatch} ({len(expected)} lines)"
    return ok, detail


def check_pit_uniformity(n: int = 20_000) -> CheckResult:
    rng = Xoshiro256pp(99)
    forecast = GaussianForecast(0.0, 1.0)
    us = [pit(forecast, rng.next_gaussian()) for _ in range(n)]
    d = stats.kstest(us, "uniform").statistic
    crit = NumericTools.ks_critical(n)
    return d < crit, f"KS = {d:.5f} < {crit:.5f}"


CHECKS: List[Tuple[str, Callable[[], CheckResult]]] = [
    ("hand_trace_S2", check_hand_trace),
    ("raw_equivalence", check_raw_equivalence),
    ("enhanced_normalization", check_normalization),
    ("median_closed_form", check_median_closed_form),
    ("likelihood_ratio_identity", check_likelihood_ratio_identity),
    ("mean_jumper_floor", check_mean_jumper_floor),
    ("golden_file", check_golden_file),
    ("pit_uniformity", check_pit_uniformity),
]


def run_selftest(golden_path: str = GOLDEN_FILE, console: Console = None) -> bool:
    """Run every check and print a report; True iff all pass"""
    console = console or Console()
    table = Table(title="Self-test")
    table.add_column("check")
    table.add_column("result")
    table.add_column("detail")

    all_ok = True
    for name, check in CHECKS:
        try:
            ok, detail = check_golden_file(golden_path) if name == "golden_file" else check()
        except Exception as e:
            ok, detail = False, f"raised {e!r}"
        all_ok &= ok
        if not ok:
            logger.error("Check failed: %s (%s)", name, detail)
        table.add_row(name, "✅ pass" if ok else "❌ FAIL", detail)

    console.print(table)
    return all_ok
