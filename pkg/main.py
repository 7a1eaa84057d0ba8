# Betting Enhancer - command line front end
# Subcommands: generate, run, densities, selftest

import argparse
import logging
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy
from rich.console import Console
from rich.table import Table

from core.enhance import density_grid
from core.errors import BettingEnhancerError, ConfigError, InvariantError, ParameterError
from core.evalloss import ConstantPolicy, LossLedger, PiecewisePolicy, run_experiment
from core.forecast import GaussianForecast
from core.martingale import build_martingale
from core.selftest import GOLDEN_FILE, run_selftest
from core.settings import ExperimentConfig, load_config
from core.simgen import ChangepointSpec, block_means, generate
from utils.export import (read_dataset, read_dataset_header, write_dataset, write_grid_csv,
                          write_summary_json, write_trajectory_csv)

logger = logging.getLogger("betting_enhancer")
console = Console()

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_INVARIANT = 3

PANEL_EPS = {
    "1": (-1.0, -0.5, 0.0, 0.5, 1.0),
    "2": (-2.0, -1.0, 0.0, 1.0, 2.0),
}


def setup_logging(verbose: bool = False):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="[%(levelname)s] %(message)s",
        force=True,
    )


# ----------------------------------------------------------------------
# Experiment plumbing
# ----------------------------------------------------------------------

def load_observations(config: ExperimentConfig, seed: Optional[int] = None) -> Tuple[List[float], Optional[ChangepointSpec]]:
    """Dataset file when given, otherwise generated from the config's changepoint fields"""
    if config.dataset:
        values = read_dataset(config.dataset)
        try:
            spec = ChangepointSpec.from_description(read_dataset_header(config.dataset))
        except ParameterError:
            logger.warning("Dataset %s has no changepoint header; oracle falls back to the base forecast",
                           config.dataset)
            spec = None
        return values, spec
    spec = config.changepoint_spec(seed)
    return generate(spec), spec


def build_oracle(config: ExperimentConfig, spec: Optional[ChangepointSpec]):
    base = GaussianForecast(config.base_mean, config.base_sd)
    if config.oracle_before or config.oracle_after or config.oracle_changepoint is not None:
        before = GaussianForecast(*config.oracle_before) if config.oracle_before else base
        after = GaussianForecast(*config.oracle_after) if config.oracle_after else before
        changepoint = config.oracle_changepoint
        if changepoint is None:
            changepoint = spec.changepoint if spec else 0
        return PiecewisePolicy(changepoint, before, after), changepoint
    if spec is None:
        return ConstantPolicy(base), None
    return (PiecewisePolicy(spec.changepoint,
                            GaussianForecast(spec.mean_pre, spec.sd_pre),
                            GaussianForecast(spec.mean_post, spec.sd_post)),
            spec.changepoint)


def run_single(config: ExperimentConfig, seed: Optional[int] = None) -> LossLedger:
    """One experiment; raises InvariantError when the accounting does not close"""
    values, spec = load_observations(config, seed)
    if not values:
        raise ConfigError("the dataset is empty; nothing to run")
    oracle, changepoint = build_oracle(config, spec)
    martingale = build_martingale(config.martingale_kind, config.jump_rate,
                                  config.jump_rates, config.eps_range)
    ledger = run_experiment(values, ConstantPolicy(GaussianForecast(config.base_mean, config.base_sd)),
                            martingale, oracle, base10=config.loss_base10,
                            changepoint=changepoint)
    ledger.check_identity()
    floor = martingale.floor
    if floor > 0 and ledger.min_log10_capital < numpy.log10(floor) - 1e-12:
        raise InvariantError(f"mean jumper capital fell below its floor {floor}")
    return ledger


def _final_for_seed(args) -> Tuple[int, float]:
    config, seed = args
    return seed, run_single(config, seed).final_log10_capital


def run_seeds(config: ExperimentConfig) -> List[Tuple[int, float]]:
    """Final log10 capital for seeds seed .. seed + seeds - 1"""
    jobs = [(config, config.seed + k) for k in range(config.seeds)]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(_final_for_seed, jobs))
    return [_final_for_seed(j) for j in jobs]


def print_summary(summary: Dict):
    table = Table(title="Run summary")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    for key in ("steps", "final_log10_capital", "changepoint_capital", "min_log10_capital",
                "cum_base", "cum_enhanced", "cum_oracle", "degenerate_steps"):
        value = summary.get(key)
        table.add_row(key, "-" if value is None else (f"{value:.6g}" if isinstance(value, float) else str(value)))
    console.print(table)


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------

def cmd_generate(args) -> int:
    config = load_config(args.config, _overrides(args))
    spec = config.changepoint_spec()
    values = generate(spec)
    path = args.output or "dataset.txt"
    write_dataset(path, values, header=spec.describe())
    mean_pre, mean_post = block_means(values, spec.n_pre)
    console.print(f"[bold]{len(values)}[/bold] observations -> {path}")
    console.print(f"block means: pre={mean_pre:.4f} post={mean_post:.4f}")
    return EXIT_OK


def cmd_run(args) -> int:
    config = load_config(args.config, _overrides(args))
    ledger = run_single(config)
    summary = ledger.summary()
    summary["config"] = config.to_dict()

    if config.seeds > 1:
        if config.dataset:
            raise ConfigError("--seeds needs generated data, not a --dataset file")
        finals = run_seeds(config)
        summary["seeds"] = [{"seed": s, "final_log10_capital": v} for s, v in finals]
        summary["median_final_log10_capital"] = statistics.median(v for _, v in finals)
        console.print(f"median final log10 capital over {config.seeds} seeds: "
                      f"{summary['median_final_log10_capital']:.3f}")

    write_trajectory_csv(config.output, ledger.per_step)
    write_summary_json(config.summary_path(), summary)
    print_summary(summary)
    return EXIT_OK


def cmd_densities(args) -> int:
    eps_values = PANEL_EPS[args.panel] if args.eps is None else tuple(args.eps)
    base = GaussianForecast(args.base_mean, args.base_sd)
    ys = numpy.linspace(args.y_min, args.y_max, args.points)
    grid = density_grid(base, eps_values, ys)
    header = ["y"] + [f"eps={e:g}" for e in eps_values]
    rows = (numpy.column_stack([ys, grid.T])).tolist()
    write_grid_csv(args.output or "densities.csv", header, rows)
    return EXIT_OK


def cmd_selftest(args) -> int:
    ok = run_selftest(golden_path=args.golden or GOLDEN_FILE, console=console)
    if ok:
        logger.info("All self-test checks passed")
        return EXIT_OK
    return EXIT_INVARIANT


# ----------------------------------------------------------------------
# Argument parsing
# ----------------------------------------------------------------------

def _overrides(args) -> Dict:
    names = ("dataset", "n_pre", "n_post", "mean_pre", "sd_pre", "mean_post", "sd_post", "seed",
             "martingale_kind", "jump_rate", "jump_rates", "eps_range", "base_mean", "base_sd",
             "oracle_changepoint", "oracle_before", "oracle_after", "loss_base10", "output",
             "summary", "seeds", "jobs")
    return {n: getattr(args, n) for n in names if getattr(args, n, None) is not None}


def _add_dataset_flags(p):
    p.add_argument("--n-pre", type=int)
    p.add_argument("--n-post", type=int)
    p.add_argument("--mean-pre", type=float)
    p.add_argument("--sd-pre", type=float)
    p.add_argument("--mean-post", type=float)
    p.add_argument("--sd-post", type=float)
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="betting-enhancer",
        description="Test a probabilistic forecaster by betting against it and enhance it with the winnings.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a changepoint dataset")
    gen.add_argument("--config", help="JSON config file")
    _add_dataset_flags(gen)
    gen.add_argument("--output", help="dataset path (default dataset.txt)")
    gen.set_defaults(func=cmd_generate)

    run = sub.add_parser("run", help="run base / enhanced / oracle forecasters over a dataset")
    run.add_argument("--config", help="JSON config file")
    run.add_argument("--dataset", help="dataset file written by `generate`")
    _add_dataset_flags(run)
    run.add_argument("--martingale-kind", choices=("simple", "mean"))
    run.add_argument("--jump-rate", type=float, help="J of the Simple Jumper")
    run.add_argument("--jump-rates", type=float, nargs="+", help="jump rate set of the Mean Jumper")
    run.add_argument("--eps-range", type=float, help="E, bets are on eps in {-E, 0, E}")
    run.add_argument("--base-mean", type=float)
    run.add_argument("--base-sd", type=float)
    run.add_argument("--oracle-changepoint", type=int)
    run.add_argument("--oracle-before", type=float, nargs=2, metavar=("MEAN", "SD"))
    run.add_argument("--oracle-after", type=float, nargs=2, metavar=("MEAN", "SD"))
    losses = run.add_mutually_exclusive_group()
    losses.add_argument("--loss-base10", dest="loss_base10", action="store_true", default=None)
    losses.add_argument("--loss-natural", dest="loss_base10", action="store_false")
    run.add_argument("--output", help="trajectory CSV path")
    run.add_argument("--summary", help="summary JSON path (default: output with .json)")
    run.add_argument("--seeds", type=int, help="multi-seed summary over this many seeds")
    run.add_argument("--jobs", type=int, help="worker processes for --seeds")
    run.set_defaults(func=cmd_run)

    dens = sub.add_parser("densities", help="enhanced density curves on a grid")
    dens.add_argument("--panel", choices=sorted(PANEL_EPS), default="1")
    dens.add_argument("--eps", type=float, nargs="+", help="explicit eps values")
    dens.add_argument("--base-mean", type=float, default=0.0)
    dens.add_argument("--base-sd", type=float, default=1.0)
    dens.add_argument("--y-min", type=float, default=-4.0)
    dens.add_argument("--y-max", type=float, default=4.0)
    dens.add_argument("--points", type=int, default=401)
    dens.add_argument("--output", help="CSV path (default densities.csv)")
    dens.set_defaults(func=cmd_densities)

    test = sub.add_parser("selftest", help="run the built-in invariant checks")
    test.add_argument("--golden", help="generator golden file")
    test.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.func(args)
    except (ConfigError, ParameterError) as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    except InvariantError as e:
        logger.error("Invariant violated: %s", e)
        return EXIT_INVARIANT
    except BettingEnhancerError as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    except OSError as e:
        logger.error("I/O failure: %s", e)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
