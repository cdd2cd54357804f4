"""
Command Line Module

This module handles the pairwords command: argument parsing, validation
of the run configuration, dispatch to the engines and emission of the
result tables as CSV or JSON.

Exit codes: 0 on success, 2 on argument or domain errors, 1 when a
computation is refused (budget) or fails to converge.
"""

import argparse
import logging
import math
import re
import sys
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from pairwords import __version__
from pairwords.core import asymptotics, exactgf, limit_law, montecarlo
from pairwords.core.genfunc import avoidance_gf
from pairwords.core.geometric import GeomParams
from pairwords.core.series import algorithm1_series
from pairwords.core.transfer import Letter, LetterPair, PairSet, avoid_prob_matrix
from pairwords.exceptions import BudgetExceededError, ConvergenceError, DomainError
from pairwords.utils.config_loader import select_config_dir
from pairwords.utils.logger import setup_logging
from pairwords.utils.output import Table, emit, error_document

logger = logging.getLogger(__name__)

_PAIR = re.compile(r"\(\s*([A-Za-z_]\w*|\d+)\s*,\s*([A-Za-z_]\w*|\d+)\s*\)")
_SEPARATOR = re.compile(r"\s*,\s*")


def parse_pairs(text: str) -> PairSet:
    """
    Parse '(1,1),(2,3)' into a PairSet.

    Integers are letter indices, names are symbolic letters. Whitespace is
    ignored; duplicates and stray characters are rejected.
    """
    pairs: List[LetterPair] = []
    position = 0
    for number, match in enumerate(_PAIR.finditer(text)):
        gap = text[position : match.start()]
        expected = _SEPARATOR.fullmatch(gap) if number else not gap.strip()
        if not expected:
            raise DomainError(f"cannot parse pair list near {gap!r}")
        pair = (_letter(match.group(1)), _letter(match.group(2)))
        if pair in pairs:
            raise DomainError(f"duplicate pair ({pair[0]},{pair[1]})")
        pairs.append(pair)
        position = match.end()
    if not pairs or text[position:].strip():
        raise DomainError(f"cannot parse pair list {text!r}")
    return PairSet.of(*pairs)


def _letter(token: str) -> Letter:
    return int(token) if token.isdigit() else token


def parse_grid(text: str) -> List[float]:
    """'a:b:step' -> [a, a+step, ..., b] (b included when on the grid)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise DomainError(f"grid must look like a:b:step, got {text!r}")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError:
        raise DomainError(f"grid bounds and step must be numbers, got {text!r}")
    if step <= 0 or stop < start:
        raise DomainError(f"grid {text!r} needs step > 0 and a <= b")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + k * step for k in range(count)]


def _length(text: str) -> int:
    """Word lengths accept scientific notation such as 1e6."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid length {text!r}")
    if value != int(value):
        raise argparse.ArgumentTypeError(f"length must be an integer, got {text!r}")
    return int(value)


class RunConfig(BaseModel):
    """Validated options of one invocation."""

    model_config = ConfigDict(extra="forbid")

    command: str
    action: Optional[str] = None
    p: Optional[float] = Field(None, gt=0.0, lt=1.0)
    n: List[int] = Field(default_factory=list)
    words: Optional[int] = Field(None, ge=2)
    seed: Optional[int] = Field(None, ge=0)
    workers: Optional[int] = Field(None, ge=1)
    tol: Optional[float] = Field(None, gt=0.0)
    stat: Literal["x1", "x2", "x3"] = "x1"
    order: Optional[int] = Field(None, ge=0)
    pairs: Optional[str] = None
    gf: bool = False
    p_symbolic: bool = False
    eta_grid: Optional[str] = None
    q_grid: Optional[str] = None
    format: Literal["csv", "json"] = "csv"
    output: Optional[str] = None
    log_level: Optional[str] = None
    config_dir: Optional[str] = None

    @model_validator(mode="after")
    def _check_lengths(self) -> "RunConfig":
        if any(n < 0 for n in self.n):
            raise ValueError("word lengths must be >= 0")
        if self.command in ("simulate", "compare") and self.seed is None:
            raise ValueError("--seed is required for simulate and compare")
        return self

    @property
    def params(self) -> GeomParams:
        if self.p is None:
            raise DomainError("--p is required")
        return GeomParams(p=self.p)


# Subcommands


def run_simulate(config: RunConfig) -> Table:
    params = config.params
    words = config.words or 50_000
    table = Table(
        ["n", "N", "stat", "mean", "variance", "std_error", "clamped"],
        inputs={"p": params.p, "n": config.n, "words": words, "workers": config.workers},
        seed=config.seed,
    )
    for n in config.n:
        result = montecarlo.simulate(params, n, words, config.seed or 0, config.workers)
        for stat in montecarlo.STATISTICS:
            table.add(
                n=n,
                N=words,
                stat=stat,
                mean=result.mean(stat),
                variance=result.variance(stat),
                std_error=result.standard_error(stat),
                clamped=result.clamped,
            )
    return table


def run_exact(config: RunConfig) -> Table:
    params = config.params
    if config.action == "mean":
        table = Table(
            ["n", "ex1", "ex3", "ex2", "tail_bound", "terms"],
            inputs={"p": params.p, "n": config.n, "tol": config.tol},
        )
        for n in config.n:
            res = exactgf.mean_total(params, n, config.tol)
            table.add(
                n=n,
                ex1=res.parts["diagonal"],
                ex3=res.parts["off_diagonal"],
                ex2=res.value,
                tail_bound=res.tail_bound,
                terms=res.terms_used,
            )
    else:
        table = Table(
            ["n", "ex2", "ex2_squared", "var_x2", "tail_bound", "terms"],
            inputs={"p": params.p, "n": config.n, "tol": config.tol},
        )
        for n in config.n:
            first = exactgf.mean_total(params, n, config.tol)
            second = exactgf.second_moment_total(params, n, config.tol)
            table.add(
                n=n,
                ex2=first.value,
                ex2_squared=second.value,
                var_x2=second.value - first.value**2,
                tail_bound=second.tail_bound + 2 * first.value * first.tail_bound,
                terms=second.terms_used,
            )
    table.tail_bound = max((row["tail_bound"] for row in table.rows), default=0.0)
    return table


_MEANS = {"x1": asymptotics.mean_x1, "x2": asymptotics.mean_x2, "x3": asymptotics.mean_x3}
_VARIANCES = {"x1": asymptotics.var_x1, "x2": asymptotics.var_x2, "x3": asymptotics.var_x3}


def run_asymptotic(config: RunConfig) -> Table:
    params = config.params
    table = Table(
        ["n", "stat", "quantity", "value", "smooth", "periodic", "tail_bound", "terms"],
        inputs={"p": params.p, "n": config.n, "stat": config.stat, "order": config.order},
    )
    for n in config.n:
        if n <= 0:
            raise DomainError("asymptotic formulas need n >= 1")
        if config.action == "mean":
            value = _MEANS[config.stat](n, params, config.tol)
            quantity = "mean"
        elif config.action == "var":
            value = _VARIANCES[config.stat](n, params, config.tol)
            quantity = "variance"
        else:
            if config.stat != "x1":
                raise DomainError("cumulants are available for x1 only")
            if not config.order:
                raise DomainError("--order m >= 1 is required for cumulant")
            value = asymptotics.cumulant(n, config.order, params, config.tol)
            quantity = f"cumulant_{config.order}"
        table.add(
            n=n,
            stat=config.stat,
            quantity=quantity,
            value=value.value,
            smooth=value.smooth,
            periodic=value.periodic,
            tail_bound=value.truncation_bound,
            terms=value.terms,
        )
    if table.rows:
        table.periodic_part = table.rows[-1]["periodic"]
        table.tail_bound = max(row["tail_bound"] for row in table.rows)
    return table


def run_avoid(config: RunConfig) -> Table:
    params = config.params
    pairs = parse_pairs(config.pairs or "")
    columns = ["n", "probability", "tail_bound"]
    inputs: Dict[str, Any] = {"p": params.p, "pairs": str(pairs), "n": config.n}
    gf = None
    if config.gf:
        gf = avoidance_gf(params, pairs)
        columns.insert(2, "gf_coefficient")
        inputs["gf_numerator"] = list(gf.numerator)
        inputs["gf_denominator"] = list(gf.denominator)
    table = Table(columns, inputs=inputs, tail_bound=0.0)
    for n in config.n:
        row: Dict[str, Any] = {
            "n": n,
            "probability": avoid_prob_matrix(params, pairs, n),
            "tail_bound": 0.0,
        }
        if gf is not None:
            row["gf_coefficient"] = float(gf.coefficient(n))
        table.add(**row)
    return table


def run_series(config: RunConfig) -> Table:
    pairs = parse_pairs(config.pairs or "")
    order = config.order if config.order is not None else 4
    result = algorithm1_series(pairs, order)
    numeric = (
        config.p is not None and not config.p_symbolic and not pairs.is_symbolic()
    )
    columns = ["quantity", "expression"] + (["value"] if numeric else [])
    table = Table(
        columns,
        inputs={"pairs": str(pairs), "order": order, "p": None if not numeric else config.p},
        tail_bound=None,
    )
    for name, series in (("lambda", result.lambda1), ("C", result.c1)):
        row: Dict[str, Any] = {"quantity": name, "expression": f"{name} = {series.to_string()}"}
        if numeric:
            params = config.params
            row["value"] = float(
                series.evaluate({j: params.letter_prob(int(j)) for j in pairs.letters})
            )
        table.add(**row)
    return table


def _eta_grid(config: RunConfig) -> List[float]:
    return parse_grid(config.eta_grid or "-3:3:0.25")


def _x3_grid(n: int, params: GeomParams) -> List[int]:
    law = limit_law.gaussian_x3(n, params)
    lo, hi = law.ppf(1e-4), law.ppf(1.0 - 1e-4)
    return list(range(int(math.floor(lo)), int(math.ceil(hi)) + 1))


def run_dist(config: RunConfig) -> Table:
    params = config.params
    if config.action == "x1":
        table = Table(
            ["n", "eta", "value", "f", "F"],
            inputs={"p": params.p, "n": config.n, "tol": config.tol},
            tail_bound=config.tol,
        )
        for n in config.n:
            mid = limit_law.centre(params, n) if n > 0 else math.nan
            for eta in _eta_grid(config):
                table.add(
                    n=n,
                    eta=eta,
                    value=mid + eta,
                    f=limit_law.limit_density_f(params, eta, config.tol),
                    F=limit_law.limit_cdf_F(params, eta, config.tol),
                )
        return table

    table = Table(["n", "value", "density", "cdf"], inputs={"p": params.p, "n": config.n})
    for n in config.n:
        law = limit_law.gaussian_x3(n, params)
        for value in _x3_grid(n, params):
            table.add(n=n, value=value, density=float(law.pdf(value)), cdf=float(law.cdf(value)))
    return table


def run_compare(config: RunConfig) -> Table:
    params = config.params
    words = config.words or 50_000
    table = Table(
        [
            "n",
            "stat",
            "theory_mean",
            "sim_mean",
            "theory_var",
            "sim_var",
            "tolerance",
            "tail_bound",
        ],
        inputs={"p": params.p, "n": config.n, "words": words},
        seed=config.seed,
    )
    for n in config.n:
        result = montecarlo.simulate(params, n, words, config.seed or 0, config.workers)
        for stat in montecarlo.STATISTICS:
            mean = _MEANS[stat](n, params, config.tol)
            var = _VARIANCES[stat](n, params, config.tol)
            table.add(
                n=n,
                stat=stat,
                theory_mean=mean.value,
                sim_mean=result.mean(stat),
                theory_var=var.value,
                sim_var=result.variance(stat),
                tolerance=5.0 * math.sqrt(max(var.value, 0.0) / words),
                tail_bound=mean.truncation_bound + var.truncation_bound,
            )
    return table


def _simulated(config: RunConfig, params: GeomParams, n: int) -> Optional[montecarlo.SimResult]:
    if config.words is None or config.seed is None:
        return None
    return montecarlo.simulate(params, n, config.words, config.seed, config.workers)


def run_figure(config: RunConfig) -> Table:
    params = GeomParams(p=config.p) if config.p is not None else None
    if config.action == "f2":
        if config.q_grid:
            grid = parse_grid(config.q_grid)
        else:
            grid = [float(q) for q in np.linspace(0.001, 0.999, 50)]
        table = Table(["q", "value", "small_q_limit", "large_q_limit"], inputs={"q": grid})
        for q in grid:
            value = 2.0 * (1.0 - q) * asymptotics.F1_prime_at_0(GeomParams(p=1.0 - q))
            table.add(
                q=q, value=value, small_q_limit=2 * math.log(2), large_q_limit=4 * math.log(2)
            )
        return table

    if params is None:
        raise DomainError("--p is required")
    n = config.n[0] if config.n else 10_000
    simulated = _simulated(config, params, n)
    table = Table(
        ["value", "empirical", "theory"],
        inputs={"p": params.p, "n": n, "words": config.words},
        seed=config.seed,
    )
    which = "x1" if config.action == "f1" else "x3"
    if simulated is not None:
        for row in montecarlo.histogram_vs_density(simulated, which, params, config.tol):
            table.add(**row)
        return table
    if which == "x1":
        mid = limit_law.centre(params, n)
        for eta in _eta_grid(config):
            table.add(value=mid + eta, theory=limit_law.limit_density_f(params, eta, config.tol))
    else:
        law = limit_law.gaussian_x3(n, params)
        for value in _x3_grid(n, params):
            table.add(value=value, theory=float(law.pdf(value)))
    return table


HANDLERS: Dict[str, Callable[[RunConfig], Table]] = {
    "simulate": run_simulate,
    "exact": run_exact,
    "asymptotic": run_asymptotic,
    "avoid": run_avoid,
    "series": run_series,
    "dist": run_dist,
    "compare": run_compare,
    "figure": run_figure,
}


# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--output", help="Write the table to PATH instead of stdout")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--config-dir", help="Directory holding pairwords_config.yaml")
    common.add_argument("--tol", type=float, help="Truncation tolerance")

    parser = argparse.ArgumentParser(
        prog="pairwords",
        description="Distinct adjacent pairs in geometric random words",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_p(p: argparse.ArgumentParser, required: bool = True) -> None:
        p.add_argument("--p", type=float, required=required, help="Geometric parameter")

    def with_n(p: argparse.ArgumentParser, required: bool = True) -> None:
        p.add_argument("--n", type=_length, nargs="+", required=required, help="Word length(s)")

    simulate = sub.add_parser("simulate", parents=[common], help="Monte Carlo moments")
    with_p(simulate)
    with_n(simulate)
    simulate.add_argument("--words", type=int, help="Number of words N (default 50000)")
    simulate.add_argument("--seed", type=int, required=True)
    simulate.add_argument("--workers", type=int)

    exact = sub.add_parser("exact", parents=[common], help="Exact finite-n moments of X2")
    exact.add_argument("action", choices=["mean", "m2"])
    with_p(exact)
    with_n(exact)

    asym = sub.add_parser("asymptotic", parents=[common], help="Large-n expansions")
    asym.add_argument("action", choices=["mean", "var", "cumulant"])
    asym.add_argument("--stat", choices=["x1", "x2", "x3"], default="x1")
    asym.add_argument("--order", type=int, help="Cumulant order m")
    with_p(asym)
    with_n(asym)

    avoid = sub.add_parser("avoid", parents=[common], help="Pair-avoidance probability")
    with_p(avoid)
    with_n(avoid)
    avoid.add_argument("--pairs", required=True, help='Pair list such as "(1,1),(2,3)"')
    avoid.add_argument("--gf", action="store_true", help="Also report the rational GF")

    series = sub.add_parser("series", parents=[common], help="Exact eigen-quantity series")
    series.add_argument("--pairs", required=True, help='Pair list such as "(i,i),(i,r)"')
    series.add_argument("--order", type=int, default=4)
    series.add_argument("--p-symbolic", action="store_true", help="Symbolic output only")
    with_p(series, required=False)

    dist = sub.add_parser("dist", parents=[common], help="Limit laws of X1 and X3")
    dist.add_argument("action", choices=["x1", "x3"])
    dist.add_argument("--eta-grid", help="a:b:step (default -3:3:0.25)")
    with_p(dist)
    with_n(dist)

    compare = sub.add_parser("compare", parents=[common], help="Theory next to simulation")
    with_p(compare)
    with_n(compare)
    compare.add_argument("--words", type=int)
    compare.add_argument("--seed", type=int, required=True)
    compare.add_argument("--workers", type=int)

    figure = sub.add_parser("figure", parents=[common], help="Plot-ready figure data")
    figure.add_argument("action", choices=["f1", "f2", "f3"])
    with_p(figure, required=False)
    with_n(figure, required=False)
    figure.add_argument("--words", type=int)
    figure.add_argument("--seed", type=int)
    figure.add_argument("--workers", type=int)
    figure.add_argument("--eta-grid")
    figure.add_argument("--q-grid", help="a:b:step (default 50 points over 0.001..0.999)")
    return parser


def _report(kind: str, error: Exception, fmt: str, stream: Any) -> None:
    print(f"pairwords: {kind}: {error}", file=sys.stderr)
    if fmt == "json" and isinstance(error, (BudgetExceededError, ConvergenceError)):
        required = getattr(error, "required", None)
        budget = getattr(error, "budget", None)
        stream.write(error_document(kind, str(error), required, budget))


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the pairwords command.

    Args:
        argv: Arguments without the program name; sys.argv[1:] when None

    Returns:
        Process exit code
    """
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2

    options = {k: v for k, v in vars(args).items() if v is not None}
    select_config_dir(args.config_dir)
    setup_logging(args.config_dir, args.log_level)

    fmt = args.format
    try:
        config = RunConfig.model_validate(options)
        logger.info(f"Running {config.command} {config.action or ''}".rstrip())
        table = HANDLERS[config.command](config)
        emit(table, config.format, config.output)
        return 0
    except ValidationError as e:
        print(f"pairwords: invalid arguments:\n{e}", file=sys.stderr)
        return 2
    except DomainError as e:
        _report("DomainError", e, fmt, sys.stdout)
        return 2
    except BudgetExceededError as e:
        _report("BudgetExceededError", e, fmt, sys.stdout)
        return 1
    except ConvergenceError as e:
        _report("ConvergenceError", e, fmt, sys.stdout)
        return 1


if __name__ == "__main__":
    sys.exit(main())
