"""Command-line front end.

Commands: ``simulate``, ``survival``, ``case-study``, ``transition-matrix``.
Data goes to files or standard output, diagnostics to standard error.

Exit codes: 0 success, 1 invalid configuration or arguments, 2 numerical
failure, 3 no exact survival method for the requested model/times.

Simulated paths are grouped in fixed blocks of ``BLOCK_SIZE`` path ids;
block ``b`` draws from substream ``b`` of the seed. Output is written in
path-id order, so files do not depend on the worker count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import (
    AcbveConfig,
    ConfigError,
    CopulaMarginsConfig,
    FreundConfig,
    LoopingConfig,
    MarshallOlkinConfig,
    MultiFactorConfig,
    OneFactorConfig,
    load_config,
)
from .copulas import sample_default_times_copula
from .core import RandomStream, bits_label, index_to_bits, indicators_from_default_times
from .levy_frailty import sample_lfm, survival_multi_factor, survival_one_factor
from .looping_markov import (
    NumericalError,
    chained_survival,
    freund_survival,
    sample_ctmc_states,
    states_to_default_times,
    transition_matrix,
)
from .marshall_olkin import sample_mo_arnold, sample_mo_shock, survival_mo
from .stepwise import BIAS_BAND, REL_ERROR_TOLERANCE, run_case_study, simulate_stepwise_states

BLOCK_SIZE = 1024
WORKERS_ENV = "MO_SIM_WORKERS"

EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_NO_EXACT = 3


class NoExactMethod(Exception):
    pass


def fmt(x: float) -> str:
    """Shortest round-trip decimal; ``inf`` for survivors."""
    return repr(float(x))


# -- simulation ---------------------------------------------------------------


def _first_dead(states: np.ndarray, points: np.ndarray) -> np.ndarray:
    dead = states == 0
    return np.where(dead.any(axis=1), points[np.argmax(dead, axis=1)], np.inf)


def sample_block(cfg, block: int, count: int, seed: int) -> np.ndarray:
    """Default times for one block of paths, shape (count, d)."""
    rng = RandomStream(seed, block).generator()
    if isinstance(cfg, MarshallOlkinConfig):
        params = cfg.build()
        sampler = sample_mo_shock if cfg.sampler == "shock" else sample_mo_arnold
        return sampler(params, count, rng)
    if isinstance(cfg, (FreundConfig, AcbveConfig, LoopingConfig)):
        grid = cfg.require_grid()
        d = int(math.log2(cfg.generator().shape[0]))
        states = sample_ctmc_states(cfg.generator(), grid, count, rng)
        return states_to_default_times(states, grid, d)
    if isinstance(cfg, (OneFactorConfig, MultiFactorConfig)):
        return sample_lfm(cfg.build(), cfg.require_grid(), cfg.trigger_mode, count, rng)
    if isinstance(cfg, CopulaMarginsConfig):
        copula = cfg.build()
        if cfg.method == "direct":
            return sample_default_times_copula(copula, cfg.lambda1, cfg.lambda2, count, rng)
        grid = cfg.require_grid()
        if grid.points[0] != 0.0:
            raise ConfigError("stepwise copula simulation needs a grid starting at 0")
        states = simulate_stepwise_states(copula, cfg.lambda1, cfg.lambda2, grid.step(), len(grid) - 1, count, rng)
        pts = grid.as_array()
        return np.column_stack([_first_dead(states[:, :, k], pts) for k in range(2)])
    raise ConfigError(f"unsupported model {cfg.model!r}")


def _block_job(args):
    cfg, block, count, seed = args
    return block, sample_block(cfg, block, count, seed)


def simulate_paths(cfg, paths: int, seed: int, workers: int = 1):
    """Yield ``(first_path_id, taus)`` blocks in path-id order."""
    jobs = []
    for block, start in enumerate(range(0, paths, BLOCK_SIZE)):
        jobs.append((cfg, block, min(BLOCK_SIZE, paths - start), seed))
    if workers <= 1 or len(jobs) <= 1:
        for job in jobs:
            block, taus = _block_job(job)
            yield block * BLOCK_SIZE, taus
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for block, taus in pool.map(_block_job, jobs):
            yield block * BLOCK_SIZE, taus


def _write_records(stream, cfg, blocks, fmt_name: str, indicators: bool) -> None:
    grid = cfg.grid_or_none()
    d = cfg.d
    pts = grid.as_array() if grid is not None else None
    writer = csv.writer(stream, lineterminator="\r\n") if fmt_name == "csv" else None
    if writer:
        header = ["path_id"] + [f"tau_{k + 1}" for k in range(d)]
        writer.writerow(header + (["path"] if indicators else []))
    for first, taus in blocks:
        paths = indicators_from_default_times(taus, pts) if indicators else None
        for i, row in enumerate(taus):
            pid = first + i
            cells = [fmt(x) for x in row]
            label = "|".join(bits_label(s) for s in paths[i]) if indicators else None
            if writer:
                writer.writerow([str(pid)] + cells + ([label] if indicators else []))
            else:
                rec = {"path_id": pid, "taus": [float(x) if math.isfinite(x) else "inf" for x in row]}
                if indicators:
                    rec["path"] = label.split("|")
                stream.write(json.dumps(rec, separators=(",", ":")) + "\n")


def _atomic_output(out: str | None, write) -> None:
    if out in (None, "-"):
        write(sys.stdout)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent if str(target.parent) else ".", prefix=".mosim-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            write(fh)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    paths = cfg.paths if args.paths is None else args.paths
    seed = cfg.seed if args.seed is None else args.seed
    if paths < 0 or not 0 <= seed < 2**64:
        raise ConfigError("paths must be >= 0 and seed a 64-bit unsigned integer")
    if cfg.grid is None and not isinstance(cfg, MarshallOlkinConfig) and not (
        isinstance(cfg, CopulaMarginsConfig) and cfg.method == "direct"
    ):
        raise ConfigError(f"model {cfg.model!r} needs a grid")
    if args.indicators and cfg.grid is None:
        raise ConfigError("--indicators needs a grid in the config")
    workers = args.workers if args.workers is not None else int(os.environ.get(WORKERS_ENV, "1") or 1)
    blocks = simulate_paths(cfg, paths, seed, max(1, workers))
    _atomic_output(args.out, lambda fh: _write_records(fh, cfg, blocks, args.format, args.indicators))
    return 0


# -- exact survival -----------------------------------------------------------


def exact_survival(cfg, t: list[float]) -> float:
    """Closed-form (or matrix-exponential) ``P(tau > t)``; raises ``NoExactMethod``."""
    if len(t) != cfg.d:
        raise ConfigError(f"--t needs {cfg.d} values, got {len(t)}")
    if any(x < 0 or not math.isfinite(x) for x in t):
        raise ConfigError("times must be finite and >= 0")
    if isinstance(cfg, MarshallOlkinConfig):
        return survival_mo(cfg.build(), t)
    if isinstance(cfg, (FreundConfig, AcbveConfig)):
        return freund_survival(cfg.params(), t[0], t[1])
    if isinstance(cfg, LoopingConfig):
        grid = cfg.grid_or_none()
        on_grid = [x if x == 0.0 else grid.points[grid.index_of(x)] for x in t
                   if grid is not None and (x == 0.0 or grid.index_of(x) is not None)]
        if len(on_grid) != len(t):
            raise NoExactMethod("looping survival needs all times on the config grid")
        return chained_survival(cfg.generator(), on_grid)
    if isinstance(cfg, OneFactorConfig):
        model = cfg.build()
        if not model.homogeneous:
            raise NoExactMethod("no closed form for heterogeneous trigger rates")
        return survival_one_factor(model.spec, t)
    if isinstance(cfg, MultiFactorConfig):
        return survival_multi_factor(cfg.build(), t)
    if isinstance(cfg, CopulaMarginsConfig):
        return cfg.build().cdf(math.exp(-cfg.lambda1 * t[0]), math.exp(-cfg.lambda2 * t[1]))
    raise NoExactMethod(f"no exact method for {cfg.model!r}")


def _parse_times(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse times {text!r}") from None


def cmd_survival(args) -> int:
    cfg = load_config(args.config)
    p = exact_survival(cfg, _parse_times(args.t))
    print(f"{p:.12g}")
    return 0


# -- transition matrix --------------------------------------------------------


def cmd_transition_matrix(args) -> int:
    cfg = load_config(args.config)
    if not isinstance(cfg, (FreundConfig, AcbveConfig, LoopingConfig)):
        raise ConfigError("transition-matrix needs a freund, acbve or looping model")
    if args.t < 0 or not math.isfinite(args.t):
        raise ConfigError("--t must be finite and >= 0")
    q = cfg.generator()
    p = transition_matrix(q, args.t)
    d = int(math.log2(q.shape[0]))
    labels = [bits_label(index_to_bits(i, d)) for i in range(q.shape[0])]

    def write(fh):
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["from\\to"] + labels)
        for label, row in zip(labels, p):
            w.writerow([label] + [fmt(x) for x in row])

    _atomic_output(args.out, write)
    return 0


# -- case study ---------------------------------------------------------------

CASE_COLUMNS = ["copula", "horizons", "exact", "direct", "direct_rel_err", "stepwise", "stepwise_rel_err", "bias_flag"]


def case_study_records(rows) -> list[dict]:
    out = []
    for r in rows:
        out.append(
            {
                "copula": r.copula,
                "horizons": r.horizons,
                "exact": fmt(r.exact),
                "direct": fmt(r.direct.estimate) if r.direct else "",
                "direct_rel_err": fmt(r.direct.rel_error) if r.direct else "",
                "stepwise": fmt(r.stepwise.estimate) if r.stepwise else "",
                "stepwise_rel_err": fmt(r.stepwise.rel_error) if r.stepwise else "",
                "bias_flag": "" if r.bias_flag is None else str(r.bias_flag).lower(),
            }
        )
    return out


def format_case_study(rows) -> str:
    buf = io.StringIO()
    buf.write(f"{'copula':<16}{'(T, S)':<10}{'exact':>10}{'direct':>20}{'stepwise':>20}  flags\n")
    for r in rows:
        line = f"{r.copula:<16}{r.horizons:<10}{r.exact:>10.5f}"
        for est in (r.direct, r.stepwise):
            line += f"{'':>20}" if est is None else f"{est.estimate:>9.5f} ({100 * est.rel_error:6.3f} %)"
        if r.stepwise is not None:
            flags = []
            if r.bias_flag:
                flags.append(f"biased (>{BIAS_BAND:g} se)")
            if r.stepwise.rel_error >= REL_ERROR_TOLERANCE:
                flags.append("rel err >= 0.5%")
            line += "  " + ", ".join(flags)
        buf.write(line.rstrip() + "\n")
    return buf.getvalue()


def cmd_case_study(args) -> int:
    if args.n < 0 or not 0 <= args.seed < 2**64:
        raise ConfigError("--n must be >= 0 and --seed a 64-bit unsigned integer")
    rows = run_case_study(n=args.n, seed=args.seed)
    records = case_study_records(rows)

    def write(fh):
        w = csv.DictWriter(fh, fieldnames=CASE_COLUMNS, lineterminator="\r\n")
        w.writeheader()
        w.writerows(records)

    _atomic_output(args.out, write)
    if args.out not in (None, "-"):
        sys.stdout.write(format_case_study(rows))
    return 0


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mosim", description="Simulate dependent default times.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("simulate", help="simulate default-time paths from a model config")
    p.add_argument("config")
    p.add_argument("--out", "-o", help="output file (default: standard output)")
    p.add_argument("--paths", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--workers", type=int, help=f"worker processes (default: ${WORKERS_ENV} or 1)")
    p.add_argument("--indicators", action="store_true", help="add the indicator path on the config grid")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("survival", help="exact joint survival probability")
    p.add_argument("config")
    p.add_argument("--t", required=True, help="comma-separated times t1,...,td")
    p.set_defaults(func=cmd_survival)

    p = subs.add_parser("case-study", help="stepwise-simulation bias table")
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_case_study)

    p = subs.add_parser("transition-matrix", help="write exp(t Q) as CSV")
    p.add_argument("config")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_transition_matrix)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; 2 is reserved for numerical failures here
        return EXIT_CONFIG if exc.code else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"mosim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoExactMethod as exc:
        print(f"mosim: {exc}", file=sys.stderr)
        return EXIT_NO_EXACT
    except (NumericalError, FloatingPointError) as exc:
        print(f"mosim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"mosim: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
