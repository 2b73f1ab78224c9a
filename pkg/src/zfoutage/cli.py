"""Command-line front-end: scenarios, figure datasets, thresholds, search.

Subcommands
    capacity   per-link success probabilities and capacities for one
               allocation, or a sweep over every allocation
    figure     the three standard datasets (capacity vs streams for
               several link counts; vs threshold; the 27-allocation
               sum-capacity table)
    nstar      analytic and empirical single-stream thresholds
    optimize   exhaustive or coordinate-descent sum-capacity search
    validate   self-check run comparing the backends against each other

Output is CSV (default) or JSON.  The first CSV line is a `#` comment
recording the resolved scenario and seed, so every file names the run
that produced it; no timestamps or host details appear anywhere, and
floats are printed with repr so files are byte-stable across runs and
worker counts.  Exit codes: 0 success, 2 invalid scenario or arguments,
3 numerical failure or failed validation, 4 search budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from itertools import product
from typing import Sequence

from . import analytic, montecarlo, optimizer
from .core import (
    DomainError,
    NumericalError,
    SearchBudgetError,
    StreamAllocation,
    SystemConfig,
    ZfOutageError,
    clamp_count,
    reset_clamp_count,
)

_BACKENDS = ("analytic", "mc", "both")
_FORMATS = ("csv", "json")

_DEFAULTS = {
    "beta": 1.0,
    "rate": 1.0,
    "alloc_sweep": False,
    "backend": "analytic",
    "trials": 100_000,
    "seed": 0,
    "workers": 1,
    "format": "csv",
}

# Keys a scenario config file may set, with their parsers.
_FILE_KEYS = {
    "links": int,
    "antennas": int,
    "beta": float,
    "rate": float,
    "rate_to_beta": float,
    "alloc": str,
    "alloc_sweep": None,  # boolean, parsed specially
    "backend": str,
    "trials": int,
    "seed": int,
    "workers": int,
    "out": str,
    "format": str,
}


@dataclass(frozen=True)
class ExperimentSpec:
    """Fully resolved scenario: defaults, config file, and flags merged."""

    links: int
    antennas: int
    beta: float
    rate: float
    alloc: tuple[int, ...] | None
    alloc_sweep: bool
    backend: str
    trials: int
    seed: int
    workers: int
    out: str | None
    format: str

    def system_config(self) -> SystemConfig:
        return SystemConfig(
            num_links=self.links,
            num_antennas=self.antennas,
            sir_threshold=self.beta,
            rate=self.rate,
        )

    def allocation(self) -> StreamAllocation:
        streams = self.alloc
        if streams is None:
            streams = (1,) * self.links
        alloc = StreamAllocation(streams)
        alloc.validate_against(self.system_config())
        return alloc


def _parse_alloc(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise DomainError(f"alloc must be comma-separated integers, got {text!r}")


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise DomainError(f"expected a boolean, got {text!r}")


def _parse_number_list(text: str, kind) -> tuple:
    try:
        return tuple(kind(part) for part in text.split(","))
    except ValueError:
        raise DomainError(f"expected comma-separated values, got {text!r}")


def _load_config_file(path: str) -> dict:
    """Parse a key=value scenario file; errors carry line numbers."""
    values: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DomainError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        value = value.strip()
        if key not in _FILE_KEYS:
            raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            if key == "alloc_sweep":
                values[key] = _parse_bool(value)
            elif key == "alloc":
                values[key] = _parse_alloc(value)
            else:
                values[key] = _FILE_KEYS[key](value)
        except DomainError:
            raise
        except ValueError:
            raise DomainError(f"{path}:{lineno}: bad value {value!r} for {key!r}")
    if "beta" in values and "rate_to_beta" in values:
        raise DomainError(f"{path}: sets both beta and rate_to_beta")
    if "backend" in values and values["backend"] not in _BACKENDS:
        raise DomainError(f"{path}: backend must be one of {_BACKENDS}")
    if "format" in values and values["format"] not in _FORMATS:
        raise DomainError(f"{path}: format must be one of {_FORMATS}")
    return values


def _resolve_spec(args: argparse.Namespace) -> ExperimentSpec:
    """Merge defaults < config file < explicit command-line flags."""
    merged: dict = dict(_DEFAULTS)
    file_vals = _load_config_file(args.config) if args.config else {}
    merged.update(file_vals)

    cli_vals = {}
    for key in (
        "links",
        "antennas",
        "beta",
        "rate",
        "rate_to_beta",
        "alloc",
        "alloc_sweep",
        "backend",
        "trials",
        "seed",
        "workers",
        "out",
        "format",
    ):
        value = getattr(args, key, None)
        if value is not None:
            cli_vals[key] = value
    if "alloc" in cli_vals:
        cli_vals["alloc"] = _parse_alloc(cli_vals["alloc"])
    # A threshold given on the command line replaces one from the file,
    # whichever of the two spellings each source used.
    if "beta" in cli_vals:
        merged.pop("rate_to_beta", None)
    if "rate_to_beta" in cli_vals:
        merged.pop("beta", None)
    merged.update(cli_vals)

    rate_to_beta = merged.pop("rate_to_beta", None)
    if rate_to_beta is not None:
        if not rate_to_beta > 0.0:
            raise DomainError(f"rate_to_beta must be > 0, got {rate_to_beta!r}")
        merged["beta"] = 2.0**rate_to_beta - 1.0
        if "rate" not in file_vals and "rate" not in cli_vals:
            merged["rate"] = rate_to_beta
    merged.setdefault("beta", _DEFAULTS["beta"])

    if merged.get("links") is None:
        raise DomainError("links is required (flag --links or config file)")
    if merged.get("antennas") is None:
        raise DomainError("antennas is required (flag --antennas or config file)")
    if merged["backend"] not in _BACKENDS:
        raise DomainError(f"backend must be one of {_BACKENDS}")
    if merged["format"] not in _FORMATS:
        raise DomainError(f"format must be one of {_FORMATS}")
    if merged.get("alloc") is not None and merged.get("alloc_sweep"):
        raise DomainError("alloc and alloc_sweep are mutually exclusive")

    spec = ExperimentSpec(
        links=merged["links"],
        antennas=merged["antennas"],
        beta=merged["beta"],
        rate=merged["rate"],
        alloc=merged.get("alloc"),
        alloc_sweep=bool(merged.get("alloc_sweep")),
        backend=merged["backend"],
        trials=merged["trials"],
        seed=merged["seed"],
        workers=merged["workers"],
        out=merged.get("out"),
        format=merged["format"],
    )
    _check_trials(spec.backend, spec.trials)
    return spec


def _check_trials(backend: str, trials: int) -> None:
    if backend in ("mc", "both"):
        if trials < 1_000:
            raise DomainError(
                f"trials must be >= 1000 for Monte Carlo backends, got {trials}"
            )
        if trials < 100_000:
            print(
                f"warning: {trials} trials is below 100000; "
                "standard errors will be wide",
                file=sys.stderr,
            )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit(out: str | None, fmt: str, stamp: dict, columns: list, rows: list) -> None:
    if fmt == "csv":
        lines = ["# " + " ".join(f"{k}={_fmt(v)}" for k, v in stamp.items())]
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        text = "\n".join(lines) + "\n"
    else:
        payload = {"spec": stamp, "columns": columns, "rows": rows}
        text = json.dumps(payload, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _base_stamp(cmd: str, spec: ExperimentSpec) -> dict:
    stamp = {
        "cmd": cmd,
        "links": spec.links,
        "antennas": spec.antennas,
        "beta": spec.beta,
        "rate": spec.rate,
        "backend": spec.backend,
    }
    if spec.backend in ("mc", "both"):
        stamp["trials"] = spec.trials
        stamp["seed"] = spec.seed
    return stamp


def cmd_capacity(spec: ExperimentSpec) -> int:
    config = spec.system_config()
    stamp = _base_stamp("capacity", spec)

    if spec.alloc_sweep:
        total = spec.antennas**spec.links
        if total > 1_000_000:
            raise SearchBudgetError(
                f"alloc sweep would cover {total} allocations (budget 1000000)"
            )
        stamp["alloc"] = "sweep"
        columns = [f"k{i + 1}" for i in range(spec.links)]
        if spec.backend in ("analytic", "both"):
            columns.append("sum_capacity_analytic")
        if spec.backend in ("mc", "both"):
            columns.append("sum_capacity_mc")
        if spec.backend == "both":
            columns.append("abs_diff")
        rows = []
        for streams in product(range(1, spec.antennas + 1), repeat=spec.links):
            alloc = StreamAllocation(streams)
            row: list = list(streams)
            if spec.backend in ("analytic", "both"):
                row.append(analytic.sum_capacity_analytic(config, alloc).sum_capacity)
            if spec.backend in ("mc", "both"):
                row.append(
                    montecarlo.empirical_outage(
                        config, alloc, spec.trials, spec.seed, workers=spec.workers
                    ).sum_capacity
                )
            if spec.backend == "both":
                row.append(abs(row[-2] - row[-1]))
            rows.append(row)
        _emit(spec.out, spec.format, stamp, columns, rows)
        return 0

    alloc = spec.allocation()
    stamp["alloc"] = ",".join(str(k) for k in alloc.streams)
    analytic_report = (
        analytic.sum_capacity_analytic(config, alloc)
        if spec.backend in ("analytic", "both")
        else None
    )
    mc_report = (
        montecarlo.empirical_outage(
            config, alloc, spec.trials, spec.seed, workers=spec.workers
        )
        if spec.backend in ("mc", "both")
        else None
    )

    rows = []
    if spec.backend == "analytic":
        columns = ["link", "streams", "success_prob", "capacity", "sum_capacity"]
        for n in range(spec.links):
            rows.append(
                [
                    n + 1,
                    alloc.streams[n],
                    analytic_report.per_link_success_prob[n],
                    analytic_report.per_link_capacity[n],
                    analytic_report.sum_capacity,
                ]
            )
    elif spec.backend == "mc":
        columns = [
            "link",
            "streams",
            "success_prob",
            "std_error",
            "capacity",
            "sum_capacity",
        ]
        for n in range(spec.links):
            rows.append(
                [
                    n + 1,
                    alloc.streams[n],
                    mc_report.per_link_success_prob[n],
                    mc_report.std_error[n],
                    mc_report.per_link_capacity[n],
                    mc_report.sum_capacity,
                ]
            )
    else:
        columns = [
            "link",
            "streams",
            "success_prob_analytic",
            "capacity_analytic",
            "success_prob_mc",
            "std_error_mc",
            "capacity_mc",
            "abs_diff",
        ]
        for n in range(spec.links):
            rows.append(
                [
                    n + 1,
                    alloc.streams[n],
                    analytic_report.per_link_success_prob[n],
                    analytic_report.per_link_capacity[n],
                    mc_report.per_link_success_prob[n],
                    mc_report.std_error[n],
                    mc_report.per_link_capacity[n],
                    abs(
                        analytic_report.per_link_success_prob[n]
                        - mc_report.per_link_success_prob[n]
                    ),
                ]
            )
    _emit(spec.out, spec.format, stamp, columns, rows)
    return 0


def _figure_scenarios(args: argparse.Namespace):
    """Resolve the per-figure defaults and override lists."""
    which = args.which
    n_list = (
        _parse_number_list(args.n_list, int)
        if args.n_list
        else (5, 10, 15, 20, 30)
    )
    beta_list = (
        _parse_number_list(args.beta_list, float)
        if args.beta_list
        else (0.25, 0.5, 1.0, 2.0, 4.0)
    )
    if which == "fig1":
        antennas = args.antennas if args.antennas is not None else 10
        beta = args.beta if args.beta is not None else 1.0
        return which, antennas, beta, n_list, beta_list, None
    if which == "fig2":
        antennas = args.antennas if args.antennas is not None else 5
        links = args.links if args.links is not None else 5
        return which, antennas, None, None, beta_list, links
    antennas = args.antennas if args.antennas is not None else 3
    links = args.links if args.links is not None else 3
    beta = args.beta if args.beta is not None else 1.0
    return which, antennas, beta, None, None, links


def cmd_figure(args: argparse.Namespace) -> int:
    which, antennas, beta, n_list, beta_list, links = _figure_scenarios(args)
    rate = args.rate if args.rate is not None else 1.0
    backend = args.backend if args.backend is not None else "analytic"
    if backend not in _BACKENDS:
        raise DomainError(f"backend must be one of {_BACKENDS}")
    trials = args.trials if args.trials is not None else _DEFAULTS["trials"]
    seed = args.seed if args.seed is not None else 0
    workers = args.workers if args.workers is not None else 1
    fmt = args.format if args.format is not None else "csv"
    if fmt not in _FORMATS:
        raise DomainError(f"format must be one of {_FORMATS}")
    if backend in ("mc", "both"):
        _check_trials(backend, trials)

    with_mc = backend in ("mc", "both")
    with_analytic = backend in ("analytic", "both")
    stamp = {"cmd": "figure", "which": which, "antennas": antennas, "rate": rate,
             "backend": backend}
    if with_mc:
        stamp["trials"] = trials
        stamp["seed"] = seed

    rows: list = []
    if which == "fig1":
        stamp["beta"] = beta
        stamp["n_list"] = ",".join(str(n) for n in n_list)
        columns = ["links", "k1"]
        columns += ["success_prob", "capacity"] if with_analytic else []
        columns += ["success_prob_mc", "std_error_mc", "capacity_mc"] if with_mc else []
        for n in n_list:
            config = SystemConfig(n, antennas, beta, rate)
            for k1 in range(1, antennas + 1):
                alloc = StreamAllocation((k1,) + (1,) * (n - 1))
                row: list = [n, k1]
                if with_analytic:
                    p = analytic.success_prob_equal_k(antennas, n, k1, 1, beta)
                    row += [p, rate * k1 * p]
                if with_mc:
                    est = montecarlo.empirical_link_success(
                        config, alloc, 0, trials, seed, workers=workers
                    )
                    row += [est.prob, est.std_error, rate * k1 * est.prob]
                rows.append(row)
    elif which == "fig2":
        stamp["links"] = links
        stamp["beta_list"] = ",".join(repr(b) for b in beta_list)
        columns = ["beta", "k1"]
        columns += ["success_prob", "capacity"] if with_analytic else []
        columns += ["success_prob_mc", "std_error_mc", "capacity_mc"] if with_mc else []
        for b in beta_list:
            config = SystemConfig(links, antennas, b, rate)
            for k1 in range(1, antennas + 1):
                alloc = StreamAllocation((k1,) + (1,) * (links - 1))
                row = [b, k1]
                if with_analytic:
                    p = analytic.success_prob_equal_k(antennas, links, k1, 1, b)
                    row += [p, rate * k1 * p]
                if with_mc:
                    est = montecarlo.empirical_link_success(
                        config, alloc, 0, trials, seed, workers=workers
                    )
                    row += [est.prob, est.std_error, rate * k1 * est.prob]
                rows.append(row)
    else:
        stamp["links"] = links
        stamp["beta"] = beta
        config = SystemConfig(links, antennas, beta, rate)
        columns = [f"k{i + 1}" for i in range(links)]
        columns += ["sum_capacity"] if with_analytic else []
        columns += ["sum_capacity_mc"] if with_mc else []
        for streams in product(range(1, antennas + 1), repeat=links):
            alloc = StreamAllocation(streams)
            row = list(streams)
            if with_analytic:
                row.append(analytic.sum_capacity_analytic(config, alloc).sum_capacity)
            if with_mc:
                row.append(
                    montecarlo.empirical_outage(
                        config, alloc, trials, seed, workers=workers
                    ).sum_capacity
                )
            rows.append(row)

    _emit(args.out, fmt, stamp, columns, rows)
    return 0


def cmd_nstar(args: argparse.Namespace) -> int:
    antennas = args.antennas
    beta = args.beta if args.beta is not None else 1.0
    k_other = args.k_other if args.k_other is not None else 1
    fmt = args.format if args.format is not None else "csv"
    if fmt not in _FORMATS:
        raise DomainError(f"format must be one of {_FORMATS}")
    threshold = optimizer.empirical_threshold(
        antennas,
        beta,
        k_other,
        window=args.window if args.window is not None else 5,
        cap=args.cap if args.cap is not None else 10_000,
    )
    analytic_result = threshold.analytic
    stamp = {"cmd": "nstar", "antennas": antennas, "beta": beta, "k_other": k_other}
    columns = [
        "analytic_n_star",
        "binding_p",
        "empirical_threshold",
        "analytic_ratio",
        "empirical_ratio",
    ]
    rows = [
        [
            analytic_result.n_star,
            analytic_result.binding_p,
            threshold.threshold,
            analytic_result.n_star / antennas,
            threshold.threshold / antennas,
        ]
    ]
    _emit(args.out, fmt, stamp, columns, rows)
    return 0


def cmd_optimize(args: argparse.Namespace) -> int:
    spec = _resolve_spec(args)
    if spec.backend == "both":
        raise DomainError("optimize takes backend analytic or mc, not both")
    objective = "analytic" if spec.backend == "analytic" else "montecarlo"
    mode = args.mode if args.mode is not None else "exhaustive"
    budget = args.budget if args.budget is not None else 1_000_000
    max_sweeps = args.max_sweeps if args.max_sweeps is not None else 50
    config = spec.system_config()
    result = optimizer.maximize_sum_capacity(
        config,
        mode=mode,
        objective=objective,
        budget=budget,
        max_sweeps=max_sweeps,
        trials=spec.trials if objective == "montecarlo" else None,
        seed=spec.seed if objective == "montecarlo" else None,
        workers=spec.workers,
    )
    stamp = _base_stamp("optimize", spec)
    stamp["mode"] = mode
    stamp["best"] = ",".join(str(k) for k in result.best_allocation.streams)
    if mode == "exhaustive":
        columns = [f"k{i + 1}" for i in range(spec.links)] + ["sum_capacity", "is_best"]
        rows = []
        for streams, value in result.per_candidate_values.items():
            rows.append(
                list(streams)
                + [value, 1 if streams == result.best_allocation.streams else 0]
            )
    else:
        columns = [f"k{i + 1}" for i in range(spec.links)] + [
            "sum_capacity",
            "fixed_point",
            "evaluations",
        ]
        rows = [
            list(result.best_allocation.streams)
            + [result.best_value, result.fixed_point, result.evaluations]
        ]
    _emit(spec.out, spec.format, stamp, columns, rows)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    """Cross-backend agreement suite; prints one PASS/FAIL line per check."""
    trials = args.trials if args.trials is not None else 20_000
    seed = args.seed if args.seed is not None else 0
    workers = args.workers if args.workers is not None else 1
    if trials < 1_000:
        raise DomainError(f"validate needs trials >= 1000, got {trials}")
    reset_clamp_count()
    lines: list[str] = []
    failures = 0

    def check(name: str, ok: bool, detail: str) -> None:
        nonlocal failures
        if not ok:
            failures += 1
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")

    # Exact M=1 closed form against both samplers.
    cfg = SystemConfig(2, 1, 1.0, 1.0)
    al = StreamAllocation((1, 1))
    exact = 0.5
    p_analytic = analytic.success_prob_equal_k(1, 2, 1, 1, 1.0)
    check(
        "closed-form-exact",
        abs(p_analytic - exact) <= 1e-12,
        f"analytic {p_analytic!r} vs exact {exact!r}",
    )
    est = montecarlo.empirical_link_success(cfg, al, 0, trials, seed, workers=workers)
    tol = 3.0 * est.std_error
    check(
        "full-channel-vs-exact",
        abs(est.prob - exact) <= tol,
        f"mc {est.prob!r} within {tol!r} of {exact!r}",
    )
    direct = montecarlo.direct_distribution_outage(1, 1, [1], 1.0, trials, seed)
    tol = 3.0 * direct.std_error
    check(
        "direct-vs-exact",
        abs(direct.prob - exact) <= tol,
        f"direct {direct.prob!r} within {tol!r} of {exact!r}",
    )

    # Full-channel vs analytic on a multi-antenna scenario.
    cfg2 = SystemConfig(4, 3, 1.0, 1.0)
    al2 = StreamAllocation((2, 1, 1, 1))
    p_closed = analytic.link_success_prob(cfg2, al2, 0)
    est2 = montecarlo.empirical_link_success(cfg2, al2, 0, trials, seed, workers=workers)
    tol = max(3.0 * est2.std_error, 5e-3)
    check(
        "full-channel-vs-closed-form",
        abs(est2.prob - p_closed) <= tol,
        f"mc {est2.prob!r} vs closed form {p_closed!r} (tol {tol!r})",
    )

    # The two samplers against each other on a heterogeneous scenario.
    cfg3 = SystemConfig(4, 4, 1.0, 1.0)
    al3 = StreamAllocation((1, 1, 2, 4))
    full = montecarlo.empirical_link_success(cfg3, al3, 0, trials, seed, workers=workers)
    direct3 = montecarlo.direct_distribution_outage(4, 1, [1, 2, 4], 1.0, trials, seed)
    tol = 3.0 * math.hypot(full.std_error, direct3.std_error)
    check(
        "full-channel-vs-direct",
        abs(full.prob - direct3.prob) <= tol,
        f"full {full.prob!r} vs direct {direct3.prob!r} (tol {tol!r})",
    )

    # Equal-weight reduction of the general form.
    worst = 0.0
    for m, n, k, b in ((2, 4, 1, 0.5), (4, 3, 2, 1.0), (8, 5, 2, 4.0)):
        a = analytic.success_prob_equal_k(m, n, 1, k, b)
        g = analytic.success_prob_general(m, 1, [k] * (n - 1), b)
        if a > 0.0:
            worst = max(worst, abs(a - g) / a)
    check(
        "general-equal-k-consistency",
        worst <= 1e-12,
        f"worst relative gap {worst!r}",
    )

    # Threshold sweep shares its run with single-threshold calls.
    sweep = montecarlo.link_success_sweep(cfg2, al2, 0, [0.5, 2.0], trials, seed)
    single = montecarlo.empirical_link_success(
        SystemConfig(4, 3, 2.0, 1.0), al2, 0, trials, seed
    )
    check(
        "sweep-matches-single",
        sweep[1].prob == single.prob,
        f"sweep {sweep[1].prob!r} vs single {single.prob!r}",
    )

    check("clamp-diagnostics", clamp_count() == 0, f"{clamp_count()} clamp events")

    text = "\n".join(lines) + "\n"
    summary = f"{len(lines) - failures}/{len(lines)} checks passed\n"
    if args.out is None:
        sys.stdout.write(text + summary)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text + summary)
    return 3 if failures else 0


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value scenario file")
    parser.add_argument("--links", type=int, help="number of links N")
    parser.add_argument("--antennas", type=int, help="antennas per node M")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--beta", type=float, help="SIR threshold")
    group.add_argument(
        "--rate-to-beta",
        dest="rate_to_beta",
        type=float,
        metavar="R",
        help="set beta = 2**R - 1 (and rate = R unless --rate is given)",
    )
    parser.add_argument("--rate", type=float, help="per-stream rate R (default 1)")
    parser.add_argument(
        "--backend", choices=_BACKENDS, help="computation backend (default analytic)"
    )
    parser.add_argument("--trials", type=int, help="Monte Carlo trials per estimate")
    parser.add_argument("--seed", type=int, help="Monte Carlo seed (default 0)")
    parser.add_argument("--workers", type=int, help="parallel workers (default 1)")
    parser.add_argument("--out", help="output path (default stdout)")
    parser.add_argument("--format", choices=_FORMATS, help="output format")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zfoutage",
        description="Outage capacities of zero-forcing MIMO interference links.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cap = sub.add_parser("capacity", help="per-link capacities for one scenario")
    _add_scenario_flags(p_cap)
    alloc_group = p_cap.add_mutually_exclusive_group()
    alloc_group.add_argument("--alloc", help="stream counts k1,k2,... (default all 1)")
    alloc_group.add_argument(
        "--alloc-sweep",
        dest="alloc_sweep",
        action="store_const",
        const=True,
        help="tabulate every allocation instead of one",
    )

    p_fig = sub.add_parser("figure", help="reproduce a standard dataset")
    p_fig.add_argument("which", choices=("fig1", "fig2", "fig3"))
    p_fig.add_argument("--antennas", type=int, help="override the default M")
    p_fig.add_argument("--links", type=int, help="override N (fig2/fig3)")
    p_fig.add_argument("--beta", type=float, help="override beta (fig1/fig3)")
    p_fig.add_argument("--rate", type=float, help="per-stream rate (default 1)")
    p_fig.add_argument("--n-list", dest="n_list", help="fig1 link counts, e.g. 5,10,30")
    p_fig.add_argument(
        "--beta-list", dest="beta_list", help="fig2 thresholds, e.g. 0.25,1,4"
    )
    p_fig.add_argument("--backend", choices=_BACKENDS)
    p_fig.add_argument("--trials", type=int)
    p_fig.add_argument("--seed", type=int)
    p_fig.add_argument("--workers", type=int)
    p_fig.add_argument("--out")
    p_fig.add_argument("--format", choices=_FORMATS)

    p_nstar = sub.add_parser("nstar", help="single-stream link-count thresholds")
    p_nstar.add_argument("--antennas", type=int, required=True)
    p_nstar.add_argument("--beta", type=float)
    p_nstar.add_argument("--k-other", dest="k_other", type=int)
    p_nstar.add_argument("--window", type=int, help="stability window (default 5)")
    p_nstar.add_argument("--cap", type=int, help="scan cap (default 10000)")
    p_nstar.add_argument("--out")
    p_nstar.add_argument("--format", choices=_FORMATS)

    p_opt = sub.add_parser("optimize", help="search for the best allocation")
    _add_scenario_flags(p_opt)
    p_opt.add_argument("--mode", choices=("exhaustive", "coordinate"))
    p_opt.add_argument("--budget", type=int, help="exhaustive candidate budget")
    p_opt.add_argument("--max-sweeps", dest="max_sweeps", type=int)

    p_val = sub.add_parser("validate", help="run the cross-backend agreement suite")
    p_val.add_argument("--trials", type=int, help="trials per check (default 20000)")
    p_val.add_argument("--seed", type=int)
    p_val.add_argument("--workers", type=int)
    p_val.add_argument("--out", help="write the report here instead of stdout")

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "capacity":
            return cmd_capacity(_resolve_spec(args))
        if args.command == "figure":
            return cmd_figure(args)
        if args.command == "nstar":
            return cmd_nstar(args)
        if args.command == "optimize":
            return cmd_optimize(args)
        return cmd_validate(args)
    except SearchBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ZfOutageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
