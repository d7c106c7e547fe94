import argparse
import dataclasses
import logging
import math
import sys
from typing import Callable, Optional, Sequence

from pydantic import ValidationError

from . import __version__, dynamics, emit, experiments, measures
from .logging_utils import configure_logger, get_logger
from .models import (
    DEFAULT_STEPS,
    DEFAULT_T_END,
    DEFAULT_T_START,
    PAIRS,
    InfoMode,
    PartitionId,
    Propagator,
    RunConfig,
    SweepConfig,
    SweepTable,
    SystemParams,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

_PARAM_NAMES = ("alpha", "gamma", "kappa", "omega", "dz")


def _finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return value


def _kappa(text: str) -> float:
    value = _finite_float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError("kappa out of [0,1]")
    return value


def _int_at_least(minimum: int) -> Callable[[str], int]:
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {value}")
        return value

    return parse


def _partitions(text: str) -> tuple[PartitionId, ...]:
    try:
        return tuple(PartitionId(label.strip().upper()) for label in text.split(",") if label.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown partition in {text!r}; choose from {', '.join(p.value for p in PartitionId)}"
        ) from None


def _add_output_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="Output CSV path (standard output when omitted)")
    parser.add_argument("--format", dest="fmt", choices=("csv", "csv+svg"), default="csv")
    parser.add_argument("--workers", type=_int_at_least(1), default=1, help="Threads used to evaluate sweep rows")


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--propagator", choices=[p.value for p in Propagator])
    parser.add_argument("--info-mode", choices=[m.value for m in InfoMode], default=InfoMode.TOTAL.value)
    parser.add_argument("--partitions", type=_partitions, help="Comma-separated list, e.g. AB,AC")


def _add_param_arguments(parser: argparse.ArgumentParser) -> None:
    defaults = SystemParams()
    for name in _PARAM_NAMES:
        parser.add_argument(
            f"--{name}",
            type=_kappa if name == "kappa" else _finite_float,
            default=getattr(defaults, name),
            help=f"default {getattr(defaults, name):.6g}",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tri-dm",
        description="Entanglement and non-local information dynamics of a three-qubit XX + DM system",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log progress to standard error")
    commands = parser.add_subparsers(dest="command", required=True)

    evolve = commands.add_parser("evolve", help="Quantifiers of the evolved state at one time")
    _add_param_arguments(evolve)
    _add_run_arguments(evolve)
    evolve.add_argument("--t", type=_finite_float, default=0.0)
    evolve.add_argument("--out", help="Write the three-qubit state as i,j,re,im rows")

    sweep = commands.add_parser("sweep", help="Time sweep with custom parameters")
    _add_param_arguments(sweep)
    _add_run_arguments(sweep)
    sweep.add_argument("--t-start", type=_finite_float, default=DEFAULT_T_START)
    sweep.add_argument("--t-end", type=_finite_float, default=DEFAULT_T_END)
    sweep.add_argument("--steps", type=_int_at_least(2), default=DEFAULT_STEPS)
    sweep.add_argument(
        "--allow-convention-override",
        action="store_true",
        help="Evaluate the closed forms away from alpha=pi/3, gamma=pi/2, omega=2",
    )
    _add_output_arguments(sweep)

    figure = commands.add_parser("figure", help="Run a named figure preset")
    figure.add_argument("--name", required=True, choices=list(experiments.PRESETS))
    _add_run_arguments(figure)
    figure.add_argument("--steps", type=_int_at_least(2), default=DEFAULT_STEPS)
    _add_output_arguments(figure)

    validate = commands.add_parser("validate", help="Check the closed-form marginals against both propagators")
    validate.add_argument("--out", help="Write the validation records as CSV")

    commands.add_parser("list-presets", help="List the figure presets")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Parse ``argv`` into a RunConfig; usage errors exit with status 2 naming the flag."""
    parser = build_parser()
    args = parser.parse_args(argv)
    values = {"command": args.command, "verbose": args.verbose}
    if all(hasattr(args, name) for name in _PARAM_NAMES):
        values["params"] = SystemParams(**{name: getattr(args, name) for name in _PARAM_NAMES})
    for option in ("t_start", "t_end", "t", "steps", "name", "out", "fmt", "workers",
                   "partitions", "allow_convention_override"):
        if getattr(args, option, None) is not None:
            values[option] = getattr(args, option)
    if getattr(args, "propagator", None) is not None:
        values["propagator"] = Propagator(args.propagator)
    if getattr(args, "info_mode", None) is not None:
        values["info_mode"] = InfoMode(args.info_mode)
    if values.get("fmt") == "csv+svg" and values.get("out") is None:
        parser.error("--format csv+svg requires --out")
    if args.command == "evolve" and values.get("propagator") is Propagator.CLOSED_FORM:
        parser.error("--propagator: evolve needs the exact or factorized propagator")
    if args.command == "sweep" and not values["t_end"] > values["t_start"]:
        parser.error("--t-end must be greater than --t-start")
    try:
        return RunConfig(**values)
    except ValidationError as e:
        parser.error(str(e))


def _sweep_config(config: RunConfig) -> SweepConfig:
    return SweepConfig(
        params=config.params,
        t_start=config.t_start,
        t_end=config.t_end,
        n_steps=config.steps,
        propagator=config.propagator or Propagator.EXACT,
        partitions=config.partitions or (PartitionId.AB,),
        info_mode=config.info_mode,
        allow_convention_override=config.allow_convention_override,
        workers=config.workers,
    )


def _figure_config(config: RunConfig) -> experiments.SweepConfigType:
    preset = experiments.figure_preset(config.name)
    overrides = {"info_mode": config.info_mode}
    if config.propagator is not None:
        overrides["propagator"] = config.propagator
    if config.partitions is not None:
        overrides["partitions"] = config.partitions
    if isinstance(preset, SweepConfig):
        overrides["n_steps"] = config.steps
        overrides["workers"] = config.workers
    return dataclasses.replace(preset, **overrides)


def _write_table(config: RunConfig, table: SweepTable) -> None:
    if config.out is None:
        sys.stdout.write(emit.format_csv(table))
        return
    emit.emit_csv(table, config.out)
    if config.fmt == "csv+svg":
        emit.emit_svg(table, config.out)


def _log_transitions(table: SweepTable) -> None:
    if not table.partitions or table.axis != "t" or table.partitions[0] not in PAIRS:
        return
    partition = table.partitions[0]
    logger = get_logger()
    for found in experiments.transitions(table, partition):
        logger.info("C(%s) sudden %s at %s=%.4g", partition.value, found.kind, table.axis, found.x)
    if table.config.label == "fig2a" and partition is PartitionId.AB:
        features = experiments.onset_features(table, partition)
        if features.within():
            logger.info("fig2a onset/peak/death %s inside the reference brackets", features[1:])
        else:
            logger.warning(
                "fig2a onset/peak/death %s outside the reference brackets %s (recorded discrepancy)",
                features[1:], experiments.FIG2A_BRACKETS,
            )


def run_evolve(config: RunConfig) -> int:
    kind = config.propagator or Propagator.EXACT
    state = dynamics.evolve_state(config.params, config.t, kind)
    partitions = config.partitions or PAIRS
    values = experiments.evaluate_point(config.params, config.t, partitions, kind, config.info_mode)
    print(f"t={config.t:.12g} propagator={kind.value} info_mode={config.info_mode.value}")
    print("partition,C,N,EF,purity,Itot,Inon")
    for partition in partitions:
        m = values[partition]
        cells = [m.concurrence, m.negativity, m.eof, m.purity, m.info_total, m.info_nonlocal]
        print(",".join([partition.value] + ["" if v is None else f"{v:.12g}" for v in cells]))
    if config.out is not None:
        header = f"# tri-dm v{__version__}; state at t={config.t:.12g}; propagator={kind.value}; params: {config.params.describe()}"
        emit.emit_state_csv(state, config.out, header)
    return EXIT_OK


def run_sweep(config: RunConfig) -> int:
    table = experiments.time_sweep(_sweep_config(config))
    _log_transitions(table)
    _write_table(config, table)
    return EXIT_OK


def run_figure(config: RunConfig) -> int:
    preset = experiments.get_preset(config.name)
    get_logger().info("%s: %s", preset.name, preset.caption)
    table = experiments.run_sweep(_figure_config(config))
    _log_transitions(table)
    if config.name in ("fig10a", "fig10b", "fig11a", "fig11b"):
        bound = experiments.exchange_bound(table)
        get_logger().info("exchange bound holds=%s maxima=%s", bound.holds, {p.value: v for p, v in bound.maxima.items()})
    _write_table(config, table)
    return EXIT_OK


def run_validate(config: RunConfig) -> int:
    """Write the closed-form validation report and print its summary; findings never fail the run."""
    report = experiments.validate_closed_forms()
    if config.out is not None:
        emit.emit_validation_csv(report, config.out)
    print(f"closed-form validation: {len(report)} records")
    print(report.summary().to_string(float_format=lambda v: f"{v:.6g}"))
    status = "oracle-consistent" if report.commuting_limit_consistent() else "INCONSISTENT"
    print(f"commuting limit (D_z=0, {len(report.commuting_limit_records())} records): {status} within 1e-9")
    conventions = dynamics.closed_form_conventions(SystemParams(kappa=1.0, dz=0.5))
    gap = dynamics.propagator_disagreement(conventions, experiments.DEFAULT_VALIDATION_TIMES)
    print(f"max factorized/exact propagator distance (D_z=0.5, t in [0,5]): {gap:.6g}")
    state = dynamics.initial_state(conventions)
    rho_ab = dynamics.marginal(state, PartitionId.AB)
    for mode in InfoMode:
        print(
            f"I_non at alpha=pi/3, kappa=1 ({mode.value}): "
            f"AB={measures.nonlocal_information(rho_ab, mode):.6g} ABC={measures.nonlocal_information(state, mode):.6g}"
        )
    return EXIT_OK


def run_list_presets(config: RunConfig) -> int:
    for name, preset in experiments.PRESETS.items():
        print(f"{name}\t{preset.caption}")
    return EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "evolve": run_evolve,
    "sweep": run_sweep,
    "figure": run_figure,
    "validate": run_validate,
    "list-presets": run_list_presets,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    if config.verbose:
        configure_logger(level=logging.INFO, handler=logging.StreamHandler(sys.stderr))
    else:
        configure_logger(level=logging.WARNING, handler=logging.StreamHandler(sys.stderr))
    try:
        return COMMANDS[config.command](config)
    except OSError as e:
        print(f"tri-dm: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ArithmeticError as e:
        print(f"tri-dm: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as e:
        print(f"tri-dm: invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
