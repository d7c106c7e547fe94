import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError

from . import dynamics, measures, utils
from .logging_utils import get_logger
from .models import (
    PAIRS,
    InfoMode,
    KappaSweepConfig,
    MeasureSet,
    PartitionId,
    Propagator,
    SweepConfig,
    SweepRow,
    SweepTable,
    SystemParams,
    ValidationRecord,
    ValidationReport,
)

# Time and kappa sweeps, the figure presets and the closed-form validation campaign.
# Propagators are evaluated directly at every grid point, never step-composed.

DEFAULT_KAPPA_GRID = (0.0, 0.3, 0.6, 0.9, 1.0)
DEFAULT_DZ_GRID = (0.0, 0.5, 0.9)
DEFAULT_VALIDATION_TIMES = tuple(k * 0.25 for k in range(21))
EXCHANGE_SLACK = 1e-6
# Samples on the local grid spanning the two intervals around a sampled maximum.
REFINE_POINTS = 41

# Onset, first maximum and first death of C(rho_AB) for the fig2a parameters, widened
# around the reported t ~ 0.9, 1.2 and 1.6.
FIG2A_BRACKETS = {"onset": (0.6, 1.2), "peak": (0.9, 1.5), "death": (1.3, 1.9)}

SweepConfigType = Union[SweepConfig, KappaSweepConfig]


class SweepError(ArithmeticError):
    def __init__(self, axis: str, point: float, cause: Exception):
        super().__init__(f"Sweep failed at {axis}={point!r}: {cause}")
        self.axis = axis
        self.point = point


class UnknownPresetError(KeyError):
    def __init__(self, name: str):
        super().__init__(f"Unknown figure preset {name!r}; known presets: {', '.join(PRESETS)}")
        self.name = name


def evaluate_point(
    params: SystemParams,
    t: float,
    partitions: Sequence[PartitionId],
    propagator: Propagator = Propagator.EXACT,
    info_mode: InfoMode = InfoMode.TOTAL,
) -> dict[PartitionId, MeasureSet]:
    """Quantifiers of every requested partition at one time point."""
    if propagator is Propagator.CLOSED_FORM:
        return {part: measures.measure_all(_physical_closed_form(params, t, part), info_mode) for part in partitions}
    state = dynamics.evolve_state(params, t, propagator)
    result = {}
    for part in partitions:
        if part is PartitionId.ABC:
            result[part] = measures.measure_information(state, info_mode)
        else:
            result[part] = measures.measure_information(dynamics.marginal(state, part), info_mode)
    return result


def _physical_closed_form(params: SystemParams, t: float, part: PartitionId) -> dynamics.DensityMatrix:
    candidate = dynamics.closed_form_state(params.kappa, params.dz, t, part)
    try:
        return candidate.require_valid()
    except dynamics.InvalidStateError as e:
        raise dynamics.InvalidStateError(f"closed-form {part.value} marginal is unphysical: {e}") from e


def _guarded(axis: str, point: float, func, *args) -> dict[PartitionId, MeasureSet]:
    try:
        return func(*args)
    except (ArithmeticError, ValidationError) as e:
        raise SweepError(axis, point, e) from e


def _map_ordered(func, points: Sequence[float], workers: int) -> list:
    if workers <= 1:
        return [func(point) for point in points]
    # Executor.map yields results in submission order whatever the completion order.
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, points))


def time_sweep(cfg: SweepConfig) -> SweepTable:
    times = cfg.times()
    get_logger().info(
        "Time sweep %s: %d points over [%g, %g], propagator=%s, partitions=%s",
        cfg.label or "(custom)", cfg.n_steps, cfg.t_start, cfg.t_end, cfg.propagator.value,
        ",".join(p.value for p in cfg.partitions),
    )
    if cfg.propagator is Propagator.CLOSED_FORM and not cfg.params.matches_closed_form_conventions():
        get_logger().warning("Closed forms evaluated outside their alpha=pi/3, gamma=pi/2, omega=2 convention")

    def row(t: float) -> SweepRow:
        values = _guarded("t", float(t), evaluate_point, cfg.params, float(t), cfg.partitions, cfg.propagator, cfg.info_mode)
        return SweepRow(x=float(t), measures=values)

    table = SweepTable(cfg, _map_ordered(row, times, cfg.workers))
    get_logger().info("Time sweep %s finished with %d rows", cfg.label or "(custom)", len(table))
    return table


def run_kappa_sweep(cfg: KappaSweepConfig) -> SweepTable:
    get_logger().info("Kappa sweep %s: %d points at t=%g", cfg.label or "(custom)", len(cfg.kappas), cfg.t)

    def row(kappa: float) -> SweepRow:
        params = cfg.template.with_overrides(kappa=kappa)
        values = _guarded("kappa", kappa, evaluate_point, params, cfg.t, cfg.partitions, cfg.propagator, cfg.info_mode)
        return SweepRow(x=float(kappa), measures=values)

    return SweepTable(cfg, [row(kappa) for kappa in cfg.kappas])


def kappa_sweep(
    template: SystemParams,
    kappas: Iterable[float],
    t: float = 0.0,
    *,
    partitions: Sequence[PartitionId] = (PartitionId.AB,),
    propagator: Propagator = Propagator.EXACT,
    info_mode: InfoMode = InfoMode.TOTAL,
) -> SweepTable:
    cfg = KappaSweepConfig(
        template=template,
        kappas=tuple(float(kappa) for kappa in kappas),
        t=t,
        propagator=propagator,
        partitions=tuple(partitions),
        info_mode=info_mode,
    )
    return run_kappa_sweep(cfg)


def run_sweep(cfg: SweepConfigType) -> SweepTable:
    if isinstance(cfg, KappaSweepConfig):
        return run_kappa_sweep(cfg)
    return time_sweep(cfg)


@dataclasses.dataclass(frozen=True)
class FigurePreset:
    name: str
    caption: str
    config: SweepConfigType


_ALPHA = math.pi / 3
_GAMMA = math.pi / 2
_FINE_KAPPAS = tuple(k / 100 for k in range(101))


def _time_preset(
    name: str,
    caption: str,
    *,
    kappa: float,
    dz: float,
    omega: float,
    partitions: tuple[PartitionId, ...],
    inferred: tuple[str, ...] = (),
    inherited: tuple[str, ...] = (),
) -> FigurePreset:
    config = SweepConfig(
        params=SystemParams(alpha=_ALPHA, gamma=_GAMMA, kappa=kappa, omega=omega, dz=dz),
        propagator=Propagator.FACTORIZED,
        partitions=partitions,
        inferred=inferred,
        inherited=inherited,
        label=name,
    )
    return FigurePreset(name, caption, config)


def _kappa_preset(
    name: str,
    caption: str,
    *,
    partitions: tuple[PartitionId, ...],
    inferred: tuple[str, ...] = (),
) -> FigurePreset:
    config = KappaSweepConfig(
        template=SystemParams(alpha=_ALPHA, gamma=_GAMMA, kappa=1.0, omega=2.0, dz=0.5),
        kappas=_FINE_KAPPAS,
        t=0.0,
        propagator=Propagator.FACTORIZED,
        partitions=partitions,
        inferred=inferred,
        label=name,
    )
    return FigurePreset(name, caption, config)


_AB = (PartitionId.AB,)
_AC = (PartitionId.AC,)
_BC = (PartitionId.BC,)

PRESETS: dict[str, FigurePreset] = {
    preset.name: preset
    for preset in (
        _kappa_preset("fig1", "C, N and E_F of rho_AB(0) versus kappa, alpha=pi/3", partitions=_AB),
        # Fig. 2 never states omega; omega=2 is inferred from the closed forms and Fig. 9.
        _time_preset("fig2a", "rho_AB(t), alpha=pi/3, gamma=pi/2, D_z=0.5, kappa=0.3",
                     kappa=0.3, dz=0.5, omega=2.0, partitions=_AB, inferred=("omega",)),
        _time_preset("fig2b", "rho_AB(t), alpha=pi/3, gamma=pi/2, D_z=0.5, kappa=0.9",
                     kappa=0.9, dz=0.5, omega=2.0, partitions=_AB, inferred=("omega",)),
        _time_preset("fig3", "same as fig2b but D_z=0.9",
                     kappa=0.9, dz=0.9, omega=2.0, partitions=_AB, inferred=("omega",), inherited=("kappa",)),
        _time_preset("fig4a", "same as fig2 but omega=1, kappa=0.9",
                     kappa=0.9, dz=0.5, omega=1.0, partitions=_AB, inherited=("dz",)),
        _time_preset("fig4b", "same as fig2 but omega=0.5, kappa=0.9",
                     kappa=0.9, dz=0.5, omega=0.5, partitions=_AB, inherited=("dz",)),
        _time_preset("fig5a", "rho_AC(t), kappa=0.9, omega=0.5, gamma=pi/2, alpha=pi/3, D_z=0.5",
                     kappa=0.9, dz=0.5, omega=0.5, partitions=_AC),
        _time_preset("fig5b", "rho_AC(t), kappa=0.9, omega=0.5, gamma=pi/2, alpha=pi/3, D_z=0.9",
                     kappa=0.9, dz=0.9, omega=0.5, partitions=_AC),
        _time_preset("fig6a", "same as fig4 but rho_AC, omega=1",
                     kappa=0.9, dz=0.5, omega=1.0, partitions=_AC, inherited=("kappa", "dz")),
        _time_preset("fig6b", "same as fig4 but rho_AC, omega=2",
                     kappa=0.9, dz=0.5, omega=2.0, partitions=_AC, inherited=("kappa", "dz")),
        _time_preset("fig7a", "same as fig5a but rho_BC",
                     kappa=0.9, dz=0.5, omega=0.5, partitions=_BC, inherited=("kappa", "omega", "dz")),
        _time_preset("fig7b", "same as fig5b but rho_BC",
                     kappa=0.9, dz=0.9, omega=0.5, partitions=_BC, inherited=("kappa", "omega", "dz")),
        _time_preset("fig8a", "same as fig4 but rho_BC, omega=1",
                     kappa=0.9, dz=0.5, omega=1.0, partitions=_BC, inherited=("kappa", "dz")),
        _time_preset("fig8b", "same as fig4 but rho_BC, omega=2",
                     kappa=0.9, dz=0.5, omega=2.0, partitions=_BC, inherited=("kappa", "dz")),
        # The panel also varies alpha; the sweep runs at alpha=pi/3 only. Total information
        # of rho_AB(0) does not depend on alpha.
        _kappa_preset("fig9a", "I_non(rho_AB(0)) versus kappa, omega=2, gamma=pi/2, alpha=pi/3, D_z=0.5",
                      partitions=_AB, inferred=("alpha",)),
        # The full-state information is unitarily invariant in total mode, so t=0 is used.
        _kappa_preset("fig9b", "I_non(rho_ABC) versus kappa, omega=2, gamma=pi/2, alpha=pi/3, D_z=0.5",
                      partitions=(PartitionId.ABC,), inferred=("t",)),
        _time_preset("fig10a", "I_non(rho_ij), D_z=0.9, omega=0.5, gamma=pi/2, alpha=pi/3, kappa=0.3",
                     kappa=0.3, dz=0.9, omega=0.5, partitions=PAIRS),
        _time_preset("fig10b", "I_non(rho_ij), D_z=0.9, omega=0.5, gamma=pi/2, alpha=pi/3, kappa=0.9",
                     kappa=0.9, dz=0.9, omega=0.5, partitions=PAIRS),
        _time_preset("fig11a", "same as fig10a but D_z=0.5",
                     kappa=0.3, dz=0.5, omega=0.5, partitions=PAIRS, inherited=("kappa", "omega")),
        _time_preset("fig11b", "same as fig10b but omega=2",
                     kappa=0.9, dz=0.9, omega=2.0, partitions=PAIRS, inherited=("kappa", "dz")),
    )
}


def get_preset(name: str) -> FigurePreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPresetError(name) from None


def figure_preset(name: str) -> SweepConfigType:
    return get_preset(name).config


def run_preset(name: str, **overrides) -> SweepTable:
    """Run a preset; ``overrides`` replace config fields (e.g. propagator, info_mode, n_steps)."""
    config = figure_preset(name)
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return run_sweep(config)


def transitions(
    table: SweepTable,
    partition: PartitionId = PartitionId.AB,
    field: str = "concurrence",
    threshold: float = utils.ZERO_THRESHOLD,
) -> list[utils.Transition]:
    return utils.transitions(table.xs(), table.column(partition, field), threshold)


def first_local_maximum(
    table: SweepTable,
    partition: PartitionId = PartitionId.AB,
    field: str = "concurrence",
    threshold: float = utils.ZERO_THRESHOLD,
) -> Optional[float]:
    return utils.first_local_maximum(table.xs(), table.column(partition, field), threshold)


class OnsetFeatures(NamedTuple):
    zero_at_start: bool
    onset: Optional[float]
    peak: Optional[float]
    death: Optional[float]

    def within(self, brackets: dict[str, tuple[float, float]] = FIG2A_BRACKETS) -> bool:
        for key, (low, high) in brackets.items():
            value = getattr(self, key)
            if value is None or not low <= value <= high:
                return False
        return self.zero_at_start


def onset_features(
    table: SweepTable,
    partition: PartitionId = PartitionId.AB,
    field: str = "concurrence",
    threshold: float = utils.ZERO_THRESHOLD,
) -> OnsetFeatures:
    """First sudden birth, the first maximum after it, and the first death after that."""
    xs, values = table.xs(), table.column(partition, field)
    found = utils.transitions(xs, values, threshold)
    onset = next((tr.x for tr in found if tr.kind == "birth"), None)
    peak = death = None
    if onset is not None:
        after = xs >= onset
        peak = utils.first_local_maximum(xs[after], values[after], threshold)
        death = next((tr.x for tr in found if tr.kind == "death" and tr.x > onset), None)
    return OnsetFeatures(bool(values[0] < threshold), onset, peak, death)


class ExchangeBound(NamedTuple):
    maxima: dict[PartitionId, float]
    holds: bool


def _refined_maximum(table: SweepTable, part: PartitionId, field: str) -> float:
    xs, values = table.xs(), table.column(part, field)
    k = int(np.nanargmax(values))
    best = float(values[k])
    config = table.config
    if table.axis != "t" or part not in PAIRS or config.propagator is Propagator.CLOSED_FORM:
        return best
    for t in np.linspace(xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)], REFINE_POINTS):
        value = getattr(evaluate_point(config.params, float(t), (part,), config.propagator, config.info_mode)[part], field)
        best = max(best, value)
    return best


def exchange_bound(
    table: SweepTable,
    field: str = "info_nonlocal",
    slack: float = EXCHANGE_SLACK,
    *,
    refine: bool = True,
) -> ExchangeBound:
    """
    Check that the maxima on AC and BC do not exceed the maximum on AB.

    With ``refine`` the sampled maximum of each pair in a time sweep is re-evaluated on
    a local grid around its argmax, so a peak falling between grid points is not
    under-reported.
    """
    if PartitionId.AB not in table.partitions:
        raise ValueError("exchange bound needs the AB partition in the sweep")
    if refine:
        maxima = {part: _refined_maximum(table, part, field) for part in table.partitions}
    else:
        maxima = {part: float(np.nanmax(table.column(part, field))) for part in table.partitions}
    reference = maxima[PartitionId.AB]
    holds = all(maxima[part] <= reference + slack for part in (PartitionId.AC, PartitionId.BC) if part in maxima)
    if not holds:
        get_logger().warning(
            "Exchange bound violated for %s: %s",
            table.config.label or "(custom)", {part.value: value for part, value in maxima.items()},
        )
    return ExchangeBound(maxima, holds)


def validate_closed_forms(
    kappas: Sequence[float] = DEFAULT_KAPPA_GRID,
    dzs: Sequence[float] = DEFAULT_DZ_GRID,
    times: Sequence[float] = DEFAULT_VALIDATION_TIMES,
) -> ValidationReport:
    """
    Compare the printed closed-form marginals with both propagators on a grid.

    Every (kappa, D_z, t, pair) point yields one record; findings are data, nothing is
    raised for unphysical closed forms.
    """
    if not kappas or not dzs or not times:
        raise ValueError("validation grids must be nonempty")
    get_logger().info("Validating closed forms on %d x %d x %d grid", len(kappas), len(dzs), len(times))
    records = []
    for kappa in kappas:
        for dz in dzs:
            params = dynamics.closed_form_conventions(SystemParams(kappa=kappa, dz=dz))
            for t in times:
                exact = dynamics.evolve_state(params, t, Propagator.EXACT)
                factorized = dynamics.evolve_state(params, t, Propagator.FACTORIZED)
                for part in PAIRS:
                    candidate = dynamics.closed_form_state(kappa, dz, t, part)
                    exact_marginal = dynamics.marginal(exact, part).matrix
                    factorized_marginal = dynamics.marginal(factorized, part).matrix
                    trace_deviation, hermiticity_deviation, min_eigenvalue = candidate.violations()
                    records.append(ValidationRecord(
                        kappa=kappa,
                        dz=dz,
                        t=t,
                        partition=part,
                        trace_deviation=trace_deviation,
                        hermiticity_deviation=hermiticity_deviation,
                        min_eigenvalue=min_eigenvalue,
                        distance_factorized=candidate.matrix.frobenius_distance(factorized_marginal),
                        distance_exact=candidate.matrix.frobenius_distance(exact_marginal),
                        propagator_gap=factorized_marginal.frobenius_distance(exact_marginal),
                    ))
    report = ValidationReport(records)
    if not report.commuting_limit_consistent():
        get_logger().warning("Factorized and exact propagators disagree in the commuting limit D_z=0")
    return report
