import dataclasses
import math
from enum import Enum
from typing import Iterator, Optional, Union

import numpy as np
import pandas as pd
from pydantic import ConfigDict, Field, field_validator, model_validator
from pydantic.dataclasses import dataclass

# Value types shared by the dynamics, measures, experiments and CLI layers. Parameter
# records are frozen pydantic dataclasses; ordered results are list-like collections.

DEFAULT_T_START = 0.0
DEFAULT_T_END = 5.0
DEFAULT_STEPS = 501

# The closed forms of the marginal elements were evidently derived at these values
# (sqrt(3) factors from alpha = pi/3, sin(2t)/cos(2t) arguments from omega = 2).
CLOSED_FORM_CONVENTIONS = {"alpha": math.pi / 3, "gamma": math.pi / 2, "omega": 2.0}

_STRICT = ConfigDict(allow_inf_nan=False)


class PartitionId(Enum):
    AB = "AB"
    AC = "AC"
    BC = "BC"
    A = "A"
    B = "B"
    C = "C"
    ABC = "ABC"

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple("ABC".index(label) for label in self.value)

    @property
    def n_qubits(self) -> int:
        return len(self.value)

    @property
    def is_pair(self) -> bool:
        return self.n_qubits == 2


PAIRS = (PartitionId.AB, PartitionId.AC, PartitionId.BC)


class Propagator(Enum):
    EXACT = "exact"
    FACTORIZED = "factorized"
    CLOSED_FORM = "closed_form"


class InfoMode(Enum):
    TOTAL = "total"
    TOTAL_MINUS_LOCAL = "total_minus_local"


@dataclass(frozen=True, config=_STRICT)
class SystemParams:
    """Physical knobs of the model. D_x = D_y = 0; the DM vector is polarized along z."""

    alpha: float = math.pi / 3
    gamma: float = math.pi / 2
    kappa: float = 1.0
    omega: float = 2.0
    dz: float = 0.5

    @field_validator("kappa")
    @classmethod
    def _kappa_in_unit_interval(cls, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError("kappa out of [0,1]")
        return value

    def with_overrides(self, **overrides: float) -> "SystemParams":
        return dataclasses.replace(self, **overrides)

    def matches_closed_form_conventions(self, atol: float = 1e-12) -> bool:
        return all(abs(getattr(self, name) - value) <= atol for name, value in CLOSED_FORM_CONVENTIONS.items())

    def describe(self) -> str:
        return ",".join(f"{name}={getattr(self, name):.12g}" for name in ("alpha", "gamma", "kappa", "omega", "dz"))


@dataclass(frozen=True, config=_STRICT)
class MeasureSet:
    """Quantifiers of one marginal at one point; entanglement fields are None for non-pairs."""

    purity: float
    info_total: float
    info_nonlocal: float
    concurrence: Optional[float] = None
    negativity: Optional[float] = None
    eof: Optional[float] = None

    @field_validator("concurrence", "negativity", "eof")
    @classmethod
    def _unit_interval(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not 0.0 <= value <= 1.0:
            raise ValueError(f"entanglement quantifier {value} outside [0,1]")
        return value

    @field_validator("purity")
    @classmethod
    def _purity_range(cls, value: float) -> float:
        if not 0.0 < value <= 1.0 + 1e-9:
            raise ValueError(f"purity {value} outside (0,1]")
        return value


def _check_partitions(partitions: tuple[PartitionId, ...]) -> None:
    if len(set(partitions)) != len(partitions):
        raise ValueError("partitions must not repeat")


@dataclass(frozen=True, config=_STRICT)
class SweepConfig:
    params: SystemParams = Field(default_factory=SystemParams)
    t_start: float = DEFAULT_T_START
    t_end: float = DEFAULT_T_END
    n_steps: int = DEFAULT_STEPS
    propagator: Propagator = Propagator.EXACT
    partitions: tuple[PartitionId, ...] = (PartitionId.AB,)
    info_mode: InfoMode = InfoMode.TOTAL
    allow_convention_override: bool = False
    workers: int = 1
    # Names of parameters taken from inference or from an earlier caption.
    inferred: tuple[str, ...] = ()
    inherited: tuple[str, ...] = ()
    label: Optional[str] = None

    @model_validator(mode="after")
    def _check_grid_and_propagator(self) -> "SweepConfig":
        if not self.t_end > self.t_start:
            raise ValueError("t_end must be greater than t_start")
        if self.n_steps < 2:
            raise ValueError("n_steps must be at least 2")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        _check_partitions(self.partitions)
        if self.propagator is Propagator.CLOSED_FORM:
            if any(not partition.is_pair for partition in self.partitions):
                raise ValueError("closed_form propagator only provides the AB, AC and BC marginals")
            if not (self.allow_convention_override or self.params.matches_closed_form_conventions()):
                raise ValueError(
                    "closed_form propagator requires alpha=pi/3, gamma=pi/2, omega=2 "
                    "(set allow_convention_override to evaluate it anyway)"
                )
        return self

    def times(self) -> np.ndarray:
        step = (self.t_end - self.t_start) / (self.n_steps - 1)
        return np.array([self.t_start + k * step for k in range(self.n_steps)])


@dataclass(frozen=True, config=_STRICT)
class KappaSweepConfig:
    template: SystemParams = Field(default_factory=SystemParams)
    kappas: tuple[float, ...] = tuple(k / 100 for k in range(101))
    t: float = 0.0
    propagator: Propagator = Propagator.EXACT
    partitions: tuple[PartitionId, ...] = (PartitionId.AB,)
    info_mode: InfoMode = InfoMode.TOTAL
    inferred: tuple[str, ...] = ()
    inherited: tuple[str, ...] = ()
    label: Optional[str] = None

    @model_validator(mode="after")
    def _check_grid(self) -> "KappaSweepConfig":
        if not self.kappas:
            raise ValueError("kappa grid must not be empty")
        if any(not 0.0 <= kappa <= 1.0 for kappa in self.kappas):
            raise ValueError("kappa grid out of [0,1]")
        if any(b <= a for a, b in zip(self.kappas, self.kappas[1:])):
            raise ValueError("kappa grid must be strictly increasing")
        if self.propagator is Propagator.CLOSED_FORM:
            raise ValueError("kappa sweeps support the exact and factorized propagators only")
        _check_partitions(self.partitions)
        return self

    @property
    def params(self) -> SystemParams:
        return self.template


@dataclass(frozen=True)
class SweepRow:
    x: float
    measures: dict[PartitionId, MeasureSet]


# (MeasureSet attribute, CSV column suffix)
FIELD_COLUMNS = (
    ("concurrence", "C"),
    ("negativity", "N"),
    ("eof", "EF"),
    ("purity", "purity"),
    ("info_nonlocal", "Inon"),
)


class SweepTable:
    """Ordered rows of (t or kappa, per-partition MeasureSet) produced by one sweep."""

    def __init__(self, config: Union[SweepConfig, KappaSweepConfig], rows: list[SweepRow]) -> None:
        self.config = config
        self.axis = "t" if isinstance(config, SweepConfig) else "kappa"
        self.rows = list(rows)
        self._validate()

    def _validate(self) -> None:
        expected = self.config.n_steps if self.axis == "t" else len(self.config.kappas)
        if len(self.rows) != expected:
            raise ValueError(f"SweepTable expects {expected} rows, got {len(self.rows)}")
        xs = [row.x for row in self.rows]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError(f"SweepTable {self.axis} values must be strictly increasing")
        for row in self.rows:
            if set(row.measures) != set(self.config.partitions):
                raise ValueError(f"Row at {self.axis}={row.x} does not cover partitions {self.partitions}")

    @property
    def params(self) -> SystemParams:
        return self.config.params

    @property
    def partitions(self) -> tuple[PartitionId, ...]:
        return self.config.partitions

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[SweepRow]:
        return iter(self.rows)

    def __getitem__(self, index: int) -> SweepRow:
        if isinstance(index, int):
            return self.rows[index]
        raise TypeError("Index must be integer")

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(axis={self.axis!r}, partitions={[p.value for p in self.partitions]}, rows={len(self)})"

    def xs(self) -> np.ndarray:
        return np.array([row.x for row in self.rows])

    def column(self, partition: PartitionId, field: str) -> np.ndarray:
        values = [getattr(row.measures[partition], field) for row in self.rows]
        return np.array([np.nan if value is None else value for value in values], dtype=float)

    def to_frame(self) -> pd.DataFrame:
        columns = {self.axis: self.xs()}
        for partition in self.partitions:
            for field, suffix in FIELD_COLUMNS:
                columns[f"{partition.value}_{suffix}"] = self.column(partition, field)
        return pd.DataFrame(columns)


@dataclass(frozen=True, config=_STRICT)
class ValidityReport:
    """Findings for one evaluation of the printed closed-form marginal elements."""

    partition: PartitionId
    t: float
    kappa: float
    dz: float
    trace_deviation: float
    hermiticity_deviation: float
    min_eigenvalue: float
    distance: float
    propagator: Propagator
    conventions_matched: bool
    oracle_consistent: bool


@dataclass(frozen=True, config=_STRICT)
class ValidationRecord:
    kappa: float
    dz: float
    t: float
    partition: PartitionId
    trace_deviation: float
    hermiticity_deviation: float
    min_eigenvalue: float
    distance_factorized: float
    distance_exact: float
    propagator_gap: float

    @property
    def commuting_limit(self) -> bool:
        return self.dz == 0.0


class ValidationReport:
    """Closed-form versus propagator findings, one record per grid point and pair."""

    def __init__(self, records: list[ValidationRecord]) -> None:
        if not all(isinstance(record, ValidationRecord) for record in records):
            raise TypeError("All records must be ValidationRecord instances")
        self.records = list(records)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ValidationRecord]:
        return iter(self.records)

    def __getitem__(self, index: int) -> ValidationRecord:
        return self.records[index]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([dataclasses.asdict(record) for record in self.records])
        if not frame.empty:
            frame["partition"] = [record.partition.value for record in self.records]
        return frame

    def summary(self) -> pd.DataFrame:
        frame = self.to_frame()
        return frame.groupby("partition", sort=False).agg(
            records=("t", "size"),
            max_trace_deviation=("trace_deviation", "max"),
            max_hermiticity_deviation=("hermiticity_deviation", "max"),
            min_eigenvalue=("min_eigenvalue", "min"),
            max_distance_factorized=("distance_factorized", "max"),
            mean_distance_factorized=("distance_factorized", "mean"),
            max_distance_exact=("distance_exact", "max"),
            mean_distance_exact=("distance_exact", "mean"),
            max_propagator_gap=("propagator_gap", "max"),
        )

    def commuting_limit_records(self) -> list[ValidationRecord]:
        return [record for record in self.records if record.commuting_limit]

    def commuting_limit_consistent(self, atol: float = 1e-9) -> bool:
        return all(record.propagator_gap <= atol for record in self.commuting_limit_records())


@dataclass(frozen=True, config=_STRICT)
class RunConfig:
    """A parsed ``tri-dm`` invocation."""

    command: str
    params: SystemParams = Field(default_factory=SystemParams)
    t_start: float = DEFAULT_T_START
    t_end: float = DEFAULT_T_END
    t: float = 0.0
    steps: int = DEFAULT_STEPS
    propagator: Optional[Propagator] = None
    info_mode: InfoMode = InfoMode.TOTAL
    partitions: Optional[tuple[PartitionId, ...]] = None
    name: Optional[str] = None
    out: Optional[str] = None
    fmt: str = "csv"
    allow_convention_override: bool = False
    workers: int = 1
    verbose: bool = False

    @field_validator("command")
    @classmethod
    def _known_command(cls, value: str) -> str:
        if value not in {"evolve", "sweep", "figure", "validate", "list-presets"}:
            raise ValueError(f"unknown command {value!r}")
        return value

    @field_validator("fmt")
    @classmethod
    def _known_format(cls, value: str) -> str:
        if value not in {"csv", "csv+svg"}:
            raise ValueError(f"unknown format {value!r}")
        return value
