import xml.etree.ElementTree as ET

import numpy as np
import pytest

from tridm import __version__, dynamics, emit, experiments
from tridm.models import PartitionId, Propagator, SweepConfig, SweepRow, SweepTable, SystemParams

SVG_NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture
def small_table():
    config = SweepConfig(
        params=SystemParams(kappa=0.9, omega=0.5, dz=0.9),
        t_end=2.0,
        n_steps=21,
        propagator=Propagator.FACTORIZED,
        partitions=(PartitionId.AB, PartitionId.AC),
    )
    return experiments.time_sweep(config)


def test_csv_header_and_columns(small_table, tmp_path):
    path = tmp_path / "sweep.csv"

    emit.emit_csv(small_table, path)
    lines = path.read_bytes().decode("utf-8").split("\n")

    assert lines[0] == (
        f"# tri-dm v{__version__}; propagator=factorized; info_mode=total; "
        "params: alpha=1.0471975512,gamma=1.57079632679,kappa=0.9,omega=0.5,dz=0.9"
    )
    assert lines[1] == "t,AB_C,AB_N,AB_EF,AB_purity,AB_Inon,AC_C,AC_N,AC_EF,AC_purity,AC_Inon"
    assert len(lines) == 2 + 21 + 1
    assert lines[-1] == ""
    assert b"\r" not in path.read_bytes()


def test_preset_header_keeps_fixed_prefix_before_provenance_fields():
    header = emit.csv_header(experiments.run_preset("fig3", n_steps=3))

    assert header == (
        f"# tri-dm v{__version__}; propagator=factorized; info_mode=total; "
        "params: alpha=1.0471975512,gamma=1.57079632679,kappa=0.9,omega=2,dz=0.9; "
        "preset=fig3; inferred=omega; inherited=kappa"
    )


def test_csv_round_trip_recovers_values(small_table, tmp_path):
    path = tmp_path / "sweep.csv"
    emit.emit_csv(small_table, path)

    frame = emit.read_csv(path)

    np.testing.assert_allclose(frame["t"], small_table.xs(), atol=1e-11)
    for partition in small_table.partitions:
        for field, suffix in (("concurrence", "C"), ("purity", "purity"), ("info_nonlocal", "Inon")):
            np.testing.assert_allclose(
                frame[f"{partition.value}_{suffix}"], small_table.column(partition, field), atol=1e-11
            )


def test_csv_uses_twelve_significant_digits(small_table):
    text = emit.format_csv(small_table)

    for line in text.splitlines()[2:]:
        for cell in line.split(","):
            digits = cell.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
            assert len(digits) <= 12


def test_empty_partitions_emit_time_column_only(tmp_path):
    config = SweepConfig(t_end=1.0, n_steps=2, partitions=())
    table = SweepTable(config, [SweepRow(x=0.0, measures={}), SweepRow(x=1.0, measures={})])
    path = tmp_path / "empty.csv"

    emit.emit_csv(table, path)

    assert path.read_text(encoding="utf-8").split("\n")[1:] == ["t", "0", "1", ""]


def test_kappa_sweep_csv_leaves_missing_quantifiers_empty():
    text = emit.format_csv(experiments.kappa_sweep(SystemParams(), [0.0, 1.0], partitions=(PartitionId.ABC,)))
    lines = text.split("\n")

    assert lines[0].endswith("; params: alpha=1.0471975512,gamma=1.57079632679,kappa=1,omega=2,dz=0.5; t=0")
    assert lines[1].startswith("kappa,ABC_C")
    assert lines[3].startswith("1,,,,1,3")


def test_two_runs_are_byte_identical(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"

    emit.emit_csv(experiments.run_preset("fig4b", n_steps=51), first)
    emit.emit_csv(experiments.run_preset("fig4b", n_steps=51), second)

    assert first.read_bytes() == second.read_bytes()


def test_svg_is_well_formed_with_one_point_per_row(small_table, tmp_path):
    written = emit.emit_svg(small_table, tmp_path / "sweep.csv")

    assert [p.name for p in written] == ["sweep_AB.svg", "sweep_AC.svg"]
    root = ET.parse(written[0]).getroot()
    polylines = root.findall(f"{SVG_NS}polyline")
    labels = [text.text for text in root.findall(f"{SVG_NS}text")]

    assert root.tag == f"{SVG_NS}svg"
    assert [p.get("data-series") for p in polylines] == ["C", "N", "E_F", "I_non"]
    for polyline in polylines:
        assert len(polyline.get("points").split()) == len(small_table)
    assert {"C", "N", "E_F", "I_non"} <= set(labels)


def test_svg_zero_series_sits_on_baseline():
    # No coupling and a weight below the Werner threshold: C stays exactly zero.
    params = SystemParams(kappa=0.3, omega=0.0, dz=0.0)
    table = experiments.time_sweep(SweepConfig(params=params, t_end=1.0, n_steps=4))

    root = ET.fromstring(emit.render_svg(table, PartitionId.AB))
    concurrence = next(p for p in root.iter(f"{SVG_NS}polyline") if p.get("data-series") == "C")
    ys = {point.split(",")[1] for point in concurrence.get("points").split()}

    assert len(ys) == 1
    baseline = emit.SVG_HEIGHT - 50
    assert float(ys.pop()) == pytest.approx(baseline)


def test_state_csv_has_long_format(tmp_path):
    path = tmp_path / "state.csv"
    rho = dynamics.initial_state(SystemParams())

    emit.emit_state_csv(rho, path, "# state")
    frame = emit.read_csv(path)

    assert list(frame.columns) == ["i", "j", "re", "im"]
    assert len(frame) == 64
    assert frame.loc[frame["i"] == frame["j"], "re"].sum() == pytest.approx(1.0)
    assert frame["im"].abs().max() == pytest.approx(0.0, abs=1e-15)


def test_validation_csv(tmp_path):
    report = experiments.validate_closed_forms(kappas=(0.5,), dzs=(0.0,), times=(0.0, 1.0))
    path = tmp_path / "validation.csv"

    emit.emit_validation_csv(report, path)
    frame = emit.read_csv(path)

    assert len(frame) == 6
    assert set(frame["partition"]) == {"AB", "AC", "BC"}
    assert path.read_text(encoding="utf-8").startswith("# tri-dm v")
