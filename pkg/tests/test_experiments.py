import math

import numpy as np
import pytest

from tridm import dynamics, emit, experiments, measures
from tridm.models import (
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
)

WERNER_THRESHOLD = 1 / (1 + math.sqrt(3))


def test_presets_cover_every_figure_panel():
    assert len(experiments.PRESETS) == 20
    assert list(experiments.PRESETS)[:3] == ["fig1", "fig2a", "fig2b"]
    for name, preset in experiments.PRESETS.items():
        assert preset.config.label == name
        assert preset.config.propagator is Propagator.FACTORIZED
        assert preset.config.params.alpha == pytest.approx(math.pi / 3)
        assert preset.config.params.gamma == pytest.approx(math.pi / 2)


def test_preset_parameters_follow_captions():
    fig2a = experiments.figure_preset("fig2a")
    fig5b = experiments.figure_preset("fig5b")
    fig9b = experiments.figure_preset("fig9b")

    assert (fig2a.params.kappa, fig2a.params.omega, fig2a.params.dz) == (0.3, 2.0, 0.5)
    assert fig2a.inferred == ("omega",)
    assert fig5b.partitions == (PartitionId.AC,)
    assert (fig5b.params.omega, fig5b.params.dz) == (0.5, 0.9)
    assert isinstance(fig9b, KappaSweepConfig)
    assert fig9b.partitions == (PartitionId.ABC,)
    assert experiments.figure_preset("fig9a").inferred == ("alpha",)
    assert experiments.figure_preset("fig10a").partitions == PAIRS


def test_unknown_preset_raises_key_error():
    with pytest.raises(KeyError, match="fig12"):
        experiments.get_preset("fig12")


def test_werner_threshold_from_kappa_sweep():
    table = experiments.kappa_sweep(SystemParams(), np.linspace(0.3, 0.4, 101), t=0.0)

    births = [tr for tr in experiments.transitions(table, PartitionId.AB) if tr.kind == "birth"]

    assert len(births) == 1
    assert births[0].x == pytest.approx(WERNER_THRESHOLD, abs=1e-3)


def test_kappa_sweep_quantifiers_are_monotone():
    for alpha in (math.pi / 4, math.pi / 3):
        table = experiments.kappa_sweep(SystemParams(alpha=alpha), np.linspace(0.0, 1.0, 100))
        for field in ("concurrence", "negativity", "eof"):
            assert np.all(np.diff(table.column(PartitionId.AB, field)) >= -1e-12)


def test_full_state_information_reaches_three():
    table = experiments.run_preset("fig9b")

    info = table.column(PartitionId.ABC, "info_nonlocal")
    assert table.axis == "kappa"
    assert info[-1] == pytest.approx(3.0, abs=1e-9)
    assert info[0] == pytest.approx(3 * 8 / 7 * (0.25 - 1 / 8))
    assert np.isnan(table.column(PartitionId.ABC, "concurrence")).all()


def test_time_sweep_is_ordered_and_matches_pointwise_evaluation():
    config = SweepConfig(params=SystemParams(kappa=0.9), t_end=2.0, n_steps=21, partitions=PAIRS)

    table = experiments.time_sweep(config)
    point = experiments.evaluate_point(config.params, float(config.times()[7]), PAIRS)

    assert len(table) == 21
    assert np.all(np.diff(table.xs()) > 0)
    assert table[7].measures[PartitionId.BC] == point[PartitionId.BC]


def test_threaded_sweep_matches_serial_sweep():
    serial = SweepConfig(params=SystemParams(kappa=0.3), t_end=3.0, n_steps=31, propagator=Propagator.FACTORIZED)
    threaded = SweepConfig(
        params=SystemParams(kappa=0.3), t_end=3.0, n_steps=31, propagator=Propagator.FACTORIZED, workers=4
    )

    assert emit.format_csv(experiments.time_sweep(serial)) == emit.format_csv(experiments.time_sweep(threaded))


def test_closed_form_sweep_failure_names_the_time_point():
    config = SweepConfig(t_end=1.0, n_steps=3, propagator=Propagator.CLOSED_FORM, partitions=(PartitionId.AB,))

    # The printed AB elements are unphysical at t = 0 (trace 5/4).
    with pytest.raises(experiments.SweepError) as excinfo:
        experiments.time_sweep(config)

    assert excinfo.value.point == 0.0
    assert excinfo.value.axis == "t"
    assert isinstance(excinfo.value, ArithmeticError)


def test_closed_form_sweep_rejects_unphysical_matrix_below_threshold():
    config = SweepConfig(
        params=SystemParams(kappa=0.3), n_steps=51, propagator=Propagator.CLOSED_FORM, partitions=(PartitionId.AB,)
    )

    # At t = 0 the printed AB elements have trace 0.9 and would report C > 0 below the Werner threshold.
    with pytest.raises(experiments.SweepError, match="trace") as excinfo:
        experiments.time_sweep(config)

    assert excinfo.value.point == 0.0
    with pytest.raises(dynamics.InvalidStateError, match="closed-form AB"):
        experiments.evaluate_point(SystemParams(kappa=0.3), 0.0, (PartitionId.AB,), Propagator.CLOSED_FORM)


def test_fig2a_entanglement_is_absent_near_start():
    table = experiments.run_preset("fig2a")
    concurrence = table.column(PartitionId.AB, "concurrence")

    # kappa = 0.3 sits below the Werner threshold, so C starts at zero.
    assert np.all(concurrence[table.xs() <= 0.1] < 1e-6)


def test_fig2a_onset_features_golden_values():
    factorized = experiments.onset_features(experiments.run_preset("fig2a"))
    exact = experiments.onset_features(experiments.run_preset("fig2a", propagator=Propagator.EXACT))

    assert factorized.zero_at_start
    assert factorized.onset == pytest.approx(0.93, abs=2e-3)
    assert factorized.peak == pytest.approx(1.26, abs=5e-3)
    assert factorized.death == pytest.approx(2.21, abs=5e-3)
    # Onset and peak fall inside the reference brackets, the death time does not.
    assert not factorized.within()
    assert factorized.within({key: value for key, value in experiments.FIG2A_BRACKETS.items() if key != "death"})
    # With the exact propagator C(rho_AB) never leaves zero on [0, 5].
    assert exact.zero_at_start
    assert exact.onset is None


def test_onset_features_on_synthetic_lobe():
    config = SweepConfig(t_end=3.0, n_steps=7, partitions=(PartitionId.AB,))
    values = [0.0, 0.0, 0.4, 0.8, 0.2, 0.0, 0.0]
    rows = [
        SweepRow(
            x=float(t),
            measures={PartitionId.AB: MeasureSet(purity=0.5, info_total=1.0, info_nonlocal=1.0, concurrence=c)},
        )
        for t, c in zip(config.times(), values)
    ]
    table = SweepTable(config, rows)

    features = experiments.onset_features(table)

    assert features.zero_at_start
    assert 0.5 < features.onset < 1.0
    assert features.peak == pytest.approx(1.5)
    assert 2.0 < features.death < 2.5
    assert experiments.first_local_maximum(table) == pytest.approx(1.5)
    assert features.within({"onset": (0.5, 1.0), "peak": (1.0, 2.0), "death": (2.0, 2.5)})
    assert not features.within({"onset": (0.0, 0.1)})


def test_exchange_bound_holds_for_high_weight_preset():
    bound = experiments.exchange_bound(experiments.run_preset("fig10b"))

    assert bound.holds
    assert bound.maxima[PartitionId.AB] == pytest.approx(8 / 3 * (0.8575 - 0.25), abs=1e-9)
    assert set(bound.maxima) == set(PAIRS)


def test_exchange_bound_holds_for_low_weight_preset():
    table = experiments.run_preset("fig10a")

    bound = experiments.exchange_bound(table)
    sampled = experiments.exchange_bound(table, refine=False)

    assert bound.holds
    assert bound.maxima[PartitionId.AC] == pytest.approx(0.6966666666666667, abs=1e-9)
    assert bound.maxima[PartitionId.AB] == pytest.approx(bound.maxima[PartitionId.AC], abs=1e-6)
    # The AB peak falls between grid points; the raw samples under-report it.
    assert sampled.maxima[PartitionId.AB] < bound.maxima[PartitionId.AB]
    assert not sampled.holds


def test_exchange_bound_requires_ab():
    table = experiments.run_preset("fig5a", n_steps=5)

    with pytest.raises(ValueError, match="AB"):
        experiments.exchange_bound(table)


def test_info_modes_change_only_the_information_column():
    total = experiments.run_preset("fig11a", n_steps=11)
    local = experiments.run_preset("fig11a", n_steps=11, info_mode=InfoMode.TOTAL_MINUS_LOCAL)

    assert np.allclose(total.column(PartitionId.AB, "concurrence"), local.column(PartitionId.AB, "concurrence"))
    assert not np.allclose(total.column(PartitionId.AC, "info_nonlocal"), local.column(PartitionId.AC, "info_nonlocal"))


def test_validate_closed_forms_default_grid():
    report = experiments.validate_closed_forms()
    summary = report.summary()

    assert len(report) == 5 * 3 * 21 * 3
    assert report.commuting_limit_consistent()
    assert len(report.commuting_limit_records()) == 5 * 21 * 3
    assert list(summary.index) == ["AB", "AC", "BC"]
    assert np.isfinite(summary.to_numpy(dtype=float)).all()
    at_start = [r for r in report if r.t == 0.0]
    assert all(math.isfinite(r.trace_deviation) for r in at_start)


def test_validate_closed_forms_rejects_empty_grid():
    with pytest.raises(ValueError):
        experiments.validate_closed_forms(kappas=())


FIELDS = ("concurrence", "negativity", "eof", "purity", "info_nonlocal")


def test_static_hamiltonian_keeps_every_row_equal_to_the_first():
    config = SweepConfig(params=SystemParams(kappa=0.9, omega=0.0, dz=0.0), t_end=3.0, n_steps=31, partitions=PAIRS)

    table = experiments.time_sweep(config)

    for part in PAIRS:
        for field in FIELDS:
            column = table.column(part, field)
            np.testing.assert_allclose(column, column[0], atol=1e-9)


@pytest.mark.parametrize("propagator", [Propagator.EXACT, Propagator.FACTORIZED])
def test_first_row_matches_initial_marginals(propagator):
    params = SystemParams(kappa=0.7, dz=0.9)
    table = experiments.time_sweep(SweepConfig(params=params, t_end=1.0, n_steps=5, propagator=propagator, partitions=PAIRS))
    state = dynamics.initial_state(params)

    for part in PAIRS:
        expected = measures.measure_all(dynamics.marginal(state, part))
        for field in FIELDS:
            assert getattr(table[0].measures[part], field) == pytest.approx(getattr(expected, field), abs=1e-10)


def test_halving_the_step_leaves_shared_rows_unchanged():
    params = SystemParams(kappa=0.9, omega=0.5, dz=0.9)
    coarse = experiments.time_sweep(SweepConfig(params=params, t_end=2.0, n_steps=11, partitions=PAIRS))
    fine = experiments.time_sweep(SweepConfig(params=params, t_end=2.0, n_steps=21, partitions=PAIRS))

    np.testing.assert_allclose(coarse.xs(), fine.xs()[::2], atol=1e-12)
    for part in PAIRS:
        for field in FIELDS:
            np.testing.assert_allclose(coarse.column(part, field), fine.column(part, field)[::2], atol=1e-12)


def test_propagators_give_the_same_sweep_without_dm_coupling():
    params = SystemParams(kappa=0.9, dz=0.0)
    exact = experiments.time_sweep(SweepConfig(params=params, t_end=5.0, n_steps=101, partitions=PAIRS))
    factorized = experiments.time_sweep(
        SweepConfig(params=params, t_end=5.0, n_steps=101, propagator=Propagator.FACTORIZED, partitions=PAIRS)
    )

    for part in PAIRS:
        for field in FIELDS:
            np.testing.assert_allclose(exact.column(part, field), factorized.column(part, field), atol=1e-9)
