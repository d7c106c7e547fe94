import pytest

from tridm.utils import Transition, first_local_maximum, transitions


def test_transitions_interpolate_birth_and_death():
    xs = [0.0, 1.0, 2.0, 3.0, 4.0]
    values = [0.0, 0.0, 0.5, 0.0, 0.0]

    found = transitions(xs, values, threshold=0.25)

    assert [tr.kind for tr in found] == ["birth", "death"]
    assert found[0].x == pytest.approx(1.5)
    assert found[1].x == pytest.approx(2.5)


def test_transitions_of_series_alive_throughout_is_empty():
    assert transitions([0, 1, 2], [0.3, 0.4, 0.2]) == []


def test_transitions_reject_mismatched_lengths():
    with pytest.raises(ValueError):
        transitions([0, 1], [0.0])


def test_first_local_maximum_skips_zero_plateau():
    xs = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
    values = [0.0, 0.0, 0.2, 0.6, 0.3, 0.7]

    assert first_local_maximum(xs, values) == 3.0
    assert first_local_maximum(xs, [0.0] * 6) is None
    assert Transition("birth", 1.0).kind == "birth"
