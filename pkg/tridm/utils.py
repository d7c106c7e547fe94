from typing import NamedTuple, Optional, Sequence

import numpy as np

ZERO_THRESHOLD = 1e-6


class Transition(NamedTuple):
    kind: str  # "birth" or "death"
    x: float


def transitions(xs: Sequence[float], values: Sequence[float], threshold: float = ZERO_THRESHOLD) -> list[Transition]:
    """
    Sudden birth/death points of a sampled non-negative series.

    A value is "zero" below ``threshold``; each change of state is located by linear
    interpolation between the bracketing samples.
    """
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.shape != values.shape:
        raise ValueError("xs and values must have the same length")
    found = []
    alive = values >= threshold
    for k in range(1, len(xs)):
        if alive[k] == alive[k - 1]:
            continue
        x0, x1, v0, v1 = xs[k - 1], xs[k], values[k - 1], values[k]
        fraction = 0.0 if v1 == v0 else (threshold - v0) / (v1 - v0)
        found.append(Transition("birth" if alive[k] else "death", float(x0 + min(1.0, max(0.0, fraction)) * (x1 - x0))))
    return found


def first_local_maximum(xs: Sequence[float], values: Sequence[float], threshold: float = ZERO_THRESHOLD) -> Optional[float]:
    """Position of the first interior sample that is >= its neighbours and above ``threshold``."""
    values = np.asarray(values, dtype=float)
    for k in range(1, len(values) - 1):
        if values[k] >= threshold and values[k] >= values[k - 1] and values[k] > values[k + 1]:
            return float(xs[k])
    return None
