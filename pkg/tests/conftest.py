import hypothesis
import numpy as np
import pytest

from tridm import logging_utils

hypothesis.settings.register_profile("tridm", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, deadline=None)
hypothesis.settings.load_profile("tridm")


@pytest.fixture(autouse=True)
def restore_logger():
    logger = logging_utils.get_logger()
    state = (logger.level, logger.propagate, list(logger.handlers))
    yield
    logging_utils.set_logger(logger)
    logger.setLevel(state[0])
    logger.propagate = state[1]
    logger.handlers = state[2]


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
