from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from cfia import io as cio
from cfia.synthetic import random_records, random_thresholds, write_fixture_set

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def small_records(draw, max_frs=4, max_types=2, max_morphs=4, max_attempts=4, ftar_rate=None):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    records = random_records(
        rng,
        n_frs=draw(st.integers(1, max_frs)),
        n_types=draw(st.integers(1, max_types)),
        n_morphs=draw(st.integers(1, max_morphs)),
        n_attempts=draw(st.integers(1, max_attempts)),
        variable_attempts=draw(st.booleans()),
        ftar_rate=draw(st.sampled_from([0.0, 0.1, 0.5])) if ftar_rate is None else ftar_rate,
    )
    t = cio.tensor_from_records(records)
    return records, t, random_thresholds(rng, t.frs_ids)


@pytest.fixture(scope="session")
def fixture_set(tmp_path_factory):
    return write_fixture_set(tmp_path_factory.mktemp("synthetic"), seed=7)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS, format_line
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for i in sorted(RESULTS):
            terminalreporter.write_line(format_line(i))
