import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from transfunctions import BanachSpaceSpec, MeasurableSpace, PositiveMeasure, SignedMeasure, VectorMeasure

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

finite = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)
nonneg = st.floats(min_value=0, max_value=50, allow_nan=False, allow_infinity=False)
norms = st.sampled_from(["L1", "L2", "Linf"])


@st.composite
def signed_measures(draw, max_atoms=8):
    m = draw(st.integers(1, max_atoms))
    mass = draw(st.lists(finite, min_size=m, max_size=m))
    return SignedMeasure(MeasurableSpace.atomic(m), mass)


@st.composite
def positive_measures(draw, max_atoms=8, count=None):
    m = count or draw(st.integers(1, max_atoms))
    mass = draw(st.lists(nonneg, min_size=m, max_size=m))
    return PositiveMeasure(MeasurableSpace.atomic(m), mass)


@st.composite
def vector_measures(draw, max_atoms=6, max_dim=3):
    m = draw(st.integers(1, max_atoms))
    d = draw(st.integers(1, max_dim))
    values = draw(st.lists(st.lists(finite, min_size=d, max_size=d), min_size=m, max_size=m))
    return VectorMeasure(MeasurableSpace.atomic(m), BanachSpaceSpec(d, draw(norms)), values)


@st.composite
def atom_subsets(draw, count):
    return sorted(draw(st.sets(st.integers(0, count - 1))))


def random_vector_measure(rng, m, d, norm, sparsity=0.3):
    values = rng.normal(size=(m, d)) * (rng.random((m, 1)) > sparsity)
    return VectorMeasure(MeasurableSpace.atomic(m), BanachSpaceSpec(d, norm), values)


def random_stochastic(rng, m, k):
    raw = rng.random((m, k)) * (rng.random((m, k)) > 0.3)
    raw[np.arange(m), rng.integers(0, k, size=m)] += 0.1
    return raw / raw.sum(axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


# -- acceptance summary -------------------------------------------------------

SUITE_BUDGET_S = 300.0
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record(number: int, name: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (name, ok, detail)
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name} ({detail})")


def pytest_sessionstart(session):
    import time

    session.config._t0 = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    import time

    elapsed = time.perf_counter() - session.config._t0
    session.config._elapsed = elapsed
    if 10 in ACCEPTANCE:
        name, ok, detail = ACCEPTANCE[10]
        within = elapsed < SUITE_BUDGET_S
        ACCEPTANCE[10] = (name, ok and within, f"{detail}; suite {elapsed:.1f} s of {SUITE_BUDGET_S:.0f} s")
        if not within and session.exitstatus == 0:
            session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {number:>2}. {name}: {detail}")
