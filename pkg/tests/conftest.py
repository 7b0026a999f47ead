import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from oracle import INF, ext

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _ACCEPTANCE.append((mark.args[0], mark.args[1], rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, text, outcome in sorted(_ACCEPTANCE):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {text}")


# shared strategies

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
quarter = st.integers(-40, 40).map(lambda k: k / 4)
entry = st.one_of(finite, quarter)
ext_entry = st.one_of(entry, st.just(INF), st.just(-INF))


@st.composite
def coupling_and_h(draw, max_n=6, allow_neg_inf=True):
    n = draw(st.integers(1, max_n))
    phi = draw(st.lists(st.lists(entry, min_size=n, max_size=n), min_size=n, max_size=n))
    values = ext_entry if allow_neg_inf else st.one_of(entry, st.just(INF))
    h = draw(st.lists(values, min_size=n, max_size=n))
    return np.array(phi, dtype=float), h


@st.composite
def symmetric_coupling(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    phi = np.array(
        draw(st.lists(st.lists(entry, min_size=n, max_size=n), min_size=n, max_size=n)), dtype=float
    )
    return np.triu(phi) + np.triu(phi, 1).T


def exact_phi(phi):
    return [[ext(float(x)) for x in row] for row in phi]


def exact_h(h):
    return [ext(float(x)) for x in h]


def as_oracle(v):
    """Package valuation to oracle values."""
    return [ext(t) for t in v.tokens()]
