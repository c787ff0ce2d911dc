import hypothesis
import numpy as np
import pytest

from tracelab.ffield import build_context
from tracelab.weights import bulk_eval
from tracelab.wspec import HyperKloosterman

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.load_profile("default")


@pytest.fixture(scope="session")
def ctx_cache():
    cache = {}

    def get(p):
        if p not in cache:
            cache[p] = build_context(p)
        return cache[p]

    return get


@pytest.fixture(scope="session")
def kl2(ctx_cache):
    cache = {}

    def get(p):
        if p not in cache:
            cache[p] = bulk_eval(ctx_cache(p), HyperKloosterman(2))
        return cache[p]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS):
            terminalreporter.write_line(line)
