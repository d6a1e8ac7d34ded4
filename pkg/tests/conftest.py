import pytest

from manhattan_pinball.configuration import constant
from manhattan_pinball.tracer import trace


@pytest.fixture(scope="session", autouse=True)
def warm_numba():
    # compile the trace kernel once so timing-sensitive tests measure the
    # dynamics, not jit compilation
    trace(constant(3, True))
