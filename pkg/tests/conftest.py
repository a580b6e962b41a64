from decimal import localcontext

import pytest

from rigidity_lab.manifolds import Euclidean, FlatTorus, Hyperbolic, Sphere

ALL_MODELS = [Euclidean(2), Euclidean(3), Sphere(2), Sphere(3), Sphere(2, 2.5),
              Hyperbolic(2, -1.0), Hyperbolic(3, -0.25), FlatTorus(2), FlatTorus(3)]
MODEL_IDS = [M.id for M in ALL_MODELS]


@pytest.fixture(params=ALL_MODELS, ids=MODEL_IDS)
def model(request):
    return request.param


@pytest.fixture(autouse=True)
def _decimal_precision():
    """80 significant digits for the decimal oracles, restored after each test."""
    with localcontext() as ctx:
        ctx.prec = 80
        yield


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])
