import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_sparse_net(rng, dims, density=0.6):
    """Random network with layer widths ``dims`` and some exact zeros."""
    from cheb2relu.nn_core import Layer, NeuralNetwork

    layers = []
    for n_in, n_out in zip(dims[:-1], dims[1:]):
        w = rng.normal(size=(n_out, n_in)) * (rng.random((n_out, n_in)) < density)
        b = rng.normal(size=n_out) * (rng.random(n_out) < density)
        layers.append(Layer.dense(w, b))
    return NeuralNetwork(tuple(layers))


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    """Remember an acceptance verdict for the terminal summary and print it."""
    ACCEPTANCE[number] = (bool(ok), detail)
    print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
