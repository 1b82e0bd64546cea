import logging

import numpy as np
import pytest

from services import states
from services.qudit import stream, validate_density


@pytest.fixture
def singlet():
    return states.singlet()


@pytest.fixture
def qutrit_max_entangled():
    return states.max_entangled(3)


@pytest.fixture
def rng():
    return stream(1234)


@pytest.fixture
def ginibre_state():
    """Second mixed-state sampler (G G† / Tr), independent of random_state."""
    def sample(d: int, seed: int):
        g = np.random.default_rng(seed)
        m = g.normal(size=(d * d, d * d)) + 1j * g.normal(size=(d * d, d * d))
        rho = m @ m.conj().T
        return validate_density(rho / np.trace(rho).real, d)
    return sample


@pytest.fixture
def write_state(tmp_path):
    from models import DensityMatrixFile

    def write(rho, name="state.json"):
        path = tmp_path / name
        path.write_text(DensityMatrixFile.from_density(rho).model_dump_json())
        return str(path)
    return write


@pytest.fixture(autouse=True)
def _drop_cli_log_handlers():
    """Each CLI run installs a stderr handler; keep it from outliving the test's capture."""
    yield
    from logconfig import RunIdFilter
    root = logging.getLogger()
    for handler in list(root.handlers):
        if any(isinstance(f, RunIdFilter) for f in handler.filters):
            root.removeHandler(handler)
