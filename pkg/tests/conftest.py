import numpy as np
import pytest

from entropoint.entropy import EntropySolver
from entropoint.problems import catalog


@pytest.fixture(scope="session")
def specs():
    return {s.name: s for s in catalog()}


@pytest.fixture(scope="session")
def entropy_solvers(specs):
    """One EntropySolver per space-independent catalog problem."""
    return {
        name: EntropySolver(spec.flux, spec.init)
        for name, spec in specs.items()
        if spec.kind == "space_independent"
    }


@pytest.fixture(scope="session")
def box_solver(entropy_solvers):
    return entropy_solvers["burgers_box"]


def box_ic(x):
    x = np.asarray(x, dtype=float)
    return np.where((x >= 0) & (x < 1), 1.0, 0.0)
