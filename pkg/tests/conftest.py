import numpy as np
import pytest

import _verdicts
import coexmin as cx


def pytest_terminal_summary(terminalreporter):
    if _verdicts.LINES:
        terminalreporter.section("acceptance criteria")
        for line in _verdicts.LINES:
            terminalreporter.write_line(line)


def dumbbell_spec(h=0.025, width=0.1, core=1.0, gap=1.0):
    """Two square cores joined by a centered horizontal channel."""
    return cx.DomainSpec(
        cores=(cx.Rect(0.0, 0.0, core, core),
               cx.Rect(core + gap, 0.0, core, core)),
        channels=(cx.Rect(core, (core - width) / 2, gap, width),),
        h=h,
    )


def unit_square_spec(h=0.1):
    return cx.DomainSpec(cores=(cx.Rect(0.0, 0.0, 1.0, 1.0),), channels=(), h=h)


@pytest.fixture(scope="session")
def logistic22():
    return cx.make_logistic(2.0, 2.0)


@pytest.fixture(scope="session")
def two_species(logistic22):
    return [logistic22, cx.make_logistic(2.0, 2.0)]


@pytest.fixture(scope="session")
def dumbbell_grid():
    return cx.build_domain(dumbbell_spec())


@pytest.fixture(scope="session")
def assumptions(two_species):
    return cx.check_assumptions(two_species)


SCHEDULE = [1.0, 10.0, 100.0, 1000.0, 10000.0]


@pytest.fixture(scope="session")
def continuation(dumbbell_grid, two_species):
    """The canonical run most analysis-level tests share."""
    return cx.kappa_continuation(dumbbell_grid, two_species, SCHEDULE, cx.SolveOptions())


def random_interior_state(grid, models, rng, lo=0.05, hi=0.95):
    """Random state with every value safely between the truncation breakpoints."""
    u = np.stack([rng.uniform(lo * m.A, hi * m.A, (grid.ny, grid.nx)) for m in models])
    u[:, ~grid.mask] = 0.0
    return cx.State(grid, u)
