"""Shared fixtures.

The default-case fluence solve is cheap but used by many tests, so it is
session-scoped.  Anything grid-heavy (finite-difference comparisons, modal
eigenvalue scans) is also session-scoped to keep the suite under a minute
outside the acceptance module.
"""

import pytest

from evla import fluence, params, thermal


@pytest.fixture(scope="session")
def ps810():
    return params.default_params(810, 15.0)


@pytest.fixture(scope="session")
def sol810(ps810):
    return fluence.assemble_and_solve(ps810)


@pytest.fixture(scope="session")
def temp810(ps810, sol810):
    return thermal.build_temperature(ps810, sol810)


@pytest.fixture(scope="session")
def all_presets():
    return {name: params.preset_params(name) for name in params.PRESETS}
