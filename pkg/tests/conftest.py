from dataclasses import replace

import pytest

from crsense.scenario_io import load_bundled_scenario


@pytest.fixture(scope="session")
def table_scenario():
    """The bundled ten-duration reference scenario."""
    return load_bundled_scenario()


@pytest.fixture(scope="session")
def sub3_scenario(table_scenario):
    """Three-duration sub-scenario (first, middle, last rows)."""
    table = tuple(table_scenario.sensing_table[p] for p in (0, 4, 9))
    return replace(table_scenario, sensing_table=table)
