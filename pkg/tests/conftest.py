import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from svymetrics.rng import derive_stream
from svymetrics.simulation import default_population_spec, generate_population


@pytest.fixture(scope="session")
def small_default_population():
    """Paper-parameter population at a desk-friendly size, generated once."""
    return generate_population(
        default_population_spec(size=20_000), derive_stream(1234, "population")
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240801)
