import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from modules import graph_model as gm  # noqa: E402
from modules import spectrum_solver as ss  # noqa: E402

# Published network geometry: (n, (l_min, total))
K4_GEOMETRY = (4, (0.155, 1.494))
K5_GEOMETRY = (5, (0.202, 3.949))
SEED = 7


@pytest.fixture(scope="session")
def interval_spectrum():
    """Exact levels n*pi of a unit interval."""
    return ss.Spectrum(np.arange(1, 201) * np.pi, provenance="solved")


@pytest.fixture(scope="session")
def k4_graph():
    n, lengths = K4_GEOMETRY
    return gm.gen_complete(n, lengths, seed=SEED)


@pytest.fixture(scope="session")
def k5_graph():
    n, lengths = K5_GEOMETRY
    return gm.gen_complete(n, lengths, seed=SEED)


@pytest.fixture(scope="session")
def k4_spectrum(k4_graph):
    return ss.solve(k4_graph, 106)


@pytest.fixture(scope="session")
def k5_spectrum_150(k5_graph):
    return ss.solve(k5_graph, 150)


@pytest.fixture(scope="session")
def k5_spectrum(k5_spectrum_150):
    return k5_spectrum_150.head(132)
