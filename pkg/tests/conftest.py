import pytest

from mprk.solver.config import resolve_config
from mprk.solver.scenarios import build_scenario

# Coarse grids that keep every preset cheap enough for unit tests
SMALL_DOMAINS = {
    "convection2d": {"cells1": [12, 1, 8], "cells2": [12, 1, 10]},
    "convection2d-dual": {"cells1": [10, 1, 14], "cells2": [10, 1, 12]},
    "khi2d": {"cells1": [16, 1, 8], "cells2": [16, 1, 8]},
    "manufactured": {"cells1": [16, 1, 8], "cells2": [16, 1, 8]},
    "bubble3d": {"cells1": [4, 4, 8], "cells2": [4, 4, 8]},
    "wind3d": {"cells1": [4, 4, 4], "cells2": [4, 4, 8]},
}


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    monkeypatch.delenv("MPRK_THREADS", raising=False)
    monkeypatch.setenv("MPRK_OUTPUT_DIR", str(tmp_path / "outputs"))


@pytest.fixture
def small_config():
    """Resolved preset on a coarse grid; keyword args override domain entries."""
    def make(scenario="manufactured", **domain):
        overrides = {"domain": dict(SMALL_DOMAINS[scenario], **domain)}
        return resolve_config(scenario, overrides=overrides)
    return make


@pytest.fixture
def small_problem(small_config):
    def make(scenario="manufactured", **domain):
        return build_scenario(small_config(scenario, **domain))
    return make
