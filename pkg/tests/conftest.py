import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def make_model():
    """Factory for small 2-D models keyed by (scenario, eps, n)."""
    from penalized_mhd.coefficients import Scenario, penalized_coefficients
    from penalized_mhd.eos import default_eos
    from penalized_mhd.geometry import build_grid, classify_regions
    from penalized_mhd.solver import Model

    cache = {}

    def build(tag="pec", eps=0.1, n=32, L=1.0, R_outer=0.7, R_inner=0.3):
        key = (tag, eps, n, L, R_outer, R_inner)
        if key not in cache:
            grid = build_grid(2, L, n)
            region = classify_regions(grid, R_outer, R_inner)
            coeffs = penalized_coefficients(region, Scenario(tag), eps)
            cache[key] = Model(grid, region, coeffs, default_eos(2))
        return cache[key]

    return build


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
