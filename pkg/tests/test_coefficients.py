import numpy as np
import pytest
from hypothesis import given, strategies as st

from penalized_mhd.coefficients import (
    CoefficientError, CoefficientTriple, Scenario, Tag, build_coefficient_field, penalized_coefficients,
    schedule,
)
from penalized_mhd.geometry import build_grid, classify_regions

REGION = classify_regions(build_grid(2, 1.0, 64), 0.7, 0.3)
FINE = classify_regions(build_grid(2, 1.0, 128), 0.7, 0.3)
TAGS = ["isolator", "pmc", "pec", "isolator_type"]


def test_schedule_examples():
    t = schedule(Scenario("pec"), 0.01)
    assert t["mu"].ext == pytest.approx(0.01) and t["eta"].ext == pytest.approx(0.01)
    s = Scenario("pmc")
    t = schedule(s, 0.1)
    assert t["mu"].ext == pytest.approx(10.0) and t["eta"].ext == s.eta_ext
    for tag in TAGS:
        b = schedule(Scenario(tag), 0.5)["beta"]
        assert (b.F, b.int, b.ext) == (0.0, 2.0, 2.0)


def test_isolator_limits():
    t = schedule(Scenario("isolator"), 0.01)
    assert t["eta"].ext == pytest.approx(100.0) and t["mu"].ext == 1.0
    t = schedule(Scenario("isolator_type"), 0.01)
    assert t["eta"].ext == pytest.approx(100.0) and t["mu"].ext == pytest.approx(0.01)


def test_solid_viscosity_by_dimension():
    t2 = schedule(Scenario("pec"), 0.1, d=2)
    t3 = schedule(Scenario("pec"), 0.1, d=3)
    assert t2["lam"].int == pytest.approx(10.0) and t2["nu"].int == 0.02
    assert t3["nu"].int == pytest.approx(10.0)


def test_none_ignores_eps():
    a, b = schedule(Scenario("none"), 0.5), schedule(Scenario("none"), 1e-4)
    assert a == b
    assert all(t.F == t.int == t.ext for t in a.values())


@pytest.mark.parametrize("eps", [0.0, -1.0, 1.5])
def test_schedule_rejects_eps(eps):
    with pytest.raises(CoefficientError):
        schedule(Scenario("pec"), eps)


def test_scenario_validation():
    assert Scenario("ISOLATOR-TYPE").tag is Tag.ISOLATOR_TYPE
    with pytest.raises(CoefficientError):
        Scenario("vacuum")
    with pytest.raises(CoefficientError):
        Scenario("pec", nu_F=0.0)
    with pytest.raises(CoefficientError):
        Scenario("pec", lambda_F=-1.0)
    with pytest.raises(CoefficientError):
        CoefficientTriple(1.0, float("nan"), 1.0)


@pytest.mark.parametrize("tag", TAGS)
@pytest.mark.parametrize("eps", [0.1, 1e-3])
def test_plateaus_and_bounds(tag, eps):
    cf = penalized_coefficients(FINE, Scenario(tag), eps)
    w = cf.width
    deep_int = FINE.dist_inner < -2 * w
    deep_ext = FINE.dist_outer > 2 * w
    fluid = (FINE.dist_inner > 3 * w) & (FINE.dist_outer < -3 * w)
    assert deep_int.any() and deep_ext.any() and fluid.any()
    for name, t in cf.triples.items():
        f = cf[name]
        assert np.all(f[deep_int] == t.int)
        assert np.all(f[deep_ext] == t.ext)
        assert np.all(f[fluid] == t.F)
        assert np.all((f >= t.lo) & (f <= t.hi))
    assert np.all(cf.mu > 0) and np.all(cf.eta > 0) and np.all(cf.nu > 0)


@given(st.floats(1e-4, 1.0))
def test_bounds_property(eps):
    cf = penalized_coefficients(REGION, Scenario("isolator_type"), eps)
    for name, t in cf.triples.items():
        assert cf[name].min() >= t.lo and cf[name].max() <= t.hi


def test_build_rejects_narrow_or_overlapping_bands():
    t = schedule(Scenario("pec"), 0.1)
    with pytest.raises(CoefficientError):
        build_coefficient_field(REGION, t, REGION.grid.h)
    narrow = classify_regions(build_grid(2, 1.0, 64), 0.7, 0.65)
    with pytest.raises(CoefficientError):
        build_coefficient_field(narrow, t, 4 * narrow.grid.h)
    with pytest.raises(CoefficientError):
        build_coefficient_field(REGION, {"mu": t["mu"]}, 4 * REGION.grid.h)
