import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import loglog_slope
from penalized_mhd.diagnostics import energy_budget, region_norms, trace_norms
from penalized_mhd.diagnostics.families import (
    Family, TestFamily as Members, TrigScalar, curl_form, fluid_bump_radii, make_family,
)
from penalized_mhd.diagnostics.records import default_margin, interpolate
from penalized_mhd.diagnostics.sweep import estimate_rate, strictly_decreasing, sweep_table
from penalized_mhd.diagnostics.verify import band_limited_field, operator_suite
from penalized_mhd.diagnostics.weak import FamilyMismatch, weak_residual
from penalized_mhd.geometry import build_grid, classify_regions
from penalized_mhd.solver import InitialData, RunConfig, State, integrate, make_initial_state


def _face_field(grid, fn):
    return np.stack([fn(grid.face_centers(a))[a] for a in range(grid.d)])


# -- trace and region norms ---------------------------------------------------

def test_interpolation_exact_on_linear_fields():
    g = build_grid(2, 1.0, 16)
    X = g.cell_centers()
    f = 2 * X[0] - X[1]
    pts = np.array([[0.1, 0.2], [-0.33, 0.4]])
    np.testing.assert_allclose(interpolate(f, (0.0, 0.0), g, pts), 2 * pts[:, 0] - pts[:, 1], atol=1e-12)


def test_trace_norms_zero_field():
    reg = classify_regions(build_grid(2, 1.0, 32), 0.7, 0.3)
    t = trace_norms(np.zeros((2, 32, 32)), reg)
    assert all(v == 0 for v in t.values())


@pytest.mark.parametrize("kind", ["radial", "azimuthal"])
def test_trace_norms_vanishing_component_is_second_order(kind):
    errs = []
    for n in (64, 128):
        g = build_grid(2, 1.0, n)
        reg = classify_regions(g, 0.7, 0.3)

        def fn(X):
            f = 1 + (X[0] ** 2 + X[1] ** 2) ** 2
            return f * (np.stack([X[0], X[1]]) if kind == "radial" else np.stack([-X[1], X[0]]))

        t = trace_norms(_face_field(g, fn), reg)
        errs.append(t["H_cross_n"] if kind == "radial" else t["H_dot_n"])
        other = t["H_dot_n"] if kind == "radial" else t["H_cross_n"]
        assert other == pytest.approx((1 + 0.7 ** 4) * 0.7 * np.sqrt(2 * np.pi * 0.7), rel=1e-2)
    assert errs[1] <= errs[0] / 3.5 or errs[1] < 1e-12
    assert t["curlH_dot_n"] == 0.0


def test_region_norm_examples():
    g = build_grid(2, 1.0, 64)
    reg = classify_regions(g, 0.7, 0.3)
    w = 4 * g.h
    margin = default_margin(w)
    H = np.zeros((2, 64, 64))
    H[0] = 1.0
    u = np.zeros((2, 64, 64))
    r = region_norms(u, H, reg, margin)
    area = np.count_nonzero(reg.ext_plateau(margin)) * g.cell_volume
    assert r["H_ext"] ** 2 == pytest.approx(area)
    assert r["u_solid"] == 0.0 and r["curlH_ext"] == 0.0
    fluid_u = _face_field(g, lambda X: np.stack([np.exp(-((X[0] - .5) ** 2 + X[1] ** 2) / 1e-3)] * 2))
    assert region_norms(fluid_u, 0 * H, reg, margin)["u_solid"] < 1e-12
    assert region_norms(u, 0 * H, reg, margin)["H_ext"] == 0.0


def test_energy_budget_zero_and_uniform(make_model):
    model = make_model("pec", 0.1, 32)
    for kind in ("zero", "uniform"):
        s = make_initial_state(model, InitialData(kind))
        traj = integrate(s, RunConfig(T=0.05))
        assert abs(energy_budget(traj)) <= 1e-14
    with pytest.raises(ValueError):
        energy_budget(traj.records[:1])


def test_energy_budget_short_run(make_model):
    traj = integrate(make_initial_state(make_model("pec", 0.1, 32)), RunConfig(T=0.1))
    assert energy_budget(traj) <= 1e-3
    r = traj.records[-1]
    assert all(v >= 0 for v in list(r.traces.values()) + list(r.regions.values()))
    assert set(r.row()) >= {"t", "energy", "D_friction", "H_dot_n", "u_solid", "gaffney"}


# -- test families ------------------------------------------------------------

@pytest.fixture(scope="module")
def region128():
    return classify_regions(build_grid(2, 1.0, 128), 0.7, 0.3)


def test_fluid_bump_vanishes_outside_fluid(region128):
    g = region128.grid
    w = 4 * g.h
    fam = make_family(Family.FLUID_BUMP, region128, w)
    r0, r1 = fluid_bump_radii(region128, w)
    assert r0 - 0.3 >= 2 * g.h and 0.7 - r1 >= 2 * g.h
    X = g.cell_centers()
    r = np.sqrt(X[0] ** 2 + X[1] ** 2)
    outside = (r <= r0) | (r >= r1)
    for phi in fam.members:
        assert np.all(phi.value(X)[:, outside] == 0)
        assert np.all(phi.jac(X)[:, :, outside] == 0)


def test_curl_free_ext_members(region128):
    g = region128.grid
    fam = make_family(Family.CURL_FREE_EXT, region128, 4 * g.h)
    X = g.cell_centers()
    ext = region128.dist_outer > 0
    for phi in fam.members:
        c = curl_form(phi, X, g.pairs)
        assert np.max(np.abs(c[:, ext])) <= 1e-12


def test_trig_scalar_derivatives():
    s = TrigScalar((1, 2), 0.3, 1.0)
    X = (np.array([0.1, -0.4]), np.array([0.25, 0.6]))
    k = 1e-6
    fd = (s.value((X[0] + k, X[1])) - s.value((X[0] - k, X[1]))) / (2 * k)
    np.testing.assert_allclose(s.grad(X)[0], fd, rtol=1e-7)


def test_make_family_rejects_scalar_closure(region128):
    with pytest.raises(ValueError):
        make_family(Family.CLOSURE, region128, 0.1, "scalar")


# -- weak residuals ---------------------------------------------------------

@pytest.fixture(scope="module")
def pec_snapshots():
    from penalized_mhd.coefficients import Scenario, penalized_coefficients
    from penalized_mhd.eos import default_eos
    from penalized_mhd.solver import Model

    g = build_grid(2, 1.0, 64)
    reg = classify_regions(g, 0.7, 0.3)
    model = Model(g, reg, penalized_coefficients(reg, Scenario("pec"), 0.1), default_eos(2))
    return integrate(make_initial_state(model), RunConfig(T=0.1, snapshot_every=1)).snapshots


def test_constant_test_function_gives_mass_drift(pec_snapshots):
    fam = Members(Family.TORUS_TRIG, "scalar", (TrigScalar((0, 0), 0.0, 1.0),))
    res = weak_residual(pec_snapshots, fam, "continuity")
    drift = abs(pec_snapshots[-1].mass() - pec_snapshots[0].mass()) / pec_snapshots[0].mass()
    assert res.residual <= 1e-12
    assert res.residual == pytest.approx(drift, abs=1e-15)


def test_zero_fields_give_zero_residual(make_model):
    model = make_model("isolator", 0.1, 64)
    g = model.grid
    snaps = [State(model, np.ones(g.shape), g.zeros_face(), g.zeros_face(), t) for t in (0.0, 0.1, 0.2)]
    for which in ("continuity", "induction", "isolator_limit"):
        assert weak_residual(snaps, None, which).residual == 0.0


def test_weak_residual_family_checks(pec_snapshots):
    with pytest.raises(FamilyMismatch):
        weak_residual(pec_snapshots, Family.CLOSURE, "pmc_limit")
    with pytest.raises(ValueError):
        weak_residual(pec_snapshots, None, "bogus")
    with pytest.raises(ValueError):
        weak_residual(pec_snapshots[:1], None, "continuity")
    with pytest.raises(ValueError):
        weak_residual(pec_snapshots[::-1], None, "continuity")


def test_weak_residuals_small_on_smooth_run(pec_snapshots):
    for which in ("continuity", "renormalized", "induction", "pec_limit"):
        r = weak_residual(pec_snapshots, None, which)
        assert 0 <= r.residual < 0.2, which


# -- sweeps and rates ---------------------------------------------------------

@pytest.mark.parametrize("fn,expected", [(lambda e: e ** 0.5, 0.5), (lambda e: 7.0, 0.0),
                                         (lambda e: 3 * e, 1.0)])
def test_estimate_rate_examples(fn, expected):
    eps = [1e-1, 3e-2, 1e-2, 3e-3]
    assert estimate_rate([(e, fn(e)) for e in eps]) == pytest.approx(expected, abs=1e-12)


@given(st.lists(st.floats(1e-3, 1e3), min_size=3, max_size=6, unique=True))
def test_estimate_rate_matches_oracle(values):
    eps = [10.0 ** (-k) for k in range(len(values))]
    assert estimate_rate(list(zip(eps, values))) == pytest.approx(loglog_slope(eps, values), abs=1e-9)


def test_estimate_rate_errors():
    with pytest.raises(ValueError):
        estimate_rate([(1, 1), (0.1, 1)])
    with pytest.raises(ValueError):
        estimate_rate([(1, 1), (0.1, 0.0), (0.01, 1)])


def test_strictly_decreasing():
    assert strictly_decreasing([3, 2, 1])
    assert not strictly_decreasing([3, 3, 1])
    assert not strictly_decreasing([3, float("nan"), 1])


def test_none_sweep_is_eps_independent():
    from penalized_mhd.config import load_config

    cfg = load_config(None, ["scenario=none", "cells=32", "T=0.05"])
    table = sweep_table(cfg, (0.1, 0.01, 0.001))
    assert table.ok
    for col in ("u_solid_L2L2", "H_ext", "curlH_ext", "H_dot_n", "energy_residual"):
        vals = table.column(col)
        assert max(vals) - min(vals) <= 1e-12


def test_sweep_rejects_unsorted_eps():
    from penalized_mhd.config import load_config

    cfg = load_config(None, ["scenario=pec", "cells=32"])
    with pytest.raises(ValueError):
        sweep_table(cfg, (0.01, 0.1, 0.001))


# -- operator suite -----------------------------------------------------------

def test_operator_suite_small():
    rep = operator_suite(2, 16, samples=10, gaffney_samples=10)
    assert rep.ok and rep.gaffney_max > 0


def test_band_limited_field_is_real_and_bandlimited():
    rng = np.random.default_rng(0)
    F = band_limited_field(2, 32, rng, kmax=3)
    spec = np.abs(np.fft.fftn(F[0]))
    k = np.fft.fftfreq(32, 1 / 32)
    high = (np.abs(k)[:, None] > 3) | (np.abs(k)[None, :] > 3)
    assert spec[high].max() < 1e-9 * spec.max()
