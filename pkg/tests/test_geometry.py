import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import coords_1d, smoothstep
from penalized_mhd.geometry import GeometryError, Region, build_grid, classify_regions, mollifier


def test_grid_spacing_examples():
    assert build_grid(2, 1.0, 8).h == pytest.approx(0.25)
    assert build_grid(2, math.pi, 64).h == pytest.approx(2 * math.pi / 64)


@pytest.mark.parametrize("args", [(3, 1.0, 7), (2, 1.0, 4), (4, 1.0, 8), (2, -1.0, 8)])
def test_grid_rejects_bad_input(args):
    with pytest.raises(GeometryError):
        build_grid(*args)


def test_counts_and_wrap():
    g = build_grid(3, 1.0, 8)
    assert g.n_cells == 8 ** 3
    assert g.n_faces == 3 * 8 ** 3
    assert g.wrap(8 + 3) == 3


def test_staggered_coordinates_match_oracle():
    g = build_grid(2, 1.5, 12)
    X = g.cell_centers()
    np.testing.assert_allclose(X[0][:, 0], coords_1d(12, 1.5))
    Fx = g.face_centers(0)
    np.testing.assert_allclose(Fx[0][:, 0], coords_1d(12, 1.5, 0.5))
    np.testing.assert_allclose(Fx[1][0, :], coords_1d(12, 1.5))
    E = g.edge_centers(0, 1)
    np.testing.assert_allclose(E[1][0, :], coords_1d(12, 1.5, 0.5))


def test_region_examples():
    g = build_grid(2, 1.0, 20)  # h = 0.1, cells at +-0.05, ..., 0.95
    reg = classify_regions(g, 0.7, 0.3)
    X = g.cell_centers()

    def label_at(x, y):
        d = (X[0] - x) ** 2 + (X[1] - y) ** 2
        return reg.labels.flat[np.argmin(d)]

    assert label_at(0.0, 0.0) == Region.INT
    assert label_at(0.5, 0.0) == Region.FLUID
    assert label_at(0.9, 0.0) == Region.EXT


def test_labels_partition_and_seam():
    reg = classify_regions(build_grid(2, 1.0, 32), 0.7, 0.3)
    vals = set(np.unique(reg.labels))
    assert vals <= {Region.FLUID, Region.INT, Region.EXT}
    assert np.all(reg.labels[0, :] == Region.EXT) and np.all(reg.labels[:, -1] == Region.EXT)


def test_region_rejects_seam_and_ordering():
    g = build_grid(2, 1.0, 16)
    with pytest.raises(GeometryError):
        classify_regions(g, 1.0, 0.3)
    with pytest.raises(GeometryError):
        classify_regions(g, 0.5, 0.6)
    with pytest.raises(GeometryError):
        classify_regions(g, 0.99, 0.3)


@pytest.mark.parametrize("d,n", [(2, 32), (3, 16)])
def test_boundary_normals_unit(d, n):
    reg = classify_regions(build_grid(d, 1.0, n), 0.7, 0.3)
    for s in (reg.outer_samples, reg.inner_samples):
        np.testing.assert_allclose(np.linalg.norm(s.normals, axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(s.points, s.radius * s.normals)
    area = 2 * math.pi * 0.7 if d == 2 else 4 * math.pi * 0.49
    assert reg.outer_samples.weights.sum() == pytest.approx(area)


def test_inner_solid_optional():
    reg = classify_regions(build_grid(2, 1.0, 16), 0.7)
    assert not reg.has_inner and reg.inner_samples is None
    assert not np.any(reg.labels == Region.INT)


def test_mollifier_examples():
    w = 0.2
    assert mollifier(-w, w) == 0.0
    assert mollifier(0.0, w) == pytest.approx(0.5)
    assert mollifier(w, w) == 1.0
    with pytest.raises(GeometryError):
        mollifier(0.0, 0.0)


@given(st.floats(-1, 1), st.floats(0.01, 0.5))
def test_mollifier_matches_oracle_and_bounds(s, w):
    q = float(mollifier(s, w))
    assert 0.0 <= q <= 1.0
    assert q == pytest.approx(smoothstep(s, w), abs=1e-14)


@given(st.floats(0.01, 0.5))
def test_mollifier_monotone(w):
    s = np.linspace(-w, w, 101)
    assert np.all(np.diff(mollifier(s, w)) >= 0)
