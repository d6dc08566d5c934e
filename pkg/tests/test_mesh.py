"""Interval/radial/triangular meshes, grading, nested refinement, prolongation."""

import math

import numpy as np
import pytest

from robinhardy.errors import MeshError
from robinhardy.geometry import Ball, ConvexPolygon, ExteriorBall, Interval
from robinhardy.mesh import (
    Mesh1D,
    RadialLogMesh,
    TriMesh,
    build_interval_mesh,
    build_polygon_mesh,
    build_radial_mesh,
    graded_spacings,
    min_angle_degrees,
    prolong_values,
    refine_mesh,
    signed_areas,
)

SQUARE = ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


def test_uniform_spacings():
    s = graded_spacings(5, 1.0, (0,), 1.0)
    assert s == pytest.approx(np.full(5, 0.2), abs=0.0)
    s = graded_spacings(8, 0.5, (), 2.0)  # no graded ends -> uniform
    assert s == pytest.approx(np.full(8, 0.25), abs=1e-15)


def test_two_zone_spacings():
    # four cells, ratio one half toward the left end: widths 1,2,4,8 over 15
    s = graded_spacings(4, 0.5, (0,), 1.0)
    assert s == pytest.approx(np.array([1.0, 2.0, 4.0, 8.0]) / 15.0, rel=1e-14)
    assert s.sum() == pytest.approx(1.0, abs=1e-15)
    # symmetric double grading
    s = graded_spacings(6, 0.5, (0, 1), 1.0)
    assert s == pytest.approx(s[::-1], rel=1e-14)
    assert s[0] == pytest.approx(1.0 / 14.0, rel=1e-14)


def test_spacing_ratio_is_exact_inside_layer():
    s = graded_spacings(200, 0.7, (0,), 1.0)
    ratios = s[:20] / s[1:21]
    assert ratios == pytest.approx(np.full(20, 0.7), rel=1e-12)


def test_spacing_floor_prevents_underflow():
    s = graded_spacings(100000, 0.5, (0, 1), 1.0)
    assert s.min() > 0.0
    assert s.min() >= 1e-13 * np.median(s) * 0.1  # far above denormal territory
    assert s.sum() == pytest.approx(1.0, rel=1e-12)


def test_spacing_validation():
    with pytest.raises(MeshError):
        graded_spacings(1, 0.5, (0,), 1.0)
    with pytest.raises(MeshError):
        graded_spacings(4, 0.0, (0,), 1.0)
    with pytest.raises(MeshError):
        graded_spacings(4, 1.5, (0,), 1.0)


def test_build_interval_mesh():
    iv = Interval(2.0, 5.0)
    mesh = build_interval_mesh(iv, 30)
    assert mesh.n_cells == 30
    assert mesh.nodes[0] == 2.0 and mesh.nodes[-1] == 5.0
    assert np.all(np.diff(mesh.nodes) > 0)
    summ = mesh.summary()
    assert summ["kind"] == "interval" and summ["cells"] == 30
    with pytest.raises(MeshError):
        build_interval_mesh(iv, 10, toward=(2,))


def test_mesh1d_validation():
    with pytest.raises(MeshError):
        Mesh1D(np.array([0.0, 0.0, 1.0]))
    with pytest.raises(MeshError):
        Mesh1D(np.array([0.0]))


def test_radial_mesh_ball():
    mesh = build_radial_mesh(Ball(3, 2.0), 16)
    assert mesh.nodes[0] == 0.0 and mesh.nodes[-1] == 2.0
    assert mesh.endpoint_pieces == (None, 0)  # the center is not boundary
    graded = build_radial_mesh(Ball(3, 2.0), 16, toward=(0,))
    h = np.diff(graded.nodes)
    assert h[-1] < h[0]  # graded toward the sphere
    with pytest.raises(MeshError):
        build_radial_mesh(Ball(3, 2.0), 16, toward=(1,))
    with pytest.raises(MeshError):
        build_radial_mesh(Interval(0.0, 1.0), 16)


def test_radial_mesh_exterior():
    ext = ExteriorBall(2, 1.0, math.e**3)
    mesh = build_radial_mesh(ext, 12)
    assert isinstance(mesh, RadialLogMesh)
    assert mesh.s_nodes[-1] == pytest.approx(3.0, rel=1e-15)
    assert mesh.n_cells == 12
    with pytest.raises(MeshError):
        build_radial_mesh(ext, 12, toward=(0,))


def test_refine_interval_nested():
    iv = Interval(0.0, 1.0)
    coarse = build_interval_mesh(iv, 9, toward=(0,))
    fine = refine_mesh(coarse)
    # every coarse node survives
    for x in coarse.nodes:
        assert np.min(np.abs(fine.nodes - x)) < 1e-15
    # the graded end deepens by a full ladder, not a single midpoint
    assert np.diff(fine.nodes).min() < 0.26 * np.diff(coarse.nodes).min()


def test_refine_log_mesh_bisects():
    mesh = RadialLogMesh(np.linspace(0.0, 2.0, 5))
    fine = refine_mesh(mesh)
    assert fine.n_cells == 8
    assert fine.s_nodes == pytest.approx(np.linspace(0.0, 2.0, 9), abs=1e-15)


def test_refine_trimesh_counts_and_orientation():
    coarse = build_polygon_mesh(SQUARE, 0.3)
    fine = refine_mesh(coarse)
    t = coarse.triangles
    edges = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
    n_edges = len(np.unique(edges, axis=0))
    assert len(fine.vertices) == len(coarse.vertices) + n_edges
    assert len(fine.triangles) == 4 * len(coarse.triangles)
    assert len(fine.boundary_edges) == 2 * len(coarse.boundary_edges)
    assert signed_areas(fine.vertices, fine.triangles).sum() == pytest.approx(1.0, rel=1e-12)
    # 4-way subdivision produces children similar to the parent
    assert min_angle_degrees(fine) == pytest.approx(min_angle_degrees(coarse), rel=1e-9)


def test_polygon_mesh_quality():
    mesh = build_polygon_mesh(SQUARE, 0.15)
    assert min_angle_degrees(mesh) >= 20.0
    assert signed_areas(mesh.vertices, mesh.triangles).sum() == pytest.approx(1.0, rel=1e-12)
    assert len(mesh.boundary_edges) == len(mesh.boundary_piece)
    assert set(np.unique(mesh.boundary_piece)) == {0, 1, 2, 3}
    summ = mesh.summary()
    assert summ["kind"] == "triangulation"
    assert summ["min_angle_deg"] >= 20.0


def test_polygon_mesh_grading_refines_near_piece():
    mesh = build_polygon_mesh(SQUARE, 0.2, grade_near=(0,))
    v, t = mesh.vertices, mesh.triangles
    cent = v[t].mean(axis=1)
    areas = signed_areas(v, t)
    near = cent[:, 1] < 0.05
    assert near.any()
    assert areas[near].mean() < 0.3 * areas[~near].mean()
    with pytest.raises(MeshError):
        build_polygon_mesh(SQUARE, 0.2, grade_near=(9,))
    with pytest.raises(MeshError):
        build_polygon_mesh(SQUARE, -0.1)


def test_prolong_interval_exact():
    iv = Interval(0.0, 1.0)
    coarse = build_interval_mesh(iv, 7, toward=(1,))
    fine = refine_mesh(coarse)
    vals = np.sin(coarse.nodes * 3.0)
    out = prolong_values(coarse, fine, vals)
    # coarse nodes keep their values, new nodes interpolate linearly
    for x, v in zip(coarse.nodes, vals):
        k = int(np.argmin(np.abs(fine.nodes - x)))
        assert out[k] == pytest.approx(v, abs=1e-15)
    assert out == pytest.approx(np.interp(fine.nodes, coarse.nodes, vals), abs=0.0)


def test_prolong_trimesh_exact_on_linear_fields():
    coarse = build_polygon_mesh(SQUARE, 0.35)
    fine = refine_mesh(coarse)
    vals = 2.0 * coarse.vertices[:, 0] - 0.5 * coarse.vertices[:, 1] + 1.0
    out = prolong_values(coarse, fine, vals)
    expect = 2.0 * fine.vertices[:, 0] - 0.5 * fine.vertices[:, 1] + 1.0
    assert out == pytest.approx(expect, abs=1e-12)


def test_prolong_rejects_unrelated_meshes():
    a = build_polygon_mesh(SQUARE, 0.4)
    b = build_polygon_mesh(SQUARE, 0.3)
    with pytest.raises(MeshError):
        prolong_values(a, b, np.zeros(len(a.vertices)))
