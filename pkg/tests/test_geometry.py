"""Domains, projections, distances, in-radii, and boundary partitions."""

import math

import numpy as np
import pytest

from robinhardy.errors import DomainError, PartitionError
from robinhardy.geometry import (
    WHOLE_SPHERE,
    Ball,
    BoundaryPartition,
    ConvexPolygon,
    ExteriorBall,
    Interval,
    boundary_projection,
    distance_to_boundary,
    inradius,
    nearest_count,
    piece_measure,
    project_points,
    sphere_area,
)

UNIT_SQUARE = ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


def test_interval_distance_and_projection():
    iv = Interval(0.0, 1.0)
    assert distance_to_boundary(iv, 0.3) == pytest.approx(0.3, abs=0.0)
    point, piece, mult = boundary_projection(iv, 0.3)
    assert (point, piece, mult) == (0.0, 0, 1)
    point, piece, mult = boundary_projection(iv, 0.9)
    assert (point, piece, mult) == (1.0, 1, 1)
    # midpoint: both endpoints nearest, lowest piece id wins
    point, piece, mult = boundary_projection(iv, 0.5)
    assert (point, piece, mult) == (0.0, 0, 2)


def test_interval_rejects_outside_and_degenerate():
    with pytest.raises(DomainError):
        Interval(1.0, 1.0)
    with pytest.raises(DomainError):
        distance_to_boundary(Interval(0.0, 1.0), 1.5)


def test_square_distances():
    assert distance_to_boundary(UNIT_SQUARE, [0.25, 0.5]) == pytest.approx(0.25, abs=1e-14)
    _, piece, _ = boundary_projection(UNIT_SQUARE, np.array([0.25, 0.5]))
    assert piece == 3  # left edge is vertex 3 -> vertex 0
    assert nearest_count(UNIT_SQUARE, [0.5, 0.5]) == 4


def test_square_diagonal_ridge():
    # points on the diagonal away from the center see two nearest edges
    assert nearest_count(UNIT_SQUARE, [0.25, 0.25]) == 2
    _, piece, _ = boundary_projection(UNIT_SQUARE, np.array([0.25, 0.25]))
    assert piece == 0


def test_polygon_validation():
    with pytest.raises(DomainError):
        ConvexPolygon(np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]))  # clockwise
    with pytest.raises(DomainError):
        ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(DomainError):
        distance_to_boundary(UNIT_SQUARE, [2.0, 2.0])


def test_ball_center_multiplicity():
    ball = Ball(3, 2.0)
    point, piece, mult = boundary_projection(ball, [0.0, 0.0, 0.0])
    assert mult == WHOLE_SPHERE
    assert piece == 0
    assert np.linalg.norm(point) == pytest.approx(2.0, abs=0.0)
    point, _, mult = boundary_projection(ball, [0.0, 1.0, 0.0])
    assert mult == 1
    assert point == pytest.approx([0.0, 2.0, 0.0])


def test_exterior_ball_distance():
    ext = ExteriorBall(2, 1.0, 100.0)
    assert distance_to_boundary(ext, [3.0, 4.0]) == pytest.approx(4.0, abs=1e-14)
    with pytest.raises(DomainError):
        distance_to_boundary(ext, [0.1, 0.1])
    with pytest.raises(DomainError):
        ExteriorBall(2, 1.0, 0.5)


def test_inradius_values():
    assert inradius(Interval(0.0, 1.0)) == pytest.approx(0.5, abs=0.0)
    assert inradius(Ball(2, 2.0)) == pytest.approx(2.0, abs=0.0)
    assert inradius(UNIT_SQUARE) == pytest.approx(0.5, abs=1e-8)
    tri = ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    assert inradius(tri) == pytest.approx(1.0 / (2.0 + math.sqrt(2.0)), abs=1e-8)
    with pytest.raises(DomainError):
        inradius(ExteriorBall(2, 1.0, 10.0))


def test_piece_measures():
    assert piece_measure(UNIT_SQUARE, 0) == pytest.approx(1.0, abs=1e-15)
    assert piece_measure(Interval(0.0, 1.0), 1) == 1.0
    assert piece_measure(Ball(2, 1.0), 0) == pytest.approx(2.0 * math.pi, rel=1e-15)
    assert sphere_area(3, 1.0) == pytest.approx(4.0 * math.pi, rel=1e-15)
    assert sphere_area(1, 5.0) == 2.0
    with pytest.raises(DomainError):
        piece_measure(Ball(2, 1.0), 1)


def test_partition_basics():
    part = BoundaryPartition.from_sigmas({0: math.inf, 1: 2.0, 2: 0.5, 3: 1.0})
    assert part.is_dirichlet(0)
    assert not part.is_dirichlet(2)
    assert part.dirichlet_ids == (0,)
    assert part.has_dirichlet
    assert part.sigma_max == 2.0
    assert part.sigma_min == 0.5
    part.validate_for(UNIT_SQUARE)
    with pytest.raises(PartitionError):
        part.validate_for(Interval(0.0, 1.0))
    with pytest.raises(PartitionError):
        part.sigma_of(7)


def test_partition_from_sequence_and_duplicates():
    part = BoundaryPartition.from_sigmas([1.0, math.inf])
    assert part.sigma_of(0) == 1.0
    assert part.dirichlet_ids == (1,)
    with pytest.raises(PartitionError):
        BoundaryPartition.from_sigmas({0: -1.0})
    from robinhardy.geometry import BoundaryPiece

    with pytest.raises(PartitionError):
        BoundaryPartition((BoundaryPiece(0, 1.0), BoundaryPiece(0, 2.0)))


def test_all_robin_partition_sigma_min_max():
    part = BoundaryPartition.from_sigmas({0: math.inf, 1: math.inf})
    assert not any(not part.is_dirichlet(i) for i in (0, 1))
    assert part.sigma_max == 0.0
    assert part.sigma_min == math.inf


def test_project_points_matches_pointwise():
    rng = np.random.default_rng(2024)
    pts = rng.uniform(0.05, 0.95, size=(64, 2))
    delta, piece = project_points(UNIT_SQUARE, pts)
    for k in range(len(pts)):
        assert delta[k] == pytest.approx(distance_to_boundary(UNIT_SQUARE, pts[k]), abs=1e-12)
        _, pid, mult = boundary_projection(UNIT_SQUARE, pts[k])
        if mult == 1:
            assert piece[k] == pid


def test_distance_is_one_lipschitz():
    rng = np.random.default_rng(7)
    pts = rng.uniform(0.0, 1.0, size=(40, 2, 2))
    for x, y in pts:
        dx = distance_to_boundary(UNIT_SQUARE, x)
        dy = distance_to_boundary(UNIT_SQUARE, y)
        assert abs(dx - dy) <= np.linalg.norm(x - y) + 1e-12


def test_distance_attains_inradius():
    # sup of delta over the domain equals the in-radius (convexity)
    rng = np.random.default_rng(11)
    pts = rng.uniform(0.0, 1.0, size=(500, 2))
    delta, _ = project_points(UNIT_SQUARE, pts)
    assert delta.max() <= inradius(UNIT_SQUARE) + 1e-9
    assert distance_to_boundary(UNIT_SQUARE, [0.5, 0.5]) == pytest.approx(inradius(UNIT_SQUARE), abs=1e-8)
