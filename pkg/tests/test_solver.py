"""Descent solver: monotonicity, agreement with a dense eigensolver at p = 2,
certificate attachment, and the nested-refinement sequence."""

import math

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss
from scipy.linalg import eigh

from robinhardy.errors import ParameterError, SolverError
from robinhardy.functional import QuotientForm
from robinhardy.geometry import Ball, BoundaryPartition, ConvexPolygon, Interval
from robinhardy.mesh import build_interval_mesh, build_polygon_mesh, build_radial_mesh
from robinhardy.oracles import ball_upper_bound, robin_lower_bound
from robinhardy.solver import (
    SolverConfig,
    local_gradient_energy,
    minimize_quotient,
    minimizing_sequence,
)
from robinhardy.weights import weight_at

UNIT = Interval(0.0, 1.0)
SQUARE = ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


def robin_both(sigma=1.0):
    return BoundaryPartition.from_sigmas({0: sigma, 1: sigma})


def dirichlet_robin(sigma=1.0):
    return BoundaryPartition.from_sigmas({0: math.inf, 1: sigma})


def dense_min_eig(domain, partition, mesh):
    """Smallest generalized eigenvalue of the p = 2 quotient, assembled
    densely from scratch (hat functions, 5-point Gauss per cell)."""
    nodes = mesh.nodes
    n1 = nodes.size
    h = np.diff(nodes)
    A = np.zeros((n1, n1))
    B = np.zeros((n1, n1))
    xg, wg = leggauss(5)
    xi = 0.5 * (xg + 1.0)
    ww = 0.5 * wg
    for k in range(n1 - 1):
        A[k : k + 2, k : k + 2] += (1.0 / h[k]) * np.array([[1.0, -1.0], [-1.0, 1.0]])
        for t, w in zip(xi, ww):
            x = nodes[k] + h[k] * t
            wt = weight_at(domain, partition, 2.0, x)
            phi = np.array([1.0 - t, t])
            B[k : k + 2, k : k + 2] += h[k] * w * wt * np.outer(phi, phi)
    free = np.ones(n1, dtype=bool)
    for pid, idx in ((0, 0), (1, n1 - 1)):
        sig = partition.sigma_of(pid)
        if math.isinf(sig):
            free[idx] = False
        elif sig > 0:
            A[idx, idx] += sig
    Af = A[np.ix_(free, free)]
    Bf = B[np.ix_(free, free)]
    return float(eigh(Af, Bf, eigvals_only=True, subset_by_index=[0, 0])[0])


# -- configuration -----------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        {"rel_tol": 0.0},
        {"rel_tol": -1e-9},
        {"shrink": 0.0},
        {"shrink": 1.0},
        {"max_iter": 0},
        {"init": "bogus"},
        {"init": "custom"},  # no init_values
    ],
)
def test_config_rejects_bad_parameters(kwargs):
    with pytest.raises(ParameterError):
        SolverConfig(**kwargs)


# -- descent behaviour -------------------------------------------------------


def test_history_monotone_and_report_consistent():
    mesh = build_interval_mesh(UNIT, 200)
    field, report = minimize_quotient(UNIT, robin_both(), mesh, 2.0)
    hist = np.asarray(report.history)
    assert np.all(np.diff(hist) <= 0.0)
    assert report.lambda_estimate == hist[-1]
    assert report.iterations == len(hist) - 1
    assert report.converged
    assert not report.violation
    d = report.to_dict()
    for key in (
        "lambda_estimate",
        "iterations",
        "history",
        "analytic_lower",
        "analytic_upper",
        "converged",
        "mesh_summary",
        "violation",
        "notes",
    ):
        assert key in d
    assert isinstance(d["mesh_summary"], dict)
    # the minimizer comes back normalized
    form = QuotientForm(UNIT, robin_both(), mesh, 2.0)
    assert form.weighted_norm_pp(field) == pytest.approx(1.0, abs=1e-10)


def test_matches_dense_eigensolver_all_robin():
    mesh = build_interval_mesh(UNIT, 200)
    lam = dense_min_eig(UNIT, robin_both(), mesh)
    _, report = minimize_quotient(UNIT, robin_both(), mesh, 2.0)
    assert report.converged
    assert report.lambda_estimate == pytest.approx(lam, rel=1e-9)


def test_matches_dense_eigensolver_mixed():
    part = dirichlet_robin(2.0)
    mesh = build_interval_mesh(UNIT, 150)
    lam = dense_min_eig(UNIT, part, mesh)
    _, report = minimize_quotient(UNIT, part, mesh, 2.0, SolverConfig(max_iter=4000))
    assert report.converged
    assert report.lambda_estimate == pytest.approx(lam, rel=1e-9)


def test_init_modes_reach_same_minimum():
    mesh = build_interval_mesh(UNIT, 80)
    values = {}
    for mode in ("auto", "ones", "delta_power"):
        _, rep = minimize_quotient(
            UNIT, robin_both(), mesh, 2.0, SolverConfig(init=mode, max_iter=2000)
        )
        assert rep.converged
        values[mode] = rep.lambda_estimate
    ref = values["auto"]
    for v in values.values():
        assert v == pytest.approx(ref, rel=1e-8)


def test_custom_init_restarts_at_given_field():
    mesh = build_interval_mesh(UNIT, 80)
    f0, r0 = minimize_quotient(UNIT, robin_both(), mesh, 2.0)
    cfg = SolverConfig(init="custom", init_values=f0.values.copy(), max_iter=50)
    _, r1 = minimize_quotient(UNIT, robin_both(), mesh, 2.0, cfg)
    assert r1.history[0] == pytest.approx(r0.lambda_estimate, rel=1e-14)
    assert r1.lambda_estimate <= r0.lambda_estimate + 1e-15


def test_custom_init_shape_mismatch():
    mesh = build_interval_mesh(UNIT, 80)
    cfg = SolverConfig(init="custom", init_values=np.ones(7))
    with pytest.raises(ParameterError):
        minimize_quotient(UNIT, robin_both(), mesh, 2.0, cfg)


def test_preconditioner_modes_agree():
    mesh = build_interval_mesh(UNIT, 60)
    values = {}
    for mode in ("operator", "jacobi", "none"):
        _, rep = minimize_quotient(
            UNIT, robin_both(), mesh, 2.0, SolverConfig(max_iter=6000, preconditioner=mode)
        )
        assert rep.converged, mode
        values[mode] = rep.lambda_estimate
    ref = values["operator"]
    for mode, v in values.items():
        assert v == pytest.approx(ref, rel=1e-6), mode


def test_all_pinned_mesh_is_rejected():
    # a very coarse square triangulates with every vertex on the boundary
    mesh = build_polygon_mesh(SQUARE, 1.5)
    part = BoundaryPartition.from_sigmas({i: math.inf for i in range(4)})
    with pytest.raises(SolverError):
        minimize_quotient(SQUARE, part, mesh, 2.0)


# -- fault injection ---------------------------------------------------------


def test_tampered_form_trips_violation_flag():
    part = dirichlet_robin()
    mesh = build_interval_mesh(UNIT, 100, toward=(0,))
    form = QuotientForm(UNIT, part, mesh, 2.0)
    form.mass_qw = form.mass_qw * 100.0  # inflate the weighted mass
    _, report = minimize_quotient(UNIT, part, mesh, 2.0, SolverConfig(max_iter=500), form=form)
    assert report.violation
    assert report.lambda_estimate < report.analytic_lower
    assert any("fault" in note for note in report.notes)


def test_clean_run_does_not_violate():
    part = dirichlet_robin()
    mesh = build_interval_mesh(UNIT, 100, toward=(0,))
    _, report = minimize_quotient(UNIT, part, mesh, 2.0, SolverConfig(max_iter=2000))
    assert not report.violation
    assert report.lambda_estimate >= report.analytic_lower


# -- certificates ------------------------------------------------------------


def test_dirichlet_certificate_is_hardy_constant():
    mesh = build_interval_mesh(UNIT, 64, toward=(0, 1))
    part = BoundaryPartition.from_sigmas({0: math.inf, 1: math.inf})
    _, report = minimize_quotient(UNIT, part, mesh, 2.0, SolverConfig(max_iter=800))
    assert report.analytic_lower == 0.25
    assert report.analytic_upper is None
    assert report.lambda_estimate >= 0.25


def test_all_robin_certificate_uses_inradius():
    mesh = build_interval_mesh(UNIT, 200)
    _, report = minimize_quotient(UNIT, robin_both(1.0), mesh, 2.0)
    assert report.analytic_lower == robin_lower_bound(2.0, 0.5, 1.0)
    assert report.lambda_estimate >= report.analytic_lower


def test_polygon_certificate_notes_piecewise_boundary():
    part = BoundaryPartition.from_sigmas({0: math.inf, 1: 1.0, 2: 1.0, 3: 1.0})
    mesh = build_polygon_mesh(SQUARE, 0.2)
    _, report = minimize_quotient(SQUARE, part, mesh, 2.0, SolverConfig(max_iter=300))
    assert report.analytic_lower == 0.25
    assert any("piecewise linear" in note for note in report.notes)


def test_ball_gets_explicit_upper_bound():
    ball = Ball(2, 1.0)
    part = BoundaryPartition.from_sigmas({0: 1.0})
    mesh = build_radial_mesh(ball, 400)
    _, report = minimize_quotient(ball, part, mesh, 2.0, SolverConfig(max_iter=800))
    assert report.analytic_upper == ball_upper_bound(2, 2.0, 1.0, 1.0)
    assert report.lambda_estimate <= report.analytic_upper + 1e-9
    assert report.lambda_estimate >= report.analytic_lower


# -- nested refinement -------------------------------------------------------


def test_minimizing_sequence_descends_and_normalizes():
    part = dirichlet_robin(1.0)
    base = build_interval_mesh(UNIT, 24, toward=(0,))
    triples = minimizing_sequence(
        UNIT, part, 2.0, levels=3, base_mesh=base, config=SolverConfig(max_iter=600)
    )
    assert len(triples) == 3
    quotients = [rep.lambda_estimate for _, _, rep in triples]
    assert all(b <= a + 1e-15 for a, b in zip(quotients, quotients[1:]))
    # meshes nest: every coarse node survives, and the graded end deepens
    for (fc, _, _), (ff, _, _) in zip(triples, triples[1:]):
        coarse, fine = fc.mesh.nodes, ff.mesh.nodes
        assert fine.size > coarse.size
        assert np.all(np.isin(coarse, fine))
    for form, field, _ in triples:
        assert form.weighted_norm_pp(field) == pytest.approx(1.0, abs=1e-10)


def test_minimizing_sequence_warm_start_never_regresses():
    part = dirichlet_robin(1.0)
    base = build_interval_mesh(UNIT, 24, toward=(0,))
    triples = minimizing_sequence(
        UNIT, part, 2.0, levels=3, base_mesh=base, config=SolverConfig(max_iter=600)
    )
    for (_, _, prev), (_, _, cur) in zip(triples, triples[1:]):
        # the prolonged start reproduces the coarse minimizer as a function;
        # its quotient matches the coarse estimate up to quadrature transfer
        # (the fine mesh samples the singular weight at new points)
        assert cur.history[0] <= prev.lambda_estimate * (1.0 + 1e-3)
        # and descent from there ends strictly no worse than the coarse level
        assert cur.lambda_estimate <= prev.lambda_estimate + 1e-15


def test_minimizing_sequence_validation():
    with pytest.raises(ParameterError):
        minimizing_sequence(UNIT, dirichlet_robin(), 2.0, levels=1)
    part = BoundaryPartition.from_sigmas({0: math.inf, 1: 1.0, 2: 1.0, 3: 1.0})
    with pytest.raises(ParameterError):
        minimizing_sequence(SQUARE, part, 2.0, levels=2)


# -- localized energy --------------------------------------------------------


def test_local_gradient_energy_partitions_total_1d():
    mesh = build_interval_mesh(UNIT, 80)
    form = QuotientForm(UNIT, robin_both(), mesh, 2.0)
    field, _ = minimize_quotient(UNIT, robin_both(), mesh, 2.0)
    total = form.gradient_energy(field)
    near = local_gradient_energy(form, field, lambda c: c < 0.5)
    far = local_gradient_energy(form, field, lambda c: c >= 0.5)
    assert near + far == pytest.approx(total, rel=1e-12)


def test_local_gradient_energy_partitions_total_2d():
    part = BoundaryPartition.from_sigmas({0: math.inf, 1: 1.0, 2: 1.0, 3: 1.0})
    mesh = build_polygon_mesh(SQUARE, 0.25)
    form = QuotientForm(SQUARE, part, mesh, 3.0)
    rng = np.random.default_rng(7)
    field = form.field(np.where(form.pinned, 0.0, rng.standard_normal(form.pinned.size)))
    total = form.gradient_energy(field)
    near = local_gradient_energy(form, field, lambda c: c[0] < 0.4)
    far = local_gradient_energy(form, field, lambda c: c[0] >= 0.4)
    assert near + far == pytest.approx(total, rel=1e-12)
