import math

import numpy as np
import pytest
from hypothesis import given, settings

from cpwalk.errors import NoConvergence, UnconvergedPacking
from cpwalk.hypgeo import DISC, PLANE, dist_hyp_many, equilateral_radius
from cpwalk.maps import ball
from cpwalk.packer import (PackingProblem, SolverConfig, angle_sum, angle_sums, check_converged,
                           layout, pack, pack_exhaustion, ring_report, solve_radii)
from cpwalk.samplers import regular_triangulation

from conftest import triangulated_discs, wheel

# frozen from 30-digit mpmath evaluations of sqrt(2 / (1 - cos(2 pi / k))) - 1
HUB_7 = 1.3047648709624865052
HUB_5 = 0.70130161670407986436
R_STAR_7 = 0.54527483175354308723


def hub_radius(k):
    r, _ = solve_radii(PackingProblem(wheel(k), PLANE, 1.0))
    return r[0]


# -----------------------------------------------------------------------------
# wheels


def test_hexagonal_wheel_hub_is_one():
    assert abs(hub_radius(6) - 1.0) < 1e-12
    r = np.ones(7)
    assert angle_sum(wheel(6), r, 0, PLANE) == pytest.approx(2 * math.pi, abs=1e-14)


@pytest.mark.parametrize("k, expected", [(7, HUB_7), (5, HUB_5)])
def test_wheel_hub_oracle(k, expected):
    assert abs(hub_radius(k) - expected) < 1e-10


def test_unconverged_seven_wheel_angle_sum():
    assert angle_sum(wheel(7), np.ones(8), 0, PLANE) == pytest.approx(7 * math.pi / 3)


def test_hexagonal_wheel_layout():
    p = pack(PackingProblem(wheel(6), PLANE), root=0, axis_vertex=1)
    assert abs(p.centers[0]) < 1e-12
    rim = p.centers[1:]
    assert np.allclose(np.abs(rim), 2, atol=1e-12)
    ang = np.sort(np.mod(np.angle(rim), 2 * np.pi))
    assert np.allclose(ang, np.arange(6) * np.pi / 3, atol=1e-12)


@pytest.mark.parametrize("geometry", [PLANE, DISC])
def test_damped_defect_is_monotone_on_wheels(geometry):
    for k in (5, 7, 9):
        _, rep = solve_radii(PackingProblem(wheel(k), geometry), SolverConfig(damping=0.5))
        h = np.array(rep.defect_history)
        assert np.all(np.diff(h) <= 1e-15)


def test_budget_exhaustion_raises_with_defect():
    with pytest.raises(NoConvergence) as info:
        solve_radii(PackingProblem(regular_triangulation(7, 4), DISC), SolverConfig(max_iters=3))
    assert info.value.defect > 0


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tol=0)
    with pytest.raises(ValueError):
        SolverConfig(damping=1.5)


def test_problem_needs_boundary_and_triangles():
    from cpwalk.maps import build_map
    with pytest.raises(ValueError):
        PackingProblem(build_map([(1, 2), (2, 0), (0, 1)]), PLANE)


# -----------------------------------------------------------------------------
# packings of random triangulated discs


def disc_with_interior(m):
    return (~m.boundary_mask()).any()


@settings(max_examples=15)
@given(triangulated_discs(min_n=8, max_n=40))
def test_disc_packing_invariants(m):
    if not disc_with_interior(m):
        return
    p = pack(PackingProblem(m, DISC))
    assert p.tangency_residual < 1e-9
    assert p.pairwise_disjointness() > -1e-9
    assert np.all(np.abs(p.centers) + p.radii <= 1 + 1e-12)
    check_converged(p, 1e-9)
    root, axis = p.normalization
    assert abs(p.centers[root]) < 1e-12
    assert abs(p.centers[axis].imag) < 1e-12 and p.centers[axis].real > 0


@settings(max_examples=15)
@given(triangulated_discs(min_n=8, max_n=40))
def test_plane_packing_invariants(m):
    p = pack(PackingProblem(m, PLANE))
    assert p.tangency_residual < 1e-9
    assert p.pairwise_disjointness() > -1e-9


@settings(max_examples=10)
@given(triangulated_discs(min_n=10, max_n=40))
def test_disc_normalization_invariance(m):
    interior = np.nonzero(~m.boundary_mask())[0]
    if len(interior) < 2:
        return
    prob = PackingProblem(m, DISC)
    r, rep = solve_radii(prob)
    a = layout(prob, r, int(interior[0]))
    b = layout(prob, r, int(interior[-1]), m.neighbors(int(interior[-1]))[-1])
    # hyperbolic distances between interior centres are normalization-free
    for v in interior:
        da = dist_hyp_many(a.hyp_centers[v], a.hyp_centers[interior])
        db = dist_hyp_many(b.hyp_centers[v], b.hyp_centers[interior])
        assert np.allclose(da, db, atol=1e-9)
    assert np.allclose(a.corner_angles()[1], b.corner_angles()[1], atol=1e-12)


@settings(max_examples=10)
@given(triangulated_discs(min_n=10, max_n=40))
def test_sweep_order_invariance(m):
    if not disc_with_interior(m):
        return
    prob = PackingProblem(m, DISC)
    jac, _ = solve_radii(prob, SolverConfig(schedule="jacobi"))
    gs, _ = solve_radii(prob, SolverConfig(schedule="gauss_seidel"))
    inner = ~m.boundary_mask()
    assert np.allclose(jac[inner], gs[inner], atol=1e-9)


@settings(max_examples=10)
@given(triangulated_discs(min_n=10, max_n=40))
def test_plane_layout_differs_by_rigid_motion(m):
    prob = PackingProblem(m, PLANE)
    r, _ = solve_radii(prob)
    a = layout(prob, r, 0)
    v = m.n_vertices - 1
    b = layout(prob, r, v, m.neighbors(v)[0])
    da = np.abs(a.centers[:, None] - a.centers[None, :])
    db = np.abs(b.centers[:, None] - b.centers[None, :])
    assert np.allclose(da, db, atol=1e-9)


def test_angle_sums_vanish_defect_at_convergence():
    m = regular_triangulation(7, 3)
    p = pack(PackingProblem(m, DISC))
    theta = angle_sums(m, p.hyp_radii, DISC)
    inner = ~m.boundary_mask()
    assert np.max(np.abs(theta[inner] - 2 * math.pi)) < 1e-10


def test_check_converged_rejects_perturbed_packing():
    m = regular_triangulation(7, 3)
    p = pack(PackingProblem(m, DISC))
    p.hyp_radii[0] *= 1.01
    with pytest.raises(UnconvergedPacking):
        check_converged(p)


# -----------------------------------------------------------------------------
# exhaustion and ring lemma


def test_seven_regular_exhaustion_approaches_r_star():
    host = regular_triangulation(7, 7)
    balls = [ball(host, 0, k).map for k in (3, 4, 5, 6)]
    packs, rep = pack_exhaustion(balls, levels=[3, 4, 5, 6])
    errs = [abs(rows[0] - R_STAR_7) for rows in rep.hyp_radii]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert all(b < a for a, b in zip(rep.deltas, rep.deltas[1:]))
    assert abs(equilateral_radius(7) - R_STAR_7) < 1e-15
    # one normalization across the sequence
    for p in packs:
        root, axis = p.normalization
        assert p.map.labels[root] == 0
        assert p.map.labels[axis] == balls[0].labels[balls[0].neighbors(0)[0]]


def test_lattice_exhaustion_in_plane_equalizes_radii():
    # uneven boundary radii; the root star evens out as the ball grows
    host = regular_triangulation(6, 11)
    rng = np.random.default_rng(0)
    spreads = []
    for k in (2, 4, 6, 8, 10):
        b = ball(host, 0, k).map
        p = pack(PackingProblem(b, PLANE, rng.uniform(0.5, 2.0, b.n_vertices)))
        rr = p.radii[np.nonzero(b.distances(0) <= 1)[0]]
        spreads.append(rr.max() / rr.min() - 1)
    assert all(b < a for a, b in zip(spreads, spreads[1:]))
    assert spreads[-1] < 0.02


def test_single_level_exhaustion_is_a_wheel_solve():
    b = ball(regular_triangulation(7, 2), 0, 1).map
    packs, rep = pack_exhaustion([b])
    assert rep.deltas == []
    assert len(packs) == 1 and packs[0].map.n_vertices == 8


def test_ring_report_hexagonal_wheel_is_zero():
    p = pack(PackingProblem(wheel(6), PLANE))
    assert ring_report(p) == 0.0


def test_ring_report_bounds_every_ratio():
    m = wheel(50)
    p = pack(PackingProblem(m, PLANE))
    c = ring_report(p)
    assert math.isfinite(c) and c > 0
    deg = m.degrees()
    inner = ~m.boundary_mask()
    for u, v in zip(m.tail, m.head):
        if inner[v]:
            assert p.radii[v] / p.radii[u] <= math.exp(c * deg[v]) * (1 + 1e-12)
