import math
from types import SimpleNamespace

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from cpwalk.analysis import (NotConverged, angle_transport_report, arc_indicator, bls_refinement,
                             boundary_distance, collar_mask, estimate_speed, exit_angles,
                             exit_histogram, exit_point, harmonic_estimate,
                             levy_convergence_check, mean_value_check, path_geometry,
                             return_probabilities, rotation_symmetry, sandwich_check,
                             spectral_radius_estimate)
from cpwalk.errors import EmptyInput, TrajectoryExitsWindow, UnconvergedPacking
from cpwalk.hypgeo import DISC, PLANE
from cpwalk.packer import PackingProblem, pack
from cpwalk.samplers import regular_triangulation
from cpwalk.tiling import RegularTiling
from cpwalk.walker import Trajectory, WeightedGraphView, run_walks

from conftest import regular_tree, triangulated_discs

TREE_RHO = 0.94280904158206336587  # 2 sqrt(2) / 3


@pytest.fixture(scope="module")
def tiling():
    return RegularTiling(7)


@pytest.fixture(scope="module")
def lattice_packing():
    return pack(PackingProblem(regular_triangulation(6, 8), PLANE))


@pytest.fixture(scope="module")
def seven_packing():
    return pack(PackingProblem(regular_triangulation(7, 5), DISC), root=0)


# -----------------------------------------------------------------------------
# windows and path geometry


def test_boundary_distance_on_rings():
    m = regular_triangulation(7, 4)
    d = boundary_distance(m)
    assert np.array_equal(d, 4 - m.distances(0))
    assert collar_mask(m, 2).sum() == np.sum(m.distances(0) >= 3)


def test_plane_path_geometry_has_no_hyperbolic_distance(lattice_packing):
    t = Trajectory(0, np.array([0, 1, 2]), 0)
    g = path_geometry(lattice_packing, t)
    assert np.all(np.isnan(g.dist_from_start))
    assert np.array_equal(g.neg_log_r, np.zeros(3))


def test_horocycle_visit_is_flagged(seven_packing):
    b = int(np.nonzero(seven_packing.map.boundary_mask())[0][0])
    t = Trajectory(0, np.array([0, b]), 0)
    with pytest.raises(TrajectoryExitsWindow):
        path_geometry(seven_packing, t)


# -----------------------------------------------------------------------------
# speed


def test_lattice_decay_rate_is_exactly_zero(lattice_packing):
    m = lattice_packing.map
    view = WeightedGraphView.from_map(m)
    trajs = run_walks(view, [0] * 20, 100, seed=1, stop=collar_mask(m))
    est = estimate_speed(lattice_packing, trajs)
    assert est.decay_rate == 0.0
    assert np.all(est.decay_slopes == 0.0)


def test_tiling_speed_equals_decay(tiling):
    est = estimate_speed(tiling, tiling.walks(60, 600, seed=3))
    assert est.speed_hyp > 0 and est.decay_rate > 0
    assert est.agree(3.0)
    assert est.n_range == (240, 600)


def test_unreliable_when_walks_reach_collar(seven_packing):
    m = seven_packing.map
    view = WeightedGraphView.from_map(m)
    # stop one hop inside the boundary: inside the collar but off the horocycles
    stop = boundary_distance(m) == 1
    trajs = run_walks(view, [0] * 10, 200, seed=2, stop=stop)
    est = estimate_speed(seven_packing, trajs, collar=2)
    assert not est.reliable
    with pytest.raises(TrajectoryExitsWindow):
        estimate_speed(seven_packing, trajs, collar=2, strict=True)
    assert all(t.stopped for t in trajs)


def test_speed_needs_trajectories(tiling):
    with pytest.raises(EmptyInput):
        estimate_speed(tiling, [])


def test_sandwich_holds_on_tiling(tiling):
    for p in tiling.walks(20, 1000, seed=9):
        assert sandwich_check(tiling, p).ok


def test_sandwich_holds_on_finite_packing(seven_packing):
    m = seven_packing.map
    view = WeightedGraphView.from_map(m)
    for t in run_walks(view, [0] * 20, 300, seed=5, stop=m.boundary_mask()):
        rep = sandwich_check(seven_packing, Trajectory(t.start, t.vertices[:-1], 0))
        assert rep.ok


# -----------------------------------------------------------------------------
# exit points and histograms


def synthetic_packing(theta0, n=30):
    gaps = 10.0 ** -np.linspace(0.5, 8, n)
    z = (1 - gaps) * np.exp(1j * theta0)
    return SimpleNamespace(geometry=DISC, centers=z), Trajectory(0, np.arange(n), 0)


def test_exit_point_on_radial_sequence():
    p, t = synthetic_packing(1.234)
    assert exit_point(p, t, 1e-3) == pytest.approx(1.234, abs=1e-3)


def test_exit_point_not_converged():
    p, t = synthetic_packing(0.5)
    assert exit_point(p, t, 1e-12) is NotConverged
    assert not NotConverged
    assert np.isnan(exit_angles(p, [t], 1e-12)[0])


def test_tiling_walks_converge(tiling):
    ang = exit_angles(tiling, tiling.walks(200, 2000, seed=1), 1e-3)
    assert np.isfinite(ang).mean() >= 0.99


def test_atomic_histogram():
    h = exit_histogram(np.full(50, 2.0), 6)
    assert h.max_arc_mass == 1.0
    assert h.counts.sum() == h.total == 50
    assert h.min_coarse_count == 0


def test_uniform_histogram_max_mass():
    rng = np.random.default_rng(0)
    n = 10_000
    h = exit_histogram(rng.uniform(0, 2 * np.pi, n), 6)
    p = 2 ** -6
    assert h.max_arc_mass - p < 3 * math.sqrt(p * (1 - p) / n)
    assert h.min_coarse_count > 0


def test_tiling_max_mass_decreases_with_level(tiling):
    angles = exit_angles(tiling, tiling.walks(1000, 3000, seed=1, eps=1e-3), 1e-3)
    masses = [exit_histogram(angles, level).max_arc_mass for level in range(3, 8)]
    assert all(a > b for a, b in zip(masses, masses[1:]))


def test_histogram_rejects_empty_input():
    with pytest.raises(EmptyInput):
        exit_histogram([math.nan], 3)


@settings(max_examples=25)
@given(st.lists(st.floats(0, 2 * math.pi, exclude_max=True), min_size=1, max_size=200),
       st.integers(1, 8))
def test_histogram_counts_sum_to_total(angles, level):
    h = exit_histogram(angles, level)
    assert h.counts.sum() == h.total == len(angles)
    assert 0 < h.max_arc_mass <= 1


def test_rotation_symmetry_separates_regimes():
    rng = np.random.default_rng(1)
    uniform = rng.uniform(0, 2 * np.pi, 5000)
    assert np.all(np.abs(rotation_symmetry(uniform, 7)) < 4)
    lopsided = rng.uniform(0, 1.0, 5000)
    assert np.max(np.abs(rotation_symmetry(lopsided, 7))) > 10


def test_arc_indicator_wraps():
    g = arc_indicator(6.0, 6.0 + 1.0)
    assert g(np.array([6.5, 0.2, 1.0])).tolist() == [1.0, 1.0, 0.0]


# -----------------------------------------------------------------------------
# harmonic extension


def test_constant_boundary_functions(tiling):
    one = harmonic_estimate(lambda a: np.ones_like(a), (), tiling, 50, 2000, seed=0)
    assert one.value == 1.0 and one.se == 0.0
    c = harmonic_estimate(lambda a: np.full_like(a, 0.3), (1,), tiling, 50, 2000, seed=0)
    assert c.value == pytest.approx(0.3, abs=1e-15)


def test_constant_function_on_finite_packing(seven_packing):
    est = harmonic_estimate(lambda a: np.ones_like(a), 0, seven_packing, 30, 2000, seed=1, eps=0.05)
    assert est.n_converged == 30 and est.value == 1.0


def test_levy_sequence_for_constant_function(tiling):
    path = tiling.walks(1, 6, seed=2)[0]
    rep = levy_convergence_check(lambda a: np.ones_like(a), path, tiling, 20, seed=3)
    assert np.all(rep.h == 1.0)
    assert rep.terminal_gap == 0.0 or math.isnan(rep.exit_value)


def test_levy_terminal_gap_is_small(tiling):
    g = arc_indicator(0.0, 2 * math.pi / 7)
    gaps = [levy_convergence_check(g, path, tiling, 20, seed=40 + i).terminal_gap
            for i, path in enumerate(tiling.walks(10, 2000, seed=30))]
    assert np.median(gaps) < 0.1


def test_mean_value_at_a_tiling_vertex(tiling):
    g = arc_indicator(0.0, 2 * math.pi / 7)
    chk = mean_value_check(g, (3,), tiling, 300, 2000, seed=4)
    assert abs(chk.z_score) < 3


def test_harmonic_increments_average_to_zero(tiling):
    g = arc_indicator(1.0, 3.0)
    diffs, ses = [], []
    for i, path in enumerate(tiling.walks(8, 1, seed=11)):
        rep = levy_convergence_check(g, path, tiling, 200, seed=12 + i)
        diffs.append(rep.h[1] - rep.h[0])
        ses.append(math.hypot(*rep.se))
    se = math.sqrt(sum(s * s for s in ses)) / len(ses)
    spread = np.std(diffs, ddof=1) / math.sqrt(len(diffs))
    assert abs(np.mean(diffs)) < 3 * max(se, spread)


# -----------------------------------------------------------------------------
# spectral radius


def test_self_loop_has_spectral_radius_one():
    view = WeightedGraphView(sp.csr_matrix(np.array([[2.0]])))
    est = spectral_radius_estimate(view, 0, 10)
    assert est.last == 1.0 and est.estimate == pytest.approx(1.0)


def test_return_probabilities_of_an_edge():
    view = WeightedGraphView(sp.csr_matrix(np.array([[0, 1.0], [1.0, 0]])))
    assert return_probabilities(view, 0, 4).tolist() == [1, 0, 1, 0, 1]


def test_tree_estimate_is_close_to_closed_form():
    est = spectral_radius_estimate(regular_tree(3, 10), 0, 10)
    assert abs(est.estimate - TREE_RHO) < 0.03
    assert np.all(np.diff(est.roots) > 0)  # the raw roots climb toward the limit


# -----------------------------------------------------------------------------
# angle transport


def test_plane_received_mass_is_pi_per_face(lattice_packing):
    rep = angle_transport_report(lattice_packing)
    assert np.allclose(rep.received, np.pi * rep.degree, atol=1e-9)
    assert np.allclose(rep.sent, 6 * np.pi, atol=1e-9)
    assert np.allclose(rep.area, 0, atol=1e-9)


def test_seven_regular_identity_is_exact(tiling):
    rep = angle_transport_report(tiling)
    assert rep.area[0] == pytest.approx(math.pi, abs=1e-12)
    assert abs(rep.residual) < 1e-12


def test_finite_seven_packing_transport(seven_packing):
    rep = angle_transport_report(seven_packing)
    assert np.allclose(rep.sent, 6 * np.pi, atol=1e-8)
    assert np.allclose(rep.degree, 7)
    # the area is pi minus angle sums of packed faces, not the ideal pi/7 each
    assert np.all(rep.area > 0)


@settings(max_examples=8)
@given(triangulated_discs(min_n=20, max_n=50))
def test_global_sent_equals_received(m):
    if not (~m.boundary_mask()).any():
        return
    p = pack(PackingProblem(m, DISC))
    tris, ang = p.corner_angles()
    # over all faces the transport is a rearrangement of the same angles
    sent = 3 * ang.sum()
    received = 3 * ang.sum(axis=1).sum()
    assert sent == pytest.approx(received, rel=1e-14)
    rep = angle_transport_report(p, collar=0)
    assert np.allclose(rep.sent, 6 * np.pi, atol=1e-8)


def test_transport_rejects_unconverged(seven_packing):
    bad = pack(PackingProblem(regular_triangulation(7, 3), DISC))
    bad.hyp_radii[0] *= 1.2
    with pytest.raises(UnconvergedPacking):
        angle_transport_report(bad)


# -----------------------------------------------------------------------------
# BLS refinement


def test_zero_delta_keeps_omega_zero():
    m = regular_triangulation(7, 5)
    res = bls_refinement(m, M=7, delta=0.0, rounds=10, seed=0)
    assert np.array_equal(res.open_mask, res.initial_mask)
    assert res.surviving_fraction == 1.0


def test_degree_cap_defines_omega_zero():
    m = regular_triangulation(7, 4)
    res = bls_refinement(m, M=6, delta=0.0, rounds=1, seed=0)
    assert np.array_equal(res.initial_mask, m.degrees() <= 6)


@settings(max_examples=10)
@given(st.integers(0, 1000), st.floats(0.0, 6.0))
def test_surviving_clusters_respect_delta(seed, delta):
    m = regular_triangulation(6, 12)
    res = bls_refinement(m, M=6, delta=delta, rounds=5, seed=seed)
    assert res.violations() == []
    assert np.all(res.open_mask <= res.initial_mask)


def test_bls_is_deterministic():
    m = regular_triangulation(6, 10)
    a = bls_refinement(m, 6, 3.0, 5, seed=4)
    b = bls_refinement(m, 6, 3.0, 5, seed=4)
    assert np.array_equal(a.open_mask, b.open_mask)


def test_bls_report_fields():
    m = regular_triangulation(7, 6)
    rec = bls_refinement(m, 7, 4.0, 10, seed=0).as_dict()
    assert rec["mean_degree"] == 7.0  # every vertex off the collar is interior
    assert rec["cheeger_lower_bound"] == pytest.approx(4 / 7)
    assert rec["violations"] == 0 and rec["tested_clusters"] > 0
    assert 0 < rec["mean_open_degree"] <= 7
