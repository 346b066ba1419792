import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import lifted_triangle_area, scalar_minimizer
from vortex_plateau.discretization import LEFT, RIGHT, FittedMesh, build_fitted_mesh, reference_rows
from vortex_plateau.geometry import ConvexProfile, HalfProfile, eval_phi, project_profile
from vortex_plateau.inner_solver import (
    InnerSolverError,
    InnerStats,
    minimize_graph_area,
    residual_msq,
    solve_min_graph,
)

# interior value of the 3x3 problem (h = 1, l = 1/2), from the scalar oracle
ONE_NODE_VALUE = 0.7880222603625469


def bowl(l, n, depth=0.5):
    t = np.linspace(-1, 1, n + 1)
    return ConvexProfile(l, 1.0 - depth * (1 - t**2))


def test_zero_boundary_gives_zero():
    m = build_fitted_mesh(bowl(0.5, 8), 8, 6)
    psi = solve_min_graph(m, boundary=np.zeros(m.n_vertices))
    assert np.all(psi.values == 0.0)


@settings(max_examples=15, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.integers(0, 2**31 - 1))
def test_affine_boundary_gives_affine_solution(a, b, c, seed):
    rng = np.random.default_rng(seed)
    h = project_profile(rng.uniform(-0.5, 1.0, 9), rng.uniform(0.2, 2.0))
    if h.values.min() < -0.95:
        return
    m = build_fitted_mesh(h, 8, 7)
    affine = a + b * m.vertices[:, 0] + c * m.vertices[:, 1]
    psi = solve_min_graph(m, tol=1e-12, boundary=affine)
    np.testing.assert_allclose(psi.values, affine, atol=1e-10)


def test_single_interior_node_matches_scalar_oracle():
    h = ConvexProfile.constant(0.5, 1.0, 2)
    m = build_fitted_mesh(h, 2, 2)
    b = m.dirichlet_values()
    c = int(m.index(1, 1))
    fan = [t for t in m.triangles if c in t]

    def area(z):
        v = b.copy()
        v[c] = z
        pts = np.column_stack([m.vertices, v])
        return sum(lifted_triangle_area(pts[t]) for t in fan)

    assert scalar_minimizer(area, 0.0, 1.0) == pytest.approx(ONE_NODE_VALUE, abs=1e-10)
    psi = solve_min_graph(m, tol=1e-13)
    assert psi.values[c] == pytest.approx(ONE_NODE_VALUE, abs=1e-8)


def test_residual_of_constants_and_affine():
    m = build_fitted_mesh(bowl(0.7, 10), 10, 8)
    assert residual_msq(m, np.full(m.n_vertices, 0.3)) < 1e-15
    aff = 0.2 + 0.3 * m.vertices[:, 0] - 0.1 * m.vertices[:, 1]
    assert residual_msq(m, aff) < 1e-14


@pytest.fixture(scope="module")
def cylinder_quarter():
    m = build_fitted_mesh(ConvexProfile.constant(0.25, 1.0, 64), 64, 64)
    psi, stats = minimize_graph_area(m, tol=1e-9)
    return m, psi, stats


def test_converged_residual(cylinder_quarter):
    m, psi, stats = cylinder_quarter
    assert residual_msq(m, psi) <= 10 * 1e-9
    assert stats.residual <= 1e-9


def test_energy_descent(cylinder_quarter):
    _, _, stats = cylinder_quarter
    energies = [e for _, e, _ in stats.history]
    assert all(b <= a + 1e-15 for a, b in zip(energies, energies[1:]))


def test_dirichlet_rows_exact(cylinder_quarter):
    m, psi, _ = cylinder_quarter
    fixed = m.dirichlet_mask()
    np.testing.assert_array_equal(psi[fixed], m.dirichlet_values()[fixed])


def test_bounds_positivity_and_comparison(cylinder_quarter):
    m, psi, _ = cylinder_quarter
    interior = ~m.dirichlet_mask()
    assert np.all(psi[interior] > 0)
    assert np.all(psi >= 0) and np.all(psi <= 1)
    assert np.all(psi <= eval_phi(m.vertices[:, 1]) + 1e-6)


def test_symmetry_is_exact(cylinder_quarter):
    m, psi, _ = cylinder_quarter
    assert np.array_equal(psi, psi[m.mirror])


def test_uniqueness_from_random_starts():
    m = build_fitted_mesh(bowl(0.4, 16, 0.4), 16, 16)
    rng = np.random.default_rng(7)
    sols = []
    for _ in range(2):
        start = rng.uniform(0, 1, m.n_vertices)
        psi, _ = minimize_graph_area(m, initial=start, tol=1e-11)
        sols.append(psi)
    assert np.max(np.abs(sols[0] - sols[1])) <= 1e-8


def test_half_mesh_solution_is_positive():
    h = HalfProfile(0.5, np.linspace(1.0, 0.2, 9))
    m = build_fitted_mesh(h, 8, 8)
    bnd = m.dirichlet_values()
    bnd[m.tags == RIGHT] = 0.0
    psi = solve_min_graph(m, boundary=bnd)
    interior = ~m.dirichlet_mask()
    assert np.all(psi.values[interior] > 0)


def test_nonconvergence_reports_residual():
    m = build_fitted_mesh(bowl(0.5, 16), 16, 16)
    with pytest.raises(InnerSolverError) as err:
        minimize_graph_area(m, tol=1e-14, max_iter=1)
    assert err.value.residual > 1e-14
    assert err.value.values is not None


def test_degenerate_mesh_rejected():
    heights = np.array([1.0, -1.0, 1.0])
    m = FittedMesh(1.0, 2, 2, heights, reference_rows(2), np.array([False, True]))
    with pytest.raises(InnerSolverError):
        minimize_graph_area(m)


def test_stats_csv(tmp_path, cylinder_quarter):
    _, _, stats = cylinder_quarter
    path = tmp_path / "log.csv"
    stats.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,objective,residual"
    assert len(lines) == len(stats.history) + 1
    assert isinstance(InnerStats(), InnerStats)


def test_lateral_tags_carry_half_circle(cylinder_quarter):
    m, psi, _ = cylinder_quarter
    lat = (m.tags == LEFT) | (m.tags == RIGHT)
    np.testing.assert_array_equal(psi[lat], eval_phi(m.vertices[lat, 1]))
