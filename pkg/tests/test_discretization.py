import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortex_plateau.discretization import (
    BOTTOM,
    GRAPH,
    INTERIOR,
    LEFT,
    RIGHT,
    AreaOperator,
    DegenerateDomainError,
    GridFunction,
    area_position_gradient,
    build_fitted_mesh,
    export_obj,
    lift_area,
    reference_rows,
    reflect_mesh,
    reflect_values,
)
from vortex_plateau.geometry import ConvexProfile, HalfProfile, project_profile, subgraph_measure


def bowl(l=0.5, n=8, depth=0.6):
    t = np.linspace(-1, 1, n + 1)
    return ConvexProfile(l, 1.0 - depth * (1 - t**2))


def test_tags_and_counts():
    m = build_fitted_mesh(bowl(), 8, 6)
    assert m.n_vertices == 9 * 7 and len(m.triangles) == 2 * 8 * 6
    g = m.grid(m.tags)
    assert np.all(g[0] == LEFT) and np.all(g[-1] == RIGHT)
    assert np.all(g[1:-1, 0] == BOTTOM) and np.all(g[1:-1, -1] == GRAPH)
    assert np.all(g[1:-1, 1:-1] == INTERIOR)


def test_top_row_follows_profile():
    h = bowl()
    m = build_fitted_mesh(h, 8, 5)
    np.testing.assert_allclose(m.grid(m.vertices[:, 1])[:, -1], h.values, atol=1e-15)
    np.testing.assert_allclose(m.grid(m.vertices[:, 1])[:, 0], -1.0)


@pytest.mark.parametrize("spacing", ["cosine", "uniform"])
def test_reference_rows(spacing):
    s = reference_rows(10, spacing)
    assert s[0] == -1 and s[-1] == 1 and np.all(np.diff(s) > 0)
    np.testing.assert_array_equal(s, -s[::-1])
    with pytest.raises(ValueError):
        reference_rows(4, "chebyshev-ish")


def test_planar_area_is_subgraph_measure():
    h = bowl(l=0.7, n=12)
    m = build_fitted_mesh(h, 12, 9)
    assert np.all(m.planar_areas() > 0)
    assert m.planar_areas().sum() == pytest.approx(subgraph_measure(h), abs=1e-13)
    assert lift_area(m, np.zeros(m.n_vertices)) == pytest.approx(subgraph_measure(h), abs=1e-13)


def test_mirror_permutation():
    m = build_fitted_mesh(bowl(), 8, 4)
    mir = m.mirror
    assert mir is not None
    np.testing.assert_allclose(m.vertices[mir, 0], m.width - m.vertices[:, 0], atol=1e-15)
    np.testing.assert_array_equal(m.vertices[mir, 1], m.vertices[:, 1])
    # triangles map to triangles
    tri = {tuple(sorted(t)) for t in m.triangles.tolist()}
    assert {tuple(sorted(mir[t])) for t in m.triangles} == tri
    asym = ConvexProfile(0.5, np.array([1.0, 0.0, -0.4, -0.2, 0.5]))
    assert build_fitted_mesh(asym, 4, 3).mirror is None


def test_half_mesh_reflects_to_symmetric_mesh():
    half = HalfProfile(0.5, np.array([1.0, 0.5, 0.2, 0.1]))
    mh = build_fitted_mesh(half, 3, 4)
    full = reflect_mesh(mh)
    ref = build_fitted_mesh(half.doubled(), 6, 4)
    np.testing.assert_allclose(full.vertices, ref.vertices, atol=1e-15)
    np.testing.assert_array_equal(full.triangles, ref.triangles)
    v = reflect_values(mh, np.arange(mh.n_vertices, dtype=float))
    assert v.size == ref.n_vertices


def test_degenerate_profile_rejected():
    with pytest.raises(DegenerateDomainError):
        build_fitted_mesh(ConvexProfile.constant(1.0, -1.0, 4), 4, 4)


def test_dirichlet_values():
    m = build_fitted_mesh(ConvexProfile.constant(0.5, 1.0, 4), 4, 8)
    d = m.dirichlet_values()
    lat = (m.tags == LEFT) | (m.tags == RIGHT)
    np.testing.assert_allclose(d[lat], np.sqrt(1 - m.vertices[lat, 1] ** 2))
    assert np.all(d[~lat] == 0)


def test_grid_function_validation():
    m = build_fitted_mesh(bowl(), 8, 4)
    with pytest.raises(ValueError):
        GridFunction(m, np.zeros(3))
    assert GridFunction(m, np.full(m.n_vertices, 0.5)).in_range()
    assert not GridFunction(m, np.full(m.n_vertices, 1.5)).in_range()


def _fd_check(op, psi, rng):
    g = op.gradient(psi)
    h = op.hessian(psi)
    eps = 1e-6
    for _ in range(5):
        d = rng.normal(size=psi.size)
        fd = (op.value(psi + eps * d) - op.value(psi - eps * d)) / (2 * eps)
        assert fd == pytest.approx(g @ d, rel=1e-6, abs=1e-9)
        fd2 = (op.gradient(psi + eps * d) - op.gradient(psi - eps * d)) / (2 * eps)
        np.testing.assert_allclose(fd2, h @ d, rtol=1e-5, atol=1e-7)


def test_area_derivatives_match_finite_differences():
    rng = np.random.default_rng(0)
    m = build_fitted_mesh(bowl(), 8, 6)
    op = AreaOperator(m)
    _fd_check(op, rng.uniform(0, 1, m.n_vertices), rng)


def test_hessian_is_symmetric_psd():
    rng = np.random.default_rng(1)
    m = build_fitted_mesh(bowl(), 6, 5)
    h = AreaOperator(m).hessian(rng.uniform(0, 1, m.n_vertices)).toarray()
    np.testing.assert_allclose(h, h.T, atol=1e-14)
    assert np.linalg.eigvalsh(h).min() > -1e-12


def test_position_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    m = build_fitted_mesh(bowl(), 6, 5)
    psi = rng.uniform(0, 1, m.n_vertices)
    grad = area_position_gradient(m.vertices, m.triangles, psi)

    def area(v):
        p = np.column_stack([v, psi])[m.triangles]
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1).sum()

    eps = 1e-7
    for _ in range(6):
        d = rng.normal(size=m.vertices.shape)
        fd = (area(m.vertices + eps * d) - area(m.vertices - eps * d)) / (2 * eps)
        assert fd == pytest.approx(np.sum(grad * d), rel=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 10), st.integers(1, 8), st.floats(0.1, 3.0), st.integers(0, 2**31 - 1))
def test_meshes_of_random_profiles_are_valid(n, n2, l, seed):
    rng = np.random.default_rng(seed)
    h = project_profile(rng.uniform(-0.9, 1.0, 2 * n + 1), l)
    if h.values.min() <= -1 + 1e-9:
        return
    m = build_fitted_mesh(h, 2 * n, n2)
    assert np.all(m.planar_areas() > 0)
    assert m.planar_areas().sum() == pytest.approx(subgraph_measure(h), rel=1e-12, abs=1e-14)
    assert m.mirror is not None


def test_export_obj(tmp_path):
    m = build_fitted_mesh(bowl(), 4, 3)
    path = tmp_path / "g.obj"
    export_obj(path, m, np.zeros(m.n_vertices))
    lines = path.read_text().splitlines()
    assert sum(l.startswith("v ") for l in lines) == m.n_vertices
    assert sum(l.startswith("f ") for l in lines) == len(m.triangles)
