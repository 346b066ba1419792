import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortex_plateau.discretization import GridFunction, build_fitted_mesh, lift_area
from vortex_plateau.functional import (
    FunctionalBreakdown,
    ProfileMismatchError,
    check_doubling,
    eval_F2l,
    eval_Fl,
    wall_integral,
)
from vortex_plateau.geometry import ConvexProfile, HalfProfile, eval_phi, subgraph_measure


def phi_on(mesh):
    return GridFunction(mesh, eval_phi(mesh.vertices[:, 1]))


def random_half(rng, n=8, l=None):
    l = l if l is not None else rng.uniform(0.1, 2.0)
    slopes = np.sort(rng.uniform(0.0, 1.6 / l, n))[::-1]
    v = 1.0 - np.concatenate([[0.0], np.cumsum(slopes * l / n)])
    return HalfProfile(l, np.maximum(v, -0.95))


def test_degenerate_value_is_pi():
    assert eval_F2l(ConvexProfile.constant(1.0, -1.0, 6)).total == pytest.approx(math.pi, abs=1e-12)
    assert eval_Fl(HalfProfile(1.0, -np.ones(4))).total == pytest.approx(math.pi / 2, abs=1e-12)


@pytest.mark.parametrize("l", [0.25, 0.5, 1.0])
def test_half_cylinder_value(l):
    h = ConvexProfile.constant(l, 1.0, 128)
    m = build_fitted_mesh(h, 128, 128)
    b = eval_F2l(h, phi_on(m), m)
    assert b.dirichlet_mismatch == 0.0 and b.graph_trace == 0.0 and b.lh_term == 0.0
    assert b.total == pytest.approx(2 * math.pi * l, abs=5e-4)


def test_zero_psi_gives_subgraph_plus_pi():
    h = ConvexProfile(0.4, 1.0 - 0.8 * (1 - np.linspace(-1, 1, 33) ** 2))
    m = build_fitted_mesh(h, 32, 256)
    b = eval_F2l(h, np.zeros(m.n_vertices), m)
    assert b.area_term == pytest.approx(subgraph_measure(h), abs=1e-13)
    assert b.total == pytest.approx(subgraph_measure(h) + math.pi, abs=1e-4)


def test_wall_integral():
    assert wall_integral(-1.0) == pytest.approx(math.pi / 2)
    assert wall_integral(1.0) == 0.0
    assert wall_integral(0.0) == pytest.approx(math.pi / 4)


def test_breakdown_json():
    b = FunctionalBreakdown.from_terms(1.0, 0.5, 0.25, 0.125)
    d = json.loads(b.dumps())
    assert set(d) == {"area_term", "dirichlet_mismatch", "graph_trace", "lh_term", "total"}
    assert d["total"] == 1.875


def test_mesh_profile_mismatch():
    h = ConvexProfile.constant(0.5, 1.0, 8)
    other = build_fitted_mesh(ConvexProfile.constant(0.5, 0.5, 8), 8, 4)
    with pytest.raises(ProfileMismatchError):
        eval_F2l(h, np.zeros(other.n_vertices), other)
    with pytest.raises(ProfileMismatchError):
        eval_F2l(h, np.zeros(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_penalties_nonnegative_and_total_bounds_area(seed):
    rng = np.random.default_rng(seed)
    h = random_half(rng).doubled()
    m = build_fitted_mesh(h, h.n, 6)
    psi = rng.uniform(0, 1, m.n_vertices)
    b = eval_F2l(h, psi, m)
    assert b.dirichlet_mismatch >= 0 and b.graph_trace >= 0 and b.lh_term >= 0
    assert b.total >= lift_area(m, psi)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_mirror_invariance(seed):
    rng = np.random.default_rng(seed)
    h = random_half(rng).doubled()
    m = build_fitted_mesh(h, h.n, 5)
    psi = rng.uniform(0, 1, m.n_vertices)
    a = eval_F2l(h, psi, m).total
    b = eval_F2l(h, psi[m.mirror], m).total
    assert a == pytest.approx(b, abs=1e-12)


def test_dirichlet_trace_zeroes_mismatch():
    rng = np.random.default_rng(5)
    h = random_half(rng, l=0.6).doubled()
    m = build_fitted_mesh(h, h.n, 8)
    psi = rng.uniform(0, 1, m.n_vertices)
    before = eval_F2l(h, psi, m)
    fixed = m.dirichlet_mask()
    lateral = fixed & (m.tags != 3) & (m.tags != 4)
    psi2 = psi.copy()
    psi2[lateral] = eval_phi(m.vertices[lateral, 1])
    psi2[m.tags == 3] = 0.0
    after = eval_F2l(h, psi2, m)
    assert before.dirichlet_mismatch > 0
    assert after.dirichlet_mismatch == 0.0
    assert after.lh_term == before.lh_term


def test_doubling_examples():
    assert check_doubling(HalfProfile(0.7, -np.ones(5))) == 0.0
    h = HalfProfile(0.5, np.ones(9))
    m = build_fitted_mesh(h, 8, 16)
    assert check_doubling(h, phi_on(m)) <= 1e-12
    # the half functional of the half cylinder is pi l up to quadrature
    assert eval_Fl(h, phi_on(m)).total == pytest.approx(math.pi * 0.5, abs=5e-3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_doubling_random_pairs(seed):
    rng = np.random.default_rng(seed)
    h = random_half(rng, n=int(rng.integers(2, 12)))
    m = build_fitted_mesh(h, h.n, int(rng.integers(1, 10)))
    psi = GridFunction(m, rng.uniform(0, 1, m.n_vertices))
    assert check_doubling(h, psi) <= 1e-12


def test_doubling_needs_psi():
    with pytest.raises(ProfileMismatchError):
        check_doubling(HalfProfile(0.5, np.ones(3)))
