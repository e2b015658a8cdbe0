"""Reflection/permutation/survival group behaviour and discretization."""

import numpy as np
import pytest

from mincop import (
    InputError,
    cdf,
    discretize,
    kendall_tau,
    make_basic,
    make_glue_product,
    make_reflected_upper,
    make_triangle_3d,
    permute,
    random_checkerboard,
    reflect,
    shuffle_a,
    survival,
)
from mincop.core import CheckerboardCopula, grid_points
from mincop.errors import ValidationError


def unit_grid(d, n):
    return grid_points([np.linspace(0, 1, n)] * d)


def agree(C, D, n=17, tol=1e-12):
    U = unit_grid(C.dim, n)
    return float(np.max(np.abs(C.cdf_many(U) - D.cdf_many(U)))) <= tol


def test_reflect_m_gives_w():
    M = make_basic("upper_frechet", 2)
    W = make_basic("lower_frechet_2d", 2)
    assert agree(reflect(M, [0]), W, n=33)


@pytest.mark.parametrize(
    "factory,K",
    [
        (lambda: make_basic("product", 2), [0]),
        (lambda: make_basic("clayton_extreme", 3), [1, 2]),
        (lambda: make_triangle_3d(), [0, 2]),
        (lambda: random_checkerboard(2, 6, seed=0), [0, 1]),
        (lambda: shuffle_a(), [1]),
    ],
)
def test_reflect_is_involution(factory, K):
    C = factory()
    assert agree(reflect(reflect(C, K), K), C, n=13)


def test_reflect_product_invariant():
    Pi = make_basic("product", 3)
    for K in ([0], [1, 2], [0, 1, 2]):
        assert agree(reflect(Pi, K), Pi, n=9)


def test_reflect_group_relation_disjoint_union():
    C = random_checkerboard(3, 4, seed=2)
    left = reflect(C, [0, 2])
    right = reflect(reflect(C, [0]), [2])
    assert agree(left, right, n=9)


def test_reflect_collapses_reflection_nodes():
    Pi = make_basic("clayton_extreme", 3)
    node = reflect(reflect(Pi, [0, 1]), [1, 2])
    # symmetric difference {0, 2}
    from mincop.core import Reflected

    assert isinstance(node, Reflected)
    assert node.K == frozenset({0, 2})


def test_reflect_validates_axes():
    with pytest.raises(InputError):
        reflect(make_basic("product", 2), [5])


def test_permute_min_is_symmetric():
    M = make_basic("upper_frechet", 3)
    assert agree(permute(M, [2, 0, 1]), M, n=9)


def test_permute_glue_rearranges_arguments():
    W = make_basic("lower_frechet_2d", 2)
    M2 = make_basic("upper_frechet", 2)
    E = make_glue_product(W, M2)
    # swap axes 0 and 3
    sigma = [3, 1, 2, 0]
    P = permute(E, sigma)
    u = np.array([0.2, 0.9, 0.4, 0.9])
    assert cdf(P, u) == pytest.approx(cdf(E, u[sigma]), abs=1e-15)


def test_permute_checkerboard_structural():
    C = random_checkerboard(3, 4, seed=3)
    sigma = [1, 2, 0]
    P = permute(C, sigma)
    assert isinstance(P, CheckerboardCopula)
    U = unit_grid(3, 7)
    assert np.max(np.abs(P.cdf_many(U) - C.cdf_many(U[:, sigma]))) < 1e-12


def test_permute_kendall_invariance():
    for seed in range(3):
        C = random_checkerboard(3, 5, seed=seed)
        sigma = np.random.default_rng(seed).permutation(3)
        assert kendall_tau(permute(C, sigma)).value == pytest.approx(
            kendall_tau(C).value, abs=1e-12
        )


def test_permute_rejects_non_bijection():
    with pytest.raises(InputError):
        permute(make_basic("product", 3), [0, 0, 2])


def test_permute_composition_order():
    # non-commuting pair: permuting a permuted node must compose correctly
    from mincop.core import Permuted

    tri = make_triangle_3d()
    s1, s2 = (1, 2, 0), (0, 2, 1)
    inner_first = Permuted(tri, s1)
    composed = permute(inner_first, s2)
    U = unit_grid(3, 7)
    expected = inner_first.cdf_many(U[:, list(s2)])
    assert np.max(np.abs(composed.cdf_many(U) - expected)) < 1e-15
    # and against the hand-composed permutation (2, 1, 0)
    direct = Permuted(tri, (2, 1, 0))
    assert np.max(np.abs(composed.cdf_many(U) - direct.cdf_many(U))) < 1e-15


def test_survival_fixed_points():
    M = make_basic("upper_frechet", 3)
    W = make_basic("lower_frechet_2d", 2)
    A = shuffle_a()
    assert agree(survival(M), M, n=9)
    assert agree(survival(W), W, n=33)
    # shuffle_a's support is symmetric under u -> 1-u
    assert agree(survival(A), A, n=33)


def test_survival_is_involution():
    C = random_checkerboard(2, 8, seed=5)
    assert agree(survival(survival(C)), C, n=17)


# -- discretize ---------------------------------------------------------


def test_discretize_m_two_cells():
    cb = discretize(make_basic("upper_frechet", 2), 2)
    assert np.allclose(cb.masses, [[0.5, 0.0], [0.0, 0.5]])


def test_discretize_product_uniform_cells():
    cb = discretize(make_basic("product", 2), 4)
    assert np.allclose(cb.masses, 1 / 16)


def test_discretize_triangle_margins_exact():
    cb = discretize(make_triangle_3d(), 8)
    assert abs(cb.masses.sum() - 1.0) < 1e-12
    for k in range(3):
        slab = cb.masses.sum(axis=tuple(i for i in range(3) if i != k))
        assert np.max(np.abs(slab - 1 / 8)) < 1e-12


def test_discretize_matches_cdf_at_vertices():
    C = make_triangle_3d()
    cuts = [np.linspace(0, 1, 9)] * 3
    cb = discretize(C, cuts)
    pts = grid_points(cuts)
    assert np.max(np.abs(cb.cdf_many(pts) - C.cdf_many(pts))) < 1e-12


def test_discretize_commutes_with_reflect():
    C = make_triangle_3d()
    n = 8  # symmetric uniform grid
    left = discretize(reflect(C, [1]), n)
    right = reflect(discretize(C, n), [1])
    assert np.max(np.abs(left.masses - right.masses)) < 1e-12


def test_discretize_refinement_is_exact_for_checkerboards():
    C = random_checkerboard(2, 4, seed=9)
    fine = discretize(C, 8)  # refines the 4-grid
    U = unit_grid(2, 33)
    assert np.max(np.abs(fine.cdf_many(U) - C.cdf_many(U))) < 1e-12


def test_discretize_rejects_non_copulas():
    # an affine combination with negative weight has negative rectangle masses
    M = make_basic("upper_frechet", 2, "analytic")
    W = make_basic("lower_frechet_2d", 2, "analytic")

    class NotACopula(type(M)):
        def cdf_many(self, U):
            return 2.0 * W.cdf_many(U) - 1.0 * M.cdf_many(U)

    with pytest.raises(ValidationError):
        discretize(NotACopula(2), 4)
