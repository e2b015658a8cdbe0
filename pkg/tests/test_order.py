"""Pointwise and concordance order checks with witnesses."""

import numpy as np
import pytest

from mincop import (
    DimensionMismatchError,
    Relation,
    concordance_leq,
    discretize,
    make_basic,
    make_glue_product,
    make_mixture,
    make_reflected_upper,
    make_triangle_3d,
    pointwise_leq,
    random_checkerboard,
    shuffle_a,
    shuffle_b,
    survival,
)


def catalog_2d():
    return [
        make_basic("upper_frechet", 2),
        make_basic("lower_frechet_2d", 2),
        make_basic("product", 2),
        make_basic("clayton_extreme", 2),
        shuffle_a(),
        shuffle_b(),
        make_mixture(
            [(make_basic("upper_frechet", 2), 0.5), (make_basic("product", 2), 0.5)]
        ),
    ]


def test_w_below_everything_2d():
    W = make_basic("lower_frechet_2d", 2)
    for C in catalog_2d():
        assert pointwise_leq(W, C).below_or_equal


def test_everything_below_m():
    M2 = make_basic("upper_frechet", 2)
    for C in catalog_2d():
        assert pointwise_leq(C, M2).below_or_equal
    M3 = make_basic("upper_frechet", 3)
    for C in (make_triangle_3d(), make_reflected_upper(3, [1])):
        assert pointwise_leq(C, M3).below_or_equal


def test_shuffles_strictly_ordered_with_witness():
    res = pointwise_leq(shuffle_a(), shuffle_b(), grid=32)
    assert res.relation == Relation.STRICTLY_BELOW
    # the largest gap sits at the centre
    assert res.witness_points[0] == (0.5, 0.5)


def test_concordance_reflexive():
    for C in (shuffle_a(), make_basic("product", 2), random_checkerboard(2, 6, seed=1)):
        assert concordance_leq(C, C).relation == Relation.EQUAL


def test_glue_pair_strictly_below_d4():
    W = make_basic("lower_frechet_2d", 2)
    low = make_glue_product(W, make_basic("product", 2))
    high = make_glue_product(W, make_basic("upper_frechet", 2))
    res = concordance_leq(low, high)
    assert res.relation == Relation.STRICTLY_BELOW


def test_nu1_and_product_incomparable_d3():
    # nu_1(M)(1-eps, m, m) ~ m exceeds Pi there; near 0 the product wins
    res = concordance_leq(make_reflected_upper(3, [0]), make_basic("product", 3))
    assert res.relation == Relation.INCOMPARABLE
    assert len(res.witness_points) == 2


def test_dimension_mismatch_rejected():
    with pytest.raises(DimensionMismatchError):
        pointwise_leq(make_basic("product", 2), make_basic("product", 3))


def test_shared_grid_checkerboards_exact():
    C = random_checkerboard(2, 4, seed=0)
    D = discretize(make_basic("upper_frechet", 2), 6)
    res = pointwise_leq(C, D)
    assert res.exact
    # vertex domination extends to the whole cube for multilinear cdfs
    U = np.random.default_rng(0).random((500, 2))
    if res.below_or_equal:
        assert np.all(C.cdf_many(U) <= D.cdf_many(U) + 1e-9)


def test_antisymmetry_on_shared_grid():
    C = random_checkerboard(2, 5, seed=3)
    D = discretize(C, list(C.cuts))
    assert concordance_leq(C, D).relation == Relation.EQUAL
    assert concordance_leq(D, C).relation == Relation.EQUAL


def test_concordance_symmetric_under_survival():
    # the defining conjunction is symmetric in (C, tau C)
    pairs = [
        (shuffle_a(), shuffle_b()),
        (random_checkerboard(2, 6, seed=4), discretize(make_basic("product", 2), 6)),
    ]
    for C, D in pairs:
        r1 = concordance_leq(C, D)
        r2 = concordance_leq(survival(C), survival(D))
        assert r1.relation == r2.relation


def test_max_violation_reported_for_incomparable():
    res = concordance_leq(make_reflected_upper(3, [0]), make_basic("product", 3))
    assert res.max_violation > 1e-3
