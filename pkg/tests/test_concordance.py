"""Kendall's tau, Spearman's rho, the Pi-integral and the four
measure-of-concordance axioms as numeric checks."""

import numpy as np
import pytest

from mincop import (
    UnsupportedRepresentationError,
    discretize,
    kendall_tau,
    make_basic,
    make_glue_product,
    make_mixture,
    make_reflected_upper,
    make_triangle_3d,
    permute,
    pi_integral,
    random_checkerboard,
    reflection_sum,
    sample,
    shuffle_a,
    shuffle_b,
    spearman_rho,
    survival,
)
from mincop.concordance import kendall_integral, kendall_normalization


def kendall_min(d):
    return -1.0 / (2 ** (d - 1) - 1)


# -- Kendall's tau -------------------------------------------------------


@pytest.mark.parametrize("d", [2, 3, 4])
def test_tau_of_m_is_one(d):
    rep = kendall_tau(make_basic("upper_frechet", d))
    assert rep.value == pytest.approx(1.0, abs=1e-9)
    assert rep.normalization == pytest.approx(kendall_normalization(d))


def test_tau_of_w_is_minus_one():
    assert kendall_tau(make_basic("lower_frechet_2d", 2)).value == pytest.approx(
        -1.0, abs=1e-12
    )


def test_tau_of_independence_is_zero():
    assert kendall_tau(make_basic("product", 2)).value == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_tau_minimum_attained_by_reflected_upper(d):
    rep = kendall_tau(make_reflected_upper(d, [0]), method="segment_quadrature")
    assert rep.value == pytest.approx(kendall_min(d), abs=1e-9)
    assert rep.estimate.error_bound <= 1e-9


def test_tau_shuffles_agree():
    tA = kendall_tau(shuffle_a())
    tB = kendall_tau(shuffle_b())
    assert tA.value == pytest.approx(tB.value, abs=1e-9)
    assert tA.value == pytest.approx(0.0, abs=1e-9)


def test_tau_exact_checkerboard_requires_checkerboard():
    with pytest.raises(UnsupportedRepresentationError):
        kendall_tau(make_basic("product", 2), method="exact_checkerboard")


def test_tau_monte_carlo_within_its_own_bound():
    C = random_checkerboard(2, 6, seed=0)
    exact = kendall_tau(C).value
    mc = kendall_tau(C, method="monte_carlo", samples=200_000, seed=1)
    assert abs(mc.value - exact) <= mc.estimate.error_bound + 1e-3


def test_tau_glue_product_rule():
    W = make_basic("lower_frechet_2d", 2)
    M2 = make_basic("upper_frechet", 2)
    glue = make_glue_product(W, M2)
    # int E dQ^E = 0 * 1/2 = 0, so tau = -1/(2^3 - 1)
    assert kendall_tau(glue).value == pytest.approx(kendall_min(4), abs=1e-12)


def test_kendall_integral_checkerboard_against_monte_carlo():
    C = random_checkerboard(2, 5, seed=7)
    exact = kendall_integral(C).value
    pts = sample(C, seed=3, n=200_000)
    mc = C.cdf_many(pts).mean()
    assert abs(exact - mc) < 3e-3


# -- Spearman's rho ------------------------------------------------------


@pytest.mark.parametrize("d", [2, 3, 4])
def test_rho_of_m_is_one(d):
    assert spearman_rho(make_basic("upper_frechet", d)).value == pytest.approx(
        1.0, abs=1e-12
    )


def test_rho_of_w_is_minus_one():
    assert spearman_rho(make_basic("lower_frechet_2d", 2)).value == pytest.approx(
        -1.0, abs=1e-12
    )


def test_rho_triangle_minimum():
    assert spearman_rho(make_triangle_3d()).value == pytest.approx(-0.5, abs=1e-12)


@pytest.mark.parametrize(
    "d,expected",
    [(3, -1 / 3), (4, -1 / 11), (5, 1 / 65)],
)
def test_rho_nu1_closed_forms(d, expected):
    assert spearman_rho(make_reflected_upper(d, [0])).value == pytest.approx(
        expected, abs=1e-12
    )


@pytest.mark.parametrize("d,expected", [(3, -1 / 3), (4, -7 / 33), (5, -7 / 65)])
def test_rho_nu12_closed_forms(d, expected):
    assert spearman_rho(make_reflected_upper(d, [0, 1])).value == pytest.approx(
        expected, abs=1e-12
    )


def test_rho_quadrature_fallback_matches_exact():
    # Clayton has no exact moment path; quadrature should approach the
    # discretized-exact value
    C = make_basic("clayton_extreme", 2)
    W = make_basic("lower_frechet_2d", 2)
    rep = spearman_rho(C, quad_nodes=48)
    assert rep.estimate.method == "quadrature"
    assert rep.value == pytest.approx(spearman_rho(W).value, abs=5e-3)


def test_rho_exact_for_checkerboards():
    C = random_checkerboard(3, 4, seed=2)
    exact = spearman_rho(C)
    assert exact.estimate.method == "exact"
    quad = spearman_rho(discretize(C, list(C.cuts)), method="quadrature", quad_nodes=32)
    assert quad.value == pytest.approx(exact.value, abs=5e-3)


def test_rho_strictly_order_preserving_on_shuffles():
    # shuffle_a strictly below shuffle_b: rho must separate them, tau must not
    rA, rB = spearman_rho(shuffle_a()).value, spearman_rho(shuffle_b()).value
    assert rA < rB
    assert kendall_tau(shuffle_a()).value <= kendall_tau(shuffle_b()).value + 1e-12


# -- Pi-integral ---------------------------------------------------------


def test_pi_integral_values():
    assert pi_integral(make_basic("product", 3)).value == pytest.approx(1 / 8, abs=1e-12)
    assert pi_integral(make_basic("upper_frechet", 2)).value == pytest.approx(
        1 / 3, abs=1e-12
    )
    assert pi_integral(make_basic("lower_frechet_2d", 2)).value == pytest.approx(
        1 / 6, abs=1e-12
    )


def test_pi_integral_strictly_separates_ordered_pair():
    assert pi_integral(shuffle_a()).value < pi_integral(shuffle_b()).value


# -- the measure-of-concordance axioms ------------------------------------


def test_reflection_sum_vanishes_on_boards():
    board = random_checkerboard(3, 6, seed=11)
    assert abs(reflection_sum(kendall_tau, board)) <= 1e-9
    assert abs(reflection_sum(spearman_rho, board)) <= 1e-9


def test_reflection_sum_product_exact_zero():
    Pi = make_basic("product", 2)
    assert reflection_sum(spearman_rho, Pi) == pytest.approx(0.0, abs=1e-12)


def test_reflection_sum_discretized_m():
    board = discretize(make_basic("upper_frechet", 2), 16)
    assert abs(reflection_sum(kendall_tau, board)) <= 1e-9


def test_survival_invariance():
    for seed in range(3):
        C = random_checkerboard(2, 6, seed=seed)
        assert kendall_tau(survival(C)).value == pytest.approx(
            kendall_tau(C).value, abs=1e-9
        )
        assert spearman_rho(survival(C)).value == pytest.approx(
            spearman_rho(C).value, abs=1e-9
        )


def test_permutation_invariance():
    C = random_checkerboard(3, 4, seed=13)
    for sigma in ([1, 0, 2], [2, 0, 1]):
        assert spearman_rho(permute(C, sigma)).value == pytest.approx(
            spearman_rho(C).value, abs=1e-9
        )


def test_monotone_on_ordered_checkerboards():
    # discretized shuffles share a grid and stay strictly ordered
    A = discretize(shuffle_a(), 8)
    B = discretize(shuffle_b(), 8)
    assert spearman_rho(A).value < spearman_rho(B).value
    assert kendall_tau(A).value <= kendall_tau(B).value + 1e-12


def test_tau_cm_members_sit_at_kendall_minimum():
    # grid tau-CM certificate implies int C dQ^C = 0 implies the minimum
    for C in (
        make_reflected_upper(3, [0]),
        make_triangle_3d(),
        make_mixture(
            [(make_reflected_upper(2, [0]), 0.5), (make_reflected_upper(2, [1]), 0.5)]
        ),
    ):
        assert kendall_tau(C).value == pytest.approx(kendall_min(C.dim), abs=1e-9)
