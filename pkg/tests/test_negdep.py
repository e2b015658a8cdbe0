"""Extreme-negative-dependence certificates, the corner surgery and the
descent loop."""

import numpy as np
import pytest

from mincop import (
    GFunc,
    HyperplaneSpec,
    RefutationCertificate,
    Relation,
    TauCmCertificate,
    descend,
    discretize,
    find_corner_pair,
    hyperplane_mass,
    kendall_tau,
    make_basic,
    make_glue_product,
    make_mixture,
    make_reflected_upper,
    make_triangle_3d,
    random_checkerboard,
    refute_minimality,
    spearman_rho,
    survival,
    tau_cm_defect,
    validate,
)
from mincop.core import RefutedCopula, grid_points
from mincop.errors import RefuterInternalError


def affine(alpha=1.0):
    return GFunc("affine", alpha=alpha)


# -- tau-CM defect -------------------------------------------------------


def test_defect_w_is_zero():
    defect, _, _ = tau_cm_defect(make_basic("lower_frechet_2d", 2))
    assert defect == 0.0


def test_defect_product_quarter_at_centre():
    defect, worst, _ = tau_cm_defect(make_basic("product", 2))
    assert defect == pytest.approx(0.25, abs=1e-12)
    assert worst == (0.5, 0.5)


def test_defect_clayton_extreme_below_tolerance():
    defect, _, _ = tau_cm_defect(make_basic("clayton_extreme", 3))
    assert defect <= 1e-9


def test_defect_glue_w_m_is_zero_d4():
    W = make_basic("lower_frechet_2d", 2)
    glue = make_glue_product(W, make_basic("upper_frechet", 2))
    defect, _, _ = tau_cm_defect(glue)
    assert defect <= 1e-9


def test_defect_symmetric_under_survival():
    for C in (
        make_basic("product", 2),
        random_checkerboard(2, 6, seed=0),
        make_mixture(
            [(make_basic("upper_frechet", 2), 0.5), (make_basic("product", 2), 0.5)]
        ),
    ):
        d1, _, _ = tau_cm_defect(C)
        d2, _, _ = tau_cm_defect(survival(C))
        assert d1 == pytest.approx(d2, abs=1e-9)


# -- hyperplane mass -----------------------------------------------------


def test_hyperplane_nu1_exact():
    nu1 = make_reflected_upper(3, [0])
    spec = HyperplaneSpec((0, 1, 2), (affine(1.0), affine(0.5), affine(0.5)), 1.0)
    assert hyperplane_mass(nu1, spec, eps=0.0) == 1.0


def test_hyperplane_triangle_exact():
    spec = HyperplaneSpec((0, 1, 2), (affine(), affine(), affine()), 1.5)
    assert hyperplane_mass(make_triangle_3d(), spec, eps=0.0) == 1.0


def test_hyperplane_mixture_all_reflections_zero():
    from mincop import mixture_all_reflections

    C = mixture_all_reflections(3)
    for c in (0.5, 1.0, 1.5, 2.0):
        spec = HyperplaneSpec((0, 1, 2), (affine(), affine(), affine()), c)
        assert hyperplane_mass(C, spec, eps=1e-6) == 0.0


def test_hyperplane_power_transform():
    # extreme Clayton support: sum u^{1/(d-1)} = d-1; check on a discretized
    # board the band lower bound grows toward 1 as eps grows
    C = discretize(make_basic("clayton_extreme", 3), 24)
    g = tuple(GFunc("power", gamma=0.5) for _ in range(3))
    spec = lambda eps: HyperplaneSpec((0, 1, 2), g, 2.0)
    tight = hyperplane_mass(C, spec(0.0), eps=0.05)
    loose = hyperplane_mass(C, spec(0.0), eps=0.4)
    assert 0.0 <= tight <= loose <= 1.0
    assert loose > 0.5


def test_hyperplane_glue_concatenates_constants():
    W = make_basic("lower_frechet_2d", 2)
    glue = make_glue_product(W, make_basic("lower_frechet_2d", 2))
    spec = HyperplaneSpec((0, 1, 2, 3), tuple(affine() for _ in range(4)), 2.0)
    assert hyperplane_mass(glue, spec, eps=0.0) == 1.0
    off = HyperplaneSpec((0, 1, 2, 3), tuple(affine() for _ in range(4)), 1.5)
    assert hyperplane_mass(glue, off, eps=0.0) == 0.0


def test_hyperplane_glue_nonconstant_part_falls_back_to_sampling():
    # the W block is countermonotonic but the independent factor spreads the
    # full-coordinate sum over an interval, so every level set is null
    W = make_basic("lower_frechet_2d", 2)
    glue = make_glue_product(W, make_basic("product", 1))
    spec = HyperplaneSpec((0, 1, 2), tuple(affine() for _ in range(3)), 1.5)
    assert hyperplane_mass(glue, spec, eps=1e-6) <= 1e-4


def test_hyperplane_monte_carlo_fallback():
    Pi = make_basic("product", 2)
    spec = HyperplaneSpec((0, 1), (affine(), affine()), 1.0)
    assert hyperplane_mass(Pi, spec, eps=0.05) == pytest.approx(0.0975, abs=5e-3)


# -- corner pairs ----------------------------------------------------------


def test_corner_pair_product():
    pair = find_corner_pair(make_basic("product", 2))
    assert np.allclose(pair.a, [0.5, 0.5])
    assert np.allclose(pair.b, [0.5, 0.5])
    assert pair.p == pytest.approx(0.25, abs=1e-12)


def test_corner_pair_upper_frechet():
    pair = find_corner_pair(make_basic("upper_frechet", 2))
    assert np.allclose(pair.a, [0.5, 0.5])
    assert pair.p == pytest.approx(0.5, abs=1e-12)


def test_corner_pair_none_for_minimal():
    assert find_corner_pair(make_reflected_upper(3, [0])) is None


def test_corner_pair_masses_match_p():
    for seed in range(4):
        C = random_checkerboard(2, 8, seed=seed)
        pair = find_corner_pair(C)
        d = C.dim
        assert C.box_mass(np.zeros(d), pair.a) == pytest.approx(pair.p, abs=1e-9)
        assert C.box_mass(pair.b, np.ones(d)) == pytest.approx(pair.p, abs=1e-9)
        assert np.all(pair.a <= pair.b + 1e-12)
        assert 0 < pair.p <= 0.5 + 1e-12


def test_corner_pair_bisects_upper_corner_on_skewed_board():
    # C(u) > Q[[u,1]] at the worst point: b stays at u, a comes from the
    # ray bisection alpha -> C(alpha u)
    from mincop import discretize, make_basic, make_mixture

    mix = make_mixture(
        [(make_basic("upper_frechet", 2), 0.3), (make_basic("product", 2), 0.7)]
    )
    board = discretize(
        mix, [np.array([0, 0.2, 0.55, 0.8, 1.0]), np.array([0, 0.35, 0.6, 0.9, 1.0])]
    )
    _, u, _ = tau_cm_defect(board)
    pair = find_corner_pair(board)
    assert np.allclose(pair.b, u)
    assert not np.allclose(pair.a, u)
    assert board.cdf(pair.a) == pytest.approx(pair.p, abs=1e-9)
    cert = refute_minimality(board)
    assert isinstance(cert, RefutationCertificate)


def test_corner_pair_bisects_lower_corner_in_3d():
    # random d=3 boards have C(u) < Q[[u,1]] at the worst vertex: a stays,
    # b comes from the survival-side bisection; the off-grid corner still
    # verifies exactly after grid refinement
    board = random_checkerboard(3, 6, seed=0)
    _, u, _ = tau_cm_defect(board)
    pair = find_corner_pair(board)
    assert np.allclose(pair.a, u)
    assert not np.allclose(pair.b, u)
    cert = refute_minimality(board)
    assert isinstance(cert, RefutationCertificate)
    assert cert.order_check.exact


# -- the refuter ----------------------------------------------------------


def test_refute_product_yields_certificate():
    cert = refute_minimality(make_basic("product", 2))
    assert isinstance(cert, RefutationCertificate)
    assert cert.order_check.relation == Relation.STRICTLY_BELOW
    assert cert.rho_drop > 0
    assert cert.passed


def test_refute_upper_frechet_yields_block_structure():
    # surgery on M at a = b = centre removes the whole diagonal and glues the
    # corner marginals independently: two uniform off-diagonal blocks
    cert = refute_minimality(make_basic("upper_frechet", 2))
    D = cert.copula
    assert D.cdf([0.25, 0.75]) == pytest.approx(2 * 0.25 * 0.25, abs=1e-12)
    assert D.cdf([0.75, 0.25]) == pytest.approx(2 * 0.25 * 0.25, abs=1e-12)
    assert D.cdf([0.5, 0.5]) == pytest.approx(0.0, abs=1e-12)
    assert cert.rho_drop == pytest.approx(1.75, abs=1e-9)


def test_refute_minimal_examples_return_tau_cm():
    minimal = [
        make_basic("lower_frechet_2d", 2),
        make_reflected_upper(3, [0]),
        make_reflected_upper(3, [0, 1]),
        make_basic("clayton_extreme", 3),
        make_triangle_3d(),
        make_glue_product(make_basic("lower_frechet_2d", 2), make_basic("product", 1)),
    ]
    for C in minimal:
        cert = refute_minimality(C)
        assert isinstance(cert, TauCmCertificate)
        assert cert.passed


def test_refute_tau_cm_iff_defect_below_tol():
    # one-sidedness: the refuter declines exactly when the defect is small
    for C in (
        make_basic("product", 3),
        random_checkerboard(3, 6, seed=2),
        make_triangle_3d(),
    ):
        defect, _, _ = tau_cm_defect(C)
        cert = refute_minimality(C)
        assert isinstance(cert, TauCmCertificate) == (defect <= 1e-9)


def test_refuted_node_checks_corner_masses():
    with pytest.raises(Exception):
        RefutedCopula(make_basic("product", 2), np.array([0.5, 0.5]), np.array([0.5, 0.5]), 0.4)


def test_refute_random_checkerboards_exact_verification():
    for d, seed in ((2, 0), (2, 1), (3, 0)):
        C = random_checkerboard(d, 8, seed=seed)
        cert = refute_minimality(C)
        assert isinstance(cert, RefutationCertificate)
        assert cert.order_check.exact
        assert cert.discretized is not None
        # the exact discretization evaluates identically to the surgery node
        pts = grid_points([np.linspace(0, 1, 9)] * d)
        gap = np.abs(cert.discretized.cdf_many(pts) - cert.copula.cdf_many(pts))
        assert np.max(gap) < 1e-10
        assert validate(cert.discretized).passed


def test_refute_glue_w_m_tau_cm_but_not_minimal():
    # tau-CM does not imply minimal at d >= 4; the refuter is one-sided
    W = make_basic("lower_frechet_2d", 2)
    glue = make_glue_product(W, make_basic("upper_frechet", 2))
    assert isinstance(refute_minimality(glue), TauCmCertificate)


def test_survival_of_surgery_node_closed_form():
    # tau(D) for a surgery node is again a surgery node on tau(C) with the
    # corners mapped through u -> 1-u; it must agree with the
    # inclusion-exclusion survival of D itself
    board = random_checkerboard(2, 6, seed=21)
    cert = refute_minimality(board)
    D = cert.copula
    tD = survival(D)
    from mincop.core import RefutedCopula as Node

    assert isinstance(tD, Node)
    U = grid_points([np.linspace(0, 1, 9)] * 2)
    assert np.max(np.abs(tD.cdf_many(U) - D.survival_many(U))) < 1e-10


# -- descent ----------------------------------------------------------------


def test_descend_product_converges_to_w_like_board():
    res = descend(make_basic("product", 2), n=16, max_iter=50)
    assert res.status == "converged"
    defect, _, _ = tau_cm_defect(res.final)
    assert defect <= 1e-9
    assert kendall_tau(res.final).value <= -0.85


def test_descend_m_first_step_blocks_then_converges():
    res = descend(make_basic("upper_frechet", 2), n=16, max_iter=50)
    assert res.status == "converged"
    assert kendall_tau(res.final).value <= -0.85


def test_descend_trace_monotone():
    res = descend(make_basic("product", 2), n=8, max_iter=50)
    ki = [s.kendall_integral for s in res.trace]
    rho = [s.rho for s in res.trace]
    assert all(b <= a + 1e-12 for a, b in zip(ki, ki[1:]))
    assert all(b < a for a, b in zip(rho, rho[1:]))


def test_descend_minimal_input_returns_immediately():
    board = discretize(make_reflected_upper(3, [0]), 8)
    res = descend(board, n=8, max_iter=10)
    assert res.status == "converged"
    assert len(res.trace) == 1  # only the initial defect measurement
    assert np.isnan(res.trace[0].p)


def test_descend_respects_cut_cap():
    res = descend(make_basic("product", 2), n=4, max_iter=20, cut_cap=8)
    assert all(len(c) - 1 <= 8 for c in res.final.cuts)


def test_descend_makes_progress_in_3d():
    # d=3 surgeries land off-grid, so this exercises cut insertion, the
    # coarsening cap and the drift stabiliser together; full convergence is
    # not claimed (and not reached in 15 steps), only honest strict descent
    res = descend(make_basic("product", 3), n=6, max_iter=15, stall_patience=40)
    assert res.status == "max_iter"
    assert res.trace[-1].defect < 0.02 < res.trace[0].defect
    assert all(b.rho < a.rho for a, b in zip(res.trace, res.trace[1:]))
    assert all(
        b.kendall_integral <= a.kendall_integral + 1e-10
        for a, b in zip(res.trace, res.trace[1:])
    )
    assert max(s.adjustment for s in res.trace) < 1e-10


def test_descend_rejects_tiny_grids():
    with pytest.raises(Exception):
        descend(make_basic("product", 2), n=2)
