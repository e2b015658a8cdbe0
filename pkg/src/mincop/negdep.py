"""Extreme-negative-dependence certificates and the minimality refuter.

A copula is *Kendall-countermonotonic* (tau-CM) when, for every interior u,
at least one of the corner masses Q^C[[0,u]], Q^C[[u,1]] vanishes; this is
equivalent to int C dQ^C = 0 and to minimising multivariate Kendall's tau.
Every minimal copula (in the concordance order) is tau-CM, so exhibiting an
interior point with both corner masses positive refutes minimality
constructively:

1. ``find_corner_pair`` locates u with min{C(u), Q^C[[u,1]]} > 0, extracts
   p as the smaller corner mass, and bisects the continuous ray map
   alpha -> C(alpha u) (or its survival mirror) until both corner boxes
   carry exactly p.
2. ``refute_minimality`` performs the corner surgery (``RefutedCopula``):
   the two comonotone corner pieces are replaced by a cross-glued,
   de-comonotonised pair, producing D with D <= C, tau(D) <= tau(C) and
   D(a) = C(a) - p.  The certificate carries the verified order relation,
   validity report and strict Spearman-rho drop; verification failure is an
   internal error, never a silent pass.
3. ``descend`` iterates the surgery on a checkerboard, inserting the new
   cut planes at a and b so each step is measure-exact, until the grid
   tau-CM defect vanishes.  The loop is an artifact-level heuristic (the
   existence theorem behind it is non-constructive); stalls are reported
   honestly.

A *K-countermonotonic* certificate instead checks that the whole mass sits
on a monotone-transformed hyperplane sum_{k in K} g_k(u_k) = c; for
segment-supported copulas this is exact (the sum along each segment either
is identically c or meets it in finitely many points).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CheckerboardCopula,
    Copula,
    GlueProduct,
    MixtureCopula,
    RefutedCopula,
    SegmentCopula,
    grid_axes,
    grid_points,
    validate,
)
from .concordance import spearman_rho
from .errors import InputError, RefuterInternalError, UnsupportedRepresentationError
from .order import OrderResult, Relation, concordance_leq
from .transforms import discretize, uniform_cuts

__all__ = [
    "GFunc",
    "HyperplaneSpec",
    "TauCmCertificate",
    "CornerPair",
    "RefutationCertificate",
    "DescentStep",
    "DescentResult",
    "tau_cm_defect",
    "tau_cm_certificate",
    "hyperplane_mass",
    "find_corner_pair",
    "refute_minimality",
    "descend",
]

DEFECT_TOL = 1e-9
BISECT_TOL = 1e-12


# ---------------------------------------------------------------------------
# tau-CM defect
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TauCmCertificate:
    """Grid-level tau-CM certificate: the worst interior value of
    min{C(u), Q^C[[u,1]]} and where it occurred."""

    grid: str
    defect: float
    worst_point: tuple

    @property
    def passed(self) -> bool:
        return self.defect <= DEFECT_TOL


def _scan_points(C: Copula, grid: int | None) -> tuple[np.ndarray, str]:
    """Interior scan points for corner-mass checks.

    Checkerboards scan their own interior cell vertices (the extrema of the
    piecewise-multilinear corner masses certified at grid scale); other
    representations take a uniform lattice augmented with breakpoints.
    """
    if grid is None and isinstance(C, CheckerboardCopula):
        axes = [c[(c > 0) & (c < 1)] for c in C.cuts]
        desc = f"checkerboard vertices, sizes {[len(a) + 2 for a in axes]}"
    else:
        res = grid if grid is not None else (32 if C.dim <= 3 else 16)
        axes = [a[(a > 0) & (a < 1)] for a in grid_axes([C], res)]
        desc = f"uniform {res}+breakpoints, sizes {[len(a) + 2 for a in axes]}"
    if any(len(a) == 0 for a in axes):
        return np.empty((0, C.dim)), desc
    return grid_points(axes), desc


def tau_cm_defect(
    C: Copula, grid: int | None = None
) -> tuple[float, tuple, str]:
    """max over interior scan points of min{C(u), (tau C)(1-u)}.

    Returns (defect, worst_point, grid description).  A defect <= 1e-9 is a
    grid-level tau-CM certificate; a larger defect exhibits a point whose
    two corner boxes both carry mass.  Ties break lexicographically.
    """
    pts, desc = _scan_points(C, grid)
    if len(pts) == 0:
        return 0.0, (), desc
    lower = C.cdf_many(pts)
    upper = C.box_mass_many(pts, np.ones_like(pts))
    defect = np.minimum(lower, upper)
    i = int(np.argmax(defect))
    return float(defect[i]), tuple(pts[i]), desc


def tau_cm_certificate(C: Copula, grid: int | None = None) -> TauCmCertificate:
    defect, worst, desc = tau_cm_defect(C, grid)
    return TauCmCertificate(desc, defect, worst)


# ---------------------------------------------------------------------------
# K-CM hyperplane mass
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GFunc:
    """A strictly increasing continuous transform of one coordinate:
    affine alpha*u + beta (alpha > 0) or power u**gamma (gamma > 0)."""

    form: str
    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.form not in ("affine", "power"):
            raise InputError(f"unsupported g form {self.form!r}")
        if self.form == "affine" and self.alpha <= 0:
            raise InputError("affine g needs alpha > 0")
        if self.form == "power" and self.gamma <= 0:
            raise InputError("power g needs gamma > 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.form == "affine":
            return self.alpha * x + self.beta
        return np.power(x, self.gamma)


@dataclass(frozen=True)
class HyperplaneSpec:
    """The K-CM witness data: axes K (0-based), one transform per axis in K,
    and the level c of sum_{k in K} g_k(u_k)."""

    K: tuple[int, ...]
    g: tuple[GFunc, ...]
    c: float

    def __post_init__(self):
        if len(self.K) != len(self.g):
            raise InputError("one g per axis in K")
        if len(set(self.K)) != len(self.K) or len(self.K) < 1:
            raise InputError("K must be a nonempty set of distinct axes")

    def sum_values(self, pts: np.ndarray) -> np.ndarray:
        total = np.zeros(len(pts))
        for k, g in zip(self.K, self.g):
            total += g(pts[:, k])
        return total


_CONST_PARAMS = np.array([0.0, 0.137, 1 / 3, 0.5, 1 / np.sqrt(2), 0.789, 1.0])


def _segment_band_mass(C: SegmentCopula, spec: HyperplaneSpec, eps: float) -> float:
    """Exact for eps = 0: along each segment the sum is either identically c
    (full mass) or an analytic non-constant function of the parameter
    (finitely many roots, zero mass).  For eps > 0 the band is measured by a
    fine parameter subdivision."""
    total = 0.0
    for s in range(len(C.masses)):
        pts = C.starts[s][None, :] + _CONST_PARAMS[:, None] * C.dirs[s][None, :]
        h = spec.sum_values(pts)
        if np.max(np.abs(h - spec.c)) <= 1e-12:
            total += C.masses[s]
        elif eps > 0:
            t = np.linspace(0.0, 1.0, 8193)
            mids = 0.5 * (t[:-1] + t[1:])
            pm = C.starts[s][None, :] + mids[:, None] * C.dirs[s][None, :]
            hit = np.abs(spec.sum_values(pm) - spec.c) <= eps
            total += C.masses[s] * hit.mean()
    return total


def _checkerboard_band_mass(
    C: CheckerboardCopula, spec: HyperplaneSpec, eps: float
) -> float:
    """Lower bound: mass of the cells whose sum-range lies inside the band
    (g increasing makes per-cell ranges interval arithmetic)."""
    lo_tot = np.zeros(C.masses.shape)
    hi_tot = np.zeros(C.masses.shape)
    for k, g in zip(spec.K, spec.g):
        shape = [1] * C.dim
        shape[k] = -1
        lo_tot = lo_tot + g(C.cuts[k][:-1]).reshape(shape)
        hi_tot = hi_tot + g(C.cuts[k][1:]).reshape(shape)
    inside = (lo_tot >= spec.c - eps - 1e-12) & (hi_tot <= spec.c + eps + 1e-12)
    # board totals carry discretization noise at the cell-count scale
    return float(np.clip(C.masses[inside].sum(), 0.0, 1.0))


def _constant_part_sum(part: Copula, K: list[int], g: list[GFunc]) -> float | None:
    """If sum_{k in K} g_k(u_k) is a.s. constant under Q^part, return the
    constant, else None.  Exact for segment parts."""
    sub = HyperplaneSpec(tuple(K), tuple(g), 0.0)
    if isinstance(part, SegmentCopula):
        vals = []
        for s in range(len(part.masses)):
            pts = part.starts[s][None, :] + _CONST_PARAMS[:, None] * part.dirs[s][None, :]
            h = sub.sum_values(pts)
            if np.max(h) - np.min(h) > 1e-12:
                return None
            vals.append(h[0])
        if np.max(vals) - np.min(vals) > 1e-12:
            return None
        return float(vals[0])
    return None


def hyperplane_mass(C: Copula, spec: HyperplaneSpec, eps: float = 0.0) -> float:
    """Q^C-mass of the band { |sum_{k in K} g_k(u_k) - c| <= eps }.

    Exact for segment copulas; a cell-inclusion lower bound for
    checkerboards; Monte Carlo (10^6 draws, seed 0) otherwise.  A value of
    1 with eps = 0 is K-CM *evidence at the representation's exactness
    level*, never a theorem about all g families.
    """
    if any(k < 0 or k >= C.dim for k in spec.K):
        raise InputError(f"hyperplane axes {spec.K} outside 0..{C.dim - 1}")
    if isinstance(C, SegmentCopula):
        return _segment_band_mass(C, spec, eps)
    if isinstance(C, CheckerboardCopula):
        return _checkerboard_band_mass(C, spec, eps)
    if isinstance(C, MixtureCopula):
        return float(
            sum(w * hyperplane_mass(c, spec, eps) for c, w in C.parts)
        )
    if isinstance(C, GlueProduct):
        dl = C.left.dim
        KL = [(k, g) for k, g in zip(spec.K, spec.g) if k < dl]
        KR = [(k - dl, g) for k, g in zip(spec.K, spec.g) if k >= dl]
        if KL and KR:
            cl = _constant_part_sum(C.left, [k for k, _ in KL], [g for _, g in KL])
            cr = _constant_part_sum(C.right, [k for k, _ in KR], [g for _, g in KR])
            if cl is not None and cr is not None:
                return 1.0 if abs(cl + cr - spec.c) <= max(eps, 1e-12) else 0.0
        elif KL:
            return hyperplane_mass(
                C.left, HyperplaneSpec(tuple(k for k, _ in KL), tuple(g for _, g in KL), spec.c), eps
            )
        elif KR:
            return hyperplane_mass(
                C.right, HyperplaneSpec(tuple(k for k, _ in KR), tuple(g for _, g in KR), spec.c), eps
            )
    if C.is_samplable:
        pts = C.sample(0, 10**6)
        h = spec.sum_values(pts)
        band = max(eps, 1e-12)
        return float((np.abs(h - spec.c) <= band).mean())
    raise UnsupportedRepresentationError(
        "hyperplane_mass needs a segment, checkerboard or samplable copula"
    )


# ---------------------------------------------------------------------------
# Corner-pair search: equal masses in the lower and upper corner boxes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CornerPair:
    a: np.ndarray
    b: np.ndarray
    p: float


def _bisect_monotone(f, target: float, lo: float, hi: float) -> float:
    """Find x with f(x) ~= target for continuous nondecreasing f."""
    flo, fhi = f(lo), f(hi)
    if not (flo <= target <= fhi):
        raise RefuterInternalError(
            f"bisection bracket broken: f({lo})={flo}, f({hi})={fhi}, target={target}"
        )
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    return hi


def find_corner_pair(
    C: Copula, grid: int | None = None, tol: float = DEFECT_TOL
) -> CornerPair | None:
    """Points a <= b in the open cube with Q^C[[0,a]] = p = Q^C[[b,1]].

    Picks the scan point maximising min{C(u), Q^C[[u,1]]} (the largest
    extractable surgery mass; ties lexicographic).  When the upper corner is
    the smaller one, p := Q^C[[u,1]], b := u and a is found by bisecting the
    continuous ray map alpha -> C(alpha u); otherwise the same is done on
    the survival side and mapped back through u -> 1-u.  Returns None iff
    the defect is already below ``tol`` (grid tau-CM).
    """
    defect, u, _ = tau_cm_defect(C, grid)
    if defect <= tol:
        return None
    u = np.asarray(u)
    cu = C.cdf(u)
    su = C.box_mass(u, np.ones(C.dim))
    if su <= cu:
        p = su
        b = u
        if abs(cu - p) <= BISECT_TOL:
            a = u.copy()
        else:
            alpha = _bisect_monotone(lambda t: C.cdf(t * u), p, 0.0, 1.0)
            a = alpha * u
    else:
        p = cu
        a = u
        if abs(su - p) <= BISECT_TOL:
            b = u.copy()
        else:
            # beta -> Q^C[[1 - beta(1-u), 1]] is continuous and nondecreasing
            beta = _bisect_monotone(
                lambda t: C.box_mass(1.0 - t * (1.0 - u), np.ones(C.dim)),
                p,
                0.0,
                1.0,
            )
            b = 1.0 - beta * (1.0 - u)
    pa = C.box_mass(np.zeros(C.dim), a)
    pb = C.box_mass(b, np.ones(C.dim))
    if abs(pa - p) > 1e-9 or abs(pb - p) > 1e-9:
        raise RefuterInternalError(
            f"corner masses {pa:.3e}/{pb:.3e} missed p={p:.3e} after bisection"
        )
    return CornerPair(a=a, b=b, p=float(p))


# ---------------------------------------------------------------------------
# The minimality refuter
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RefutationCertificate:
    """Machine-checkable witness that C is not minimal: a strictly
    concordance-smaller copula D plus the verification results."""

    a: np.ndarray
    b: np.ndarray
    p: float
    copula: Copula  # D, as an evaluable surgery node
    order_check: OrderResult
    margin_defect: float
    rho_drop: float
    discretized: CheckerboardCopula | None = None

    @property
    def passed(self) -> bool:
        return (
            self.order_check.relation == Relation.STRICTLY_BELOW
            and self.rho_drop > 0
        )


def _refine_cuts(C: CheckerboardCopula, a, b) -> list[np.ndarray]:
    cuts = []
    for k in range(C.dim):
        merged = np.unique(np.concatenate([C.cuts[k], [a[k], b[k]]]))
        keep = np.concatenate([[True], np.diff(merged) > 1e-13])
        cuts.append(merged[keep])
    return cuts


def refute_minimality(
    C: Copula, grid: int | None = None, tol: float = DEFECT_TOL
) -> RefutationCertificate | TauCmCertificate:
    """Either a grid tau-CM certificate, or a verified refutation.

    The refuter is one-sided: a TauCmCertificate does not prove minimality
    (tau-CM non-minimal copulas exist in dimension >= 4).
    """
    pair = find_corner_pair(C, grid, tol)
    if pair is None:
        return tau_cm_certificate(C, grid)
    a, b, p = pair.a, pair.b, pair.p
    D: Copula = RefutedCopula(C, a, b, p)
    discretized = None
    if isinstance(C, CheckerboardCopula):
        # the surgery measure is piecewise uniform on the cuts refined by a
        # and b, so this projection is exact and all checks become exact
        cuts = _refine_cuts(C, a, b)
        discretized = discretize(D, cuts)
        report = validate(discretized)
        order_check = concordance_leq(discretized, discretize(C, cuts))
    else:
        report = validate(D)
        order_check = concordance_leq(D, C, grid)
    checks: list[str] = []
    if not report.passed:
        checks.append(f"validate failed: {report}")
    if order_check.relation != Relation.STRICTLY_BELOW:
        checks.append(f"order check gave {order_check.relation}")
    gap = C.cdf(a) - D.cdf(a)
    if not gap >= p - 1e-9:
        checks.append(f"strict witness D(a) = C(a) - p failed: gap {gap:.3e} vs p {p:.3e}")
    rho_c = spearman_rho(C).value
    rho_d = spearman_rho(discretized if discretized is not None else D).value
    rho_drop = rho_c - rho_d
    if not rho_drop > 0:
        checks.append(f"Spearman rho did not drop: {rho_c} -> {rho_d}")
    if checks:
        raise RefuterInternalError("; ".join(checks))
    return RefutationCertificate(
        a=a,
        b=b,
        p=p,
        copula=D,
        order_check=order_check,
        margin_defect=max(report.worst_margin_defect, report.worst_grounding_defect),
        rho_drop=rho_drop,
        discretized=discretized,
    )


# ---------------------------------------------------------------------------
# Iterative descent
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DescentStep:
    iteration: int
    kendall_integral: float
    rho: float
    defect: float
    p: float
    coarsened: bool
    # largest float-drift correction applied when re-gridding (see _stabilize)
    adjustment: float = 0.0


@dataclass(frozen=True)
class DescentResult:
    final: CheckerboardCopula
    trace: tuple[DescentStep, ...]
    status: str  # "converged" | "stalled" | "max_iter"


def _coarsen(C: CheckerboardCopula, cap: int) -> tuple[CheckerboardCopula, bool]:
    """Drop interior cuts (merging adjacent slabs mass-preservingly, which
    keeps margins exact) until every axis has at most ``cap`` cells."""
    cuts = [c.copy() for c in C.cuts]
    masses = C.masses
    changed = False
    for k in range(C.dim):
        while len(cuts[k]) - 1 > cap:
            widths = np.diff(cuts[k])
            pair = widths[:-1] + widths[1:]
            j = int(np.argmin(pair))  # cheapest interior cut to drop
            idx = [slice(None)] * C.dim
            idx[k] = slice(j, j + 2)
            merged = masses[tuple(idx)].sum(axis=k, keepdims=True)
            before, after = [slice(None)] * C.dim, [slice(None)] * C.dim
            before[k] = slice(0, j)
            after[k] = slice(j + 2, None)
            masses = np.concatenate(
                [masses[tuple(before)], merged, masses[tuple(after)]], axis=k
            )
            cuts[k] = np.delete(cuts[k], j + 1)
            changed = True
    if not changed:
        return C, False
    return CheckerboardCopula(cuts, masses), True


def _stabilize(board: CheckerboardCopula) -> tuple[CheckerboardCopula, float]:
    """Remove the machine-scale drift that iterated surgery accrues.

    Each surgery step re-derives cell masses from an evaluated cdf; the
    bisection mismatch (<= 1e-12 on the corner masses) and the clipping of
    -1e-16 cells push total mass and margins off by O(cells * eps) per
    iteration, which compounds over a long descent.  Rescaling plus a few
    proportional-fitting sweeps restores an exact checkerboard; the size of
    the correction is returned and reported in the trace, never hidden.
    """
    masses = board.masses
    adjustment = abs(float(masses.sum()) - 1.0)
    d = board.dim
    widths = [np.diff(c) for c in board.cuts]
    for _ in range(3):
        masses = masses / masses.sum()
        for k in range(d):
            slab = masses.sum(axis=tuple(i for i in range(d) if i != k))
            adjustment = max(adjustment, float(np.max(np.abs(slab - widths[k]))))
            ratio = np.where(slab > 0, widths[k] / np.where(slab > 0, slab, 1.0), 1.0)
            shape = [1] * d
            shape[k] = -1
            masses = masses * ratio.reshape(shape)
    if adjustment == 0.0:
        return board, 0.0
    return CheckerboardCopula(list(board.cuts), masses / masses.sum()), adjustment


def descend(
    C: Copula,
    n: int = 16,
    max_iter: int = 50,
    tol: float = DEFECT_TOL,
    cut_cap: int | None = None,
    stall_patience: int = 25,
) -> DescentResult:
    """Iterated surgery toward a grid tau-CM copula.

    Materialises C on an n-cell grid, then repeatedly refutes and
    re-discretises, inserting the new cut planes at a and b (each such step
    is measure-exact) and coarsening mass-preservingly when an axis exceeds
    ``cut_cap`` (default 4n) cells.  Stops when the vertex tau-CM defect is
    <= tol ("converged"), when the defect has not improved for
    ``stall_patience`` consecutive surgeries ("stalled"), or at
    ``max_iter``.  The trace shows int C dQ^C non-increasing and rho
    strictly decreasing across exact (non-coarsened) steps.
    """
    if n < 4 or max_iter < 1:
        raise InputError("descend needs n >= 4 and max_iter >= 1")
    cap = 4 * n if cut_cap is None else cut_cap
    if isinstance(C, CheckerboardCopula):
        cuts = [
            np.unique(np.concatenate([c, np.linspace(0, 1, n + 1)]))
            for c in C.cuts
        ]
        board = discretize(C, cuts)
    else:
        board = discretize(C, uniform_cuts(C.dim, n))
    trace: list[DescentStep] = []
    status = "max_iter"
    best = np.inf
    since_best = 0
    coarsened = False
    adjustment = 0.0
    for it in range(max_iter):
        defect, _, _ = tau_cm_defect(board)
        kendall = board.kendall_self_integral()
        rho = spearman_rho(board).value
        if defect <= tol:
            trace.append(
                DescentStep(it, kendall, rho, defect, np.nan, coarsened, adjustment)
            )
            status = "converged"
            break
        if defect < best - 1e-15:
            best = defect
            since_best = 0
        else:
            since_best += 1
            if since_best >= stall_patience:
                trace.append(
                    DescentStep(it, kendall, rho, defect, np.nan, coarsened, adjustment)
                )
                status = "stalled"
                break
        pair = find_corner_pair(board, tol=tol)
        if pair is None or pair.p <= tol:
            trace.append(
                DescentStep(it, kendall, rho, defect, np.nan, coarsened, adjustment)
            )
            status = "stalled"
            break
        trace.append(
            DescentStep(it, kendall, rho, defect, pair.p, coarsened, adjustment)
        )
        node = RefutedCopula(board, pair.a, pair.b, pair.p)
        # tolerate the drift here; _stabilize removes and reports it
        board = discretize(node, _refine_cuts(board, pair.a, pair.b), tol=1e-8)
        board, adjustment = _stabilize(board)
        board, coarsened = _coarsen(board, cap)
    return DescentResult(final=board, trace=tuple(trace), status=status)
