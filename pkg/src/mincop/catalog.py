"""Constructors for the copulas the theory names, each in its most exact
representation.

The extreme-negative-dependence examples are singular, so they are built
directly as segment systems (exact sampling, exact box masses, exact
polynomial moments); the analytic twins remain available for cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import (
    CheckerboardCopula,
    ClaytonExtreme,
    Copula,
    GlueProduct,
    LowerFrechet2d,
    MixtureCopula,
    ProductCopula,
    SegmentCopula,
    UpperFrechet,
)
from .errors import DomainError, InputError

__all__ = [
    "make_basic",
    "make_reflected_upper",
    "make_triangle_3d",
    "ShuffleSpec",
    "make_shuffle",
    "shuffle_a",
    "shuffle_b",
    "make_glue_product",
    "make_mixture",
    "mixture_all_reflections",
    "random_checkerboard",
]

BASIC_KINDS = ("upper_frechet", "lower_frechet_2d", "product", "clayton_extreme")


def make_basic(kind: str, d: int, representation: str = "segment") -> Copula:
    """The named building blocks: M, W (d=2 only), Pi, and the extreme
    Clayton copula with parameter -1/(d-1).

    M and W come as single-segment copulas by default (set
    ``representation="analytic"`` for the closed-form node); Pi and Clayton
    are closed forms.  ``product`` admits d=1 so it can act as a glue factor.
    """
    if kind not in BASIC_KINDS:
        raise InputError(f"unknown basic copula kind {kind!r}")
    if representation not in ("segment", "analytic"):
        raise InputError(f"unknown representation {representation!r}")
    if kind == "product":
        return ProductCopula(d)
    if d < 2:
        raise InputError("copulas need dimension >= 2")
    if kind == "upper_frechet":
        if representation == "analytic":
            return UpperFrechet(d)
        return SegmentCopula(np.zeros((1, d)), np.ones((1, d)), [1.0])
    if kind == "lower_frechet_2d":
        if d != 2:
            raise DomainError(
                "the lower Frechet-Hoeffding bound is a copula only for d=2"
            )
        if representation == "analytic":
            return LowerFrechet2d()
        return SegmentCopula([[0.0, 1.0]], [[1.0, 0.0]], [1.0])
    return ClaytonExtreme(d)


def make_reflected_upper(d: int, K: Iterable[int]) -> SegmentCopula:
    """nu_K(M): the single segment t -> eta_K(t 1, (1-t) 1), mass 1.

    Requires 1 <= |K| <= d-1 (empty or full K give M and tau(M) = M, which
    are not the intended countermonotonic examples; build those via the
    transforms instead).  Axes are 0-based.
    """
    K = sorted(set(int(k) for k in K))
    if not K or len(K) >= d:
        raise DomainError("reflected-upper requires 1 <= |K| <= d-1")
    if K[0] < 0 or K[-1] >= d:
        raise InputError(f"axes {K} outside 0..{d - 1}")
    start = np.zeros(d)
    end = np.ones(d)
    start[K] = 1.0
    end[K] = 0.0
    return SegmentCopula(start[None, :], end[None, :], [1.0])


def make_triangle_3d() -> SegmentCopula:
    """d=3 copula uniform on the edges of the equilateral triangle with
    vertices (0,1/2,1), (1/2,1,0), (1,0,1/2); its mass lives on the
    hyperplane u1+u2+u3 = 3/2."""
    v = np.array([[0.0, 0.5, 1.0], [0.5, 1.0, 0.0], [1.0, 0.0, 0.5]])
    starts = v
    ends = v[[1, 2, 0]]
    return SegmentCopula(starts, ends, [1 / 3, 1 / 3, 1 / 3])


@dataclass(frozen=True)
class ShuffleSpec:
    """A two-dimensional shuffle structure: square boxes with disjoint
    interiors, each carrying a diagonal of slope +1 (an M piece) or -1
    (a W piece)."""

    boxes: tuple[tuple[tuple[float, float], tuple[float, float]], ...]
    slopes: tuple[int, ...]

    def __post_init__(self):
        if len(self.boxes) != len(self.slopes):
            raise InputError("one slope per box")
        if any(s not in (-1, 1) for s in self.slopes):
            raise InputError("slopes must be +1 or -1")
        spans = []
        for (lo, hi) in self.boxes:
            wx, wy = hi[0] - lo[0], hi[1] - lo[1]
            if wx <= 0 or wy <= 0 or abs(wx - wy) > 1e-12:
                raise InputError("shuffle boxes must be nondegenerate squares")
            spans.append((lo, hi))
        for i in range(len(spans)):
            for j in range(i + 1, len(spans)):
                (alo, ahi), (blo, bhi) = spans[i], spans[j]
                if (
                    min(ahi[0], bhi[0]) - max(alo[0], blo[0]) > 1e-12
                    and min(ahi[1], bhi[1]) - max(alo[1], blo[1]) > 1e-12
                ):
                    raise DomainError("shuffle boxes overlap")


def make_shuffle(spec: ShuffleSpec) -> SegmentCopula:
    """A shuffle copula from its box structure: each square carries the
    diagonal of the requested slope with mass equal to its side length.
    Uniform margins are verified at construction (so invalid structures are
    rejected rather than silently accepted)."""
    starts, ends, masses = [], [], []
    for (lo, hi), slope in zip(spec.boxes, spec.slopes):
        if slope == 1:
            starts.append([lo[0], lo[1]])
            ends.append([hi[0], hi[1]])
        else:
            starts.append([lo[0], hi[1]])
            ends.append([hi[0], lo[1]])
        masses.append(hi[0] - lo[0])
    return SegmentCopula(starts, ends, masses)


def shuffle_a() -> SegmentCopula:
    """Shuffle of M: diagonals (0,1/2)->(1/2,1) and (1/2,0)->(1,1/2)."""
    return make_shuffle(
        ShuffleSpec(
            (((0.0, 0.5), (0.5, 1.0)), ((0.5, 0.0), (1.0, 0.5))),
            (1, 1),
        )
    )


def shuffle_b() -> SegmentCopula:
    """Shuffle of W: antidiagonals (0,1/2)->(1/2,0) and (1/2,1)->(1,1/2).
    Pointwise above shuffle_a, with the same Kendall tau."""
    return make_shuffle(
        ShuffleSpec(
            (((0.0, 0.0), (0.5, 0.5)), ((0.5, 0.5), (1.0, 1.0))),
            (-1, -1),
        )
    )


def make_glue_product(C: Copula, D: Copula) -> GlueProduct:
    """E(u, v) = C(u) D(v) on concatenated coordinates; Q^E = Q^C x Q^D."""
    return GlueProduct(C, D)


def make_mixture(parts: Sequence[tuple[Copula, float]]) -> Copula:
    """Convex combination.  When every part is segment-supported the result
    is flattened into one SegmentCopula so the exact paths stay available."""
    if all(isinstance(c, SegmentCopula) for c, _ in parts):
        weights = np.array([w for _, w in parts], dtype=float)
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise DomainError("mixture weights must be positive and sum to 1")
        starts = np.vstack([c.starts for c, _ in parts])
        ends = np.vstack([c.ends for c, _ in parts])
        masses = np.concatenate([w * c.masses for c, w in parts])
        return SegmentCopula(starts, ends, masses, _skip_margin_check=True)
    return MixtureCopula(parts)


def mixture_all_reflections(d: int) -> SegmentCopula:
    """(1/(2^d - 2)) sum over nonempty proper K of nu_K(M): Kendall-
    countermonotonic but K-countermonotonic for no K."""
    from itertools import combinations

    parts = []
    count = 2**d - 2
    for size in range(1, d):
        for K in combinations(range(d), size):
            parts.append((make_reflected_upper(d, K), 1.0 / count))
    return make_mixture(parts)


def random_checkerboard(
    d: int, n: int, seed: int, latin_mixes: int = 24
) -> CheckerboardCopula:
    """A random checkerboard with exactly uniform margins: the average of
    random Latin permutation tensors (cells (i, s2(i), ..., sd(i)) of mass
    1/n each), which have uniform margins by construction."""
    rng = np.random.default_rng(seed)
    masses = np.zeros((n,) * d)
    base = np.arange(n)
    for _ in range(latin_mixes):
        idx = [base] + [rng.permutation(n) for _ in range(d - 1)]
        masses[tuple(idx)] += 1.0 / (n * latin_mixes)
    cuts = [np.linspace(0.0, 1.0, n + 1)] * d
    return CheckerboardCopula(cuts, masses)
