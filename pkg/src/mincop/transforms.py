"""The transformation group on copulas: reflections, permutations, survival.

``reflect(C, K)`` realises nu_K, the involution sending Q^C to the law of
eta_K(U, 1-U); ``survival`` is the total reflection nu_{0..d-1}.  Each
representation has a structural path (tensor flips for checkerboards,
endpoint maps for segments) so the transformed object keeps its exactness;
only generic analytic nodes fall back to an inclusion-exclusion wrapper.

``discretize`` projects any copula onto a checkerboard by measuring every
grid cell, never by sampling; the result matches the original cdf at every
grid vertex exactly and inherits exact uniform margins from the input's.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .core import (
    CheckerboardCopula,
    Copula,
    GlueProduct,
    MixtureCopula,
    Permuted,
    Reflected,
    RefutedCopula,
    SegmentCopula,
    grid_points,
)
from .errors import InputError, ValidationError

__all__ = ["reflect", "permute", "survival", "discretize", "uniform_cuts"]


def _norm_reflection(C: Copula, K: Iterable[int]) -> frozenset[int]:
    K = frozenset(int(k) for k in K)
    if not K <= set(range(C.dim)):
        raise InputError(f"reflection axes {sorted(K)} outside 0..{C.dim - 1}")
    return K


def reflect(C: Copula, K: Iterable[int]) -> Copula:
    """nu_K(C): flip the coordinates in K at the measure level.

    Checkerboards reverse tensor axes (with cut lists mapped through
    c -> 1-c), segments flip endpoint coordinates, reflections of
    reflections collapse through the symmetric difference, and the total
    reflection of a surgery node is again a surgery node on the survival
    copula.  nu_K is an involution: reflect(reflect(C, K), K) == C.
    """
    K = _norm_reflection(C, K)
    if not K:
        return C
    if isinstance(C, CheckerboardCopula):
        cuts = [
            np.sort(1.0 - c) if k in K else c for k, c in enumerate(C.cuts)
        ]
        masses = np.flip(C.masses, axis=tuple(sorted(K)))
        return CheckerboardCopula(cuts, masses)
    if isinstance(C, SegmentCopula):
        starts = C.starts.copy()
        ends = C.ends.copy()
        for k in K:
            starts[:, k] = 1.0 - C.starts[:, k]
            ends[:, k] = 1.0 - C.ends[:, k]
        return SegmentCopula(starts, ends, C.masses, _skip_margin_check=True)
    if isinstance(C, Reflected):
        K2 = C.K.symmetric_difference(K)
        return C.inner if not K2 else Reflected(C.inner, K2)
    if isinstance(C, GlueProduct):
        dl = C.left.dim
        KL = [k for k in K if k < dl]
        KR = [k - dl for k in K if k >= dl]
        return GlueProduct(reflect(C.left, KL), reflect(C.right, KR))
    if isinstance(C, MixtureCopula):
        return MixtureCopula([(reflect(c, K), w) for c, w in C.parts])
    if isinstance(C, RefutedCopula) and K == frozenset(range(C.dim)):
        # the survival of a surgery node is the surgery on the survival
        # copula with corners mapped through u -> 1-u
        return RefutedCopula(
            reflect(C.inner, K), 1.0 - C.b, 1.0 - C.a, C.p
        )
    return Reflected(C, K)


def survival(C: Copula) -> Copula:
    """tau(C) = nu_{all}(C), the survival copula; an involution."""
    return reflect(C, range(C.dim))


def permute(C: Copula, sigma: Sequence[int]) -> Copula:
    """pi_sigma(C): (pi_sigma C)(u) = C(u[sigma[0]], ..., u[sigma[d-1]]).

    Checkerboards and segments permute their axes structurally; permutations
    of permutations compose.
    """
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != list(range(C.dim)):
        raise InputError(f"{sigma} is not a permutation of 0..{C.dim - 1}")
    if sigma == tuple(range(C.dim)):
        return C
    inv = [0] * C.dim
    for i, s in enumerate(sigma):
        inv[s] = i
    if isinstance(C, CheckerboardCopula):
        cuts = [C.cuts[i] for i in inv]
        return CheckerboardCopula(cuts, np.transpose(C.masses, axes=inv))
    if isinstance(C, SegmentCopula):
        return SegmentCopula(
            C.starts[:, inv], C.ends[:, inv], C.masses, _skip_margin_check=True
        )
    if isinstance(C, Permuted):
        # (pi_sigma (pi_s1 inner))(u) = inner(x), x_j = u[sigma[s1[j]]]
        comp = tuple(sigma[s] for s in C.sigma)
        return permute(C.inner, comp)
    if isinstance(C, MixtureCopula):
        return MixtureCopula([(permute(c, sigma), w) for c, w in C.parts])
    return Permuted(C, sigma)


def uniform_cuts(dim: int, n: int | Sequence[int]) -> list[np.ndarray]:
    if isinstance(n, (int, np.integer)):
        n = [int(n)] * dim
    if len(n) != dim:
        raise InputError("need one resolution per axis")
    return [np.linspace(0.0, 1.0, int(m) + 1) for m in n]


def _norm_cuts(dim: int, cuts) -> list[np.ndarray]:
    if isinstance(cuts, (int, np.integer)):
        return uniform_cuts(dim, int(cuts))
    out = []
    for c in cuts:
        c = np.unique(np.asarray(c, dtype=float))
        if c[0] != 0.0 or c[-1] != 1.0 or len(c) < 2:
            raise InputError("each cut list must run from 0 to 1")
        out.append(c)
    if len(out) != dim:
        raise InputError("need one cut list per axis")
    return out


def discretize(C: Copula, cuts, tol: float | None = None) -> CheckerboardCopula:
    """Project Q^C onto the checkerboard with the given cuts.

    ``cuts`` may be an integer (uniform grid on every axis) or one cut list
    per axis.  Cell masses are exact box masses, obtained as alternating
    differences of the vertex cdf; the result agrees with C at every grid
    vertex.  A cell mass below -1e-10 means C was not a copula.

    ``tol`` overrides the construction tolerance; the default allows the
    O(cells * eps) rounding that alternating differences (and the clipping
    of -1e-15 cells) accumulate on analytic inputs.
    """
    cuts = _norm_cuts(C.dim, cuts)
    vals = C.cdf_many(grid_points(cuts)).reshape([len(c) for c in cuts])
    masses = vals
    for ax in range(C.dim):
        masses = np.diff(masses, axis=ax)
    if masses.min(initial=0.0) < -1e-10:
        raise ValidationError(
            f"discretization produced cell mass {masses.min():.3e}; "
            "the input violates rectangle nonnegativity"
        )
    if tol is None:
        tol = max(1e-12, masses.size * 1e-16)
    return CheckerboardCopula(cuts, np.clip(masses, 0.0, None), tol=tol)
