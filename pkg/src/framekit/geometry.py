"""Angles between subspaces: principal angles, near-orthogonality and
(nearly) equi-isoclinic families."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import AmbientMismatch, BlockTooLarge, DimensionMismatch, InvalidPartition, TooFewSubspaces
from .frames import Frame
from .fusion import NearTightnessReport, Subspace, certify_near_tightness, fusion_frame_from_partition
from .numerics import DEFAULT_TOL, Tolerances, svd, sym_eigen
from .partition import Partition, check_cover
from .rip import RipReport, _validate_subset, riesz_bounds


@dataclass(frozen=True)
class PrincipalAngles:
    cosines: np.ndarray  # descending, in [0, 1]

    @property
    def angles(self) -> np.ndarray:
        return np.arccos(self.cosines)


def principal_angles(a: Subspace, b: Subspace, tol: Tolerances = DEFAULT_TOL) -> PrincipalAngles:
    if a.ambient_dim != b.ambient_dim:
        raise AmbientMismatch(f"ambient dimensions {a.ambient_dim} and {b.ambient_dim} differ")
    cross = np.conj(a.basis.T) @ b.basis
    _, s, _ = svd(cross, tol)
    k = min(a.dim, b.dim)
    return PrincipalAngles(np.clip(s[:k], 0.0, 1.0))


def near_orthogonality(a: Subspace, b: Subspace, tol: Tolerances = DEFAULT_TOL) -> float:
    """max |<phi, psi>| over unit phi in a, psi in b (= cos of the first principal angle)."""
    return float(principal_angles(a, b, tol).cosines[0])


def correlation_bound(epsilon: float) -> float:
    """Correlation bound 2 eps (1 + eps/2) between spans of disjoint parts of an eps-Riesz sequence."""
    return 2.0 * epsilon * (1.0 + epsilon / 2.0)


def orthogonality_bound(epsilon: float) -> float:
    """Near-orthogonality constant 2 eps (1 + eps)^2 for blocks of size <= s/2."""
    return 2.0 * epsilon * (1.0 + epsilon) ** 2


@dataclass(frozen=True)
class CorrelationCheck:
    epsilon: float
    max_correlation: float
    bound: float
    orthogonality_bound: float
    holds: bool
    holds_orthogonality: bool
    at_equality: bool
    within_hypothesis: bool


def check_correlation_bound(f: Frame, subset, split: Sequence[Sequence[int]],
                            epsilon: float | None = None, slack: float = 1e-10) -> CorrelationCheck:
    """Largest correlation between the spans of the two parts of ``subset``.

    Compared against 2 eps (1 + eps/2) and the looser 2 eps (1 + eps)^2.
    ``epsilon`` defaults to the measured Riesz epsilon of ``subset``.
    """
    sub = _validate_subset(f, subset)
    if len(split) != 2 or any(len(p) == 0 for p in split):
        raise InvalidPartition("split must have two non-empty parts")
    parts = [tuple(int(i) for i in p) for p in split]
    check_cover(parts, sub)
    eps = riesz_bounds(f, sub).epsilon if epsilon is None else float(epsilon)
    w1 = Subspace.from_vectors(f.columns(parts[0]), parts[0], f.tol)
    w2 = Subspace.from_vectors(f.columns(parts[1]), parts[1], f.tol)
    corr = near_orthogonality(w1, w2, f.tol)
    bound, thm = correlation_bound(eps), orthogonality_bound(eps)
    return CorrelationCheck(
        epsilon=eps, max_correlation=corr, bound=bound, orthogonality_bound=thm,
        holds=bool(corr <= bound + slack), holds_orthogonality=bool(corr <= thm + slack),
        at_equality=bool(abs(corr - bound) <= slack), within_hypothesis=bool(eps < 1.0))


def _squared_cosines(a: Subspace, b: Subspace, tol: Tolerances) -> np.ndarray:
    """Eigenvalues of B1^H P2 B1, i.e. the spectrum of P1 P2 P1 on W1."""
    cross = np.conj(a.basis.T) @ b.basis
    m = cross @ np.conj(cross.T)
    return np.clip(sym_eigen(0.5 * (m + np.conj(m.T)), tol).eigenvalues, 0.0, 1.0)


@dataclass(frozen=True)
class IsoclinicParameter:
    lam: float | None
    spread: float


def isoclinic_parameter(a: Subspace, b: Subspace, tol: Tolerances = DEFAULT_TOL) -> IsoclinicParameter:
    """Common squared cosine if P1 P2 P1 = lambda P1 (within tol_iso), else None."""
    if a.ambient_dim != b.ambient_dim:
        raise AmbientMismatch("ambient dimensions differ")
    if a.dim != b.dim:
        raise DimensionMismatch(f"subspace dimensions {a.dim} and {b.dim} differ")
    c2 = _squared_cosines(a, b, tol)
    spread = float(c2.max() - c2.min())
    lam = float(c2.mean()) if spread <= tol.tol_iso else None
    return IsoclinicParameter(lam, spread)


@dataclass(frozen=True)
class PairAngles:
    i: int
    j: int
    cosines: tuple[float, ...]

    @property
    def cos2_min(self) -> float:
        return min(self.cosines) ** 2

    @property
    def cos2_max(self) -> float:
        return max(self.cosines) ** 2


@dataclass(frozen=True)
class IsoclinicReport:
    pairs: tuple[PairAngles, ...]
    cos2_min: float
    cos2_max: float
    lambda_star: float
    epsilon_required: float
    epsilon: float | None = None

    def holds_at(self, epsilon: float) -> bool:
        return self.epsilon_required <= epsilon

    @property
    def max_correlation(self) -> float:
        return max(max(p.cosines) for p in self.pairs)

    def to_json(self) -> dict:
        out = {
            "pairs": [{"i": p.i, "j": p.j, "cosines": list(p.cosines)} for p in self.pairs],
            "lambda_star": self.lambda_star,
            "epsilon_required": self.epsilon_required,
        }
        if self.epsilon is not None:
            out["epsilon"] = self.epsilon
            out["holds"] = self.holds_at(self.epsilon)
        return out


def certify_equi_isoclinic(subspaces: Sequence[Subspace], epsilon: float | None = None,
                           tol: Tolerances = DEFAULT_TOL) -> IsoclinicReport:
    """Smallest eps for which the family is eps-nearly equi-isoclinic.

    All pairwise squared principal cosines must lie in [lambda - eps^2,
    lambda + eps^2]; the best lambda is the midpoint of their global range.
    """
    subs = list(subspaces)
    if len(subs) < 2:
        raise TooFewSubspaces("need at least two subspaces")
    n, k = subs[0].ambient_dim, subs[0].dim
    for s in subs:
        if s.ambient_dim != n:
            raise AmbientMismatch("ambient dimensions differ")
        if s.dim != k:
            raise DimensionMismatch("equi-isoclinic certification needs equal subspace dimensions")
    pairs = []
    lo, hi = np.inf, -np.inf
    for i, j in combinations(range(len(subs)), 2):
        c2 = _squared_cosines(subs[i], subs[j], tol)
        lo, hi = min(lo, float(c2.min())), max(hi, float(c2.max()))
        pairs.append(PairAngles(i, j, tuple(float(c) for c in principal_angles(subs[i], subs[j], tol).cosines)))
    return IsoclinicReport(tuple(pairs), lo, hi, (hi + lo) / 2.0, float(np.sqrt((hi - lo) / 2.0)),
                           epsilon)


def pairwise_correlations(subspaces: Sequence[Subspace], tol: Tolerances = DEFAULT_TOL):
    """[(i, j, cos theta_1)] for every pair, unequal dimensions allowed."""
    return [(i, j, near_orthogonality(subspaces[i], subspaces[j], tol))
            for i, j in combinations(range(len(subspaces)), 2)]


@dataclass(frozen=True)
class OrthogonalityReport:
    near_tightness: NearTightnessReport
    epsilon: float
    correlations: tuple[tuple[int, int, float], ...]
    max_correlation: float
    bound: float
    correlation_bound: float
    nearly_orthogonal: bool
    correlation_holds: bool
    isoclinic: IsoclinicReport | None

    @property
    def holds(self) -> bool:
        iso = self.isoclinic is None or self.isoclinic.holds_at(self.bound)
        return self.near_tightness.holds and self.nearly_orthogonal and iso

    def to_json(self) -> dict:
        out = {
            "near_tightness": self.near_tightness.to_json(),
            "epsilon": self.epsilon,
            "max_correlation": self.max_correlation,
            "orthogonality_bound": self.bound,
            "correlation_bound": self.correlation_bound,
            "orthogonality_margin": self.bound - self.max_correlation,
            "correlation_margin": self.correlation_bound - self.max_correlation,
            "nearly_orthogonal": self.nearly_orthogonal,
            "correlation_holds": self.correlation_holds,
            "pairs": [{"i": i, "j": j, "max_correlation": c} for i, j, c in self.correlations],
            "holds": self.holds,
        }
        if self.isoclinic is not None:
            out["lambda_star"] = self.isoclinic.lambda_star
            out["epsilon_required"] = self.isoclinic.epsilon_required
        return out


def certify_near_orthogonality(f: Frame, partition: Partition, rip: RipReport,
                               epsilon: float | None = None, slack: float = 1e-10) -> OrthogonalityReport:
    """Near tightness plus 2 eps (1+eps)^2 near-orthogonality for blocks of size <= s/2.

    The isoclinic part is evaluated only when all blocks span subspaces of the
    same dimension.
    """
    if 2 * partition.max_block > rip.s:
        raise BlockTooLarge(f"block of size {partition.max_block} exceeds s/2 = {rip.s / 2:g}")
    nt = certify_near_tightness(f, partition, rip, epsilon)
    eps = nt.epsilon_input
    ff = fusion_frame_from_partition(f, partition)
    corr = tuple(pairwise_correlations(ff.subspaces, f.tol))
    mx = max((c for _, _, c in corr), default=0.0)
    bound, tight = orthogonality_bound(eps), correlation_bound(eps)
    iso = None
    if len(ff) >= 2 and len({s.dim for s in ff.subspaces}) == 1:
        iso = certify_equi_isoclinic(ff.subspaces, bound, f.tol)
    return OrthogonalityReport(nt, eps, corr, mx, bound, tight,
                               bool(mx <= bound + slack), bool(mx <= tight + slack), iso)
