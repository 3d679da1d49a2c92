"""Replacing blocks of an RIP family by orthonormal (whitened) versions and
certifying the restricted-isometry bracket that survives."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (BlockTooLarge, DependentBlock, EpsilonOutOfRange, EpsilonTooLarge,
                     FormulaNegative, HypothesisViolated, UnknownBlock)
from .frames import Frame
from .fusion import Subspace
from .geometry import principal_angles
from .numerics import DEFAULT_TOL, Tolerances, as_matrix, spectral_power, svd
from .partition import Partition
from .rip import DEFAULT_BUDGET, RipReport, riesz_bounds, sweep_subsets


def whiten_block(f: Frame, block) -> np.ndarray:
    """S_j^(-1/2) phi_i for i in ``block``, with S_j the block frame operator.

    The inverse square root is taken on the block span, so the result is an
    orthonormal basis of that span.
    """
    rb = riesz_bounds(f, block)
    if math.isinf(rb.epsilon):
        raise DependentBlock(f"block {list(rb.subset)} is linearly dependent")
    vecs = f.columns(rb.subset)
    s_j = vecs @ np.conj(vecs.T)
    return spectral_power(0.5 * (s_j + np.conj(s_j.T)), -0.5, tol=f.tol) @ vecs


@dataclass(frozen=True, eq=False)
class ReplacedFrame:
    frame: Frame
    partition: Partition
    replaced_blocks: tuple[int, ...]


def replace_blocks(f: Frame, partition: Partition, replaced: Sequence[int],
                   s: int | None = None) -> ReplacedFrame:
    """Swap the vectors of each listed block for their whitened versions."""
    if partition.count != f.count:
        raise UnknownBlock("partition does not match the frame")
    if s is not None and partition.max_block > s:
        raise BlockTooLarge(f"block of size {partition.max_block} exceeds s={s}")
    ids = tuple(int(j) for j in replaced)
    for j in ids:
        if not 0 <= j < len(partition):
            raise UnknownBlock(f"no block {j} (partition has {len(partition)})")
    if len(set(ids)) != len(ids):
        raise UnknownBlock("block listed twice")
    v = np.array(f.vectors)
    for j in ids:
        block = list(partition[j])
        v[:, block] = whiten_block(f, block)
    return ReplacedFrame(f.with_vectors(v), partition, ids)


def bracket_lower(epsilon: float, k1: int) -> float:
    return (1.0 - 4.0 * epsilon / (1.0 - epsilon) ** 2) / (1.0 + epsilon) ** 2 \
        - 4.0 * epsilon * (1.0 + epsilon) * math.sqrt(k1)


def bracket_upper(epsilon: float, k1: int) -> float:
    return (1.0 + epsilon) ** 1.5 + 4.0 * epsilon * (1.0 + epsilon) * math.sqrt(k1)


def k1_limit(epsilon: float) -> int:
    """Largest K1 strictly below (1 - 4e/(1-e)^2)^2 / (16 e^2 (1+e)^6)."""
    if not 0.0 < epsilon < 1.0:
        raise EpsilonOutOfRange(f"epsilon must lie in (0, 1), got {epsilon}")
    head = 1.0 - 4.0 * epsilon / (1.0 - epsilon) ** 2
    if head <= 0.0:
        raise FormulaNegative(f"1 - 4 eps/(1-eps)^2 = {head:.6g} is not positive")
    bound = head * head / (16.0 * epsilon * epsilon * (1.0 + epsilon) ** 6)
    return int(math.ceil(bound)) - 1


@dataclass(frozen=True)
class ReplacementReport:
    k1: int
    s: int
    epsilon_input: float
    theoretical_lower: float
    theoretical_upper: float
    measured_lower: float
    measured_upper: float
    k1_max: int | None
    holds: bool | None
    vacuous: bool
    method: str
    subsets_checked: int

    def to_json(self) -> dict:
        return {
            "k1": self.k1,
            "s": self.s,
            "epsilon_input": self.epsilon_input,
            "theoretical_lower": self.theoretical_lower,
            "theoretical_upper": self.theoretical_upper,
            "measured_lower": self.measured_lower,
            "measured_upper": self.measured_upper,
            "k1_max": self.k1_max,
            "holds": self.holds,
            "bracket_vacuous": self.vacuous,
            "method": self.method,
            "subsets_checked": self.subsets_checked,
        }


def certify_replacement(rf: ReplacedFrame, s: int, rip_before: RipReport,
                        epsilon: float | None = None, budget: int = DEFAULT_BUDGET,
                        samples: int | None = None, seed: int | None = None,
                        slack: float = 1e-12) -> ReplacementReport:
    """Measure the extreme values of ||sum a_i psi_i|| / ||a|| over subsets of
    size <= s of the replaced family and compare them with the bracket

        (1 - 4e/(1-e)^2)/(1+e)^2 - 4e(1+e) sqrt(K1)  ..  (1+e)^(3/2) + 4e(1+e) sqrt(K1)

    where e is the RIP constant of the original family.  A non-positive lower
    constant makes the bracket vacuous: the report is still produced, with
    ``holds`` set to None.
    """
    eps = rip_before.epsilon_hat if epsilon is None else float(epsilon)
    if not eps < 1.0:
        raise EpsilonTooLarge(f"epsilon {eps:.6g} must be below 1")
    if rip_before.s < s:
        raise ValueError(f"RIP report covers sets of size {rip_before.s} < s={s}")
    f = rf.frame
    s_eff = min(s, f.count)
    total = math.comb(f.count, s_eff)
    if samples is None:
        if total > budget:
            raise ValueError(f"{total} subsets exceed the budget; pass samples= and seed=")
        ranks = np.arange(total, dtype=np.int64)
        method = "exhaustive"
    else:
        if seed is None:
            raise ValueError("a seed is required for the randomized sweep")
        rng = np.random.default_rng(seed)
        ranks = (np.arange(total, dtype=np.int64) if samples >= total
                 else np.sort(rng.choice(total, size=samples, replace=False)).astype(np.int64))
        method = "randomized"
    acc = sweep_subsets(f, s_eff, ranks)
    k1 = len(rf.replaced_blocks)
    lo, hi = bracket_lower(eps, k1), bracket_upper(eps, k1)
    m_lo = math.sqrt(max(acc.lmin, 0.0))
    m_hi = math.sqrt(max(acc.lmax, 0.0))
    try:
        k1_max = k1_limit(eps) if eps > 0 else None
    except (EpsilonOutOfRange, FormulaNegative):
        k1_max = None
    vacuous = not lo > 0.0
    holds = None if vacuous else bool(lo <= m_lo * (1 + slack) and m_hi <= hi * (1 + slack))
    return ReplacementReport(k1, s_eff, eps, lo, hi, m_lo, m_hi, k1_max, holds, vacuous,
                             method, acc.checked)


# -- projection residual bound ---------------------------------------------

@dataclass(frozen=True)
class ProjectionResidualCheck:
    hypothesis_constant: float
    epsilon: float
    worst_residual_ratio: float
    sampled_residual_ratio: float
    bound: float
    holds: bool


def projection_residual_bound(epsilon: float) -> float:
    return 4.0 * epsilon / (1.0 - epsilon) ** 2


def whitening_hypothesis_constant(epsilon: float) -> float:
    """eps/(1+eps): bound on (I - S^(-1/2))^2 for an eps-Riesz block."""
    return epsilon / (1.0 + epsilon)


def whitening_residual_bound(epsilon: float) -> float:
    """projection_residual_bound(eps/(1+eps)), which simplifies to 4 eps (1 + eps)."""
    return 4.0 * epsilon * (1.0 + epsilon)


def check_projection_residual(w1: Subspace, w2: Subspace, t, epsilon: float | None = None,
                              trials: int = 200, seed: int = 0, tol: Tolerances = DEFAULT_TOL,
                              slack: float = 1e-10) -> ProjectionResidualCheck:
    """Residual ||psi - P1 psi||^2 / ||psi||^2 over psi in W2 against 4e/(1-e)^2.

    ``t`` is an N x N matrix whose restriction to W1 must map onto W2 and
    satisfy ||phi - T phi||^2 <= e ||phi||^2.  The hypothesis constant is
    measured exactly; ``epsilon`` (if given) must dominate it.
    """
    t = as_matrix(t)
    n = w1.ambient_dim
    if w2.ambient_dim != n or t.shape != (n, n):
        raise HypothesisViolated("operator and subspaces disagree on the ambient dimension")
    image = t @ w1.basis
    _, s_img, _ = svd(image, tol)
    if s_img[-1] <= tol.rank_tol * max(s_img[0], 1.0) or w1.dim != w2.dim:
        raise HypothesisViolated("T restricted to W1 is not a bijection onto W2")
    img_sub = Subspace.from_vectors(image, tol=tol)
    if np.min(principal_angles(img_sub, w2, tol).cosines) < 1.0 - 1e-8:
        raise HypothesisViolated("T(W1) differs from W2")
    _, s_h, _ = svd(w1.basis - image, tol)
    measured = float(s_h[0] ** 2)
    if measured >= 1.0:
        raise HypothesisViolated(f"||phi - T phi||^2 reaches {measured:.6g} ||phi||^2 (needs < 1)")
    eps = measured if epsilon is None else float(epsilon)
    if measured > eps + slack:
        raise HypothesisViolated(f"measured hypothesis constant {measured:.6g} exceeds {eps:.6g}")
    resid = w2.basis - w1.projector @ w2.basis
    _, s_r, _ = svd(resid, tol)
    worst = float(s_r[0] ** 2)
    rng = np.random.default_rng(seed)
    sampled = 0.0
    for _ in range(trials):
        c = rng.standard_normal(w2.dim)
        if np.iscomplexobj(w2.basis):
            c = c + 1j * rng.standard_normal(w2.dim)
        psi = w2.basis @ c
        r = psi - w1.projector @ psi
        sampled = max(sampled, float(np.linalg.norm(r) ** 2 / np.linalg.norm(psi) ** 2))
    bound = projection_residual_bound(eps)
    return ProjectionResidualCheck(measured, eps, worst, sampled, bound, bool(worst <= bound + slack))


def whitening_instance(f: Frame, block, sub_block):
    """(W1, W2, T) for the whitening step: W1 = span{phi_i : i in sub_block},
    T = S_block^(-1/2), W2 = T(W1)."""
    block = list(block)
    sub_block = list(sub_block)
    if not set(sub_block) <= set(block) or not sub_block:
        raise ValueError("sub_block must be a non-empty subset of block")
    vecs = f.columns(block)
    s_j = vecs @ np.conj(vecs.T)
    t = spectral_power(0.5 * (s_j + np.conj(s_j.T)), -0.5, tol=f.tol)
    w1 = Subspace.from_vectors(f.columns(sub_block), sub_block, f.tol)
    w2 = Subspace.from_vectors(t @ f.columns(sub_block), sub_block, f.tol)
    return w1, w2, t
