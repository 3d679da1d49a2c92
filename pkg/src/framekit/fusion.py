"""Fusion frames built from partitions of a frame, and the near-tightness
certificate for unit-norm tight RIP frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (BlockTooLarge, DimensionMismatch, LocalNotSpanning,
                     MeasurementOutsideSubspace, NotAFusionFrame, NotRieszBasis, NotTight,
                     NotUnitNorm)
from .frames import Frame, FrameBounds
from .numerics import DEFAULT_TOL, Tolerances, as_matrix, orthonormalize, spectral_power, sym_eigen
from .partition import Partition
from .rip import RipReport, riesz_bounds

UNIT_NORM_TOL = 1e-8
TIGHT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace stored through an orthonormal basis (columns of ``basis``)."""

    basis: np.ndarray
    source_indices: tuple[int, ...] | None = None
    dependent: bool = False

    def __post_init__(self):
        b = as_matrix(self.basis)
        if b.shape[1] < 1:
            raise ValueError("a subspace needs dimension >= 1")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        if self.source_indices is not None:
            object.__setattr__(self, "source_indices", tuple(int(i) for i in self.source_indices))

    @classmethod
    def from_vectors(cls, vectors, source_indices=None,
                     tol: Tolerances = DEFAULT_TOL) -> "Subspace":
        """Orthonormalise spanning vectors; a rank-deficient input is flagged."""
        v = as_matrix(vectors)
        basis, pivots = orthonormalize(v, tol.rank_tol)
        if basis.shape[1] == 0:
            raise ValueError("vectors span the zero subspace")
        return cls(basis, source_indices, dependent=len(pivots) < v.shape[1])

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @cached_property
    def projector(self) -> np.ndarray:
        return self.basis @ np.conj(self.basis.T)

    def to_json(self, weight: float = 1.0) -> dict:
        cplx = np.iscomplexobj(self.basis)
        cols = [[[float(z.real), float(z.imag)] for z in c] if cplx else [float(z) for z in c]
                for c in self.basis.T]
        out = {"basis": cols, "weight": float(weight)}
        if self.source_indices is not None:
            out["source_indices"] = list(self.source_indices)
        return out


def project(sub: Subspace, x) -> np.ndarray:
    x = as_matrix(x, ndim=1)
    if x.shape[0] != sub.ambient_dim:
        raise DimensionMismatch(f"expected length {sub.ambient_dim}, got {x.shape[0]}")
    return sub.basis @ (np.conj(sub.basis.T) @ x)


@dataclass(frozen=True, eq=False)
class FusionFrame:
    subspaces: tuple[Subspace, ...]
    weights: tuple[float, ...]
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        subs = tuple(self.subspaces)
        if not subs:
            raise ValueError("a fusion frame needs at least one subspace")
        n = subs[0].ambient_dim
        if any(s.ambient_dim != n for s in subs):
            raise DimensionMismatch("subspaces live in different ambient dimensions")
        w = tuple(float(x) for x in self.weights)
        if len(w) != len(subs):
            raise ValueError("one weight per subspace")
        if any(not x > 0 for x in w):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "subspaces", subs)
        object.__setattr__(self, "weights", w)

    @property
    def ambient_dim(self) -> int:
        return self.subspaces[0].ambient_dim

    def __len__(self) -> int:
        return len(self.subspaces)

    @cached_property
    def fusion_operator(self) -> np.ndarray:
        out = sum(w * w * s.projector for s, w in zip(self.subspaces, self.weights))
        return 0.5 * (out + np.conj(out.T))

    @cached_property
    def bounds(self) -> FrameBounds:
        lam = sym_eigen(self.fusion_operator, self.tol).eigenvalues
        return FrameBounds(max(float(lam[-1]), 0.0), float(lam[0]))

    @property
    def dependent_blocks(self) -> list[int]:
        return [j for j, s in enumerate(self.subspaces) if s.dependent]

    def to_json(self) -> dict:
        return {"ambient_dim": self.ambient_dim,
                "subspaces": [s.to_json(w) for s, w in zip(self.subspaces, self.weights)]}

    @classmethod
    def from_json(cls, data: dict, tol: Tolerances = DEFAULT_TOL) -> "FusionFrame":
        n = int(data["ambient_dim"])
        subs, weights = [], []
        for entry in data["subspaces"]:
            cols = entry["basis"]
            if cols and isinstance(cols[0][0], list):
                arr = np.array([[complex(re, im) for re, im in c] for c in cols])
            else:
                arr = np.array(cols, dtype=float)
            arr = arr.reshape(len(cols), n).T
            # re-orthonormalise so hand-written files need not be exact
            sub = Subspace.from_vectors(arr, entry.get("source_indices"), tol)
            subs.append(sub)
            weights.append(float(entry.get("weight", 1.0)))
        return cls(tuple(subs), tuple(weights), tol)


def fusion_bounds(ff: FusionFrame) -> FrameBounds:
    return ff.bounds


def fusion_frame_from_partition(f: Frame, partition: Partition,
                                weights: Sequence[float] | None = None) -> FusionFrame:
    """W_j = span{phi_i : i in block j}, unit weights unless given."""
    if partition.count != f.count:
        raise DimensionMismatch(f"partition covers {partition.count} indices, frame has {f.count}")
    subs = tuple(Subspace.from_vectors(f.columns(b), b, f.tol) for b in partition)
    w = (1.0,) * len(subs) if weights is None else tuple(weights)
    return FusionFrame(subs, w, f.tol)


def measure(ff: FusionFrame, x) -> list[np.ndarray]:
    """Fusion measurements v_i P_i x."""
    return [w * project(s, x) for s, w in zip(ff.subspaces, ff.weights)]


def fusion_reconstruct(ff: FusionFrame, measurements, inside_tol: float = 1e-8) -> np.ndarray:
    """x = sum_i v_i S_W^(-1) m_i from measurements m_i = v_i P_i x."""
    b = ff.bounds
    if b.upper <= 0.0 or b.lower <= ff.tol.rank_tol * b.upper:
        raise NotAFusionFrame("subspaces do not span: lower fusion bound is zero")
    if len(measurements) != len(ff):
        raise ValueError("one measurement per subspace")
    acc = np.zeros(ff.ambient_dim, dtype=complex if any(
        np.iscomplexobj(m) for m in measurements) else float)
    for j, (s, w, m) in enumerate(zip(ff.subspaces, ff.weights, measurements)):
        m = as_matrix(m, ndim=1)
        off = np.linalg.norm(m - project(s, m))
        if off > inside_tol * max(np.linalg.norm(m), 1.0):
            raise MeasurementOutsideSubspace(f"measurement {j} is {off:.3e} away from its subspace")
        acc = acc + w * m
    return spectral_power(ff.fusion_operator, -1.0, tol=ff.tol) @ acc


# -- near-tightness certificate -------------------------------------------

@dataclass(frozen=True)
class NearTightnessReport:
    epsilon_input: float
    theoretical: tuple[float, float]
    measured: tuple[float, float]
    holds: bool
    epsilon_nearly_tight: bool
    nearly_tight_constant: float
    minimal_epsilon: float
    witness: tuple[int, ...] = ()
    dependent_blocks: tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {
            "epsilon_input": self.epsilon_input,
            "witness": list(self.witness),
            "theoretical": {"lower": self.theoretical[0], "upper": self.theoretical[1]},
            "measured": {"lower": self.measured[0], "upper": self.measured[1]},
            "holds": self.holds,
            "epsilon_nearly_tight": self.epsilon_nearly_tight,
            "nearly_tight_constant": self.nearly_tight_constant,
            "minimal_epsilon": self.minimal_epsilon,
            "dependent_blocks": list(self.dependent_blocks),
        }


def near_tightness_bracket(count: int, dim: int, epsilon: float) -> tuple[float, float]:
    ratio = count / dim
    return ratio / (1.0 + epsilon), ratio * (1.0 + epsilon)


def require_unit_norm_tight(f: Frame) -> None:
    dev = float(np.max(np.abs(f.norms - 1.0)))
    if dev > UNIT_NORM_TOL:
        raise NotUnitNorm(f"column norms deviate from 1 by {dev:.3e}")
    if f.bounds.tight_ratio > 1.0 + TIGHT_TOL:
        raise NotTight(f"tight ratio {f.bounds.tight_ratio:.12g} exceeds 1 + {TIGHT_TOL:g}")


def certify_near_tightness(f: Frame, partition: Partition, rip: RipReport,
                           epsilon: float | None = None,
                           slack: float | None = None) -> NearTightnessReport:
    """Check that the block-span fusion frame of a unit-norm tight RIP frame has
    bounds inside [M/((1+eps)N), M(1+eps)/N].

    ``epsilon`` overrides ``rip.epsilon_hat`` (used to force failures).
    """
    require_unit_norm_tight(f)
    if partition.max_block > rip.s:
        raise BlockTooLarge(f"block of size {partition.max_block} exceeds RIP cap s={rip.s}")
    eps = rip.epsilon_hat if epsilon is None else float(epsilon)
    slack = 10 * f.tol.tol_eigen if slack is None else slack
    ff = fusion_frame_from_partition(f, partition)
    lo, hi = near_tightness_bracket(f.count, f.dim, eps)
    b = ff.bounds
    ratio = f.count / f.dim
    holds = b.lower >= lo - slack * ratio and b.upper <= hi + slack * ratio
    minimal = float(np.sqrt(b.upper / b.lower) - 1.0) if b.lower > 0 else float("inf")
    return NearTightnessReport(
        epsilon_input=float(eps),
        theoretical=(lo, hi),
        measured=(b.lower, b.upper),
        holds=bool(holds),
        epsilon_nearly_tight=bool(holds and 0.0 <= eps < 1.0),
        nearly_tight_constant=ratio,
        minimal_epsilon=minimal,
        witness=rip.witness,
        dependent_blocks=tuple(ff.dependent_blocks),
    )


@dataclass(frozen=True)
class BlockEnergyCheck:
    epsilon: float
    observed_min_ratio: float
    observed_max_ratio: float
    exact_min_ratio: float
    exact_max_ratio: float
    holds: bool


def check_block_energy(f: Frame, block, epsilon: float, trials: int = 100, seed: int = 0,
                       slack: float | None = None) -> BlockEnergyCheck:
    """Compare ||P phi||^2 with sum_{i in block} |<phi, phi_i>|^2 on random unit phi.

    The ratio must stay inside [1/(1+eps), 1+eps].  The exact extremes are
    1/lambda_max and 1/lambda_min of the block frame operator on its span.
    """
    rb = riesz_bounds(f, block)
    slack = 10 * f.tol.tol_eigen if slack is None else slack
    if not rb.epsilon <= epsilon * (1 + slack) + slack:
        raise NotRieszBasis(f"block epsilon {rb.epsilon:.6g} exceeds {epsilon:.6g}")
    vecs = f.columns(rb.subset)
    sub = Subspace.from_vectors(vecs, rb.subset, f.tol)
    rng = np.random.default_rng(seed)
    lo, hi = np.inf, -np.inf
    for _ in range(trials):
        x = rng.standard_normal(f.dim)
        if np.iscomplexobj(vecs):
            x = x + 1j * rng.standard_normal(f.dim)
        x /= np.linalg.norm(x)
        energy = float(np.sum(np.abs(np.conj(vecs.T) @ x) ** 2))
        proj = float(np.linalg.norm(project(sub, x)) ** 2)
        if energy <= f.tol.rank_tol:
            continue  # phi orthogonal to the block span: 0 <= 0 <= 0
        r = proj / energy
        lo, hi = min(lo, r), max(hi, r)
    exact_lo, exact_hi = 1.0 / rb.lambda_max, 1.0 / rb.lambda_min
    bound_lo, bound_hi = 1.0 / (1.0 + epsilon), 1.0 + epsilon
    if not np.isfinite(lo):
        lo = hi = exact_lo
    holds = (min(lo, exact_lo) >= bound_lo * (1 - slack)
             and max(hi, exact_hi) <= bound_hi * (1 + slack))
    return BlockEnergyCheck(float(epsilon), lo, hi, exact_lo, exact_hi, bool(holds))


# -- local/global frame bounds --------------------------------------------

@dataclass(frozen=True)
class LocalGlobalCheck:
    local_bounds: tuple[tuple[float, float], ...]
    fusion_bounds: tuple[float, float]
    composed_bounds: tuple[float, float]
    bracket: tuple[float, float]
    reverse_bracket: tuple[float, float]
    holds: bool


def local_frame_bounds(sub: Subspace, vectors, tol: Tolerances = DEFAULT_TOL) -> tuple[float, float]:
    """Frame bounds of ``vectors`` as a frame for ``sub``."""
    v = as_matrix(vectors)
    if v.shape[0] != sub.ambient_dim:
        raise DimensionMismatch("local vectors have the wrong ambient dimension")
    scale = max(float(np.max(np.linalg.norm(v, axis=0))), 1.0)
    if np.linalg.norm(v - sub.projector @ v) > 1e-8 * scale * np.sqrt(v.shape[1]):
        raise LocalNotSpanning("local vectors leave their subspace")
    coords = np.conj(sub.basis.T) @ v
    op = coords @ np.conj(coords.T)
    lam = sym_eigen(0.5 * (op + np.conj(op.T)), tol).eigenvalues
    if lam[-1] <= tol.rank_tol * max(lam[0], 0.0) or lam[0] <= 0:
        raise LocalNotSpanning("local vectors do not span their subspace")
    return float(lam[-1]), float(lam[0])


def check_local_global(ff: FusionFrame, local_frames, slack: float | None = None) -> LocalGlobalCheck:
    """Composed family {v_i phi_ij}: frame bounds within [A C, B D], and the
    fusion bounds within [C'/B, D'/A] for the composed bounds (C', D')."""
    if len(local_frames) != len(ff):
        raise ValueError("one local frame per subspace")
    slack = 10 * ff.tol.tol_eigen if slack is None else slack
    local = tuple(local_frame_bounds(s, v, ff.tol) for s, v in zip(ff.subspaces, local_frames))
    a = min(lb for lb, _ in local)
    b = max(ub for _, ub in local)
    fb = ff.bounds
    c, d = fb.lower, fb.upper
    composed = Frame(np.column_stack([w * as_matrix(v) for w, v in zip(ff.weights, local_frames)]),
                     ff.tol)
    cb = composed.bounds
    bracket = (a * c, b * d)
    reverse = (cb.lower / b, cb.upper / a)
    scale = max(b * d, 1.0)
    holds = (cb.lower >= bracket[0] - slack * scale and cb.upper <= bracket[1] + slack * scale
             and c >= reverse[0] - slack * scale and d <= reverse[1] + slack * scale)
    return LocalGlobalCheck(local, (c, d), (cb.lower, cb.upper), bracket, reverse, bool(holds))
