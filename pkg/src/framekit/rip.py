"""Riesz constants of vector subsets and restricted-isometry certification.

The epsilon used throughout is multiplicative: a family is an epsilon-Riesz
sequence when every coefficient vector a satisfies

    ||a||^2 / (1 + eps)  <=  ||sum a_i phi_i||^2  <=  (1 + eps) ||a||^2,

so for a subset with Gram eigenvalues in [lmin, lmax] the smallest valid
epsilon is max(lmax - 1, 1/lmin - 1).  The compressed-sensing delta with
bounds (1 - delta, 1 + delta) is reported alongside for reference only.

Subsets are enumerated in colexicographic order.  Ties on epsilon are broken
by the smallest colex rank, which keeps witnesses reproducible whatever the
chunking or thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (BudgetExceeded, DuplicateIndex, IndexOutOfRange, InvalidPartition,
                     NotRieszBasis)
from .frames import Frame
from .numerics import _jacobi, spectral_power, sym_eigen
from .partition import check_cover

DEFAULT_BUDGET = 2_000_000
CHUNK = 8192


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("FRAMEKIT_THREADS", "1")))
    except ValueError:
        return 1


# -- colex combinatorics ---------------------------------------------------

def _binomials(m: int, s: int) -> np.ndarray:
    table = np.zeros((m + 1, s + 1), dtype=np.int64)
    for c in range(m + 1):
        for i in range(s + 1):
            table[c, i] = math.comb(c, i)
    return table


def colex_unrank(ranks, m: int, s: int) -> np.ndarray:
    """Subsets (rows, ascending) of {0..m-1} with the given colex ranks."""
    ranks = np.asarray(ranks, dtype=np.int64).copy()
    table = _binomials(m, s)
    out = np.empty((ranks.size, s), dtype=np.int64)
    for i in range(s, 0, -1):
        c = np.searchsorted(table[:, i], ranks, side="right") - 1
        out[:, i - 1] = c
        ranks -= table[c, i]
    return out


def colex_rank(subset: Sequence[int]) -> int:
    return sum(math.comb(int(c), i + 1) for i, c in enumerate(sorted(subset)))


# -- per-subset spectra ----------------------------------------------------

def _subset_extremes(gram: np.ndarray, combos: np.ndarray, max_sweeps: int):
    """Extreme Gram eigenvalues for each row of ``combos``."""
    sub = gram[combos[:, :, None], combos[:, None, :]]
    evals, _ = _jacobi(sub, max_sweeps, want_vectors=False)
    return evals.min(axis=1), evals.max(axis=1)


def _epsilon(lmin, lmax, rank_tol: float):
    lmin = np.asarray(lmin, dtype=float)
    lmax = np.asarray(lmax, dtype=float)
    with np.errstate(divide="ignore"):
        eps = np.maximum(np.maximum(lmax - 1.0, 1.0 / np.where(lmin > 0, lmin, 1.0) - 1.0), 0.0)
    dependent = lmin <= rank_tol * np.maximum(lmax, 1e-300)
    return np.where(dependent, np.inf, eps)


def _delta(lmin, lmax):
    return np.maximum(np.maximum(np.asarray(lmax) - 1.0, 1.0 - np.asarray(lmin)), 0.0)


@dataclass(frozen=True)
class RieszBounds:
    subset: tuple[int, ...]
    lambda_min: float
    lambda_max: float
    epsilon: float

    @property
    def delta(self) -> float:
        return float(_delta(self.lambda_min, self.lambda_max))


def _validate_subset(f: Frame, subset) -> tuple[int, ...]:
    sub = tuple(int(i) for i in subset)
    if not sub:
        raise IndexOutOfRange("empty subset")
    for i in sub:
        if not 0 <= i < f.count:
            raise IndexOutOfRange(f"index {i} outside 0..{f.count - 1}")
    if len(set(sub)) != len(sub):
        raise DuplicateIndex(f"duplicate index in {sub}")
    return sub


def riesz_bounds(f: Frame, subset) -> RieszBounds:
    """Riesz bounds and epsilon of the vectors indexed by ``subset``."""
    sub = _validate_subset(f, subset)
    lmin, lmax = _subset_extremes(f.gram, np.array([sub]), f.tol.max_sweeps)
    eps = _epsilon(lmin, lmax, f.tol.rank_tol)
    return RieszBounds(sub, float(lmin[0]), float(lmax[0]), float(eps[0]))


@dataclass(frozen=True)
class RipReport:
    s: int
    epsilon_hat: float
    witness: tuple[int, ...]
    method: str
    subsets_checked: int
    delta_equivalent: float
    samples: int | None = None
    seed: int | None = None
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def outside_hypothesis(self) -> bool:
        """True when epsilon_hat >= 1, outside the 0 < eps < 1 RIP setting."""
        return not self.epsilon_hat < 1.0

    def to_json(self) -> dict:
        out = {
            "s": self.s,
            "epsilon_hat": _num(self.epsilon_hat),
            "witness": list(self.witness),
            "method": self.method,
            "subsets_checked": self.subsets_checked,
            "delta_equivalent": _num(self.delta_equivalent),
            "outside_hypothesis": self.outside_hypothesis,
        }
        if self.method == "randomized":
            out["samples"] = self.samples
            out["seed"] = self.seed
        return out

    @classmethod
    def from_json(cls, data: dict) -> "RipReport":
        return cls(
            s=int(data["s"]),
            epsilon_hat=_unnum(data["epsilon_hat"]),
            witness=tuple(int(i) for i in data["witness"]),
            method=str(data["method"]),
            subsets_checked=int(data["subsets_checked"]),
            delta_equivalent=_unnum(data.get("delta_equivalent", 0.0)),
            samples=data.get("samples"),
            seed=data.get("seed"),
        )


def _num(x: float):
    return "inf" if math.isinf(x) else float(x)


def _unnum(x) -> float:
    return float("inf") if x in ("inf", "Infinity") else float(x)


@dataclass
class _Sweep:
    """Running reduction over subset chunks (evaluated in rank order)."""

    best_eps: float = -1.0
    best_rank: int = -1
    best_subset: tuple = ()
    delta: float = 0.0
    lmin: float = math.inf
    lmax: float = -math.inf
    checked: int = 0

    def absorb(self, ranks, combos, lmin, lmax, rank_tol):
        eps = _epsilon(lmin, lmax, rank_tol)
        k = int(np.argmax(eps))  # first occurrence = smallest rank within the chunk
        if eps[k] > self.best_eps:
            self.best_eps = float(eps[k])
            self.best_rank = int(ranks[k])
            self.best_subset = tuple(int(i) for i in combos[k])
        self.delta = max(self.delta, float(np.max(_delta(lmin, lmax))))
        self.lmin = min(self.lmin, float(np.min(lmin)))
        self.lmax = max(self.lmax, float(np.max(lmax)))
        self.checked += len(ranks)


def sweep_subsets(f: Frame, s: int, ranks: np.ndarray) -> _Sweep:
    """Evaluate all subsets with the given (ascending) colex ranks."""
    gram = f.gram
    chunks = [ranks[i:i + CHUNK] for i in range(0, len(ranks), CHUNK)]

    def work(chunk):
        combos = colex_unrank(chunk, f.count, s)
        lmin, lmax = _subset_extremes(gram, combos, f.tol.max_sweeps)
        return chunk, combos, lmin, lmax

    acc = _Sweep()
    threads = thread_count()
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = map(work, chunks)
    for chunk, combos, lmin, lmax in results:
        acc.absorb(chunk, combos, lmin, lmax, f.tol.rank_tol)
    return acc


def _effective_s(f: Frame, s: int) -> int:
    if s < 1:
        raise ValueError("s must be at least 1")
    return min(int(s), f.count)


def rip_exhaustive(f: Frame, s: int, budget: int = DEFAULT_BUDGET) -> RipReport:
    """Exact RIP constant over all subsets of size <= s.

    Only subsets of size exactly s are evaluated: by eigenvalue interlacing a
    subset's epsilon never exceeds that of a superset.
    """
    s = _effective_s(f, s)
    total = math.comb(f.count, s)
    if total > budget:
        raise BudgetExceeded(
            f"C({f.count}, {s}) = {total} subsets exceeds the budget of {budget}; "
            "use rip_randomized for a lower bound")
    acc = sweep_subsets(f, s, np.arange(total, dtype=np.int64))
    return RipReport(s, acc.best_eps, acc.best_subset, "exhaustive", acc.checked, acc.delta,
                     extra={"lambda_min": acc.lmin, "lambda_max": acc.lmax})


def rip_randomized(f: Frame, s: int, samples: int, seed: int) -> RipReport:
    """Lower bound on the RIP constant from ``samples`` random subsets of size s.

    Distinct subsets are drawn by colex rank; when ``samples`` reaches
    C(M, s) every subset is visited and the result equals ``rip_exhaustive``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    s = _effective_s(f, s)
    total = math.comb(f.count, s)
    rng = np.random.default_rng(seed)
    if samples >= total:
        ranks = np.arange(total, dtype=np.int64)
    elif total < 2**62:
        ranks = np.sort(rng.choice(total, size=samples, replace=False)).astype(np.int64)
    else:
        raise BudgetExceeded(f"C({f.count}, {s}) is too large to rank subsets")
    acc = sweep_subsets(f, s, ranks)
    return RipReport(s, acc.best_eps, acc.best_subset, "randomized", acc.checked, acc.delta,
                     samples=samples, seed=seed,
                     extra={"lambda_min": acc.lmin, "lambda_max": acc.lmax})


# -- inequality checks -----------------------------------------------------

@dataclass(frozen=True)
class PartitionInequality:
    epsilon: float
    lhs: float
    mid: float
    rhs: float
    block_sum: float
    holds: bool


def check_partition_inequality(f: Frame, subset, blocks, coeffs, epsilon: float | None = None,
                               slack: float | None = None) -> PartitionInequality:
    """Evaluate block_sum/(1+eps)^2 <= ||sum a_i phi_i||^2 <= (1+eps)^2 block_sum.

    ``blocks`` partitions ``subset`` (frame indices) and ``coeffs`` is aligned
    with ``subset``.  ``epsilon`` defaults to the measured Riesz epsilon.
    """
    sub = _validate_subset(f, subset)
    blocks = [tuple(int(i) for i in b) for b in blocks]
    if any(len(b) == 0 for b in blocks):
        raise InvalidPartition("empty block")
    check_cover(blocks, sub)
    a = np.asarray(coeffs)
    if a.shape != (len(sub),):
        raise ValueError("coeffs must align with subset")
    eps = riesz_bounds(f, sub).epsilon if epsilon is None else float(epsilon)
    slack = 10 * f.tol.tol_eigen if slack is None else slack
    pos = {i: k for k, i in enumerate(sub)}
    mid = float(np.linalg.norm(f.columns(sub) @ a) ** 2)
    block_sum = 0.0
    for b in blocks:
        block_sum += float(np.linalg.norm(f.columns(b) @ a[[pos[i] for i in b]]) ** 2)
    lhs = block_sum / (1.0 + eps) ** 2
    rhs = (1.0 + eps) ** 2 * block_sum
    scale = max(mid, block_sum, np.finfo(float).tiny)
    holds = lhs <= mid + slack * scale and mid <= rhs + slack * scale
    return PartitionInequality(eps, lhs, mid, rhs, block_sum, bool(holds))


@dataclass(frozen=True)
class PowerBoundCheck:
    exponent: float
    min_eig: float
    max_eig: float
    lower: float
    upper: float
    holds: bool


def check_operator_power_bounds(f: Frame, epsilon: float, exponents,
                                slack: float | None = None) -> list[PowerBoundCheck]:
    """Spectral brackets (1+eps)^-|a| <= S^a <= (1+eps)^|a| on the span of ``f``.

    ``f`` must be an epsilon-Riesz basis for its span.  S^a is formed with
    ``spectral_power`` and its eigenvalues are read off on the span.
    """
    measured = riesz_bounds(f, range(f.count)).epsilon
    slack = 10 * f.tol.tol_eigen if slack is None else slack
    if not measured <= epsilon * (1 + slack) + slack:
        raise NotRieszBasis(f"measured epsilon {measured:.6g} exceeds supplied {epsilon:.6g}")
    s_op = f.frame_operator
    eig = sym_eigen(s_op, f.tol)
    lam = eig.eigenvalues
    span = eig.eigenvectors[:, lam > f.tol.rank_tol * lam[0]]
    out = []
    for a in exponents:
        a = float(a)
        power = spectral_power(s_op, a, tol=f.tol)
        restricted = np.conj(span.T) @ power @ span
        ev = sym_eigen(0.5 * (restricted + np.conj(restricted.T)), f.tol).eigenvalues
        lo, hi = (1.0 + epsilon) ** (-abs(a)), (1.0 + epsilon) ** abs(a)
        mn, mx = float(ev[-1]), float(ev[0])
        holds = mn >= lo * (1 - slack) and mx <= hi * (1 + slack)
        out.append(PowerBoundCheck(a, mn, mx, lo, hi, bool(holds)))
    return out
