"""Finite frames: operators, bounds, the canonical Parseval transform and
constructors for unit-norm tight frames.

Column ``i`` of ``Frame.vectors`` is the frame vector phi_i.  Inner products
are linear in the first argument, <x, y> = sum_k x_k conj(y_k), so the
analysis operator is ``vectors^H``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CountTooSmall, DidNotConverge, DimensionMismatch, NotSpanning
from .numerics import DEFAULT_TOL, Tolerances, as_matrix, spectral_power, sym_eigen


@dataclass(frozen=True)
class FrameBounds:
    lower: float
    upper: float

    @property
    def tight_ratio(self) -> float:
        if self.lower <= 0.0:
            return float("inf")
        return self.upper / self.lower


@dataclass(frozen=True, eq=False)
class Frame:
    """An ordered family of M vectors in dimension N, stored as an N x M array."""

    vectors: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        v = as_matrix(self.vectors)
        if v.shape[1] < 1:
            raise ValueError("a frame needs at least one vector")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def count(self) -> int:
        return self.vectors.shape[1]

    @property
    def field(self) -> str:
        return "complex" if np.iscomplexobj(self.vectors) else "real"

    @cached_property
    def gram(self) -> np.ndarray:
        g = np.conj(self.vectors.T) @ self.vectors
        return 0.5 * (g + np.conj(g.T))

    @cached_property
    def frame_operator(self) -> np.ndarray:
        s = self.vectors @ np.conj(self.vectors.T)
        return 0.5 * (s + np.conj(s.T))

    @cached_property
    def spectrum(self) -> np.ndarray:
        """Eigenvalues of the frame operator, descending."""
        return sym_eigen(self.frame_operator, self.tol).eigenvalues

    @cached_property
    def bounds(self) -> FrameBounds:
        lam = self.spectrum
        return FrameBounds(max(float(lam[-1]), 0.0), float(lam[0]))

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=0)

    def columns(self, indices) -> np.ndarray:
        return self.vectors[:, list(indices)]

    def with_vectors(self, vectors) -> "Frame":
        return Frame(vectors, self.tol)

    def to_json(self) -> dict:
        cols = []
        for col in self.vectors.T:
            if self.field == "complex":
                cols.append([[float(z.real), float(z.imag)] for z in col])
            else:
                cols.append([float(z) for z in col])
        return {"dim": self.dim, "field": self.field, "vectors": cols}

    @classmethod
    def from_json(cls, data: dict, tol: Tolerances = DEFAULT_TOL) -> "Frame":
        cols = data["vectors"]
        dim = int(data["dim"])
        if data.get("field", "real") == "complex":
            arr = np.array([[complex(re, im) for re, im in col] for col in cols], dtype=complex)
        else:
            arr = np.array(cols, dtype=float)
        arr = arr.reshape(len(cols), dim).T
        return cls(arr, tol)


def _vector(x, n: int) -> np.ndarray:
    x = as_matrix(x, ndim=1)
    if x.shape[0] != n:
        raise DimensionMismatch(f"expected length {n}, got {x.shape[0]}")
    return x


def analysis_apply(f: Frame, x) -> np.ndarray:
    """Frame coefficients (<x, phi_i>)_i."""
    return np.conj(f.vectors.T) @ _vector(x, f.dim)


def synthesis_apply(f: Frame, coeffs) -> np.ndarray:
    return f.vectors @ _vector(coeffs, f.count)


def frame_operator_apply(f: Frame, x) -> np.ndarray:
    """S x = sum_i <x, phi_i> phi_i."""
    return f.vectors @ (np.conj(f.vectors.T) @ _vector(x, f.dim))


def frame_bounds(f: Frame) -> FrameBounds:
    return f.bounds


def _require_spanning(f: Frame):
    b = f.bounds
    if b.upper <= 0.0 or b.lower <= f.tol.rank_tol * b.upper:
        raise NotSpanning(f"lower frame bound {b.lower:.3e} is zero; vectors do not span")


def canonical_parseval(f: Frame) -> Frame:
    """The Parseval frame {S^(-1/2) phi_i}."""
    _require_spanning(f)
    root = spectral_power(f.frame_operator, -0.5, tol=f.tol)
    return f.with_vectors(root @ f.vectors)


def reconstruct(f: Frame, coeffs) -> np.ndarray:
    """Invert the analysis map: x = sum_i c_i S^(-1) phi_i."""
    _require_spanning(f)
    inv = spectral_power(f.frame_operator, -1.0, tol=f.tol)
    return inv @ synthesis_apply(f, coeffs)


def orthonormal_frame(dim: int, field: str = "real") -> Frame:
    return Frame(np.eye(dim, dtype=complex if field == "complex" else float))


def _check_unit_tight(f: Frame) -> tuple[float, float]:
    norm_resid = float(np.max(np.abs(f.norms - 1.0)))
    tight_resid = f.bounds.tight_ratio - 1.0
    return norm_resid, tight_resid


def make_harmonic_frame(dim: int, count: int, field: str = "real",
                        tol: Tolerances = DEFAULT_TOL) -> Frame:
    """Deterministic unit-norm tight frame of ``count`` vectors in dimension ``dim``.

    The complex variant takes the first ``dim`` rows of the ``count``-point DFT
    matrix scaled by 1/sqrt(dim).  The real variant uses cosine/sine row pairs
    at frequencies 1, 2, ... plus a constant row when ``dim`` is odd (and a
    constant and alternating row when ``dim == count`` is even).  Tightness
    and unit norms are checked after construction.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    if count < dim:
        raise CountTooSmall(f"need count >= dim, got {count} < {dim}")
    k = np.arange(count)
    if field == "complex":
        rows = np.exp(2j * np.pi * np.outer(np.arange(dim), k) / count) / np.sqrt(dim)
    elif field == "real":
        rows = []
        pair = np.sqrt(2.0 / dim)
        single = 1.0 / np.sqrt(dim)
        if dim % 2 == 1:
            rows.append(np.full(count, single))
            freqs = range(1, (dim - 1) // 2 + 1)
        elif dim == count:
            rows.append(np.full(count, single))
            rows.append(single * (-1.0) ** k)
            freqs = range(1, (dim - 2) // 2 + 1)
        else:
            freqs = range(1, dim // 2 + 1)
        for j in freqs:
            rows.append(pair * np.cos(2 * np.pi * j * k / count))
            rows.append(pair * np.sin(2 * np.pi * j * k / count))
        rows = np.array(rows)
    else:
        raise ValueError(f"unknown field {field!r}")
    f = Frame(rows, tol)
    norm_resid, tight_resid = _check_unit_tight(f)
    if norm_resid > 10 * tol.tol_eigen or tight_resid > 10 * tol.tol_eigen:
        raise DidNotConverge(
            f"harmonic construction ({dim}, {count}) is not unit-norm tight", best=f)
    return f


def make_random_unit_tight_frame(dim: int, count: int, seed: int, iters: int | None = None,
                                 tol: float = 1e-10, field: str = "real",
                                 tolerances: Tolerances = DEFAULT_TOL, restarts: int = 4) -> Frame:
    """Seeded unit-norm tight frame by alternating projection.

    Starts from a Gaussian matrix and alternates column normalisation with
    spectral tightening V <- sqrt(M/N) S^(-1/2) V until both the norm and the
    tightness residual are below ``tol``. The iteration can stall at a
    non-tight fixed point; each of the ``restarts`` extra attempts then draws
    a fresh Gaussian start from the same generator. ``iters`` is the budget
    per attempt.
    """
    if count < dim:
        raise CountTooSmall(f"need count >= dim, got {count} < {dim}")
    if field not in ("real", "complex"):
        raise ValueError(f"unknown field {field!r}")
    rng = np.random.default_rng(seed)
    iters = max(500, 10 * dim * count) if iters is None else max(iters, 1)
    scale = np.sqrt(count / dim)
    best, best_resid = None, np.inf
    for _ in range(restarts + 1):
        v = rng.standard_normal((dim, count))
        if field == "complex":
            v = v + 1j * rng.standard_normal((dim, count))
        for _ in range(iters):
            v = v / np.linalg.norm(v, axis=0)
            s = v @ np.conj(v.T)
            # LAPACK inside the loop for speed; the returned frame is re-verified
            # with the Jacobi-based bounds below.
            lam, q = np.linalg.eigh(0.5 * (s + np.conj(s.T)))
            if lam[0] <= tolerances.rank_tol * lam[-1]:
                v = v + 1e-3 * rng.standard_normal(v.shape)
                continue
            if lam[-1] / lam[0] - 1.0 < tol:
                f = Frame(v, tolerances)
                norm_resid, tight_resid = _check_unit_tight(f)
                resid = max(norm_resid, tight_resid)
                if resid < best_resid:
                    best, best_resid = f, resid
                if norm_resid < tol and tight_resid < tol:
                    return f
            v = scale * ((q / np.sqrt(lam)) @ (np.conj(q.T) @ v))
    if best is None:
        best = Frame(v / np.linalg.norm(v, axis=0), tolerances)
        best_resid = max(_check_unit_tight(best))
    raise DidNotConverge(
        f"tightening did not reach tol={tol:g} in {restarts + 1} attempts of {iters} iterations "
        f"(best residual {best_resid:.3e})", best=best)
