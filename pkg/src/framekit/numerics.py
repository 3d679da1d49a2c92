"""Dense linear-algebra substrate.

Everything here works on plain numpy arrays (real or complex).  The
eigensolver is a cyclic Jacobi iteration that is vectorised over a leading
batch axis, so thousands of small Gram matrices can be diagonalised in one
call; the SVD and the spectral matrix functions are built on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DidNotConverge, NegativeEigenvalue, NonFiniteInput, NotSquare, NotSymmetric

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances; all are relative to the largest magnitude involved."""

    tol_sym: float = 1e-10
    tol_eigen: float = 1e-10
    rank_tol: float = 1e-12
    tol_iso: float = 1e-10
    max_sweeps: int = 60

    def replace(self, **changes) -> "Tolerances":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update({k: v for k, v in changes.items() if v is not None})
        return Tolerances(**fields)


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class SymmetricEigen:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # orthonormal columns, column k <-> eigenvalues[k]


def as_matrix(a, ndim: int = 2) -> np.ndarray:
    """Convert to a float or complex array and reject NaN/Inf."""
    arr = np.asarray(a)
    arr = arr.astype(complex if arr.dtype.kind == "c" else float)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput("non-finite entries")
    return arr


def is_complex(a: np.ndarray) -> bool:
    return np.iscomplexobj(a)


def _check_hermitian(a: np.ndarray, tol: Tolerances) -> np.ndarray:
    if a.shape[-1] != a.shape[-2]:
        raise NotSquare(f"matrix of shape {a.shape[-2:]} is not square")
    ah = np.conj(np.swapaxes(a, -1, -2))
    resid = np.linalg.norm(a - ah, axis=(-2, -1))
    scale = np.linalg.norm(a, axis=(-2, -1))
    if np.any(resid > tol.tol_sym * scale):
        raise NotSymmetric(f"asymmetry {float(np.max(resid)):.3e} exceeds tolerance")
    return 0.5 * (a + ah)


def _jacobi(a: np.ndarray, max_sweeps: int, want_vectors: bool = True):
    """Cyclic Jacobi on a stack of Hermitian matrices of shape (B, n, n).

    Returns unsorted eigenvalues (B, n) and eigenvectors (B, n, n) or None.
    Converged matrices are frozen, and an inactive rotation is an exact
    identity, so each result depends only on its own input matrix and not on
    the rest of the batch.
    """
    a = a.copy()
    nb, n, _ = a.shape
    cplx = np.iscomplexobj(a)
    v = np.broadcast_to(np.eye(n, dtype=a.dtype), a.shape).copy() if want_vectors else None
    scale = np.linalg.norm(a, axis=(1, 2))
    stop = n * _EPS * scale
    offmask = ~np.eye(n, dtype=bool)
    tiny = np.finfo(float).tiny
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1)) if n > 1 else np.zeros(nb)
        live = off > stop
        if not np.any(live):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                mag = np.abs(apq)
                active = live & (mag > np.maximum(_EPS * _EPS * scale, tiny))
                if not np.any(active):
                    continue
                safe = np.where(active, mag, 1.0)
                phase = np.where(active, apq / safe, 1.0)
                theta = (a[:, q, q].real - a[:, p, p].real) / (2.0 * safe)
                big = np.abs(theta) > 1e150
                theta_c = np.where(big, 1.0, theta)
                sgn = np.where(theta_c >= 0, 1.0, -1.0)
                t = sgn / (np.abs(theta_c) + np.sqrt(theta_c * theta_c + 1.0))
                t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                c = np.where(active, c, 1.0)
                s = np.where(active, s, 0.0)
                # 2x2 unitary U = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                ph = np.conj(phase) if cplx else phase
                u00, u01 = c, s
                u10, u11 = -s * ph, c * ph
                cp = a[:, :, p].copy()
                cq = a[:, :, q]
                a[:, :, p] = cp * u00[:, None] + cq * u10[:, None]
                a[:, :, q] = cp * u01[:, None] + cq * u11[:, None]
                rp = a[:, p, :].copy()
                rq = a[:, q, :]
                if cplx:
                    a[:, p, :] = np.conj(u00)[:, None] * rp + np.conj(u10)[:, None] * rq
                    a[:, q, :] = np.conj(u01)[:, None] * rp + np.conj(u11)[:, None] * rq
                else:
                    a[:, p, :] = u00[:, None] * rp + u10[:, None] * rq
                    a[:, q, :] = u01[:, None] * rp + u11[:, None] * rq
                a[active, p, q] = 0.0
                a[active, q, p] = 0.0
                if v is not None:
                    vp = v[:, :, p].copy()
                    vq = v[:, :, q]
                    v[:, :, p] = vp * u00[:, None] + vq * u10[:, None]
                    v[:, :, q] = vp * u01[:, None] + vq * u11[:, None]
    else:
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1)) if n > 1 else np.zeros(nb)
        if np.any(off > stop):
            worst = float(np.max(off / np.where(scale > 0, scale, 1.0)))
            raise DidNotConverge(f"Jacobi left relative off-diagonal mass {worst:.3e} "
                                 f"after {max_sweeps} sweeps", best=a)
    evals = np.real(np.diagonal(a, axis1=1, axis2=2)).copy()
    return evals, v


def eigvalsh_batch(stack, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Descending eigenvalues of a (B, n, n) stack of Hermitian matrices."""
    stack = np.asarray(stack)
    if stack.ndim != 3:
        raise ValueError("expected a (B, n, n) stack")
    herm = _check_hermitian(stack, tol)
    if stack.shape[0] == 0:
        return np.zeros((0, stack.shape[1]))
    evals, _ = _jacobi(herm, tol.max_sweeps, want_vectors=False)
    return -np.sort(-evals, axis=1)


def sym_eigen(a, tol: Tolerances = DEFAULT_TOL) -> SymmetricEigen:
    """Eigendecomposition of a symmetric/Hermitian matrix, eigenvalues descending."""
    a = as_matrix(a)
    herm = _check_hermitian(a, tol)
    evals, vecs = _jacobi(herm[None], tol.max_sweeps)
    order = np.argsort(-evals[0], kind="stable")
    return SymmetricEigen(evals[0][order], vecs[0][:, order])


def orthonormalize(vectors, rank_tol: float = DEFAULT_TOL.rank_tol):
    """Pivoted Gram-Schmidt with one reorthogonalisation pass.

    At each step the remaining column with the largest residual norm is
    taken.  Stops once every residual is below ``rank_tol`` times the largest
    input column norm.  Returns ``(basis, pivots)``.
    """
    x = as_matrix(vectors)
    n, m = x.shape
    resid = x.copy()
    norms0 = np.linalg.norm(x, axis=0)
    ref = norms0.max() if m else 0.0
    basis = np.zeros((n, 0), dtype=x.dtype)
    pivots: list[int] = []
    remaining = list(range(m))
    while remaining and basis.shape[1] < n:
        rn = np.linalg.norm(resid[:, remaining], axis=0)
        k = int(np.argmax(rn))
        if ref == 0.0 or rn[k] <= rank_tol * ref:
            break
        j = remaining.pop(k)
        w = x[:, j].copy()
        for _ in range(2):
            w = w - basis @ (np.conj(basis.T) @ w)
        nw = np.linalg.norm(w)
        if nw <= rank_tol * ref:
            continue
        w = w / nw
        basis = np.column_stack([basis, w])
        pivots.append(j)
        resid = resid - np.outer(w, np.conj(w) @ resid)
    return basis, pivots


def _complete_basis(u: np.ndarray, n: int) -> np.ndarray:
    """Extend orthonormal columns ``u`` to ``n`` orthonormal columns."""
    basis = u
    for e in np.eye(n, dtype=u.dtype).T:
        if basis.shape[1] >= n:
            break
        w = e.copy()
        for _ in range(2):
            w = w - basis @ (np.conj(basis.T) @ w)
        nw = np.linalg.norm(w)
        if nw > 1e-8:
            basis = np.column_stack([basis, w / nw])
    return basis


def svd(a, tol: Tolerances = DEFAULT_TOL):
    """Thin SVD ``a = U diag(s) V^H`` computed from the smaller Gram matrix.

    Returns ``(U, s, V)`` with k = min(rows, cols) columns each and ``s``
    descending.
    """
    a = as_matrix(a)
    m, n = a.shape
    if n > m:
        v, s, u = svd(np.conj(a.T), tol)
        return u, s, v
    if n == 0:
        return np.zeros((m, 0), a.dtype), np.zeros(0), np.zeros((0, 0), a.dtype)
    eig = sym_eigen(np.conj(a.T) @ a, tol)
    s = np.sqrt(np.clip(eig.eigenvalues, 0.0, None))
    v = eig.eigenvectors
    smax = s[0] if s.size else 0.0
    keep = s > tol.rank_tol * smax if smax > 0 else np.zeros(n, dtype=bool)
    basis = np.zeros((m, 0), dtype=np.result_type(a.dtype, v.dtype))
    for k in range(n):
        if not keep[k]:
            break
        w = (a @ v[:, k]) / s[k]
        for _ in range(2):
            w = w - basis @ (np.conj(basis.T) @ w)
        w = w / np.linalg.norm(w)
        basis = np.column_stack([basis, w])
    u = _complete_basis(basis, m)[:, :n]
    return u, s, v


def spectral_power(a, exponent: float, rank_tol: float | None = None,
                   tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """``a**exponent`` for a PSD matrix, taken on its range.

    Eigenvalues below ``rank_tol * lambda_max`` are mapped to zero, so a
    negative exponent gives the pseudo-power and exponent 0 gives the
    orthogonal projector onto the range.
    """
    rank_tol = tol.rank_tol if rank_tol is None else rank_tol
    eig = sym_eigen(a, tol)
    lam = eig.eigenvalues
    lmax = max(float(lam[0]), 0.0) if lam.size else 0.0
    if lam.size and lam[-1] < -tol.tol_sym * float(np.max(np.abs(lam))):
        raise NegativeEigenvalue(f"eigenvalue {lam[-1]:.3e} below zero")
    keep = lam > rank_tol * lmax if lmax > 0 else np.zeros(lam.shape, dtype=bool)
    f = np.zeros_like(lam)
    f[keep] = lam[keep] ** exponent
    q = eig.eigenvectors
    out = (q * f) @ np.conj(q.T)
    return 0.5 * (out + np.conj(out.T))
