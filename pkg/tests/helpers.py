"""Independent oracles built on numpy's LAPACK bindings and itertools."""

from itertools import combinations

import numpy as np


def riesz_epsilon_oracle(vectors, subset):
    v = vectors[:, list(subset)]
    lam = np.linalg.eigvalsh(np.conj(v.T) @ v)
    if lam[0] <= 1e-12 * lam[-1]:
        return np.inf
    return max(lam[-1] - 1.0, 1.0 / lam[0] - 1.0)


def rip_oracle(vectors, s):
    """Max epsilon over every subset of size 1..s, by brute force."""
    m = vectors.shape[1]
    best = 0.0
    for k in range(1, s + 1):
        for sub in combinations(range(m), k):
            best = max(best, riesz_epsilon_oracle(vectors, sub))
    return best


def random_hermitian(rng, n, complex_field=False):
    a = rng.standard_normal((n, n))
    if complex_field:
        a = a + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + np.conj(a.T))


def orth_basis(rng, n, k):
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return q
