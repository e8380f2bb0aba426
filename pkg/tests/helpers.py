"""Shared constructions for the test suite."""

import numpy as np

from cssep import DensityMatrix, kron_power


def product_mixture(rng, parties, dim, terms, supported=False):
    """Random mixture of symmetric product projectors.

    Returns (state, local_vectors); with supported=True the mixture is
    redrawn until the single-party marginal has full rank.
    """
    while True:
        mat = np.zeros((dim ** parties, dim ** parties))
        xs = []
        for _ in range(terms):
            x = rng.standard_normal(dim)
            x /= np.linalg.norm(x)
            xs.append(x)
            w = kron_power(x, parties)
            mat += rng.uniform(0.2, 1.0) * np.outer(w, w)
        rho = DensityMatrix(mat, (dim,) * parties)
        if not supported:
            return rho, xs
        marg = sum(np.outer(x, x) for x in xs)
        if np.linalg.matrix_rank(marg, tol=1e-8) == dim:
            return rho, xs


def random_orthogonal(rng, n):
    """Orthogonal matrix from the QR factorization of a Gaussian."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def planted_direct_sum(rng, parties, block_dims, block_terms):
    """Product mixture supported on orthogonal local subspaces.

    Returns (state, Q) where the state is block diagonal after rotating
    every party by Q.T.
    """
    total = sum(block_dims)
    Q = random_orthogonal(rng, total)
    mat = np.zeros((total ** parties, total ** parties))
    offset = 0
    for nb, k in zip(block_dims, block_terms):
        E = Q[:, offset:offset + nb]
        offset += nb
        for _ in range(k):
            x = E @ rng.standard_normal(nb)
            x /= np.linalg.norm(x)
            w = kron_power(x, parties)
            mat += rng.uniform(0.2, 1.0) * np.outer(w, w)
    return DensityMatrix(mat, (total,) * parties), Q
