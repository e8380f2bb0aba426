"""Real direct-sum structure of completely symmetric states: detection of
local-range splittings and recursive decomposition into irreducible parts."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .states import (RANK_TOL, DensityMatrix, apply_rilo, is_cs, rank_of,
                     single_party_marginal)
from .tensors import kron_power, project_symmetric

# commutant fallback is only attempted below this total dimension
_FALLBACK_LIMIT = 512


@dataclass
class Reduction:
    """A direct-sum split: an invertible real local basis change S (orthogonal
    in the generic case), a partition of the new local indices into blocks,
    and one completely symmetric component per block.

    Reconstruction: rho = sum_k E_k^(x d) component_k (E_k^(x d))^T with
    E_k = S[:, block_k].
    """
    basis: np.ndarray            # N x N, invertible, columns grouped by block
    blocks: list                 # partition of rotated local indices
    components: list             # DensityMatrix per block
    orthogonal: bool = True

    def embeddings(self):
        return [self.basis[:, blk] for blk in self.blocks]

    def reconstruct(self, parties):
        n = self.basis.shape[0] ** parties
        out = np.zeros((n, n))
        for E, comp in zip(self.embeddings(), self.components):
            Ed = kron_power(E, parties)
            out = out + Ed @ comp.matrix @ Ed.T
        return out


def _occupancy(tens, N, tol):
    """R[i, j] = largest |entry| whose slots contain both i and j.  Complete
    symmetry makes every slot pair equivalent to the first two."""
    S = np.abs(tens).reshape(N, N, -1).max(axis=2)
    return S > tol


def _components_of(adj):
    """Connected components of an undirected boolean adjacency matrix."""
    n = adj.shape[0]
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        stack, comp = [s], []
        seen[s] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in range(n):
                if not seen[u] and (adj[v, u] or adj[u, v]):
                    seen[u] = True
                    stack.append(u)
        comps.append(sorted(comp))
    return comps


def _extract_block(mat, block, N, d):
    """Restrict a d-party matrix to the sub-product-space spanned by the
    listed local indices."""
    ids = [sum(i * N ** (d - 1 - k) for k, i in enumerate(tup))
           for tup in itertools.product(block, repeat=d)]
    return mat[np.ix_(ids, ids)]


def _components_sound(rho, components, d):
    """Extraction through an ill-conditioned frame can plant junk eigenvalues
    just above the rank cutoff, with eigenvectors escaping the symmetric
    subspace.  Require component ranks to add up to the parent rank and every
    component range vector to stay symmetric; otherwise the split is noise."""
    total = 0
    for comp in components:
        mat = np.real((comp.matrix + comp.matrix.T) / 2.0)
        w, V = np.linalg.eigh(mat)
        top = float(w.max(initial=0.0))
        live = [i for i in range(len(w)) if w[i] > RANK_TOL * max(top, 0.0)]
        total += len(live)
        if comp.dim == 1:
            continue
        for i in live:
            v = V[:, i]
            p = project_symmetric(v, d, comp.dim)
            if np.linalg.norm(v - p) > 1e-9:
                return False
    return total == rank_of(rho)


def _split_from_basis(rho, S, tol, orthogonal):
    """Try to read a direct-sum structure off rho in the frame S (columns are
    the new local basis).  Returns a Reduction or None."""
    d, N = rho.parties, rho.dim
    Sinv = np.linalg.inv(S)
    rot = apply_rilo(rho, Sinv)
    tens = np.real(rot.tensor_view())
    scale = max(float(np.abs(tens).max(initial=0.0)), 1e-300)
    adj = _occupancy(tens, N, tol * scale)
    # indices carrying no weight at all (local kernel) are dropped from blocks
    diag = np.array([np.abs(tens).reshape(N, -1)[i].max(initial=0.0)
                     for i in range(N)])
    live = [i for i in range(N) if diag[i] > tol * scale]
    live_set = set(live)
    comps = [[i for i in c if i in live_set]
             for c in _components_of(adj) if set(c) & live_set]
    if len(comps) <= 1:
        return None
    components = []
    for blk in comps:
        sub = _extract_block(rot.matrix, blk, N, d)
        components.append(DensityMatrix(sub, (len(blk),) * d, check=False))
    red = Reduction(basis=S, blocks=comps, components=components,
                    orthogonal=orthogonal)
    back = red.reconstruct(d)
    err = float(np.abs(back - rho.matrix).max(initial=0.0))
    if err > 1e-8 * max(1.0, float(np.abs(rho.matrix).max(initial=0.0))):
        return None
    for comp in components:
        ok, _ = is_cs(comp, tol=1e-7)
        if not ok:
            return None
    if not _components_sound(rho, components, d):
        return None
    return red


def _commutant_basis(rho):
    """Real basis of {X : (X ox I^(d-1)) rho = rho (X^T ox I^(d-1))}.

    The space is closed under squaring, so spectral projectors of a generic
    element supply direct-sum idempotents; it always contains the identity.
    """
    d, N = rho.parties, rho.dim
    mat = np.real(rho.matrix)
    tens = mat.reshape((N, -1))          # first ket slot split off
    cols = []
    for a in range(N):
        for b in range(N):
            X = np.zeros((N, N))
            X[a, b] = 1.0
            # (X ox I) rho: acts on the first ket slot
            left = np.zeros_like(mat)
            left.reshape(N, -1)[a, :] = tens[b, :]
            # rho (X^T ox I) transposed equals (X ox I) rho^T
            rightT = np.zeros_like(mat)
            rightT.reshape(N, -1)[a, :] = mat.T.reshape(N, -1)[b, :]
            cols.append((left - rightT.T).reshape(-1))
    A = np.column_stack(cols)
    # economy QR drops the n^2-row factor while keeping the singular values,
    # so the null-space SVD runs on an N^2 x N^2 triangle
    R = np.linalg.qr(A, mode="r")
    ns = scipy.linalg.null_space(R, rcond=1e-10)
    return [ns[:, k].reshape(N, N) for k in range(ns.shape[1])]


def _fallback_reduction(rho, tol):
    """Direct-sum detection through the local commutant-like space; catches
    splits the marginal eigenbasis misses (degenerate or oblique cases)."""
    N = rho.dim
    if rho.n > _FALLBACK_LIMIT:
        return None
    basis = _commutant_basis(rho)
    if len(basis) <= 1:
        return None
    rng = np.random.default_rng(0)
    for _ in range(4):
        coeff = rng.standard_normal(len(basis))
        X = sum(c * B for c, B in zip(coeff, basis))
        w, V = np.linalg.eig(X)
        if np.abs(w.imag).max(initial=0.0) > 1e-8 * max(1.0, np.abs(w).max()):
            continue
        w = w.real
        order = np.argsort(w)
        w, V = w[order], np.real(V[:, order])
        spread = max(float(w[-1] - w[0]), 1e-300)
        gaps = np.diff(w)
        cut = np.where(gaps > 1e-6 * spread)[0]
        if len(cut) == 0:
            continue
        # group eigenvectors into clusters; orthonormalize inside each
        bounds = [0] + [int(c) + 1 for c in cut] + [N]
        cols, blocks, orth = [], [], True
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            Q, _ = np.linalg.qr(V[:, lo:hi])
            blocks.append(list(range(lo, hi)))
            cols.append(Q)
        S = np.column_stack(cols)
        if np.linalg.cond(S) > 1e8:
            continue
        orth = bool(np.abs(S.T @ S - np.eye(N)).max(initial=0.0) < 1e-8)
        red = _split_from_basis(rho, S, tol, orthogonal=orth)
        if red is not None:
            return red
    return None


def find_reduction(rho, tol=1e-10):
    """Detect a real direct-sum split of a completely symmetric state.

    Primary method: diagonalize the single-party marginal and take connected
    components of the support graph (indices joined when some coefficient
    entry couples them).  A commutant-based fallback covers degenerate
    marginal spectra.  Returns a Reduction, or None when irreducible.
    """
    ok, viol = is_cs(rho, tol=1e-7)
    if not ok:
        raise ValueError(f"input is not completely symmetric (violation {viol:.3e})")
    m = single_party_marginal(rho).matrix
    w, V = np.linalg.eigh(np.real((m + m.conj().T) / 2.0))
    Q = np.real(V[:, ::-1])  # descending eigenvalue order
    red = _split_from_basis(rho, Q, tol, orthogonal=True)
    if red is not None:
        return red
    return _fallback_reduction(rho, tol)


def decompose_direct_sum(rho, tol=1e-10):
    """Recursively split until every component is irreducible over the reals.

    Returns a list of (embedding, component): rho equals the sum of the
    embedded components within 1e-10 relative Frobenius error.
    """
    red = find_reduction(rho, tol)
    if red is None:
        return [(np.eye(rho.dim), rho)]
    out = []
    for E, comp in zip(red.embeddings(), red.components):
        for E2, piece in decompose_direct_sum(comp, tol):
            out.append((E @ E2, piece))
    d = rho.parties
    n = rho.n
    back = np.zeros((n, n))
    for E, piece in out:
        Ed = kron_power(E, d)
        back = back + Ed @ piece.matrix @ Ed.T
    err = np.linalg.norm(back - np.real(rho.matrix))
    if err > 1e-10 * max(1.0, np.linalg.norm(rho.matrix)):
        raise RuntimeError(f"direct-sum reconstruction failed (error {err:.3e})")
    return out
