"""Density matrices with party bookkeeping: complete-symmetry checks,
partial trace/transpose, PPT, rank/range/kernel, support tests, real
invertible local transforms, and bipartition regrouping."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .tensors import kron_power

RANK_TOL = 1e-10   # eigenvalue cutoff relative to the largest eigenvalue
PSD_TOL = 1e-10    # relative tolerance for negative eigenvalues
HERM_TOL = 1e-12


@dataclass
class Subspace:
    """Orthonormal basis of a subspace together with the rank tolerance
    that produced it."""
    ambient_dim: int
    basis: np.ndarray      # ambient_dim x k, orthonormal columns
    tol: float

    @property
    def dim(self):
        return self.basis.shape[1]

    def project(self, v):
        return self.basis @ (self.basis.conj().T @ v)

    def residual(self, v):
        """Norm of the component of v outside the subspace."""
        v = np.asarray(v, dtype=complex)
        return float(np.linalg.norm(v - self.project(v)))


class DensityMatrix:
    """Hermitian PSD operator on a tensor product of finite local spaces.

    dims is one local dimension per party; matrices are stored dense.
    Construction verifies hermiticity and positivity (small negative
    eigenvalues within the PSD tolerance are clamped to zero).
    """

    def __init__(self, matrix, dims, trace_one=False, check=True,
                 psd_tol=PSD_TOL):
        mat = np.asarray(matrix)
        if np.iscomplexobj(mat) and np.abs(mat.imag).max(initial=0.0) == 0.0:
            mat = mat.real
        self.dims = tuple(int(n) for n in dims)
        n = 1
        for m in self.dims:
            n *= m
        if mat.shape != (n, n):
            raise ValueError(f"matrix shape {mat.shape} does not match dims {self.dims}")
        if check:
            scale = max(1.0, float(np.abs(mat).max(initial=0.0)))
            herm = float(np.abs(mat - mat.conj().T).max(initial=0.0))
            if herm > HERM_TOL * scale:
                raise ValueError(f"matrix is not Hermitian (deviation {herm:.3e})")
            mat = (mat + mat.conj().T) / 2.0
            w, V = np.linalg.eigh(mat)
            lam_max = max(float(w[-1]), 0.0)
            floor = -psd_tol * max(lam_max, 1e-300)
            if float(w[0]) < floor:
                raise ValueError(
                    f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})")
            if float(w[0]) < 0.0:
                w = np.clip(w, 0.0, None)
                mat = (V * w) @ V.conj().T
                mat = (mat + mat.conj().T) / 2.0
            if trace_one and abs(float(np.real(np.trace(mat))) - 1.0) > 1e-12:
                raise ValueError("trace differs from 1")
        self.matrix = mat
        self.trace_one = bool(trace_one)

    @property
    def parties(self):
        return len(self.dims)

    @property
    def dim(self):
        """Uniform local dimension; raises when parties differ."""
        if len(set(self.dims)) != 1:
            raise ValueError("local dimensions are not uniform")
        return self.dims[0]

    @property
    def n(self):
        return self.matrix.shape[0]

    def trace(self):
        return float(np.real(np.trace(self.matrix)))

    def normalized(self):
        t = self.trace()
        if t <= 0:
            raise ValueError("nonpositive trace")
        return DensityMatrix(self.matrix / t, self.dims, trace_one=True,
                             check=False)

    def tensor_view(self):
        """Reshape to 2*parties axes: ket slots first, then bra slots."""
        return self.matrix.reshape(self.dims + self.dims)


def is_cs(rho, tol=1e-8, dims=None):
    """Complete-symmetry test: all coefficient entries real within tol and
    invariant (within tol) under each adjacent transposition of the 2d
    slots.  Returns (verdict, largest violation).

    Accepts a DensityMatrix, or a plain Hermitian matrix together with
    explicit dims (so non-PSD operators can be tested too)."""
    if hasattr(rho, "tensor_view"):
        d = rho.parties
        tens = rho.tensor_view()
    else:
        if dims is None:
            raise ValueError("dims required for a plain matrix")
        dims = tuple(int(n) for n in dims)
        d = len(dims)
        tens = np.asarray(rho).reshape(dims + dims)
    viol = float(np.abs(np.imag(tens)).max(initial=0.0))
    tens = np.real(tens)
    for k in range(2 * d - 1):
        dev = float(np.abs(np.swapaxes(tens, k, k + 1) - tens).max(initial=0.0))
        viol = max(viol, dev)
    return viol <= tol, viol


def partial_trace(rho, traced):
    """Trace out the 0-based parties in `traced`; returns a DensityMatrix
    on the remaining parties."""
    d = rho.parties
    traced = sorted(set(int(k) for k in traced))
    if any(k < 0 or k >= d for k in traced):
        raise ValueError("party index out of range")
    if len(traced) == d:
        raise ValueError("cannot trace out every party")
    tens = rho.tensor_view()
    keep = [k for k in range(d) if k not in traced]
    # tracing highest-indexed parties first keeps lower axis positions stable
    for k in reversed(traced):
        cur = tens.ndim // 2
        tens = np.trace(tens, axis1=k, axis2=k + cur)
    new_dims = tuple(rho.dims[k] for k in keep)
    n = 1
    for m in new_dims:
        n *= m
    return DensityMatrix(tens.reshape(n, n), new_dims, check=False)


def partial_transpose(rho, parties_t):
    """Transpose the listed 0-based parties; returns a plain ndarray
    (the result need not be PSD)."""
    d = rho.parties
    parties_t = set(int(k) for k in parties_t)
    if any(k < 0 or k >= d for k in parties_t):
        raise ValueError("party index out of range")
    tens = rho.tensor_view()
    axes = list(range(2 * d))
    for k in parties_t:
        axes[k], axes[k + d] = axes[k + d], axes[k]
    return tens.transpose(axes).reshape(rho.matrix.shape)


def ppt_min_eigenvalue(rho):
    """Smallest eigenvalue over all single-party partial transposes."""
    vals = []
    for k in range(rho.parties):
        pt = partial_transpose(rho, {k})
        vals.append(float(np.linalg.eigvalsh((pt + pt.conj().T) / 2.0)[0]))
    return min(vals)


def is_ppt(rho, tol=PSD_TOL):
    """True iff every single-party partial transpose is PSD within
    tol * (largest eigenvalue of rho)."""
    lam_max = float(np.linalg.eigvalsh(rho.matrix)[-1])
    return ppt_min_eigenvalue(rho) >= -tol * max(lam_max, 1e-300)


def apply_rilo(rho, A, check=False):
    """Apply the real invertible local operator A to every party:
    A^(x d) rho A^(x d)^T.  Output is unnormalized."""
    A = np.asarray(A, dtype=float)
    N = rho.dim
    if A.shape != (N, N):
        raise ValueError("operator shape does not match the local dimension")
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= 0 or sv[0] / sv[-1] > 1e12:
        raise ValueError("operator is numerically singular (condition > 1e12)")
    B = kron_power(A, rho.parties)
    out = B @ rho.matrix @ B.T
    return DensityMatrix(out, rho.dims, check=check)


def range_kernel(rho, tol=RANK_TOL):
    """Eigenvalue-based splitting into range and kernel.

    rank = number of eigenvalues above tol * (largest eigenvalue); range and
    kernel bases are orthonormal eigenvector blocks.
    """
    mat = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho)
    mat = (mat + mat.conj().T) / 2.0
    w, V = np.linalg.eigh(mat)
    w = w[::-1]
    V = V[:, ::-1]
    lam_max = max(float(w[0]), 0.0)
    rank = int(np.sum(w > tol * max(lam_max, 1e-300)))
    n = mat.shape[0]
    rng = Subspace(n, V[:, :rank], tol)
    ker = Subspace(n, V[:, rank:], tol)
    return rng, ker, rank


def rank_of(mat, tol=RANK_TOL):
    """Numerical rank of a Hermitian matrix at the relative tolerance."""
    mat = np.asarray(mat.matrix if isinstance(mat, DensityMatrix) else mat)
    w = np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)
    top = float(np.abs(w).max(initial=0.0))
    return int(np.sum(np.abs(w) > tol * max(top, 1e-300)))


def single_party_marginal(rho, party=0):
    """Partial trace onto one party."""
    others = [k for k in range(rho.parties) if k != party]
    return partial_trace(rho, others)


def is_supported(rho, tol=RANK_TOL):
    """True iff the single-party marginal has full local rank."""
    m = single_party_marginal(rho)
    return rank_of(m.matrix, tol) == rho.dims[0]


def marginal_equality(rho):
    """Diagnostic: largest deviation between single-party marginals
    (all coincide for completely symmetric states)."""
    m0 = single_party_marginal(rho, 0).matrix
    dev = 0.0
    for k in range(1, rho.parties):
        mk = single_party_marginal(rho, k).matrix
        dev = max(dev, float(np.abs(mk - m0).max(initial=0.0)))
    return dev


def bipartition_view(rho, A):
    """Regroup parties into the ordered pair (A, complement); same matrix,
    bipartite bookkeeping with local dims (prod_A, prod_rest)."""
    d = rho.parties
    A = sorted(set(int(k) for k in A))
    if not A or len(A) >= d or any(k < 0 or k >= d for k in A):
        raise ValueError("A must be a proper nonempty subset of the parties")
    rest = [k for k in range(d) if k not in A]
    order = A + rest
    tens = rho.tensor_view()
    perm = order + [k + d for k in order]
    tens = tens.transpose(perm)
    dA = 1
    for k in A:
        dA *= rho.dims[k]
    dB = rho.n // dA
    return DensityMatrix(tens.reshape(rho.n, rho.n), (dA, dB), check=False)


def restrict_to_support(rho, tol=RANK_TOL):
    """Rotate-and-slice an unsupported state onto its local support.

    Returns (restricted DensityMatrix with local dim r, support basis B of
    shape N x r) with rho == B^(x d) restricted B^(x d)^T up to tol.
    """
    d = rho.parties
    N = rho.dim
    m = single_party_marginal(rho).matrix
    w, V = np.linalg.eigh((m + m.conj().T) / 2.0)
    w = w[::-1]
    V = np.real(V[:, ::-1])
    lam_max = max(float(w[0]), 0.0)
    r = int(np.sum(w > tol * max(lam_max, 1e-300)))
    if r == N:
        return rho, np.eye(N)
    B = V[:, :r]
    Bd = kron_power(B, d)
    small = Bd.T @ rho.matrix @ Bd
    out = DensityMatrix(small, (r,) * d, check=False)
    back = Bd @ small @ Bd.T
    err = float(np.abs(back - rho.matrix).max(initial=0.0))
    scale = max(1.0, float(np.abs(rho.matrix).max(initial=0.0)))
    if err > 1e-8 * scale:
        raise ValueError(
            f"state is not confined to its marginal support (residual {err:.3e})")
    return out, B
