"""Multi-index machinery, symmetric tensor storage, Dicke vectors, and
projectors onto the symmetric and cyclic subspaces of a tensor power.

Index conventions: a d-party basis state |i_1 ... i_d> with local dimension N
is flattened to sum_k i_k * N**(d-k) (row-major).  A density matrix entry is
addressed by the 2d-slot multi-index (i_1..i_d, j_1..j_d); complete symmetry
means invariance under every permutation of all 2d slots, so one value per
sorted multi-index is a lossless store.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

# largest N**d that is expanded to a dense matrix
DENSE_LIMIT = 4096


def canonical_index(idx, dim):
    """Sorted (nondecreasing) form of a multi-index; validates slot range."""
    out = tuple(int(i) for i in idx)
    for i in out:
        if i < 0 or i >= dim:
            raise ValueError(f"slot value {i} outside [0, {dim - 1}]")
    return tuple(sorted(out))


class SymTensor:
    """Real tensor of even order 2d over dimension N whose entries are
    invariant under every slot permutation, stored once per sorted index."""

    def __init__(self, order, dim, entries=None):
        if order <= 0 or order % 2 != 0:
            raise ValueError("order must be a positive even integer")
        if dim < 1:
            raise ValueError("dim must be positive")
        self.order = int(order)
        self.dim = int(dim)
        self.entries = {}
        if entries:
            for idx, val in entries.items():
                self[idx] = val

    def __setitem__(self, idx, val):
        key = canonical_index(idx, self.dim)
        if len(key) != self.order:
            raise ValueError("index length must equal the tensor order")
        self.entries[key] = float(val)

    def __getitem__(self, idx):
        key = canonical_index(idx, self.dim)
        if len(key) != self.order:
            raise ValueError("index length must equal the tensor order")
        return self.entries.get(key, 0.0)

    @classmethod
    def from_dense(cls, matrix, parties, dim):
        """Read a (dim**parties) x (dim**parties) matrix into compressed form.

        The caller is responsible for the matrix actually being completely
        symmetric (see states.is_cs); only the canonical representative of
        each permutation orbit is read.
        """
        n = dim ** parties
        mat = np.asarray(matrix)
        if mat.shape != (n, n):
            raise ValueError("matrix shape does not match parties/dim")
        order = 2 * parties
        tens = np.real(mat).reshape((dim,) * order)
        out = cls(order, dim)
        for key in itertools.combinations_with_replacement(range(dim), order):
            val = float(tens[key])
            if val != 0.0:
                out.entries[key] = val
        return out

    def to_dense(self):
        """Expand to the full matrix; gated at N**d <= DENSE_LIMIT."""
        d = self.order // 2
        n = self.dim ** d
        if n > DENSE_LIMIT:
            raise ValueError(
                f"dense expansion of size {n} exceeds the limit {DENSE_LIMIT}")
        tens = np.zeros((self.dim,) * self.order)
        flat = tens.reshape(-1)
        strides = [self.dim ** (self.order - 1 - k) for k in range(self.order)]
        for raw in itertools.product(range(self.dim), repeat=self.order):
            key = tuple(sorted(raw))
            val = self.entries.get(key)
            if val is not None:
                flat[sum(i * s for i, s in zip(raw, strides))] = val
        return tens.reshape(n, n)


def dicke(d, k):
    """Dicke vector with k zeros among d qubits, as a dense length-2**d array.

    Uniform superposition of all bitstrings with exactly k zeros (Hamming
    weight d-k), normalized by 1/sqrt(binomial(d,k)).
    """
    if not 0 <= k <= d:
        raise ValueError(f"k must lie in [0, {d}]")
    v = np.zeros(2 ** d)
    amp = 1.0 / math.sqrt(math.comb(d, k))
    for zeros in itertools.combinations(range(d), k):
        idx = 0
        for pos in range(d):
            idx = 2 * idx + (0 if pos in zeros else 1)
        v[idx] = amp
    return v


def dicke_basis(d):
    """2**d x (d+1) matrix whose column k is dicke(d, k)."""
    return np.column_stack([dicke(d, k) for k in range(d + 1)])


def project_symmetric(v, d, N):
    """Orthogonal projection onto the fully symmetric subspace of (C^N)^(x d):
    the average of v over all d! party permutations."""
    v = np.asarray(v)
    if v.shape != (N ** d,):
        raise ValueError("vector length must be N**d")
    tens = v.reshape((N,) * d)
    acc = np.zeros_like(tens)
    perms = list(itertools.permutations(range(d)))
    for p in perms:
        acc = acc + tens.transpose(p)
    return (acc / len(perms)).reshape(-1)


def project_periodic(v, d, N):
    """Orthogonal projection onto the cyclic-invariant subspace of
    (C^N)^(x d): the average of v over the d cyclic party shifts."""
    v = np.asarray(v)
    if v.shape != (N ** d,):
        raise ValueError("vector length must be N**d")
    tens = v.reshape((N,) * d)
    acc = np.zeros_like(tens)
    for s in range(d):
        axes = tuple((k + s) % d for k in range(d))
        acc = acc + tens.transpose(axes)
    return (acc / d).reshape(-1)


def kron_power(x, d):
    """x^(x d) as a dense vector (or matrix when x is 2-d)."""
    out = np.asarray(x)
    for _ in range(d - 1):
        out = np.kron(out, x)
    return out


def sym2_dim(N):
    """Dimension N(N+1)/2 of the bipartite symmetric subspace."""
    return N * (N + 1) // 2


def sym2_basis(N):
    """Orthonormal basis of span{|i,j> + |j,i>} as an N**2 x N(N+1)/2 matrix."""
    cols = []
    for i in range(N):
        for j in range(i, N):
            v = np.zeros(N * N)
            if i == j:
                v[i * N + j] = 1.0
            else:
                v[i * N + j] = v[j * N + i] = 1.0 / math.sqrt(2.0)
            cols.append(v)
    return np.column_stack(cols)
