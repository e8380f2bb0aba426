"""Dicke-basis moment matrices of permutation-invariant multiqubit states,
Hankel and Toeplitz state constructions, the positive-Hankel quadrature
decomposition (finite nodes plus a possible node at infinity), and a random
Toeplitz separability scan."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .states import DensityMatrix
from .tensors import dicke_basis, kron_power

RECON_TOL = 1e-8
_FLAG_TOL = 1e-12


def _binom_sqrt(d):
    return np.sqrt([math.comb(d, k) for k in range(d + 1)])


@dataclass
class DickeMatrix:
    """Overlap matrix entries[i, j] = <D_i| rho |D_j> of a multiqubit state
    together with its moment normalization moment[i, j] =
    entries[i, j] / sqrt(C(d,i) C(d,j)) and structure flags ("hankel",
    "toeplitz") detected on the moment matrix."""
    entries: np.ndarray
    moment: np.ndarray
    flags: set = field(default_factory=set)
    d: int = 0

    @property
    def size(self):
        return self.entries.shape[0]


def _structure_flags(h):
    n = h.shape[0]
    tol = _FLAG_TOL * max(1.0, float(np.abs(h).max(initial=0.0)))
    flags = set()
    hankel = all(
        np.ptp([h[i, s - i] for i in range(max(0, s - n + 1), min(s, n - 1) + 1)]) <= tol
        for s in range(2 * n - 1))
    if hankel:
        flags.add("hankel")
    toeplitz = all(
        np.ptp(np.diagonal(h, offset=k)) <= tol
        for k in range(-(n - 1), n))
    if toeplitz:
        flags.add("toeplitz")
    return flags


def state_to_dicke_matrix(rho, tol=1e-8):
    """DickeMatrix of a multiqubit state supported on the symmetric
    subspace."""
    if rho.dim != 2:
        raise ValueError("Dicke matrices are defined for qubit registers")
    d = rho.parties
    D = dicke_basis(d)
    M = D.T @ rho.matrix @ D
    scale = max(1.0, float(np.abs(rho.matrix).max(initial=0.0)))
    if np.iscomplexobj(M):
        if float(np.abs(M.imag).max(initial=0.0)) > tol * scale:
            raise ValueError("state has complex Dicke-basis overlaps")
        M = np.real(M)
    if abs(np.trace(M) - np.real(np.trace(rho.matrix))) > tol * scale * (d + 1):
        raise ValueError("state is not supported on the symmetric subspace")
    v = _binom_sqrt(d)
    h = M / np.outer(v, v)
    return DickeMatrix(entries=M, moment=h, flags=_structure_flags(h), d=d)


def hankel_to_state(a, check=True):
    """Multiqubit state (unnormalized) with moment matrix
    h[i, j] = a[i + j]; the sequence must have odd length 2d + 1."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or len(a) < 3 or len(a) % 2 == 0:
        raise ValueError("moment sequence must have odd length 2d + 1 >= 3")
    d = (len(a) - 1) // 2
    v = _binom_sqrt(d)
    idx = np.arange(d + 1)
    M = np.outer(v, v) * a[idx[:, None] + idx[None, :]]
    D = dicke_basis(d)
    mat = D @ M @ D.T
    return DensityMatrix(mat, dims=(2,) * d, check=check)


def toeplitz_to_state(a, check=True):
    """Trace-normalized multiqubit state with moment matrix
    h[i, j] = a[|i - j|]; the sequence has length d + 1."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or len(a) < 2:
        raise ValueError("correlation sequence must have length d + 1 >= 2")
    d = len(a) - 1
    v = _binom_sqrt(d)
    idx = np.arange(d + 1)
    T = a[np.abs(idx[:, None] - idx[None, :])]
    M = np.outer(v, v) * T
    tr = float(np.trace(M))
    if tr <= 0:
        raise ValueError("correlation sequence gives a traceless matrix")
    D = dicke_basis(d)
    mat = D @ (M / tr) @ D.T
    return DensityMatrix(mat, dims=(2,) * d, check=check, trace_one=True)


@dataclass
class VandermondeTerm:
    """One quadrature term: weight >= 0 at a real node, with node equal to
    math.inf for the point at infinity (moment mass on the top entry)."""
    weight: float
    node: float

    @property
    def infinite(self):
        return math.isinf(self.node)


def _moments_of(M):
    n = M.shape[0]
    return np.concatenate([M[0, :], M[1:, n - 1]])


def _psd_rank(M, tol):
    w = np.linalg.eigvalsh((M + M.T) / 2.0)
    top = max(float(w[-1]), 0.0)
    if w[0] < -tol * max(top, 1.0):
        raise ValueError(f"matrix is not positive semidefinite (min eig {w[0]:.3e})")
    return int(np.sum(w > tol * max(top, 1e-300)))


def hankel_psd_decompose(M, tol=1e-10):
    """Quadrature decomposition of a positive semidefinite Hankel matrix:
    M[i, j] = sum_t w_t t^(i+j) + w_inf [i = j = n-1], with exactly rank(M)
    terms, real nodes, and nonnegative weights.  At full rank the nodes and
    weights come from the Jacobi-matrix quadrature of the moment sequence;
    at lower rank the nodes come from the generalized eigenproblem of the
    shifted Hankel against the leading principal block and the weights from
    least squares over all moments."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if M.ndim != 2 or M.shape[1] != n:
        raise ValueError("input must be a square matrix")
    a = _moments_of(M)
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    idx = np.arange(n)
    if float(np.abs(M - a[idx[:, None] + idx[None, :]]).max(initial=0.0)) > 1e-12 * scale:
        raise ValueError("matrix is not Hankel")
    r = _psd_rank(M, tol)
    if r == 0:
        return []
    lead = np.linalg.eigvalsh(M[:r, :r])
    has_inf = bool(lead[0] <= tol * max(float(lead[-1]), 1e-300))
    rfin = r - 1 if has_inf else r
    if rfin == n:
        # positive definite: Jacobi-matrix quadrature.  The last diagonal
        # entry of the Jacobi matrix is the free moment a_{2n-1}; a centered
        # choice keeps the nodes inside a tame interval.
        try:
            L = scipy.linalg.cholesky(M, lower=True)
        except scipy.linalg.LinAlgError:
            L = scipy.linalg.cholesky(M + 1e-14 * scale * np.eye(n),
                                      lower=True)
        a_ext = np.concatenate([a, [0.0]])
        H1 = a_ext[idx[:, None] + idx[None, :] + 1]
        J = scipy.linalg.solve_triangular(
            L, scipy.linalg.solve_triangular(L, H1, lower=True).T, lower=True)
        J = (J + J.T) / 2.0
        if n > 1:
            J[n - 1, n - 1] = float(np.mean(np.diagonal(J)[: n - 1]))
        lam, U = np.linalg.eigh(J)
        gw = float(a[0]) * U[0, :] ** 2
        merged, wsum = [float(lam[0])], [float(gw[0])]
        for t, g in zip(lam[1:], gw[1:]):
            if t - merged[-1] <= 1e-8 * max(1.0, abs(t)):
                merged[-1] = (merged[-1] + float(t)) / 2.0
                wsum[-1] += float(g)
            else:
                merged.append(float(t))
                wsum.append(float(g))
        cols = [np.power(t, np.arange(2 * n - 1, dtype=float)) for t in merged]
        labels = list(merged)
        w = np.array(wsum)
    else:
        if rfin > 0:
            H0 = a[idx[:rfin, None] + idx[None, :rfin]]
            H1 = a[idx[:rfin, None] + idx[None, :rfin] + 1]
            try:
                nodes = scipy.linalg.eigh(H1, H0, eigvals_only=True)
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
                ridge = 1e-14 * scale * np.eye(rfin)
                nodes = scipy.linalg.eigh(H1, H0 + ridge, eigvals_only=True)
            nodes = np.sort(np.real(nodes))
            merged = [float(nodes[0])]
            for t in nodes[1:]:
                if t - merged[-1] <= 1e-8 * max(1.0, abs(t)):
                    merged[-1] = (merged[-1] + t) / 2.0
                else:
                    merged.append(float(t))
            cols = [np.power(t, np.arange(2 * n - 1, dtype=float))
                    for t in merged]
            labels = list(merged)
        else:
            cols, labels = [], []
        if has_inf:
            e = np.zeros(2 * n - 1)
            e[2 * n - 2] = 1.0
            cols.append(e)
            labels.append(math.inf)
        V = np.array(cols).T
        w, *_ = np.linalg.lstsq(V, a, rcond=None)
        if w.min(initial=0.0) < -1e-8 * scale:
            raise RuntimeError(f"negative quadrature weight ({w.min():.3e})")
        w = np.clip(w, 0.0, None)
    V = np.array(cols).T
    recon = V @ w
    err = float(np.abs(recon - a).max(initial=0.0))
    if err > RECON_TOL * scale:
        raise RuntimeError(f"moment reconstruction residual {err:.3e}")
    if len(labels) != r:
        raise RuntimeError(
            f"term count {len(labels)} does not match rank {r}")
    terms = [VandermondeTerm(weight=float(wk), node=t)
             for wk, t in zip(w, labels)]
    terms.sort(key=lambda t: (t.infinite, t.node if not t.infinite else 0.0))
    return terms


def multiqubit_decompose(rho, tol=1e-10):
    """Product decomposition of a permutation-invariant multiqubit state:
    rho = sum_i w_i (x_i x_i^T)^(x d) with unit x_i, through the moment
    Hankel quadrature.  Returns a list of (weight, local vector) pairs."""
    dm = state_to_dicke_matrix(rho)
    d = dm.d
    terms = hankel_psd_decompose(dm.moment, tol=tol)
    out = []
    for term in terms:
        if term.weight <= 0:
            continue
        if term.infinite:
            x = np.array([1.0, 0.0])
            out.append((term.weight, x))
        else:
            t = term.node
            nrm2 = 1.0 + t * t
            x = np.array([t, 1.0]) / math.sqrt(nrm2)
            out.append((term.weight * nrm2 ** d, x))
    scale = max(1.0, float(np.abs(rho.matrix).max(initial=0.0)))
    recon = sum(w * np.outer(kron_power(x, d), kron_power(x, d))
                for w, x in out) if out else np.zeros(rho.matrix.shape)
    err = float(np.abs(recon - rho.matrix).max(initial=0.0))
    if err > RECON_TOL * scale:
        raise RuntimeError(f"product reconstruction residual {err:.3e}")
    return out


def fejer_moments(d, rng):
    """Random autocorrelation sequence a_0..a_d (always a positive
    semidefinite Toeplitz symbol)."""
    c = rng.standard_normal(3 * (d + 1))
    return np.array([float(c[: len(c) - k] @ c[k:]) for k in range(d + 1)])


def toeplitz_scan(d, samples=300, seed=0, include_artifacts=True):
    """Classify `samples` random Toeplitz-moment multiqubit states on d
    qubits.  Deterministic for a given seed (sample i uses
    default_rng([seed, i])).  Returns {"records": [...], "counts": {...}}
    where each record carries the sample index, the moment sequence, the
    verdict, and the rule; Entangled records embed the offending state."""
    records = []
    counts = {}
    from .engine import classify_symmetric
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        a = fejer_moments(d, rng)
        rho = toeplitz_to_state(a)
        cert = classify_symmetric(rho)
        rec = {
            "sample": i,
            "moments": [float(x) for x in a],
            "verdict": cert.verdict,
            "rule": cert.rule,
        }
        if cert.verdict == "Entangled" and include_artifacts:
            from .serialize import state_to_document
            rec["artifact"] = state_to_document(rho)
        records.append(rec)
        counts[cert.verdict] = counts.get(cert.verdict, 0) + 1
    return {"parties": d, "samples": samples, "seed": seed,
            "counts": counts, "records": records}
