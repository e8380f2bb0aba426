"""Geometric measure of entanglement for entrywise-nonnegative symmetric
states: shifted symmetric power iteration for the maximal product-state
overlap, KKT verification, the closed form for the conditioned coefficient
family, a brute-force grid oracle, and a two-copy builder for the
additivity check."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .named_states import X8
from .states import RANK_TOL, DensityMatrix
from .tensors import kron_power, project_symmetric


@dataclass
class GmeResult:
    """Largest product overlap mu of the trace-normalized state, the
    nonnegative unit maximizer, gme = -log2(mu), total iterations, the
    stationarity residual, and a convergence flag."""
    mu: float
    maximizer: np.ndarray
    gme: float
    iterations: int
    kkt_residual: float
    converged: bool


def overlap_contraction(mat, a, d):
    """c(a) with a . c(a) = <a,...,a| mat |a,...,a>; the stationarity
    condition of the overlap maximization is c(a) = mu * a."""
    a = np.asarray(a, dtype=float)
    N = a.shape[0]
    w = kron_power(a, d)
    y = np.real(mat @ w)
    if d == 1:
        return y
    t = y.reshape((N,) * d)
    rest = kron_power(a, d - 1)
    c = np.zeros(N)
    for slot in range(d):
        c += np.moveaxis(t, slot, 0).reshape(N, -1) @ rest
    return c / d


def _prepare_nonnegative(rho, tol=1e-12):
    mat = rho.matrix
    if np.iscomplexobj(mat):
        if float(np.abs(mat.imag).max(initial=0.0)) > 1e-12:
            raise ValueError("state has complex entries")
        mat = mat.real
    scale = max(1.0, float(np.abs(mat).max(initial=0.0)))
    if float(mat.min()) < -tol * scale:
        raise ValueError(
            f"state has a negative entry ({float(mat.min()):.3e}); the "
            "overlap maximization needs entrywise-nonnegative input")
    mat = np.clip(mat, 0.0, None)
    d = rho.parties
    N = rho.dim
    w, V = np.linalg.eigh((mat + mat.T) / 2.0)
    top = max(float(w[-1]), 1e-300)
    for k in range(len(w)):
        if w[k] > RANK_TOL * top:
            v = V[:, k]
            dev = float(np.linalg.norm(v - project_symmetric(v, d, N)))
            if dev > 1e-8:
                raise ValueError(
                    f"state is not supported on the symmetric subspace "
                    f"(eigenvector residual {dev:.3e})")
    return mat, d, N


def gme_power_iteration(rho, seed=0, starts=10, max_iter=1000, tol=1e-12):
    """Shifted symmetric power iteration for the largest product overlap of
    a trace-normalized nonnegative symmetric state; 10 nonnegative
    multistarts, adaptive shift keeping the objective nondecreasing."""
    mat, d, N = _prepare_nonnegative(rho)
    tr = float(np.trace(mat))
    if tr <= 0:
        raise ValueError("state has nonpositive trace")
    M = mat / tr
    best = None
    total_iters = 0
    for k in range(starts):
        rng = np.random.default_rng([seed, k])
        a = np.abs(rng.standard_normal(N)) + 1e-3
        a /= np.linalg.norm(a)
        alpha = 0.0
        c = overlap_contraction(M, a, d)
        f = float(a @ c)
        run_converged = False
        for _ in range(max_iter):
            total_iters += 1
            cand = c + alpha * a
            nrm = float(np.linalg.norm(cand))
            if nrm < 1e-300:
                run_converged = True
                break
            a_new = cand / nrm
            c_new = overlap_contraction(M, a_new, d)
            f_new = float(a_new @ c_new)
            if f_new < f - 1e-12:
                alpha = 2.0 * (alpha + 0.05)
                continue
            delta = float(np.linalg.norm(a_new - a))
            a, c, f = a_new, c_new, f_new
            if delta < tol:
                run_converged = True
                break
        kkt = float(np.linalg.norm(c - f * a))
        if best is None or f > best[0]:
            best = (f, a, kkt, run_converged)
    mu, a, kkt, run_converged = best
    converged = run_converged and kkt < 1e-8
    mu = min(max(mu, 1e-300), 1.0)
    return GmeResult(mu=mu, maximizer=a, gme=-math.log2(mu),
                     iterations=total_iters, kkt_residual=kkt,
                     converged=converged)


def verify_kkt(rho, a, mu, tol=1e-8):
    """True iff a is a nonnegative unit vector with
    ||c(a) - mu*a|| < tol on the state as given (no normalization)."""
    a = np.asarray(a, dtype=float)
    if abs(float(np.linalg.norm(a)) - 1.0) > 1e-8:
        return False
    if float(a.min()) < -1e-12:
        return False
    mat = np.real(rho.matrix)
    c = overlap_contraction(mat, a, rho.parties)
    return float(np.linalg.norm(c - float(mu) * a)) < tol


_CONDITIONS = (
    ("lambda0 = lambda3 + 3040*lambda5 - (11000/81)*lambda7",
     lambda l: l[0] - (l[3] + 3040.0 * l[5] - (11000.0 / 81.0) * l[7])),
    ("lambda1 = lambda3 + 2016*lambda5",
     lambda l: l[1] - (l[3] + 2016.0 * l[5])),
    ("lambda2 = lambda3 + 1056*lambda5 - (11000/81)*lambda7",
     lambda l: l[2] - (l[3] + 1056.0 * l[5] - (11000.0 / 81.0) * l[7])),
    ("lambda5 = lambda6",
     lambda l: l[5] - l[6]),
)


@dataclass
class ClosedFormGme:
    """Closed-form overlap record: mu_raw is the formula value on the
    unnormalized coefficient state, trace its trace, mu = mu_raw / trace the
    normalized overlap, gme = -log2(mu)."""
    mu_raw: float
    trace: float
    mu: float
    gme: float
    maximizer: np.ndarray


def gme_closed_form(lambdas):
    """Closed-form largest product overlap for the eight-direction
    coefficient family when the stationarity conditions hold:
    mu_raw = lambda0/4 + 16*lambda4 + 248*lambda5 + (250/27)*lambda7,
    maximized at a = (1,1,1,1)/2.  The coefficient state must be PSD and
    entrywise nonnegative."""
    lam = np.asarray(lambdas, dtype=float)
    if lam.shape != (8,):
        raise ValueError("eight coefficients required")
    scale = max(1.0, float(np.abs(lam).max()))
    for name, resid in _CONDITIONS:
        dev = abs(float(resid(lam)))
        if dev > 1e-9 * scale:
            raise ValueError(
                f"coefficient condition violated ({name}; deviation {dev:.3e})")
    if float(np.abs(lam).max()) == 0.0:
        raise ValueError("all coefficients vanish (zero state)")
    mat = np.zeros((16, 16))
    for i in range(7):
        phi = np.kron(X8[i], X8[i])
        mat += lam[i] * np.outer(phi, phi)
    phi7 = np.kron(X8[7], X8[7])
    mat -= lam[7] * np.outer(phi7, phi7)
    mscale = max(1.0, float(np.abs(mat).max()))
    w = np.linalg.eigvalsh((mat + mat.T) / 2.0)
    if float(w[0]) < -1e-10 * max(float(w[-1]), 1e-300):
        raise ValueError(
            f"coefficients give a non-PSD state (min eigenvalue {w[0]:.3e})")
    if float(mat.min()) < -1e-12 * mscale:
        raise ValueError(
            f"coefficients give a negative entry ({float(mat.min()):.3e})")
    trace = float(np.trace(mat))
    if trace <= 0:
        raise ValueError("zero state")
    mu_raw = (lam[0] / 4.0 + 16.0 * lam[4] + 248.0 * lam[5]
              + (250.0 / 27.0) * lam[7])
    mu = mu_raw / trace
    return ClosedFormGme(mu_raw=mu_raw, trace=trace, mu=mu,
                         gme=-math.log2(mu),
                         maximizer=np.array([0.5, 0.5, 0.5, 0.5]))


def brute_force_overlap(rho, samples=10 ** 4, seed=0, top=20, iters=300):
    """Grid oracle: nonnegative unit-sphere sampling of the overlap followed
    by projected-gradient ascent on the best candidates.  Returns
    (mu, maximizer) for the trace-normalized state."""
    mat, d, N = _prepare_nonnegative(rho)
    M = mat / float(np.trace(mat))
    rng = np.random.default_rng(seed)
    X = np.abs(rng.standard_normal((samples, N)))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    W = X
    for _ in range(d - 1):
        W = (W[:, :, None] * X[:, None, :]).reshape(samples, -1)
    Y = W @ M
    f = np.sum(Y * W, axis=1)
    order = np.argsort(-f)[:top]
    best_mu, best_a = -1.0, None
    for idx in order:
        a = X[idx].copy()
        c = overlap_contraction(M, a, d)
        val = float(a @ c)
        eta = 0.5
        for _ in range(iters):
            cand = np.clip(a + eta * (c - val * a), 0.0, None)
            nrm = float(np.linalg.norm(cand))
            if nrm < 1e-300:
                break
            cand /= nrm
            c_new = overlap_contraction(M, cand, d)
            val_new = float(cand @ c_new)
            if val_new >= val:
                a, c, val = cand, c_new, val_new
                eta = min(eta * 1.2, 2.0)
            else:
                eta *= 0.5
                if eta < 1e-12:
                    break
        if val > best_mu:
            best_mu, best_a = val, a
    return best_mu, best_a


def two_copy(rho):
    """Two copies of a state merged party-by-party: party k of the result
    is the pair (party k of copy one, party k of copy two), local dimension
    N^2.  Used for the additivity check of the entanglement measure."""
    d = rho.parties
    N = rho.dim
    t = np.multiply.outer(rho.tensor_view(), rho.tensor_view())
    perm = [x for k in range(d) for x in (k, 2 * d + k)]
    perm += [x for k in range(d) for x in (d + k, 3 * d + k)]
    t = t.transpose(perm)
    n = (N * N) ** d
    return DensityMatrix(t.reshape(n, n), dims=(N * N,) * d, check=False)
