"""Product vectors in subspaces: Takagi factorization, symmetric pure-state
decomposition, the dimension guarantee for complex product vectors, the
2 x M linear-system solver, symmetric product-vector search (numeric
multistart plus an exact enumeration path), and the two-qutrit elimination."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from .states import Subspace
from .tensors import kron_power, project_symmetric

_SIGN_EPS = 1e-8
_DEDUP_ANGLE = 1e-6


def canonical_sign(v):
    """Flip the global sign so the first coordinate larger than 1e-8 in
    magnitude is positive."""
    v = np.asarray(v)
    for c in v:
        if abs(c) > _SIGN_EPS:
            return v if c > 0 else -v
    return v


def angular_distance(u, v):
    """min(||u - v||, ||u + v||) for unit vectors (projective distance)."""
    u = np.asarray(u)
    v = np.asarray(v)
    return float(min(np.linalg.norm(u - v), np.linalg.norm(u + v)))


@dataclass
class ProductVector:
    """A real or complex local unit vector x together with the power d,
    representing the symmetric product vector x^(x d)."""
    local: np.ndarray
    power: int
    residual: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.local)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ValueError("zero local vector")
        v = v / nrm
        if not np.iscomplexobj(v):
            v = canonical_sign(v)
        self.local = v

    def vector(self):
        return kron_power(self.local, self.power)

    def projector(self):
        w = self.vector()
        return np.outer(w, np.conj(w))


@dataclass
class TakagiFactorization:
    """M = U diag(D * signs) U^T with U unitary and D >= 0 descending; signs
    are all +1 in the complex case and carry the eigenvalue signs in the
    real case."""
    U: np.ndarray
    D: np.ndarray
    signs: np.ndarray

    def reconstruct(self):
        return self.U @ np.diag(self.D * self.signs) @ self.U.T


def takagi(M, tol=1e-10):
    """Symmetric factorization M = U D' U^T of a complex symmetric matrix.

    Real input: orthogonal U from the eigendecomposition, D = |eigenvalues|,
    signs = eigenvalue signs.  Complex input: unitary U with D the singular
    values (Autonne route through the SVD).
    """
    M = np.asarray(M)
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    if float(np.abs(M - M.T).max(initial=0.0)) > tol * scale:
        raise ValueError("input is not (complex) symmetric")
    M = (M + M.T) / 2.0
    n = M.shape[0]
    if not np.iscomplexobj(M) or np.abs(M.imag).max(initial=0.0) <= tol * scale:
        Mr = np.real(M)
        w, V = np.linalg.eigh(Mr)
        order = np.argsort(-np.abs(w))
        w, V = w[order], V[:, order]
        signs = np.where(w >= 0, 1.0, -1.0)
        fac = TakagiFactorization(U=V, D=np.abs(w), signs=signs)
    else:
        Us, s, Vh = np.linalg.svd(M)
        A = Us.conj().T @ M @ np.conj(Us)      # symmetric, equals diag(s) @ Z
        Z = np.zeros((n, n), dtype=complex)
        for i in range(n):
            if s[i] > tol * scale:
                Z[i, :] = A[i, :] / s[i]
            else:
                Z[i, i] = 1.0
        T = scipy.linalg.sqrtm(Z)
        U = Us @ T
        fac = TakagiFactorization(U=U, D=s.copy(),
                                  signs=np.ones(n))
    err = float(np.abs(fac.reconstruct() - M).max(initial=0.0))
    if err > 1e-9 * scale:
        raise RuntimeError(f"factorization residual too large ({err:.3e})")
    return fac


def symmetric_decompose_pure(psi, tol=1e-10):
    """Write a bipartite vector with symmetric coefficient matrix as
    sum_i sign_i a_i (x) a_i with pairwise orthogonal a_i (amplitudes folded
    into the a_i).  Returns a list of (sign, a_i)."""
    psi = np.asarray(psi)
    n = psi.shape[0]
    N = int(round(math.isqrt(n)))
    if N * N != n:
        raise ValueError("vector length is not a perfect square")
    m = psi.reshape(N, N)
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if float(np.abs(m - m.T).max(initial=0.0)) > tol * scale:
        raise ValueError("coefficient matrix is not symmetric")
    fac = takagi(m, tol)
    terms = []
    top = float(fac.D.max(initial=0.0))
    for i in range(len(fac.D)):
        if fac.D[i] > 1e-12 * max(top, 1e-300):
            terms.append((int(fac.signs[i]),
                          math.sqrt(fac.D[i]) * fac.U[:, i]))
    recon = sum(s * np.outer(a, a).reshape(-1) for s, a in terms)
    if float(np.abs(recon - psi).max(initial=0.0)) > 1e-10 * scale:
        raise RuntimeError("pure-state decomposition residual too large")
    return terms


def segre_guarantee(n, N):
    """True iff an n-dimensional subspace of an N x N bipartite space is
    guaranteed to contain a complex product vector."""
    if n > N * (N + 1) // 2:
        raise ValueError("subspace dimension exceeds the symmetric dimension")
    return n >= N * (N - 1) // 2 + 1


def qubit_product_step(kernel_basis, M=None, tries=24, seed=0):
    """Real product vector (x, y) in R^2 (x) R^M orthogonal to the given
    kernel vectors: solves (x0 F0 + x1 F1) y = 0 with F_b holding the
    |b>-component rows of the kernel basis."""
    kernel = [np.asarray(f) for f in kernel_basis]
    if not kernel:
        m = 2 if M is None else int(M)
        return np.array([1.0, 0.0]), np.eye(m)[0]
    m = kernel[0].shape[0] // 2
    rows0, rows1 = [], []
    for f in kernel:
        fr = f.reshape(2, m)
        for part in (np.real, np.imag):
            r0, r1 = part(fr[0]), part(fr[1])
            if np.abs(r0).max(initial=0.0) > 0 or np.abs(r1).max(initial=0.0) > 0:
                rows0.append(r0)
                rows1.append(r1)
    F0 = np.array(rows0)
    F1 = np.array(rows1)
    rng = np.random.default_rng(seed)
    xs = [np.array([1.0, 0.0]), np.array([0.0, 1.0]),
          np.array([1.0, 1.0]) / math.sqrt(2)]
    xs += [rng.standard_normal(2) for _ in range(tries)]
    best = None
    for x in xs:
        x = x / np.linalg.norm(x)
        A = x[0] * F0 + x[1] * F1
        _, sv, Vt = np.linalg.svd(A)
        y = Vt[-1]
        resid = max(abs(np.vdot(f, np.kron(x, y))) for f in kernel)
        if best is None or resid < best[0]:
            best = (resid, x, y)
        if resid < 1e-12:
            break
    resid, x, y = best
    if resid > 1e-10:
        r = len(kernel)
        extra = " (kernel dimension >= local dimension)" if r >= m else ""
        raise RuntimeError(
            f"no real product vector orthogonal to the kernel found{extra}; "
            f"best residual {resid:.3e}")
    return canonical_sign(x), canonical_sign(y)


# ---------------------------------------------------------------------------
# numeric symmetric product-vector search


def _sym_power(v, d):
    w = v
    for _ in range(d - 1):
        w = np.multiply.outer(w, v)
    return w.reshape(-1)


def _power_jacobian(v, d):
    """Jacobian of v -> v^(x d) as an N^d x N matrix."""
    N = v.shape[0]
    cols = np.zeros((N ** d, N))
    eye = np.eye(N)
    for slot in range(d):
        factors = [v] * d
        for k in range(N):
            factors[slot] = eye[k]
            w = factors[0]
            for f in factors[1:]:
                w = np.multiply.outer(w, f)
            cols[:, k] += w.reshape(-1)
    return cols


def _power_start(v, B, d, N, iters=50):
    """Projective higher-order power iteration: push v^(x d) onto the range,
    contract back to one slot, move to the dominant local direction.  Basins
    of the true product vectors are far larger than for cold Gauss-Newton."""
    v = v / np.linalg.norm(v)
    for _ in range(iters):
        w = _sym_power(v, d)
        w = B @ (B.T @ w)
        M = w.reshape(N, N ** (d - 1))
        if d == 2:
            M = (M + M.T) / 2
            ww, V = np.linalg.eigh(M)
            vn = V[:, int(np.argmax(np.abs(ww)))]
        else:
            U, _, _ = np.linalg.svd(M, full_matrices=False)
            vn = U[:, 0]
        if vn @ v < 0:
            vn = -vn
        if np.linalg.norm(vn - v) < 1e-14:
            return vn
        v = vn
    return v


def _newton_refine(v, B, d, iters=60):
    """Gauss-Newton with Levenberg damping on ||(1 - P_range) v^(x d)||^2
    over unit vectors v.  Returns (v, squared residual)."""
    v = v / np.linalg.norm(v)
    mu = 1e-8

    def resid(u):
        w = _sym_power(u, d)
        return w - B @ (B.T @ w)

    r = resid(v)
    f = float(r @ r)
    for _ in range(iters):
        J = _power_jacobian(v, d)
        J = J - B @ (B.T @ J)
        g = J.T @ r
        H = J.T @ J
        try:
            step = np.linalg.solve(H + mu * np.eye(H.shape[0]), -g)
        except np.linalg.LinAlgError:
            mu *= 10
            continue
        cand = v + step
        nrm = np.linalg.norm(cand)
        if nrm == 0:
            break
        cand = cand / nrm
        rc = resid(cand)
        fc = float(rc @ rc)
        if fc < f:
            v, r, f = cand, rc, fc
            mu = max(mu / 3, 1e-14)
            if f < 1e-28:
                break
        else:
            mu *= 10
            if mu > 1e8:
                break
    return v, f


def _dedup(vectors, tol=_DEDUP_ANGLE):
    out = []
    for v in vectors:
        if all(angular_distance(v, u) > tol for u in out):
            out.append(v)
    return out


@dataclass
class ProductVectorSet:
    """Search result: the vectors found, whether the enumeration is provably
    complete, and a transcript of how the search ran."""
    vectors: list
    complete: bool
    transcript: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.vectors)

    def __len__(self):
        return len(self.vectors)

    def __getitem__(self, k):
        return self.vectors[k]


def rationalize_matrix(A, max_den=10 ** 7, tol=1e-12, max_lcm=10 ** 8):
    """Entrywise rational reconstruction of a float matrix; None when the
    entries do not sit on small-denominator rationals.

    Generic floats also admit close max_den-bounded approximants, so the
    residual test alone cannot tell a truly rational matrix from noise; a
    shared denominator can.  The reconstruction is accepted only when the
    lcm of all denominators stays below max_lcm."""
    A = np.asarray(A)
    if np.iscomplexobj(A):
        if np.abs(A.imag).max(initial=0.0) > tol:
            return None
        A = A.real
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    out = []
    lcm = 1
    for row in A:
        r = []
        for x in row:
            fr = Fraction(float(x)).limit_denominator(max_den)
            if abs(float(fr) - float(x)) > tol * scale:
                return None
            lcm = math.lcm(lcm, fr.denominator)
            if lcm > max_lcm:
                return None
            r.append(fr)
        out.append(r)
    return out


def _exact_symmetric_enumeration(rat_rows, N):
    """Complete enumeration of real symmetric product vectors v (x) v inside
    the range cut out by the rational constraint rows (each row k enforces
    k . (v (x) v) = 0).  Chart-by-chart polynomial solve; returns
    (list of float vectors, certified flag) or None when inconclusive."""
    import sympy as sp

    syms = sp.symbols(f"v0:{N}", real=True)
    w = [syms[i] * syms[j] for i in range(N) for j in range(N)]
    eqs = []
    for row in rat_rows:
        e = sp.expand(sum(sp.Rational(c) * m for c, m in zip(row, w)))
        if e != 0:
            eqs.append(e)
    found = []
    for lead in range(N):
        subs = {syms[j]: sp.Integer(0) for j in range(lead)}
        subs[syms[lead]] = sp.Integer(1)
        free = list(syms[lead + 1:])
        sys_eqs = [sp.expand(e.subs(subs)) for e in eqs]
        sys_eqs = [e for e in sys_eqs if e != 0]
        if any(e.is_number and e != 0 for e in sys_eqs):
            continue
        if not free:
            if not sys_eqs:
                vec = [0.0] * N
                vec[lead] = 1.0
                found.append(np.array(vec))
            continue
        try:
            sols = sp.solve(sys_eqs, free, dict=True)
        except Exception:
            return None
        if sols is None:
            return None
        if not sys_eqs:
            # no constraints at all on this chart: positive-dimensional family
            return None
        for sol in sols:
            if len(sol) != len(free):
                # under-determined solution branch: not a finite enumeration
                return None
            vals = []
            ok = True
            for s in free:
                val = sp.simplify(sol[s])
                im = sp.im(val)
                if im.is_zero is not True:
                    if abs(complex(val.evalf(40)).imag) > 1e-30:
                        ok = False
                        break
                    return None  # cannot certify realness exactly
                vals.append(float(sp.re(val).evalf(30)))
            if not ok:
                continue
            vec = [0.0] * lead + [1.0] + vals
            found.append(np.array(vec))
    return found, True


def symmetric_product_vectors(subspace, d, N, restarts=200, seed=0,
                              exact_state=None, residual_tol=1e-9):
    """All real local vectors x with x^(x d) inside the given subspace.

    When `exact_state` (a rational matrix or a float matrix with
    small-denominator rational entries whose range equals the subspace) is
    supplied and d == 2, N <= 4, the enumeration is exact and provably
    complete; otherwise a multistart Gauss-Newton search runs and the result
    carries complete=False.
    """
    B = np.asarray(subspace.basis)
    if np.iscomplexobj(B):
        if np.abs(B.imag).max(initial=0.0) > 1e-10:
            raise ValueError("subspace basis must be real for symmetric search")
        B = np.real(B)
    for k in range(B.shape[1]):
        dev = float(np.linalg.norm(B[:, k] - project_symmetric(B[:, k], d, N)))
        if dev > 1e-8:
            raise ValueError(
                f"basis vector {k} is outside the symmetric subspace (residual {dev:.3e})")

    transcript = {"method": "numeric", "restarts": restarts}
    if exact_state is not None and d == 2 and N <= 4:
        rat = exact_state
        if isinstance(rat, np.ndarray) or not isinstance(rat, list):
            rat = rationalize_matrix(np.asarray(exact_state, dtype=float))
        if rat is not None:
            import sympy as sp
            mat = sp.Matrix([[sp.Rational(c) for c in row] for row in rat])
            null = mat.T.nullspace()
            rows = [[v[i] for i in range(N * N)] for v in null]
            res = _exact_symmetric_enumeration(rows, N)
            if res is not None:
                vecs, certified = res
                out = []
                for v in vecs:
                    pv = ProductVector(local=v, power=d)
                    pv.residual = float(subspace.residual(pv.vector()))
                    if pv.residual < residual_tol:
                        out.append(pv)
                if len(out) == len(vecs):
                    dedup = []
                    for pv in out:
                        if all(angular_distance(pv.local, q.local) > 1e-10
                               for q in dedup):
                            dedup.append(pv)
                    out = sorted(dedup,
                                 key=lambda pv: tuple(np.round(pv.local, 9)))
                    transcript = {"method": "exact-enumeration",
                                  "charts": N, "certified": True}
                    return ProductVectorSet(out, complete=True,
                                            transcript=transcript)

    rng = np.random.default_rng(seed)
    hits = []
    for _ in range(restarts):
        v0 = _power_start(rng.standard_normal(N), B, d, N)
        v, f = _newton_refine(v0, B, d)
        if f < residual_tol ** 2:
            hits.append(canonical_sign(v))
    uniq = _dedup(hits)
    uniq.sort(key=lambda v: tuple(np.round(v, 9)))
    out = []
    for v in uniq:
        pv = ProductVector(local=v, power=d)
        pv.residual = float(subspace.residual(pv.vector()))
        out.append(pv)
    transcript["hits"] = len(hits)
    transcript["note"] = "incomplete enumeration"
    return ProductVectorSet(out, complete=False, transcript=transcript)


def grid_symmetric_product_scan(subspace, d, N, samples=10 ** 6, seed=0,
                                keep=3000, chunk=100000):
    """Brute-force oracle: dense random sampling of the unit sphere ranked by
    range residual, followed by local refinement of the best candidates."""
    B = np.real(np.asarray(subspace.basis))
    rng = np.random.default_rng(seed)
    best_v = None
    best_r = None
    done = 0
    while done < samples:
        c = min(chunk, samples - done)
        X = rng.standard_normal((c, N))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        W = X[:, :, None] * X[:, None, :]
        for _ in range(d - 2):
            W = W.reshape(c, -1)[:, :, None] * X[:, None, :]
        S = W.reshape(c, -1) @ B
        R = 1.0 - np.sum(S * S, axis=1)
        if best_v is None:
            best_v, best_r = X, R
        else:
            best_v = np.vstack([best_v, X])
            best_r = np.concatenate([best_r, R])
        if len(best_r) > keep:
            idx = np.argpartition(best_r, keep)[:keep]
            best_v, best_r = best_v[idx], best_r[idx]
        done += c
    hits = []
    for v0 in best_v:
        v, f = _newton_refine(v0, B, d)
        if f < 1e-18:
            hits.append(canonical_sign(v))
    uniq = _dedup(hits)
    uniq.sort(key=lambda v: tuple(np.round(v, 9)))
    return uniq


def two_qutrit_product_step(subspace, residual_tol=1e-9):
    """Real symmetric product vector in a 3 (x) 3 range of dimension >= 5,
    through pair elimination: restrict to a 2 x 2 symmetric pencil supported
    on one index pair and solve the rank-one (determinant) quadratic."""
    B = np.real(np.asarray(subspace.basis))
    if B.shape[0] != 9:
        raise ValueError("subspace must live in a two-qutrit space")
    if subspace.dim < 5:
        raise ValueError("range dimension below 5; use the rank rules instead")
    mats = [B[:, k].reshape(3, 3) for k in range(B.shape[1])]
    mats = [(m + m.T) / 2.0 for m in mats]
    for pair in ((0, 1), (0, 2), (1, 2)):
        other = ({0, 1, 2} - set(pair)).pop()
        # coefficients c with sum_k c_k mats_k supported on pair x pair
        rows = []
        for m in mats:
            rows.append([m[other, 0], m[other, 1], m[other, 2]])
        A = np.array(rows).T  # 3 x dim 'forbidden entry' map
        null = scipy.linalg.null_space(A, rcond=1e-12)
        if null.shape[1] < 2:
            continue
        p, q = pair
        def corner(c):
            M = sum(ck * mk for ck, mk in zip(c, mats))
            return np.array([[M[p, p], M[p, q]], [M[q, p], M[q, q]]])
        A2 = corner(null[:, 0])
        B2 = corner(null[:, 1])
        alpha = float(np.linalg.det(A2))
        gamma = float(np.linalg.det(B2))
        beta = float(np.linalg.det(A2 + B2)) - alpha - gamma
        scale = max(abs(alpha), abs(beta), abs(gamma), 1e-300)
        roots = []
        if abs(alpha) <= 1e-12 * scale:
            roots.append((1.0, 0.0))      # A2 itself is rank deficient
            if abs(beta) > 1e-12 * scale:
                roots.append((-gamma / beta, 1.0))
        else:
            disc = beta * beta - 4 * alpha * gamma
            if disc < 0:
                continue
            rdisc = math.sqrt(disc)
            roots.append(((-beta + rdisc) / (2 * alpha), 1.0))
            roots.append(((-beta - rdisc) / (2 * alpha), 1.0))
        for t, s in roots:
            R = t * A2 + s * B2
            w, V = np.linalg.eigh(R)
            k = int(np.argmax(np.abs(w)))
            if abs(w[k]) < 1e-14:
                continue
            v2 = V[:, k]
            v = np.zeros(3)
            v[p], v[q] = v2
            pv = ProductVector(local=v, power=2)
            pv.residual = float(subspace.residual(pv.vector()))
            if pv.residual < residual_tol:
                return pv
    # elimination degenerate for every pair: numeric fallback
    res = symmetric_product_vectors(subspace, 2, 3, restarts=120)
    for pv in res:
        if pv.residual < residual_tol:
            return pv
    raise RuntimeError("no real symmetric product vector found in the range")


def bipartite_product_vectors(subspace, dims, starts=200, seed=0,
                              residual_tol=1e-9):
    """General (not necessarily symmetric) product vectors u (x) v in a
    bipartite subspace, by alternating top-singular-vector sweeps from many
    starts.  Numeric search; no completeness claim."""
    n1, n2 = dims
    B = np.asarray(subspace.basis)
    T = B.reshape(n1, n2, B.shape[1])
    rng = np.random.default_rng(seed)
    found = []
    for _ in range(starts):
        v = rng.standard_normal(n2)
        v /= np.linalg.norm(v)
        u = None
        g = 0.0
        for _ in range(200):
            Av = np.einsum("ijk,j->ik", T, v)
            uu, ss, _ = np.linalg.svd(Av, full_matrices=False)
            u = np.real(uu[:, 0])
            Au = np.einsum("ijk,i->jk", T, u)
            vv, ss2, _ = np.linalg.svd(Au, full_matrices=False)
            vnew = np.real(vv[:, 0])
            gnew = float(ss2[0] ** 2)
            if abs(gnew - g) < 1e-15 and np.linalg.norm(vnew - v) < 1e-12:
                v = vnew
                g = gnew
                break
            v, g = vnew, gnew
        w = np.kron(u, v)
        resid = float(subspace.residual(w))
        if resid < residual_tol:
            u = canonical_sign(u)
            # keep the overall sign of the product fixed while canonicalizing
            if float(np.dot(np.kron(u, v), w)) < 0:
                v = -v
            found.append((u, canonical_sign(v)))
    out = []
    for u, v in found:
        if all(angular_distance(u, u2) > _DEDUP_ANGLE
               or angular_distance(v, v2) > _DEDUP_ANGLE for u2, v2 in out):
            out.append((u, v))
    out.sort(key=lambda t: tuple(np.round(np.concatenate(t), 9)))
    return out
