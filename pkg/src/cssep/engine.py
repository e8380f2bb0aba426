"""Separability decision tree for completely symmetric states: maximal
product-vector peeling, constructive symmetric decompositions, the ordered
rule chain with certificates, a scanner entry for general symmetric states,
and the bipartition-consistency diagnostic."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .product_search import (ProductVector, angular_distance,
                             rationalize_matrix, symmetric_product_vectors,
                             two_qutrit_product_step)
from .reducibility import find_reduction
from .states import (PSD_TOL, RANK_TOL, DensityMatrix, is_cs, is_ppt,
                     partial_transpose, range_kernel, rank_of,
                     restrict_to_support)
from .structured import multiqubit_decompose
from .tensors import kron_power

RECON_TOL = 1e-8
RESIDUAL_TOL = 1e-9

RULE_MULTIQUBIT = "multiqubit"
RULE_QUTRIT = "bipartite local dimension at most 3"
RULE_RANK5 = "rank at most 5"
RULE_RANK_N = "rank equals local dimension"
RULE_RANK_N1 = "rank equals local dimension plus one"
RULE_RANK_N2 = "rank equals local dimension plus two"
RULE_RANK6_FOUND = "rank-6 product vector peeling"
RULE_RANK6_EMPTY = "rank-6 empty product set"
RULE_OBSTRUCTION = "linear independence obstruction"
RULE_DIRECT_SUM = "direct sum"
RULE_BEST_EFFORT = "best-effort peeling"
RULE_THEOREM_ONLY = "theorem-certified, decomposition not found numerically"
RULE_BEYOND = "beyond proven rules"
RULE_NO_VECTOR = "no real symmetric product vector found numerically"

ENTANGLED_RULES = {RULE_RANK6_EMPTY, RULE_OBSTRUCTION}


@dataclass
class Certificate:
    """Outcome of a separability decision: the verdict, the rule that
    produced it, an optional constructive decomposition
    [(weight, ProductVector)], and numeric evidence."""
    verdict: str
    rule: str
    decomposition: list = None
    evidence: dict = field(default_factory=dict)

    def reconstruction(self, n):
        if not self.decomposition:
            return np.zeros((n, n))
        out = np.zeros((n, n))
        for w, pv in self.decomposition:
            v = pv.vector()
            out += w * np.outer(v, v)
        return out


class _CertifiedEntangled(Exception):
    """Raised inside the decomposition recursion when a component is
    provably entangled (complete empty enumeration at rank 6, or a complete
    enumeration that cannot reconstruct the component)."""

    def __init__(self, rule, transcript):
        super().__init__(rule)
        self.rule = rule
        self.transcript = transcript


def peel(rho, x, tol=RESIDUAL_TOL):
    """Remove the maximal multiple of the product projector along x:
    lambda = 1 / <x^(x d)| pinv(rho) |x^(x d)>, residual = rho - lambda P.
    The residual stays PSD and its rank drops by exactly one."""
    d = rho.parties
    pv = x if isinstance(x, ProductVector) else ProductVector(
        np.asarray(x, dtype=float), d)
    if pv.power != d:
        raise ValueError("product vector power does not match the party count")
    w = np.real(pv.vector())
    rng_sub, _, r = range_kernel(rho)
    resid = rng_sub.residual(w)
    if resid > tol:
        raise ValueError(
            f"product vector outside the range (residual {resid:.3e})")
    pinv = np.linalg.pinv(rho.matrix, rcond=1e-12, hermitian=True)
    val = float(np.real(w @ pinv @ w))
    if val <= 0:
        raise ValueError("nonpositive peel denominator")
    lam = 1.0 / val
    if lam <= 1e-14 * max(float(np.real(np.trace(rho.matrix))), 1.0):
        raise ValueError("degenerate peel weight")
    res_mat = np.real(rho.matrix) - lam * np.outer(w, w)
    residual = DensityMatrix(res_mat, rho.dims, check=True, psd_tol=1e-7)
    wr = np.linalg.eigvalsh(residual.matrix)
    lam_ref = max(float(np.linalg.eigvalsh(rho.matrix)[-1]), 1e-300)
    r2 = int(np.sum(wr > RANK_TOL * lam_ref))
    if r2 != r - 1:
        raise RuntimeError(f"peel changed rank {r} -> {r2}, expected {r - 1}")
    return lam, residual


def _pure_product_term(rho):
    """Single product term of a rank-one completely symmetric state."""
    d = rho.parties
    N = rho.dim
    w, V = np.linalg.eigh(rho.matrix)
    lam = float(w[-1])
    psi = np.real(V[:, -1])
    m = psi.reshape(N, N ** (d - 1)) if d > 1 else psi.reshape(N, 1)
    U, sv, _ = np.linalg.svd(m, full_matrices=False)
    x = np.real(U[:, 0])
    pv = ProductVector(x, d)
    vec = pv.vector()
    dev = min(float(np.linalg.norm(psi - vec)), float(np.linalg.norm(psi + vec)))
    if dev > 1e-8:
        raise RuntimeError(
            f"rank-one state is not a symmetric product ({dev:.3e})")
    return lam, pv


def _product_candidates(rho, exact=None, restarts=200, seed=0):
    """Real symmetric product vectors in range(rho), with completeness flag
    and search transcript."""
    d = rho.parties
    N = rho.dim
    rng_sub, _, r = range_kernel(rho)
    if exact is None and d == 2 and N <= 4:
        exact = rationalize_matrix(rho.matrix)
    res = symmetric_product_vectors(rng_sub, d, N, restarts=restarts,
                                    seed=seed, exact_state=exact)
    vectors = list(res)
    complete = res.complete
    if d == 2 and N == 3 and r >= 5 and not complete:
        try:
            pv = two_qutrit_product_step(rng_sub)
            if all(angular_distance(pv.local, q.local) > 1e-6 for q in vectors):
                vectors.append(pv)
        except (ValueError, RuntimeError):
            pass
    return vectors, complete, res.transcript


def _nnls_terms(rho, vectors, tol=RECON_TOL):
    """Nonnegative least-squares reconstruction of rho over the product
    projectors of the given vectors; None when the residual is too large."""
    if not vectors:
        return None
    mat = np.real(rho.matrix)
    cols = [np.real(pv.projector()).reshape(-1) for pv in vectors]
    A = np.array(cols).T
    b = mat.reshape(-1)
    try:
        w, _ = scipy.optimize.nnls(A, b)
    except RuntimeError:
        return None
    scale = max(1.0, float(np.linalg.norm(mat)))
    terms = [(float(wk), pv) for wk, pv in zip(w, vectors)
             if wk > 1e-12 * max(1.0, float(w.max(initial=0.0)))]
    if not terms:
        return None
    recon = sum(wk * np.outer(pv.vector(), pv.vector()) for wk, pv in terms)
    if float(np.linalg.norm(recon - mat)) > tol * scale:
        return None
    return terms


def _decompose_worker(rho, budget, seed, lam_ref=None, entangled_check=True):
    """Recursive constructive decomposition of a CS state into
    [(weight, local vector)] raw terms; None when the search gives up.

    Raises _CertifiedEntangled when a complete enumeration proves a
    component entangled."""
    d = rho.parties
    N = rho.dim
    mat = np.real(rho.matrix)
    tr = float(np.trace(mat))
    if lam_ref is None:
        lam_ref = max(float(np.linalg.eigvalsh(mat)[-1]), 1e-300)
    if tr <= 1e-11 * max(lam_ref, 1.0):
        return []
    w_all = np.linalg.eigvalsh(mat)
    r = int(np.sum(w_all > RANK_TOL * lam_ref))
    if r == 0:
        return []
    if N == 1:
        return [(tr, np.ones(1))]
    if d == 1:
        w, V = np.linalg.eigh(mat)
        keep = w > RANK_TOL * lam_ref
        return [(float(wk), np.real(vk))
                for wk, vk in zip(w[keep], V[:, keep].T)]

    # support restriction
    supported_dim = True
    restricted, B = restrict_to_support(rho)
    if restricted is not rho:
        sub = _decompose_worker(restricted, budget, seed, None,
                                entangled_check)
        if sub is None:
            return None
        return [(wk, B @ x) for wk, x in sub]

    # direct-sum pre-split
    red = find_reduction(rho)
    if red is not None:
        out = []
        embeds = red.embeddings()
        for E, comp in zip(embeds, red.components):
            sub = _decompose_worker(comp, budget, seed, None, entangled_check)
            if sub is None:
                return None
            out.extend((wk, E @ x) for wk, x in sub)
        return out

    if r == 1:
        lam, pv = _pure_product_term(rho)
        return [(lam, pv.local)]
    if N == 2:
        try:
            return [(wk, x) for wk, x in multiqubit_decompose(rho)]
        except (ValueError, RuntimeError):
            pass  # fall through to the generic search

    vectors, complete, transcript = _product_candidates(rho, seed=seed)
    if not vectors:
        if complete and entangled_check and d == 2 and r == 6:
            raise _CertifiedEntangled(RULE_RANK6_EMPTY, transcript)
        return None
    terms = _nnls_terms(rho, vectors)
    if terms is not None:
        return [(wk, pv.local) for wk, pv in terms]

    # depth-first peeling with backtracking
    for pv in vectors[:8]:
        if budget[0] <= 0:
            return None
        budget[0] -= 1
        try:
            lam, residual = peel(rho, pv)
        except (ValueError, RuntimeError):
            continue
        sub = _decompose_worker(residual, budget, seed, lam_ref,
                                entangled_check)
        if sub is not None:
            return [(lam, pv.local)] + sub
    if complete and entangled_check and d == 2 and r == 6:
        raise _CertifiedEntangled(RULE_OBSTRUCTION, transcript)
    return None


def _wrap_terms(raw, d, scale=1.0):
    """Raw (weight, local vector) pairs -> [(weight, ProductVector)] with
    unit locals and weights absorbing the local norms."""
    out = []
    for wk, x in raw:
        nrm = float(np.linalg.norm(x))
        if wk <= 0 or nrm <= 0:
            continue
        pv = ProductVector(np.real(np.asarray(x, dtype=float)), d)
        out.append((float(wk) * nrm ** (2 * d) * scale, pv))
    return out


def _embed_terms(terms, E, d, scale=1.0):
    """Push [(weight, ProductVector)] through the local embedding E, keeping
    the represented operator fixed: the local norm moves into the weight."""
    out = []
    for wk, pv in terms:
        x = E @ pv.local
        nrm = float(np.linalg.norm(x))
        if nrm <= 0:
            continue
        out.append((wk * nrm ** (2 * d) * scale, ProductVector(x, d)))
    return out


def _reconstruction_error(rho, terms):
    mat = np.real(rho.matrix)
    recon = np.zeros_like(mat)
    for wk, pv in terms:
        v = pv.vector()
        recon += wk * np.outer(v, v)
    return float(np.linalg.norm(recon - mat))


def s_decompose(rho, seed=0, budget=300):
    """Constructive symmetric decomposition of a completely symmetric state:
    rho = sum_i w_i (x_i x_i^T)^(x d).  Separable with the decomposition on
    success, Entangled when a complete enumeration certifies emptiness at
    rank 6, Undetermined when the numeric search gives up."""
    cs, dev = is_cs(rho)
    if not cs:
        raise ValueError(f"state is not completely symmetric (deviation {dev:.3e})")
    d = rho.parties
    evidence = {"cs_deviation": dev}
    try:
        raw = _decompose_worker(rho, [int(budget)], seed)
    except _CertifiedEntangled as exc:
        evidence["transcript"] = exc.transcript
        evidence["rank"] = rank_of(rho.matrix)
        return Certificate("Entangled", exc.rule, None, evidence)
    if raw is None:
        return Certificate("Undetermined", RULE_NO_VECTOR, None, evidence)
    terms = _wrap_terms(raw, d)
    err = _reconstruction_error(rho, terms)
    evidence["reconstruction"] = err
    evidence["terms"] = len(terms)
    if err > RECON_TOL * max(1.0, float(np.linalg.norm(rho.matrix))):
        return Certificate("Undetermined", RULE_NO_VECTOR, None, evidence)
    return Certificate("Separable", "constructive decomposition", terms,
                       evidence)


def _attach_decomposition(rho, verdict_rule, evidence, seed, budget):
    """Separable rule nodes call this to try the constructive route; on
    numeric failure the verdict stays with the theorem-only rule."""
    try:
        raw = _decompose_worker(rho, [int(budget)], seed,
                                entangled_check=False)
    except _CertifiedEntangled:
        raw = None
    if raw is None:
        evidence["theorem"] = verdict_rule
        return Certificate("Separable", RULE_THEOREM_ONLY, None, evidence)
    terms = _wrap_terms(raw, rho.parties)
    err = _reconstruction_error(rho, terms)
    evidence["reconstruction"] = err
    evidence["terms"] = len(terms)
    if err > RECON_TOL * max(1.0, float(np.linalg.norm(rho.matrix))):
        evidence["theorem"] = verdict_rule
        return Certificate("Separable", RULE_THEOREM_ONLY, None, evidence)
    return Certificate("Separable", verdict_rule, terms, evidence)


def _classify_core(rho, seed, budget, tol_rank=RANK_TOL):
    """Rule chain on a trace-normalized CS state."""
    d = rho.parties
    N = rho.dim
    evidence = {}

    restricted, B = restrict_to_support(rho, tol_rank)
    if restricted is not rho:
        sub = _classify_core(restricted, seed, budget, tol_rank)
        sub.evidence["support_restricted_to"] = restricted.dim
        if sub.decomposition:
            sub.decomposition = _embed_terms(sub.decomposition, B, d)
        return sub

    red = find_reduction(rho)
    if red is not None:
        embeds = red.embeddings()
        parts = []
        for E, comp in zip(embeds, red.components):
            parts.append((E, comp,
                          _classify_core(comp, seed, budget, tol_rank)))
        rules = [c.rule for _, _, c in parts]
        verdicts = [c.verdict for _, _, c in parts]
        evidence["components"] = rules
        evidence["component_verdicts"] = verdicts
        if "Entangled" in verdicts:
            k = verdicts.index("Entangled")
            cert = parts[k][2]
            evidence["transcript"] = cert.evidence.get("transcript")
            return Certificate("Entangled", cert.rule, None, evidence)
        if "Undetermined" in verdicts:
            return Certificate("Undetermined", RULE_DIRECT_SUM, None, evidence)
        terms = []
        ok = True
        for E, comp, cert in parts:
            if not cert.decomposition:
                ok = False
                break
            terms.extend(_embed_terms(cert.decomposition, E, d))
        if not ok:
            evidence["theorem"] = RULE_DIRECT_SUM
            return Certificate("Separable", RULE_THEOREM_ONLY, None, evidence)
        return Certificate("Separable", RULE_DIRECT_SUM, terms, evidence)

    r = rank_of(rho.matrix, tol_rank)
    evidence["rank"] = r
    if N <= 2:
        return _attach_decomposition(rho, RULE_MULTIQUBIT, evidence, seed,
                                     budget)
    if d == 2 and N <= 3:
        return _attach_decomposition(rho, RULE_QUTRIT, evidence, seed, budget)
    if r <= 5:
        return _attach_decomposition(rho, RULE_RANK5, evidence, seed, budget)
    if r == N:
        return _attach_decomposition(rho, RULE_RANK_N, evidence, seed, budget)
    if r == N + 1:
        return _attach_decomposition(rho, RULE_RANK_N1, evidence, seed,
                                     budget)
    if r == 6 or r == N + 2:
        vectors, complete, transcript = _product_candidates(rho, seed=seed)
        evidence["product_vectors"] = len(vectors)
        evidence["enumeration_complete"] = complete
        evidence["transcript"] = transcript
        if vectors:
            rule = RULE_RANK6_FOUND if r == 6 else RULE_RANK_N2
            return _attach_decomposition(rho, rule, evidence, seed, budget)
        if complete and d == 2 and r == 6:
            return Certificate("Entangled", RULE_RANK6_EMPTY, None, evidence)
        return Certificate("Undetermined", RULE_NO_VECTOR, None, evidence)

    # best effort beyond the proven rules
    try:
        raw = _decompose_worker(rho, [int(budget)], seed)
    except _CertifiedEntangled as exc:
        evidence["transcript"] = exc.transcript
        return Certificate("Entangled", exc.rule, None, evidence)
    if raw is not None:
        terms = _wrap_terms(raw, d)
        err = _reconstruction_error(rho, terms)
        evidence["reconstruction"] = err
        if err <= RECON_TOL * max(1.0, float(np.linalg.norm(rho.matrix))):
            evidence["terms"] = len(terms)
            return Certificate("Separable", RULE_BEST_EFFORT, terms, evidence)
    return Certificate("Undetermined", RULE_BEYOND, None, evidence)


def classify(rho, tol_rank=RANK_TOL, tol_psd=PSD_TOL, seed=0, budget=300):
    """Ordered decision chain for a completely symmetric state.  The chain
    runs on the state as given (every rule is scale-invariant, and keeping
    the original entries preserves exact rational structure); the
    certificate's decomposition reconstructs the input including its
    trace."""
    cs, dev = is_cs(rho)
    if not cs:
        raise ValueError(
            f"state is not completely symmetric (deviation {dev:.3e}); "
            "classify_symmetric handles general symmetric input")
    tr = rho.trace()
    if tr <= 0:
        raise ValueError("state has nonpositive trace")
    cert = _classify_core(rho, seed, budget, tol_rank)
    cert.evidence["cs_deviation"] = dev
    cert.evidence["trace"] = tr
    if cert.decomposition:
        cert.evidence["reconstruction"] = _reconstruction_error(
            rho, cert.decomposition)
    if cert.verdict == "Entangled" and cert.rule not in ENTANGLED_RULES:
        raise RuntimeError(f"entangled verdict with unsound rule {cert.rule!r}")
    return cert


def classify_symmetric(rho, seed=0):
    """Scanner entry for states supported on the symmetric subspace that
    need not be completely symmetric.  CS input delegates to classify; for
    the rest only sound positive rules fire, and entanglement is never
    declared (the certificate contract reserves Entangled for the
    product-vector rules)."""
    cs, dev = is_cs(rho)
    if cs:
        return classify(rho, seed=seed)
    evidence = {"cs_deviation": dev}
    ppt = is_ppt(rho)
    evidence["ppt"] = ppt
    if not ppt:
        return Certificate("Undetermined", "NPT diagnostic", None, evidence)
    N = rho.dim
    r = rank_of(rho.matrix)
    evidence["rank"] = r
    if N == 2 and r <= 4:
        return Certificate("Separable", "symmetric PPT rank at most 4", None,
                           evidence)
    pt_dev = max(
        float(np.abs(partial_transpose(rho, [k]) - rho.matrix).max())
        for k in range(rho.parties))
    evidence["pt_deviation"] = pt_dev
    scale = max(1.0, float(np.abs(rho.matrix).max()))
    if N == 2 and pt_dev <= 1e-8 * scale:
        return Certificate("Separable", "PT-invariant symmetric multiqubit",
                           None, evidence)
    return Certificate("Undetermined", RULE_BEYOND, None, evidence)


def bisep_equals_fullsep_check(rho, certificate=None, seed=0):
    """Consistency diagnostic: every decomposition term, viewed across any
    bipartition of the parties, is a product vector across that cut."""
    cert = certificate if certificate is not None else classify(rho, seed=seed)
    if cert.verdict != "Separable" or not cert.decomposition:
        return {"checked": False, "verdict": cert.verdict,
                "reason": "no decomposition available"}
    d = rho.parties
    N = rho.dim
    worst = 0.0
    cuts = 0
    for size in range(1, d // 2 + 1):
        for A in itertools.combinations(range(d), size):
            if 0 not in A:
                continue
            cuts += 1
            rest = [k for k in range(d) if k not in A]
            order = list(A) + rest
            dA = N ** len(A)
            for wk, pv in cert.decomposition:
                tens = pv.vector().reshape((N,) * d).transpose(order)
                m = tens.reshape(dA, N ** (d - len(A)))
                sv = np.linalg.svd(m, compute_uv=False)
                second = float(sv[1]) if len(sv) > 1 else 0.0
                worst = max(worst, second / max(float(sv[0]), 1e-300))
    return {"checked": True, "bipartitions": cuts,
            "terms": len(cert.decomposition),
            "max_second_singular_ratio": worst,
            "consistent": worst < 1e-10}
