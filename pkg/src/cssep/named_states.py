"""Reference states: the rank-7 symmetric mixture over eight product
directions, the rank-6 entangled state obtained from it by maximal
subtraction, the nonnegative coefficient family used by the entanglement
measure, the block-matrix counterexample with a product vector in its range,
and the rank-two perturbation device for edge checks."""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .product_search import (bipartite_product_vectors, rationalize_matrix,
                             symmetric_product_vectors)
from .states import (RANK_TOL, DensityMatrix, is_cs, is_ppt,
                     partial_transpose, range_kernel, rank_of)

# the eight local directions (rows); the last one is the subtraction
# direction and is not part of the positive mixture
X8 = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [1.0, 1.0, 1.0, 1.0],
    [1.0, 2.0, 3.0, 4.0],
    [1.0, -2.0, 3.0, -4.0],
    [1.0, -8.0 / 3.0, 1.0, -8.0 / 3.0],
])

X8_FRACTIONS = [
    [Fraction(1), Fraction(0), Fraction(0), Fraction(0)],
    [Fraction(0), Fraction(1), Fraction(0), Fraction(0)],
    [Fraction(0), Fraction(0), Fraction(1), Fraction(0)],
    [Fraction(0), Fraction(0), Fraction(0), Fraction(1)],
    [Fraction(1), Fraction(1), Fraction(1), Fraction(1)],
    [Fraction(1), Fraction(2), Fraction(3), Fraction(4)],
    [Fraction(1), Fraction(-2), Fraction(3), Fraction(-4)],
    [Fraction(1), Fraction(-8, 3), Fraction(1), Fraction(-8, 3)],
]

# maximal subtraction weight for the uniform mixture, verified numerically
# at build time
_LAMBDA_STAR_UNIFORM = Fraction(162, 212191)


@dataclass
class NamedState:
    """A constructed reference state with its parameters and a behavioral
    provenance label (what the construction is, not where it came from)."""
    name: str
    params: dict
    state: DensityMatrix
    provenance: str = ""
    exact: list = None          # rational matrix (rows of Fractions) if known
    meta: dict = field(default_factory=dict)


def _phi(x):
    return np.kron(np.asarray(x, dtype=float), np.asarray(x, dtype=float))


def _exact_outer_sum(weights, rows):
    """Rational sum_i w_i (x_i (x) x_i)(x_i (x) x_i)^T as Fraction rows."""
    n = 16
    out = [[Fraction(0)] * n for _ in range(n)]
    for w, x in zip(weights, rows):
        phi = [x[i // 4] * x[i % 4] for i in range(n)]
        for i in range(n):
            if phi[i] == 0:
                continue
            for j in range(n):
                out[i][j] += w * phi[i] * phi[j]
    return out


def build_sigma(lambdas=None):
    """Rank-7 completely symmetric 4 (x) 4 state: positive mixture of the
    first seven product directions."""
    if lambdas is None:
        lambdas = [1.0 / 7.0] * 7
    lambdas = [float(v) for v in lambdas]
    if len(lambdas) != 7:
        raise ValueError("exactly 7 mixture weights required")
    if min(lambdas) <= 0:
        raise ValueError("mixture weights must be strictly positive")
    mat = np.zeros((16, 16))
    for lam, x in zip(lambdas, X8[:7]):
        phi = _phi(x)
        mat += lam * np.outer(phi, phi)
    state = DensityMatrix(mat, dims=(4, 4))
    cs, dev = is_cs(state)
    if not cs:
        raise RuntimeError(f"construction lost complete symmetry ({dev:.3e})")
    r = rank_of(mat)
    if r != 7:
        raise RuntimeError(f"mixture rank {r} != 7")
    exact = None
    if all(abs(v - 1.0 / 7.0) < 1e-15 for v in lambdas):
        exact = _exact_outer_sum([Fraction(1, 7)] * 7, X8_FRACTIONS[:7])
    return NamedState(
        name="sigma",
        params={"lambdas": lambdas},
        state=state,
        provenance="rank-7 symmetric product mixture",
        exact=exact,
        meta={"vectors": X8.copy(), "rank": r},
    )


def _lambda_star(sigma_mat):
    """Maximal weight of the eighth product projector that can be subtracted
    while staying PSD: 1 / <phi_7| pinv(sigma) |phi_7>."""
    phi7 = _phi(X8[7])
    pinv = np.linalg.pinv(sigma_mat, rcond=1e-12)
    val = float(phi7 @ pinv @ phi7)
    if val <= 0:
        raise RuntimeError("ill-conditioned subtraction weight")
    return 1.0 / val


def build_entangled_rank6(lambdas=None, lambda7=None):
    """Rank-6 completely symmetric PPT-invariant 4 (x) 4 state: the rank-7
    mixture minus the maximal multiple of the eighth product projector.

    lambda7 overrides the subtraction weight (must not exceed the maximal
    value); the default uses the maximal weight so the rank drops to 6.
    """
    base = build_sigma(lambdas)
    sigma_mat = base.state.matrix
    lam_star = _lambda_star(sigma_mat)
    uniform = lambdas is None or all(
        abs(v - 1.0 / 7.0) < 1e-15 for v in base.params["lambdas"])
    if uniform:
        exact_star = float(_LAMBDA_STAR_UNIFORM)
        if abs(lam_star - exact_star) > 1e-12:
            raise RuntimeError(
                f"subtraction weight {lam_star!r} drifted from the exact "
                f"value {exact_star!r}")
        lam_star = exact_star
    lam = lam_star if lambda7 is None else float(lambda7)
    if lam <= 0:
        raise ValueError("subtraction weight must be positive")
    if lam > lam_star * (1 + 1e-12):
        raise ValueError(
            f"subtraction weight {lam} exceeds the PSD-maximal value "
            f"{lam_star}")
    phi7 = _phi(X8[7])
    mat = sigma_mat - lam * np.outer(phi7, phi7)
    state = DensityMatrix(mat, dims=(4, 4), psd_tol=1e-9)
    cs, dev = is_cs(state)
    if not cs:
        raise RuntimeError(f"construction lost complete symmetry ({dev:.3e})")
    if not is_ppt(state):
        raise RuntimeError("construction lost the PPT property")
    pt_dev = float(np.abs(partial_transpose(state, [0]) - state.matrix).max())
    r = rank_of(state.matrix)
    if lambda7 is None and r != 6:
        raise RuntimeError(f"maximal subtraction left rank {r}, expected 6")
    exact = None
    if uniform and lambda7 is None:
        weights = [Fraction(1, 7)] * 7 + [-_LAMBDA_STAR_UNIFORM]
        exact = _exact_outer_sum(weights, X8_FRACTIONS)
    return NamedState(
        name="entangled-rank6",
        params={"lambdas": base.params["lambdas"], "lambda7": lam},
        state=state,
        provenance="rank-6 state from maximal product-projector subtraction",
        exact=exact,
        meta={"lambda_star": lam_star, "rank": r, "pt_deviation": pt_dev,
              "vectors": X8.copy()},
    )


def conditioned_lambdas(l3=1.0, l4=1.0, l5=2.5e-4, l7=1e-4):
    """Coefficient vector (lambda_0..lambda_7) satisfying the stationarity
    conditions that make a = (1,1,1,1)/2 a KKT point of the overlap
    maximization:
        lambda_0 = lambda_3 + 3040*lambda_5 - (11000/81)*lambda_7
        lambda_1 = lambda_3 + 2016*lambda_5
        lambda_2 = lambda_3 + 1056*lambda_5 - (11000/81)*lambda_7
        lambda_5 = lambda_6
    """
    l3, l4, l5, l7 = float(l3), float(l4), float(l5), float(l7)
    l0 = l3 + 3040.0 * l5 - (11000.0 / 81.0) * l7
    l1 = l3 + 2016.0 * l5
    l2 = l3 + 1056.0 * l5 - (11000.0 / 81.0) * l7
    return np.array([l0, l1, l2, l3, l4, l5, l5, l7])


def build_gme_conditioned(l3=1.0, l4=1.0, l5=2.5e-4, l7=1e-4):
    """Entrywise-nonnegative PSD member of the subtraction family with
    coefficients satisfying the KKT stationarity conditions."""
    lam = conditioned_lambdas(l3, l4, l5, l7)
    named = build_entangled_rank6(lambdas=lam[:7], lambda7=lam[7])
    mat = named.state.matrix
    scale = max(1.0, float(np.abs(mat).max()))
    min_entry = float(mat.min())
    if min_entry < -1e-12 * scale:
        raise ValueError(
            f"coefficients give a negative matrix entry ({min_entry:.3e})")
    named.name = "gme-conditioned"
    named.params = {"lambdas": [float(v) for v in lam]}
    named.provenance = "nonnegative conditioned subtraction family"
    named.meta["min_entry"] = min_entry
    named.meta["lambdas"] = lam.copy()
    return named


@dataclass
class EdgeReport:
    """Outcome of the edge/extreme verification: edge means no product
    vector in the range; extreme additionally needs rank 6 and complete
    symmetry.  certified is True when the product-vector enumeration was
    provably complete (edge) or a vector was exhibited (not edge)."""
    edge: bool
    extreme: bool
    certified: bool
    product_vectors: list
    transcript: dict = field(default_factory=dict)


def check_edge_extreme(state, seed=0, starts=200):
    """Edge/extreme flags for a 4 (x) 4 rank-6 state.

    Completely symmetric input: the symmetric product-vector enumeration
    runs (exactly when the entries are rational), and an empty certified
    enumeration proves the edge property.  Other input: a general product
    search runs; finding a vector disproves edge, finding none leaves the
    flag uncertified.
    """
    rho = state.state if isinstance(state, NamedState) else state
    exact = state.exact if isinstance(state, NamedState) else None
    if rho.dims != (4, 4):
        raise ValueError(f"edge check needs local dimensions (4, 4), got {rho.dims}")
    r = rank_of(rho.matrix)
    if r != 6:
        raise ValueError(f"edge check needs rank 6, got rank {r}")
    rng_sub, _, _ = range_kernel(rho)
    cs, dev = is_cs(rho)
    transcript = {"cs": cs, "cs_deviation": dev, "rank": r}
    vectors = []
    certified = False
    if cs:
        if exact is None:
            exact = rationalize_matrix(rho.matrix)
        res = symmetric_product_vectors(rng_sub, 2, 4, exact_state=exact,
                                        restarts=starts, seed=seed)
        vectors = [(pv.local, pv.local) for pv in res]
        certified = res.complete
        transcript["symmetric_search"] = res.transcript
        pairs = bipartite_product_vectors(rng_sub, (4, 4), starts=60, seed=seed)
        transcript["general_search_hits"] = len(pairs)
        for u, v in pairs:
            if all(np.linalg.norm(np.kron(u, v) - np.kron(a, b)) > 1e-6
                   and np.linalg.norm(np.kron(u, v) + np.kron(a, b)) > 1e-6
                   for a, b in vectors):
                vectors.append((u, v))
    else:
        vectors = bipartite_product_vectors(rng_sub, (4, 4), starts=starts,
                                            seed=seed)
        transcript["general_search_hits"] = len(vectors)
    edge = len(vectors) == 0
    if edge:
        certified = bool(certified)
    else:
        certified = True   # an exhibited vector disproves the edge property
        transcript["example_vector"] = [np.round(vectors[0][0], 12).tolist(),
                                        np.round(vectors[0][1], 12).tolist()]
    extreme = edge and (r == 6) and cs
    return EdgeReport(edge=edge, extreme=extreme, certified=certified,
                      product_vectors=vectors, transcript=transcript)


BlokoviFamily = namedtuple("BlokoviFamily", ["alpha", "beta", "rho", "params"])


def _blokovi_blocks(a, b, c, d):
    C0 = np.array([
        [0.0, a, b],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0],
    ])
    C1 = np.array([
        [0.0, 0.0, 0.0],
        [0.0, 0.0, c],
        [0.0, 0.0, 1.0],
        [1.0, 0.0, -1.0 / d],
    ])
    C2 = np.array([
        [0.0, -1.0 / b, 0.0],
        [0.0, 1.0, 0.0],
        [1.0, -c, 0.0],
        [d, 0.0, 0.0],
    ])
    G = np.zeros((4, 9))
    for p, C in enumerate((C0, C1, C2)):
        G[:, 3 * p: 3 * p + 3] = C
    return G


def build_blokovi(a=1.0, b=1.0, c=1.0, d=1.0, eps=1e-2):
    """Block-matrix family: a rank-4 two-qutrit state alpha with
    alpha^(T1) = alpha, its image beta under the local embedding
    |0> -> |3>, |1> -> |1>, |2> -> |2> on the second factor, and the rank-6
    4 (x) 4 state rho = alpha + eps*beta (both embedded into 4-level
    parties).  rho's range contains an explicit product vector."""
    a, b, c, d, eps = map(float, (a, b, c, d, eps))
    if a == 0:
        raise ValueError("parameter a must be nonzero")
    if min(b, c, d) <= 0:
        raise ValueError("parameters b, c, d must be positive")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    G = _blokovi_blocks(a, b, c, d)
    # Gram matrices are exactly symmetric and PSD; skip the constructor's
    # clamping pass so the stored entries keep exact transpose invariance.
    alpha_mat = G.T @ G
    alpha = DensityMatrix(alpha_mat, dims=(3, 3), check=False)
    P_loc = np.zeros((4, 3))
    P_loc[3, 0] = 1.0
    P_loc[1, 1] = 1.0
    P_loc[2, 2] = 1.0
    lift = np.kron(np.eye(3), P_loc)
    beta_mat = lift @ alpha_mat @ lift.T
    beta = DensityMatrix(beta_mat, dims=(3, 4), check=False)
    E = np.zeros((4, 3))
    E[:3, :3] = np.eye(3)
    embA = np.kron(E, E)
    embB = np.kron(E, np.eye(4))
    rho_mat = embA @ alpha_mat @ embA.T + eps * (embB @ beta_mat @ embB.T)
    rho = DensityMatrix(rho_mat, dims=(4, 4), check=False)
    pt_alpha = partial_transpose(alpha, [0])
    if float(np.abs(pt_alpha - alpha_mat).max()) > 1e-13 * max(
            1.0, float(np.abs(alpha_mat).max())):
        raise RuntimeError("first-party transpose no longer fixes alpha")
    pt_rho_dev = float(np.abs(partial_transpose(rho, [0]) - rho_mat).max())
    if pt_rho_dev > 1e-12 * max(1.0, float(np.abs(rho_mat).max())):
        raise RuntimeError("first-party transpose no longer fixes rho")
    return BlokoviFamily(alpha=alpha, beta=beta, rho=rho,
                         params={"a": a, "b": b, "c": c, "d": d, "eps": eps})


def blokovi_rows(a=1.0, b=1.0, c=1.0, d=1.0):
    """The six distinct row vectors spanning the range of the block-matrix
    rho, and the explicit product vector in their span:
    w = gamma3 - gamma5 + gamma4 - gamma6 = u (x) v with
    u = e1 + (1+d) e2 and v = e0 - e3 (0-based)."""
    G = _blokovi_blocks(float(a), float(b), float(c), float(d))
    P_loc = np.zeros((4, 3))
    P_loc[3, 0] = 1.0
    P_loc[1, 1] = 1.0
    P_loc[2, 2] = 1.0
    E = np.zeros((4, 3))
    E[:3, :3] = np.eye(3)
    embA = np.kron(E, E)
    embB = np.kron(E, np.eye(4))
    lift = np.kron(np.eye(3), P_loc)
    gammas = [embA @ G[i, :] for i in range(4)]
    gammas += [embB @ (lift @ G[i, :]) for i in (2, 3)]
    u = np.zeros(4)
    u[1] = 1.0
    u[2] = 1.0 + float(d)
    v = np.zeros(4)
    v[0] = 1.0
    v[3] = -1.0
    w = gammas[2] - gammas[4] + gammas[3] - gammas[5]
    dev = float(np.abs(w - np.kron(u, v)).max())
    return {"gammas": gammas, "u": u, "v": v, "w": w,
            "factorization_deviation": dev}


def build_h_perturbation(rho, tol=1e-9):
    """Rank-two perturbation device H = s s^T - t t^T with
    s = |01> + |10> and t = |00> - |11| on the first two levels of a
    bipartite state's parties.  Requires s and t inside range(rho); returns
    (H, (eps_lo, eps_hi)) with rho + eps*H PSD exactly for eps in the
    window."""
    if rho.parties != 2:
        raise ValueError("perturbation device is bipartite")
    N = rho.dim
    if N < 2:
        raise ValueError("local dimension must be at least 2")
    s = np.zeros(N * N)
    s[0 * N + 1] = 1.0
    s[1 * N + 0] = 1.0
    t = np.zeros(N * N)
    t[0 * N + 0] = 1.0
    t[1 * N + 1] = -1.0
    rng_sub, _, _ = range_kernel(rho)
    for name, vec in (("|01>+|10>", s), ("|00>-|11>", t)):
        resid = rng_sub.residual(vec / np.linalg.norm(vec))
        if resid > tol:
            raise ValueError(
                f"precondition vector {name} outside the range "
                f"(residual {resid:.3e})")
    H = np.outer(s, s) - np.outer(t, t)
    w, V = np.linalg.eigh(rho.matrix)
    top = float(w[-1])
    keep = w > RANK_TOL * max(top, 1e-300)
    B = V[:, keep]
    wk = w[keep]
    W = (B / np.sqrt(wk)).T @ H @ (B / np.sqrt(wk))
    mu = np.linalg.eigvalsh((W + W.T) / 2.0)
    # rho + eps H >= 0 iff 1 + eps mu_i >= 0 on the support for every i
    hi = math.inf if mu[0] >= 0 else -1.0 / mu[0]
    lo = -math.inf if mu[-1] <= 0 else -1.0 / mu[-1]
    return H, (lo, hi)


def build_h_test_state(N=4):
    """Completely symmetric separable bipartite state whose range contains
    the perturbation-device vectors: an even mixture of x (x) x over
    e0, e1, (e0+e1)/sqrt(2), (e0-e1)/sqrt(2), e2, ..."""
    if N < 2:
        raise ValueError("local dimension must be at least 2")
    xs = [np.eye(N)[0], np.eye(N)[1],
          (np.eye(N)[0] + np.eye(N)[1]) / math.sqrt(2),
          (np.eye(N)[0] - np.eye(N)[1]) / math.sqrt(2)]
    xs += [np.eye(N)[k] for k in range(2, N)]
    mat = np.zeros((N * N, N * N))
    for x in xs:
        w = np.kron(x, x)
        mat += np.outer(w, w)
    mat /= len(xs)
    state = DensityMatrix(mat, dims=(N, N))
    return NamedState(
        name="h-test",
        params={"dim": N, "terms": len(xs)},
        state=state,
        provenance="separable mixture supporting the perturbation device",
        meta={"vectors": [x.copy() for x in xs]},
    )


def _blokovi_example():
    fam = build_blokovi()
    return NamedState(
        name="blokovi",
        params=fam.params,
        state=fam.rho,
        provenance="block-matrix state with a range product vector")


EXAMPLES = {
    "sigma": build_sigma,
    "entangled-rank6": build_entangled_rank6,
    "gme-conditioned": build_gme_conditioned,
    "blokovi": _blokovi_example,
    "h-test": build_h_test_state,
}


def get_example(name):
    if name not in EXAMPLES:
        known = ", ".join(sorted(EXAMPLES))
        raise KeyError(f"unknown example {name!r}; known: {known}")
    return EXAMPLES[name]()
