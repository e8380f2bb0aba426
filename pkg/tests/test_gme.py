"""Unit tests for the geometric entanglement measure on nonnegative states."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cssep import DensityMatrix, kron_power
from cssep.gme import (brute_force_overlap, gme_closed_form,
                       gme_power_iteration, overlap_contraction, two_copy,
                       verify_kkt)
from cssep.named_states import build_gme_conditioned, conditioned_lambdas


def nonnegative_mixture(rng, parties, dim, terms):
    """Mixture of nonnegative product projectors (entrywise nonnegative)."""
    mat = np.zeros((dim ** parties, dim ** parties))
    for _ in range(terms):
        x = np.abs(rng.standard_normal(dim)) + 0.05
        x /= np.linalg.norm(x)
        w = kron_power(x, parties)
        mat += rng.uniform(0.2, 1.0) * np.outer(w, w)
    return DensityMatrix(mat, (dim,) * parties)


def test_contraction_matches_overlap_gradient():
    """a . c(a) equals the overlap <a..a| rho |a..a>."""
    rng = np.random.default_rng(0)
    rho = nonnegative_mixture(rng, 3, 2, 2)
    a = np.abs(rng.standard_normal(2))
    a /= np.linalg.norm(a)
    c = overlap_contraction(rho.matrix, a, 3)
    w = kron_power(a, 3)
    assert float(a @ c) == pytest.approx(float(w @ rho.matrix @ w), rel=1e-12)


def test_pure_product_state_has_unit_overlap():
    """A product projector reaches overlap one at its own direction."""
    x = np.array([0.6, 0.8])
    w = kron_power(x, 2)
    rho = DensityMatrix(np.outer(w, w), (2, 2))
    res = gme_power_iteration(rho)
    assert res.converged
    assert res.mu == pytest.approx(1.0, abs=1e-9)
    assert res.gme == pytest.approx(0.0, abs=1e-8)
    assert min(np.linalg.norm(res.maximizer - x),
               np.linalg.norm(res.maximizer + x)) < 1e-6


def test_power_iteration_satisfies_its_own_kkt():
    """The reported maximizer passes stationarity on the normalized state."""
    rng = np.random.default_rng(1)
    rho = nonnegative_mixture(rng, 2, 3, 4)
    res = gme_power_iteration(rho)
    assert res.converged
    norm = DensityMatrix(rho.matrix / rho.trace(), rho.dims, check=False)
    assert verify_kkt(norm, res.maximizer, res.mu)
    assert not verify_kkt(norm, res.maximizer, res.mu + 1e-3)


def test_power_iteration_agrees_with_grid_oracle():
    """Two independent maximizations land on the same overlap."""
    rng = np.random.default_rng(2)
    rho = nonnegative_mixture(rng, 2, 3, 3)
    res = gme_power_iteration(rho)
    mu_grid, _ = brute_force_overlap(rho, samples=4000)
    assert res.mu == pytest.approx(mu_grid, abs=1e-7)


def test_negative_entries_are_rejected():
    """The overlap maximization requires entrywise-nonnegative input."""
    v = np.array([1.0, -1.0]) / math.sqrt(2.0)
    w = np.kron(v, v)
    rho = DensityMatrix(np.outer(w, w), (2, 2))
    with pytest.raises(ValueError):
        gme_power_iteration(rho)


def test_closed_form_requires_the_stationarity_conditions():
    """Perturbing one coefficient violates the closed-form preconditions."""
    lam = conditioned_lambdas()
    gme_closed_form(lam)
    bad = list(lam)
    bad[1] += 1e-3
    with pytest.raises(ValueError):
        gme_closed_form(bad)
    with pytest.raises(ValueError):
        gme_closed_form([1.0] * 7)


def test_closed_form_matches_power_iteration():
    """Formula and iteration agree on the conditioned state."""
    named = build_gme_conditioned()
    lam = conditioned_lambdas()
    closed = gme_closed_form(lam)
    res = gme_power_iteration(named.state)
    assert res.converged
    assert res.mu == pytest.approx(closed.mu, abs=1e-9)
    assert_allclose(np.abs(res.maximizer), closed.maximizer, atol=1e-6)
    assert verify_kkt(named.state.normalized(), closed.maximizer, closed.mu)


def test_two_copy_shapes_and_trace():
    """The two-copy state merges parties and squares the trace."""
    rng = np.random.default_rng(3)
    rho = nonnegative_mixture(rng, 2, 2, 2)
    double = two_copy(rho)
    assert double.dims == (4, 4)
    assert double.trace() == pytest.approx(rho.trace() ** 2, rel=1e-12)


def test_two_copy_overlap_multiplies_for_products():
    """Product inputs give exactly the squared overlap on two copies."""
    x = np.array([0.8, 0.6])
    w = kron_power(x, 2)
    rho = DensityMatrix(np.outer(w, w), (2, 2))
    res1 = gme_power_iteration(rho)
    res2 = gme_power_iteration(two_copy(rho))
    assert res2.mu == pytest.approx(res1.mu ** 2, abs=1e-9)
