"""Unit tests for the constructed reference states."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cssep import DensityMatrix, get_example, kron_power
from cssep.named_states import (EXAMPLES, blokovi_rows, build_blokovi,
                                build_entangled_rank6, build_gme_conditioned,
                                build_h_perturbation, build_h_test_state,
                                build_sigma, check_edge_extreme,
                                conditioned_lambdas)
from cssep.states import (is_cs, is_ppt, is_supported, partial_transpose,
                          range_kernel, rank_of)


def test_rank7_mixture_facts():
    """The uniform rank-7 mixture is symmetric, supported and rank 7."""
    named = build_sigma()
    rho = named.state
    assert rank_of(rho.matrix) == 7
    assert rho.trace() == pytest.approx(260.0, rel=1e-12)
    ok, dev = is_cs(rho)
    assert ok and dev < 1e-12
    assert is_supported(rho)
    assert named.exact is not None


def test_sigma_rejects_bad_weights():
    """Weight validation refuses wrong counts and nonpositive entries."""
    with pytest.raises(ValueError):
        build_sigma([1.0] * 6)
    with pytest.raises(ValueError):
        build_sigma([1.0] * 6 + [0.0])


def test_subtracted_state_facts():
    """The subtracted state is rank 6, symmetric, PT-invariant and PPT."""
    named = build_entangled_rank6()
    rho = named.state
    assert rank_of(rho.matrix) == 6
    ok, _ = is_cs(rho)
    assert ok
    assert is_ppt(rho)
    assert named.meta["pt_deviation"] < 1e-12
    assert named.params["lambda7"] == pytest.approx(162.0 / 212191.0, rel=1e-12)


def test_subtracted_state_sits_on_a_shared_denominator():
    """Scaling by the common denominator gives integers exactly."""
    named = build_entangled_rank6()
    scaled = named.state.matrix * 212191.0
    assert np.abs(scaled - np.round(scaled)).max() < 1e-6


def test_oversubtraction_is_rejected():
    """Subtraction weights beyond the PSD-maximal value raise."""
    with pytest.raises(ValueError):
        build_entangled_rank6(lambda7=162.0 / 212191.0 * 1.5)
    smaller = build_entangled_rank6(lambda7=1e-4)
    assert rank_of(smaller.state.matrix) == 7


def test_edge_extreme_flags_on_the_subtracted_state():
    """The subtracted state is a certified edge and extreme state."""
    named = build_entangled_rank6()
    report = check_edge_extreme(named)
    assert report.edge
    assert report.extreme
    assert report.certified
    assert report.product_vectors == []


def test_states_with_range_product_vectors_are_not_edge():
    """A rank-6 state with a product vector in its range fails the edge test."""
    fam = build_blokovi()
    report = check_edge_extreme(fam.rho)
    assert not report.edge
    assert not report.extreme
    assert report.certified
    assert len(report.product_vectors) >= 1


def test_edge_check_requires_rank_six():
    """The edge checker refuses states of the wrong rank."""
    sig = build_sigma()
    with pytest.raises(ValueError):
        check_edge_extreme(sig.state)


def test_conditioned_lambdas_satisfy_stationarity():
    """The default conditioned coefficients satisfy all four identities."""
    lam = conditioned_lambdas()
    assert lam[0] == pytest.approx(lam[3] + 3040 * lam[5] - 11000 / 81 * lam[7])
    assert lam[1] == pytest.approx(lam[3] + 2016 * lam[5])
    assert lam[2] == pytest.approx(lam[3] + 1056 * lam[5] - 11000 / 81 * lam[7])
    assert lam[5] == pytest.approx(lam[6])


def test_conditioned_state_is_nonnegative_and_symmetric():
    """The conditioned state is PSD, entrywise nonnegative and symmetric."""
    named = build_gme_conditioned()
    rho = named.state
    assert float(rho.matrix.min()) >= 0.0
    ok, _ = is_cs(rho)
    assert ok
    w = np.linalg.eigvalsh(rho.matrix)
    assert w.min() > -1e-10 * w.max()


def test_block_family_facts():
    """The block construction reproduces its rank and transpose identities."""
    fam = build_blokovi()
    assert rank_of(fam.alpha.matrix) == 4
    pt = partial_transpose(fam.alpha, [0])
    assert np.abs(pt - fam.alpha.matrix).max() == 0.0
    assert rank_of(fam.rho.matrix) == 6
    pt_rho = partial_transpose(fam.rho, [0])
    assert np.abs(pt_rho - fam.rho.matrix).max() == 0.0
    ok, dev = is_cs(fam.rho)
    assert not ok


def test_block_family_row_factorization():
    """The signed row combination factors exactly as u (x) v."""
    rows = blokovi_rows()
    assert rows["factorization_deviation"] == 0.0
    assert_allclose(rows["w"], np.kron(rows["u"], rows["v"]), atol=0.0)
    d = 1.0
    assert_allclose(rows["u"], [0.0, 1.0, 1.0 + d, 0.0], atol=0.0)
    assert_allclose(rows["v"], [1.0, 0.0, 0.0, -1.0], atol=0.0)


def test_block_family_product_vector_in_range():
    """The factored product vector lies inside the range of the state."""
    fam = build_blokovi()
    rows = blokovi_rows()
    rng_sub, _, _ = range_kernel(fam.rho)
    w = rows["w"] / np.linalg.norm(rows["w"])
    assert rng_sub.residual(w) < 1e-10


def test_block_family_parameter_validation():
    """Zero or negative block parameters are rejected."""
    with pytest.raises(ValueError):
        build_blokovi(a=0.0)
    with pytest.raises(ValueError):
        build_blokovi(b=-1.0)
    with pytest.raises(ValueError):
        build_blokovi(eps=-0.1)


def test_perturbation_device_on_its_test_state():
    """The rank-two perturbation keeps a symmetric window around zero."""
    named = build_h_test_state()
    rho = named.state
    ok, _ = is_cs(rho)
    assert ok
    H, (lo, hi) = build_h_perturbation(rho)
    w = sorted(np.round(np.linalg.eigvalsh(H), 10))
    assert w[0] == -2.0
    assert w[-1] == 2.0
    ok_h, _ = is_cs(H, dims=(4, 4))
    assert ok_h
    pt = partial_transpose(DensityMatrix(H, (4, 4), check=False), [0])
    assert_allclose(pt, H, atol=1e-14)
    assert lo < 0.0 < hi
    for eps in (lo, hi):
        w = np.linalg.eigvalsh(rho.matrix + eps * H)
        assert w.min() > -1e-12
    for eps in (1.05 * lo, 1.05 * hi):
        w = np.linalg.eigvalsh(rho.matrix + eps * H)
        assert w.min() < -1e-6


def test_perturbation_device_requires_its_vectors_in_range():
    """States missing the device vectors in their range are rejected."""
    x = np.array([0.0, 0.0, 1.0, 0.0])
    w = np.kron(x, x)
    rho = DensityMatrix(np.outer(w, w), (4, 4))
    with pytest.raises(ValueError):
        build_h_perturbation(rho)


def test_example_registry_and_unknown_name():
    """Every registered example builds; unknown names raise KeyError."""
    for name in EXAMPLES:
        named = get_example(name)
        assert named.name == name
        assert named.state.trace() > 0
        assert named.provenance
    with pytest.raises(KeyError, match="sigma"):
        get_example("nonsense")
