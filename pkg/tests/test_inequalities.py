import math

import numpy as np
import pytest
from hypothesis import given, settings

from bolab import inequalities as lab
from bolab.spectral import SpectralField, dx, hilbert, multiply, norm_sq, sobolev_norm
from conftest import convolve_direct, cos_field, fields, quad, random_field, sin_field


def close(f, g, atol):
    K = max(f.max_mode, g.max_mode)
    return np.allclose(f.resize(K).coeffs, g.resize(K).coeffs, rtol=0, atol=atol)


def scale(*fs, r=3):
    return float(np.prod([1 + sobolev_norm(f, r) for f in fs]))


# -- exact identities against quadrature ----------------------------------------------


@given(fields(max_K=8))
@settings(max_examples=30, deadline=None)
def test_cancellation_terms_match_quadrature_and_cancel(u):
    a, b = lab.cancellation_terms(u)
    ux = dx(u)
    qa = quad(hilbert(dx(convolve_direct(u, ux))), u)
    qb = quad(dx(convolve_direct(u, hilbert(ux))), u)
    tol = 1e-11 * scale(u) ** 3
    assert a == pytest.approx(qa, abs=tol) and b == pytest.approx(qb, abs=tol)
    assert lab.check_cancellation(u) <= 1e-12 * scale(u) ** 3


@given(fields(max_K=6), fields(max_K=6), fields(max_K=6))
@settings(max_examples=30, deadline=None)
def test_third_derivative_identity(f, g, h):
    lhs, rhs = lab.good1_sides(f, g, h)
    oracle = 3 * quad(dx(f), dx(g), dx(h))
    tol = 1e-11 * scale(f, g, h)
    assert rhs == pytest.approx(oracle, abs=tol)
    assert lab.check_good1(f, g, h) <= tol


@given(fields(max_K=8), fields(max_K=8))
@settings(max_examples=30, deadline=None)
def test_integration_by_parts_and_reduction(f, g):
    lhs, rhs = lab.ibp_sides(f, g)
    assert lhs == pytest.approx(quad(f, dx(g), g), abs=1e-11 * scale(f, g) ** 2)
    assert abs(lhs - rhs) <= 1e-12 * scale(f, g) ** 2
    lhs, rhs = lab.reduction_sides(f, g)
    assert abs(lhs - rhs) <= 1e-12 * scale(f, g) ** 2


def test_identity_residuals_on_random_fields(rng):
    res = lab.identity_residuals([random_field(16, rng) for _ in range(12)])
    assert set(res) == {"cancellation", "third-derivative", "integration-by-parts",
                        "hilbert-reduction", "remainder-constant"}
    assert max(res.values()) <= lab.IDENTITY_RTOL


# -- commutator remainders ------------------------------------------------------------


@given(fields(max_K=8), fields(max_K=8))
@settings(max_examples=30, deadline=None)
def test_second_order_remainder_is_a_single_product(f, g):
    # with D^2 = -d^2, the Leibniz rule leaves only -3 f'' g''
    expected = convolve_direct(dx(f, 2), dx(g, 2)) * -3
    assert close(lab.compute_Ps(f, g, 2), expected, 1e-10 * scale(f, g, r=4))


@pytest.mark.parametrize("s", [1.0, 2.0, 3.5])
def test_remainder_vanishes_for_constant_first_argument(rng, s):
    g = random_field(12, rng)
    one = SpectralField.from_modes({0: 2.0}, 12)
    for P in (lab.compute_Ps, lab.compute_Qs):
        assert np.abs(P(one, g, s).coeffs).max() <= 1e-12 * sobolev_norm(g, s + 2)
    # the literal form keeps f_x in the third term and does not vanish
    assert np.abs(lab.compute_Ps(one, g, s, literal=True).coeffs).max() > 1e-3


def test_remainder_rejects_small_index(rng):
    with pytest.raises(ValueError):
        lab.compute_Ps(random_field(4, rng), random_field(4, rng), 0.5)


def test_hilbert_commutator_examples():
    # high-low interaction vanishes; low-high leaves the difference-frequency mode
    assert close(lab.hilbert_commutator(cos_field(1), cos_field(3)), SpectralField.zeros(4), 1e-14)
    assert close(lab.hilbert_commutator(cos_field(3), cos_field(1)), sin_field(2, 4), 1e-14)
    one = SpectralField.from_modes({0: 1.0}, 3)
    assert close(lab.hilbert_commutator(one, cos_field(2)), SpectralField.zeros(3), 1e-14)


def test_general_commutator_matches_definition(rng):
    f, h = random_field(6, rng), random_field(6, rng)
    A = lab.lambda_multiplier(2.5, "D")
    expected = A(multiply(f, h)) - multiply(f, A(h))
    assert close(lab.commutator(A, f, h), expected, 1e-12)
    with pytest.raises(ValueError):
        lab.lambda_multiplier(2, "X")


# -- interpolation and per-mode bounds ----------------------------------------------------


def test_lp_norm_of_cosine():
    c = cos_field(1)
    assert lab.lp_norm(c, 2) == pytest.approx(math.sqrt(math.pi))
    assert lab.lp_norm(c, 4) == pytest.approx((3 * math.pi / 4) ** 0.25)
    assert lab.lp_norm(c, math.inf) == pytest.approx(1.0)


def test_gagliardo_nirenberg_ratios_are_bounded():
    corpus = lab.random_corpus(40, 32, (2.0, 2.0), seed=3)
    for l, s, p in ((0, 1.0, math.inf), (1, 2.0, 4.0), (0, 2.0, 2.0)):
        est = lab.check_gagliardo_nirenberg(corpus, l, s, p)
        assert 0 < est.max_ratio < 10
    with pytest.raises(ValueError):
        lab.check_gagliardo_nirenberg(corpus, 2, 2.0, 4.0)
    with pytest.raises(ValueError):
        lab.check_gagliardo_nirenberg(corpus, 0, 2.0, 1.0)


def test_frequency_bound_and_field_residual(rng):
    assert lab.check_freq_est(2**10)
    for k in (0, 1, 2, 3):
        f = random_field(24, rng, decay=0.5)
        lhs, rhs = lab.freq_est_residual(f, k)
        assert lhs <= rhs * (1 + 1e-12)


# -- corpora and estimates -------------------------------------------------------------------


def test_corpus_extends_under_doubling():
    a = lab.random_corpus(5, 16, seed=4)
    b = lab.random_corpus(10, 16, seed=4)
    c = lab.random_corpus(5, 32, seed=4)
    for x, y, z in zip(a, b, c):
        assert x.seed == y.seed == z.seed
        assert np.array_equal(x.f.coeffs, y.f.coeffs)
        # same phases on the shared modes; only the normalization differs
        ratio = z.f.coeffs[1:17] / x.f.coeffs[1:]
        assert np.allclose(ratio, ratio[0]) and abs(ratio[0].imag) < 1e-12


def test_constant_estimate_rejects_nonfinite_and_records():
    with pytest.raises(ValueError):
        lab.ConstantEstimate("x", {}, 1, math.inf)
    est = lab.ConstantEstimate("x", {"s": 3}, 4, 1.5, 7, 0)
    assert est.record()["max_ratio"] == 1.5


def test_estimate_argmax_seed_identifies_worst_probe():
    corpus = lab.random_corpus(20, 16, (3.6, 0.0), seed=2)
    est = lab.check_hilbert_commutator(corpus, 2.6, 1)
    worst = next(c for c in corpus if c.seed == est.argmax_seed)
    single = lab.check_hilbert_commutator([(worst.f, worst.g)], 2.6, 1)
    assert single.max_ratio == est.max_ratio
    assert est.n_samples == 20 and est.corpus_seed == 2


def test_zero_pairs_are_skipped():
    z = SpectralField.zeros(8)
    est = lab.check_hilbert_commutator([(z, z), (cos_field(1, 8), cos_field(3, 8))], 2.6, 1)
    assert est.n_skipped == 1


def test_estimates_reject_bad_parameters():
    corpus = lab.random_corpus(2, 8)
    with pytest.raises(ValueError):
        lab.check_commutator_bounds(corpus, 3.0, 2.5)
    with pytest.raises(ValueError):
        lab.check_comm_est2(corpus, 3.0, 2.6, "iii")
    with pytest.raises(ValueError):
        lab.check_good2(corpus, 3.0, 2.6, "iii")
    with pytest.raises(ValueError):
        lab.check_hilbert_commutator(corpus, 2.6, 0)


def test_identity_checked_estimates_are_finite():
    corpus = lab.random_corpus(20, 16, (3.0, 3.0), seed=1)
    assert 0 < lab.check_ibp(corpus, 2.6).max_ratio < math.inf
    assert 0 < lab.check_reduction(corpus, 2.6).max_ratio < math.inf


def test_standard_estimates_and_report():
    ests = lab.standard_estimates(16, 20)
    assert len(ests) == 10
    assert all(0 < e.max_ratio < math.inf for e in ests)
    rep = lab.LabReport(ests, {"cancellation": 0.0})
    d = rep.to_dict()
    assert d["note"] == lab.DISCLAIMER and len(d["estimates"]) == 10
    assert "evidence" in rep.to_json()


def test_difference_loss_lhs_is_zero_for_equal_fields(rng):
    u = random_field(12, rng)
    assert lab.difference_loss_lhs(u, u, 3.0) == pytest.approx(0, abs=1e-12)
    assert lab.difference_loss_rhs(u, u, 3.0, 2.6) == pytest.approx(0, abs=1e-12)
    assert norm_sq(u) > 0
