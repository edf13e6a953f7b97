import threading

import numpy as np
import pytest
from scipy.special import gamma, gammaln

from core.coefficients import conjugate_symbol
from core.errors import DimensionMismatchError, InvalidParameterError
from core.multipliers import (
    MultiplierCache,
    apply_D,
    apply_D_tilde,
    apply_small_multiplier,
    cache_stats,
    d_factors,
    d_tilde_factors,
    log_gamma_ratio,
    smallness_constant,
    stirling_defect,
)


class TestApplyD:
    def test_derivative_of_z(self, scalar):
        result = apply_D(1.0, scalar(0, 1))
        assert result.coeffs[1, 0, 0] == 2.0

    def test_zero_order_is_identity(self, make_symbol):
        phi = make_symbol(1, 2, 5)
        assert np.array_equal(apply_D(0.0, phi).coeffs, phi.coeffs)

    def test_half_order(self, scalar_vector):
        f = scalar_vector(0, 0, 0, 1)
        assert apply_D(0.5, f).coeffs[3, 0] == pytest.approx(2.0, abs=1e-15)

    def test_inverse(self, make_vector):
        f = make_vector(2, 3, 8)
        back = apply_D(1.7, apply_D(-1.7, f))
        assert np.allclose(back.coeffs, f.coeffs, rtol=1e-14, atol=0)

    def test_group_law(self, make_symbol):
        phi = make_symbol(3, 2, 10)
        for a, b in [(-3.0, 3.0), (0.5, 1.25), (-2.2, 0.7), (3.0, -1.0)]:
            lhs = apply_D(a, apply_D(b, phi)).coeffs
            rhs = apply_D(a + b, phi).coeffs
            assert np.allclose(lhs, rhs, rtol=1e-12, atol=0)

    def test_commutes_with_conjugation(self, make_symbol):
        phi = make_symbol(4, 3, 4)
        lhs = conjugate_symbol(apply_D(1.3, phi)).coeffs
        rhs = apply_D(1.3, conjugate_symbol(phi)).coeffs
        assert np.array_equal(lhs, rhs)

    def test_rejects_nonfinite_alpha(self, scalar):
        with pytest.raises(InvalidParameterError):
            apply_D(float("nan"), scalar(1))


class TestApplyDTilde:
    def test_order_one_matches_D(self, make_vector):
        f = make_vector(5, 2, 30)
        assert np.array_equal(apply_D_tilde(1.0, f).coeffs, apply_D(1.0, f).coeffs)

    def test_order_two_at_origin(self, scalar):
        phi = scalar(1, 1)
        assert apply_D_tilde(2.0, phi).coeffs[0, 0, 0] == pytest.approx(2.0)
        assert apply_D(2.0, phi).coeffs[0, 0, 0] == 1.0
        composite = apply_D_tilde(2.0, apply_D(-2.0, phi))
        assert composite.coeffs[0, 0, 0] == pytest.approx(2.0)

    def test_half_order_at_origin(self):
        factors = d_tilde_factors(0.5, 1)
        assert factors[0] == pytest.approx(np.sqrt(np.pi) / 2, rel=1e-14)

    def test_matches_gamma_ratio(self):
        n = np.arange(200, dtype=float)
        for alpha in (0.3, 1.5, 2.75):
            expected = np.exp(gammaln(1 + n + alpha) - gammaln(1 + n))
            assert np.allclose(d_tilde_factors(alpha, 200), expected, rtol=1e-12)

    def test_no_overflow_at_large_n(self):
        factors = d_tilde_factors(2.5, 10 ** 6)
        assert np.all(np.isfinite(factors))
        n = 10 ** 6 - 1
        assert factors[-1] / (1.0 + n) ** 2.5 == pytest.approx(1.0, rel=1e-5)

    def test_rejects_nonpositive(self, scalar):
        with pytest.raises(InvalidParameterError):
            apply_D_tilde(0.0, scalar(1))
        with pytest.raises(InvalidParameterError):
            apply_D_tilde(-1.0, scalar(1))


class TestLogGammaRatio:
    def test_small_and_large_branches_agree(self):
        x = np.array([1.0, 5.0, 9.5, 10.0, 50.0, 1e3])
        a = 1.75
        expected = gammaln(x + a) - gammaln(x)
        assert np.allclose(log_gamma_ratio(x, a), expected, rtol=1e-12, atol=1e-12)

    def test_subtract_power(self):
        x = np.array([2.0, 20.0, 200.0])
        expected = gammaln(x + 0.5) - gammaln(x) - 0.5 * np.log(x)
        assert np.allclose(log_gamma_ratio(x, 0.5, subtract_power=True), expected, rtol=0, atol=1e-12)


class TestSmallMultipliers:
    def test_harmonic_multiplier(self, scalar_vector):
        f = scalar_vector(0, 0, 1)
        lam = 1.0 / (1.0 + np.arange(3))
        result = apply_small_multiplier(lam, f)
        assert result.result.coeffs[2, 0] == pytest.approx(1.0 / 3.0)
        assert result.smallness == pytest.approx(1.0)

    def test_identity_multiplier(self, make_vector):
        f = make_vector(6, 2, 4)
        result = apply_small_multiplier(np.ones(5), f)
        assert np.array_equal(result.result.coeffs, f.coeffs)
        assert result.smallness == 5.0

    def test_length_mismatch(self, make_vector):
        with pytest.raises(DimensionMismatchError):
            apply_small_multiplier(np.ones(2), make_vector(1, 1, 4))

    def test_stirling_defect_smallness(self):
        alpha = 1.5
        lam = stirling_defect(alpha, 10 ** 6 + 1)
        constant = smallness_constant(lam)
        assert np.isfinite(constant)
        # (1 + n) lam_n tends to alpha (alpha - 1) / 2
        assert constant == pytest.approx(alpha * (alpha - 1) / 2, rel=1e-3)

        n = np.arange(200, dtype=float)
        direct = np.exp(gammaln(1 + n + alpha) - gammaln(1 + n) - alpha * np.log1p(n)) - 1
        assert np.allclose(lam[:200], direct, rtol=0, atol=1e-12)
        assert smallness_constant(lam[:200]) == pytest.approx(np.max((1 + n) * np.abs(direct)), rel=1e-8)

    def test_stirling_defect_composes_to_tilde(self, make_vector):
        f = make_vector(7, 1, 40)
        alpha = 0.8
        lam = stirling_defect(alpha, 41)
        via_defect = apply_small_multiplier(1.0 + lam, apply_D(alpha, f)).result
        assert np.allclose(via_defect.coeffs, apply_D_tilde(alpha, f).coeffs, rtol=1e-12, atol=0)

    def test_stirling_defect_first_entry(self):
        assert stirling_defect(1.5, 1)[0] == pytest.approx(gamma(2.5) - 1.0, rel=1e-13)


class TestMultiplierCache:
    def test_hits_and_misses(self):
        cache = MultiplierCache()
        calls = []

        def build():
            calls.append(1)
            return np.arange(4.0)

        first = cache.get("D", 1.0, 4, build)
        second = cache.get("D", 1.0, 4, build)
        assert first is second
        assert len(calls) == 1
        assert (cache.hits, cache.misses) == (1, 1)
        assert not first.flags.writeable

    def test_module_cache_stats(self):
        hits, misses = cache_stats()
        first = d_factors(0.3141, 11)
        second = d_factors(0.3141, 11)
        assert first is second
        assert cache_stats() == (hits + 1, misses + 1)

    def test_concurrent_lookups_are_counted(self):
        cache = MultiplierCache()
        cache.get("D", 2.0, 8, lambda: np.ones(8))

        results = []
        lock = threading.Lock()

        def worker():
            for _ in range(50):
                value = cache.get("D", 2.0, 8, lambda: np.zeros(8))
                with lock:
                    results.append(value)

        threads = [threading.Thread(target=worker) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(results) == 200
        assert all(r is results[0] for r in results)
        assert (cache.hits, cache.misses) == (200, 1)

    def test_clear(self):
        cache = MultiplierCache()
        cache.get("D", 1.0, 2, lambda: np.ones(2))
        cache.clear()
        assert (cache.hits, cache.misses) == (0, 0)
