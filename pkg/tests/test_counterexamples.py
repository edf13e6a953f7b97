import numpy as np
import pytest
from scipy.special import zeta

from core.coefficients import OperatorSymbol, conjugate_symbol
from core.counterexamples import (
    DP1Config,
    DP2Config,
    bennett_gap,
    dp1_closed_form,
    dp1_row,
    dp1_section,
    dp1_section_norms,
    dp1_symbol,
    dp2_compression_check,
    dp2_growth,
    dp2_schur_matrix,
    dp2_symbol_bound,
    dp2_symbol_from_matrix,
    lacunary_indices,
    lacunary_symbol,
    order_control_ratio,
    order_control_ratios,
    primitive_norm_check,
    schur_ascent,
    schur_lower_bound,
    schur_product,
    schur_witness_family,
)
from core.errors import DimensionMismatchError, InvalidParameterError
from core.experiment_runner import ExperimentRunner
from core.hankel import assemble
from core.linalg import sigma_max
from core.spaces import bloch_norm

SQRT_ZETA3 = float(np.sqrt(zeta(3)))


def _harmonic(n):
    return float(np.sum(1.0 / np.arange(1, n + 1)))


class TestDP1Config:
    def test_default_betas(self):
        betas = DP1Config(1.0, 3).betas()
        assert np.allclose(betas, (1.0 + np.arange(4)) ** -1.5)

    def test_callable_rule(self):
        cfg = DP1Config(1.0, 4, beta_rule=lambda n, a: np.ones_like(n))
        assert np.array_equal(cfg.betas(), np.ones(5))

    def test_callable_rule_shape_checked(self):
        cfg = DP1Config(1.0, 4, beta_rule=lambda n, a: np.ones(2))
        with pytest.raises(InvalidParameterError):
            cfg.betas()

    def test_rejects_unknown_rule(self):
        with pytest.raises(InvalidParameterError):
            DP1Config(1.0, 4, beta_rule="harmonic")

    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(InvalidParameterError):
            DP1Config(0.0, 4)


class TestDP1:
    def test_truncation_zero(self):
        row = dp1_row(DP1Config(1.0, 0))
        assert row.right_norm == pytest.approx(1.0)
        assert row.left_norm == pytest.approx(1.0)
        assert row.closed_right == pytest.approx(1.0)
        assert row.closed_left == pytest.approx(1.0)

    def test_zero_rule(self):
        closed = dp1_closed_form(DP1Config(1.0, 10, beta_rule="zero"))
        assert closed.right_norm == 0.0
        assert closed.left_lower == 0.0
        assert closed.tail_bound == 0.0

    def test_symbol_is_rank_one(self):
        phi = dp1_symbol(DP1Config(1.0, 4))
        assert phi.rank_one
        assert phi.dim == 5
        assert phi.coeffs[2, 0, 2] == pytest.approx(3.0 ** -1.5)

    @pytest.mark.parametrize("side", ["right", "left"])
    def test_section_matches_dense_assembly(self, side):
        cfg = DP1Config(1.0, 6)
        conj = conjugate_symbol(dp1_symbol(cfg))
        if side == "right":
            dense = assemble(conj, cfg.N, right=cfg.alpha)
        else:
            dense = assemble(conj, cfg.N, left=cfg.alpha)
        expected = sigma_max(dense.matrix).value
        assert sigma_max(dp1_section(cfg, side)).value == pytest.approx(expected, rel=1e-12)

    def test_section_entries(self):
        section = dp1_section(DP1Config(1.0, 2), "right").toarray()
        # rows (m, k) for m <= k: (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
        beta = (1.0 + np.arange(3)) ** -1.5
        assert section.shape == (6, 3)
        assert section[1, 1] == pytest.approx(2.0 * beta[1])
        assert section[4, 1] == pytest.approx(2.0 * beta[2])
        assert section[5, 0] == pytest.approx(beta[2])

    def test_rejects_unknown_side(self):
        with pytest.raises(InvalidParameterError):
            dp1_section(DP1Config(1.0, 2), "both")

    @pytest.mark.parametrize("N", [63, 255, 1023])
    def test_closed_form_matches_sections(self, N):
        row = dp1_row(DP1Config(1.0, N))
        assert abs(row.right_norm - row.closed_right) <= 1e-10
        assert abs(row.left_norm - row.closed_left) <= 1e-10

    def test_right_norm_tends_to_sqrt_zeta3(self):
        closed = dp1_closed_form(DP1Config(1.0, 4095))
        assert abs(closed.right_norm - SQRT_ZETA3) <= 1e-3
        assert 0 <= zeta(3) - closed.right_norm ** 2 <= closed.tail_bound

    def test_tail_bound(self):
        closed = dp1_closed_form(DP1Config(1.0, 63))
        assert closed.tail_bound == pytest.approx(64.0 ** -2 / 2)
        assert zeta(3) - closed.right_table[0] <= closed.tail_bound

    @pytest.mark.parametrize("N", [63, 255, 1023, 4095])
    def test_left_side_dominates_harmonic_sum(self, N):
        closed = dp1_closed_form(DP1Config(1.0, N))
        assert closed.left_lower ** 2 >= _harmonic(N + 1) * (1 - 1e-12)
        assert closed.left_table[0] == pytest.approx(_harmonic(N + 1), rel=1e-12)

    def test_left_table_matches_direct_sums(self):
        cfg = DP1Config(0.75, 40)
        b = cfg.betas() ** 2
        weights = (1.0 + np.arange(41)) ** 1.5
        direct = np.array([np.dot(weights[:41 - k], b[k:]) for k in range(41)])
        assert np.allclose(dp1_closed_form(cfg).left_table, direct, rtol=1e-10, atol=1e-12)

    def test_left_table_peaks_at_zero_shift(self):
        closed = dp1_closed_form(DP1Config(1.0, 255))
        assert np.all(np.diff(closed.left_table) <= 1e-12)
        assert closed.left_lower == pytest.approx(np.sqrt(closed.left_table[0]), rel=1e-15)

    def test_left_side_grows(self):
        small = dp1_closed_form(DP1Config(1.0, 63)).left_lower
        large = dp1_closed_form(DP1Config(1.0, 4095)).left_lower
        assert small ** 2 == pytest.approx(_harmonic(64), rel=1e-12)
        assert large ** 2 == pytest.approx(_harmonic(4096), rel=1e-12)
        assert large / small >= 1.3

    def test_left_closed_form_matches_section(self):
        row = dp1_row(DP1Config(1.0, 255))
        assert row.closed_left ** 2 == pytest.approx(_harmonic(256), rel=1e-12)
        assert abs(row.left_norm - row.closed_left) <= 1e-10

    @pytest.mark.slow
    def test_full_ladder_sections(self):
        rows = dp1_section_norms(DP1Config(1.0, 63), [63, 255, 1023, 4095])
        assert [r.N for r in rows] == [63, 255, 1023, 4095]
        assert abs(rows[-1].right_norm - SQRT_ZETA3) <= 1e-3
        assert rows[-1].left_norm / rows[0].left_norm >= 1.3
        for r in rows:
            assert abs(r.left_norm - r.closed_left) <= 1e-9
        rights = [r.right_norm for r in rows]
        assert all(b >= a - 1e-12 for a, b in zip(rights, rights[1:]))

    def test_runner_matches_sequential(self):
        cfg = DP1Config(1.0, 7)
        sequential = dp1_section_norms(cfg, [7, 15, 31])
        threaded = dp1_section_norms(cfg, [7, 15, 31], runner=ExperimentRunner(threads=3, resource_logging=False))
        assert threaded == sequential


class TestSchur:
    def test_product(self):
        B = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(schur_product(np.ones((2, 2)), B), B)
        assert np.array_equal(schur_product(B, np.ones((2, 2))), B)

    def test_product_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            schur_product(np.ones((2, 2)), np.ones((3, 3)))

    def test_matrix_entries(self):
        B = dp2_schur_matrix(1.0, 3)
        assert B[0, 0] == pytest.approx(1.0)
        assert B[0, 1] == pytest.approx(0.5)
        assert B[1, 0] == pytest.approx(1.0)
        assert B[2, 3] == pytest.approx(0.5)
        assert np.all((B > 0) & (B <= 1 + 1e-15))

    def test_lacunary_indices(self):
        assert lacunary_indices(16).tolist() == [0, 1, 3, 7, 15]
        assert lacunary_indices(0).tolist() == [0]

    def test_witness_family_order_and_norms(self):
        family = schur_witness_family("all", 9, draws=3)
        ids = [ident for ident, _ in family]
        assert ids == ["ones", "gaussian_0", "gaussian_1", "gaussian_2", "hilbert", "upper", "lacunary"]
        for ident, A in family[1:]:
            assert sigma_max(A, method="svd").value == pytest.approx(1.0, rel=1e-12)

    def test_witness_family_with_multiplier(self):
        B = dp2_schur_matrix(1.0, 9)
        family = schur_witness_family("all", 9, draws=3, multiplier=B)
        ids = [ident for ident, _ in family]
        assert ids[-3:] == ["ascent_corner", "ascent_flat", "ascent_log"]
        for ident, A in family[-3:]:
            assert sigma_max(A, method="svd").value == pytest.approx(1.0, rel=1e-12)

    def test_ascent_family_needs_multiplier(self):
        with pytest.raises(InvalidParameterError):
            schur_witness_family("ascent", 5)
        with pytest.raises(DimensionMismatchError):
            schur_witness_family("ascent", 5, multiplier=np.ones((4, 4)))

    def test_witness_family_is_seeded(self):
        first = dict(schur_witness_family("gaussian", 7, seed=3, draws=2))
        second = dict(schur_witness_family("gaussian", 7, seed=3, draws=2))
        assert np.array_equal(first["gaussian_1"], second["gaussian_1"])

    def test_unknown_family(self):
        with pytest.raises(InvalidParameterError):
            schur_witness_family("toeplitz", 4)

    def test_all_ones_multiplier_is_identity(self):
        N = 12
        ones = np.ones((N + 1, N + 1))
        bound = schur_lower_bound(ones, schur_witness_family("all", N, draws=4), N)
        assert bound.value == 1.0
        bound = schur_lower_bound(ones, schur_witness_family("all", N, draws=4, multiplier=ones), N)
        assert bound.value == 1.0

    def test_bound_checks_shape(self):
        with pytest.raises(DimensionMismatchError):
            schur_lower_bound(np.ones((3, 3)), schur_witness_family("ones", 3), N=3)

    def test_bound_is_at_most_one_for_ones_family(self):
        bound = schur_lower_bound(dp2_schur_matrix(1.0, 8), schur_witness_family("ones", 8), 8)
        assert bound.witness == "ones"
        assert 0 < bound.value <= 1.0

    def test_ascent_starts_at_trace_norm(self):
        B = dp2_schur_matrix(1.0, 12)
        u = np.ones(13) / np.sqrt(13)
        result = schur_ascent(B, u, u)
        nuclear = np.linalg.svd(u[:, None] * B * u[None, :], compute_uv=False).sum()
        assert result.history[0] >= nuclear * (1 - 1e-10)
        assert all(b > a for a, b in zip(result.history, result.history[1:]))

    def test_ascent_witness_certifies_history(self):
        B = dp2_schur_matrix(1.5, 10)
        result = schur_ascent(B, np.ones(11), 1.0 / np.sqrt(np.arange(1, 12)))
        A = result.witness
        assert sigma_max(A, method="svd").value == pytest.approx(1.0, rel=1e-12)
        ratio = sigma_max(schur_product(B, A), method="svd").value
        assert ratio == pytest.approx(result.history[-1], rel=1e-10)

    def test_ascent_from_corner_is_at_least_one(self):
        B = dp2_schur_matrix(1.0, 8)
        e0 = np.zeros(9)
        e0[0] = 1.0
        assert schur_ascent(B, e0, e0, iters=1).history[0] >= 1 - 1e-12

    def test_ascent_rejects_bad_starts(self):
        B = np.ones((3, 3))
        with pytest.raises(DimensionMismatchError):
            schur_ascent(B, np.ones(2), np.ones(3))
        with pytest.raises(InvalidParameterError):
            schur_ascent(B, np.zeros(3), np.ones(3))
        with pytest.raises(InvalidParameterError):
            schur_ascent(B, np.ones(3), np.ones(3), iters=0)

    def test_ascent_beats_fixed_witnesses(self):
        N = 16
        B = dp2_schur_matrix(1.0, N)
        fixed = schur_lower_bound(B, schur_witness_family("all", N, draws=4), N)
        bound = schur_lower_bound(B, schur_witness_family("all", N, draws=4, multiplier=B), N)
        assert bound.witness.startswith("ascent_")
        assert bound.value >= max(1 - 1e-12, fixed.value)

    def test_config_validation(self):
        with pytest.raises(InvalidParameterError):
            DP2Config(1.0, 0)
        with pytest.raises(InvalidParameterError):
            DP2Config(1.0, 4, family="toeplitz")


class TestDP2Growth:
    def test_small_ladder_is_nondecreasing(self):
        rows = dp2_growth(1.0, [8, 4, 16], family="all")
        assert [r.N for r in rows] == [4, 8, 16]
        values = [r.value for r in rows]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    def test_runner_matches_sequential(self):
        sequential = dp2_growth(1.0, [4, 8], family="hilbert")
        threaded = dp2_growth(1.0, [4, 8], family="hilbert", runner=ExperimentRunner(threads=2, resource_logging=False))
        assert threaded == sequential

    @pytest.mark.slow
    def test_acceptance_ladder(self):
        rows = dp2_growth(1.0, [16, 64, 256, 1024])
        values = [r.value for r in rows]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
        assert values[0] >= 1 - 1e-12
        # floor for L(1024) - L(16), set well under (1/pi) log(log 1025 / log 17) ~ 0.29,
        # the trace-norm gain of the (1 + m)^(-1/2) start alone between the two sizes
        assert values[-1] - values[0] >= 0.02

    def test_bennett_gap(self):
        small, large = bennett_gap(1.0, 50, 100)
        assert small < 0.02
        assert large > 0.98
        assert small == pytest.approx(51.0 / 5051.0)


class TestDP2Symbol:
    def test_single_entry(self):
        E = np.zeros((1, 1))
        E[0, 0] = 1.0
        phi = dp2_symbol_from_matrix(E)
        assert phi.degree == 0
        assert phi.coeffs[0, 0, 0] == 1.0

    def test_identity(self):
        phi = dp2_symbol_from_matrix(np.eye(2))
        assert phi.degree == 2
        assert np.array_equal(phi.coeffs[0], [[1, 0], [0, 0]])
        assert np.all(phi.coeffs[1] == 0)
        assert np.array_equal(phi.coeffs[2], [[0, 0], [0, 1]])

    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatchError):
            dp2_symbol_from_matrix(np.ones((2, 3)))

    def test_bound_on_grid(self, rng):
        A = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        grid_max, norm = dp2_symbol_bound(A)
        assert grid_max <= norm * (1 + 1e-12)
        assert grid_max >= 0.99 * norm

    def test_compression_single_entry(self):
        assert dp2_compression_check(np.ones((1, 1)), 1.0) == 0.0

    def test_compression_random(self):
        rng = np.random.default_rng(55)
        for k in range(50):
            size = int(rng.integers(1, 9))
            A = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
            alpha = (0.5, 1.0, 2.0)[k % 3]
            assert dp2_compression_check(A, alpha) <= 1e-12


class TestOrderControl:
    def test_constant_symbol(self):
        psi = OperatorSymbol.scalar([2.0])
        for l in range(1, 5):
            assert order_control_ratio(psi, 1.0, l, 3) == pytest.approx(1.0 / l, rel=1e-12)

    def test_identity_function(self):
        psi = OperatorSymbol.scalar([0.0, 1.0])
        bloch = bloch_norm(psi).value
        ratio = order_control_ratio(psi, 1.0, 2, 4, bloch=bloch)
        assert ratio == pytest.approx(0.5 / (2 * bloch), rel=1e-12)

    def test_zero_symbol_rejected(self):
        with pytest.raises(InvalidParameterError):
            order_control_ratio(OperatorSymbol.scalar([0.0, 0.0]), 1.0, 1, 3)
        with pytest.raises(InvalidParameterError):
            order_control_ratios(OperatorSymbol.scalar([0.0]), 1.0, [1, 2], 3)

    def test_rejects_zero_shift(self):
        with pytest.raises(InvalidParameterError):
            order_control_ratio(OperatorSymbol.scalar([1.0]), 1.0, 0, 3)

    def test_lacunary_symbol(self):
        psi = lacunary_symbol(3)
        assert psi.degree == 8
        assert np.nonzero(psi.coeffs[:, 0, 0])[0].tolist() == [1, 2, 4, 8]

    def test_ratios_keep_order(self):
        pairs = order_control_ratios(OperatorSymbol.scalar([1.0]), 1.0, [3, 1, 2], 2,
                                     runner=ExperimentRunner(threads=2, resource_logging=False))
        assert [l for l, _ in pairs] == [3, 1, 2]
        assert pairs[0][1] == pytest.approx(1.0 / 3.0)

    @pytest.mark.slow
    def test_lacunary_ratios_bounded_in_shift(self):
        pairs = dict(order_control_ratios(lacunary_symbol(8), 1.0, range(1, 13), 512))
        for l in range(2, 13):
            assert pairs[l] <= 2.0 * pairs[2]


class TestPrimitive:
    def test_simplest_case(self):
        check = primitive_norm_check(1.0, 1, 0)
        assert check.lhs == pytest.approx(1.0)
        assert check.rhs == pytest.approx(1.0)

    def test_grid(self):
        for alpha in (0.5, 1.0, 2.0):
            for l in range(1, 7):
                for N in range(33):
                    assert primitive_norm_check(alpha, l, N).rel_gap <= 1e-10

    def test_scale(self):
        base = primitive_norm_check(2.0, 3, 5)
        scaled = primitive_norm_check(2.0, 3, 5, scale=-3.5)
        assert scaled.lhs == pytest.approx(3.5 * base.lhs, rel=1e-12)
        assert scaled.rel_gap <= 1e-12
        assert primitive_norm_check(2.0, 3, 5, scale=0.0) == (0.0, 0.0, 0.0)
