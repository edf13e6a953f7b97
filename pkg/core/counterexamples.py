"""
Counterexample constructions: the rank-one-valued symbol whose two weighted
Hankel sections separate, the Schur-multiplier symbol built from a matrix A,
and the quantitative checks of the order-shift and primitive lemmas.
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.signal import fftconvolve
from scipy.special import gammaln

from core.coefficients import OperatorSymbol, evaluate
from core.errors import (
    ConfigurationError,
    DimensionMismatchError,
    InvalidParameterError,
    require_alpha,
    require_shift,
    require_truncation,
)
from core.hankel import assemble
from core.linalg import sigma_max
from core.multipliers import apply_D
from core.spaces import bloch_norm, monomial_A1log_norm

logger = logging.getLogger(__name__)

try:
    from hankellab_config import EXPERIMENT_CONFIG
except ImportError:
    logger.error("[DP1] hankellab_config.py not found on the import path")
    raise ConfigurationError("EXPERIMENT_CONFIG unavailable")

BetaRule = Union[str, Callable[[np.ndarray, float], np.ndarray]]


# ===================================================================== DP1

@dataclass(frozen=True)
class DP1Config:
    alpha: float
    N: int
    beta_rule: BetaRule = "default"

    def __post_init__(self):
        object.__setattr__(self, "alpha", require_alpha(self.alpha))
        object.__setattr__(self, "N", require_truncation(self.N))
        if isinstance(self.beta_rule, str) and self.beta_rule not in ("default", "zero"):
            raise InvalidParameterError(f"unknown beta rule {self.beta_rule!r}")

    def betas(self) -> np.ndarray:
        """beta_n for n = 0..N; the default is (1 + n)^(-alpha - 1/2)"""
        n = np.arange(self.N + 1, dtype=float)
        if self.beta_rule == "default":
            return (1.0 + n) ** (-self.alpha - 0.5)
        if self.beta_rule == "zero":
            return np.zeros(self.N + 1)
        values = np.asarray(self.beta_rule(n, self.alpha), dtype=float)
        if values.shape != n.shape or not np.all(np.isfinite(values)):
            raise InvalidParameterError("beta rule must return N + 1 finite values")
        return values

    def at(self, N: int) -> "DP1Config":
        return DP1Config(self.alpha, N, self.beta_rule)


class DP1ClosedForm(NamedTuple):
    right_norm: float
    left_lower: float
    right_table: np.ndarray
    left_table: np.ndarray
    tail_bound: Optional[float]


class DP1Row(NamedTuple):
    N: int
    left_norm: float
    right_norm: float
    closed_right: float
    closed_left: float


def dp1_symbol(cfg: DP1Config) -> OperatorSymbol:
    """z -> sum_n beta_n (x (x) e_n) z^n at dim N + 1 with x = e_0"""
    size = cfg.N + 1
    coeffs = np.zeros((size, size, size))
    n = np.arange(size)
    coeffs[n, 0, n] = cfg.betas()
    return OperatorSymbol(coeffs, rank_one=True)


def dp1_section(cfg: DP1Config, side: str = "right") -> scipy.sparse.csr_matrix:
    """
    X_N D^alpha (side "right") or D^alpha X_N (side "left"), X_N the section of
    the coefficient conjugate symbol with its identically zero columns removed.

    Row (m, k), m <= k <= N, holds the single entry beta_k in column k - m.
    """
    size = cfg.N + 1
    beta = cfg.betas()
    m, k = np.triu_indices(size)
    n = k - m
    data = beta[k].astype(float)
    if side == "right":
        data = data * (1.0 + n) ** cfg.alpha
    elif side == "left":
        data = data * (1.0 + m) ** cfg.alpha
    else:
        raise InvalidParameterError(f"side must be 'left' or 'right', got {side!r}")
    rows = np.arange(m.size)
    return scipy.sparse.csr_matrix((data, (rows, n)), shape=(m.size, size))


def dp1_closed_form(cfg: DP1Config) -> DP1ClosedForm:
    """
    right^2 = max_n (1 + n)^(2 alpha) gamma_n^2, gamma_n^2 = sum_{n <= k <= N} |beta_k|^2
    left^2  = max_k sum_n (1 + n)^(2 alpha) |beta_(n + k)|^2
    """
    size = cfg.N + 1
    b = cfg.betas() ** 2
    weights = np.arange(1, size + 1, dtype=float) ** (2.0 * cfg.alpha)

    gamma2 = np.cumsum(b[::-1])[::-1]
    right_table = weights * gamma2

    # left_table[k] = sum_n weights[n] b[n + k] is entry N + k of the full convolution
    # of b with reversed weights; k = 0 is recomputed exactly
    left_table = fftconvolve(b, weights[::-1])[cfg.N:cfg.N + size].copy()
    left_table[0] = float(np.dot(weights, b))
    left_table = np.maximum(left_table, 0.0)

    tail = None
    if cfg.beta_rule == "default":
        # sum_{k > N} (1 + k)^(-2 alpha - 1) <= int_{N+1}^inf x^(-2 alpha - 1) dx
        tail = float((1.0 + cfg.N) ** (-2.0 * cfg.alpha) / (2.0 * cfg.alpha))
    elif cfg.beta_rule == "zero":
        tail = 0.0

    return DP1ClosedForm(
        right_norm=float(np.sqrt(np.max(right_table))),
        left_lower=float(np.sqrt(np.max(left_table))),
        right_table=right_table,
        left_table=left_table,
        tail_bound=tail,
    )


def dp1_row(cfg: DP1Config) -> DP1Row:
    closed = dp1_closed_form(cfg)
    right = sigma_max(dp1_section(cfg, "right")).value
    left = sigma_max(dp1_section(cfg, "left")).value
    logger.info(f"[DP1] N={cfg.N} alpha={cfg.alpha}: |X D^a|={right:.12f} |D^a X|={left:.6f}")
    return DP1Row(cfg.N, left, right, closed.right_norm, closed.left_lower)


def dp1_section_norms(cfg: DP1Config, N_list: Sequence[int], runner=None) -> List[DP1Row]:
    """Section norms over a ladder; `runner` is an ExperimentRunner or None for sequential"""
    configs = [cfg.at(N) for N in N_list]
    if runner is None:
        return [dp1_row(c) for c in configs]
    return runner.map(dp1_row, configs, label="dp1")


# ===================================================================== DP2

@dataclass(frozen=True)
class DP2Config:
    alpha: float
    N: int
    family: str = "all"

    def __post_init__(self):
        object.__setattr__(self, "alpha", require_alpha(self.alpha))
        if require_truncation(self.N) < 1:
            raise InvalidParameterError(f"DP2 needs N >= 1, got {self.N}")
        if self.family not in FAMILIES:
            raise InvalidParameterError(f"unknown witness family {self.family!r}")


FAMILIES = ("all", "ones", "gaussian", "hilbert", "upper", "lacunary", "ascent")


class SchurBound(NamedTuple):
    value: float
    witness: str


class DP2Row(NamedTuple):
    N: int
    value: float
    witness: str


def schur_product(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise DimensionMismatchError(f"Schur product needs equal shapes, got {A.shape} and {B.shape}")
    return A * B


def dp2_schur_matrix(alpha: float, N: int) -> np.ndarray:
    """b_mn = ((1 + m)/(1 + m + n))^alpha, m, n = 0..N"""
    alpha = require_alpha(alpha)
    N = require_truncation(N)
    m = np.arange(N + 1, dtype=float)[:, None]
    n = np.arange(N + 1, dtype=float)[None, :]
    return np.exp(alpha * (np.log1p(m) - np.log1p(m + n)))


def lacunary_indices(N: int) -> np.ndarray:
    """2^i - 1 <= N"""
    out = []
    i = 0
    while 2 ** i - 1 <= N:
        out.append(2 ** i - 1)
        i += 1
    return np.array(out, dtype=int)


def _unit(A: np.ndarray) -> np.ndarray:
    norm = scipy.linalg.svdvals(A)[0]
    return A / norm if norm > 0 else A


class AscentResult(NamedTuple):
    witness: np.ndarray
    history: List[float]


def schur_ascent(B: np.ndarray, u: np.ndarray, v: np.ndarray,
                 iters: Optional[int] = None, rtol: float = 1e-9) -> AscentResult:
    """
    Alternating ascent on sup ||D_u B D_v||_1 over unit u, v, the Schur multiplier
    norm of B in trace-norm form.

    A step takes the polar factor A = U V^T of D_u B D_v, so ||A|| = 1 and
    ||B o A|| >= ||D_u B D_v||_1, then restarts from the top singular pair of B o A.
    history holds ||B o A|| per accepted step and is increasing.
    """
    B = np.asarray(B, dtype=float)
    iters = EXPERIMENT_CONFIG["dp2_ascent_iters"] if iters is None else int(iters)
    if iters < 1:
        raise InvalidParameterError(f"ascent needs iters >= 1, got {iters}")
    u = np.abs(np.asarray(u, dtype=float))
    v = np.abs(np.asarray(v, dtype=float))
    if B.ndim != 2 or u.shape != (B.shape[0],) or v.shape != (B.shape[1],):
        raise DimensionMismatchError(f"start vectors {u.shape}, {v.shape} do not fit B of shape {B.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise InvalidParameterError("ascent start vectors must be nonzero")
    u, v = u / nu, v / nv

    witness = None
    history: List[float] = []
    for _ in range(iters):
        U, _, Vh = scipy.linalg.svd(u[:, None] * B * v[None, :])
        A = U @ Vh
        P, s, Qh = scipy.linalg.svd(B * A)
        if history and s[0] <= history[-1] * (1.0 + rtol):
            break
        witness = A
        history.append(float(s[0]))
        u, v = np.abs(P[:, 0]), np.abs(Qh[0])
    return AscentResult(witness, history)


def _ascent_starts(size: int) -> List[Tuple[str, np.ndarray]]:
    corner = np.zeros(size)
    corner[0] = 1.0
    return [
        ("corner", corner),
        ("flat", np.ones(size)),
        ("log", 1.0 / np.sqrt(np.arange(1, size + 1, dtype=float))),
    ]


def schur_witness_family(name: str, N: int, seed: int = 0,
                         draws: Optional[int] = None,
                         multiplier: Optional[np.ndarray] = None) -> List[Tuple[str, np.ndarray]]:
    """
    Ordered (id, matrix) test matrices of size N + 1

        ones           all-ones
        gaussian_k     seeded Gaussian, unit operator norm
        hilbert        [1/(1 + m + n)], unit operator norm
        upper          upper-triangular all-ones, unit operator norm
        lacunary       1/(i - j + 1/2) on the indices 2^i - 1, zero elsewhere
        ascent_<start> schur_ascent witnesses for `multiplier` from the corner e_0,
                       flat and (1 + m)^(-1/2) starts; "all" includes them only
                       when a multiplier is given
    """
    if name not in FAMILIES:
        raise InvalidParameterError(f"unknown witness family {name!r}")
    N = require_truncation(N)
    size = N + 1
    draws = EXPERIMENT_CONFIG["dp2_gaussian_draws"] if draws is None else int(draws)
    wanted = FAMILIES[1:] if name == "all" else (name,)
    if name == "ascent" and multiplier is None:
        raise InvalidParameterError("ascent witnesses need the multiplier matrix")
    if multiplier is not None and np.shape(multiplier) != (size, size):
        raise DimensionMismatchError(f"multiplier has shape {np.shape(multiplier)}, expected size {size}")
    family = []

    if "ones" in wanted:
        family.append(("ones", np.ones((size, size))))
    if "gaussian" in wanted:
        for k in range(draws):
            rng = np.random.default_rng([seed, N, k])
            family.append((f"gaussian_{k}", _unit(rng.standard_normal((size, size)))))
    if "hilbert" in wanted:
        idx = np.arange(size, dtype=float)
        family.append(("hilbert", _unit(1.0 / (1.0 + idx[:, None] + idx[None, :]))))
    if "upper" in wanted:
        family.append(("upper", _unit(np.triu(np.ones((size, size))))))
    if "lacunary" in wanted:
        lac = lacunary_indices(N)
        i = np.arange(lac.size, dtype=float)
        A = np.zeros((size, size))
        A[np.ix_(lac, lac)] = 1.0 / (i[:, None] - i[None, :] + 0.5)
        family.append(("lacunary", _unit(A)))
    if "ascent" in wanted and multiplier is not None:
        for label, start in _ascent_starts(size):
            result = schur_ascent(multiplier, start, start)
            logger.debug(f"[DP2] ascent from {label} at N={N}: {result.history}")
            family.append((f"ascent_{label}", result.witness))
    if not family:
        raise InvalidParameterError("witness family is empty")
    return family


def _schur_ratio(B: np.ndarray, A: np.ndarray, dense_limit: int) -> float:
    method = "svd" if A.shape[0] <= dense_limit else "auto"
    den = sigma_max(A, method=method).value
    if den == 0:
        return 0.0
    return sigma_max(schur_product(B, A), method=method).value / den


def schur_lower_bound(B: np.ndarray, family: Sequence[Tuple[str, np.ndarray]],
                      N: Optional[int] = None) -> SchurBound:
    """max over the family of sigma_max(B o A) / sigma_max(A)"""
    B = np.asarray(B)
    if N is not None and B.shape != (N + 1, N + 1):
        raise DimensionMismatchError(f"B has shape {B.shape}, expected size {N + 1}")
    if not family:
        raise InvalidParameterError("witness family is empty")
    limit = EXPERIMENT_CONFIG["dp2_dense_limit"]
    best = SchurBound(-np.inf, "")
    for ident, A in family:
        ratio = _schur_ratio(B, A, limit)
        if ratio > best.value:
            best = SchurBound(float(ratio), ident)
    return best


def _pad(A: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros((size, size), dtype=A.dtype)
    out[:A.shape[0], :A.shape[1]] = A
    return out


def dp2_growth(alpha: float, ladder: Sequence[int], family: str = "all",
               seed: int = 0, runner=None) -> List[DP2Row]:
    """
    Certified lower bounds L(N) of the Schur multiplier norm of B_alpha over a ladder.

    The best witness at each rung is carried, zero padded, to the next rung, where
    B restricted to the leading block is unchanged; so L is nondecreasing.
    """
    alpha = require_alpha(alpha)
    ladder = sorted(require_truncation(N) for N in ladder)
    work = [DP2Config(alpha, N, family) for N in ladder]

    def evaluate_rung(cfg):
        N = cfg.N
        B = dp2_schur_matrix(alpha, N)
        members = schur_witness_family(cfg.family, N, seed, multiplier=B)
        bound = schur_lower_bound(B, members, N)
        witness = dict(members)[bound.witness]
        logger.info(f"[DP2] N={N} alpha={alpha}: L={bound.value:.6f} witness={bound.witness}")
        return bound, witness

    results = [evaluate_rung(w) for w in work] if runner is None else runner.map(evaluate_rung, work, label="dp2")

    rows = []
    carried: Optional[Tuple[str, np.ndarray, int]] = None
    limit = EXPERIMENT_CONFIG["dp2_dense_limit"]
    for N, (bound, witness) in zip(ladder, results):
        value, ident = bound.value, bound.witness
        if carried is not None:
            prev_id, prev_A, prev_N = carried
            padded = _schur_ratio(dp2_schur_matrix(alpha, N), _pad(prev_A, N + 1), limit)
            if padded > value:
                value, ident, witness = padded, f"padded:{prev_id}@{prev_N}", _pad(prev_A, N + 1)
        carried = (ident, witness, N)
        rows.append(DP2Row(N, float(value), ident))
    return rows


def bennett_gap(alpha: float, m: int, factor: int = 100) -> Tuple[float, float]:
    """(b_{m, factor m}, b_{factor m, m}): the iterated limits are 0 and 1"""
    alpha = require_alpha(alpha)

    def entry(i, j):
        return ((1.0 + i) / (1.0 + i + j)) ** alpha

    return float(entry(m, factor * m)), float(entry(factor * m, m))


def dp2_symbol_from_matrix(A: np.ndarray) -> OperatorSymbol:
    """phi(z) = diag(z^k) A diag(z^l): phi-hat(n) = sum_{k + l = n} a_kl E_kl"""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"A must be square, got shape {A.shape}")
    size = A.shape[0]
    coeffs = np.zeros((2 * size - 1, size, size), dtype=complex)
    k, l = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    coeffs[k + l, k, l] = A
    return OperatorSymbol(coeffs)


def dp2_symbol_bound(A: np.ndarray, radii: Sequence[float] = (0.5, 0.9, 0.999),
                     rays: int = 64) -> Tuple[float, float]:
    """(max sigma_max(phi(z)) over the sample, sigma_max(A))"""
    phi = dp2_symbol_from_matrix(A)
    theta = 2.0 * np.pi * np.arange(rays) / rays
    z = (np.asarray(radii, dtype=float)[:, None] * np.exp(1j * theta)[None, :]).reshape(-1)
    values = np.linalg.svd(evaluate(phi, z), compute_uv=False)[:, 0]
    return float(np.max(values)), float(scipy.linalg.svdvals(np.asarray(A))[0])


def dp2_compression_check(A: np.ndarray, alpha: float) -> float:
    """
    max |V^* D^alpha Gamma_{D^-alpha phi} V - B o A| for phi built from A and
    V: e_n -> e_n z^n, i.e. flat index n * d + n of the section.
    """
    alpha = require_alpha(alpha)
    A = np.asarray(A)
    phi = dp2_symbol_from_matrix(A)
    N = A.shape[0] - 1
    section = assemble(apply_D(-alpha, phi), N, left=alpha).matrix
    d = phi.dim
    idx = np.arange(N + 1) * d + np.arange(N + 1)
    compressed = section[np.ix_(idx, idx)]
    return float(np.max(np.abs(compressed - schur_product(dp2_schur_matrix(alpha, N), A))))


# ================================================================== lemmas

def lacunary_symbol(terms: Optional[int] = None) -> OperatorSymbol:
    """sum_{k <= terms} z^(2^k)"""
    terms = EXPERIMENT_CONFIG["lacunary_terms"] if terms is None else int(terms)
    coeffs = np.zeros(2 ** terms + 1)
    coeffs[2 ** np.arange(terms + 1)] = 1.0
    return OperatorSymbol.scalar(coeffs)


def _order_section_norm(psi: OperatorSymbol, alpha: float, l: int, N: int) -> float:
    return assemble(apply_D(-alpha - l, psi), N, left=alpha, right=float(l)).norm()


def order_control_ratio(psi: OperatorSymbol, alpha: float, l: int, N: int,
                        bloch: Optional[float] = None) -> float:
    """||D^alpha Gamma_{D^(-alpha-l) psi} D^l|| on the section, divided by l ||psi||_B"""
    alpha = require_alpha(alpha)
    l = require_shift(l)
    N = require_truncation(N)
    bloch = bloch_norm(psi).value if bloch is None else bloch
    if bloch <= 0:
        raise InvalidParameterError("order control ratio needs a symbol with nonzero Bloch norm")
    return _order_section_norm(psi, alpha, l, N) / (l * bloch)


def order_control_ratios(psi: OperatorSymbol, alpha: float, l_values: Sequence[int], N: int,
                         runner=None) -> List[Tuple[int, float]]:
    bloch = bloch_norm(psi).value
    if bloch <= 0:
        raise InvalidParameterError("order control ratio needs a symbol with nonzero Bloch norm")
    logger.info(f"[LEMMA] Bloch norm {bloch:.10f}, N={N}, l in {list(l_values)}")

    def one(l):
        return l, order_control_ratio(psi, alpha, l, N, bloch=bloch)

    if runner is None:
        return [one(l) for l in l_values]
    return runner.map(one, list(l_values), label="lemma-order")


class PrimitiveCheck(NamedTuple):
    lhs: float
    rhs: float
    rel_gap: float


def primitive_norm_check(alpha: float, l: int, N_zero: int, scale: float = 1.0) -> PrimitiveCheck:
    """
    lhs = ||D^-l (c z^N)|| in A^1_{alpha-1,log}
    rhs = Gamma(1+alpha) / (2^l Gamma(1+alpha+l)) ((2+N)/(1+N))^l ||c z^N|| in A^1_{alpha+l-1,log}

    Both sides are evaluated in log space; they agree exactly for monomials.
    """
    alpha = require_alpha(alpha)
    l = require_shift(l)
    N = require_truncation(N_zero)
    if scale == 0:
        return PrimitiveCheck(0.0, 0.0, 0.0)
    log_scale = np.log(abs(scale))
    log_lhs = log_scale - l * np.log1p(N) + np.log(monomial_A1log_norm(N, alpha))
    log_rhs = (log_scale + gammaln(1.0 + alpha) - l * np.log(2.0) - gammaln(1.0 + alpha + l)
               + l * (np.log(2.0 + N) - np.log1p(N)) + np.log(monomial_A1log_norm(N, alpha + l)))
    rel_gap = abs(np.expm1(log_rhs - log_lhs))
    return PrimitiveCheck(float(np.exp(log_lhs)), float(np.exp(log_rhs)), float(rel_gap))
