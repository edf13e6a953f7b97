"""
Embedding functionals and the six-norm chain.

Every supremum over unit test functions f is the largest eigenvalue of a block
Gram matrix built from monomial orthogonality

    int z^a conj(z)^b (1 - |z|^2) dA = delta_ab * pi / ((a + 1)(a + 2))

so the values are exact for polynomial symbols once N >= degree.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, NamedTuple, Optional, Tuple

import numpy as np

from core.coefficients import (
    OperatorSymbol,
    VectorPolynomial,
    conjugate_symbol,
    evaluate,
    rank_one_symbol,
)
from core.errors import ConfigurationError, DimensionMismatchError, require_alpha, require_truncation
from core.hankel import assemble
from core.linalg import flatten_blocks, lambda_max_hermitian, sigma_max
from core.multipliers import apply_D
from core.spaces import (
    WeightSpec,
    bergman_projection_matrix,
    bloch_norm,
    disc_grid,
    parseval_weights,
)

logger = logging.getLogger(__name__)

try:
    from hankellab_config import FUNCTIONALS_CONFIG
except ImportError:
    logger.error("[FUNCTIONALS] hankellab_config.py not found on the import path")
    raise ConfigurationError("FUNCTIONALS_CONFIG unavailable")

# dA_1 = (2/pi)(1 - |z|^2) dA
DA1_FACTOR = 2.0 / np.pi
CONVERSION_FACTOR = float(np.sqrt(np.pi / 2.0))


def _omega(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return np.pi / ((a + 1.0) * (a + 2.0))


# ------------------------------------------------------------ Gram matrices

def gram_matrix(psi: OperatorSymbol, N: int, analytic: bool = False) -> np.ndarray:
    """
    Hermitian matrix M with f^* M f = int ||psi(z) g(z)||^2 (1 - |z|^2) dA,
    g(z) = f(conj z) (anti-analytic) or f(z) (analytic), f of degree <= N.

    Block (m', m) collects psi-hat(j')^* psi-hat(j) over
        j - j' = m - m'   with a = j + m'  (anti-analytic)
        j + m = j' + m'   with a = j + m   (analytic)
    """
    N = require_truncation(N)
    size = N + 1
    d = psi.dim
    coeffs = psi.coeffs
    # products[j', j] = psi-hat(j')^* psi-hat(j)
    products = np.einsum("pab,qac->pqbc", np.conj(coeffs), coeffs)
    mp = np.arange(size)[:, None]
    m = np.arange(size)[None, :]
    blocks = np.zeros((size, size, d, d), dtype=complex)
    for jp in range(psi.degree + 1):
        for j in range(psi.degree + 1):
            if not np.any(products[jp, j]):
                continue
            if analytic:
                mask = (j + m) == (jp + mp)
                a = j + m
            else:
                mask = (j - jp) == (m - mp)
                a = j + mp
            if not np.any(mask):
                continue
            weight = np.where(mask, _omega(np.broadcast_to(a, mask.shape)), 0.0)
            blocks += weight[:, :, None, None] * products[jp, j]
    return flatten_blocks(blocks)


def _lambda_max(M: np.ndarray) -> float:
    return max(lambda_max_hermitian(M).value, 0.0)


def gram_embedding_value(psi: OperatorSymbol, N: int) -> float:
    """sup over unit f of degree <= N of int ||psi(z) f(conj z)||^2 (1 - |z|^2) dA"""
    return _lambda_max(gram_matrix(psi, N, analytic=False))


def analytic_embedding_value(psi: OperatorSymbol, N: int) -> float:
    """sup over unit f of degree <= N of int ||psi(z) f(z)||^2 (1 - |z|^2) dA"""
    return _lambda_max(gram_matrix(psi, N, analytic=True))


def carleson_integral(psi: OperatorSymbol, f: VectorPolynomial, analytic: bool = False,
                      radial_nodes: int = 64) -> float:
    """Quadrature value of int ||psi(z) g(z)||^2 (1 - |z|^2) dA for one explicit f"""
    if psi.dim != f.dim:
        raise DimensionMismatchError(f"symbol dim {psi.dim} != function dim {f.dim}")
    angular = max(64, 4 * (psi.degree + f.degree) + 4)
    z, weights = disc_grid(WeightSpec(1.0, "standard"), radial_nodes, angular, grading=1)
    g = evaluate(f, z if analytic else np.conj(z))
    values = np.einsum("...ab,...b->...a", evaluate(psi, z), g)
    integrand = np.sum(np.abs(values) ** 2, axis=-1)
    return float(np.sum(weights * integrand) / DA1_FACTOR)


def bmoa_c_value(phi: OperatorSymbol, N: Optional[int] = None) -> float:
    """||phi||_{BMOA_C}: sqrt of the anti-analytic Gram value of D phi"""
    N = phi.degree if N is None else N
    return float(np.sqrt(gram_embedding_value(apply_D(1.0, phi), N)))


class LeibnizBoundReport(NamedTuple):
    hankel_norm: float
    bmoa_c: float
    bmoa_c_conjugate: float
    ratio: float


def leibniz_bound_report(phi: OperatorSymbol, N: Optional[int] = None) -> LeibnizBoundReport:
    """||Gamma_phi|| against ||phi||_{BMOA_C} + ||phi#||_{BMOA_C}; the ratio is reported only"""
    N = phi.degree if N is None else N
    hankel_norm = assemble(phi, N).norm()
    bmoa = bmoa_c_value(phi, N)
    bmoa_conj = bmoa_c_value(conjugate_symbol(phi), N)
    total = bmoa + bmoa_conj
    ratio = hankel_norm / total if total > 0 else float("nan")
    return LeibnizBoundReport(hankel_norm, bmoa, bmoa_conj, ratio)


def _row_symbol(u: VectorPolynomial) -> OperatorSymbol:
    """z -> e_0 u(z)^T, so that psi(z) f(conj z) = sum_i u_i(z) f_i(conj z)"""
    coeffs = np.zeros((u.degree + 1, u.dim, u.dim), dtype=complex)
    coeffs[:, 0, :] = u.coeffs
    return OperatorSymbol(coeffs, rank_one=True)


def rank_one_embedding_value(v: VectorPolynomial, alpha: float, N: int) -> float:
    """sup over unit scalar f of int |f(z)|^2 ||D^(1+alpha) v(z)||^2 (1 - |z|^2) dA"""
    alpha = require_alpha(alpha)
    u = apply_D(1.0 + alpha, v)
    return analytic_embedding_value(rank_one_symbol(u), N)


def co_rank_one_embedding_value(v: VectorPolynomial, alpha: float, N: int) -> float:
    """
    sup over unit f of int |<f(z), D^(1+alpha) v(z)>|^2 (1 - |z|^2) dA

    conj(f(z)) = f*(conj z) with f* the coefficient conjugate, so this is the
    anti-analytic Gram value of the row symbol of D^(1+alpha) v.
    """
    alpha = require_alpha(alpha)
    u = apply_D(1.0 + alpha, v)
    return gram_embedding_value(_row_symbol(u), N)


# ------------------------------------------------------------- norm chain

def auxiliary_beta(alpha: float) -> float:
    return max(2.0, 1.0 + alpha) + FUNCTIONALS_CONFIG["aux_beta_margin"]


def _weighted_projection_norm(psi: OperatorSymbol, N: int,
                              projection: WeightSpec, output: WeightSpec) -> float:
    """sigma_max of f -> P(psi conj f) measured in the Parseval norm of `output`"""
    matrix = bergman_projection_matrix(psi, N, projection)
    weights = np.repeat(np.sqrt(parseval_weights(output, N + 1)), psi.dim)
    return sigma_max(weights[:, None] * matrix).value


@dataclass
class NormChainReport:
    alpha: float
    beta_used: float
    values: Tuple[float, ...]
    N_used: int
    d: int
    raw_embedding_value: float
    conversion_factor: float = CONVERSION_FACTOR
    bloch_value: Optional[float] = None

    @property
    def ratios(self) -> Dict[str, float]:
        """value_i / value_j for i < j; nan where the denominator vanishes"""
        out = {}
        for i in range(len(self.values)):
            for j in range(i + 1, len(self.values)):
                den = self.values[j]
                out[f"{i + 1}/{j + 1}"] = self.values[i] / den if den > 0 else float("nan")
        return out

    def to_dict(self) -> Dict:
        def clean(x):
            return None if x is None or not np.isfinite(x) else float(x)

        return {
            "alpha": self.alpha,
            "beta": self.beta_used,
            "N": self.N_used,
            "d": self.d,
            "values": [clean(v) for v in self.values],
            "ratios": {k: clean(v) for k, v in self.ratios.items()},
            "raw_embedding_value": clean(self.raw_embedding_value),
            "conversion_factor": self.conversion_factor,
            "bloch_value": clean(self.bloch_value),
        }


def norm_chain(phi: OperatorSymbol, alpha: float, N: Optional[int] = None,
               with_bloch: bool = False) -> NormChainReport:
    """
    The six comparable quantities ||phi||_{k,alpha}, k = 1..6

        1  ||D^a Gamma_phi|| on the section
        2  ||P_{2b-1,log}((D^(b+a) phi) conj f)|| in A^2_{2b-1,log}
        3  ||P_{1,log}((D^(1+a) phi) conj f)||    in A^2_{1,log}
        4  ||P_1((D^(1+a) phi) conj f)||          in A^2_{1,log}
        5  ||P_1((D^(1+a) phi) conj f)||          in A^2_1
        6  ||(D^(1+a) phi)(z) f(conj z)||         in L^2(dA_1)

    each a supremum over unit f in H^2 of degree <= N.
    """
    alpha = require_alpha(alpha)
    N = phi.degree if N is None else require_truncation(N)
    beta = auxiliary_beta(alpha)

    value1 = assemble(phi, N, left=alpha).norm()
    psi_high = apply_D(beta + alpha, phi)
    psi = apply_D(1.0 + alpha, phi)

    log_high = WeightSpec(2.0 * beta - 1.0, "log")
    log_one = WeightSpec(1.0, "log")
    standard_one = WeightSpec(1.0, "standard")
    value2 = _weighted_projection_norm(psi_high, N, log_high, log_high)
    value3 = _weighted_projection_norm(psi, N, log_one, log_one)
    value4 = _weighted_projection_norm(psi, N, standard_one, log_one)
    value5 = _weighted_projection_norm(psi, N, standard_one, standard_one)

    raw = gram_embedding_value(psi, N)
    value6 = float(np.sqrt(DA1_FACTOR * raw))

    report = NormChainReport(
        alpha=alpha,
        beta_used=beta,
        values=(value1, value2, value3, value4, value5, value6),
        N_used=N,
        d=phi.dim,
        raw_embedding_value=float(np.sqrt(raw)),
    )
    if with_bloch:
        report.bloch_value = bloch_norm(apply_D(alpha, phi)).value
    logger.debug(f"[FUNCTIONALS] norm chain alpha={alpha} N={N}: {report.values}")
    return report


def bloch_control_ratios(phi: OperatorSymbol, alpha: float, N: Optional[int] = None) -> Tuple[float, ...]:
    """||D^alpha phi||_B / ||phi||_{k,alpha} for k = 1..6"""
    report = norm_chain(phi, alpha, N, with_bloch=True)
    return tuple(report.bloch_value / v if v > 0 else float("nan") for v in report.values)


# ------------------------------------------------------------ w-grid sweeps

class WSupResult(NamedTuple):
    value: float
    argmax: complex


def _kernel_degree(w: complex, N: int) -> int:
    r = abs(w)
    if r == 0:
        return N
    cap = FUNCTIONALS_CONFIG["kernel_max_degree"]
    tail = int(np.ceil(np.log(FUNCTIONALS_CONFIG["kernel_tail_tol"]) / np.log(r)))
    return int(min(max(N, tail), cap))


def _kernel_blocks(coeffs: np.ndarray, base: complex, K: int, s: np.ndarray) -> np.ndarray:
    """G_s = sum_{j : 0 <= s - j <= K} base^(s - j) coeffs[j]"""
    D = coeffs.shape[0] - 1
    j = np.arange(D + 1)
    power = s[:, None] - j[None, :]
    ok = (power >= 0) & (power <= K)
    factors = np.where(ok, base ** np.clip(power, 0, None), 0.0)
    return np.einsum("sj,jab->sab", factors, coeffs)


def kernel_quadratic_form(psi: OperatorSymbol, base: complex, K: int, side: str) -> np.ndarray:
    """
    Q = sum_s omega_s G_s G_s^* (side "left") or omega_s G_s^* G_s (side "right")
    for G the coefficients of psi(z) * sum_{n <= K} base^n z^n.

    For D <= s <= K, G_s = base^(s - D) H with H fixed, so the middle of the
    series collapses to one scalar geometric-type sum.
    """
    coeffs = psi.coeffs
    D = psi.degree
    K = max(int(K), D)

    def outer(G):
        if side == "left":
            return np.einsum("sab,scb->sac", G, np.conj(G))
        return np.einsum("sba,sbc->sac", np.conj(G), G)

    edges = np.concatenate([np.arange(0, D), np.arange(K + 1, K + D + 1)])
    Q = np.zeros((psi.dim, psi.dim), dtype=complex)
    if edges.size:
        G = _kernel_blocks(coeffs, base, K, edges)
        Q += np.einsum("s,sab->ab", _omega(edges), outer(G))

    H = _kernel_blocks(coeffs, base, K, np.array([D]))
    s = np.arange(D, K + 1)
    t = abs(base) ** 2
    scale = np.sum(_omega(s) * t ** (s - D)) if t > 0 else _omega(D)
    Q += scale * outer(H)[0]
    return 0.5 * (Q + np.conj(Q.T))


def _w_grid() -> np.ndarray:
    radii = np.asarray(FUNCTIONALS_CONFIG["w_radii"], dtype=float)
    angles = 2.0 * np.pi * np.arange(FUNCTIONALS_CONFIG["w_angles"]) / FUNCTIONALS_CONFIG["w_angles"]
    return (radii[:, None] * np.exp(1j * angles)[None, :]).reshape(-1)


def _w_sweep(objective, w_grid: Optional[Iterable[complex]],
             refine_rounds: Optional[int] = None) -> WSupResult:
    """sup of objective(w) over the grid, then local refinement around the best point"""
    grid = _w_grid() if w_grid is None else np.asarray(list(w_grid), dtype=complex).reshape(-1)
    rounds = FUNCTIONALS_CONFIG["w_refine_rounds"] if refine_rounds is None else int(refine_rounds)
    factor = FUNCTIONALS_CONFIG["w_refine_factor"]

    values = np.array([objective(w) for w in grid])
    k = int(np.argmax(values))
    best = WSupResult(float(values[k]), complex(grid[k]))

    radii = np.unique(np.abs(grid))
    dr = float(np.max(np.diff(radii))) if radii.size > 1 else 0.05
    dtheta = 2.0 * np.pi / max(FUNCTIONALS_CONFIG["w_angles"], 1)
    for _ in range(rounds):
        r0, t0 = abs(best.argmax), float(np.angle(best.argmax))
        local_r = np.linspace(r0 - dr, r0 + dr, 2 * factor + 1)
        local_r = local_r[(local_r >= 0) & (local_r < 1)]
        local_t = np.linspace(t0 - dtheta, t0 + dtheta, 2 * factor + 1)
        local = (local_r[:, None] * np.exp(1j * local_t)[None, :]).reshape(-1)
        for w in local:
            value = objective(w)
            if value > best.value:
                best = WSupResult(float(value), complex(w))
        dr /= factor
        dtheta /= factor
    return best


def weak_bmoa_point(phi: OperatorSymbol, alpha: float, w: complex,
                    kernel_degree: Optional[int] = None) -> float:
    """sup over unit x of int ||psi(z)^* x k_w(z)||^2 (1 - |z|^2) dA, psi = D^(1+alpha) phi"""
    psi = apply_D(1.0 + alpha, phi)
    K = _kernel_degree(w, psi.degree) if kernel_degree is None else int(kernel_degree)
    return _lambda_max(kernel_quadratic_form(psi, np.conj(w), K, "left"))


def weak_bmoa_value(phi: OperatorSymbol, alpha: float,
                    w_grid: Optional[Iterable[complex]] = None,
                    N: Optional[int] = None,
                    kernel_degree: Optional[int] = None) -> WSupResult:
    """sup_w (1 - |w|^2) weak_bmoa_point(w)"""
    alpha = require_alpha(alpha)
    N = phi.degree if N is None else require_truncation(N)
    if N < phi.degree:
        phi = OperatorSymbol(phi.coeffs[:N + 1], rank_one=phi.rank_one)

    def objective(w):
        return (1.0 - abs(w) ** 2) * weak_bmoa_point(phi, alpha, w, kernel_degree)

    result = _w_sweep(objective, w_grid)
    logger.debug(f"[FUNCTIONALS] weak BMOA value {result.value:.12g} at w={result.argmax:.4g}")
    return result


class RkThesisResult(NamedTuple):
    kernel_value: float
    kernel_argmax: complex
    section_value: float
    section_argmax: complex


def rk_point_values(phi: OperatorSymbol, alpha: float, w: complex, N: Optional[int] = None,
                    kernel_degree: Optional[int] = None) -> Tuple[float, float]:
    """
    Raw values at one w, without the (1 - |w|^2) factor:
        kernel:  sup_x int ||psi(z) k_w(conj z) x||^2 (1 - |z|^2) dA, psi = D^(1+alpha) phi
        section: sup_x ||D^alpha Gamma_phi (k_w x)||^2 on coefficients 0..N
    """
    N = phi.degree if N is None else require_truncation(N)
    psi = apply_D(1.0 + alpha, phi)
    K = _kernel_degree(w, N) if kernel_degree is None else int(kernel_degree)
    # |k_w(conj z)| = |k_{conj w}(z)|, whose coefficients are w^n
    kernel = _lambda_max(kernel_quadratic_form(psi, complex(w), K, "right"))

    size = N + 1
    coeffs = phi.padded(2 * N + 1)
    n = np.arange(size)[:, None]
    m = np.arange(size)[None, :]
    powers = np.conj(w) ** m
    T = np.einsum("nm,nmab->nab", np.broadcast_to(powers, (size, size)), coeffs[n + m])
    T = T * (np.arange(1, size + 1, dtype=float) ** alpha)[:, None, None]
    section = sigma_max(T.reshape(size * phi.dim, phi.dim)).value ** 2
    return kernel, section


def rk_thesis_value(phi: OperatorSymbol, alpha: float,
                    w_grid: Optional[Iterable[complex]] = None,
                    N: Optional[int] = None,
                    kernel_degree: Optional[int] = None) -> RkThesisResult:
    """Reproducing-kernel tests: both variants, each swept over w with (1 - |w|^2)"""
    alpha = require_alpha(alpha, allow_zero=True)
    N = phi.degree if N is None else require_truncation(N)
    grid = _w_grid() if w_grid is None else list(w_grid)

    kernel = _w_sweep(lambda w: (1.0 - abs(w) ** 2) * rk_point_values(phi, alpha, w, N, kernel_degree)[0], grid)
    section = _w_sweep(lambda w: (1.0 - abs(w) ** 2) * rk_point_values(phi, alpha, w, N, kernel_degree)[1], grid)
    return RkThesisResult(kernel.value, kernel.argmax, section.value, section.argmax)
