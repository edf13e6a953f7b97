"""
Function spaces on the disc: weighted Bergman norms (Parseval and quadrature),
Bergman projections of phi * conj(f), the Bloch norm, reproducing kernels and
the Carleson intensity of atomic measures.

Measures follow the normalization
    dA_beta     = (1 + beta)/pi (1 - |z|^2)^beta dA
    dA_beta,log = (1 + beta)/pi (log 1/|z|^2)^beta dA
"""
import logging
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import gammaln, roots_jacobi

from core.coefficients import OperatorSymbol, VectorPolynomial, evaluate
from core.errors import (
    ConfigurationError,
    DimensionMismatchError,
    InvalidParameterError,
    QuadratureResolutionError,
    require_alpha,
    require_truncation,
)
from core.multipliers import apply_D

logger = logging.getLogger(__name__)

try:
    from hankellab_config import SPACES_CONFIG
except ImportError:
    logger.error("[SPACES] hankellab_config.py not found on the import path")
    raise ConfigurationError("SPACES_CONFIG unavailable")

FLAVORS = ("standard", "log")


@dataclass(frozen=True)
class WeightSpec:
    beta: float
    flavor: str = "log"
    p: int = 2

    def __post_init__(self):
        if not float(self.beta) > -1:
            raise InvalidParameterError(f"beta must be > -1, got {self.beta}")
        if self.flavor not in FLAVORS:
            raise InvalidParameterError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")
        if self.p not in (1, 2):
            raise InvalidParameterError(f"p must be 1 or 2, got {self.p}")

    def with_p(self, p: int) -> "WeightSpec":
        return WeightSpec(self.beta, self.flavor, p)


@dataclass(frozen=True, eq=False)
class GridMeasure:
    """Finite atomic measure sum mass_j delta_{point_j} on the open disc"""
    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=complex).reshape(-1)
        masses = np.asarray(self.masses, dtype=float).reshape(-1)
        if points.shape != masses.shape:
            raise DimensionMismatchError(f"{points.size} points but {masses.size} masses")
        if np.any(np.abs(points) >= 1):
            raise InvalidParameterError("measure atoms must lie in the open unit disc")
        if np.any(masses < 0) or not np.all(np.isfinite(masses)):
            raise InvalidParameterError("measure masses must be finite and nonnegative")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "masses", masses)

    def scaled(self, c: float) -> "GridMeasure":
        return GridMeasure(self.points, self.masses * c)

    def merged(self, other: "GridMeasure") -> "GridMeasure":
        return GridMeasure(np.concatenate([self.points, other.points]),
                           np.concatenate([self.masses, other.masses]))


# ---------------------------------------------------------------- Parseval

def parseval_weights(weight: WeightSpec, n_terms: int) -> np.ndarray:
    """||f||^2_{A^2} = sum_k weights[k] ||f-hat(k)||^2"""
    beta = float(weight.beta)
    k = np.arange(n_terms, dtype=float)
    if weight.flavor == "log":
        return np.exp(gammaln(2.0 + beta) - (1.0 + beta) * np.log1p(k))
    # 1 / binom(k + 1 + beta, k)
    return np.exp(gammaln(2.0 + beta) + gammaln(1.0 + k) - gammaln(2.0 + beta + k))


def bergman_norm_parseval(f: VectorPolynomial, weight: WeightSpec) -> float:
    if weight.p != 2:
        raise InvalidParameterError("Parseval norms exist for p = 2 only")
    energy = np.sum(np.abs(f.coeffs) ** 2, axis=1)
    return float(np.sqrt(np.sum(parseval_weights(weight, f.degree + 1) * energy)))


# -------------------------------------------------------------- quadrature

def radial_rule(weight: WeightSpec,
                nodes: Optional[int] = None,
                grading: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes u_i in (0, 1) and weights W_i with sum W_i g(u_i) ~ int_0^1 g(u) omega(u) du,
    omega(u) = (1 - u)^beta or (log 1/u)^beta.

    The rule is Gauss-Jacobi in s = u^(1/q): the (1 - s)^beta endpoint factor is
    absorbed by the Jacobi weight and the grading q damps the log endpoint at u = 0.
    With beta = 0 and q = 1 this is plain Gauss-Legendre in u = r^2.
    """
    nodes = SPACES_CONFIG["radial_nodes"] if nodes is None else int(nodes)
    q = SPACES_CONFIG["radial_grading"] if grading is None else int(grading)
    if nodes < 1 or q < 1:
        raise InvalidParameterError(f"radial rule needs nodes >= 1 and grading >= 1, got {nodes}, {q}")
    beta = float(weight.beta)
    x, w = roots_jacobi(nodes, beta, 0.0)
    s = 0.5 * (x + 1.0)
    w = w * 2.0 ** (-beta - 1.0)
    if weight.flavor == "log":
        # (log 1/s^q)^beta = (1 - s)^beta * (q * log(1/s) / (1 - s))^beta
        ratio = q * (-np.log(s)) / (1.0 - s)
    else:
        # (1 - s^q) / (1 - s) = 1 + s + ... + s^(q-1)
        ratio = np.polyval(np.ones(q), s)
    u = s ** q
    W = w * ratio ** beta * q * s ** (q - 1)
    return u, W


def disc_grid(weight: WeightSpec,
              radial_nodes: Optional[int] = None,
              angular_points: int = 64,
              grading: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Polar nodes z and weights with sum weights * F(z) ~ int F dA_beta[,log]"""
    u, W = radial_rule(weight, radial_nodes, grading)
    theta = 2.0 * np.pi * np.arange(angular_points) / angular_points
    z = np.sqrt(u)[:, None] * np.exp(1j * theta)[None, :]
    weights = np.broadcast_to(((1.0 + weight.beta) * W / angular_points)[:, None], z.shape)
    return z, weights


def disc_integral(F: Callable[[np.ndarray], np.ndarray], weight: WeightSpec,
                  radial_nodes: Optional[int] = None,
                  angular_points: int = 64,
                  grading: Optional[int] = None) -> float:
    z, weights = disc_grid(weight, radial_nodes, angular_points, grading)
    return float(np.sum(weights * np.real(F(z))))


def bergman_norm_quadrature(f: VectorPolynomial, weight: WeightSpec,
                            radial_nodes: Optional[int] = None,
                            angular_points: Optional[int] = None,
                            grading: Optional[int] = None) -> float:
    """
    ||f||_{A^p_beta[,log]} by polar quadrature

    For p = 2 the angular integral is done exactly through monomial orthogonality;
    for p = 1 a uniform angular grid of at least 8 * (degree + 1) points is required.
    """
    u, W = radial_rule(weight, radial_nodes, grading)
    if weight.p == 2:
        energy = np.sum(np.abs(f.coeffs) ** 2, axis=1)
        radial_energy = np.polynomial.polynomial.polyval(u, energy)
        return float(np.sqrt((1.0 + weight.beta) * np.sum(W * radial_energy)))

    minimum = SPACES_CONFIG["angular_per_degree"] * (f.degree + 1)
    angular_points = minimum if angular_points is None else int(angular_points)
    if angular_points < minimum:
        raise QuadratureResolutionError(
            f"p=1 quadrature needs at least {minimum} angular points for degree {f.degree}, got {angular_points}")
    z, weights = disc_grid(weight, radial_nodes, angular_points, grading)
    values = np.linalg.norm(evaluate(f, z), axis=-1)
    return float(np.sum(weights * values))


def monomial_A1log_norm(M: int, alpha: float) -> float:
    """||z^M|| in A^1_{alpha-1,log} = 2^alpha Gamma(1 + alpha) / (2 + M)^alpha"""
    alpha = require_alpha(alpha)
    M = require_truncation(M)
    return float(np.exp(alpha * np.log(2.0) + gammaln(1.0 + alpha) - alpha * np.log(2.0 + M)))


def weight_comparison(f: VectorPolynomial, beta: float) -> Tuple[float, float, float]:
    """
    (standard, log, log / standard) A^2 norms. For beta >= 0 the pointwise bound
    1 - |z|^2 <= log(1/|z|^2) gives standard <= log.
    """
    standard = bergman_norm_parseval(f, WeightSpec(beta, "standard"))
    logarithmic = bergman_norm_parseval(f, WeightSpec(beta, "log"))
    ratio = logarithmic / standard if standard > 0 else float("nan")
    return standard, logarithmic, ratio


# -------------------------------------------------------------- projections

def projection_coefficients(weight: WeightSpec, N: int) -> np.ndarray:
    """c[m, n] of P(phi conj f)-hat(n) = sum_m c(m, n) phi-hat(m + n) f-hat(m)"""
    beta = float(weight.beta)
    m = np.arange(N + 1, dtype=float)[:, None]
    n = np.arange(N + 1, dtype=float)[None, :]
    if weight.flavor == "log":
        return np.exp((1.0 + beta) * (np.log1p(n) - np.log1p(m + n)))
    return np.exp(gammaln(1.0 + m + n) + gammaln(2.0 + beta + n)
                  - gammaln(2.0 + beta + m + n) - gammaln(1.0 + n))


def bergman_projection_matrix(phi: OperatorSymbol, N: int, weight: WeightSpec) -> np.ndarray:
    """Matrix of f -> P(phi conj f) on coefficients 0..N: block (n, m) = c(m, n) phi-hat(m + n)"""
    N = require_truncation(N)
    size = N + 1
    c = projection_coefficients(weight, N)
    coeffs = phi.padded(2 * N + 1)
    idx = np.arange(size)[:, None] + np.arange(size)[None, :]
    blocks = coeffs[idx] * c.T[:, :, None, None]
    d = phi.dim
    return blocks.transpose(0, 2, 1, 3).reshape(size * d, size * d)


def bergman_project(phi: OperatorSymbol, f: VectorPolynomial, weight: WeightSpec) -> VectorPolynomial:
    if phi.dim != f.dim:
        raise DimensionMismatchError(f"symbol dim {phi.dim} != function dim {f.dim}")
    N = max(phi.degree, f.degree)
    matrix = bergman_projection_matrix(phi, N, weight)
    out = (matrix @ f.flat(N + 1)).reshape(N + 1, phi.dim)
    return VectorPolynomial(out[:phi.degree + 1])


# ------------------------------------------------------------------- Bloch

class BlochResult(NamedTuple):
    value: float
    argmax: complex


def _bloch_objective(dphi: OperatorSymbol, z: np.ndarray) -> np.ndarray:
    values = evaluate(dphi, z)
    if dphi.dim == 1:
        sigma = np.abs(values[..., 0, 0])
    else:
        sigma = np.linalg.svd(values, compute_uv=False)[..., 0]
    return (1.0 - np.abs(z) ** 2) * sigma


def bloch_norm(phi: OperatorSymbol,
               radial_levels: Optional[int] = None,
               angular_points: Optional[int] = None,
               refine_rounds: Optional[int] = None,
               refine_factor: Optional[int] = None) -> BlochResult:
    """
    sup (1 - |z|^2) ||D phi(z)||_op over a polar grid, refined around the best cell

    Radial levels are r = 1 - exp(-t) with t uniform up to log(16 (degree + 1)),
    so the grid reaches the boundary layer 1 - r ~ 1/degree where the sup lives.
    """
    radial_levels = SPACES_CONFIG["bloch_radial_levels"] if radial_levels is None else int(radial_levels)
    angular_points = SPACES_CONFIG["bloch_angular_points"] if angular_points is None else int(angular_points)
    refine_rounds = SPACES_CONFIG["bloch_refine_rounds"] if refine_rounds is None else int(refine_rounds)
    refine_factor = SPACES_CONFIG["bloch_refine_factor"] if refine_factor is None else int(refine_factor)

    dphi = apply_D(1.0, phi)
    angular_points = max(angular_points, 4 * (dphi.degree + 1))
    t = np.linspace(0.0, np.log(16.0 * (dphi.degree + 1)), radial_levels)
    radii = -np.expm1(-t)
    thetas = 2.0 * np.pi * np.arange(angular_points) / angular_points

    dtheta = 2.0 * np.pi / angular_points
    z = radii[:, None] * np.exp(1j * thetas)[None, :]
    values = _bloch_objective(dphi, z)
    best = np.unravel_index(np.argmax(values), values.shape)
    r_best, theta_best = radii[best[0]], thetas[best[1]]
    # first window is the radial spacing next to the best level
    i = best[0]
    if radii.size > 1:
        dr = max(radii[min(i + 1, radii.size - 1)] - r_best, r_best - radii[max(i - 1, 0)])
    else:
        dr = 0.5
    value = float(values[best])

    for _ in range(refine_rounds):
        local_r = np.clip(np.linspace(r_best - dr, r_best + dr, 2 * refine_factor + 1), 0.0, 1.0 - 1e-15)
        local_theta = np.linspace(theta_best - dtheta, theta_best + dtheta, 2 * refine_factor + 1)
        z = local_r[:, None] * np.exp(1j * local_theta)[None, :]
        values = _bloch_objective(dphi, z)
        idx = np.unravel_index(np.argmax(values), values.shape)
        if values[idx] > value:
            value = float(values[idx])
            r_best, theta_best = local_r[idx[0]], local_theta[idx[1]]
        dr /= refine_factor
        dtheta /= refine_factor

    argmax = complex(r_best * np.exp(1j * theta_best))
    logger.debug(f"[SPACES] bloch norm {value:.12g} at {argmax:.6g}")
    return BlochResult(value, argmax)


# ------------------------------------------------------- reproducing kernel

def reproducing_kernel(w: complex, N: int) -> VectorPolynomial:
    """k_w truncated to degree N: coefficients conj(w)^n"""
    N = require_truncation(N)
    w = complex(w)
    if abs(w) >= 1:
        raise InvalidParameterError(f"kernel point must satisfy |w| < 1, got {abs(w)}")
    return VectorPolynomial.scalar(np.conj(w) ** np.arange(N + 1))


def kernel_norm_squared(w: complex, N: Optional[int] = None) -> float:
    """sum_{n <= N} |w|^{2n}; the full series 1 / (1 - |w|^2) when N is None"""
    t = abs(complex(w)) ** 2
    if t >= 1:
        raise InvalidParameterError(f"kernel point must satisfy |w| < 1, got {abs(w)}")
    if N is None:
        return 1.0 / (1.0 - t)
    return float(-np.expm1((N + 1) * np.log(t)) / (1.0 - t)) if t > 0 else 1.0


# ------------------------------------------------------- Carleson intensity

class CarlesonResult(NamedTuple):
    value: float
    level: int
    center: float


def carleson_sweep(mu: GridMeasure, levels: Optional[int] = None) -> CarlesonResult:
    """
    sup over arcs I of mu(S(I)) / m(I), S(I) = {1 - m(I) < |w| < 1, arg w in I}

    Arc family: the 2^k dyadic arcs of normalized length 2^-k for k = 0..levels,
    plus arcs of the same lengths centred at each atom's argument.
    """
    levels = SPACES_CONFIG["carleson_levels"] if levels is None else int(levels)
    if levels < 4:
        raise InvalidParameterError(f"arc resolution must be >= 4 levels, got {levels}")
    radius = np.abs(mu.points)
    angle = np.mod(np.angle(mu.points), 2.0 * np.pi)
    best = CarlesonResult(0.0, 0, 0.0)
    chunk = 1024

    for k in range(levels + 1):
        length = 2.0 ** (-k)
        inside = radius > 1.0 - length
        if not np.any(inside):
            continue
        masses = mu.masses[inside]
        args = angle[inside]

        index = np.minimum((args / (2.0 * np.pi) * 2 ** k).astype(int), 2 ** k - 1)
        dyadic = np.bincount(index, weights=masses, minlength=2 ** k)
        j = int(np.argmax(dyadic))
        if dyadic[j] / length > best.value:
            best = CarlesonResult(float(dyadic[j] / length), k, float((j + 0.5) * 2.0 * np.pi * length))

        half_width = np.pi * length
        for start in range(0, args.size, chunk):
            centers = args[start:start + chunk]
            gap = np.abs(np.mod(args[None, :] - centers[:, None] + np.pi, 2.0 * np.pi) - np.pi)
            sums = (gap <= half_width) @ masses
            j = int(np.argmax(sums))
            if sums[j] / length > best.value:
                best = CarlesonResult(float(sums[j] / length), k, float(centers[j]))

    logger.debug(f"[SPACES] carleson intensity {best.value:.6g} at level {best.level}")
    return best


def carleson_intensity(mu: GridMeasure, levels: Optional[int] = None) -> float:
    return carleson_sweep(mu, levels).value
