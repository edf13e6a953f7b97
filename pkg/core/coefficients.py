"""
Coefficient-level representations of operator- and vector-valued analytic functions
on the unit disc: truncated Taylor expansions, Horner evaluation, coefficient conjugation.

H is realized as C^d. Values are immutable after construction.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from core.errors import ConfigurationError, DimensionMismatchError, InvalidParameterError

logger = logging.getLogger(__name__)

try:
    from hankellab_config import SPACES_CONFIG
except ImportError:
    logger.error("[COEFFICIENTS] hankellab_config.py not found on the import path")
    raise ConfigurationError("SPACES_CONFIG unavailable")


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class OperatorSymbol:
    """
    Truncated L(H)-valued symbol phi(z) = sum_n coeffs[n] z^n with d x d coefficients.
    rank_one is a flag set by the rank-one constructors; it is not enforced.
    """
    coeffs: np.ndarray
    rank_one: bool = False

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs)
        if coeffs.ndim != 3 or coeffs.shape[1] != coeffs.shape[2] or coeffs.shape[1] < 1:
            raise DimensionMismatchError(f"symbol coefficients must have shape (degree+1, d, d), got {coeffs.shape}")
        if coeffs.shape[0] < 1:
            raise DimensionMismatchError("symbol needs at least one coefficient")
        if not np.all(np.isfinite(coeffs)):
            raise InvalidParameterError("symbol coefficients must be finite")
        object.__setattr__(self, "coeffs", _frozen(coeffs))

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def coefficient(self, n: int) -> np.ndarray:
        """phi-hat(n), zero beyond the degree"""
        if 0 <= n <= self.degree:
            return self.coeffs[n]
        return np.zeros((self.dim, self.dim), dtype=complex)

    def padded(self, length: int) -> np.ndarray:
        """Coefficient array of exactly `length` entries (zero padded or cut)"""
        out = np.zeros((length, self.dim, self.dim), dtype=complex)
        k = min(length, self.degree + 1)
        out[:k] = self.coeffs[:k]
        return out

    def scaled(self, c: complex) -> "OperatorSymbol":
        return OperatorSymbol(self.coeffs * c, rank_one=self.rank_one)

    def __add__(self, other: "OperatorSymbol") -> "OperatorSymbol":
        if other.dim != self.dim:
            raise DimensionMismatchError(f"cannot add symbols of dims {self.dim} and {other.dim}")
        length = max(self.degree, other.degree) + 1
        return OperatorSymbol(self.padded(length) + other.padded(length))

    @classmethod
    def scalar(cls, values: Iterable[complex]) -> "OperatorSymbol":
        values = np.asarray(list(values), dtype=complex)
        return cls(values.reshape(-1, 1, 1))

    @classmethod
    def zero(cls, dim: int, degree: int = 0) -> "OperatorSymbol":
        return cls(np.zeros((degree + 1, dim, dim), dtype=complex))


@dataclass(frozen=True, eq=False)
class VectorPolynomial:
    """Truncated H-valued test function f(z) = sum_m coeffs[m] z^m"""
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs)
        if coeffs.ndim != 2 or coeffs.shape[0] < 1 or coeffs.shape[1] < 1:
            raise DimensionMismatchError(f"vector coefficients must have shape (degree+1, d), got {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise InvalidParameterError("vector coefficients must be finite")
        object.__setattr__(self, "coeffs", _frozen(coeffs))

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros((length, self.dim), dtype=complex)
        k = min(length, self.degree + 1)
        out[:k] = self.coeffs[:k]
        return out

    def flat(self, length: Optional[int] = None) -> np.ndarray:
        """Stacked coefficient vector (f-hat(0), f-hat(1), ...)"""
        return self.padded(self.degree + 1 if length is None else length).reshape(-1)

    def normalized(self) -> "VectorPolynomial":
        """Element of O_1(H): hardy_norm == 1"""
        norm = hardy_norm(self)
        if norm == 0:
            raise InvalidParameterError("cannot normalize the zero function")
        return VectorPolynomial(self.coeffs / norm)

    @classmethod
    def scalar(cls, values: Iterable[complex]) -> "VectorPolynomial":
        return cls(np.asarray(list(values), dtype=complex).reshape(-1, 1))

    @classmethod
    def monomial(cls, k: int, dim: int = 1, index: int = 0) -> "VectorPolynomial":
        """z^k e_index"""
        coeffs = np.zeros((k + 1, dim), dtype=complex)
        coeffs[k, index] = 1.0
        return cls(coeffs)

    @classmethod
    def from_flat(cls, flat: np.ndarray, dim: int) -> "VectorPolynomial":
        flat = np.asarray(flat)
        if flat.size % dim:
            raise DimensionMismatchError(f"flat vector of length {flat.size} does not split into dim {dim}")
        return cls(flat.reshape(-1, dim))


Analytic = Union[OperatorSymbol, VectorPolynomial]


def conjugate_symbol(phi: OperatorSymbol) -> OperatorSymbol:
    """phi#(z) = phi(conj z)^*: conjugate-transpose every coefficient"""
    return OperatorSymbol(np.conj(np.swapaxes(phi.coeffs, 1, 2)), rank_one=phi.rank_one)


def conjugate_vector(f: VectorPolynomial) -> VectorPolynomial:
    return VectorPolynomial(np.conj(f.coeffs))


def hardy_norm(f: VectorPolynomial) -> float:
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))


def hardy_inner(f: VectorPolynomial, g: VectorPolynomial) -> complex:
    """<f, g> = sum_n <f-hat(n), g-hat(n)>, linear in f"""
    if f.dim != g.dim:
        raise DimensionMismatchError(f"dims differ: {f.dim} vs {g.dim}")
    length = min(f.degree, g.degree) + 1
    return complex(np.sum(f.coeffs[:length] * np.conj(g.coeffs[:length])))


def _check_disc(z, slack: Optional[float]) -> np.ndarray:
    slack = SPACES_CONFIG["evaluation_slack"] if slack is None else slack
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > 1 + slack):
        raise InvalidParameterError(f"evaluation point outside the closed unit disc: max |z| = {np.max(np.abs(z)):.6g}")
    return z


def evaluate(s: Analytic, z, slack: Optional[float] = None) -> np.ndarray:
    """
    Horner evaluation of sum s-hat(n) z^n

    Args:
        s: OperatorSymbol or VectorPolynomial
        z: complex scalar or array of points in the closed disc

    Returns:
        array of shape z.shape + coefficient shape
    """
    z = _check_disc(z, slack)
    coeffs = s.coeffs
    extra = (1,) * (coeffs.ndim - 1)
    zz = z.reshape(z.shape + extra)
    out = np.broadcast_to(coeffs[-1], z.shape + coeffs.shape[1:]).astype(complex)
    for c in coeffs[-2::-1]:
        out = out * zz + c
    return out


def rank_one_symbol(v: VectorPolynomial, column: int = 0) -> OperatorSymbol:
    """H-valued v embedded as z -> v(z) (x) e_column, i.e. phi-hat(n) = v-hat(n) e_column^*"""
    if not 0 <= column < v.dim:
        raise InvalidParameterError(f"column {column} outside 0..{v.dim - 1}")
    coeffs = np.zeros((v.degree + 1, v.dim, v.dim), dtype=complex)
    coeffs[:, :, column] = v.coeffs
    return OperatorSymbol(coeffs, rank_one=True)


def random_symbol(rng: np.random.Generator, dim: int, degree: int, real: bool = False) -> OperatorSymbol:
    shape = (degree + 1, dim, dim)
    coeffs = rng.standard_normal(shape)
    if not real:
        coeffs = coeffs + 1j * rng.standard_normal(shape)
    return OperatorSymbol(coeffs)


def random_vector(rng: np.random.Generator, dim: int, degree: int, real: bool = False) -> VectorPolynomial:
    shape = (degree + 1, dim)
    coeffs = rng.standard_normal(shape)
    if not real:
        coeffs = coeffs + 1j * rng.standard_normal(shape)
    return VectorPolynomial(coeffs)


def with_coefficients(s: Analytic, coeffs: np.ndarray) -> Analytic:
    """Same kind as s (keeping the rank-one flag) with new coefficients"""
    if isinstance(s, OperatorSymbol):
        return OperatorSymbol(coeffs, rank_one=s.rank_one)
    return VectorPolynomial(coeffs)


def scale_coefficients(s: Analytic, factors: Sequence[complex]) -> Analytic:
    """coefficient n multiplied by factors[n]"""
    factors = np.asarray(factors)
    if factors.shape[0] < s.degree + 1:
        raise DimensionMismatchError(f"need {s.degree + 1} factors, got {factors.shape[0]}")
    shape = (s.degree + 1,) + (1,) * (s.coeffs.ndim - 1)
    return with_coefficients(s, s.coeffs * factors[:s.degree + 1].reshape(shape))
