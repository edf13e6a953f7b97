"""
Diagonal Taylor-coefficient multipliers: D^alpha, the gamma-ratio variant D~^alpha,
and generic small multipliers.
"""
import logging
import threading
from typing import Dict, NamedTuple, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from core.coefficients import Analytic, scale_coefficients
from core.errors import DimensionMismatchError, InvalidParameterError, require_alpha

logger = logging.getLogger(__name__)

# Stirling correction: log Gamma(y) = (y - 1/2) log y - y + log(2 pi)/2 + _stirling_tail(y)
_STIRLING_COEFFS = (1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0)
_STIRLING_MIN = 10.0


def _stirling_tail(y: np.ndarray) -> np.ndarray:
    inv = 1.0 / y
    inv2 = inv * inv
    total = np.zeros_like(y)
    for c in reversed(_STIRLING_COEFFS):
        total = total * inv2 + c
    return total * inv


def log_gamma_ratio(x, a: float, subtract_power: bool = False) -> np.ndarray:
    """
    log(Gamma(x + a) / Gamma(x)), optionally minus a*log(x)

    Large arguments use the Stirling form with log1p so the ratio keeps full
    relative accuracy where a plain gammaln difference would cancel.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    big = (x >= _STIRLING_MIN) & (x + a >= _STIRLING_MIN)

    xs = x[~big]
    small_val = gammaln(xs + a) - gammaln(xs)
    if subtract_power:
        small_val = small_val - a * np.log(xs)
    out[~big] = small_val

    xb = x[big]
    big_val = (xb + a - 0.5) * np.log1p(a / xb) - a + _stirling_tail(xb + a) - _stirling_tail(xb)
    if not subtract_power:
        big_val = big_val + a * np.log(xb)
    out[big] = big_val
    return out


class MultiplierCache:
    """Read-mostly cache of multiplier diagonals keyed by (kind, alpha, n_terms)"""

    def __init__(self):
        self._entries: Dict[Tuple[str, float, int], np.ndarray] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, kind: str, alpha: float, n_terms: int, build) -> np.ndarray:
        key = (kind, float(alpha), int(n_terms))
        with self._lock:
            cached = self._entries.get(key)
            if cached is not None:
                self.hits += 1
                return cached
        values = np.asarray(build(), dtype=float)
        values.flags.writeable = False
        with self._lock:
            self.misses += 1
            return self._entries.setdefault(key, values)

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
            self.hits = 0
            self.misses = 0


_cache = MultiplierCache()


def d_factors(alpha: float, n_terms: int) -> np.ndarray:
    """(1 + n)^alpha for n < n_terms"""
    alpha = require_alpha(alpha, positive=False)
    return _cache.get("D", alpha, n_terms,
                      lambda: np.arange(1, n_terms + 1, dtype=float) ** alpha)


def d_tilde_factors(alpha: float, n_terms: int) -> np.ndarray:
    """Gamma(1 + n + alpha) / Gamma(1 + n) for n < n_terms"""
    alpha = require_alpha(alpha)

    def build():
        n = np.arange(n_terms, dtype=float)
        if float(alpha).is_integer():
            # exact rising product (n+1)(n+2)...(n+alpha)
            out = np.ones(n_terms)
            for j in range(1, int(alpha) + 1):
                out = out * (n + j)
            return out
        return np.exp(log_gamma_ratio(1.0 + n, alpha))

    return _cache.get("Dtilde", alpha, n_terms, build)


def apply_D(alpha: float, s: Analytic) -> Analytic:
    """D^alpha s: coefficient n times (1 + n)^alpha, any real alpha"""
    return scale_coefficients(s, d_factors(alpha, s.degree + 1))


def apply_D_tilde(alpha: float, s: Analytic) -> Analytic:
    return scale_coefficients(s, d_tilde_factors(alpha, s.degree + 1))


class SmallMultiplierResult(NamedTuple):
    result: Analytic
    smallness: float


def smallness_constant(lam: Sequence[complex], n_terms: int = None) -> float:
    """sup_n (1 + n)|lam_n| over the first n_terms entries"""
    lam = np.asarray(lam)
    if n_terms is not None:
        lam = lam[:n_terms]
    if lam.size == 0:
        return 0.0
    return float(np.max(np.arange(1, lam.size + 1) * np.abs(lam)))


def apply_small_multiplier(lam: Sequence[complex], s: Analytic) -> SmallMultiplierResult:
    lam = np.asarray(lam)
    if lam.ndim != 1 or lam.shape[0] < s.degree + 1:
        raise DimensionMismatchError(f"multiplier needs at least {s.degree + 1} entries, got {lam.shape}")
    result = scale_coefficients(s, lam)
    return SmallMultiplierResult(result, smallness_constant(lam, s.degree + 1))


def stirling_defect(alpha: float, n_terms: int) -> np.ndarray:
    """lam_n = Gamma(1+n+alpha) / (Gamma(1+n)(1+n)^alpha) - 1, so that D~^alpha = D^alpha (1 + lam)"""
    alpha = require_alpha(alpha)
    if n_terms < 1:
        raise InvalidParameterError(f"n_terms must be >= 1, got {n_terms}")
    return np.expm1(log_gamma_ratio(np.arange(1, n_terms + 1, dtype=float), alpha, subtract_power=True))


def cache_stats() -> Tuple[int, int]:
    return _cache.hits, _cache.misses
