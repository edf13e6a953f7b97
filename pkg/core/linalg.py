"""
Dense numerical kernels: largest singular value, largest Hermitian eigenvalue,
and block-matrix flattening.

Every operator norm in hankellab is an extremal singular or eigen value of an
explicitly assembled matrix, so all of them go through this module.
"""
import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse

from core.errors import (
    ConfigurationError,
    DimensionMismatchError,
    HermitianViolationError,
    InvalidParameterError,
)

logger = logging.getLogger(__name__)

try:
    from hankellab_config import LINALG_CONFIG
except ImportError:
    logger.error("[LINALG] hankellab_config.py not found on the import path")
    raise ConfigurationError("LINALG_CONFIG unavailable")


class SigmaResult(NamedTuple):
    value: float
    residual: float
    iters: int
    converged: bool


class EigenResult(NamedTuple):
    value: float
    residual: float
    iters: int
    converged: bool


def _settings(tol, max_iters, seed) -> Tuple[float, int, int]:
    tol = LINALG_CONFIG["tol"] if tol is None else float(tol)
    max_iters = LINALG_CONFIG["max_iters"] if max_iters is None else int(max_iters)
    seed = LINALG_CONFIG["restart_seed"] if seed is None else int(seed)
    if not tol > 0:
        raise InvalidParameterError(f"tol must be > 0, got {tol}")
    if max_iters < 1:
        raise InvalidParameterError(f"max_iters must be >= 1, got {max_iters}")
    return tol, max_iters, seed


def _check_finite(M) -> None:
    data = M.data if scipy.sparse.issparse(M) else M
    if not np.all(np.isfinite(data)):
        raise InvalidParameterError("matrix has non-finite entries")


def _start_vectors(n: int, complex_valued: bool, seed: int):
    ones = np.ones(n, dtype=complex if complex_valued else float)
    rng = np.random.default_rng(seed)
    restart = rng.standard_normal(n)
    if complex_valued:
        restart = restart + 1j * rng.standard_normal(n)
    return ones, restart


def _power_iteration(apply, v0: np.ndarray, tol: float, max_iters: int) -> Tuple[float, float, int, bool]:
    """
    Dominant eigenvalue of a positive semidefinite operator given as a matvec.
    Stops on the relative residual ||A v - lam v|| / lam.
    """
    norm = np.linalg.norm(v0)
    if norm == 0:
        return 0.0, 0.0, 0, True
    v = v0 / norm
    lam = 0.0
    residual = np.inf
    for it in range(1, max_iters + 1):
        y = apply(v)
        lam = float(np.real(np.vdot(v, y)))
        y_norm = np.linalg.norm(y)
        if y_norm == 0 or lam <= 0:
            # v lies in the null space
            return 0.0, 0.0, it, True
        residual = float(np.linalg.norm(y - lam * v) / lam)
        if residual <= tol:
            return lam, residual, it, True
        v = y / y_norm
    return lam, residual, max_iters, False


def sigma_max(M,
              tol: Optional[float] = None,
              max_iters: Optional[int] = None,
              seed: Optional[int] = None,
              method: str = "auto",
              dense_limit: Optional[int] = None) -> SigmaResult:
    """
    Largest singular value of a dense or sparse matrix

    Args:
        M: numpy array or scipy.sparse matrix
        tol: relative residual target for power iteration on M*M
        max_iters: iteration cap per start vector
        seed: seed of the restart vector
        method: "auto" (SVD up to dense_limit, power iteration above), "svd" or "power"
        dense_limit: override of LINALG_CONFIG["dense_limit"]

    Returns:
        SigmaResult; converged is False when the cap was hit (value is still the best estimate)
    """
    tol, max_iters, seed = _settings(tol, max_iters, seed)
    if method not in ("auto", "svd", "power"):
        raise InvalidParameterError(f"unknown sigma_max method {method!r}")
    if not scipy.sparse.issparse(M):
        M = np.asarray(M)
    if M.ndim != 2:
        raise DimensionMismatchError(f"expected a matrix, got shape {M.shape}")
    _check_finite(M)
    rows, cols = M.shape
    if rows == 0 or cols == 0:
        return SigmaResult(0.0, 0.0, 0, True)

    limit = LINALG_CONFIG["dense_limit"] if dense_limit is None else int(dense_limit)
    if method == "svd" or (method == "auto" and max(rows, cols) <= limit):
        dense = M.toarray() if scipy.sparse.issparse(M) else M
        values = scipy.linalg.svdvals(dense)
        return SigmaResult(float(values[0]) if values.size else 0.0, 0.0, 0, True)

    if scipy.sparse.issparse(M):
        M = M.tocsr()
        MH = M.conj().T.tocsr()
    else:
        MH = M.conj().T

    def apply(v):
        return MH @ (M @ v)

    best = None
    for start in _start_vectors(cols, np.iscomplexobj(M), seed):
        lam, residual, iters, converged = _power_iteration(apply, start, tol, max_iters)
        if best is None or lam > best[0]:
            best = (lam, residual, iters, converged)

    lam, residual, iters, converged = best
    if not converged:
        logger.warning(f"[LINALG] sigma_max did not converge: {rows}x{cols}, "
                       f"residual={residual:.3e} after {iters} iterations")
    return SigmaResult(float(np.sqrt(max(lam, 0.0))), residual, iters, converged)


def lambda_max_hermitian(M,
                         tol: Optional[float] = None,
                         max_iters: Optional[int] = None,
                         seed: Optional[int] = None,
                         method: str = "auto") -> EigenResult:
    """Largest eigenvalue of a Hermitian (normally positive semidefinite) matrix"""
    tol, max_iters, seed = _settings(tol, max_iters, seed)
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {M.shape}")
    _check_finite(M)
    n = M.shape[0]
    if n == 0:
        return EigenResult(0.0, 0.0, 0, True)

    scale = max(1.0, float(np.max(np.abs(M))))
    defect = float(np.max(np.abs(M - M.conj().T)))
    if defect > LINALG_CONFIG["hermitian_tol"] * scale:
        raise HermitianViolationError(f"matrix is not Hermitian: defect {defect:.3e}")
    H = 0.5 * (M + M.conj().T)

    if method == "svd" or (method == "auto" and n <= LINALG_CONFIG["dense_limit"]):
        return EigenResult(float(scipy.linalg.eigvalsh(H)[-1]), 0.0, 0, True)

    # Gershgorin shift keeps the iterated operator positive semidefinite
    radii = np.sum(np.abs(H), axis=1) - np.abs(np.diag(H))
    lower = float(np.min(np.real(np.diag(H)) - radii))
    shift = -lower if lower < 0 else 0.0

    def apply(v):
        return H @ v + shift * v

    best = None
    for start in _start_vectors(n, np.iscomplexobj(H), seed):
        lam, residual, iters, converged = _power_iteration(apply, start, tol, max_iters)
        if best is None or lam > best[0]:
            best = (lam, residual, iters, converged)

    lam, residual, iters, converged = best
    if not converged:
        logger.warning(f"[LINALG] lambda_max_hermitian did not converge: n={n}, residual={residual:.3e}")
    return EigenResult(lam - shift, residual, iters, converged)


def flatten_blocks(blocks: np.ndarray) -> np.ndarray:
    """(R, C, p, q) array of blocks -> dense (R*p, C*q) matrix, block (r, c) at rows r*p.., cols c*q.."""
    blocks = np.asarray(blocks)
    if blocks.ndim != 4:
        raise DimensionMismatchError(f"expected a 4-index block array, got shape {blocks.shape}")
    R, C, p, q = blocks.shape
    return blocks.transpose(0, 2, 1, 3).reshape(R * p, C * q)


def block_of(M: np.ndarray, r: int, c: int, p: int, q: Optional[int] = None) -> np.ndarray:
    q = p if q is None else q
    return M[r * p:(r + 1) * p, c * q:(c + 1) * q]
