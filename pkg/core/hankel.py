"""
Finite sections of vector-valued Hankel operators and their compositions with
D^alpha on either side, plus the exact identities relating them.

A section of size N+1 is one dense (N+1)d x (N+1)d matrix whose block (m, n) is
w_L(m) phi-hat(m+n) w_R(n).
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse

from core.coefficients import OperatorSymbol, VectorPolynomial, conjugate_symbol
from core.errors import DimensionMismatchError, require_alpha, require_truncation
from core.linalg import flatten_blocks, sigma_max
from core.multipliers import apply_D, d_factors

logger = logging.getLogger(__name__)


def _weights(rule: Optional[float], size: int) -> np.ndarray:
    """None is the identity, a float alpha is the diagonal (1 + n)^alpha"""
    if rule is None:
        return np.ones(size)
    return d_factors(require_alpha(rule, positive=False), size)


@dataclass(frozen=True, eq=False)
class HankelSection:
    symbol: OperatorSymbol
    N: int
    left: Optional[float]
    right: Optional[float]
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.symbol.dim

    @property
    def size(self) -> int:
        return self.N + 1

    def block(self, m: int, n: int) -> np.ndarray:
        d = self.dim
        return self.matrix[m * d:(m + 1) * d, n * d:(n + 1) * d]

    def norm(self, **kwargs) -> float:
        return sigma_max(self.matrix, **kwargs).value


def assemble(phi: OperatorSymbol, N: int,
             left: Optional[float] = None,
             right: Optional[float] = None) -> HankelSection:
    """
    Section [w_L(m) phi-hat(m+n) w_R(n)], m, n = 0..N

    Args:
        phi: the symbol
        N: truncation, N + 1 block rows and columns
        left: alpha of the left weight (1 + m)^alpha, None for the identity
        right: alpha of the right weight (1 + n)^alpha, None for the identity
    """
    N = require_truncation(N)
    size = N + 1
    coeffs = phi.padded(2 * N + 1)
    idx = np.arange(size)[:, None] + np.arange(size)[None, :]
    blocks = coeffs[idx]
    wl = _weights(left, size)
    wr = _weights(right, size)
    blocks = blocks * (wl[:, None] * wr[None, :])[:, :, None, None]
    matrix = flatten_blocks(blocks)
    matrix.flags.writeable = False
    logger.debug(f"[HANKEL] assembled N={N} d={phi.dim} left={left} right={right}")
    return HankelSection(phi, N, left, right, matrix)


def assemble_sparse(phi: OperatorSymbol, N: int,
                    left: Optional[float] = None,
                    right: Optional[float] = None) -> scipy.sparse.csr_matrix:
    """Same section as assemble, built from the nonzero coefficient entries only"""
    N = require_truncation(N)
    size = N + 1
    d = phi.dim
    coeffs = phi.padded(2 * N + 1)
    wl = _weights(left, size)
    wr = _weights(right, size)
    k, i, j = np.nonzero(coeffs)
    rows, cols, data = [], [], []
    for m in range(size):
        n = k - m
        ok = (n >= 0) & (n < size)
        if not np.any(ok):
            continue
        rows.append(m * d + i[ok])
        cols.append(n[ok] * d + j[ok])
        data.append(wl[m] * coeffs[k[ok], i[ok], j[ok]] * wr[n[ok]])
    shape = (size * d, size * d)
    if not rows:
        return scipy.sparse.csr_matrix(shape, dtype=complex)
    return scipy.sparse.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=shape)


def apply(section: HankelSection, f: VectorPolynomial) -> VectorPolynomial:
    """(Gamma f)-hat(n) = sum_m block(n, m) f-hat(m), truncated to n <= N"""
    if f.dim != section.dim:
        raise DimensionMismatchError(f"test function dim {f.dim} != section dim {section.dim}")
    if f.degree > section.N:
        raise DimensionMismatchError(f"test function degree {f.degree} exceeds truncation N={section.N}")
    out = section.matrix @ f.flat(section.size)
    return VectorPolynomial.from_flat(out, section.dim)


def adjoint_residual(phi: OperatorSymbol, alpha: float, N: int) -> float:
    """max |Gamma_phi D^alpha - (D^alpha Gamma_phi#)^*| over the section"""
    alpha = require_alpha(alpha, positive=False)
    lhs = assemble(phi, N, right=alpha).matrix
    rhs = assemble(conjugate_symbol(phi), N, left=alpha).matrix
    return float(np.max(np.abs(lhs - rhs.conj().T)))


def leibniz_residual(phi: OperatorSymbol, N: int) -> float:
    """max |Gamma_{D phi} - D Gamma_phi - (D Gamma_phi#)^* + Gamma_phi| over the section"""
    gamma_dphi = assemble(apply_D(1.0, phi), N).matrix
    d_gamma = assemble(phi, N, left=1.0).matrix
    d_gamma_conj = assemble(conjugate_symbol(phi), N, left=1.0).matrix
    gamma = assemble(phi, N).matrix
    return float(np.max(np.abs(gamma_dphi - d_gamma - d_gamma_conj.conj().T + gamma)))


def weighted_norm(phi: OperatorSymbol, N: int,
                  left: Optional[float] = None,
                  right: Optional[float] = None,
                  **kwargs) -> float:
    """sigma_max of a weighted section"""
    return assemble(phi, N, left=left, right=right).norm(**kwargs)
