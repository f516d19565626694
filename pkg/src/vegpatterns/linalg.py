"""Banded factorizations, spectral monitoring and sparse determinant signs.

The semidiscrete Jacobian has bandwidth 3 on each side, so direct banded LU
is O(N).  Stability flags need only the rightmost part of the spectrum:
small systems use a dense solve, large ones shift-invert iteration through
the banded factorization.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import lapack

from .errors import ConvergenceError
from .semidiscrete import KL, KU, band_to_dense

#: system size at which eigenvalue extraction switches to shift-invert
DENSE_EIG_CUTOFF = 400


class BandLU:
    """LU factorization of a (7, m) banded matrix, reusable across solves."""

    def __init__(self, band: np.ndarray):
        m = band.shape[1]
        ab = np.zeros((2 * KL + KU + 1, m))
        ab[KL:, :] = band
        lu, ipiv, info = lapack.dgbtrf(ab, kl=KL, ku=KU)
        if info != 0:
            raise ConvergenceError(f"banded LU factorization failed (info={info})")
        self._lu = lu
        self._ipiv = ipiv
        self.m = m

    def solve(self, b: np.ndarray) -> np.ndarray:
        x, info = lapack.dgbtrs(self._lu, KL, KU, b, self._ipiv)
        if info != 0:
            raise ConvergenceError(f"banded solve failed (info={info})")
        return x


def solve_banded(band: np.ndarray, b: np.ndarray) -> np.ndarray:
    """One-shot banded solve (scipy gbsv)."""
    return sla.solve_banded((KL, KU), band, b)


def rightmost_eigenvalues(band: np.ndarray, count: int = 12,
                          shift: float = 1e-4) -> np.ndarray:
    """Eigenvalues with the largest real parts of a banded matrix.

    Dense below DENSE_EIG_CUTOFF unknowns; otherwise ARPACK shift-invert
    around ``shift`` using the banded factorization, with a dense fallback
    on breakdown.  Deterministic start vector.
    """
    m = band.shape[1]
    if m <= DENSE_EIG_CUTOFF or count >= m - 2:
        ev = np.linalg.eigvals(band_to_dense(band))
        order = np.argsort(-ev.real)
        return ev[order][: min(count, m)]
    shifted = band.copy()
    shifted[KU, :] -= shift
    try:
        lu = BandLU(shifted)
        op = spla.LinearOperator((m, m), matvec=lu.solve, dtype=float)
        amat = _band_linear_operator(band)
        v0 = np.full(m, 1.0 / np.sqrt(m))
        ev = spla.eigs(amat, k=count, sigma=shift, OPinv=op, which="LM",
                       v0=v0, return_eigenvectors=False)
    except Exception:
        ev = np.linalg.eigvals(band_to_dense(band))
    order = np.argsort(-ev.real)
    return ev[order][:count]


def _band_linear_operator(band: np.ndarray) -> spla.LinearOperator:
    m = band.shape[1]
    offsets = list(range(KU, -KL - 1, -1))
    mat = sp.dia_matrix((band, offsets), shape=(m, m)).tocsr()
    return spla.aslinearoperator(mat)


def count_unstable(band: np.ndarray, count: int = 12, tol: float = 1e-9) -> int:
    """Number of eigenvalues with real part above ``tol``."""
    ev = rightmost_eigenvalues(band, count=count)
    return int(np.sum(ev.real > tol))


def null_direction(band: np.ndarray) -> np.ndarray:
    """Unit eigenvector for the eigenvalue of smallest magnitude.

    Used for branch switching at singular points; dense path for small
    systems, inverse iteration through the banded LU otherwise.
    """
    m = band.shape[1]
    if m <= DENSE_EIG_CUTOFF:
        ev, vecs = np.linalg.eig(band_to_dense(band))
        i = int(np.argmin(np.abs(ev)))
        phi = np.real(vecs[:, i])
        nrm = np.linalg.norm(phi)
        if nrm == 0.0:  # purely imaginary eigenvector pairing
            phi = np.imag(vecs[:, i])
            nrm = np.linalg.norm(phi)
        return phi / nrm
    shifted = band.copy()
    shifted[KU, :] -= 1e-8
    lu = BandLU(shifted)
    phi = np.full(m, 1.0 / np.sqrt(m))
    for _ in range(50):
        nxt = lu.solve(phi)
        nxt /= np.linalg.norm(nxt)
        if np.linalg.norm(nxt - phi) < 1e-12 or np.linalg.norm(nxt + phi) < 1e-12:
            phi = nxt
            break
        phi = nxt
    return phi


def permutation_parity(perm: np.ndarray) -> int:
    """+1 for an even permutation, -1 for odd (cycle decomposition)."""
    seen = np.zeros(len(perm), dtype=bool)
    parity = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        j = start
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            parity = -parity
    return parity


def sparse_sign_det(A: sp.spmatrix) -> int:
    """Sign of det(A) for a sparse square matrix via sparse LU.

    Returns 0 when the factorization reports exact singularity.
    """
    try:
        lu = spla.splu(A.tocsc())
    except RuntimeError:
        return 0
    diag = lu.U.diagonal()
    if np.any(diag == 0.0):
        return 0
    sign = int(np.prod(np.sign(diag)))
    sign *= permutation_parity(np.asarray(lu.perm_r))
    sign *= permutation_parity(np.asarray(lu.perm_c))
    return sign
