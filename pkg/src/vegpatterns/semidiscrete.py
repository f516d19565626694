"""Method-of-lines reduction: semidiscrete RHS, its banded Jacobian and the
parameter derivative.

The flat unknown ordering is node-major (B0, W0, T0, B1, ...), which makes
the Jacobian block-tridiagonal with 3x3 blocks and total bandwidth 3 on each
side.  Heavy evaluation is delegated to the kernel backend.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import InvalidArgumentError
from .grid import FieldState, GridSpec
from .params import ModelParams

#: band half-widths of the semidiscrete Jacobian
KL = KU = 3


def semidiscrete_rhs(state: FieldState, p: float, params: ModelParams,
                     include_reaction: bool = True) -> FieldState:
    """Time derivative of a field state under the discretized dynamics.

    Interior nodes use the three-point Laplacian; the boundary rows use the
    ghost-node Neumann closure.  The toxin rows carry no diffusion.  The
    ``include_reaction`` hook switches the reaction terms off so tests can
    probe the pure diffusion operator.
    """
    if not state.is_finite():
        raise InvalidArgumentError("semidiscrete_rhs: non-finite field state")
    u = state.as_flat()
    out = kernels.rhs_flat(u, p, params.kernel_array(), state.grid.h,
                           include_reaction=include_reaction)
    return FieldState.from_flat(state.grid, out)


def rhs_flat(u: np.ndarray, p: float, params: ModelParams, grid: GridSpec,
             out=None, include_reaction: bool = True) -> np.ndarray:
    """Flat-vector RHS used by the solvers."""
    return kernels.rhs_flat(u, p, params.kernel_array(), grid.h, out=out,
                            include_reaction=include_reaction)


def jacobian_band(u: np.ndarray, p: float, params: ModelParams, grid: GridSpec,
                  out=None) -> np.ndarray:
    """Banded Jacobian in ``scipy.linalg.solve_banded`` layout, shape (7, m)."""
    return kernels.jacobian_band(u, p, params.kernel_array(), grid.h, out=out)


def semidiscrete_jacobian(state: FieldState, p: float, params: ModelParams):
    """Sparse Jacobian of :func:`semidiscrete_rhs` (CSR, 3(N+1) square)."""
    if not state.is_finite():
        raise InvalidArgumentError("semidiscrete_jacobian: non-finite field state")
    band = jacobian_band(state.as_flat(), p, params, state.grid)
    m = band.shape[1]
    offsets = list(range(KU, -KL - 1, -1))  # 3, 2, 1, 0, -1, -2, -3
    return sp.dia_matrix((band, offsets), shape=(m, m)).tocsr()


def rhs_dp(u: np.ndarray, p: float, params: ModelParams) -> np.ndarray:
    """Derivative of the flat RHS with respect to precipitation.

    Only the water rows (+1) and toxin rows (-w*T) depend on p explicitly.
    """
    out = np.zeros_like(u)
    out[1::3] = 1.0
    out[2::3] = -params.w * u[2::3]
    return out


def band_to_dense(band: np.ndarray) -> np.ndarray:
    """Expand the (7, m) band into a dense matrix (small systems only)."""
    m = band.shape[1]
    J = np.zeros((m, m))
    for offset in range(-KL, KU + 1):
        row = KU - offset
        if offset >= 0:
            idx = np.arange(m - offset)
            J[idx, idx + offset] = band[row, offset:]
        else:
            idx = np.arange(m + offset)
            J[idx - offset, idx] = band[row, : m + offset]
    return J
