"""Pure-NumPy reference kernels for the semidiscrete hot path.

The expressions here define the floating-point semantics of the package:
the compiled Cython backend must reproduce them bit for bit (same operation
order, no FMA contraction), which the kernel test suite asserts.  State is a
flat node-major vector ``u = (B0, W0, T0, B1, W1, T1, ...)`` of length
``3 * n_nodes``; the Laplacian uses the three-point stencil with ghost-node
Neumann closure ``2*(u1 - u0)/h^2`` at both ends.
"""

import numpy as np

BACKEND = "reference"

# parameter array layout shared with the compiled backend
PAR_FIELDS = ("c", "d", "k", "l", "q", "r", "s", "w", "D_B", "D_W")


def rhs_flat(u, p, par, h, out=None, include_reaction=True):
    """Semidiscrete right-hand side on the flat node-major state vector.

    The stencil is summed as ``(left + right) - 2*mid`` so that reflecting
    the state reflects the result bit for bit.
    """
    c, d, k, l, q, r, s, w, DB, DW = par
    B = u[0::3]
    W = u[1::3]
    T = u[2::3]
    if out is None:
        out = np.empty_like(u)
    lapB = np.empty_like(B)
    lapW = np.empty_like(W)
    inv_h2 = 1.0 / (h * h)
    lapB[1:-1] = ((B[:-2] + B[2:]) - 2.0 * B[1:-1]) * inv_h2
    lapW[1:-1] = ((W[:-2] + W[2:]) - 2.0 * W[1:-1]) * inv_h2
    lapB[0] = 2.0 * (B[1] - B[0]) * inv_h2
    lapB[-1] = 2.0 * (B[-2] - B[-1]) * inv_h2
    lapW[0] = 2.0 * (W[1] - W[0]) * inv_h2
    lapW[-1] = 2.0 * (W[-2] - W[-1]) * inv_h2
    if include_reaction:
        out[0::3] = DB * lapB + (c * B * B * W - (d + s * T) * B)
        out[1::3] = DW * lapW + (p - r * B * B * W - l * W)
        out[2::3] = q * (d + s * T) * B - (k + w * p) * T
    else:
        out[0::3] = DB * lapB
        out[1::3] = DW * lapW
        out[2::3] = 0.0
    return out


def jacobian_band(u, p, par, h, out=None):
    """Banded Jacobian of ``rhs_flat`` in LAPACK ``solve_banded`` layout.

    Returns shape ``(7, m)`` with ``band[3 + i - j, j] = J[i, j]``
    (``kl = ku = 3``).  Reaction blocks sit in rows 1..5, diffusion
    coupling in rows 0 and 6.
    """
    c, d, k, l, q, r, s, w, DB, DW = par
    m = u.shape[0]
    B = u[0::3]
    W = u[1::3]
    T = u[2::3]
    if out is None:
        out = np.zeros((7, m))
    else:
        out[:] = 0.0
    inv_h2 = 1.0 / (h * h)
    iB = np.arange(0, m, 3)
    iW = iB + 1
    iT = iB + 2

    # reaction blocks (diagonal 3x3 per node)
    out[3, iB] = 2.0 * c * B * W - d - s * T - 2.0 * DB * inv_h2
    out[3, iW] = -r * B * B - l - 2.0 * DW * inv_h2
    out[3, iT] = q * s * B - (k + w * p)
    out[2, iW] = c * B * B        # dBdot/dW
    out[1, iT] = -s * B           # dBdot/dT
    out[4, iB] = -2.0 * r * B * W  # dWdot/dB
    out[5, iB] = q * (d + s * T)  # dTdot/dB

    # diffusion coupling to the right neighbour: J[3i+f, 3(i+1)+f]
    out[0, iB[1:]] = DB * inv_h2
    out[0, iW[1:]] = DW * inv_h2
    out[0, iB[1]] = 2.0 * DB * inv_h2   # ghost node at x=0
    out[0, iW[1]] = 2.0 * DW * inv_h2
    # coupling to the left neighbour: J[3i+f, 3(i-1)+f]
    out[6, iB[:-1]] = DB * inv_h2
    out[6, iW[:-1]] = DW * inv_h2
    out[6, iB[-2]] = 2.0 * DB * inv_h2  # ghost node at x=L
    out[6, iW[-2]] = 2.0 * DW * inv_h2
    return out
