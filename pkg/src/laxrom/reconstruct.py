"""Full-order reconstruction from a reduced trajectory.

The nodal modes follow dB/dt = B M; each step applies the Crank-Nicolson
(Cayley) update  B+ (I - dt/2 M) = B (I + dt/2 M), which preserves
G-orthonormality exactly for skew M, followed by a modified Gram-Schmidt
sweep in the G-inner product to stop roundoff drift from accumulating.
"""

from __future__ import annotations

import numpy as np

from .eigenbasis import ReducedBasis

__all__ = ["propagate_basis", "reconstruct_nodal", "orthonormalize_g"]


def orthonormalize_g(B: np.ndarray, G) -> np.ndarray:
    """Modified Gram-Schmidt in the G-inner product (columns in place order).

    Assumes the columns are already close to G-orthonormal (as after a
    Cayley step); a rank-deficient set raises LinAlgError.
    """
    B = np.array(B, dtype=float)
    W = G @ B  # updated column by column alongside B
    for j in range(B.shape[1]):
        v = B[:, j]
        w = W[:, j]
        for i in range(j):
            r = B[:, i] @ w
            v -= r * B[:, i]
            w -= r * W[:, i]
        nrm = np.sqrt(abs(v @ w))
        if nrm <= 1e-14:
            raise np.linalg.LinAlgError(f"column {j} lost rank in Gram-Schmidt")
        B[:, j] = v / nrm
        W[:, j] = w / nrm
    return B


def propagate_basis(basis: ReducedBasis, m_half: np.ndarray, dt: float) -> ReducedBasis:
    """Advance the modes one step with the half-step generator ``m_half``."""
    n = basis.n_modes
    if m_half.shape != (n, n):
        raise ValueError(f"generator shape {m_half.shape} does not match {n} modes")
    h = 0.5 * dt
    Y = basis.B @ (np.eye(n) + h * m_half)
    Bnew = np.linalg.solve((np.eye(n) - h * m_half).T, Y.T).T
    Bnew = orthonormalize_g(Bnew, basis.fem.mass)
    return ReducedBasis(
        B=Bnew,
        lam=basis.lam,
        chi=basis.chi,
        potential=basis.potential,
        fem=basis.fem,
    )


def reconstruct_nodal(basis: ReducedBasis, coeffs: np.ndarray, law: str = "standard") -> np.ndarray:
    """Nodal solution from reduced coefficients.

    law="standard": u = sum_i coeffs_i phi_i.
    law="soliton":  u = sum_i coeffs_i phi_i^2 over the leading len(coeffs)
    modes (squared bound states).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    p = coeffs.size
    if p > basis.n_modes:
        raise ValueError(f"{p} coefficients for {basis.n_modes} modes")
    if law == "standard":
        return basis.B[:, :p] @ coeffs
    if law == "soliton":
        return (basis.B[:, :p] ** 2) @ coeffs
    raise ValueError(f"unknown reconstruction law {law!r}")
