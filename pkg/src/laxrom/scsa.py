"""Signal representation by Schrodinger spectral expansions.

A nonnegative signal u can be encoded through the spectrum of
-d2/dx2 - chi u: either as a plain projection on the first eigenmodes, or
through the squared bound-state modes weighted by sqrt(-lambda) (the
reflectionless-potential reconstruction).  Includes the chi sweep used to
pick the sharpest representation at a given mode budget, and a small CSV
reader for sampled signals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigenbasis import initial_projection, solve_schrodinger_eig
from .mesh import FemOperators

__all__ = [
    "eigen_expansion",
    "soliton_expansion",
    "shift_nonnegative",
    "chi_sweep",
    "SweepResult",
    "read_signal_csv",
]


def shift_nonnegative(u_nodal: np.ndarray):
    """Shift a signal by its minimum so it becomes nonnegative.

    Returns (shifted, offset); adding ``offset`` back recovers the input.
    """
    u_nodal = np.asarray(u_nodal, dtype=float)
    offset = float(u_nodal.min())
    return u_nodal - offset, offset


def _rel_error(fem, u, approx):
    denom = fem.norm(u)
    if denom == 0.0:
        return 0.0
    return fem.norm(u - approx) / denom


def eigen_expansion(u_nodal: np.ndarray, chi: float, n_modes: int, fem: FemOperators):
    """Projection of u on the first ``n_modes`` modes of its own operator.

    Returns (approximation, relative L2 error).
    """
    u_nodal = np.asarray(u_nodal, dtype=float)
    if not u_nodal.any():
        return u_nodal.copy(), 0.0
    basis = solve_schrodinger_eig(fem, u_nodal, chi, n_modes)
    beta, _ = initial_projection(basis, u_nodal)
    approx = basis.B @ beta
    return approx, _rel_error(fem, u_nodal, approx)


def soliton_expansion(
    u_nodal: np.ndarray,
    chi: float,
    fem: FemOperators,
    tol_deg: float = 1e-8,
):
    """Reflectionless reconstruction from the bound states.

    u ~ (4/chi) sum_m kappa_m phi_m^2 over the modes with lambda_m < 0,
    kappa_m = sqrt(-lambda_m).  The signal must be nonnegative (shift it
    first); with no bound state the approximation is zero.

    Returns (approximation, relative L2 error, number of bound states).
    """
    u_nodal = np.asarray(u_nodal, dtype=float)
    if u_nodal.min() < -0.0:
        raise ValueError("signal must be nonnegative; apply shift_nonnegative first")
    basis = solve_schrodinger_eig(fem, u_nodal, chi, fem.n_active)
    neg = basis.lam < -tol_deg
    n_neg = int(np.count_nonzero(neg))
    if n_neg == 0:
        approx = np.zeros_like(u_nodal)
    else:
        kappa = np.sqrt(-basis.lam[neg])
        approx = (4.0 / chi) * ((basis.B[:, neg] ** 2) @ kappa)
    return approx, _rel_error(fem, u_nodal, approx), n_neg


@dataclass
class SweepResult:
    """chi sweep output.

    ``rows`` holds one (chi, n_modes, error) triple per grid point and mode
    count; ``best`` maps each mode count to the grid chi with the smallest
    error, as (n_modes, chi, error) triples.
    """

    method: str
    rows: list
    best: list


def chi_sweep(
    u_nodal: np.ndarray,
    chi_grid,
    n_modes_cap: int,
    method: str,
    fem: FemOperators,
    tol_deg: float = 1e-8,
) -> SweepResult:
    """Representation error as a function of chi and the mode budget.

    method="eigen": error of the n-mode projection for n = 1..cap (computed
    from the Parseval remainder of one eigensolve per chi).
    method="soliton": error of the partial bound-state sum truncated to the
    n deepest states (values for n beyond the bound-state count repeat the
    full sum).
    """
    if method not in ("eigen", "soliton"):
        raise ValueError(f"unknown method {method!r}")
    u_nodal = np.asarray(u_nodal, dtype=float)
    cap = int(n_modes_cap)
    if not 1 <= cap <= fem.n_active:
        raise ValueError(f"mode cap {cap} out of range")
    unorm = fem.norm(u_nodal)
    if unorm == 0.0:
        raise ValueError("zero signal")

    rows = []
    for chi in (float(c) for c in chi_grid):
        if method == "eigen":
            basis = solve_schrodinger_eig(fem, u_nodal, chi, cap)
            beta, _ = initial_projection(basis, u_nodal)
            # nested projections: ||u - P_n u||^2 = ||u||^2 - sum_{j<=n} beta_j^2
            resid = np.maximum(unorm**2 - np.cumsum(beta**2), 0.0)
            errs = np.sqrt(resid) / unorm
        else:
            basis = solve_schrodinger_eig(fem, u_nodal, chi, fem.n_active)
            neg = basis.lam < -tol_deg
            kappa = np.sqrt(-basis.lam[neg])
            parts = (4.0 / chi) * (basis.B[:, neg] ** 2) * kappa[None, :]
            partial = np.cumsum(parts, axis=1) if kappa.size else np.zeros((u_nodal.size, 0))
            errs = np.empty(cap)
            for n in range(1, cap + 1):
                m = min(n, kappa.size)
                approx = partial[:, m - 1] if m else np.zeros_like(u_nodal)
                errs[n - 1] = fem.norm(u_nodal - approx) / unorm
        rows.extend((chi, n, float(errs[n - 1])) for n in range(1, cap + 1))

    best = []
    for n in range(1, cap + 1):
        sub = [(chi, err) for chi, nn, err in rows if nn == n]
        chi_best, err_best = min(sub, key=lambda t: t[1])
        best.append((n, chi_best, err_best))
    return SweepResult(method=method, rows=rows, best=best)


def read_signal_csv(path):
    """Load a sampled signal from a two-column (x, u) CSV file.

    A header line is skipped if present.  Samples are sorted by x; a
    non-uniform grid is resampled onto a uniform one of the same length by
    linear interpolation.  Returns (x, u).
    """
    with open(path) as f:
        first = f.readline()
        skip = 0
        try:
            [float(tok) for tok in first.replace(",", " ").split()]
        except ValueError:
            skip = 1
    data = np.loadtxt(path, delimiter=",", skiprows=skip)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ValueError(f"{path}: expected two columns (x, u)")
    order = np.argsort(data[:, 0])
    x, u = data[order, 0], data[order, 1]
    if x.size < 3:
        raise ValueError(f"{path}: need at least 3 samples")
    if np.any(np.diff(x) <= 0):
        raise ValueError(f"{path}: duplicate x samples")
    spacing = np.diff(x)
    if not np.allclose(spacing, spacing[0], rtol=1e-8, atol=0.0):
        xu = np.linspace(x[0], x[-1], x.size)
        u = np.interp(xu, x, u)
        x = xu
    return x, u
