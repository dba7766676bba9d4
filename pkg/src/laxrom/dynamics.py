"""Time integration of the reduced system.

State = (coefficients, eigenvalues, interaction tensor T, auxiliary
matrices).  Everything is advanced together by the implicit midpoint rule,
with the basis-rotation generator M rebuilt from the half-step state at
every nonlinear iteration:

    M_ij = chi / (lambda_i - lambda_j) * sum_m T_ijm gamma_m   (i != j)
    coeffs' = gamma - M coeffs          (or the soliton law)
    lambda_i' = -chi sum_m T_iim gamma_m
    T' = {M, T}       (rank-3 bracket)
    X' = [X, M]       for each auxiliary matrix X
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigenbasis import ReducedBasis
from .models import EquationModel
from .tensors import assemble_T, assemble_D, assemble_D3, bracket3, commutator

__all__ = [
    "FixedPointError",
    "SolverConfig",
    "ReducedState",
    "Trajectory",
    "build_M",
    "frobenius_norm_sq",
    "mode_indicator",
    "step_midpoint",
    "initial_state",
    "run",
]


class FixedPointError(RuntimeError):
    """Midpoint fixed-point iteration failed to converge."""


@dataclass
class SolverConfig:
    """Parameters of the reduced integration."""

    chi: float
    dt: float
    t_max: float
    fp_tol: float = 1e-9
    fp_max_iters: int = 100
    tol_deg: float = 1e-8
    damping: float = 1.0

    def n_steps(self) -> int:
        n = int(round(self.t_max / self.dt))
        if n < 1 or abs(n * self.dt - self.t_max) > 1e-9 * max(self.t_max, 1.0):
            raise ValueError(f"t_max={self.t_max} is not a multiple of dt={self.dt}")
        return n


@dataclass
class ReducedState:
    """Reduced variables at one time level."""

    coeffs: np.ndarray
    lam: np.ndarray
    T: np.ndarray
    aux: dict
    t: float

    def copy(self) -> "ReducedState":
        return ReducedState(
            coeffs=self.coeffs.copy(),
            lam=self.lam.copy(),
            T=self.T.copy(),
            aux={k: v.copy() for k, v in self.aux.items()},
            t=self.t,
        )


def build_M(lam, T, gamma, chi: float, tol_deg: float = 1e-8) -> np.ndarray:
    """Basis-rotation generator from the non-isospectral compatibility relation.

    M_ij = chi Theta_ij / (lambda_i - lambda_j) with Theta = sum_m T_:,:,m
    gamma_m, zero diagonal, entries with |lambda_i - lambda_j| below
    tol_deg * (1 + |lambda_i|) zeroed.  Skew-symmetry is exact: the upper
    triangle is computed and mirrored.
    """
    lam = np.asarray(lam, dtype=float)
    n = lam.size
    theta = T @ gamma
    iu, ju = np.triu_indices(n, k=1)
    denom = lam[iu] - lam[ju]
    vals = np.zeros(iu.size)
    ok = np.abs(denom) > tol_deg * (1.0 + np.abs(lam[iu]))
    vals[ok] = chi * theta[iu[ok], ju[ok]] / denom[ok]
    M = np.zeros((n, n))
    M[iu, ju] = vals
    M[ju, iu] = -vals
    return M


def frobenius_norm_sq(M: np.ndarray) -> float:
    """Squared Frobenius norm sum_mn M_mn^2 (residual energy of the basis)."""
    return float(np.sum(M * M))


def mode_indicator(M: np.ndarray) -> np.ndarray:
    """Per-mode residual indicator e(phi_m) = sum_n M_mn^2."""
    return np.sum(M * M, axis=1)


def _rhs(half: ReducedState, model: EquationModel, cfg: SolverConfig):
    gamma = model.gamma(half.coeffs, half.lam, half.T, half.aux)
    M = model.override_m(half.aux)
    if M is None:
        M = build_M(half.lam, half.T, gamma, cfg.chi, cfg.tol_deg)
    n = half.lam.size
    tii = half.T[np.arange(n), np.arange(n), :]  # (n, n) rows T_iim
    return {
        "coeffs": model.coeff_rhs(half.coeffs, half.lam, half.T, M, half.aux, gamma),
        "lam": -cfg.chi * (tii @ gamma),
        "T": bracket3(M, half.T),
        "aux": {k: commutator(X, M) for k, X in half.aux.items()},
    }, M


def step_midpoint(state: ReducedState, model: EquationModel, cfg: SolverConfig):
    """One implicit midpoint step.

    The update y+ = y + dt f((y + y+)/2) is solved by damped fixed-point
    iteration started from the current state, stopping when the largest
    component change drops below cfg.fp_tol relative to the magnitude of
    the state (the eigenvalues grow like chi, so an absolute test would
    demand more than roundoff allows at large chi).  Divergence (NaN) or
    running out of iterations raises FixedPointError.

    Returns
    -------
    (new_state, M_half) : the advanced state and the generator evaluated at
    the converged half step (the one that also propagates the basis).
    """
    dt = cfg.dt
    new = state.copy()
    scale = 1.0 + max(
        np.abs(state.coeffs).max(),
        np.abs(state.lam).max(),
        np.abs(state.T).max(),
        *(np.abs(X).max() for X in state.aux.values()),
    )
    last_delta = np.inf
    for _ in range(cfg.fp_max_iters):
        half = ReducedState(
            coeffs=0.5 * (state.coeffs + new.coeffs),
            lam=0.5 * (state.lam + new.lam),
            T=0.5 * (state.T + new.T),
            aux={k: 0.5 * (state.aux[k] + new.aux[k]) for k in state.aux},
            t=state.t + 0.5 * dt,
        )
        rhs, _ = _rhs(half, model, cfg)
        prop = ReducedState(
            coeffs=state.coeffs + dt * rhs["coeffs"],
            lam=state.lam + dt * rhs["lam"],
            T=state.T + dt * rhs["T"],
            aux={k: state.aux[k] + dt * rhs["aux"][k] for k in state.aux},
            t=state.t + dt,
        )
        deltas = [np.max(np.abs(prop.coeffs - new.coeffs)),
                  np.max(np.abs(prop.lam - new.lam)),
                  np.max(np.abs(prop.T - new.T))]
        deltas += [np.max(np.abs(prop.aux[k] - new.aux[k])) for k in state.aux]
        last_delta = float(max(deltas))
        if not np.isfinite(last_delta):
            raise FixedPointError(
                f"midpoint iteration diverged at t={state.t:.6g}"
            )
        w = cfg.damping
        if w == 1.0:
            new = prop
        else:
            new = ReducedState(
                coeffs=(1 - w) * new.coeffs + w * prop.coeffs,
                lam=(1 - w) * new.lam + w * prop.lam,
                T=(1 - w) * new.T + w * prop.T,
                aux={k: (1 - w) * new.aux[k] + w * prop.aux[k] for k in state.aux},
                t=state.t + dt,
            )
        if last_delta <= cfg.fp_tol * scale:
            break
    else:
        raise FixedPointError(
            f"no convergence in {cfg.fp_max_iters} iterations at "
            f"t={state.t:.6g} (last delta {last_delta:.3e})"
        )
    half = ReducedState(
        coeffs=0.5 * (state.coeffs + new.coeffs),
        lam=0.5 * (state.lam + new.lam),
        T=0.5 * (state.T + new.T),
        aux={k: 0.5 * (state.aux[k] + new.aux[k]) for k in state.aux},
        t=state.t + 0.5 * dt,
    )
    _, m_half = _rhs(half, model, cfg)
    return new, m_half


def initial_state(basis: ReducedBasis, coeffs0: np.ndarray, model: EquationModel) -> ReducedState:
    """Assemble T(0) and the model's auxiliary matrices on the basis."""
    coeffs0 = np.asarray(coeffs0, dtype=float)
    aux = {}
    for kind in model.required_aux:
        if kind == "D":
            aux["D"] = assemble_D(basis)
        elif kind == "D3":
            aux["D3"] = assemble_D3(basis, basis.potential, basis.chi)
        else:
            raise ValueError(f"unknown auxiliary operator {kind!r}")
    return ReducedState(
        coeffs=coeffs0.copy(),
        lam=basis.lam.copy(),
        T=assemble_T(basis),
        aux=aux,
        t=0.0,
    )


@dataclass
class Trajectory:
    """Reduced trajectory stored as arrays.

    ``times``/``coeffs``/``lambdas`` have one row per time level;
    ``m_half`` and ``frob`` (Frobenius norm of M) one entry per step,
    evaluated at the converged half steps.  The full initial and final
    states are kept for inspection; interior interaction tensors are not
    retained.
    """

    times: np.ndarray
    coeffs: np.ndarray
    lambdas: np.ndarray
    m_half: np.ndarray
    frob: np.ndarray
    first: ReducedState
    last: ReducedState

    @property
    def n_steps(self) -> int:
        return self.m_half.shape[0]


def run(
    basis: ReducedBasis,
    coeffs0: np.ndarray,
    model: EquationModel,
    cfg: SolverConfig,
) -> Trajectory:
    """Integrate the reduced system over [0, t_max]."""
    if cfg.chi != basis.chi:
        raise ValueError(f"config chi={cfg.chi} but basis was built with {basis.chi}")
    n_steps = cfg.n_steps()
    state = initial_state(basis, coeffs0, model)
    n = basis.n_modes
    p = state.coeffs.size

    times = np.empty(n_steps + 1)
    coeffs = np.empty((n_steps + 1, p))
    lambdas = np.empty((n_steps + 1, n))
    m_half = np.empty((n_steps, n, n))
    frob = np.empty(n_steps)

    times[0] = 0.0
    coeffs[0] = state.coeffs
    lambdas[0] = state.lam
    first = state.copy()
    for k in range(n_steps):
        state, M = step_midpoint(state, model, cfg)
        times[k + 1] = state.t
        coeffs[k + 1] = state.coeffs
        lambdas[k + 1] = state.lam
        m_half[k] = M
        frob[k] = np.sqrt(frobenius_norm_sq(M))
    return Trajectory(
        times=times,
        coeffs=coeffs,
        lambdas=lambdas,
        m_half=m_half,
        frob=frob,
        first=first,
        last=state,
    )
