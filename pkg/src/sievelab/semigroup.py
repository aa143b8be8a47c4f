"""Heat flow ``v' + K v = 0`` (weakly, with mass ``M``) by the theta scheme."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import OperatorPair
from .solvers import Factorization, SolverError, solve_system

__all__ = ["Trajectory", "heat_evolve", "energy_identity_residual"]


@dataclass(frozen=True)
class Trajectory:
    """States at ``times`` with per-sample mass, M-norm and energy."""

    times: np.ndarray
    states: np.ndarray          # (m + 1, n)
    mass: np.ndarray
    norm: np.ndarray
    energy: np.ndarray
    dt: float
    theta: float
    cg_iterations: int = 0

    def sample(self, count: int = 16) -> tuple[np.ndarray, np.ndarray]:
        """``count`` uniformly spaced samples on ``[0, T]`` (including both ends)."""
        steps = len(self.times) - 1
        idx = np.unique(np.round(np.linspace(0, steps, count)).astype(int))
        return self.times[idx], self.states[idx]


def heat_evolve(op: OperatorPair, f: np.ndarray, T: float, steps: int, theta: float = 1.0,
                tol: float = 1e-10, precond="jacobi") -> Trajectory:
    """Evolve ``f`` to time ``T`` with ``steps`` uniform theta steps.

    Each step solves ``(M + theta dt K) v_{k+1} = (M - (1 - theta) dt K) v_k``.
    ``theta = 1`` is backward Euler, ``theta = 0.5`` Crank-Nicolson.
    """
    if T <= 0 or steps < 1:
        raise ValueError("need T > 0 and steps >= 1")
    if theta not in (1.0, 0.5):
        raise ValueError("theta must be 1 or 1/2")
    dt = T / steps
    shift = 1.0 / (theta * dt)
    if precond == "lu":
        precond = Factorization(op, shift)
    v = np.asarray(f, dtype=float).copy()
    one = np.ones(op.n)
    states, mass, norm, energy = [v.copy()], [], [], []

    def record(x):
        mx = op.M @ x
        mass.append(float(one @ mx))
        norm.append(float(np.sqrt(x @ mx)))
        energy.append(op.energy(x))

    record(v)
    iters = 0
    for _ in range(steps):
        rhs = op.M @ v
        if theta != 1.0:
            rhs = rhs - (1 - theta) * dt * op.apply(v)
        try:
            v, st = solve_system(op, rhs * shift, shift, tol=tol, precond=precond)
        except SolverError as exc:
            raise SolverError(f"heat step failed: {exc}", exc.stats) from exc
        iters += st.iterations
        states.append(v.copy())
        record(v)
    times = dt * np.arange(steps + 1)
    return Trajectory(times, np.array(states), np.array(mass), np.array(norm), np.array(energy),
                      dt, theta, iters)


def energy_identity_residual(op: OperatorPair, traj: Trajectory) -> float:
    """``|v_m|^2 + 2 sum dt E(v_{k+1}) - |f|^2`` for a backward Euler trajectory."""
    if traj.theta != 1.0:
        raise ValueError("identity residual is defined for backward Euler")
    return float(traj.norm[-1] ** 2 + 2 * traj.dt * np.sum(traj.energy[1:]) - traj.norm[0] ** 2)
