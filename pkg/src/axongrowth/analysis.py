"""Lyapunov diagnostics, the forward backstepping transform and run metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .backstepping import GainArtifacts, artifact_rows, kernel_tables
from .model import DerivedConstants

NOT_REACHED = "not reached"
UNDEFINED = "undefined"


def solve_lyapunov_2x2(A_cl, Q):
    """Symmetric P with A^T P + P A = -Q, via the 3-unknown vectorised system.

    Raises ``ValueError`` when ``A_cl`` is not Hurwitz.
    """
    A = np.asarray(A_cl, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if A.shape != (2, 2) or Q.shape != (2, 2):
        raise ValueError("2x2 matrices expected")
    if np.any(np.linalg.eigvals(A).real >= 0):
        raise ValueError("A_cl is not Hurwitz; no positive-definite solution is guaranteed")
    a, b, c, d = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    # unknowns (p11, p12, p22)
    M = np.array([
        [2 * a, 2 * c, 0.0],
        [b, a + d, c],
        [0.0, 2 * b, 2 * d],
    ])
    rhs = -np.array([Q[0, 0], 0.5 * (Q[0, 1] + Q[1, 0]), Q[1, 1]])
    p11, p12, p22 = np.linalg.solve(M, rhs)
    return np.array([[p11, p12], [p12, p22]])


def lyapunov_residual(A_cl, P, Q):
    A = np.asarray(A_cl, dtype=float)
    R = A.T @ P + P @ A + Q
    return float(np.linalg.norm(R) / max(np.linalg.norm(Q), 1.0))


@dataclass(frozen=True)
class LyapunovSetup:
    P1: np.ndarray
    P2: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray
    d1: float = 1.0
    d2: float = 1.0

    @property
    def weight(self):
        """Quadratic-form matrix multiplying X in the functional."""
        return self.d2 * self.P1 + 0.5 * self.P2


def closed_loop_matrix(gains, dc: DerivedConstants):
    return dc.A + np.outer(dc.B, gains.K)


def lyapunov_setup(gains, dc: DerivedConstants, Q1=None, Q2=None, d1=1.0, d2=1.0) -> LyapunovSetup:
    Q1 = np.eye(2) if Q1 is None else np.asarray(Q1, dtype=float)
    Q2 = np.eye(2) if Q2 is None else np.asarray(Q2, dtype=float)
    A_cl = closed_loop_matrix(gains, dc)
    P1 = solve_lyapunov_2x2(A_cl, Q1)
    if np.any(np.linalg.eigvalsh(P1) <= 0):
        raise ValueError("P1 is not positive definite")
    P2 = solve_lyapunov_2x2(A_cl, Q2) - P1
    return LyapunovSetup(P1=P1, P2=P2, Q1=Q1, Q2=Q2, d1=d1, d2=d2)


@njit(cache=True)
def transform_grid(u, X0, X1, dx, phi_tab, beta, D, out):
    """Forward transform on a uniform grid; phi_tab[k] = phi(-k dx)."""
    n = u.shape[0]
    for i in range(n):
        acc = 0.0
        if i < n - 1:
            for j in range(i, n):
                w = 0.5 if (j == i or j == n - 1) else 1.0
                # k(x_i, x_j) = -phi(x_i - x_j) B / D with B = [-beta, 0]
                acc += w * beta * phi_tab[j - i, 0] / D * u[j]
        tail = phi_tab[n - 1 - i]
        out[i] = u[i] - acc * dx - (tail[0] * X0 + tail[1] * X1)


def transform_to_target(u_profile, X, l, artifacts: GainArtifacts):
    """w(x) = u(x) - int_x^l k(x, y) u(y) dy - phi(x - l)^T X on the grid of ``u_profile``."""
    u = np.ascontiguousarray(u_profile, dtype=float)
    n = u.size
    dx = l / (n - 1)
    prefix_b, pp_b = artifact_rows(artifacts)
    phi_tab, _ = kernel_tables(prefix_b, pp_b, artifacts.N1_bal, artifacts.t_bal, dx, n)
    beta = -float(artifacts.B[0])
    out = np.empty(n)
    transform_grid(u, float(X[0]), float(X[1]), dx, phi_tab, beta, artifacts.D, out)
    return out


def l2_norm(values, l):
    """Trapezoid L2 norm of samples spread uniformly over [0, l]."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return 0.0
    dx = l / (v.size - 1)
    sq = v * v
    return math.sqrt(dx * (sq.sum() - 0.5 * (sq[0] + sq[-1])))


def evaluate_V(w_profile, X, m, l, setup: LyapunovSetup) -> float:
    """V = d1/2 ||w||^2 + X^T (d2 P1 + P2/2) X - m, with w sampled uniformly on [0, l]."""
    X = np.asarray(X, dtype=float)
    return 0.5 * setup.d1 * l2_norm(w_profile, l) ** 2 + float(X @ setup.weight @ X) - m


def sustained_entry_time(t, err, tol):
    """First time after which ``err <= tol`` holds at every later sample, else the sentinel."""
    t = np.asarray(t, dtype=float)
    err = np.asarray(err, dtype=float)
    bad = np.flatnonzero(~(err <= tol))
    if bad.size == 0:
        return float(t[0])
    if bad[-1] == t.size - 1:
        return NOT_REACHED
    return float(t[bad[-1] + 1])


def run_metrics(result, tol=0.05) -> dict:
    """Summary statistics of a :class:`~axongrowth.simulation.RunResult`."""
    ts = result.series
    l_s = result.config.physical.l_s
    t = ts["t_s"]
    l_err = np.abs(ts["l_m"] - l_s) / l_s
    out = {
        "mode": result.mode,
        "status": result.status,
        "t_converge_l": sustained_entry_time(t, l_err, tol),
        "t_converge_c": sustained_entry_time(t, ts["err_l2_u"], tol),
        "event_count": len(result.events),
    }
    times = result.events.times
    if times.size >= 2:
        gaps = np.diff(times)
        out["min_gap"] = float(gaps.min())
        out["mean_gap"] = float(gaps.mean())
    else:
        out["min_gap"] = UNDEFINED
        out["mean_gap"] = UNDEFINED
    out["final_errors"] = {
        "l_rel": float(l_err[-1]),
        "c_c_rel": float(abs(ts["c_c_mol_m3"][-1] - result.config.physical.c_inf) / result.config.physical.c_inf),
        "c_l2_rel": float(ts["err_l2_u"][-1]),
    }
    out["monitors"] = dict(result.monitors)
    return out
