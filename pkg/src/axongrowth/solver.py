"""Front-fixed finite differences for the moving-boundary transport problem.

With sigma = x / l(t) the domain becomes [0, 1] and the concentration obeys

    c_t = (D / l^2) c_ss - ((a - sigma l') / l) c_s - g c

with the Robin condition c_s(0) / l + c(0) = -q_s at the soma and c(1) = c_c at
the tip. The grid has ``n_grid`` interior nodes plus both endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .errors import SimulationAborted
from .model import DerivedConstants, PhysicalParams

SCHEMES = ("imex", "explicit")


@dataclass(frozen=True)
class SolverConfig:
    n_grid: int = 64
    dt: float = 1e-4
    t_final: float = 300.0
    scheme: str = "imex"
    l_cap: float = 5e-5
    output_stride: int = 100

    @property
    def dsigma(self):
        return 1.0 / (self.n_grid + 1)

    @property
    def n_steps(self):
        return int(round(self.t_final / self.dt))

    def validate(self, params: PhysicalParams):
        if self.n_grid < 16:
            raise ValueError("solver.n_grid >= 16 violated")
        if not self.dt > 0:
            raise ValueError("solver.dt > 0 violated")
        if not self.t_final > 0:
            raise ValueError("solver.t_final > 0 violated")
        if self.scheme not in SCHEMES:
            raise ValueError(f"solver.scheme must be one of {SCHEMES}")
        if not self.l_cap > params.l_s:
            raise ValueError("solver.l_cap > l_s violated")
        if self.output_stride < 1:
            raise ValueError("solver.output_stride >= 1 violated")
        if self.scheme == "explicit":
            limit = self.dsigma**2 * params.l_0**2 / (2.0 * params.D)
            if self.dt > limit:
                raise ValueError(f"solver.dt <= {limit:.3e} required by the explicit scheme")


@dataclass(frozen=True)
class SimState:
    c_hat: np.ndarray
    c_c: float
    l: float
    t: float = 0.0

    def check(self, l_cap=math.inf):
        if not (np.all(np.isfinite(self.c_hat)) and math.isfinite(self.c_c) and math.isfinite(self.l)):
            raise SimulationAborted("non-finite state", self.t)
        if self.l <= 0:
            raise SimulationAborted("length reached zero", self.t)
        if self.l >= l_cap:
            raise SimulationAborted("length cap exceeded", self.t)


def initial_state(params: PhysicalParams, cfg: SolverConfig) -> SimState:
    """Uniform profile c0_scale * c_inf with a matching tip value."""
    c0 = params.c0_scale * params.c_inf
    return SimState(c_hat=np.full(cfg.n_grid + 2, c0), c_c=c0, l=params.l_0, t=0.0)


@njit(cache=True)
def tip_slope(c, dsig):
    """One-sided second-order d c / d sigma at sigma = 1."""
    n = c.shape[0] - 1
    return (3.0 * c[n] - 4.0 * c[n - 1] + c[n - 2]) / (2.0 * dsig)


@njit(cache=True)
def ode_rates(c, c_c, l, dsig, r_g, c_inf, a_tilde, beta, kappa, r_g_tilde):
    """Returns ``(dc_c/dt, dl/dt)`` for the growth-cone and elongation ODEs."""
    cx_tip = tip_slope(c, dsig) / l
    ccdot = a_tilde * c_c - beta * cx_tip - kappa * c_c * c_c + c_inf * r_g_tilde
    return ccdot, r_g * (c_c - c_inf)


@njit(cache=True)
def interior_rates(c, l, ldot, dsig, D, a, g, out):
    """Front-fixed interior time derivative (endpoints of ``out`` left untouched)."""
    n = c.shape[0]
    inv = 1.0 / (dsig * dsig)
    for i in range(1, n - 1):
        s = i * dsig
        cs = (c[i + 1] - c[i - 1]) / (2.0 * dsig)
        css = (c[i + 1] - 2.0 * c[i] + c[i - 1]) * inv
        out[i] = D / (l * l) * css - (a - s * ldot) / l * cs - g * c[i]


@njit(cache=True)
def pde_substep_imex(c, l_old, l_new, ldot, q, tip, dt, dsig, D, a, g, src):
    """Advance the concentration profile by ``dt``; returns the new array.

    Diffusion is backward Euler on the new length, advection and decay are forward
    Euler on the old length. ``src`` is added to the interior as ``dt * src``.
    """
    n = c.shape[0]
    N = n - 1
    sub = np.zeros(n)
    dia = np.zeros(n)
    sup = np.zeros(n)
    rhs = np.zeros(n)
    for i in range(1, N):
        s = i * dsig
        cs = (c[i + 1] - c[i - 1]) / (2.0 * dsig)
        rhs[i] = c[i] + dt * (-(a - s * ldot) / l_old * cs - g * c[i] + src[i])
    r = D * dt / (l_new * l_new * dsig * dsig)
    for i in range(1, N):
        sub[i] = -r
        dia[i] = 1.0 + 2.0 * r
        sup[i] = -r
    # Robin row: (-3c0 + 4c1 - c2) kk + c0 = -q, with c2 eliminated through row 1
    kk = 1.0 / (2.0 * dsig * l_new)
    dia[0] = 1.0 - 2.0 * kk
    sup[0] = kk * (2.0 - 1.0 / r)
    rhs[0] = -q - kk * rhs[1] / r
    dia[N] = 1.0
    rhs[N] = tip
    cp = np.zeros(n)
    dp = np.zeros(n)
    cp[0] = sup[0] / dia[0]
    dp[0] = rhs[0] / dia[0]
    for i in range(1, n):
        piv = dia[i] - sub[i] * cp[i - 1]
        cp[i] = sup[i] / piv
        dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / piv
    out = np.empty(n)
    out[N] = dp[N]
    for i in range(N - 1, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]
    return out


@njit(cache=True)
def pde_substep_explicit(c, l_old, l_new, ldot, q, tip, dt, dsig, D, a, g, src):
    n = c.shape[0]
    N = n - 1
    rate = np.zeros(n)
    interior_rates(c, l_old, ldot, dsig, D, a, g, rate)
    out = np.empty(n)
    for i in range(1, N):
        out[i] = c[i] + dt * (rate[i] + src[i])
    out[N] = tip
    kk = 1.0 / (2.0 * dsig * l_new)
    out[0] = (-q - 4.0 * kk * out[1] + kk * out[2]) / (1.0 - 3.0 * kk)
    return out


@njit(cache=True)
def plant_step(c, c_c, l, q, dt, dsig, scheme, D, a, g, r_g, c_inf, a_tilde, beta, kappa, r_g_tilde):
    """One step of the coupled system. ``scheme`` 0 = imex, 1 = explicit.

    Returns ``(c_new, c_c_new, l_new, ldot)``; the ODE rates use the state before the step.
    """
    ccdot, ldot = ode_rates(c, c_c, l, dsig, r_g, c_inf, a_tilde, beta, kappa, r_g_tilde)
    c_c_new = c_c + dt * ccdot
    l_new = l + dt * ldot
    src = np.zeros(c.shape[0])
    if scheme == 0:
        c_new = pde_substep_imex(c, l, l_new, ldot, q, c_c_new, dt, dsig, D, a, g, src)
    else:
        c_new = pde_substep_explicit(c, l, l_new, ldot, q, c_c_new, dt, dsig, D, a, g, src)
    return c_new, c_c_new, l_new, ldot


def front_fixed_rhs(state: SimState, q_s_applied, params: PhysicalParams, dc: DerivedConstants):
    """Semi-discrete time derivative ``(dc_hat/dt interior, dc_c/dt, dl/dt)``.

    Also returns the Robin residual ``c_s(0)/l + c(0) + q_s`` (second-order one-sided),
    which vanishes for a state compatible with the boundary condition.
    """
    c = np.ascontiguousarray(state.c_hat, dtype=float)
    if not (np.all(np.isfinite(c)) and math.isfinite(state.c_c) and math.isfinite(state.l)):
        raise SimulationAborted("non-finite state", state.t)
    dsig = 1.0 / (c.size - 1)
    ccdot, ldot = ode_rates(c, state.c_c, state.l, dsig, params.r_g, params.c_inf, dc.a_tilde,
                            dc.beta, dc.kappa, params.r_g_tilde)
    rate = np.zeros(c.size)
    interior_rates(c, state.l, ldot, dsig, params.D, params.a, params.g, rate)
    robin = (-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * dsig * state.l) + c[0] + q_s_applied
    return rate[1:-1], ccdot, ldot, robin


def step(state: SimState, q_s_applied, cfg: SolverConfig, params: PhysicalParams, dc: DerivedConstants) -> SimState:
    if not math.isfinite(q_s_applied):
        raise SimulationAborted("non-finite boundary input", state.t)
    c = np.ascontiguousarray(state.c_hat, dtype=float)
    c_new, cc, l, _ = plant_step(c, state.c_c, state.l, q_s_applied, cfg.dt, 1.0 / (c.size - 1),
                                 SCHEMES.index(cfg.scheme), params.D, params.a, params.g, params.r_g,
                                 params.c_inf, dc.a_tilde, dc.beta, dc.kappa, params.r_g_tilde)
    new = replace(state, c_hat=c_new, c_c=cc, l=l, t=state.t + cfg.dt)
    new.check(cfg.l_cap)
    return new


@njit(cache=True, nogil=True)
def _integrate(c, c_c, l, q, dt, n_steps, dsig, scheme, D, a, g, r_g, c_inf, a_tilde, beta, kappa, r_g_tilde):
    for _ in range(n_steps):
        c, c_c, l, _ = plant_step(c, c_c, l, q, dt, dsig, scheme, D, a, g, r_g, c_inf, a_tilde, beta, kappa,
                                  r_g_tilde)
    return c, c_c, l


def integrate_open_loop(state: SimState, q_s_applied, n_steps, cfg: SolverConfig, params: PhysicalParams,
                        dc: DerivedConstants) -> SimState:
    """Hold ``q_s_applied`` fixed for ``n_steps`` steps (no feedback, no abort checks inside)."""
    c = np.array(state.c_hat, dtype=float)
    c, cc, l = _integrate(c, float(state.c_c), float(state.l), float(q_s_applied), cfg.dt, int(n_steps),
                          1.0 / (c.size - 1), SCHEMES.index(cfg.scheme), params.D, params.a, params.g,
                          params.r_g, params.c_inf, dc.a_tilde, dc.beta, dc.kappa, params.r_g_tilde)
    new = SimState(c_hat=c, c_c=float(cc), l=float(l), t=state.t + n_steps * cfg.dt)
    new.check(cfg.l_cap)
    return new
