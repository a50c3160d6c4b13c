"""Closed-loop runs: plant, feedback law, trigger and hold in one compiled loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .analysis import lyapunov_setup, transform_grid
from .backstepping import artifact_rows, build_gain_artifacts, control_law_grid, kernel_tables_into
from .config import ExperimentConfig
from .model import derive_constants
from .solver import SCHEMES, SimState, initial_state, plant_step
from .triggering import MODE_CODE, MODES, Event, EventLog, m_rhs_nb, petc_gamma_nb, trigger_decide

COLUMNS = ("t_s", "l_m", "c_c_mol_m3", "U_continuous", "U_applied", "d", "m", "gamma_p", "event_flag",
           "err_l2_u", "V")

STATUS_OK = "ok"
ABORT_REASONS = {
    0: STATUS_OK,
    1: "length cap exceeded",
    2: "length reached zero",
    3: "non-finite state",
    4: "non-finite feedback value",
}

# indices into the monitor vector returned by the loop
_MONITORS = ("max_cetc_violation", "max_petc_gamma_silent", "max_m", "petc_checks", "max_abs_ldot",
             "ldot_over_vbar_steps", "steps_taken")


@njit(cache=True)
def _trapz_sq(v, dx):
    n = v.shape[0]
    acc = 0.0
    for i in range(n):
        w = 0.5 if (i == 0 or i == n - 1) else 1.0
        acc += w * v[i] * v[i]
    return acc * dx


@njit(cache=True, nogil=True)
def _run_loop(c, c_c, l, n_steps, dt, scheme, stride, l_cap, phys, trig, mode, hs, force, w_form,
              lyap, Wx, d1, prefix_b, pp_b, N1_bal, t_bal, q_star, v_bar):
    # phys = (D, a, g, r_g, c_inf, a_tilde, beta, kappa, r_g_tilde, K_p, K_m, lam_p, lam_m, l_s)
    D, a, g, r_g, c_inf = phys[0], phys[1], phys[2], phys[3], phys[4]
    a_tilde, beta, kappa, r_g_tilde = phys[5], phys[6], phys[7], phys[8]
    K_p, K_m, lam_p, lam_m, l_s = phys[9], phys[10], phys[11], phys[12], phys[13]
    # trig = (gamma, eta, rho, b1..b5, m0, q, e_qh)
    gamma, eta, rho = trig[0], trig[1], trig[2]
    b1, b2, b3, b4, b5 = trig[3], trig[4], trig[5], trig[6], trig[7]
    m_int, q, e_qh = trig[8], trig[9], trig[10]
    gamma_rho = gamma * rho

    n = c.shape[0]
    dsig = 1.0 / (n - 1)
    n_rec = n_steps // stride + 2
    rows = np.full((n_rec, 11), np.nan)
    k_rec = 0
    ev = np.empty((256, 4))
    n_ev = 0
    u = np.empty(n)
    ceq = np.empty(n)
    w = np.empty(n)
    phi_tab = np.empty((n, 2))
    p_tab = np.empty((n, 2))
    mon = np.zeros(7)
    mon[0] = -np.inf
    mon[1] = -np.inf
    mon[2] = m_int
    u_held = 0.0
    status = 0
    events_since_row = 0
    t = 0.0
    for step_i in range(n_steps + 1):
        t = step_i * dt
        dx = l * dsig
        # geometric recursion for the two exponentials of the steady profile
        ep = K_p * math.exp(-lam_p * l_s)
        em = K_m * math.exp(-lam_m * l_s)
        rp = math.exp(lam_p * dx)
        rm = math.exp(lam_m * dx)
        for i in range(n):
            ceq[i] = c_inf * (ep + em)
            u[i] = c[i] - ceq[i]
            ep *= rp
            em *= rm
        X0 = c_c - c_inf
        X1 = l - l_s
        kernel_tables_into(prefix_b, pp_b, N1_bal, t_bal, dx, phi_tab, p_tab)
        U = control_law_grid(u, X0, X1, dx, p_tab, beta, D)
        if not math.isfinite(U):
            status = 4
            break

        is_check = mode == 2 and step_i % hs == 0
        if step_i == 0 and mode != 0:
            # the first sample is always taken
            fire = True
            val = np.nan
        else:
            fire, val = trigger_decide(mode, U, u_held, m_int, gamma, q, gamma_rho, e_qh, is_check, force)
        if is_check:
            mon[3] += 1.0
        if mode == 2 and is_check and not fire and val > mon[1]:
            mon[1] = val
        if fire:
            u_held = U
            if mode != 0:
                if n_ev == ev.shape[0]:
                    grown = np.empty((2 * n_ev, 4))
                    grown[:n_ev] = ev
                    ev = grown
                ev[n_ev, 0] = t
                ev[n_ev, 1] = U
                ev[n_ev, 2] = val
                ev[n_ev, 3] = step_i // hs if mode == 2 else -1
                n_ev += 1
                events_since_row += 1
        d = U - u_held
        if mode == 1:
            viol = d * d + gamma * m_int
            if viol > mon[0]:
                mon[0] = viol

        x_sq = X0 * X0 + X1 * X1
        if w_form or (lyap and (step_i % stride == 0 or step_i == n_steps)):
            transform_grid(u, X0, X1, dx, phi_tab, beta, D, w)
        if w_form:
            y0 = w[0]
            y_sq = _trapz_sq(w, dx)
        else:
            y0 = u[0]
            y_sq = _trapz_sq(u, dx)

        if step_i % stride == 0 or step_i == n_steps:
            rows[k_rec, 0] = t
            rows[k_rec, 1] = l
            rows[k_rec, 2] = c_c
            rows[k_rec, 3] = U
            rows[k_rec, 4] = u_held
            rows[k_rec, 5] = d
            rows[k_rec, 6] = m_int
            if mode == 2:
                rows[k_rec, 7] = petc_gamma_nb(d, m_int, q, gamma_rho, gamma, e_qh) if np.isnan(val) else val
            rows[k_rec, 8] = 1.0 if events_since_row > 0 else 0.0
            rows[k_rec, 9] = math.sqrt(_trapz_sq(u, dx) / _trapz_sq(ceq, dx))
            if lyap:
                vx = X0 * (Wx[0, 0] * X0 + Wx[0, 1] * X1) + X1 * (Wx[1, 0] * X0 + Wx[1, 1] * X1)
                rows[k_rec, 10] = 0.5 * d1 * _trapz_sq(w, dx) + vx - m_int
            k_rec += 1
            events_since_row = 0
        if step_i == n_steps:
            break

        m_int = m_int + dt * m_rhs_nb(m_int, d, x_sq, y0, y_sq, eta, rho, b1, b2, b3, b4, b5)
        if m_int > mon[2]:
            mon[2] = m_int
        c, c_c, l, ldot = plant_step(c, c_c, l, q_star - u_held, dt, dsig, scheme, D, a, g, r_g, c_inf,
                                     a_tilde, beta, kappa, r_g_tilde)
        mon[6] += 1.0
        if abs(ldot) > mon[4]:
            mon[4] = abs(ldot)
        if abs(ldot) > v_bar:
            mon[5] += 1.0
        finite = math.isfinite(c_c) and math.isfinite(l)
        for i in range(n):
            if not math.isfinite(c[i]):
                finite = False
        if not finite:
            status = 3
        elif l <= 0.0:
            status = 2
        elif l >= l_cap:
            status = 1
        if status != 0:
            t = (step_i + 1) * dt
            break
    return rows[:k_rec], ev[:n_ev], status, t, mon, c, c_c, l


@dataclass
class RunResult:
    mode: str
    config: ExperimentConfig
    series: dict
    events: EventLog
    status: str
    t_end: float
    final_state: SimState
    monitors: dict = field(default_factory=dict)
    lyapunov: bool = False

    @property
    def aborted(self):
        return self.status != STATUS_OK

    @property
    def fingerprint(self):
        return self.config.fingerprint()

    def table(self):
        """Time series as a 2-D array with columns in :data:`COLUMNS` order."""
        return np.column_stack([self.series[name] for name in COLUMNS])


def run_simulation(cfg: ExperimentConfig, mode: str, initial: SimState | None = None, lyapunov=False) -> RunResult:
    """Integrate the closed loop from ``initial`` (default: uniform profile at l_0) to t_final.

    An abort (length cap, zero length, non-finite values) does not raise; the partial
    series is returned with ``status`` naming the reason.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    phys, solver, tp = cfg.physical, cfg.solver, cfg.trigger
    dc = derive_constants(phys)
    art = build_gain_artifacts(cfg.gains, dc, phys)
    prefix_b, pp_b = artifact_rows(art)
    state = initial if initial is not None else initial_state(phys, solver)
    if state.c_hat.size != solver.n_grid + 2:
        raise ValueError("initial profile size does not match solver.n_grid + 2")

    phys_vec = np.array([phys.D, phys.a, phys.g, phys.r_g, phys.c_inf, dc.a_tilde, dc.beta, dc.kappa,
                         phys.r_g_tilde, dc.K_plus, dc.K_minus, dc.lambda_plus, dc.lambda_minus, phys.l_s])
    trig_vec = np.array([tp.gamma, tp.eta, tp.rho, *tp.betas, tp.m0, tp.q, math.exp(tp.q * tp.h)])
    hs = max(1, int(round(tp.h / solver.dt)))
    if lyapunov:
        setup = lyapunov_setup(cfg.gains, dc)
        Wx, d1 = np.ascontiguousarray(setup.weight), setup.d1
    else:
        Wx, d1 = np.zeros((2, 2)), 1.0
    v_bar = phys.D / (16.0 * (phys.D + 1.0))

    rows, ev, code, t_end, mon, c, c_c, l = _run_loop(
        np.array(state.c_hat, dtype=float), float(state.c_c), float(state.l), solver.n_steps, solver.dt,
        SCHEMES.index(solver.scheme), solver.output_stride, solver.l_cap, phys_vec, trig_vec,
        MODE_CODE[mode], hs, tp.force_petc, tp.m_dynamics == "w", lyapunov, Wx, d1,
        prefix_b, pp_b, art.N1_bal, art.t_bal, dc.q_s_star, v_bar,
    )
    series = {name: rows[:, j].copy() for j, name in enumerate(COLUMNS)}
    log = EventLog()
    for t, held, val, k in ev:
        log.append(Event(t=float(t), u_held=float(held), trigger_value=None if math.isnan(val) else float(val),
                         check_index=None if k < 0 else int(k)))
    monitors = {name: float(v) for name, v in zip(_MONITORS, mon)}
    monitors["petc_checks"] = int(monitors["petc_checks"])
    monitors["steps_taken"] = int(monitors["steps_taken"])
    monitors["ldot_over_vbar_steps"] = int(monitors["ldot_over_vbar_steps"])
    monitors["v_bar"] = v_bar
    if mode != "cetc":
        monitors["max_cetc_violation"] = None
    if mode != "petc":
        monitors["max_petc_gamma_silent"] = None
    for key in ("max_cetc_violation", "max_petc_gamma_silent"):
        if monitors[key] is not None and math.isinf(monitors[key]):
            monitors[key] = None
    return RunResult(
        mode=mode,
        config=cfg,
        series=series,
        events=log,
        status=ABORT_REASONS[code],
        t_end=float(t_end),
        final_state=SimState(c_hat=c, c_c=float(c_c), l=float(l), t=float(t_end)),
        monitors=monitors,
        lyapunov=lyapunov,
    )
