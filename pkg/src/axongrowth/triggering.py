"""Sample-and-hold actuation: dynamic event triggers (continuous-time and periodic).

Sign convention: the internal variable m stays negative, and the continuous-time
trigger fires when d^2 > -gamma * m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit
from scipy.integrate import quad

MODES = ("continuous", "cetc", "petc")
MODE_CODE = {name: i for i, name in enumerate(MODES)}


@dataclass(frozen=True)
class TriggerParams:
    gamma: float = 1.0
    eta: float = 2.0
    sigma: float = 0.8
    rho: float = 1.5e-15
    betas: tuple = (2.5e8, 8e9, 1e11, 4e11, 4.5e11)
    m0: float = -0.5
    h: float = 5e-4
    rho1: float = 0.0
    m_dynamics: str = "u"
    # testing hook: every PETC check fires regardless of the trigger function
    force_petc: bool = False

    @property
    def q(self):
        return 1.0 + self.eta + self.rho1

    def validate(self):
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("trigger.sigma ∈ (0,1) violated")
        for name in ("gamma", "eta", "rho", "h"):
            if not getattr(self, name) > 0:
                raise ValueError(f"trigger.{name} > 0 violated")
        if len(self.betas) != 5 or any(b < 0 for b in self.betas):
            raise ValueError("trigger.beta must hold five nonnegative weights")
        if not self.m0 < 0:
            raise ValueError("trigger.m0 < 0 violated")
        if self.m_dynamics not in ("u", "w"):
            raise ValueError("trigger.m_dynamics must be 'u' or 'w'")


@dataclass(frozen=True)
class DwellTime:
    tau_integral: float
    tau_closed: float

    @property
    def tau_min(self):
        return min(self.tau_integral, self.tau_closed)


@dataclass(frozen=True)
class Event:
    t: float
    u_held: float
    trigger_value: float | None
    check_index: int | None


@dataclass
class EventLog:
    events: list = field(default_factory=list)

    def append(self, event):
        if self.events and not event.t > self.events[-1].t:
            raise ValueError("event times must be strictly increasing")
        self.events.append(event)

    def __len__(self):
        return len(self.events)

    @property
    def times(self):
        return np.array([e.t for e in self.events])

    def gaps(self):
        return np.diff(self.times)


@dataclass(frozen=True)
class TriggerState:
    u_held: float
    d: float
    m: float
    t_last_event: float
    mode: str


def compute_rho1(artifacts, dc) -> float:
    pB = float(artifacts.p(0.0) @ dc.B)
    return 7.0 * pB * pB


def dwell_time(tp: TriggerParams) -> DwellTime:
    """Minimal inter-event time, by quadrature and by the closed logarithmic form."""
    s, g, rho, r1, eta = tp.sigma, tp.gamma, tp.rho, tp.rho1, tp.eta
    if not 0.0 < s < 1.0:
        raise ValueError("dwell_time: sigma must lie in (0, 1)")
    c1 = rho * s * g
    c2 = 1.0 + 2.0 * r1 + (1.0 - s) * rho + eta
    c3 = (1.0 + r1 + g * (1.0 - s) * rho + eta) * (1.0 - s) / s
    tau_int, _ = quad(lambda v: 1.0 / (c1 * v * v + c2 * v + c3), 0.0, 1.0, epsabs=0.0, epsrel=1e-13)
    q = tp.q
    tau_closed = math.log1p(s * q / ((1.0 - s) * (q + g * rho))) / q
    return DwellTime(tau_integral=tau_int, tau_closed=tau_closed)


@njit(cache=True)
def m_rhs_nb(m, d, x_sq, u_boundary, u_l2_sq, eta, rho, b1, b2, b3, b4, b5):
    return (-eta * m + rho * d * d - b1 * x_sq - b2 * x_sq * x_sq - b3 * x_sq * x_sq * x_sq
            - b4 * u_boundary * u_boundary - b5 * u_l2_sq)


def m_rhs(m, d, X, u_boundary, u_l2norm, tp: TriggerParams) -> float:
    """Right side of the internal-variable ODE; ``u_l2norm`` is the (unsquared) L2 norm."""
    X = np.asarray(X, dtype=float)
    b1, b2, b3, b4, b5 = tp.betas
    return float(m_rhs_nb(m, d, float(X @ X), u_boundary, u_l2norm * u_l2norm,
                          tp.eta, tp.rho, b1, b2, b3, b4, b5))


@njit(cache=True)
def petc_gamma_nb(d, m, q, gamma_rho, gamma, e_qh):
    d2 = d * d
    return (q + gamma_rho) * e_qh * d2 - gamma_rho * d2 + q * gamma * m


def cetc_should_trigger(d, m, gamma) -> bool:
    return d * d > -gamma * m


def petc_gamma(d, m, tp: TriggerParams) -> float:
    return float(petc_gamma_nb(d, m, tp.q, tp.gamma * tp.rho, tp.gamma, math.exp(tp.q * tp.h)))


@njit(cache=True)
def trigger_decide(mode, U, u_held, m, gamma, q, gamma_rho, e_qh, is_check, force):
    """Return ``(fire, trigger_value)`` for one instant.

    mode 0 = continuous (always resample, never logged), 1 = cetc, 2 = petc.
    ``trigger_value`` is d^2 + gamma m for cetc and the periodic trigger function for petc.
    """
    d = U - u_held
    if mode == 0:
        return True, 0.0
    if mode == 1:
        val = d * d + gamma * m
        return val > 0.0, val
    if not is_check:
        return False, petc_gamma_nb(d, m, q, gamma_rho, gamma, e_qh)
    val = petc_gamma_nb(d, m, q, gamma_rho, gamma, e_qh)
    return (force or val > 0.0), val


def is_check_instant(t, h, tol=1e-9):
    k = round(t / h)
    return abs(t - k * h) <= tol * max(h, abs(t)), int(k)


def advance_trigger(state: TriggerState, U_fresh, t, dt, observables, tp: TriggerParams, log: EventLog | None = None):
    """Decide at time ``t`` whether to resample, then integrate m over ``[t, t + dt]``.

    ``observables`` is ``(X, u_boundary, u_l2norm)``. Returns the new state and the
    event that fired (``None`` otherwise). Continuous mode never logs events.
    """
    if not math.isfinite(U_fresh):
        raise FloatingPointError(f"non-finite feedback value at t={t}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    mode = MODE_CODE[state.mode]
    check, k = is_check_instant(t, tp.h) if mode == 2 else (False, None)
    fire, val = trigger_decide(mode, U_fresh, state.u_held, state.m, tp.gamma, tp.q, tp.gamma * tp.rho,
                               math.exp(tp.q * tp.h), check, tp.force_petc)
    event = None
    u_held, t_last = state.u_held, state.t_last_event
    if fire:
        u_held = U_fresh
        if mode != 0:
            t_last = t
            event = Event(t=t, u_held=U_fresh, trigger_value=float(val), check_index=k if mode == 2 else None)
            if log is not None:
                log.append(event)
    d = U_fresh - u_held
    X, u_b, u_norm = observables
    m = state.m + dt * m_rhs(state.m, d, X, u_b, u_norm, tp)
    return replace(state, u_held=u_held, d=d, m=m, t_last_event=t_last), event
