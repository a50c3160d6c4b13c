"""Tubulin transport model: parameters, steady state and reference-error coordinates.

All quantities are SI. Lengths in m, time in s, concentrations in mol/m^3.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import RunawayLengthError

# exp() overflows just above 709
_MAX_EXPONENT = 700.0


@dataclass(frozen=True)
class PhysicalParams:
    """Biological constants and growth targets.

    ``gamma_bio`` is carried for bookkeeping only; no equation reads it.
    """

    D: float = 10e-12
    a: float = 1e-8
    g: float = 5e-7
    r_g: float = 1.783e-5
    r_g_tilde: float = 0.053
    c_inf: float = 0.0119
    l_c: float = 4e-6
    l_s: float = 12e-6
    l_0: float = 1e-6
    c0_scale: float = 1.5
    gamma_bio: float = 1e4

    def validate(self):
        """Raise ``ValueError`` naming the first violated invariant."""
        for name in ("D", "g", "r_g", "c_inf", "l_c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} > 0 required, got {getattr(self, name)!r}")
        if not 0 < self.l_0 < self.l_s:
            raise ValueError(f"0 < l_0 < l_s required, got l_0={self.l_0!r}, l_s={self.l_s!r}")
        for name, value in self.__dict__.items():
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class DerivedConstants:
    lambda_plus: float
    lambda_minus: float
    K_plus: float
    K_minus: float
    a1_tilde: float
    a2_tilde: float
    a3_tilde: float
    # cone-balance coefficient multiplying c_c in the growth-cone ODE
    a_tilde: float
    beta: float
    kappa: float
    q_s_star: float
    A: np.ndarray = field(repr=False)
    A1: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)


def derive_constants(params: PhysicalParams) -> DerivedConstants:
    """Evaluate every closed-form constant of the model for ``params``."""
    D, a, g, l_c = params.D, params.a, params.g, params.l_c
    if not (D > 0 and g > 0 and l_c > 0):
        raise ValueError("derive_constants requires D > 0, g > 0 and l_c > 0")
    r_g, c_inf = params.r_g, params.c_inf

    root = math.sqrt(a * a + 4.0 * D * g)
    lam_p = (a + root) / (2.0 * D)
    lam_m = (a - root) / (2.0 * D)
    K_p = 0.5 + (a - 2.0 * g * l_c) / (2.0 * root)
    # 1 - K_p is exact for K_p in [0.5, 2], which keeps K_p + K_m == 1
    K_m = 1.0 - K_p

    beta = D / l_c
    kappa = r_g / l_c
    a1 = (a - r_g * c_inf) / l_c - g - params.r_g_tilde
    a2 = c_inf * (lam_p**2 * K_p + lam_m**2 * K_m)
    a3 = (a * a + D * g - a * g * l_c) / (D * D)
    # The cone ODE must have (c_inf, l_s) as an equilibrium and linearise to a1;
    # both hold only with the +2 kappa c_inf shift.
    a_tilde = a1 + 2.0 * kappa * c_inf

    q_s_star = -c_inf * (
        K_p * (1.0 + lam_p) * math.exp(-lam_p * params.l_s)
        + K_m * (1.0 + lam_m) * math.exp(-lam_m * params.l_s)
    )

    A = np.array([[a1, -beta * a2], [r_g, 0.0]])
    A1 = np.array([[a1, a3], [r_g, 0.0]])
    B = np.array([-beta, 0.0])
    H = np.array([1.0, -(a - g * l_c) * c_inf / D])
    for arr in (A, A1, B, H):
        arr.setflags(write=False)

    return DerivedConstants(
        lambda_plus=lam_p,
        lambda_minus=lam_m,
        K_plus=K_p,
        K_minus=K_m,
        a1_tilde=a1,
        a2_tilde=a2,
        a3_tilde=a3,
        a_tilde=a_tilde,
        beta=beta,
        kappa=kappa,
        q_s_star=q_s_star,
        A=A,
        A1=A1,
        B=B,
        H=H,
    )


def steady_state_profile(x, dc: DerivedConstants, params: PhysicalParams, *, warn_extrapolation=False):
    """Steady tubulin concentration c_eq(x). Accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    if warn_extrapolation and (np.any(x < 0) or np.any(x > params.l_s)):
        warnings.warn("steady_state_profile evaluated outside [0, l_s]", stacklevel=2)
    s = x - params.l_s
    val = params.c_inf * (dc.K_plus * np.exp(dc.lambda_plus * s) + dc.K_minus * np.exp(dc.lambda_minus * s))
    return val if val.ndim else float(val)


def steady_state_slope(x, dc: DerivedConstants, params: PhysicalParams):
    """Spatial derivative of :func:`steady_state_profile`."""
    x = np.asarray(x, dtype=float)
    s = x - params.l_s
    val = params.c_inf * (
        dc.K_plus * dc.lambda_plus * np.exp(dc.lambda_plus * s)
        + dc.K_minus * dc.lambda_minus * np.exp(dc.lambda_minus * s)
    )
    return val if val.ndim else float(val)


def steady_state_input(dc: DerivedConstants, params: PhysicalParams) -> float:
    """Soma input q_s* that holds the steady profile."""
    return dc.q_s_star


def to_error_coords(c_profile, c_c, l, dc: DerivedConstants, params: PhysicalParams):
    """Map a state on [0, l] to the reference-error coordinates ``(u, X)``.

    ``c_profile`` holds samples on a uniform grid spanning [0, l] (endpoints included).
    """
    c_profile = np.asarray(c_profile, dtype=float)
    x = np.linspace(0.0, l, c_profile.size)
    u = c_profile - steady_state_profile(x, dc, params)
    X = np.array([c_c - params.c_inf, l - params.l_s])
    return u, X


def from_error_coords(u_profile, X, dc: DerivedConstants, params: PhysicalParams):
    """Inverse of :func:`to_error_coords`; returns ``(c_profile, c_c, l)``."""
    u_profile = np.asarray(u_profile, dtype=float)
    c_c = X[0] + params.c_inf
    l = X[1] + params.l_s
    x = np.linspace(0.0, l, u_profile.size)
    return u_profile + steady_state_profile(x, dc, params), c_c, l


def _checked_exponents(z2, dc):
    ep, em = dc.lambda_plus * z2, dc.lambda_minus * z2
    if not (abs(ep) < _MAX_EXPONENT and abs(em) < _MAX_EXPONENT):
        raise RunawayLengthError(f"length error z2={z2!r} puts exp() out of range")
    return math.exp(ep), math.exp(em)


def h_tilde(z2, dc: DerivedConstants, params: PhysicalParams) -> float:
    ep, em = _checked_exponents(z2, dc)
    return params.c_inf * (1.0 - dc.K_plus * ep - dc.K_minus * em)


def f1(z2, dc: DerivedConstants, params: PhysicalParams) -> float:
    ep, em = _checked_exponents(z2, dc)
    return (
        -params.c_inf * (dc.K_plus * dc.lambda_plus * ep + dc.K_minus * dc.lambda_minus * em)
        + dc.a2_tilde * z2
        + params.c_inf * (params.a - params.g * params.l_c) / params.D
    )


def nonlinear_ode_terms(X, dc: DerivedConstants, params: PhysicalParams):
    """Nonlinear remainder ``f(X)`` (2-vector) and tip trace ``h(X)`` of the error system."""
    z1, z2 = float(X[0]), float(X[1])
    if not (math.isfinite(z1) and math.isfinite(z2)):
        raise ValueError("X must be finite")
    f = np.array([-dc.kappa * z1 * z1 + dc.beta * f1(z2, dc, params), 0.0])
    return f, z1 + h_tilde(z2, dc, params)
