"""High-precision reference values frozen into the test-suite.

Run ``python3 tests/oracles/generate_goldens.py`` to regenerate; the output is a
Python literal pasted into ``tests/goldens.py``. Everything here is mpmath at 50
significant digits and shares no code with the package.
"""

import mpmath as mp

mp.mp.dps = 50

D = mp.mpf("10e-12")
a = mp.mpf("1e-8")
g = mp.mpf("5e-7")
r_g = mp.mpf("1.783e-5")
r_gt = mp.mpf("0.053")
c_inf = mp.mpf("0.0119")
l_c = mp.mpf("4e-6")
l_s = mp.mpf("12e-6")
l_0 = mp.mpf("1e-6")
k1, k2 = mp.mpf("-0.001"), mp.mpf("3e13")
gamma, eta, sigma, rho = mp.mpf(1), mp.mpf(2), mp.mpf("0.8"), mp.mpf("1.5e-15")
betas = [mp.mpf(v) for v in ("2.5e8", "8e9", "1e11", "4e11", "4.5e11")]
h = mp.mpf("5e-4")
dt = mp.mpf("1e-4")

root = mp.sqrt(a * a + 4 * D * g)
lp, lm = (a + root) / (2 * D), (a - root) / (2 * D)
Kp = mp.mpf(1) / 2 + (a - 2 * g * l_c) / (2 * root)
Km = mp.mpf(1) / 2 - (a - 2 * g * l_c) / (2 * root)
beta = D / l_c
kappa = r_g / l_c
a1 = (a - r_g * c_inf) / l_c - g - r_gt
a2 = c_inf * (lp**2 * Kp + lm**2 * Km)
a3 = (a * a + D * g - a * g * l_c) / D**2
qs = -c_inf * (Kp * (1 + lp) * mp.exp(-lp * l_s) + Km * (1 + lm) * mp.exp(-lm * l_s))
H = mp.matrix([[1], [-(a - g * l_c) * c_inf / D]])
B = mp.matrix([[-beta], [0]])


def ceq(x):
    return c_inf * (Kp * mp.exp(lp * (x - l_s)) + Km * mp.exp(lm * (x - l_s)))


A = mp.matrix([[a1, -beta * a2], [r_g, 0]])
BH = B * H.T
I2 = mp.eye(2)
N1 = mp.zeros(4, 4)
ur = (g * I2 + A + (a / D) * BH) / D
lr = (-BH + a * I2) / D
for i in range(2):
    for j in range(2):
        N1[i, j + 2] = ur[i, j]
        N1[i + 2, j + 2] = lr[i, j]
    N1[i + 2, i] = 1
prefix = mp.matrix([[H[0], H[1], k1 - (H.T * B)[0] * H[0] / D, k2 - (H.T * B)[0] * H[1] / D]])


def phi(x):
    E = mp.expm(N1 * x)
    r = prefix * E
    return [r[0, 0], r[0, 1]]


def p(x):
    r = prefix * (N1 + mp.eye(4)) * mp.expm(-N1 * x)
    return [r[0, 0], r[0, 1]]


p0 = p(0)
pB = -beta * p0[0]
rho1 = 7 * pB**2
q = 1 + eta + rho1
tau_closed = mp.log(1 + sigma * q / ((1 - sigma) * (q + gamma * rho))) / q
c1 = rho * sigma * gamma
c2 = 1 + 2 * rho1 + (1 - sigma) * rho + eta
c3 = (1 + rho1 + gamma * (1 - sigma) * rho + eta) * (1 - sigma) / sigma
tau_int = mp.quad(lambda s: 1 / (c1 * s * s + c2 * s + c3), [0, 1])
gp = (q + gamma * rho) * mp.exp(q * h) * mp.mpf("0.4") - gamma * rho * mp.mpf("0.4") + q * gamma * mp.mpf("-0.5")

# one Euler step of m from the uniform initial profile, d = 0 after the first sample
c0 = mp.mpf("1.5") * c_inf
u0 = c0 - ceq(0)
u_sq = mp.quad(lambda x: (c0 - ceq(x)) ** 2, [0, l_0])
X_sq = (c0 - c_inf) ** 2 + (l_0 - l_s) ** 2
mdot = (-eta * mp.mpf("-0.5") - betas[0] * X_sq - betas[1] * X_sq**2 - betas[2] * X_sq**3
        - betas[3] * u0**2 - betas[4] * u_sq)
m1 = mp.mpf("-0.5") + dt * mdot

# first plant step from the uniform profile (tip slope is zero)
a_tilde = a1 + 2 * kappa * c_inf
cc1 = c0 + dt * (a_tilde * c0 - kappa * c0**2 + c_inf * r_gt)
l1 = l_0 + dt * r_g * (c0 - c_inf)

# Lyapunov matrix for A + B K^T with Q = I: vec form, 4 unknowns
Acl = A + B * mp.matrix([[k1, k2]])
M = mp.zeros(4, 4)
for i in range(2):
    for j in range(2):
        row = 2 * i + j
        for k in range(2):
            M[row, 2 * k + j] += Acl[k, i]
            M[row, 2 * i + k] += Acl[k, j]
rhs = mp.matrix([-1, 0, 0, -1])
P = mp.lu_solve(M, rhs)

out = {
    "lambda_plus": lp, "lambda_minus": lm, "K_plus": Kp, "K_minus": Km,
    "a1_tilde": a1, "a2_tilde": a2, "a3_tilde": a3, "beta": beta, "kappa": kappa,
    "q_s_star": qs, "H2": H[1], "c_eq_0": ceq(0), "c_eq_ls": ceq(l_s),
    "N1": [[N1[i, j] for j in range(4)] for i in range(4)],
    "phi_m5um": phi(mp.mpf("-5e-6")), "p_0": p0, "p_ls": p(l_s), "p_1um": p(mp.mpf("1e-6")),
    "rho1": rho1, "q": q, "tau_closed": tau_closed, "tau_integral": tau_int,
    "tau_closed_limit": mp.log(1 / (1 - sigma)) / q,
    "petc_gamma_d2_04_m_05": gp, "m_after_one_step": m1,
    "c_c_after_one_step": cc1, "l_after_one_step": l1,
    "P_cl": [[P[0], P[1]], [P[2], P[3]]],
}


def fmt(v):
    if isinstance(v, list):
        return "[" + ", ".join(fmt(x) for x in v) + "]"
    return mp.nstr(v, 20, min_fixed=0, max_fixed=0)


if __name__ == "__main__":
    print("GOLDEN = {")
    for k, v in out.items():
        print(f"    {k!r}: {fmt(v)},")
    print("}")
