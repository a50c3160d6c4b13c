"""Small dense linear algebra used by the kernel evaluators and the time loop.

``mat_exp`` is Higham's (2005) scaling-and-squaring Padé algorithm. It is written
against the numba subset so the simulation loop can call it per step.
"""

import math

import numpy as np
from numba import njit

_THETA = (1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1, 2.097847961257068e0)
_THETA13 = 5.371920351148152

_B3 = np.array([120.0, 60.0, 12.0, 1.0])
_B5 = np.array([30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0])
_B7 = np.array([17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0])
_B9 = np.array(
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
     2162160.0, 110880.0, 3960.0, 90.0, 1.0]
)
_B13 = np.array(
    [64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
     129060195264000.0, 10559470521600.0, 670442572800.0, 33522128640.0, 1323241920.0,
     40840800.0, 960960.0, 16380.0, 182.0, 1.0]
)


@njit(cache=True)
def _norm1(M):
    n = M.shape[0]
    best = 0.0
    for j in range(n):
        s = 0.0
        for i in range(n):
            s += abs(M[i, j])
        if s > best:
            best = s
    return best


@njit(cache=True)
def _mm(A, B):
    # explicit loops beat the BLAS call overhead at n = 4
    n = A.shape[0]
    C = np.zeros((n, n))
    for i in range(n):
        for k in range(n):
            a = A[i, k]
            for j in range(n):
                C[i, j] += a * B[k, j]
    return C


@njit(cache=True)
def _solve(A, B):
    """Gaussian elimination with partial pivoting for A X = B (both n x n)."""
    n = A.shape[0]
    A = A.copy()
    X = B.copy()
    for col in range(n):
        piv = col
        best = abs(A[col, col])
        for r in range(col + 1, n):
            if abs(A[r, col]) > best:
                best = abs(A[r, col])
                piv = r
        if best == 0.0:
            raise ZeroDivisionError("singular Pade denominator")
        if piv != col:
            for j in range(n):
                A[col, j], A[piv, j] = A[piv, j], A[col, j]
                X[col, j], X[piv, j] = X[piv, j], X[col, j]
        for r in range(col + 1, n):
            f = A[r, col] / A[col, col]
            if f != 0.0:
                for j in range(col, n):
                    A[r, j] -= f * A[col, j]
                for j in range(n):
                    X[r, j] -= f * X[col, j]
    for col in range(n - 1, -1, -1):
        for j in range(n):
            s = X[col, j]
            for k in range(col + 1, n):
                s -= A[col, k] * X[k, j]
            X[col, j] = s / A[col, col]
    return X


@njit(cache=True)
def _pade_low(M, b):
    # degrees 3..9: only even powers are formed explicitly
    n = M.shape[0]
    ident = np.eye(n)
    M2 = _mm(M, M)
    m = b.size - 1
    U = b[1] * ident
    V = b[0] * ident
    P = ident.copy()
    for k in range(1, m // 2 + 1):
        P = _mm(P, M2)
        U = U + b[2 * k + 1] * P
        V = V + b[2 * k] * P
    U = _mm(M, U)
    return U, V


@njit(cache=True)
def _pade13(M, b):
    n = M.shape[0]
    ident = np.eye(n)
    M2 = _mm(M, M)
    M4 = _mm(M2, M2)
    M6 = _mm(M2, M4)
    U = _mm(M, _mm(M6, b[13] * M6 + b[11] * M4 + b[9] * M2) + b[7] * M6 + b[5] * M4 + b[3] * M2 + b[1] * ident)
    V = _mm(M6, b[12] * M6 + b[10] * M4 + b[8] * M2) + b[6] * M6 + b[4] * M4 + b[2] * M2 + b[0] * ident
    return U, V


@njit(cache=True)
def mat_exp_nb(M):
    """numba core of :func:`mat_exp`; expects a finite float64 square array."""
    nrm = _norm1(M)
    if nrm <= _THETA[0]:
        U, V = _pade_low(M, _B3)
        return _solve(V - U, V + U)
    if nrm <= _THETA[1]:
        U, V = _pade_low(M, _B5)
        return _solve(V - U, V + U)
    if nrm <= _THETA[2]:
        U, V = _pade_low(M, _B7)
        return _solve(V - U, V + U)
    if nrm <= _THETA[3]:
        U, V = _pade_low(M, _B9)
        return _solve(V - U, V + U)
    s = 0
    if nrm > _THETA13:
        s = int(math.ceil(math.log2(nrm / _THETA13)))
    Ms = M / (2.0**s)
    U, V = _pade13(Ms, _B13)
    R = _solve(V - U, V + U)
    for _ in range(s):
        R = _mm(R, R)
    return R


def mat_exp(M):
    """Matrix exponential of a small square matrix (n <= 8 in practice)."""
    M = np.array(M, dtype=float, copy=True, order="C")
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"mat_exp: square matrix required, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("mat_exp: non-finite entry")
    return mat_exp_nb(M)


def balance(M):
    """Diagonal similarity ``T`` with ``T^-1 M T`` balanced; returns ``(M_bal, t)`` where T = diag(t).

    exp(M x) = T exp(M_bal x) T^-1 for every scalar x, and the balanced matrix has a far
    smaller norm when M mixes wildly different units.
    """
    from scipy.linalg import matrix_balance

    Mb, T = matrix_balance(np.asarray(M, dtype=float), permute=False)
    return Mb, np.diag(T).copy()
