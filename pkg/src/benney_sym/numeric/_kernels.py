"""Method-of-lines kernels for the truncated moment chain.

Two interchangeable paths integrate ``A^i_t = -(D A^{i+1} + i A^{i-1} D A^0)``
with 4th-order periodic central differences ``D`` and classical RK4:

* ``integrate_numba`` -- explicit loops compiled with ``numba.njit``;
* ``integrate_numpy`` -- vectorised numpy, no compilation.

``integrate`` is bound to one of them at import time.  Set the environment
variable ``BENNEY_SYM_NUMBA=0`` to force the numpy path; it is also used when
numba cannot be imported.

Closure codes: ``CLOSURE_ZERO`` sets ``A^{N+1} = 0``; ``CLOSURE_STREAMS``
treats the ``N+1 = 2n`` moments as those of ``n`` cold streams and returns the
next moment from the Hankel recurrence, falling back to a single stream where
the Hankel matrix is singular.
"""
from __future__ import annotations

import os

import numpy as np

CLOSURE_ZERO = 0
CLOSURE_STREAMS = 1

_PIVOT_RTOL = 1e-12

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    _HAVE_NUMBA = False


def _env_wants_numba() -> bool:
    return os.environ.get("BENNEY_SYM_NUMBA", "1").strip().lower() not in {"0", "false", "no", "off"}


def _jit(fn):
    if _HAVE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


# -- compiled loop path ---------------------------------------------------------

@_jit
def _solve_small(H, b):
    """Gaussian elimination with partial pivoting; solution left in ``b``."""
    n = b.shape[0]
    scale = 0.0
    for r in range(n):
        for c in range(n):
            if abs(H[r, c]) > scale:
                scale = abs(H[r, c])
    if scale == 0.0:
        return False
    for col in range(n):
        piv = col
        for r in range(col + 1, n):
            if abs(H[r, col]) > abs(H[piv, col]):
                piv = r
        if abs(H[piv, col]) <= _PIVOT_RTOL * scale:
            return False
        if piv != col:
            for c in range(n):
                tmp = H[col, c]
                H[col, c] = H[piv, c]
                H[piv, c] = tmp
            tmp = b[col]
            b[col] = b[piv]
            b[piv] = tmp
        for r in range(col + 1, n):
            f = H[r, col] / H[col, col]
            for c in range(col, n):
                H[r, c] -= f * H[col, c]
            b[r] -= f * b[col]
    for r in range(n - 1, -1, -1):
        s = b[r]
        for c in range(r + 1, n):
            s -= H[r, c] * b[c]
        b[r] = s / H[r, r]
    return True


@_jit
def _closure_loops(A, code, out):
    np1, M = A.shape
    if code == CLOSURE_ZERO:
        for m in range(M):
            out[m] = 0.0
        return
    n = np1 // 2
    H = np.empty((n, n))
    b = np.empty(n)
    for m in range(M):
        for r in range(n):
            for c in range(n):
                H[r, c] = A[r + c, m]
            b[r] = A[r + n, m]
        if _solve_small(H, b):
            s = 0.0
            for l in range(n):
                s += b[l] * A[n + l, m]
            out[m] = s
        else:
            rho = A[0, m]
            if rho != 0.0:
                u = A[1, m] / rho
                out[m] = rho * u ** np1
            else:
                out[m] = 0.0


@_jit
def _rhs_loops(A, code, inv12dx, closure, out):
    np1, M = A.shape
    _closure_loops(A, code, closure)
    for m in range(M):
        p1 = (m + 1) % M
        p2 = (m + 2) % M
        m1 = (m - 1) % M
        m2 = (m - 2) % M
        d0 = (-A[0, p2] + 8.0 * A[0, p1] - 8.0 * A[0, m1] + A[0, m2]) * inv12dx
        for i in range(np1):
            if i + 1 < np1:
                dn = (-A[i + 1, p2] + 8.0 * A[i + 1, p1] - 8.0 * A[i + 1, m1] + A[i + 1, m2]) * inv12dx
            else:
                dn = (-closure[p2] + 8.0 * closure[p1] - 8.0 * closure[m1] + closure[m2]) * inv12dx
            val = dn
            if i > 0:
                val += i * A[i - 1, m] * d0
            out[i, m] = -val


@_jit
def _integrate_loops(A0, dx, dt, nsteps, code, bound):
    A = A0.copy()
    np1, M = A.shape
    inv = 1.0 / (12.0 * dx)
    closure = np.empty(M)
    k1 = np.empty_like(A)
    k2 = np.empty_like(A)
    k3 = np.empty_like(A)
    k4 = np.empty_like(A)
    tmp = np.empty_like(A)
    for step in range(nsteps):
        _rhs_loops(A, code, inv, closure, k1)
        for i in range(np1):
            for m in range(M):
                tmp[i, m] = A[i, m] + 0.5 * dt * k1[i, m]
        _rhs_loops(tmp, code, inv, closure, k2)
        for i in range(np1):
            for m in range(M):
                tmp[i, m] = A[i, m] + 0.5 * dt * k2[i, m]
        _rhs_loops(tmp, code, inv, closure, k3)
        for i in range(np1):
            for m in range(M):
                tmp[i, m] = A[i, m] + dt * k3[i, m]
        _rhs_loops(tmp, code, inv, closure, k4)
        blown = False
        for i in range(np1):
            for m in range(M):
                v = A[i, m] + dt / 6.0 * (k1[i, m] + 2.0 * k2[i, m] + 2.0 * k3[i, m] + k4[i, m])
                A[i, m] = v
                if not (abs(v) <= bound):
                    blown = True
        if blown:
            return A, step + 1, True
    return A, nsteps, False


def closure_numba(A, code):
    out = np.empty(A.shape[1])
    _closure_loops(np.ascontiguousarray(A, dtype=np.float64), code, out)
    return out


def integrate_numba(A0, dx, dt, nsteps, code, bound):
    return _integrate_loops(np.ascontiguousarray(A0, dtype=np.float64), float(dx), float(dt),
                            int(nsteps), int(code), float(bound))


# -- vectorised numpy path --------------------------------------------------------

def closure_numpy(A, code):
    np1, M = A.shape
    if code == CLOSURE_ZERO:
        return np.zeros(M)
    n = np1 // 2
    idx = np.arange(n)
    H = A[idx[:, None] + idx[None, :], :].transpose(2, 0, 1)
    b = A[n:2 * n, :].T
    scale = np.abs(H).reshape(M, -1).max(axis=1)
    # LU pivots of an n x n system vanish together with the determinant
    det = np.linalg.det(H)
    ok = (scale > 0) & (np.abs(det) > _PIVOT_RTOL * scale ** n)
    out = np.empty(M)
    if ok.any():
        coef = np.linalg.solve(H[ok], b[ok][..., None])[..., 0]
        out[ok] = np.einsum("ml,lm->m", coef, A[n:2 * n, ok])
    bad = ~ok
    if bad.any():
        rho = A[0, bad]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(rho != 0.0, A[1, bad] / np.where(rho != 0.0, rho, 1.0), 0.0)
        out[bad] = rho * u ** np1
    return out


def _d4(f, inv12dx):
    return (-np.roll(f, -2, axis=-1) + 8.0 * np.roll(f, -1, axis=-1)
            - 8.0 * np.roll(f, 1, axis=-1) + np.roll(f, 2, axis=-1)) * inv12dx


def rhs_numpy(A, code, inv12dx):
    np1 = A.shape[0]
    ext = np.vstack([A, closure_numpy(A, code)[None, :]])
    d = _d4(ext[1:], inv12dx)
    d0 = _d4(A[0], inv12dx)
    out = -d
    if np1 > 1:
        out[1:] -= np.arange(1, np1)[:, None] * A[:-1] * d0[None, :]
    return out


def integrate_numpy(A0, dx, dt, nsteps, code, bound):
    A = np.array(A0, dtype=np.float64, copy=True)
    inv = 1.0 / (12.0 * dx)
    for step in range(nsteps):
        k1 = rhs_numpy(A, code, inv)
        k2 = rhs_numpy(A + 0.5 * dt * k1, code, inv)
        k3 = rhs_numpy(A + 0.5 * dt * k2, code, inv)
        k4 = rhs_numpy(A + dt * k3, code, inv)
        A = A + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.abs(A) <= bound):
            return A, step + 1, True
    return A, nsteps, False


USE_NUMBA = _HAVE_NUMBA and _env_wants_numba()
BACKEND = "numba" if USE_NUMBA else "numpy"

if USE_NUMBA:
    integrate = integrate_numba
    closure = closure_numba
else:
    integrate = integrate_numpy
    closure = closure_numpy
