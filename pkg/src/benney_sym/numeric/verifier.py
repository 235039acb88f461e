"""Finite-difference check that point symmetries map solutions to solutions.

The truncated chain ``A^i_t + A^{i+1}_x + i A^0_x A^{i-1} = 0`` (``0 <= i <= N``)
is integrated on a periodic grid.  A symmetry defect compares
``transform(evolve(u))`` with ``evolve(transform(u))``; for a true symmetry it
shrinks with the discretisation error.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence

import numpy as np

from ..errors import BlowUp, UnsupportedGenerator
from ..operator_engine import PointGeneratorId
from . import _kernels

log = logging.getLogger(__name__)

CFL = 0.4
SCHEMES = ("central4-rk4",)
CLOSURES = {"streams": _kernels.CLOSURE_STREAMS, "zero": _kernels.CLOSURE_ZERO}


@dataclass(frozen=True)
class GridState:
    """Moments ``A^i(x_m)`` on ``x_m = m L / M``; the array is stored read-only."""

    moments: np.ndarray
    L: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        arr = np.array(self.moments, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError("moments must be a 2-d array of shape (N+1, M)")
        if arr.shape[0] < 2:
            raise ValueError("need at least A^0 and A^1 (N >= 1)")
        if arr.shape[1] < 16:
            raise ValueError("need at least 16 grid points")
        if not np.all(np.isfinite(arr)):
            raise ValueError("moments must be finite")
        if not self.L > 0:
            raise ValueError("domain length must be positive")
        arr.setflags(write=False)
        object.__setattr__(self, "moments", arr)

    @property
    def N(self) -> int:
        return self.moments.shape[0] - 1

    @property
    def M(self) -> int:
        return self.moments.shape[1]

    @property
    def dx(self) -> float:
        return self.L / self.M

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.M) * self.dx

    @classmethod
    def from_functions(cls, funcs: Sequence, M: int, L: float = 1.0) -> "GridState":
        x = np.arange(M) * (L / M)
        rows = [np.broadcast_to(np.asarray(f(x) if callable(f) else f, dtype=float), (M,)) for f in funcs]
        return cls(np.vstack(rows), L)


@dataclass(frozen=True)
class SimParams:
    N: int
    M: int
    L: float
    dt: float
    T: float
    v_max: float = 1.0
    scheme: str = "central4-rk4"
    closure: str = "streams"
    bound: float = 1e6

    def __post_init__(self):
        if self.N < 1 or self.M < 16:
            raise ValueError("need N >= 1 and M >= 16")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.closure not in CLOSURES:
            raise ValueError(f"unknown closure {self.closure!r}")
        if self.closure == "streams" and (self.N + 1) % 2:
            raise ValueError("the stream closure needs an even number of moments (odd N)")
        if not (self.dt > 0 and self.T >= 0 and self.v_max > 0):
            raise ValueError("dt and v_max must be positive, T non-negative")
        limit = CFL * (self.L / self.M) / self.v_max
        if self.dt > limit * (1 + 1e-12):
            raise ValueError(f"dt={self.dt:g} violates dt <= {CFL} dx / v_max = {limit:g}")

    @property
    def dx(self) -> float:
        return self.L / self.M

    @property
    def steps(self) -> int:
        return max(1, math.ceil(self.T / self.dt - 1e-9)) if self.T > 0 else 0

    @classmethod
    def auto(cls, N: int, M: int, L: float, T: float, v_max: float, **kw) -> "SimParams":
        """Largest stable step that divides ``T`` into whole steps."""
        limit = CFL * (L / M) / v_max
        nsteps = max(1, math.ceil(T / limit)) if T > 0 else 1
        dt = T / nsteps if T > 0 else limit
        return cls(N=N, M=M, L=L, dt=dt, T=T, v_max=v_max, **kw)


def closure_values(state: GridState, closure: str = "streams") -> np.ndarray:
    return _kernels.closure_numpy(np.asarray(state.moments), CLOSURES[closure])


def characteristic_speed(state: GridState, closure: str = "streams") -> float:
    """Largest |eigenvalue| of the quasi-linear system matrix over the grid.

    The closure gradient is taken by central differences.  A warning is
    logged when complex eigenvalues show the data is not hyperbolic.
    """
    A = np.asarray(state.moments)
    n1, M = A.shape
    code = CLOSURES[closure]
    J = np.zeros((M, n1, n1))
    for i in range(n1 - 1):
        J[:, i, i + 1] = 1.0
    for i in range(1, n1):
        J[:, i, 0] += i * A[i - 1]
    scale = max(np.abs(A).max(), 1.0)
    for l in range(n1):
        h = 1e-6 * scale
        up, dn = A.copy(), A.copy()
        up[l] += h
        dn[l] -= h
        J[:, n1 - 1, l] += (_kernels.closure_numpy(up, code) - _kernels.closure_numpy(dn, code)) / (2 * h)
    eig = np.linalg.eigvals(J)
    if np.abs(eig.imag).max() > 1e-6 * max(np.abs(eig).max(), 1.0):
        log.warning("initial data is not hyperbolic for the %s closure", closure)
    return float(np.abs(eig).max())


def evolve(s: GridState, p: SimParams, *, backend: Optional[str] = None) -> GridState:
    """Integrate from ``s.time`` to ``s.time + p.T``; ``s`` is not modified."""
    if (s.N, s.M) != (p.N, p.M) or not math.isclose(s.L, p.L, rel_tol=1e-12):
        raise ValueError("state grid does not match the simulation parameters")
    nsteps = p.steps
    if nsteps == 0:
        return s
    dt = p.T / nsteps
    integrate = _kernels.integrate
    if backend == "numpy":
        integrate = _kernels.integrate_numpy
    elif backend == "numba":
        integrate = _kernels.integrate_numba
    A, done, blown = integrate(np.asarray(s.moments), s.dx, dt, nsteps,
                               CLOSURES[p.closure], p.bound)
    if blown or not np.all(np.isfinite(A)):
        raise BlowUp(f"|A| exceeded {p.bound:g} after {done} of {nsteps} steps "
                     f"(t = {s.time + done * dt:g})")
    return GridState(A, s.L, s.time + p.T)


def shift_periodic(f: np.ndarray, shift: float, L: float, method: str = "fourier") -> np.ndarray:
    """Samples of ``f(x - shift)`` for periodic ``f`` given on the uniform grid."""
    f = np.asarray(f, dtype=float)
    M = f.shape[-1]
    if method == "fourier":
        k = np.fft.rfftfreq(M, d=L / M)
        spec = np.fft.rfft(f, axis=-1) * np.exp(-2j * np.pi * k * shift)
        if M % 2 == 0:
            # Nyquist mode: keep the real part so the result stays the real interpolant
            spec[..., -1] = spec[..., -1].real
        return np.fft.irfft(spec, n=M, axis=-1)
    if method == "cubic":
        from scipy.interpolate import CubicSpline

        x = np.arange(M + 1) * (L / M)
        ext = np.concatenate([f, f[..., :1]], axis=-1)
        spline = CubicSpline(x, ext, axis=-1, bc_type="periodic")
        return spline(np.mod(x[:-1] - shift, L))
    raise ValueError(f"unknown interpolation method {method!r}")


def apply_group_transform(s: GridState, g: PointGeneratorId, a: float, *,
                          weight_offset: int = 2, interp: str = "fourier") -> GridState:
    """Finite point transformation with parameter ``a`` applied at time ``s.time``.

    ``weight_offset`` is the moment-weight shift of the scaling ``X5``
    (``A^i -> lam^{i + weight_offset} A^i``); anything but 2 breaks the symmetry
    and serves as a negative control.
    """
    g = PointGeneratorId(g)
    A = np.asarray(s.moments)
    if g is PointGeneratorId.X2:
        return GridState(shift_periodic(A, a, s.L, interp), s.L, s.time)
    if g is PointGeneratorId.X3:
        shifted = shift_periodic(A, a * s.time, s.L, interp) if a * s.time else A
        out = np.zeros_like(A)
        for i in range(s.N + 1):
            for m in range(i + 1):
                out[i] += math.comb(i, m) * a ** m * shifted[i - m]
        return GridState(out, s.L, s.time)
    if g is PointGeneratorId.X5:
        lam = math.exp(a)
        powers = lam ** (np.arange(s.N + 1) + weight_offset)
        # x' = lam x maps grid point m to grid point m of the stretched domain
        return GridState(A * powers[:, None], s.L * lam, s.time)
    raise UnsupportedGenerator(f"{g.value} transforms time; numeric checks cover X2, X3, X5 only")


def _transformed_params(p: SimParams, g: PointGeneratorId, a: float) -> SimParams:
    if g is PointGeneratorId.X5:
        lam = math.exp(a)
        return replace(p, L=p.L * lam, v_max=p.v_max * lam)
    return p


def symmetry_defect(initial: GridState, g: PointGeneratorId, a: float, p: SimParams, *,
                    weight_offset: int = 2, interp: str = "fourier",
                    backend: Optional[str] = None) -> float:
    """Relative L2 distance between ``T(evolve(u))`` and ``evolve(T(u))``."""
    g = PointGeneratorId(g)
    kw = dict(weight_offset=weight_offset, interp=interp)
    lhs = apply_group_transform(evolve(initial, p, backend=backend), g, a, **kw)
    moved = apply_group_transform(initial, g, a, **kw)
    rhs = evolve(moved, _transformed_params(p, g, a), backend=backend)
    diff = np.linalg.norm(lhs.moments - rhs.moments)
    ref = np.linalg.norm(lhs.moments)
    return float(diff / ref) if ref else float(diff)


@dataclass
class RefinementStudy:
    """Defects on successively doubled grids and their successive ratios."""

    grid_sizes: list
    defects: list
    ratios: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"M": self.grid_sizes, "defect": self.defects, "ratio": self.ratios}


def refinement_study(make_state, make_params, g: PointGeneratorId, a: float,
                     grid_sizes: Sequence[int], **kw) -> RefinementStudy:
    defects = []
    for M in grid_sizes:
        defects.append(symmetry_defect(make_state(M), g, a, make_params(M), **kw))
    ratios = [d0 / d1 if d1 else math.inf for d0, d1 in zip(defects, defects[1:])]
    return RefinementStudy(list(grid_sizes), defects, ratios)
