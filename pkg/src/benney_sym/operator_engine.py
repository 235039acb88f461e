"""Canonical symmetry operators of the Benney moment chain.

Operators are finite coordinate vectors ``ae^0 .. ae^N`` acting as
``sum_i ae^i d/dA^i``.  Two verifiers are provided: one for coordinates that
depend on moments only (the vector and tensor chains obtained by splitting),
and one for coordinates in the first-order jet space, checked on shell
against ``A^i_t + A^{i+1}_x + i A^0_x A^{i-1} = 0``.

A chain equation is only asserted when every term it needs exists within the
horizon; the rest are listed as skipped.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .determining_solver import EtaRow
from .errors import DegreeMismatch, FormMismatch, HorizonExceeded, MissingH, UnsupportedVariable
from .graded_poly import (
    ONE, ZERO, T, X, A, Ax, Axx, Polynomial, VarKind, Variable,
)

__all__ = [
    "Form", "CanonicalOperator", "VerificationReport", "PointGeneratorId",
    "verify_restricted", "total_derivative_x", "total_derivative_t_on_shell",
    "point_generators", "verify_jet", "embed_point_symmetry", "point_symmetry_coordinates",
    "lie_bracket", "kupershmidt_check", "eta_tensor_from_H",
]


class Form(enum.Enum):
    MOMENT_ONLY = "moment"
    JET = "jet"


class PointGeneratorId(enum.Enum):
    X1 = "X1"
    X2 = "X2"
    X3 = "X3"
    X4 = "X4"
    X5 = "X5"


_JET_KINDS = {VarKind.TIME, VarKind.SPACE, VarKind.MOMENT, VarKind.MOMENT_X}


@dataclass(frozen=True)
class CanonicalOperator:
    """Coordinates ``ae^0 .. ae^N``; ``None`` marks a coordinate that would
    reference a moment beyond the horizon."""

    coords: Tuple[Optional[Polynomial], ...]
    form: Form
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        for i, c in enumerate(self.coords):
            if c is None:
                continue
            kinds = {v.kind for v in c.variables()}
            if self.form is Form.MOMENT_ONLY:
                if kinds - {VarKind.MOMENT}:
                    raise FormMismatch(f"coordinate {i} of a moment-only operator uses {c.variables()}")
            else:
                if kinds - _JET_KINDS:
                    raise FormMismatch(f"coordinate {i} uses variables outside t, x, A, A_x")
                for mono, _ in c.items():
                    if sum(e for v, e in mono if v.kind == VarKind.MOMENT_X) > 1:
                        raise FormMismatch(f"coordinate {i} is not affine in the first jets")

    @property
    def horizon(self) -> int:
        return len(self.coords) - 1

    def __getitem__(self, i: int) -> Optional[Polynomial]:
        return self.coords[i]

    @classmethod
    def from_row(cls, row: Union[EtaRow, Sequence[Polynomial]], name: str = "") -> "CanonicalOperator":
        entries = row.entries if isinstance(row, EtaRow) else tuple(row)
        if not name and isinstance(row, EtaRow):
            name = f"k={row.k}"
        return cls(entries, Form.MOMENT_ONLY, name)

    def as_jet(self) -> "CanonicalOperator":
        return CanonicalOperator(self.coords, Form.JET, self.name)

    def __add__(self, other: "CanonicalOperator") -> "CanonicalOperator":
        n = min(self.horizon, other.horizon)
        coords = []
        for i in range(n + 1):
            a, b = self.coords[i], other.coords[i]
            coords.append(None if a is None or b is None else a + b)
        form = Form.MOMENT_ONLY if self.form is other.form is Form.MOMENT_ONLY else Form.JET
        return CanonicalOperator(coords, form)

    def scaled(self, c) -> "CanonicalOperator":
        return CanonicalOperator([None if p is None else p * c for p in self.coords], self.form, self.name)

    def __sub__(self, other: "CanonicalOperator") -> "CanonicalOperator":
        return self + other.scaled(-1)

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "name": self.name,
            "form": self.form.value,
            "N": self.horizon,
            "coords": [None if c is None else c.to_text() for c in self.coords],
        }

    def to_text(self) -> str:
        lines = [f"[{self.name or 'operator'}] form={self.form.value} N={self.horizon}"]
        for i, c in enumerate(self.coords):
            if c is not None:
                lines.append(f"ae^{i} = {c.to_text()}")
        return "\n".join(lines) + "\n"


@dataclass
class VerificationReport:
    residuals: Dict[str, Polynomial] = field(default_factory=dict)
    checked: List[str] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)
    cutoff: Optional[int] = None

    @property
    def failures(self) -> Dict[str, Polynomial]:
        return {key: r for key, r in self.residuals.items() if r}

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        out = {
            "schema": 1,
            "verdict": self.verdict,
            "checked": list(self.checked),
            "skipped": list(self.skipped),
            "failures": {key: r.to_text() for key, r in self.failures.items()},
        }
        if self.cutoff is not None:
            out["cutoff"] = self.cutoff
        return out


def _a(i: int) -> Polynomial:
    return Polynomial.var(A(i))


def _ax(i: int) -> Polynomial:
    return Polynomial.var(Ax(i))


# -- moment-only verification ----------------------------------------------------

def verify_restricted(op: CanonicalOperator) -> VerificationReport:
    """Residuals of the vector and tensor chains for a moment-only operator."""
    if op.form is not Form.MOMENT_ONLY:
        raise FormMismatch("verify_restricted expects a moment-only operator")
    if any(c is None for c in op.coords):
        raise FormMismatch("moment-only operators must have every coordinate present")
    eta = op.coords
    n = op.horizon
    cutoff = max((c.max_moment_index() for c in eta), default=-1)
    report = VerificationReport(cutoff=cutoff)
    eta0_a0 = eta[0].partial(A(0))

    for i in range(n + 1):
        key = f"vector:i={i}"
        if i + 1 > n:
            report.skipped.append(key)
            continue
        r = eta[i + 1].partial(A(0))
        for j in range(1, cutoff + 1):
            d = eta[i].partial(A(j))
            if d:
                r = r - j * _a(j - 1) * d
        if i:
            r = r + i * _a(i - 1) * eta0_a0 + i * eta[i - 1]
        report.residuals[key] = r
        report.checked.append(key)

    for i in range(n + 1):
        for k in range(max(cutoff, 0) + 1):
            key = f"tensor:i={i},k={k}"
            if i + 1 > n:
                report.skipped.append(key)
                continue
            r = eta[i + 1].partial(A(k + 1)) - eta[i].partial(A(k))
            if i:
                r = r + i * _a(i - 1) * eta[0].partial(A(k + 1))
            report.residuals[key] = r
            report.checked.append(key)
    return report


# -- jet calculus -------------------------------------------------------------------

def total_derivative_x(p: Polynomial) -> Polynomial:
    result = p.partial(X)
    for v in sorted(p.variables()):
        if v.kind == VarKind.MOMENT_XX:
            raise UnsupportedVariable(f"D_x is not defined on second jets ({v.name})")
        if v.kind == VarKind.MOMENT:
            result = result + Polynomial.var(Ax(v.index)) * p.partial(v)
        elif v.kind == VarKind.MOMENT_X:
            result = result + Polynomial.var(Axx(v.index)) * p.partial(v)
    return result


def _a_t(j: int, n: int) -> Polynomial:
    if j + 1 > n:
        raise HorizonExceeded(f"A^{j}_t needs A^{j + 1} beyond horizon N={n}")
    return -(_ax(j + 1) + j * _ax(0) * _a(j - 1)) if j else -_ax(1)


def _a_tx(j: int, n: int) -> Polynomial:
    return total_derivative_x(_a_t(j, n))


def total_derivative_t_on_shell(p: Polynomial, N: int) -> Polynomial:
    """``D_t p`` with ``A^j_t`` and ``A^j_tx`` eliminated through the chain."""
    result = p.partial(T)
    for v in sorted(p.variables()):
        if v.kind == VarKind.MOMENT:
            result = result + _a_t(v.index, N) * p.partial(v)
        elif v.kind == VarKind.MOMENT_X:
            result = result + _a_tx(v.index, N) * p.partial(v)
        elif v.kind == VarKind.MOMENT_XX:
            raise UnsupportedVariable(f"D_t is not defined on second jets ({v.name})")
    return result


def verify_jet(op: CanonicalOperator) -> VerificationReport:
    """Residual of ``D_t ae^i + D_x ae^{i+1} + i A^{i-1} D_x ae^0 + i A^0_x ae^{i-1}``."""
    if op.form is not Form.JET:
        raise FormMismatch("verify_jet expects a jet-form operator")
    n = op.horizon
    ae = op.coords
    report = VerificationReport()
    dx0 = total_derivative_x(ae[0]) if ae[0] is not None else None
    for i in range(n + 1):
        key = f"jet:i={i}"
        needed = [ae[i], ae[i + 1] if i + 1 <= n else None, ae[0]]
        if i:
            needed.append(ae[i - 1])
        if any(c is None for c in needed):
            report.skipped.append(key)
            continue
        try:
            r = total_derivative_t_on_shell(ae[i], n)
        except HorizonExceeded:
            report.skipped.append(key)
            continue
        r = r + total_derivative_x(ae[i + 1])
        if i:
            r = r + i * _a(i - 1) * dx0 + i * _ax(0) * ae[i - 1]
        report.residuals[key] = r
        report.checked.append(key)
    return report


# -- point symmetries -----------------------------------------------------------------

def _x1_coord(i: int) -> Polynomial:
    c = _ax(i + 1)
    if i:
        c = c + i * _a(i - 1) * _ax(0)
    return c


def point_generators(N: int) -> Dict[PointGeneratorId, CanonicalOperator]:
    """Prolonged point generators in canonical jet form, coordinates 0..N."""
    if N < 2:
        raise ValueError("point generators need a horizon N >= 2")
    t, x = Polynomial.var(T), Polynomial.var(X)
    coords: Dict[PointGeneratorId, List[Optional[Polynomial]]] = {g: [] for g in PointGeneratorId}
    for i in range(N + 1):
        lagged = i * _a(i - 1) if i else ZERO
        x1 = _x1_coord(i) if i + 1 <= N else None
        coords[PointGeneratorId.X1].append(x1)
        coords[PointGeneratorId.X2].append(_ax(i))
        coords[PointGeneratorId.X3].append(lagged - t * _ax(i))
        coords[PointGeneratorId.X4].append(None if x1 is None else (i + 2) * _a(i) - t * x1)
        coords[PointGeneratorId.X5].append((i + 2) * _a(i) - x * _ax(i))
    return {g: CanonicalOperator(c, Form.JET, g.value) for g, c in coords.items()}


def point_symmetry_coordinates(K: Mapping[int, object], N: int):
    """``(eta, xi1, xi2)`` of the point group for constants ``K^1 .. K^5``."""
    k = {j: Fraction(K.get(j, 0)) for j in range(1, 6)}
    t, x = Polynomial.var(T), Polynomial.var(X)
    xi1 = k[4] + k[5] * t
    xi2 = k[1] + k[2] * t + k[3] * x
    eta = []
    for i in range(N + 1):
        e = (k[3] - k[5]) * (i + 2) * _a(i)
        if i:
            e = e + k[2] * i * _a(i - 1)
        eta.append(e)
    return eta, xi1, xi2


def embed_point_symmetry(eta_part, xi1: Polynomial = ZERO, xi2: Polynomial = ZERO,
                         name: str = "") -> CanonicalOperator:
    """Jet coordinates ``eta^i + xi1 (A^{i+1}_x + i A^{i-1} A^0_x) - xi2 A^i_x``."""
    entries = list(eta_part.entries if isinstance(eta_part, EtaRow) else eta_part)
    n = len(entries) - 1
    if not isinstance(xi1, Polynomial):
        xi1 = Polynomial.constant(xi1)
    if not isinstance(xi2, Polynomial):
        xi2 = Polynomial.constant(xi2)
    if xi1.variables() - {T}:
        raise ValueError("xi1 may depend on t only")
    if xi2.variables() - {T, X}:
        raise ValueError("xi2 may depend on t and x only")
    coords: List[Optional[Polynomial]] = []
    for i, e in enumerate(entries):
        if e.max_moment_index((VarKind.MOMENT, VarKind.MOMENT_X)) > n:
            raise HorizonExceeded(f"eta^{i} references moments beyond N={n}")
        c = e - xi2 * _ax(i)
        if xi1:
            if i + 1 > n:
                coords.append(None)
                continue
            c = c + xi1 * _x1_coord(i)
        coords.append(c)
    return CanonicalOperator(coords, Form.JET, name)


# -- algebra ---------------------------------------------------------------------------

def lie_bracket(a: CanonicalOperator, b: CanonicalOperator) -> CanonicalOperator:
    """Commutator of evolutionary fields: ``sum_j a^j db^i/dA^j - b^j da^i/dA^j``."""
    if a.form is not Form.MOMENT_ONLY or b.form is not Form.MOMENT_ONLY:
        raise FormMismatch("lie_bracket expects moment-only operators")
    if a.horizon != b.horizon:
        raise ValueError("operands must share a horizon")
    n = a.horizon
    coords = []
    for i in range(n + 1):
        idx = a.coords[i].moment_indices() | b.coords[i].moment_indices()
        if idx and max(idx) > n:
            break
        c = ZERO
        for j in sorted(idx):
            c = c + a.coords[j] * b.coords[i].partial(A(j)) - b.coords[j] * a.coords[i].partial(A(j))
        coords.append(c)
    name = f"bracket({a.name};{b.name})" if a.name and b.name else ""
    return CanonicalOperator(coords, Form.MOMENT_ONLY, name)


def _lowering(h: Polynomial) -> Polynomial:
    out = ZERO
    for j in sorted(h.moment_indices()):
        if j:
            out = out + j * _a(j - 1) * h.partial(A(j))
    return out


def kupershmidt_check(H: Polynomial, s: int) -> Tuple[bool, Polynomial]:
    """Apply ``sum_j j A^{j-1} d/dA^j`` to ``H`` and divide by ``s``.

    Returns whether the division stays within the coefficient lattice of
    ``H`` (plain divisibility by ``s`` for integer ``H``) and the quotient.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    deg = H.weighted_degree()
    if H.is_zero() or deg != s + 2:
        raise DegreeMismatch(f"H must be weighted-homogeneous of degree {s + 2}, got {deg}")
    lowered = _lowering(H)
    h_prev = lowered / s
    denom = 1
    for _, c in H.items():
        denom = math.lcm(denom, Fraction(c).denominator)
    divisible = all(denom % Fraction(c).denominator == 0 for _, c in h_prev.items())
    return divisible, h_prev


def eta_tensor_from_H(H_list: Mapping[int, Polynomial], i: int, j: int, s: int) -> Polynomial:
    """Linear-jet tensor component built from ``H^s`` and ``H^{s-1}``."""
    if min(i, j, s) < 0:
        raise ValueError("indices must be non-negative")
    result = ZERO
    k = j + 1 - i
    if k >= 1:
        if s not in H_list:
            raise MissingH(s)
        result = result + k * H_list[s].partial(A(k))
    upper = s - j - 2
    terms = [kk for kk in range(upper + 1) if i + kk > 0]
    if terms:
        if s - 1 not in H_list:
            raise MissingH(s - 1)
        h_prev = H_list[s - 1]
        for kk in terms:
            d = h_prev.partial(A(j + kk + 1))
            if d:
                result = result + s * (i + kk) * _a(i + kk - 1) * d
    return result
