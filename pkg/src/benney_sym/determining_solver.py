"""Basis solutions of the simplified determining chains.

Row ``k`` of the matrix is fixed by the boundary values ``eta^k_k = 1`` and
``eta^{k+1}_k = 0``; every later entry is obtained from the two previous ones
by assembling its full gradient and integrating that gradient with the
weighted Euler identity.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

from .errors import ExactnessFailure, GradientMismatch, HorizonTooSmall, MalformedInput, NonHomogeneousGradient
from .graded_poly import ONE, ZERO, A, Polynomial, Variable, euler_reconstruct, parse_polynomial

__all__ = [
    "EtaRow", "EtaMatrix", "gradient_of_next", "check_exactness",
    "generate_eta_row", "generate_eta_matrix",
]


@dataclass(frozen=True)
class EtaRow:
    """Entries ``eta^0_k .. eta^N_k`` of one basis solution (zeros below ``k``)."""

    k: int
    entries: Tuple[Polynomial, ...]

    @property
    def horizon(self) -> int:
        return len(self.entries) - 1

    def __getitem__(self, i: int) -> Polynomial:
        if i < 0:
            return ZERO
        return self.entries[i]

    def __len__(self) -> int:
        return len(self.entries)

    def nonzero(self) -> Dict[int, Polynomial]:
        return {i: p for i, p in enumerate(self.entries) if not p.is_zero()}


@dataclass(frozen=True)
class EtaMatrix:
    rows: Mapping[int, EtaRow]
    horizon: int

    def __getitem__(self, key):
        k, i = key
        return self.rows[k][i]

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "N": self.horizon,
            "rows": {
                str(k): {str(i): p.to_text() for i, p in row.nonzero().items()}
                for k, row in sorted(self.rows.items())
            },
        }

    def to_text(self) -> str:
        lines = [f"# eta matrix, N={self.horizon}"]
        for k, row in sorted(self.rows.items()):
            lines.append(f"[k={k}]")
            for i, p in row.nonzero().items():
                lines.append(f"eta^{i} = {p.to_text()}")
        return "\n".join(lines) + "\n"

    def to_latex(self) -> str:
        """Upper-left block as a LaTeX ``array``; rows are ``k``, columns ``i``."""
        n = self.horizon
        lines = [r"\eta^{i}_{k}=\left(", r"\begin{array}{" + "c" * (n + 2) + "}"]
        for k, row in sorted(self.rows.items()):
            cells = [_latex_poly(row[i]) for i in range(n + 1)]
            lines.append(" & ".join(cells + [r"\ldots"]) + r" \\")
        lines.append(" & ".join([r"\ldots"] * (n + 2)))
        lines.append(r"\end{array} \right)")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_json(cls, data) -> "EtaMatrix":
        try:
            n = int(data["N"])
            rows = {}
            for k_str, entries in data["rows"].items():
                k = int(k_str)
                vals = [ZERO] * (n + 1)
                for i_str, text in entries.items():
                    i = int(i_str)
                    if not 0 <= i <= n:
                        raise MalformedInput(f"entry index {i} outside horizon {n}")
                    vals[i] = parse_polynomial(text)
                rows[k] = EtaRow(k, tuple(vals))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, MalformedInput):
                raise
            raise MalformedInput(f"bad eta matrix JSON: {exc}") from exc
        return cls(rows, n)


def _latex_poly(p: Polynomial) -> str:
    text = p.to_text()
    text = re.sub(r"A(\d+)\^(\d+)", r"(A^{\1})^{\2}", text)
    text = re.sub(r"A(\d+)(?![\d}])", r"A^{\1}", text)
    return text.replace("*", " ")


def gradient_of_next(row: EtaRow, i: int) -> Dict[Variable, Polynomial]:
    """Full moment gradient of ``eta^{i+1}`` from ``eta^i`` and ``eta^{i-1}``.

    The ``A^0`` component follows the reduced vector chain, the others come
    from the shift relation ``d eta^{i+1}/dA^{m+1} = d eta^i / dA^m``.
    """
    eta_i = row[i]
    eta_prev = row[i - 1]
    grad: Dict[Variable, Polynomial] = {}

    a0 = ZERO
    for j in range(1, i - 1):  # j = 0 summand vanishes identically
        d = eta_i.partial(A(j))
        if d:
            a0 = a0 + j * Polynomial.var(A(j - 1)) * d
    if i:
        a0 = a0 - i * eta_prev
    if a0:
        grad[A(0)] = a0

    for m in sorted(eta_i.moment_indices()):
        d = eta_i.partial(A(m))
        if d:
            grad[A(m + 1)] = d
    return grad


def check_exactness(gradient: Mapping[Variable, Polynomial]) -> List[Tuple[Variable, Variable, Polynomial]]:
    """Pairs whose mixed partials disagree, with the nonzero residual."""
    keys = set(gradient)
    for g in gradient.values():
        keys |= {v for v in g.variables() if v.is_moment}
    keys = sorted(keys)
    violations = []
    for a_idx, u in enumerate(keys):
        gu = gradient.get(u, ZERO)
        for v in keys[a_idx + 1:]:
            gv = gradient.get(v, ZERO)
            residual = gu.partial(v) - gv.partial(u)
            if residual:
                violations.append((u, v, residual))
    return violations


def generate_eta_row(k: int, N: int) -> EtaRow:
    if k < 0:
        raise ValueError("row index must be non-negative")
    if N < k + 1:
        raise HorizonTooSmall(f"horizon N={N} is smaller than k+1={k + 1}")
    entries: List[Polynomial] = [ZERO] * (N + 1)
    entries[k] = ONE
    for i in range(k + 1, N):
        row = EtaRow(k, tuple(entries))
        grad = gradient_of_next(row, i)
        violations = check_exactness(grad)
        if violations:
            u, v, r = violations[0]
            raise ExactnessFailure(f"row {k}, entry {i + 1}: d/d{v.name} vs d/d{u.name} differ by {r}")
        if not grad:
            entries[i + 1] = ZERO
            continue
        try:
            nxt = euler_reconstruct(grad, i + 1 - k)
        except (NonHomogeneousGradient, GradientMismatch) as exc:
            raise ExactnessFailure(f"row {k}, entry {i + 1}: {exc}") from exc
        if nxt.max_moment_index() >= i:
            raise ExactnessFailure(f"row {k}, entry {i + 1} depends on A^{nxt.max_moment_index()}")
        entries[i + 1] = nxt
    return EtaRow(k, tuple(entries))


def generate_eta_matrix(K: int, N: int) -> EtaMatrix:
    if N < K + 1:
        raise HorizonTooSmall(f"horizon N={N} is smaller than K+1={K + 1}")
    return EtaMatrix({k: generate_eta_row(k, N) for k in range(K + 1)}, N)


def load_eta_matrix(text: str) -> EtaMatrix:
    """Read a matrix written by ``to_json`` or ``to_text``."""
    if text.lstrip().startswith("{"):
        try:
            return EtaMatrix.from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise MalformedInput(str(exc)) from exc
    from .formats import load_operators

    rows = {}
    for op in load_operators(text):
        if not op.name.startswith("k="):
            raise MalformedInput(f"section [{op.name}] is not an eta row")
        k = int(op.name[2:])
        rows[k] = EtaRow(k, tuple(op.coords))
    horizons = {row.horizon for row in rows.values()}
    if len(horizons) != 1:
        raise MalformedInput("rows disagree on the horizon")
    return EtaMatrix(rows, horizons.pop())
