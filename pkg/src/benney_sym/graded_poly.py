"""Exact sparse polynomials over time, space, moments and their x-jets.

Coefficients are ``int`` or :class:`fractions.Fraction` (integral values are
always stored as ``int``).  A monomial is a sorted tuple of
``(Variable, exponent)`` pairs; the empty tuple is the constant monomial.

Every moment ``A^i`` carries the weight ``i + 2``.  Jet, space and time
variables get the weights ``i + 3`` (``A^i_x``), ``i + 4`` (``A^i_xx``),
``-1`` (``x``) and ``-2`` (``t``), which makes each equation of the Benney
moment chain weighted-homogeneous.
"""
from __future__ import annotations

import enum
import json
import re
from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable, Iterator, Mapping, NamedTuple, Optional, Tuple, Union

from .errors import GradientMismatch, MalformedInput, NonHomogeneousGradient

__all__ = [
    "VarKind", "Variable", "Monomial", "Polynomial", "T", "X", "A", "Ax", "Axx",
    "ZERO", "ONE", "poly_add", "poly_mul", "partial", "weighted_degree",
    "variable_weight", "euler_reconstruct", "parse_polynomial",
]

Coeff = Union[int, Fraction]


class VarKind(enum.IntEnum):
    TIME = 0
    SPACE = 1
    MOMENT = 2
    MOMENT_X = 3
    MOMENT_XX = 4


class Variable(NamedTuple):
    """A tagged symbol; tuple order is the canonical variable order."""

    kind: VarKind
    index: int = 0

    @property
    def name(self) -> str:
        if self.kind == VarKind.TIME:
            return "t"
        if self.kind == VarKind.SPACE:
            return "x"
        suffix = ("", "_x", "_xx")[self.kind - VarKind.MOMENT]
        return f"A{self.index}{suffix}"

    def __repr__(self) -> str:
        return self.name

    @property
    def is_moment(self) -> bool:
        return self.kind == VarKind.MOMENT


T = Variable(VarKind.TIME, 0)
X = Variable(VarKind.SPACE, 0)


def A(i: int) -> Variable:
    if i < 0:
        raise ValueError(f"moment index must be non-negative, got {i}")
    return Variable(VarKind.MOMENT, i)


def Ax(i: int) -> Variable:
    if i < 0:
        raise ValueError(f"moment index must be non-negative, got {i}")
    return Variable(VarKind.MOMENT_X, i)


def Axx(i: int) -> Variable:
    if i < 0:
        raise ValueError(f"moment index must be non-negative, got {i}")
    return Variable(VarKind.MOMENT_XX, i)


_NAME_RE = re.compile(r"^(?:(t)|(x)|A(\d+)(_xx|_x)?)$")


def variable_from_name(name: str) -> Variable:
    m = _NAME_RE.match(name)
    if m is None:
        raise MalformedInput(f"unknown variable name {name!r}")
    if m.group(1):
        return T
    if m.group(2):
        return X
    idx = int(m.group(3))
    suffix = m.group(4)
    if suffix == "_x":
        return Ax(idx)
    if suffix == "_xx":
        return Axx(idx)
    return A(idx)


_WEIGHT_OFFSET = {VarKind.MOMENT: 2, VarKind.MOMENT_X: 3, VarKind.MOMENT_XX: 4}


def variable_weight(v: Variable) -> int:
    if v.kind == VarKind.TIME:
        return -2
    if v.kind == VarKind.SPACE:
        return -1
    return v.index + _WEIGHT_OFFSET[v.kind]


Monomial = Tuple[Tuple[Variable, int], ...]


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    merged = dict(a)
    for v, e in b:
        merged[v] = merged.get(v, 0) + e
    return tuple(sorted(merged.items()))


def _mono_weight(m: Monomial) -> int:
    return sum(variable_weight(v) * e for v, e in m)


def _mono_key(m: Monomial):
    # total degree ascending, then higher variables first
    seq = []
    for v, e in reversed(m):
        seq.extend([(-v.kind, -v.index)] * e)
    return (len(seq), tuple(seq))


def _norm(c) -> Coeff:
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, Rational):
        return _norm(Fraction(c.numerator, c.denominator))
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


class Polynomial:
    """Immutable sparse polynomial with exact rational coefficients."""

    __slots__ = ("_terms", "_hash", "_partials")

    def __init__(self, terms: Optional[Mapping[Monomial, Coeff]] = None):
        clean: Dict[Monomial, Coeff] = {}
        if terms:
            for mono, c in terms.items():
                c = _norm(c)
                if c:
                    clean[mono] = c
        self._terms = clean
        self._hash = None
        self._partials: Dict[Variable, Polynomial] = {}

    @classmethod
    def _raw(cls, terms: Dict[Monomial, Coeff]) -> "Polynomial":
        # terms already canonical: no zeros, normalised coefficients
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        p._partials = {}
        return p

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls({(): c})

    @classmethod
    def var(cls, v: Variable, power: int = 1) -> "Polynomial":
        if power < 0:
            raise ValueError("negative powers are not polynomials")
        if power == 0:
            return cls.constant(1)
        return cls._raw({((v, power),): 1})

    # -- container protocol ------------------------------------------------
    @property
    def terms(self) -> Mapping[Monomial, Coeff]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Monomial, Coeff]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and () in self._terms)

    def constant_term(self) -> Coeff:
        return self._terms.get((), 0)

    def coefficient(self, mono: Monomial) -> Coeff:
        return self._terms.get(mono, 0)

    def variables(self) -> frozenset:
        return frozenset(v for mono in self._terms for v, _ in mono)

    def moment_indices(self) -> frozenset:
        return frozenset(v.index for v in self.variables() if v.kind == VarKind.MOMENT)

    def max_moment_index(self, kinds: Iterable[VarKind] = (VarKind.MOMENT,)) -> int:
        """Largest index over variables of the given kinds, or -1 if none."""
        kinds = set(kinds)
        return max((v.index for v in self.variables() if v.kind in kinds), default=-1)

    # -- arithmetic ----------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction, Rational)):
            return Polynomial.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for mono, c in other._terms.items():
            s = out.get(mono, 0) + c
            if s:
                out[mono] = _norm(s)
            else:
                out.pop(mono, None)
        return Polynomial._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw({m: -c for m, c in self._terms.items()})

    def __pos__(self) -> "Polynomial":
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if not other:
                return ZERO
            return Polynomial._raw({m: _norm(c * other) for m, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: Dict[Monomial, Coeff] = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                m = _mono_mul(ma, mb)
                out[m] = out.get(m, 0) + ca * cb
        return Polynomial(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and other:
            return Polynomial._raw({m: _norm(Fraction(c) / other) for m, c in self._terms.items()})
        return NotImplemented

    def __pow__(self, n: int) -> "Polynomial":
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparison ----------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == Polynomial.constant(other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- calculus ------------------------------------------------------------
    def partial(self, v: Variable) -> "Polynomial":
        cached = self._partials.get(v)
        if cached is not None:
            return cached
        out: Dict[Monomial, Coeff] = {}
        for mono, c in self._terms.items():
            for pos, (w, e) in enumerate(mono):
                if w == v:
                    if e == 1:
                        new = mono[:pos] + mono[pos + 1:]
                    else:
                        new = mono[:pos] + ((w, e - 1),) + mono[pos + 1:]
                    out[new] = c * e
                    break
        result = Polynomial._raw(out)
        self._partials[v] = result
        return result

    def substitute(self, values: Mapping[Variable, "Polynomial"]) -> "Polynomial":
        """Replace variables by polynomials."""
        result = ZERO
        for mono, c in self._terms.items():
            term = Polynomial.constant(c)
            for v, e in mono:
                term = term * (values[v] ** e if v in values else Polynomial.var(v, e))
            result = result + term
        return result

    def evaluate(self, values: Mapping[Variable, object]):
        total = 0
        for mono, c in self._terms.items():
            term = c
            for v, e in mono:
                term = term * values[v] ** e
            total = total + term
        return total

    # -- grading -------------------------------------------------------------
    def weighted_degree(self) -> Optional[int]:
        """Common weighted degree of all monomials, ``None`` if inhomogeneous."""
        degrees = {_mono_weight(m) for m in self._terms}
        if not degrees:
            return 0
        if len(degrees) == 1:
            return degrees.pop()
        return None

    # -- serialisation -------------------------------------------------------
    def sorted_terms(self):
        return sorted(self._terms.items(), key=lambda item: _mono_key(item[0]))

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, (mono, c) in enumerate(self.sorted_terms()):
            sign = "-" if c < 0 else "+"
            mag = -c if c < 0 else c
            factors = [v.name if e == 1 else f"{v.name}^{e}" for v, e in mono]
            if mag != 1 or not factors:
                factors.insert(0, str(mag))
            body = "*".join(factors)
            if i == 0:
                parts.append(body if sign == "+" else "-" + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    def to_json(self) -> list:
        return [
            {"coeff": str(c), "exps": {v.name: e for v, e in mono}}
            for mono, c in self.sorted_terms()
        ]

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"Polynomial({self.to_text()!r})"

    @classmethod
    def from_text(cls, text: str) -> "Polynomial":
        return _parse_text(text)

    @classmethod
    def from_json(cls, data) -> "Polynomial":
        if isinstance(data, str):
            data = json.loads(data)
        if not isinstance(data, list):
            raise MalformedInput("polynomial JSON must be an array of terms")
        out: Dict[Monomial, Coeff] = {}
        for term in data:
            try:
                coeff = _parse_coeff(str(term["coeff"]))
                exps = term.get("exps", {})
                mono = {}
                for name, e in exps.items():
                    e = int(e)
                    if e < 0:
                        raise MalformedInput(f"negative exponent for {name}")
                    if e:
                        v = variable_from_name(name)
                        mono[v] = mono.get(v, 0) + e
            except (KeyError, TypeError, ValueError, AttributeError) as exc:
                if isinstance(exc, MalformedInput):
                    raise
                raise MalformedInput(f"bad JSON term {term!r}: {exc}") from exc
            key = tuple(sorted(mono.items()))
            out[key] = out.get(key, 0) + coeff
        return cls(out)


ZERO = Polynomial()
ONE = Polynomial.constant(1)


def _parse_coeff(s: str) -> Coeff:
    s = s.strip()
    try:
        return _norm(Fraction(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"bad coefficient {s!r}") from exc


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|(t|x|A\d+(?:_xx|_x)?)|([-+*/^()]))")


def _tokenize(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise MalformedInput(f"unexpected character at {pos} in {text!r}")
        if m.group(1):
            out.append(("num", int(m.group(1))))
        elif m.group(2):
            out.append(("var", variable_from_name(m.group(2))))
        else:
            out.append(("op", m.group(3)))
        pos = m.end()
    return out


def _parse_text(text: str) -> Polynomial:
    """Parse ``-2*A2 + 3*A0^2``-style text (parentheses allowed for grouping)."""
    tokens = _tokenize(text)
    if not tokens:
        raise MalformedInput("empty polynomial text")
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None)

    def take():
        nonlocal pos
        tok = peek()
        pos += 1
        return tok

    def expr() -> Polynomial:
        result = ZERO
        first = True
        while True:
            kind, val = peek()
            sign = 1
            if kind == "op" and val in "+-":
                take()
                sign = -1 if val == "-" else 1
            elif not first:
                break
            result = result + sign * term()
            first = False
        return result

    def term() -> Polynomial:
        result = factor()
        while peek() == ("op", "*"):
            take()
            result = result * factor()
        return result

    def factor() -> Polynomial:
        kind, val = take()
        if kind == "num":
            if peek() == ("op", "/"):
                take()
                k2, den = take()
                if k2 != "num" or den == 0:
                    raise MalformedInput(f"bad fraction in {text!r}")
                base = Polynomial.constant(Fraction(val, den))
            else:
                base = Polynomial.constant(val)
        elif kind == "var":
            base = Polynomial.var(val)
        elif (kind, val) == ("op", "("):
            base = expr()
            if take() != ("op", ")"):
                raise MalformedInput(f"unbalanced parenthesis in {text!r}")
        else:
            raise MalformedInput(f"unexpected token {val!r} in {text!r}")
        if peek() == ("op", "^"):
            take()
            k2, e = take()
            if k2 != "num":
                raise MalformedInput(f"exponent must be an integer in {text!r}")
            base = base ** e
        return base

    result = expr()
    if pos != len(tokens):
        raise MalformedInput(f"trailing input in {text!r}")
    return result


def parse_polynomial(data) -> Polynomial:
    """Accept text, a JSON string, or an already-decoded JSON term list."""
    if isinstance(data, Polynomial):
        return data
    if isinstance(data, list):
        return Polynomial.from_json(data)
    if isinstance(data, str):
        stripped = data.strip()
        if stripped.startswith("["):
            try:
                decoded = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise MalformedInput(str(exc)) from exc
            return Polynomial.from_json(decoded)
        return _parse_text(stripped)
    raise MalformedInput(f"cannot parse polynomial from {type(data).__name__}")


# -- module-level operations --------------------------------------------------

def poly_add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def partial(p: Polynomial, v: Variable) -> Polynomial:
    return p.partial(v)


def weighted_degree(p: Polynomial) -> Optional[int]:
    return p.weighted_degree()


def euler_reconstruct(gradient: Mapping[Variable, Polynomial], d: int) -> Polynomial:
    """Recover a weighted-homogeneous potential of degree ``d`` from its gradient.

    Uses ``sum_m (m+2) A^m dP/dA^m = d P`` and re-differentiates the result
    to confirm it reproduces ``gradient``.
    """
    if d <= 0:
        raise ValueError(f"degree must be positive, got {d}")
    total = ZERO
    for v, g in gradient.items():
        if v.kind != VarKind.MOMENT:
            raise ValueError(f"gradient keys must be moment variables, got {v.name}")
        if g.is_zero():
            continue
        expected = d - variable_weight(v)
        got = g.weighted_degree()
        if got != expected:
            raise NonHomogeneousGradient(
                f"component {v.name} has weighted degree {got}, expected {expected}"
            )
        total = total + g * Polynomial.var(v) * variable_weight(v)
    potential = total / d
    for v in potential.variables() | set(gradient):
        if potential.partial(v) != gradient.get(v, ZERO):
            raise GradientMismatch(f"reconstructed potential disagrees along {v.name}")
    return potential
