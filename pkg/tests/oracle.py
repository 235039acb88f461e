"""Independent reference computations built on sympy.

Nothing here calls into the package's algebra; polynomials are only
converted term by term at the boundary.
"""
from __future__ import annotations

from functools import lru_cache

import sympy as sp

from benney_sym.graded_poly import Polynomial, VarKind

t, x = sp.symbols("t x")


def sym_A(i):
    return sp.Symbol(f"A{i}")


def to_sympy(p: Polynomial) -> sp.Expr:
    expr = sp.Integer(0)
    for mono, c in p.items():
        term = sp.Rational(c.numerator, c.denominator) if hasattr(c, "denominator") else sp.Integer(c)
        for v, e in mono:
            term *= sp.Symbol(v.name) ** e
        expr += term
    return sp.expand(expr)


@lru_cache(maxsize=None)
def weighted_monomials(d: int, top: int):
    """Products of A^0..A^top with weights m+2 summing to d."""
    out = []

    def rec(remaining, smallest, acc):
        if remaining == 0:
            out.append(acc)
            return
        for m in range(smallest, top + 1):
            w = m + 2
            if w > remaining:
                break
            rec(remaining - w, m, acc * sym_A(m))

    rec(d, 0, sp.Integer(1))
    return tuple(out)


def brute_force_row(k: int, N: int):
    """Solve the original vector and tensor chains for row ``k`` by linear algebra.

    Ansatz: eta^i is a general weighted-homogeneous polynomial of degree
    i-k (i >= k+2) in A^0..A^N with unknown coefficients.
    """
    unknowns = []
    eta = []
    for i in range(N + 1):
        if i < k or i == k + 1:
            eta.append(sp.Integer(0))
        elif i == k:
            eta.append(sp.Integer(1))
        else:
            expr = sp.Integer(0)
            for n, mono in enumerate(weighted_monomials(i - k, N)):
                c = sp.Symbol(f"c_{i}_{n}")
                unknowns.append(c)
                expr += c * mono
            eta.append(expr)
    A = [sym_A(m) for m in range(N + 1)]
    equations = []
    for i in range(N):
        vec = sp.diff(eta[i + 1], A[0]) - sum(j * A[j - 1] * sp.diff(eta[i], A[j]) for j in range(1, N + 1))
        if i:
            vec += i * A[i - 1] * sp.diff(eta[0], A[0]) + i * eta[i - 1]
        equations.append(vec)
        for kk in range(N):
            ten = sp.diff(eta[i + 1], A[kk + 1]) - sp.diff(eta[i], A[kk])
            if i:
                ten += i * A[i - 1] * sp.diff(eta[0], A[kk + 1])
            equations.append(ten)
    linear = []
    for e in equations:
        e = sp.expand(e)
        if e != 0:
            linear.extend(sp.Poly(e, *A).coeffs())
    solutions = sp.linsolve(linear, unknowns) if unknowns else {()}
    (sol,) = list(solutions)
    subs = dict(zip(unknowns, sol))
    free = set().union(*(sp.sympify(v).free_symbols for v in sol)) if sol else set()
    return [sp.expand(e.subs(subs)) for e in eta], free


# -- jet calculus with sympy functions --------------------------------------------

def _fn(i):
    return sp.Function(f"F{i}")(t, x)


def jet_to_functions(p: Polynomial) -> sp.Expr:
    expr = sp.Integer(0)
    for mono, c in p.items():
        term = sp.Rational(c.numerator, c.denominator) if hasattr(c, "denominator") else sp.Integer(c)
        for v, e in mono:
            if v.kind == VarKind.TIME:
                base = t
            elif v.kind == VarKind.SPACE:
                base = x
            elif v.kind == VarKind.MOMENT:
                base = _fn(v.index)
            elif v.kind == VarKind.MOMENT_X:
                base = sp.Derivative(_fn(v.index), x)
            else:
                base = sp.Derivative(_fn(v.index), x, 2)
            term *= base ** e
        expr += term
    return expr


def functions_to_symbols(expr: sp.Expr, N: int) -> sp.Expr:
    """Replace F_i and its x-derivatives by the flat jet symbols."""
    reps = {}
    for i in range(N + 2):
        f = _fn(i)
        reps[sp.Derivative(f, (x, 2))] = sp.Symbol(f"A{i}_xx")
    expr = expr.subs(reps)
    reps = {sp.Derivative(_fn(i), x): sp.Symbol(f"A{i}_x") for i in range(N + 2)}
    expr = expr.subs(reps)
    reps = {_fn(i): sym_A(i) for i in range(N + 2)}
    return sp.expand(expr.subs(reps))


def on_shell_time_derivative(expr: sp.Expr, N: int) -> sp.Expr:
    """d/dt of a jet expression with the moment chain substituted for F_t, F_tx."""
    d = sp.diff(expr, t)
    rhs = {}
    for j in range(N + 1):
        ft = -(sp.diff(_fn(j + 1), x) + j * sp.diff(_fn(0), x) * (_fn(j - 1) if j else 0))
        rhs[sp.Derivative(_fn(j), t, x)] = sp.diff(ft, x)
        rhs[sp.Derivative(_fn(j), x, t)] = sp.diff(ft, x)
    d = d.subs(rhs)
    rhs = {}
    for j in range(N + 1):
        rhs[sp.Derivative(_fn(j), t)] = -(sp.diff(_fn(j + 1), x) + j * sp.diff(_fn(0), x) * (_fn(j - 1) if j else 0))
    return d.subs(rhs)


def jet_residual(coords, i: int, N: int) -> sp.Expr:
    """Symmetry condition of the moment chain at index i, all in sympy."""
    ae = [None if c is None else jet_to_functions(c) for c in coords]
    r = on_shell_time_derivative(ae[i], N) + sp.diff(ae[i + 1], x)
    if i:
        r += i * _fn(i - 1) * sp.diff(ae[0], x) + i * sp.diff(_fn(0), x) * ae[i - 1]
    return functions_to_symbols(sp.expand(r.doit()), N)


# -- misc -------------------------------------------------------------------------

def lowering(H: sp.Expr, top: int) -> sp.Expr:
    return sp.expand(sum(j * sym_A(j - 1) * sp.diff(H, sym_A(j)) for j in range(1, top + 1)))


def bracket(a, b, n):
    """Commutator of evolutionary fields given as lists of sympy expressions."""
    A = [sym_A(m) for m in range(n + 1)]
    out = []
    for i in range(n + 1):
        out.append(sp.expand(sum(a[j] * sp.diff(b[i], A[j]) - b[j] * sp.diff(a[i], A[j])
                                 for j in range(n + 1))))
    return out
