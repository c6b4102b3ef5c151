"""Sparse multivariate polynomial arithmetic and calculus.

A polynomial is a map from exponent tuples to float coefficients.  All
monomial enumeration uses the graded-lexicographic order

    1, x1, x2, ..., x1^2, x1*x2, ..., x2^2, ...

(degree first, then earlier variables with higher powers first), which fixes
the indexing of truncated moment vectors across the whole package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

# Coefficients below this magnitude are dropped after arithmetic; the SDP
# backend is floating point anyway.
DROP_TOL = 1e-14

Mono = tuple


@lru_cache(maxsize=None)
def monomials_of_degree(nvars: int, deg: int) -> tuple:
    """All exponent tuples of total degree ``deg`` in graded-lex order."""
    if nvars < 1:
        raise ValueError("need at least one variable")
    if nvars == 1:
        return ((deg,),)
    out = []
    for i in range(deg, -1, -1):
        out.extend((i,) + rest for rest in monomials_of_degree(nvars - 1, deg - i))
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_basis(nvars: int, deg: int) -> tuple:
    """All exponent tuples of total degree <= ``deg`` in graded-lex order."""
    out = []
    for t in range(deg + 1):
        out.extend(monomials_of_degree(nvars, t))
    return tuple(out)


@lru_cache(maxsize=None)
def basis_index(nvars: int, deg: int) -> dict:
    """Map monomial -> position in ``monomial_basis(nvars, deg)``."""
    return {m: i for i, m in enumerate(monomial_basis(nvars, deg))}


def basis_size(nvars: int, deg: int) -> int:
    return math.comb(nvars + deg, deg)


class Polynomial:
    """Immutable sparse polynomial with 64-bit float coefficients."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping | None = None,
                 drop_tol: float = DROP_TOL):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        clean = {}
        for mono, coef in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != nvars:
                raise ValueError(f"exponent {mono} has wrong length for {nvars} vars")
            if any(e < 0 for e in mono):
                raise ValueError(f"negative exponent in {mono}")
            c = float(coef)
            if abs(c) > drop_tol:
                clean[mono] = c
        self.nvars = nvars
        self.terms = clean

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(nvars: int) -> "Polynomial":
        return Polynomial(nvars)

    @staticmethod
    def constant(nvars: int, value: float) -> "Polynomial":
        return Polynomial(nvars, {(0,) * nvars: value})

    @staticmethod
    def variable(nvars: int, i: int) -> "Polynomial":
        if not 0 <= i < nvars:
            raise ValueError("variable index out of range")
        mono = tuple(1 if j == i else 0 for j in range(nvars))
        return Polynomial(nvars, {mono: 1.0})

    @staticmethod
    def monomial(nvars: int, exponents: Sequence[int], coef: float = 1.0) -> "Polynomial":
        return Polynomial(nvars, {tuple(exponents): coef})

    # -- basic queries -------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; the zero polynomial has degree 0 by convention."""
        if not self.terms:
            return 0
        return max(sum(m) for m in self.terms)

    def coefficient(self, mono: Sequence[int]) -> float:
        return self.terms.get(tuple(mono), 0.0)

    def coefficient_vector(self, deg: int) -> np.ndarray:
        """Dense coefficients over ``monomial_basis(self.nvars, deg)``."""
        if self.degree() > deg:
            raise ValueError("degree bound too small for this polynomial")
        idx = basis_index(self.nvars, deg)
        vec = np.zeros(len(idx))
        for mono, c in self.terms.items():
            vec[idx[mono]] = c
        return vec

    # -- arithmetic ----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return Polynomial.constant(self.nvars, float(other))

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            terms[mono] = terms.get(mono, 0.0) + c
        return Polynomial(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = float(other)
            return Polynomial(self.nvars, {m: c * v for m, v in self.terms.items()})
        if other.nvars != self.nvars:
            raise ValueError("variable count mismatch")
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = tuple(a + b for a, b in zip(m1, m2))
                terms[mono] = terms.get(mono, 0.0) + c1 * c2
        return Polynomial(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Polynomial.constant(self.nvars, 1.0)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    def __eq__(self, other):
        return (isinstance(other, Polynomial) and other.nvars == self.nvars
                and other.terms == self.terms)

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def almost_equal(self, other: "Polynomial", tol: float = 1e-10) -> bool:
        if other.nvars != self.nvars:
            return False
        monos = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(m, 0.0) - other.terms.get(m, 0.0)) <= tol
                   for m in monos)

    # -- homogenization and graded structure ----------------------------

    def homogenize(self) -> "Polynomial":
        """Lift to ``nvars + 1`` variables: each term x^a of degree |a| becomes
        x0^(deg - |a|) * x^a, with x0 prepended as variable 0."""
        d = self.degree()
        terms = {(d - sum(m),) + m: c for m, c in self.terms.items()}
        return Polynomial(self.nvars + 1, terms)

    def dehomogenize(self) -> "Polynomial":
        """Substitute variable 0 = 1 and drop it (inverse of homogenize)."""
        if self.nvars < 2:
            raise ValueError("need at least two variables to dehomogenize")
        terms = {}
        for mono, c in self.terms.items():
            m = mono[1:]
            terms[m] = terms.get(m, 0.0) + c
        return Polynomial(self.nvars - 1, terms)

    def graded_part(self, i: int) -> "Polynomial":
        """Homogeneous part of the i-th highest degree (i >= 1); the part of
        total degree ``degree() - (i - 1)``, possibly zero."""
        if i < 1:
            raise ValueError("i must be >= 1")
        target = self.degree() - (i - 1)
        if target < 0:
            return Polynomial.zero(self.nvars)
        return Polynomial(self.nvars,
                          {m: c for m, c in self.terms.items() if sum(m) == target})

    def is_homogeneous(self) -> bool:
        degs = {sum(m) for m in self.terms}
        return len(degs) <= 1

    # -- calculus --------------------------------------------------------

    def __call__(self, point) -> float:
        return self.eval(point)

    def eval(self, point) -> float:
        x = np.asarray(point, dtype=float)
        if x.shape != (self.nvars,):
            raise ValueError(f"point must have length {self.nvars}")
        total = 0.0
        for mono, c in self.terms.items():
            v = c
            for xi, e in zip(x, mono):
                if e:
                    v *= xi ** e
            total += v
        return total

    def gradient(self, point) -> np.ndarray:
        x = np.asarray(point, dtype=float)
        if x.shape != (self.nvars,):
            raise ValueError(f"point must have length {self.nvars}")
        g = np.zeros(self.nvars)
        for mono, c in self.terms.items():
            for i, e in enumerate(mono):
                if e == 0:
                    continue
                v = c * e
                for j, ej in enumerate(mono):
                    p = ej - 1 if j == i else ej
                    if p:
                        v *= x[j] ** p
                g[i] += v
        return g

    def hessian(self, point) -> np.ndarray:
        x = np.asarray(point, dtype=float)
        if x.shape != (self.nvars,):
            raise ValueError(f"point must have length {self.nvars}")
        h = np.zeros((self.nvars, self.nvars))
        for mono, c in self.terms.items():
            for i, ei in enumerate(mono):
                if ei == 0:
                    continue
                for j, ej in enumerate(mono):
                    if i == j:
                        if ei < 2:
                            continue
                        v = c * ei * (ei - 1)
                    else:
                        if ej == 0:
                            continue
                        v = c * ei * ej
                    for l, el in enumerate(mono):
                        p = el
                        if l == i:
                            p -= 1
                        if l == j:
                            p -= 1
                        if p:
                            v *= x[l] ** p
                    h[i, j] += v
        return 0.5 * (h + h.T)

    # -- printing --------------------------------------------------------

    def to_string(self, varnames: Sequence[str] | None = None) -> str:
        """Exact textual form; coefficients use repr so parsing round-trips."""
        if varnames is None:
            varnames = [f"x{i + 1}" for i in range(self.nvars)]
        if len(varnames) != self.nvars:
            raise ValueError("wrong number of variable names")
        if not self.terms:
            return "0"
        monos = sorted(self.terms, key=lambda m: (sum(m), tuple(-e for e in m)))
        parts = []
        for mono in monos:
            c = self.terms[mono]
            factors = [repr(c)]
            for name, e in zip(varnames, mono):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __repr__(self):
        return f"Polynomial({self.nvars}, {self.to_string()!r})"


@dataclass(frozen=True)
class PopProblem:
    """Polynomial optimization problem: minimize an objective subject to
    equality and inequality (>= 0) polynomial constraints."""

    nvars: int
    objective: Polynomial
    equalities: tuple = ()
    inequalities: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "equalities", tuple(self.equalities))
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        for p in (self.objective, *self.equalities, *self.inequalities):
            if p.nvars != self.nvars:
                raise ValueError("all polynomials must share the problem's nvars")

    def feasibility_violation(self, point) -> float:
        """Max constraint violation at a point (0 means feasible)."""
        v = 0.0
        for c in self.equalities:
            v = max(v, abs(c.eval(point)))
        for c in self.inequalities:
            v = max(v, -min(0.0, c.eval(point)))
        return v


def sum_of_squares_norm(nvars: int) -> Polynomial:
    """The polynomial ||x||^2 = x1^2 + ... + xn^2."""
    terms = {}
    for i in range(nvars):
        terms[tuple(2 if j == i else 0 for j in range(nvars))] = 1.0
    return Polynomial(nvars, terms)


def sphere_equation(nvars: int) -> Polynomial:
    """||x||^2 - 1."""
    return sum_of_squares_norm(nvars) - 1.0
