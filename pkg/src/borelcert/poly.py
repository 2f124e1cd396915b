"""Sparse multivariate polynomials with exact rational coefficients.

A monomial is a tuple of ``(variable, exponent)`` pairs sorted by variable
name; the empty tuple is the constant monomial. Terms are ordered graded
lexicographically with variables compared alphabetically.
"""
from __future__ import annotations

import re
from fractions import Fraction
from math import gcd
from typing import Mapping, Union

Number = Union[int, Fraction]
Monomial = tuple  # tuple[tuple[str, int], ...]


def _norm(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _mono_deg(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_div(m1: Monomial, m2: Monomial):
    """m1 / m2 if m2 divides m1, else None."""
    d = dict(m1)
    for v, e in m2:
        if d.get(v, 0) < e:
            return None
        d[v] -= e
        if not d[v]:
            del d[v]
    return tuple(sorted(d.items()))


def mono_key(m: Monomial, variables: tuple[str, ...]):
    d = dict(m)
    return (_mono_deg(m), tuple(d.get(v, 0) for v in variables))


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Number] | None = None):
        self.terms: dict[Monomial, Number] = {}
        for m, c in (terms or {}).items():
            c = _norm(c)
            if c:
                self.terms[m] = c

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls({((name, 1),): 1})

    @classmethod
    def const(cls, c: Number) -> "Poly":
        return cls({(): c})

    @staticmethod
    def lift(x) -> "Poly":
        return x if isinstance(x, Poly) else Poly.const(x)

    # -- queries -------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def const_value(self) -> Number:
        return self.terms.get((), 0) if self.is_const() else None

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(sorted({v for m in self.terms for v, _ in m}))

    def total_degree(self) -> int:
        return max((_mono_deg(m) for m in self.terms), default=0)

    def degree_in(self, var: str) -> int:
        return max((dict(m).get(var, 0) for m in self.terms), default=0)

    def sorted_terms(self, variables=None):
        variables = variables or self.variables
        return sorted(self.terms.items(), key=lambda t: mono_key(t[0], variables), reverse=True)

    def leading(self, variables=None):
        return self.sorted_terms(variables)[0] if self.terms else ((), 0)

    def coeff_in(self, var: str) -> dict[int, "Poly"]:
        """View as a polynomial in ``var``: exponent -> coefficient polynomial."""
        out: dict[int, dict] = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.pop(var, 0)
            out.setdefault(e, {})[tuple(sorted(d.items()))] = c
        return {e: Poly(t) for e, t in out.items()}

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Poly):
            if not other:
                return self
            other = Poly.const(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return Poly(t)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Poly) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            if not other:
                return Poly()
            return Poly({m: c * other for m, c in self.terms.items()})
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                t[m] = t.get(m, 0) + c1 * c2
        return Poly(t)

    __rmul__ = __mul__

    def __truediv__(self, c: Number):
        c = Fraction(c)
        return Poly({m: v / c for m, v in self.terms.items()})

    def __pow__(self, n: int):
        out = Poly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- transformations -----------------------------------------------------
    def subs(self, mapping: Mapping[str, object]) -> "Poly":
        if not any(v in mapping for v in self.variables):
            return self
        out = Poly()
        for m, c in self.terms.items():
            term = Poly.const(c)
            rest = []
            for v, e in m:
                if v in mapping:
                    term = term * (Poly.lift(mapping[v]) ** e)
                else:
                    rest.append((v, e))
            out = out + term * Poly({tuple(rest): 1})
        return out

    def evaluate(self, point: Mapping[str, Number]) -> Number:
        missing = [v for v in self.variables if v not in point]
        if missing:
            raise KeyError(f"no value for {missing}")
        total = Fraction(0)
        for m, c in self.terms.items():
            val = Fraction(c)
            for v, e in m:
                val *= Fraction(point[v]) ** e
            total += val
        return _norm(total)

    def normalized(self) -> "Poly":
        """Primitive integer coefficients with positive leading coefficient."""
        if not self.terms:
            return self
        den = 1
        for c in self.terms.values():
            if isinstance(c, Fraction):
                den = den * c.denominator // gcd(den, c.denominator)
        ints = {m: int(c * den) for m, c in self.terms.items()}
        g = 0
        for c in ints.values():
            g = gcd(g, c)
        _, lc = max(ints.items(), key=lambda t: mono_key(t[0], self.variables))
        if lc < 0:
            g = -g
        return Poly({m: c // g for m, c in ints.items()})

    def divexact(self, other: "Poly"):
        """Exact quotient self / other, or None when other does not divide self."""
        other = Poly.lift(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        variables = tuple(sorted(set(self.variables) | set(other.variables)))
        lm, lc = other.leading(variables)
        rem = Poly(self.terms)
        quot = Poly()
        while rem.terms:
            m, c = rem.leading(variables)
            q = _mono_div(m, lm)
            if q is None:
                return None
            t = Poly({q: Fraction(c) / lc})
            quot = quot + t
            rem = rem - t * other
        return quot

    def reduce_by(self, g: "Poly", var: str) -> "Poly":
        """Remainder of self modulo g, dividing in ``var``.

        Requires the leading coefficient of g in ``var`` to be a constant, so
        the remainder is congruent to self modulo (g).
        """
        cg = g.coeff_in(var)
        dg = max(cg)
        lc = cg[dg].const_value()
        if lc is None or dg == 0:
            raise ValueError("leading coefficient in var must be a nonzero constant")
        p = self
        x = Poly.var(var)
        while p.degree_in(var) >= dg:
            cp = p.coeff_in(var)
            dp = max(cp)
            p = p - cp[dp] * (x ** (dp - dg)) * g / lc
        return p

    # -- text ----------------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            neg = c < 0
            a = -c if neg else c
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            parts.append(("- " if neg else "+ ") + body)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    def __repr__(self):
        return f"Poly({self})"

    @classmethod
    def parse(cls, text: str) -> "Poly":
        text = text.replace(" ", "")
        if not text:
            raise ValueError("empty polynomial")
        out = Poly()
        for sign, body in re.findall(r"([+-]?)([^+-]+)", text):
            coeff: Number = 1
            mono = {}
            for factor in body.split("*"):
                if re.fullmatch(r"\d+(/\d+)?", factor):
                    coeff = coeff * Fraction(factor)
                else:
                    name, _, e = factor.partition("^")
                    if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
                        raise ValueError(f"bad factor {factor!r}")
                    mono[name] = mono.get(name, 0) + (int(e) if e else 1)
            if sign == "-":
                coeff = -coeff
            out = out + Poly({tuple(sorted(mono.items())): coeff})
        return out


def as_const(x):
    """Return the numeric value of x if it is constant, else None."""
    if isinstance(x, Poly):
        return x.const_value()
    return x


def is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, Poly) else not x


def factor(p: Poly) -> list[tuple[Poly, int]]:
    """Irreducible factors over Q (normalized), with multiplicities."""
    import sympy

    vs = p.variables
    if not vs:
        return []
    gens = sympy.symbols(vs)
    terms = {}
    for m, c in p.terms.items():
        d = dict(m)
        c = Fraction(c)
        terms[tuple(d.get(v, 0) for v in vs)] = sympy.Rational(c.numerator, c.denominator)
    sp = sympy.Poly.from_dict(terms, *gens, domain="QQ")
    out = []
    for f, mult in sp.factor_list()[1]:
        ft = {}
        for exps, c in f.as_dict().items():
            c = sympy.Rational(c)
            ft[tuple((v, e) for v, e in zip(vs, exps) if e)] = Fraction(int(c.p), int(c.q))
        out.append((Poly(ft).normalized(), mult))
    return out
