"""Exact polynomial dynamical systems.

A system ``dx_i/dt = f_i(x)`` is stored as one exact polynomial per equation,
with rational coefficients (``fractions.Fraction``).  Floats only appear when
a system is evaluated numerically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

Exps = tuple[int, ...]


def as_fraction(value) -> Fraction:
    """Convert user input to an exact rational.

    Strings may be integers, decimals (``"5700.000002"``, ``"1e-3"``) or
    ``"p/q"``.  Floats are read through their shortest decimal repr, so
    ``1e-3`` becomes exactly ``1/1000``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def format_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def grlex_key(exps: Exps) -> tuple:
    """Graded order: total degree first, then x1 before x2 before ..."""
    return (sum(exps), tuple(-e for e in exps))


def default_var_names(n: int) -> tuple[str, ...]:
    if n <= 3:
        return ("x", "y", "z")[:n]
    return tuple(f"x{i + 1}" for i in range(n))


class Poly:
    """Immutable multivariate polynomial with exact rational coefficients."""

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exps, object] | None = None):
        self.nvars = nvars
        clean: dict[Exps, Fraction] = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise ValueError(f"exponent vector {exps} has length != {nvars}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = as_fraction(c)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if not clean[exps]:
                    del clean[exps]
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict[Exps, Fraction]) -> "Poly":
        p = object.__new__(cls)
        p.nvars = nvars
        p._terms = {k: v for k, v in terms.items() if v}
        p._hash = None
        return p

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls._raw(nvars, {tuple(e): Fraction(1)})

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        return cls._raw(nvars, {(0,) * nvars: as_fraction(c)})

    # -- inspection -------------------------------------------------------
    def items(self) -> list[tuple[Exps, Fraction]]:
        return sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]))

    def coeff(self, exps: Exps) -> Fraction:
        return self._terms.get(tuple(exps), Fraction(0))

    def __contains__(self, exps) -> bool:
        return tuple(exps) in self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    def restrict(self, exps_set: Iterable[Exps]) -> "Poly":
        keep = {tuple(e) for e in exps_set}
        return Poly._raw(self.nvars, {e: c for e, c in self._terms.items() if e in keep})

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("polynomials live in different dimensions")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Poly.const(self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return Poly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            c = Fraction(other)
            return Poly._raw(self.nvars, {e: v * c for e, v in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict[Exps, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return Poly._raw(self.nvars, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        result = Poly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == Poly.const(self.nvars, other)._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def compose(self, subs: Sequence["Poly"]) -> "Poly":
        """Substitute ``x_j -> subs[j]`` and expand."""
        if len(subs) != self.nvars:
            raise ValueError("need one substitution per variable")
        m = subs[0].nvars if subs else 0
        powers: dict[tuple[int, int], Poly] = {}

        def power(j: int, k: int) -> Poly:
            if (j, k) not in powers:
                powers[(j, k)] = subs[j] ** k
            return powers[(j, k)]

        out = Poly._raw(m, {})
        for exps, c in self._terms.items():
            term = Poly.const(m, c)
            for j, k in enumerate(exps):
                if k:
                    term = term * power(j, k)
            out = out + term
        return out

    def diff(self, j: int) -> "Poly":
        out: dict[Exps, Fraction] = {}
        for e, c in self._terms.items():
            if e[j]:
                e2 = list(e)
                e2[j] -= 1
                out[tuple(e2)] = c * e[j]
        return Poly._raw(self.nvars, out)

    def __call__(self, x: Sequence) -> float | Fraction:
        total = 0
        for e, c in self._terms.items():
            term = c
            for xj, k in zip(x, e):
                if k:
                    term = term * xj**k
            total = total + term
        return total

    def __repr__(self) -> str:
        return f"Poly({format_poly(self)!r})"


def format_poly(p: Poly, var_names: Sequence[str] | None = None) -> str:
    names = var_names or default_var_names(p.nvars)
    if not p:
        return "0"
    parts = []
    for exps, c in p.items():
        factors = []
        for name, k in zip(names, exps):
            if k == 1:
                factors.append(name)
            elif k > 1:
                factors.append(f"{name}^{k}")
        mag = abs(c)
        if factors and mag == 1:
            body = " ".join(factors)
        else:
            body = " ".join([format_fraction(mag)] + factors)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    first_sign, first = parts[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


def variables(n: int) -> tuple[Poly, ...]:
    return tuple(Poly.var(n, i) for i in range(n))


@dataclass(frozen=True)
class Monomial:
    coeff: Fraction
    exps: Exps

    def __post_init__(self):
        object.__setattr__(self, "coeff", as_fraction(self.coeff))
        object.__setattr__(self, "exps", tuple(int(e) for e in self.exps))
        if self.coeff == 0:
            raise ValueError("zero monomials are not stored")
        if any(e < 0 for e in self.exps):
            raise ValueError(f"negative exponent in {self.exps}")

    @property
    def degree(self) -> int:
        return sum(self.exps)


@dataclass(frozen=True)
class Complexity:
    total: int
    by_degree: Mapping[int, int]

    @property
    def degree(self) -> int:
        return max((d for d, k in self.by_degree.items() if k), default=0)

    def count(self, d: int) -> int:
        return self.by_degree.get(d, 0)

    def label_tuple(self) -> tuple[int, ...]:
        return (self.total,) + tuple(self.count(d) for d in range(2, self.degree + 1))

    def label(self) -> str:
        return "(" + ",".join(str(v) for v in self.label_tuple()) + ")"


@dataclass(frozen=True)
class PolySystem:
    """``dx_i/dt = sum of monomials in eqs[i]``; terms kept in graded order."""

    var_names: tuple[str, ...]
    eqs: tuple[tuple[Monomial, ...], ...]

    def __post_init__(self):
        names = tuple(self.var_names)
        if len(names) == 0:
            raise ValueError("a system needs at least one variable")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names {names}")
        if len(self.eqs) != len(names):
            raise ValueError(f"{len(self.eqs)} equations for {len(names)} variables")
        canon = []
        for i, eq in enumerate(self.eqs):
            seen = set()
            for m in eq:
                if len(m.exps) != len(names):
                    raise ValueError(f"equation {i}: exponent vector {m.exps} has wrong length")
                if m.exps in seen:
                    raise ValueError(f"equation {i}: repeated monomial {m.exps}")
                seen.add(m.exps)
            canon.append(tuple(sorted(eq, key=lambda m: grlex_key(m.exps))))
        object.__setattr__(self, "var_names", names)
        object.__setattr__(self, "eqs", tuple(canon))

    @classmethod
    def from_polys(cls, polys: Sequence[Poly], var_names: Sequence[str] | None = None) -> "PolySystem":
        n = len(polys)
        for p in polys:
            if p.nvars != n:
                raise ValueError("system must be square: one equation per variable")
        names = tuple(var_names) if var_names is not None else default_var_names(n)
        eqs = tuple(tuple(Monomial(c, e) for e, c in p.items()) for p in polys)
        return cls(names, eqs)

    @classmethod
    def from_terms(cls, eqs: Sequence[Iterable[tuple[object, Sequence[int]]]],
                   var_names: Sequence[str] | None = None) -> "PolySystem":
        """Build from ``(coeff, exps)`` pairs; duplicates merge, zeros drop."""
        n = len(eqs)
        polys = []
        for eq in eqs:
            acc: dict[Exps, Fraction] = {}
            for c, e in eq:
                e = tuple(e)
                acc[e] = acc.get(e, Fraction(0)) + as_fraction(c)
            polys.append(Poly(n, acc))
        return cls.from_polys(polys, var_names)

    @property
    def dim(self) -> int:
        return len(self.var_names)

    @cached_property
    def polys(self) -> tuple[Poly, ...]:
        n = self.dim
        return tuple(Poly._raw(n, {m.exps: m.coeff for m in eq}) for eq in self.eqs)

    @property
    def degree(self) -> int:
        return max((m.degree for eq in self.eqs for m in eq), default=0)

    def with_names(self, names: Sequence[str]) -> "PolySystem":
        return PolySystem(tuple(names), self.eqs)

    def __add__(self, other: "PolySystem") -> "PolySystem":
        return PolySystem.from_polys([p + q for p, q in zip(self.polys, other.polys)], self.var_names)

    def __sub__(self, other: "PolySystem") -> "PolySystem":
        return PolySystem.from_polys([p - q for p, q in zip(self.polys, other.polys)], self.var_names)

    def __str__(self) -> str:
        return format_system(self)

    @cached_property
    def compiled(self) -> "CompiledSystem":
        return CompiledSystem.from_system(self)


def format_system(s: PolySystem) -> str:
    return "\n".join(f"d{name}/dt = {format_poly(p, s.var_names)}"
                     for name, p in zip(s.var_names, s.polys))


# -- chemicality and complexity -------------------------------------------

def is_chemical_monomial(m: Monomial, i: int, dim: int | None = None) -> bool:
    """True if ``m`` (in equation ``i``, 0-based) is non-negative on {x_i = 0, x >= 0}."""
    if dim is not None and len(m.exps) != dim:
        raise ValueError(f"monomial has {len(m.exps)} exponents, system has dimension {dim}")
    if not 0 <= i < len(m.exps):
        raise ValueError(f"equation index {i} out of range")
    return m.coeff > 0 or m.exps[i] >= 1


def is_chemical(s: PolySystem) -> tuple[bool, list[tuple[int, Monomial]]]:
    violations = [(i, m) for i, eq in enumerate(s.eqs) for m in eq
                  if not is_chemical_monomial(m, i, s.dim)]
    return not violations, violations


def complexity(s: PolySystem) -> Complexity:
    counts: dict[int, int] = {}
    for eq in s.eqs:
        for m in eq:
            counts[m.degree] = counts.get(m.degree, 0) + 1
    return Complexity(sum(counts.values()), dict(sorted(counts.items())))


# -- affine changes of variables ------------------------------------------

@dataclass(frozen=True)
class AffineMap:
    """New variables ``xbar_i = signs_i * x_{perm_i} / scales_i + shift_i``.

    Stages apply in order: permutation, reflection, positive rescaling
    (``x -> s x`` meaning ``xbar = x / s``), translation (``xbar = x + T``).
    """

    perm: tuple[int, ...]
    signs: tuple[int, ...]
    scales: tuple[Fraction, ...]
    shift: tuple[Fraction, ...]

    def __post_init__(self):
        n = len(self.perm)
        object.__setattr__(self, "perm", tuple(int(p) for p in self.perm))
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        object.__setattr__(self, "scales", tuple(as_fraction(s) for s in self.scales))
        object.__setattr__(self, "shift", tuple(as_fraction(t) for t in self.shift))
        if sorted(self.perm) != list(range(n)):
            raise ValueError(f"{self.perm} is not a permutation of 0..{n - 1}")
        if len(self.signs) != n or len(self.scales) != n or len(self.shift) != n:
            raise ValueError("perm, signs, scales and shift must have equal length")
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")
        if any(s <= 0 for s in self.scales):
            raise ValueError(f"scales must be strictly positive, got {self.scales}")

    @property
    def dim(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(tuple(range(n)), (1,) * n, (Fraction(1),) * n, (Fraction(0),) * n)

    @classmethod
    def permutation(cls, perm: Sequence[int]) -> "AffineMap":
        n = len(perm)
        return cls(tuple(perm), (1,) * n, (Fraction(1),) * n, (Fraction(0),) * n)

    @classmethod
    def swap(cls, n: int, i: int, j: int) -> "AffineMap":
        """Transposition ``x_i <-> x_j`` (exchange two variables)."""
        perm = list(range(n))
        perm[i], perm[j] = perm[j], perm[i]
        return cls.permutation(perm)

    @classmethod
    def reflection(cls, n: int, *indices: int) -> "AffineMap":
        signs = [1] * n
        for i in indices:
            signs[i] = -1
        return cls(tuple(range(n)), tuple(signs), (Fraction(1),) * n, (Fraction(0),) * n)

    @classmethod
    def scaling(cls, scales: Sequence) -> "AffineMap":
        n = len(scales)
        return cls(tuple(range(n)), (1,) * n, tuple(scales), (Fraction(0),) * n)

    @classmethod
    def translation(cls, shift: Sequence) -> "AffineMap":
        n = len(shift)
        return cls(tuple(range(n)), (1,) * n, (Fraction(1),) * n, tuple(shift))

    @property
    def gains(self) -> tuple[Fraction, ...]:
        return tuple(s / c for s, c in zip(self.signs, self.scales))

    @classmethod
    def _from_gains(cls, perm, gains, shift) -> "AffineMap":
        if any(g == 0 for g in gains):
            raise ValueError("degenerate map")
        return cls(tuple(perm), tuple(1 if g > 0 else -1 for g in gains),
                   tuple(1 / abs(g) for g in gains), tuple(shift))

    def then(self, other: "AffineMap") -> "AffineMap":
        """The map applying ``self`` first and ``other`` second."""
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        ga, gb = self.gains, other.gains
        pa, pb = self.perm, other.perm
        perm = [pa[pb[i]] for i in range(self.dim)]
        gains = [gb[i] * ga[pb[i]] for i in range(self.dim)]
        shift = [gb[i] * self.shift[pb[i]] + other.shift[i] for i in range(self.dim)]
        return AffineMap._from_gains(perm, gains, shift)

    def inverse(self) -> "AffineMap":
        g = self.gains
        pinv = [0] * self.dim
        for i, p in enumerate(self.perm):
            pinv[p] = i
        gains = [1 / g[pinv[j]] for j in range(self.dim)]
        shift = [-self.shift[pinv[j]] / g[pinv[j]] for j in range(self.dim)]
        return AffineMap._from_gains(pinv, gains, shift)

    def __call__(self, x: Sequence):
        """Map a point from old to new coordinates (exact if ``x`` is rational)."""
        if len(x) != self.dim:
            raise ValueError("dimension mismatch")
        exact = all(isinstance(v, (int, Fraction)) for v in x)
        if exact:
            return tuple(g * Fraction(x[p]) + t for g, p, t in zip(self.gains, self.perm, self.shift))
        x = np.asarray(x, dtype=float)
        g = np.array([float(v) for v in self.gains])
        t = np.array([float(v) for v in self.shift])
        return g * x[list(self.perm)] + t

    def linear_matrix(self) -> np.ndarray:
        """Float matrix ``A`` with ``xbar = A x + shift``."""
        A = np.zeros((self.dim, self.dim))
        for i, (p, g) in enumerate(zip(self.perm, self.gains)):
            A[i, p] = float(g)
        return A


def apply_affine(s: PolySystem, a: AffineMap, var_names: Sequence[str] | None = None) -> PolySystem:
    """Rewrite ``s`` in the new variables defined by ``a`` (exact expansion)."""
    n = s.dim
    if a.dim != n:
        raise ValueError(f"map of dimension {a.dim} applied to system of dimension {n}")
    g = a.gains
    subs: list[Poly | None] = [None] * n
    for i, p in enumerate(a.perm):
        # x_p = (xbar_i - T_i) / g_i
        subs[p] = (Poly.var(n, i) - a.shift[i]) * (1 / g[i])
    polys = [s.polys[p].compose(subs) * g[i] for i, p in enumerate(a.perm)]
    return PolySystem.from_polys(polys, var_names or s.var_names)


# -- numerics ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CompiledSystem:
    """Flat float tables of a system and its Jacobian, ready for numeric kernels."""

    dim: int
    term_eq: np.ndarray
    term_coef: np.ndarray
    term_exp: np.ndarray
    jac_row: np.ndarray
    jac_col: np.ndarray
    jac_coef: np.ndarray
    jac_exp: np.ndarray
    trace_coef: np.ndarray = field(repr=False)
    trace_exp: np.ndarray = field(repr=False)

    @classmethod
    def from_system(cls, s: PolySystem) -> "CompiledSystem":
        n = s.dim
        teq, tco, tex = [], [], []
        for i, eq in enumerate(s.eqs):
            for m in eq:
                teq.append(i)
                tco.append(float(m.coeff))
                tex.append(m.exps)
        jr, jc, jco, jex = [], [], [], []
        trc, tre = [], []
        for i, p in enumerate(s.polys):
            for j in range(n):
                d = p.diff(j)
                for e, c in d.items():
                    jr.append(i)
                    jc.append(j)
                    jco.append(float(c))
                    jex.append(e)
                    if i == j:
                        trc.append(float(c))
                        tre.append(e)
        def arr(v, dt):
            return np.array(v, dtype=dt)
        return cls(
            n,
            arr(teq, np.int64), arr(tco, np.float64), arr(tex, np.int64).reshape(-1, n),
            arr(jr, np.int64), arr(jc, np.int64), arr(jco, np.float64), arr(jex, np.int64).reshape(-1, n),
            arr(trc, np.float64), arr(tre, np.int64).reshape(-1, n),
        )

    def _monomials(self, X: np.ndarray, exps: np.ndarray) -> np.ndarray:
        # X: (..., n) -> (..., k)
        return np.prod(X[..., None, :] ** exps, axis=-1)

    @cached_property
    def _incidence(self) -> np.ndarray:
        M = np.zeros((len(self.term_eq), self.dim))
        M[np.arange(len(self.term_eq)), self.term_eq] = 1.0
        return M

    def f(self, x) -> np.ndarray:
        """Vector field; vectorised over leading axes of ``x``."""
        x = np.asarray(x, dtype=float)
        vals = self.term_coef * self._monomials(x, self.term_exp)
        return vals @ self._incidence

    def jac(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        vals = self.jac_coef * self._monomials(x, self.jac_exp)
        J = np.zeros((self.dim, self.dim))
        np.add.at(J, (self.jac_row, self.jac_col), vals)
        return J

    def trace(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (self.trace_coef * self._monomials(x, self.trace_exp)).sum(axis=-1)


def evaluate(s: PolySystem, x: Sequence[float]) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (s.dim,):
        raise ValueError(f"expected a state of length {s.dim}, got shape {x.shape}")
    return s.compiled.f(x)


def jacobian(s: PolySystem) -> tuple[tuple[Poly, ...], ...]:
    return tuple(tuple(p.diff(j) for j in range(s.dim)) for p in s.polys)


def evaluate_jacobian(s: PolySystem, x: Sequence[float]) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (s.dim,):
        raise ValueError(f"expected a state of length {s.dim}, got shape {x.shape}")
    return s.compiled.jac(x)


def divergence(s: PolySystem, x) -> np.ndarray:
    """Trace of the Jacobian; vectorised over leading axes of ``x``."""
    return s.compiled.trace(x)


# -- system definition files ---------------------------------------------------

class SystemFormatError(ValueError):
    """Malformed system definition; ``location`` points into the document."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


def system_to_dict(s: PolySystem) -> dict:
    return {
        "dim": s.dim,
        "vars": list(s.var_names),
        "eqs": [[{"coeff": format_fraction(m.coeff), "exps": list(m.exps)} for m in eq]
                for eq in s.eqs],
    }


def system_from_dict(doc) -> PolySystem:
    if not isinstance(doc, dict):
        raise SystemFormatError("system definition must be an object", "$")
    for key in ("dim", "vars", "eqs"):
        if key not in doc:
            raise SystemFormatError(f"missing field '{key}'", "$")
    dim = doc["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise SystemFormatError("dim must be a positive integer", "$.dim")
    names = doc["vars"]
    if not isinstance(names, list) or len(names) != dim or not all(isinstance(v, str) and v for v in names):
        raise SystemFormatError(f"vars must list {dim} non-empty names", "$.vars")
    if any(v == "0" for v in names):
        raise SystemFormatError("'0' is reserved for the empty complex", "$.vars")
    eqs = doc["eqs"]
    if not isinstance(eqs, list) or len(eqs) != dim:
        raise SystemFormatError(f"eqs must hold {dim} equations", "$.eqs")
    terms = []
    for i, eq in enumerate(eqs):
        if not isinstance(eq, list):
            raise SystemFormatError("equation must be a list of monomials", f"$.eqs[{i}]")
        row = []
        for k, mono in enumerate(eq):
            loc = f"$.eqs[{i}][{k}]"
            if not isinstance(mono, dict) or "coeff" not in mono or "exps" not in mono:
                raise SystemFormatError("monomial needs 'coeff' and 'exps'", loc)
            try:
                c = as_fraction(mono["coeff"])
            except (TypeError, ValueError, ZeroDivisionError) as exc:
                raise SystemFormatError(f"bad coefficient {mono['coeff']!r} ({exc})", loc + ".coeff") from None
            e = mono["exps"]
            if (not isinstance(e, list) or len(e) != dim
                    or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in e)):
                raise SystemFormatError(f"exps must be {dim} non-negative integers", loc + ".exps")
            row.append((c, e))
        terms.append(row)
    return PolySystem.from_terms(terms, names)


def dumps_system(s: PolySystem) -> str:
    return json.dumps(system_to_dict(s), indent=2)


def loads_system(text: str) -> PolySystem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFormatError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return system_from_dict(doc)


def load_system(path: str | Path) -> PolySystem:
    return loads_system(Path(path).read_text())


def dump_system(s: PolySystem, path: str | Path) -> None:
    Path(path).write_text(dumps_system(s) + "\n")
