"""Chemical reaction networks induced by chemical polynomial systems."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .polysys import (
    Complexity,
    Poly,
    PolySystem,
    as_fraction,
    format_fraction,
    is_chemical,
)


@dataclass(frozen=True)
class Reaction:
    reactants: tuple[int, ...]
    products: tuple[int, ...]
    rate: Fraction

    def __post_init__(self):
        object.__setattr__(self, "reactants", tuple(int(v) for v in self.reactants))
        object.__setattr__(self, "products", tuple(int(v) for v in self.products))
        object.__setattr__(self, "rate", as_fraction(self.rate))
        if len(self.reactants) != len(self.products):
            raise ValueError("reactant and product complexes differ in length")
        if any(v < 0 for v in self.reactants + self.products):
            raise ValueError("stoichiometric coefficients must be non-negative")
        if self.rate <= 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if self.reactants == self.products:
            raise ValueError("reaction does not change any species")

    @property
    def degree(self) -> int:
        return sum(self.reactants)

    @property
    def change(self) -> tuple[int, ...]:
        return tuple(p - r for r, p in zip(self.reactants, self.products))


@dataclass(frozen=True)
class Crn:
    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        n = len(self.species)
        if len(set(self.species)) != n:
            raise ValueError(f"duplicate species names {self.species}")
        if "0" in self.species:
            raise ValueError("species name '0' is reserved for the empty complex")
        for r in self.reactions:
            if len(r.reactants) != n:
                raise ValueError(f"reaction of dimension {len(r.reactants)} in a network of {n} species")

    @property
    def dim(self) -> int:
        return len(self.species)

    def __eq__(self, other):
        if not isinstance(other, Crn):
            return NotImplemented
        return self.species == other.species and self.reactions == other.reactions

    def __hash__(self):
        return hash((self.species, self.reactions))


def species_names(var_names: Sequence[str]) -> tuple[str, ...]:
    return tuple(v[:1].upper() + v[1:] for v in var_names)


def canonical_crn(s: PolySystem, species: Sequence[str] | None = None) -> Crn:
    """One reaction per monomial: ``alpha x^nu`` in equation i gives
    ``nu -> nu + sign(alpha) e_i`` at rate ``|alpha|``."""
    ok, bad = is_chemical(s)
    if not ok:
        i, m = bad[0]
        raise ValueError(f"system is not chemical: equation {i + 1} has monomial with "
                         f"coefficient {format_fraction(m.coeff)} and exponents {list(m.exps)}")
    reactions = []
    for i, eq in enumerate(s.eqs):
        for m in eq:
            prod = list(m.exps)
            prod[i] += 1 if m.coeff > 0 else -1
            reactions.append(Reaction(m.exps, tuple(prod), abs(m.coeff)))
    return Crn(tuple(species) if species is not None else species_names(s.var_names), tuple(reactions))


def _affected(r: Reaction) -> int:
    nz = [i for i, d in enumerate(r.change) if d]
    if len(nz) != 1 or abs(r.change[nz[0]]) != 1:
        raise ValueError(f"reaction {r} is not canonical (must change one species by one)")
    return nz[0]


def fuse(c: Crn) -> Crn:
    """Merge canonical reactions sharing reactant complex and exact rate.

    Within a group every member must change a different species; members
    that clash on a species are left unfused.
    """
    groups: dict[tuple, list[int]] = {}
    for k, r in enumerate(c.reactions):
        _affected(r)
        groups.setdefault((r.reactants, r.rate), []).append(k)
    emit: dict[int, Reaction] = {}
    notes = []
    for (reactants, rate), members in groups.items():
        seen: dict[int, int] = {}
        for k in members:
            sp = _affected(c.reactions[k])
            seen[sp] = seen.get(sp, 0) + 1
        clash = [k for k in members if seen[_affected(c.reactions[k])] > 1]
        fusable = [k for k in members if k not in clash]
        for k in clash:
            emit[k] = c.reactions[k]
        if clash:
            notes.append(f"reactions {[k + 1 for k in clash]} share reactants and rate but "
                         "change the same species; left unfused")
        if len(fusable) == 1:
            emit[fusable[0]] = c.reactions[fusable[0]]
        elif fusable:
            prod = list(reactants)
            for k in fusable:
                for i, d in enumerate(c.reactions[k].change):
                    prod[i] += d
            if tuple(prod) == reactants:
                for k in fusable:
                    emit[k] = c.reactions[k]
            else:
                emit[fusable[0]] = Reaction(reactants, tuple(prod), rate)
    return Crn(c.species, tuple(emit[k] for k in sorted(emit)), c.notes + tuple(notes))


def crn_to_cds(c: Crn, var_names: Sequence[str] | None = None) -> PolySystem:
    n = c.dim
    polys = [Poly(n) for _ in range(n)]
    for r in c.reactions:
        for i, d in enumerate(r.change):
            if d:
                polys[i] = polys[i] + Poly(n, {r.reactants: r.rate * d})
    names = tuple(var_names) if var_names is not None else tuple(v.lower() if len(v) == 1 else v[:1].lower() + v[1:]
                                                                   for v in c.species)
    return PolySystem.from_polys(polys, names)


def crn_complexity(c: Crn) -> Complexity:
    counts: dict[int, int] = {}
    for r in c.reactions:
        counts[r.degree] = counts.get(r.degree, 0) + 1
    return Complexity(sum(counts.values()), dict(sorted(counts.items())))


def _render_complex(nu: Sequence[int], species: Sequence[str]) -> str:
    parts = [name if k == 1 else f"{k} {name}" for name, k in zip(species, nu) if k]
    return " + ".join(parts) if parts else "0"


def render(c: Crn) -> str:
    return "\n".join(f"{_render_complex(r.reactants, c.species)} --{format_fraction(r.rate)}--> "
                     f"{_render_complex(r.products, c.species)}" for r in c.reactions)


_LINE = re.compile(r"^\s*(?P<lhs>.*?)\s*--(?P<rate>[^\s-][^\s]*?)-->\s*(?P<rhs>.*?)\s*$")
_TERM = re.compile(r"^(?:(?P<k>\d+)\s+)?(?P<name>[A-Za-z_][A-Za-z0-9_]*)$")


class CrnFormatError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _parse_complex(text: str, lineno: int) -> dict[str, int]:
    text = text.strip()
    if text == "0":
        return {}
    out: dict[str, int] = {}
    for term in text.split("+"):
        m = _TERM.match(term.strip())
        if not m:
            raise CrnFormatError(f"cannot read complex term {term.strip()!r}", lineno)
        k = int(m.group("k")) if m.group("k") else 1
        if k == 0:
            raise CrnFormatError("zero stoichiometric coefficient", lineno)
        out[m.group("name")] = out.get(m.group("name"), 0) + k
    return out


def parse(text: str, species: Sequence[str] | None = None) -> Crn:
    """Read the ``complex --rate--> complex`` format produced by ``render``.

    Species are taken in order of first appearance unless given explicitly.
    Blank lines and lines starting with ``#`` are skipped.
    """
    rows = []
    order: list[str] = list(species) if species is not None else []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        m = _LINE.match(line)
        if not m:
            raise CrnFormatError(f"expected 'complex --rate--> complex', got {line.strip()!r}", lineno)
        try:
            rate = as_fraction(m.group("rate"))
        except (ValueError, ZeroDivisionError):
            raise CrnFormatError(f"bad rate {m.group('rate')!r}", lineno) from None
        lhs = _parse_complex(m.group("lhs"), lineno)
        rhs = _parse_complex(m.group("rhs"), lineno)
        for name in list(lhs) + list(rhs):
            if name not in order:
                if species is not None:
                    raise CrnFormatError(f"unknown species {name!r}", lineno)
                order.append(name)
        rows.append((lhs, rhs, rate, lineno))
    reactions = []
    for lhs, rhs, rate, lineno in rows:
        try:
            reactions.append(Reaction(tuple(lhs.get(s, 0) for s in order),
                                      tuple(rhs.get(s, 0) for s in order), rate))
        except ValueError as exc:
            raise CrnFormatError(str(exc), lineno) from None
    return Crn(tuple(order), tuple(reactions))
