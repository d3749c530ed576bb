"""Quasi-chemical maps: split, perturb, translate and rescale a polynomial
system so that it becomes chemical (non-negative orthant invariant).

Each equation is split into pieces.  A piece's kind decides which
perturbation it receives:

* ``UNIVERSAL``     ``(mu / a_i) * x_i * r(x)``  (always chemical after translation)
* ``LINEAR_QUAD``   ``eps * x_i**2`` on a linear piece
* ``LINEAR_DAMP``   ``-A * eps * x_i`` on a linear piece with a non-positive
  diagonal coefficient (``A = 1`` iff the diagonal coefficient is zero)
* ``QUADRATIC``     ``eps * fill(x)`` on a piece whose quadratic part has the
  chemical sign pattern; ``fill`` is supplied by the plan

The perturbed system is then translated by ``xbar = x + a / mu`` and
optionally rescaled by ``post_scale`` (``xbar -> xbar / s``).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .polysys import (
    AffineMap,
    Exps,
    Monomial,
    Poly,
    PolySystem,
    SystemFormatError,
    apply_affine,
    as_fraction,
    format_fraction,
    format_poly,
    is_chemical,
    is_chemical_monomial,
    system_from_dict,
    system_to_dict,
)


class PieceKind(enum.Enum):
    UNIVERSAL = "universal"
    LINEAR_QUAD = "linear-quad"
    LINEAR_DAMP = "linear-damp"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class Piece:
    """A subset of one equation's monomials, named by exponent vector."""

    kind: PieceKind
    monomials: tuple[Exps, ...]
    fill: Poly | None = None  # QUADRATIC only, in units of eps

    def __post_init__(self):
        object.__setattr__(self, "kind", PieceKind(self.kind))
        object.__setattr__(self, "monomials", tuple(tuple(int(v) for v in e) for e in self.monomials))
        if self.fill is not None and self.kind is not PieceKind.QUADRATIC:
            raise ValueError(f"only quadratic pieces take a fill, got {self.kind.value}")


@dataclass(frozen=True)
class QcmPlan:
    base: PolySystem
    pieces: tuple[tuple[Piece, ...], ...]
    epsilon: Fraction
    mu: Fraction
    a: tuple[Fraction, ...]
    post_scale: tuple[Fraction, ...] | None = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_fraction(self.epsilon))
        object.__setattr__(self, "mu", as_fraction(self.mu))
        object.__setattr__(self, "a", tuple(as_fraction(v) for v in self.a))
        if self.post_scale is not None:
            object.__setattr__(self, "post_scale", tuple(as_fraction(v) for v in self.post_scale))
        object.__setattr__(self, "pieces", tuple(tuple(p) for p in self.pieces))
        n = self.base.dim
        if self.epsilon <= 0 or self.mu <= 0:
            raise ValueError("epsilon and mu must be strictly positive")
        if len(self.a) != n or any(v <= 0 for v in self.a):
            raise ValueError(f"a must hold {n} strictly positive entries")
        if self.post_scale is not None and (len(self.post_scale) != n or any(v <= 0 for v in self.post_scale)):
            raise ValueError(f"post_scale must hold {n} strictly positive entries")
        if len(self.pieces) != n:
            raise ValueError(f"splitting lists {len(self.pieces)} equations, system has {n}")
        for i, (eq, pieces) in enumerate(zip(self.base.eqs, self.pieces)):
            present = {m.exps for m in eq}
            claimed: list[Exps] = [e for p in pieces for e in p.monomials]
            if len(claimed) != len(set(claimed)):
                raise ValueError(f"equation {i}: pieces overlap")
            missing = present - set(claimed)
            extra = set(claimed) - present
            if missing or extra:
                raise ValueError(f"equation {i}: pieces must cover the equation exactly "
                                 f"(missing {sorted(missing)}, not in equation {sorted(extra)})")

    @property
    def shift(self) -> tuple[Fraction, ...]:
        return tuple(v / self.mu for v in self.a)

    def affine_map(self) -> AffineMap:
        """Full change of variables from base to output coordinates."""
        m = AffineMap.translation(self.shift)
        if self.post_scale is not None:
            m = m.then(AffineMap.scaling(self.post_scale))
        return m


@dataclass(frozen=True)
class ConstraintCheck:
    equation: int
    piece: int
    name: str
    lhs: Fraction
    rhs: Fraction
    strict: bool

    @property
    def margin(self) -> Fraction:
        return self.lhs - self.rhs

    @property
    def satisfied(self) -> bool:
        return self.margin > 0 if self.strict else self.margin >= 0

    @property
    def tight(self) -> bool:
        return self.margin == 0

    def describe(self) -> str:
        op = ">" if self.strict else ">="
        state = "ok" if self.satisfied else ("tight" if self.tight else "VIOLATED")
        return (f"eq {self.equation + 1} piece {self.piece + 1} {self.name}: "
                f"{format_fraction(self.lhs)} {op} {format_fraction(self.rhs)} "
                f"margin {format_fraction(self.margin)} [{state}]")


@dataclass(frozen=True)
class PieceDiagnostic:
    """Chemicality of one perturbed piece on its own after translation."""

    equation: int
    piece: int
    kind: PieceKind
    chemical: bool
    failing: tuple[Monomial, ...]
    constant: Fraction


@dataclass(frozen=True)
class QcmReport:
    plan: QcmPlan | None
    perturbed: PolySystem
    translated: PolySystem
    rescaled: PolySystem
    chemical: bool
    violations: tuple[tuple[int, Monomial], ...]
    checks: tuple[ConstraintCheck, ...] = ()
    pieces: tuple[PieceDiagnostic, ...] = ()
    notes: tuple[str, ...] = ()

    @property
    def system(self) -> PolySystem:
        return self.rescaled

    @property
    def constraints_ok(self) -> bool:
        return all(c.satisfied for c in self.checks)

    def margin_table(self) -> str:
        lines = ["constraint margins:"]
        lines += ["  " + c.describe() for c in self.checks] or ["  (none)"]
        lines.append("piece chemicality after translation:")
        for d in self.pieces:
            tag = "chemical" if d.chemical else "not chemical"
            lines.append(f"  eq {d.equation + 1} piece {d.piece + 1} ({d.kind.value}): {tag}, "
                         f"translated constant {format_fraction(d.constant)}")
        lines.append(f"output chemical: {'yes' if self.chemical else 'no'}")
        for i, m in self.violations:
            lines.append(f"  violation in eq {i + 1}: coeff {format_fraction(m.coeff)} exps {list(m.exps)}")
        for n in self.notes:
            lines.append(f"note: {n}")
        return "\n".join(lines)


def _unit_exps(n: int, *idx: int) -> Exps:
    e = [0] * n
    for i in idx:
        e[i] += 1
    return tuple(e)


def _piece_poly(s: PolySystem, i: int, piece: Piece) -> Poly:
    return s.polys[i].restrict(piece.monomials)


def _check_linear_piece(i: int, p: Poly, kind: PieceKind) -> None:
    n = p.nvars
    if p.degree > 1:
        raise ValueError(f"equation {i}: {kind.value} piece must be linear, got {format_poly(p)}")
    for j in range(n):
        if j != i and p.coeff(_unit_exps(n, j)) < 0:
            raise ValueError(f"equation {i}: {kind.value} piece has a negative off-diagonal "
                             f"linear coefficient on variable {j + 1}")


def _quadratic_parts(i: int, q: Poly):
    """Split the quadratic part of equation ``i``'s piece into its coefficients."""
    n = q.nvars
    beta: dict[int, Fraction] = {}
    gamma: dict[int, Fraction] = {}
    delta: dict[tuple[int, int], Fraction] = {}
    for e, c in q.items():
        if sum(e) != 2:
            continue
        idx = [j for j in range(n) for _ in range(e[j])]
        j, k = idx
        if j == k:
            beta[j] = c
        elif i in (j, k):
            gamma[k if j == i else j] = c
        else:
            delta[(j, k)] = c
    return beta, gamma, delta


def _check_quadratic_piece(i: int, q: Poly) -> None:
    if q.degree > 2:
        raise ValueError(f"equation {i}: quadratic piece has degree {q.degree}")
    beta, gamma, delta = _quadratic_parts(i, q)
    bad = [f"x{j + 1}^2" for j, c in beta.items() if c < 0]
    bad += [f"x{i + 1} x{j + 1}" for j, c in gamma.items() if c > 0]
    bad += [f"x{j + 1} x{k + 1}" for (j, k), c in delta.items() if c < 0]
    if bad:
        raise ValueError(f"equation {i}: quadratic piece breaks the sign pattern at {', '.join(bad)}")


def _quadratic_constraints(i: int, k: int, q: Poly, a: Sequence[Fraction]) -> list[ConstraintCheck]:
    beta, gamma, delta = _quadratic_parts(i, q)
    J = sorted(({j for j in beta if j != i} | set(gamma) | {v for pair in delta for v in pair}) - {i})

    def d(j: int, l: int) -> Fraction:
        return delta.get((min(j, l), max(j, l)), Fraction(0))

    checks = [ConstraintCheck(i, k, "own square dominates cross terms",
                              beta.get(i, Fraction(0)) * a[i],
                              sum((-gamma.get(j, Fraction(0)) * a[j] for j in J), Fraction(0)),
                              strict=False)]
    for j in J:
        checks.append(ConstraintCheck(
            i, k, f"cross term x{i + 1} x{j + 1} dominates",
            -gamma.get(j, Fraction(0)) * a[i],
            2 * beta.get(j, Fraction(0)) * a[j] + sum((d(j, l) * a[l] for l in J if l != j), Fraction(0)),
            strict=False))
    return checks


def _perturbation(s: PolySystem, i: int, k: int, piece: Piece, eps: Fraction, mu: Fraction,
                  a: Sequence[Fraction]) -> tuple[Poly, list[ConstraintCheck]]:
    n = s.dim
    p = _piece_poly(s, i, piece)
    xi = Poly.var(n, i)
    if piece.kind is PieceKind.UNIVERSAL:
        return xi * p * (mu / a[i]), []
    if piece.kind is PieceKind.LINEAR_QUAD:
        _check_linear_piece(i, p, piece.kind)
        return xi * xi * eps, []
    if piece.kind is PieceKind.LINEAR_DAMP:
        _check_linear_piece(i, p, piece.kind)
        alpha_ii = p.coeff(_unit_exps(n, i))
        if alpha_ii > 0:
            raise ValueError(f"equation {i}: linear-damp piece needs a non-positive diagonal coefficient")
        A = 1 if alpha_ii == 0 else 0
        rhs = sum((p.coeff(_unit_exps(n, j)) * a[j] for j in range(n) if j != i), Fraction(0))
        check = ConstraintCheck(i, k, "damping dominates inflow", (-alpha_ii + A * eps) * a[i], rhs, strict=True)
        return xi * (-A * eps), [check]
    # QUADRATIC
    fill = piece.fill if piece.fill is not None else Poly(n)
    q = p + fill * eps
    _check_quadratic_piece(i, q)
    return fill * eps, _quadratic_constraints(i, k, q, a)


def verify_chemical_under_translation(s: PolySystem, T: Sequence) -> tuple[bool, list[tuple[int, Monomial]]]:
    return is_chemical(apply_affine(s, AffineMap.translation(T)))


def execute_plan(plan: QcmPlan) -> QcmReport:
    s = plan.base
    n = s.dim
    eps, mu, a = plan.epsilon, plan.mu, plan.a
    shift = AffineMap.translation(plan.shift)
    added = [Poly(n) for _ in range(n)]
    checks: list[ConstraintCheck] = []
    diags: list[PieceDiagnostic] = []
    for i, pieces in enumerate(plan.pieces):
        for k, piece in enumerate(pieces):
            pert, cks = _perturbation(s, i, k, piece, eps, mu, a)
            added[i] = added[i] + pert
            checks += cks
            # piece on its own, translated: its equation-i chemicality
            local = [Poly(n)] * n
            local[i] = _piece_poly(s, i, piece) + pert
            moved = apply_affine(PolySystem.from_polys(local, s.var_names), shift)
            failing = tuple(m for m in moved.eqs[i] if not is_chemical_monomial(m, i))
            diags.append(PieceDiagnostic(i, k, piece.kind, not failing, failing,
                                         moved.polys[i].coeff((0,) * n)))
    perturbed = PolySystem.from_polys([f + d for f, d in zip(s.polys, added)], s.var_names)
    translated = apply_affine(perturbed, shift)
    rescaled = translated
    if plan.post_scale is not None:
        rescaled = apply_affine(translated, AffineMap.scaling(plan.post_scale))
    ok, violations = is_chemical(rescaled)
    notes = list(plan.notes)
    for c in checks:
        if not c.satisfied:
            notes.append(f"constraint not met: {c.describe()}")
    return QcmReport(plan, perturbed, translated, rescaled, ok, tuple(violations),
                     tuple(checks), tuple(diags), tuple(notes))


def universal_qcm(s: PolySystem, a: Sequence, mu) -> QcmReport:
    """Perturb every equation by ``(mu / a_i) x_i f_i`` and translate by ``a / mu``."""
    a = tuple(as_fraction(v) for v in a)
    mu = as_fraction(mu)
    if mu <= 0 or len(a) != s.dim or any(v <= 0 for v in a):
        raise ValueError("universal QCM needs mu > 0 and a strictly positive vector a")
    pieces = tuple((Piece(PieceKind.UNIVERSAL, tuple(m.exps for m in eq)),) if eq else ()
                   for eq in s.eqs)
    # epsilon plays no role in the universal map
    return execute_plan(QcmPlan(s, pieces, Fraction(1), mu, a))


# -- quadratic systems: leading-monomial normalisation and case plans --------

LEADING_FORMS = ("own-square", "own-cross", "other-square", "other-cross")


def _classify(e: Exps, i: int) -> tuple[str, tuple[int, ...]] | None:
    if sum(e) != 2:
        return None
    idx = [j for j in range(len(e)) for _ in range(e[j])]
    j, k = idx
    if j == k:
        return ("own-square", ()) if j == i else ("other-square", (j,))
    if i in (j, k):
        return "own-cross", (k if j == i else j,)
    return "other-cross", (j, k)


def _target_monomial(s: PolySystem) -> tuple[str, Exps] | None:
    """Leading monomial of equation 1 already in a target form, if any."""
    wanted = {"own-square": 1, "own-cross": -1, "other-square": 1, "other-cross": 1}
    for form in LEADING_FORMS:
        for m in s.eqs[0]:
            c = _classify(m.exps, 0)
            if c and c[0] == form and (m.coeff > 0) == (wanted[form] > 0):
                return form, m.exps
    return None


def normalize_leading(s: PolySystem, prefer: str | None = None) -> tuple[PolySystem, AffineMap]:
    """Permute and reflect so equation 1 holds +x1^2, -x1 xj, +xj^2 or +xj xk.

    Without ``prefer`` the system is left alone when equation 1 already has
    such a monomial; otherwise the first quadratic monomial found in the order
    own-square, own-cross, other-square, other-cross (equations scanned in
    order) is moved to equation 1 as ``x1^2``, ``x1 x2``, ``x2^2`` or
    ``x2 x3`` and reflections fix its sign.  ``prefer`` forces one form.
    """
    if s.degree != 2:
        raise ValueError("normalize_leading needs a quadratic system (degree exactly 2)")
    n = s.dim
    if prefer is None and _target_monomial(s) is not None:
        return s, AffineMap.identity(n)
    forms = (prefer,) if prefer is not None else LEADING_FORMS
    if prefer is not None and prefer not in LEADING_FORMS:
        raise ValueError(f"unknown leading form {prefer!r}; choose from {LEADING_FORMS}")
    for form in forms:
        for i, eq in enumerate(s.eqs):
            for m in eq:
                c = _classify(m.exps, i)
                if c is None or c[0] != form:
                    continue
                first = [i] + list(c[1])
                perm = first + [j for j in range(n) if j not in first]
                permute = AffineMap.permutation(perm)
                t = apply_affine(s, permute)
                coeff = t.polys[0].coeff(_classify_target_exps(form, n))
                reflect: list[int] = []
                if form in ("own-square", "other-square") and coeff < 0:
                    reflect = [0]
                elif form == "own-cross" and coeff > 0:
                    reflect = [1]
                elif form == "other-cross" and coeff < 0:
                    reflect = [1]
                full = permute.then(AffineMap.reflection(n, *reflect)) if reflect else permute
                return apply_affine(s, full), full
    raise ValueError(f"no quadratic monomial of form {prefer!r} found")


def _classify_target_exps(form: str, n: int) -> Exps:
    return {"own-square": _unit_exps(n, 0, 0), "own-cross": _unit_exps(n, 0, 1),
            "other-square": _unit_exps(n, 1, 1), "other-cross": _unit_exps(n, 1, 2)}[form]


def quadratic_case_plan(s: PolySystem, epsilon, mu, a: Sequence) -> QcmPlan:
    """Splitting that keeps one quadratic monomial of equation 1 quadratic.

    Equation 1's designated monomial ``m`` plus a fill forms a quadratic
    piece; every other monomial is treated by the universal map.  ``a_1`` is
    raised, if necessary, until the quadratic-piece constraints hold.
    """
    epsilon = as_fraction(epsilon)
    mu = as_fraction(mu)
    a = [as_fraction(v) for v in a]
    n = s.dim
    found = _target_monomial(s)
    if found is None:
        raise ValueError("equation 1 holds no leading monomial of a target form; run normalize_leading first")
    form, m_exps = found
    _, extra = _classify(m_exps, 0)
    x = [Poly.var(n, j) for j in range(n)]
    if form == "own-square":
        fill = None
    elif form == "own-cross":
        fill = x[0] * x[0]
    elif form == "other-square":
        fill = x[0] * x[0] - x[0] * x[extra[0]]
    else:
        fill = x[0] * x[0] - x[0] * x[extra[0]] - x[0] * x[extra[1]]
    q = s.polys[0].restrict([m_exps]) + (fill * epsilon if fill is not None else Poly(n))
    notes = []
    needed = _a1_lower_bound(q, a, n)
    if needed > a[0]:
        notes.append(f"a1 raised from {format_fraction(a[0])} to {format_fraction(needed)} "
                     f"to satisfy the {form} case constraints")
        a[0] = needed
    pieces = []
    for i, eq in enumerate(s.eqs):
        rest = tuple(mm.exps for mm in eq if not (i == 0 and mm.exps == m_exps))
        row = []
        if i == 0:
            row.append(Piece(PieceKind.QUADRATIC, (m_exps,), fill))
        if rest:
            row.append(Piece(PieceKind.UNIVERSAL, rest))
        pieces.append(tuple(row))
    return QcmPlan(s, tuple(pieces), epsilon, mu, tuple(a), None, tuple(notes))


def _a1_lower_bound(q: Poly, a: Sequence[Fraction], n: int) -> Fraction:
    """Smallest a_1 for which every quadratic-piece constraint of equation 1 holds."""
    bound = Fraction(0)
    trial = list(a)
    trial[0] = Fraction(1)
    for c in _quadratic_constraints(0, 0, q, trial):
        # each lhs is linear in a_1 with no a_1 on the rhs
        if c.rhs <= 0:
            continue
        if c.lhs <= 0:
            raise ValueError(f"constraint '{c.name}' cannot be met by raising a1")
        bound = max(bound, c.rhs / c.lhs)
    return bound


# -- plan files ----------------------------------------------------------------

def _poly_from_terms(n: int, terms, loc: str) -> Poly:
    if not isinstance(terms, list):
        raise SystemFormatError("fill must be a list of monomials", loc)
    acc = {}
    for k, t in enumerate(terms):
        if not isinstance(t, dict) or "coeff" not in t or "exps" not in t:
            raise SystemFormatError("monomial needs 'coeff' and 'exps'", f"{loc}[{k}]")
        e = tuple(t["exps"])
        if len(e) != n:
            raise SystemFormatError(f"exps must have length {n}", f"{loc}[{k}].exps")
        acc[e] = acc.get(e, Fraction(0)) + as_fraction(t["coeff"])
    return Poly(n, acc)


def plan_from_dict(doc: Mapping, resolve_catalog=None) -> QcmPlan:
    """Build a plan from its JSON form.

    The base system is either ``"system": {...}`` inline or ``"catalog": id``;
    catalog lookups go through ``resolve_catalog(id) -> PolySystem``.
    """
    if not isinstance(doc, Mapping):
        raise SystemFormatError("plan must be an object", "$")
    if "system" in doc:
        base = system_from_dict(doc["system"])
    elif "catalog" in doc:
        if resolve_catalog is None:
            from .catalog import base_system
            resolve_catalog = base_system
        try:
            base = resolve_catalog(doc["catalog"])
        except KeyError as exc:
            raise SystemFormatError(f"unknown catalog id {doc['catalog']!r}", "$.catalog") from exc
    else:
        raise SystemFormatError("plan needs 'system' or 'catalog'", "$")
    n = base.dim
    for key in ("epsilon", "mu", "a", "pieces"):
        if key not in doc:
            raise SystemFormatError(f"missing field '{key}'", "$")
    pieces_doc = doc["pieces"]
    if not isinstance(pieces_doc, list) or len(pieces_doc) != n:
        raise SystemFormatError(f"pieces must list {n} equations", "$.pieces")
    pieces = []
    for i, row in enumerate(pieces_doc):
        out = []
        for k, pd in enumerate(row):
            loc = f"$.pieces[{i}][{k}]"
            try:
                kind = PieceKind(pd["kind"])
            except (KeyError, ValueError, TypeError):
                raise SystemFormatError(f"kind must be one of {[p.value for p in PieceKind]}", loc) from None
            mons = pd.get("monomials")
            if not isinstance(mons, list) or not all(isinstance(e, list) and len(e) == n for e in mons):
                raise SystemFormatError(f"monomials must be exponent vectors of length {n}", loc + ".monomials")
            fill = _poly_from_terms(n, pd["fill"], loc + ".fill") if "fill" in pd else None
            out.append(Piece(kind, tuple(tuple(e) for e in mons), fill))
        pieces.append(tuple(out))
    try:
        return QcmPlan(base, tuple(pieces), doc["epsilon"], doc["mu"], tuple(doc["a"]),
                       tuple(doc["post_scale"]) if doc.get("post_scale") is not None else None)
    except (TypeError, ZeroDivisionError) as exc:
        raise SystemFormatError(str(exc), "$") from None


def plan_to_dict(plan: QcmPlan) -> dict:
    doc = {
        "system": system_to_dict(plan.base),
        "epsilon": format_fraction(plan.epsilon),
        "mu": format_fraction(plan.mu),
        "a": [format_fraction(v) for v in plan.a],
        "pieces": [[_piece_to_dict(p) for p in row] for row in plan.pieces],
    }
    if plan.post_scale is not None:
        doc["post_scale"] = [format_fraction(v) for v in plan.post_scale]
    return doc


def _piece_to_dict(p: Piece) -> dict:
    d = {"kind": p.kind.value, "monomials": [list(e) for e in p.monomials]}
    if p.fill is not None:
        d["fill"] = [{"coeff": format_fraction(c), "exps": list(e)} for e, c in p.fill.items()]
    return d


def load_plan(path: str | Path, resolve_catalog=None) -> QcmPlan:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFormatError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return plan_from_dict(doc, resolve_catalog)
