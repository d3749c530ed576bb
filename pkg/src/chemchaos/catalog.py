"""Built-in systems, parameter formulas, initial conditions and construction plans.

Every constant is an exact rational.  Parametric entries take ``(eps, mu)``;
the four chemical constructions also carry the splitting plan that produces
them from their base system, so the closed-form coefficients can be checked
against an actual execution of the map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as F
from typing import Callable

from .polysys import AffineMap, Poly, PolySystem, as_fraction, variables
from .qcm import Piece, PieceKind, QcmPlan

Params = tuple[F, F]


@dataclass(frozen=True)
class Expected:
    complexity: tuple[int, ...]
    chemical: bool
    crn_canonical: tuple[int, ...] | None = None
    crn_fused: tuple[int, ...] | None = None


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    description: str
    provenance: str
    build: Callable[[F, F], PolySystem]
    expected: Expected
    parametric: bool = False
    default_params: Params | None = None
    initial_condition: Callable[[F, F], tuple[F, ...]] | None = None
    plan: Callable[[F, F], QcmPlan] | None = None
    base_id: str | None = None
    perturbed_id: str | None = None
    crn_text: dict = field(default_factory=dict)

    def system(self, eps=None, mu=None) -> PolySystem:
        if self.parametric:
            if eps is None or mu is None:
                if self.default_params is None:
                    raise ValueError(f"{self.id} needs eps and mu")
                eps, mu = self.default_params
            eps, mu = as_fraction(eps), as_fraction(mu)
            if eps <= 0 or mu <= 0:
                raise ValueError("eps and mu must be positive")
            return self.build(eps, mu)
        return self.build(F(1), F(1))

    def ic(self, eps=None, mu=None) -> tuple[F, ...]:
        if self.initial_condition is None:
            raise ValueError(f"{self.id} has no stored initial condition")
        if eps is None or mu is None:
            eps, mu = self.default_params or (F(1), F(1))
        return self.initial_condition(as_fraction(eps), as_fraction(mu))


def _sys(polys, names=("x", "y", "z")) -> PolySystem:
    return PolySystem.from_polys(polys, names)


x, y, z = variables(3)
ONE = Poly.const(3, 1)


def _exps(*mons: Poly) -> tuple[tuple[int, ...], ...]:
    out = []
    for m in mons:
        (e, _), = m.items()
        out.append(e)
    return tuple(out)


# -- polynomial (non-chemical) systems -----------------------------------------

def rossler(_e=None, _m=None) -> PolySystem:
    return _sys([F(1, 5) - F(57, 10) * x + x * y, -x - z, y + z / 5])


def rossler_linear_part(_e=None, _m=None) -> PolySystem:
    return _sys([F(1, 5) - F(57, 10) * x, x + z, -y + z / 5])


def rossler_reflected(_e=None, _m=None) -> PolySystem:
    return _sys([F(1, 5) - F(57, 10) * x - x * y, x + z, -y + z / 5])


def willamowski_rossler(_e=None, _m=None) -> PolySystem:
    return _sys([30 * x - x * x / 2 - x * y - x * z, F(33, 2) * y - y * y / 2 - x * y, -10 * z + x * z])


def sprott_p_perm(_e=None, _m=None) -> PolySystem:
    return _sys([-y + x * x, F(27, 10) * x + z, x + y])


def sprott_c_variant(_e=None, _m=None) -> PolySystem:
    return _sys([-1 + y * y, -x * z, y - z])


def se17_variant(_e=None, _m=None) -> PolySystem:
    return _sys([F(57, 100) - F(31, 10) * z - x * y / 5 - F(3, 10) * x * z, -y - z, x])


# perturbed systems (before translation) at the construction's choice of a

def rossler_reflected_perturbed(eps: F, mu: F) -> PolySystem:
    b, c = 1 / eps, F(1)
    return _sys([F(1, 5) - F(57, 10) * x - x * y + eps * x * x,
                 x + z - eps * y + (mu / b) * x * y,
                 -y + z / 5 + (mu / c) * z * (-y + z / 5)])


def sprott_p_perturbed(eps: F, mu: F) -> PolySystem:
    a, c = F(1), 1 / eps
    return _sys([-y + x * x - (mu / a) * x * y,
                 F(27, 10) * x + z - eps * y,
                 x + y - eps * z + (mu / c) * y * z])


def sprott_c_perturbed(eps: F, mu: F) -> PolySystem:
    b = F(1)
    return _sys([-1 + y * y + eps * (x * x - x * y), -x * z - (mu / b) * x * y * z, y - z])


def se17_perturbed(eps: F, mu: F, b=F(2), c=F(2)) -> PolySystem:
    b, c = as_fraction(b), as_fraction(c)
    return _sys([F(57, 100) - F(31, 10) * z - x * y / 5 - F(3, 10) * x * z + eps * x * x,
                 -y - z - (mu / b) * y * z,
                 x + (mu / c) * x * z])


def se17_perturbed_equilibrium(mu, b=F(2)) -> tuple[F, F, F]:
    """The equilibrium of the perturbed hidden-chaos system that continues the original one."""
    mu, b = as_fraction(mu), as_fraction(b)
    return (F(0), -57 / (310 + 57 * mu / b), F(57, 310))


# -- chemical constructions: closed-form coefficients ------------------------------

def chemical_rossler_params(eps: F, mu: F) -> tuple[F, ...]:
    return (57 / (10 * eps) + eps * mu / 5,
            1 / (eps * mu) + F(57, 10),
            1 / eps,
            1 / mu,
            F(1),
            1 / eps + eps,
            1 / eps - F(1, 5),
            mu / (5 * eps) - mu / 25,
            mu)


def chemical_rossler(eps: F, mu: F) -> PolySystem:
    a1, a2, a3, a4, a5, a6, a7, a8, a9 = chemical_rossler_params(eps, mu)
    return _sys([a1 - a2 * x + a3 * y + a4 * x * x - a5 * x * y,
                 -a6 * y + a7 * z + a5 * x * y,
                 a7 * z + a8 * z * z - a9 * y * z])


def one_wing_params(eps: F, mu: F) -> tuple[F, ...]:
    a2 = 1 / eps**2 + 27 / (10 * eps) - 2 / mu
    return (1 / (mu**2 * abs(a2)),
            a2,
            abs(a2),
            F(27, 10) * mu,
            eps,
            F(10, 27),
            1 / eps + F(27, 10) + eps,
            F(27, 10) * eps * mu)


def cds_one_wing(eps: F, mu: F) -> PolySystem:
    a1, a2, a3, a4, a5, a6, a7, a8 = one_wing_params(eps, mu)
    return _sys([a1 + a2 * x + a3 * x * x - a4 * x * y,
                 abs(a2) * x - a5 * y + a6 * z,
                 abs(a2) * x - a7 * z + a8 * y * z])


def two_wing_params(eps: F, mu: F) -> tuple[F, ...]:
    return (4 / (eps * mu**2) - 1 / mu**2 - 1,
            4 / mu - eps / mu,
            eps,
            1 / eps**2,
            F(1),
            2 / (eps * mu),
            mu / eps,
            mu**2 / 2,
            F(1))


def cds_two_wing(eps: F, mu: F) -> PolySystem:
    a1, a2, a3, a4, a5, a6, a7, a8, a9 = two_wing_params(eps, mu)
    return _sys([a1 - a2 * x + a3 * x * x + a4 * y * y - a5 * x * y,
                 -a6 * y + a5 * x * y + a7 * y * z - a8 * x * y * z,
                 a6 * y - a9 * z])


def hidden_params(eps: F, mu: F) -> tuple[F, ...]:
    return (2 / mu,
            1 / mu,
            40 / (620 * eps * mu + 57 * eps * mu**2),
            (3 - 31 * eps * mu) / (6 * eps),
            eps * (620 + 57 * mu) / 200,
            F(1, 5),
            mu * (620 + 57 * mu) / 400,
            mu**2 * (620 + 57 * mu) / 240,
            1 / (2 * eps))


def cds_hidden(eps: F, mu: F) -> PolySystem:
    a1, a2, a3, a4, a5, a6, a7, a8, a9 = hidden_params(eps, mu)
    return _sys([a1 - a2 * x + a3 * y + a4 * z + a5 * x * x - a6 * x * y - a7 * x * z,
                 a1 - a8 * y * z,
                 -a9 * z + a7 * x * z])


# -- construction plans ----------------------------------------------------------------

def _piece(kind: PieceKind, *mons: Poly, fill: Poly | None = None) -> Piece:
    return Piece(kind, _exps(*mons), fill)


U, LD, QC = PieceKind.UNIVERSAL, PieceKind.LINEAR_DAMP, PieceKind.QUADRATIC


def chemical_rossler_plan(eps: F, mu: F) -> QcmPlan:
    pieces = (
        (_piece(QC, x * y, fill=x * x), _piece(LD, ONE, x)),
        (_piece(LD, z), _piece(U, x)),
        (_piece(U, y, z),),
    )
    return QcmPlan(rossler_reflected(), pieces, eps, mu, (1 / eps**2, 1 / eps, F(1)),
                   (1 / (eps * mu), F(1), 1 / eps - F(1, 5)))


def one_wing_plan(eps: F, mu: F) -> QcmPlan:
    pieces = (
        (_piece(QC, x * x), _piece(U, y)),
        (_piece(LD, x, z),),
        (_piece(LD, x), _piece(U, y)),
    )
    a = (F(1), 1 / eps**2 + 27 / (10 * eps), 1 / eps)
    scale_x = abs(1 / eps**2 + 27 / (10 * eps) - 2 / mu)
    return QcmPlan(sprott_p_perm(), pieces, eps, mu, a, (scale_x, F(27, 10), F(1)))


def two_wing_plan(eps: F, mu: F) -> QcmPlan:
    pieces = (
        (_piece(QC, ONE, y * y, fill=x * x - x * y),),
        (_piece(U, x * z),),
        (_piece(LD, y, z),),
    )
    return QcmPlan(sprott_c_variant(), pieces, eps, mu, (2 / eps, F(1), F(1)), (F(1), 1 / eps, mu / 2))


def hidden_plan(eps: F, mu: F, b=F(2), c=F(2)) -> QcmPlan:
    """Construction for the hidden-chaos system; ``b = c`` keeps the equilibrium unique.

    With ``b != c`` the plan is still executed but no rescaling is attached,
    since the closed-form scale factors assume ``b = c = 2``.
    """
    b, c = as_fraction(b), as_fraction(c)
    pieces = (
        (_piece(QC, ONE, z, x * y, x * z, fill=x * x),),
        (_piece(LD, y), _piece(U, z)),
        (_piece(U, x),),
    )
    notes = ()
    if b == c:
        notes = (f"b = c = {b}: the perturbed system has a unique equilibrium, "
                 f"(0, {-57 / (310 + 57 * mu / b)}, 57/310) before translation",)
    post = None
    if b == c == 2:
        k = F(31, 10) + 57 * mu / 200
        post = (k, F(1), F(5, 3) * mu * k)
    return QcmPlan(se17_variant(), pieces, eps, mu, (1 / eps, b, c), post, notes)


# -- figure initial conditions (closed forms) -----------------------------------------------

def chemical_rossler_ic(eps: F, mu: F) -> tuple[F, ...]:
    return (eps * mu * (5 + 1 / (eps**2 * mu)), -5 + 1 / (eps * mu), 5 * eps / (5 - eps) * (5 + 1 / mu))


def one_wing_ic(eps: F, mu: F) -> tuple[F, ...]:
    a2 = abs(1 / eps**2 + F(27, 10) / eps - 2 / mu)
    return ((F(1, 2) + 1 / mu) / a2,
            F(10, 27) * (1 / (eps**2 * mu) + F(27, 10) / (eps * mu)),
            1 / (eps * mu))


def two_wing_ic(eps: F, mu: F) -> tuple[F, ...]:
    return (2 / (eps * mu), eps / mu, 2 / mu * (-1 + 1 / mu))


def hidden_ic(eps: F, mu: F) -> tuple[F, ...]:
    k = F(31, 10) + F(57, 200) * mu
    return ((-5 + 1 / (eps * mu)) / k, 2 / mu, F(3, 5) / mu / k * (F(15, 2) + 2 / mu))


def _const_ic(*vals) -> Callable[[F, F], tuple[F, ...]]:
    values = tuple(as_fraction(v) for v in vals)
    return lambda _e, _m: values


WR_CANONICAL = """\
X --30--> 2 X
2 X --1/2--> X
X + Y --1--> Y
X + Z --1--> Z
Y --33/2--> 2 Y
X + Y --1--> X
2 Y --1/2--> Y
Z --10--> 0
X + Z --1--> X + 2 Z"""

WR_FUSED = """\
X --30--> 2 X
2 X --1/2--> X
X + Y --1--> 0
X + Z --1--> 2 Z
Y --33/2--> 2 Y
2 Y --1/2--> Y
Z --10--> 0"""


_ENTRIES = [
    CatalogEntry("rossler", "Rossler system with one quadratic term, permuted form",
                 "Rossler (1976), variables permuted", rossler, Expected((7, 1), False),
                 initial_condition=_const_ic(5, -5, 5)),
    CatalogEntry("rossler-linearpart", "linear part of the reflected Rossler system",
                 "reflected Rossler system with its quadratic term dropped", rossler_linear_part,
                 Expected((6,), False)),
    CatalogEntry("rossler-reflected", "Rossler system reflected in y",
                 "rossler entry under y -> -y", rossler_reflected, Expected((7, 1), False),
                 initial_condition=_const_ic(5, -5, 5), perturbed_id="rossler-reflected-perturbed"),
    CatalogEntry("wr", "Willamowski-Rossler chemical system, permuted",
                 "minimal Willamowski-Rossler system with y and z exchanged", willamowski_rossler,
                 Expected((9, 6), True, (9, 6), (7, 4)),
                 crn_text={"canonical": WR_CANONICAL, "fused": WR_FUSED}),
    CatalogEntry("sprott-p-perm", "Sprott system P with x and y exchanged",
                 "Sprott (1994) table of simple chaotic flows, case P", sprott_p_perm, Expected((6, 1), False),
                 initial_condition=_const_ic(F(1, 2), 0, 0), perturbed_id="sprott-p-perm-perturbed"),
    CatalogEntry("sprott-c-variant", "Sprott system C, permuted and reflected",
                 "Sprott (1994) case C under y <-> z, x <-> y, x -> -x", sprott_c_variant, Expected((5, 2), False),
                 initial_condition=_const_ic(0, 0, -1), perturbed_id="sprott-c-variant-perturbed"),
    CatalogEntry("se17-variant", "hidden-attractor system SE17, permuted and reflected",
                 "Molaie et al. (2013) case SE17 under x <-> z, y -> -y", se17_variant, Expected((7, 2), False),
                 initial_condition=_const_ic(-5, 0, F(15, 2)), perturbed_id="se17-variant-perturbed"),
    CatalogEntry("rossler-reflected-perturbed", "perturbed reflected Rossler system, a = (1/eps^2, 1/eps, 1)",
                 "chemical-rossler construction before translation", rossler_reflected_perturbed,
                 Expected((12, 5), False), parametric=True, default_params=(F(1, 1000), F(1, 100)),
                 initial_condition=_const_ic(5, -5, 5)),
    CatalogEntry("sprott-p-perm-perturbed", "perturbed Sprott P variant, a = 1, c = 1/eps",
                 "cds-one-wing construction before translation", sprott_p_perturbed,
                 Expected((10, 3), False), parametric=True, default_params=(F(1, 100), F(1, 100)),
                 initial_condition=_const_ic(F(1, 2), 0, 0)),
    CatalogEntry("sprott-c-variant-perturbed", "perturbed Sprott C variant, b = 1",
                 "cds-two-wing construction before translation", sprott_c_perturbed,
                 Expected((8, 4, 1), False), parametric=True, default_params=(F(1, 1000), F(1, 100)),
                 initial_condition=_const_ic(0, 0, -1)),
    CatalogEntry("se17-variant-perturbed", "perturbed SE17 variant, b = c = 2",
                 "cds-hidden construction before translation", se17_perturbed,
                 Expected((10, 5), False), parametric=True, default_params=(F(1, 10**5), F(1, 10**5)),
                 initial_condition=_const_ic(-5, 0, F(15, 2))),
    CatalogEntry("chemical-rossler", "quadratic chemical Rossler system",
                 "reflected Rossler through a quadratic-case map with fusion rescaling", chemical_rossler,
                 Expected((11, 5), True, (11, 5), (9, 4)), parametric=True,
                 default_params=(F(1, 1000), F(1, 100)), initial_condition=chemical_rossler_ic,
                 plan=chemical_rossler_plan, base_id="rossler-reflected",
                 perturbed_id="rossler-reflected-perturbed"),
    CatalogEntry("cds-one-wing", "quadratic chemical system with one-wing chaos",
                 "Sprott P variant through a quadratic-case map with fusion rescaling", cds_one_wing,
                 Expected((10, 3), True, (10, 3), (8, 3)), parametric=True,
                 default_params=(F(1, 100), F(1, 100)), initial_condition=one_wing_ic,
                 plan=one_wing_plan, base_id="sprott-p-perm", perturbed_id="sprott-p-perm-perturbed"),
    CatalogEntry("cds-two-wing", "cubic chemical system with two-wing chaos",
                 "Sprott C variant through a quadratic-case map with fusion rescaling", cds_two_wing,
                 Expected((11, 5, 1), True, (11, 5, 1), (9, 4, 1)), parametric=True,
                 default_params=(F(1, 1000), F(1, 100)), initial_condition=two_wing_ic,
                 plan=two_wing_plan, base_id="sprott-c-variant", perturbed_id="sprott-c-variant-perturbed"),
    CatalogEntry("cds-hidden", "quadratic chemical system with hidden chaos and a unique stable equilibrium",
                 "SE17 variant through a map preserving equilibrium uniqueness", cds_hidden,
                 Expected((11, 5), True, (11, 5), (9, 4)), parametric=True,
                 default_params=(F(1, 10**5), F(1, 10**5)), initial_condition=hidden_ic,
                 plan=hidden_plan, base_id="se17-variant", perturbed_id="se17-variant-perturbed"),
]

CATALOG: dict[str, CatalogEntry] = {e.id: e for e in _ENTRIES}
CDS_IDS = ("chemical-rossler", "cds-one-wing", "cds-two-wing", "cds-hidden")


def ids() -> list[str]:
    return list(CATALOG)


def get(entry_id: str) -> CatalogEntry:
    try:
        return CATALOG[entry_id]
    except KeyError:
        raise KeyError(f"unknown catalog id {entry_id!r}; known ids: {', '.join(CATALOG)}") from None


def instantiate(entry_id: str, eps=None, mu=None) -> PolySystem:
    return get(entry_id).system(eps, mu)


def base_system(entry_id: str) -> PolySystem:
    """System for plan files: non-parametric entries, or parametric ones at default parameters."""
    return get(entry_id).system()


def plan_for(entry_id: str, eps=None, mu=None) -> QcmPlan:
    e = get(entry_id)
    if e.plan is None:
        raise KeyError(f"{entry_id} has no stored construction plan")
    if eps is None or mu is None:
        eps, mu = e.default_params
    return e.plan(as_fraction(eps), as_fraction(mu))


def mapped_ic(entry_id: str, eps=None, mu=None) -> tuple[F, ...]:
    """Figure initial condition obtained by pushing the base system's IC through the plan's map."""
    e = get(entry_id)
    plan = plan_for(entry_id, eps, mu)
    return plan.affine_map()(get(e.base_id).ic())


SPROTT_C = _sys([y * z, x - y, 1 - x * x])
SPROTT_P = _sys([F(27, 10) * y + z, -x + y * y, x + y])
# Sprott C -> sprott-c-variant: exchange y and z, then x and y, then reflect x
SPROTT_C_TO_VARIANT = AffineMap.swap(3, 1, 2).then(AffineMap.swap(3, 0, 1)).then(AffineMap.reflection(3, 0))
SPROTT_P_TO_VARIANT = AffineMap.swap(3, 0, 1)
# standard Rossler (dx = -y - z, dy = x + y/5, dz = 1/5 + z (x - 57/10)) -> rossler: x <-> z then y <-> z
ROSSLER_STANDARD = _sys([-y - z, x + y / 5, F(1, 5) + z * (x - F(57, 10))])
ROSSLER_STANDARD_TO_ROSSLER = AffineMap.swap(3, 0, 2).then(AffineMap.swap(3, 1, 2))


# -- figure bundles -------------------------------------------------------------------------

@dataclass(frozen=True)
class Panel:
    name: str
    entry_id: str
    kind: str  # "trajectory", "lce" or "equilibria"
    params: Params | None = None


@dataclass(frozen=True)
class Figure:
    id: str
    description: str
    panels: tuple[Panel, ...]


def _fig_triplet(ds: str, cds: str, params: Params) -> tuple[Panel, ...]:
    pert = get(cds).perturbed_id
    return (Panel("ds-trajectory", ds, "trajectory"), Panel("ds-lce", ds, "lce"),
            Panel("cds-trajectory", cds, "trajectory", params), Panel("cds-lce", cds, "lce", params),
            Panel("perturbed-trajectory", pert, "trajectory", params), Panel("perturbed-lce", pert, "lce", params))


FIGURES: dict[str, Figure] = {
    "fig1": Figure("fig1", "three-dimensional trajectories of the one-wing, two-wing and hidden chemical systems",
                   (Panel("a-one-wing", "cds-one-wing", "trajectory", (F(1, 100), F(1, 100))),
                    Panel("b-two-wing", "cds-two-wing", "trajectory", (F(1, 1000), F(1, 100))),
                    Panel("c-hidden", "cds-hidden", "trajectory", (F(1, 10**5), F(1, 10**5))))),
    "fig2": Figure("fig2", "chemical Rossler system: reflected, perturbed and chemical versions",
                   (Panel("ds-trajectory", "rossler-reflected", "trajectory"),
                    Panel("ds-lce", "rossler-reflected", "lce"),
                    Panel("perturbed-trajectory", "rossler-reflected-perturbed", "trajectory", (F(1, 1000), F(1, 100))),
                    Panel("perturbed-lce", "rossler-reflected-perturbed", "lce", (F(1, 1000), F(1, 100))),
                    Panel("cds-trajectory", "chemical-rossler", "trajectory", (F(1, 1000), F(1, 100))),
                    Panel("cds-lce", "chemical-rossler", "lce", (F(1, 1000), F(1, 100))))),
    "fig3": Figure("fig3", "one-wing chaos", _fig_triplet("sprott-p-perm", "cds-one-wing", (F(1, 100), F(1, 100)))),
    "fig4": Figure("fig4", "two-wing chaos", _fig_triplet("sprott-c-variant", "cds-two-wing", (F(1, 1000), F(1, 100)))),
    "fig5": Figure("fig5", "hidden chaos with a unique stable equilibrium",
                   _fig_triplet("se17-variant", "cds-hidden", (F(1, 10**5), F(1, 10**5)))
                   + (Panel("ds-equilibria", "se17-variant", "equilibria"),
                      Panel("cds-equilibria", "cds-hidden", "equilibria", (F(1, 10**5), F(1, 10**5))))),
}


def figure(fig_id: str) -> Figure:
    try:
        return FIGURES[fig_id]
    except KeyError:
        raise KeyError(f"unknown figure {fig_id!r}; known: {', '.join(FIGURES)}") from None


def figure_ic(entry_id: str, params: Params | None) -> tuple[F, ...]:
    e = get(entry_id)
    if params is None:
        return e.ic()
    return e.ic(*params)


BASE_BOX_HALF_WIDTH = 10


def search_box(entry_id: str, eps=None, mu=None) -> list[tuple[float, float]]:
    """Equilibrium search box: the cube |x_i| <= 10 for systems in original
    coordinates, its image under the construction map for chemical ones
    (clipped to the non-negative orthant)."""
    e = get(entry_id)
    w = BASE_BOX_HALF_WIDTH
    if e.plan is None:
        return [(-w, w)] * e.system(eps, mu).dim
    amap = plan_for(entry_id, eps, mu).affine_map()
    lo = amap([F(-w)] * amap.dim)
    hi = amap([F(w)] * amap.dim)
    return [(max(0.0, float(min(a, b))), float(max(a, b))) for a, b in zip(lo, hi)]
