import dataclasses
import json
from fractions import Fraction as F

import numpy as np
import pytest

from chemchaos import catalog
from chemchaos.polysys import AffineMap, Poly, PolySystem, apply_affine, complexity, variables
from chemchaos.qcm import (
    Piece,
    PieceKind,
    QcmPlan,
    execute_plan,
    normalize_leading,
    plan_from_dict,
    plan_to_dict,
    quadratic_case_plan,
    universal_qcm,
    verify_chemical_under_translation,
)

x, y, z = variables(3)
ONE = Poly.const(3, 1)
U, LD, LQ, QC = PieceKind.UNIVERSAL, PieceKind.LINEAR_DAMP, PieceKind.LINEAR_QUAD, PieceKind.QUADRATIC


def piece(kind, *mons, fill=None):
    return Piece(kind, tuple(next(iter(m.items()))[0] for m in mons), fill)


def sys3(*polys):
    return PolySystem.from_polys(list(polys), ("x", "y", "z"))


# -- universal map -----------------------------------------------------------------

def test_universal_map_on_linear_rossler_part():
    rep = universal_qcm(catalog.instantiate("rossler-linearpart"), (F(3), F(5), F(2)), F(1, 100))
    assert rep.chemical
    assert complexity(rep.system).label() == "(8,5)"


def test_universal_map_on_zero_system():
    zero = sys3(Poly(3), Poly(3), Poly(3))
    rep = universal_qcm(zero, (1, 1, 1), F(1, 10))
    assert rep.system == zero and rep.chemical


def test_universal_map_lifts_rossler_to_cubic_chemical():
    rep = universal_qcm(catalog.instantiate("rossler"), (1, 1, 1), F(1, 1000))
    assert rep.chemical
    assert complexity(rep.system).by_degree.get(3) == 1
    assert rep.system.degree == 3


@pytest.mark.parametrize("a,mu", [((1, 0, 1), F(1)), ((1, 1, 1), F(0)), ((1, 1), F(1))])
def test_universal_map_rejects_bad_arguments(a, mu):
    with pytest.raises(ValueError):
        universal_qcm(catalog.instantiate("rossler"), a, mu)


def test_universal_map_is_perturbation_then_translation():
    # oracle: perturb by (mu/a_i) x_i f_i by hand, then translate by a/mu
    s = catalog.instantiate("rossler-linearpart")
    a, mu = (F(3), F(5), F(2)), F(1, 100)
    xs = variables(3)
    by_hand = sys3(*[f + (mu / ai) * xi * f for f, ai, xi in zip(s.polys, a, xs)])
    expected = apply_affine(by_hand, AffineMap.translation(tuple(v / mu for v in a)))
    assert universal_qcm(s, a, mu).system == expected


# -- linear splittings --------------------------------------------------------------------

def linear_rossler_plan(a, b, c, eps, mu):
    return QcmPlan(catalog.instantiate("rossler-linearpart"),
                   ((piece(LD, ONE, x),), (piece(LD, x, z),), (piece(U, y, z),)),
                   eps, mu, (a, b, c))


def test_refined_linear_plan_gives_nine_two_system():
    eps, a, c = F(1, 10), F(1), F(2)
    rep = execute_plan(linear_rossler_plan(a, (a + c) / eps + 1, c, eps, F(1, 100)))
    assert rep.chemical and rep.constraints_ok
    assert complexity(rep.system).label() == "(9,2)"


def test_violated_damping_constraint_names_constant_term():
    eps, a, c = F(1, 10), F(1), F(2)
    rep = execute_plan(linear_rossler_plan(a, F(1, 10) * (a + c) / eps, c, eps, F(1, 100)))
    assert not rep.chemical
    assert [(i, m.exps) for i, m in rep.violations] == [(1, (0, 0, 0))]
    failing = [ck for ck in rep.checks if not ck.satisfied]
    assert len(failing) == 1 and failing[0].equation == 1 and "VIOLATED" in failing[0].describe()
    assert "VIOLATED" in rep.margin_table()


def test_translation_check_on_perturbed_linear_part():
    eps, mu, a, c = F(1, 10), F(1, 100), F(1), F(2)
    s = catalog.instantiate("rossler-linearpart")
    perturbed = sys3(s.polys[0], s.polys[1] - eps * y, s.polys[2] + (mu / c) * z * s.polys[2])
    good_b = (a + c) / eps
    assert verify_chemical_under_translation(perturbed, (a / mu, good_b / mu, c / mu))[0]
    ok, bad = verify_chemical_under_translation(perturbed, (a / mu, good_b / 2 / mu, c / mu))
    assert not ok and bad[0][0] == 1


def test_translation_check_on_chemical_system_with_zero_shift():
    assert verify_chemical_under_translation(catalog.instantiate("wr"), (0, 0, 0))[0]


def test_linear_quad_piece_adds_square():
    s = sys3(-x + y, y, z)
    plan = QcmPlan(s, ((piece(LQ, x, y),), (piece(U, y),), (piece(U, z),)), F(1, 4), F(1, 2), (1, 1, 1))
    assert execute_plan(plan).perturbed.polys[0] == -x + y + F(1, 4) * x * x


# -- quadratic splittings --------------------------------------------------------------------

def example_quadratic_plan(a, b, c, eps, mu):
    return QcmPlan(catalog.instantiate("rossler-reflected"),
                   ((piece(QC, x * y, fill=x * x), piece(LD, ONE, x)), (piece(LD, z), piece(U, x)),
                    (piece(U, y, z),)), eps, mu, (a, b, c))


def test_reflected_rossler_plan_matches_displayed_translated_system():
    eps, mu = F(1, 20), F(1, 1000)
    c = F(3)
    b = 2 * c / eps
    a = 2 * b / eps
    rep = execute_plan(example_quadratic_plan(a, b, c, eps, mu))
    # displayed perturbed system
    assert rep.perturbed == sys3(F(1, 5) - F(57, 10) * x - x * y + eps * x * x,
                                 x + z - eps * y + (mu / b) * x * y,
                                 -y + z / 5 + (mu / c) * z * (-y + z / 5))
    # displayed translated system in the shifted variables
    expected = sys3(
        (a / mu**2 * (eps * a - b) + 57 * a / (10 * mu) + F(1, 5)) + ((b - 2 * eps * a) / mu - F(57, 10)) * x
        + (a / mu) * y + eps * x * x - x * y,
        (eps * b - c) / mu - (a / b + eps) * y + z + (mu / b) * x * y,
        (b / c - F(1, 5)) * z + mu / (5 * c) * z * z - (mu / c) * y * z,
    )
    assert rep.translated == expected
    assert rep.chemical
    assert complexity(rep.system).label() == "(12,5)"


def test_case_plan_on_reflected_rossler_keeps_quadratic_degree():
    eps, mu = F(1, 1000), F(1, 100)
    plan = quadratic_case_plan(catalog.instantiate("rossler-reflected"), eps, mu, (1 / eps**2, 1 / eps, 1))
    q = plan.pieces[0][0]
    assert q.kind is QC and q.monomials == ((1, 1, 0),) and q.fill == x * x
    rep = execute_plan(plan)
    assert rep.perturbed.polys[0] - catalog.instantiate("rossler-reflected").polys[0] - eps * x * x \
        == (mu / plan.a[0]) * x * (F(1, 5) - F(57, 10) * x)
    assert rep.chemical
    assert complexity(rep.system).by_degree.get(3, 0) == 0


def test_case_plan_on_sprott_c_variant_uses_square_minus_cross_fill():
    eps, mu = F(1, 1000), F(1, 100)
    plan = quadratic_case_plan(catalog.instantiate("sprott-c-variant"), eps, mu, (2 / eps, 1, 1))
    assert plan.pieces[0][0].fill == x * x - x * y
    rep = execute_plan(plan)
    # the constant goes through the universal remainder
    assert rep.perturbed.polys[0] == -1 + y * y + eps * (x * x - x * y) - (mu / plan.a[0]) * x
    assert rep.chemical


def test_case_plan_on_sprott_p_variant_is_quadratic_chemical():
    rep = execute_plan(quadratic_case_plan(catalog.instantiate("sprott-p-perm"), F(1, 100), F(1, 100), (1, 1, 1)))
    assert rep.chemical and rep.system.degree == 2


def test_case_plan_raises_a1_when_needed():
    s = catalog.instantiate("sprott-c-variant")
    eps = F(1, 10)
    plan = quadratic_case_plan(s, eps, F(1, 100), (F(1, 1000), 1, 1))
    assert plan.a[0] > F(1, 1000) and plan.notes
    rep = execute_plan(plan)
    assert rep.constraints_ok and rep.chemical


def test_quadratic_sign_pattern_enforced():
    s = sys3(x * y, y, z)  # +x1 x2 breaks the own-cross sign rule
    plan = QcmPlan(s, ((piece(QC, x * y),), (piece(U, y),), (piece(U, z),)), F(1, 10), F(1, 10), (1, 1, 1))
    with pytest.raises(ValueError, match="sign pattern"):
        execute_plan(plan)


def test_quadratic_constraint_violation_is_reported():
    eps = F(1, 10)
    s = catalog.instantiate("sprott-c-variant")
    # a1 too small for eps x1^2 to dominate the - eps x1 x2 cross term
    plan = QcmPlan(s, ((piece(QC, ONE, y * y, fill=x * x - x * y),), (piece(U, x * z),), (piece(LD, y, z),)),
                   eps, F(1, 100), (F(1, 2), F(1), F(1, 2)))
    rep = execute_plan(plan)
    assert not rep.constraints_ok
    assert any("cross term" in ck.name and not ck.satisfied for ck in rep.checks)


# -- leading-monomial normalisation ---------------------------------------------------------------

def test_negative_own_square_is_reflected():
    s = sys3(-x * x + y, x, z)
    t, amap = normalize_leading(s)
    assert t.polys[0].coeff((2, 0, 0)) == 1
    assert amap == AffineMap.reflection(3, 0)


def test_already_normal_system_is_untouched():
    s = sys3(y * z - x, x, y)
    t, amap = normalize_leading(s)
    assert t == s and amap == AffineMap.identity(3)


def test_sprott_c_normalises_to_variant():
    t, amap = normalize_leading(catalog.SPROTT_C, prefer="other-square")
    assert t == catalog.instantiate("sprott-c-variant")
    assert apply_affine(catalog.SPROTT_C, catalog.SPROTT_C_TO_VARIANT) == t


def test_sprott_c_has_other_cross_form_already():
    t, amap = normalize_leading(catalog.SPROTT_C)
    assert amap == AffineMap.identity(3)


def test_normalisation_needs_a_quadratic_system():
    with pytest.raises(ValueError):
        normalize_leading(catalog.instantiate("rossler-linearpart"))


def random_quadratic_system(rng, n):
    xs = variables(n)
    monos = [Poly.const(n, 1)] + list(xs) + [xs[j] * xs[k] for j in range(n) for k in range(j, n)]
    polys = []
    for _ in range(n):
        p = Poly(n)
        for m in rng.choice(len(monos), size=rng.integers(2, 5), replace=False):
            c = F(int(rng.integers(-8, 9)), 4) or F(1, 4)
            p = p + c * monos[m]
        polys.append(p)
    if all(p.degree < 2 for p in polys):
        polys[int(rng.integers(n))] += F(-3, 2) * xs[0] * xs[-1]
    return PolySystem.from_polys(polys, tuple(f"x{i + 1}" for i in range(n)))


def test_quadratic_case_pipeline_on_random_systems():
    rng = np.random.default_rng(20260101)
    for _ in range(20):
        n = int(rng.integers(3, 6))
        s = random_quadratic_system(rng, n)
        t, _ = normalize_leading(s)
        eps, mu = F(1, 10), F(1, 100)
        rep = execute_plan(quadratic_case_plan(t, eps, mu, (1,) * n))
        c = complexity(rep.system)
        m2 = complexity(t).by_degree.get(2, 0)
        assert rep.chemical
        assert c.by_degree.get(3, 0) == m2 - 1


# -- stored constructions -----------------------------------------------------------------------------

PARAMS = [(F(1, 1000), F(1, 100)), (F(1, 7), F(3, 11)), (F(1, 100), F(1, 1000))]


@pytest.mark.parametrize("entry_id", catalog.CDS_IDS)
@pytest.mark.parametrize("eps,mu", PARAMS)
def test_stored_plans_reproduce_closed_forms(entry_id, eps, mu):
    e = catalog.get(entry_id)
    rep = execute_plan(e.plan(eps, mu))
    assert rep.system == e.build(eps, mu)
    assert rep.perturbed == catalog.get(e.perturbed_id).build(eps, mu)


@pytest.mark.parametrize("entry_id", catalog.CDS_IDS)
def test_stored_plans_are_quadratic_case(entry_id):
    e = catalog.get(entry_id)
    base = catalog.instantiate(e.base_id)
    out = complexity(execute_plan(e.plan(*e.default_params)).system)
    assert out.by_degree.get(3, 0) <= complexity(base).by_degree.get(2, 0) - 1


def test_hidden_plan_note_requires_equal_weights():
    eps, mu = F(1, 10**5), F(1, 10**5)
    assert any("unique" in n for n in catalog.hidden_plan(eps, mu).notes)
    plan = catalog.hidden_plan(eps, mu, b=F(2), c=F(3))
    assert not any("unique" in n for n in plan.notes)
    rep = execute_plan(plan)
    assert isinstance(rep.chemical, bool)


def test_perturbation_shrinks_linearly_in_mu():
    eps = F(1, 100)
    grid = np.array(np.meshgrid(*[np.linspace(-10, 10, 7)] * 3)).reshape(3, -1).T

    def sup(mu):
        e = catalog.get("cds-one-wing")
        rep = execute_plan(e.plan(eps, mu))
        extra = [f - g for f, g in zip(rep.perturbed.polys, catalog.instantiate("sprott-p-perm").polys)]
        # drop the mu-independent damping terms
        extra = [p - p.restrict([m for m, _ in p.items() if sum(m) == 1]) for p in extra]
        return max(abs(float(p(tuple(pt)))) for p in extra for pt in grid)

    r = sup(F(1, 100)) / sup(F(1, 200))
    assert abs(r - 2) <= 0.2


# -- plan files -----------------------------------------------------------------------------------------

@pytest.mark.parametrize("entry_id", catalog.CDS_IDS)
def test_plan_file_round_trip(entry_id):
    plan = catalog.plan_for(entry_id)
    again = plan_from_dict(json.loads(json.dumps(plan_to_dict(plan))))
    assert execute_plan(again).system == execute_plan(plan).system


def test_plan_file_with_catalog_reference():
    doc = plan_to_dict(catalog.plan_for("cds-two-wing"))
    del doc["system"]
    doc["catalog"] = "sprott-c-variant"
    assert execute_plan(plan_from_dict(doc)).system == catalog.instantiate("cds-two-wing")


def test_overlapping_pieces_rejected():
    with pytest.raises(ValueError, match="overlap"):
        QcmPlan(catalog.instantiate("rossler-linearpart"),
                ((piece(LD, ONE, x), piece(U, x)), (piece(LD, x, z),), (piece(U, y, z),)), 1, 1, (1, 1, 1))


def test_uncovered_monomial_rejected():
    with pytest.raises(ValueError):
        QcmPlan(catalog.instantiate("rossler-linearpart"),
                ((piece(LD, ONE),), (piece(LD, x, z),), (piece(U, y, z),)), 1, 1, (1, 1, 1))


def test_linear_piece_with_negative_inflow_rejected():
    s = sys3(-x - y, y, z)
    plan = QcmPlan(s, ((piece(LD, x, y),), (piece(U, y),), (piece(U, z),)), 1, 1, (1, 1, 1))
    with pytest.raises(ValueError, match="negative off-diagonal"):
        execute_plan(plan)


def test_post_scale_divides_variables():
    plan = dataclasses.replace(catalog.plan_for("cds-two-wing"), post_scale=None)
    unscaled = execute_plan(plan).system
    scaled = catalog.instantiate("cds-two-wing")
    eps, mu = catalog.get("cds-two-wing").default_params
    assert apply_affine(unscaled, AffineMap.scaling((1, 1 / eps, mu / 2))) == scaled
