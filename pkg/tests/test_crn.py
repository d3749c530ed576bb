from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chemchaos import catalog
from chemchaos.crn import (
    Crn,
    CrnFormatError,
    Reaction,
    canonical_crn,
    crn_complexity,
    crn_to_cds,
    fuse,
    parse,
    render,
)
from chemchaos.polysys import Poly, PolySystem, variables

# the displayed Willamowski-Rossler networks, as reaction sets
WR_CANONICAL = {
    ((1, 0, 0), (2, 0, 0), F(30)), ((2, 0, 0), (1, 0, 0), F(1, 2)), ((1, 1, 0), (0, 1, 0), F(1)),
    ((1, 0, 1), (0, 0, 1), F(1)), ((0, 1, 0), (0, 2, 0), F(33, 2)), ((0, 2, 0), (0, 1, 0), F(1, 2)),
    ((1, 1, 0), (1, 0, 0), F(1)), ((0, 0, 1), (0, 0, 0), F(10)), ((1, 0, 1), (1, 0, 2), F(1)),
}
WR_FUSED = {
    ((1, 0, 0), (2, 0, 0), F(30)), ((2, 0, 0), (1, 0, 0), F(1, 2)), ((1, 1, 0), (0, 0, 0), F(1)),
    ((1, 0, 1), (0, 0, 2), F(1)), ((0, 1, 0), (0, 2, 0), F(33, 2)), ((0, 2, 0), (0, 1, 0), F(1, 2)),
    ((0, 0, 1), (0, 0, 0), F(10)),
}


def as_set(c: Crn):
    return {(r.reactants, r.products, r.rate) for r in c.reactions}


def test_wr_canonical_network():
    c = canonical_crn(catalog.instantiate("wr"))
    assert as_set(c) == WR_CANONICAL
    assert len(c.reactions) == 9
    assert crn_complexity(c).label() == "(9,6)"


def test_wr_fused_network():
    f = fuse(canonical_crn(catalog.instantiate("wr")))
    assert as_set(f) == WR_FUSED
    assert crn_complexity(f).label() == "(7,4)"
    assert render(f) == catalog.WR_FUSED


def test_wr_stored_text_parses_to_same_networks():
    s = catalog.instantiate("wr")
    assert parse(catalog.WR_CANONICAL) == canonical_crn(s)
    assert parse(catalog.WR_FUSED) == fuse(canonical_crn(s))


def test_production_and_degradation():
    (x,) = variables(1)
    s = PolySystem.from_polys([1 - x], ("x",))
    c = canonical_crn(s)
    assert as_set(c) == {((0,), (1,), F(1)), ((1,), (0,), F(1))}
    assert render(c) == "0 --1--> X\nX --1--> 0"


def test_single_cross_monomial():
    x1, x2 = variables(2)
    s = PolySystem.from_polys([x1 * x2, Poly(2)], ("x1", "x2"))
    assert as_set(canonical_crn(s)) == {((1, 1), (2, 1), F(1))}


def test_non_chemical_system_rejected_with_monomial():
    with pytest.raises(ValueError, match="equation 2"):
        canonical_crn(catalog.instantiate("rossler"))


def test_distinct_reactants_left_unchanged():
    c = Crn(("X", "Y"), (Reaction((1, 0), (0, 0), 1), Reaction((0, 1), (1, 1), 2)))
    assert fuse(c) == c


def test_equal_reactants_different_rates_not_fused():
    c = Crn(("X", "Y"), (Reaction((1, 0), (0, 0), 1), Reaction((1, 0), (1, 1), 2)))
    assert fuse(c) == c


def test_fusion_requires_canonical_input():
    c = Crn(("X", "Y"), (Reaction((1, 0), (0, 2), 1),))
    with pytest.raises(ValueError, match="not canonical"):
        fuse(c)


def test_clashing_members_stay_unfused():
    c = Crn(("X", "Y"), (Reaction((1, 1), (2, 1), 1), Reaction((1, 1), (0, 1), 1), Reaction((1, 1), (1, 2), 1)))
    f = fuse(c)
    assert f.notes
    assert crn_to_cds(f) == crn_to_cds(c)


def test_one_wing_three_way_fusion():
    eps, mu = catalog.get("cds-one-wing").default_params
    f = fuse(canonical_crn(catalog.instantiate("cds-one-wing")))
    a2 = catalog.one_wing_params(eps, mu)[1]
    sign = 1 if a2 > 0 else -1
    assert ((1, 0, 0), (1 + sign, 1, 1), abs(a2)) in as_set(f)


@pytest.mark.parametrize("entry_id,canon,fused", [
    ("chemical-rossler", "(11,5)", "(9,4)"),
    ("cds-one-wing", "(10,3)", "(8,3)"),
    ("cds-two-wing", "(11,5,1)", "(9,4,1)"),
    ("cds-hidden", "(11,5)", "(9,4)"),
])
def test_construction_network_labels(entry_id, canon, fused):
    c = canonical_crn(catalog.instantiate(entry_id))
    assert crn_complexity(c).label() == canon
    assert crn_complexity(fuse(c)).label() == fused


def test_hidden_network_has_joint_production():
    f = fuse(canonical_crn(catalog.instantiate("cds-hidden")))
    assert any(r.reactants == (0, 0, 0) and r.products == (1, 1, 0) for r in f.reactions)


@pytest.mark.parametrize("entry_id", catalog.CDS_IDS + ("wr",))
def test_round_trips_through_networks(entry_id):
    s = catalog.instantiate(entry_id)
    c = canonical_crn(s)
    assert crn_to_cds(c) == s
    assert crn_to_cds(fuse(c)) == s
    assert parse(render(c)) == c
    assert parse(render(fuse(c))) == fuse(c)


def test_production_reaction_ode():
    c = Crn(("X",), (Reaction((0,), (1,), F(7, 3)),))
    assert crn_to_cds(c).polys[0] == Poly.const(1, F(7, 3))


@st.composite
def chemical_systems(draw):
    n = draw(st.integers(1, 3))
    xs = variables(n)
    polys = []
    for i in range(n):
        p = Poly(n)
        for _ in range(draw(st.integers(0, 4))):
            e = tuple(draw(st.integers(0, 2)) for _ in range(n))
            c = draw(st.fractions(min_value=F(1, 16), max_value=16, max_denominator=16))
            m = Poly(n, {e: c})
            # negative monomials must carry x_i
            if draw(st.booleans()):
                m = -m * xs[i]
            p = p + m
        polys.append(p)
    return PolySystem.from_polys(polys, tuple(f"s{i}" for i in range(n)))


@settings(max_examples=80, deadline=None)
@given(chemical_systems())
def test_random_chemical_systems_round_trip(s):
    c = canonical_crn(s)
    assert crn_to_cds(c, s.var_names) == s
    assert crn_to_cds(fuse(c), s.var_names) == s
    assert parse(render(c), c.species) == c


def test_parse_skips_comments_and_takes_species_in_order():
    c = parse("# a comment\n\nB + A --3/2--> 2 A\nA --0.5--> 0\n")
    assert c.species == ("B", "A")
    assert c.reactions[0] == Reaction((1, 1), (0, 2), F(3, 2))
    assert c.reactions[1].rate == F(1, 2)


@pytest.mark.parametrize("text,line", [
    ("X --1--> Y\nX -> Y", 2),
    ("X --abc--> Y", 1),
    ("X --1--> X", 1),
    ("X --0--> Y", 1),
    ("2X --1--> Y", 1),
    ("\nX --1--> 0 Y", 2),
])
def test_parse_errors_name_line(text, line):
    with pytest.raises(CrnFormatError) as exc:
        parse(text)
    assert exc.value.line == line


def test_parse_with_fixed_species_rejects_unknown():
    with pytest.raises(CrnFormatError):
        parse("X --1--> Q", species=("X", "Y"))


def test_zero_reserved_as_species_name():
    with pytest.raises(ValueError):
        Crn(("0",), ())
