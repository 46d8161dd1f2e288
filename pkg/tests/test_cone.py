"""Cone coherence, membership, previsions, and the witness equivalence."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from credalcones.cone import AssessmentCone
from credalcones.core import Gamble, Space, VariableSpace
from credalcones.lp import contains_zero, verify_witness

F = Fraction


def coin():
    return Space([VariableSpace("a", ("heads", "tails"))])


def pair_space():
    return Space([VariableSpace("a", ("a0", "a1")), VariableSpace("b", ("b0", "b1"))])


def test_single_assessment_margin_and_witness():
    # one assessed gamble (1, -1): best floor is 1/3 at pmf (2/3, 1/3)
    cone = AssessmentCone(coin(), [Gamble(coin(), (1, -1))])
    report = cone.is_coherent()
    assert report.coherent
    assert report.margin == F(1, 3)
    assert report.witness == (F(2, 3), F(1, 3))


def test_hand_checked_witness_also_works():
    # (3/4, 1/4) gives expectations 1/2, 3/4, 1/4: all strictly positive
    cone = AssessmentCone(coin(), [Gamble(coin(), (1, -1))])
    y = (F(3, 4), F(1, 4))
    assert sum(y) == 1
    for g in cone.generators:
        assert sum(a * b for a, b in zip(y, g.table)) > 0


def test_contradictory_assessment_is_incoherent():
    sp = coin()
    f = Gamble(sp, (1, -1))
    cone = AssessmentCone(sp, [f, -f])
    report = cone.is_coherent()
    assert not report.coherent
    assert report.certificate is not None
    combo = report.certificate
    tables = [g.table for g in cone.generators]
    assert verify_witness(tables, (F(0),) * sp.size, combo)
    assert any(c > 0 for c in combo)


def test_nonpositive_assessment_is_incoherent():
    sp = coin()
    cone = AssessmentCone(sp, [Gamble(sp, (0, -1))])
    assert not cone.is_coherent()


def test_vacuous_cone_membership():
    sp = coin()
    cone = AssessmentCone(sp)
    assert cone.is_coherent()
    assert cone.member(Gamble(sp, (1, 0)))
    assert cone.member(Gamble(sp, (2, 3)))
    assert not cone.member(Gamble(sp, (1, -1)))
    assert not cone.member(Gamble(sp, (-1, 0)))


def test_zero_gamble_is_never_a_member():
    sp = coin()
    cone = AssessmentCone(sp, [Gamble(sp, (1, -1))])
    assert not cone.member(Gamble.zero(sp))
    cert = cone.member_with_certificate(Gamble.zero(sp))
    assert not cert.member and cert.witness is None and cert.separator is None


def test_membership_certificates_verify():
    sp = coin()
    f = Gamble(sp, (1, -1))
    cone = AssessmentCone(sp, [f])
    inside = cone.member_with_certificate(Gamble(sp, (3, -1)))  # 2f + 2*atom0 + 1*... check
    assert inside.member
    tables = [g.table for g in cone.generators]
    assert verify_witness(tables, (F(3), F(-1)), inside.witness)
    outside = cone.member_with_certificate(Gamble(sp, (1, -2)))
    assert not outside.member
    sep = outside.separator
    assert all(sum(a * b for a, b in zip(sep, g.table)) >= 0 for g in cone.generators)
    assert sum(a * b for a, b in zip(sep, (F(1), F(-2)))) < 0


def test_generator_order_is_assessments_then_atoms():
    sp = coin()
    f = Gamble(sp, (1, -1))
    cone = AssessmentCone(sp, [f])
    assert cone.generators[0] == f
    assert cone.generators[1].table == (1, 0)
    assert cone.generators[2].table == (0, 1)


def test_zero_assessment_rejected():
    sp = coin()
    with pytest.raises(ValueError):
        AssessmentCone(sp, [Gamble.zero(sp)])


def test_vacuous_previsions_are_min_and_max():
    sp = coin()
    cone = AssessmentCone(sp)
    f = Gamble(sp, (1, -1))
    assert cone.lower_prevision(f) == -1
    assert cone.upper_prevision(f) == 1


def test_assessed_gamble_has_nonnegative_lower_prevision():
    sp = coin()
    f = Gamble(sp, (1, -1))
    cone = AssessmentCone(sp, [f])
    assert cone.lower_prevision(f) == 0
    assert cone.upper_prevision(f) == 1


def random_cone(rng, max_values=3, max_assessments=3):
    k = rng.randint(2, max_values)
    sp = Space([VariableSpace("a", tuple(f"v{i}" for i in range(k)))])
    gambles = []
    for _ in range(rng.randint(0, max_assessments)):
        table = tuple(F(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(k))
        if any(v != 0 for v in table):
            gambles.append(Gamble(sp, table))
    return AssessmentCone(sp, gambles)


def test_coherence_equals_no_vanishing_combination():
    # the witness route and the vanishing-combination route must agree
    rng = random.Random(811)
    seen = {True: 0, False: 0}
    for _ in range(120):
        cone = random_cone(rng)
        coherent = cone.is_coherent().coherent
        vanishes = contains_zero([g.table for g in cone.generators]).exists
        assert coherent == (not vanishes)
        seen[coherent] += 1
    assert seen[True] > 10 and seen[False] > 10


def test_sign_diagnostics_clean_on_coherent_cone():
    sp = coin()
    cone = AssessmentCone(sp, [Gamble(sp, (1, -1))])
    report = cone.sign_diagnostics(random.Random(5), samples=25)
    assert report.ok
    assert report.checked == sp.size + 25
    assert AssessmentCone(sp).sign_diagnostics(random.Random(5)).ok


def test_sign_diagnostics_flags_incoherent_cone():
    # (0, -1) is assessed, nonpositive, and trivially a member of its own span
    sp = coin()
    cone = AssessmentCone(sp, [Gamble(sp, (0, -1))])
    report = cone.sign_diagnostics(random.Random(5))
    assert not report.ok
    assert report.violation is not None
    assert cone.member(report.violation)
    assert all(v <= 0 for v in report.violation.table)


def test_no_partial_loss_when_coherent():
    rng = random.Random(812)
    checked = 0
    while checked < 40:
        cone = random_cone(rng)
        if not cone.is_coherent():
            continue
        size = cone.space.size
        table = [F(-rng.randint(0, 2)) for _ in range(size)]
        if all(v == 0 for v in table):
            table[rng.randrange(size)] = F(-1)
        assert not cone.member(Gamble(cone.space, tuple(table)))
        checked += 1


@st.composite
def coherent_cone_and_members(draw):
    k = draw(st.integers(2, 3))
    sp = Space([VariableSpace("a", tuple(f"v{i}" for i in range(k)))])
    coeff = st.fractions(min_value=-2, max_value=2, max_denominator=2)
    tables = draw(
        st.lists(
            st.lists(coeff, min_size=k, max_size=k).filter(
                lambda t: any(v != 0 for v in t)
            ),
            min_size=1,
            max_size=2,
        )
    )
    cone = AssessmentCone(sp, [Gamble(sp, tuple(t)) for t in tables])
    if not cone.is_coherent():
        # fall back to the always-coherent vacuous cone
        cone = AssessmentCone(sp)
    f = draw(st.sampled_from(cone.generators))
    g = draw(st.sampled_from(cone.generators))
    return cone, f, g


@settings(max_examples=40, deadline=None)
@given(coherent_cone_and_members())
def test_members_closed_under_addition_and_scaling(data):
    cone, f, g = data
    assert cone.member(f) and cone.member(g)
    assert cone.member(f + g)
    assert cone.member(f.scale(F(7, 3)))


@settings(max_examples=30, deadline=None)
@given(
    coherent_cone_and_members(),
    st.fractions(min_value=-2, max_value=2, max_denominator=3),
)
def test_prevision_shift_and_order(data, c):
    cone, f, _ = data
    low = cone.lower_prevision(f)
    assert cone.upper_prevision(f) >= low
    const = Gamble.constant(cone.space, c)
    assert cone.lower_prevision(f + const) == low + c


def test_multi_node_cone_accepts_subscope_gambles():
    sp = pair_space()
    f_a = Gamble(sp.restrict(["a"]), (1, -1))
    cone = AssessmentCone(sp, [f_a])
    assert cone.is_coherent()
    assert cone.member(f_a)  # auto-extended
    assert cone.lower_prevision(f_a) == 0
