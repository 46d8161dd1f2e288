"""Joint model construction, certificate routes, and irrelevance checks."""

import random
from fractions import Fraction

import pytest

from credalcones.cone import AssessmentCone
from credalcones.core import Gamble, Space, VariableSpace, indicator
from credalcones.dag import Dag
from credalcones.lp import conic_membership, contains_zero as lp_contains_zero
from credalcones.net import (
    CredalNet,
    GeneratorCapError,
    IncoherentLocalModel,
    NetworkError,
    ZeroGambleError,
    sample_credal_net,
    sample_gamble,
)

F = Fraction


def binary(name):
    return VariableSpace(name, (f"{name}0", f"{name}1"))


def single_node_net(assessed=True):
    var = binary("a")
    sp = Space([var])
    gambles = {"a": [[Gamble(sp, (1, -1))]]} if assessed else None
    return CredalNet(Dag(["a"]), [var], gambles)


def chain_net(assess_a=False):
    a, b = binary("a"), binary("b")
    sp_a = Space([a])
    assessments = {"a": [[Gamble(sp_a, (1, -1))]]} if assess_a else None
    net = CredalNet(Dag(["a", "b"], [("a", "b")]), [a, b], assessments)
    return net


def test_single_node_generators_mirror_local_cone():
    net = single_node_net()
    joint = net.build_joint()
    assert len(joint.generators) == 3  # one assessment + two atoms
    local = net.local_cone("a", 0)
    for info, g in zip(joint.generators, local.generators):
        assert info.table == g.table
    f = Gamble(net.joint_space, (3, -1))
    assert joint.member(f) == local.member(f)


def test_chain_generator_count_and_order():
    net = chain_net(assess_a=False)
    joint = net.build_joint()
    # a: one empty parent cfg, no assessments, two atoms -> 2
    # b: two parent cfgs, two atoms each -> 4
    assert net.generator_count() == 6
    assert len(joint.generators) == 6
    assert [g.node for g in joint.generators] == ["a", "a", "b", "b", "b", "b"]
    assert [g.parent_index for g in joint.generators] == [0, 0, 0, 0, 1, 1]
    # b's generators are indicator(a=...) * atom
    sp = net.joint_space
    a_space = sp.restrict(["a"])
    expected = indicator(a_space.configuration({"a": "a0"}), sp) * indicator(
        sp.restrict(["b"]).configuration({"b": "b0"}), sp
    )
    assert joint.generators[2].table == expected.table

    richer = chain_net(assess_a=True)
    assert richer.generator_count() == 7  # the assessment adds one product


def test_generator_count_matches_construction_on_random_nets():
    rng = random.Random(31)
    for _ in range(10):
        net = sample_credal_net(rng, max_nodes=3)
        assert net.generator_count() == len(net.build_joint().generators)


def test_generator_cap():
    net = chain_net()
    with pytest.raises(GeneratorCapError):
        net.build_joint(cap=5)


def test_incoherent_local_model_rejected_at_ingestion():
    var = binary("a")
    sp = Space([var])
    bad = {"a": [[Gamble(sp, (0, -1))]]}
    with pytest.raises(IncoherentLocalModel) as err:
        CredalNet(Dag(["a"]), [var], bad)
    assert err.value.node == "a"


def test_cyclic_graph_rejected():
    a, b = binary("a"), binary("b")
    with pytest.raises(NetworkError):
        CredalNet(Dag(["a", "b"], [("a", "b"), ("b", "a")]), [a, b])


def test_canonical_witness_certifies_zero_freeness():
    rng = random.Random(97)
    for _ in range(8):
        net = sample_credal_net(rng, max_nodes=3)
        joint = net.build_joint()
        assert joint.canonical_witness is not None
        report = joint.contains_zero()
        assert not report.exists
        assert report.route == "canonical-witness"
        # independent route: the LP primitive over the raw columns
        assert not lp_contains_zero([g.table for g in joint.generators]).exists


def test_positive_gambles_are_members_and_nonpositive_are_not():
    net = chain_net(assess_a=True)
    joint = net.build_joint()
    size = net.joint_space.size
    for j in range(size):
        table = [F(0)] * size
        table[j] = F(2)
        res = joint.member_with_certificate(Gamble(net.joint_space, tuple(table)))
        assert res.member and res.route == "positive-span"
    res = joint.member_with_certificate(Gamble.constant(net.joint_space, -1))
    assert not res.member and res.route == "cached-separator"
    assert not joint.member(Gamble.zero(net.joint_space))


def test_structured_member_routes_and_certificates():
    net = chain_net(assess_a=True)
    joint = net.build_joint()
    sp_a = net.node_space("a")
    empty_parent = net.parent_space("a").config_at(0)
    empty_given = net.nnd_space("a").config_at(0)
    f = Gamble(sp_a, (1, -1))  # the assessed gamble on a
    res = joint.structured_member("a", empty_parent, (), empty_given, f)
    assert res.member and res.route == "local-assembly"
    res = joint.structured_member("a", empty_parent, (), empty_given, -f)
    assert not res.member and res.route in ("product-separator", "cached-separator")

    # b's local cone is vacuous: a mixed gamble on b is not desirable,
    # conditionally on either value of a
    sp_b = net.node_space("b")
    g = Gamble(sp_b, (1, -1))
    for p_idx in range(2):
        p_cfg = net.parent_space("b").config_at(p_idx)
        res = joint.structured_member("b", p_cfg, (), net.nnd_space("b").config_at(0), g)
        assert not res.member


def abc_chain():
    # chain a -> b -> c with c assessed per parent value; N(c) = {a}
    a, b, c = binary("a"), binary("b"), binary("c")
    sp_c = Space([c])
    assessments = {"c": [[Gamble(sp_c, (2, -1))], [Gamble(sp_c, (-1, 2))]]}
    return CredalNet(Dag("abc", [("a", "b"), ("b", "c")]), [a, b, c], assessments)


def test_structured_member_with_irrelevant_observation():
    net = abc_chain()
    sp_c = net.node_space("c")
    joint = net.build_joint()
    f = Gamble(sp_c, (2, -1))
    p_space = net.parent_space("c")
    for p_idx in range(p_space.size):
        p_cfg = p_space.config_at(p_idx)
        expected = p_idx == 0  # assessed under b0, not under b1
        for a_value in ("a0", "a1"):
            given = Space([binary("a")]).configuration({"a": a_value})
            res = joint.structured_member("c", p_cfg, ("a",), given, f)
            assert res.member == expected
            check = joint.check_irrelevance("c", p_cfg, ("a",), given, f)
            assert check.agree


def test_structured_member_agrees_with_raw_lp():
    rng = random.Random(555)
    for _ in range(5):
        net = sample_credal_net(rng, max_nodes=3, max_values=2)
        joint = net.build_joint()
        columns = [g.table for g in joint.generators]
        for s in net.dag.nodes:
            p_space = net.parent_space(s)
            nnd = net.dag.non_parent_non_descendants(s)
            p_cfg = p_space.config_at(rng.randrange(p_space.size))
            irrelevant = tuple(n for n in nnd if rng.random() < 0.5)
            i_space = Space(net.variables[n] for n in irrelevant)
            given = i_space.config_at(rng.randrange(i_space.size))
            f = sample_gamble(rng, net.node_space(s))
            res = joint.structured_member(s, p_cfg, irrelevant, given, f)
            target = indicator(
                p_cfg.combine(given), net.joint_space
            ) * f.extend(net.joint_space)
            direct = conic_membership(target.table, columns)
            assert res.member == direct.member


def test_joint_member_is_strict_about_zero():
    net = chain_net(assess_a=True)
    joint = net.build_joint()
    with pytest.raises(ZeroGambleError):
        joint.joint_member(Gamble.zero(net.joint_space))
    assert joint.joint_member(Gamble.constant(net.joint_space, 1))
    # the certificate-level plumbing keeps the lenient convention
    assert not joint.member(Gamble.zero(net.joint_space))


def test_condition_on_empty_configuration_is_identity():
    net = chain_net(assess_a=True)
    joint = net.build_joint()
    view = joint.condition(Space([]).configuration({}))
    rng = random.Random(14)
    for _ in range(6):
        f = sample_gamble(rng, net.joint_space)
        assert view.member(f) == joint.joint_member(f)


def test_condition_answers_follow_the_local_model():
    net = abc_chain()
    joint = net.build_joint()
    sp_c = net.node_space("c")
    f = Gamble(sp_c, (2, -1))
    b_space = Space([binary("b")])
    view0 = joint.condition(b_space.configuration({"b": "b0"}))
    view1 = joint.condition(b_space.configuration({"b": "b1"}))
    assert view0.member(f)  # assessed under b0
    assert not view1.member(f)
    assert view1.member(Gamble(sp_c, (-1, 2)))
    with pytest.raises(ZeroGambleError):
        view0.member(Gamble.zero(sp_c))
    with pytest.raises(NetworkError):
        view0.member(Gamble(b_space, (1, 1)))  # scope overlaps the observation
    with pytest.raises(NetworkError):
        joint.condition(Space([binary("z")]).configuration({"z": "z0"}))


def test_marginal_member_dispatch_and_errors():
    net = abc_chain()
    joint = net.build_joint()
    sp_c = net.node_space("c")
    f = Gamble(sp_c, (2, -1))
    columns = [g.table for g in joint.generators]
    ab_space = Space([binary("a"), binary("b")])
    # parent (b) plus a non-parent-non-descendant (a) observed: the
    # structured certificate route must be reproduced exactly
    for a_val in ("a0", "a1"):
        observed = ab_space.configuration({"a": a_val, "b": "b0"})
        structured = joint.structured_member(
            "c",
            Space([binary("b")]).configuration({"b": "b0"}),
            ("a",),
            Space([binary("a")]).configuration({"a": a_val}),
            f,
        )
        assert joint.marginal_member(observed, f) == structured.member
        assert structured.member
    # observing only the non-parent leaves the parent free: generic route,
    # and the mixed gamble is out of reach there
    only_a = Space([binary("a")]).configuration({"a": "a0"})
    assert not joint.marginal_member(only_a, f)
    target = indicator(only_a, net.joint_space) * f.extend(net.joint_space)
    assert not conic_membership(target.table, columns).member
    # gambles on several nodes take the generic route too
    bc = sample_gamble(random.Random(9), Space([binary("b"), binary("c")]))
    wide = indicator(only_a, net.joint_space) * bc.extend(net.joint_space)
    assert (
        joint.marginal_member(only_a, bc)
        == conic_membership(wide.table, columns).member
    )
    # scope overlap and zero gambles are refused
    with pytest.raises(NetworkError):
        joint.marginal_member(only_a, Gamble(Space([binary("a")]), (1, 0)))
    with pytest.raises(ZeroGambleError):
        joint.marginal_member(only_a, Gamble.zero(sp_c))


def test_verify_requirements_clean_network():
    net = chain_net(assess_a=True)
    joint = net.build_joint()
    report = joint.verify_requirements(random.Random(3), gambles_per_slot=4)
    assert report.ok
    assert report.zero_free
    assert report.atoms_checked == 4
    assert report.negatives_checked == 4 + 4  # negated atoms + random draws
    assert report.minimal_by_construction
    assert report.irrelevance_checked > 0


def test_verify_requirements_is_deterministic():
    net = chain_net(assess_a=True)
    r1 = net.build_joint().verify_requirements(random.Random(11), gambles_per_slot=4)
    r2 = net.build_joint().verify_requirements(random.Random(11), gambles_per_slot=4)
    assert r1 == r2


def test_mutated_joint_is_detected():
    net = chain_net(assess_a=True)
    # flip the products of a's assessed gamble (node a, parent cfg 0, local 0)
    joint = net.build_joint(mutate_flip=("a", 0, 0))
    report = joint.verify_requirements(random.Random(5), gambles_per_slot=2)
    assert not report.ok
    mismatches = [v for v in report.violations if v.kind == "irrelevance-mismatch"]
    assert mismatches
    assert any(v.node == "a" for v in mismatches)


def test_mutating_an_atom_is_detected_too():
    net = chain_net(assess_a=False)
    # node b, parent cfg 1, atom 0
    joint = net.build_joint(mutate_flip=("b", 1, 0))
    report = joint.verify_requirements(random.Random(6), gambles_per_slot=2)
    assert not report.ok


def test_mutation_validation():
    net = chain_net()
    with pytest.raises(NetworkError):
        net.build_joint(mutate_flip=("z", 0, 0))
    with pytest.raises(NetworkError):
        net.build_joint(mutate_flip=("a", 5, 0))
    with pytest.raises(NetworkError):
        net.build_joint(mutate_flip=("a", 0, 9))


def test_joint_previsions_on_chain():
    net = chain_net(assess_a=True)
    joint = net.build_joint()
    f = Gamble(net.node_space("a"), (1, -1))
    low = joint.lower_prevision(f)
    up = joint.upper_prevision(f)
    assert low == 0  # assessed, so desirable at level 0
    assert up == 1
    assert joint.lower_prevision(Gamble.constant(net.joint_space, F(5, 2))) == F(5, 2)


def test_sampler_reproducibility():
    n1 = sample_credal_net(random.Random(123))
    n2 = sample_credal_net(random.Random(123))
    assert n1.dag.edges == n2.dag.edges
    assert [v.values for v in n1.variables.values()] == [
        v.values for v in n2.variables.values()
    ]
    k1 = {k: tuple(g.table for g in v) for k, v in n1.assessments.items()}
    k2 = {k: tuple(g.table for g in v) for k, v in n2.assessments.items()}
    assert k1 == k2
    j1, j2 = n1.build_joint(), n2.build_joint()
    assert [g.table for g in j1.generators] == [g.table for g in j2.generators]
