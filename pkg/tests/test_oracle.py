"""Precise-network expectations and the Fourier-Motzkin cross-check."""

import random
from fractions import Fraction

import pytest

from credalcones.core import Gamble, Space, VariableSpace, indicator
from credalcones.dag import Dag
from credalcones.lp import conic_membership
from credalcones.net import CredalNet, sample_credal_net, sample_gamble
from credalcones.oracle import (
    FM_MAX_DIM,
    FM_MAX_GENERATORS,
    PreciseNet,
    WitnessMismatchError,
    fm_membership,
    positivity_audit,
)

F = Fraction


def binary_chain():
    a = VariableSpace("a", ("a0", "a1"))
    b = VariableSpace("b", ("b0", "b1"))
    return CredalNet(Dag(["a", "b"], [("a", "b")]), [a, b])


def chain_precise():
    net = binary_chain()
    kernels = {
        ("a", 0): (F(3, 4), F(1, 4)),
        ("b", 0): (F(1, 2), F(1, 2)),
        ("b", 1): (F(1, 3), F(2, 3)),
    }
    return PreciseNet(net, kernels)


def test_chain_global_mass():
    p = chain_precise()
    sp = p.net.joint_space
    cfg = sp.configuration({"a": "a0", "b": "b0"})
    assert p.global_mass(cfg) == F(3, 8)
    assert p.global_mass(sp.configuration({"a": "a1", "b": "b1"})) == F(1, 6)
    total = sum(p.global_mass(c) for c in sp.configurations())
    assert total == 1


def test_expectation_is_linear():
    p = chain_precise()
    sp = p.net.joint_space
    rng = random.Random(9)
    f = sample_gamble(rng, sp)
    g = sample_gamble(rng, sp)
    assert p.expectation(f + g) == p.expectation(f) + p.expectation(g)
    assert p.expectation(f * F(5, 3)) == F(5, 3) * p.expectation(f)


def test_invalid_kernels_rejected():
    net = binary_chain()
    with pytest.raises(ValueError):
        PreciseNet(net, {("a", 0): (F(1), F(1)), ("b", 0): (1, 0), ("b", 1): (1, 0)})
    with pytest.raises(ValueError):
        PreciseNet(
            net,
            {
                ("a", 0): (F(3, 2), F(-1, 2)),
                ("b", 0): (F(1), F(0)),
                ("b", 1): (F(1), F(0)),
            },
        )


def test_factorization_identity():
    # expectation of indicator(parent and nnd config) * f splits into the
    # marginal mass of the configuration times the local expectation
    rng = random.Random(414)
    for _ in range(6):
        net = sample_credal_net(rng, max_nodes=3)
        precise = PreciseNet.from_witnesses(net)
        sp = net.joint_space
        for s in net.dag.nodes:
            p_space = net.parent_space(s)
            n_space = net.nnd_space(s)
            p_idx = rng.randrange(p_space.size)
            observed = p_space.config_at(p_idx).combine(
                n_space.config_at(rng.randrange(n_space.size))
            )
            f = sample_gamble(rng, net.node_space(s))
            ind = indicator(observed, sp)
            left = precise.expectation(ind * f.extend(sp))
            right = precise.expectation(ind) * precise.local_expectation(s, p_idx, f)
            assert left == right


def test_witness_network_matches_canonical_witness():
    rng = random.Random(515)
    for _ in range(5):
        net = sample_credal_net(rng, max_nodes=3)
        precise = PreciseNet.from_witnesses(net)
        joint = net.build_joint()
        masses = tuple(
            precise.global_mass(c) for c in net.joint_space.configurations()
        )
        assert joint.canonical_witness == masses
        # and every generator really has strictly positive expectation
        for info in joint.generators:
            assert precise.expectation(Gamble(net.joint_space, info.table)) > 0


def test_positivity_audit_scores_witness_networks_positive():
    rng = random.Random(616)
    for _ in range(5):
        net = sample_credal_net(rng, max_nodes=3)
        joint = net.build_joint()
        report = positivity_audit(
            PreciseNet.from_witnesses(net), joint, rng, samples=20
        )
        assert report.ok
        assert report.checked == 20
        assert report.generators_checked == len(joint.generators)
        assert report.total_mass_one
        assert report.failures == ()


def test_positivity_audit_rejects_non_witness_kernels():
    net = binary_chain()
    kernels = {
        ("a", 0): (F(1), F(0)),  # value a1 impossible: atom indicator scores 0
        ("b", 0): (F(1, 2), F(1, 2)),
        ("b", 1): (F(1, 2), F(1, 2)),
    }
    with pytest.raises(WitnessMismatchError):
        positivity_audit(PreciseNet(net, kernels), net.build_joint(), random.Random(1))


def test_positivity_audit_catches_sign_flip_mutations():
    net = binary_chain()
    flipped = net.build_joint(mutate_flip=("b", 0, 0))
    report = positivity_audit(
        PreciseNet.from_witnesses(net), flipped, random.Random(2), samples=10
    )
    assert not report.all_positive
    assert report.failures
    assert any("generator" in f for f in report.failures)


# -- Fourier-Motzkin ------------------------------------------------------------


def test_fm_hand_cases():
    gens = [(F(1), F(0)), (F(1), F(1))]
    assert fm_membership((F(3), F(1)), gens)
    assert not fm_membership((F(0), F(1)), gens)
    assert not fm_membership((F(1), F(2)), [(F(1), F(1))])
    assert fm_membership((F(2), F(0)), [(F(1), F(-1)), (F(0), F(1))])


def test_fm_guards():
    with pytest.raises(ValueError, match="contains_zero"):
        fm_membership((F(0), F(0)), [(F(1), F(2))])
    with pytest.raises(ValueError):
        fm_membership((F(1),) * (FM_MAX_DIM + 1), [(F(1),) * (FM_MAX_DIM + 1)])
    too_many = [(F(1), F(0))] * (FM_MAX_GENERATORS + 1)
    with pytest.raises(ValueError):
        fm_membership((F(1), F(0)), too_many)
    with pytest.raises(ValueError):
        fm_membership((F(1),), [(F(1),), (F(1), F(2))])


def test_fm_agrees_with_lp():
    rng = random.Random(20240818)
    agree_member = agree_nonmember = 0
    for _ in range(120):
        dim = rng.randint(1, 4)
        n = rng.randint(1, 8)
        gens = []
        for _ in range(n):
            g = tuple(F(rng.randint(-3, 3)) for _ in range(dim))
            if any(v != 0 for v in g):
                gens.append(g)
        if not gens:
            gens = [tuple(F(1) for _ in range(dim))]
        target = tuple(F(rng.randint(-3, 3)) for _ in range(dim))
        while all(v == 0 for v in target):
            target = tuple(F(rng.randint(-3, 3)) for _ in range(dim))
        lp_says = conic_membership(target, gens).member
        fm_says = fm_membership(target, gens)
        assert lp_says == fm_says
        if lp_says:
            agree_member += 1
        else:
            agree_nonmember += 1
    assert agree_member > 20 and agree_nonmember > 20
