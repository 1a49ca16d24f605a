import random
from fractions import Fraction as F

import pytest

from pbl import named
from pbl.acceptance import random_public_coin, random_tree
from pbl.relation import Assignment, LabeledPartition, Rectangle, enumerate_rectangle_partitions
from pbl.synth import (MalformedTree, RandomizedProtocol, SupportEntry, assemble_randomized,
                       cc_budget, evaluate_protocol, run_pipeline, synth_cc_tree,
                       synth_query_tree, synth_tree, synthesis_budget, tree_to_partition,
                       truncate_support)
from pbl.trees import Leaf, Query, Speak, depth, run_tree


def cc(pairs, shape=(2, 2)):
    return LabeledPartition.build("cc", shape, pairs)


def realizes(tree, p):
    return all(run_tree(tree, p.side, p.shape, c) == z for c, z in enumerate(p.label_at))


def test_single_block():
    p = cc([(1, Rectangle(0b11, 0b11))])
    t = synth_cc_tree(p)
    assert t == Leaf(1) and depth(t) == 0


def test_two_rows():
    p = cc([(0, Rectangle(0b01, 0b11)), (1, Rectangle(0b10, 0b11))])
    t = synth_cc_tree(p)
    assert depth(t) <= 1 and realizes(t, p)


def test_four_singletons():
    p = cc([((x + y) % 2, Rectangle(1 << x, 1 << y)) for x in range(2) for y in range(2)])
    t = synth_cc_tree(p)
    assert depth(t) <= 4 and realizes(t, p)


def test_budget_values():
    assert [cc_budget(m) for m in (1, 2, 3, 4, 5, 8, 9)] == [0, 1, 4, 4, 9, 9, 16]


def test_all_3x3_partitions_within_budget():
    worst = {}
    for blocks in enumerate_rectangle_partitions(3, 3):
        p = cc([(i % 2, b) for i, b in enumerate(blocks)], (3, 3))
        t = synth_cc_tree(p)
        assert realizes(t, p)
        worst[len(blocks)] = max(worst.get(len(blocks), 0), depth(t))
    assert all(d <= cc_budget(m) for m, d in worst.items())


def test_query_examples():
    assert depth(synth_query_tree(LabeledPartition.build("query", (0,), [(0, Assignment(0, 0))]))) == 0
    p = LabeledPartition.build("query", (1,), [(0, Assignment.from_pattern("0")),
                                               (1, Assignment.from_pattern("1"))])
    t = synth_query_tree(p)
    assert depth(t) <= 1 and realizes(t, p)
    full = LabeledPartition.build("query", (2,), [(int(s[0]) ^ int(s[1]), Assignment.from_pattern(s))
                                                  for s in ("00", "01", "10", "11")])
    t = synth_query_tree(full)
    assert depth(t) <= 4 and realizes(t, full)


def test_round_trip_refines_source():
    rng = random.Random(2)
    parts = list(enumerate_rectangle_partitions(3, 3))
    for _ in range(50):
        blocks = rng.choice(parts)
        p = cc([(rng.randrange(2), b) for b in blocks], (3, 3))
        back = tree_to_partition(synth_tree(p), "cc", (3, 3))
        assert back.label_at == p.label_at and back.block_count >= p.block_count


def test_tree_to_partition_examples():
    assert tree_to_partition(Leaf(0), "cc", (2, 2)).block_count == 1
    t = Speak("A", (0, 1), Leaf(0), Leaf(1))
    p = tree_to_partition(t, "cc", (2, 2))
    assert {lb.block for lb in p.blocks} == {Rectangle(0b01, 0b11), Rectangle(0b10, 0b11)}


def test_malformed_trees():
    with pytest.raises(MalformedTree):
        tree_to_partition(Speak("A", (0,), Leaf(0), Leaf(1)), "cc", (2, 2))
    with pytest.raises(MalformedTree):
        tree_to_partition(Query(0, Query(0, Leaf(0), Leaf(1)), Leaf(1)), "query", (1,))


def test_random_trees_give_rectangles():
    rng = random.Random(5)
    for _ in range(100):
        t = random_tree(rng, (3, 3), 4, 0b111, 0b111)
        p = tree_to_partition(t, "cc", (3, 3))
        assert realizes(t, p) and depth(t) <= 4


# ---------------------------------------------------------------- truncation

class Fake:
    def __init__(self, n):
        self.n = n


def test_truncation_nothing_dropped():
    support = [(F(3, 4), Fake(2)), (F(1, 4), Fake(4))]
    tr = truncate_support(support, F(1, 4), "cc", cost=lambda p: p.n, size=lambda p: p.n)
    assert tr.value == F(5, 2) and tr.threshold == 10
    assert tr.dropped == [] and tr.delta == 0
    assert [a for a, _ in tr.kept] == [F(3, 4), F(1, 4)]


def test_truncation_drops_the_tail():
    big = Fake(1000)
    support = [(F(99, 100), Fake(2)), (F(1, 100), big)]
    tr = truncate_support(support, F(1, 4), "cc", cost=lambda p: p.n, size=lambda p: p.n)
    assert tr.value == F(1198, 100) and tr.threshold == F(4792, 100)
    assert tr.dropped == [(F(1, 100), big)]
    assert tr.delta == F(1, 100) and [a for a, _ in tr.kept] == [1]


def test_truncation_rejects_bad_input():
    with pytest.raises(ValueError):
        truncate_support([(F(1, 2), Fake(1))], F(1, 4), "cc", cost=lambda p: p.n, size=lambda p: p.n)
    with pytest.raises(ValueError):
        truncate_support([(F(1), Fake(1))], 0, "cc", cost=lambda p: p.n, size=lambda p: p.n)


# ---------------------------------------------------------------- protocols

def test_single_correct_partition_is_exact():
    rel = named.xor1()
    p = cc([(x ^ y, Rectangle(1 << x, 1 << y)) for x in range(2) for y in range(2)])
    proto = assemble_randomized([1], [p], "cc")
    ev = evaluate_protocol(proto, rel)
    assert ev.error == 0 and ev.cost <= 4


def test_constant_mixture_on_xor():
    rel = named.xor1()
    parts = [cc([(z, Rectangle(0b11, 0b11))]) for z in (0, 1)]
    ev = evaluate_protocol(assemble_randomized([F(1, 2), F(1, 2)], parts, "cc"), rel)
    assert ev.error == F(1, 2) and ev.cost == 0


def test_protocol_validation_and_sampling():
    p = cc([(0, Rectangle(0b11, 0b11))])
    with pytest.raises(ValueError):
        RandomizedProtocol("cc", (2, 2), (SupportEntry(F(1, 2), p, Leaf(0)),))
    rel, proto = random_public_coin(3)
    draws = [proto.sample(s) for s in range(20)]
    assert draws == [proto.sample(s) for s in range(20)]
    assert all(d in proto.support for d in draws)


@pytest.mark.parametrize("rel", [named.xor1(), named.and1(), named.equality(3), named.sum_mod(3, 3),
                                 named.parity(2), named.majority3()])
@pytest.mark.parametrize("eps", [F(1, 8), F(1, 4)])
def test_pipeline(rel, eps):
    res = run_pipeline(rel, eps)
    assert res.ok, res.checks
    assert res.evaluation.error <= 2 * eps
    assert res.evaluation.cost <= synthesis_budget(res.report.value, eps, rel.side)
    assert res.truncation.delta <= eps


def test_pipeline_refuses_eps_zero():
    with pytest.raises(ValueError):
        run_pipeline(named.xor1(), 0)
