from fractions import Fraction as F

import pytest

from pbl import named
from pbl.bounds import compute_bound
from pbl.oracles import (brute_labeled_count, brute_partitions, crosscheck_pprt, det_cc, det_query,
                         exhaustive_pprt0, is_rectangle, is_subcube, set_partitions)
from pbl.relation import count_partitions
from pbl.trees import depth, run_tree

BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140]


def test_set_partitions_bell_numbers():
    for k, b in enumerate(BELL):
        assert sum(1 for _ in set_partitions(k)) == b


def test_block_predicates():
    assert is_rectangle(0b1111, 2, 2) and not is_rectangle(0b1001, 2, 2)
    assert is_subcube(0b0011, 2) and not is_subcube(0b0110, 2)


@pytest.mark.parametrize("side, shape", [("cc", (2, 2)), ("cc", (2, 3)), ("cc", (3, 3)),
                                         ("query", (1,)), ("query", (2,)), ("query", (3,))])
def test_canonical_enumeration_matches_brute_force(side, shape):
    assert len(brute_partitions(side, shape)) == sum(count_partitions(side, shape).values())


def test_labeled_counts():
    assert brute_labeled_count("cc", (2, 2), 2) == 58
    assert brute_labeled_count("query", (1,), 2) == 6


@pytest.mark.parametrize("rel, value", [(named.constant(), 0), (named.and1(), 2),
                                        (named.xor1(), 2), (named.equality(4), 3)])
def test_det_cc(rel, value):
    cv = det_cc(rel)
    assert cv.value == value and depth(cv.witness) == value
    for c in range(rel.num_inputs):
        assert run_tree(cv.witness, "cc", rel.shape, c) in rel.accept[c]


@pytest.mark.parametrize("rel, value", [(named.query_constant(2), 0), (named.parity(2), 2),
                                        (named.or_n(2), 2), (named.majority3(), 3),
                                        (named.parity(10), 10)])
def test_det_query(rel, value):
    cv = det_query(rel)
    assert cv.value == value and depth(cv.witness) == value
    for c in range(rel.num_inputs):
        assert run_tree(cv.witness, "query", rel.shape, c) in rel.accept[c]


@pytest.mark.parametrize("rel, value", [(named.xor1(), 4), (named.and1(), 3), (named.constant(), 1),
                                        (named.parity(1), 4), (named.parity(2), 16),
                                        (named.equality(3), 6)])
def test_exhaustive_pprt0_matches_lp(rel, value):
    assert exhaustive_pprt0(rel) == value == compute_bound(rel, 0).value


@pytest.mark.parametrize("rel, eps", [(named.xor1(), 0), (named.constant(), 0),
                                      (named.and1(), F(1, 8)), (named.parity(2), F(1, 4))])
def test_crosscheck(rel, eps):
    out = crosscheck_pprt(rel, eps)
    assert out.ok, out.discrepancies


def test_crosscheck_all_2x2_at_one_eighth():
    from pbl.acceptance import all_2x2_relations
    for rel in all_2x2_relations():
        if all(rel.accept):
            assert crosscheck_pprt(rel, F(1, 8)).ok


def test_oracles_reject_wrong_side():
    with pytest.raises(ValueError):
        det_cc(named.parity(2))
    with pytest.raises(ValueError):
        det_query(named.xor1())
