import json

import pytest

from pbl import named
from pbl.caps import CapExceeded, Caps, DEFAULT, HARD, active_caps
from pbl.relation import (Assignment, LabeledPartition, MalformedInput, PartitionError, Rectangle,
                          Relation, block_at, cell_to_bits, count_partitions, dump_relation,
                          enumerate_assignments, enumerate_labeled_partitions,
                          enumerate_rectangle_partitions, enumerate_rectangles,
                          enumerate_subcube_partitions, labeled_partition_count, load_relation)


def test_load_xor_document():
    doc = {"kind": "cc", "outputs": ["0", "1"], "x_size": 2, "y_size": 2,
           "accept": [[[0], [1]], [[1], [0]]]}
    rel = load_relation(doc)
    assert rel.side == "cc" and rel.shape == (2, 2)
    for x in range(2):
        for y in range(2):
            assert rel.accept[x * 2 + y] == {x ^ y}


def test_load_parity_document():
    doc = {"kind": "query", "outputs": ["0", "1"], "n": 2,
           "accept": {"00": [0], "01": [1], "10": [1], "11": [0]}}
    rel = load_relation(json.dumps(doc))
    assert rel.accept[rel.cell_of("01")] == {1}
    assert rel == named.parity(2)


@pytest.mark.parametrize("doc, msg", [
    ({"kind": "cc", "outputs": ["0", "1"], "x_size": 1, "y_size": 1, "accept": [[[5]]]},
     "out-of-range output"),
    ({"kind": "cc", "outputs": ["0", "1"], "x_size": 1, "y_size": 1, "accept": [[[0, 0]]]},
     "duplicate"),
    ({"kind": "cc", "outputs": ["0"], "x_size": 0, "y_size": 1, "accept": []}, "empty"),
    ({"kind": "query", "outputs": ["0"], "n": 1, "accept": {"0": [0]}}, "every n-bit"),
    ({"kind": "query", "outputs": ["0"], "n": 1, "accept": {"0": [0], "2": [0]}}, "bad input key"),
    ({"kind": "tree", "outputs": ["0"]}, "unknown relation kind"),
])
def test_malformed_documents(doc, msg):
    with pytest.raises(MalformedInput, match=msg):
        load_relation(doc)


def test_malformed_json_text():
    with pytest.raises(MalformedInput):
        load_relation("{not json")


def test_dump_load_round_trip():
    for rel in (named.xor1(), named.sum_mod(3, 3), named.majority3(), named.random_query(3, 2)):
        again = load_relation(json.loads(json.dumps(dump_relation(rel))))
        assert again == rel


def test_query_cell_convention():
    # variable 0 is the leftmost character of the input string
    assert cell_to_bits(int("100", 2), 3) == (1, 0, 0)
    a = Assignment.from_pattern("1*0")
    assert a.bindings == {0: 1, 2: 0}
    assert a.pattern(3) == "1*0"
    assert a.cell_mask(3) == (1 << 0b100) | (1 << 0b110)


@pytest.mark.parametrize("shape, count", [((2, 2), 9), ((1, 1), 1), ((2, 3), 21)])
def test_rectangle_counts(shape, count):
    assert len(enumerate_rectangles(*shape)) == count


@pytest.mark.parametrize("n, count", [(0, 1), (1, 3), (2, 9), (3, 27)])
def test_assignment_counts(n, count):
    assert len(enumerate_assignments(n)) == count


@pytest.mark.parametrize("shape, count", [((1, 1), 1), ((1, 2), 2), ((2, 2), 8), ((3, 3), 763)])
def test_rectangle_partition_counts(shape, count):
    parts = list(enumerate_rectangle_partitions(*shape))
    assert len(parts) == count == sum(count_partitions("cc", shape).values())
    assert len(set(parts)) == count


def test_larger_grid_count_by_kernel():
    assert sum(count_partitions("cc", (3, 4), Caps(cells=12)).values()) == 19105


@pytest.mark.parametrize("n, count", [(0, 1), (1, 2), (2, 8), (3, 154)])
def test_subcube_partition_counts(n, count):
    assert len(list(enumerate_subcube_partitions(n))) == count


def test_labeled_counts():
    assert labeled_partition_count(named.xor1()) == 58
    assert len(list(enumerate_labeled_partitions(named.xor1()))) == 58
    three = Relation("cc", ("a", "b", "c"), (frozenset({0}),), x_size=1, y_size=1)
    assert labeled_partition_count(three) == 3
    assert labeled_partition_count(named.parity(1)) == 6
    assert sorted(count_partitions("cc", (2, 2)).items()) == [(1, 1), (2, 2), (3, 4), (4, 1)]


def test_block_at_examples():
    rows = LabeledPartition.build("cc", (2, 2), [(0, Rectangle(0b01, 0b11)), (1, Rectangle(0b10, 0b11))])
    assert block_at(rows, 1 * 2 + 0) == rows.blocks[1]
    full = LabeledPartition.build("cc", (2, 2), [(0, Rectangle(0b11, 0b11))])
    assert all(block_at(full, c) == full.blocks[0] for c in range(4))
    q = LabeledPartition.build("query", (2,), [(0, Assignment.from_pattern("0*")),
                                               (1, Assignment.from_pattern("1*"))])
    assert block_at(q, int("01", 2)).block == Assignment.from_pattern("0*")


def test_partition_build_rejects_overlap_and_gaps():
    with pytest.raises(PartitionError):
        LabeledPartition.build("cc", (2, 2), [(0, Rectangle(0b11, 0b11)), (0, Rectangle(0b01, 0b01))])
    with pytest.raises(PartitionError):
        LabeledPartition.build("cc", (2, 2), [(0, Rectangle(0b01, 0b11))])


def test_partition_cost_conventions():
    q = LabeledPartition.build("query", (2,), [(0, Assignment.from_pattern("0*")),
                                               (1, Assignment.from_pattern("10")),
                                               (0, Assignment.from_pattern("11"))])
    assert q.block_count == 3 and q.max_assignment_size == 2
    assert q.cost == 2 + 4 + 4


def test_caps():
    with pytest.raises(CapExceeded):
        list(enumerate_rectangle_partitions(4, 4))
    assert active_caps(env="") == DEFAULT
    assert active_caps(allow_large=True, env="") == HARD
    lowered = active_caps(env="cells=6,query_n=2")
    assert lowered.cells == 6 and lowered.query_n == 2
    assert active_caps(env="cells=99").cells == DEFAULT.cells      # never raised
    with pytest.raises(ValueError):
        active_caps(env="bogus=1")
