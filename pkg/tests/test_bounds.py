from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from pbl import named
from pbl.bounds import (CertificateMismatch, DualCertificate, build_prt, build_pprt_direct,
                        build_pprt_reduced, compute_bound, log2_bracket, min_weight_partition,
                        parse_eps, signature_columns, verify_dual_certificate)
from pbl.caps import CapExceeded, HARD
from pbl.relation import Relation, enumerate_labeled_partitions

EPS = (F(0), F(1, 8), F(1, 4))


def test_parse_eps():
    assert parse_eps("1/8") == F(1, 8)
    assert parse_eps("0") == 0
    for bad in ("0.125", "1e-1", "1", "-1/8", "3/2", "x"):
        with pytest.raises(ValueError):
            parse_eps(bad)


@pytest.mark.parametrize("q, bracket", [(F(4), (2, 2)), (F(3), (1, 2)), (F(1), (0, 0)),
                                        (F(1, 3), (-2, -1)), (F(37, 8), (2, 3))])
def test_log2_bracket(q, bracket):
    assert log2_bracket(q) == bracket


def test_prt_instance_shape():
    lp = build_prt(named.xor1(), 0)
    assert lp.num_vars == 18 and len(lp.constraints) == 8


@pytest.mark.parametrize("rel, kind, eps, value, bracket", [
    (named.xor1(), "pprt", 0, 4, (2, 2)),
    (named.xor1(), "prt", 0, 4, (2, 2)),
    (named.and1(), "prt", 0, 3, (1, 2)),
    (named.and1(), "pprt", 0, 3, (1, 2)),
    (named.constant(), "prt", F(1, 4), 1, (0, 0)),
    (named.constant(), "pprt", F(1, 8), 1, (0, 0)),
    (named.xor1(), "pprt", F(1, 8), F(13, 4), (1, 2)),
    (named.and1(), "pprt", F(1, 4), 2, (1, 1)),
    (named.equality(3), "pprt", F(1, 8), F(37, 8), (2, 3)),
    (named.parity(1), "pprt", 0, 4, (2, 2)),
    (named.parity(2), "pprt", 0, 16, (4, 4)),
    (named.parity(3), "pprt", 0, 64, (6, 6)),
    (named.parity(3), "pprt", F(1, 8), F(193, 4), (5, 6)),
])
def test_known_values(rel, kind, eps, value, bracket):
    rep = compute_bound(rel, eps, kind)
    assert rep.status == "optimal"
    assert rep.value == value == rep.dual_value
    assert rep.bracket == bracket
    verdict = verify_dual_certificate(rel, eps, rep.certificate)
    assert verdict.ok and verdict.value == value


def test_eps_zero_is_flagged():
    assert any("extension" in n for n in compute_bound(named.xor1(), 0).notes)
    assert not any("extension" in n for n in compute_bound(named.xor1(), "1/8").notes)


def test_infeasible_relation_is_a_status():
    rel = Relation("cc", ("0", "1"), (frozenset(), frozenset({0})), x_size=1, y_size=2)
    for kind in ("prt", "pprt"):
        rep = compute_bound(rel, F(1, 8), kind)
        assert rep.status == "infeasible" and rep.infeasibility_certified
        assert any("(0,0)" in n for n in rep.notes)


def test_witness_is_a_distribution():
    rep = compute_bound(named.equality(3), F(1, 4))
    assert sum(a for a, _ in rep.support) == 1
    assert sum(a * p.block_count for a, p in rep.support) == rep.value
    rel = rep.relation
    for c in range(rel.num_inputs):
        ok = sum(a for a, p in rep.support if p.label_at[c] in rel.accept[c])
        assert ok >= 1 - rep.eps


def test_reduced_matches_full_column_set():
    rel = named.random_cc(2, 3, seed=4, num_outputs=3)
    full = list(enumerate_labeled_partitions(rel))
    for eps in EPS:
        a = compute_bound(rel, eps).value
        lp = build_pprt_reduced(rel, eps, partitions=full)
        from pbl.lp import solve_lp
        assert solve_lp(lp).value == a


def test_signature_pruning_keeps_value():
    rel = named.random_cc(3, 3, seed=9)
    pruned = signature_columns(rel)
    unpruned = signature_columns(rel, prune=False)
    assert len(pruned) <= len(unpruned)
    from pbl.lp import solve_lp
    for eps in EPS[1:]:
        assert (solve_lp(build_pprt_reduced(rel, eps, pruned)).value
                == solve_lp(build_pprt_reduced(rel, eps, unpruned)).value)


def test_direct_equals_reduced_on_query_side():
    rel = named.or_n(2)
    for eps in EPS:
        assert compute_bound(rel, eps, mode="direct").value == compute_bound(rel, eps).value


def test_direct_cap():
    with pytest.raises(CapExceeded):
        build_pprt_direct(named.equality(3), F(1, 8))


def test_large_grid_needs_allow_large():
    with pytest.raises(CapExceeded):
        compute_bound(named.equality(4), F(1, 8))


@pytest.mark.slow
def test_large_grid_under_hard_caps():
    rep = compute_bound(named.random_cc(4, 4, seed=1), F(1, 8), caps=HARD)
    assert rep.value == F(13, 4)


# ---------------------------------------------------------------- certificates

def test_zero_certificate_accepted():
    rel = named.xor1()
    cert = DualCertificate("pprt", "cc", F(0), {}, {})
    verdict = verify_dual_certificate(rel, 0, cert)
    assert verdict.ok and verdict.value == 0


def test_single_phi_certificate():
    rel = named.constant()
    for kind in ("prt", "pprt"):
        cert = DualCertificate(kind, "cc", F(1, 8), {}, {2: F(1)})
        verdict = verify_dual_certificate(rel, F(1, 8), cert)
        assert verdict.ok and verdict.value == 1


def test_tampered_certificate_names_block():
    rel = named.xor1()
    cert = compute_bound(rel, 0).certificate
    key = sorted(cert.v)[0]
    cert.v[key] += 1
    verdict = verify_dual_certificate(rel, 0, cert)
    assert not verdict.ok
    assert any(v.startswith("block ") for v in verdict.violations)


def test_lambda_too_large_rejected():
    rel = named.and1()
    cert = compute_bound(rel, F(1, 8)).certificate
    cert.lam += F(1, 100)
    verdict = verify_dual_certificate(rel, F(1, 8), cert)
    assert not verdict.ok and "partition constraint" in verdict.violations[-1]


def test_certificate_mismatch():
    cert = compute_bound(named.xor1(), 0).certificate
    with pytest.raises(CertificateMismatch):
        verify_dual_certificate(named.xor1(), F(1, 8), cert)
    with pytest.raises(CertificateMismatch):
        verify_dual_certificate(named.parity(2), 0, cert)


@pytest.mark.parametrize("fill, value, blocks", [(0, 0, None), (1, 1, 1), (-1, -4, 4)])
def test_min_weight_partition_examples(fill, value, blocks):
    rel = named.xor1()
    space = rel.block_space()
    v = {(z, b): F(fill) for b in range(len(space.blocks)) for z in range(2)}
    got, witness = min_weight_partition(v, "cc", (2, 2), 2)
    assert got == value
    if blocks is not None:
        assert witness.block_count == blocks


def test_min_weight_matches_enumeration():
    import random
    rel = named.random_cc(2, 3, seed=1)
    space = rel.block_space()
    rng = random.Random(0)
    v = {(z, b): F(rng.randint(-9, 9), rng.randint(1, 5))
         for b in range(len(space.blocks)) for z in range(2)}
    brute = min(sum(v[(lb.z, space.index(lb.block))] for lb in p.blocks)
                for p in enumerate_labeled_partitions(rel))
    assert min_weight_partition(v, "cc", rel.shape, 2)[0] == brute


def test_min_weight_huge_weights_exact():
    rel = named.xor1()
    space = rel.block_space()
    v = {(z, b): F(10 ** 30 + b, 3) for b in range(len(space.blocks)) for z in range(2)}
    got, witness = min_weight_partition(v, "cc", (2, 2), 2)
    assert witness.block_count == 1 and got == F(10 ** 30 + space.index(witness.blocks[0].block), 3)


# ---------------------------------------------------------------- properties

cc_rel = st.builds(
    lambda acc: Relation("cc", ("0", "1"), tuple(frozenset(z for z in (0, 1) if s >> z & 1) or frozenset({0})
                                                 for s in acc), x_size=2, y_size=3),
    st.lists(st.integers(1, 3), min_size=6, max_size=6))


@settings(max_examples=25, deadline=None)
@given(cc_rel, st.sampled_from(EPS))
def test_prt_below_pprt_and_certificates_tight(rel, eps):
    prt = compute_bound(rel, eps, "prt")
    pprt = compute_bound(rel, eps, "pprt")
    assert prt.value <= pprt.value
    for rep in (prt, pprt):
        verdict = verify_dual_certificate(rel, eps, rep.certificate)
        assert verdict.ok and verdict.value == rep.value


@settings(max_examples=20, deadline=None)
@given(cc_rel)
def test_monotone_in_eps(rel):
    vals = [compute_bound(rel, e).value for e in EPS]
    assert vals[0] >= vals[1] >= vals[2] >= 1
