import json
from fractions import Fraction as F
from pathlib import Path

import pytest

from pbl import named
from pbl.bounds import compute_bound, verify_dual_certificate
from pbl.cli import main
from pbl.formats import (canonical, certificate_from_json, certificate_to_json, parse_q,
                         protocol_from_json, protocol_to_json)
from pbl.relation import MalformedInput, dump_relation
from pbl.report import render_report
from pbl.synth import evaluate_protocol, run_pipeline

DATA = Path(__file__).resolve().parent.parent / "data"


def test_parse_q():
    assert parse_q("3/4") == F(3, 4) and parse_q(2) == 2
    for bad in ("0.5", 0.5, True, "1/0", "abc"):
        with pytest.raises(MalformedInput):
            parse_q(bad)


@pytest.mark.parametrize("rel, eps", [(named.xor1(), 0), (named.equality(3), F(1, 8)),
                                      (named.parity(2), F(1, 4))])
@pytest.mark.parametrize("kind", ["prt", "pprt"])
def test_certificate_round_trip(rel, eps, kind):
    rep = compute_bound(rel, eps, kind)
    text = canonical(certificate_to_json(rep.certificate, rel))
    back = certificate_from_json(text, rel)
    verdict = verify_dual_certificate(rel, eps, back)
    assert verdict.ok and verdict.value == rep.value
    assert "." not in "".join(json.loads(text)["mu"].values())


def test_certificate_unknown_block():
    rel = named.xor1()
    doc = certificate_to_json(compute_bound(rel, 0).certificate, rel)
    doc["v"]["0:0,5:0"] = "1/1"
    with pytest.raises(MalformedInput):
        certificate_from_json(doc, rel)


@pytest.mark.parametrize("rel", [named.equality(3), named.majority3()])
def test_protocol_round_trip(rel):
    res = run_pipeline(rel, F(1, 8))
    text = canonical(protocol_to_json(res.protocol))
    back = protocol_from_json(text)
    assert back == res.protocol
    assert evaluate_protocol(back, rel).correct == res.evaluation.correct
    assert canonical(protocol_to_json(back)) == text


def test_protocol_version_checked():
    doc = protocol_to_json(run_pipeline(named.xor1(), F(1, 4)).protocol)
    doc["format_version"] = 2
    with pytest.raises(MalformedInput):
        protocol_from_json(doc)


def test_reports_are_deterministic():
    rep = compute_bound(named.and1(), F(1, 8))
    for fmt in ("text", "json"):
        assert render_report(rep, fmt) == render_report(compute_bound(named.and1(), F(1, 8)), fmt)
    text = render_report(rep)
    for row in ("kind", "side", "eps", "V (exact)", "log2 V bracket"):
        assert row in text
    ev = run_pipeline(named.xor1(), F(1, 8)).evaluation
    doc = json.loads(render_report(ev, "json", named.xor1()))
    assert set(doc["correct"]) == {"(0,0)", "(0,1)", "(1,0)", "(1,1)"}
    assert all("/" in v for v in doc["correct"].values())


# ---------------------------------------------------------------- cli

def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_pprt_xor(capsys):
    code, out, _ = run(capsys, "pprt", "--input", str(DATA / "xor1.json"), "--eps", "0")
    assert code == 0 and "V=4, bracketing [2,2]" in out


def test_cli_bad_certificate_names_block(capsys, tmp_path):
    cert = tmp_path / "c.json"
    xor = str(DATA / "xor1.json")
    assert run(capsys, "pprt", "--input", xor, "--eps", "0", "--cert-out", str(cert))[0] == 0
    assert run(capsys, "check-cert", "--input", xor, "--eps", "0", "--cert", str(cert))[0] == 0
    doc = json.loads(cert.read_text())
    key = sorted(doc["v"])[0]
    doc["v"][key] = str(F(doc["v"][key]) + 1)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "check-cert", "--input", xor, "--eps", "0", "--cert", str(bad))
    assert code == 5 and f"block {key}" in out


def test_cli_cap_exit(capsys):
    code, _, err = run(capsys, "pprt", "--input", str(DATA / "eq4x4.json"), "--eps", "1/8")
    assert code == 3 and "--allow-large" in err


def test_cli_env_caps_only_lower(capsys, monkeypatch):
    monkeypatch.setenv("PBL_CAPS", "cells=4")
    assert run(capsys, "pprt", "--relation", "eq3", "--eps", "1/8")[0] == 3
    monkeypatch.setenv("PBL_CAPS", "cells=99")
    assert run(capsys, "pprt", "--relation", "eq3", "--eps", "1/8")[0] == 0


@pytest.mark.parametrize("argv", [
    ("pprt", "--relation", "xor1", "--eps", "0.125"),
    ("pprt", "--relation", "xor1", "--eps", "1"),
    ("pprt", "--relation", "nope", "--eps", "0"),
    ("pprt", "--input", "/nonexistent.json", "--eps", "0"),
    ("pprt", "--eps", "0"),
])
def test_cli_malformed(capsys, argv):
    assert run(capsys, *argv)[0] == 4


def test_cli_infeasible(capsys, tmp_path):
    f = tmp_path / "r.json"
    f.write_text(json.dumps({"kind": "cc", "outputs": ["0", "1"], "x_size": 1, "y_size": 2,
                             "accept": [[[], [0]]]}))
    code, out, _ = run(capsys, "prt", "--input", str(f), "--eps", "1/8")
    assert code == 2 and "infeasible" in out


def test_cli_synth_and_verify(capsys, tmp_path):
    proto = tmp_path / "p.json"
    code, out, _ = run(capsys, "synth", "--relation", "eq3", "--eps", "1/8",
                       "--protocol-out", str(proto), "--seed", "1")
    assert code == 0 and "check error <= 2 eps" in out and "sample (seed 1)" in out
    assert run(capsys, "verify", "--relation", "eq3", "--protocol", str(proto), "--eps", "1/4")[0] == 0
    assert run(capsys, "verify", "--relation", "eq3", "--protocol", str(proto), "--eps", "1/16")[0] == 5
    doc = json.loads(proto.read_text())
    entry = doc["support"][0]
    entry["tree"] = {"out": 1 - entry["partition"]["blocks"][0]["z"]}
    proto.write_text(json.dumps(doc))
    assert run(capsys, "verify", "--relation", "eq3", "--protocol", str(proto))[0] == 5


def test_cli_oracle(capsys, tmp_path):
    proto = tmp_path / "o.json"
    code, out, _ = run(capsys, "oracle", "--relation", "and1", "--protocol-out", str(proto),
                       "--crosscheck", "0")
    assert code == 0 and "dcc" in out and "crosscheck  pass" in out
    assert run(capsys, "verify", "--relation", "and1", "--protocol", str(proto), "--eps", "0")[0] == 0


def test_cli_json_output_is_canonical(capsys):
    _, a, _ = run(capsys, "pprt", "--relation", "and1", "--eps", "1/8", "--format", "json")
    _, b, _ = run(capsys, "pprt", "--relation", "and1", "--eps", "1/8", "--format", "json")
    assert a == b and a == canonical(json.loads(a))
    assert json.loads(a)["value"] == "5/2"


def test_data_files_match_named():
    for key in ("xor1", "and1", "eq3", "parity2", "maj3"):
        doc = json.loads((DATA / f"{key}.json").read_text())
        assert doc == dump_relation(named.REGISTRY[key]())


def test_cli_suite_subset(capsys):
    code, out, _ = run(capsys, "suite", "--only", "1,8")
    assert code == 0 and out.count("[PASS]") == 2
