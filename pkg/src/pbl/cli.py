"""``pbl`` command line.

Exit codes: 0 ok, 2 LP infeasible, 3 cap exceeded, 4 malformed input,
5 verification failure.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import named
from .bounds import CertificateMismatch, compute_bound, parse_eps, verify_dual_certificate
from .caps import CapExceeded, active_caps
from .formats import (canonical, certificate_from_json, certificate_to_json,
                      protocol_from_json, protocol_to_json, read_json)
from .oracles import crosscheck_pprt, det_cc, det_query
from .relation import MalformedInput, load_relation
from .report import render_report
from .synth import (MalformedTree, RandomizedProtocol, SupportEntry, SynthesisError,
                    evaluate_protocol, run_pipeline, tree_to_partition)

EXIT_OK, EXIT_INFEASIBLE, EXIT_CAP, EXIT_MALFORMED, EXIT_VERIFY = 0, 2, 3, 4, 5


class VerificationFailed(Exception):
    pass


def _relation(args):
    if args.relation:
        try:
            return named.REGISTRY[args.relation]()
        except KeyError:
            raise MalformedInput(f"unknown named relation {args.relation!r}; "
                                 f"known: {', '.join(sorted(named.REGISTRY))}") from None
    if not args.input:
        raise MalformedInput("give --input FILE or --relation NAME")
    with open(args.input) as fh:
        return load_relation(fh.read())


def _eps(text):
    try:
        return parse_eps(text)
    except ValueError as e:
        raise MalformedInput(str(e)) from None


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _emit(args, obj, relation=None):
    text = render_report(obj, args.format, relation)
    sys.stdout.write(text)
    if getattr(args, "report", None):
        _write(args.report, text)


def cmd_bound(args, caps):
    rel = _relation(args)
    rep = compute_bound(rel, _eps(args.eps), args.cmd, getattr(args, "mode", "reduced"), caps)
    _emit(args, rep)
    if rep.status == "infeasible":
        return EXIT_INFEASIBLE
    if rep.status != "optimal":
        return EXIT_VERIFY
    if args.cert_out:
        _write(args.cert_out, canonical(certificate_to_json(rep.certificate, rel)))
    return EXIT_OK


def cmd_check_cert(args, caps):
    rel = _relation(args)
    cert = certificate_from_json(read_json(args.cert), rel)
    verdict = verify_dual_certificate(rel, _eps(args.eps), cert, caps=caps)
    _emit(args, verdict)
    return EXIT_OK if verdict.ok else EXIT_VERIFY


def cmd_synth(args, caps):
    rel = _relation(args)
    eps = _eps(args.eps)
    if eps == 0:
        raise MalformedInput("synth needs eps > 0")
    res = run_pipeline(rel, eps, caps)
    _emit(args, res)
    if res.report.status == "infeasible":
        return EXIT_INFEASIBLE
    if args.protocol_out:
        _write(args.protocol_out, canonical(protocol_to_json(res.protocol)))
    if args.seed is not None and args.format == "text":
        k = res.protocol.support.index(res.protocol.sample(args.seed))
        print(f"sample (seed {args.seed}): support entry {k}")
    return EXIT_OK if res.ok else EXIT_VERIFY


def cmd_verify(args, caps):
    rel = _relation(args)
    proto = protocol_from_json(read_json(args.protocol))
    for k, e in enumerate(proto.support):
        if tree_to_partition(e.tree, proto.side, proto.shape).label_at != e.partition.label_at:
            raise VerificationFailed(f"support entry {k}: tree does not realize its partition")
    try:
        ev = evaluate_protocol(proto, rel)
    except ValueError as e:
        raise MalformedInput(str(e)) from None
    _emit(args, ev, rel)
    if args.eps is not None and ev.error > _eps(args.eps):
        print(f"worst-case error {ev.error} exceeds {args.eps}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_oracle(args, caps):
    rel = _relation(args)
    cv = det_cc(rel, caps) if rel.side == "cc" else det_query(rel, caps)
    _emit(args, cv)
    if args.protocol_out:
        part = tree_to_partition(cv.witness, rel.side, rel.shape)
        proto = RandomizedProtocol(rel.side, rel.shape, (SupportEntry(Fraction(1), part, cv.witness),))
        _write(args.protocol_out, canonical(protocol_to_json(proto)))
    if args.crosscheck is not None:
        cc = crosscheck_pprt(rel, _eps(args.crosscheck), caps)
        _emit(args, cc)
        if not cc.ok:
            return EXIT_VERIFY
    return EXIT_OK


def cmd_suite(args, caps):
    from .acceptance import run_suite
    only = {int(s) for s in args.only.split(",")} if args.only else None
    results = run_suite(caps, args.allow_large, only)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pbl", description="Exact partition-bound workbench.")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, eps=True, eps_required=True):
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--input", help="relation JSON file")
        src.add_argument("--relation", help="named built-in relation (e.g. xor1, eq3, parity2)")
        if eps:
            sp.add_argument("--eps", required=eps_required, help='exact rational, e.g. "1/8"')
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--allow-large", action="store_true", help="lift caps to the hard limits")
        sp.add_argument("--report", help="also write the rendered report here")

    for name in ("prt", "pprt"):
        sp = sub.add_parser(name, help=f"compute {name} with a dual certificate")
        common(sp)
        if name == "pprt":
            sp.add_argument("--mode", choices=("reduced", "direct"), default="reduced")
        sp.add_argument("--cert-out", help="write the dual certificate here")
        sp.set_defaults(fn=cmd_bound)

    sp = sub.add_parser("check-cert", help="verify a dual certificate file")
    common(sp)
    sp.add_argument("--cert", required=True)
    sp.set_defaults(fn=cmd_check_cert)

    sp = sub.add_parser("synth", help="witness -> truncate -> synthesize -> evaluate")
    common(sp)
    sp.add_argument("--protocol-out", help="write the randomized protocol here")
    sp.add_argument("--seed", type=int, help="draw one support entry (demo)")
    sp.set_defaults(fn=cmd_synth)

    sp = sub.add_parser("verify", help="evaluate a protocol file exactly")
    common(sp, eps_required=False)
    sp.add_argument("--protocol", required=True)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("oracle", help="deterministic complexity by brute force")
    common(sp, eps=False)
    sp.add_argument("--protocol-out", help="write the witness tree as a protocol file")
    sp.add_argument("--crosscheck", metavar="EPS", help="also cross-check pprt at this eps")
    sp.set_defaults(fn=cmd_oracle)

    sp = sub.add_parser("suite", help="run the acceptance suite")
    sp.add_argument("--allow-large", action="store_true")
    sp.add_argument("--only", help="comma-separated criterion numbers")
    sp.set_defaults(fn=cmd_suite)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        caps = active_caps(args.allow_large)
        return args.fn(args, caps)
    except CapExceeded as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except (MalformedInput, MalformedTree, CertificateMismatch, OSError) as e:
        print(f"malformed input: {e}", file=sys.stderr)
        return EXIT_MALFORMED
    except (VerificationFailed, SynthesisError) as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
