"""Command-line front end.

Batch commands over the library: deal bundles to files, reconstruct,
run recovery protocols, dealerless setup, security analysis with a
report directory (delimited table, JSON, figures), and a narrated
walkthrough of the naive-mode leak.

Exit codes: 0 success, 2 usage/validation, 3 protocol refusal,
4 i/o failure.  All randomness flows from --seed through a fixed
per-party derivation, so every command is reproducible.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
from typing import Optional, Sequence

from . import analysis, files, figures
from .field import field_descriptor, parse_field_descriptor
from .harness import Transcript, adversary_view, derive_party_seed, make_parties, run_recovery, run_setup
from .recovery import (
    MODES,
    NAIVE,
    FULL_STATE,
    RecoveryLedger,
    RecoveryRefused,
    RecoverySession,
    naive_contribution,
    leak_extract_demo,
)
from .scheme import (
    LAYOUT_PARTICIPANT_MAJOR,
    LAYOUT_SECRETS_FIRST,
    LAYOUTS,
    Params,
    deal_random,
    deal_with_secrets,
    make_layout,
    reconstruct_all,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_REFUSED = 3
EXIT_IO = 4

CHECKS = ("rank", "entropy", "perfectness")


def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="number of participants")
    p.add_argument("--k", type=int, help="recovery threshold")
    p.add_argument("--field", help="field descriptor: p=<prime> or gf2=<s>[ poly=<hex>]")
    p.add_argument(
        "--layout",
        choices=LAYOUTS,
        default=LAYOUT_PARTICIPANT_MAJOR,
        help="evaluation-point layout (default: %(default)s)",
    )


def _params_from_args(args) -> Params:
    if args.n is None or args.k is None or args.field is None:
        raise ValueError("--n, --k and --field are required here")
    return Params(args.n, args.k, parse_field_descriptor(args.field))


def _parse_members(text: Optional[str]) -> tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"bad participant list {text!r}: use e.g. 1,3") from None


def _dealer_rng(seed: int) -> random.Random:
    # the dealer is "party 0" of the seed fan-out
    return random.Random(derive_party_seed(seed, 0))


# ---------------------------------------------------------------------------
# commands


def cmd_deal(args) -> int:
    params = _params_from_args(args)
    layout = make_layout(params, args.layout)
    rng = _dealer_rng(args.seed)
    if args.secrets:
        secrets = files.read_secrets(args.secrets, params.spec, count=params.n)
        dealing = deal_with_secrets(params, layout, secrets, rng)
    else:
        dealing = deal_random(params, layout, rng)
    os.makedirs(args.out, exist_ok=True)
    for i in range(1, params.n + 1):
        files.write_bundle(
            os.path.join(args.out, f"bundle-{i}.txt"), params, args.layout, dealing.bundle(i)
        )
    print(f"wrote {params.n} bundle files to {args.out}")
    print(f"share size: {params.share_len} elements/participant")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    params, layout_id, bundles = files.read_bundles(args.bundles)
    layout = make_layout(params, layout_id)
    _, secrets = reconstruct_all(params, layout, bundles)
    for i, s in enumerate(secrets, start=1):
        print(f"secret {i}: {s.to_hex()}")
    return EXIT_OK


def _ledger_from_history(params: Params, layout, paths: Sequence[str]) -> RecoveryLedger:
    ledger = RecoveryLedger(params, layout)
    for path in paths:
        transcript = files.read_transcript(path)
        if transcript.params != params or transcript.layout_id != layout.layout_id:
            raise ValueError(f"{path}: history transcript belongs to a different instance")
        for s in transcript.sessions:
            if s.kind == "recover" and s.mode == NAIVE:
                ledger.record(
                    RecoverySession(params, layout, s.requester, s.quorum, NAIVE, s.session_id)
                )
    return ledger


def cmd_recover(args) -> int:
    params, layout_id, bundles = files.read_bundles(args.bundles)
    layout = make_layout(params, layout_id)
    if len(bundles) != params.k:
        raise ValueError(f"recovery needs the k = {params.k} quorum bundles, got {len(bundles)}")
    parties = make_parties(params, args.seed)
    for b in bundles:
        parties[b.participant].bundle = b
    quorum = tuple(b.participant for b in bundles)
    ledger = _ledger_from_history(params, layout, args.history or [])
    outcome, transcript = run_recovery(
        parties,
        params,
        layout,
        args.requester,
        quorum,
        args.mode,
        ledger=ledger,
        session_seed=args.seed,
    )
    os.makedirs(args.out, exist_ok=True)
    transcript_path = os.path.join(args.out, "transcript.txt")
    files.write_transcript(transcript_path, transcript)
    if args.mode == FULL_STATE:
        print(f"recovered secret of participant {args.requester}: {outcome.secret.to_hex()}")
        print(f"recovered share: {','.join(v.to_hex() for v in outcome.share)}")
    else:
        print(f"recovered secret of participant {args.requester}: {outcome.to_hex()}")
    print(f"transcript: {transcript_path}")
    return EXIT_OK


def cmd_setup(args) -> int:
    params = _params_from_args(args)
    layout = make_layout(params, args.layout)
    secrets = None
    if args.secrets:
        secrets = files.read_secrets(args.secrets, params.spec, count=params.n)
    parties, transcript = run_setup(
        params, layout, args.seed, secrets=secrets, delivery_order=args.delivery_order
    )
    os.makedirs(args.out, exist_ok=True)
    for i, party in sorted(parties.items()):
        files.write_bundle(
            os.path.join(args.out, f"bundle-{i}.txt"), params, args.layout, party.bundle
        )
    transcript_path = os.path.join(args.out, "transcript.txt")
    files.write_transcript(transcript_path, transcript)
    print(f"dealerless setup of {params.n} participants complete")
    print(f"wrote {params.n} bundle files and {transcript_path}")
    return EXIT_OK


def _signed(spec, value: int) -> int:
    return value - spec.p if value > spec.p // 2 else value


def _format_combination(aparams: Params, targets: Sequence[int], combo) -> str:
    spec = aparams.spec
    nz = [c for c in combo if c % spec.p]
    scale = pow(nz[-1], -1, spec.p)
    terms = []
    for i, c in zip(targets, combo):
        c = c * scale % spec.p
        if c:
            terms.append(f"{_signed(spec, c)}*secret({i})")
    return " + ".join(terms)


def cmd_analyze(args) -> int:
    transcript = None
    if args.transcript:
        transcript = files.read_transcript(args.transcript)
        params, layout_id = transcript.params, transcript.layout_id
    elif args.bundles:
        params, layout_id, _ = files.read_bundles(args.bundles)
    else:
        params = _params_from_args(args)
        layout_id = args.layout
    if transcript is None:
        transcript = Transcript(params, layout_id)

    checks = tuple(args.checks.split(","))
    unknown = [c for c in checks if c not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks {unknown}: choose from {', '.join(CHECKS)}")
    coalition = _parse_members(args.coalition)
    granted = _parse_members(args.grant)

    rows: list[dict] = []
    verdicts: dict[str, str] = {}
    rank_entries: list[tuple[str, int]] = []
    deviations: list[tuple[str, float]] = []
    aparams, _ = analysis.analysis_instance(params, layout_id)
    dim = params.degree_bound

    def row(check, subject, metric, value, expected="", deviation="", verdict=""):
        rows.append(
            {
                "check": check,
                "subject": subject,
                "metric": metric,
                "value": str(value),
                "expected": str(expected),
                "deviation": str(deviation),
                "verdict": verdict,
            }
        )

    print(f"instance: n={params.n} k={params.k} |F|={params.spec.order} layout={layout_id} (D={dim})")

    if "rank" in checks:
        subject = "coalition {" + ",".join(str(m) for m in coalition) + "}"
        view = adversary_view(transcript, coalition)
        km = analysis.km_from_view(view)
        rank, codim = analysis.km_rank(km), analysis.km_codim(km)
        print(f"{subject}: rank {rank} of {dim}, codimension {codim}")
        row("rank", subject, "rank", rank)
        row("rank", subject, "codim", codim)
        rank_entries.append((subject, rank))
        targets = [i for i in range(1, params.n + 1) if i not in coalition]
        if targets:
            target_rows = analysis.secret_rows(params, layout_id, targets)
            combo = analysis.km_leaked_combination(km, target_rows)
            shown = _format_combination(aparams, targets, combo) if combo else "none"
            print(f"leaked combination of outside secrets: {shown}")
            row("rank", subject, "combination", shown, verdict="leak" if combo else "clean")
        if granted:
            gsubject = subject + " + secrets of {" + ",".join(str(g) for g in granted) + "}"
            gview = adversary_view(transcript, coalition, granted=granted)
            gkm = analysis.km_from_view(gview)
            grank, gcodim = analysis.km_rank(gkm), analysis.km_codim(gkm)
            print(f"{gsubject}: rank {grank} of {dim}, codimension {gcodim}")
            row("rank", gsubject, "rank", grank)
            row("rank", gsubject, "codim", gcodim)
            rank_entries.append((gsubject, grank))
            for i in targets:
                if i in granted:
                    continue
                (target_row,) = analysis.secret_rows(params, layout_id, [i])
                if analysis.km_contains(gkm, target_row):
                    print(f"secret({i}) is fully determined by the granted view")
                    row("rank", gsubject, "determined", f"secret({i})", verdict="leak")
        verdicts["rank"] = "done"

    if "entropy" in checks:
        aspec = aparams.spec
        s_bits = math.log2(aspec.order)
        queries: dict[str, tuple] = {}
        expected: dict[str, float] = {}
        for i in range(1, params.n + 1):
            queries[f"secret({i})"] = (("secret", i),)
            expected[f"secret({i})"] = s_bits
        for i in range(1, params.n + 1):
            queries[f"share({i})"] = tuple(
                ("share", i, j) for j in range(1, params.n - params.k + 1)
            )
            expected[f"share({i})"] = (params.n - params.k) * s_bits
        queries["all secrets"] = tuple(("secret", i) for i in range(1, params.n + 1))
        expected["all secrets"] = params.n * s_bits
        report = analysis.entropy_oracle(params, layout_id, queries)
        worst = 0.0
        for label in queries:
            got, want = report.bits[label], expected[label]
            dev = abs(got - want)
            worst = max(worst, dev)
            print(f"H({label}) = {got:.6f} bits (expected {want:.6f})")
            row("entropy", label, "bits", f"{got:.9f}", f"{want:.9f}", f"{dev:.3e}",
                "ok" if dev <= args.tol else "FAIL")
            deviations.append((f"H({label})", dev))
        if report.twinned:
            print(f"(binary instance analyzed on its prime twin, |F|={aspec.order})")
        verdicts["entropy"] = "PASS" if worst <= args.tol else "FAIL"
        print(f"entropy check: {verdicts['entropy']} (max deviation {worst:.3e})")

    if "perfectness" in checks:
        report = analysis.verify_perfectness(params, layout_id, tol=args.tol)
        verdicts["perfectness"] = "PASS" if report.ok else "FAIL"
        for c in report.checks:
            subject = f"H(secret({c.target}) | coalition {set(c.coalition) or '{}'}, other secrets)"
            dev = c.deviation
            row("perfectness", subject, "bits", f"{c.bits:.9f}", f"{c.expected:.9f}",
                f"{dev:.3e}", "ok" if dev <= args.tol else "FAIL")
            deviations.append((subject, dev))
        print(
            f"perfectness: {verdicts['perfectness']} "
            f"({len(report.checks)} conditional entropies, max deviation {report.max_deviation:.3e})"
        )

    if args.sabotage:
        report = analysis.sabotage_perfectness(aparams.spec, tol=args.tol)
        verdict = "FAIL" if not report.ok else "PASS"
        verdicts["sabotage"] = verdict
        for c in report.checks:
            subject = f"sabotage H(secret({c.target}) | coalition {set(c.coalition) or '{}'}, other secrets)"
            row("sabotage", subject, "bits", f"{c.bits:.9f}", f"{c.expected:.9f}",
                f"{c.deviation:.3e}", "ok" if c.deviation <= args.tol else "FAIL")
            deviations.append((subject, c.deviation))
        print(
            f"sabotage control: {verdict} as a secret-sharing scheme "
            f"(max deviation {report.max_deviation:.3e}; FAIL is the expected outcome)"
        )

    if args.out:
        os.makedirs(args.out, exist_ok=True)
        tsv_path = os.path.join(args.out, "report.tsv")
        columns = ["check", "subject", "metric", "value", "expected", "deviation", "verdict"]
        with open(tsv_path, "w", encoding="ascii") as fh:
            fh.write("\t".join(columns) + "\n")
            for r in rows:
                fh.write("\t".join(r[c] for c in columns) + "\n")
        json_path = os.path.join(args.out, "report.json")
        payload = {
            "instance": {
                "n": params.n,
                "k": params.k,
                "field": field_descriptor(params.spec),
                "layout": layout_id,
                "dimension": dim,
            },
            "coalition": list(coalition),
            "granted": list(granted),
            "verdicts": verdicts,
            "rows": rows,
        }
        with open(json_path, "w", encoding="ascii") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        written = [tsv_path, json_path]
        if rank_entries:
            fig_path = os.path.join(args.out, "knowledge.png")
            figures.save_rank_figure(fig_path, dim, rank_entries)
            written.append(fig_path)
        if deviations:
            fig_path = os.path.join(args.out, "deviations.png")
            figures.save_deviation_figure(
                fig_path, "entropy deviations", deviations, args.tol
            )
            written.append(fig_path)
        print("report written: " + ", ".join(written))
    return EXIT_OK


def cmd_demo_leak(args) -> int:
    spec = parse_field_descriptor("p=13")
    params = Params(3, 2, spec)
    layout = make_layout(params, LAYOUT_SECRETS_FIRST)
    dealing = deal_random(params, layout, _dealer_rng(args.seed))
    session = RecoverySession(params, layout, 1, (2, 3), NAIVE)
    t_b = naive_contribution(session, dealing.bundle(2)).value
    t_c = naive_contribution(session, dealing.bundle(3)).value

    r = {x: dealing.polynomial.evaluate(spec.element(x)) for x in range(6)}
    print(f"naive-recovery leak demo: 2-of-3 over p=13, secrets-first layout, seed {args.seed}")
    print("secrets   r(0)..r(2): " + " ".join(r[x].to_hex() for x in range(3)))
    print("shares    r(3)..r(5): " + " ".join(r[x].to_hex() for x in range(3, 6)))
    print("participant 1 lost its secret r(0) and asks {2, 3} in naive mode:")
    print(f"  t_b (from 2) = {t_b.to_hex()}")
    print(f"  t_c (from 3) = {t_c.to_hex()}")
    print(f"  t_b + t_c    = {(t_b + t_c).to_hex()}  -> its secret r(0) = {r[0].to_hex()}")
    print("the requester now combines its own share r(3) with the clear sums:")
    try:
        extracted = leak_extract_demo(dealing, t_b, t_c)
    except AssertionError as exc:
        print(f"self-check failed: {exc}", file=sys.stderr)
        return 1
    expected = -r[1] + r[2]
    print(f"  (2/3)*(r(3) - (2/5)*t_b - (1/4)*t_c) = {extracted.to_hex()}")
    print(f"  -r(1) + r(2)                         = {expected.to_hex()}")
    print("leak confirmed: -1*secret(2) + 1*secret(3), which no single participant may know")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gruppen",
        description="k-of-n multiple secret sharing with private recovery",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deal", help="deal bundles from a single dealer")
    _instance_args(p)
    p.add_argument("--seed", type=int, default=0, help="dealer randomness seed")
    p.add_argument("--secrets", help="optional secrets file (one hex element per line)")
    p.add_argument("--out", required=True, help="output directory for bundle files")
    p.set_defaults(func=cmd_deal)

    p = sub.add_parser("reconstruct", help="recover all secrets from k bundle files")
    p.add_argument("bundles", nargs="+", help="bundle files of a quorum")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("recover", help="run a recovery protocol for one participant")
    p.add_argument("bundles", nargs="+", help="bundle files of the k quorum members")
    p.add_argument("--requester", type=int, required=True, help="participant recovering its data")
    p.add_argument("--mode", choices=MODES, default="masked")
    p.add_argument("--seed", type=int, default=0, help="seed for mask randomness")
    p.add_argument(
        "--history",
        action="append",
        help="earlier transcript file feeding the naive-mode policy gate (repeatable)",
    )
    p.add_argument("--out", required=True, help="output directory for the transcript")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("setup", help="dealerless setup: every participant deals its own secret")
    _instance_args(p)
    p.add_argument("--seed", type=int, default=0, help="master seed fanned out per party")
    p.add_argument("--secrets", help="optional secrets file (participant order)")
    p.add_argument(
        "--delivery-order",
        choices=["index", "reverse"],
        default="index",
        help="message delivery schedule (result is order-independent)",
    )
    p.add_argument("--out", required=True, help="output directory for bundles + transcript")
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("analyze", help="security analysis: ranks, entropies, perfectness")
    _instance_args(p)
    p.add_argument("--transcript", help="analyze the views arising from this transcript file")
    p.add_argument("--bundles", nargs="*", help="bundle files naming the instance instead")
    p.add_argument("--coalition", help="comma-separated participants, e.g. 1,3")
    p.add_argument("--grant", help="participants whose secrets the coalition is granted")
    p.add_argument(
        "--checks",
        default="rank",
        help="comma-separated subset of: rank, entropy, perfectness (default: rank)",
    )
    p.add_argument(
        "--sabotage",
        action="store_true",
        help="also run the broken pairwise-sum fixture (negative control; must FAIL)",
    )
    p.add_argument("--tol", type=float, default=1e-9, help="entropy tolerance in bits")
    p.add_argument("--out", help="report directory (tsv + json + figures)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("demo-leak", help="narrated naive-mode leak walkthrough")
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_demo_leak)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RecoveryRefused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
