"""Command-line front end.

Commands: cluster, threshold, spectrum, staircase, equi, verify.
Global flags: --json / --tsv select the report format, --seed drives the
verification suites.  Exit codes: 0 success, 2 usage or parse error,
3 cross-engine disagreement, 4 property or witness failure.

Reports go to stdout and are byte-stable for fixed inputs and seeds;
timing and the input digest go to stderr.  MITLAB_THREADS caps the
parallelism of the verification suites.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction

from .errors import DimensionError, FormatError, MitlabError, PipelineError
from .model import frac, load_model
from .oracle import QuadratureConfig, difference_integrability_2d, numeric_threshold
from .profiles import load_profile, profile_difference_integrable
from .thresholds import (
    cluster_report,
    integrability_threshold,
    jumping_spectrum,
    multiplier_staircase,
    spectrum_to_dict,
    spectrum_to_tsv,
)
from .verify import ORACLE_BRACKET_CONFIG, run_suites

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DISAGREE = 3
EXIT_PROPERTY = 4


def _digest(command: str, parts: list[str]) -> str:
    h = hashlib.sha256()
    h.update(command.encode())
    for p in parts:
        h.update(b"\x00")
        h.update(p.encode())
    return h.hexdigest()[:16]


def _file_bytes(path: str) -> str:
    with open(path, "rb") as fh:
        return fh.read().decode("utf-8", errors="replace")


def _emit(args, command: str, digest: str, payload: dict, text_lines: list[str], tsv: str, t0: float):
    if args.json:
        print(json.dumps({"command": command, "digest": digest, "result": payload}, sort_keys=True))
    elif args.tsv:
        sys.stdout.write(tsv)
    else:
        for line in text_lines:
            print(line)
    print(f"mitlab {command}: digest={digest} elapsed={time.perf_counter() - t0:.3f}s", file=sys.stderr)


def _fmt_rat(x: Fraction | None) -> str:
    return "infinity" if x is None else str(x)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_cluster(args) -> int:
    t0 = time.perf_counter()
    report = cluster_report(args.M, args.kmax, args.mmax)
    digest = _digest("cluster", [str(args.M), str(args.kmax), str(args.mmax)])
    payload = {
        "M": report.M,
        "k_values": list(report.k_values),
        "rows": [
            {
                "m": r.m,
                "xi": [str(x) for x in r.xi],
                "min_gap": str(r.min_gap),
                "witness_k": r.witness_k,
            }
            for r in report.rows
        ],
        "all_witnessed": report.all_witnessed,
    }
    lines = []
    for r in report.rows:
        xi = ", ".join(str(x) for x in r.xi)
        wit = f"witness k={r.witness_k}" if r.witness_k is not None else "no witness"
        lines.append(f"m={r.m}: {xi}  (min gap {r.min_gap}, {wit})")
    lines.append("all m witnessed" if report.all_witnessed else "some m lack a witness below 1")
    tsv_rows = ["m\tk\txi_num\txi_den\tgap_num\tgap_den"]
    for r in report.rows:
        for k, x in zip(report.k_values, r.xi):
            g = 1 - x
            tsv_rows.append(f"{r.m}\t{k}\t{x.numerator}\t{x.denominator}\t{g.numerator}\t{g.denominator}")
    _emit(args, "cluster", digest, payload, lines, "\n".join(tsv_rows) + "\n", t0)
    return EXIT_OK if report.all_witnessed else EXIT_PROPERTY


def _parse_monomial(text: str) -> tuple[Fraction, ...]:
    try:
        parts = tuple(frac(p.strip()) for p in text.split(","))
    except FormatError as exc:
        raise FormatError(f"bad monomial {text!r}: {exc}") from exc
    if any(p < 0 for p in parts):
        raise FormatError(f"monomial exponents must be >= 0, got {text!r}")
    return parts


def _cmd_threshold(args) -> int:
    t0 = time.perf_counter()
    model = load_model(args.model)
    a = _parse_monomial(args.monomial)
    digest = _digest("threshold", [_file_bytes(args.model), args.monomial, str(args.numeric)])

    exact = None
    if model.dim == 2:
        exact = integrability_threshold(model, a)
    elif not args.numeric:
        print("exact thresholds need dimension 2; pass --numeric for higher dimensions", file=sys.stderr)
        return EXIT_USAGE

    payload: dict = {}
    lines = []
    tsv_rows = ["field\tvalue"]
    if exact is not None:
        payload["exact"] = _fmt_rat(exact.value)
        payload["argmin_ray"] = None if exact.argmin_ray is None else [str(c) for c in exact.argmin_ray]
        payload["attained"] = exact.attained
        lines.append(_fmt_rat(exact.value))
        if exact.argmin_ray is not None:
            lines.append(f"argmin ray: ({', '.join(str(c) for c in exact.argmin_ray)})")
        tsv_rows.append(f"exact\t{_fmt_rat(exact.value)}")

    agreement = None
    if args.numeric:
        bracket = numeric_threshold(model, a, ORACLE_BRACKET_CONFIG)
        payload["numeric"] = {
            "lo": bracket.lo,
            "hi": bracket.hi,
            "unbounded": bracket.unbounded,
        }
        if bracket.unbounded:
            lines.append(f"numeric: no divergence found below {bracket.hi:.6g} (threshold unbounded)")
        else:
            lines.append(f"numeric bracket: [{bracket.lo:.6g}, {bracket.hi:.6g}]")
        tsv_rows.append(f"numeric_lo\t{bracket.lo:.6g}")
        tsv_rows.append(f"numeric_hi\t{bracket.hi:.6g}")
        if exact is not None:
            if exact.is_infinite:
                agreement = bracket.unbounded
            else:
                agreement = (not bracket.unbounded) and bracket.lo <= float(exact.value) <= bracket.hi
            payload["agreement"] = agreement
            lines.append(f"agreement: {'yes' if agreement else 'NO'}")
            tsv_rows.append(f"agreement\t{agreement}")

    _emit(args, "threshold", digest, payload, lines, "\n".join(tsv_rows) + "\n", t0)
    if agreement is False:
        return EXIT_DISAGREE
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    t0 = time.perf_counter()
    model = load_model(args.model)
    table = jumping_spectrum(model, args.max_degree, frac(args.cutoff))
    digest = _digest("spectrum", [_file_bytes(args.model), str(args.max_degree), args.cutoff])
    payload = spectrum_to_dict(table)
    lines = [f"{len(table.entries)} monomial jumping values <= {table.cutoff} in box [0, {table.degree_bound}]^2"]
    for value, witnesses in table.entries:
        ws = " ".join(f"({a1},{a2})" for a1, a2 in witnesses)
        lines.append(f"{value}: {ws}")
    _emit(args, "spectrum", digest, payload, lines, spectrum_to_tsv(table), t0)
    return EXIT_OK


def _cmd_staircase(args) -> int:
    t0 = time.perf_counter()
    model = load_model(args.model)
    c = frac(args.cutoff)
    gens = multiplier_staircase(model, c, args.max_degree)
    digest = _digest("staircase", [_file_bytes(args.model), args.cutoff, str(args.max_degree)])
    payload = {
        "scale": str(c),
        "degree_bound": args.max_degree,
        "generators": [[a1, a2] for a1, a2 in gens],
    }
    lines = [f"minimal monomial generators at scale {c} in box [0, {args.max_degree}]^2:"]
    lines.extend(f"z1^{a1} z2^{a2}" for a1, a2 in gens)
    if not gens:
        lines.append("(none in box)")
    tsv_rows = ["a1\ta2"] + [f"{a1}\t{a2}" for a1, a2 in gens]
    _emit(args, "staircase", digest, payload, lines, "\n".join(tsv_rows) + "\n", t0)
    return EXIT_OK


def _cmd_equi(args) -> int:
    t0 = time.perf_counter()
    digest = _digest(
        "equi", [args.mode, _file_bytes(args.file1), _file_bytes(args.file2), str(args.weight)]
    )
    if args.mode == "profiles":
        p1 = load_profile(args.file1)
        p2 = load_profile(args.file2)
        verdict = profile_difference_integrable(p1, p2, args.weight + 1)
        payload = verdict.to_dict()
        payload["tails"] = {
            "first": [str(x) for x in p1.tail_data()],
            "second": [str(x) for x in p2.tail_data()],
        }
        t1 = ", ".join(str(x) for x in p1.tail_data())
        t2 = ", ".join(str(x) for x in p2.tail_data())
        lines = [
            verdict.kind,
            f"reason: {verdict.reason}",
            f"tail data (slope, offset, log): first ({t1}), second ({t2})",
        ]
        tsv = f"kind\treason\n{verdict.kind}\t{verdict.reason}\n"
    else:
        m1 = load_model(args.file1)
        m2 = load_model(args.file2)
        verdict = difference_integrability_2d(m1, m2, args.weight, QuadratureConfig())
        payload = verdict.to_dict()
        lines = [
            verdict.kind,
            f"fitted rate: {verdict.fitted_rate:.6g}",
            "tail shells (log): " + " ".join(f"{v:.4g}" for v in verdict.shells[-6:]),
        ]
        tsv = "kind\tfitted_rate\n" + f"{verdict.kind}\t{verdict.fitted_rate:.6g}\n"
    _emit(args, "equi", digest, payload, lines, tsv, t0)
    return EXIT_OK


def _cmd_verify(args) -> int:
    t0 = time.perf_counter()
    names = ["exact", "oracle", "lemmas"] if args.suite == "all" else [args.suite]
    results = run_suites(names, args.seed)
    digest = _digest("verify", [args.suite, str(args.seed)])
    payload = {
        "suite": args.suite,
        "seed": args.seed,
        "properties": [
            {"name": r.name, "passed": r.passed, "total": r.total, "failures": r.failures}
            for r in results
        ],
        "ok": all(r.ok for r in results),
    }
    lines = [r.line() for r in results]
    ok = all(r.ok for r in results)
    lines.append("all properties hold" if ok else "PROPERTY FAILURES:")
    for r in results:
        if not r.ok:
            for f in r.failures:
                lines.append(f"  {r.name}: {f}")
    tsv_rows = ["property\tpassed\ttotal"] + [f"{r.name}\t{r.passed}\t{r.total}" for r in results]
    _emit(args, "verify", digest, payload, lines, "\n".join(tsv_rows) + "\n", t0)
    return EXIT_OK if ok else EXIT_PROPERTY


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mitlab",
        description="Integrability thresholds and equisingularity checks for toric psh models.",
    )
    parser.add_argument("--json", action="store_true", help="emit the report as JSON")
    parser.add_argument("--tsv", action="store_true", help="emit the report as TSV")
    parser.add_argument("--seed", type=int, default=0, help="seed for the verification suites")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cluster", help="threshold table of the cluster series")
    c.add_argument("--M", type=int, required=True, help="series base, >= 2")
    c.add_argument("--kmax", type=int, required=True, help="largest series level")
    c.add_argument("--mmax", type=int, required=True, help="largest monomial degree in z2")
    c.set_defaults(run=_cmd_cluster)

    t = sub.add_parser("threshold", help="integrability threshold of one monomial")
    t.add_argument("--model", required=True, help="model file (JSON)")
    t.add_argument("--monomial", required=True, help="comma-separated exponents, e.g. 0,0")
    t.add_argument("--numeric", action="store_true", help="also run the quadrature oracle")
    t.set_defaults(run=_cmd_threshold)

    s = sub.add_parser("spectrum", help="monomial jumping values in a degree box")
    s.add_argument("--model", required=True)
    s.add_argument("--max-degree", type=int, required=True)
    s.add_argument("--cutoff", required=True, help="largest threshold to keep, e.g. 8/5")
    s.set_defaults(run=_cmd_spectrum)

    st = sub.add_parser("staircase", help="minimal monomial generators of the multiplier ideal")
    st.add_argument("--model", required=True)
    st.add_argument("--cutoff", required=True, help="multiplier scale c")
    st.add_argument("--max-degree", type=int, required=True)
    st.set_defaults(run=_cmd_staircase)

    e = sub.add_parser("equi", help="difference integrability of two weights")
    e.add_argument("--mode", choices=("profiles", "models"), required=True)
    e.add_argument("--file1", required=True)
    e.add_argument("--file2", required=True)
    e.add_argument("--weight", type=int, default=0, help="exponent w of the |z1|^(2w) factor")
    e.set_defaults(run=_cmd_equi)

    v = sub.add_parser("verify", help="run the self-verification suites")
    v.add_argument("--suite", choices=("exact", "oracle", "lemmas", "all"), default="all")
    v.set_defaults(run=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.json and args.tsv:
        parser.error("--json and --tsv are mutually exclusive")
    if args.command == "cluster" and args.M < 2:
        parser.error("--M must be >= 2")
    if args.command == "equi" and args.weight < 0:
        parser.error("--weight must be >= 0")
    try:
        return args.run(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROPERTY
    except MitlabError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_PROPERTY


if __name__ == "__main__":
    sys.exit(main())
