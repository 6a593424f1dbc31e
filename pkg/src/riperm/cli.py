"""``ri`` command line: verification suites and single-shot evaluators.

Exit codes: 0 success / all asserted checks pass, 1 an asserted check failed,
2 usage error (bad arguments, unreadable or invalid input).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .errors import RIError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
# options whose values may start with '-' (e.g. --nrange -64:64)
_SIGNED_RANGE_OPTS = ("--nrange", "--mrange")


def _q(text: str) -> float:
    return math.inf if text in ("inf", "infinity") else float(text)


def _range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _dump(obj) -> None:
    from .harness.report import _clean

    print(json.dumps(_clean(obj), indent=1, sort_keys=True))


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


# -- subcommands -------------------------------------------------------------------

def cmd_verify(args) -> int:
    from .harness import load_config, run_all

    config = load_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.workers is not None:
        config = type(config)(config.seed, args.workers, config.output, config.suites)
    out = args.out or config.output
    reports = run_all(config, out=out, only=args.suite)
    code = EXIT_OK
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        print(f"{status} {rep.suite}: {len(rep.cases)} cases, {rep.summary['asserted']} asserted")
        for c in rep.failures[: args.max_witnesses]:
            print(f"    witness {c.case} [{c.criterion}] lhs={c.lhs!r} rhs={c.rhs!r} digest={c.digest}"
                  + (f" error={c.extra['error']}" if "error" in c.extra else ""))
        if not rep.passed:
            code = EXIT_FAIL
    print(f"reports written to {Path(out).resolve()}")
    return code


def cmd_norm(args) -> int:
    from .rispaces import parse_space
    from .stepcore import StepFunction

    E = parse_space(args.space)
    x = StepFunction.from_json(_load_json(args.input))
    _dump({"space": args.space, "norm": E.norm(x)})
    return EXIT_OK


def cmd_tq(args) -> int:
    from .permops import MatrixN, tq_distribution, tq_norm, tq_norm_mc
    from .rispaces import parse_space

    x = MatrixN.from_json(_load_json(args.matrix))
    q = _q(args.q)
    out = {"n": x.n, "q": q}
    if args.space is None:
        if args.mode == "mc":
            raise RIError("--mode mc needs --space")
        out["distribution"] = tq_distribution(x, q).to_json()
    else:
        E = parse_space(args.space)
        out["space"] = args.space
        if args.mode == "exact":
            out["norm"] = tq_norm(x, q, E)
        else:
            est = tq_norm_mc(x, q, E, samples=args.samples, seed=args.seed, workers=args.workers)
            out.update(norm=est.value, se=est.se, samples=est.samples, seed=args.seed)
    _dump(out)
    return EXIT_OK


def cmd_gamma(args) -> int:
    from .criteria import gamma, gamma_partial_sums
    from .rispaces import parse_phi

    phi = parse_phi(args.phi)
    q = _q(args.q)
    r = gamma(phi, q, j_max=args.jmax, tail=not args.no_tail)
    _dump({"phi": args.phi, "q": q, "value": r.value, "upper": r.upper, "partial": r.partial,
           "truncation_bound": r.truncation_bound, "t_witness": r.t_witness, "j_used": r.j_used,
           "diverged": r.diverged, "max_partial_sum": r.max_partial_sum, "label": r.label})
    if args.csv:
        sums = gamma_partial_sums(phi, q, r.t_witness, args.jmax)
        _write_csv(args.csv, ["j", "partial_sum"], [(j + 1, s) for j, s in enumerate(sums)])
    return EXIT_OK


def cmd_coincidence(args) -> int:
    from .coincidence import CoincidenceTable, fixed_point_distribution

    if args.k is None:
        prof = fixed_point_distribution(args.n)
        _dump({"n": args.n, "s": [str(v) for v in prof.s], "tau": [str(v) for v in prof.tau],
               "s_float": [float(v) for v in prof.s]})
        return EXIT_OK
    table = CoincidenceTable.build(args.n, args.k)
    _dump(table.to_json())
    if args.csv:
        _write_csv(args.csv, ["j", "num", "den", "float"],
                   [(r["j"], r["num"], r["den"], r["float"]) for r in table.to_json()["mu"]])
    return EXIT_OK


def cmd_probe(args) -> int:
    from .criteria import dconvex_probe
    from .harness.corpora import probe_corpus
    from .rispaces import parse_space
    from .stepcore import StepFunction

    E = parse_space(args.space)
    if args.corpus:
        corpus = [tuple(StepFunction.from_json(f) for f in tup) for tup in _load_json(args.corpus)]
    else:
        corpus = probe_corpus(args.seed)
    _dump(dconvex_probe(E, corpus, dstar=args.dstar).to_json())
    return EXIT_OK


def cmd_census(args) -> int:
    from .criteria import almost_convex_census
    from .rispaces import parse_mfunc

    M = parse_mfunc(args.M)
    cen = almost_convex_census(M, args.a, args.b, args.p, args.nrange, args.mrange)
    _dump(cen.to_json())
    if args.csv:
        _write_csv(args.csv, ["m", "violations", "allowed"],
                   [(m, c, args.b ** m) for m, c in cen.counts.items()])
    return EXIT_OK if cen.verdict else EXIT_FAIL


# -- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    from .harness.config import SUITES

    ap = argparse.ArgumentParser(prog="ri", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run verification suites and write JSON + CSV reports")
    p.add_argument("--suite", default="all", choices=("all",) + SUITES)
    p.add_argument("--config", help="run configuration JSON (see docs/config.schema.json)")
    p.add_argument("--out", help="report directory (default: config 'output')")
    p.add_argument("--seed", type=int, help="override the run seed")
    p.add_argument("--workers", type=int, help="worker threads per suite")
    p.add_argument("--max-witnesses", type=int, default=10)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("norm", help="norm of a step function in an r.i. space")
    p.add_argument("--space", required=True)
    p.add_argument("--input", required=True, help="step-function JSON {breakpoints, values}")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("tq", help="law or norm of T_q x for a matrix")
    p.add_argument("--matrix", required=True, help="matrix JSON {n, entries}")
    p.add_argument("--q", default="1")
    p.add_argument("--space")
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_tq)

    p = sub.add_parser("gamma", help="the Gamma series for a phi and q")
    p.add_argument("--phi", required=True)
    p.add_argument("--q", default="1")
    p.add_argument("--jmax", type=int, default=400)
    p.add_argument("--no-tail", action="store_true", help="skip the tail estimate")
    p.add_argument("--csv", help="write partial sums at the witness t")
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("coincidence", help="exact fixed-point probabilities mu(n, k, j)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, help="omit for the full fixed-point law of S_n")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_coincidence)

    p = sub.add_parser("probe", help="D- or D*-convexity probe on a corpus")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--dconvex", action="store_true", help="D direction (default)")
    mode.add_argument("--dstar", action="store_true", help="D* direction")
    p.add_argument("--space", required=True)
    p.add_argument("--corpus", help="JSON list of tuples of step functions (default: built-in)")
    p.add_argument("--seed", type=int, default=20240601)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("census", help="almost-convexity census for an Orlicz function")
    p.add_argument("--M", required=True)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--nrange", type=_range, default=(-64, 64))
    p.add_argument("--mrange", type=_range, default=(1, 12))
    p.add_argument("--csv")
    p.set_defaults(func=cmd_census)
    return ap


def _join_signed(argv: list[str]) -> list[str]:
    out, it = [], iter(argv)
    for tok in it:
        if tok in _SIGNED_RANGE_OPTS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: list[str] | None = None) -> int:
    argv = _join_signed(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (RIError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"ri {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
