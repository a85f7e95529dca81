"""Command-line harness.

Exit codes: 0 for a completed run, 2 for negative mathematical outcomes
(Exhausted searches, pigeonhole shortfalls, exhausted budgets), 1 for
invalid input. Reports are written under --out; identical inputs and seed
give byte-identical reports regardless of --threads.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from fractions import Fraction
from pathlib import Path

from .classes import build_approximant, check_class_properties, parse_class_spec
from .colourings import (
    MonochromaticWitness,
    RamseyQuery,
    check_ramsey_upto,
    parse_colouring,
    parse_family,
    parse_fraction,
)
from .constructors import (
    NoRamseyFailure,
    construct_nonnull_witness,
    construct_nontame_witness,
)
from .embeddings import Embedding, format_embedding, format_partial, parse_embedding
from .eppa import search_eppa_witness, verify_eppa_witness
from .errors import (
    BudgetExceeded,
    FraisseError,
    InsufficientCopies,
    ParseError,
)
from .report import build_document, emit_report
from .structures import content_lines, format_structure, parse_structure
from .witnesses import witness_to_dict, witness_to_independence_set

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NEGATIVE = 2


def _read(path):
    p = Path(path)
    try:
        return p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc}", path=p)


def _load_structure(path):
    return parse_structure(_read(path), path=path)


def _load_class(path):
    return parse_class_spec(_read(path), path=path)


def _frac(text, what):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad rational for {what}: {text!r}")


def _config_section(path, section):
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh, source=str(path))
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc}", path=path)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ParseError(str(exc), line=line, path=path)
    if not parser.has_section(section):
        raise ParseError(f"missing [{section}] section", path=path)
    return dict(parser.items(section))


def _require(cfg, key, path, section):
    if key not in cfg:
        raise ParseError(f"[{section}] is missing {key!r}", path=path)
    return cfg[key]


def _resolve(base, ref):
    p = Path(ref)
    return p if p.is_absolute() else Path(base).parent / p


def _load_colourings(entries, base, pattern, ambient, seed):
    """Config `colourings` entries: family names or file:<path> tables."""
    out = []
    for entry in [e.strip() for e in entries.split(",") if e.strip()]:
        if entry.startswith("file:"):
            ref = _resolve(base, entry[len("file:"):])
            col = parse_colouring(_read(ref), base_dir=ref.parent, path=ref)
            if col.pattern != pattern or (ambient is not None and col.ambient != ambient):
                raise ParseError(
                    f"colouring file {ref} does not match the query", path=base
                )
            out.append(("file", col))
        else:
            try:
                out.append(("family", parse_family(entry, default_seed=seed)))
            except ValueError as exc:
                raise ParseError(str(exc), path=base)
    return out


def _serialize_counterexample(ce):
    if ce is None:
        return None
    out = {}
    for key, value in ce.items():
        if hasattr(value, "signature"):          # FinStructure
            out[key] = format_structure(value)
        elif isinstance(value, Embedding):
            out[key] = format_embedding(value)
        else:
            out[key] = value
    return out


# ---------------------------------------------------------------------------
# subcommands


def _cmd_check_class(args):
    spec = _load_class(args.spec)
    report = check_class_properties(spec, args.max_size)
    items = [
        {
            "property": name,
            "holds": check.holds,
            "counterexample": _serialize_counterexample(check.counterexample),
        }
        for name, check in report.checks.items()
    ]
    doc = build_document(
        "check-class",
        {"class": spec.name or str(args.spec), "max_size": args.max_size},
        items,
        seed=args.seed,
    )
    for item in items:
        print(f"{item['property']}: {'holds' if item['holds'] else 'FAILS'}")
    return doc, "check-class", EXIT_OK


def _cmd_approximant(args):
    spec = _load_class(args.spec)
    params = {
        "class": spec.name or str(args.spec),
        "rank": args.rank,
        "budget": args.budget,
        "builtin": args.builtin,
    }
    try:
        approx = build_approximant(spec, args.rank, args.budget, builtin=args.builtin)
    except BudgetExceeded as exc:
        items = [
            {
                "outcome": "budget-exceeded",
                "partial": format_structure(exc.partial),
                "carrier": exc.partial.size,
                "diagnostics": exc.diagnostics,
            }
        ]
        doc = build_document("approximant", params, items,
                             status="budget-exceeded", seed=args.seed)
        print(f"budget exceeded at carrier {exc.partial.size}")
        return doc, "approximant", EXIT_NEGATIVE
    items = [
        {
            "outcome": "approximant",
            "carrier": approx.structure.size,
            "rank": approx.extension_rank,
            "structure": format_structure(approx.structure),
        }
    ]
    doc = build_document("approximant", params, items, seed=args.seed)
    print(f"approximant of rank {args.rank} on {approx.structure.size} elements")
    return doc, "approximant", EXIT_OK


def _cmd_ramsey(args):
    cfg = _config_section(args.config, "ramsey")
    base = Path(args.config)
    pattern = _load_structure(_resolve(base, _require(cfg, "pattern", base, "ramsey")))
    copy = _load_structure(_resolve(base, _require(cfg, "copy", base, "ramsey")))
    ambient = _load_structure(_resolve(base, _require(cfg, "ambient", base, "ramsey")))
    epsilon = _frac(_require(cfg, "epsilon", base, "ramsey"), "epsilon")
    loaded = _load_colourings(
        _require(cfg, "colourings", base, "ramsey"),
        base, pattern, ambient, args.seed,
    )
    colourings = [
        col if kind == "file" else col.colouring(pattern, ambient, threads=args.threads)
        for kind, col in loaded
    ]
    query = RamseyQuery(pattern, copy, colourings, epsilon)
    outcome = check_ramsey_upto(query, threads=args.threads)
    params = {
        "pattern": format_structure(pattern),
        "copy": format_structure(copy),
        "ambient": format_structure(ambient),
        "epsilon": str(epsilon),
        "colourings": [
            (col.describe() if kind == "family" else "file") for kind, col in loaded
        ],
    }
    if isinstance(outcome, MonochromaticWitness):
        items = [{"outcome": "monochromatic", "witness": format_embedding(outcome.h, "B", "F")}]
        doc = build_document("ramsey", params, items, seed=args.seed)
        print(f"monochromatic copy found: {items[0]['witness']}")
        return doc, "ramsey", EXIT_OK
    items = [
        {"embedding": format_embedding(h, "B", "F"), "worst_oscillation": str(w)}
        for h, w in outcome.worst
    ]
    doc = build_document("ramsey", params, items, status="exhausted", seed=args.seed)
    print(f"exhausted: no monochromatic copy among {len(items)} candidates "
          "(relative to this ambient fragment)")
    return doc, "ramsey", EXIT_NEGATIVE


def _pipeline_inputs(args, section):
    cfg = _config_section(args.config, section)
    base = Path(args.config)
    spec = _load_class(_resolve(base, _require(cfg, "class", base, section)))
    pattern = _load_structure(_resolve(base, _require(cfg, "pattern", base, section)))
    copy = _load_structure(_resolve(base, _require(cfg, "copy", base, section)))
    epsilon = _frac(_require(cfg, "epsilon", base, section), "epsilon")
    loaded = _load_colourings(
        _require(cfg, "colourings", base, section),
        base, pattern, None, args.seed,
    )
    families = []
    for kind, value in loaded:
        if kind != "family":
            raise ParseError(
                f"[{section}] needs colouring families, not fixed tables", path=base
            )
        families.append(value)
    return cfg, base, spec, pattern, copy, epsilon, families


def _witness_run_items(outcome, kind):
    """Common serialization for both pipelines' success paths."""
    witness = outcome.witness
    chi = outcome.colouring
    if kind == "nonnull":
        from .witnesses import verify_nonnull_witness as verify
    else:
        from .witnesses import verify_nontame_witness as verify
    ok, failing = verify(witness, chi)
    conversion = witness_to_independence_set(witness, chi)
    item = {
        "outcome": "witness",
        "colour_index": outcome.colour_index,
        "copies": outcome.copies,
        "witness": witness_to_dict(witness),
        "verification": {
            "ok": ok,
            "failing": None if failing is None else [failing[0], sorted(failing[1])],
        },
        "independence": {
            "ok": conversion.result.ok,
            "counterexample": (
                None
                if conversion.result.counterexample is None
                else {
                    "J": list(conversion.result.counterexample[0]),
                    "sigma": list(conversion.result.counterexample[1]),
                }
            ),
            "low_set_size": len(conversion.low_set),
            "high_set_size": len(conversion.high_set),
        },
    }
    return item, ok


def _cmd_null_witness(args):
    cfg, base, spec, pattern, copy, epsilon, families = _pipeline_inputs(
        args, "null-witness"
    )
    n = int(_require(cfg, "n", base, "null-witness"))
    params = {
        "class": spec.name or "class",
        "pattern": format_structure(pattern),
        "copy": format_structure(copy),
        "epsilon": str(epsilon),
        "oscillation_threshold": str(2 * epsilon),
        "n": n,
        "colourings": [f.describe() for f in families],
    }
    try:
        outcome = construct_nonnull_witness(
            spec, pattern, copy, families, epsilon, n, threads=args.threads
        )
    except InsufficientCopies as exc:
        doc = build_document(
            "null-witness", params,
            [{"outcome": "insufficient-copies", "counts": exc.counts,
              "needed": exc.needed}],
            status="insufficient-copies", seed=args.seed,
        )
        print("insufficient copies for the pigeonhole step")
        return doc, "null-witness", EXIT_NEGATIVE
    if isinstance(outcome, NoRamseyFailure):
        items = [{
            "outcome": "no-ramsey-failure",
            "copy_index": outcome.copy_index,
            "witness_embedding": format_embedding(outcome.h, "B", "F"),
        }]
        doc = build_document("null-witness", params, items, seed=args.seed)
        print("no Ramsey failure: a monochromatic copy exists")
        return doc, "null-witness", EXIT_OK
    item, ok = _witness_run_items(outcome, "nonnull")
    doc = build_document("null-witness", params, [item], seed=args.seed)
    print(f"witness built (n={n}), verification {'PASS' if ok else 'FAIL'}, "
          f"independence {'PASS' if item['independence']['ok'] else 'FAIL'}")
    return doc, "null-witness", EXIT_OK


def _load_eppa_witness(path, copy):
    """An EPPA witness file: host structure text, then one `embed` line."""
    lines = content_lines(_read(path))
    from .structures import parse_structure_lines

    host, used = parse_structure_lines(lines, path=path)
    if used >= len(lines):
        raise ParseError("missing 'embed' line after the host structure", path=path)
    num, text = lines[used]
    if used + 1 != len(lines):
        raise ParseError("trailing content after the embedding", line=num, path=path)
    return parse_embedding(text, copy, host, line=num, path=path)


def _cmd_tame_witness(args):
    cfg, base, spec, pattern, copy, epsilon, families = _pipeline_inputs(
        args, "tame-witness"
    )
    m = int(_require(cfg, "m", base, "tame-witness"))
    params = {
        "class": spec.name or "class",
        "pattern": format_structure(pattern),
        "copy": format_structure(copy),
        "epsilon": str(epsilon),
        "oscillation_threshold": str(2 * epsilon),
        "m": m,
        "colourings": [f.describe() for f in families],
    }
    if args.eppa:
        inclusion = _load_eppa_witness(Path(args.eppa), copy)
        verification = verify_eppa_witness(inclusion)
        if not verification.ok:
            raise ParseError(
                "provided EPPA witness fails verification "
                f"(failing map: {format_partial(verification.failing)})",
                path=args.eppa,
            )
        eppa_info = {"source": "file", "path": str(args.eppa)}
    else:
        found = search_eppa_witness(copy, spec, args.eppa_search, threads=args.threads)
        if found is None:
            doc = build_document(
                "tame-witness", params,
                [{"outcome": "eppa-exhausted", "max_size": args.eppa_search}],
                status="exhausted", seed=args.seed,
            )
            print(f"no EPPA witness for the copy up to carrier {args.eppa_search}")
            return doc, "tame-witness", EXIT_NEGATIVE
        inclusion = found.inclusion
        eppa_info = {"source": "search", "max_size": args.eppa_search}
    eppa_info["host"] = format_structure(inclusion.target)
    eppa_info["embedding"] = format_embedding(inclusion, "B", "C")
    params["eppa"] = eppa_info
    try:
        outcome = construct_nontame_witness(
            spec, pattern, copy, families, epsilon, m, inclusion, threads=args.threads
        )
    except InsufficientCopies as exc:
        doc = build_document(
            "tame-witness", params,
            [{"outcome": "insufficient-copies", "counts": exc.counts,
              "needed": exc.needed}],
            status="insufficient-copies", seed=args.seed,
        )
        print("insufficient copies for the pigeonhole step")
        return doc, "tame-witness", EXIT_NEGATIVE
    if isinstance(outcome, NoRamseyFailure):
        items = [{
            "outcome": "no-ramsey-failure",
            "copy_index": outcome.copy_index,
            "witness_embedding": format_embedding(outcome.h, "B", "F"),
        }]
        doc = build_document("tame-witness", params, items, seed=args.seed)
        print("no Ramsey failure: a monochromatic copy exists")
        return doc, "tame-witness", EXIT_OK
    item, ok = _witness_run_items(outcome, "nontame")
    doc = build_document("tame-witness", params, [item], seed=args.seed)
    print(f"witness built (m={m}), verification {'PASS' if ok else 'FAIL'}, "
          f"independence {'reported ' + ('PASS' if item['independence']['ok'] else 'FAIL')}")
    return doc, "tame-witness", EXIT_OK


def _cmd_eppa(args):
    pattern = _load_structure(args.structure)
    spec = _load_class(args.class_spec)
    params = {
        "pattern": format_structure(pattern),
        "class": spec.name or str(args.class_spec),
        "max_size": args.max_size,
    }
    found = search_eppa_witness(pattern, spec, args.max_size, threads=args.threads)
    if found is None:
        doc = build_document("eppa", params, [{"outcome": "exhausted"}],
                             status="exhausted", seed=args.seed)
        print(f"exhausted: no EPPA witness up to carrier {args.max_size}")
        return doc, "eppa", EXIT_NEGATIVE
    verification = verify_eppa_witness(found.inclusion, collect_log=True)
    items = [{
        "outcome": "witness",
        "host": format_structure(found.target),
        "embedding": format_embedding(found.inclusion, "A", "B"),
        "proof_log": [
            f"{format_partial(p, 'B')} => {format_partial(total, 'B')}"
            for p, total in verification.log
        ],
    }]
    doc = build_document("eppa", params, items, seed=args.seed)
    print(f"EPPA witness on {found.target.size} elements "
          f"({len(verification.log)} partial maps extended)")
    return doc, "eppa", EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="seed for the seeded-random colouring family")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default="out", help="report directory")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(
        prog="fraisse",
        description="Finite-structure workbench: class properties, Ramsey "
                    "checking, certificate pipelines, EPPA search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-class", parents=[common])
    p.add_argument("spec")
    p.add_argument("--max-size", type=int, required=True)
    p.set_defaults(func=_cmd_check_class)

    p = sub.add_parser("approximant", parents=[common])
    p.add_argument("spec")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--builtin", default=None, help="e.g. bit-graph:4")
    p.set_defaults(func=_cmd_approximant)

    p = sub.add_parser("ramsey", parents=[common])
    p.add_argument("config")
    p.set_defaults(func=_cmd_ramsey)

    p = sub.add_parser("null-witness", parents=[common])
    p.add_argument("config")
    p.set_defaults(func=_cmd_null_witness)

    p = sub.add_parser("tame-witness", parents=[common])
    p.add_argument("config")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--eppa", default=None, help="EPPA witness file")
    group.add_argument("--eppa-search", type=int, default=None,
                       help="search bound for an EPPA witness")
    p.set_defaults(func=_cmd_tame_witness)

    p = sub.add_parser("eppa", parents=[common])
    p.add_argument("structure")
    p.add_argument("--class", dest="class_spec", required=True)
    p.add_argument("--max-size", type=int, required=True)
    p.set_defaults(func=_cmd_eppa)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not 0 <= args.seed < 2 ** 64:
        print("--seed must fit in 64 bits", file=sys.stderr)
        return EXIT_INVALID
    try:
        doc, name, code = args.func(args)
        paths = emit_report(doc, args.out, name, fmt=args.format)
        for p in paths:
            print(f"report: {p}")
        return code
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (FraisseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
