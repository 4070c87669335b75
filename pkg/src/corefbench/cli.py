"""Command-line front end.

Subcommands compose into the full pipeline:

    corefbench generate --seed 42 --out corpus.jsonl
    corefbench pairs corpus.jsonl --out instances.jsonl
    corefbench train instances.jsonl --out model.json
    corefbench classify corpus.jsonl --model model.json --out decisions.jsonl
    corefbench score corpus.jsonl decisions.jsonl --out scores.json
    corefbench xval corpus.jsonl --out results.json
    corefbench serve --dir store/

Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.  Data goes to
stdout (or --out, written atomically); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from . import dtree
from .chains import ALL_PAIRS, CONSECUTIVE, ChainError, LinkSet
from .corpus import Corpus, CorpusError, key_chains, load_corpus, serialize_corpus
from .generator import (
    GeneratorError,
    GeneratorParams,
    generate_corpus,
    params_from_record,
)
from .harness import (
    ENGINES,
    ExperimentConfig,
    HarnessError,
    config_from_record,
    engine_configs,
    render_table,
    result_to_record,
    run_experiment,
)
from .pairgen import (
    FEATURE_SCHEMA,
    PairError,
    generate_pairs,
    instances_for_document,
    parse_instances,
    pair_for,
    serialize_instances,
)
from .rules import COREFERENT, classify_rules, rule_trace
from .scorer import (
    DEFAULT_BETAS,
    MACRO,
    MICRO,
    ScoreError,
    aggregate,
    report_to_record,
    score_document,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

DATA_ERRORS = (CorpusError, PairError, dtree.TreeError, ChainError, ScoreError,
               GeneratorError, HarnessError, OSError, json.JSONDecodeError)


class UsageError(Exception):
    """Bad flag combination detected after argument parsing."""


class _Parser(argparse.ArgumentParser):
    """argparse reserves exit code 2 for usage; this workbench uses 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_output(out: str | None, text: str) -> None:
    """Write data to stdout or atomically (write, then rename) to a file."""
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    target = Path(out)
    parent = target.parent if str(target.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _load_json(path: str):
    return json.loads(_read_text(path))


def _parse_betas(text: str) -> tuple[float, ...]:
    try:
        betas = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad beta list {text!r}") from None
    if not betas:
        raise argparse.ArgumentTypeError("beta list is empty")
    return betas


def _select_documents(corpus: Corpus, include: list[str], exclude: list[str]):
    known = {doc.doc_id for doc in corpus.documents}
    for doc_id in list(include) + list(exclude):
        if doc_id not in known:
            raise CorpusError(f"no document {doc_id!r} in the corpus")
    docs = corpus.documents
    if include:
        wanted = set(include)
        docs = [d for d in docs if d.doc_id in wanted]
    if exclude:
        dropped = set(exclude)
        docs = [d for d in docs if d.doc_id not in dropped]
    return docs


def _warn_dropped(corpus: Corpus) -> None:
    for warning in corpus.warnings:
        print(f"warning: {warning.doc_id}/{warning.phrase_id}: {warning.message}",
              file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    if args.params is None:
        params = GeneratorParams()
    else:
        params = params_from_record(_load_json(args.params))
    documents = generate_corpus(params, args.seed)
    _write_output(args.out, serialize_corpus(documents))
    print(f"generated {len(documents)} documents (seed {args.seed})", file=sys.stderr)
    return EXIT_OK


def cmd_pairs(args) -> int:
    corpus = load_corpus(args.corpus)
    _warn_dropped(corpus)
    documents = _select_documents(corpus, args.doc, args.exclude_doc)
    instances = [
        inst
        for doc in documents
        for inst in instances_for_document(doc, labeled=not args.unlabeled)
    ]
    _write_output(args.out, serialize_instances(instances))
    return EXIT_OK


def cmd_train(args) -> int:
    instances = parse_instances(_read_text(args.instances))
    params = dtree.TrainParams(
        min_instances_per_branch=args.min_instances,
        pruning_confidence=args.cf,
        prune=args.prune,
        mean_gain_gate=not args.no_gain_gate,
    )
    tree = dtree.train(instances, FEATURE_SCHEMA, params)
    _write_output(args.out, dtree.serialize_tree(tree))
    print(f"trained on {len(instances)} instances: {tree.node_count()} nodes",
          file=sys.stderr)
    return EXIT_OK


def _detect_input_kind(path: str) -> str:
    for line in _read_text(path).splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        if isinstance(record, dict) and "features" in record:
            return "instances"
        return "corpus"
    raise CorpusError(f"{path}: empty input")


def _decision_record(pair, coreferent: bool, engine: str, detail: dict) -> dict:
    record = {"doc_id": pair.doc_id, "first": pair.first, "second": pair.second,
              "coreferent": coreferent, "engine": engine}
    record.update(detail)
    return record


def cmd_classify(args) -> int:
    if (args.model is None) == (args.engine is None):
        raise UsageError("pick exactly one of --model or --engine rules")
    kind = _detect_input_kind(args.input)
    lines: list[str] = []
    if kind == "instances":
        if args.model is None:
            raise UsageError("the rule engine needs a corpus file, not an instance dump")
        model = dtree.deserialize_tree(_read_text(args.model))
        instances = parse_instances(_read_text(args.input))
        if args.doc:
            instances = [i for i in instances if i.pair.doc_id in set(args.doc)]
        if args.exclude_doc:
            instances = [i for i in instances if i.pair.doc_id not in set(args.exclude_doc)]
        for inst in instances:
            label, counts = dtree.classify(model, inst)
            lines.append(json.dumps(_decision_record(
                inst.pair, label == dtree.POSITIVE, "tree", {"leaf_counts": list(counts)})))
    else:
        corpus = load_corpus(args.input)
        _warn_dropped(corpus)
        documents = _select_documents(corpus, args.doc, args.exclude_doc)
        model = None
        if args.model is not None:
            model = dtree.deserialize_tree(_read_text(args.model))
        for doc in documents:
            if model is not None:
                for inst in instances_for_document(doc, labeled=False):
                    label, counts = dtree.classify(model, inst)
                    lines.append(json.dumps(_decision_record(
                        inst.pair, label == dtree.POSITIVE, "tree",
                        {"leaf_counts": list(counts)})))
            else:
                for pair in generate_pairs(doc):
                    decision = classify_rules(pair, doc)
                    lines.append(json.dumps(_decision_record(
                        pair, decision.label == COREFERENT, "rules",
                        {"fired_rule": decision.fired_rule})))
    _write_output(args.out, "".join(line + "\n" for line in lines))
    return EXIT_OK


def _read_decisions(path: str) -> dict[str, list[dict]]:
    by_doc: dict[str, list[dict]] = {}
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        record = json.loads(line)
        if not isinstance(record, dict) or not {"doc_id", "first", "second",
                                                "coreferent"} <= set(record):
            raise ScoreError(f"{path}:{lineno}: not a decision record")
        by_doc.setdefault(record["doc_id"], []).append(record)
    if not by_doc:
        raise ScoreError(f"{path}: no decision records")
    return by_doc


def cmd_score(args) -> int:
    corpus = load_corpus(args.corpus)
    _warn_dropped(corpus)
    decisions = _read_decisions(args.decisions)
    known = {doc.doc_id for doc in corpus.documents}
    unknown = set(decisions) - known
    if unknown:
        raise ScoreError(f"decisions for unknown documents: {sorted(unknown)}")
    documents = [d for d in corpus.documents if d.doc_id in decisions]
    doc_records = []
    reports = []
    for doc in documents:
        links = LinkSet.from_pairs(
            (r["first"], r["second"]) for r in decisions[doc.doc_id] if r["coreferent"])
        report = score_document(key_chains(doc), links, args.strategy, args.beta)
        reports.append(report)
        doc_records.append({"doc_id": doc.doc_id, "report": report_to_record(report)})
    record = {
        "format": 1,
        "strategy": args.strategy,
        "aggregation": args.agg,
        "betas": list(args.beta),
        "documents": doc_records,
        "aggregate": report_to_record(aggregate(reports, args.agg, args.beta)),
    }
    _write_output(args.out, json.dumps(record, indent=2) + "\n")
    return EXIT_OK


def cmd_xval(args) -> int:
    corpus = load_corpus(args.corpus)
    _warn_dropped(corpus)
    base = ExperimentConfig() if args.config is None else config_from_record(_load_json(args.config))
    overrides: dict = {}
    if args.strategy is not None:
        overrides["strategy"] = args.strategy
    if args.agg is not None:
        overrides["aggregation"] = args.agg
    if args.beta is not None:
        overrides["betas"] = args.beta
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    params = base.train_params
    if args.cf is not None:
        params = replace(params, pruning_confidence=args.cf)
    if args.min_instances is not None:
        params = replace(params, min_instances_per_branch=args.min_instances)
    base = replace(base, train_params=params, **overrides)
    engines = ENGINES if args.engine == "all" else (args.engine,)
    configs = [replace(base, engine=e) for e in engines]
    result = run_experiment(corpus.documents, configs)
    sys.stdout.write(render_table(result))
    if args.out is not None:
        _write_output(args.out, json.dumps(result_to_record(result), indent=2) + "\n")
    return EXIT_OK


def cmd_trace(args) -> int:
    corpus = load_corpus(args.corpus)
    for doc in corpus.documents:
        if doc.doc_id == args.doc_id:
            pair = pair_for(doc, args.first, args.second)
            sys.stdout.write(rule_trace(pair, doc) + "\n")
            return EXIT_OK
    raise CorpusError(f"no document {args.doc_id!r} in the corpus")


def cmd_serve(args) -> int:
    import uvicorn

    from .annosvc import DocumentStore, create_app

    store = DocumentStore(args.dir)
    if args.corpus is not None:
        corpus = load_corpus(args.corpus)
        _warn_dropped(corpus)
        imported = store.import_documents(corpus.documents)
        print(f"imported {imported} documents into {args.dir}", file=sys.stderr)
    uvicorn.run(create_app(store), host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="corefbench", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a seeded synthetic corpus")
    p.add_argument("--params", help="generator params file (JSON)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("pairs", help="emit labeled pair instances for a corpus")
    p.add_argument("corpus")
    p.add_argument("--doc", action="append", default=[], help="restrict to this doc id")
    p.add_argument("--exclude-doc", action="append", default=[], help="drop this doc id")
    p.add_argument("--unlabeled", action="store_true", help="omit key labels")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("train", help="induce a decision tree from instances")
    p.add_argument("instances")
    p.add_argument("--prune", action="store_true", help="prune after growing")
    p.add_argument("--cf", type=float, default=0.25, help="pruning confidence")
    p.add_argument("--min-instances", type=int, default=2,
                   help="minimum instances per branch for a split")
    p.add_argument("--no-gain-gate", action="store_true",
                   help="disable the mean-positive-gain gate")
    p.add_argument("--out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify pairs with a model or the rules")
    p.add_argument("input", help="corpus file or instance dump")
    p.add_argument("--model", help="tree model file")
    p.add_argument("--engine", choices=["rules"], help="use the rule engine")
    p.add_argument("--doc", action="append", default=[])
    p.add_argument("--exclude-doc", action="append", default=[])
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("score", help="score a decision file against corpus keys")
    p.add_argument("corpus")
    p.add_argument("decisions")
    p.add_argument("--strategy", choices=[CONSECUTIVE, ALL_PAIRS], default=CONSECUTIVE)
    p.add_argument("--agg", choices=[MACRO, MICRO], default=MACRO)
    p.add_argument("--beta", type=_parse_betas, default=DEFAULT_BETAS,
                   help="comma-separated list, e.g. 2.0,1.0,0.5")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("xval", help="leave-one-text-out engine comparison")
    p.add_argument("corpus")
    p.add_argument("--config", help="experiment config file (JSON)")
    p.add_argument("--engine", choices=list(ENGINES) + ["all"], default="all")
    p.add_argument("--strategy", choices=[CONSECUTIVE, ALL_PAIRS])
    p.add_argument("--agg", choices=[MACRO, MICRO])
    p.add_argument("--beta", type=_parse_betas)
    p.add_argument("--cf", type=float)
    p.add_argument("--min-instances", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out", help="write the full JSON result here")
    p.set_defaults(func=cmd_xval)

    p = sub.add_parser("trace", help="show the rule-by-rule evaluation of one pair")
    p.add_argument("corpus")
    p.add_argument("doc_id")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--dir", required=True, help="document store directory")
    p.add_argument("--corpus", help="seed the store from this corpus file")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8571)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:  # pragma: no cover - defensive
        import traceback

        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
