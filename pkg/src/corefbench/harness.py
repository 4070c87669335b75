"""Leave-one-text-out cross-validation and the three-engine comparison.

One fold per document: the held-out document is classified by an engine
trained on (or, for the rule engine, independent of) the remaining documents,
and its positive decisions are scored as response links against the key.
Documents with no phrase pairs are marked skipped and excluded from
aggregation.  Folds are independent, so they may run in parallel; results do
not depend on the degree of parallelism.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

from . import dtree
from .chains import CONSECUTIVE, STRATEGIES, LinkSet
from .corpus import Document, key_chains
from .pairgen import FEATURE_SCHEMA, POSITIVE, generate_pairs, instances_for_document
from .rules import COREFERENT, classify_rules
from .scorer import (
    AGGREGATIONS,
    DEFAULT_BETAS,
    MACRO,
    ScoreReport,
    aggregate,
    report_to_record,
    score_document,
)

ENGINE_RULES = "rules"
ENGINE_TREE_UNPRUNED = "tree-unpruned"
ENGINE_TREE_PRUNED = "tree-pruned"
ENGINES = (ENGINE_TREE_UNPRUNED, ENGINE_TREE_PRUNED, ENGINE_RULES)

CONFIG_FORMAT_VERSION = 1


class HarnessError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    engine: str = ENGINE_TREE_UNPRUNED
    train_params: dtree.TrainParams = dtree.TrainParams()
    strategy: str = CONSECUTIVE
    aggregation: str = MACRO
    betas: tuple[float, ...] = DEFAULT_BETAS
    seed: int = 42
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.engine not in ENGINES:
            raise HarnessError(f"unknown engine {self.engine!r}")
        if self.strategy not in STRATEGIES:
            raise HarnessError(f"unknown strategy {self.strategy!r}")
        if self.aggregation not in AGGREGATIONS:
            raise HarnessError(f"unknown aggregation {self.aggregation!r}")
        if not self.betas or any(b <= 0 for b in self.betas):
            raise HarnessError("betas must be a non-empty list of positive reals")
        if self.jobs < 1:
            raise HarnessError("jobs must be >= 1")


def _effective_params(config: ExperimentConfig) -> dtree.TrainParams:
    return replace(config.train_params, prune=config.engine == ENGINE_TREE_PRUNED)


@dataclass(frozen=True)
class FoldResult:
    doc_id: str
    skipped: bool
    reason: str | None
    report: ScoreReport | None


@dataclass(frozen=True)
class XvalResult:
    engine: str
    folds: tuple[FoldResult, ...]
    aggregate: ScoreReport


def response_links(doc: Document, config: ExperimentConfig,
                   model: dtree.DecisionTree | None = None) -> LinkSet:
    """Pairs the configured engine calls coreferent, as explicit links."""
    if config.engine == ENGINE_RULES:
        positive = [
            pair for pair in generate_pairs(doc)
            if classify_rules(pair, doc).label == COREFERENT
        ]
    else:
        if model is None:
            raise HarnessError("tree engines need a trained model")
        positive = [
            inst.pair for inst in instances_for_document(doc, labeled=False)
            if dtree.classify(model, inst)[0] == POSITIVE
        ]
    return LinkSet.from_pairs((p.first, p.second) for p in positive)


def _training_instances(documents: Sequence[Document], held_out: int) -> list:
    return [
        inst
        for index, doc in enumerate(documents)
        if index != held_out
        for inst in instances_for_document(doc)
    ]


def _run_fold(documents: Sequence[Document], index: int, config: ExperimentConfig) -> FoldResult:
    doc = documents[index]
    if len(doc.phrases) < 2:
        return FoldResult(doc.doc_id, True, "no phrase pairs", None)
    model = None
    if config.engine != ENGINE_RULES:
        training = _training_instances(documents, index)
        if not training:
            raise HarnessError(f"no training instances for fold {doc.doc_id!r}")
        model = dtree.train(training, FEATURE_SCHEMA, _effective_params(config))
    links = response_links(doc, config, model)
    report = score_document(key_chains(doc), links, config.strategy, config.betas)
    return FoldResult(doc.doc_id, False, None, report)


def leave_one_out(documents: Sequence[Document], config: ExperimentConfig) -> XvalResult:
    """One fold per document; aggregate over the non-skipped folds."""
    documents = list(documents)
    if len(documents) < 2:
        raise HarnessError("leave-one-out needs at least two documents")
    if config.jobs == 1:
        folds = [_run_fold(documents, i, config) for i in range(len(documents))]
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = [pool.submit(_run_fold, documents, i, config)
                       for i in range(len(documents))]
            folds = [f.result() for f in futures]
    reports = [f.report for f in folds if not f.skipped]
    if not reports:
        raise HarnessError("every fold was skipped")
    return XvalResult(config.engine, tuple(folds),
                      aggregate(reports, config.aggregation, config.betas))


def engine_configs(base: ExperimentConfig = ExperimentConfig()) -> tuple[ExperimentConfig, ...]:
    return tuple(replace(base, engine=engine) for engine in ENGINES)


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple[XvalResult, ...]
    strategy: str
    aggregation: str
    betas: tuple[float, ...]
    seed: int


def run_experiment(documents: Sequence[Document],
                   configs: Sequence[ExperimentConfig] | None = None) -> ExperimentResult:
    """Run every engine over identical folds and collect the comparison."""
    if configs is None:
        configs = engine_configs()
    if not configs:
        raise HarnessError("no engine configurations")
    first = configs[0]
    for config in configs:
        if (config.strategy, config.aggregation, config.betas) != (
                first.strategy, first.aggregation, first.betas):
            raise HarnessError("engine rows must share strategy, aggregation, and betas")
    rows = tuple(leave_one_out(documents, config) for config in configs)
    return ExperimentResult(rows, first.strategy, first.aggregation,
                            first.betas, first.seed)


# ---------------------------------------------------------------------------
# records


def fold_to_record(fold: FoldResult) -> dict:
    return {
        "doc_id": fold.doc_id,
        "skipped": fold.skipped,
        "reason": fold.reason,
        "report": None if fold.report is None else report_to_record(fold.report),
    }


def result_to_record(result: ExperimentResult) -> dict:
    return {
        "format": CONFIG_FORMAT_VERSION,
        "strategy": result.strategy,
        "aggregation": result.aggregation,
        "betas": list(result.betas),
        "seed": result.seed,
        "engines": [
            {
                "engine": row.engine,
                "aggregate": report_to_record(row.aggregate),
                "folds": [fold_to_record(f) for f in row.folds],
            }
            for row in result.rows
        ],
    }


def render_table(result: ExperimentResult) -> str:
    """Fixed-width comparison table, scores as percentages."""
    headers = ["engine", "recall", "precision"] + [f"F(b={b})" for b in result.betas]
    rows = []
    for row in result.rows:
        agg = row.aggregate
        cells = [row.engine, f"{100 * agg.recall:.1f}%", f"{100 * agg.precision:.1f}%"]
        cells += [f"{100 * agg.f_measures[b]:.1f}%" for b in result.betas]
        rows.append(cells)
    widths = [max(len(headers[i]), *(len(r[i]) for r in rows)) for i in range(len(headers))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip()]
    for cells in rows:
        lines.append("  ".join(
            cells[i].ljust(widths[i]) if i == 0 else cells[i].rjust(widths[i])
            for i in range(len(cells))).rstrip())
    return "\n".join(lines) + "\n"


def config_to_record(config: ExperimentConfig) -> dict:
    return {
        "format": CONFIG_FORMAT_VERSION,
        "min_instances_per_branch": config.train_params.min_instances_per_branch,
        "pruning_confidence": config.train_params.pruning_confidence,
        "mean_gain_gate": config.train_params.mean_gain_gate,
        "strategy": config.strategy,
        "aggregation": config.aggregation,
        "betas": list(config.betas),
        "seed": config.seed,
        "jobs": config.jobs,
    }


def config_from_record(obj: dict) -> ExperimentConfig:
    if not isinstance(obj, dict):
        raise HarnessError("config must be an object")
    if obj.get("format") != CONFIG_FORMAT_VERSION:
        raise HarnessError(f"unsupported config format version {obj.get('format')!r}")
    allowed = {"format", "min_instances_per_branch", "pruning_confidence",
               "mean_gain_gate", "strategy", "aggregation", "betas", "seed", "jobs"}
    unknown = set(obj) - allowed
    if unknown:
        raise HarnessError(f"unknown config fields: {sorted(unknown)}")
    defaults = ExperimentConfig()
    params = dtree.TrainParams(
        min_instances_per_branch=obj.get("min_instances_per_branch", 2),
        pruning_confidence=obj.get("pruning_confidence", 0.25),
        mean_gain_gate=obj.get("mean_gain_gate", True),
    )
    return ExperimentConfig(
        engine=defaults.engine,
        train_params=params,
        strategy=obj.get("strategy", defaults.strategy),
        aggregation=obj.get("aggregation", defaults.aggregation),
        betas=tuple(obj.get("betas", defaults.betas)),
        seed=obj.get("seed", defaults.seed),
        jobs=obj.get("jobs", defaults.jobs),
    )
