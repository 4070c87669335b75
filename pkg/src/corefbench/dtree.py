"""Categorical decision-tree induction with gain-ratio splits.

A faithful small-scale cousin of classic information-gain tree learners:
multiway splits on categorical features, the gain-ratio criterion gated by
mean positive gain, a minimum-branch-support stopping rule, and pessimistic
error-based subtree replacement for pruning.  UNKNOWN is handled as an
ordinary feature value (it gets its own branch), not by fractional instances.

Induction is fully deterministic: retraining on the same instance multiset
yields an identical tree, with criterion ties broken by schema order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

POSITIVE = "POSITIVE"
NEGATIVE = "NEGATIVE"

FORMAT_VERSION = 1

_EPS = 1e-12

Schema = tuple[tuple[str, tuple[str, ...]], ...]


class TreeError(ValueError):
    pass


class SchemaMismatch(TreeError):
    pass


@dataclass(frozen=True)
class TrainParams:
    min_instances_per_branch: int = 2
    pruning_confidence: float = 0.25
    prune: bool = False
    mean_gain_gate: bool = True

    def __post_init__(self) -> None:
        if self.min_instances_per_branch < 1:
            raise TreeError("min_instances_per_branch must be >= 1")
        if not (0.0 < self.pruning_confidence < 1.0):
            raise TreeError("pruning_confidence must lie in (0, 1)")


@dataclass(frozen=True)
class Leaf:
    counts: tuple[int, int]  # (positive, negative)
    label: str


@dataclass(frozen=True)
class Split:
    feature: str
    counts: tuple[int, int]
    branches: tuple[tuple[str, "Node"], ...]  # one branch per declared value

    def __post_init__(self) -> None:
        object.__setattr__(self, "_by_value", dict(self.branches))

    def branch(self, value: str) -> "Node":
        try:
            return self._by_value[value]
        except KeyError:
            raise SchemaMismatch(f"no branch for value {value!r} of {self.feature}") from None


Node = Leaf | Split


@dataclass(frozen=True)
class DecisionTree:
    root: Node
    schema: Schema
    params: TrainParams

    def node_count(self) -> int:
        return _count_nodes(self.root)

    def leaf_count(self) -> int:
        return _count_leaves(self.root)


def _count_nodes(node: Node) -> int:
    if isinstance(node, Leaf):
        return 1
    return 1 + sum(_count_nodes(child) for _, child in node.branches)


def _count_leaves(node: Node) -> int:
    if isinstance(node, Leaf):
        return 1
    return sum(_count_leaves(child) for _, child in node.branches)


def _majority(counts: tuple[int, int]) -> str:
    pos, neg = counts
    return POSITIVE if pos > neg else NEGATIVE


# ---------------------------------------------------------------------------
# split criteria


def entropy(counts: Sequence[int]) -> float:
    """Shannon entropy in bits of a class-count vector."""
    total = sum(counts)
    if total == 0:
        return 0.0
    h = 0.0
    for c in counts:
        if c < 0:
            raise TreeError("negative class count")
        if c:
            p = c / total
            h -= p * math.log2(p)
    return h


@dataclass(frozen=True)
class GainStats:
    gain: float
    split_info: float
    ratio: float | None  # None when split_info is 0 (undefined)


def _label_counts(instances) -> tuple[int, int]:
    pos = sum(1 for i in instances if i.label == POSITIVE)
    return (pos, len(instances) - pos)


def _partition(instances, feature: str) -> dict[str, list]:
    subsets: dict[str, list] = {}
    for inst in instances:
        subsets.setdefault(inst.features[feature], []).append(inst)
    return subsets


def _gain_stats(parent_counts: tuple[int, int], subsets: dict[str, list]) -> GainStats:
    total = sum(parent_counts)
    remainder = 0.0
    split_info = 0.0
    for subset in subsets.values():
        w = len(subset) / total
        remainder += w * entropy(_label_counts(subset))
        split_info -= w * math.log2(w)
    gain = entropy(parent_counts) - remainder
    ratio = gain / split_info if split_info > _EPS else None
    return GainStats(gain, split_info, ratio)


def gain_ratio(instances, feature: str) -> GainStats:
    """Information gain, split information, and their ratio for one feature."""
    if not instances:
        raise TreeError("gain_ratio needs at least one instance")
    return _gain_stats(_label_counts(instances), _partition(instances, feature))


# ---------------------------------------------------------------------------
# induction


def _normalize_schema(schema) -> Schema:
    out = tuple((str(name), tuple(values)) for name, values in schema)
    names = [name for name, _ in out]
    if len(set(names)) != len(names):
        raise SchemaMismatch("duplicate feature name in schema")
    for name, values in out:
        if len(values) < 2 or len(set(values)) != len(values):
            raise SchemaMismatch(f"feature {name} needs at least two distinct values")
    return out


def _check_instances(instances, schema: Schema, labeled: bool) -> None:
    names = {name for name, _ in schema}
    values = dict(schema)
    for inst in instances:
        if set(inst.features) != names:
            raise SchemaMismatch(f"instance features {sorted(inst.features)} do not match schema")
        for name, vals in values.items():
            if inst.features[name] not in vals:
                raise SchemaMismatch(
                    f"value {inst.features[name]!r} of feature {name} not in schema")
        if labeled and inst.label not in (POSITIVE, NEGATIVE):
            raise TreeError(f"cannot train on label {inst.label!r}")


def _grow(instances, available: tuple[str, ...], schema_values: dict, params: TrainParams) -> Node:
    counts = _label_counts(instances)
    if counts[0] == 0 or counts[1] == 0 or not available:
        return Leaf(counts, _majority(counts))

    candidates = []  # (feature, gain, ratio, subsets), in schema order
    for feature in available:
        subsets = _partition(instances, feature)
        supported = sum(1 for s in subsets.values() if len(s) >= params.min_instances_per_branch)
        if supported < 2:
            continue
        stats = _gain_stats(counts, subsets)
        if stats.gain <= _EPS or stats.ratio is None:
            continue
        candidates.append((feature, stats.gain, stats.ratio, subsets))
    if not candidates:
        return Leaf(counts, _majority(counts))

    if params.mean_gain_gate:
        mean_gain = sum(g for _, g, _, _ in candidates) / len(candidates)
        eligible = [c for c in candidates if c[1] >= mean_gain - _EPS]
    else:
        eligible = candidates

    best = eligible[0]
    for cand in eligible[1:]:
        if cand[2] > best[2] + _EPS:
            best = cand
    feature, _, _, subsets = best

    remaining = tuple(f for f in available if f != feature)
    branches = []
    for value in schema_values[feature]:
        subset = subsets.get(value, [])
        if subset:
            branches.append((value, _grow(subset, remaining, schema_values, params)))
        else:
            branches.append((value, Leaf((0, 0), NEGATIVE)))
    return Split(feature, counts, tuple(branches))


def train(instances, schema, params: TrainParams = TrainParams()) -> DecisionTree:
    """Greedy top-down induction; prunes afterwards when params.prune is set.

    Instances are any objects with a ``features`` mapping and a ``label`` in
    {POSITIVE, NEGATIVE}.  A split must have positive gain and leave at least
    ``min_instances_per_branch`` instances in two or more branches; among
    features with gain at or above the mean positive gain the largest gain
    ratio wins, ties resolved by schema order.
    """
    instances = list(instances)
    if not instances:
        raise TreeError("cannot train on an empty instance set")
    norm = _normalize_schema(schema)
    _check_instances(instances, norm, labeled=True)
    root = _grow(instances, tuple(name for name, _ in norm), dict(norm), params)
    tree = DecisionTree(root, norm, params)
    if params.prune:
        tree = prune(tree, instances)
    return tree


# ---------------------------------------------------------------------------
# pessimistic pruning


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _binom_cdf(e: int, n: int, p: float) -> float:
    if p <= 0.0:
        return 1.0
    if p >= 1.0:
        return 1.0 if e >= n else 0.0
    total = 0.0
    for k in range(e + 1):
        total += math.exp(_log_comb(n, k) + k * math.log(p) + (n - k) * math.log1p(-p))
    return min(total, 1.0)


def upper_error_bound(errors: int, n: int, confidence: float) -> float:
    """Upper confidence limit on the binomial error rate of a leaf.

    Solves P(X <= errors | n, p) = confidence for p.  For zero errors this is
    the closed form 1 - confidence ** (1 / n).
    """
    if n <= 0:
        return 0.0
    if errors >= n:
        return 1.0
    if errors == 0:
        return 1.0 - confidence ** (1.0 / n)
    lo, hi = 0.0, 1.0
    for _ in range(100):
        mid = (lo + hi) / 2.0
        if _binom_cdf(errors, n, mid) > confidence:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def _pessimistic_errors(counts: tuple[int, int], confidence: float) -> float:
    n = counts[0] + counts[1]
    if n == 0:
        return 0.0
    errors = counts[1] if _majority(counts) == POSITIVE else counts[0]
    return n * upper_error_bound(errors, n, confidence)


def _prune_node(node: Node, instances, confidence: float) -> tuple[Node, float]:
    counts = _label_counts(instances)
    if isinstance(node, Leaf):
        if counts != node.counts:
            raise TreeError("instances do not match the tree's training counts")
        return node, _pessimistic_errors(counts, confidence)
    if counts != node.counts:
        raise TreeError("instances do not match the tree's training counts")
    subsets = _partition(instances, node.feature)
    branches = []
    subtree_errors = 0.0
    for value, child in node.branches:
        pruned_child, child_errors = _prune_node(child, subsets.get(value, []), confidence)
        branches.append((value, pruned_child))
        subtree_errors += child_errors
    collapsed = Leaf(counts, _majority(counts))
    leaf_errors = _pessimistic_errors(counts, confidence)
    if leaf_errors <= subtree_errors + _EPS:
        return collapsed, leaf_errors
    return Split(node.feature, counts, tuple(branches)), subtree_errors


def prune(tree: DecisionTree, instances, confidence: float | None = None) -> DecisionTree:
    """Bottom-up subtree replacement by pessimistic error estimates.

    ``instances`` must be the training set of the tree.  A subtree collapses
    to its majority leaf whenever the leaf's estimated errors do not exceed
    the sum of its branches' estimates.  The result is never larger than the
    input tree.
    """
    instances = list(instances)
    _check_instances(instances, tree.schema, labeled=True)
    cf = tree.params.pruning_confidence if confidence is None else confidence
    if not (0.0 < cf < 1.0):
        raise TreeError("confidence must lie in (0, 1)")
    root, _ = _prune_node(tree.root, instances, cf)
    return DecisionTree(root, tree.schema, tree.params)


# ---------------------------------------------------------------------------
# classification


def classify(tree: DecisionTree, instance) -> tuple[str, tuple[int, int]]:
    """Route one instance to a leaf; returns (label, training counts)."""
    features = instance.features if hasattr(instance, "features") else instance
    node = tree.root
    while isinstance(node, Split):
        try:
            value = features[node.feature]
        except KeyError:
            raise SchemaMismatch(f"instance lacks feature {node.feature}") from None
        node = node.branch(value)
    return node.label, node.counts


# ---------------------------------------------------------------------------
# model files


def _node_to_record(node: Node) -> dict:
    if isinstance(node, Leaf):
        return {"kind": "leaf", "counts": list(node.counts), "label": node.label}
    return {
        "kind": "split",
        "feature": node.feature,
        "counts": list(node.counts),
        "branches": {value: _node_to_record(child) for value, child in node.branches},
    }


def _node_from_record(obj, schema_values: dict) -> Node:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise TreeError("malformed node record")
    counts = obj.get("counts")
    if (not isinstance(counts, list) or len(counts) != 2
            or not all(isinstance(c, int) and c >= 0 for c in counts)):
        raise TreeError("node counts must be two non-negative integers")
    if obj["kind"] == "leaf":
        if obj.get("label") not in (POSITIVE, NEGATIVE):
            raise TreeError(f"bad leaf label {obj.get('label')!r}")
        return Leaf((counts[0], counts[1]), obj["label"])
    if obj["kind"] != "split":
        raise TreeError(f"unknown node kind {obj['kind']!r}")
    feature = obj.get("feature")
    if feature not in schema_values:
        raise SchemaMismatch(f"split on unknown feature {feature!r}")
    branches = obj.get("branches")
    if not isinstance(branches, dict) or set(branches) != set(schema_values[feature]):
        raise SchemaMismatch(f"branches of {feature} must cover its declared values")
    return Split(
        feature,
        (counts[0], counts[1]),
        tuple((value, _node_from_record(branches[value], schema_values))
              for value in schema_values[feature]),
    )


def serialize_tree(tree: DecisionTree) -> str:
    record = {
        "format": FORMAT_VERSION,
        "params": {
            "min_instances_per_branch": tree.params.min_instances_per_branch,
            "pruning_confidence": tree.params.pruning_confidence,
            "prune": tree.params.prune,
            "mean_gain_gate": tree.params.mean_gain_gate,
        },
        "schema": [[name, list(values)] for name, values in tree.schema],
        "root": _node_to_record(tree.root),
    }
    return json.dumps(record, ensure_ascii=False, indent=2) + "\n"


def deserialize_tree(text: str) -> DecisionTree:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeError(f"invalid model file: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise TreeError("model file must hold an object")
    if obj.get("format") != FORMAT_VERSION:
        raise TreeError(f"unsupported model format version {obj.get('format')!r}")
    for key in ("params", "schema", "root"):
        if key not in obj:
            raise TreeError(f"model file missing {key!r}")
    schema = _normalize_schema(obj["schema"])
    params = TrainParams(**obj["params"])
    return DecisionTree(_node_from_record(obj["root"], dict(schema)), schema, params)
