"""Local conjunction extraction and global DNF aggregation strategies.

A local explanation is the conjunction of the model's relevant features,
signed by the sample's values, for the sample's predicted class. Global
explanations disjoin selected locals under one of four strategies:

  raw       top-k most frequent locals
  standard  accuracy-sorted top-k, greedily kept on strict validation gain
  powerset  exhaustive best subset (O(2^n), capped)
  tailored  precision-threshold line search around the model's own
            precision, then the standard greedy pass (O(m*n))

Record statistics and all aggregation decisions are measured on the
validation split; strict-improvement comparisons use integer correct-counts
so ties are exact.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import EmptySet, NoSamplesPredictedAsClass, TooManyRecords
from .formula import (
    Conjunction,
    Dnf,
    Literal,
    canonicalize,
    complexity,
    coverage_matrix,
    eval_dnf_batch,
    format_formula,
    format_term,
    parse_formula,
    simplify_dnf,
)
from .metrics import (
    ConfusionCounts,
    MetricsReport,
    compute_metrics,
    confusion,
    fidelity,
)
from .model import LenModel, predict, relevant_features


@dataclass(frozen=True)
class LocalExplanationRecord:
    conjunction: Conjunction
    class_id: int
    frequency: int
    precision: float
    recall: float
    accuracy: float
    counts: ConfusionCounts
    text: str


@dataclass(frozen=True)
class ExplanationSet:
    class_id: int
    records: tuple
    source_split: str = "train"


@dataclass(frozen=True)
class GlobalExplanation:
    dnf: Dnf
    strategy: str
    chosen_threshold: float | None
    metrics: MetricsReport
    fidelity: float
    complexity: int
    line_search_evals: int | None = None


def extract_local(model: LenModel, sample):
    """(predicted class, conjunction); the conjunction holds on the sample."""
    class_id, _ = predict(model, sample)
    features = relevant_features(model, class_id)
    literals = [Literal(j, negated=bool(sample[j] < 0.5)) for j in features]
    return class_id, canonicalize(literals)


def collect_locals(
    model: LenModel, dataset, split, class_id: int = 1
) -> ExplanationSet:
    """Group the locals of all train samples predicted as class_id.

    Frequencies count train samples; precision/recall/accuracy treat each
    conjunction as a lone classifier for class_id, measured on validation.
    """
    X_train = dataset.features[split.train]
    preds = model.predict_batch(X_train)
    rows = np.flatnonzero(preds == class_id)
    if rows.size == 0:
        raise NoSamplesPredictedAsClass(class_id)

    features = relevant_features(model, class_id)
    groups = {}
    for i in rows:
        key = tuple(bool(v) for v in X_train[i, features])
        groups[key] = groups.get(key, 0) + 1

    conjs = [
        canonicalize(
            Literal(j, negated=not value)
            for j, value in zip(features, key)
        )
        for key in groups
    ]
    frequencies = list(groups.values())

    X_val = dataset.features[split.val]
    target = dataset.labels[split.val] == class_id
    cover = coverage_matrix(conjs, X_val)

    records = []
    for t, conj in enumerate(conjs):
        counts = confusion(cover[:, t], target)
        report = compute_metrics(counts)
        records.append(
            LocalExplanationRecord(
                conjunction=conj,
                class_id=class_id,
                frequency=frequencies[t],
                precision=report.precision,
                recall=report.recall,
                accuracy=report.accuracy,
                counts=counts,
                text=format_term(conj, dataset.schema),
            )
        )
    records.sort(key=lambda r: (-r.frequency, r.text))
    return ExplanationSet(class_id=class_id, records=tuple(records))


# ---------------------------------------------------------------------------
# shared evaluation plumbing
# ---------------------------------------------------------------------------

def _class_correct_counts(dnf_true, target) -> int:
    """Samples where predicting class_id on dnf-truth matches the label."""
    return int(np.count_nonzero(dnf_true == target))


def _finalize(terms, strategy, expl_set, dataset, split, model,
              chosen_threshold=None, line_search_evals=None):
    class_id = expl_set.class_id
    dnf = simplify_dnf(Dnf(tuple(terms), class_id=class_id))
    X_val = dataset.features[split.val]
    dnf_true = eval_dnf_batch(dnf, X_val)
    # the explanation predicts class_id where the formula holds
    as_positive = dnf_true if class_id == 1 else ~dnf_true
    report = compute_metrics(
        confusion(as_positive, dataset.labels[split.val] == 1)
    )
    model_preds = model.predict_batch(X_val) == 1
    return GlobalExplanation(
        dnf=dnf,
        strategy=strategy,
        chosen_threshold=chosen_threshold,
        metrics=report,
        fidelity=fidelity(model_preds, as_positive),
        complexity=complexity(dnf),
        line_search_evals=line_search_evals,
    )


def _val_cover_and_target(expl_set, records, dataset, split):
    X_val = dataset.features[split.val]
    cover = coverage_matrix([r.conjunction for r in records], X_val)
    target = dataset.labels[split.val] == expl_set.class_id
    return cover, target


def _standard_order(records):
    return sorted(records, key=lambda r: (-r.accuracy, -r.frequency, r.text))


def _greedy_keep(records, cover_cols, target):
    """Seed with the first record, keep the rest on strict correct-count gain."""
    chosen = [0]
    pred = cover_cols[:, 0].copy()
    best = _class_correct_counts(pred, target)
    for i in range(1, len(records)):
        trial = pred | cover_cols[:, i]
        c = _class_correct_counts(trial, target)
        if c > best:
            chosen.append(i)
            pred = trial
            best = c
    return [records[i] for i in chosen]


# ---------------------------------------------------------------------------
# aggregation strategies
# ---------------------------------------------------------------------------

def aggregate_raw(expl_set: ExplanationSet, dataset, split, model,
                  k: int | None = None) -> GlobalExplanation:
    """Disjoin the k most frequent locals (all of them when k is None)."""
    if not expl_set.records:
        raise EmptySet("no local-explanation records")
    picked = expl_set.records if k is None else expl_set.records[:k]
    return _finalize(
        [r.conjunction for r in picked], "raw", expl_set, dataset, split, model
    )


def aggregate_standard(expl_set: ExplanationSet, dataset, split, model,
                       k: int | None = None) -> GlobalExplanation:
    """Greedy accuracy-ordered aggregation with strict validation gain."""
    if not expl_set.records:
        raise EmptySet("no local-explanation records")
    ordered = _standard_order(expl_set.records)
    if k is not None:
        ordered = ordered[:k]
    cover, target = _val_cover_and_target(expl_set, ordered, dataset, split)
    kept = _greedy_keep(ordered, cover, target)
    return _finalize(
        [r.conjunction for r in kept], "standard", expl_set, dataset, split,
        model,
    )


def aggregate_powerset(expl_set: ExplanationSet, dataset, split, model,
                       limit: int = 15) -> GlobalExplanation:
    """Exhaustive optimum over all non-empty record subsets.

    O(2^n) in the record count; refuses more than ``limit`` records.
    Accuracy ties prefer fewer terms, then fewer literals, then formula text.
    """
    records = expl_set.records
    if not records:
        raise EmptySet("no local-explanation records")
    if len(records) > limit:
        raise TooManyRecords(len(records), limit)

    cover, target = _val_cover_and_target(expl_set, records, dataset, split)
    counts = _kernels.subset_correct_counts(
        np.ascontiguousarray(cover.T), np.ascontiguousarray(target)
    )
    counts[0] = -1  # the empty subset is not a candidate
    best = int(counts.max())
    candidates = np.flatnonzero(counts == best)

    def n_terms(mask):
        return bin(int(mask)).count("1")

    def subset_complexity(mask):
        return sum(
            len(records[i].conjunction.literals)
            for i in range(len(records))
            if mask >> i & 1
        )

    def subset_text(mask):
        return " | ".join(
            records[i].text for i in range(len(records)) if mask >> i & 1
        )

    ranked = sorted(
        candidates,
        key=lambda m: (n_terms(m), subset_complexity(m), subset_text(m)),
    )
    mask = int(ranked[0])
    picked = [records[i] for i in range(len(records)) if mask >> i & 1]
    return _finalize(
        [r.conjunction for r in picked], "powerset", expl_set, dataset, split,
        model,
    )


def aggregate_tailored(expl_set: ExplanationSet, model_precision: float,
                       dataset, split, model,
                       alpha: float = 0.1) -> GlobalExplanation:
    """Precision-threshold line search, then the standard greedy pass.

    The threshold starts at the model's own validation precision; records
    with precision below the threshold are filtered out and the remainder's
    disjunction is scored on validation. The threshold first walks down,
    then restarts and walks up, each phase stopping at the first
    non-improvement or on leaving [0, 1]. The best filtered set then goes
    through the strict-improvement greedy aggregation.
    """
    records = expl_set.records
    if not records:
        raise EmptySet("no local-explanation records")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")

    cover, target = _val_cover_and_target(expl_set, records, dataset, split)
    precisions = np.array([r.precision for r in records])
    evals = 0

    def filter_at(threshold):
        return np.flatnonzero(precisions >= threshold)

    def correct_of(indices):
        nonlocal evals
        evals += 1
        if indices.size == 0:
            pred = np.zeros(cover.shape[0], dtype=np.bool_)
        else:
            pred = cover[:, indices].any(axis=1)
        return _class_correct_counts(pred, target)

    start = model_precision
    if filter_at(start).size == 0:
        # nothing reaches the model's precision: fall back to the best record
        start = float(precisions.max())
    best_idx = filter_at(start)
    best_correct = correct_of(best_idx)
    chosen_threshold = start

    for direction in (-1.0, 1.0):
        t = start
        while True:
            t += direction * alpha
            if t < 0.0 or t > 1.0:
                break
            current = filter_at(t)
            c = correct_of(current)
            if c > best_correct:
                best_idx, best_correct, chosen_threshold = current, c, t
            else:
                break

    survivors = _standard_order([records[i] for i in best_idx])
    if survivors:
        cover_kept = coverage_matrix(
            [r.conjunction for r in survivors], dataset.features[split.val]
        )
        kept = _greedy_keep(survivors, cover_kept, target)
    else:
        kept = []  # constant false beat every filtered set
    return _finalize(
        [r.conjunction for r in kept], "tailored", expl_set, dataset, split,
        model, chosen_threshold=chosen_threshold, line_search_evals=evals,
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def global_explanation_to_dict(expl: GlobalExplanation, schema) -> dict:
    return {
        "class": expl.dnf.class_id,
        "strategy": expl.strategy,
        "threshold": expl.chosen_threshold,
        "formula": format_formula(expl.dnf, schema),
        "metrics": expl.metrics.to_dict(),
        "fidelity": expl.fidelity,
        "complexity": expl.complexity,
    }


def global_explanation_from_dict(blob: dict, schema) -> GlobalExplanation:
    return GlobalExplanation(
        dnf=parse_formula(blob["formula"], schema, class_id=blob["class"]),
        strategy=blob["strategy"],
        chosen_threshold=blob["threshold"],
        metrics=MetricsReport.from_dict(blob["metrics"]),
        fidelity=blob["fidelity"],
        complexity=blob["complexity"],
    )


def dump_explanation_set(expl_set: ExplanationSet, path) -> None:
    """One JSON object per line: formula, frequency, precision, recall, accuracy."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in expl_set.records:
            fh.write(
                json.dumps(
                    {
                        "formula": r.text,
                        "frequency": r.frequency,
                        "precision": r.precision,
                        "recall": r.recall,
                        "accuracy": r.accuracy,
                    },
                    sort_keys=True,
                )
            )
            fh.write("\n")
