"""Concept-gated binary classifier with DNF rule extraction."""

from .data import (
    BinaryDataset,
    DataSplit,
    FeatureSchema,
    load_csv,
    rank_features,
    save_csv,
    select_features,
    split,
)
from .explain import (
    ExplanationSet,
    GlobalExplanation,
    LocalExplanationRecord,
    aggregate_powerset,
    aggregate_raw,
    aggregate_standard,
    aggregate_tailored,
    collect_locals,
    extract_local,
)
from .formula import (
    Conjunction,
    Dnf,
    Literal,
    canonicalize,
    complexity,
    eval_conjunction,
    eval_dnf,
    format_formula,
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
from .model import (
    LenConfig,
    LenModel,
    TrainReport,
    gradient_check,
    load_model,
    predict,
    relevant_features,
    save_model,
    train,
)
from .synth import PlantSpec, exhaustive_rule_accuracy, generate

__version__ = "0.1.0"
