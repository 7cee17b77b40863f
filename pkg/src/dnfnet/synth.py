"""Planted-rule synthetic datasets and exhaustive formula-agreement oracles.

Samples are fair coin flips per feature; labels come from a ground-truth DNF,
optionally flipped by iid label noise. Class balance is reached by resampling
uniformly chosen rows of the over-represented class (so the final sample is
not strictly iid, in exchange for a controlled positive fraction).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .data import BinaryDataset, FeatureSchema
from .errors import DimensionMismatch, DimensionTooLarge, UnsatisfiablePlant
from .formula import Dnf, eval_dnf_batch, term_masks

EXHAUSTIVE_D_CAP = 20
BALANCE_TOLERANCE = 0.05


@dataclass(frozen=True)
class PlantSpec:
    d: int
    planted: Dnf
    n: int
    noise_rate: float = 0.0
    positive_fraction_target: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.d < 1 or self.n < 1:
            raise ValueError("d and n must be positive")
        if not (0.0 <= self.noise_rate < 0.5):
            raise ValueError("noise_rate must lie in [0, 0.5)")
        if not (0.0 < self.positive_fraction_target < 1.0):
            raise ValueError("positive_fraction_target must lie in (0, 1)")
        top = max(
            (lit.feature for t in self.planted.terms for lit in t.literals),
            default=-1,
        )
        if top >= self.d:
            raise DimensionMismatch(self.d, top + 1)


def _satisfying_count(dnf: Dnf, d: int) -> int:
    """Number of assignments of {0,1}^d satisfying the formula."""
    pos, neg = term_masks(dnf.terms)
    const_true = np.zeros(1, dtype=np.uint64)
    return _kernels.truth_table_agreement(pos, neg, const_true, const_true, d)


def generate(spec: PlantSpec) -> BinaryDataset:
    """Draw a seed-deterministic dataset labeled by the planted rule."""
    if spec.d <= EXHAUSTIVE_D_CAP:
        sat = _satisfying_count(spec.planted, spec.d)
        if sat == 0 or sat == (1 << spec.d):
            raise UnsatisfiablePlant(
                "planted rule is constant over {0,1}^d; "
                "the target positive fraction is unreachable"
            )

    rng = np.random.default_rng(spec.seed)
    X = rng.integers(0, 2, size=(spec.n, spec.d)).astype(np.bool_)
    clean = eval_dnf_batch(spec.planted, X)

    npos = int(np.count_nonzero(clean))
    lo = spec.positive_fraction_target - BALANCE_TOLERANCE
    hi = spec.positive_fraction_target + BALANCE_TOLERANCE
    max_attempts = 500 * spec.n
    attempts = 0
    while not (lo <= npos / spec.n <= hi):
        if attempts >= max_attempts:
            raise UnsatisfiablePlant(
                f"could not reach positive fraction "
                f"{spec.positive_fraction_target}+-{BALANCE_TOLERANCE} after "
                f"{max_attempts} row resamples"
            )
        attempts += 1
        excess = npos / spec.n > hi
        members = np.flatnonzero(clean == excess)
        row = int(members[rng.integers(0, members.size)])
        X[row] = rng.integers(0, 2, size=spec.d).astype(np.bool_)
        was = clean[row]
        clean[row] = eval_dnf_batch(spec.planted, X[row : row + 1])[0]
        npos += int(clean[row]) - int(was)

    labels = clean.copy()
    if spec.noise_rate > 0.0:
        flips = rng.random(spec.n) < spec.noise_rate
        labels ^= flips

    return BinaryDataset(
        schema=FeatureSchema(tuple(f"x{j}" for j in range(spec.d))),
        features=X,
        labels=labels.astype(np.int8),
    )


def exhaustive_rule_accuracy(rule: Dnf, reference: Dnf, d: int) -> float:
    """Fraction of all 2^d assignments where the two formulas agree."""
    if d > EXHAUSTIVE_D_CAP:
        raise DimensionTooLarge(d, EXHAUSTIVE_D_CAP)
    if d < 1:
        raise ValueError("d must be positive")
    for dnf in (rule, reference):
        top = max(
            (lit.feature for t in dnf.terms for lit in t.literals), default=-1
        )
        if top >= d:
            raise DimensionMismatch(d, top + 1)
    pos_a, neg_a = term_masks(rule.terms)
    pos_b, neg_b = term_masks(reference.terms)
    agree = _kernels.truth_table_agreement(pos_a, neg_a, pos_b, neg_b, d)
    return agree / float(1 << d)
