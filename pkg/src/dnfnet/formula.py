"""Boolean DNF fragment: literals, conjunctions, disjunctions of conjunctions.

All values are immutable after construction. Conjunctions keep at most one
literal per feature, sorted by feature index; a conjunction whose raw input
contained both x and ~x for some feature is flagged contradictory (constant
false) and the conflicting literals are dropped from the stored list.
"""

import re
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, FormulaSyntaxError, UnknownFeature


@dataclass(frozen=True, order=True)
class Literal:
    feature: int
    negated: bool = False


@dataclass(frozen=True)
class Conjunction:
    """AND of literals; empty is constant true, contradictory is constant false."""

    literals: tuple = ()
    contradictory: bool = False


@dataclass(frozen=True)
class Dnf:
    """OR of conjunctions explaining ``class_id``; no terms means constant false."""

    terms: tuple = ()
    class_id: int = 1


def canonicalize(literals) -> Conjunction:
    """Dedupe and sort literals; flag x & ~x conflicts as contradictory."""
    polarity = {}
    conflict = False
    for lit in literals:
        seen = polarity.get(lit.feature)
        if seen is None:
            polarity[lit.feature] = lit.negated
        elif seen != lit.negated:
            conflict = True
            polarity[lit.feature] = None
    kept = tuple(
        Literal(f, neg) for f, neg in sorted(polarity.items()) if neg is not None
    )
    return Conjunction(kept, contradictory=conflict)


def eval_conjunction(conj: Conjunction, sample) -> bool:
    """True iff every literal holds; contradictory is false, empty is true."""
    if conj.contradictory:
        return False
    n = len(sample)
    for lit in conj.literals:
        if lit.feature >= n:
            raise DimensionMismatch(lit.feature + 1, n)
        if bool(sample[lit.feature]) == lit.negated:
            return False
    return True


def eval_dnf(dnf: Dnf, sample) -> bool:
    """True iff some term holds; the empty formula is false."""
    return any(eval_conjunction(t, sample) for t in dnf.terms)


def simplify_dnf(dnf: Dnf) -> Dnf:
    """Shrink a DNF without changing its truth table.

    Canonicalizes every term, drops contradictory terms, drops duplicates,
    and drops any term absorbed by a shorter one (literals(S) subset of
    literals(T) kills T). Survivors keep first-appearance order.
    """
    canon = []
    seen = set()
    for term in dnf.terms:
        term = canonicalize(term.literals) if not _is_canonical(term) else term
        if term.contradictory:
            continue
        key = term.literals
        if key in seen:
            continue
        seen.add(key)
        canon.append(term)

    lit_sets = [frozenset(t.literals) for t in canon]
    kept = []
    for i, term in enumerate(canon):
        absorbed = any(
            j != i and lit_sets[j] < lit_sets[i] for j in range(len(canon))
        )
        if not absorbed:
            kept.append(term)
    return Dnf(tuple(kept), class_id=dnf.class_id)


def _is_canonical(term: Conjunction) -> bool:
    feats = [lit.feature for lit in term.literals]
    return feats == sorted(set(feats))


def complexity(dnf: Dnf) -> int:
    """Total count of literal occurrences across all terms."""
    return sum(len(t.literals) for t in dnf.terms)


# ---------------------------------------------------------------------------
# batch evaluation (kernel-backed)
# ---------------------------------------------------------------------------

def _csr_terms(terms):
    feats, negs, offs = [], [], [0]
    for term in terms:
        if not term.contradictory:
            for lit in term.literals:
                feats.append(lit.feature)
                negs.append(lit.negated)
        offs.append(len(feats))
    return (
        np.asarray(feats, dtype=np.int64),
        np.asarray(negs, dtype=np.bool_),
        np.asarray(offs, dtype=np.int64),
    )


def coverage_matrix(terms, X) -> np.ndarray:
    """bool[N, T]: truth of each conjunction on each row of X."""
    X = np.ascontiguousarray(X, dtype=np.bool_)
    terms = list(terms)
    if terms:
        top = max(
            (lit.feature for t in terms for lit in t.literals), default=-1
        )
        if top >= X.shape[1]:
            raise DimensionMismatch(top + 1, X.shape[1])
    feats, negs, offs = _csr_terms(terms)
    hits = _kernels.conjunction_hits(X, feats, negs, offs)
    for t, term in enumerate(terms):
        if term.contradictory:
            hits[:, t] = False
    return hits


def eval_dnf_batch(dnf: Dnf, X) -> np.ndarray:
    """bool[N]: eval_dnf applied to every row of X."""
    X = np.ascontiguousarray(X, dtype=np.bool_)
    if not dnf.terms:
        return np.zeros(X.shape[0], dtype=np.bool_)
    return coverage_matrix(dnf.terms, X).any(axis=1)


def term_masks(terms):
    """uint64 (required-one, required-zero) bitmask pair per non-false term."""
    pos, neg = [], []
    for term in terms:
        if term.contradictory:
            continue
        p = np.uint64(0)
        m = np.uint64(0)
        for lit in term.literals:
            bit = np.uint64(1) << np.uint64(lit.feature)
            if lit.negated:
                m |= bit
            else:
                p |= bit
        pos.append(p)
        neg.append(m)
    return np.asarray(pos, dtype=np.uint64), np.asarray(neg, dtype=np.uint64)


# ---------------------------------------------------------------------------
# text grammar
# ---------------------------------------------------------------------------
# dnf  := term ("|" term)*
# term := "(" lit ("&" lit)* ")" | lit
# lit  := "~"? name            name = [A-Za-z_][A-Za-z0-9_]*
# The keywords `false` (no terms) and `true` (single empty term) cover the
# constants the grammar itself cannot spell; a schema feature with either
# name shadows the keyword.

_TOKEN = re.compile(r"\s*([()&|~]|[A-Za-z_][A-Za-z0-9_]*)")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise FormulaSyntaxError(at, f"unexpected character {text[at]!r}")
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens, schema, text_len):
        self.tokens = tokens
        self.schema = schema
        self.i = 0
        self.text_len = text_len

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def next(self):
        if self.i >= len(self.tokens):
            raise FormulaSyntaxError(self.text_len, "unexpected end of input")
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, want):
        tok, at = self.next()
        if tok != want:
            raise FormulaSyntaxError(at, f"expected {want!r}, got {tok!r}")

    def literal(self):
        tok, at = self.next()
        negated = False
        if tok == "~":
            negated = True
            tok, at = self.next()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
            raise FormulaSyntaxError(at, f"expected feature name, got {tok!r}")
        try:
            index = self.schema.index_of(tok)
        except KeyError:
            raise UnknownFeature(tok) from None
        return Literal(index, negated)

    def term(self):
        if self.peek() == "(":
            self.next()
            lits = [self.literal()]
            while self.peek() == "&":
                self.next()
                lits.append(self.literal())
            self.expect(")")
            return canonicalize(lits)
        tok = self.peek()
        if tok in ("true", "false") and not self.schema.has(tok):
            self.next()
            if tok == "true":
                return Conjunction()
            return Conjunction(contradictory=True)
        return canonicalize([self.literal()])

    def dnf(self, class_id):
        terms = [self.term()]
        while self.peek() == "|":
            self.next()
            terms.append(self.term())
        if self.i < len(self.tokens):
            tok, at = self.tokens[self.i]
            raise FormulaSyntaxError(at, f"unexpected {tok!r}")
        return Dnf(tuple(terms), class_id=class_id)


def parse_formula(text: str, schema, class_id: int = 1) -> Dnf:
    """Parse formula text against a schema; see the module grammar."""
    stripped = text.strip()
    if stripped == "false" and not schema.has("false"):
        return Dnf((), class_id=class_id)
    tokens = _tokenize(text)
    if not tokens:
        raise FormulaSyntaxError(0, "empty formula")
    return _Parser(tokens, schema, len(text)).dnf(class_id)


def format_literal(lit: Literal, schema) -> str:
    name = schema.names[lit.feature]
    return f"~{name}" if lit.negated else name


def format_term(term: Conjunction, schema) -> str:
    if term.contradictory:
        return "false"
    if not term.literals:
        return "true"
    return "(" + " & ".join(format_literal(l, schema) for l in term.literals) + ")"


def format_formula(dnf: Dnf, schema) -> str:
    """Canonical text: parenthesized terms joined by ` | `; constants spelled out."""
    if not dnf.terms:
        return "false"
    if len(dnf.terms) == 1 and not dnf.terms[0].literals:
        return format_term(dnf.terms[0], schema)
    return " | ".join(format_term(t, schema) for t in dnf.terms)
