"""Word-overlap metrics for generated questions and agreement statistics for
ordinal human judgements."""

from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class EvalPair:
    hypothesis: tuple[str, ...]
    references: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "hypothesis", tuple(self.hypothesis))
        object.__setattr__(self, "references", tuple(tuple(r) for r in self.references))
        if not self.references:
            raise ValueError("an evaluation pair needs at least one reference")

    @classmethod
    def from_strings(cls, hyp: str, refs: Sequence[str], lowercase: bool = True):
        norm = (lambda s: s.lower().split()) if lowercase else str.split
        return cls(norm(hyp), [norm(r) for r in refs])


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(pairs: Sequence[EvalPair], n: int = 4) -> float:
    """Corpus BLEU-n (uniform weights, closest-reference brevity penalty), x100."""
    if not pairs:
        raise ValueError("empty corpus")
    if not 1 <= n <= 4:
        raise ValueError("n must be between 1 and 4")
    matches = [0] * n
    totals = [0] * n
    hyp_len = ref_len = 0
    for p in pairs:
        hyp_len += len(p.hypothesis)
        ref_len += min((abs(len(r) - len(p.hypothesis)), len(r)) for r in p.references)[1]
        for k in range(1, n + 1):
            h = _ngrams(p.hypothesis, k)
            max_ref = Counter()
            for r in p.references:
                max_ref |= _ngrams(r, k)
            matches[k - 1] += sum(min(c, max_ref[g]) for g, c in h.items())
            totals[k - 1] += sum(h.values())
    if hyp_len == 0 or any(m == 0 for m in matches):
        return 0.0
    log_p = math.fsum(math.log(m / t) for m, t in zip(matches, totals)) / n
    bp = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(log_p)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l_sentence(hyp: Sequence[str], ref: Sequence[str], beta: float = 1.2) -> float:
    if not hyp or not ref:
        return 0.0
    lcs = lcs_length(hyp, ref)
    if not lcs:
        return 0.0
    p, r = lcs / len(hyp), lcs / len(ref)
    return (1 + beta ** 2) * p * r / (r + beta ** 2 * p)


def rouge_l(pairs: Sequence[EvalPair], beta: float = 1.2) -> float:
    """Mean sentence-level ROUGE-L F (best reference per item), x100."""
    if not pairs:
        raise ValueError("empty corpus")
    scores = [max(rouge_l_sentence(p.hypothesis, r, beta) for r in p.references) for p in pairs]
    return 100.0 * math.fsum(scores) / len(scores)


def cider_scores(pairs: Sequence[EvalPair], max_n: int = 4) -> list[float]:
    """Per-item CIDEr (TF-IDF cosine averaged over references and n), x10."""
    if len(pairs) < 2:
        raise ValueError("CIDEr needs at least two items for document frequencies")
    n_docs = len(pairs)
    df = [Counter() for _ in range(max_n)]
    for p in pairs:
        for k in range(max_n):
            grams = set()
            for r in p.references:
                grams.update(_ngrams(r, k + 1))
            df[k].update(grams)

    def vec(tokens, k):
        tf = _ngrams(tokens, k + 1)
        total = sum(tf.values())
        return {g: (c / total) * math.log(n_docs / max(1.0, df[k][g])) for g, c in tf.items()}

    def cos(u, v):
        nu = math.sqrt(sum(x * x for x in u.values()))
        nv = math.sqrt(sum(x * x for x in v.values()))
        if not nu or not nv:
            return 0.0
        return sum(x * v.get(g, 0.0) for g, x in u.items()) / (nu * nv)

    out = []
    for p in pairs:
        per_n = []
        for k in range(max_n):
            h = vec(p.hypothesis, k)
            per_n.append(math.fsum(cos(h, vec(r, k)) for r in p.references) / len(p.references))
        out.append(10.0 * math.fsum(per_n) / max_n)
    return out


def cider(pairs: Sequence[EvalPair]) -> float:
    scores = cider_scores(pairs)
    return math.fsum(scores) / len(scores)


# -- agreement --------------------------------------------------------------

@dataclass(frozen=True)
class JudgementMatrix:
    """Scores of N judges for M items, each an integer in 1..categories."""

    scores: np.ndarray
    categories: int = 4

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=int)
        if s.ndim != 2:
            raise ValueError("scores must be an items x judges matrix")
        if s.shape[0] < 2 or s.shape[1] < 2:
            raise ValueError("need at least 2 items and 2 judges")
        if s.min() < 1 or s.max() > self.categories:
            raise ValueError(f"scores must lie in 1..{self.categories}")
        object.__setattr__(self, "scores", s)

    @property
    def n_items(self) -> int:
        return self.scores.shape[0]

    @property
    def n_judges(self) -> int:
        return self.scores.shape[1]


def randolph_kappa(j: JudgementMatrix) -> float:
    """Free-marginal multi-rater kappa with uniform chance agreement."""
    m, n, q = j.n_items, j.n_judges, j.categories
    agree = 0
    for row in j.scores:
        counts = np.bincount(row, minlength=q + 1)
        agree += int((counts * (counts - 1)).sum())
    p_o = agree / (m * n * (n - 1))
    p_e = 1.0 / q
    return (p_o - p_e) / (1 - p_e)


def concordance_counts(j: JudgementMatrix) -> tuple[int, int]:
    """Concordant and discordant item pairs summed over all judge pairs."""
    C = D = 0
    s = j.scores
    for a, b in combinations(range(j.n_judges), 2):
        for i, k in combinations(range(j.n_items), 2):
            da = s[i, a] - s[k, a]
            db = s[i, b] - s[k, b]
            if da == 0 or db == 0:
                continue
            if (da > 0) == (db > 0):
                C += 1
            else:
                D += 1
    return C, D


class UndefinedAgreement(ValueError):
    pass


def gamma_n(j: JudgementMatrix) -> float:
    """Goodman-Kruskal gamma generalized to N judges by pooling pair counts."""
    C, D = concordance_counts(j)
    if C + D == 0:
        raise UndefinedAgreement("every item pair is tied for some judge")
    return (C - D) / (C + D)


def aggregate_ordinal(scores: Sequence[int], ideal: int = 4) -> tuple[float, int]:
    """Median and worst mode (furthest from ``ideal`` among tied modes)."""
    if not scores:
        raise ValueError("no scores to aggregate")
    if ideal not in (1, 4):
        raise ValueError("ideal must be 1 or 4")
    modes = statistics.multimode(scores)
    mode = min(modes) if ideal == 4 else max(modes)
    return float(statistics.median(scores)), int(mode)
