"""Ranking and filtering of generated QA pairs with pos-morph models.

A trigram model over pos-morph symbols scores how likely the question's tag
sequence is, a question-word model scores how well the question word fits
the answer's head, and the two are mixed linearly. Single-word answers with
an unseen head tag are dropped, and only pairs scoring strictly above the
batch mean survive.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, TextIO

from .treebank import DepTree, pos_morph

BOS, EOS = "<s>", "</s>"
DEFAULT_LAMBDAS = (0.5, 0.3, 0.15, 0.05)
DEFAULT_ALPHA = 0.8
MODEL_VERSION = 1
UNKNOWN_TAG = "X"


def check_lambdas(lambdas: Sequence[float]) -> tuple[float, float, float, float]:
    lambdas = tuple(float(x) for x in lambdas)
    if len(lambdas) != 4 or any(x < 0 for x in lambdas) or abs(math.fsum(lambdas) - 1) > 1e-12:
        raise ValueError(f"lambdas must be 4 non-negative weights summing to 1, got {lambdas}")
    return lambdas


@dataclass
class NgramModel:
    unigrams: Counter = field(default_factory=Counter)
    bigrams: Counter = field(default_factory=Counter)
    trigrams: Counter = field(default_factory=Counter)
    lambdas: tuple = DEFAULT_LAMBDAS

    def __post_init__(self):
        self.lambdas = check_lambdas(self.lambdas)
        self._index()

    def _index(self):
        self.total = sum(self.unigrams.values())
        self.bigram_ctx = Counter()
        for (a, _), c in self.bigrams.items():
            self.bigram_ctx[a] += c
        self.trigram_ctx = Counter()
        for (a, b, _), c in self.trigrams.items():
            self.trigram_ctx[a, b] += c

    @property
    def vocabulary(self) -> set[str]:
        return set(self.unigrams)

    def add(self, seq: Sequence[str]):
        padded = [BOS, BOS, *seq, EOS]
        for i in range(2, len(padded)):
            self.unigrams[padded[i]] += 1
            self.bigrams[padded[i - 1], padded[i]] += 1
            self.trigrams[padded[i - 2], padded[i - 1], padded[i]] += 1
        self._index()


def _posmorph_seq(item) -> list[str]:
    if isinstance(item, DepTree):
        return [pos_morph(n) for n in item.nodes]
    return list(item)


def train_ngram(corpus: Iterable, lambdas: Sequence[float] = DEFAULT_LAMBDAS) -> NgramModel:
    """Count trigrams over pos-morph sequences (trees or lists of symbols).

    Each sentence is padded with two start symbols and one end symbol.
    """
    uni, bi, tri = Counter(), Counter(), Counter()
    n = 0
    for item in corpus:
        padded = [BOS, BOS, *_posmorph_seq(item), EOS]
        for i in range(2, len(padded)):
            uni[padded[i]] += 1
            bi[padded[i - 1], padded[i]] += 1
            tri[padded[i - 2], padded[i - 1], padded[i]] += 1
        n += 1
    if not n:
        raise ValueError("cannot train an n-gram model on an empty corpus")
    return NgramModel(uni, bi, tri, lambdas)


def unigram_prob(m: NgramModel, w: str) -> float:
    return m.unigrams[w] / m.total if m.total else 0.0


def bigram_prob(m: NgramModel, w_1: str, w: str) -> float:
    ctx = m.bigram_ctx[w_1]
    if ctx:
        return m.bigrams[w_1, w] / ctx
    return unigram_prob(m, w)


def backoff_prob(m: NgramModel, w_2: str, w_1: str, w: str) -> float:
    """Relative frequency at the longest seen context, no discounting."""
    ctx = m.trigram_ctx[w_2, w_1]
    if ctx:
        return m.trigrams[w_2, w_1, w] / ctx
    return bigram_prob(m, w_1, w)


def score_question(m: NgramModel, seq: Sequence[str]) -> float:
    """Mean interpolated trigram score over the question's tokens."""
    if not seq:
        return 0.0
    l1, l2, l3, l4 = m.lambdas
    padded = [BOS, BOS, *seq]
    terms = []
    for i in range(2, len(padded)):
        w_2, w_1, w = padded[i - 2], padded[i - 1], padded[i]
        terms.append(l1 * backoff_prob(m, w_2, w_1, w) + l2 * bigram_prob(m, w_1, w)
                     + l3 * unigram_prob(m, w) + l4)
    return min(1.0, math.fsum(terms) / len(terms))


@dataclass
class QWordModel:
    counts: Counter = field(default_factory=Counter)

    def add(self, qw: str, posmorph: str, n: int = 1):
        self.counts[qw, posmorph] += n

    def __post_init__(self):
        self._reindex()

    def _reindex(self):
        self.totals = defaultdict(int)
        for (qw, _), c in self.counts.items():
            self.totals[qw] += c


def train_qword(pairs: Iterable[tuple[str, str]]) -> QWordModel:
    q = QWordModel(Counter(pairs))
    return q


def score_qword(q: QWordModel, qw: str, answer_root_posmorph: str) -> float:
    total = q.totals.get(qw, 0)
    if not total:
        return 0.0
    return q.counts[qw, answer_root_posmorph] / total


@dataclass(frozen=True)
class Candidate:
    """A rendered QA pair with what the ranking models need to know about it."""

    question: str
    answer: str
    template_id: str
    question_posmorph: tuple[str, ...]
    qword: str
    answer_root_posmorph: str
    answer_length: int
    sentence_id: str = ""


@dataclass(frozen=True)
class ScoredQA:
    question: str
    answer: str
    template_id: str
    r_ng: float
    r_qw: float
    r_qa: float
    alpha: float = DEFAULT_ALPHA
    sentence_id: str = ""


def combine(r_ng: float, r_qw: float, alpha: float = DEFAULT_ALPHA) -> float:
    return alpha * r_ng + (1 - alpha) * r_qw


def score_candidate(c: Candidate, m: NgramModel, q: QWordModel,
                    alpha: float = DEFAULT_ALPHA) -> ScoredQA:
    r_ng = score_question(m, c.question_posmorph)
    r_qw = score_qword(q, c.qword, c.answer_root_posmorph)
    return ScoredQA(c.question, c.answer, c.template_id, r_ng, r_qw,
                    combine(r_ng, r_qw, alpha), alpha, c.sentence_id)


def above_mean(scores: Sequence[float]) -> list[bool]:
    """Flags for scores strictly above the (exact rational) mean."""
    if not scores:
        return []
    exact = [Fraction(s) for s in scores]
    mean = sum(exact) / len(exact)
    return [s > mean for s in exact]


def rank_key(s: ScoredQA):
    return (-s.r_qa, s.template_id, s.question)


def rank_and_filter(cands: Sequence[Candidate], m: NgramModel, q: QWordModel,
                    inventory: Iterable[str], alpha: float = DEFAULT_ALPHA) -> list[ScoredQA]:
    inventory = set(inventory)
    kept = [c for c in cands
            if not (c.answer_length == 1 and c.answer_root_posmorph not in inventory)]
    scored = [score_candidate(c, m, q, alpha) for c in kept]
    flags = above_mean([s.r_qa for s in scored])
    return sorted((s for s, ok in zip(scored, flags) if ok), key=rank_key)


# -- persistence ------------------------------------------------------------

@dataclass
class RankingModel:
    """Everything ``generate`` needs for step 4, as stored in one model file.

    ``lexicon`` maps a preprocessed word to its most frequent pos-morph
    symbol; it tags template constants, which have no source node.
    """

    ngram: NgramModel
    qword: QWordModel
    inventory: frozenset = frozenset()
    lexicon: dict = field(default_factory=dict)
    alpha: float = DEFAULT_ALPHA

    def tag(self, word: str, fallback: Optional[str] = None) -> str:
        return self.lexicon.get(word, fallback or UNKNOWN_TAG)


def build_lexicon(trees: Iterable[DepTree]) -> dict[str, str]:
    counts: dict[str, Counter] = defaultdict(Counter)
    for t in trees:
        for n in t.nodes:
            # the model file is whitespace-delimited; such forms fall back at tag time
            if n.form.split() != [n.form]:
                continue
            counts[n.form][pos_morph(n)] += 1
    return {w: min(c, key=lambda pm: (-c[pm], pm)) for w, c in counts.items()}


def dump_model(model: RankingModel, f: TextIO):
    m = model.ngram
    f.write(f"# treeqg ranking model\nVERSION {MODEL_VERSION}\n")
    f.write("LAMBDAS " + " ".join(repr(x) for x in m.lambdas) + "\n")
    f.write(f"ALPHA {model.alpha!r}\n")
    for w in sorted(m.unigrams):
        f.write(f"1GRAM {w} {m.unigrams[w]}\n")
    for k in sorted(m.bigrams):
        f.write(f"2GRAM {k[0]} {k[1]} {m.bigrams[k]}\n")
    for k in sorted(m.trigrams):
        f.write(f"3GRAM {k[0]} {k[1]} {k[2]} {m.trigrams[k]}\n")
    for k in sorted(model.qword.counts):
        f.write(f"QW {k[0]} {k[1]} {model.qword.counts[k]}\n")
    for pm in sorted(model.inventory):
        f.write(f"ANS {pm}\n")
    for w in sorted(model.lexicon):
        f.write(f"LEX {w} {model.lexicon[w]}\n")


def load_model(f: TextIO) -> RankingModel:
    uni, bi, tri, qw = Counter(), Counter(), Counter(), Counter()
    inventory, lexicon = set(), {}
    lambdas, alpha, version = DEFAULT_LAMBDAS, DEFAULT_ALPHA, None
    for lineno, line in enumerate(f, 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        kind, args = parts[0], parts[1:]
        try:
            if kind == "VERSION":
                version = int(args[0])
            elif kind == "LAMBDAS":
                lambdas = tuple(float(x) for x in args)
            elif kind == "ALPHA":
                alpha = float(args[0])
            elif kind == "1GRAM":
                uni[args[0]] = int(args[1])
            elif kind == "2GRAM":
                bi[args[0], args[1]] = int(args[2])
            elif kind == "3GRAM":
                tri[args[0], args[1], args[2]] = int(args[3])
            elif kind == "QW":
                qw[args[0], args[1]] = int(args[2])
            elif kind == "ANS":
                inventory.add(args[0])
            elif kind == "LEX":
                lexicon[args[0]] = args[1]
            else:
                raise ValueError(f"unknown record {kind!r}")
        except (IndexError, ValueError) as e:
            raise ValueError(f"model line {lineno}: {e}") from None
    if version != MODEL_VERSION:
        raise ValueError(f"model version {version} does not match expected {MODEL_VERSION}")
    return RankingModel(NgramModel(uni, bi, tri, lambdas), QWordModel(qw),
                        frozenset(inventory), lexicon, alpha)
