"""Template induction from (sentence, question, answer) triples.

Each question and answer is first described in terms of the sentence's
dependency tree (one node-level expression per matched word), then
compressed with a shift-reduce pass that merges neighbouring expressions
into subtree-level ones, and finally its subtracted negatives are collapsed
to their common parents where possible.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .templates import (Constant, Expr, Negative, NodeLevel, SubtreeLevel,
                        Template, structural_key)
from .treebank import (DepTree, LangConfig, RelChain, common_prefix, is_punct,
                       preprocess, preprocess_tree, resolve_chain, visible_ids)


# -- triples ----------------------------------------------------------------

@dataclass(frozen=True)
class Triple:
    sentence: DepTree
    question: DepTree
    answer_span: tuple[int, int]  # half-open positions into sentence.nodes
    doc_id: str = ""

    def __post_init__(self):
        start, stop = self.answer_span
        if not 0 <= start < stop <= len(self.sentence.nodes):
            raise ValueError(f"answer span {self.answer_span} out of bounds")

    @property
    def answer_ids(self) -> tuple[int, ...]:
        start, stop = self.answer_span
        return tuple(n.id for n in self.sentence.nodes[start:stop])

    @property
    def answer_tokens(self) -> list[str]:
        start, stop = self.answer_span
        return [n.form for n in self.sentence.nodes[start:stop]]


def question_word_index(tokens: Sequence[str], cfg: LangConfig) -> Optional[int]:
    """Position of the question word: first (or last) non-punctuation token."""
    order = range(len(tokens)) if cfg.qword_position == "start" else range(len(tokens) - 1, -1, -1)
    for i in order:
        if not is_punct(tokens[i]):
            return i
    return None


def _answer_tokens(answer: str, cfg: LangConfig) -> list[str]:
    return preprocess(answer, cfg).split()


def _token_match(context: Sequence[DepTree], answer: str, cfg: LangConfig):
    target = _answer_tokens(answer, cfg)
    k = len(target)
    if not k:
        return None
    for sent in context:
        forms = [preprocess(f, cfg) for f in sent.forms]
        for i in range(len(forms) - k + 1):
            if forms[i:i + k] == target:
                return sent, (i, i + k)
    return None


def find_triples(context: Sequence[DepTree], question: DepTree, answer: str,
                 cfg: LangConfig = LangConfig(), doc_id: str = "") -> Optional[Triple]:
    """First context sentence containing the answer as a contiguous token run."""
    hit = _token_match(context, answer, cfg)
    return Triple(hit[0], question, hit[1], doc_id) if hit else None


def subword_sentence(context: Sequence[DepTree], answer: str,
                     cfg: LangConfig = LangConfig()) -> Optional[DepTree]:
    """Sentence containing the answer only when token boundaries are ignored."""
    target = "".join(_answer_tokens(answer, cfg))
    if not target:
        return None
    for sent in context:
        if target in "".join(preprocess(f, cfg) for f in sent.forms).replace(" ", ""):
            return sent
    return None


def answer_uses_subwords(context: Sequence[DepTree], answer: str,
                         cfg: LangConfig = LangConfig()) -> bool:
    return (_token_match(context, answer, cfg) is None
            and subword_sentence(context, answer, cfg) is not None)


def shares_word(sentence: DepTree, question: DepTree, cfg: LangConfig = LangConfig()) -> bool:
    q = [preprocess(f, cfg) for f in question.forms]
    qi = question_word_index(q, cfg)
    words = {w for i, w in enumerate(q) if i != qi and not is_punct(w)}
    return bool(words & {preprocess(f, cfg) for f in sentence.forms})


def is_satisfactory(t: Triple, cfg: LangConfig = LangConfig()) -> bool:
    return shares_word(t.sentence, t.question, cfg)


# -- sentence transformation ------------------------------------------------

def expr_id(expr: Expr, root_id: int) -> Optional[int]:
    """Token id an expression points at (the root's id for an empty chain)."""
    if isinstance(expr, Constant):
        return None
    last = expr.chain.last_id
    return root_id if not expr.chain.links else last


def build_llte(target: Sequence[str], s: DepTree, cfg: LangConfig = LangConfig(),
               question: bool = True) -> list[list[Expr]]:
    """Candidate expressions per target token, nearest-to-root first.

    Tokens matching no sentence form fall back to lemma matches, then to a
    constant. For a question the question word is always a constant.
    """
    qi = question_word_index(target, cfg) if question else None
    order = sorted(s.nodes, key=lambda n: (s.depth(n.id), n.id))
    forms = {n.id: preprocess(n.form, cfg) for n in s.nodes}
    lemmas = {n.id: preprocess(n.lemma, cfg) for n in s.nodes}
    llte = []
    for i, tok in enumerate(target):
        if i == qi:
            llte.append([Constant(tok)])
            continue
        key = preprocess(tok, cfg)
        cands: list[Expr] = [NodeLevel(s.chain_to(n.id)) for n in order if forms[n.id] == key]
        if not cands:
            cands = [NodeLevel(s.chain_to(n.id), lemma=True)
                     for n in order if lemmas[n.id] and lemmas[n.id] == key]
        llte.append(cands or [Constant(tok)])
    return llte


def id_sum(exprs: Sequence[Expr], root_id: int) -> int:
    ids = [expr_id(e, root_id) for e in exprs]
    ids = [i for i in ids if i is not None]
    return sum(abs(a - b) for a, b in zip(ids, ids[1:]))


def select_min_id_sum(llte: Sequence[Sequence[Expr]], root_id: int) -> list[Expr]:
    """Pick one candidate per slot minimizing the sum of neighbouring id gaps.

    Constants are transparent. Among optimal picks the one with the earliest
    candidates at the first differing slot wins.
    """
    slots = [k for k, cands in enumerate(llte) if not isinstance(cands[0], Constant)]
    ids = [[expr_id(c, root_id) for c in llte[k]] for k in slots]
    # best[j][c]: cheapest cost of slots j.. given slot j takes candidate c
    best = [[0] * len(x) for x in ids]
    for j in range(len(ids) - 2, -1, -1):
        for c, a in enumerate(ids[j]):
            best[j][c] = min(abs(a - b) + best[j + 1][d] for d, b in enumerate(ids[j + 1]))
    choice = {}
    prev = None
    for j, k in enumerate(slots):
        costs = [best[j][c] + (abs(prev - a) if prev is not None else 0)
                 for c, a in enumerate(ids[j])]
        c = costs.index(min(costs))
        choice[k] = c
        prev = ids[j][c]
    return [llte[k][choice.get(k, 0)] for k in range(len(llte))]


def sentence_transform(target: Sequence[str], s: DepTree, cfg: LangConfig = LangConfig(),
                       question: bool = True) -> list[Expr]:
    return select_min_id_sum(build_llte(target, s, cfg, question), s.root_id)


# -- shift-reduce -----------------------------------------------------------

@dataclass(frozen=True)
class SRConfig:
    """Merge-condition variants for shift-reduce.

    ``lossless`` adds a third merging condition: the merged subtree must
    render, on the source sentence, exactly the two merged expressions'
    tokens in order. Without it only the two structural conditions apply.
    """

    lossless: bool = True


@dataclass(frozen=True)
class SRStep:
    action: str
    stack: tuple[Expr, ...]
    buffer: tuple[Expr, ...]


def covered_ids(expr: Expr, s: DepTree) -> list[int]:
    """Tokens an expression renders on its source sentence, in linear order."""
    if isinstance(expr, Constant):
        return []
    node = resolve_chain(s, expr.chain, strict_ids=True)
    if node is None:
        return []
    if isinstance(expr, NodeLevel):
        return [node.id]
    return visible_ids(s, node, expr.negatives, strict_ids=True)


def _mergeable(e: Expr) -> bool:
    return isinstance(e, SubtreeLevel) or (isinstance(e, NodeLevel) and not e.lemma)


def reduce_pair(top2: Expr, top: Expr, s: DepTree, keep_extra: Iterable[int] = (),
                cfg: SRConfig = SRConfig()) -> Optional[SubtreeLevel]:
    """Merge the two topmost stack items, or ``None`` if the conditions fail."""
    if not (_mergeable(top2) and _mergeable(top)):
        return None
    common = common_prefix(top2.chain, top.chain)
    if not common.links:
        return None
    if min(len(top2.chain), len(top.chain)) - len(common) > 1:
        return None
    node = resolve_chain(s, common, strict_ids=True)
    if node is None:
        return None
    ids2, ids1 = covered_ids(top2, s), covered_ids(top, s)
    keep = set(ids2) | set(ids1) | set(keep_extra) | {node.id}
    subtree = s.subtree_ids(node.id)
    removed = sorted(subtree - keep)
    negatives = []
    for x in removed:
        rel = s.chain_to(x, start=node.id)
        negatives.append(Negative(RelChain(rel.links, common.anchor), star=bool(s.children(x))))
    if cfg.lossless and sorted(subtree - set(removed)) != ids2 + ids1:
        return None
    return SubtreeLevel(common, tuple(negatives))


def shift_reduce(exprs: Sequence[Expr], s: DepTree, *, referenced: Optional[Iterable[int]] = None,
                 cfg: SRConfig = SRConfig(), fallback: bool = True,
                 trace: Optional[list] = None) -> list[Expr]:
    """Greedy shift-reduce: REDUCE whenever possible, otherwise SHIFT.

    ``referenced`` are the token ids used by the whole sentence transformation
    (defaults to those of ``exprs``); those already shifted are kept inside
    merged subtrees. With ``fallback`` a result collapsed to one expression is
    replaced by the input.
    """
    exprs = list(exprs)
    if referenced is None:
        referenced = {i for e in exprs for i in covered_ids(e, s)}
    referenced = set(referenced)
    stack: list[Expr] = []
    buffer = deque(exprs)

    def record(action):
        if trace is not None:
            trace.append(SRStep(action, tuple(stack), tuple(buffer)))

    while True:
        if len(stack) >= 2:
            pending = {i for e in buffer for i in covered_ids(e, s)}
            merged = reduce_pair(stack[-2], stack[-1], s, referenced - pending, cfg)
            if merged is not None:
                stack[-2:] = [merged]
                record("REDUCE")
                continue
        if not buffer:
            break
        stack.append(buffer.popleft())
        record("SHIFT")
    if fallback and len(stack) == 1 and len(exprs) > 1:
        return exprs
    return stack


# -- merging negatives ------------------------------------------------------

def _merge_expr(expr: SubtreeLevel, s: DepTree) -> SubtreeLevel:
    node = resolve_chain(s, expr.chain, strict_ids=True)
    if node is None or not expr.negatives:
        return expr
    negs = set(expr.negatives)
    changed = True
    while changed:
        changed = False
        for neg in sorted(negs, key=lambda n: (len(n.chain), n.chain.links, n.star)):
            if not neg.star:
                continue
            x = resolve_chain(s, neg.chain, strict_ids=True, start=node.id)
            if x is None:
                continue
            kids = {Negative(neg.chain + RelChain(((c.deprel, c.id),)), False)
                    for c in s.children(x.id)}
            if kids <= negs:
                negs -= kids | {neg}
                negs.add(Negative(neg.chain, False))
                changed = True
                break

    def order(n):
        target = resolve_chain(s, n.chain, strict_ids=True, start=node.id)
        return (target.id if target is not None else math.inf, n.star)

    return SubtreeLevel(expr.chain, tuple(sorted(negs, key=order)))


def merge_negatives(t: Template, s: DepTree) -> Template:
    """Replace ``X*`` plus a whole-subtree negative for every child of X by ``X``."""
    def fix(exprs):
        return tuple(_merge_expr(e, s) if isinstance(e, SubtreeLevel) else e for e in exprs)
    return Template(t.id, fix(t.question), fix(t.answer))


# -- whole-corpus induction -------------------------------------------------

def induce_template(triple: Triple, cfg: LangConfig = LangConfig(),
                    sr: SRConfig = SRConfig()) -> Template:
    """Template (with an empty id) for one triple."""
    s = triple.sentence
    q = sentence_transform(triple.question.forms, s, cfg, question=True)
    q = shift_reduce(q, s, cfg=sr, fallback=True)
    a = sentence_transform(triple.answer_tokens, s, cfg, question=False)
    a = shift_reduce(a, s, cfg=sr, fallback=False)
    return merge_negatives(Template("", tuple(q), tuple(a)), s)


def idf(word: str, doc_tokens: Mapping[str, set]) -> float:
    n = len(doc_tokens)
    df = sum(1 for toks in doc_tokens.values() if word in toks)
    return math.log(n / df) if df else math.inf


def rare_constants(t: Template, doc_tokens: Mapping[str, set], cfg: LangConfig = LangConfig()) -> list[str]:
    """Constants found in fewer than a quarter of the documents."""
    n = len(doc_tokens)
    out = []
    for e in t.expressions:
        if isinstance(e, Constant):
            w = preprocess(e.text, cfg)
            df = sum(1 for toks in doc_tokens.values() if w in toks)
            # idf > ln 4  <=>  n > 4 df, compared exactly on integers
            if n > 4 * df:
                out.append(e.text)
    return out


def document_tokens(triples: Iterable[Triple], cfg: LangConfig = LangConfig()) -> dict[str, set]:
    docs = defaultdict(set)
    for t in triples:
        docs[t.doc_id].update(preprocess(f, cfg) for f in t.sentence.forms + t.question.forms)
    return dict(docs)


def induce(dataset: Sequence[Triple], cfg: LangConfig = LangConfig(), *,
           doc_tokens: Optional[Mapping[str, set]] = None, sr: SRConfig = SRConfig(),
           threads: int = 1, report: Optional[dict] = None):
    """Induce deduplicated templates and the sentences supporting each.

    Returns ``(templates, supports)`` with supports keyed by template id.
    Unsatisfactory triples are skipped; constant-only templates and templates
    with a rare constant are dropped.
    """
    usable = [t for t in dataset if is_satisfactory(t, cfg)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            induced = list(pool.map(lambda t: induce_template(t, cfg, sr), usable))
    else:
        induced = [induce_template(t, cfg, sr) for t in usable]

    groups: dict[str, tuple[Template, list[DepTree]]] = {}
    for triple, tpl in zip(usable, induced):
        key = structural_key(tpl)
        if key not in groups:
            groups[key] = (tpl, [])
        groups[key][1].append(triple.sentence)

    if doc_tokens is None:
        doc_tokens = document_tokens(dataset, cfg)
    counts = {"satisfactory": len(usable), "unique": len(groups),
              "constant_only": 0, "rare_constant": 0}
    templates, supports = [], {}
    for tpl, support in groups.values():
        if tpl.is_constant_only():
            counts["constant_only"] += 1
            continue
        if doc_tokens and rare_constants(tpl, doc_tokens, cfg):
            counts["rare_constant"] += 1
            continue
        tid = f"template{len(templates) + 1}"
        templates.append(Template(tid, tpl.question, tpl.answer))
        supports[tid] = support
    if report is not None:
        report.update(counts)
    return templates, supports


# -- dataset preparation ----------------------------------------------------

@dataclass(frozen=True)
class Record:
    id: str
    doc_id: str
    context: tuple[DepTree, ...]
    question: DepTree
    answer: str


@dataclass
class DatasetStats:
    total: int = 0
    satisfactory: int = 0
    subword: int = 0
    usable: int = 0

    def pct(self, value: int) -> float:
        return 100.0 * value / self.total if self.total else 0.0


def build_triples(records: Sequence[Record], cfg: LangConfig = LangConfig()):
    """Preprocess records and locate answers.

    Returns ``(triples, stats, doc_tokens)``; ``triples`` holds every record
    whose answer matches whole tokens, satisfactory or not.
    """
    stats = DatasetStats(total=len(records))
    triples = []
    docs: dict[str, set] = defaultdict(set)
    for rec in records:
        context = [preprocess_tree(t, cfg) for t in rec.context]
        question = preprocess_tree(rec.question, cfg)
        for t in context + [question]:
            docs[rec.doc_id].update(t.forms)
        triple = find_triples(context, question, rec.answer, cfg, rec.doc_id)
        sentence = triple.sentence if triple else subword_sentence(context, rec.answer, cfg)
        if sentence is None:
            continue
        sat = shares_word(sentence, question, cfg)
        stats.satisfactory += sat
        if triple is None:
            stats.subword += 1
            continue
        stats.usable += sat
        triples.append(triple)
    return triples, stats, dict(docs)
