"""Small hand-built trees and a seeded synthetic English QA corpus.

The corpus is regular enough that every record induces one of a handful of
templates, which makes it useful for end-to-end runs and property checks.
"""

from __future__ import annotations

import json
import random
from typing import Optional, Sequence

from .treebank import DepNode, DepTree, parse_conllu, serialize_conllu

FIN_3SG = "Mood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin"


def make_tree(rows: Sequence[tuple], sent_id: str = "", text: Optional[str] = None) -> DepTree:
    """Rows are ``(form, lemma, upos, feats, head, deprel)`` with ids 1..n."""
    nodes = []
    for i, (form, lemma, upos, feats, head, deprel) in enumerate(rows, 1):
        morph = feats.split("|") if feats else ()
        nodes.append(DepNode(i, form, lemma, upos, morph, head, deprel))
    if text is None:
        text = " ".join(r[0] for r in rows)
    return DepTree(tuple(nodes), sent_id, text)


TIM = make_tree([
    ("Tim", "Tim", "PROPN", "Number=Sing", 2, "nsubj"),
    ("plays", "play", "VERB", FIN_3SG, 0, "root"),
    ("basketball", "basketball", "NOUN", "Number=Sing", 2, "obj"),
    ("with", "with", "ADP", "", 5, "case"),
    ("friends", "friend", "NOUN", "Number=Plur", 2, "obl"),
    ("and", "and", "CCONJ", "", 7, "cc"),
    ("family", "family", "NOUN", "Number=Sing", 5, "conj"),
    ("every", "every", "DET", "", 9, "det"),
    ("Tuesday", "Tuesday", "PROPN", "Number=Sing", 2, "obl:tmod"),
], "tim")

TIM_QUESTION = make_tree([
    ("When", "when", "ADV", "PronType=Int", 4, "advmod"),
    ("does", "do", "AUX", FIN_3SG, 4, "aux"),
    ("Tim", "Tim", "PROPN", "Number=Sing", 4, "nsubj"),
    ("play", "play", "VERB", "VerbForm=Inf", 0, "root"),
    ("basketball", "basketball", "NOUN", "Number=Sing", 4, "obj"),
    ("with", "with", "ADP", "", 7, "case"),
    ("friends", "friend", "NOUN", "Number=Plur", 4, "obl"),
    ("and", "and", "CCONJ", "", 9, "cc"),
    ("family", "family", "NOUN", "Number=Sing", 7, "conj"),
    ("?", "?", "PUNCT", "", 4, "punct"),
], "tim-q")

BRAZIL = make_tree([
    ("The", "the", "DET", "Definite=Def|PronType=Art", 3, "det"),
    ("longest", "long", "ADJ", "Degree=Sup", 3, "amod"),
    ("river", "river", "NOUN", "Number=Sing", 9, "nsubj"),
    ("in", "in", "ADP", "", 5, "case"),
    ("Brazil", "Brazil", "PROPN", "Number=Sing", 3, "nmod"),
    ("is", "be", "AUX", FIN_3SG, 9, "cop"),
    ("the", "the", "DET", "Definite=Def|PronType=Art", 9, "det"),
    ("Amazon", "Amazon", "PROPN", "Number=Sing", 9, "compound"),
    ("river", "river", "NOUN", "Number=Sing", 0, "root"),
], "brazil")

ERICSSON = make_tree([
    ("Ericsson", "Ericsson", "PROPN", "Number=Sing", 2, "nsubj"),
    ("pays", "pay", "VERB", FIN_3SG, 0, "root"),
    ("dividends", "dividend", "NOUN", "Number=Plur", 2, "obj"),
    ("to", "to", "ADP", "", 6, "case"),
    ("the", "the", "DET", "Definite=Def|PronType=Art", 6, "det"),
    ("shareholders", "shareholder", "NOUN", "Number=Plur", 2, "obl"),
    ("every", "every", "DET", "", 9, "det"),
    ("first", "first", "ADJ", "Degree=Pos|NumType=Ord", 9, "amod"),
    ("quarter", "quarter", "NOUN", "Number=Sing", 2, "obl:tmod"),
    ("of", "of", "ADP", "", 12, "case"),
    ("the", "the", "DET", "Definite=Def|PronType=Art", 12, "det"),
    ("year", "year", "NOUN", "Number=Sing", 9, "nmod"),
], "ericsson")


# -- synthetic corpus -------------------------------------------------------

NAMES = ["Tim", "Anna", "Omar", "Lena", "Ravi", "Maja", "Kofi", "Ines", "Yuki", "Pavel",
         "Sara", "Diego"]
VERBS = [("plays", "play", ["basketball", "chess", "tennis", "football"]),
         ("watches", "watch", ["football", "tennis", "television"]),
         ("cooks", "cook", ["dinner", "soup", "pasta"]),
         ("reads", "read", ["poetry", "news"])]
DAYS = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"]
FILLERS = ["It rains a lot here .", "The town has a small park .", "Many people live nearby ."]


def _filler_tree(text: str, sent_id: str) -> DepTree:
    # fixed parses for the distractor sentences
    parses = {
        FILLERS[0]: [("It", "it", "PRON", "Number=Sing|Person=3|PronType=Prs", 2, "expl"),
                     ("rains", "rain", "VERB", FIN_3SG, 0, "root"),
                     ("a", "a", "DET", "Definite=Ind|PronType=Art", 4, "det"),
                     ("lot", "lot", "NOUN", "Number=Sing", 2, "obl:npmod"),
                     ("here", "here", "ADV", "PronType=Dem", 2, "advmod"),
                     (".", ".", "PUNCT", "", 2, "punct")],
        FILLERS[1]: [("The", "the", "DET", "Definite=Def|PronType=Art", 2, "det"),
                     ("town", "town", "NOUN", "Number=Sing", 3, "nsubj"),
                     ("has", "have", "VERB", FIN_3SG, 0, "root"),
                     ("a", "a", "DET", "Definite=Ind|PronType=Art", 6, "det"),
                     ("small", "small", "ADJ", "Degree=Pos", 6, "amod"),
                     ("park", "park", "NOUN", "Number=Sing", 3, "obj"),
                     (".", ".", "PUNCT", "", 3, "punct")],
        FILLERS[2]: [("Many", "many", "ADJ", "Degree=Pos", 2, "amod"),
                     ("people", "people", "NOUN", "Number=Plur", 3, "nsubj"),
                     ("live", "live", "VERB", "Mood=Ind|Tense=Pres|VerbForm=Fin", 0, "root"),
                     ("nearby", "nearby", "ADV", "", 3, "advmod"),
                     (".", ".", "PUNCT", "", 3, "punct")],
    }
    return make_tree(parses[text], sent_id)


def activity_tree(name: str, verb: str, lemma: str, obj: str, day: str,
                  company: int = 0, sent_id: str = "", plural_day: bool = False) -> DepTree:
    """``NAME VERBs OBJ [with friends [and family]] every DAY [.]``.

    ``company`` is 0 (none), 1 ("with friends") or 2 ("with friends and family").
    """
    rows = [(name, name, "PROPN", "Number=Sing", 2, "nsubj"),
            (verb, lemma, "VERB", FIN_3SG, 0, "root"),
            (obj, obj, "NOUN", "Number=Sing", 2, "obj")]
    if company:
        rows += [("with", "with", "ADP", "", 5, "case"),
                 ("friends", "friend", "NOUN", "Number=Plur", 2, "obl")]
        if company == 2:
            rows += [("and", "and", "CCONJ", "", 7, "cc"),
                     ("family", "family", "NOUN", "Number=Sing", 5, "conj")]
    day_id = len(rows) + 2
    day_form = day + "s" if plural_day else day
    rows += [("every", "every", "DET", "", day_id, "det"),
             (day_form, day, "PROPN", "Number=Plur" if plural_day else "Number=Sing", 2, "obl:tmod"),
             (".", ".", "PUNCT", "", 2, "punct")]
    return make_tree(rows, sent_id)


def _company_rows(company: int, head: int, start: int) -> list[tuple]:
    if not company:
        return []
    # ids continue after ``start`` existing tokens
    rows = [("with", "with", "ADP", "", start + 2, "case"),
            ("friends", "friend", "NOUN", "Number=Plur", head, "obl")]
    if company == 2:
        rows += [("and", "and", "CCONJ", "", start + 4, "cc"),
                 ("family", "family", "NOUN", "Number=Sing", start + 2, "conj")]
    return rows


def question_tree(kind: str, name: str, verb: str, lemma: str, obj: str, day: str,
                  company: int = 0, sent_id: str = "") -> tuple[DepTree, str]:
    """Question parse and its answer string for one activity sentence."""
    if kind == "when":
        rows = [("When", "when", "ADV", "PronType=Int", 4, "advmod"),
                ("does", "do", "AUX", FIN_3SG, 4, "aux"),
                (name, name, "PROPN", "Number=Sing", 4, "nsubj"),
                (lemma, lemma, "VERB", "VerbForm=Inf", 0, "root"),
                (obj, obj, "NOUN", "Number=Sing", 4, "obj")]
        rows += _company_rows(company, 4, len(rows))
        answer = f"every {day}"
    elif kind == "what":
        rows = [("What", "what", "PRON", "PronType=Int", 4, "obj"),
                ("does", "do", "AUX", FIN_3SG, 4, "aux"),
                (name, name, "PROPN", "Number=Sing", 4, "nsubj"),
                (lemma, lemma, "VERB", "VerbForm=Inf", 0, "root"),
                ("every", "every", "DET", "", 6, "det"),
                (day, day, "PROPN", "Number=Sing", 4, "obl:tmod")]
        answer = obj
    elif kind == "who":
        rows = [("Who", "who", "PRON", "PronType=Int", 2, "nsubj"),
                (verb, lemma, "VERB", FIN_3SG, 0, "root"),
                (obj, obj, "NOUN", "Number=Sing", 2, "obj"),
                ("every", "every", "DET", "", 5, "det"),
                (day, day, "PROPN", "Number=Sing", 2, "obl:tmod")]
        answer = name
    else:
        raise ValueError(f"unknown question kind {kind!r}")
    root = next(i for i, r in enumerate(rows, 1) if r[4] == 0)
    rows.append(("?", "?", "PUNCT", "", root, "punct"))
    return make_tree(rows, sent_id), answer


def toy_records(n: int = 50, seed: int = 0, subword: int = 4, unsatisfactory: int = 2) -> list[dict]:
    """Dataset records in the JSON Lines layout used by ``induce``.

    ``n`` records have a whole-token answer in a satisfactory sentence;
    ``subword`` more only match across token boundaries ("every Tuesday"
    against "Tuesdays"); ``unsatisfactory`` more share no word with the
    question besides the question word.
    """
    rng = random.Random(seed)
    records = []

    def pick():
        verb, lemma, objs = rng.choice(VERBS)
        return (rng.choice(NAMES), verb, lemma, rng.choice(objs), rng.choice(DAYS),
                rng.choice([0, 0, 1, 2]))

    for i in range(n + subword):
        name, verb, lemma, obj, day, company = pick()
        is_sub = i >= n
        kind = "when" if is_sub else ("when", "what", "who")[i % 3]
        sent = activity_tree(name, verb, lemma, obj, day, company, f"d{i}-s1", plural_day=is_sub)
        filler = _filler_tree(rng.choice(FILLERS), f"d{i}-s0")
        q, answer = question_tree(kind, name, verb, lemma, obj, day,
                                  company if kind == "when" else 0, f"d{i}-q")
        records.append({"id": f"q{i}", "doc_id": f"d{i}",
                        "context_conllu": serialize_conllu([filler, sent]),
                        "question_conllu": serialize_conllu([q]), "answer": answer})
    for i in range(unsatisfactory):
        k = n + subword + i
        filler = _filler_tree(FILLERS[i % len(FILLERS)], f"d{k}-s0")
        q, _ = question_tree("what", "Bob", "eats", "eat", "bread", "Monday", 0, f"d{k}-q")
        answer = filler.nodes[-2].form
        records.append({"id": f"q{k}", "doc_id": f"d{k}",
                        "context_conllu": serialize_conllu([filler]),
                        "question_conllu": serialize_conllu([q]), "answer": answer})
    return records


def toy_heldout(n: int = 12, seed: int = 1) -> list[DepTree]:
    """Unseen activity sentences for generation."""
    rng = random.Random(seed)
    out = []
    for i in range(n):
        verb, lemma, objs = rng.choice(VERBS)
        out.append(activity_tree(rng.choice(NAMES), verb, lemma, rng.choice(objs),
                                 rng.choice(DAYS), rng.choice([0, 1, 2]), f"h{i}"))
    return out


def toy_question_corpus(records: Sequence[dict]) -> list[DepTree]:
    """Question parses of a dataset, usable as a pos-morph training corpus."""
    return [t for r in records for t in parse_conllu(r["question_conllu"])]


def write_toy(directory, n: int = 50, seed: int = 0):
    """Write dataset.jsonl, corpus.conllu and input.conllu into ``directory``."""
    from pathlib import Path
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    records = toy_records(n, seed)
    with open(d / "dataset.jsonl", "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
    (d / "corpus.conllu").write_text(serialize_conllu(toy_question_corpus(records)), encoding="utf-8")
    (d / "input.conllu").write_text(serialize_conllu(toy_heldout(seed=seed + 1)), encoding="utf-8")
    return d
