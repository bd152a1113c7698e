"""Guards for induced templates: one shared base part plus one complementary
part per distinct root signature among the supporting sentences."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .guards import Guard, GuardClause, exists, not_exists
from .templates import Constant, Expr, Template
from .treebank import DepTree

NOT_RELATIVE = GuardClause(("nsubj",), "has_not", ("PronType=Rel",))
NO_AUX = not_exists("aux")


@dataclass(frozen=True)
class SupportSet:
    template_id: str
    sentences: tuple[DepTree, ...]

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if not self.sentences:
            raise ValueError("a support set needs at least one sentence")

    @property
    def roots(self) -> list[tuple[str, tuple[str, ...]]]:
        return [(s.root.upos, s.root.morph) for s in self.sentences]


def _chains(exprs: Sequence[Expr]) -> list[tuple[str, ...]]:
    return [e.chain.rels for e in exprs if not isinstance(e, Constant)]


def base_clauses(question: Sequence[Expr], answer: Sequence[Expr],
                 sentences: Sequence[DepTree] = ()) -> list[GuardClause]:
    """Base-guard clauses for a question/answer expression pair.

    Negatives never contribute. The relative-pronoun exclusion fires when a
    non-negative ``nsubj`` expression appears on either side; ``aux
    not_exists`` requires the root to be used and every supporting root to be
    a verb without an auxiliary.
    """
    chains = _chains(question) + _chains(answer)
    clauses = []
    for chain in chains:
        c = exists(*chain)
        if chain and c not in clauses:
            clauses.append(c)
    if ("nsubj",) in chains:
        clauses.append(NOT_RELATIVE)
    if () in chains and sentences and all(
            s.root.upos == "VERB" and not any(c.deprel == "aux" for c in s.children(s.root_id))
            for s in sentences):
        clauses.append(NO_AUX)
    return clauses


def base_guard(t: Template, support: SupportSet) -> list[GuardClause]:
    return base_clauses(t.question, t.answer, support.sentences)


def complementary_guards(support: SupportSet) -> list[list[GuardClause]]:
    out = []
    for upos, morph in support.roots:
        clauses = []
        if morph:
            clauses.append(GuardClause((), "has", morph))
        clauses.append(GuardClause((), "is", upos))
        if clauses not in out:
            out.append(clauses)
    return out


def induce_guards(t: Template, support: SupportSet) -> list[Guard]:
    base = base_guard(t, support)
    return [Guard(tuple(comp + base), t.id) for comp in complementary_guards(support)]
