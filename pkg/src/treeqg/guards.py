"""Guard language: conjunctions of structural, POS and morphology conditions.

    n.pos is VERB, n.nsubj exists, n.nsubj.morph has_not PronType=Rel -> template3

Chains in guards carry no token ids and are always resolved by label.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .treebank import DepTree, RelChain, resolve_chain

GUARD_FILE_HEADER = "# treeqg-guards v1"

OPERATORS = ("exists", "not_exists", "is", "is_not", "has", "has_not")
_PROPERTY = {"exists": None, "not_exists": None, "is": "pos", "is_not": "pos",
             "has": "morph", "has_not": "morph"}


class GuardSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class GuardClause:
    """One condition on the node at the end of ``chain`` (empty chain: the root).

    ``value`` is a UPOS tag for ``is``/``is_not`` and a sorted tuple of
    ``Key=Value`` features for ``has``/``has_not``.
    """

    chain: tuple[str, ...]
    op: str
    value: object = None

    def __post_init__(self):
        if self.op not in OPERATORS:
            raise GuardSyntaxError(f"unknown operator {self.op!r}")
        object.__setattr__(self, "chain", tuple(self.chain))
        prop = _PROPERTY[self.op]
        if prop is None and self.value is not None:
            raise GuardSyntaxError(f"{self.op} takes no argument")
        if prop == "pos" and not self.value:
            raise GuardSyntaxError(f"{self.op} needs a POS tag")
        if prop == "morph":
            feats = tuple(sorted(set(self.value or ())))
            if not feats:
                raise GuardSyntaxError(f"{self.op} needs a nonempty feature set")
            object.__setattr__(self, "value", feats)

    def __str__(self):
        path = ".".join(("n",) + self.chain)
        prop = _PROPERTY[self.op]
        if prop is None:
            return f"{path} {self.op}"
        value = self.value if prop == "pos" else "|".join(self.value)
        return f"{path}.{prop} {self.op} {value}"

    def holds(self, tree: DepTree) -> bool:
        node = resolve_chain(tree, RelChain(tuple((r, None) for r in self.chain)))
        if self.op == "exists":
            return node is not None
        if self.op == "not_exists":
            return node is None
        # a missing node satisfies neither a property nor its negation
        if node is None:
            return False
        if self.op == "is":
            return node.upos == self.value
        if self.op == "is_not":
            return node.upos != self.value
        morph = set(node.morph)
        if self.op == "has":
            return set(self.value) <= morph
        return not (set(self.value) & morph)


def exists(*chain: str) -> GuardClause:
    return GuardClause(chain, "exists")


def not_exists(*chain: str) -> GuardClause:
    return GuardClause(chain, "not_exists")


@dataclass(frozen=True)
class Guard:
    clauses: tuple[GuardClause, ...]
    target: str

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        if not self.clauses:
            raise GuardSyntaxError("a guard needs at least one clause")
        if not self.target:
            raise GuardSyntaxError("a guard needs a target template id")

    def __str__(self):
        return ", ".join(str(c) for c in self.clauses) + " -> " + self.target


def eval_guard(g: Guard, tree: DepTree) -> bool:
    return all(c.holds(tree) for c in g.clauses)


# clauses are split on commas that start a new "n..." path, so that
# multi-valued features like PronType=Int,Rel survive
_CLAUSE_SPLIT = re.compile(r",\s*(?=n(?:\.|\s|$))")
_REL = re.compile(r"^[^\s#.,]+$")


def parse_clause(text: str) -> GuardClause:
    parts = text.split()
    if len(parts) not in (2, 3):
        raise GuardSyntaxError(f"cannot parse clause {text!r}")
    path, op = parts[0], parts[1]
    value: Optional[str] = parts[2] if len(parts) == 3 else None
    if op not in OPERATORS:
        raise GuardSyntaxError(f"unknown operator {op!r}")
    segs = path.split(".")
    if segs[0] != "n":
        raise GuardSyntaxError(f"clause must start with 'n', got {path!r}")
    segs = segs[1:]
    prop = _PROPERTY[op]
    if prop is not None:
        if not segs or segs[-1] != prop:
            raise GuardSyntaxError(f"{op} applies to .{prop} only")
        segs = segs[:-1]
    elif segs and segs[-1] in ("pos", "morph"):
        raise GuardSyntaxError(f"{op} applies to relation chains only")
    for s in segs:
        if not _REL.match(s):
            raise GuardSyntaxError(f"bad relation {s!r} (guards carry no ids)")
    if prop == "morph":
        return GuardClause(tuple(segs), op, tuple((value or "").split("|")) if value else ())
    return GuardClause(tuple(segs), op, value)


def parse_guard(line: str) -> Guard:
    body, arrow, target = line.strip().rpartition("->")
    if not arrow:
        raise GuardSyntaxError("'->' missing")
    body, target = body.strip(), target.strip()
    if not body:
        raise GuardSyntaxError("empty clause list")
    if not target:
        raise GuardSyntaxError("missing target template id")
    clauses = [parse_clause(c) for c in _CLAUSE_SPLIT.split(body)]
    return Guard(tuple(clauses), target)


def serialize_guard(g: Guard) -> str:
    return str(g)


def read_guards(text: str) -> list[Guard]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != GUARD_FILE_HEADER:
        raise ValueError(f"guard file must start with {GUARD_FILE_HEADER!r}")
    return [parse_guard(l) for l in lines[1:] if l.strip() and not l.startswith("#")]


def write_guards(guards: Sequence[Guard]) -> str:
    return "\n".join([GUARD_FILE_HEADER] + [str(g) for g in guards]) + "\n"
