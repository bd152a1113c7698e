"""Template language: AST, parser, serializer and renderer.

A template line looks like::

    template1<TAB>When does [r.nsubj#1] [r.lemma] [r.obj#3] <r.obl#5>? => <r.obl:tmod#9>

``[..]`` extracts one token (``.lemma`` for its lemma), ``<..>`` the text of a
whole subtree, optionally minus ``- chain`` (whole subtree) or ``- chain*``
(single token) negatives. Anything else is a constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

from .treebank import (DepNode, DepTree, RelChain, is_punct, resolve_chain,
                       visible_ids)

TEMPLATE_FILE_HEADER = "# treeqg-templates v1"


class TemplateSyntaxError(ValueError):
    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.column = column


@dataclass(frozen=True)
class Constant:
    text: str

    def __post_init__(self):
        if not self.text or any(c in self.text for c in "[]<>") or self.text.split() != [self.text] \
                or self.text == "=>":
            raise ValueError(f"invalid constant {self.text!r}")


@dataclass(frozen=True)
class NodeLevel:
    chain: RelChain
    lemma: bool = False


class Negative(NamedTuple):
    chain: RelChain
    star: bool = False


@dataclass(frozen=True)
class SubtreeLevel:
    chain: RelChain
    negatives: tuple[Negative, ...] = ()


Expr = Union[Constant, NodeLevel, SubtreeLevel]


@dataclass(frozen=True)
class Template:
    id: str
    question: tuple[Expr, ...]
    answer: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "question", tuple(self.question))
        object.__setattr__(self, "answer", tuple(self.answer))

    @property
    def expressions(self) -> tuple[Expr, ...]:
        return self.question + self.answer

    def is_constant_only(self) -> bool:
        return all(isinstance(e, Constant) for e in self.expressions)


def is_punct_constant(expr: Expr) -> bool:
    return isinstance(expr, Constant) and is_punct(expr.text)


# -- serialization ----------------------------------------------------------

def _neg_str(neg: Negative) -> str:
    return neg.chain.dotted() + ("*" if neg.star else "")


def serialize_expr(expr: Expr) -> str:
    if isinstance(expr, Constant):
        return expr.text
    if isinstance(expr, NodeLevel):
        return "[" + str(expr.chain) + (".lemma" if expr.lemma else "") + "]"
    return "<" + str(expr.chain) + "".join(" - " + _neg_str(n) for n in expr.negatives) + ">"


def serialize_exprs(exprs: Sequence[Expr]) -> str:
    out = ""
    for i, e in enumerate(exprs):
        s = serialize_expr(e)
        # punctuation glued to a preceding bracket expression, e.g. "<r.obl#5>?"
        glue = i > 0 and is_punct_constant(e) and not isinstance(exprs[i - 1], Constant)
        out += s if (glue or not out) else " " + s
    return out


def serialize_template(t: Template) -> str:
    return f"{t.id}\t{serialize_exprs(t.question)} => {serialize_exprs(t.answer)}"


def structural_key(t: Template) -> str:
    """Serialized form with the template id and all token ids removed."""
    def strip(e):
        if isinstance(e, NodeLevel):
            return NodeLevel(e.chain.strip_ids(), e.lemma)
        if isinstance(e, SubtreeLevel):
            return SubtreeLevel(e.chain.strip_ids(),
                                tuple(Negative(n.chain.strip_ids(), n.star) for n in e.negatives))
        return e
    q = serialize_exprs([strip(e) for e in t.question])
    a = serialize_exprs([strip(e) for e in t.answer])
    return f"{q} => {a}"


# -- parsing ----------------------------------------------------------------

_LINK = re.compile(r"^([^\s#.\[\]<>*]+)(?:#(\d+))?$")
_ANCHOR = re.compile(r"^[a-z]$")


def _parse_links(text: str, col: int) -> tuple:
    links = []
    for part in text.split("."):
        m = _LINK.match(part)
        if not m:
            raise TemplateSyntaxError(f"bad relation link {part!r}", col)
        links.append((m.group(1), int(m.group(2)) if m.group(2) else None))
    return tuple(links)


def _parse_chain(text: str, col: int) -> tuple[RelChain, bool]:
    text = text.strip()
    if not text:
        raise TemplateSyntaxError("empty chain", col)
    anchor, _, rest = text.partition(".")
    if not _ANCHOR.match(anchor):
        raise TemplateSyntaxError(f"chain must start at a node symbol, got {anchor!r}", col)
    lemma = False
    if rest == "lemma" or rest.endswith(".lemma"):
        lemma = True
        rest = rest[: -len("lemma")].rstrip(".")
    links = _parse_links(rest, col) if rest else ()
    return RelChain(links, anchor), lemma


def _parse_node_level(inner: str, col: int) -> NodeLevel:
    if re.search(r"\s-\s|\s-$|^-", inner):
        raise TemplateSyntaxError("negatives are only allowed inside <..>", col)
    chain, lemma = _parse_chain(inner, col)
    return NodeLevel(chain, lemma)


def _parse_subtree_level(inner: str, col: int) -> SubtreeLevel:
    parts = re.split(r"\s+-\s+", inner.strip())
    chain, lemma = _parse_chain(parts[0], col)
    if lemma:
        raise TemplateSyntaxError(".lemma is only allowed inside [..]", col)
    negatives = []
    for p in parts[1:]:
        star = p.endswith("*")
        body = p[:-1] if star else p
        if not body:
            raise TemplateSyntaxError("empty negative chain", col)
        negatives.append(Negative(RelChain(_parse_links(body, col), chain.anchor), star))
    return SubtreeLevel(chain, tuple(negatives))


def _scan(body: str, offset: int) -> list:
    """Split a template body into expressions and the ``=>`` marker."""
    items: list = []
    i, n = 0, len(body)
    while i < n:
        ch = body[i]
        col = offset + i + 1
        if ch.isspace():
            i += 1
            continue
        if ch in "[<":
            close = "]" if ch == "[" else ">"
            j = i + 1
            # the ">" of "=>" never closes a bracket: relations contain no "="
            while j < n and (body[j] not in "[]<>" or body[j - 1:j + 1] == "=>"):
                j += 1
            if j >= n or body[j] != close:
                raise TemplateSyntaxError(f"unbalanced {ch!r}", col)
            inner = body[i + 1:j]
            items.append(_parse_node_level(inner, col) if ch == "["
                         else _parse_subtree_level(inner, col))
            i = j + 1
            continue
        j = i
        while j < n and not body[j].isspace() and body[j] not in "[<":
            j += 1
        word = body[i:j]
        if word == "=>":
            items.append("=>")
        elif any(c in word for c in "]>"):
            raise TemplateSyntaxError(f"unbalanced bracket in {word!r}", col)
        else:
            items.append(Constant(word))
        i = j
    return items


def parse_exprs(body: str, offset: int = 0) -> tuple[Expr, ...]:
    items = _scan(body, offset)
    if "=>" in items:
        raise TemplateSyntaxError("unexpected '=>'", offset + body.index("=>") + 1)
    return tuple(items)


def parse_template(line: str) -> Template:
    line = line.rstrip("\n")
    tid, tab, body = line.partition("\t")
    if not tab or not tid.strip():
        raise TemplateSyntaxError("expected 'ID<TAB>question => answer'", 1)
    offset = len(tid) + 1
    items = _scan(body, offset)
    arrows = [k for k, x in enumerate(items) if x == "=>"]
    if len(arrows) != 1:
        col = offset + (body.index("=>") + 1 if "=>" in body else len(body) + 1)
        raise TemplateSyntaxError("'=>' missing" if not arrows else "more than one '=>'", col)
    k = arrows[0]
    question, answer = tuple(items[:k]), tuple(items[k + 1:])
    if not question or not answer:
        raise TemplateSyntaxError("question and answer must be nonempty", offset + 1)
    return Template(tid.strip(), question, answer)


def read_templates(text: str) -> list[Template]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != TEMPLATE_FILE_HEADER:
        raise ValueError(f"template file must start with {TEMPLATE_FILE_HEADER!r}")
    return [parse_template(l) for l in lines[1:] if l.strip() and not l.startswith("#")]


def write_templates(templates: Sequence[Template]) -> str:
    return "\n".join([TEMPLATE_FILE_HEADER] + [serialize_template(t) for t in templates]) + "\n"


# -- rendering --------------------------------------------------------------

Token = tuple[str, Optional[DepNode], bool]  # (text, source node, is lemma)


def render_expr(expr: Expr, tree: DepTree, strict: bool = False) -> Optional[list[Token]]:
    if isinstance(expr, Constant):
        return [(expr.text, None, False)]
    node = resolve_chain(tree, expr.chain, strict)
    if node is None:
        return None
    if isinstance(expr, NodeLevel):
        if expr.lemma:
            return [(node.lemma or node.form, node, True)]
        return [(node.form, node, False)]
    ids = visible_ids(tree, node, expr.negatives, strict)
    return [(tree.node(i).form, tree.node(i), False) for i in ids]


def render_exprs(exprs: Sequence[Expr], tree: DepTree, strict: bool = False) -> Optional[list[Token]]:
    out = []
    for e in exprs:
        toks = render_expr(e, tree, strict)
        if toks is None:
            return None
        out.extend(toks)
    return out


def join_tokens(tokens: Sequence[Token]) -> str:
    """Space-join tokens, attaching punctuation constants to the previous token."""
    out = ""
    for text, node, _ in tokens:
        if out and node is None and is_punct(text):
            out += text
        else:
            out += (" " if out else "") + text
    return out


def render_tokens(t: Template, tree: DepTree, strict: bool = False):
    q = render_exprs(t.question, tree, strict)
    if q is None:
        return None
    a = render_exprs(t.answer, tree, strict)
    if a is None:
        return None
    return q, a


def render(t: Template, tree: DepTree, strict: bool = False) -> Optional[tuple[str, str]]:
    """Fill a template from ``tree``; ``None`` if any expression fails to resolve."""
    toks = render_tokens(t, tree, strict)
    if toks is None:
        return None
    return join_tokens(toks[0]), join_tokens(toks[1])
