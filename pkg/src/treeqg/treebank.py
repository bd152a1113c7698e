"""Dependency trees read from CoNLL-U, plus the tree queries every other module
builds on: relation chains, subtree text and pos-morph symbols."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Optional, Sequence


class ConlluError(ValueError):
    """Raised when a CoNLL-U block cannot be turned into a single-rooted tree."""

    def __init__(self, message: str, sentence_index: int):
        super().__init__(f"sentence {sentence_index}: {message}")
        self.sentence_index = sentence_index


@dataclass(frozen=True)
class DepNode:
    id: int
    form: str
    lemma: str
    upos: str
    morph: tuple[str, ...]
    head: int
    deprel: str

    def __post_init__(self):
        if self.id < 1 or self.head < 0 or self.head == self.id:
            raise ValueError(f"bad node id/head: {self.id}/{self.head}")
        object.__setattr__(self, "morph", normalize_feats(self.morph))


def normalize_feats(feats: Iterable[str]) -> tuple[str, ...]:
    """Sort "Key=Value" features by key; later duplicates of a key win."""
    by_key = {}
    for feat in feats:
        key = feat.split("=", 1)[0]
        by_key[key] = feat
    return tuple(by_key[k] for k in sorted(by_key, key=str.lower))


@dataclass(frozen=True)
class DepTree:
    nodes: tuple[DepNode, ...]
    sent_id: Optional[str] = None
    text: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        roots = [n for n in self.nodes if n.head == 0]
        if len(roots) != 1:
            raise ValueError(f"expected exactly one root, found {len(roots)}")
        by_id = {n.id: n for n in self.nodes}
        if len(by_id) != len(self.nodes):
            raise ValueError("duplicate token ids")
        for n in self.nodes:
            if n.head and n.head not in by_id:
                raise ValueError(f"token {n.id} has unknown head {n.head}")
        # every node must reach the root
        for n in self.nodes:
            seen = set()
            cur = n
            while cur.head:
                if cur.id in seen:
                    raise ValueError("cyclic head")
                seen.add(cur.id)
                cur = by_id[cur.head]

    @cached_property
    def _by_id(self) -> dict[int, DepNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def _children(self) -> dict[int, tuple[DepNode, ...]]:
        kids: dict[int, list[DepNode]] = {n.id: [] for n in self.nodes}
        kids[0] = []
        for n in self.nodes:
            kids[n.head].append(n)
        return {k: tuple(sorted(v, key=lambda x: x.id)) for k, v in kids.items()}

    @property
    def root(self) -> DepNode:
        return self._children[0][0]

    @property
    def root_id(self) -> int:
        return self.root.id

    def node(self, node_id: int) -> DepNode:
        return self._by_id[node_id]

    def children(self, node_id: int) -> tuple[DepNode, ...]:
        return self._children.get(node_id, ())

    def depth(self, node_id: int) -> int:
        d = 0
        cur = self._by_id[node_id]
        while cur.head:
            cur = self._by_id[cur.head]
            d += 1
        return d

    def subtree_ids(self, node_id: int) -> set[int]:
        out = set()
        stack = [node_id]
        while stack:
            nid = stack.pop()
            out.add(nid)
            stack.extend(c.id for c in self.children(nid))
        return out

    def chain_to(self, node_id: int, start: Optional[int] = None) -> "RelChain":
        """Strict relation chain from ``start`` (default: the root) down to a node."""
        start = self.root_id if start is None else start
        links = []
        cur = self._by_id[node_id]
        while cur.id != start:
            if not cur.head:
                raise ValueError(f"token {node_id} is not below token {start}")
            links.append((cur.deprel, cur.id))
            cur = self._by_id[cur.head]
        return RelChain(tuple(reversed(links)))

    @property
    def forms(self) -> list[str]:
        return [n.form for n in self.nodes]

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True)
class LangConfig:
    lowercase: bool = True
    remove_punctuation: bool = False
    remove_diacritics: bool = False
    qword_position: str = "start"

    def __post_init__(self):
        if self.qword_position not in ("start", "end"):
            raise ValueError("qword_position must be 'start' or 'end'")


# Per-language settings used for the TyDi QA languages.
LANGUAGES = {
    "fi": LangConfig(True, False, False, "start"),
    "ja": LangConfig(False, True, False, "end"),
    "te": LangConfig(False, True, False, "end"),
    "ar": LangConfig(False, True, False, "start"),
    "id": LangConfig(True, False, False, "start"),
    "ko": LangConfig(False, False, False, "end"),
    "ru": LangConfig(True, False, True, "start"),
    "en": LangConfig(True, False, False, "start"),
}


_TRUE = {"true", "yes", "1", "on"}
_FALSE = {"false", "no", "0", "off"}


def parse_config(text: str) -> LangConfig:
    """Read ``key = value`` lines (``#`` comments allowed) into a LangConfig."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        value = value.strip("\"'").lower()
        if key == "qword_position":
            values[key] = value
        elif key in ("lowercase", "remove_punctuation", "remove_diacritics"):
            if value not in _TRUE | _FALSE:
                raise ValueError(f"config line {lineno}: {key} needs a boolean")
            values[key] = value in _TRUE
        elif key == "language":
            base = LANGUAGES[value]
            values = {**base.__dict__, **values}
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    return LangConfig(**values)


def load_config(path) -> LangConfig:
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read())


@dataclass(frozen=True)
class RelChain:
    """Dotted path of ``deprel#id`` links starting at an anchor node.

    An id of ``None`` means the link matches on the relation label alone.
    """

    links: tuple[tuple[str, Optional[int]], ...] = ()
    anchor: str = "r"

    @property
    def rels(self) -> tuple[str, ...]:
        return tuple(rel for rel, _ in self.links)

    @property
    def last_id(self) -> Optional[int]:
        return self.links[-1][1] if self.links else None

    def strip_ids(self) -> "RelChain":
        return RelChain(tuple((rel, None) for rel, _ in self.links), self.anchor)

    def __add__(self, other: "RelChain") -> "RelChain":
        return RelChain(self.links + other.links, self.anchor)

    def __len__(self):
        return len(self.links)

    def dotted(self) -> str:
        return ".".join(rel if i is None else f"{rel}#{i}" for rel, i in self.links)

    def __str__(self):
        d = self.dotted()
        return f"{self.anchor}.{d}" if d else self.anchor


def common_prefix(a: RelChain, b: RelChain) -> RelChain:
    links = []
    for x, y in zip(a.links, b.links):
        if x != y:
            break
        links.append(x)
    return RelChain(tuple(links), a.anchor)


def parse_conllu(text: str) -> list[DepTree]:
    """Parse CoNLL-U text into trees; multiword ranges and empty nodes are skipped."""
    trees = []
    block: list[tuple[int, str]] = []
    lines = text.splitlines()
    lines.append("")
    for lineno, line in enumerate(lines, 1):
        if line.strip():
            block.append((lineno, line))
            continue
        if block:
            trees.append(_parse_block(block, len(trees)))
            block = []
    return trees


def _parse_block(block, index: int) -> DepTree:
    nodes = []
    meta = {}
    for lineno, line in block:
        if line.startswith("#"):
            if "=" in line:
                key, value = line[1:].split("=", 1)
                meta[key.strip()] = value.strip()
            continue
        cols = line.rstrip("\n").split("\t")
        if len(cols) != 10:
            raise ConlluError(f"line {lineno}: expected 10 columns, got {len(cols)}", index)
        tid = cols[0]
        if "-" in tid or "." in tid:
            continue
        try:
            nid, head = int(tid), int(cols[6])
        except ValueError:
            raise ConlluError(f"line {lineno}: non-integer id or head", index) from None
        if nid == head:
            raise ConlluError(f"line {lineno}: cyclic head", index)
        feats = () if cols[5] == "_" else tuple(cols[5].split("|"))
        lemma = "" if cols[2] == "_" and cols[1] != "_" else cols[2]
        try:
            nodes.append(DepNode(nid, cols[1], lemma, cols[3], feats, head, cols[7]))
        except ValueError as e:
            raise ConlluError(f"line {lineno}: {e}", index) from None
    if not nodes:
        raise ConlluError("no tokens", index)
    try:
        return DepTree(tuple(nodes), sent_id=meta.get("sent_id"), text=meta.get("text"))
    except ValueError as e:
        raise ConlluError(str(e), index) from None


def serialize_conllu(trees: Iterable[DepTree]) -> str:
    out = []
    for tree in trees:
        if tree.sent_id is not None:
            out.append(f"# sent_id = {tree.sent_id}")
        if tree.text is not None:
            out.append(f"# text = {tree.text}")
        for n in tree.nodes:
            feats = "|".join(n.morph) or "_"
            out.append("\t".join([str(n.id), n.form, n.lemma or "_", n.upos, "_",
                                  feats, str(n.head), n.deprel, "_", "_"]))
        out.append("")
    return "\n".join(out) + ("\n" if out else "")


def is_punct(text: str) -> bool:
    return bool(text) and all(unicodedata.category(ch).startswith("P") for ch in text)


def preprocess(text: str, cfg: LangConfig) -> str:
    if cfg.lowercase:
        text = text.lower()
    if cfg.remove_punctuation:
        text = "".join(ch for ch in text if not unicodedata.category(ch).startswith("P"))
        text = " ".join(text.split())
    if cfg.remove_diacritics:
        decomposed = unicodedata.normalize("NFD", text)
        text = unicodedata.normalize(
            "NFC", "".join(ch for ch in decomposed if not unicodedata.combining(ch)))
    return text


def preprocess_tree(tree: DepTree, cfg: LangConfig) -> DepTree:
    """Apply text preprocessing to forms and lemmas.

    With ``remove_punctuation`` PUNCT nodes (and tokens that become empty) are
    dropped and their dependents reattached to the dropped node's head.
    Token ids are kept as they are.
    """
    drop = set()
    if cfg.remove_punctuation:
        drop = {n.id for n in tree.nodes
                if n.upos == "PUNCT" or not preprocess(n.form, cfg)}
        # never drop the root; it anchors every chain
        drop.discard(tree.root_id)

    def new_head(n):
        h = n.head
        while h in drop:
            h = tree.node(h).head
        return h

    nodes = []
    for n in tree.nodes:
        if n.id in drop:
            continue
        nodes.append(replace(n, form=preprocess(n.form, cfg),
                             lemma=preprocess(n.lemma, cfg), head=new_head(n)))
    return DepTree(tuple(nodes), sent_id=tree.sent_id, text=tree.text)


def resolve_chain(tree: DepTree, chain: RelChain, strict_ids: bool = False,
                  start: Optional[int] = None) -> Optional[DepNode]:
    """Follow a chain from ``start`` (the root by default).

    In strict mode a link with an id must hit exactly that token; otherwise
    the leftmost child with the right relation is taken.
    """
    cur = tree.node(tree.root_id if start is None else start)
    for rel, tid in chain.links:
        kids = [c for c in tree.children(cur.id) if c.deprel == rel]
        if strict_ids and tid is not None:
            kids = [c for c in kids if c.id == tid]
        if not kids:
            return None
        cur = kids[0]
    return cur


def visible_ids(tree: DepTree, node: DepNode, negatives: Sequence = (),
                strict_ids: bool = False) -> list[int]:
    """Token ids of ``node``'s subtree in linear order, minus the negatives.

    ``negatives`` holds ``(chain, star)`` pairs relative to ``node``; a starred
    negative removes only its own token, a plain one its whole subtree.
    """
    keep = tree.subtree_ids(node.id)
    for chain, star in negatives:
        target = resolve_chain(tree, chain, strict_ids, start=node.id)
        if target is None:
            continue
        if star:
            keep.discard(target.id)
        else:
            keep -= tree.subtree_ids(target.id)
    return sorted(keep)


def subtree_text(tree: DepTree, node: DepNode, negatives: Sequence = (),
                 strict_ids: bool = False) -> str:
    return " ".join(tree.node(i).form for i in visible_ids(tree, node, negatives, strict_ids))


def pos_morph(node: DepNode) -> str:
    if not node.morph:
        return node.upos
    return node.upos + "/" + "|".join(node.morph)


def answer_head(tree: DepTree, ids: Iterable[int]) -> Optional[DepNode]:
    """Highest node among ``ids`` (closest to the root, leftmost on ties)."""
    ids = list(ids)
    if not ids:
        return None
    best = min(ids, key=lambda i: (tree.depth(i), i))
    return tree.node(best)
