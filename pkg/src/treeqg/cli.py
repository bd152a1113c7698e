"""Command line pipeline: induce, train, generate, eval, iaa.

Exit codes: 0 when something was produced, 2 when the run succeeded but
produced nothing (no templates, no QA pairs), 1 on error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import metrics
from .guard_induction import SupportSet, induce_guards
from .guards import GUARD_FILE_HEADER, Guard, eval_guard, read_guards, write_guards
from .induction import Record, build_triples, induce
from .scoring import (DEFAULT_ALPHA, DEFAULT_LAMBDAS, MODEL_VERSION, Candidate,
                      RankingModel, build_lexicon, check_lambdas, dump_model, load_model,
                      rank_and_filter, train_ngram, train_qword)
from .templates import (TEMPLATE_FILE_HEADER, Template, join_tokens, read_templates,
                        render_tokens, write_templates)
from .treebank import (DepTree, LangConfig, answer_head, is_punct, load_config,
                       parse_conllu, pos_morph, preprocess, preprocess_tree)

log = logging.getLogger("treeqg")

EXIT_OK, EXIT_ERROR, EXIT_EMPTY = 0, 1, 2


class PipelineError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    config: Optional[str]
    inputs: list[str]
    outputs: list[str] = field(default_factory=list)
    versions: dict = field(default_factory=lambda: {
        "templates": TEMPLATE_FILE_HEADER, "guards": GUARD_FILE_HEADER, "model": MODEL_VERSION})
    deterministic: bool = True

    def check_inputs(self):
        missing = [p for p in self.inputs if not Path(p).is_file()]
        if missing:
            raise PipelineError("missing input file(s): " + ", ".join(missing))

    def write(self, path):
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")


# -- input helpers ----------------------------------------------------------

def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise PipelineError(f"cannot read {path}: {e.strerror}") from None


def read_jsonl(path) -> list[dict]:
    out = []
    for lineno, line in enumerate(_read_text(path).splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise PipelineError(f"{path}:{lineno}: bad JSON ({e.msg})") from None
    return out


def read_dataset(path) -> list[Record]:
    records = []
    for i, obj in enumerate(read_jsonl(path)):
        try:
            question = parse_conllu(obj["question_conllu"])
            if len(question) != 1:
                raise ValueError(f"question must be one sentence, got {len(question)}")
            records.append(Record(str(obj["id"]), str(obj["doc_id"]),
                                  tuple(parse_conllu(obj["context_conllu"])),
                                  question[0], obj["answer"]))
        except (KeyError, ValueError) as e:
            raise PipelineError(f"{path}: record {i}: {e}") from None
    return records


def read_trees(path) -> list[DepTree]:
    try:
        return parse_conllu(_read_text(path))
    except ValueError as e:
        raise PipelineError(f"{path}: {e}") from None


def _config(path: Optional[str]) -> LangConfig:
    if path is None:
        return LangConfig()
    try:
        return load_config(path)
    except OSError as e:
        raise PipelineError(f"cannot read config {path}: {e.strerror}") from None


def _write(path, text: str):
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True)
    p.write_text(text, encoding="utf-8")


# -- induce -----------------------------------------------------------------

def cmd_induce(dataset: str, out_dir: str, cfg: LangConfig = LangConfig(),
               threads: int = 1) -> int:
    """Write templates.tpl, guards.grd and stats.tsv for a dataset."""
    records = read_dataset(dataset)
    triples, stats, docs = build_triples(records, cfg)
    report: dict = {}
    templates, supports = induce(triples, cfg, doc_tokens=docs, threads=threads, report=report)
    guards = [g for t in templates for g in induce_guards(t, SupportSet(t.id, supports[t.id]))]

    out = Path(out_dir)
    _write(out / "templates.tpl", write_templates(templates))
    _write(out / "guards.grd", write_guards(guards))
    rows = [("records", str(stats.total)),
            ("satisfactory_pct", f"{stats.pct(stats.satisfactory):.2f}"),
            ("subword_pct", f"{stats.pct(stats.subword):.2f}"),
            ("satisfactory_not_subword_pct", f"{stats.pct(stats.usable):.2f}"),
            ("constant_only_dropped", str(report.get("constant_only", 0))),
            ("rare_constant_dropped", str(report.get("rare_constant", 0))),
            ("templates", str(len(templates))),
            ("guards", str(len(guards)))]
    _write(out / "stats.tsv", "statistic\tvalue\n" + "".join(f"{k}\t{v}\n" for k, v in rows))
    log.info("induced %d templates and %d guards from %d records",
             len(templates), len(guards), len(records))
    return EXIT_OK if templates else EXIT_EMPTY


# -- train ------------------------------------------------------------------

def question_word(tokens: Sequence[str], cfg: LangConfig) -> str:
    order = tokens if cfg.qword_position == "start" else list(reversed(tokens))
    return next((t for t in order if not is_punct(t)), "")


def cmd_train(corpus: str, dataset: str, out: str, cfg: LangConfig = LangConfig(),
              lambdas: Sequence[float] = DEFAULT_LAMBDAS, alpha: float = DEFAULT_ALPHA) -> int:
    trees = read_trees(corpus)
    if not trees:
        raise PipelineError(f"{corpus}: empty corpus")
    ngram = train_ngram(trees, lambdas)
    triples, _, _ = build_triples(read_dataset(dataset), cfg)
    pairs, inventory = [], set()
    for t in triples:
        head = answer_head(t.sentence, t.answer_ids)
        pairs.append((question_word(t.question.forms, cfg), pos_morph(head)))
        if len(t.answer_ids) == 1:
            inventory.add(pos_morph(head))
    if not pairs:
        log.warning("no usable questions in %s; the question-word model is empty", dataset)
    lexicon = build_lexicon(preprocess_tree(t, cfg) for t in trees)
    model = RankingModel(ngram, train_qword(pairs), frozenset(inventory), lexicon, alpha)
    buf = io.StringIO()
    dump_model(model, buf)
    _write(out, buf.getvalue())
    return EXIT_OK


# -- generate ---------------------------------------------------------------

def load_artifacts(templates_path, guards_path, model_path):
    try:
        templates = read_templates(_read_text(templates_path))
        guards = read_guards(_read_text(guards_path))
        with open(model_path, encoding="utf-8") as f:
            model = load_model(f)
    except OSError as e:
        raise PipelineError(f"cannot read artifact: {e}") from None
    except ValueError as e:
        raise PipelineError(str(e)) from None
    ids = {t.id for t in templates}
    dangling = sorted({g.target for g in guards} - ids)
    if dangling:
        raise PipelineError("guards point to unknown templates: " + ", ".join(dangling))
    return templates, guards, model


def _token_tag(token, model: RankingModel, cfg: LangConfig) -> str:
    text, node, is_lemma = token
    if node is None:
        return model.tag(preprocess(text, cfg))
    if is_lemma:
        return model.tag(text, node.upos)
    return pos_morph(node)


def sentence_candidates(tree: DepTree, templates: Sequence[Template], guards: Sequence[Guard],
                        model: RankingModel, cfg: LangConfig, sentence_id: str) -> list[Candidate]:
    """Render every template targeted by a satisfied guard (steps 2 and 3)."""
    fired = {g.target for g in guards if eval_guard(g, tree)}
    out, seen = [], set()
    for t in templates:
        if t.id not in fired:
            continue
        rendered = render_tokens(t, tree, strict=False)
        if rendered is None:
            continue
        q_toks, a_toks = rendered
        question, answer = join_tokens(q_toks), join_tokens(a_toks)
        if (question, answer) in seen:
            continue
        seen.add((question, answer))
        consts = [preprocess(x[0], cfg) for x in q_toks if x[1] is None and not is_punct(x[0])]
        qword = (consts[0] if cfg.qword_position == "start" else consts[-1]) if consts else ""
        a_nodes = [x[1].id for x in a_toks if x[1] is not None]
        if a_nodes:
            root_pm = pos_morph(answer_head(tree, a_nodes))
        else:
            root_pm = _token_tag(a_toks[0], model, cfg)
        out.append(Candidate(question, answer, t.id,
                             tuple(_token_tag(x, model, cfg) for x in q_toks),
                             qword, root_pm, len(a_toks), sentence_id))
    return out


def cmd_generate(input_path: str, templates_path: str, guards_path: str, model_path: str,
                 out: str, cfg: LangConfig = LangConfig(), top_k: int = 1,
                 alpha: Optional[float] = None, threads: int = 1) -> int:
    if top_k < 1:
        raise PipelineError("--top-k must be at least 1")
    templates, guards, model = load_artifacts(templates_path, guards_path, model_path)
    alpha = model.alpha if alpha is None else alpha
    trees = [preprocess_tree(t, cfg) for t in read_trees(input_path)]
    ids = [t.sent_id or f"s{i + 1}" for i, t in enumerate(trees)]

    def work(i):
        return sentence_candidates(trees[i], templates, guards, model, cfg, ids[i])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_sentence = list(pool.map(work, range(len(trees))))
    else:
        per_sentence = [work(i) for i in range(len(trees))]
    batch = [c for cands in per_sentence for c in cands]
    ranked = rank_and_filter(batch, model.ngram, model.qword, model.inventory, alpha)
    by_sentence = defaultdict(list)
    for s in ranked:
        by_sentence[s.sentence_id].append(s)

    lines = []
    for sid in ids:
        for rank, s in enumerate(by_sentence.get(sid, [])[:top_k], 1):
            lines.append(json.dumps({"id": sid, "rank": rank, "question": s.question,
                                     "answer": s.answer, "template_id": s.template_id,
                                     "r_ng": s.r_ng, "r_qw": s.r_qw, "r_qa": s.r_qa},
                                    ensure_ascii=False))
    _write(out, "".join(l + "\n" for l in lines))
    log.info("%d candidates, %d kept after filtering, %d written",
             len(batch), len(ranked), len(lines))
    return EXIT_OK if lines else EXIT_EMPTY


# -- eval -------------------------------------------------------------------

def eval_pairs(qa_path: str, refs_path: Optional[str], lowercase: bool = True) -> list[metrics.EvalPair]:
    if refs_path is None:
        return [metrics.EvalPair.from_strings(o["hyp"], o["refs"], lowercase)
                for o in read_jsonl(qa_path)]
    refs = {}
    for o in read_jsonl(refs_path):
        refs[str(o["id"])] = o["refs"]
    best = {}
    for o in read_jsonl(qa_path):
        sid = str(o["id"])
        if sid not in refs:
            raise PipelineError(f"generated item {sid!r} has no references")
        if o.get("rank", 1) == 1 and sid not in best:
            best[sid] = o["question"]
    return [metrics.EvalPair.from_strings(best[sid], refs[sid], lowercase)
            for sid in sorted(best)]


def cmd_eval(qa_path: str, refs_path: Optional[str], out: str, cfg: LangConfig = LangConfig()) -> int:
    pairs = eval_pairs(qa_path, refs_path, cfg.lowercase)
    if not pairs:
        _write(out, "metric\tvalue\nitems\t0\n")
        return EXIT_EMPTY
    rows = [("items", str(len(pairs)))]
    rows += [(f"BLEU-{n}", f"{metrics.bleu(pairs, n):.4f}") for n in range(1, 5)]
    rows.append(("ROUGE-L", f"{metrics.rouge_l(pairs):.4f}"))
    rows.append(("CIDEr", f"{metrics.cider(pairs):.4f}" if len(pairs) > 1 else "NA"))
    _write(out, "metric\tvalue\n" + "".join(f"{k}\t{v}\n" for k, v in rows))
    return EXIT_OK


# -- iaa --------------------------------------------------------------------

def read_judgements(path, categories: int = 4) -> dict[str, tuple[list[str], metrics.JudgementMatrix]]:
    """Per criterion: item ids and the items x judges score matrix."""
    table: dict[str, dict[str, dict[str, int]]] = defaultdict(lambda: defaultdict(dict))
    text = _read_text(path)
    reader = csv.DictReader(text.splitlines())
    need = {"item_id", "judge_id", "criterion", "score"}
    if not reader.fieldnames or not need <= set(reader.fieldnames):
        raise PipelineError(f"{path}: header must contain {','.join(sorted(need))}")
    for lineno, row in enumerate(reader, 2):
        try:
            table[row["criterion"]][row["item_id"]][row["judge_id"]] = int(row["score"])
        except ValueError:
            raise PipelineError(f"{path}:{lineno}: score must be an integer") from None
    out = {}
    for crit in sorted(table):
        items = sorted(table[crit])
        judges = sorted({j for it in table[crit].values() for j in it})
        if len(judges) < 2:
            raise PipelineError(f"criterion {crit!r}: need at least 2 judges")
        rows = []
        for it in items:
            scores = table[crit][it]
            if set(scores) != set(judges):
                raise PipelineError(f"criterion {crit!r}: item {it!r} is not scored by every judge")
            rows.append([scores[j] for j in judges])
        try:
            out[crit] = (items, metrics.JudgementMatrix(rows, categories))
        except ValueError as e:
            raise PipelineError(f"criterion {crit!r}: {e}") from None
    return out


def cmd_iaa(judgements: str, out: str, aggregates: Optional[str] = None,
            categories: int = 4, ideal_low: Sequence[str] = ()) -> int:
    table = read_judgements(judgements, categories)
    rows = ["criterion\titems\tjudges\trandolph_kappa\tgamma_n"]
    agg = ["criterion\titem_id\tmedian\tmode"]
    for crit, (items, m) in table.items():
        try:
            gamma = f"{metrics.gamma_n(m):.6f}"
        except metrics.UndefinedAgreement:
            gamma = "NA"
        rows.append(f"{crit}\t{m.n_items}\t{m.n_judges}\t{metrics.randolph_kappa(m):.6f}\t{gamma}")
        ideal = 1 if crit in ideal_low else categories
        for it, scores in zip(items, m.scores):
            med, mode = metrics.aggregate_ordinal([int(s) for s in scores],
                                                  1 if ideal == 1 else 4)
            agg.append(f"{crit}\t{it}\t{med:g}\t{mode}")
    _write(out, "\n".join(rows) + "\n")
    if aggregates:
        _write(aggregates, "\n".join(agg) + "\n")
    return EXIT_OK if table else EXIT_EMPTY


# -- argument parsing -------------------------------------------------------

def _lambdas(text: str):
    try:
        return check_lambdas([float(x) for x in text.split(",")])
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treeqg", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="language config file (key=value lines)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--top-k", type=int, default=1)
    p.add_argument("--alpha", type=float, default=None,
                   help=f"n-gram weight in the combined score (default {DEFAULT_ALPHA})")
    p.add_argument("--lambdas", type=_lambdas, default=DEFAULT_LAMBDAS,
                   help="interpolation weights a,b,c,d for trigram..constant")
    p.add_argument("--manifest", help="write a JSON run manifest here")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("induce", help="induce templates and guards from a QA dataset")
    s.add_argument("dataset")
    s.add_argument("-o", "--out-dir", required=True)

    s = sub.add_parser("train", help="train the ranking models")
    s.add_argument("corpus", help="CoNLL-U corpus for the pos-morph n-gram model")
    s.add_argument("dataset", help="QA dataset for the question-word model")
    s.add_argument("-o", "--out", required=True)

    s = sub.add_parser("generate", help="generate ranked QA pairs for parsed sentences")
    s.add_argument("input")
    s.add_argument("--templates", required=True)
    s.add_argument("--guards", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("-o", "--out", required=True)

    s = sub.add_parser("eval", help="BLEU, ROUGE-L and CIDEr of top-ranked questions")
    s.add_argument("qa", help="qa.jsonl, or a JSONL file of {hyp, refs} when refs is omitted")
    s.add_argument("refs", nargs="?")
    s.add_argument("-o", "--out", required=True)

    s = sub.add_parser("iaa", help="inter-annotator agreement per criterion")
    s.add_argument("judgements")
    s.add_argument("-o", "--out", required=True)
    s.add_argument("--aggregates", help="per-item median and worst mode TSV")
    s.add_argument("--categories", type=int, default=4)
    s.add_argument("--ideal-low", default="",
                   help="comma-separated criteria whose best score is 1 rather than the maximum")
    return p


def run(args: argparse.Namespace) -> int:
    cfg = _config(args.config)
    c = args.command
    if c == "induce":
        inputs, outputs = [args.dataset], [str(Path(args.out_dir) / f)
                                           for f in ("templates.tpl", "guards.grd", "stats.tsv")]
    elif c == "train":
        inputs, outputs = [args.corpus, args.dataset], [args.out]
    elif c == "generate":
        inputs, outputs = [args.input, args.templates, args.guards, args.model], [args.out]
    elif c == "eval":
        inputs, outputs = [x for x in (args.qa, args.refs) if x], [args.out]
    else:
        inputs, outputs = [args.judgements], [args.out] + ([args.aggregates] if args.aggregates else [])
    manifest = RunManifest(c, args.config, inputs + ([args.config] if args.config else []), outputs)
    manifest.check_inputs()

    if c == "induce":
        code = cmd_induce(args.dataset, args.out_dir, cfg, args.threads)
    elif c == "train":
        code = cmd_train(args.corpus, args.dataset, args.out, cfg, args.lambdas,
                         DEFAULT_ALPHA if args.alpha is None else args.alpha)
    elif c == "generate":
        code = cmd_generate(args.input, args.templates, args.guards, args.model, args.out,
                            cfg, args.top_k, args.alpha, args.threads)
    elif c == "eval":
        code = cmd_eval(args.qa, args.refs, args.out, cfg)
    else:
        crits = [x for x in args.ideal_low.split(",") if x]
        code = cmd_iaa(args.judgements, args.out, args.aggregates, args.categories, crits)
    if args.manifest:
        manifest.write(args.manifest)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.alpha is not None and not 0 <= args.alpha <= 1:
        print("treeqg: error: --alpha must lie in [0, 1]", file=sys.stderr)
        return EXIT_ERROR
    try:
        return run(args)
    except (PipelineError, ValueError) as e:
        print(f"treeqg: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
