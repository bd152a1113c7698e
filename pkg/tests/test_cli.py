import json

import numpy as np
import pytest

from treeqg.cli import EXIT_EMPTY, EXIT_ERROR, EXIT_OK, main
from treeqg.templates import read_templates, serialize_template
from treeqg.toy import ERICSSON, make_tree
from treeqg.treebank import serialize_conllu

import oracles

WHEN_TPL = "template1\tWhen does [r.nsubj#1] [r.lemma] [r.obj#3] <r.obl#5>? => <r.obl:tmod#9>"


def run(*argv):
    return main([str(a) for a in argv])


def tsv(path):
    return dict(line.split("\t") for line in path.read_text().splitlines()[1:])


@pytest.fixture(scope="module")
def pipeline(toy_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert run("induce", toy_dir / "dataset.jsonl", "-o", out) == EXIT_OK
    assert run("train", toy_dir / "corpus.conllu", toy_dir / "dataset.jsonl",
               "-o", out / "model.txt") == EXIT_OK
    assert run("generate", toy_dir / "input.conllu", "--templates", out / "templates.tpl",
               "--guards", out / "guards.grd", "--model", out / "model.txt",
               "-o", out / "qa.jsonl") == EXIT_OK
    return out


def test_induce_outputs(pipeline):
    templates = read_templates((pipeline / "templates.tpl").read_text())
    lines = [serialize_template(t).split("\t")[1] for t in templates]
    assert ("when does [r.nsubj#1] [r.lemma] [r.obj#3] <r.obl#5>? => <r.obl:tmod#9>") in lines
    stats = tsv(pipeline / "stats.tsv")
    assert stats["templates"] == str(len(templates)) == "4"
    assert float(stats["subword_pct"]) > 0
    assert set(stats) >= {"satisfactory_pct", "subword_pct", "satisfactory_not_subword_pct"}


def test_generate_output_shape(pipeline):
    rows = [json.loads(l) for l in (pipeline / "qa.jsonl").read_text().splitlines()]
    assert rows
    for r in rows:
        assert r["rank"] == 1
        assert set(r) == {"id", "rank", "question", "answer", "template_id", "r_ng", "r_qw", "r_qa"}
        assert r["r_qa"] == pytest.approx(0.8 * r["r_ng"] + 0.2 * r["r_qw"], abs=1e-12)


def test_train_is_deterministic(pipeline, toy_dir, tmp_path):
    assert run("train", toy_dir / "corpus.conllu", toy_dir / "dataset.jsonl",
               "-o", tmp_path / "m.txt") == EXIT_OK
    assert (tmp_path / "m.txt").read_bytes() == (pipeline / "model.txt").read_bytes()


def test_top_k_and_manifest(pipeline, toy_dir, tmp_path):
    code = run("--top-k", 3, "--manifest", tmp_path / "run.json", "generate", toy_dir / "input.conllu",
               "--templates", pipeline / "templates.tpl", "--guards", pipeline / "guards.grd",
               "--model", pipeline / "model.txt", "-o", tmp_path / "qa.jsonl")
    assert code == EXIT_OK
    rows = [json.loads(l) for l in (tmp_path / "qa.jsonl").read_text().splitlines()]
    per_id = {}
    for r in rows:
        per_id.setdefault(r["id"], []).append(r)
    for rs in per_id.values():
        assert [r["rank"] for r in rs] == list(range(1, len(rs) + 1))
        assert [r["r_qa"] for r in rs] == sorted((r["r_qa"] for r in rs), reverse=True)
    manifest = json.loads((tmp_path / "run.json").read_text())
    assert manifest["command"] == "generate" and manifest["deterministic"]


def _write_dataset(path, records):
    with open(path, "w") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")


def test_empty_dataset(tmp_path):
    (tmp_path / "d.jsonl").write_text("")
    assert run("induce", tmp_path / "d.jsonl", "-o", tmp_path / "o") == EXIT_EMPTY
    assert (tmp_path / "o" / "templates.tpl").read_text().strip() == "# treeqg-templates v1"
    assert (tmp_path / "o" / "guards.grd").read_text().strip() == "# treeqg-guards v1"


def test_all_subword_answers(tmp_path):
    s = make_tree([("it", "it", "PRON", "", 2, "nsubj"), ("costs", "cost", "VERB", "", 0, "root"),
                   ("$", "$", "SYM", "", 4, "compound"), ("102", "102", "NUM", "", 2, "obj")])
    q = make_tree([("how", "how", "ADV", "", 2, "advmod"), ("much", "much", "ADV", "", 4, "obj"),
                   ("it", "it", "PRON", "", 4, "nsubj"), ("costs", "cost", "VERB", "", 0, "root")])
    recs = [{"id": str(i), "doc_id": str(i), "context_conllu": serialize_conllu([s]),
             "question_conllu": serialize_conllu([q]), "answer": "$102"} for i in range(3)]
    _write_dataset(tmp_path / "d.jsonl", recs)
    assert run("induce", tmp_path / "d.jsonl", "-o", tmp_path / "o") == EXIT_EMPTY
    stats = tsv(tmp_path / "o" / "stats.tsv")
    assert stats["templates"] == "0"
    assert float(stats["subword_pct"]) == 100.0


def test_dataset_without_questions_warns(toy_dir, tmp_path, caplog):
    (tmp_path / "d.jsonl").write_text("")
    assert run("train", toy_dir / "corpus.conllu", tmp_path / "d.jsonl", "-o", tmp_path / "m") == 0
    assert "question-word model is empty" in caplog.text
    assert "QW " not in (tmp_path / "m").read_text()


@pytest.fixture
def ericsson_setup(toy_dir, tmp_path):
    (tmp_path / "cfg").write_text("lowercase = false\n")
    (tmp_path / "in.conllu").write_text(serialize_conllu([ERICSSON]))
    # a lone candidate never beats its own mean, so a weaker template shares the batch
    (tmp_path / "t.tpl").write_text("# treeqg-templates v1\n" + WHEN_TPL + "\n"
                                    "template2\tWhom [r.obj#3] [r.lemma]? => [r.nsubj#1]\n")
    (tmp_path / "g.grd").write_text("# treeqg-guards v1\nn.pos is VERB -> template1\n"
                                    "n.pos is VERB -> template2\n")
    assert run("--config", tmp_path / "cfg", "train", toy_dir / "corpus.conllu",
               toy_dir / "dataset.jsonl", "-o", tmp_path / "m.txt") == 0
    return tmp_path


def _generate(d, *extra, model="m.txt", guards="g.grd", out="qa.jsonl"):
    return run("--config", d / "cfg", *extra, "generate", d / "in.conllu", "--templates", d / "t.tpl",
               "--guards", d / guards, "--model", d / model, "-o", d / out)


def test_generate_ericsson_example(ericsson_setup):
    d = ericsson_setup
    assert _generate(d) == EXIT_OK
    [row] = [json.loads(l) for l in (d / "qa.jsonl").read_text().splitlines()]
    assert (row["question"], row["answer"]) == ("When does Ericsson pay dividends to the shareholders?",
                                                "every first quarter of the year")
    assert row["template_id"] == "template1" and row["rank"] == 1


def test_no_guard_fires_gives_no_output(ericsson_setup):
    d = ericsson_setup
    (d / "none.grd").write_text("# treeqg-guards v1\nn.pos is NOUN -> template1\n")
    assert _generate(d, guards="none.grd") == EXIT_EMPTY
    assert (d / "qa.jsonl").read_text() == ""


def test_version_mismatch_is_error(ericsson_setup, capsys):
    d = ericsson_setup
    (d / "bad.txt").write_text((d / "m.txt").read_text().replace("VERSION 1", "VERSION 9"))
    assert _generate(d, model="bad.txt") == EXIT_ERROR
    assert "version" in capsys.readouterr().err


def test_dangling_guard_is_error(ericsson_setup, capsys):
    d = ericsson_setup
    (d / "dang.grd").write_text("# treeqg-guards v1\nn.pos is VERB -> template9\n")
    assert _generate(d, guards="dang.grd") == EXIT_ERROR
    assert "template9" in capsys.readouterr().err


def test_missing_input_is_error(tmp_path):
    assert run("induce", tmp_path / "nope.jsonl", "-o", tmp_path) == EXIT_ERROR


def test_bad_flags():
    assert run("--alpha", 1.5, "induce", "x", "-o", "y") == EXIT_ERROR
    with pytest.raises(SystemExit):
        run("--lambdas", "0.5,0.5,0.5,0.5", "induce", "x", "-o", "y")


# -- eval and iaa -----------------------------------------------------------

def test_eval_top_ranked_only(tmp_path):
    qa = [{"id": "a", "rank": 1, "question": "when does tim play"},
          {"id": "a", "rank": 2, "question": "totally different words"},
          {"id": "b", "rank": 1, "question": "who plays chess"}]
    refs = [{"id": "a", "refs": ["When does Tim play"]}, {"id": "b", "refs": ["who plays chess"]},
            {"id": "c", "refs": ["never generated"]}]
    _write_dataset(tmp_path / "qa.jsonl", qa)
    _write_dataset(tmp_path / "refs.jsonl", refs)
    assert run("eval", tmp_path / "qa.jsonl", tmp_path / "refs.jsonl", "-o", tmp_path / "m.tsv") == 0
    m = tsv(tmp_path / "m.tsv")
    assert m["items"] == "2"
    assert float(m["BLEU-1"]) == pytest.approx(100.0)
    assert float(m["ROUGE-L"]) == pytest.approx(100.0)
    assert m["CIDEr"] != "NA"


def test_eval_hyp_refs_file(tmp_path):
    _write_dataset(tmp_path / "p.jsonl", [{"hyp": "a b c", "refs": ["a x c"]}])
    assert run("eval", tmp_path / "p.jsonl", "-o", tmp_path / "m.tsv") == 0
    m = tsv(tmp_path / "m.tsv")
    assert float(m["ROUGE-L"]) == pytest.approx(66.6667, abs=1e-3)
    assert m["CIDEr"] == "NA"


def test_eval_unknown_id(tmp_path):
    _write_dataset(tmp_path / "qa.jsonl", [{"id": "z", "rank": 1, "question": "q"}])
    _write_dataset(tmp_path / "refs.jsonl", [{"id": "a", "refs": ["q"]}])
    assert run("eval", tmp_path / "qa.jsonl", tmp_path / "refs.jsonl", "-o", tmp_path / "m") == 1


def _judgements(path, criteria):
    lines = ["item_id,judge_id,criterion,score"]
    for crit, rows in criteria.items():
        for i, row in enumerate(rows):
            lines += [f"i{i},j{k},{crit},{s}" for k, s in enumerate(row)]
    path.write_text("\n".join(lines) + "\n")


def iaa_rows(path):
    lines = path.read_text().splitlines()
    return {l.split("\t")[0]: l.split("\t")[1:] for l in lines[1:]}


def test_iaa_unanimous(tmp_path):
    _judgements(tmp_path / "j.csv", {"grammaticality": [[4, 4, 4], [2, 2, 2], [3, 3, 3]]})
    assert run("iaa", tmp_path / "j.csv", "-o", tmp_path / "iaa.tsv") == 0
    items, judges, kappa, gamma = iaa_rows(tmp_path / "iaa.tsv")["grammaticality"]
    assert (items, judges, float(kappa), float(gamma)) == ("3", "3", 1.0, 1.0)


def test_iaa_five_judges_matches_oracle(tmp_path):
    rng = np.random.default_rng(5)
    rows = rng.integers(1, 5, size=(8, 5))
    relevance = [[1, 1, 2, 1, 1], [4, 3, 4, 4, 4], [2, 2, 2, 3, 2]]
    _judgements(tmp_path / "j.csv", {"answerability": rows.tolist(), "relevance": relevance})
    assert run("iaa", tmp_path / "j.csv", "-o", tmp_path / "iaa.tsv", "--aggregates",
               tmp_path / "agg.tsv", "--ideal-low", "relevance") == 0
    got = iaa_rows(tmp_path / "iaa.tsv")
    assert float(got["answerability"][2]) == pytest.approx(oracles.randolph_kappa(rows, 4), abs=1e-6)
    assert float(got["answerability"][3]) == pytest.approx(oracles.pooled_gamma(rows), abs=1e-6)
    agg = (tmp_path / "agg.tsv").read_text().splitlines()
    assert "relevance\ti0\t1\t1" in agg
    assert "relevance\ti2\t2\t2" in agg


def test_iaa_all_tied_gamma_is_na(tmp_path):
    _judgements(tmp_path / "j.csv", {"c": [[2, 1], [2, 4], [2, 3]]})
    assert run("iaa", tmp_path / "j.csv", "-o", tmp_path / "iaa.tsv") == 0
    assert iaa_rows(tmp_path / "iaa.tsv")["c"][3] == "NA"


def test_iaa_single_judge_is_error(tmp_path):
    _judgements(tmp_path / "j.csv", {"c": [[1], [2], [3]]})
    assert run("iaa", tmp_path / "j.csv", "-o", tmp_path / "iaa.tsv") == EXIT_ERROR


def test_iaa_incomplete_matrix_is_error(tmp_path):
    (tmp_path / "j.csv").write_text("item_id,judge_id,criterion,score\ni1,a,c,1\ni1,b,c,2\ni2,a,c,3\n")
    assert run("iaa", tmp_path / "j.csv", "-o", tmp_path / "iaa.tsv") == EXIT_ERROR
