import pytest

from treeqg.guard_induction import (NO_AUX, NOT_RELATIVE, SupportSet, base_clauses,
                                    base_guard, complementary_guards, induce_guards)
from treeqg.guards import GuardClause, eval_guard, exists, parse_guard
from treeqg.templates import parse_template
from treeqg.toy import FIN_3SG, make_tree

MERGED = "template7\tWhen does [r.nsubj#1] [r.lemma] [r.obj#3] <r.obl#5 - conj#7> => <r.obl:tmod#9>"
TIM_GUARD = (f"n.morph has {FIN_3SG}, n.pos is VERB, n.nsubj exists, n.obj exists, n.obl exists, "
             "n.nsubj.morph has_not PronType=Rel, n.aux not_exists -> template7")


def test_question_side_gives_tim_guard(tim):
    t = parse_template(MERGED)
    clauses = complementary_guards(SupportSet(t.id, [tim]))[0] + base_clauses(t.question, (), [tim])
    assert set(clauses) == set(parse_guard(TIM_GUARD).clauses)


def test_full_template_adds_answer_chain(tim):
    [g] = induce_guards(parse_template(MERGED), SupportSet("template7", [tim]))
    assert set(g.clauses) == set(parse_guard(TIM_GUARD).clauses) | {exists("obl:tmod")}
    assert g.target == "template7"
    assert eval_guard(g, tim)


def test_answer_subject_triggers_relative_exclusion(tim):
    t = parse_template("t\twho [r] [r.obj#3]? => <r.nsubj#1>")
    assert NOT_RELATIVE in base_guard(t, SupportSet("t", [tim]))


def test_root_only_template(tim):
    t = parse_template("t\t<r> => <r>")
    clauses = base_guard(t, SupportSet("t", [tim]))
    assert clauses == [NO_AUX]
    assert not any(c.op == "exists" for c in clauses)


def test_no_aux_clause_needs_every_support_without_aux(tim):
    rows = [(n.form, n.lemma, n.upos, "|".join(n.morph), n.head, n.deprel) for n in tim.nodes]
    with_aux = make_tree(rows + [("does", "do", "AUX", "", 2, "aux")])
    t = parse_template("t\t[r] [r.obj#3] => [r.nsubj#1]")
    assert NO_AUX in base_guard(t, SupportSet("t", [tim]))
    assert NO_AUX not in base_guard(t, SupportSet("t", [tim, with_aux]))


def test_no_aux_clause_needs_root_in_template(tim):
    t = parse_template("t\twhat [r.obj#3] => [r.nsubj#1]")
    assert NO_AUX not in base_guard(t, SupportSet("t", [tim]))


def test_negatives_do_not_contribute(tim):
    t = parse_template("t\t<r.obl#5 - conj#7> => [r.obj#3]")
    assert exists("obl", "conj") not in base_guard(t, SupportSet("t", [tim]))


def test_complementary_for_tim(tim):
    assert complementary_guards(SupportSet("t", [tim])) == [
        [GuardClause((), "has", tuple(FIN_3SG.split("|"))), GuardClause((), "is", "VERB")]]


def _support(feats, upos="VERB"):
    return make_tree([("John", "John", "PROPN", "", 2, "nsubj"),
                      ("plays", "play", upos, feats, 0, "root"),
                      ("ball", "ball", "NOUN", "", 2, "obj")])


def test_two_signatures_two_guards():
    playing = _support("Tense=Pres|VerbForm=Part")
    played = _support("Tense=Past|VerbForm=Part")
    t = parse_template("t\twhat [r.nsubj#1] [r] => [r.obj#3]")
    gs = induce_guards(t, SupportSet("t", [playing, played, playing]))
    assert len(gs) == 2
    assert gs[0].clauses[2:] == gs[1].clauses[2:]
    assert eval_guard(gs[0], playing) and eval_guard(gs[1], played)


def test_three_signatures_share_base():
    supports = [_support(f"Tense={x}") for x in ("Pres", "Past", "Fut")]
    t = parse_template("t\twhat [r.nsubj#1] [r] => [r.obj#3]")
    gs = induce_guards(t, SupportSet("t", supports))
    assert len(gs) == 3
    base = base_guard(t, SupportSet("t", supports))
    assert all(list(g.clauses[2:]) == base for g in gs)


def test_empty_morph_root_has_no_has_clause():
    support = _support("")
    [g] = induce_guards(parse_template("t\t[r] => [r.obj#3]"), SupportSet("t", [support]))
    assert not any(c.op == "has" for c in g.clauses)
    assert g.clauses[0] == GuardClause((), "is", "VERB")


def test_support_set_nonempty():
    with pytest.raises(ValueError):
        SupportSet("t", [])
