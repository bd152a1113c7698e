import pytest
from hypothesis import given, strategies as st

from treeqg.templates import (Constant, Negative, NodeLevel, SubtreeLevel, Template,
                              TemplateSyntaxError, parse_exprs, parse_template, read_templates,
                              render, serialize_template, structural_key, write_templates)
from treeqg.toy import make_tree
from treeqg.treebank import RelChain

from strategies import trees

WHEN_TPL = "t1\tWhen does [r.nsubj#1] [r.lemma] [r.obj#3] <r.obl#5>? => <r.obl:tmod#9>"
UNMERGED = "t2\tWhen does [r.nsubj#1] [r.lemma] [r.obj#3] <r.obl#5 - conj#7.cc#6 - conj#7*> => <r.obl:tmod#9>"


def chain(*links):
    return RelChain(tuple(links))


def test_parse_when_template():
    t = parse_template(WHEN_TPL)
    assert t.id == "t1"
    assert t.question == (Constant("When"), Constant("does"), NodeLevel(chain(("nsubj", 1))),
                          NodeLevel(chain(), lemma=True), NodeLevel(chain(("obj", 3))),
                          SubtreeLevel(chain(("obl", 5))), Constant("?"))
    assert t.answer == (SubtreeLevel(chain(("obl:tmod", 9))),)


def test_parse_negatives():
    t = parse_template("t2\t<r.obl#5 - conj#7.cc#6 - conj#7*> => <r>")
    [e] = t.question
    assert e.negatives == (Negative(chain(("conj", 7), ("cc", 6)), False),
                           Negative(chain(("conj", 7)), True))
    assert t.answer == (SubtreeLevel(chain()),)


@pytest.mark.parametrize("line,msg", [
    ("t3\t[r.obj => <r>", "unbalanced"),
    ("t\t<r.obl => <r>", "unbalanced"),
    ("t\tWhen [r.obj#3]", "'=>' missing"),
    ("t\t[] => <r>", "empty chain"),
    ("t\t[r.obl - case] => <r>", "negatives"),
    ("t\t<r.lemma> => <r>", "lemma"),
    ("t\t[r] => [r] => [r]", "more than one"),
    ("t\t => [r]", "nonempty"),
    ("t\tr.obj] => [r]", "unbalanced"),
])
def test_syntax_errors(line, msg):
    with pytest.raises(TemplateSyntaxError, match=msg) as e:
        parse_template(line)
    assert e.value.column >= 1


def test_error_column_points_at_bracket():
    with pytest.raises(TemplateSyntaxError) as e:
        parse_template("t3\t[r.obj => <r>")
    assert e.value.column == 4


@pytest.mark.parametrize("line", [WHEN_TPL, UNMERGED, "t\tWhen ? => <r>",
                                  "t\tWho [r] [r.obj#3] <r.obl:tmod#5>? => [r.nsubj#1]"])
def test_serialize_is_identity_on_canonical_strings(line):
    assert serialize_template(parse_template(line)) == line


# -- random round trips -----------------------------------------------------

rels = st.sampled_from(["nsubj", "obj", "obl", "obl:tmod", "conj", "cc", "case", "det"])
links = st.lists(st.tuples(rels, st.one_of(st.none(), st.integers(1, 40))), max_size=3)
chains = links.map(lambda l: RelChain(tuple(l)))
nonempty_chains = st.lists(st.tuples(rels, st.one_of(st.none(), st.integers(1, 40))),
                           min_size=1, max_size=3).map(lambda l: RelChain(tuple(l)))
constants = st.sampled_from(["When", "does", "?", "what", ",", "is", "Ça", "x-y", "-"]).map(Constant)
exprs = st.one_of(
    constants,
    st.builds(NodeLevel, chains, st.booleans()),
    st.builds(SubtreeLevel, chains,
              st.lists(st.builds(Negative, nonempty_chains, st.booleans()), max_size=3).map(tuple)))
templates = st.builds(Template, st.sampled_from(["t1", "template42"]),
                      st.lists(exprs, min_size=1, max_size=6).map(tuple),
                      st.lists(exprs, min_size=1, max_size=3).map(tuple))


@given(templates)
def test_round_trip(t):
    assert parse_template(serialize_template(t)) == t


@given(templates)
def test_serialization_is_canonical(t):
    s = serialize_template(t)
    assert serialize_template(parse_template(s)) == s


def test_structural_key_ignores_ids():
    a = parse_template("a\tWhen does [r.nsubj#1] <r.obl#5 - conj#7> => <r.obl:tmod#9>")
    b = parse_template("b\tWhen does [r.nsubj#2] <r.obl#4 - conj#8> => <r.obl:tmod#12>")
    c = parse_template("c\tWhen does [r.obj#2] <r.obl#4 - conj#8> => <r.obl:tmod#12>")
    assert structural_key(a) == structural_key(b) != structural_key(c)


def test_constant_rejects_bad_text():
    for bad in ["", "a b", "[x", "=>"]:
        with pytest.raises(ValueError):
            Constant(bad)


def test_template_file_round_trip():
    ts = [parse_template(WHEN_TPL), parse_template(UNMERGED)]
    text = write_templates(ts)
    assert read_templates(text + "# a comment\n\n") == ts
    with pytest.raises(ValueError):
        read_templates(WHEN_TPL)


def test_parse_exprs_rejects_arrow():
    with pytest.raises(TemplateSyntaxError):
        parse_exprs("[r] => [r]")


# -- rendering --------------------------------------------------------------

def test_render_ericsson(ericsson):
    t = parse_template(WHEN_TPL)
    assert render(t, ericsson) == ("When does Ericsson pay dividends to the shareholders?",
                                   "every first quarter of the year")


def test_render_missing_answer_chain(ericsson):
    no_tmod = make_tree([(n.form, n.lemma, n.upos, "|".join(n.morph), n.head,
                          "obl:npmod" if n.deprel == "obl:tmod" else n.deprel)
                         for n in ericsson.nodes])
    assert render(parse_template(WHEN_TPL), no_tmod) is None


def test_render_whole_sentence(tim):
    q, a = render(parse_template("t\t<r> => <r>"), tim)
    assert q == a == "Tim plays basketball with friends and family every Tuesday"


def test_render_strict_requires_ids(tim):
    t = parse_template("t\t[r.obj#4] => [r]")
    assert render(t, tim, strict=True) is None
    assert render(t, tim, strict=False) == ("basketball", "plays")


def test_lemma_falls_back_to_form():
    t = make_tree([("runs", "", "VERB", "", 0, "root")])
    assert render(parse_template("x\t[r.lemma] => [r]"), t) == ("runs", "runs")


@given(templates, trees())
def test_render_is_total(t, tree):
    out = render(t, tree)
    assert out is None or all(isinstance(s, str) for s in out)


@given(trees(), st.data())
def test_render_never_emits_negated_tokens(tree, data):
    node = data.draw(st.sampled_from(tree.nodes))
    kids = tree.children(node.id)
    if not kids:
        return
    k = data.draw(st.sampled_from(kids))
    expr = SubtreeLevel(tree.chain_to(node.id), (Negative(RelChain(((k.deprel, k.id),)), False),))
    t = Template("x", (expr,), (Constant("a"),))
    q, _ = render(t, tree, strict=True)
    # positions, not strings: forms repeat in random trees
    from treeqg.templates import render_tokens
    toks, _ = render_tokens(t, tree, strict=True)
    assert not {n.id for _, n, _ in toks} & tree.subtree_ids(k.id)
