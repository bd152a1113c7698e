"""
From one sentence to a template and its guard
=============================================

Walks the Tim example through every induction step, then renders the
resulting kind of template on a sentence it has never seen.
"""

from treeqg import toy
from treeqg.guard_induction import SupportSet, induce_guards
from treeqg.guards import serialize_guard
from treeqg.induction import SRConfig, sentence_transform, shift_reduce, merge_negatives
from treeqg.templates import Template, parse_template, render, serialize_exprs, serialize_template
from treeqg.treebank import LangConfig

cfg = LangConfig(lowercase=False)
tim = toy.TIM
print(" ".join(tim.forms))

# %%
# Step 1: every question word found in the sentence becomes a node expression,
# the rest stay constants. Among several matches the one closest to its
# neighbours in the tree wins.
question = "When does Tim play basketball with friends".split()
exprs = sentence_transform(question, tim, cfg)
print(serialize_exprs(exprs))

answer = sentence_transform(["every", "Tuesday"], tim, cfg, question=False)
print(serialize_exprs(answer))

# %%
# Step 2: shift-reduce merges neighbouring expressions into subtrees,
# listing what must be cut away as negatives.
trace = []
merged = shift_reduce(exprs, tim, cfg=SRConfig(), trace=trace)
for step in trace:
    print(f"{step.action:6}  stack: {serialize_exprs(step.stack)}")
print(serialize_exprs(merged))

# %%
# Step 3: negatives that together remove a whole subtree collapse into one.
t = Template("template1", tuple(merged), tuple(shift_reduce(answer, tim, fallback=False)))
t = merge_negatives(t, tim)
print(serialize_template(t))

# %%
# Guards: what the supporting sentence looked like around the root.
for g in induce_guards(t, SupportSet(t.id, [tim])):
    print(serialize_guard(g))

# %%
# Rendering on a new sentence. Chains are followed by relation, ids only
# break ties, so the template transfers.
t5 = parse_template("t5\tWhen does [r.nsubj#1] [r.lemma] [r.obj#3] <r.obl#5>? => <r.obl:tmod#9>")
print(" ".join(toy.ERICSSON.forms))
print(render(t5, toy.ERICSSON))
