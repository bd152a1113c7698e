"""
The command line pipeline on a synthetic corpus
===============================================

Writes a small parsed QA dataset, then runs induce, train, generate and
eval exactly as a shell user would.
"""

import json
import tempfile
from pathlib import Path

from treeqg.cli import main
from treeqg.toy import write_toy

work = Path(tempfile.mkdtemp(prefix="treeqg-demo-"))
toy = write_toy(work / "toy")
print("working in", work)

# %%
# Induction: templates, guards and a small statistics table.
main(["induce", str(toy / "dataset.jsonl"), "-o", str(work / "out")])
print((work / "out" / "stats.tsv").read_text())
print((work / "out" / "templates.tpl").read_text())

# %%
# Ranking models: pos-morph trigrams from a parsed corpus, question words
# from the dataset.
main(["train", str(toy / "corpus.conllu"), str(toy / "dataset.jsonl"), "-o", str(work / "model.txt")])

# %%
# Generation on held-out sentences, keeping the two best pairs per sentence.
main(["--top-k", "2", "generate", str(toy / "input.conllu"),
      "--templates", str(work / "out" / "templates.tpl"),
      "--guards", str(work / "out" / "guards.grd"),
      "--model", str(work / "model.txt"), "-o", str(work / "qa.jsonl")])
rows = [json.loads(line) for line in (work / "qa.jsonl").read_text().splitlines()]
for r in rows[:6]:
    print(f'{r["id"]:4} {r["rank"]}  {r["r_qa"]:.3f}  {r["question"]}  ->  {r["answer"]}')

# %%
# Evaluation against made-up references, one word off from the top question.
# Only rank 1 counts.
refs = {r["id"]: [r["question"].replace("every", "on")] for r in rows if r["rank"] == 1}
with open(work / "refs.jsonl", "w") as f:
    for i, rs in refs.items():
        f.write(json.dumps({"id": i, "refs": rs}) + "\n")
main(["eval", str(work / "qa.jsonl"), str(work / "refs.jsonl"), "-o", str(work / "metrics.tsv")])
print((work / "metrics.tsv").read_text())
