"""
Agreement between judges on ordinal scores
==========================================

Free-marginal kappa, the pooled Goodman-Kruskal gamma and the per-item
aggregates used to summarize human evaluation.
"""

import numpy as np

from treeqg.metrics import (JudgementMatrix, aggregate_ordinal, concordance_counts, gamma_n,
                            randolph_kappa)

# 6 questions, 3 judges, scores 1..4
scores = np.array([
    [4, 4, 3],
    [2, 1, 2],
    [3, 3, 3],
    [1, 2, 1],
    [4, 3, 4],
    [2, 2, 1],
])
j = JudgementMatrix(scores, categories=4)

# %%
# kappa assumes chance agreement is uniform over the 4 categories.
print("kappa", round(randolph_kappa(j), 4))

# %%
# gamma pools concordant and discordant item pairs over all judge pairs;
# pairs tied by a judge count for neither.
C, D = concordance_counts(j)
print("C", C, "D", D, "gamma_N", round(gamma_n(j), 4))

# averaging per-pair gammas weighs pairs with many ties too heavily
for a, b in [(0, 1), (0, 2), (1, 2)]:
    print(f"judges {a},{b}: gamma", round(gamma_n(JudgementMatrix(scores[:, [a, b]])), 4))

# %%
# Per item: median and the worst of several modes.
for row in scores.tolist():
    print(row, aggregate_ordinal(row, ideal=4))
