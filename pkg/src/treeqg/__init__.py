"""Question generation from dependency trees via induced templates and guards."""

from .guard_induction import SupportSet, base_guard, complementary_guards, induce_guards
from .guards import Guard, GuardClause, eval_guard, parse_guard, serialize_guard
from .induction import (SRConfig, Triple, find_triples, induce, induce_template,
                        is_satisfactory, merge_negatives, select_min_id_sum,
                        sentence_transform, shift_reduce)
from .metrics import (EvalPair, JudgementMatrix, aggregate_ordinal, bleu, cider, gamma_n,
                      randolph_kappa, rouge_l)
from .scoring import (NgramModel, QWordModel, ScoredQA, backoff_prob, rank_and_filter,
                      score_qword, score_question, train_ngram)
from .templates import Template, parse_template, render, serialize_template
from .treebank import (DepNode, DepTree, LangConfig, RelChain, parse_conllu, pos_morph,
                       preprocess, resolve_chain, subtree_text)

__version__ = "0.1.0"
