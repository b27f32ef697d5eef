# # Inside the linear-chain CRF
#
# The CRF works on two arrays per sentence: emission scores `E[t, y]` and
# transition scores `T[y, y']`.  Everything else (likelihood, gradient,
# marginals, decoding) is a dynamic program over them.  For tiny inputs the
# programs can be checked against plain enumeration of every label sequence.

# %%

import itertools

import numpy as np

from hybridner.corpus import LABELS
from hybridner.crf import log_partition, node_marginals, transition_mask, viterbi

rng = np.random.default_rng(0)
labels = LABELS[:5]          # O, B-PER, I-PER, B-LOC, I-LOC
E = rng.normal(size=(4, 5))
T = rng.normal(size=(5, 5))

# %% [markdown]
# ## Partition function
#
# Summing the exponentiated score of all 5**4 sequences gives log Z directly.

# %%

def score(y):
    return E[np.arange(len(y)), y].sum() + sum(T[a, b] for a, b in zip(y, y[1:]))

scores = np.array([score(y) for y in itertools.product(range(5), repeat=4)])
brute = np.log(np.exp(scores - scores.max()).sum()) + scores.max()
print(f"forward-backward {log_partition(E, T):.12f}")
print(f"enumeration      {brute:.12f}")

# %% [markdown]
# ## Marginals
#
# Each row is a distribution over the five labels for one token.

# %%

P = node_marginals(E, T)
print(np.round(P, 3))
print("row sums:", P.sum(axis=1))

# %% [markdown]
# ## Constrained decoding
#
# Decoding forbids `I-X` unless the previous tag is `B-X` or `I-X`, and
# forbids `I-X` at the start.  Pushing all the I scores up shows the effect:
# the unconstrained argmax produces an invalid sequence, the constrained one
# does not.

# %%

E_bad = E.copy()
E_bad[:, [2, 4]] += 4.0
start, allowed = transition_mask(labels)
print("unconstrained:", [str(labels[k]) for k in viterbi(E_bad, T)])
print("constrained:  ", [str(labels[k]) for k in viterbi(E_bad, T, start, allowed)])

# %% [markdown]
# ## Numerical range
#
# All recursions run in log space, so long sentences with large weights stay
# finite.

# %%

E_long = rng.uniform(-50, 50, size=(500, 15))
T_long = rng.uniform(-50, 50, size=(15, 15))
print("log Z over 500 tokens:", log_partition(E_long, T_long))
